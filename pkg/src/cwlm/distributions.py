"""Output distributions from generating functions.

P(V1, V2) = (T/2pi)^2 \\int d chi1 d chi2 exp(-i chi.V T) C(chi; T), evaluated
by FFT on centred grids: index k maps to chi = (k - n/2) dchi and the output
grid is V = (m - n/2) dV with dV = 2 pi/(n dchi T).  Outputs are reported
in normalized units O_i = V_i / a_VQ^(i,i).
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .detectors import SystemConfig
from .errors import GridError, NumericalOverflow
from .evolution import generating_function_grid, postselect_probability
from .qubit import build_postselection

EDGE_DAMPING = 1e-12
DEFAULT_N = 512


@dataclass(frozen=True)
class ChiGrid:
    n: tuple[int, int]
    chi_max: tuple[float, float]

    def __post_init__(self):
        for n in self.n:
            if n < 64 or n & (n - 1):
                raise GridError(f"grid size must be a power of two >= 64, got {n}")
        if min(self.chi_max) <= 0:
            raise GridError("chi_max must be positive")

    @property
    def spacing(self) -> tuple[float, float]:
        return tuple(2.0 * cm / n for cm, n in zip(self.chi_max, self.n))

    def axis(self, i: int) -> np.ndarray:
        n = self.n[i]
        return (np.arange(n) - n // 2) * self.spacing[i]

    def output_spacing(self, T: float) -> tuple[float, float]:
        """dV = 2 pi/(n dchi T) per axis."""
        return tuple(2 * np.pi / (n * d * T) for n, d in zip(self.n, self.spacing))


def chi_max_for(s_vv: float, T: float, edge: float = EDGE_DAMPING) -> float:
    """Counting field at which the Gaussian envelope exp(-S_VV chi^2 T/2) equals ``edge``."""
    if s_vv <= 0 or T <= 0:
        raise GridError("automatic grid needs S_VV > 0 and T > 0")
    return float(np.sqrt(2.0 * np.log(1.0 / edge) / (s_vv * T)))


def auto_grid(cfg: SystemConfig, T: float, n: int | tuple[int, int] = DEFAULT_N,
              chi_max=None) -> ChiGrid:
    if T <= 0:
        raise GridError("T must be positive")
    ns = (n, n) if np.isscalar(n) else tuple(n)
    if chi_max is None:
        s_vv = np.diag(cfg.correlators.s_vv)
        cm = tuple(chi_max_for(s, T) for s in s_vv)
    else:
        cm = (float(chi_max),) * 2 if np.isscalar(chi_max) else tuple(map(float, chi_max))
    return ChiGrid(tuple(int(k) for k in ns), cm)


def grid_for_output_range(cfg: SystemConfig, T: float, o_max, n: int = DEFAULT_N) -> ChiGrid:
    """Grid whose normalized output axes span [-o_max, o_max).

    Useful when the default edge-damping grid is too coarse in O.
    """
    o_max = (float(o_max),) * 2 if np.isscalar(o_max) else tuple(map(float, o_max))
    a = np.abs(np.diag(cfg.correlators.a_vq))
    # V range = pi/(dchi T) = n pi/(2 chi_max T)
    cm = tuple(n * np.pi / (2 * om * ai * T) for om, ai in zip(o_max, a))
    return ChiGrid((n, n), cm)


def _centered_dft(values: np.ndarray, axes) -> np.ndarray:
    """sum_k values_k exp(-2 pi i (k - n/2)(m - n/2)/n) along ``axes``."""
    out = np.asarray(values, dtype=complex)
    for ax in axes:
        n = out.shape[ax]
        sign_shape = [1] * out.ndim
        sign_shape[ax] = n
        alt = ((-1.0) ** np.arange(n)).reshape(sign_shape)
        out = np.fft.fft(out * alt, axis=ax) * alt * (-1.0) ** (n // 2)
    return out


def invert_characteristic(c_grid: np.ndarray, chi_axes, T: float):
    """Density of the time-averaged outputs V from C sampled on centred grids.

    Returns ``(v_axes, density)``; the density may carry an imaginary
    residue that callers inspect before discarding.
    """
    c_grid = np.asarray(c_grid, dtype=complex)
    dchi = [float(ax[1] - ax[0]) for ax in chi_axes]
    dens = _centered_dft(c_grid, range(c_grid.ndim))
    for d in dchi:
        dens = dens * (T * d / (2 * np.pi))
    v_axes = []
    for ax, d in zip(chi_axes, dchi):
        n = len(ax)
        dv = 2 * np.pi / (n * d * T)
        v_axes.append((np.arange(n) - n // 2) * dv)
    return v_axes, dens


def direct_inversion(c_grid: np.ndarray, chi_axes, v_axes, T: float) -> np.ndarray:
    """O(n^2)-per-axis reference evaluation of the same sum at arbitrary V."""
    out = np.asarray(c_grid, dtype=complex)
    for ax_i, (chi, v) in enumerate(zip(chi_axes, v_axes)):
        d = float(chi[1] - chi[0])
        kernel = np.exp(-1j * np.outer(v, chi) * T) * (T * d / (2 * np.pi))
        out = np.moveaxis(np.tensordot(kernel, np.moveaxis(out, ax_i, 0), axes=(1, 0)), 0, ax_i)
    return out


@dataclass
class Distribution1D:
    o: np.ndarray
    p: np.ndarray
    label: str = ""

    @property
    def spacing(self) -> float:
        return float(self.o[1] - self.o[0])

    @property
    def mass(self) -> float:
        return float(self.p.sum() * self.spacing)


@dataclass
class ConditionalSlice(Distribution1D):
    axis: int = 0
    given: float = 0.0
    row_mass: float = 1.0


@dataclass
class JointDistribution:
    o1: np.ndarray
    o2: np.ndarray
    p: np.ndarray
    post_probability: float = 1.0
    mass: float = 1.0
    imag_residue: float = 0.0
    metadata: dict = field(default_factory=dict)

    @property
    def spacing(self) -> tuple[float, float]:
        return float(self.o1[1] - self.o1[0]), float(self.o2[1] - self.o2[0])

    @property
    def cell(self) -> float:
        d1, d2 = self.spacing
        return d1 * d2

    def axis(self, i: int) -> np.ndarray:
        return self.o1 if i == 0 else self.o2

    def same_grid(self, other: "JointDistribution") -> bool:
        return (self.p.shape == other.p.shape and np.allclose(self.o1, other.o1)
                and np.allclose(self.o2, other.o2))


def joint_from_characteristic(c_grid: np.ndarray, grid: ChiGrid, T: float, a_vq,
                              post_probability: float = 1.0, metadata=None) -> JointDistribution:
    """Invert C on ``grid`` and rescale to normalized outputs O_i = V_i/a_i."""
    if not np.all(np.isfinite(c_grid)):
        raise NumericalOverflow("characteristic function has non-finite values")
    (v1, v2), dens = invert_characteristic(c_grid, (grid.axis(0), grid.axis(1)), T)
    a1, a2 = (float(x) for x in a_vq)
    o1, o2 = v1 / a1, v2 / a2
    p = dens.real * abs(a1 * a2)
    peak = float(np.abs(p).max())
    residue = float(np.abs(dens.imag).max() * abs(a1 * a2) / peak) if peak > 0 else 0.0
    if a1 < 0:
        o1, p = o1[::-1], p[::-1]
    if a2 < 0:
        o2, p = o2[::-1], p[:, ::-1]
    mass = float(p.sum() * abs(o1[1] - o1[0]) * abs(o2[1] - o2[0]))
    return JointDistribution(o1, o2, p, post_probability, mass, residue, dict(metadata or {}))


def joint_distribution(cfg: SystemConfig, rho_i: np.ndarray, post, T: float,
                       grid: ChiGrid | None = None, threads: int | None = None,
                       metadata=None) -> JointDistribution:
    """Joint density P(O1, O2) of the normalized time-averaged outputs."""
    post = build_postselection(post)
    grid = auto_grid(cfg, T) if grid is None else grid
    prob = postselect_probability(cfg, rho_i, post, T)
    c_grid = generating_function_grid(cfg, rho_i, post, grid.axis(0), grid.axis(1), T,
                                      threads=threads)
    meta = {"scenario": cfg.name, "model": cfg.model, "T": T, "post_mode": post.mode,
            "n": list(grid.n), "chi_max": list(grid.chi_max)}
    meta.update(metadata or {})
    return joint_from_characteristic(c_grid, grid, T, np.diag(cfg.correlators.a_vq), prob, meta)


def conditional_slice(jd: JointDistribution, axis: int, y: float) -> ConditionalSlice:
    """P(O_other | O_axis = y), linearly interpolated between grid lines and
    renormalized to unit mass."""
    cond = jd.axis(axis)
    if not cond[0] <= y <= cond[-1]:
        raise GridError(f"conditioning value {y} outside [{cond[0]}, {cond[-1]}]")
    pos = (y - cond[0]) / (cond[1] - cond[0])
    if abs(pos - round(pos)) < 1e-9:
        pos = float(round(pos))
    lo = int(np.floor(pos))
    frac = pos - lo
    if lo >= len(cond) - 1:
        lo, frac = len(cond) - 2, 1.0
    p = jd.p if axis == 0 else jd.p.T
    row = p[lo] if frac == 0.0 else (1 - frac) * p[lo] + frac * p[lo + 1]
    other = jd.axis(1 - axis)
    d = float(other[1] - other[0])
    row_mass = float(row.sum() * d)
    if row_mass < 1e-12:
        raise GridError(f"conditioning row at {y} has negligible mass {row_mass:.3e}")
    return ConditionalSlice(other.copy(), row / row_mass, f"O{2 - axis}|O{axis + 1}={y:g}",
                            axis=axis, given=float(y), row_mass=row_mass)


def marginal(jd: JointDistribution, axis: int) -> Distribution1D:
    """Distribution of O_{axis+1} with the other output summed out."""
    other_d = jd.spacing[1 - axis]
    p = jd.p.sum(axis=1 - axis) * other_d
    return Distribution1D(jd.axis(axis).copy(), p, f"O{axis + 1}")


@dataclass(frozen=True)
class Moments:
    mean: np.ndarray
    covariance: np.ndarray
    skewness: np.ndarray


def moments(dist) -> Moments:
    """Grid quadrature moments of a joint or one-dimensional distribution."""
    if isinstance(dist, JointDistribution):
        w = dist.p * dist.cell
        total = w.sum()
        g1, g2 = np.meshgrid(dist.o1, dist.o2, indexing="ij")
        mean = np.array([(w * g1).sum(), (w * g2).sum()]) / total
        d1, d2 = g1 - mean[0], g2 - mean[1]
        cov = np.array([[(w * d1 * d1).sum(), (w * d1 * d2).sum()],
                        [(w * d2 * d1).sum(), (w * d2 * d2).sum()]]) / total
        third = np.array([(w * d1 ** 3).sum(), (w * d2 ** 3).sum()]) / total
        skew = third / np.diag(cov) ** 1.5
        return Moments(mean, cov, skew)
    w = dist.p * dist.spacing
    total = w.sum()
    mean = (w * dist.o).sum() / total
    var = (w * (dist.o - mean) ** 2).sum() / total
    skew = (w * (dist.o - mean) ** 3).sum() / total / var ** 1.5
    return Moments(np.array([mean]), np.array([[var]]), np.array([skew]))


@dataclass(frozen=True)
class Certainty:
    difference: np.ndarray
    certainty: np.ndarray  # NaN where undefined


def difference_and_certainty(p_plus, p_minus, rel_floor: float = 1e-12) -> Certainty:
    """(P+ - P-) and (P+ - P-)/(P+ + P-) on a common grid."""
    def values(d):
        if isinstance(d, (JointDistribution, Distribution1D)):
            return d.p, (d.o1, d.o2) if isinstance(d, JointDistribution) else (d.o,)
        return np.asarray(d, dtype=float), None

    a, ax_a = values(p_plus)
    b, ax_b = values(p_minus)
    if a.shape != b.shape:
        raise GridError("distributions live on different grids")
    if ax_a is not None and ax_b is not None:
        if not all(np.allclose(x, y) for x, y in zip(ax_a, ax_b)):
            raise GridError("distributions live on different grids")
    diff = a - b
    total = a + b
    peak = float(np.abs(total).max()) if total.size else 0.0
    with np.errstate(divide="ignore", invalid="ignore"):
        cert = np.where(total > rel_floor * peak, diff / total, np.nan)
    return Certainty(diff, cert)


def certainty_slope(o: np.ndarray, certainty: np.ndarray, weight: np.ndarray | None = None,
                    rel_weight: float = 1e-3):
    """Least-squares slope beta of certainty = beta * O over the region where
    ``weight`` exceeds ``rel_weight`` of its peak.  Returns (beta, rms residual)."""
    mask = np.isfinite(certainty)
    if weight is not None:
        mask &= weight > rel_weight * np.nanmax(weight)
    x, y = o[mask], certainty[mask]
    if x.size < 2:
        return float("nan"), float("nan")
    beta = float(np.dot(x, y) / np.dot(x, x))
    resid = float(np.sqrt(np.mean((y - beta * x) ** 2)))
    return beta, resid
