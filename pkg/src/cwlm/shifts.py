"""Quasi-distribution of output shifts in the short-T, no-dynamics limit.

With outputs normalized to the +-1 Pauli eigenvalues, the generating
function of the shifts is

    C(chi) = Tr[rho_f U rho_i U] / Tr[rho_f rho_i],   U = exp(-i chi.sigma/2),

and the (signed) shift measure is C(s) = (2 pi)^-d \\int C(chi) exp(+i s.chi).
With this pairing a state polarized along +x shifts the x output by +1, the
same orientation as the detector outputs of the evolution engine.

For two outputs (chi_z = 0) the measure splits into radial building blocks

    C(s) = [F_cos + (P_i.P_f) delta - (v.grad) H + (a.grad)(b.grad) G] / (1 + P_i.P_f)

with v = P_i + P_f, a = P_i, b = P_f (in-plane parts) and F_cos, H, G the 2D
transforms of cos chi, sin chi/chi and (1 - cos chi)/chi^2.  Each block is
regularized by the damping exp(-xi^2 chi^2/2) and evaluated through the
inverse Abel transform of its (closed-form) line projection.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.special import ndtr

from .errors import GridError, ZeroOverlap
from .qubit import IDENTITY, SIGMA_X, SIGMA_Y, SIGMA_Z, BlochVector, bloch_to_density

OVERLAP_TOL = 1e-12
_AXES = {"x": 0, "y": 1, "z": 2}
_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(48)
_FEATURE_OFFSETS = np.array([-12, -8, -5, -3, -2, -1, 0, 1, 2, 3, 5, 8, 12], dtype=float)
_SUPPORT_PAD = 12.0


@dataclass(frozen=True)
class PolarizationPair:
    p_i: BlochVector
    p_f: BlochVector

    @classmethod
    def of(cls, p_i, p_f) -> "PolarizationPair":
        return cls(BlochVector.of(p_i), BlochVector.of(p_f))

    @property
    def overlap(self) -> float:
        """1 + P_i.P_f = 2 Tr[rho_f rho_i]."""
        return 1.0 + float(self.p_i.as_array() @ self.p_f.as_array())

    def check(self):
        if self.overlap <= OVERLAP_TOL:
            raise ZeroOverlap("prepared and post-selected states do not overlap")


def _u_matrix(chi: np.ndarray) -> np.ndarray:
    """exp(-i chi.sigma/2) for chi of shape (..., 3)."""
    norm = np.linalg.norm(chi, axis=-1)
    safe = np.where(norm > 0, norm, 1.0)
    n = chi / safe[..., None]
    n_sigma = (n[..., 0, None, None] * SIGMA_X + n[..., 1, None, None] * SIGMA_Y
               + n[..., 2, None, None] * SIGMA_Z)
    c = np.cos(norm / 2)[..., None, None]
    s = np.sin(norm / 2)[..., None, None]
    return c * IDENTITY - 1j * s * n_sigma


def shift_char_exact(pp: PolarizationPair, chi):
    """Trace-formula generating function; ``chi`` has shape (..., 3)."""
    pp.check()
    chi = np.asarray(chi, dtype=float)
    rho_i = bloch_to_density(pp.p_i)
    rho_f = bloch_to_density(pp.p_f)
    u = _u_matrix(chi)
    val = np.einsum("ij,...jk,kl,...li->...", rho_f, u, rho_i, u)
    return val / (0.5 * pp.overlap)


def shift_char_decomposed(pp: PolarizationPair, chi):
    """Scalar + vector + tensor form of the same generating function."""
    pp.check()
    chi = np.asarray(chi, dtype=float)
    pi, pf = pp.p_i.as_array(), pp.p_f.as_array()
    x = np.linalg.norm(chi, axis=-1)
    safe = np.where(x > 0, x, 1.0)
    sinc = np.where(x > 0, np.sin(x) / safe, 1.0)
    tens = np.where(x > 0, (1 - np.cos(x)) / safe ** 2, 0.5)
    scalar = np.cos(x) + pi @ pf
    vector = -1j * (chi @ (pi + pf)) * sinc
    tensor = -(chi @ pi) * (chi @ pf) * tens
    return (scalar + vector + tensor) / pp.overlap


def shift_moments(pp: PolarizationPair):
    """Mean shift (the weak value (P_i + P_f)/(1 + P_i.P_f)) and the
    second-moment matrix [I + (P_i P_f^T + P_f P_i^T)/2]/(1 + P_i.P_f)."""
    pp.check()
    pi, pf = pp.p_i.as_array(), pp.p_f.as_array()
    mean = (pi + pf) / pp.overlap
    second = (np.eye(3) + 0.5 * (np.outer(pi, pf) + np.outer(pf, pi))) / pp.overlap
    return mean, second


def shift_weights_1d(pp: PolarizationPair, axis: str = "x") -> np.ndarray:
    """Weights (w_-1, w_0, w_+1) of the shift measure of one output.

    Along a single axis C is a degree-one trigonometric polynomial, so a
    three-point inversion is exact.
    """
    k = _AXES[axis]
    chis = 2 * np.pi * np.arange(3) / 3
    pts = np.zeros((3, 3))
    pts[:, k] = chis
    vals = shift_char_exact(pp, pts)
    s = np.array([-1, 0, 1])
    w = (vals[None, :] * np.exp(1j * np.outer(s, chis))).sum(axis=1) / 3
    return w.real


def shift_density_1d(pp: PolarizationPair, axis: str, s, xi: float, kernel: str = "gaussian"):
    """Regularized one-output shift density: each weight spread by a
    width-``xi`` Gaussian or by the Lorentzian (xi/pi)/((s - A)^2 + xi^2)."""
    if xi <= 0:
        raise ValueError("xi must be positive")
    s = np.asarray(s, dtype=float)
    w = shift_weights_1d(pp, axis)
    out = np.zeros_like(s)
    for a, wa in zip((-1.0, 0.0, 1.0), w):
        d = s - a
        if kernel == "gaussian":
            out = out + wa * np.exp(-d ** 2 / (2 * xi ** 2)) / (xi * np.sqrt(2 * np.pi))
        elif kernel == "lorentzian":
            out = out + wa * xi / (np.pi * (d ** 2 + xi ** 2))
        else:
            raise ValueError(f"unknown kernel {kernel!r}")
    return out


# --- radial building blocks ------------------------------------------------

def _gauss(x, xi, order=0):
    g = np.exp(-x ** 2 / (2 * xi ** 2)) / (xi * np.sqrt(2 * np.pi))
    if order == 0:
        return g
    if order == 1:
        return -x / xi ** 2 * g
    if order == 2:
        return (x ** 2 / xi ** 4 - 1 / xi ** 2) * g
    if order == 3:
        return (-x ** 3 / xi ** 6 + 3 * x / xi ** 4) * g
    raise ValueError(order)


def _line_derivatives(t, xi):
    """First to third t-derivatives of the damped line projections of
    cos chi, sin chi/chi and (1 - cos chi)/chi^2."""
    ph = lambda x, k=0: _gauss(x, xi, k)  # noqa: E731
    cos1 = 0.5 * (ph(t - 1, 1) + ph(t + 1, 1))
    h1 = 0.5 * (ph(t + 1) - ph(t - 1))
    h2 = 0.5 * (ph(t + 1, 1) - ph(t - 1, 1))
    g1 = 0.5 * (ndtr((t + 1) / xi) - 2 * ndtr(t / xi) + ndtr((t - 1) / xi))
    g2 = 0.5 * (ph(t + 1) - 2 * ph(t) + ph(t - 1))
    g3 = 0.5 * (ph(t + 1, 1) - 2 * ph(t, 1) + ph(t - 1, 1))
    return cos1, (h1, h2), (g1, g2, g3)


def _abel_nodes(r: float, xi: float):
    """Quadrature nodes/weights in w = sqrt(t^2 - r^2) covering t in [r, 1 + pad xi]."""
    t_end = 1.0 + _SUPPORT_PAD * xi
    breaks = np.concatenate([_FEATURE_OFFSETS * xi, 1.0 + _FEATURE_OFFSETS * xi, [r, t_end]])
    breaks = np.unique(breaks[(breaks >= r) & (breaks <= t_end)])
    wb = np.sqrt(np.maximum(breaks ** 2 - r ** 2, 0.0))
    lo, hi = wb[:-1], wb[1:]
    half = 0.5 * (hi - lo)
    nodes = (0.5 * (hi + lo))[:, None] + half[:, None] * _GL_NODES[None, :]
    weights = half[:, None] * _GL_WEIGHTS[None, :]
    return nodes.ravel(), weights.ravel()


def radial_profiles(r: np.ndarray, xi: float) -> dict:
    """Regularized radial blocks at radii ``r``: F_cos, H', G'/r and G''."""
    r = np.asarray(r, dtype=float)
    out = {k: np.zeros_like(r) for k in ("cos", "h1", "g1_over_r", "g2")}
    r_floor = 1e-2 * xi
    t_end = 1.0 + _SUPPORT_PAD * xi
    for idx, r0 in enumerate(r):
        if r0 >= t_end:
            continue
        rr = max(r0, r_floor)
        w, wt = _abel_nodes(rr, xi)
        t = np.sqrt(rr ** 2 + w ** 2)
        cos1, (h1, h2), (g1, g2, g3) = _line_derivatives(t, xi)
        out["cos"][idx] = -(wt @ (cos1 / t)) / np.pi
        # H'(r) = -(r/pi) \int q'/t dw with q = p'/t
        hq1 = h2 / t - h1 / t ** 2
        out["h1"][idx] = -rr * (wt @ (hq1 / t)) / np.pi
        gq1 = g2 / t - g1 / t ** 2
        gq2 = g3 / t - 2 * g2 / t ** 2 + 2 * g1 / t ** 3
        i1 = wt @ (gq1 / t)
        i2 = wt @ ((gq2 / t - gq1 / t ** 2) / t)
        out["g1_over_r"][idx] = -i1 / np.pi
        out["g2"][idx] = -i1 / np.pi - rr ** 2 * i2 / np.pi
        if r0 < r_floor:
            # smooth radial functions: H' is odd, G'' and G'/r meet at the origin
            out["h1"][idx] *= r0 / r_floor
            out["g2"][idx] = out["g1_over_r"][idx]
    return out


def _radial_mesh(xi: float) -> np.ndarray:
    t_end = 1.0 + _SUPPORT_PAD * xi
    fine0 = np.linspace(0.0, 15 * xi, 151)
    ring = 1.0 + np.linspace(-15 * xi, _SUPPORT_PAD * xi, 271)
    inner = 1.0 - np.geomspace(15 * xi, 1.0, 160)
    outer0 = np.geomspace(15 * xi, 1.0, 160)
    coarse = np.linspace(0.0, 1.0, 101)
    mesh = np.concatenate([fine0, ring, inner, outer0, coarse, [t_end]])
    mesh = np.unique(mesh[(mesh >= 0) & (mesh <= t_end)])
    # near-duplicate knots make the spline ring; thin against the last kept knot
    kept = [mesh[0]]
    for x in mesh[1:]:
        if x - kept[-1] > 0.02 * xi:
            kept.append(x)
    if kept[-1] != t_end:
        kept[-1] = t_end
    return np.array(kept)


@dataclass
class RadialBlocks:
    """Splines of the radial building blocks for one regularization width."""

    xi: float
    r: np.ndarray
    splines: dict = field(repr=False)

    @classmethod
    def build(cls, xi: float) -> "RadialBlocks":
        if xi <= 0:
            raise ValueError("xi must be positive")
        r = _radial_mesh(xi)
        prof = radial_profiles(r, xi)
        return cls(xi, r, {k: CubicSpline(r, v) for k, v in prof.items()})

    @property
    def support(self) -> float:
        return 1.0 + _SUPPORT_PAD * self.xi

    def __call__(self, name: str, r: np.ndarray) -> np.ndarray:
        r = np.asarray(r, dtype=float)
        val = self.splines[name](np.minimum(r, self.support))
        return np.where(r < self.support, val, 0.0)


def regularized_density_2d(pp: PolarizationPair, blocks: RadialBlocks, sx, sy):
    """Regularized two-output shift measure evaluated at (sx, sy)."""
    pp.check()
    sx = np.asarray(sx, dtype=float)
    sy = np.asarray(sy, dtype=float)
    xi = blocks.xi
    pi, pf = pp.p_i.as_array(), pp.p_f.as_array()
    v = (pi + pf)[:2]
    a, b = pi[:2], pf[:2]
    r = np.hypot(sx, sy)
    safe = np.where(r > 0, r, 1.0)
    ux, uy = np.where(r > 0, sx / safe, 1.0), np.where(r > 0, sy / safe, 0.0)
    delta = np.exp(-r ** 2 / (2 * xi ** 2)) / (2 * np.pi * xi ** 2)
    dens = blocks("cos", r) + (pi @ pf) * delta
    vs = v[0] * ux + v[1] * uy
    dens = dens - vs * blocks("h1", r)
    if np.any(a) and np.any(b):
        a_s = a[0] * ux + a[1] * uy
        b_s = b[0] * ux + b[1] * uy
        dens = dens + a_s * b_s * blocks("g2", r) + (a @ b - a_s * b_s) * blocks("g1_over_r", r)
    return dens / pp.overlap


@dataclass
class ShiftMeasure:
    """Regularized two-output shift measure sampled on a rectangular grid."""

    pp: PolarizationPair
    xi: float
    s_x: np.ndarray
    s_y: np.ndarray
    values: np.ndarray
    blocks: RadialBlocks = field(repr=False, default=None)

    @property
    def cell(self) -> float:
        return float((self.s_x[1] - self.s_x[0]) * (self.s_y[1] - self.s_y[0]))

    @property
    def mass(self) -> float:
        return float(self.values.sum() * self.cell)

    def density(self, sx, sy):
        return regularized_density_2d(self.pp, self.blocks, sx, sy)


def default_shift_grid(xi: float, points_per_xi: float = 4.0, extent: float | None = None):
    """Square grid resolving the width-xi features and covering the support."""
    extent = 1.0 + (_SUPPORT_PAD + 1) * xi if extent is None else extent
    h = xi / points_per_xi
    n = int(np.ceil(extent / h))
    axis = np.arange(-n, n + 1) * h
    return axis, axis.copy()


def shift_quasi_2d(pp: PolarizationPair, grid=None, xi: float = 0.05,
                   blocks: RadialBlocks | None = None) -> ShiftMeasure:
    """Regularized two-output shift measure on ``grid = (s_x axis, s_y axis)``.

    The grid spacing should be a fraction of ``xi``; by default the grid is
    chosen that way.
    """
    if xi <= 0:
        raise GridError("regularization width xi must be positive")
    pp.check()
    blocks = RadialBlocks.build(xi) if blocks is None else blocks
    s_x, s_y = default_shift_grid(xi) if grid is None else (np.asarray(grid[0]), np.asarray(grid[1]))
    gx, gy = np.meshgrid(s_x, s_y, indexing="ij")
    values = regularized_density_2d(pp, blocks, gx, gy)
    return ShiftMeasure(pp, xi, s_x, s_y, values, blocks)


def _segment_rule(breaks: np.ndarray):
    breaks = np.unique(breaks)
    lo, hi = breaks[:-1], breaks[1:]
    half = 0.5 * (hi - lo)
    nodes = (0.5 * (hi + lo))[:, None] + half[:, None] * _GL_NODES[None, :]
    return nodes.ravel(), (half[:, None] * _GL_WEIGHTS[None, :]).ravel()


def marginal_density(pp: PolarizationPair, blocks: RadialBlocks, s, axis: str = "x"):
    """Marginal of the regularized 2D measure on one output, integrating the
    other output by piecewise Gauss-Legendre quadrature with breakpoints at
    the radii where the measure has structure."""
    s = np.asarray(s, dtype=float)
    xi = blocks.xi
    r_breaks = np.concatenate([_FEATURE_OFFSETS[_FEATURE_OFFSETS >= 0] * xi,
                               1.0 + _FEATURE_OFFSETS * xi, [blocks.support]])
    out = np.zeros_like(s)
    for k, s0 in enumerate(s):
        if abs(s0) >= blocks.support:
            continue
        rb = r_breaks[r_breaks > abs(s0)]
        half = np.sqrt(rb ** 2 - s0 ** 2)
        nodes, weights = _segment_rule(np.concatenate([[0.0], half]))
        other = np.concatenate([nodes, -nodes])
        wts = np.concatenate([weights, weights])
        if axis == "x":
            vals = regularized_density_2d(pp, blocks, np.full_like(other, s0), other)
        else:
            vals = regularized_density_2d(pp, blocks, other, np.full_like(other, s0))
        out[k] = wts @ vals
    return out


def cdf_distance_to_weights(s: np.ndarray, density: np.ndarray, weights) -> float:
    """Integral of |F(s) - F_exact(s)| between the CDF of a sampled density
    (trapezoid-integrated on ``s``) and the CDF of the exact weights at -1, 0, +1."""
    s = np.asarray(s, dtype=float)
    cdf = np.concatenate([[0.0], np.cumsum(0.5 * (density[1:] + density[:-1]) * np.diff(s))])
    exact = sum(w * (s >= a) for a, w in zip((-1.0, 0.0, 1.0), weights))
    diff = np.abs(cdf - exact)
    return float(np.sum(0.5 * (diff[1:] + diff[:-1]) * np.diff(s)))


def convolve_with_gaussian(sm, sigma, o1, o2=None):
    """Distribution obtained by smearing a shift measure with detector noise.

    ``sm`` is either a :class:`ShiftMeasure` (two outputs; the regularization
    width is removed from the Gaussian variance, which makes the result
    independent of xi) or a triple of 1D weights at -1, 0, +1.
    """
    if isinstance(sm, ShiftMeasure):
        s1, s2 = (float(x) for x in np.broadcast_to(sigma, (2,)))
        if min(s1, s2) <= sm.xi:
            raise GridError("Gaussian width must exceed the regularization width")
        v1, v2 = s1 ** 2 - sm.xi ** 2, s2 ** 2 - sm.xi ** 2
        o1 = np.asarray(o1, dtype=float)
        o2 = np.asarray(o2, dtype=float)
        g1 = np.exp(-(o1[:, None] - sm.s_x[None, :]) ** 2 / (2 * v1)) / np.sqrt(2 * np.pi * v1)
        g2 = np.exp(-(o2[:, None] - sm.s_y[None, :]) ** 2 / (2 * v2)) / np.sqrt(2 * np.pi * v2)
        return g1 @ (sm.values * sm.cell) @ g2.T
    w = np.asarray(sm, dtype=float)
    if w.shape != (3,):
        raise GridError("expected a ShiftMeasure or three 1D weights")
    s1 = float(np.asarray(sigma).reshape(-1)[0])
    o1 = np.asarray(o1, dtype=float)
    return sum(wa * np.exp(-(o1 - a) ** 2 / (2 * s1 ** 2)) / (s1 * np.sqrt(2 * np.pi))
               for a, wa in zip((-1.0, 0.0, 1.0), w))
