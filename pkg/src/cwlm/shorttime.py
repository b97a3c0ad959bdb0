"""Closed-form statistics at short T with zero overlap between the prepared
state |Z+> and the post-selected state |Z->.

``gamma`` is the total measurement-induced dephasing rate
S_QQ^(1,1) + S_QQ^(2,2); outputs are normalized, O_i = V_i / a_i.
Counting fields ``chi`` are conjugate to V_i T, as in the numeric engine.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np


@dataclass(frozen=True)
class ShortTimeParams:
    omega_x: float
    omega_y: float
    gamma: float
    t_a1: float
    t_a2: float
    T: float
    a1: float = 2.0
    a2: float = 2.0
    s_vv_12: float = 0.0
    s_qv: np.ndarray = field(default_factory=lambda: np.zeros((2, 2)))

    def __post_init__(self):
        if self.T <= 0 or self.gamma <= 0 or min(self.t_a1, self.t_a2) <= 0:
            raise ValueError("need T > 0, gamma > 0 and t_a > 0")
        object.__setattr__(self, "s_qv", np.asarray(self.s_qv, dtype=float).reshape(2, 2))

    @classmethod
    def from_correlators(cls, c, omega_x: float, omega_y: float, T: float) -> "ShortTimeParams":
        a1, a2 = c.a_vq[0, 0], c.a_vq[1, 1]
        return cls(omega_x, omega_y, float(c.s_qq[0, 0] + c.s_qq[1, 1]),
                   4 * c.s_vv[0, 0] / a1 ** 2, 4 * c.s_vv[1, 1] / a2 ** 2, T, a1, a2,
                   float(c.s_vv[0, 1]), np.array(c.s_qv))

    def with_(self, **kw) -> "ShortTimeParams":
        return replace(self, **kw)

    @property
    def omega_bar_sq(self) -> float:
        return self.omega_x ** 2 + self.omega_y ** 2

    @property
    def s_vv(self) -> tuple[float, float]:
        return self.t_a1 * self.a1 ** 2 / 4, self.t_a2 * self.a2 ** 2 / 4

    @property
    def sigma2(self) -> tuple[float, float]:
        """Variances t_a_i/(4T) of the Gaussian reference."""
        return self.t_a1 / (4 * self.T), self.t_a2 / (4 * self.T)

    @property
    def norm(self) -> float:
        return 4 * self.gamma + self.T * self.omega_bar_sq


def char_function_xy(p: ShortTimeParams, chi1, chi2):
    """Joint characteristic function for H = (Omega_x sx + Omega_y sy)/2."""
    chi1 = np.asarray(chi1, dtype=float)
    chi2 = np.asarray(chi2, dtype=float)
    s1, s2 = p.s_vv
    poly = 4 * p.gamma + p.T * ((p.omega_x - 1j * p.a2 * chi2) ** 2
                                - (1j * p.omega_y - p.a1 * chi1) ** 2)
    return poly / p.norm * np.exp(-0.5 * p.T * (s1 * chi1 ** 2 + s2 * chi2 ** 2))


def gaussian_reference(p: ShortTimeParams, o1, o2):
    """Product Gaussian with variances sigma_i^2 = t_a_i/(4T), centred at 0."""
    v1, v2 = p.sigma2
    o1 = np.asarray(o1, dtype=float)
    o2 = np.asarray(o2, dtype=float)
    return (np.exp(-o1 ** 2 / (2 * v1) - o2 ** 2 / (2 * v2))
            / (2 * np.pi * np.sqrt(v1 * v2)))


def joint_dist_xy(p: ShortTimeParams, o1, o2):
    o1 = np.asarray(o1, dtype=float)
    o2 = np.asarray(o2, dtype=float)
    T = p.T
    bracket = (4 * p.gamma + T * ((p.omega_x - 4 * o2 / p.t_a2) ** 2
                                  + (p.omega_y + 4 * o1 / p.t_a1) ** 2
                                  - 4 / (T * p.t_a2) - 4 / (T * p.t_a1)))
    return bracket / p.norm * gaussian_reference(p, o1, o2)


def joint_dist_x(p: ShortTimeParams, o1, o2):
    """Sigma_x-drive form (Omega_y = 0), written out separately."""
    o1 = np.asarray(o1, dtype=float)
    o2 = np.asarray(o2, dtype=float)
    T, om = p.T, p.omega_x
    bracket = 4 * p.gamma + T * ((om - 4 * o2 / p.t_a2) ** 2 - 4 / (T * p.t_a2)
                                 + 4 / p.t_a1 * (4 * o1 ** 2 / p.t_a1 - 1 / T))
    return bracket / (4 * p.gamma + T * om ** 2) * gaussian_reference(p, o1, o2)


def average_outputs(p: ShortTimeParams) -> tuple[float, float]:
    """Mean normalized outputs; both saturate at the weak-value scale as T -> 0."""
    return 2 * p.omega_y / p.norm, -2 * p.omega_x / p.norm


def joint_dist_output_corr(p: ShortTimeParams, o1, o2, normalize: bool = True):
    """Distribution with correlated output noise S_VV^(1,2).

    The shift terms 2 O S_VV^(1,2)/(a1 a2) are used with the uncorrelated
    Gaussian reference, exactly as the closed form is usually quoted.  That
    form carries an excess mass T c^2 (sigma1^2 + sigma2^2)/(4 gamma + T Omega^2),
    c = 2 S_VV^(1,2)/(a1 a2); ``normalize=True`` divides it out, which does
    not move the zero set and so leaves the positivity condition unchanged.
    """
    o1 = np.asarray(o1, dtype=float)
    o2 = np.asarray(o2, dtype=float)
    T = p.T
    c = 2 * p.s_vv_12 / (p.a1 * p.a2)
    q1 = p.omega_x - 4 * o2 / p.t_a2 - c * o1
    q2 = p.omega_y + 4 * o1 / p.t_a1 + c * o2
    bracket = 4 * p.gamma + T * (q1 ** 2 + q2 ** 2 - 4 / (T * p.t_a2) - 4 / (T * p.t_a1))
    dens = bracket / p.norm * gaussian_reference(p, o1, o2)
    if normalize:
        v1, v2 = p.sigma2
        dens = dens / (1 + T * c ** 2 * (v1 + v2) / p.norm)
    return dens


def _cross_terms(p: ShortTimeParams, orientation: int):
    """Linear forms q1, q2 and the subtracted constant of the cross-noise
    distribution.  ``orientation=-1`` swaps preparation and post-selection."""
    s = float(orientation)
    T = p.T
    v1, v2 = p.sigma2
    k1, k2 = 1 / (T * v1), 1 / (T * v2)
    sq = p.s_qv
    c12 = 2 * sq[0, 1] / p.a2
    c11 = 2 * sq[0, 0] / p.a1
    c21 = 2 * sq[1, 0] / p.a1
    c22 = 2 * sq[1, 1] / p.a2
    # q1 = Omega_x + A O1 + B O2, q2 = Omega_y + C O1 + D O2
    A, B = c11 * k1, (c12 - s) * k2
    C, D = (s + c21) * k1, c22 * k2
    const = ((s - c12) ** 2 * k2 + c11 ** 2 * k1 + (s + c21) ** 2 * k1 + c22 ** 2 * k2) / T
    return (A, B, C, D), const


def joint_dist_cross_qv(p: ShortTimeParams, o1, o2, orientation: int = +1):
    """Distribution with input-output cross noises S_QV^(i,j).

    With all S_QV = 0 this is the sigma_x/sigma_y-drive result; the swapped
    orientation mirrors it.
    """
    o1 = np.asarray(o1, dtype=float)
    o2 = np.asarray(o2, dtype=float)
    (A, B, C, D), const = _cross_terms(p, orientation)
    q1 = p.omega_x + A * o1 + B * o2
    q2 = p.omega_y + C * o1 + D * o2
    bracket = 4 * p.gamma + p.T * (q1 ** 2 + q2 ** 2 - const)
    return bracket / p.norm * gaussian_reference(p, o1, o2)


def cross_qv_zero_point(p: ShortTimeParams, orientation: int = +1) -> np.ndarray:
    """Output pair at which both squared terms vanish (the bracket minimum)."""
    (A, B, C, D), _ = _cross_terms(p, orientation)
    return np.linalg.solve([[A, B], [C, D]], [-p.omega_x, -p.omega_y])


def bracket_minimum(p: ShortTimeParams, orientation: int = +1) -> float:
    """Exact minimum over all outputs of the cross-noise bracket."""
    _, const = _cross_terms(p, orientation)
    return 4 * p.gamma - p.T * const


@dataclass(frozen=True)
class PositivityReport:
    K: float
    passed: bool
    min_location: tuple[float, float]
    min_value: float


def positivity_threshold(p: ShortTimeParams) -> PositivityReport:
    """Positivity of the zero-overlap distribution for identical detectors.

    The bracket is smallest where both squares vanish, giving
    4 gamma - 8/t_a >= 0, i.e. K = (gamma/2) t_a >= 1 with gamma/2 the
    per-detector dephasing rate.
    """
    t_a = 0.5 * (p.t_a1 + p.t_a2)
    K = 0.5 * p.gamma * t_a
    loc = (-p.omega_y * p.t_a1 / 4, p.omega_x * p.t_a2 / 4)
    val = float(joint_dist_xy(p, *loc))
    return PositivityReport(K, bool(K >= 1 - 1e-12), loc, val)


def min_on_grid(density: np.ndarray, o1: np.ndarray, o2: np.ndarray):
    """(min value, (o1, o2) location) of a density sampled on an outer grid."""
    k = np.unravel_index(np.argmin(density), density.shape)
    return float(density[k]), (float(o1[k[0]]), float(o2[k[1]]))
