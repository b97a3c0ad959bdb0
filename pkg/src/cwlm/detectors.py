"""Linear detector correlators, derived rates and the noise inequalities
that restrict them, plus the parameter presets of the three scenarios.

Detector indices are 0-based in code: ``s_qv[0][1]`` is S_QV^(1,2).
All correlators are zero-frequency values in hbar = 1 units.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .errors import InvalidConfiguration
from .qubit import HamiltonianParams

CHECK_TOL = 1e-12


def _as_matrix(value, name: str) -> np.ndarray:
    arr = np.array(value, dtype=float)
    if arr.shape == ():
        arr = np.diag([float(arr)] * 2)
    elif arr.shape == (2,):
        arr = np.diag(arr)
    if arr.shape != (2, 2):
        raise InvalidConfiguration(f"{name} must be a scalar, a pair or a 2x2 matrix")
    if not np.all(np.isfinite(arr)):
        raise InvalidConfiguration(f"{name} has non-finite entries")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class DetectorCorrelators:
    """Noise spectral densities and responses of two linear detectors.

    Each field accepts a scalar (same diagonal value for both detectors,
    zero cross terms), a pair of diagonal values, or a full 2x2 matrix.
    """

    s_qq: np.ndarray
    s_vv: np.ndarray
    a_vq: np.ndarray
    s_qv: np.ndarray = field(default_factory=lambda: np.zeros((2, 2)))
    a_qv: np.ndarray = field(default_factory=lambda: np.zeros((2, 2)))

    def __post_init__(self):
        for name in ("s_qq", "s_vv", "a_vq", "s_qv", "a_qv"):
            object.__setattr__(self, name, _as_matrix(getattr(self, name), name))
        if np.any(np.diag(self.s_qq) < 0) or np.any(np.diag(self.s_vv) < 0):
            raise InvalidConfiguration("diagonal S_QQ and S_VV must be non-negative")
        for name in ("s_qq", "s_vv"):
            m = getattr(self, name)
            if not np.allclose(m, m.T, atol=CHECK_TOL, rtol=0):
                raise InvalidConfiguration(f"{name} must be symmetric")

    @classmethod
    def identical(cls, s_qq: float, s_vv: float, a_vq: float, s_qv: float = 0.0,
                  a_qv: float = 0.0) -> "DetectorCorrelators":
        """Two identical, independent detectors (all cross terms zero)."""
        return cls(s_qq=s_qq, s_vv=s_vv, a_vq=a_vq, s_qv=s_qv, a_qv=a_qv)

    @classmethod
    def ideal(cls, t_a: float = 1.0, a_vq: float = 2.0) -> "DetectorCorrelators":
        """Identical detectors saturating the Cauchy-Schwarz bound (K = 1)."""
        s_vv = t_a * a_vq ** 2 / 4.0
        return cls.identical(s_qq=1.0 / t_a, s_vv=s_vv, a_vq=a_vq)

    def scaled(self, alpha: float, beta) -> "DetectorCorrelators":
        """Rescale Q -> alpha Q and V_i -> beta_i V_i."""
        beta = np.broadcast_to(np.asarray(beta, dtype=float), (2,))
        bb = np.outer(beta, beta)
        return DetectorCorrelators(
            s_qq=self.s_qq * alpha ** 2,
            s_vv=self.s_vv * bb,
            # S_QV^(i,j) = <Q_i V_j>, a_VQ^(i,j) ~ <V_i Q_j>
            s_qv=self.s_qv * alpha * beta[None, :],
            a_vq=self.a_vq * alpha * beta[:, None],
            a_qv=self.a_qv * alpha * beta[None, :],
        )

    def to_dict(self) -> dict:
        return {k: getattr(self, k).tolist() for k in ("s_qq", "s_vv", "a_vq", "s_qv", "a_qv")}


@dataclass(frozen=True)
class DerivedDetectorQuantities:
    gamma_i: np.ndarray
    gamma: float
    t_a: np.ndarray
    k: np.ndarray
    sigma2: np.ndarray | None


def derived_quantities(c: DetectorCorrelators, T: float | None = None) -> DerivedDetectorQuantities:
    """Dephasing rates, acquisition times t_a = 4 S_VV/a_VQ^2, ideality
    K_i = gamma_i t_a_i and, for T > 0, the Gaussian output variance
    sigma_i^2 = t_a_i/(4T) in normalized units."""
    a = np.diag(c.a_vq)
    if np.any(a == 0):
        raise InvalidConfiguration("a_VQ^(i,i) = 0: acquisition time undefined")
    gamma_i = np.diag(c.s_qq).copy()
    t_a = 4.0 * np.diag(c.s_vv) / a ** 2
    sigma2 = None
    if T is not None:
        if T <= 0:
            raise ValueError("T must be positive")
        sigma2 = t_a / (4.0 * T)
    return DerivedDetectorQuantities(gamma_i, float(gamma_i.sum()), t_a, gamma_i * t_a, sigma2)


@dataclass(frozen=True)
class InequalityReport:
    name: str
    lhs: float
    rhs: float
    passed: bool

    def line(self) -> str:
        verdict = "pass" if self.passed else "FAIL"
        return f"{self.name:<28s} lhs={self.lhs:.9g} rhs={self.rhs:.9g} {verdict}"


def _verdict(name: str, lhs: float, rhs: float) -> InequalityReport:
    scale = max(1.0, abs(lhs), abs(rhs))
    return InequalityReport(name, float(lhs), float(rhs), bool((lhs - rhs) / scale >= -CHECK_TOL))


def check_pairwise_cs(c: DetectorCorrelators, i: int, j: int) -> InequalityReport:
    """S_QQ^(i,i) S_VV^(j,j) - |S_QV^(i,j)|^2 >= |a_VQ^(j,i) - a_QV^(i,j)|^2 / 4."""
    lhs = c.s_qq[i, i] * c.s_vv[j, j] - abs(c.s_qv[i, j]) ** 2
    rhs = 0.25 * abs(c.a_vq[j, i] - c.a_qv[i, j]) ** 2
    return _verdict(f"cauchy_schwarz({i + 1},{j + 1})", lhs, rhs)


def delta_z(z: complex) -> float:
    """Delta[z] = (|1 + z^2| - (1 + |z|^2))/2, never positive."""
    z = complex(z)
    return 0.5 * (abs(1 + z * z) - (1 + abs(z) ** 2))


def check_pairwise_cs_delta(c: DetectorCorrelators, i: int) -> InequalityReport:
    """Zero-frequency form of the Delta[z]-refined bound for detector i:
    S_QQ S_VV - |S_QV|^2 >= |w|^2 (1 + Delta[S_QV/w]), w = (a_VQ - a_QV)/2.

    Written as (|w|^2 + |w^2 + S_QV^2| - |S_QV|^2)/2, which stays finite at w = 0.
    """
    s = complex(c.s_qv[i, i])
    w = 0.5 * complex(c.a_vq[i, i] - c.a_qv[i, i])
    lhs = c.s_qq[i, i] * c.s_vv[i, i] - abs(s) ** 2
    rhs = 0.5 * (abs(w) ** 2 + abs(w * w + s * s) - abs(s) ** 2)
    return _verdict(f"cauchy_schwarz_delta({i + 1})", lhs, rhs)


def _require_active(c: DetectorCorrelators):
    if np.any(np.diag(c.s_vv) == 0):
        raise InvalidConfiguration("S_VV^(i,i) = 0 for an active detector")


def check_two_detector(c: DetectorCorrelators) -> InequalityReport:
    """The extra two-detector restriction on S_QQ^(1,1) + S_QQ^(2,2)."""
    _require_active(c)
    s11, s22 = c.s_vv[0, 0], c.s_vv[1, 1]
    d1 = c.a_vq[0, 0] - c.a_qv[0, 0]
    d2 = c.a_vq[1, 1] - c.a_qv[1, 1]
    q11, q22 = c.s_qv[0, 0], c.s_qv[1, 1]
    q12, q21 = c.s_qv[0, 1], c.s_qv[1, 0]
    rhs = (0.25 * abs(d1) ** 2 / s11 + abs(q11) ** 2 / s11
           + 0.25 * abs(d2) ** 2 / s22 + abs(q22) ** 2 / s22
           + abs(d1 * q21 / s11 - d2 * q12 / s22)
           + abs(q21) ** 2 / s11 + abs(q12) ** 2 / s22)
    lhs = c.s_qq[0, 0] + c.s_qq[1, 1]
    return _verdict("two_detector", lhs, rhs)


@dataclass(frozen=True)
class AppendixReport:
    cond1: InequalityReport
    cond1_good_amplifier: InequalityReport
    cond2_1: InequalityReport
    cond2_2: InequalityReport

    @property
    def passed(self) -> bool:
        return self.cond1.passed and self.cond2_1.passed and self.cond2_2.passed

    def reports(self) -> list[InequalityReport]:
        return [self.cond1, self.cond1_good_amplifier, self.cond2_1, self.cond2_2]


def cross_noise_bound(c: DetectorCorrelators, orientation: int = +1,
                      good_amplifier: bool = False) -> float:
    """Right-hand side of the cross-noise positivity condition.

    ``orientation=+1`` is prep |Z+>, post |Z->; ``-1`` the swapped pair.
    """
    _require_active(c)
    if good_amplifier:
        d1, d2 = c.a_vq[0, 0], c.a_vq[1, 1]
    else:
        d1 = c.a_vq[0, 0] - c.a_qv[0, 0]
        d2 = c.a_vq[1, 1] - c.a_qv[1, 1]
    q11, q22 = c.s_qv[0, 0], c.s_qv[1, 1]
    q12, q21 = c.s_qv[0, 1], c.s_qv[1, 0]
    s = float(orientation)
    term2 = ((d2 - s * 2 * q12) ** 2 + (2 * q22) ** 2) / c.s_vv[1, 1]
    term1 = ((d1 + s * 2 * q21) ** 2 + (2 * q11) ** 2) / c.s_vv[0, 0]
    return 0.25 * (term1 + term2)


def check_appendix_conditions(c: DetectorCorrelators) -> AppendixReport:
    _require_active(c)
    lhs = c.s_qq[0, 0] + c.s_qq[1, 1]
    d1 = c.a_vq[0, 0] - c.a_qv[0, 0]
    d2 = c.a_vq[1, 1] - c.a_qv[1, 1]
    rhs1 = 0.25 * (abs(d1) ** 2 / c.s_vv[0, 0] + abs(d2) ** 2 / c.s_vv[1, 1])
    rhs1_ga = 0.25 * (c.a_vq[0, 0] ** 2 / c.s_vv[0, 0] + c.a_vq[1, 1] ** 2 / c.s_vv[1, 1])
    return AppendixReport(
        cond1=_verdict("condition_1", lhs, rhs1),
        cond1_good_amplifier=_verdict("condition_1_good_amplifier", lhs, rhs1_ga),
        cond2_1=_verdict("condition_2.1", lhs, cross_noise_bound(c, +1)),
        cond2_2=_verdict("condition_2.2", lhs, cross_noise_bound(c, -1)),
    )


def validate(c: DetectorCorrelators) -> list[InequalityReport]:
    """Every inequality the validator enforces, in report order."""
    reports = [check_pairwise_cs(c, i, j) for i in range(2) for j in range(2)]
    reports += [check_pairwise_cs_delta(c, i) for i in range(2)]
    reports.append(check_two_detector(c))
    app = check_appendix_conditions(c)
    reports += [app.cond1, app.cond2_1, app.cond2_2]
    return reports


# --- scenario presets -----------------------------------------------------

@dataclass(frozen=True)
class DissipationRates:
    """Environmental rates of the experimental master equation [1/time]."""

    gamma_d: float = 0.0
    gamma_up: float = 0.0
    gamma_down: float = 0.0

    def __post_init__(self):
        if min(self.gamma_d, self.gamma_up, self.gamma_down) < 0:
            raise InvalidConfiguration("dissipation rates must be non-negative")


MODELS = ("ideal", "experimental")


@dataclass(frozen=True)
class SystemConfig:
    """Everything the evolution engine needs besides states and T.

    ``model='ideal'`` takes the back-action from S_QQ via D[O_i];
    ``model='experimental'`` replaces it with explicit dephasing,
    excitation and relaxation rates.
    """

    model: str
    correlators: DetectorCorrelators
    hamiltonian: HamiltonianParams = HamiltonianParams()
    rates: DissipationRates = DissipationRates()
    observables: tuple[str, str] = ("x", "y")
    name: str = "custom"

    def __post_init__(self):
        if self.model not in MODELS:
            raise InvalidConfiguration(f"unknown model {self.model!r}; expected one of {MODELS}")

    def with_hamiltonian(self, **kw) -> "SystemConfig":
        return replace(self, hamiltonian=replace(self.hamiltonian, **kw))

    def effective_correlators(self) -> DetectorCorrelators:
        """Correlators whose S_QQ reflects the back-action actually simulated.

        In the experimental model the sigma_x, sigma_y back-action is carried
        by the gamma_up/gamma_down terms: D[sx] + D[sy] = 2(D[s+] + D[s-]),
        so the share attributable to each detector is min(up, down)/2.
        """
        if self.model == "ideal":
            return self.correlators
        s_qq = np.array(self.correlators.s_qq, dtype=float)
        backaction = 0.5 * min(self.rates.gamma_up, self.rates.gamma_down)
        np.fill_diagonal(s_qq, backaction)
        return replace(self.correlators, s_qq=s_qq)

    @property
    def t_a(self) -> np.ndarray:
        return derived_quantities(self.correlators).t_a

    def ideality(self) -> float:
        """K: gamma_i t_a for the ideal model, gamma_d t_a for the experimental one."""
        t_a = float(self.t_a.mean())
        if self.model == "ideal":
            return float(np.diag(self.correlators.s_qq).mean() * t_a)
        return self.rates.gamma_d * t_a


# Rates quoted for the transmon fluorescence setup, in 1/us.
EXPERIMENTAL_RATES = DissipationRates(gamma_d=1 / 15.6, gamma_up=1 / 56.0, gamma_down=1 / 22.5)
EXPERIMENTAL_T_A = 2 * 92.0  # 2/t_a = 1/(92 us)
# No Rabi frequency is quoted for the experimental runs.  This is the value at
# which a detuning of 1.7 Omega maximizes the steady-state |<sigma_x>| for the
# rates above (see tests/test_detectors.py::test_experimental_rabi_frequency).
EXPERIMENTAL_RABI = 0.27648915
DETUNED_RATIO = 1.7

SCENARIOS = ("ideal", "experimental", "experimental_detuned")


def scenario(tag: str, *, omega: float | None = None, t_a: float | None = None,
             a_vq: float = 2.0) -> SystemConfig:
    """Preset configuration for scenario ``ideal`` (i), ``experimental`` (ii)
    or ``experimental_detuned`` (iii).  Outputs are normalized so that
    a_VQ = 2 by default, i.e. S_VV = t_a."""
    if tag == "ideal":
        t_a = 1.0 if t_a is None else t_a
        omega = 10.0 / t_a if omega is None else omega
        return SystemConfig("ideal", DetectorCorrelators.ideal(t_a, a_vq),
                            HamiltonianParams(omega_x=omega), name=tag)
    if tag in ("experimental", "experimental_detuned"):
        t_a = EXPERIMENTAL_T_A if t_a is None else t_a
        omega = EXPERIMENTAL_RABI if omega is None else omega
        delta = DETUNED_RATIO * omega if tag == "experimental_detuned" else 0.0
        rates = EXPERIMENTAL_RATES
        c = DetectorCorrelators.identical(
            s_qq=0.5 * min(rates.gamma_up, rates.gamma_down),
            s_vv=t_a * a_vq ** 2 / 4.0, a_vq=a_vq)
        return SystemConfig("experimental", c, HamiltonianParams(omega_x=omega, delta=delta),
                            rates, name=tag)
    raise InvalidConfiguration(f"unknown scenario {tag!r}; expected one of {SCENARIOS}")
