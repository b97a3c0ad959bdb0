"""Qubit operator algebra: Pauli matrices, states, post-selection operators
and the frame rotation used to remove trivial Rabi dynamics.

Basis ordering is (|Z+>, |Z->) = (|e>, |g>), so sigma_z = diag(1, -1) and
sigma_+ = |e><g|.  hbar = 1 throughout.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidPolarization, InvalidPostSelection

TOL = 1e-12

IDENTITY = np.eye(2, dtype=complex)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
SIGMA_PLUS = np.array([[0, 1], [0, 0]], dtype=complex)
SIGMA_MINUS = np.array([[0, 0], [1, 0]], dtype=complex)

PAULI = {"x": SIGMA_X, "y": SIGMA_Y, "z": SIGMA_Z}

# Named pure states as Bloch vectors.
NAMED_STATES = {
    "Z+": (0.0, 0.0, 1.0),
    "Z-": (0.0, 0.0, -1.0),
    "X+": (1.0, 0.0, 0.0),
    "X-": (-1.0, 0.0, 0.0),
    "Y+": (0.0, 1.0, 0.0),
    "Y-": (0.0, -1.0, 0.0),
}


def pauli(axis: str) -> np.ndarray:
    try:
        return PAULI[axis.lower()]
    except KeyError:
        raise ValueError(f"unknown Pauli axis {axis!r}") from None


@dataclass(frozen=True)
class BlochVector:
    px: float = 0.0
    py: float = 0.0
    pz: float = 0.0

    def __post_init__(self):
        comps = (self.px, self.py, self.pz)
        if not all(np.isfinite(comps)):
            raise InvalidPolarization(f"non-finite polarization {comps}")
        if sum(c * c for c in comps) > 1.0 + TOL:
            raise InvalidPolarization(f"|P| > 1 for polarization {comps}")

    @classmethod
    def of(cls, value) -> "BlochVector":
        """Coerce a BlochVector, a 3-sequence or a state name ('Z+', ...)."""
        if isinstance(value, BlochVector):
            return value
        if isinstance(value, str):
            try:
                return cls(*NAMED_STATES[value])
            except KeyError:
                raise InvalidPolarization(f"unknown state name {value!r}") from None
        px, py, pz = (float(v) for v in value)
        return cls(px, py, pz)

    def as_array(self) -> np.ndarray:
        return np.array([self.px, self.py, self.pz], dtype=float)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.as_array()))


def bloch_to_density(p) -> np.ndarray:
    """rho = (1 + P.sigma)/2."""
    p = BlochVector.of(p)
    return 0.5 * (IDENTITY + p.px * SIGMA_X + p.py * SIGMA_Y + p.pz * SIGMA_Z)


def density_to_bloch(rho: np.ndarray) -> BlochVector:
    return BlochVector(*(expectation(rho, a) for a in "xyz"))


def expectation(rho: np.ndarray, axis: str) -> float:
    return float(np.real(np.trace(rho @ pauli(axis))))


def is_density_matrix(rho: np.ndarray, tol: float = TOL) -> bool:
    rho = np.asarray(rho)
    if rho.shape != (2, 2):
        return False
    if not np.allclose(rho, rho.conj().T, atol=tol, rtol=0):
        return False
    if abs(np.trace(rho) - 1.0) > tol:
        return False
    return bool(np.linalg.eigvalsh(rho).min() >= -tol)


def state_vector(value) -> np.ndarray:
    """Normalized state vector from a name, Bloch unit vector or 2 amplitudes."""
    if isinstance(value, str) or (np.ndim(value) == 1 and len(value) == 3):
        p = BlochVector.of(value).as_array()
        n = np.linalg.norm(p)
        if abs(n - 1.0) > 1e-9:
            raise InvalidPostSelection(f"pure state needs a unit Bloch vector, got |P|={n}")
        theta = np.arccos(np.clip(p[2], -1.0, 1.0))
        phi = np.arctan2(p[1], p[0])
        return np.array([np.cos(theta / 2), np.exp(1j * phi) * np.sin(theta / 2)])
    psi = np.asarray(value, dtype=complex).reshape(2)
    n = np.linalg.norm(psi)
    if n == 0:
        raise InvalidPostSelection("zero state vector")
    return psi / n


@dataclass(frozen=True)
class PostSelection:
    """Concluding measurement outcome used to condition the statistics.

    ``operator`` is the Hermitian, unit-trace rho_f, or ``None`` for
    unconditioned statistics (plain trace).
    """

    mode: str
    operator: np.ndarray | None = field(default=None, compare=False)
    p_e: float = 0.0

    @property
    def conditioned(self) -> bool:
        return self.operator is not None

    def trace_with(self, rho: np.ndarray) -> complex:
        """Tr[rho_f rho], or Tr[rho] when unconditioned."""
        if self.operator is None:
            return complex(np.trace(rho))
        return complex(np.trace(self.operator @ rho))


NO_POSTSELECTION = PostSelection("none")


def build_postselection(value=None, *, psi1=None, psi2=None, p_e: float = 0.0) -> PostSelection:
    """Build a post-selection operator.

    ``value`` may be ``None``/``"none"`` (unconditioned), a pure state
    (name, unit Bloch vector or amplitudes), or a mapping with keys
    ``mode`` and, for ``faulty``, ``psi1``, ``psi2``, ``p_e``.  Faulty
    post-selection gives rho_f = (1-p_e)|psi1><psi1| + p_e|psi2><psi2|.
    """
    if isinstance(value, PostSelection):
        return value
    if isinstance(value, dict):
        mode = value.get("mode", "pure")
        if mode == "none":
            return NO_POSTSELECTION
        if mode == "pure":
            return build_postselection(value["state"])
        if mode == "faulty":
            return build_postselection(None, psi1=value["psi1"], psi2=value.get("psi2"),
                                       p_e=float(value.get("p_e", 0.0)))
        raise InvalidPostSelection(f"unknown post-selection mode {mode!r}")
    if value is None and psi1 is None:
        return NO_POSTSELECTION
    if isinstance(value, str) and value.lower() == "none":
        return NO_POSTSELECTION

    if psi1 is None:
        psi = state_vector(value)
        return PostSelection("pure", np.outer(psi, psi.conj()))

    if not 0.0 <= p_e <= 1.0:
        raise InvalidPostSelection(f"p_e must lie in [0, 1], got {p_e}")
    v1 = state_vector(psi1)
    v2 = state_vector(psi2) if psi2 is not None else np.array([-v1[1].conjugate(), v1[0].conjugate()])
    if abs(np.vdot(v1, v2)) > 1e-10:
        raise InvalidPostSelection("psi1 and psi2 must be orthogonal")
    rho_f = (1.0 - p_e) * np.outer(v1, v1.conj()) + p_e * np.outer(v2, v2.conj())
    return PostSelection("faulty", rho_f, p_e)


@dataclass(frozen=True)
class HamiltonianParams:
    """H_q = (omega_x sigma_x + omega_y sigma_y + delta sigma_z)/2."""

    omega_x: float = 0.0
    omega_y: float = 0.0
    delta: float = 0.0

    def __post_init__(self):
        if not np.all(np.isfinite([self.omega_x, self.omega_y, self.delta])):
            raise ValueError("Hamiltonian parameters must be finite")

    @property
    def omega_bar_sq(self) -> float:
        return self.omega_x ** 2 + self.omega_y ** 2

    def field(self) -> np.ndarray:
        """Vector h with H = h.sigma."""
        return 0.5 * np.array([self.omega_x, self.omega_y, self.delta])

    def matrix(self) -> np.ndarray:
        hx, hy, hz = self.field()
        return hx * SIGMA_X + hy * SIGMA_Y + hz * SIGMA_Z


def evolution_operator(h: HamiltonianParams, t: float) -> np.ndarray:
    """exp(-i H t) in closed form via the Pauli decomposition."""
    vec = h.field()
    norm = float(np.linalg.norm(vec))
    if norm == 0.0:
        return IDENTITY.copy()
    n = vec / norm
    n_sigma = n[0] * SIGMA_X + n[1] * SIGMA_Y + n[2] * SIGMA_Z
    return np.cos(norm * t) * IDENTITY - 1j * np.sin(norm * t) * n_sigma


def frame_rotate(post: PostSelection, h: HamiltonianParams, t: float) -> PostSelection:
    """Post-select on exp(-iHt)|Psi> instead of |Psi>."""
    if t < 0:
        raise ValueError("frame rotation time must be non-negative")
    if not post.conditioned:
        return post
    u = evolution_operator(h, t)
    return PostSelection(post.mode, u @ post.operator @ u.conj().T, post.p_e)
