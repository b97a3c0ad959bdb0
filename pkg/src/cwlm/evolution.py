"""Counting-field augmented master equation and the conditioned generating
function of the time-integrated detector outputs.

Superoperators act on column-stacked 2x2 matrices, vec(A X B) = (B^T kron A) vec(X).
The counting fields are constant over (0, T) because the recorded quantity is
the flat time average of each output, so the propagator is one matrix
exponential of a constant 4x4 generator.
"""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .detectors import SystemConfig
from .errors import InvalidConfiguration, NumericalOverflow, ZeroPostSelectionProbability
from .qubit import (IDENTITY, SIGMA_MINUS, SIGMA_PLUS, SIGMA_Z, PostSelection,
                    build_postselection, pauli)

MIN_POSTSELECTION = 1e-14
_TAYLOR_ORDER = 14
_SCALED_NORM = 0.5


def vec(m: np.ndarray) -> np.ndarray:
    return np.asarray(m).reshape(-1, order="F")


def unvec(v: np.ndarray) -> np.ndarray:
    return np.asarray(v).reshape(2, 2, order="F")


def spre(a: np.ndarray) -> np.ndarray:
    """X -> A X"""
    return np.kron(IDENTITY, a)


def spost(b: np.ndarray) -> np.ndarray:
    """X -> X B"""
    return np.kron(b.T, IDENTITY)


def dissipator(a: np.ndarray) -> np.ndarray:
    """Superoperator of D[A]X = {A^+A, X}/2 - A X A^+."""
    ada = a.conj().T @ a
    return 0.5 * (spre(ada) + spost(ada)) - np.kron(a.conj(), a)


def commutator_right(o: np.ndarray) -> np.ndarray:
    """X -> [X, O]"""
    return spost(o) - spre(o)


def anticommutator(o: np.ndarray) -> np.ndarray:
    """X -> {X, O}"""
    return spost(o) + spre(o)


@dataclass(frozen=True)
class GeneratorParts:
    """L(chi) = base + chi_1 coupling[0] + chi_2 coupling[1] - sum_i chi_i^2 s_vv[i]/2."""

    base: np.ndarray
    coupling: tuple[np.ndarray, np.ndarray]
    s_vv: np.ndarray


def generator_parts(cfg: SystemConfig) -> GeneratorParts:
    c = cfg.correlators
    h = cfg.hamiltonian.matrix()
    ops = [pauli(name) for name in cfg.observables]
    base = -1j * (spre(h) - spost(h))
    if cfg.model == "ideal":
        for i, o in enumerate(ops):
            base = base - c.s_qq[i, i] * dissipator(o)
    elif cfg.model == "experimental":
        r = cfg.rates
        base = (base - r.gamma_d * dissipator(SIGMA_Z) - r.gamma_up * dissipator(SIGMA_PLUS)
                - r.gamma_down * dissipator(SIGMA_MINUS))
    else:
        raise InvalidConfiguration(f"unknown model {cfg.model!r}")
    coupling = tuple(
        -c.s_qv[i, i] * commutator_right(o) + 0.5j * c.a_vq[i, i] * anticommutator(o)
        for i, o in enumerate(ops)
    )
    return GeneratorParts(base, coupling, np.diag(c.s_vv).copy())


@dataclass(frozen=True)
class Liouvillian:
    matrix: np.ndarray
    model: str
    chi: tuple[float, float]


def build_liouvillian(cfg: SystemConfig, chi=(0.0, 0.0)) -> Liouvillian:
    parts = generator_parts(cfg)
    c1, c2 = (float(x) for x in chi)
    m = (parts.base + c1 * parts.coupling[0] + c2 * parts.coupling[1]
         - 0.5 * (c1 ** 2 * parts.s_vv[0] + c2 ** 2 * parts.s_vv[1]) * np.eye(4))
    return Liouvillian(m, cfg.model, (c1, c2))


def expm_batch(a: np.ndarray) -> np.ndarray:
    """Matrix exponential of a stack of small matrices, shape (..., d, d).

    Truncated Taylor series on A/2^s with ||A/2^s||_1 <= 1/2, followed by s
    squarings.  Matrices are grouped by their scaling exponent.
    """
    a = np.asarray(a, dtype=complex)
    shape = a.shape
    d = shape[-1]
    flat = a.reshape(-1, d, d)
    out = np.empty_like(flat)
    norms = np.abs(flat).sum(axis=-2).max(axis=-1)
    with np.errstate(divide="ignore"):
        s_all = np.where(norms > _SCALED_NORM,
                         np.ceil(np.log2(np.maximum(norms, 1e-300) / _SCALED_NORM)), 0).astype(int)
    eye = np.eye(d, dtype=complex)
    for s in np.unique(s_all):
        idx = np.nonzero(s_all == s)[0]
        x = flat[idx] / (2.0 ** s)
        e = eye + x / _TAYLOR_ORDER
        for k in range(_TAYLOR_ORDER - 1, 0, -1):
            e = eye + (x @ e) / k
        for _ in range(s):
            e = e @ e
        out[idx] = e
    return out.reshape(shape)


def propagate(rho0: np.ndarray, L: Liouvillian, T: float) -> np.ndarray:
    """rho(T) = exp(L T) rho0 for a constant generator."""
    if T < 0:
        raise ValueError("T must be non-negative")
    rho = unvec(expm_batch(L.matrix * T) @ vec(rho0))
    if not np.all(np.isfinite(rho)):
        raise NumericalOverflow("propagated state is not finite")
    return rho


def worker_count() -> int:
    """Thread cap from CWLM_THREADS, else the CPU count."""
    env = os.environ.get("CWLM_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise InvalidConfiguration(f"CWLM_THREADS must be an integer, got {env!r}") from None
    return os.cpu_count() or 1


def _readout_vectors(rho_i: np.ndarray, post: PostSelection):
    v = vec(np.asarray(rho_i, dtype=complex))
    w = vec((post.operator if post.conditioned else IDENTITY).T)
    return v, w


def _raw_traces(parts: GeneratorParts, v, w, chi1, chi2, T) -> np.ndarray:
    """Tr[rho_f rho(chi; T)] for paired arrays chi1, chi2 (same shape)."""
    chi1 = np.asarray(chi1, dtype=float)
    chi2 = np.asarray(chi2, dtype=float)
    gen = (parts.base[None] + chi1.reshape(-1)[:, None, None] * parts.coupling[0][None]
           + chi2.reshape(-1)[:, None, None] * parts.coupling[1][None])
    prop = expm_batch(gen * T)
    vals = np.einsum("i,nij,j->n", w, prop, v)
    damping = np.exp(-0.5 * T * (parts.s_vv[0] * chi1 ** 2 + parts.s_vv[1] * chi2 ** 2))
    return vals.reshape(chi1.shape) * damping


def postselect_probability(cfg: SystemConfig, rho_i: np.ndarray, post, T: float) -> float:
    """Tr[rho_f rho(0; T)]: probability of the post-selected outcome."""
    post = build_postselection(post)
    if not post.conditioned:
        return 1.0
    parts = generator_parts(cfg)
    v, w = _readout_vectors(rho_i, post)
    return float(np.real(_raw_traces(parts, v, w, np.zeros(1), np.zeros(1), T)[0]))


def _normalizer(parts, v, w, post: PostSelection, T: float) -> float:
    if not post.conditioned:
        return 1.0
    p = float(np.real(_raw_traces(parts, v, w, np.zeros(1), np.zeros(1), T)[0]))
    if p < MIN_POSTSELECTION:
        raise ZeroPostSelectionProbability(f"post-selection probability {p:.3e} is zero")
    return p


def generating_function(cfg: SystemConfig, rho_i: np.ndarray, post, chi, T: float) -> complex:
    """C(chi; T) = Tr[rho_f rho(chi; T)] / Tr[rho_f rho(0; T)].

    Without post-selection the plain trace is used.
    """
    if T <= 0:
        raise ValueError("T must be positive")
    post = build_postselection(post)
    parts = generator_parts(cfg)
    v, w = _readout_vectors(rho_i, post)
    norm = _normalizer(parts, v, w, post, T)
    val = _raw_traces(parts, v, w, np.array([chi[0]]), np.array([chi[1]]), T)[0] / norm
    if not np.isfinite(val):
        raise NumericalOverflow(f"generating function not finite at chi={chi}")
    return complex(val)


def generating_function_grid(cfg: SystemConfig, rho_i: np.ndarray, post, chi1: np.ndarray,
                             chi2: np.ndarray, T: float, threads: int | None = None) -> np.ndarray:
    """C on the outer grid chi1 x chi2, returned with shape (len(chi1), len(chi2)).

    Rows are evaluated concurrently in chunks; the result does not depend
    on the number of threads.
    """
    if T <= 0:
        raise ValueError("T must be positive")
    post = build_postselection(post)
    parts = generator_parts(cfg)
    v, w = _readout_vectors(rho_i, post)
    norm = _normalizer(parts, v, w, post, T)
    chi1 = np.asarray(chi1, dtype=float)
    chi2 = np.asarray(chi2, dtype=float)
    out = np.empty((chi1.size, chi2.size), dtype=complex)

    threads = worker_count() if threads is None else max(1, threads)
    rows_per_chunk = max(1, 16384 // max(chi2.size, 1))
    starts = range(0, chi1.size, rows_per_chunk)

    def work(start):
        stop = min(start + rows_per_chunk, chi1.size)
        c1, c2 = np.meshgrid(chi1[start:stop], chi2, indexing="ij")
        out[start:stop] = _raw_traces(parts, v, w, c1, c2, T) / norm

    if threads == 1:
        for s in starts:
            work(s)
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(work, starts))
    if not np.all(np.isfinite(out)):
        raise NumericalOverflow("generating function not finite on the grid")
    return out
