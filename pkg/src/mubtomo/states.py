"""Polarization states: named kets, Bell states and Haar-random samples.

Kets are 1-D complex arrays and density matrices are 2-D complex arrays.
Single-qubit labels follow H=(1,0), V=(0,1), D=(H+V)/sqrt2, A=(H-V)/sqrt2,
R=(H+iV)/sqrt2, L=(H-iV)/sqrt2; multi-letter labels are tensor products with
the leftmost letter on the first qubit.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import reduce

import numpy as np

from .linalg import HERMITIAN_TOL, hermiticity_error

_S = 1 / np.sqrt(2)

SINGLE_QUBIT_KETS: dict[str, np.ndarray] = {
    "H": np.array([1, 0], dtype=complex),
    "V": np.array([0, 1], dtype=complex),
    "D": np.array([_S, _S], dtype=complex),
    "A": np.array([_S, -_S], dtype=complex),
    "R": np.array([_S, 1j * _S], dtype=complex),
    "L": np.array([_S, -1j * _S], dtype=complex),
}

BELL_KINDS = ("phi+", "phi-", "psi+", "psi-")


class InvalidStateError(ValueError):
    pass


@dataclass
class RngStream:
    """Independent, reproducible random stream keyed by ``(seed, stream_id)``.

    Streams with the same key yield identical sequences; distinct stream ids
    under one seed are statistically independent (``numpy.random.SeedSequence``
    spawn keys). A stream is meant to be used by one task at a time.
    """

    seed: int
    stream_id: int = 0
    _gen: np.random.Generator | None = field(default=None, init=False, repr=False, compare=False)

    @property
    def generator(self) -> np.random.Generator:
        if self._gen is None:
            ss = np.random.SeedSequence(entropy=self.seed, spawn_key=(self.stream_id,))
            self._gen = np.random.Generator(np.random.PCG64(ss))
        return self._gen


def derive_seed(master_seed: int, index: int) -> int:
    """64-bit seed for task ``index`` under ``master_seed``."""
    ss = np.random.SeedSequence(entropy=master_seed, spawn_key=(index,))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def _generator(rng) -> np.random.Generator:
    if isinstance(rng, RngStream):
        return rng.generator
    if isinstance(rng, np.random.Generator):
        return rng
    return np.random.default_rng(rng)


def ket(label: str) -> np.ndarray:
    """Product ket for a label such as ``"HV"`` or ``"R"``."""
    if not isinstance(label, str) or not 1 <= len(label) <= 2:
        raise InvalidStateError(f"ket label must have 1 or 2 letters, got {label!r}")
    try:
        parts = [SINGLE_QUBIT_KETS[c] for c in label]
    except KeyError as exc:
        raise InvalidStateError(f"unknown polarization letter {exc.args[0]!r} in {label!r}") from None
    return reduce(np.kron, parts)


def bell_state(kind: str) -> np.ndarray:
    """One of the four Bell states: ``phi+``, ``phi-``, ``psi+``, ``psi-``."""
    k = kind.lower().replace("φ", "phi").replace("ψ", "psi")
    if k == "phi+":
        return _S * (ket("HH") + ket("VV"))
    if k == "phi-":
        return _S * (ket("HH") - ket("VV"))
    if k == "psi+":
        return _S * (ket("HV") + ket("VH"))
    if k == "psi-":
        return _S * (ket("HV") - ket("VH"))
    raise InvalidStateError(f"unknown Bell state {kind!r}; expected one of {BELL_KINDS}")


def density_from_pure(psi) -> np.ndarray:
    v = np.asarray(psi, dtype=complex).reshape(-1)
    norm = np.vdot(v, v).real
    if abs(norm - 1.0) > 1e-12:
        raise InvalidStateError(f"ket is not normalized (norm^2 = {norm!r})")
    return np.outer(v, v.conj())


def maximally_mixed(dim: int = 4) -> np.ndarray:
    if dim < 2:
        raise InvalidStateError("dimension must be at least 2")
    return np.eye(dim, dtype=complex) / dim


def depolarized(rho, purity: float) -> np.ndarray:
    """Mix ``rho`` (pure) with white noise until its purity equals ``purity``.

    Returns ``p * rho + (1 - p) * I / D`` where ``p`` solves
    ``p**2 * (1 - 1/D) + 1/D = purity``.
    """
    rho = np.asarray(rho, dtype=complex)
    dim = rho.shape[0]
    if not 1.0 / dim <= purity <= 1.0:
        raise InvalidStateError(f"purity must lie in [1/{dim}, 1], got {purity}")
    p = np.sqrt((purity - 1.0 / dim) / (1.0 - 1.0 / dim))
    return p * rho + (1 - p) * np.eye(dim) / dim


def check_density_matrix(rho, tol: float = HERMITIAN_TOL) -> np.ndarray:
    """Validate Hermiticity, unit trace and positivity; return ``rho`` as an array."""
    r = np.asarray(rho, dtype=complex)
    if r.ndim != 2 or r.shape[0] != r.shape[1]:
        raise InvalidStateError(f"density matrix must be square, got shape {r.shape}")
    if hermiticity_error(r) > tol:
        raise InvalidStateError("density matrix is not Hermitian")
    if abs(np.trace(r) - 1.0) > tol:
        raise InvalidStateError(f"density matrix trace is {np.trace(r).real!r}, not 1")
    if np.linalg.eigvalsh(0.5 * (r + r.conj().T))[0] < -tol:
        raise InvalidStateError("density matrix has a negative eigenvalue")
    return r


def partial_trace(rho, keep: int) -> np.ndarray:
    """Reduced state of qubit ``keep`` (0 or 1) of a two-qubit density matrix."""
    r = np.asarray(rho).reshape(2, 2, 2, 2)
    if keep == 0:
        return np.einsum("ijkj->ik", r)
    if keep == 1:
        return np.einsum("jijk->ik", r)
    raise ValueError("keep must be 0 or 1")


def haar_random_unitary(dim: int, rng) -> np.ndarray:
    """Haar-distributed unitary from the QR decomposition of a Ginibre matrix.

    The phases of the diagonal of ``R`` are folded into ``Q`` so the result is
    Haar rather than merely orthonormal.
    """
    gen = _generator(rng)
    z = (gen.standard_normal((dim, dim)) + 1j * gen.standard_normal((dim, dim))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))


def haar_random_single_qubit_unitary(rng) -> np.ndarray:
    return haar_random_unitary(2, rng)


def haar_random_separable(rng) -> np.ndarray:
    """``(U1 x U2)|HH>`` with independent Haar-random local unitaries."""
    u = np.kron(haar_random_single_qubit_unitary(rng), haar_random_single_qubit_unitary(rng))
    return density_from_pure(u @ ket("HH"))


def haar_random_max_entangled(rng) -> np.ndarray:
    """``(U1 x U2)|phi+>`` with independent Haar-random local unitaries."""
    u = np.kron(haar_random_single_qubit_unitary(rng), haar_random_single_qubit_unitary(rng))
    return density_from_pure(u @ bell_state("phi+"))


NAMED_STATES = ("HV", "bell-phi-plus", "maximally-mixed", "haar-separable", "haar-entangled")


def named_state(name: str, rng=None, purity: float = 1.0) -> np.ndarray:
    """Resolve a CLI state identifier to a density matrix.

    ``purity < 1`` applies only to ``bell-phi-plus`` and depolarizes it to the
    requested purity. Any two-letter polarization label (e.g. ``"DA"``) is
    also accepted.
    """
    if name == "bell-phi-plus":
        rho = density_from_pure(bell_state("phi+"))
        return rho if purity >= 1.0 else depolarized(rho, purity)
    if name == "maximally-mixed":
        return maximally_mixed(4)
    if name == "haar-separable":
        return haar_random_separable(rng)
    if name == "haar-entangled":
        return haar_random_max_entangled(rng)
    if len(name) == 2 and all(c in SINGLE_QUBIT_KETS for c in name):
        return density_from_pure(ket(name))
    raise InvalidStateError(f"unknown state {name!r}; expected one of {NAMED_STATES} or a label like 'HV'")
