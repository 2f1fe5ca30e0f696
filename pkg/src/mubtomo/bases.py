"""Measurement schemes for two-qubit polarization tomography.

Two schemes are built:

* SSQST, the nine product bases formed from pairs of single-qubit Pauli
  eigenbases ({H,V}, {D,A}, {R,L}), 36 projectors in total.
* MUB, five mutually unbiased bases for D=4: three product bases and two
  maximally entangled ones. The entangled elements can be degraded by a
  finite two-photon interference visibility ``V``; each element then becomes
  ``(1+V)/2 |e><e| + (1-V)/2 |e'><e'|`` where ``e'`` is its partner in the
  same ``+/-`` pair.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .linalg import hermitian_basis
from .states import SINGLE_QUBIT_KETS, ket

UNBIASED_TOL = 1e-12
COMPLETENESS_TOL = 1e-9

_S = 1 / np.sqrt(2)

# Single-qubit eigenbases, in Table order: Z, X, Y.
PAULI_PAIRS = ("HV", "DA", "RL")


@dataclass(frozen=True)
class MeasurementOperator:
    label: str
    matrix: np.ndarray = field(repr=False)
    rank: int = 1

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


@dataclass(frozen=True)
class MeasurementBasis:
    index: int
    elements: tuple[MeasurementOperator, ...]
    entangled: bool = False
    name: str = ""

    @property
    def labels(self) -> list[str]:
        return [e.label for e in self.elements]

    def completeness_error(self) -> float:
        total = sum(e.matrix for e in self.elements)
        return float(np.max(np.abs(total - np.eye(total.shape[0]))))


@dataclass(frozen=True)
class MeasurementScheme:
    name: str
    dim: int
    num_qubits: int
    bases: tuple[MeasurementBasis, ...]
    visibility: float = 1.0

    @property
    def num_bases(self) -> int:
        return len(self.bases)

    @property
    def elements(self) -> list[MeasurementOperator]:
        return [e for b in self.bases for e in b.elements]

    @cached_property
    def operators(self) -> np.ndarray:
        """All POVM elements stacked as an array of shape ``(B, D, D, D)``."""
        return np.array([[e.matrix for e in b.elements] for b in self.bases])

    def subset(self, indices) -> "MeasurementScheme":
        """Scheme made of the bases at ``indices`` (no completeness guarantee)."""
        return MeasurementScheme(
            name=f"{self.name}[{','.join(str(i) for i in indices)}]",
            dim=self.dim,
            num_qubits=self.num_qubits,
            bases=tuple(self.bases[i] for i in indices),
            visibility=self.visibility,
        )


def _projector(v: np.ndarray) -> np.ndarray:
    return np.outer(v, v.conj())


def _product_basis(index: int, pair1: str, pair2: str) -> MeasurementBasis:
    elements = tuple(
        MeasurementOperator(a + b, _projector(ket(a + b))) for a in pair1 for b in pair2
    )
    return MeasurementBasis(index, elements, entangled=False, name=f"{pair1}-{pair2}")


def ssqst_scheme() -> MeasurementScheme:
    """Standard separable tomography: 9 product bases x 4 projectors."""
    bases = tuple(
        _product_basis(i, p1, p2) for i, (p1, p2) in enumerate(itertools.product(PAULI_PAIRS, PAULI_PAIRS))
    )
    return MeasurementScheme("SSQST", 4, 2, bases, 1.0)


# Each entangled element is (|a> + phase |b>)/sqrt2, listed as (a, b, phase).
# Consecutive entries are +/- partners.
_ENTANGLED_BASES = (
    (("RL", "LR", 1j), ("RL", "LR", -1j), ("RR", "LL", 1j), ("RR", "LL", -1j)),
    (("RV", "LH", 1j), ("RV", "LH", -1j), ("RH", "LV", 1j), ("RH", "LV", -1j)),
)


def _entangled_label(a: str, b: str, phase: complex) -> str:
    sign = "+" if phase.imag > 0 else "-"
    return f"({a}{sign}i{b})/sqrt2"


def _entangled_basis(index: int, spec, visibility: float) -> MeasurementBasis:
    kets = [_S * (ket(a) + ph * ket(b)) for a, b, ph in spec]
    labels = [_entangled_label(*s) for s in spec]
    w_hi = (1 + visibility) / 2
    w_lo = (1 - visibility) / 2
    rank = 1 if visibility == 1.0 else 2
    elements = []
    for k, v in enumerate(kets):
        partner = kets[k ^ 1]
        m = w_hi * _projector(v) + w_lo * _projector(partner) if rank == 2 else _projector(v)
        elements.append(MeasurementOperator(labels[k], m, rank))
    return MeasurementBasis(index, tuple(elements), entangled=True, name=f"entangled-{index}")


def mub_scheme(visibility: float = 1.0) -> MeasurementScheme:
    """Five mutually unbiased two-qubit bases.

    Args:
        visibility: two-photon interference visibility ``V`` in ``(0, 1]``
            applied to the two entangled bases.
    """
    if not 0.0 < visibility <= 1.0:
        raise ValueError(f"visibility must lie in (0, 1], got {visibility}")
    product = [
        ("HV", "HV"),
        ("RL", "DA"),
        ("DA", "RL"),
    ]
    bases = [_product_basis(i, p1, p2) for i, (p1, p2) in enumerate(product)]
    bases += [_entangled_basis(3 + i, spec, visibility) for i, spec in enumerate(_ENTANGLED_BASES)]
    return MeasurementScheme("MUB", 4, 2, tuple(bases), float(visibility))


def single_qubit_mub_scheme() -> MeasurementScheme:
    """The three Pauli eigenbases of one qubit (D=2)."""
    bases = tuple(
        MeasurementBasis(
            i,
            tuple(MeasurementOperator(c, _projector(SINGLE_QUBIT_KETS[c])) for c in pair),
            name=pair,
        )
        for i, pair in enumerate(PAULI_PAIRS)
    )
    return MeasurementScheme("MUB1", 2, 1, bases, 1.0)


def scheme_by_name(name: str, visibility: float = 1.0) -> MeasurementScheme:
    key = name.lower()
    if key == "mub":
        return mub_scheme(visibility)
    if key == "ssqst":
        return ssqst_scheme()
    raise ValueError(f"unknown scheme {name!r}; expected 'mub' or 'ssqst'")


def overlap(p, q) -> float:
    """Hilbert-Schmidt overlap ``Re Tr[p q]``; ``|<p|q>|^2`` for projectors."""
    a = p.matrix if isinstance(p, MeasurementOperator) else np.asarray(p)
    b = q.matrix if isinstance(q, MeasurementOperator) else np.asarray(q)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    return float(np.sum(a * b.T).real)


@dataclass
class UnbiasednessReport:
    num_pairs: int
    min_overlap: float
    max_overlap: float
    min_deviation: float
    max_deviation: float
    distinct_overlaps: list[float]
    certified: bool


def cross_basis_overlaps(scheme: MeasurementScheme) -> list[tuple[int, int, int, int, float]]:
    """Overlaps for every element pair taken from two different bases.

    Returns tuples ``(alpha, gamma, beta, delta, overlap)`` with ``alpha < beta``.
    """
    out = []
    for (a, ba), (b, bb) in itertools.combinations(enumerate(scheme.bases), 2):
        for g, p in enumerate(ba.elements):
            for d, q in enumerate(bb.elements):
                out.append((a, g, b, d, overlap(p, q)))
    return out


def certify_unbiased(scheme: MeasurementScheme, tol: float = UNBIASED_TOL) -> UnbiasednessReport:
    """Compare every cross-basis overlap with ``1/D``.

    The scheme is certified when all deviations are below ``tol``; with no
    cross-basis pairs at all it is certified vacuously.
    """
    values = np.array([o[-1] for o in cross_basis_overlaps(scheme)])
    target = 1.0 / scheme.dim
    if values.size == 0:
        return UnbiasednessReport(0, target, target, 0.0, 0.0, [], True)
    dev = np.abs(values - target)
    distinct = sorted({round(float(v), 9) + 0.0 for v in values})
    return UnbiasednessReport(
        num_pairs=int(values.size),
        min_overlap=float(values.min()),
        max_overlap=float(values.max()),
        min_deviation=float(dev.min()),
        max_deviation=float(dev.max()),
        distinct_overlaps=distinct,
        certified=bool(dev.max() < tol),
    )


def operator_rank(scheme: MeasurementScheme, tol: float = COMPLETENESS_TOL) -> int:
    """Dimension of the real span of all POVM elements in Hermitian coordinates."""
    basis = hermitian_basis(scheme.dim)
    ops = scheme.operators.reshape(-1, scheme.dim, scheme.dim)
    coords = np.einsum("aij,kji->ka", basis, ops).real
    return int(np.linalg.matrix_rank(coords, tol=tol))


def certify_complete(scheme: MeasurementScheme, tol: float = COMPLETENESS_TOL) -> bool:
    """True iff the elements span all ``D**2`` Hermitian directions."""
    return operator_rank(scheme, tol) == scheme.dim**2
