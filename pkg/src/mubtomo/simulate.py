"""Born-rule probabilities and simulated count data."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .bases import MeasurementBasis, MeasurementScheme
from .states import RngStream, _generator

COUNT_MODELS = ("multinomial-exact", "poisson-per-basis")
_MODEL_ALIASES = {"multinomial": "multinomial-exact", "poisson": "poisson-per-basis"}


def normalize_model(model: str) -> str:
    m = _MODEL_ALIASES.get(model, model)
    if m not in COUNT_MODELS:
        raise ValueError(f"unknown count model {model!r}; expected one of {COUNT_MODELS}")
    return m


@dataclass
class CountData:
    """Outcome counts of one simulated acquisition.

    ``counts[b, g]`` is the number of clicks on element ``g`` of basis ``b``.
    """

    scheme: str
    counts: np.ndarray
    n_total: int
    model: str = "multinomial-exact"
    seed: int | None = None
    stream_id: int | None = None
    visibility: float = 1.0
    labels: list[list[str]] = field(default_factory=list)

    def __post_init__(self):
        self.counts = np.asarray(self.counts, dtype=np.int64)
        if self.counts.ndim != 2:
            raise ValueError("counts must be a (bases x outcomes) array")
        if np.any(self.counts < 0):
            raise ValueError("counts must be non-negative")

    @property
    def basis_totals(self) -> np.ndarray:
        return self.counts.sum(axis=1)

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    def __add__(self, other: "CountData") -> "CountData":
        if other.scheme != self.scheme or other.counts.shape != self.counts.shape:
            raise ValueError("cannot add counts from different schemes")
        return CountData(
            self.scheme, self.counts + other.counts, self.n_total + other.n_total,
            self.model, None, None, self.visibility, self.labels,
        )


def _operators(basis) -> np.ndarray:
    if isinstance(basis, MeasurementBasis):
        return np.array([e.matrix for e in basis.elements])
    return np.asarray(basis)


def born_probabilities(rho, basis) -> np.ndarray:
    """Outcome probabilities ``Tr[O_g rho]`` for one basis.

    Small negative values from round-off are clipped to zero.
    """
    ops = _operators(basis)
    rho = np.asarray(rho)
    if ops.shape[1:] != rho.shape:
        raise ValueError(f"dimension mismatch: operators {ops.shape[1:]} vs state {rho.shape}")
    p = np.einsum("gij,ji->g", ops, rho).real
    return np.clip(p, 0.0, None)


def scheme_probabilities(rho, scheme: MeasurementScheme) -> np.ndarray:
    """Probabilities for every basis of ``scheme``, shape ``(B, D)``."""
    rho = np.asarray(rho)
    if scheme.operators.shape[2:] != rho.shape:
        raise ValueError(f"dimension mismatch: scheme D={scheme.dim} vs state {rho.shape}")
    p = np.einsum("bgij,ji->bg", scheme.operators, rho).real
    return np.clip(p, 0.0, None)


def shots_per_basis(n_total: int, num_bases: int) -> np.ndarray:
    """Equal split of ``n_total``; the remainder goes to the first bases."""
    base, rem = divmod(int(n_total), num_bases)
    shots = np.full(num_bases, base, dtype=np.int64)
    shots[:rem] += 1
    return shots


def sample_counts(rho, scheme: MeasurementScheme, n_total: int, model: str = "multinomial-exact", rng=None) -> CountData:
    """Draw one simulated data set.

    Args:
        rho: true density matrix.
        scheme: measurement scheme; copies are split equally across its bases.
        n_total: total number of copies (``>= 0``).
        model: ``multinomial-exact`` fixes every basis total at its equal share;
            ``poisson-per-basis`` draws each basis total from
            ``Poisson(n_total / B)``.
        rng: ``RngStream``, ``numpy.random.Generator`` or seed.
    """
    if n_total < 0:
        raise ValueError("n_total must be non-negative")
    model = normalize_model(model)
    gen = _generator(rng)
    probs = scheme_probabilities(rho, scheme)
    probs = probs / probs.sum(axis=1, keepdims=True)
    if model == "multinomial-exact":
        shots = shots_per_basis(n_total, scheme.num_bases)
    else:
        shots = gen.poisson(n_total / scheme.num_bases, size=scheme.num_bases)
    counts = np.array([gen.multinomial(int(n), p) for n, p in zip(shots, probs)], dtype=np.int64)
    seed = rng.seed if isinstance(rng, RngStream) else None
    stream = rng.stream_id if isinstance(rng, RngStream) else None
    return CountData(
        scheme.name, counts, int(counts.sum()) if model == "poisson-per-basis" else int(n_total),
        model, seed, stream, scheme.visibility, [b.labels for b in scheme.bases],
    )


def expected_counts(rho, scheme: MeasurementScheme, n_total: float) -> np.ndarray:
    """Noiseless (real-valued) counts: equal share per basis times Born probabilities."""
    return scheme_probabilities(rho, scheme) * (n_total / scheme.num_bases)
