"""Density-matrix reconstruction from count data.

``mle_reconstruct`` runs the diluted fixed-point iteration
``rho <- M rho M / Tr[M rho M]`` with ``M = (1 - eps) I + eps R(rho)`` and
``R(rho) = sum_k (n_k / p_k) O_k / N``. The dilution ``eps`` is halved
whenever a step would lower the likelihood, so accepted iterates are
monotone in log-likelihood and stay positive semidefinite.

``linear_inversion`` is the unweighted least-squares solution of
``Tr[O_k rho] = f_k`` over unit-trace Hermitian matrices, followed by a
projection onto the physical states.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .bases import MeasurementScheme, certify_complete
from .linalg import hermitian_basis, project_to_physical
from .simulate import CountData

log = logging.getLogger(__name__)

PROB_FLOOR = 1e-15


class IncompleteSchemeError(ValueError):
    pass


@dataclass
class MleOptions:
    tolerance: float = 1e-10
    max_iterations: int = 100_000
    dilution: float = 0.5
    min_dilution: float = 1e-12

    def __post_init__(self):
        if self.tolerance <= 0:
            raise ValueError("tolerance must be positive")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be at least 1")
        if not 0.0 < self.dilution <= 1.0:
            raise ValueError("dilution must lie in (0, 1]")


@dataclass
class ReconstructionResult:
    rho_hat: np.ndarray
    log_likelihood: float
    iterations: int
    converged: bool
    method: str
    history: list[float] = field(default_factory=list, repr=False)
    raw: np.ndarray | None = field(default=None, repr=False)


def _count_array(counts, scheme: MeasurementScheme) -> np.ndarray:
    n = counts.counts if isinstance(counts, CountData) else counts
    n = np.asarray(n, dtype=float)
    if n.shape != (scheme.num_bases, scheme.dim):
        raise ValueError(f"count array shape {n.shape} does not match scheme {scheme.name} "
                         f"({scheme.num_bases} x {scheme.dim})")
    return n


def log_likelihood(rho, counts, scheme: MeasurementScheme) -> float:
    """``sum_k n_k ln p_k`` over outcomes with ``n_k > 0``.

    Probabilities of observed outcomes are floored at ``1e-15``.
    """
    n = _count_array(counts, scheme).reshape(-1)
    ops = scheme.operators.reshape(-1, scheme.dim, scheme.dim)
    return _loglik(np.asarray(rho), n, ops, n > 0)


def _loglik(rho, n, ops, seen) -> float:
    p = np.einsum("kij,ji->k", ops[seen], rho).real
    return float(np.dot(n[seen], np.log(np.maximum(p, PROB_FLOOR))))


def mle_reconstruct(counts, scheme: MeasurementScheme, opts: MleOptions | None = None,
                    initial=None) -> ReconstructionResult:
    """Maximum-likelihood density matrix for ``counts`` measured with ``scheme``.

    Args:
        counts: ``CountData`` or a ``(B, D)`` array (real-valued weights are
            accepted, e.g. noiseless expected counts).
        scheme: informationally complete measurement scheme.
        opts: iteration controls; defaults to ``MleOptions()``.
        initial: starting state, ``I/D`` by default. It must be full rank
            since the iteration cannot revive zero eigenvalues.

    Returns:
        ``ReconstructionResult`` with ``converged=False`` if ``max_iterations``
        was reached, in which case the best iterate is returned.
    """
    opts = opts or MleOptions()
    if not certify_complete(scheme):
        raise IncompleteSchemeError(f"scheme {scheme.name} is not informationally complete")
    n = _count_array(counts, scheme).reshape(-1)
    total = n.sum()
    if total <= 0:
        raise ValueError("no counts to reconstruct from")
    dim = scheme.dim
    ops = scheme.operators.reshape(-1, dim, dim)
    seen = n > 0
    ops_seen, n_seen = ops[seen], n[seen]
    eye = np.eye(dim)

    rho = eye / dim if initial is None else np.array(initial, dtype=complex)
    L = _loglik(rho, n, ops, seen)
    history = [L]
    eps = opts.dilution
    converged = False
    it = 0
    while it < opts.max_iterations:
        p = np.einsum("kij,ji->k", ops_seen, rho).real
        R = np.einsum("k,kij->ij", n_seen / np.maximum(p, PROB_FLOOR), ops_seen) / total
        while True:
            M = (1 - eps) * eye + eps * R
            new = M @ rho @ M
            new = new / np.trace(new).real
            new = 0.5 * (new + new.conj().T)
            L_new = _loglik(new, n, ops, seen)
            if L_new >= L:
                break
            eps *= 0.5
            if eps < opts.min_dilution:
                break
        if L_new < L:
            # No ascent direction resolvable at machine precision.
            converged = True
            break
        it += 1
        step = L_new - L
        rho, L = new, L_new
        history.append(L)
        if step < opts.tolerance:
            converged = True
            break
    if not converged:
        log.warning("MLE did not converge within %d iterations", opts.max_iterations)
    return ReconstructionResult(rho, L, it, converged, "MLE", history)


def _design(scheme: MeasurementScheme) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Least-squares design for traceless Hermitian coordinates.

    Returns ``(A, offset, basis)`` with ``Tr[O_k rho] = offset_k + A[k] @ x``
    for ``rho = I/D + sum_a x_a G_a``.
    """
    dim = scheme.dim
    basis = hermitian_basis(dim)[1:]
    ops = scheme.operators.reshape(-1, dim, dim)
    A = np.einsum("kij,aji->ka", ops, basis).real
    offset = np.einsum("kii->k", ops).real / dim
    return A, offset, basis


def _frequencies(counts, scheme: MeasurementScheme) -> np.ndarray:
    n = _count_array(counts, scheme)
    totals = n.sum(axis=1, keepdims=True)
    if np.any(totals <= 0):
        raise ValueError("every basis needs at least one count for linear inversion")
    return (n / totals).reshape(-1)


def linear_inversion(counts, scheme: MeasurementScheme) -> ReconstructionResult:
    """Least-squares inversion of measured frequencies.

    ``result.raw`` is the unconstrained unit-trace Hermitian solution (possibly
    with negative eigenvalues); ``result.rho_hat`` is its physical projection.
    """
    A, offset, basis = _design(scheme)
    if np.linalg.matrix_rank(A, tol=1e-9) < scheme.dim**2 - 1:
        raise IncompleteSchemeError(f"scheme {scheme.name} gives a rank-deficient design matrix")
    f = _frequencies(counts, scheme)
    x, *_ = np.linalg.lstsq(A, f - offset, rcond=None)
    raw = np.eye(scheme.dim, dtype=complex) / scheme.dim + np.einsum("a,aij->ij", x, basis)
    physical = project_to_physical(raw)
    ll = log_likelihood(physical, counts, scheme)
    return ReconstructionResult(physical, ll, 0, True, "linear-inversion", [], raw)


def predicted_mixed_infidelity(scheme: MeasurementScheme, n_total: float) -> float:
    """Expected linear-inversion infidelity at the maximally mixed state.

    Frequencies in each basis have multinomial covariance
    ``(diag(p) - p p^T) / N_b`` with ``N_b = n_total / B``. Propagating it
    through the least-squares inverse gives the covariance of the estimate,
    and to second order ``1 - F(I/D, I/D + d) = (D/4) Tr[d^2]``.
    """
    A, offset, _ = _design(scheme)
    n_b = n_total / scheme.num_bases
    p = offset.reshape(scheme.num_bases, scheme.dim)
    blocks = [(np.diag(pb) - np.outer(pb, pb)) / n_b for pb in p]
    cov_f = np.zeros((A.shape[0], A.shape[0]))
    for b, blk in enumerate(blocks):
        s = slice(b * scheme.dim, (b + 1) * scheme.dim)
        cov_f[s, s] = blk
    pinv = np.linalg.pinv(A)
    cov_x = pinv @ cov_f @ pinv.T
    return float(scheme.dim / 4 * np.trace(cov_x))


def predict_mixed_ratio(scheme_a: MeasurementScheme, scheme_b: MeasurementScheme, n_total: float) -> float:
    """Ratio of predicted mixed-state infidelities, ``scheme_a / scheme_b``."""
    for s in (scheme_a, scheme_b):
        if not certify_complete(s):
            raise IncompleteSchemeError(f"scheme {s.name} is not informationally complete")
    return predicted_mixed_infidelity(scheme_a, n_total) / predicted_mixed_infidelity(scheme_b, n_total)
