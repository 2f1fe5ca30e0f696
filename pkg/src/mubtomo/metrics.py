"""Fidelity, purity and the summary statistics used by the experiments."""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .linalg import eig_hermitian, sqrt_psd

# Relative size below which an eigenvalue is treated as round-off.
SUPPORT_TOL = 16 * np.finfo(float).eps


def _support_root(m) -> np.ndarray:
    """``V sqrt(diag(w))`` over the numerically nonzero spectrum of ``m``."""
    w, v = eig_hermitian(m)
    keep = w > SUPPORT_TOL * max(w[0], 1.0)
    return v[:, keep] * np.sqrt(w[keep])


def fidelity(sigma, rho, *, clamp: bool = True) -> float:
    """Uhlmann fidelity ``(Tr sqrt(sqrt(sigma) rho sqrt(sigma)))**2``.

    The eigenvalues of ``sqrt(sigma) rho sqrt(sigma)`` are the squared
    singular values of ``sqrt(sigma) sqrt(rho)``, so the trace is taken as the
    sum of singular values of ``R_sigma^dagger R_rho`` with
    ``R = V sqrt(diag(w))`` restricted to each state's support. Round-off
    eigenvalues (below ``SUPPORT_TOL``) are dropped rather than square-rooted,
    which keeps pure-state fidelities exact to machine precision.
    """
    sigma = np.asarray(sigma, dtype=complex)
    rho = np.asarray(rho, dtype=complex)
    if sigma.shape != rho.shape:
        raise ValueError(f"dimension mismatch: {sigma.shape} vs {rho.shape}")
    overlap = _support_root(sigma).conj().T @ _support_root(rho)
    f = float(np.sum(np.linalg.svd(overlap, compute_uv=False)) ** 2)
    return min(max(f, 0.0), 1.0) if clamp else f


def fidelity_via_sqrt(sigma, rho) -> float:
    """Textbook evaluation through ``sqrt_psd``; kept as a cross-check."""
    root = sqrt_psd(sigma)
    inner = root @ np.asarray(rho) @ root
    w, _ = eig_hermitian(0.5 * (inner + inner.conj().T))
    return float(np.sum(np.sqrt(np.clip(w, 0.0, None))) ** 2)


def infidelity(sigma, rho) -> float:
    return 1.0 - fidelity(sigma, rho)


def purity(rho) -> float:
    r = np.asarray(rho)
    return float(np.sum(r * r.T).real)


@dataclass
class SummaryStats:
    median: float
    mean: float
    std: float
    median_stderr: float
    n: int

    def as_dict(self) -> dict:
        return asdict(self)


def summarize(samples, n_boot: int = 1000, rng=0) -> SummaryStats:
    """Median, mean, sample standard deviation and bootstrap median error.

    ``rng`` seeds the bootstrap so repeated calls are reproducible.
    """
    x = np.asarray(samples, dtype=float)
    if x.size == 0:
        raise ValueError("cannot summarize an empty sample")
    std = float(x.std(ddof=1)) if x.size > 1 else 0.0
    gen = rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng)
    boots = np.median(x[gen.integers(0, x.size, size=(n_boot, x.size))], axis=1)
    return SummaryStats(float(np.median(x)), float(x.mean()), std, float(boots.std(ddof=1)), int(x.size))


def fit_power_law(n_values, infidelities) -> float:
    """Least-squares slope of ``ln(infidelity)`` against ``ln(N)``."""
    n = np.asarray(n_values, dtype=float)
    y = np.asarray(infidelities, dtype=float)
    if n.size != y.size or n.size < 2:
        raise ValueError("need at least two (N, infidelity) pairs")
    if np.unique(n).size < 2:
        raise ValueError("need at least two distinct N values")
    if np.any(n <= 0) or np.any(y <= 0):
        raise ValueError("power-law fit needs strictly positive values")
    slope, _ = np.polyfit(np.log(n), np.log(y), 1)
    return float(slope)


def ratio_with_error(a: SummaryStats, b: SummaryStats) -> tuple[float, float]:
    """Ratio of means ``a/b`` with first-order propagated standard error."""
    r = a.mean / b.mean
    rel = np.hypot(a.std / (a.mean * np.sqrt(a.n)), b.std / (b.mean * np.sqrt(b.n)))
    return float(r), float(r * rel)
