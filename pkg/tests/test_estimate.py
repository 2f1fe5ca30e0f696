import numpy as np
import pytest
from scipy.optimize import minimize

from mubtomo.bases import mub_scheme, ssqst_scheme
from mubtomo.estimate import (
    IncompleteSchemeError, MleOptions, linear_inversion, log_likelihood, mle_reconstruct,
    predict_mixed_ratio, predicted_mixed_infidelity,
)
from mubtomo.metrics import fidelity, infidelity
from mubtomo.simulate import CountData, expected_counts, sample_counts
from mubtomo.states import RngStream, bell_state, density_from_pure, ket, maximally_mixed

from conftest import random_density

PHI = density_from_pure(bell_state("phi+"))
SCHEMES = [ssqst_scheme(), mub_scheme(1.0), mub_scheme(0.93)]


def _direct_loglik(rho, counts, scheme):
    total = 0.0
    for b, basis in enumerate(scheme.bases):
        for g, e in enumerate(basis.elements):
            n = counts[b][g]
            if n > 0:
                p = max(np.trace(e.matrix @ rho).real, 1e-15)
                total += n * np.log(p)
    return total


def test_loglik_trivial_cases():
    s = ssqst_scheme()
    assert log_likelihood(PHI, np.zeros((9, 4)), s) == 0.0
    counts = np.zeros((9, 4))
    counts[0, 1] = 1
    assert log_likelihood(density_from_pure(ket("HV")), counts, s) == pytest.approx(0.0, abs=1e-15)


def test_loglik_matches_direct_sum(rng):
    for s in SCHEMES:
        for _ in range(10):
            rho = random_density(rng)
            counts = rng.integers(0, 20, size=(s.num_bases, 4))
            counts[rng.random(counts.shape) < 0.3] = 0
            assert log_likelihood(rho, counts, s) == pytest.approx(_direct_loglik(rho, counts, s), abs=1e-10)


def test_loglik_floors_impossible_outcomes():
    counts = np.zeros((9, 4))
    counts[0, 0] = 2
    assert log_likelihood(density_from_pure(ket("VV")), counts, ssqst_scheme()) == pytest.approx(2 * np.log(1e-15))


@pytest.mark.parametrize("scheme", SCHEMES, ids=lambda s: f"{s.name}-{s.visibility}")
def test_uniform_counts_give_mixed_state(scheme):
    counts = np.full((scheme.num_bases, 4), 1000)
    res = mle_reconstruct(counts, scheme)
    assert infidelity(maximally_mixed(4), res.rho_hat) < 1e-6
    assert res.converged


@pytest.mark.parametrize("scheme", SCHEMES, ids=lambda s: f"{s.name}-{s.visibility}")
def test_noiseless_phi_plus(scheme):
    res = mle_reconstruct(expected_counts(PHI, scheme, 1e6), scheme)
    assert fidelity(PHI, res.rho_hat) > 0.9999
    assert np.all(np.diff(res.history) >= 0)


def _cholesky_mle(counts, scheme, rng, starts=4):
    """Independent MLE: rho = T T^dagger / Tr with T lower triangular, BFGS over 16 reals."""
    il = np.tril_indices(4)
    off = il[0] != il[1]
    ops = scheme.operators.reshape(-1, 4, 4)
    n = np.asarray(counts, dtype=float).reshape(-1)

    def unpack(x):
        t = np.zeros((4, 4), dtype=complex)
        t[il] = x[:10]
        t[il[0][off], il[1][off]] += 1j * x[10:]
        rho = t @ t.conj().T
        return rho / np.trace(rho).real

    def nll(x):
        p = np.einsum("kij,ji->k", ops, unpack(x)).real
        return -np.dot(n, np.log(np.maximum(p, 1e-300)))

    best = min((minimize(nll, rng.standard_normal(16), method="BFGS", options={"gtol": 1e-9, "maxiter": 20000})
                for _ in range(starts)), key=lambda r: r.fun)
    return unpack(best.x), -best.fun


@pytest.mark.parametrize("scheme", [ssqst_scheme(), mub_scheme(0.93)], ids=["SSQST", "MUB"])
def test_mle_agrees_with_independent_optimizer(scheme, rng):
    rho = 0.7 * random_density(rng) + 0.3 * maximally_mixed(4)
    data = sample_counts(rho, scheme, 3000, rng=RngStream(12))
    res = mle_reconstruct(data, scheme, MleOptions(tolerance=1e-12))
    other, other_ll = _cholesky_mle(data.counts, scheme, rng)
    assert res.log_likelihood >= other_ll - 1e-6
    assert infidelity(other, res.rho_hat) < 1e-7


def test_mle_beats_true_state_likelihood(rng):
    for s in SCHEMES:
        for _ in range(5):
            rho = random_density(rng)
            data = sample_counts(rho, s, 2000, rng=RngStream(int(rng.integers(1 << 30))))
            res = mle_reconstruct(data, s)
            assert res.log_likelihood >= log_likelihood(rho, data, s) - 1e-8
            np.testing.assert_allclose(np.trace(res.rho_hat), 1, atol=1e-10)
            assert np.linalg.eigvalsh(res.rho_hat).min() > -1e-12


def test_mle_monotone_on_noisy_runs():
    for i, s in enumerate(SCHEMES):
        data = sample_counts(density_from_pure(ket("HV")), s, 500, rng=RngStream(30, i))
        res = mle_reconstruct(data, s)
        assert np.all(np.diff(res.history) >= 0)
        assert res.iterations == len(res.history) - 1


def test_mle_nonconvergence_flag():
    s = ssqst_scheme()
    data = sample_counts(PHI, s, 5000, rng=RngStream(1))
    res = mle_reconstruct(data, s, MleOptions(max_iterations=2))
    assert not res.converged and res.iterations == 2


def test_mle_rejects_incomplete_and_empty():
    with pytest.raises(IncompleteSchemeError):
        mle_reconstruct(np.ones((3, 4)), mub_scheme().subset([0, 1, 2]))
    with pytest.raises(ValueError):
        mle_reconstruct(np.zeros((5, 4)), mub_scheme())


def test_mle_options_validation():
    with pytest.raises(ValueError):
        MleOptions(tolerance=0)
    with pytest.raises(ValueError):
        MleOptions(max_iterations=0)
    with pytest.raises(ValueError):
        MleOptions(dilution=1.5)


def test_mle_consistency_medians_decrease():
    s = ssqst_scheme()
    rho = 0.9 * PHI + 0.1 * maximally_mixed(4)
    medians = []
    for n in (1_000, 10_000, 100_000):
        inf = [infidelity(rho, mle_reconstruct(sample_counts(rho, s, n, rng=RngStream(n, t)), s).rho_hat)
               for t in range(30)]
        medians.append(np.median(inf))
    assert medians[0] > medians[1] > medians[2]


def test_linear_inversion_exact(rng):
    for s in SCHEMES:
        rho = random_density(rng)
        res = linear_inversion(expected_counts(rho, s, 1.0), s)
        assert np.max(np.abs(res.raw - rho)) < 1e-9
    res = linear_inversion(np.full((5, 4), 7), mub_scheme())
    assert np.allclose(res.raw, np.eye(4) / 4)


def test_linear_inversion_unit_trace_and_negativity():
    s = ssqst_scheme()
    negative = 0
    for t in range(50):
        data = sample_counts(density_from_pure(ket("HV")), s, 2000, rng=RngStream(40, t))
        res = linear_inversion(data, s)
        assert abs(np.trace(res.raw) - 1) < 1e-9
        assert np.linalg.eigvalsh(res.rho_hat).min() > -1e-12
        negative += np.linalg.eigvalsh(res.raw).min() < 0
    # Pure-state data almost always produces an unphysical raw estimate.
    assert negative > 40


def test_linear_inversion_errors():
    with pytest.raises(IncompleteSchemeError):
        linear_inversion(np.ones((3, 4)), mub_scheme().subset([0, 1, 2]))
    counts = np.ones((5, 4))
    counts[2] = 0
    with pytest.raises(ValueError):
        linear_inversion(counts, mub_scheme())
    with pytest.raises(ValueError):
        linear_inversion(CountData("MUB", np.ones((9, 4)), 36), mub_scheme())


def _hand_mixed_infidelity(scheme_name, visibility, n):
    # At I/4, 1 - F = Tr[d^2] = (1/4) sum of Pauli-coordinate variances.
    if scheme_name == "SSQST":
        n_b = n / 9
        # 9 correlators seen once (variance 1/N_b); 6 local terms averaged over 3 bases.
        return (9 / n_b + 6 / (3 * n_b)) / 4
    n_b = n / 5
    # Product MUBs: 3 coordinates each with total variance 3/4 / N_b.
    # Entangled MUBs: pair-sum direction unaffected, the two in-pair
    # differences are shrunk by V, inflating their variance by 1/V^2.
    return (3 * 0.75 + 2 * (0.25 + 0.5 / visibility**2)) / n_b


@pytest.mark.parametrize("v", [1.0, 0.93, 0.7])
def test_predicted_infidelity_matches_hand_count(v):
    assert predicted_mixed_infidelity(ssqst_scheme(), 18000) == pytest.approx(_hand_mixed_infidelity("SSQST", 1, 18000))
    assert predicted_mixed_infidelity(mub_scheme(v), 18000) == pytest.approx(_hand_mixed_infidelity("MUB", v, 18000))


def test_predict_ratio_properties():
    for s in SCHEMES:
        assert predict_mixed_ratio(s, s, 5000) == pytest.approx(1.0)
    assert predict_mixed_ratio(ssqst_scheme(), mub_scheme(1.0), 18000) == pytest.approx(99 / 75)
    vals = [predict_mixed_ratio(ssqst_scheme(), mub_scheme(0.93), n) for n in (1e3, 1.8e4, 1e5, 1e7)]
    assert np.ptp(vals) < 1e-12


def test_predict_ratio_monte_carlo_small():
    n, trials = 18000, 1500
    means = []
    for j, s in enumerate((ssqst_scheme(), mub_scheme(1.0))):
        inf = [infidelity(maximally_mixed(4), linear_inversion(sample_counts(maximally_mixed(4), s, n,
               rng=RngStream(77, j * trials + t)), s).rho_hat) for t in range(trials)]
        means.append(np.mean(inf))
    assert means[0] / means[1] == pytest.approx(predict_mixed_ratio(ssqst_scheme(), mub_scheme(1.0), n), rel=0.08)
