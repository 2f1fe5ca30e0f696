import numpy as np
import pytest

from mubtomo.bases import mub_scheme, ssqst_scheme
from mubtomo.simulate import (
    CountData, born_probabilities, expected_counts, sample_counts, scheme_probabilities, shots_per_basis,
)
from mubtomo.states import RngStream, bell_state, density_from_pure, ket, maximally_mixed

from conftest import random_density

PHI = density_from_pure(bell_state("phi+"))


def test_mixed_state_uniform_everywhere():
    for b in mub_scheme(0.93).bases:
        assert np.allclose(born_probabilities(maximally_mixed(4), b), 0.25)


def test_phi_plus_in_hv_basis():
    assert np.allclose(born_probabilities(PHI, ssqst_scheme().bases[0]), [0.5, 0, 0, 0.5])


def test_phi_plus_in_first_entangled_basis_by_hand():
    # Kets written out with R=(1,i)/sqrt2, L=(1,-i)/sqrt2 in the HH,HV,VH,VV order.
    rl = np.array([1, -1j, 1j, 1]) / 2
    lr = np.array([1, 1j, -1j, 1]) / 2
    rr = np.array([1, 1j, 1j, -1]) / 2
    ll = np.array([1, -1j, -1j, -1]) / 2
    phi = np.array([1, 0, 0, 1]) / np.sqrt(2)
    elems = [(rl + 1j * lr), (rl - 1j * lr), (rr + 1j * ll), (rr - 1j * ll)]
    expected = [abs(np.vdot(e / np.sqrt(2), phi)) ** 2 for e in elems]
    assert np.allclose(expected, [0.5, 0.5, 0.0, 0.0])
    assert np.allclose(born_probabilities(PHI, mub_scheme(1.0).bases[3]), expected, atol=1e-12)


def test_probabilities_normalized(rng):
    for _ in range(20):
        rho = random_density(rng)
        for s in (mub_scheme(0.93), ssqst_scheme()):
            p = scheme_probabilities(rho, s)
            assert np.all(p >= 0)
            assert np.allclose(p.sum(axis=1), 1, atol=1e-9)


def test_dimension_mismatch():
    with pytest.raises(ValueError):
        born_probabilities(np.eye(2) / 2, ssqst_scheme().bases[0])


def test_zero_copies():
    data = sample_counts(density_from_pure(ket("HV")), ssqst_scheme(), 0, rng=RngStream(1))
    assert data.counts.shape == (9, 4)
    assert data.total == 0


def test_deterministic_outcome():
    data = sample_counts(density_from_pure(ket("HV")), ssqst_scheme(), 900, rng=RngStream(2))
    assert list(data.counts[0]) == [0, 100, 0, 0]


def test_same_stream_same_counts():
    a = sample_counts(PHI, mub_scheme(), 5000, rng=RngStream(3, 9))
    b = sample_counts(PHI, mub_scheme(), 5000, rng=RngStream(3, 9))
    c = sample_counts(PHI, mub_scheme(), 5000, rng=RngStream(3, 10))
    assert np.array_equal(a.counts, b.counts)
    assert not np.array_equal(a.counts, c.counts)


def test_equal_split():
    assert list(shots_per_basis(18000, 5)) == [3600] * 5
    assert list(shots_per_basis(18000, 9)) == [2000] * 9
    assert list(shots_per_basis(11, 5)) == [3, 2, 2, 2, 2]
    data = sample_counts(PHI, ssqst_scheme(), 10_001, rng=RngStream(4))
    assert data.total == 10_001
    assert list(data.basis_totals) == list(shots_per_basis(10_001, 9))


def test_frequencies_converge(rng):
    rho = random_density(rng)
    for s in (mub_scheme(0.93), ssqst_scheme()):
        data = sample_counts(rho, s, 1_000_000, rng=RngStream(5))
        freq = data.counts / data.basis_totals[:, None]
        assert np.max(np.abs(freq - scheme_probabilities(rho, s))) < 5e-3


def test_poisson_totals_mean():
    s = mub_scheme()
    totals = np.array([sample_counts(PHI, s, 1000, "poisson", RngStream(6, i)).total for i in range(1000)])
    # Sum of five Poisson(200) draws is Poisson(1000).
    assert abs(totals.mean() - 1000) < 3 * np.sqrt(1000 / 1000)
    assert len(set(totals)) > 1


def test_expected_counts_sum():
    e = expected_counts(PHI, ssqst_scheme(), 1e6)
    assert e.sum() == pytest.approx(1e6)


def test_countdata_validation():
    with pytest.raises(ValueError):
        CountData("MUB", [[1, -1, 0, 0]], 0)
    a = CountData("MUB", np.ones((5, 4)), 20)
    assert (a + a).total == 40
