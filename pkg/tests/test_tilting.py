import math

import pytest

from rwalk import (NotNormalized, check_dual_invariance,
                   check_measure_invariance, check_symmetric_degeneracy,
                   check_tilted_powers, find_exponential,
                   invariant_measure_table, tilt, tilt_from_spectral)
from rwalk.spectral import LatticeExponential

LAZY_RHO = 0.5 + 2.0 * math.sqrt(0.3 * 0.2)
LAZY_R = 1.0 / LAZY_RHO
LAZY_THETA = 0.5 * math.log(2.0 / 3.0)


def test_tilt_bernoulli_to_simple_symmetric(bernoulli):
    # by hand: R*phi(1)*p = (2/sqrt(3))*sqrt(3)*0.25 = 1/2, same for -1
    tw = tilt_from_spectral(bernoulli)
    assert tw.tilted.atoms[(1,)] == pytest.approx(0.5, abs=1e-10)
    assert tw.tilted.atoms[(-1,)] == pytest.approx(0.5, abs=1e-10)
    assert set(tw.tilted.atoms) == set(bernoulli.atoms)


def test_tilt_symmetric_is_identity(symmetric_corpus):
    for law in symmetric_corpus:
        tw = tilt_from_spectral(law)
        for x, p in law.atoms.items():
            assert abs(tw.tilted.atoms[x] - p) <= 1e-14


def test_tilt_lazy_drift_frozen_oracle(lazy_drift):
    # arithmetic from the closed form: R = 1/(0.5 + 2*sqrt(0.06))
    tw = tilt_from_spectral(lazy_drift)
    atoms = tw.tilted.atoms
    assert atoms[(0,)] == pytest.approx(LAZY_R * 0.5, abs=1e-12)
    assert atoms[(1,)] == pytest.approx(LAZY_R * math.exp(LAZY_THETA) * 0.3, abs=1e-12)
    assert atoms[(-1,)] == pytest.approx(LAZY_R * math.exp(-LAZY_THETA) * 0.2, abs=1e-12)
    # frozen decimals of the same oracle
    assert atoms[(0,)] == pytest.approx(0.5051025721682212, abs=1e-9)
    assert atoms[(1,)] == pytest.approx(0.2474487139158961, abs=1e-9)
    # the reweighted walk has no drift, so the +/-1 masses coincide
    assert atoms[(1,)] == pytest.approx(atoms[(-1,)], abs=1e-13)


def test_tilt_finite_group_is_identity(z6_law):
    tw = tilt_from_spectral(z6_law)
    for x, p in z6_law.atoms.items():
        assert abs(tw.tilted.atoms[x] - p) <= 1e-14


def test_tilt_rejects_unnormalized_pair(bernoulli):
    exponential, sp = find_exponential(bernoulli)
    with pytest.raises(NotNormalized):
        tilt(bernoulli, exponential, 1.2)
    with pytest.raises(NotNormalized):
        tilt(bernoulli, LatticeExponential((0.0,)), sp.R)


def test_tilted_mass_is_one(asymmetric_corpus):
    for law in asymmetric_corpus:
        tw = tilt_from_spectral(law)
        assert abs(tw.tilted.mass() - 1.0) <= 1e-12


def test_tilted_atoms_match_reweighting_exactly(bernoulli):
    exponential, sp = find_exponential(bernoulli)
    tw = tilt(bernoulli, exponential, sp.R)
    for x, p in bernoulli.atoms.items():
        assert abs(tw.tilted.atoms[x] - sp.R * exponential.phi(x) * p) <= 1e-14


def test_power_identity_n2_both_sides_enumerated(bernoulli):
    tw = tilt_from_spectral(bernoulli)
    left = tw.tilted.power(2).atoms[(0,)]
    right = tw.R ** 2 * 1.0 * bernoulli.power(2).atoms[(0,)]
    assert left == pytest.approx(0.5, abs=1e-12)
    assert right == pytest.approx(0.5, abs=1e-12)
    assert check_tilted_powers(tw, 1) <= 1e-14  # n = 1 is definitional


def test_power_identity_corpus(asymmetric_corpus):
    for law in asymmetric_corpus:
        tw = tilt_from_spectral(law)
        n_max = 10 if law.group.dim == 1 else 8
        # accumulated convolution round-off only: <= n * 1e-13
        assert check_tilted_powers(tw, n_max) <= n_max * 1e-13


def test_power_identity_lazy_deep(lazy_drift):
    tw = tilt_from_spectral(lazy_drift)
    assert check_tilted_powers(tw, 8) <= 1e-12


def test_dual_invariance_corpus(asymmetric_corpus):
    for law in asymmetric_corpus:
        exponential, sp = find_exponential(law)
        assert check_dual_invariance(law, exponential, sp.R) <= 1e-10


def test_dual_invariance_bernoulli_tight(bernoulli):
    exponential, sp = find_exponential(bernoulli)
    assert check_dual_invariance(bernoulli, exponential, sp.R) <= 1e-12


def test_dual_invariance_symmetric_exact(simple_symmetric):
    exponential, sp = find_exponential(simple_symmetric)
    assert check_dual_invariance(simple_symmetric, exponential, sp.R) == 0.0


def test_dual_invariance_flags_wrong_pairing(bernoulli):
    _, sp = find_exponential(bernoulli)
    # reciprocal pairing: residual |1 - R * Lambda(-theta*)| = 2/3
    swapped = LatticeExponential((-sp.theta[0],))
    resid = check_dual_invariance(bernoulli, swapped, sp.R)
    assert resid == pytest.approx(2.0 / 3.0, abs=1e-9)
    # doubled exponent: the weighted mass is p*(q/p) + q*(p/q) = 1,
    # so the residual collapses to R - 1 = 0.1547005
    doubled = LatticeExponential((2.0 * sp.theta[0],))
    resid = check_dual_invariance(bernoulli, doubled, sp.R)
    assert resid == pytest.approx(sp.R - 1.0, abs=1e-9)
    assert resid == pytest.approx(0.1547005384, abs=1e-9)


def test_measure_invariance_corpus(asymmetric_corpus):
    for law in asymmetric_corpus:
        exponential, sp = find_exponential(law)
        assert check_measure_invariance(law, exponential, sp.R) <= 1e-10


def test_measure_invariance_symmetric_exact(simple_symmetric):
    exponential, sp = find_exponential(simple_symmetric)
    assert check_measure_invariance(simple_symmetric, exponential, sp.R) == 0.0


def test_measure_invariance_finite_doubly_stochastic(z6_law, s3_law):
    for law in (z6_law, s3_law):
        exponential, sp = find_exponential(law)
        assert check_measure_invariance(law, exponential, sp.R) <= 1e-12
        # oracle: on a finite group the transition matrix is doubly
        # stochastic, so counting measure itself is stationary with R = 1
        g = law.group
        matrix = [[0.0] * g.order for _ in range(g.order)]
        for u, p in law.atoms.items():
            for i in g.elements():
                matrix[i][g.multiply(i, u)] += p
        for j in g.elements():
            assert math.fsum(matrix[i][j] for i in g.elements()) == pytest.approx(
                1.0, abs=1e-14)


def test_symmetric_degeneracy(symmetric_corpus, bernoulli, wide_symmetric):
    for law in symmetric_corpus:
        deg = check_symmetric_degeneracy(law)
        assert (deg.is_symmetric, deg.r_equals_one, deg.phi_trivial) == (True, True, True)
    deg = check_symmetric_degeneracy(bernoulli)
    assert not deg.is_symmetric
    assert deg.r_equals_one is None and deg.phi_trivial is None


def test_tilting_twice_is_stationary(asymmetric_corpus):
    for law in asymmetric_corpus:
        tw = tilt_from_spectral(law)
        _, sp2 = find_exponential(tw.tilted)
        assert all(abs(t) <= 1e-7 for t in sp2.theta)
        assert abs(sp2.R - 1.0) <= 1e-10
        tw2 = tilt_from_spectral(tw.tilted)
        for x, p in tw.tilted.atoms.items():
            assert abs(tw2.tilted.atoms[x] - p) <= 1e-12


def test_tilt_commutes_with_dual(bernoulli, lazy_drift):
    for law in (bernoulli, lazy_drift):
        exponential, sp = find_exponential(law)
        tilted_dual = tilt(law.dual(), exponential.reciprocal(), sp.R).tilted
        dual_tilted = tilt(law, exponential, sp.R).tilted.dual()
        for x, p in dual_tilted.atoms.items():
            assert abs(tilted_dual.atoms[x] - p) <= 1e-15


def test_invariant_measure_table(bernoulli):
    exponential, sp = find_exponential(bernoulli)
    table = invariant_measure_table(bernoulli, exponential)
    assert table[bernoulli.group.identity()] == 1.0
    assert all(v > 0.0 for v in table.values.values())
    assert table[(1,)] == pytest.approx(math.exp(-sp.theta[0]), rel=1e-12)
