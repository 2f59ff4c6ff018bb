import math

import pytest

from gibbskit.lattice import FiniteRegion, box
from gibbskit.potential import (
    IsingParams,
    Potential,
    UncertifiedTailError,
    a_phi,
    birkhoff_box_sum,
    constant_potential,
    evaluate,
    geometric_pair_potential,
    hamiltonian,
    ising,
    sv_tail,
    table_potential,
    variation_bound,
    zero_potential,
)
from gibbskit.subshift import FramedConfiguration, Pattern, TabulatedBoundary

PLUS = FramedConfiguration.constant(1, 1)
ALT = FramedConfiguration.periodic((2,), (1, -1))


def test_evaluate_examples():
    assert evaluate(zero_potential(1), PLUS) == 0.0
    assert evaluate(a_phi(ising(IsingParams(1.0, 0.0))), PLUS) == 1.0
    assert evaluate(a_phi(ising(IsingParams(0.0, 2.0))), PLUS) == 2.0
    # site 0 of the alternating frame carries +1
    assert evaluate(a_phi(ising(IsingParams(1.0, 0.0))), ALT) == -1.0


def test_a_phi_zero_interaction_is_zero():
    f = a_phi(ising(IsingParams(0.0, 0.0)))
    assert f.finite_range and evaluate(f, ALT) == 0.0


def test_a_phi_2d_all_plus():
    f = a_phi(ising(IsingParams(1.0, 0.5), 2))
    # (J/2) * 4 neighbours + h
    assert evaluate(f, FramedConfiguration.constant(1, 2)) == pytest.approx(2.5, abs=1e-15)


def test_variation_bound():
    f = a_phi(ising(IsingParams(1.0, 0.0)))
    assert f.range == 2
    assert variation_bound(f, 2) == 0.0 and variation_bound(f, 5) == 0.0
    assert variation_bound(f, 1) == f.oscillation() == 2.0
    assert variation_bound(zero_potential(), 1) == 0.0
    g = geometric_pair_potential(0.5, 0.25)
    assert variation_bound(g, 3) == pytest.approx((2 * 0.5 / 0.75) * 0.25**3)


def test_sv_tail():
    f = a_phi(ising(IsingParams(1.0, 0.0)))
    assert sv_tail(f, 2) == 0.0
    assert sv_tail(zero_potential(), 1) == 0.0
    q = 0.5
    g = Potential(1, evaluator=lambda x: 0.0, decay=(1.0, q))
    for N in (1, 3, 7):
        assert sv_tail(g, N) == pytest.approx(q ** (N + 1) / (1 - q), rel=1e-14)


def test_sv_tail_two_dims_dominates_partial_sums():
    q = 0.6
    g = Potential(2, evaluator=lambda x: 0.0, decay=(1.0, q))
    partial = math.fsum(n * q**n for n in range(4, 400))
    exact = q**4 * (4 - 3 * q) / (1 - q) ** 2  # sum_{n >= 4} n q^n
    assert partial <= exact + 1e-15
    assert exact <= sv_tail(g, 3) <= 1.25 * exact


def test_uncertified_potential_rejected():
    with pytest.raises(UncertifiedTailError):
        Potential(1, evaluator=lambda x: 0.0)


def test_hamiltonian_examples():
    lam = FiniteRegion.of([(0,)])
    assert hamiltonian(ising(IsingParams(1.0, 0.0)), lam, PLUS) == -2.0
    assert hamiltonian(ising(IsingParams(0.0, 0.0)), lam, PLUS) == 0.0
    assert hamiltonian(ising(IsingParams(0.0, 1.0)), lam, PLUS) == -1.0


def test_birkhoff_box_sum_examples():
    assert birkhoff_box_sum(zero_potential(), 4, ALT) == 0.0
    assert birkhoff_box_sum(constant_potential(1.5), 2, PLUS) == 4.5
    assert birkhoff_box_sum(a_phi(ising(IsingParams(1.0, 0.0))), 2, PLUS) == 3.0


def test_ising_terms():
    assert ising(IsingParams(0.0, 0.0)).terms == ()
    shapes_1d = [t.shape for t in ising(IsingParams(1.0, 1.0)).terms]
    assert shapes_1d == [FiniteRegion.interval(0, 2), FiniteRegion.of([(0,)])]
    shapes_2d = [t.shape.sites for t in ising(IsingParams(1.0, 1.0), 2).terms]
    assert shapes_2d == [((0, 0), (1, 0)), ((0, 0), (0, 1)), ((0, 0),)]


def test_hamiltonian_matches_brute_force_sum():
    phi = ising(IsingParams(0.7, -0.2))
    x = FramedConfiguration(Pattern.line([1, -1, -1, 1, 1]), TabulatedBoundary.of(-1, {}))
    lam = FiniteRegion.interval(1, 4)
    brute = 0.0
    for i in range(-5, 10):
        if i in (0, 1, 2, 3):  # bond {i, i+1} meets {1, 2, 3}
            brute += -0.7 * x.value((i,)) * x.value((i + 1,))
    brute += sum(0.2 * x.value((i,)) for i in (1, 2, 3))
    assert hamiltonian(phi, lam, x) == pytest.approx(brute, abs=1e-14)


def test_geometric_pair_ray_sum_matches_truncated_series():
    c, q = 0.8, 0.5
    g = geometric_pair_potential(c, q)
    x = FramedConfiguration(Pattern.line([1, -1, 1], 0), TabulatedBoundary.of(-1, {(5,): 1}))
    brute = c * x.value((0,)) * math.fsum(q**m * x.value((m,)) for m in range(1, 200))
    assert evaluate(g, x) == pytest.approx(brute, abs=1e-15)
    alt = FramedConfiguration.periodic((2,), (1, -1))
    brute = c * math.fsum(q**m * alt.value((m,)) for m in range(1, 200))
    assert evaluate(g, alt) == pytest.approx(brute, abs=1e-15)


def test_table_potential_defaults_to_zero():
    f = table_potential(FiniteRegion.interval(0, 2), {(1, 1): 3.0}, (0, 1))
    assert f.oscillation() == 3.0
    assert evaluate(f, FramedConfiguration.constant(1, 1)) == 3.0
    assert evaluate(f, FramedConfiguration.constant(0, 1)) == 0.0


def test_window_must_contain_origin():
    with pytest.raises(ValueError):
        Potential(1, FiniteRegion.interval(1, 3), lambda v: 0.0)


def test_box_sum_length():
    assert len(box(3, 1)) == 5
