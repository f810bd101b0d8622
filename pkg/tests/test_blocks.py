"""Tests for sections on the pointed line and coinvariant estimation."""

import random
from fractions import Fraction

import pytest

from voablocks.blocks import (
    LabeledLine,
    MeromorphicSection,
    PointedLine,
    bracket_closure_check,
    coinvariant_report,
    laurent_expand,
    m_constant_and_gaps,
    pure_tensors,
    qgvo_apply,
    rr_h0,
    section_basis,
    theorem_bound,
)
from voablocks.core import mode_apply
from voablocks.virasoro import ising_model


OMEGA = {(2,): Fraction(1)}


def one_point_ising(cutoff=10):
    voa = ising_model(cutoff)
    return LabeledLine(PointedLine((Fraction(0),)), [voa]), voa


def test_pointed_line_validation():
    with pytest.raises(ValueError):
        PointedLine((0, 0))
    with pytest.raises(ValueError):
        PointedLine(())
    line = PointedLine((0, Fraction(1, 2)))
    assert line.points == (Fraction(0), Fraction(1, 2))


def test_section_validation():
    with pytest.raises(ValueError):
        MeromorphicSection(0, poly={0: 1})
    with pytest.raises(ValueError):
        MeromorphicSection(0, poles={(0, 1): 1})  # lone simple pole
    with pytest.raises(ValueError):
        MeromorphicSection(1, poly={1: 1})  # degree > 2d-2
    f = MeromorphicSection(0, poles={(0, 1): 1, (1, 1): -1})
    assert f.pole_order(0) == 1 and f.pole_order(2) == 0


def test_section_basis_counts():
    one = PointedLine((0,))
    two = PointedLine((0, 1))
    assert len(section_basis(one, 1, [2])) == 3  # two poles + constant
    assert len(section_basis(two, 2, [0, 0])) == 3  # polynomials 1, z, z^2
    assert len(section_basis(two, 0, [1, 1])) == 1  # balanced simple poles
    assert len(section_basis(two, 0, [3, 2])) == 4
    assert len(section_basis(two, 0, [1, 0])) == 0


def test_laurent_expand_geometric():
    line = PointedLine((0, 1))
    f = MeromorphicSection(1, poles={(1, 1): Fraction(1)})
    # 1/(z-1) around z=0: -(1 + z + z^2 + ...)
    coeffs = laurent_expand(line, f, 0, 4)
    assert coeffs == {k: Fraction(-1) for k in range(5)}
    # own pole is exact
    assert laurent_expand(line, f, 1, 4) == {-1: Fraction(1)}


def test_laurent_expand_polynomial_shift():
    line = PointedLine((2,))
    f = MeromorphicSection(2, poly={2: Fraction(1)})
    # z^2 = (2 + t)^2 = 4 + 4t + t^2
    assert laurent_expand(line, f, 0, 5) == {
        0: Fraction(4), 1: Fraction(4), 2: Fraction(1)
    }


def test_laurent_expand_double_pole():
    line = PointedLine((0, 3))
    f = MeromorphicSection(2, poles={(1, 2): Fraction(1)})
    # (z-3)^{-2} around 0: sum_k (k+1) 3^{-2-k} z^k
    coeffs = laurent_expand(line, f, 0, 3)
    assert coeffs == {k: Fraction(k + 1, 3 ** (k + 2)) for k in range(4)}


def test_qgvo_single_point_is_a_mode():
    surface, voa = one_point_ising(8)
    for m in (1, 2, 3):
        f = MeromorphicSection(2, poles={(0, m): Fraction(1)})
        got = qgvo_apply(surface, OMEGA, f, {((),): Fraction(1)})
        expect = mode_apply(voa, OMEGA, -m, {(): Fraction(1)})
        assert got == {(lab,): c for lab, c in expect.items()}


def test_qgvo_checks_weight_and_quasi_primary():
    surface, voa = one_point_ising(8)
    f1 = MeromorphicSection(1, poles={(0, 1): Fraction(1)})
    with pytest.raises(ValueError):
        qgvo_apply(surface, OMEGA, f1, {((),): Fraction(1)})
    f3 = MeromorphicSection(3, poles={(0, 1): Fraction(1)})
    with pytest.raises(ValueError):
        qgvo_apply(surface, {(3,): Fraction(1)}, f3, {((),): Fraction(1)})


def test_pure_tensors_enumeration():
    surface, voa = one_point_ising(6)
    labs = pure_tensors(surface, 3)
    # Ising vacuum dims 1,0,1,1 through degree 3
    assert len(labs) == 3


def test_vacuum_one_point_block_is_one_dimensional():
    surface, voa = one_point_ising(10)
    rep = coinvariant_report(surface, D=10, P=4)
    assert rep.est_per_degree[0] == 1
    assert all(x == 0 for x in rep.est_per_degree[1:])
    assert rep.total == 1
    assert rep.stabilized
    assert rep.total <= rep.theorem_bound
    assert not rep.bound_provisional


def test_theorem_bound_ising_vacuum():
    surface, voa = one_point_ising(10)
    bound, provisional = theorem_bound(surface)
    assert bound >= 1 and not provisional


def test_bracket_closure_two_point_vacuum():
    voa = ising_model(8)
    surface = LabeledLine(PointedLine((0, 1)), [voa, voa])
    f = MeromorphicSection(2, poles={(0, 1): Fraction(1)})
    g = MeromorphicSection(2, poles={(1, 1): Fraction(1)})
    assert bracket_closure_check(surface, (OMEGA, f), (OMEGA, g))


def test_rr_h0_values():
    assert rr_h0(0, 2, 0) == 3
    assert rr_h0(0, 1, 3) == 4
    assert rr_h0(1, 1, 0) == 1
    assert rr_h0(1, 0, 0) == 1
    assert rr_h0(0, 0, 0) == 0
    assert rr_h0(1, 2, 3) == 3
    assert rr_h0(2, 1, 2) == "unresolved"
    assert rr_h0(2, 3, 1) == 0  # degree -3
    with pytest.raises(ValueError):
        rr_h0(-1, 0, 0)


def test_rr_matches_section_basis_genus_zero():
    rng = random.Random(20240820)
    for _ in range(30):
        npts = rng.randint(1, 3)
        pts = rng.sample(range(-5, 6), npts)
        line = PointedLine(tuple(pts))
        d = rng.randint(0, 4)
        bounds = [rng.randint(0, 5) for _ in range(npts)]
        expect = rr_h0(0, d, sum(bounds))
        if expect == "unresolved":
            continue
        assert len(section_basis(line, d, bounds)) == expect


def test_m_constant_and_gaps():
    m, gaps = m_constant_and_gaps(0, 3)
    assert m == 1 and all(not g for g in gaps.values())
    m, gaps = m_constant_and_gaps(1, 1)
    assert m == 2 and gaps[1] == [1]
    m, gaps = m_constant_and_gaps(1, 2)
    assert m == 2 and gaps == {1: [1], 2: [1]}
