"""Fock models over even lattices: dimensions, modes, Γ-sets, B1 spanning."""

import random
from fractions import Fraction

import pytest

from voablocks.core import check_identity, mode_apply
from voablocks.lattice import (
    EvenLattice,
    FockModel,
    b1_span_check,
    gamma_set,
    heisenberg_model,
    lattice_model,
    short_vectors,
    single_jump_check,
)
from voablocks.virasoro import VerificationError

rng = random.Random(20240818)

A1 = [[2]]


def test_even_lattice_validation():
    with pytest.raises(ValueError):
        EvenLattice([[1]])  # odd
    with pytest.raises(ValueError):
        EvenLattice([[2, 1], [0, 2]])  # not symmetric
    with pytest.raises(ValueError):
        EvenLattice([[2, 3], [3, 2]])  # indefinite
    lat = EvenLattice([[2, -1], [-1, 2]])
    assert lat.inner((1, 0), (0, 1)) == -1
    assert lat.halfnorm((1, 1)) == 1


def test_short_vectors_a1():
    lat = EvenLattice(A1)
    vecs = short_vectors(lat, (Fraction(0),), Fraction(1))
    assert sorted(g for g, _ in vecs) == [(-1,), (0,), (1,)]
    # shifted by lambda = alpha/2
    vecs = short_vectors(lat, (Fraction(1, 2),), Fraction(1, 4))
    assert sorted(g for g, _ in vecs) == [(-1,), (0,)]


def test_a1_graded_dimensions():
    v = lattice_model(A1, cutoff=3)
    assert [v.dim(d) for d in range(4)] == [1, 3, 4, 7]


def test_a1_module_dimensions_and_lowest_weight():
    voa = lattice_model(A1, cutoff=3)
    m = lattice_model(A1, lam_dual=[1], cutoff=2, voa=voa)
    assert m.lowest_weight == Fraction(1, 4)
    # degree 0: e_{±alpha/2}; degree 1: h(-1) on each; degree 2 adds the
    # level-2 Heisenberg layer plus the e_{±3alpha/2} grounds.
    assert m.dim(0) == 2
    assert m.dim(1) == 2
    assert m.dim(2) == 6


def test_central_charge_is_rank():
    assert lattice_model(A1, cutoff=2).central_charge == 1
    assert lattice_model([[2, -1], [-1, 2]], cutoff=2).central_charge == 2


def test_heisenberg_dimensions_are_partition_counts():
    h = heisenberg_model(rank=1, cutoff=6)
    assert [h.dim(d) for d in range(7)] == [1, 1, 2, 3, 5, 7, 11]


def test_e_alpha_on_e_minus_alpha():
    # <alpha|-alpha> = -2, so e_alpha(n)e_{-alpha} = 0 for n >= 2 and
    # e_alpha(1)e_{-alpha} = ±vacuum.
    v = lattice_model(A1, cutoff=3)
    ea = {((), (1,)): Fraction(1)}
    eminus = {((), (-1,)): Fraction(1)}
    assert mode_apply(v, ea, 2, eminus) == {}
    assert mode_apply(v, ea, 3, eminus) == {}
    res = mode_apply(v, ea, 1, eminus)
    assert set(res) == {v.vacuum} and abs(res[v.vacuum]) == 1
    # e_alpha(0)e_{-alpha} lands in the Cartan layer at weight 1
    res0 = mode_apply(v, ea, 0, eminus)
    assert res0 and all(lab[1] == (0,) for lab in res0)


def test_l0_eigenvalue_on_ground_states():
    voa = lattice_model(A1, cutoff=4)
    m = lattice_model(A1, lam_dual=[1], cutoff=3, voa=voa)
    for model in (voa, m):
        for d in range(3):
            for lab in model.labels_at(d):
                got = mode_apply(model, model.voa.omega, 1, {lab: Fraction(1)})
                assert got == {lab: model.weight_of(lab)} or (
                    not got and model.weight_of(lab) == 0
                )


def test_identities_on_a1():
    v = lattice_model(A1, cutoff=5)
    a = v.basis_state(((), (1,)))          # e_alpha
    b = v.basis_state((((1, 0),), (0,)))   # h(-1)
    w = v.basis_state(((), (-1,)))         # e_{-alpha}
    assert check_identity(v, "commutator", a=a, b=b, w=w, p=0, q=1) == {}
    assert check_identity(v, "associativity", a=b, b=a, w=w, n=1, q=1) == {}
    assert check_identity(v, "translation", a=a, w=w, q=0) == {}
    assert check_identity(v, "borcherds", a=b, b=a, w=w, p=1, q=0, r=1) == {}
    # omega is Virasoro: commutator with itself
    assert check_identity(v, "commutator", a=v.omega, b=v.omega,
                          w=v.basis_state(v.vacuum), p=2, q=0) == {}


def test_gamma_set_a1():
    assert gamma_set(A1, [0]) == [(-1,), (0,), (1,)]


def test_gamma_set_contains_zero_for_trivial_lambda():
    for gram in (A1, [[2, -1], [-1, 2]], [[4]]):
        assert (0,) * len(gram) in set(map(tuple, gamma_set(gram))) or \
            tuple([0] * len(gram)) in gamma_set(gram)


def test_gamma_set_lambda_half():
    out = gamma_set(A1, [1])
    # finite, inside the candidate box
    assert out
    assert all(abs(2 * (Fraction(1, 2) + b[0])) <= 2 for b in out)


def test_gamma_set_box_bound_random_rank2():
    for _ in range(10):
        while True:
            a = rng.randrange(2, 7, 2)
            c = rng.randrange(2, 7, 2)
            b = rng.randint(-3, 3)
            if a * c - b * b > 0 and abs(b) <= 6:
                break
        gram = [[a, b], [b, c]]
        out = gamma_set(gram)
        bound = (2 * a + 1) * (2 * c + 1) + 4
        assert len(out) <= bound


def test_single_jump_signs():
    assert single_jump_check(A1, [0], (0,), (0,)) == 1
    assert abs(single_jump_check(A1, [0], (0,), (1,))) == 1
    assert abs(single_jump_check(A1, [1], (0,), (-1,))) == 1
    assert abs(single_jump_check(A1, [0], (-1,), (1,))) == 1


def test_b1_span_check_a1():
    for lam in ([0], [1]):
        rep = b1_span_check(A1, lam, cutoff=4)
        assert rep["ok"], rep
        assert rep["per_degree_deficiency"] == [0] * 5


def test_module_requires_integral_dual_coordinates():
    with pytest.raises(ValueError):
        lattice_model(A1, lam_dual=["1/3"], cutoff=2,
                      voa=lattice_model(A1, cutoff=2))
