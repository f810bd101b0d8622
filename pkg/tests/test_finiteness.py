"""Mode-generated subspaces, quotient reports, spanning sets, certificates."""

import random
from fractions import Fraction

import pytest

from voablocks.core import mode_apply
from voablocks.finiteness import (
    SubspaceSpec,
    bound_k,
    complement_U,
    quotient_report,
    reduce_certificate,
    spanning_set_check,
    subspace_span,
)
from voablocks.lattice import heisenberg_model, lattice_model
from voablocks.linalg import Echelon
from voablocks.virasoro import irreducible_model, ising_model

rng = random.Random(20240819)


def test_subspace_spec_validation():
    with pytest.raises(ValueError):
        SubspaceSpec("cn", n=1)
    with pytest.raises(ValueError):
        SubspaceSpec("cmu", m=0, U=({},))
    with pytest.raises(ValueError):
        SubspaceSpec("cmu", m=2)
    with pytest.raises(ValueError):
        SubspaceSpec("weird")


def test_bound_k_values():
    assert bound_k(2, 3) == 33
    assert bound_k(1, 1) == 2
    assert bound_k(2, 3) <= bound_k(3, 3) == 48
    assert bound_k(2, 3) <= bound_k(2, 4)


def test_ising_c2_quotient_stabilizes_to_three():
    m = ising_model(cutoff=10)
    rep = quotient_report(m, SubspaceSpec("cn", n=2))
    assert rep.stabilized
    assert rep.cumulative == 3


def test_lee_yang_c2_quotient_stabilizes_to_two():
    m = irreducible_model(5, 2, 1, 1, cutoff=10)
    rep = quotient_report(m, SubspaceSpec("cn", n=2))
    assert rep.stabilized
    assert rep.cumulative == 2


def test_sigma_b1_quotient_bounded_by_two():
    voa = ising_model(cutoff=8)
    sigma = irreducible_model(4, 3, 1, 2, cutoff=8, voa=voa)
    rep = quotient_report(sigma, SubspaceSpec("b1"))
    assert rep.stabilized
    assert rep.cumulative <= 2


def test_heisenberg_c2_quotient_grows():
    h = heisenberg_model(rank=1, cutoff=8)
    rep = quotient_report(h, SubspaceSpec("cn", n=2))
    assert not rep.stabilized
    cums = []
    acc = 0
    for x in rep.per_degree:
        acc += x
        cums.append(acc)
    assert all(b >= a for a, b in zip(cums, cums[1:]))
    assert cums[-1] > cums[3]


def test_cn_nesting():
    m = ising_model(cutoff=8)
    spans = {}
    for n in (2, 3, 4):
        ech = {d: Echelon() for d in range(m.cutoff + 1)}
        for d, vec in subspace_span(m, SubspaceSpec("cn", n=n)):
            ech[d].add(vec)
        spans[n] = ech
    for n in (3, 4):
        for d in range(m.cutoff + 1):
            for _, row in spans[n][d].pivot_rows.items():
                assert spans[2][d].contains(row)


def test_b1_contains_c2():
    voa = ising_model(cutoff=8)
    sigma = irreducible_model(4, 3, 1, 2, cutoff=8, voa=voa)
    b1 = {d: Echelon() for d in range(sigma.cutoff + 1)}
    for d, vec in subspace_span(sigma, SubspaceSpec("b1")):
        b1[d].add(vec)
    for d, vec in subspace_span(sigma, SubspaceSpec("cn", n=2)):
        assert b1[d].contains(vec)


def test_b1_ground_level_untouched():
    voa = ising_model(cutoff=6)
    sigma = irreducible_model(4, 3, 1, 2, cutoff=6, voa=voa)
    assert all(d > 0 for d, _ in subspace_span(sigma, SubspaceSpec("b1")))


def test_complement_u_ising():
    m = ising_model(cutoff=8)
    U, r_u, s_u = complement_U(m)
    assert r_u == s_u
    assert len(U) == 3  # vacuum, omega, one more quasi-primary
    weights = sorted(int(m.state_weight(u)) for u in U)
    assert weights == [0, 2, 4]
    assert r_u == 4


def test_complement_u_a1_lattice():
    v = lattice_model([[2]], cutoff=4)
    U, r_u, _ = complement_U(v)
    # C2 misses all of V(1): h(-1), e_alpha, e_{-alpha} all appear in U
    assert sum(1 for u in U if v.state_weight(u) == 1) == 3


def test_complement_u_heisenberg_keeps_growing():
    h = heisenberg_model(rank=1, cutoff=6)
    U, r_u, _ = complement_U(h)
    assert r_u >= 5  # new complement vectors keep appearing


def test_spanning_set_check_ising():
    m = ising_model(cutoff=8)
    U, _, _ = complement_U(m)
    assert all(spanning_set_check(m, U))


def test_spanning_set_check_a1():
    v = lattice_model([[2]], cutoff=5)
    U, _, _ = complement_U(v)
    assert all(spanning_set_check(v, U))


def test_certificate_base_case_u_element():
    m = ising_model(cutoff=12)
    U, _, _ = complement_U(m)
    omega_u = next(u for u in U if m.state_weight(u) == 2)
    w = m.basis_state(())
    cert = reduce_certificate(m, omega_u, 4, w, U, m=2)
    assert len(cert.entries) == 1
    assert cert.verify(m)


def test_certificate_l_minus_one_shift():
    # a = L_{-1}u is pure C2: certificate is the single shifted entry.
    m = ising_model(cutoff=12)
    U, _, _ = complement_U(m)
    a = mode_apply(m, m.omega, 0, m.basis_state((2,)))  # L_{-1} omega
    w = m.basis_state(())
    cert = reduce_certificate(m, a, 6, w, U, m=2)
    assert cert.verify(m)


def test_certificate_omega_omega():
    m = ising_model(cutoff=14)
    U, _, _ = complement_U(m)
    a = mode_apply(m, m.omega, -1, m.omega)  # omega(-1)omega, weight 4
    w = m.basis_state(())
    cert = reduce_certificate(m, a, 8, w, U, m=2)
    assert cert.entries
    assert cert.verify(m)
    assert all(n >= 2 for _, n, _, _ in cert.entries)


def test_certificate_randomized_ising():
    m = ising_model(cutoff=14)
    U, _, _ = complement_U(m)
    labels2 = [lab for d in range(2, 5) for lab in m.labels_at(d)]
    for _ in range(10):
        alab = rng.choice(labels2)
        wt = int(m.weight_of(alab))
        q = 2 * wt + rng.randint(0, 1)
        w = m.basis_state(rng.choice(m.labels_at(rng.choice([0, 2]))))
        cert = reduce_certificate(m, m.basis_state(alab), q, w, U, m=2)
        assert cert.verify(m)


def test_certificate_precondition():
    m = ising_model(cutoff=10)
    U, _, _ = complement_U(m)
    with pytest.raises(ValueError):
        reduce_certificate(m, m.basis_state((2,)), 3, m.basis_state(()), U, m=2)
