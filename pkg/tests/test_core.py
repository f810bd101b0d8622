"""Tests for the generic mode calculus and identity residuals."""

import random
from fractions import Fraction

import pytest

from voablocks.core import (
    TruncationError,
    binom,
    check_identity,
    l1_apply,
    is_quasi_primary_generated,
    mode_apply,
    quasi_primary_space,
    state_add,
    state_scale,
    state_sub,
)
from voablocks.lattice import heisenberg_model
from voablocks.virasoro import ising_model, vacuum_voa


def test_binom_generalized():
    assert binom(4, 2) == 6
    assert binom(-1, 3) == -1
    assert binom(-2, 2) == 3
    assert binom(3, 5) == 0
    assert binom(0, 0) == 1
    # Pascal recurrence for negative upper index
    for p in range(-5, 0):
        for i in range(1, 6):
            assert binom(p, i) == binom(p - 1, i - 1) + binom(p - 1, i)


def test_state_arithmetic():
    a = {"x": Fraction(1), "y": Fraction(2)}
    b = {"y": Fraction(-2), "z": Fraction(1)}
    assert state_add(a, b) == {"x": Fraction(1), "z": Fraction(1)}
    assert state_sub(a, a) == {}
    assert state_scale(a, Fraction(0)) == {}
    assert state_scale(a, Fraction(3))["y"] == 6


def test_vacuum_mode_is_identity():
    voa = vacuum_voa(Fraction(1, 2), 6)
    w = {(2,): Fraction(5)}
    vac = {voa.vacuum: Fraction(1)}
    assert mode_apply(voa, vac, -1, w) == w
    assert mode_apply(voa, vac, 0, w) == {}
    assert mode_apply(voa, vac, -3, w) == {}


def test_omega_modes_are_virasoro():
    voa = vacuum_voa(Fraction(1, 2), 8)
    omega = {(2,): Fraction(1)}
    # L_0 = omega(1) is the grading operator
    for d in range(6):
        for lab in voa.labels_at(d):
            assert mode_apply(voa, omega, 1, {lab: Fraction(1)}) == (
                {lab: Fraction(d)} if d else {})
    # central term: L_2 L_{-2} vac = c/2 vac with L_n = omega(n+1)
    lm2 = mode_apply(voa, omega, -1, {voa.vacuum: Fraction(1)})
    assert mode_apply(voa, omega, 3, lm2) == {(): Fraction(1, 4)}


def test_iterated_mode_against_direct_composition():
    """(L_{-1}omega)(n) from the iterate formula vs the translation axiom."""
    voa = vacuum_voa(Fraction(1, 2), 8)
    omega = {(2,): Fraction(1)}
    deriv = {(3,): Fraction(1)}  # L_{-3}vac = L_{-1}omega
    for n in range(-3, 4):
        w = {(2,): Fraction(1)}
        got = mode_apply(voa, deriv, n, w)
        expect = state_scale(mode_apply(voa, omega, n - 1, w), -n)
        assert got == expect


def test_identity_residuals_zero_across_models():
    rng = random.Random(20240823)
    models = [ising_model(8), heisenberg_model(1, 8)]
    for model in models:
        done = 0
        while done < 30:
            degs = [d for d in range(4) if model.labels_at(d)]
            pick = lambda: {rng.choice(model.labels_at(rng.choice(degs))):
                            Fraction(1)}
            kind = rng.choice(["borcherds", "commutator", "translation"])
            params = {"a": pick(), "w": pick()}
            if kind != "translation":
                params["b"] = pick()
                params["p"] = rng.randint(-3, 3)
                params["q"] = rng.randint(-3, 3)
                if kind == "borcherds":
                    params["r"] = rng.randint(-3, 3)
            else:
                params["q"] = rng.randint(-3, 3)
            try:
                residual = check_identity(model, kind, **params)
            except TruncationError:
                continue
            assert residual == {}
            done += 1


def test_truncation_error_is_loud():
    voa = vacuum_voa(Fraction(1, 2), 4)
    omega = {(2,): Fraction(1)}
    deep = {(4,): Fraction(1)}
    with pytest.raises(TruncationError):
        mode_apply(voa, omega, -3, deep)


def test_quasi_primary_space_ising():
    voa = ising_model(8)
    assert quasi_primary_space(voa, 0) == [{(): Fraction(1)}]
    assert quasi_primary_space(voa, 1) == []
    qp2 = quasi_primary_space(voa, 2)
    assert len(qp2) == 1
    assert l1_apply(voa, qp2[0]) == {}
    assert quasi_primary_space(voa, 3) == []
    qp4 = quasi_primary_space(voa, 4)
    assert len(qp4) == 1 and l1_apply(voa, qp4[0]) == {}
    assert is_quasi_primary_generated(voa)
