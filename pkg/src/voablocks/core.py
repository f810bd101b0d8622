"""The mode calculus: truncated graded models and exact identity checkers.

A model presents a graded vector space (a vertex operator algebra or one of
its modules) by canonical basis labels up to a weight-depth cutoff, together
with primitive generator modes.  Arbitrary modes a(n) are derived from the
generator modes through the associativity formula; the derivation is exact
for every output weight within the cutoff and fails loudly otherwise.
"""

from __future__ import annotations

import math
from abc import ABC, abstractmethod
from fractions import Fraction
from typing import Hashable, Mapping

from .linalg import vec_add_scaled

State = dict  # BasisLabel -> Fraction, no stored zeros


class TruncationError(RuntimeError):
    """An exact answer would require weights above the model cutoff."""


def state_add(*states: Mapping) -> State:
    out: State = {}
    for s in states:
        vec_add_scaled(out, s, Fraction(1))
    return out


def state_scale(s: Mapping, c) -> State:
    c = Fraction(c)
    if not c:
        return {}
    return {k: c * v for k, v in s.items()}


def state_sub(a: Mapping, b: Mapping) -> State:
    out = dict(a)
    vec_add_scaled(out, b, Fraction(-1))
    return out


def binom(p: int, i: int) -> int:
    """Generalized binomial coefficient for integer p and i >= 0."""
    if i < 0:
        return 0
    if p >= 0:
        return math.comb(p, i) if i <= p else 0
    return (-1) ** i * math.comb(-p + i - 1, i)


class TruncatedModel(ABC):
    """A concrete graded model with an exact mode-action rule.

    Subclasses provide the basis enumeration, the decomposition of a basis
    label into generator(-n) * rest, and the primitive generator modes.
    Weights are exact rationals; within one model all weights are congruent
    modulo 1, so degrees (weight - lowest weight) are nonnegative integers.
    """

    kind: str = "abstract"

    def __init__(self, cutoff: int, lowest_weight: Fraction, central_charge: Fraction):
        self.cutoff = int(cutoff)
        self.lowest_weight = Fraction(lowest_weight)
        self.central_charge = Fraction(central_charge)
        self._mode_cache: dict = {}

    # -- structure every model exposes ------------------------------------
    voa: "TruncatedModel"  # the acting VOA; self for VOA models
    is_voa: bool = False
    vacuum: Hashable = None  # vacuum label (VOA models)

    @property
    def omega(self) -> State:
        raise NotImplementedError

    @abstractmethod
    def labels_at(self, degree: int) -> tuple:
        """Canonical basis labels at the given integer degree (0-based)."""

    @abstractmethod
    def weight_of(self, label) -> Fraction:
        ...

    @abstractmethod
    def decompose(self, label):
        """('vacuum',) | ('gen', gen_id) | ('iter', gen_id, k, rest_state).

        In the 'iter' case the label equals gen(-k) applied to rest_state
        with k >= 1, gen a primitive generator, and rest_state homogeneous.
        """

    @abstractmethod
    def gen_mode(self, gen_id, n: int, label) -> State:
        """Exact primitive action gen(n) on a basis label."""

    @abstractmethod
    def gen_weight(self, gen_id) -> Fraction:
        ...

    # -- derived helpers ---------------------------------------------------
    def degree_of(self, label) -> int:
        d = self.weight_of(label) - self.lowest_weight
        if d.denominator != 1:
            raise ValueError(f"non-integral degree for label {label!r}")
        return int(d)

    def dim(self, degree: int) -> int:
        return len(self.labels_at(degree))

    def basis_state(self, label) -> State:
        return {label: Fraction(1)}

    def all_labels(self, max_degree: int | None = None) -> list:
        top = self.cutoff if max_degree is None else min(max_degree, self.cutoff)
        out = []
        for d in range(top + 1):
            out.extend(self.labels_at(d))
        return out

    def state_weight(self, s: Mapping) -> Fraction | None:
        """Weight of a homogeneous state; None for zero, error if mixed."""
        wts = {self.weight_of(k) for k in s}
        if not wts:
            return None
        if len(wts) > 1:
            raise ValueError("state is not homogeneous")
        return wts.pop()

    def descriptor(self) -> dict:
        raise NotImplementedError


# ---------------------------------------------------------------------------
# Generic mode application


def mode_apply(model: TruncatedModel, a: Mapping, n: int, w: Mapping) -> State:
    """Exact a(n)w for a in the model's VOA and w in the model.

    Raises TruncationError whenever an exact answer (or an intermediate the
    associativity recursion genuinely needs) would live above the cutoff.
    """
    out: State = {}
    for alab, ac in a.items():
        for wlab, wc in w.items():
            vec_add_scaled(out, _mode_label(model, alab, n, wlab), ac * wc)
    return out


def _mode_state(model: TruncatedModel, a_state: Mapping, n: int, w_state: Mapping) -> State:
    return mode_apply(model, a_state, n, w_state)


def _mode_label(model: TruncatedModel, alab, n: int, wlab) -> State:
    key = (alab, n, wlab)
    cached = model._mode_cache.get(key)
    if cached is not None:
        return cached
    voa = model.voa
    final_wt = voa.weight_of(alab) + model.weight_of(wlab) - n - 1
    deg = final_wt - model.lowest_weight
    if deg.denominator != 1:
        result: State = {}
        model._mode_cache[key] = result
        return result
    deg = int(deg)
    if deg < 0:
        result = {}
        model._mode_cache[key] = result
        return result
    if deg > model.cutoff:
        raise TruncationError(
            f"a(n)w at degree {deg} exceeds cutoff {model.cutoff} "
            f"(a={alab!r}, n={n}, w={wlab!r})"
        )
    dec = voa.decompose(alab)
    if dec[0] == "vacuum":
        result = {wlab: Fraction(1)} if n == -1 else {}
    elif dec[0] == "gen":
        result = model.gen_mode(dec[1], n, wlab)
    else:
        _, gen, k, rest = dec
        result = _iterate_formula(model, gen, k, rest, n, wlab)
    model._mode_cache[key] = result
    return result


def _iterate_formula(model: TruncatedModel, gen, k: int, c_state: Mapping, Q: int, wlab) -> State:
    """(g(-k)c)(Q)w via the associativity formula, all sums exact-finite.

    (g(-k)c)(Q)w = sum_i C(k+i-1, i) g(-k-i)(c(Q+i)w)
                   - (-1)^k sum_i C(k+i-1, i) c(-k+Q-i)(g(i)w)
    """
    voa = model.voa
    wt_g = voa.gen_weight(gen)
    wt_c = voa.state_weight(c_state)
    if wt_c is None:
        return {}
    wt_w = model.weight_of(wlab)
    out: State = {}
    # First family: vanishes once c(Q+i)w is identically zero by grading.
    i_max1 = wt_c + wt_w - Q - 1 - model.lowest_weight
    i1 = math.floor(i_max1) if i_max1 >= 0 else -1
    for i in range(i1 + 1):
        inner = _mode_state(model, c_state, Q + i, {wlab: Fraction(1)})
        if not inner:
            continue
        coeff = Fraction(binom(-k, i) * (-1) ** i)
        term: State = {}
        for lab, cf in inner.items():
            vec_add_scaled(term, model.gen_mode(gen, -k - i, lab), cf)
        vec_add_scaled(out, term, coeff)
    # Second family: vanishes once g(i)w is zero by grading.
    i_max2 = wt_g + wt_w - 1 - model.lowest_weight
    i2 = math.floor(i_max2) if i_max2 >= 0 else -1
    sign = -Fraction((-1) ** k)
    for i in range(i2 + 1):
        inner = model.gen_mode(gen, i, wlab)
        if not inner:
            continue
        coeff = sign * binom(-k, i) * (-1) ** i
        term = _mode_state(model, c_state, -k + Q - i, inner)
        vec_add_scaled(out, term, coeff)
    return out


# ---------------------------------------------------------------------------
# Identity checkers (residual = LHS - RHS; zero for any valid model)


def check_identity(model: TruncatedModel, kind: str, **args) -> State:
    if kind == "borcherds":
        return _borcherds_residual(model, **args)
    if kind == "associativity":
        return _associativity_residual(model, **args)
    if kind == "commutator":
        return _commutator_residual(model, **args)
    if kind == "translation":
        return _translation_residual(model, **args)
    raise ValueError(f"unknown identity kind {kind!r}")


def _finite_floor(x) -> int:
    return math.floor(x) if x >= 0 else -1


def _borcherds_residual(model, a, b, w, p: int, q: int, r: int) -> State:
    voa = model.voa
    wa, wb = voa.state_weight(a), voa.state_weight(b)
    ww = model.state_weight(w)
    if wa is None or wb is None or ww is None:
        return {}
    lhs: State = {}
    # a(r+i)b = 0 once the product weight drops below 0 in the N-graded VOA.
    for i in range(_finite_floor(wa + wb - r - 1) + 1):
        if binom(p, i) == 0 and p >= 0 and i > p:
            break
        ab = _mode_state(voa, a, r + i, b)
        if not ab:
            continue
        vec_add_scaled(lhs, _mode_state(model, ab, p + q - i, w), Fraction(binom(p, i)))
    rhs: State = {}
    i_stop = _finite_floor(max(wb + ww - q - 1 - model.lowest_weight,
                               wa + ww - p - 1 - model.lowest_weight))
    for i in range(i_stop + 1):
        c = binom(r, i)
        if c == 0:
            continue
        coeff = Fraction((-1) ** i * c)
        t1 = _mode_state(model, a, p + r - i, _mode_state(model, b, q + i, w))
        vec_add_scaled(rhs, t1, coeff)
        t2 = _mode_state(model, b, q + r - i, _mode_state(model, a, p + i, w))
        vec_add_scaled(rhs, t2, -coeff * (-1 if r % 2 else 1))
    return state_sub(lhs, rhs)


def _associativity_residual(model, a, b, w, n: int, q: int) -> State:
    """(a(-n)b)(-q)w minus its associativity expansion (n >= 1)."""
    voa = model.voa
    wa, wb = voa.state_weight(a), voa.state_weight(b)
    ww = model.state_weight(w)
    if wa is None or wb is None or ww is None:
        return {}
    lhs = _mode_state(model, _mode_state(voa, a, -n, b), -q, w)
    rhs: State = {}
    i_stop = _finite_floor(max(wb + ww + q - 1 - model.lowest_weight,
                               wa + ww - 1 - model.lowest_weight))
    for i in range(i_stop + 1):
        coeff = Fraction(binom(-n, i) * (-1) ** i)
        t1 = _mode_state(model, a, -n - i, _mode_state(model, b, -q + i, w))
        vec_add_scaled(rhs, t1, coeff)
        t2 = _mode_state(model, b, -n - q - i, _mode_state(model, a, i, w))
        vec_add_scaled(rhs, t2, -coeff * (-1) ** n)
    return state_sub(lhs, rhs)


def _commutator_residual(model, a, b, w, p: int, q: int) -> State:
    voa = model.voa
    wa, wb = voa.state_weight(a), voa.state_weight(b)
    ww = model.state_weight(w)
    if wa is None or wb is None or ww is None:
        return {}
    lhs = state_sub(
        _mode_state(model, a, p, _mode_state(model, b, q, w)),
        _mode_state(model, b, q, _mode_state(model, a, p, w)),
    )
    rhs: State = {}
    for i in range(_finite_floor(wa + wb - 1) + 1):
        ab = _mode_state(voa, a, i, b)
        if not ab:
            continue
        vec_add_scaled(rhs, _mode_state(model, ab, p + q - i, w), Fraction(binom(p, i)))
    return state_sub(lhs, rhs)


def _translation_residual(model, a, w, q: int) -> State:
    """(L_{-1}a)(q)w + q a(q-1)w."""
    voa = model.voa
    la = _mode_state(voa, voa.omega, 0, a)  # L_{-1} = omega(0)
    t1 = _mode_state(model, la, q, w)
    t2 = state_scale(_mode_state(model, a, q - 1, w), q)
    return state_add(t1, t2)


# ---------------------------------------------------------------------------
# Quasi-primary structure


def l1_apply(model: TruncatedModel, s: Mapping) -> State:
    return _mode_state(model, model.voa.omega, 2, s)


def quasi_primary_space(model: TruncatedModel, degree: int) -> list[State]:
    """Basis of ker L_1 within the degree slice (exact kernel)."""
    labels = model.labels_at(degree)
    if not labels:
        return []
    kernel: list[State] = []
    from .linalg import SolverEchelon

    se = SolverEchelon()
    images = [l1_apply(model, {lab: Fraction(1)}) for lab in labels]
    # kernel of the map labels -> images: columns are added one at a time
    # and a dependent column yields a kernel vector.
    for idx, (lab, img) in enumerate(zip(labels, images)):
        if not img:
            kernel.append({lab: Fraction(1)})
            continue
        expr = se.solve(img)
        if expr is None:
            se.add(img, idx)
            continue
        vec: State = {lab: Fraction(1)}
        for j, cf in expr.items():
            vec_add_scaled(vec, {labels[j]: Fraction(1)}, -cf)
        kernel.append(vec)
    return kernel


def is_quasi_primary_generated(model: TruncatedModel) -> bool:
    """True iff L_1 V(1) = 0 (the standard criterion), checked exactly."""
    if not model.is_voa:
        raise ValueError("quasi-primary generation is a property of VOA models")
    for lab in model.labels_at(1):
        if l1_apply(model, {lab: Fraction(1)}):
            return False
    return True
