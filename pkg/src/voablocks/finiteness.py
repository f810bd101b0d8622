"""Mode-generated subspaces and quotient-dimension machinery.

C_n(W), B1(W), C_m(U,W) spans, quotient reports with stabilization
verdicts, complements of C2(V) inside ker L1, the strictly-decreasing-mode
spanning check, the explicit C_k ⊂ C_m(U,W) bound, and constructive
reduction certificates for a(-q)w with q >= m wt a.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

from .core import State, TruncatedModel, mode_apply, quasi_primary_space, state_scale
from .linalg import Echelon, SolverEchelon, vec_add_scaled
from .virasoro import VerificationError


# ---------------------------------------------------------------------------
# Subspace specifications


@dataclass(frozen=True)
class SubspaceSpec:
    """Which mode-generated subspace of a module to span.

    kind "cn": span of a(-n)w over all VOA a;  kind "b1": span of a(-1)w
    with wt a > 0;  kind "cmu": span of a(-k)w over a in U, k >= m;
    kind "cmq": span of (strictly-decreasing U-monomial)(-p)w with modes
    <= m and p >= q.
    """

    kind: str
    n: int = 2
    m: int = 1
    q: int = 1
    U: tuple = ()

    def __post_init__(self):
        if self.kind not in ("cn", "b1", "cmu", "cmq"):
            raise ValueError(f"unknown subspace kind {self.kind!r}")
        if self.kind == "cn" and self.n < 2:
            raise ValueError("cn requires n >= 2")
        if self.kind in ("cmu", "cmq") and self.m < 1:
            raise ValueError("m must be >= 1")
        if self.kind == "cmq" and self.q < 1:
            raise ValueError("q must be >= 1")
        if self.kind in ("cmu", "cmq") and not self.U:
            raise ValueError("generator set U required")


@dataclass
class QuotientReport:
    per_degree: list
    cumulative: int
    stabilized: bool
    window: int

    def to_json(self) -> dict:
        return {
            "per_degree": list(self.per_degree),
            "cumulative": self.cumulative,
            "stabilized": self.stabilized,
            "window": self.window,
        }


# ---------------------------------------------------------------------------
# Complements of C2 inside ker L1


def _c2_pairs(voa: TruncatedModel, degree: int):
    """All (a, b) basis label pairs with wt a(-2)b == degree."""
    for wa in range(degree):
        wb = degree - 1 - wa
        if wb < 0:
            continue
        for alab in voa.labels_at(wa):
            for blab in voa.labels_at(wb):
                yield alab, blab


def _c2_echelon(voa: TruncatedModel, degree: int) -> Echelon:
    ech = Echelon()
    for alab, blab in _c2_pairs(voa, degree):
        vec = mode_apply(voa, {alab: Fraction(1)}, -2, {blab: Fraction(1)})
        if vec:
            ech.add(vec)
    return ech


def complement_U(model: TruncatedModel) -> tuple[list[State], int, int]:
    """Graded basis of a complement of C2(V) chosen inside ker L1.

    Returns (U, r_U, s_U) where r_U = s_U = the maximal weight occurring
    in U.  Fails if ker L1 cannot complete C2(V) at some degree, which
    signals a model that is not quasi-primary generated.
    """
    if not model.is_voa:
        raise ValueError("complement_U expects a VOA model")
    if model.dim(0) != 1:
        raise ValueError("V(0) must be one-dimensional")
    U: list[State] = []
    max_wt = 0
    for d in range(model.cutoff + 1):
        ech = _c2_echelon(model, d)
        for vec in quasi_primary_space(model, d):
            if ech.add(vec):
                U.append(dict(vec))
                max_wt = max(max_wt, d)
        if ech.rank != model.dim(d):
            raise VerificationError(
                f"ker L1 does not complement C2(V) at degree {d}: "
                f"rank {ech.rank} < dim {model.dim(d)}"
            )
    return U, max_wt, max_wt


# ---------------------------------------------------------------------------
# Degreewise spans


def _state_max_weight(model: TruncatedModel, s: Mapping) -> Fraction | None:
    return max((model.weight_of(k) for k in s), default=None)


def _grade_split(model: TruncatedModel, s: Mapping) -> dict[int, State]:
    out: dict[int, State] = {}
    for lab, cf in s.items():
        out.setdefault(model.degree_of(lab), {})[lab] = cf
    return out


def subspace_span(module: TruncatedModel, spec: SubspaceSpec) -> list[tuple[int, State]]:
    """Complete graded generator list of the specified subspace up to cutoff.

    Completeness per degree d follows from the grading equation
    d = deg a + deg w + n - 1, which bounds every index by the cutoff.
    The vacuum never appears as a generator state: its only nonzero mode
    is the identity, which would trivialize the m = 1 quotients.
    """
    voa = module.voa
    cutoff = module.cutoff
    out: list[tuple[int, State]] = []

    def emit(a_state: Mapping, n: int) -> None:
        wt_a = voa.state_weight(a_state)
        if wt_a is None:
            return
        for dw in range(cutoff + 1):
            d = int(wt_a) + dw + n - 1
            if d > cutoff:
                break
            for wlab in module.labels_at(dw):
                vec = mode_apply(module, a_state, -n, {wlab: Fraction(1)})
                if vec:
                    out.append((d, vec))

    if spec.kind == "cn":
        for wa in range(1, cutoff + 2 - spec.n + 1):
            for alab in voa.labels_at(wa):
                emit({alab: Fraction(1)}, spec.n)
    elif spec.kind == "b1":
        for wa in range(1, cutoff + 1):
            for alab in voa.labels_at(wa):
                emit({alab: Fraction(1)}, 1)
    elif spec.kind == "cmu":
        for u in spec.U:
            wt = voa.state_weight(u)
            if wt is None or wt == 0:
                continue  # vacuum excluded
            for n in range(spec.m, cutoff + 2 - int(wt)):
                emit(u, n)
    else:  # cmq
        for mono in _decreasing_monomials(voa, spec.U, spec.m, cutoff):
            wt = voa.state_weight(mono)
            if wt is None or wt == 0:
                continue
            for p in range(spec.q, cutoff + 2 - int(wt)):
                emit(mono, p)
    return out


def _decreasing_monomials(voa: TruncatedModel, U: Sequence[Mapping], m: int,
                          cutoff: int) -> list[State]:
    """Nonempty u1(-n1)...uk(-nk)1 with m >= n1 > ... > nk > 0, ui in U."""
    pos = [u for u in U if voa.state_weight(u) and voa.state_weight(u) > 0]
    out: list[State] = []

    # Modes grow strictly from the innermost factor outward, so the leftmost
    # (outermost) mode n1 is the largest, as the spanning statement requires.
    def rec(state: State, n_min: int, weight: int) -> None:
        if weight > 0:
            out.append(state)
        for n in range(n_min, m + 1):
            for u in pos:
                wu = int(voa.state_weight(u))
                new_wt = weight + wu + n - 1
                if new_wt > cutoff:
                    continue
                new = mode_apply(voa, u, -n, state)
                if new:
                    rec(new, n + 1, new_wt)

    rec({voa.vacuum: Fraction(1)}, 1, 0)
    return out


def quotient_report(module: TruncatedModel, spec: SubspaceSpec,
                    window: int | None = None) -> QuotientReport:
    """Per-degree dims of W/span(spec); stabilized when the tail is zero."""
    if window is None:
        r_u = 0
        if spec.U:
            r_u = max(int(module.voa.state_weight(u) or 0) for u in spec.U)
        window = max(3, r_u)
    spans: dict[int, Echelon] = {d: Echelon() for d in range(module.cutoff + 1)}
    for d, vec in subspace_span(module, spec):
        spans[d].add(vec)
    per_degree = [module.dim(d) - spans[d].rank for d in range(module.cutoff + 1)]
    tail = per_degree[-window:] if window <= len(per_degree) else per_degree
    stabilized = len(per_degree) >= window and all(x == 0 for x in tail)
    return QuotientReport(per_degree, sum(per_degree), stabilized, window)


def spanning_set_check(model: TruncatedModel, U: Sequence[Mapping]) -> list[bool]:
    """Degreewise: do strictly-decreasing-mode U-monomials span V?"""
    if not model.is_voa:
        raise ValueError("spanning_set_check expects a VOA model")
    monos = _decreasing_monomials(model, U, model.cutoff + 1, model.cutoff)
    spans: dict[int, Echelon] = {d: Echelon() for d in range(model.cutoff + 1)}
    spans[0].add({model.vacuum: Fraction(1)})
    for s in monos:
        wt = model.state_weight(s)
        if wt is not None:
            spans[int(wt)].add(s)
    return [spans[d].rank == model.dim(d) for d in range(model.cutoff + 1)]


# ---------------------------------------------------------------------------
# The explicit C_k ⊂ C_m(U,W) bound


def bound_k(s_u: int, m: int) -> int:
    """k = k0*m with k0 = ceil((s_U + m - 1/2)^2 / 2)."""
    if s_u < 1 or m < 1:
        raise ValueError("s_U and m must be positive")
    num = (2 * (s_u + m) - 1) ** 2  # (s+m-1/2)^2 * 4
    k0 = -((-num) // 8)  # ceil(num/8)
    return k0 * m


# ---------------------------------------------------------------------------
# Reduction certificates


@dataclass
class ReductionCertificate:
    """Exact rewriting of a(-q)w as sum coeff * u(-n) w' with u in U, n >= m."""

    a: State
    q: int
    w: State
    m: int
    entries: list = field(default_factory=list)  # (u: State, n: int, state, coeff)

    def replay(self, module: TruncatedModel) -> State:
        out: State = {}
        for u, n, state, coeff in self.entries:
            vec_add_scaled(out, mode_apply(module, u, -n, state), coeff)
        return out

    def verify(self, module: TruncatedModel) -> bool:
        target = mode_apply(module, self.a, -self.q, self.w)
        return self.replay(module) == target


class _UDecomposer:
    """Per-weight solver expressing a as (U part) + (C2 generator part)."""

    def __init__(self, voa: TruncatedModel, U: Sequence[Mapping]):
        self.voa = voa
        self.U = [dict(u) for u in U]
        self._solvers: dict[int, SolverEchelon] = {}

    def _solver(self, weight: int) -> SolverEchelon:
        se = self._solvers.get(weight)
        if se is not None:
            return se
        se = SolverEchelon()
        for idx, u in enumerate(self.U):
            wt = self.voa.state_weight(u)
            if wt == weight:
                se.add(u, ("u", idx))
        for alab, blab in _c2_pairs(self.voa, weight):
            vec = mode_apply(self.voa, {alab: Fraction(1)}, -2, {blab: Fraction(1)})
            if vec:
                se.add(vec, ("c2", alab, blab))
        self._solvers[weight] = se
        return se

    def split(self, a: Mapping) -> tuple[dict, dict]:
        """a = sum lam_u * U[u] + sum mu_(b',c) * b'(-2)c, exactly."""
        wt = self.voa.state_weight(a)
        expr = self._solver(int(wt)).solve(a)
        if expr is None:
            raise VerificationError("U does not complement C2(V) at this weight")
        u_part = {k[1]: v for k, v in expr.items() if k[0] == "u"}
        c2_part = {(k[1], k[2]): v for k, v in expr.items() if k[0] == "c2"}
        return u_part, c2_part


def reduce_certificate(module: TruncatedModel, a: Mapping, q: int, w: Mapping,
                       U: Sequence[Mapping], m: int) -> ReductionCertificate:
    """Constructive membership a(-q)w in C_m(U,W) for q >= m wt a.

    The recursion mirrors the inductive proof: split a into its U part and
    C2 generators b'(-2)c, rewrite b'(-2)c = (L_{-1}b')(-1)c = b(-1)c, and
    reduce each term through the associativity and commutator formulas;
    every recursive call strictly decreases wt a.
    """
    voa = module.voa
    cert = ReductionCertificate(dict(a), q, dict(w), m)
    dec = _UDecomposer(voa, U)

    def binom_neg(p: int, j: int) -> int:
        from .core import binom

        return binom(p, j)

    def rec(a_state: Mapping, qq: int, w_state: Mapping, scale: Fraction) -> None:
        if not scale or not a_state or not w_state:
            return
        wt_a = voa.state_weight(a_state)
        if wt_a is None or wt_a < 1:
            raise ValueError("reduction requires homogeneous a of positive weight")
        wt_a = int(wt_a)
        if qq < m * wt_a:
            raise ValueError(f"precondition q >= m wt a violated: {qq} < {m * wt_a}")
        u_part, c2_part = dec.split(a_state)
        for uidx, lam in u_part.items():
            cert.entries.append((dict(U[uidx]), qq, dict(w_state), scale * lam))
        for (bplab, clab), mu in c2_part.items():
            sc = scale * mu
            bp = {bplab: Fraction(1)}
            if clab == voa.vacuum:
                # (L_{-1}b')(-q)w = q b'(-q-1)w
                rec(bp, qq + 1, w_state, sc * qq)
                continue
            b = mode_apply(voa, voa.omega, 0, bp)  # L_{-1} b'
            c = {clab: Fraction(1)}
            wt_b = int(voa.state_weight(b))
            wt_c = int(voa.state_weight(c))
            w_top = _state_max_weight(module, w_state)
            # a(-q)w = sum_i (b(-1-i)c(-q+i)w + c(-1-q-i)b(i)w)
            i_max2 = int(wt_b + w_top - module.lowest_weight) - 1
            for i in range(max(i_max2, -1) + 1):
                biw = mode_apply(module, b, i, w_state)
                if biw:
                    rec(c, 1 + qq + i, biw, sc)
            i_max1 = int(wt_c + w_top - module.lowest_weight) + qq - 1
            for i in range(max(i_max1, -1) + 1):
                cw = mode_apply(module, c, -qq + i, w_state)
                if not cw:
                    continue  # b(-1-i)c(-q+i)w vanishes outright
                if i >= m * wt_b:
                    rec(b, 1 + i, cw, sc)
                else:
                    # commutator route
                    bw = mode_apply(module, b, -1 - i, w_state)
                    if bw:
                        rec(c, qq - i, bw, sc)
                    for j in range(wt_b + wt_c):
                        bjc = mode_apply(voa, b, j, c)
                        if bjc:
                            rec(bjc, 1 + qq + j, w_state,
                                sc * binom_neg(-1 - i, j))

    rec(a, q, w, Fraction(1))
    assert all(n >= m for _, n, _, _ in cert.entries)
    return cert
