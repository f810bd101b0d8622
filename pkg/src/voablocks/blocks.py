"""Coinvariants over the pointed rational line, with exact section calculus.

Meromorphic sections of κ^{1-d} are stored as partial fractions over exact
rational points, expanded locally by binomial series, and paired with
quasi-primary states to act on tensor products of modules.  The dimension
estimator works degree by degree on the associated graded space; the
genus-g pole-order calculus is numeric only (Riemann-Roch).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

from .core import (
    State,
    TruncatedModel,
    TruncationError,
    binom,
    l1_apply,
    mode_apply,
    quasi_primary_space,
)
from .finiteness import SubspaceSpec, complement_U, quotient_report
from .linalg import Echelon, vec_add_scaled
from .virasoro import VerificationError


# ---------------------------------------------------------------------------
# Pointed lines and sections


@dataclass(frozen=True)
class PointedLine:
    """N distinct rational points on the affine chart; infinity unmarked."""

    points: tuple

    def __post_init__(self):
        pts = tuple(Fraction(p) for p in self.points)
        object.__setattr__(self, "points", pts)
        if len(set(pts)) != len(pts):
            raise ValueError("marked points must be pairwise distinct")
        if not pts:
            raise ValueError("at least one marked point required")


@dataclass
class LabeledLine:
    line: PointedLine
    modules: list

    def __post_init__(self):
        if len(self.modules) != len(self.line.points):
            raise ValueError("one module per marked point")
        voa = self.modules[0].voa
        if any(m.voa is not voa for m in self.modules):
            raise ValueError("all modules must share one VOA model")

    @property
    def voa(self) -> TruncatedModel:
        return self.modules[0].voa


class MeromorphicSection:
    """f(z)(dz)^{1-d} in partial fractions: poly part plus (z-Q_i)^{-m} parts.

    For d >= 1 the polynomial degree is capped at 2d-2 (holomorphy at
    infinity); for d = 0 (sections of κ) there is no polynomial part and the
    simple-pole coefficients must cancel in total (residue theorem).
    """

    def __init__(self, weight: int, poly: Mapping[int, Fraction] | None = None,
                 poles: Mapping[tuple, Fraction] | None = None):
        self.weight = int(weight)
        if self.weight < 0:
            raise ValueError("section weight must be nonnegative")
        self.poly = {int(j): Fraction(c) for j, c in (poly or {}).items() if c}
        self.poles = {(int(i), int(m)): Fraction(c)
                      for (i, m), c in (poles or {}).items() if c}
        for (i, m) in self.poles:
            if m < 1:
                raise ValueError("pole orders must be positive")
        if self.weight == 0:
            if self.poly:
                raise ValueError("weight-0 sections carry no polynomial part")
            res = sum((c for (i, m), c in self.poles.items() if m == 1),
                      Fraction(0))
            if res:
                raise ValueError("simple-pole residues must cancel in total")
        else:
            if any(j < 0 or j > 2 * self.weight - 2 for j in self.poly):
                raise ValueError("polynomial degree exceeds 2d-2")

    def pole_order(self, i: int) -> int:
        return max((m for (j, m) in self.poles if j == i), default=0)

    def max_pole_order(self) -> int:
        return max((m for (_, m) in self.poles), default=0)

    def to_json(self) -> dict:
        from .linalg import qstr

        return {
            "weight": self.weight,
            "poly": {str(j): qstr(c) for j, c in sorted(self.poly.items())},
            "poles": {f"{i},{m}": qstr(c) for (i, m), c in sorted(self.poles.items())},
        }


def section_basis(line: PointedLine, d: int,
                  pole_bounds: Sequence[int]) -> list[MeromorphicSection]:
    """Basis of sections of κ^{1-d} with pole order <= bound_i at Q_i."""
    n = len(line.points)
    bounds = list(pole_bounds)
    if len(bounds) != n or any(b < 0 for b in bounds):
        raise ValueError("one nonnegative pole bound per point required")
    out: list[MeromorphicSection] = []
    if d >= 1:
        for i in range(n):
            for m in range(1, bounds[i] + 1):
                out.append(MeromorphicSection(d, poles={(i, m): Fraction(1)}))
        for j in range(2 * d - 1):
            out.append(MeromorphicSection(d, poly={j: Fraction(1)}))
        return out
    for i in range(n):
        for m in range(2, bounds[i] + 1):
            out.append(MeromorphicSection(0, poles={(i, m): Fraction(1)}))
    anchor = next((i for i in range(n) if bounds[i] >= 1), None)
    if anchor is not None:
        for i in range(n):
            if i != anchor and bounds[i] >= 1:
                out.append(MeromorphicSection(0, poles={
                    (i, 1): Fraction(1), (anchor, 1): Fraction(-1)
                }))
    return out


def laurent_expand(line: PointedLine, f: MeromorphicSection, i: int,
                   order_cutoff: int) -> dict[int, Fraction]:
    """Exact coefficients of ι_{z_i} f from -pole_order(i) to order_cutoff."""
    if not (0 <= i < len(line.points)):
        raise ValueError("invalid point index")
    q = line.points[i]
    out: dict[int, Fraction] = {}

    def put(n: int, c: Fraction) -> None:
        if c and n <= order_cutoff:
            new = out.get(n, 0) + c
            if new:
                out[n] = new
            else:
                out.pop(n, None)

    for j, c in f.poly.items():
        # z^j = (q + z_i)^j
        for k in range(min(j, order_cutoff) + 1):
            put(k, c * binom(j, k) * q ** (j - k))
    for (jj, m), c in f.poles.items():
        if jj == i:
            put(-m, c)
            continue
        # (z - Q_j)^{-m} = (delta + z_i)^{-m}, delta = Q_i - Q_j != 0
        delta = q - line.points[jj]
        for k in range(order_cutoff + 1):
            put(k, c * binom(-m, k) * delta ** (-m - k))
    return out


# ---------------------------------------------------------------------------
# Quasi-global vertex operators on tensor states


def _tensor_degree(surface: LabeledLine, labs: tuple) -> int:
    return sum(m.degree_of(lab) for m, lab in zip(surface.modules, labs))


def pure_tensors(surface: LabeledLine, max_degree: int) -> list[tuple]:
    """All pure tensor labels with total degree <= max_degree."""
    out: list[tuple] = [()]
    for m in surface.modules:
        nxt = []
        for labs in out:
            used = _partial_degree(surface, labs)
            for d in range(max_degree - used + 1):
                for lab in m.labels_at(d):
                    nxt.append(labs + (lab,))
        out = nxt
    return out


def _partial_degree(surface: LabeledLine, labs: tuple) -> int:
    return sum(surface.modules[k].degree_of(lab) for k, lab in enumerate(labs))


def qgvo_apply(surface: LabeledLine, a: Mapping, f: MeromorphicSection,
               w: Mapping, check_quasi_primary: bool = True) -> dict:
    """Sum over slots of Res_{z_i} Y(a, z_i) ι_{z_i}f on a tensor state.

    w maps tuples of module basis labels to coefficients.
    """
    voa = surface.voa
    wt_a = voa.state_weight(a)
    if wt_a is None:
        return {}
    if wt_a != f.weight:
        raise ValueError(f"state weight {wt_a} does not match section weight "
                         f"{f.weight}")
    if check_quasi_primary and l1_apply(voa, a):
        raise ValueError("quasi-global operators require a quasi-primary state")
    out: dict = {}
    for labs, cf in w.items():
        for i, mod in enumerate(surface.modules):
            wlab = labs[i]
            n_max = int(wt_a) + mod.degree_of(wlab) - 1
            coeffs = laurent_expand(surface.line, f, i, n_max)
            for n, c in coeffs.items():
                res = mode_apply(mod, a, n, {wlab: Fraction(1)})
                for lab2, c2 in res.items():
                    key = labs[:i] + (lab2,) + labs[i + 1:]
                    new = out.get(key, 0) + cf * c * c2
                    if new:
                        out[key] = new
                    else:
                        out.pop(key, None)
    return out


# ---------------------------------------------------------------------------
# Lie-closure of quasi-global operators


def bracket_closure_check(surface: LabeledLine, op1: tuple, op2: tuple) -> bool:
    """Is [op1, op2], restricted to a truncated domain, a combination of
    quasi-global operators?

    The candidate family covers weights up to wt a + wt b - 1 with pole
    bounds ord_i f + ord_i g + (wt a + wt b - 1 - wt c), which is where the
    bracket's section data can live.
    """
    (a, f), (b, g) = op1, op2
    voa = surface.voa
    wa, wb = int(voa.state_weight(a)), int(voa.state_weight(b))
    n = len(surface.line.points)
    raise_total = max(
        (wa + f.pole_order(i) - 1) + (wb + g.pole_order(i) - 1)
        for i in range(n)
    )
    raise_total = max(raise_total, 0)
    min_cut = min(m.cutoff for m in surface.modules)
    d_dom = min_cut - raise_total
    if d_dom < 0:
        raise TruncationError("module cutoffs too small for the bracket domain")
    domain = pure_tensors(surface, d_dom)

    def flatten(apply_fn) -> dict:
        mat: dict = {}
        for labs in domain:
            res = apply_fn({labs: Fraction(1)})
            for out_labs, c in res.items():
                mat[(labs, out_labs)] = c
        return mat

    def commutator(w):
        first = qgvo_apply(surface, b, g, qgvo_apply(surface, a, f, w))
        second = qgvo_apply(surface, a, f, qgvo_apply(surface, b, g, w))
        for k, v in second.items():
            nv = first.get(k, 0) - v
            if nv:
                first[k] = nv
            else:
                first.pop(k, None)
        return first

    target = flatten(commutator)
    if not target:
        return True
    ech = Echelon()
    for dc in range(1, wa + wb):
        bounds = [f.pole_order(i) + g.pole_order(i) + (wa + wb - 1 - dc)
                  for i in range(n)]
        cands = quasi_primary_space(voa, dc)
        if not cands:
            continue
        sections = section_basis(surface.line, dc, bounds)
        for c_state in cands:
            for h in sections:
                mat = flatten(lambda w: qgvo_apply(surface, c_state, h, w))
                if mat:
                    ech.add(mat)
    return ech.contains(target)


# ---------------------------------------------------------------------------
# Coinvariant dimension estimation


@dataclass
class CoinvariantReport:
    est_per_degree: list
    d_valid: int
    total: int
    stabilized: bool
    theorem_bound: int
    bound_provisional: bool
    params: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "est_per_degree": list(self.est_per_degree),
            "d_valid": self.d_valid,
            "total": self.total,
            "stabilized": self.stabilized,
            "theorem_bound": self.theorem_bound,
            "bound_provisional": self.bound_provisional,
            "params": dict(self.params),
        }


def coinvariant_report(surface: LabeledLine, D: int, P: int,
                       w_max: int | None = None, window: int = 3,
                       with_bound: bool = True) -> CoinvariantReport:
    """Graded estimate of the coinvariant dimensions on the pointed line.

    Relations are quasi-global operator images with quasi-primary states of
    weight <= w_max, sections with pole bounds P, and source tensors of
    degree <= D - H where the headroom H = w_max + P - 1 caps how far a
    relation can climb; est_p is exact-by-construction for p <= D - H.
    """
    voa = surface.voa
    if w_max is None:
        _, w_max, _ = complement_U(voa)
    h = w_max + P - 1
    d_valid = D - h
    if d_valid < 0:
        raise ValueError("degree cutoff D leaves no valid range below headroom")
    if any(m.cutoff < D for m in surface.modules):
        raise ValueError("module cutoffs must reach the degree cutoff D")
    n = len(surface.line.points)
    sources = pure_tensors(surface, d_valid)
    # Pivot keys are (D - degree, label), so elimination always pivots on a
    # relation's highest-degree component; the pivot count at degree p is
    # then dim of the degree-p graded piece of the relation span.
    ech = Echelon()
    for da in range(1, w_max + 1):
        qps = quasi_primary_space(voa, da)
        if not qps:
            continue
        sections = section_basis(surface.line, da, [P] * n)
        for a in qps:
            for f in sections:
                for labs in sources:
                    rel = qgvo_apply(surface, a, f, {labs: Fraction(1)},
                                     check_quasi_primary=False)
                    if not rel:
                        continue
                    ech.add({(D - _tensor_degree(surface, k), k): v
                             for k, v in rel.items()})
    killed = [0] * (D + 1)
    for (dk, _labs) in ech.pivot_rows:
        killed[D - dk] += 1
    dims = _tensor_dims(surface, d_valid)
    est = [dims[p] - killed[p] for p in range(d_valid + 1)]
    stabilized = len(est) >= window and all(x == 0 for x in est[-window:])
    bound, provisional = (0, True)
    if with_bound:
        bound, provisional = theorem_bound(surface)
    return CoinvariantReport(
        est, d_valid, sum(est), stabilized, bound, provisional,
        params={"D": D, "P": P, "w_max": w_max,
                "points": [str(p) for p in surface.line.points]},
    )


def _tensor_dims(surface: LabeledLine, max_degree: int) -> list[int]:
    dims = [0] * (max_degree + 1)
    for labs in pure_tensors(surface, max_degree):
        dims[_tensor_degree(surface, labs)] += 1
    return dims


def theorem_bound(surface: LabeledLine) -> tuple[int, bool]:
    """Product over slots of the cumulative dims of W^i/C_M(U, W^i).

    At genus zero M = 1; the bound is provisional unless every factor's
    quotient report is stabilized.
    """
    voa = surface.voa
    U, r_u, _ = complement_U(voa)
    M, _ = m_constant_and_gaps(0, max(r_u, 1))
    bound = 1
    provisional = False
    for mod in surface.modules:
        rep = quotient_report(mod, SubspaceSpec("cmu", m=M, U=tuple(U)))
        bound *= rep.cumulative
        provisional = provisional or not rep.stabilized
    return bound, provisional


# ---------------------------------------------------------------------------
# Riemann-Roch pole-order calculus (numeric; any genus)


def rr_h0(g: int, n: int, m: int):
    """h^0(kappa^{1-n}(mQ)) when Riemann-Roch determines it; else "unresolved".

    deg = (1-n)(2g-2) + m; for deg > 2g-2 the answer is deg + 1 - g, for
    deg < 0 it is 0.  The two unconditional special cases are the trivial
    bundle (n = 1, m = 0) and kappa itself (n = 0, m = 0).
    """
    if g < 0 or n < 0 or m < 0:
        raise ValueError("g, n, m must be nonnegative")
    if n == 1 and m == 0:
        return 1
    if n == 0 and m == 0:
        return g
    deg = (1 - n) * (2 * g - 2) + m
    if deg > 2 * g - 2:
        return deg + 1 - g
    if deg < 0:
        return 0
    return "unresolved"


def m_constant_and_gaps(g: int, r_u: int) -> tuple[int, dict]:
    """(M, gaps): M is the least pole order from which, for every weight
    n <= r_u, sections with any exact pole order >= M are certified; gaps[n]
    lists the smaller orders whose existence Riemann-Roch cannot certify.
    """
    if r_u < 1:
        raise ValueError("r_U must be >= 1")
    gaps: dict[int, list] = {}
    M = 1
    for n in range(1, r_u + 1):
        m0 = 1 if g == 0 else n * (2 * g - 2) + 2
        m0 = max(m0, 1)
        gap_list = []
        for m in range(1, m0):
            lo, hi = rr_h0(g, n, m - 1), rr_h0(g, n, m)
            certified = (isinstance(lo, int) and isinstance(hi, int)
                         and hi == lo + 1)
            if not certified:
                gap_list.append(m)
        gaps[n] = gap_list
        M = max(M, m0)
    return M, gaps
