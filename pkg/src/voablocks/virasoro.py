"""Virasoro highest-weight models at desk scale.

Verma modules M(c,h) on partition monomials, singular-vector kernels,
irreducible quotients L(c,h) presented by explicit complement bases, the
square-root construction of the level-rs projection polynomials, and the
quotient-ring dimension bounds they imply.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Mapping

from .core import State, TruncatedModel, TruncationError
from .linalg import (
    BivariatePoly,
    Echelon,
    Laurent,
    SolverEchelon,
    vec_add_scaled,
)


class VerificationError(RuntimeError):
    """An exact cross-check that must hold for correct code has failed."""


# ---------------------------------------------------------------------------
# Minimal-series parameters


def minimal_params_values(p: int, q: int, r: int, s: int) -> tuple[Fraction, Fraction]:
    """Exact central charge and highest weight of the (p,q;r,s) entry."""
    _validate_minimal(p, q, r, s)
    c = 1 - Fraction(6 * (p - q) ** 2, p * q)
    h = Fraction((r * p - s * q) ** 2 - (p - q) ** 2, 4 * p * q)
    h_mirror = Fraction(((q - r) * p - (p - s) * q) ** 2 - (p - q) ** 2, 4 * p * q)
    assert h == h_mirror
    return c, h


def _validate_minimal(p: int, q: int, r: int, s: int) -> None:
    import math

    if p <= 0 or q <= 0 or math.gcd(p, q) != 1:
        raise ValueError(f"(p, q) = ({p}, {q}) must be coprime positive integers")
    if not (1 <= r < q and 1 <= s < p):
        raise ValueError(f"(r, s) = ({r}, {s}) out of range for (p, q) = ({p}, {q})")


# ---------------------------------------------------------------------------
# Partitions of module levels


def partitions(n: int) -> tuple[tuple[int, ...], ...]:
    """Weakly decreasing positive tuples summing to n."""
    return _partitions_cached(n, n)


_PARTS_CACHE: dict = {}


def _partitions_cached(n: int, maxpart: int) -> tuple[tuple[int, ...], ...]:
    if n == 0:
        return ((),)
    key = (n, maxpart)
    hit = _PARTS_CACHE.get(key)
    if hit is not None:
        return hit
    out = []
    for first in range(min(n, maxpart), 0, -1):
        for rest in _partitions_cached(n - first, first):
            out.append((first,) + rest)
    out = tuple(out)
    _PARTS_CACHE[key] = out
    return out


# ---------------------------------------------------------------------------
# Pure Verma-module mode action


class VermaAction:
    """L_m action on PBW partition monomials of M(c,h), exact and cached.

    [L_m, L_n] = (m - n) L_{m+n} + (c/12)(m^3 - m) delta_{m+n,0}.
    """

    def __init__(self, c: Fraction, h: Fraction):
        self.c = Fraction(c)
        self.h = Fraction(h)
        self._cache: dict = {}

    def L(self, m: int, part: tuple[int, ...]) -> State:
        key = (m, part)
        hit = self._cache.get(key)
        if hit is not None:
            return hit
        out: State
        if not part:
            if m > 0:
                out = {}
            elif m == 0:
                out = {(): self.h} if self.h else {}
            else:
                out = {(-m,): Fraction(1)}
        else:
            n1, rest = part[0], part[1:]
            if m < 0 and -m >= n1:
                out = {(-m,) + part: Fraction(1)}
            else:
                out = {}
                for lab, cf in self.L(m, rest).items():
                    vec_add_scaled(out, self.L(-n1, lab), cf)
                coeff = Fraction(m + n1)
                if coeff:
                    for lab, cf in self.L(m - n1, rest).items():
                        vec_add_scaled(out, {lab: cf}, coeff)
                if m == n1:
                    central = self.c / 12 * (m**3 - m)
                    if central:
                        vec_add_scaled(out, {rest: Fraction(1)}, central)
        self._cache[key] = out
        return out

    def apply_state(self, m: int, s: Mapping) -> State:
        out: State = {}
        for lab, cf in s.items():
            vec_add_scaled(out, self.L(m, lab), cf)
        return out


def singular_vectors(c: Fraction, h: Fraction, level: int) -> list[State]:
    """Exact basis of {u at the given level : L_1 u = L_2 u = 0} in M(c,h).

    L_n u = 0 for all n >= 3 then follows from the bracket relations, so
    these are precisely the singular vectors.
    """
    if level == 0:
        return [{(): Fraction(1)}]
    act = VermaAction(c, h)
    labels = partitions(level)
    se = SolverEchelon()
    kernel: list[State] = []
    for idx, part in enumerate(labels):
        img: dict = {}
        for lab, cf in act.L(1, part).items():
            img[("L1", lab)] = cf
        for lab, cf in act.L(2, part).items():
            img[("L2", lab)] = cf
        if not img:
            kernel.append({part: Fraction(1)})
            continue
        expr = se.solve(img)
        if expr is None:
            se.add(img, idx)
            continue
        vec: State = {part: Fraction(1)}
        for j, cf in expr.items():
            vec_add_scaled(vec, {labels[j]: Fraction(1)}, -cf)
        kernel.append(vec)
    return kernel


# ---------------------------------------------------------------------------
# Truncated Virasoro models (Verma or quotients of Verma)


def _has_one(part: tuple[int, ...]) -> bool:
    return bool(part) and part[-1] == 1


class VirasoroModel(TruncatedModel):
    """M(c,h) or a quotient of it by a submodule generated by singular vectors.

    Basis labels are partitions; for quotients each level carries an exact
    reduction of every partition monomial onto the chosen complement basis.
    """

    def __init__(
        self,
        c: Fraction,
        h: Fraction,
        cutoff: int,
        submodule_gens: list[State] | None = None,
        is_voa: bool = False,
        voa: "VirasoroModel | None" = None,
        kind: str = "virasoro-verma",
        params: dict | None = None,
    ):
        super().__init__(cutoff, Fraction(h), Fraction(c))
        self.kind = kind
        self.params = params or {}
        self.c = Fraction(c)
        self.h = Fraction(h)
        self.is_voa = is_voa
        self.voa = voa if voa is not None else self
        self.vacuum = ()
        self.action = VermaAction(self.c, self.h)
        self._build_quotient(submodule_gens or [])
        if is_voa:
            if self.h != 0:
                raise ValueError("a Virasoro VOA model requires h = 0")
            for d in range(cutoff + 1):
                for part in self._basis[d]:
                    if _has_one(part):
                        raise VerificationError(
                            "quotient basis of a VOA model contains L_{-1} monomials"
                        )

    # -- quotient construction --------------------------------------------
    def _build_quotient(self, gens: list[State]) -> None:
        cutoff = self.cutoff
        # Closure of the generators under all L_{-m}: spans U(Vir^-) . gens.
        seen = {d: Echelon() for d in range(cutoff + 1)}
        work: list[tuple[int, State]] = []
        for g in gens:
            lvl = self._state_level(g)
            if lvl is not None and lvl <= cutoff:
                work.append((lvl, g))
        head = 0
        while head < len(work):
            lvl, vec = work[head]
            head += 1
            if not seen[lvl].add(vec):
                continue
            for m in range(1, cutoff - lvl + 1):
                nv = self.action.apply_state(-m, vec)
                if nv:
                    work.append((lvl + m, nv))
        self._sub = {d: seen[d] for d in range(cutoff + 1)}
        # Complement basis per level, VOA models prefer 1-free monomials.
        self._basis: dict[int, tuple] = {}
        self._reduce_map: dict[int, dict] = {}
        for d in range(cutoff + 1):
            parts = sorted(partitions(d), key=lambda p: (_has_one(p), p))
            sel: list[tuple[int, ...]] = []
            solver = SolverEchelon()
            for part in parts:
                resid = self._sub[d].reduce({part: Fraction(1)})
                if not resid:
                    continue
                if solver.solve(resid) is None:
                    solver.add(resid, part)
                    sel.append(part)
            rmap: dict = {}
            for part in parts:
                resid = self._sub[d].reduce({part: Fraction(1)})
                expr = solver.solve(resid) if resid else {}
                if expr is None:
                    raise VerificationError("complement basis does not span quotient")
                rmap[part] = {k: v for k, v in expr.items() if v}
            self._basis[d] = tuple(sorted(sel))
            self._reduce_map[d] = rmap

    def _state_level(self, s: Mapping) -> int | None:
        lvls = {sum(p) for p in s}
        if not lvls:
            return None
        if len(lvls) > 1:
            raise ValueError("submodule generator is not homogeneous")
        return lvls.pop()

    def reduce_partition_state(self, s: Mapping) -> State:
        """Project a Verma-coordinates state onto the quotient basis."""
        out: State = {}
        for part, cf in s.items():
            lvl = sum(part)
            if lvl > self.cutoff:
                raise TruncationError(f"level {lvl} exceeds cutoff {self.cutoff}")
            vec_add_scaled(out, self._reduce_map[lvl][part], cf)
        return out

    # -- TruncatedModel interface ------------------------------------------
    @property
    def omega(self) -> State:
        return {(2,): Fraction(1)}

    def labels_at(self, degree: int) -> tuple:
        if degree < 0 or degree > self.cutoff:
            return ()
        return self._basis[degree]

    def weight_of(self, label) -> Fraction:
        return self.h + sum(label)

    def gen_weight(self, gen_id) -> Fraction:
        assert gen_id == "omega"
        return Fraction(2)

    def decompose(self, label):
        if not label:
            return ("vacuum",)
        if label == (2,):
            return ("gen", "omega")
        n1, rest = label[0], label[1:]
        return ("iter", "omega", n1 - 1, self.reduce_partition_state({rest: Fraction(1)}))

    def gen_mode(self, gen_id, n: int, label) -> State:
        assert gen_id == "omega"
        m = n - 1  # omega(n) = L_{n-1}
        lvl = sum(label) - m
        if lvl > self.cutoff:
            raise TruncationError(
                f"L_{m} on level {sum(label)} exceeds cutoff {self.cutoff}"
            )
        if lvl < 0:
            return {}
        return self.reduce_partition_state(self.action.L(m, label))

    def descriptor(self) -> dict:
        d = {"kind": self.kind, "cutoff": self.cutoff}
        d.update(self.params)
        return d


def vacuum_voa(c: Fraction, cutoff: int) -> VirasoroModel:
    """The universal Virasoro VOA at charge c: M(c,0) / <L_{-1}vac>."""
    gens = [{(1,): Fraction(1)}]
    from .linalg import qstr

    return VirasoroModel(
        c, Fraction(0), cutoff, gens, is_voa=True, kind="virasoro-vacuum",
        params={"c": qstr(Fraction(c))},
    )


def verma_model(c: Fraction, h: Fraction, cutoff: int,
                voa: VirasoroModel | None = None) -> VirasoroModel:
    """The Verma module M(c,h) as a module for the vacuum VOA at charge c."""
    from .linalg import qstr

    if voa is None:
        voa = vacuum_voa(c, cutoff)
    return VirasoroModel(
        c, h, cutoff, [], is_voa=False, voa=voa, kind="virasoro-verma",
        params={"c": qstr(Fraction(c)), "h": qstr(Fraction(h))},
    )


def irreducible_model(p: int, q: int, r: int, s: int, cutoff: int,
                      voa: VirasoroModel | None = None) -> VirasoroModel:
    """L(c_{p,q}, h_{p,q;r,s}): quotient by the two singular-vector submodules.

    The submodule generators sit at levels rs and (q-r)(p-s); generators
    above the cutoff are vacuously inactive at desk scale.
    """
    c, h = minimal_params_values(p, q, r, s)
    gens: list[State] = []
    for lv in {r * s, (q - r) * (p - s)}:
        if lv <= cutoff:
            vecs = singular_vectors(c, h, lv)
            if len(vecs) != 1:
                raise VerificationError(
                    f"expected a unique singular vector at level {lv}, got {len(vecs)}"
                )
            gens.append(vecs[0])
    is_vac = h == 0
    if not is_vac and voa is None:
        voa = irreducible_model(p, q, 1, 1, cutoff)
    return VirasoroModel(
        c, h, cutoff, gens, is_voa=is_vac, voa=voa, kind="virasoro-irreducible",
        params={"p": p, "q": q, "r": r, "s": s},
    )


def ising_model(cutoff: int) -> VirasoroModel:
    return irreducible_model(4, 3, 1, 1, cutoff)


# ---------------------------------------------------------------------------
# Level-rs projection polynomials (square-root construction)


def feigin_fuchs(r: int, s: int) -> BivariatePoly:
    """The degree-rs polynomial F_{r,s}(x, y; t).

    Its square is the product over 0 <= k < r, 0 <= l < s of
    x^2 - ((r-2k-1) t^{1/2} - (s-2l-1) t^{-1/2})^2 y.  The factor at (k,l)
    equals the factor at (r-1-k, s-1-l), so pairing them yields the square
    root directly; the construction is verified by squaring in ff_square.
    """
    if r < 1 or s < 1:
        raise ValueError("r, s must be positive")
    result = BivariatePoly({(0, 0): Laurent.const(1)})
    seen = set()
    for k in range(r):
        for l in range(s):
            partner = (r - 1 - k, s - 1 - l)
            if (k, l) == partner:
                # self-paired middle factor: contributes x
                result = result * BivariatePoly({(1, 0): Laurent.const(1)})
                continue
            if partner in seen:
                continue
            seen.add((k, l))
            a = r - 2 * k - 1
            b = s - 2 * l - 1
            # A^2 = a^2 t - 2ab + b^2 t^{-1}
            a2 = Laurent({1: Fraction(a * a), 0: Fraction(-2 * a * b), -1: Fraction(b * b)})
            factor = BivariatePoly({(2, 0): Laurent.const(1), (0, 1): -a2})
            result = result * factor
    return result


def ff_square_product(r: int, s: int) -> BivariatePoly:
    """The cited product formula for F_{r,s}^2, expanded over Q[t, 1/t]."""
    result = BivariatePoly({(0, 0): Laurent.const(1)})
    for k in range(r):
        for l in range(s):
            a = r - 2 * k - 1
            b = s - 2 * l - 1
            a2 = Laurent({1: Fraction(a * a), 0: Fraction(-2 * a * b), -1: Fraction(b * b)})
            result = result * BivariatePoly({(2, 0): Laurent.const(1), (0, 1): -a2})
    return result


def ff_squares_to_product(r: int, s: int) -> bool:
    F = feigin_fuchs(r, s)
    return (F * F) == ff_square_product(r, s)


def project_drop_deep_modes(u: Mapping) -> dict[tuple[int, int], Fraction]:
    """Image of a Verma state under the map killing every L_{-n}, n >= 3.

    Monomials are stored weakly decreasing, i.e. already in the order
    L_{-2}^j L_{-1}^i, so the projection reads exponents off directly:
    x^i y^j <-> i ones and j twos.
    """
    out: dict[tuple[int, int], Fraction] = {}
    for part, cf in u.items():
        if any(n >= 3 for n in part):
            continue
        j = sum(1 for n in part if n == 2)
        i = sum(1 for n in part if n == 1)
        key = (i, j)
        new = out.get(key, 0) + cf
        if new:
            out[key] = new
        else:
            out.pop(key, None)
    return out


def ff_verify(p: int, q: int, r: int, s: int) -> Fraction:
    """Exact proportionality check pi(u_{r,s}) = alpha F_{r,s}(x,y;p/q).

    u_{r,s} is normalized so its L_{-1}^{rs} coefficient is 1; returns the
    resulting alpha.  Non-proportionality signals an implementation bug.
    """
    _validate_minimal(p, q, r, s)
    c, h = minimal_params_values(p, q, r, s)
    level = r * s
    vecs = singular_vectors(c, h, level)
    if len(vecs) != 1:
        raise VerificationError(
            f"expected a unique singular vector at level {level}, got {len(vecs)}"
        )
    u = vecs[0]
    lead = (1,) * level
    if lead not in u or not u[lead]:
        raise VerificationError("singular vector has zero L_{-1}^{rs} coefficient")
    scale = 1 / u[lead]
    u = {k: v * scale for k, v in u.items()}
    pu = project_drop_deep_modes(u)
    Fpoly = feigin_fuchs(r, s).eval_t(Fraction(p, q))
    lead_key = (level, 0)
    if lead_key not in Fpoly:
        raise VerificationError("F_{r,s} is not monic in x")
    alpha = pu.get(lead_key, Fraction(0)) / Fpoly[lead_key]
    if not alpha:
        raise VerificationError("projection of the singular vector lost its leading term")
    if pu != {k: alpha * v for k, v in Fpoly.items()}:
        raise VerificationError(
            f"pi(u_{{{r},{s}}}) is not proportional to F for (p,q)=({p},{q})"
        )
    return alpha


def quotient_ring_bounds(p: int, q: int, r: int, s: int) -> tuple[int, int]:
    """(vacuum C2 bound, B1 bound) from the two-polynomial quotient ring.

    The vacuum bound is dim C[y]/(F_{q-1,p-1}(0, y; p/q)) = (p-1)(q-1)/2,
    confirmed by checking that the substituted polynomial is a nonzero
    multiple of that pure power of y.  The B1 bound is min(rs, (q-r)(p-s)).
    """
    _validate_minimal(p, q, r, s)
    t0 = Fraction(p, q)
    F = feigin_fuchs(q - 1, p - 1).subs_x0().eval_t(t0)
    expo = (p - 1) * (q - 1) // 2
    if set(F) != {(0, expo)}:
        raise VerificationError(
            f"F_{{{q-1},{p-1}}}(0, y; {p}/{q}) is not a nonzero multiple of y^{expo}"
        )
    b1 = min(r * s, (q - r) * (p - s))
    return expo, b1
