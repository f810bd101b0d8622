"""Even-lattice Fock models, their irreducible modules, and the Γ-set.

States are spanned by Heisenberg monomials applied to momentum vectors
e_{λ+γ}; all pairings are exact rationals computed from the Gram matrix.
The vertex operators of the momentum states are expanded through the two
exponential factors, the zero-mode power, and a fixed bimultiplicative
cocycle sign.
"""

from __future__ import annotations

import itertools
import math
from fractions import Fraction
from typing import Mapping, Sequence

from .core import State, TruncatedModel, TruncationError, mode_apply
from .linalg import Echelon, qstr, vec_add_scaled
from .virasoro import VerificationError


# ---------------------------------------------------------------------------
# Lattices


class EvenLattice:
    """Positive-definite integral lattice presented by its Gram matrix."""

    def __init__(self, gram: Sequence[Sequence[int]], require_even: bool = True):
        g = tuple(tuple(int(x) for x in row) for row in gram)
        n = len(g)
        if any(len(row) != n for row in g):
            raise ValueError("Gram matrix must be square")
        for i in range(n):
            for j in range(n):
                if g[i][j] != g[j][i]:
                    raise ValueError("Gram matrix must be symmetric")
        if require_even and any(g[i][i] % 2 for i in range(n)):
            raise ValueError("lattice is not even: odd diagonal entry")
        self.rank = n
        self.gram = g
        self.inv = _invert_rational(g)
        # Positive definiteness via leading principal minors.
        for k in range(1, n + 1):
            if _det_rational([row[:k] for row in g[:k]]) <= 0:
                raise ValueError("Gram matrix is not positive definite")

    def inner(self, u: Sequence, v: Sequence) -> Fraction:
        """<u|v> for coordinate vectors in the lattice basis."""
        total = Fraction(0)
        for i, ui in enumerate(u):
            if not ui:
                continue
            row = self.gram[i]
            total += ui * sum((Fraction(row[j]) * vj for j, vj in enumerate(v) if vj),
                              Fraction(0))
        return total

    def halfnorm(self, u: Sequence) -> Fraction:
        return self.inner(u, u) / 2


def _det_rational(m) -> Fraction:
    n = len(m)
    a = [[Fraction(x) for x in row] for row in m]
    det = Fraction(1)
    for col in range(n):
        piv = next((r for r in range(col, n) if a[r][col]), None)
        if piv is None:
            return Fraction(0)
        if piv != col:
            a[col], a[piv] = a[piv], a[col]
            det = -det
        det *= a[col][col]
        for r in range(col + 1, n):
            f = a[r][col] / a[col][col]
            if f:
                for c in range(col, n):
                    a[r][c] -= f * a[col][c]
    return det


def _invert_rational(m) -> tuple:
    n = len(m)
    a = [[Fraction(x) for x in row] + [Fraction(int(i == r)) for i in range(n)]
         for r, row in enumerate(m)]
    for col in range(n):
        piv = next((r for r in range(col, n) if a[r][col]), None)
        if piv is None:
            raise ValueError("singular Gram matrix")
        a[col], a[piv] = a[piv], a[col]
        pv = a[col][col]
        a[col] = [x / pv for x in a[col]]
        for r in range(n):
            if r != col and a[r][col]:
                f = a[r][col]
                a[r] = [x - f * y for x, y in zip(a[r], a[col])]
    return tuple(tuple(row[n:]) for row in a)


def _floor_sqrt(x: Fraction) -> int:
    """floor(sqrt(x)) for a nonnegative rational, exactly."""
    if x < 0:
        raise ValueError("negative radicand")
    return math.isqrt(int(x.numerator // x.denominator))


def short_vectors(lat: EvenLattice, shift: Sequence[Fraction], bound: Fraction):
    """All integer g with <shift+g|shift+g>/2 <= bound, with their halfnorms.

    Coordinates are boxed by x_i^2 <= <x|x> * (G^{-1})_{ii} (Cauchy-Schwarz
    against the dual basis vector of norm (G^{-1})_{ii}).
    """
    if bound < 0:
        return []
    ranges = []
    for i in range(lat.rank):
        # +1 absorbs the floor of the irrational box radius; the exact
        # halfnorm filter below discards the overshoot.
        k = _floor_sqrt(2 * bound * lat.inv[i][i]) + 1
        lo = math.ceil(-k - shift[i])
        hi = math.floor(k - shift[i])
        ranges.append(range(lo, hi + 1))
    out = []
    for g in itertools.product(*ranges):
        x = tuple(shift[i] + g[i] for i in range(lat.rank))
        hn = lat.halfnorm(x)
        if hn <= bound:
            out.append((g, hn))
    return out


# ---------------------------------------------------------------------------
# Fock models


def _reduce_lambda(lat: EvenLattice, lam_dual: Sequence[Fraction]) -> tuple:
    """Alpha-basis coordinates of λ, reduced into [0,1)^rank modulo L."""
    r = lat.rank
    lam_dual = tuple(Fraction(x) for x in lam_dual)
    if any(x.denominator != 1 for x in lam_dual):
        raise ValueError("module weight must pair integrally with the lattice")
    lam_alpha = tuple(
        sum(lat.inv[i][j] * lam_dual[j] for j in range(r)) for i in range(r)
    )
    return tuple(x - math.floor(x) for x in lam_alpha)


def _cocycle_sign(lat: EvenLattice, beta: Sequence[int], gamma: Sequence[int]) -> int:
    """epsilon(beta, gamma) = (-1)^{sum_{i>j} beta_i gamma_j <a_i|a_j>}.

    Bimultiplicative extension of epsilon(a_i, a_j) = (-1)^{<a_i|a_j>} for
    i > j and 1 otherwise; on module momenta lambda+gamma the sign is read
    from the integral part gamma alone.
    """
    e = 0
    for i in range(lat.rank):
        if not beta[i]:
            continue
        for j in range(i):
            if gamma[j]:
                e += beta[i] * gamma[j] * lat.gram[i][j]
    return -1 if e % 2 else 1


class FockModel(TruncatedModel):
    """V_{λ+L} over an even lattice, or the free-boson space (no momenta).

    Basis labels are (heis, gamma): heis a weakly decreasing tuple of pairs
    (n, i) for the creation modes alpha_i(-n), gamma the integer coordinates
    of the momentum offset (mu = lambda + gamma).
    """

    def __init__(
        self,
        gram: Sequence[Sequence[int]],
        lam_dual: Sequence[Fraction] | None,
        cutoff: int,
        lattice_enabled: bool = True,
        voa: "FockModel | None" = None,
    ):
        lat = EvenLattice(gram, require_even=lattice_enabled)
        self.lattice = lat
        self.lattice_enabled = lattice_enabled
        r = lat.rank
        if lam_dual is None:
            lam_dual = (0,) * r
        self.lam_alpha = _reduce_lambda(lat, lam_dual)
        if not lattice_enabled and any(self.lam_alpha):
            raise ValueError("free-boson model supports only the zero momentum")
        # Momentum layer: all gamma whose ground weight fits the cutoff.
        zero = (0,) * r
        if lattice_enabled:
            grounds = short_vectors(lat, self.lam_alpha, lat.halfnorm(self.lam_alpha))
            lw = min(hn for _, hn in grounds)
            grounds = short_vectors(lat, self.lam_alpha, lw + cutoff)
        else:
            lw = Fraction(0)
            grounds = [(zero, Fraction(0))]
        super().__init__(cutoff, lw, Fraction(r))
        self.kind = "lattice" if lattice_enabled else "heisenberg"
        self.is_voa = not any(self.lam_alpha)
        self.voa = voa if voa is not None else self
        if voa is None and not self.is_voa:
            raise ValueError("a module needs an explicit VOA model")
        self.vacuum = ((), zero)
        self._zero = zero
        self._grounds = grounds
        self._creation_cache: dict = {}
        self._labels: dict[int, tuple] = {d: () for d in range(cutoff + 1)}
        tmp: dict[int, list] = {d: [] for d in range(cutoff + 1)}
        for gamma, hn in grounds:
            base = hn - lw
            if base.denominator != 1:
                raise ValueError("momentum weights are not aligned modulo 1")
            base = int(base)
            for d in range(base, cutoff + 1):
                for heis in _colored_partitions(d - base, r):
                    tmp[d].append((heis, gamma))
        for d in range(cutoff + 1):
            self._labels[d] = tuple(sorted(tmp[d]))

    # -- TruncatedModel interface ------------------------------------------
    @property
    def omega(self) -> State:
        om: State = {}
        r = self.lattice.rank
        for i in range(r):
            for j in range(r):
                lab = (tuple(sorted([(1, i), (1, j)], reverse=True)), self._zero)
                vec_add_scaled(om, {lab: Fraction(1)}, self.lattice.inv[i][j] / 2)
        return om

    def labels_at(self, degree: int) -> tuple:
        if degree < 0 or degree > self.cutoff:
            return ()
        return self._labels[degree]

    def weight_of(self, label) -> Fraction:
        heis, gamma = label
        mu = tuple(self.lam_alpha[i] + gamma[i] for i in range(self.lattice.rank))
        return self.lattice.halfnorm(mu) + sum(n for n, _ in heis)

    def gen_weight(self, gen_id) -> Fraction:
        if gen_id[0] == "h":
            return Fraction(1)
        return self.lattice.halfnorm(gen_id[1])

    def decompose(self, label):
        heis, gamma = label
        if not heis:
            if gamma == self._zero:
                return ("vacuum",)
            return ("gen", ("e", gamma))
        if len(heis) == 1 and heis[0][0] == 1 and gamma == self._zero:
            return ("gen", ("h", heis[0][1]))
        n, i = heis[0]
        return ("iter", ("h", i), n, {(heis[1:], gamma): Fraction(1)})

    def gen_mode(self, gen_id, n: int, label) -> State:
        if gen_id[0] == "h":
            return self._h_mode(gen_id[1], n, label)
        return self._e_mode(gen_id[1], n, label)

    def descriptor(self) -> dict:
        return {
            "kind": self.kind,
            "gram": [list(row) for row in self.lattice.gram],
            "lambda_alpha": [qstr(x) for x in self.lam_alpha],
            "cutoff": self.cutoff,
        }

    # -- Heisenberg modes ----------------------------------------------------
    def _h_mode(self, i: int, n: int, label) -> State:
        heis, gamma = label
        if n < 0:
            new = tuple(sorted(heis + ((-n, i),), reverse=True))
            if self.weight_of((new, gamma)) - self.lowest_weight > self.cutoff:
                raise TruncationError("Heisenberg creation exceeds cutoff")
            return {(new, gamma): Fraction(1)}
        if n == 0:
            mu = tuple(self.lam_alpha[k] + gamma[k] for k in range(self.lattice.rank))
            ev = sum((Fraction(self.lattice.gram[i][k]) * mu[k]
                      for k in range(self.lattice.rank)), Fraction(0))
            return {label: ev} if ev else {}
        out: State = {}
        for pos, (m, j) in enumerate(heis):
            if m == n:
                coeff = Fraction(n * self.lattice.gram[i][j])
                if coeff:
                    rest = heis[:pos] + heis[pos + 1:]
                    vec_add_scaled(out, {(rest, gamma): Fraction(1)}, coeff)
        return out

    # -- Momentum-state modes -------------------------------------------------
    def _e_mode(self, beta: tuple, n: int, label) -> State:
        heis, gamma = label
        lat = self.lattice
        r = lat.rank
        mu = tuple(self.lam_alpha[k] + gamma[k] for k in range(r))
        s = lat.inner(beta, mu)
        if s.denominator != 1:
            raise ValueError("non-integral zero-mode pairing")
        s = int(s)
        sign = _cocycle_sign(lat, beta, gamma)
        gamma2 = tuple(gamma[k] + beta[k] for k in range(r))
        out: State = {}
        for (h2, drop), cf in self._annihilate(heis, beta).items():
            p = -n - 1 - s - drop
            if p < 0:
                continue
            for mon, acf in self._creation(beta, p).items():
                final = tuple(sorted(h2 + mon, reverse=True))
                vec_add_scaled(out, {(final, gamma2): Fraction(1)}, sign * cf * acf)
        return out

    def _annihilate(self, heis: tuple, beta: tuple) -> dict:
        """Expansion of exp(-sum_m beta(m) x^{-m} / m) on a Heisenberg monomial.

        Returns (remaining monomial, x-exponent dropped) -> coefficient.
        """
        lat = self.lattice
        pair = tuple(lat.inner(beta, tuple(int(k == c) for k in range(lat.rank)))
                     for c in range(lat.rank))
        out: dict = {}
        cur = {(heis, 0): Fraction(1)}
        j = 0
        while cur:
            for k, v in cur.items():
                out[k] = out.get(k, 0) + v
            j += 1
            nxt: dict = {}
            for (h, q), cf in cur.items():
                for pos, (m, c) in enumerate(h):
                    coeff = -pair[c] * cf / j
                    if coeff:
                        key = (h[:pos] + h[pos + 1:], q - m)
                        new = nxt.get(key, 0) + coeff
                        if new:
                            nxt[key] = new
                        else:
                            nxt.pop(key, None)
            cur = nxt
        return {k: v for k, v in out.items() if v}

    def _creation(self, beta: tuple, p: int) -> dict:
        """x^p coefficient of exp(sum_m beta(-m) x^m / m) as creation monomials.

        Computed by the derivative recursion p*A[p] = sum_{m<=p, c} beta_c *
        (attach alpha_c(-m)) A[p-m], which bakes in all factorial factors.
        """
        key = (beta, p)
        hit = self._creation_cache.get(key)
        if hit is not None:
            return hit
        if p == 0:
            result = {(): Fraction(1)}
        else:
            acc: dict = {}
            for m in range(1, p + 1):
                prev = self._creation(beta, p - m)
                for c, bc in enumerate(beta):
                    if not bc:
                        continue
                    for mon, cf in prev.items():
                        new_mon = tuple(sorted(mon + ((m, c),), reverse=True))
                        val = acc.get(new_mon, 0) + Fraction(bc) * cf
                        if val:
                            acc[new_mon] = val
                        else:
                            acc.pop(new_mon, None)
            result = {k: v / p for k, v in acc.items()}
        self._creation_cache[key] = result
        return result


def _colored_partitions(total: int, colors: int) -> list[tuple]:
    """Weakly decreasing tuples of (n, color) pairs with sum of n = total."""
    out: list[tuple] = []

    def rec(remaining: int, maxpair: tuple, acc: tuple):
        if remaining == 0:
            out.append(acc)
            return
        for n in range(min(remaining, maxpair[0]), 0, -1):
            top = maxpair[1] if n == maxpair[0] else colors - 1
            for c in range(top, -1, -1):
                rec(remaining - n, (n, c), acc + ((n, c),))

    rec(total, (total, colors - 1), ())
    return out


def lattice_model(gram, lam_dual=None, cutoff: int = 6,
                  voa: FockModel | None = None) -> FockModel:
    """V_L (lam zero) or the irreducible module V_{λ+L} over it."""
    lam = tuple(Fraction(x) for x in (lam_dual or ()))
    if lam and any(lam):
        if voa is None:
            voa = FockModel(gram, None, cutoff)
        return FockModel(gram, lam, cutoff, voa=voa)
    return FockModel(gram, None, cutoff, voa=voa)


def heisenberg_model(rank: int = 1, cutoff: int = 8) -> FockModel:
    gram = [[1 if i == j else 0 for j in range(rank)] for i in range(rank)]
    return FockModel(gram, None, cutoff, lattice_enabled=False)


# ---------------------------------------------------------------------------
# The Γ-set


def gamma_set(gram, lam_dual=None) -> list[tuple]:
    """Exactly {β ∈ L : <β-α|α+λ> < 0 for all α ∈ L, α ∉ {β, -λ}}.

    Candidates come from the box |<γ|α_i>| <= <α_i|α_i> on γ = λ+β plus the
    exceptional γ = ±α_i; each candidate is then verified against the
    definition, which is a finite check because <δ|γ-δ> < 0 holds
    automatically (Cauchy-Schwarz) once <δ|δ> > <γ|γ>.
    """
    lat = EvenLattice(gram)
    r = lat.rank
    lam_dual = tuple(Fraction(x) for x in (lam_dual or (0,) * r))
    if any(x.denominator != 1 for x in lam_dual):
        raise ValueError("lambda must lie in the dual lattice")
    lam_alpha = tuple(
        sum(lat.inv[i][j] * lam_dual[j] for j in range(r)) for i in range(r)
    )
    # Box enumeration for beta: |<lam+beta|alpha_i>| <= gram[i][i].
    half = []
    for i in range(r):
        width = sum(abs(lat.inv[i][j]) * lat.gram[j][j] for j in range(r))
        lo = math.ceil(-width - lam_alpha[i])
        hi = math.floor(width - lam_alpha[i])
        half.append(range(lo, hi + 1))
    candidates = set()
    for beta in itertools.product(*half):
        gamma = tuple(lam_alpha[i] + beta[i] for i in range(r))
        if all(abs(lat.inner(gamma, tuple(int(k == i) for k in range(r))))
               <= lat.gram[i][i] for i in range(r)):
            candidates.add(beta)
    # Exceptional candidates gamma = ±alpha_i (only meaningful when they lie
    # in lambda + L, i.e. lambda ∈ L); never auto-accepted.
    if all(x.denominator == 1 for x in lam_alpha):
        for i in range(r):
            for sgn in (1, -1):
                beta = tuple(int(sgn * (k == i) - lam_alpha[k]) for k in range(r))
                candidates.add(beta)
    out = []
    for beta in sorted(candidates):
        gamma = tuple(lam_alpha[i] + beta[i] for i in range(r))
        if _in_phi_gamma(lat, gamma):
            out.append(beta)
    return out


def _in_phi_gamma(lat: EvenLattice, gamma: tuple) -> bool:
    """Whether <δ|γ-δ> < 0 for every δ ∈ L with δ ∉ {0, γ}."""
    qg = lat.inner(gamma, gamma)
    zero = (0,) * lat.rank
    for delta, hn in short_vectors(lat, (Fraction(0),) * lat.rank, qg / 2):
        if delta == zero:
            continue
        if tuple(Fraction(x) for x in delta) == gamma:
            continue
        diff = tuple(gamma[i] - delta[i] for i in range(lat.rank))
        if lat.inner(delta, diff) >= 0:
            return False
    return True


# ---------------------------------------------------------------------------
# Single-jump relation and the B1 spanning check


def single_jump_check(gram, lam_dual, alpha: Sequence[int], beta: Sequence[int]) -> int:
    """Asserts e_{β-α}(-<β-α|λ+α>-1) e_{λ+α} = ± e_{λ+β}; returns the sign."""
    lat = EvenLattice(gram)
    r = lat.rank
    alpha = tuple(int(x) for x in alpha)
    beta = tuple(int(x) for x in beta)
    diff = tuple(beta[i] - alpha[i] for i in range(r))
    lam_dual = tuple(Fraction(x) for x in (lam_dual or (0,) * r))
    lam_alpha = _reduce_lambda(lat, lam_dual)
    degs = []
    for g in (alpha, beta):
        mu = tuple(lam_alpha[i] + g[i] for i in range(r))
        degs.append(lat.halfnorm(mu))
    lw = min(hn for _, hn in short_vectors(lat, lam_alpha, max(degs)))
    cutoff = int(max(degs) - lw) + 1
    voa_cut = max(cutoff, int(lat.halfnorm(diff)) + 1)
    voa = FockModel(gram, None, voa_cut)
    model = voa if not any(lam_alpha) else FockModel(gram, lam_dual, cutoff, voa=voa)
    mu_a = tuple(lam_alpha[i] + alpha[i] for i in range(r))
    mode = -int(lat.inner(diff, mu_a)) - 1
    result = mode_apply(model, {((), diff): Fraction(1)}, mode, {((), alpha): Fraction(1)})
    target = ((), beta)
    if set(result) != {target} or abs(result[target]) != 1:
        raise VerificationError(
            f"single-jump product is not ±e_(λ+β): got {result!r}"
        )
    return 1 if result[target] > 0 else -1


def b1_span_check(gram, lam_dual, cutoff: int) -> dict:
    """Degreewise check that span{e_{λ+β} : β ∈ Γ_λ} + B₁ fills V_{λ+L}."""
    lam = tuple(Fraction(x) for x in (lam_dual or ()))
    voa = FockModel(gram, None, cutoff)
    model = voa if not (lam and any(lam)) else FockModel(gram, lam, cutoff, voa=voa)
    gammas = gamma_set(gram, lam_dual)
    ground_labels = set()
    for beta in gammas:
        lab = ((), beta)
        wt = model.weight_of(lab)
        if wt - model.lowest_weight <= cutoff:
            ground_labels.add(lab)
    deficiencies = []
    for d in range(cutoff + 1):
        ech = Echelon()
        for wa in range(1, d + 1):
            for alab in voa.labels_at(wa):
                for wlab in model.labels_at(d - wa):
                    vec = mode_apply(model, {alab: Fraction(1)}, -1,
                                     {wlab: Fraction(1)})
                    if vec:
                        ech.add(vec)
        for lab in ground_labels:
            if model.degree_of(lab) == d:
                ech.add({lab: Fraction(1)})
        deficiencies.append(model.dim(d) - ech.rank)
    return {
        "per_degree_deficiency": deficiencies,
        "gamma_size": len(gammas),
        "ok": all(x == 0 for x in deficiencies),
    }
