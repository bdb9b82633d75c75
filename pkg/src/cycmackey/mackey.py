"""Cohomological Mackey functors for the cyclic group of order p^n.

Values live at subgroup levels 0..n (level k is the subgroup of index p^k).
Only adjacent restrictions and transfers are stored; longer ones are
composites.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from gmpy2 import mpq

from . import dvr
from .dvr import matmul, zeros
from .errors import (AxiomViolation, BadIndex, BadIndices, DepthExceeded, HasTorsion,
                     InternalInconsistency, NotExact, NotNatural, OracleMismatch)
from .lattice import GLattice, coinvariants, fixed_points, orbit_size
from .modules import (FGModule, ModuleMap, cokernel, direct_sum, factor_through,
                      factor_through_quotient, free_module, hom_make, identity_map,
                      is_exact, is_injective, is_surjective, kernel, mod_p_reduce,
                      quotient, zero_map)


# ---------------------------------------------------------------- data types

@dataclass(frozen=True, eq=False)
class MackeyFunctor:
    p: int
    n: int
    levels: tuple
    res: tuple     # res[k]: X_k -> X_{k+1}
    tr: tuple      # tr[k]: X_{k+1} -> X_k
    gamma: tuple   # gamma[k]: X_k -> X_k

    def __post_init__(self):
        for name in ("levels", "res", "tr", "gamma"):
            object.__setattr__(self, name, tuple(getattr(self, name)))
        n = self.n
        if len(self.levels) != n + 1 or len(self.gamma) != n + 1:
            raise ValueError("need n+1 levels and conjugations")
        if len(self.res) != n or len(self.tr) != n:
            raise ValueError("need n restrictions and transfers")
        for k in range(n):
            if self.res[k].domain != self.levels[k] or self.res[k].codomain != self.levels[k + 1]:
                raise ValueError(f"restriction {k} has the wrong shape")
            if self.tr[k].domain != self.levels[k + 1] or self.tr[k].codomain != self.levels[k]:
                raise ValueError(f"transfer {k} has the wrong shape")
        for k in range(n + 1):
            if self.gamma[k].domain != self.levels[k] or self.gamma[k].codomain != self.levels[k]:
                raise ValueError(f"conjugation {k} has the wrong shape")

    def __eq__(self, other):
        return (isinstance(other, MackeyFunctor) and (self.p, self.n) == (other.p, other.n)
                and self.levels == other.levels and self.res == other.res
                and self.tr == other.tr and self.gamma == other.gamma)

    __hash__ = None

    @property
    def is_lattice(self) -> bool:
        return all(M.is_torsion_free for M in self.levels)

    @property
    def ranks(self) -> tuple:
        return tuple(M.free_rank for M in self.levels)

    def res_composite(self, j: int, k: int) -> ModuleMap:
        """Restriction X_j -> X_k for j <= k."""
        f = identity_map(self.levels[j])
        for i in range(j, k):
            f = self.res[i] @ f
        return f

    def tr_composite(self, k: int, j: int) -> ModuleMap:
        """Transfer X_k -> X_j for j <= k."""
        f = identity_map(self.levels[k])
        for i in range(k - 1, j - 1, -1):
            f = self.tr[i] @ f
        return f


@dataclass(frozen=True, eq=False)
class NatTransform:
    source: MackeyFunctor
    target: MackeyFunctor
    components: tuple

    def __post_init__(self):
        object.__setattr__(self, "components", tuple(self.components))
        for k, c in enumerate(self.components):
            if c.domain != self.source.levels[k] or c.codomain != self.target.levels[k]:
                raise ValueError(f"component {k} has the wrong shape")

    def __matmul__(self, other: "NatTransform") -> "NatTransform":
        return NatTransform(other.source, self.target,
                            [a @ b for a, b in zip(self.components, other.components)])

    def __add__(self, other):
        return NatTransform(self.source, self.target,
                            [a + b for a, b in zip(self.components, other.components)])

    def __neg__(self):
        return NatTransform(self.source, self.target, [-a for a in self.components])

    def is_zero(self) -> bool:
        return all(c.is_zero() for c in self.components)


def nat_validate(phi: NatTransform) -> None:
    X, Y = phi.source, phi.target
    c = phi.components
    for k in range(X.n):
        if not c[k + 1] @ X.res[k] == Y.res[k] @ c[k]:
            raise NotNatural(f"restriction square {k} does not commute")
        if not c[k] @ X.tr[k] == Y.tr[k] @ c[k + 1]:
            raise NotNatural(f"transfer square {k} does not commute")
    for k in range(X.n + 1):
        if not c[k] @ X.gamma[k] == Y.gamma[k] @ c[k]:
            raise NotNatural(f"conjugation square {k} does not commute")


def identity_nat(X: MackeyFunctor) -> NatTransform:
    return NatTransform(X, X, [identity_map(M) for M in X.levels])


def zero_functor(p: int, n: int) -> MackeyFunctor:
    Z = FGModule(p)
    return MackeyFunctor(p, n, [Z] * (n + 1), [zero_map(Z, Z)] * n, [zero_map(Z, Z)] * n,
                         [identity_map(Z)] * (n + 1))


def _sum_of_powers(g: ModuleMap, step: int, count: int) -> ModuleMap:
    """sum_{j < count} g^(j*step)."""
    h = g.power(step)
    total = zero_map(g.domain, g.domain)
    term = identity_map(g.domain)
    for _ in range(count):
        total = total + term
        term = term @ h
    return total


def mackey_validate(X: MackeyFunctor) -> None:
    p, n = X.p, X.n
    if not X.gamma[0] == identity_map(X.levels[0]):
        raise AxiomViolation("cMF1", 0)
    for k in range(n + 1):
        if not X.gamma[k].power(p ** k) == identity_map(X.levels[k]):
            raise AxiomViolation("cMF3", k)
    for k in range(n):
        if not X.gamma[k + 1] @ X.res[k] == X.res[k] @ X.gamma[k]:
            raise AxiomViolation("cMF4", k)
        if not X.gamma[k] @ X.tr[k] == X.tr[k] @ X.gamma[k + 1]:
            raise AxiomViolation("cMF5", k)
        if not X.res[k] @ X.tr[k] == _sum_of_powers(X.gamma[k + 1], p ** k, p):
            raise AxiomViolation("cMF6", k)
        if not X.tr[k] @ X.res[k] == identity_map(X.levels[k]).scale(p):
            raise AxiomViolation("cMF7", k)


def make_mackey(p, n, levels, res, tr, gamma, validate: bool = True) -> MackeyFunctor:
    X = MackeyFunctor(p, n, levels, res, tr, gamma)
    if validate:
        mackey_validate(X)
    return X


# ---------------------------------------------------------------- from lattices

def h0(M: GLattice) -> MackeyFunctor:
    """Fixed-point functor: X_k = M^{U_k} in saturated bases."""
    p, n, A = M.p, M.n, M.action
    embs, levels, snfs = [], [], []
    for k in range(n + 1):
        F, e = fixed_points(M, k)
        levels.append(F)
        embs.append(e.matrix)
        snfs.append(dvr.smith_normal_form(e.matrix, p))

    def restrict(k, T):
        Y = dvr.solve(embs[k], T, p, snfs[k])
        if Y is None:
            raise InternalInconsistency("fixed points are not stable")
        return ModuleMap(free_module(p, T.shape[1]), levels[k], Y)

    res, tr, gamma = [], [], []
    for k in range(n):
        res.append(ModuleMap(levels[k], levels[k + 1], restrict(k + 1, embs[k]).matrix))
        N = zeros(M.rank, M.rank)
        h = dvr.mat_pow(A, p ** k)
        term = dvr.identity(M.rank)
        for _ in range(p):
            N = N + term
            term = matmul(term, h)
        tr.append(ModuleMap(levels[k + 1], levels[k], restrict(k, matmul(N, embs[k + 1])).matrix))
    for k in range(n + 1):
        gamma.append(ModuleMap(levels[k], levels[k], restrict(k, matmul(A, embs[k])).matrix))
    return MackeyFunctor(p, n, levels, res, tr, gamma)


def h_0(M: GLattice) -> MackeyFunctor:
    """Coinvariant functor: X_k = M / (g^(p^k) - 1) M."""
    p, n, A = M.p, M.n, M.action
    qs = []
    for k in range(n + 1):
        h = dvr.mat_pow(A, p ** k)
        qs.append(quotient(M.module, h - dvr.identity(M.rank)))
    A_inv = dvr.mat_pow(A, p ** n - 1) if M.rank else A

    def induced(src, tgt, T):
        return hom_make(qs[src].module, qs[tgt].module,
                        matmul(matmul(qs[tgt].projection.matrix, T), qs[src].section))

    res, tr, gamma = [], [], []
    for k in range(n):
        tr.append(induced(k + 1, k, dvr.identity(M.rank)))
        h_inv = dvr.mat_pow(A_inv, p ** k)
        N = zeros(M.rank, M.rank)
        term = dvr.identity(M.rank)
        for _ in range(p):
            N = N + term
            term = matmul(term, h_inv)
        res.append(induced(k, k + 1, N))
    for k in range(n + 1):
        gamma.append(induced(k, k, A))
    return MackeyFunctor(p, n, [q.module for q in qs], res, tr, gamma)


# ---------------------------------------------------------------- permutation functors

def _summands(mult):
    return [(k, c) for k, f in enumerate(mult) for c in range(f)]


@lru_cache(maxsize=None)
def _perm_layout(p: int, n: int, mult: tuple):
    """Point and orbit indexing for R[⊔ f_k G/U_k]."""
    points = []  # (summand index, k, a)
    for s, (k, _) in enumerate(_summands(mult)):
        for a in range(p ** k):
            points.append((s, k, a))
    offsets = []  # offsets[j][s] = first orbit index of summand s at level j
    sizes = []
    for j in range(n + 1):
        off, o = [], 0
        for (k, _) in _summands(mult):
            off.append(o)
            o += p ** min(j, k)
        offsets.append(off)
        sizes.append(o)
    return points, offsets, sizes


def _orbit_index(p, offsets, j, s, k, a):
    return offsets[j][s] + a % (p ** min(j, k))


def orbit_basis(p: int, n: int, mult, j: int) -> np.ndarray:
    """Columns: indicator vectors of U_j-orbits on the permutation basis."""
    mult = tuple(mult)
    points, offsets, sizes = _perm_layout(p, n, mult)
    E = zeros(len(points), sizes[j])
    for idx, (s, k, a) in enumerate(points):
        E[idx, _orbit_index(p, offsets, j, s, k, a)] = mpq(1)
    return E


def perm_functor(p: int, n: int, mult) -> MackeyFunctor:
    """h0 of R[⊔ f_k G/U_k] written in orbit-sum bases."""
    mult = tuple(mult)
    if len(mult) != n + 1:
        raise ValueError("multiplicity vector must have n+1 entries")
    points, offsets, sizes = _perm_layout(p, n, mult)
    levels = [free_module(p, sizes[j]) for j in range(n + 1)]
    res, tr, gamma = [], [], []
    for j in range(n):
        R_ = zeros(sizes[j + 1], sizes[j])
        T_ = zeros(sizes[j], sizes[j + 1])
        for (s, k, a) in points:
            lo = _orbit_index(p, offsets, j, s, k, a)
            hi = _orbit_index(p, offsets, j + 1, s, k, a)
            R_[hi, lo] = mpq(1)
            T_[lo, hi] = mpq(p if j >= k else 1)
        res.append(ModuleMap(levels[j], levels[j + 1], R_))
        tr.append(ModuleMap(levels[j + 1], levels[j], T_))
    for j in range(n + 1):
        G_ = zeros(sizes[j], sizes[j])
        for (s, k, a) in points:
            src = _orbit_index(p, offsets, j, s, k, a)
            dst = _orbit_index(p, offsets, j, s, k, (a + 1) % p ** k)
            G_[dst, src] = mpq(1)
        gamma.append(ModuleMap(levels[j], levels[j], G_))
    return MackeyFunctor(p, n, levels, res, tr, gamma)


def yoneda_columns(X: MackeyFunctor, k: int, x: np.ndarray) -> list:
    """Components of the map P(k) -> X sending the level-k generator to x.

    Returns, per level j, the matrix whose columns are the images of the
    orbit basis of P(k)_j.
    """
    p = X.p
    cols = []
    for j in range(X.n + 1):
        if j >= k:
            base = X.res_composite(k, j).apply(x)
        else:
            base = X.tr_composite(k, j).apply(x)
        g = X.gamma[j]
        vecs = []
        v = base
        for _ in range(p ** min(j, k)):
            vecs.append(v)
            v = g.apply(v)
        cols.append(dvr.hstack(vecs, X.levels[j].ngens) if vecs else zeros(X.levels[j].ngens, 0))
    return cols


def perm_map_to(X: MackeyFunctor, mult, elements) -> NatTransform:
    """Map perm_functor(mult) -> X determined by one element per summand.

    ``elements`` lists, in summand order, coordinate columns in X_k.
    """
    P = perm_functor(X.p, X.n, mult)
    blocks = [[] for _ in range(X.n + 1)]
    for (k, _), x in zip(_summands(mult), elements):
        for j, c in enumerate(yoneda_columns(X, k, x)):
            blocks[j].append(c)
    comps = []
    for j in range(X.n + 1):
        m = dvr.hstack(blocks[j], X.levels[j].ngens) if blocks[j] else zeros(X.levels[j].ngens, 0)
        comps.append(hom_make(P.levels[j], X.levels[j], m))
    return NatTransform(P, X, comps)


def perm_map(p: int, n: int, src_mult, tgt_mult, bottom: np.ndarray) -> NatTransform:
    """h0 of a G-equivariant matrix R[Ω_src] -> R[Ω_tgt], in orbit bases."""
    P, Q = perm_functor(p, n, src_mult), perm_functor(p, n, tgt_mult)
    comps = []
    for j in range(n + 1):
        Es, Et = orbit_basis(p, n, src_mult, j), orbit_basis(p, n, tgt_mult, j)
        Y = dvr.solve(Et, matmul(bottom, Es), p)
        if Y is None:
            raise ValueError("matrix is not equivariant")
        comps.append(ModuleMap(P.levels[j], Q.levels[j], Y))
    return NatTransform(P, Q, comps)


# ---------------------------------------------------------------- standard functors

def _constant(p, n, res_c, tr_c) -> MackeyFunctor:
    R = free_module(p, 1)
    return MackeyFunctor(p, n, [R] * (n + 1),
                         [identity_map(R).scale(res_c)] * n,
                         [identity_map(R).scale(tr_c)] * n,
                         [identity_map(R)] * (n + 1))


def functor_T(p: int, n: int) -> MackeyFunctor:
    return _constant(p, n, 1, p)


def functor_Upsilon(p: int, n: int) -> MackeyFunctor:
    return _constant(p, n, p, 1)


def standard_functor(kind: str, p: int, n: int, k: int | None = None) -> MackeyFunctor:
    if kind == "T":
        return functor_T(p, n)
    if kind in ("Upsilon", "UPSILON", "U"):
        return functor_Upsilon(p, n)
    if kind == "B":
        return _functor_B(p, n)[0]
    if k is None or not 0 <= k <= n:
        raise BadIndex(f"index {k} outside 0..{n}")
    ind = [0] * (n + 1)
    ind[k] = 1
    if kind == "P":
        return perm_functor(p, n, ind)
    if kind == "J":
        return dual_star(perm_functor(p, n, ind))
    if kind == "S":
        F = FGModule(p, 0, (1,))
        Z = FGModule(p)
        levels = [F if i == k else Z for i in range(n + 1)]
        return MackeyFunctor(p, n, levels,
                             [zero_map(levels[i], levels[i + 1]) for i in range(n)],
                             [zero_map(levels[i + 1], levels[i]) for i in range(n)],
                             [identity_map(M) for M in levels])
    raise ValueError(f"unknown standard functor {kind!r}")


def _functor_B(p: int, n: int):
    """B = coker(Upsilon -> T), the map being p^(n-k) at level k; with projection."""
    T = functor_T(p, n)
    j = NatTransform(functor_Upsilon(p, n), T,
                     [identity_map(T.levels[i]).scale(p ** (n - i)) for i in range(n + 1)])
    return nat_cokernel(j)


def direct_sum_functor(*Xs: MackeyFunctor):
    """Direct sum with its injections and projections (as NatTransforms)."""
    p, n = Xs[0].p, Xs[0].n
    sums = [direct_sum([X.levels[k] for X in Xs], p) for k in range(n + 1)]

    def diag(maps_per_summand, src, tgt):
        total = zeros(sums[tgt].module.ngens, sums[src].module.ngens)
        for a, f in enumerate(maps_per_summand):
            total = total + matmul(matmul(sums[tgt].injections[a].matrix, f.matrix),
                                   sums[src].projections[a].matrix)
        return hom_make(sums[src].module, sums[tgt].module, total)

    res = [diag([X.res[k] for X in Xs], k, k + 1) for k in range(n)]
    tr = [diag([X.tr[k] for X in Xs], k + 1, k) for k in range(n)]
    gamma = [diag([X.gamma[k] for X in Xs], k, k) for k in range(n + 1)]
    S = MackeyFunctor(p, n, [s.module for s in sums], res, tr, gamma)
    injs = [NatTransform(X, S, [sums[k].injections[a] for k in range(n + 1)]) for a, X in enumerate(Xs)]
    projs = [NatTransform(S, X, [sums[k].projections[a] for k in range(n + 1)]) for a, X in enumerate(Xs)]
    return S, injs, projs


# ---------------------------------------------------------------- kernels and cokernels

def nat_kernel(phi: NatTransform):
    X = phi.source
    ks = [kernel(c) for c in phi.components]
    embs = [e for _, e in ks]
    res = [factor_through(embs[k + 1], X.res[k] @ embs[k]) for k in range(X.n)]
    tr = [factor_through(embs[k], X.tr[k] @ embs[k + 1]) for k in range(X.n)]
    gamma = [factor_through(embs[k], X.gamma[k] @ embs[k]) for k in range(X.n + 1)]
    K = MackeyFunctor(X.p, X.n, [K_ for K_, _ in ks], res, tr, gamma)
    return K, NatTransform(K, X, embs)


def nat_cokernel(phi: NatTransform):
    Y = phi.target
    qs = [cokernel(c) for c in phi.components]

    def induced(f, src, tgt):
        return hom_make(qs[src].module, qs[tgt].module,
                        matmul(matmul(qs[tgt].projection.matrix, f.matrix), qs[src].section))

    res = [induced(Y.res[k], k, k + 1) for k in range(Y.n)]
    tr = [induced(Y.tr[k], k + 1, k) for k in range(Y.n)]
    gamma = [induced(Y.gamma[k], k, k) for k in range(Y.n + 1)]
    Q = MackeyFunctor(Y.p, Y.n, [q.module for q in qs], res, tr, gamma)
    return Q, NatTransform(Y, Q, [q.projection for q in qs])


# ---------------------------------------------------------------- section cohomology

@dataclass(frozen=True)
class SectionCohomology:
    k0: FGModule
    k1: FGModule
    c0: FGModule
    c1: FGModule


class _Section:
    """All groups and maps of the six-term sequence for a section j < k."""

    def __init__(self, X: MackeyFunctor, j: int, k: int):
        if not 0 <= j < k <= X.n:
            raise BadIndices(f"need 0 <= j < k <= {X.n}, got ({j}, {k})")
        p = X.p
        self.I = X.res_composite(j, k)
        self.Tc = X.tr_composite(k, j)
        h = X.gamma[k].power(p ** j)
        self.hm1 = h - identity_map(X.levels[k])
        self.norm = _sum_of_powers(X.gamma[k], p ** j, p ** (k - j))
        self.K0, self.e0 = kernel(self.I)
        self.Fix, self.eF = kernel(self.hm1)
        self.I_fix = factor_through(self.eF, self.I)
        self.q_k1 = cokernel(self.I_fix)
        self.q_c0 = cokernel(self.Tc)
        self.K1, self.e1 = kernel(self.Tc)
        self.q_c1 = cokernel(factor_through(self.e1, self.hm1))

    def groups(self) -> SectionCohomology:
        return SectionCohomology(self.K0, self.q_k1.module, self.q_c0.module, self.q_c1.module)

    def six_term(self):
        """The maps c1 -> H^-1 -> k0 -> c0 -> H^0 -> k1, in order."""
        K2, e2 = kernel(self.norm)
        q_hm = cokernel(factor_through(e2, self.hm1))
        q_h0 = cokernel(factor_through(self.eF, self.norm))
        incl = factor_through(e2, self.e1)
        a = factor_through_quotient(self.q_c1.projection, q_hm.projection @ incl, self.q_c1.section)
        t = factor_through(self.e0, self.Tc @ e2)
        b = factor_through_quotient(q_hm.projection, t, q_hm.section)
        c = self.q_c0.projection @ self.e0
        d = factor_through_quotient(self.q_c0.projection, q_h0.projection @ self.I_fix, self.q_c0.section)
        e = factor_through_quotient(q_h0.projection, self.q_k1.projection, q_h0.section)
        return a, b, c, d, e


def section_cohomology(X: MackeyFunctor, j: int, k: int) -> SectionCohomology:
    return _Section(X, j, k).groups()


SIX_TERM_POSITIONS = ("c1", "H^-1", "k0", "c0", "H^0", "k1")


def six_term_check(X: MackeyFunctor, j: int, k: int) -> None:
    a, b, c, d, e = _Section(X, j, k).six_term()
    if not is_injective(a):
        raise NotExact("c1")
    for pos, (f, g) in zip(SIX_TERM_POSITIONS[1:5], [(a, b), (b, c), (c, d), (d, e)]):
        if not is_exact(f, g):
            raise NotExact(pos)
    if not is_surjective(e):
        raise NotExact("k1")


# ---------------------------------------------------------------- predicates

def _tate_minus1_endo(g: ModuleMap, step: int, count: int) -> FGModule:
    """ker(norm)/(h - 1) for h = g^step of order dividing count."""
    h = g.power(step)
    norm = _sum_of_powers(g, step, count)
    K, e = kernel(norm)
    return cokernel(factor_through(e, h - identity_map(g.domain))).module


def bottom_h1(X: MackeyFunctor, k: int) -> FGModule:
    """First cohomology of U_k acting on the bottom value through gamma_n."""
    return _tate_minus1_endo(X.gamma[X.n], X.p ** k, X.p ** (X.n - k))


@dataclass(frozen=True)
class Predicates:
    i_injective: bool
    type_H0: bool
    hilbert90: bool
    t_surjective: bool
    type_H_0: bool
    co_hilbert90: bool


def predicates(X: MackeyFunctor) -> Predicates:
    secs = [section_cohomology(X, j, k) for k in range(X.n + 1) for j in range(k)]
    i_inj = all(s.k0.is_zero for s in secs)
    h0type = i_inj and all(s.k1.is_zero for s in secs)
    t_surj = all(s.c0.is_zero for s in secs)
    h_0type = t_surj and all(s.c1.is_zero for s in secs)
    bottom = None
    if h0type or h_0type:
        bottom = all(bottom_h1(X, k).is_zero for k in range(X.n))
    return Predicates(i_inj, h0type, bool(h0type and bottom), t_surj, h_0type, bool(h_0type and bottom))


def is_i_injective(X: MackeyFunctor) -> bool:
    return all(kernel(X.res[k])[0].is_zero for k in range(X.n))


def is_type_H0(X: MackeyFunctor) -> bool:
    if not is_i_injective(X):
        return False
    return all(section_cohomology(X, j, k).k1.is_zero for k in range(X.n + 1) for j in range(k))


def is_hilbert90(X: MackeyFunctor) -> bool:
    return is_type_H0(X) and all(bottom_h1(X, k).is_zero for k in range(X.n))


# ---------------------------------------------------------------- duality

def _require_lattice(X: MackeyFunctor):
    if not X.is_lattice:
        raise HasTorsion("operation needs torsion-free values")


def _transpose(f: ModuleMap, dom: FGModule, cod: FGModule) -> ModuleMap:
    return ModuleMap(dom, cod, f.matrix.T.copy())


def dual_star(X: MackeyFunctor) -> MackeyFunctor:
    _require_lattice(X)
    L = X.levels
    res = [_transpose(X.tr[k], L[k], L[k + 1]) for k in range(X.n)]
    tr = [_transpose(X.res[k], L[k + 1], L[k]) for k in range(X.n)]
    gamma = [_transpose(X.gamma[k].power(X.p ** k - 1), L[k], L[k]) for k in range(X.n + 1)]
    return MackeyFunctor(X.p, X.n, L, res, tr, gamma)


def dual_nat(phi: NatTransform) -> NatTransform:
    """Transpose of a map of lattice functors: dual(target) -> dual(source)."""
    return NatTransform(dual_star(phi.target), dual_star(phi.source),
                        [ModuleMap(c.codomain, c.domain, c.matrix.T.copy()) for c in phi.components])


def dual_yoneda(X: MackeyFunctor) -> MackeyFunctor:
    _require_lattice(X)
    g = X.gamma[X.n].power(X.p ** X.n - 1)
    M = GLattice(X.p, X.n, X.levels[X.n].ngens, g.matrix.T.copy())
    return h0(M)


def reduce_mod_p_functor(X: MackeyFunctor) -> MackeyFunctor:
    """X/pX for a lattice functor, with values of exponent p."""
    _require_lattice(X)
    L = [FGModule(X.p, 0, (1,) * M.ngens) for M in X.levels]

    def red(f, a, b):
        return hom_make(L[a], L[b], f.matrix)

    return MackeyFunctor(X.p, X.n, L,
                         [red(X.res[k], k, k + 1) for k in range(X.n)],
                         [red(X.tr[k], k + 1, k) for k in range(X.n)],
                         [red(X.gamma[k], k, k) for k in range(X.n + 1)])


# ---------------------------------------------------------------- heads

def _radical_span(X: MackeyFunctor, k: int) -> np.ndarray:
    """Columns spanning the image of the radical in X_k / p X_k."""
    M = X.levels[k]
    parts = [(X.gamma[k] - identity_map(M)).matrix]
    if k < X.n:
        parts.append(X.tr[k].matrix)
    if k > 0:
        parts.append(X.res[k - 1].matrix)
    return dvr.reduce_mod_p(dvr.hstack(parts, M.ngens), X.p)


def head_with_lifts(X: MackeyFunctor):
    """Head multiplicities and, per level, generator indices lifting a head basis."""
    f, lifts = [], []
    for k in range(X.n + 1):
        dim = X.levels[k].ngens
        span = _radical_span(X, k)
        r = dvr.rank_mod_p(span, X.p)
        f.append(dim - r)
        chosen = dvr.complement_columns_mod_p(span, dim, X.p) if dim - r else []
        if len(chosen) != dim - r:
            raise InternalInconsistency("head basis selection failed")
        lifts.append(chosen)
    return f, lifts


def head(X: MackeyFunctor) -> list[int]:
    return head_with_lifts(X)[0]


# ---------------------------------------------------------------- Ext groups

def homology(f: ModuleMap, g: ModuleMap) -> FGModule:
    """ker g / im f for composable f, g with g∘f = 0."""
    K, e = kernel(g)
    return cokernel(factor_through(e, f)).module


def ext_J(X: MackeyFunctor, k: int, d: int) -> FGModule:
    """Ext^d(J(k), X) from the complex X_n -> X_n -> X_k."""
    if not 0 <= k <= X.n:
        raise BadIndex(f"index {k} outside 0..{X.n}")
    if d < 0:
        raise ValueError("negative degree")
    if d >= 3:
        return FGModule(X.p)
    Xn = X.levels[X.n]
    first = X.gamma[X.n].power(X.p ** k) - identity_map(Xn)
    second = X.tr_composite(X.n, k)
    if d == 0:
        return kernel(first)[0]
    if d == 1:
        return homology(first, second)
    return cokernel(second).module


def _bottom_matrix_norm(p, n):
    N = p ** n
    m = zeros(N, 1)
    for i in range(N):
        m[i, 0] = mpq(1)
    return m


@lru_cache(maxsize=None)
def b_resolution(p: int, n: int):
    """0 -> P(0) -> P(n) -> P(n) -> P(0) -> B -> 0, built from h0 of
    R --norm--> R[G] --(g-1)--> R[G] --augmentation--> R.

    Returns (terms, differentials, augmentation) with terms[i] = (mult, functor)
    and differentials[i-1]: terms[i] -> terms[i-1].
    """
    T = [1] + [0] * n
    Q = [0] * n + [1]
    N = p ** n
    norm = _bottom_matrix_norm(p, n)
    g = zeros(N, N)
    for a in range(N):
        g[(a + 1) % N, a] = mpq(1)
    d2 = perm_map(p, n, Q, Q, g - dvr.identity(N))
    d3 = perm_map(p, n, T, Q, norm)
    d1 = perm_map(p, n, Q, T, norm.T.copy())
    B, proj = _functor_B(p, n)
    P0 = perm_functor(p, n, T)
    aug = NatTransform(P0, B, proj.components)
    terms = [(tuple(T), P0), (tuple(Q), perm_functor(p, n, Q)), (tuple(Q), perm_functor(p, n, Q)),
             (tuple(T), P0)]
    return terms, (d1, d2, d3), aug


def hom_from_perm(mult, X: MackeyFunctor):
    """nat(perm_functor(mult), X) as the direct sum of X_k over summands."""
    return direct_sum([X.levels[k] for k, _ in _summands(mult)], X.p)


def yoneda_pullback(alpha: NatTransform, src_mult, tgt_mult, X: MackeyFunctor) -> ModuleMap:
    """Induced map nat(perm(tgt), X) -> nat(perm(src), X) for alpha: perm(src) -> perm(tgt)."""
    H_t = hom_from_perm(tgt_mult, X)
    H_s = hom_from_perm(src_mult, X)
    p, n = X.p, X.n
    src_sum = _summands(src_mult)
    _, offsets, _ = _perm_layout(p, n, tuple(src_mult))
    cols = []
    for g in range(H_t.module.ngens):
        vec = zeros(H_t.module.ngens, 1)
        vec[g, 0] = mpq(1)
        elements = [H_t.projections[s].apply(vec) for s in range(len(H_t.projections))]
        phi = perm_map_to(X, tgt_mult, elements)
        pieces = []
        for s, (k, _) in enumerate(src_sum):
            col = offsets[k][s]
            image = matmul(phi.components[k].matrix, alpha.components[k].matrix[:, col:col + 1])
            pieces.append(matmul(H_s.injections[s].matrix, X.levels[k].reduce(image)))
        total = zeros(H_s.module.ngens, 1)
        for piece in pieces:
            total = total + piece
        cols.append(total)
    mat = dvr.hstack(cols, H_s.module.ngens) if cols else zeros(H_s.module.ngens, 0)
    return hom_make(H_t.module, H_s.module, mat)


def ext_B_from_resolution(X: MackeyFunctor, d: int) -> FGModule:
    terms, diffs, _ = b_resolution(X.p, X.n)
    deltas = [yoneda_pullback(diffs[i], terms[i + 1][0], terms[i][0], X) for i in range(3)]
    if d == 0:
        return kernel(deltas[0])[0]
    if d == 3:
        return cokernel(deltas[2]).module
    return homology(deltas[d - 1], deltas[d])


def ext_B(X: MackeyFunctor, d: int) -> FGModule:
    if d not in (0, 1, 2, 3):
        raise ValueError("degree must be in 0..3")
    s = section_cohomology(X, 0, X.n) if X.n > 0 else None
    if s is None:
        direct = FGModule(X.p)
    else:
        direct = (s.k0, s.k1, s.c1, s.c0)[d]
    other = ext_B_from_resolution(X, d) if X.n > 0 else FGModule(X.p)
    if direct != other:
        raise OracleMismatch(f"degree {d}: section formula {direct.describe()} "
                             f"but resolution gives {other.describe()}")
    return direct


# ---------------------------------------------------------------- morphism criteria

def split_injectivity_check(phi: NatTransform) -> bool:
    X, Y = phi.source, phi.target
    _require_lattice(X)
    _require_lattice(Y)
    red0 = mod_p_reduce(phi.components[0])
    if dvr.rank_mod_p(red0, X.p) != X.levels[0].ngens:
        return False
    if not is_type_H0(reduce_mod_p_functor(X)):
        return False
    if not is_i_injective(reduce_mod_p_functor(Y)):
        return False
    for c in phi.components:
        if not is_injective(c) or not cokernel(c).module.is_torsion_free:
            raise InternalInconsistency("split-injectivity criterion passed but a component is not split")
    return True


def surjectivity_check(phi: NatTransform) -> bool:
    Y = phi.target
    verdict = True
    for k in range(Y.n + 1):
        dim = Y.levels[k].ngens
        span = dvr.hstack([dvr.reduce_mod_p(phi.components[k].matrix, Y.p).astype(object),
                           _radical_span(Y, k).astype(object)], dim)
        if dvr.rank_mod_p(span, Y.p) != dim:
            verdict = False
            break
    levelwise = all(is_surjective(c) for c in phi.components)
    if verdict != levelwise:
        raise InternalInconsistency("head criterion and levelwise surjectivity disagree")
    return verdict


def projective_cover(X: MackeyFunctor):
    f, lifts = head_with_lifts(X)
    elements = []
    for k, idxs in enumerate(lifts):
        for i in idxs:
            v = zeros(X.levels[k].ngens, 1)
            v[i, 0] = mpq(1)
            elements.append(v)
    eps = perm_map_to(X, f, elements)
    return eps.source, eps, f


def is_projective_functor(X: MackeyFunctor):
    if not X.is_lattice:
        return None
    f = head(X)
    for j in range(X.n + 1):
        if X.levels[j].free_rank != sum(fk * X.p ** min(j, k) for k, fk in enumerate(f)):
            return None
    _, eps, _ = projective_cover(X)
    if not split_injectivity_check(eps) or not surjectivity_check(eps):
        return None
    return f


# ---------------------------------------------------------------- resolutions

@dataclass(frozen=True, eq=False)
class MackeyResolution:
    """P_length -> ... -> P_0 -> X -> 0 with P_i = perm_functor(mults[i])."""

    target: MackeyFunctor
    mults: tuple
    terms: tuple
    differentials: tuple   # differentials[i]: P_{i+1} -> P_i
    augmentation: NatTransform

    @property
    def length(self) -> int:
        return len(self.terms) - 1


def mackey_resolution(X: MackeyFunctor, max_length: int = 3) -> MackeyResolution:
    P0, eps, f0 = projective_cover(X)
    mults, terms, diffs = [tuple(f0)], [P0], []
    K, kappa = nat_kernel(eps)
    step = 1
    while True:
        if all(M.is_zero for M in K.levels):
            break
        fK = is_projective_functor(K)
        if fK is not None:
            P, cov, _ = projective_cover(K)
            mults.append(tuple(fK))
            terms.append(P)
            diffs.append(kappa @ cov)
            break
        if step >= max_length:
            raise DepthExceeded(f"kernel at step {step} is not projective")
        P, cov, fP = projective_cover(K)
        mults.append(tuple(fP))
        terms.append(P)
        diffs.append(kappa @ cov)
        K, kappa = nat_kernel(cov)
        step += 1
    return MackeyResolution(X, tuple(mults), tuple(terms), tuple(diffs), eps)


def resolution_is_exact(res: MackeyResolution) -> bool:
    """Exactness of 0 -> P_len -> ... -> P_0 -> X -> 0 at every level."""
    X = res.target
    for k in range(X.n + 1):
        maps = [d.components[k] for d in res.differentials]
        aug = res.augmentation.components[k]
        if not is_surjective(aug):
            return False
        chain = [aug] + maps
        for i in range(len(chain) - 1):
            if not is_exact(chain[i + 1], chain[i]):
                return False
        if maps and not is_injective(maps[-1]):
            return False
        if not maps and not is_injective(aug):
            return False
    return True
