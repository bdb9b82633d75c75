"""Finitely generated Z_(p)-modules in canonical form and maps between them."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from gmpy2 import mpq

from . import dvr
from .dvr import INF, matmul, smith_normal_form, zeros
from .errors import CodomainHasTorsion, IllDefined, NotInImage, NotInjective


@dataclass(frozen=True)
class FGModule:
    """R^free_rank plus cyclic summands R/p^e, e listed non-increasingly.

    Generators are ordered free first, then torsion in the listed order.
    """

    p: int
    free_rank: int = 0
    torsion: tuple = ()

    def __post_init__(self):
        t = tuple(int(e) for e in self.torsion)
        object.__setattr__(self, "torsion", t)
        if self.free_rank < 0:
            raise ValueError("negative free rank")
        if any(e < 1 for e in t):
            raise ValueError("torsion exponents must be >= 1")
        if any(t[i] < t[i + 1] for i in range(len(t) - 1)):
            raise ValueError("torsion exponents must be non-increasing")

    @property
    def ngens(self) -> int:
        return self.free_rank + len(self.torsion)

    @property
    def orders(self) -> tuple:
        """Per generator: None for free, e for a generator of order p^e."""
        return (None,) * self.free_rank + self.torsion

    @property
    def is_zero(self) -> bool:
        return self.ngens == 0

    @property
    def is_torsion_free(self) -> bool:
        return not self.torsion

    @property
    def is_finite(self) -> bool:
        return self.free_rank == 0

    @property
    def dim_mod_p(self) -> int:
        return self.ngens

    def relations(self) -> np.ndarray:
        """Generator-by-torsion matrix whose columns span the relations."""
        rel = zeros(self.ngens, len(self.torsion))
        for j, e in enumerate(self.torsion):
            rel[self.free_rank + j, j] = mpq(self.p) ** e
        return rel

    def reduce(self, vecs: np.ndarray) -> np.ndarray:
        """Normalize coordinates: torsion rows reduced into [0, p^e)."""
        out = vecs.copy()
        for j, e in enumerate(self.torsion):
            q = self.p ** e
            r = self.free_rank + j
            for c in range(out.shape[1]):
                v = out[r, c]
                if v != 0:
                    out[r, c] = mpq(dvr.residue(v, q))
        return out

    def describe(self) -> str:
        parts = []
        if self.free_rank:
            parts.append("R" if self.free_rank == 1 else f"R^{self.free_rank}")
        for e in self.torsion:
            parts.append(f"R/p^{e}" if e > 1 else "R/p")
        return " + ".join(parts) if parts else "0"

    def to_json(self) -> dict:
        return {"free": self.free_rank, "torsion": list(self.torsion)}


def free_module(p: int, r: int) -> FGModule:
    return FGModule(p, r, ())


def zero_module(p: int) -> FGModule:
    return FGModule(p, 0, ())


@dataclass(frozen=True, eq=False)
class ModuleMap:
    domain: FGModule
    codomain: FGModule
    matrix: np.ndarray = field(repr=False)

    def __post_init__(self):
        if self.domain.p != self.codomain.p:
            raise ValueError("modules over different primes")
        shape = (self.codomain.ngens, self.domain.ngens)
        if self.matrix.shape != shape:
            raise ValueError(f"matrix shape {self.matrix.shape} != {shape}")
        self.matrix.flags.writeable = False

    @property
    def p(self) -> int:
        return self.domain.p

    def __eq__(self, other):
        if not isinstance(other, ModuleMap):
            return NotImplemented
        return (self.domain == other.domain and self.codomain == other.codomain
                and dvr.equal(self.matrix, other.matrix))

    __hash__ = None

    def __matmul__(self, other: "ModuleMap") -> "ModuleMap":
        """Composition ``self ∘ other``."""
        if other.codomain != self.domain:
            raise ValueError("composition of incompatible maps")
        return _normalized(other.domain, self.codomain, matmul(self.matrix, other.matrix))

    def __add__(self, other: "ModuleMap") -> "ModuleMap":
        self._same_shape(other)
        return _normalized(self.domain, self.codomain, self.matrix + other.matrix)

    def __sub__(self, other: "ModuleMap") -> "ModuleMap":
        self._same_shape(other)
        return _normalized(self.domain, self.codomain, self.matrix - other.matrix)

    def __neg__(self) -> "ModuleMap":
        return _normalized(self.domain, self.codomain, -self.matrix)

    def scale(self, c) -> "ModuleMap":
        return _normalized(self.domain, self.codomain, self.matrix * mpq(c))

    def _same_shape(self, other):
        if self.domain != other.domain or self.codomain != other.codomain:
            raise ValueError("maps between different modules")

    def power(self, e: int) -> "ModuleMap":
        if self.domain != self.codomain:
            raise ValueError("power of a non-endomorphism")
        result = identity_map(self.domain)
        base = self
        while e:
            if e & 1:
                result = result @ base
            e >>= 1
            if e:
                base = base @ base
        return result

    def is_zero(self) -> bool:
        return dvr.is_zero(self.matrix)

    def apply(self, vecs: np.ndarray) -> np.ndarray:
        return self.codomain.reduce(matmul(self.matrix, vecs))


def _check_well_defined(dom: FGModule, cod: FGModule, mat: np.ndarray):
    p = dom.p
    for j, e in enumerate(dom.torsion):
        col = dom.free_rank + j
        for i in range(cod.free_rank):
            if mat[i, col] != 0:
                raise IllDefined(i, col)
        for jj, f in enumerate(cod.torsion):
            row = cod.free_rank + jj
            if f > e and dvr.valuation(mat[row, col], p) < f - e:
                raise IllDefined(row, col)


def _normalized(dom: FGModule, cod: FGModule, mat: np.ndarray) -> ModuleMap:
    return ModuleMap(dom, cod, cod.reduce(mat))


def hom_make(dom: FGModule, cod: FGModule, entries) -> ModuleMap:
    """Validated map from ``dom`` to ``cod`` given on generators."""
    mat = dvr.as_matrix(entries, (cod.ngens, dom.ngens))
    for (i, j), v in np.ndenumerate(mat):
        if v.denominator % dom.p == 0:
            raise ValueError(f"entry ({i}, {j}) is not p-integral")
    _check_well_defined(dom, cod, mat)
    return _normalized(dom, cod, mat)


def identity_map(M: FGModule) -> ModuleMap:
    return ModuleMap(M, M, dvr.identity(M.ngens))


def zero_map(M: FGModule, N: FGModule) -> ModuleMap:
    return ModuleMap(M, N, zeros(N.ngens, M.ngens))


def scalar_map(M: FGModule, c) -> ModuleMap:
    return _normalized(M, M, dvr.scalar_matrix(M.ngens, c))


# ---------------------------------------------------------------- quotients

def _quotient_of_free(p: int, k: int, C: np.ndarray):
    """Canonical form of R^k / span(columns of C).

    Returns (Q, gens, proj): ``gens`` (k x q) lifts the canonical generators,
    ``proj`` (q x k) maps coordinates of R^k to coordinates of Q.
    """
    snf = smith_normal_form(C, p)
    r = snf.rank
    free_idx = list(range(r, k))
    tors = [(i, snf.diag[i]) for i in range(r) if snf.diag[i] > 0]
    tors.reverse()
    order = free_idx + [i for i, _ in tors]
    Q = FGModule(p, len(free_idx), tuple(e for _, e in tors))
    gens = snf.left_inv[:, order] if order else zeros(k, 0)
    proj = snf.left[order, :] if order else zeros(0, k)
    proj = Q.reduce(proj)
    return Q, gens, proj


@dataclass(frozen=True, eq=False)
class Quotient:
    """N / S with the projection and a set-theoretic section on generators."""

    module: FGModule
    projection: ModuleMap
    section: np.ndarray


def quotient(N: FGModule, S: np.ndarray) -> Quotient:
    """Quotient of N by the submodule generated by the columns of S."""
    G = dvr.hstack([S, N.relations()], N.ngens)
    Q, gens, proj = _quotient_of_free(N.p, N.ngens, G)
    return Quotient(Q, ModuleMap(N, Q, proj), gens)


def cokernel(f: ModuleMap) -> Quotient:
    return quotient(f.codomain, f.matrix)


def _kernel_basis_free(f: ModuleMap) -> np.ndarray:
    """Basis (columns) of {x in R^m : F x in relations of the codomain}."""
    m = f.domain.ngens
    G = dvr.hstack([f.matrix, f.codomain.relations()], f.codomain.ngens)
    snf = smith_normal_form(G, f.p)
    r = snf.rank
    return snf.right[:m, r:]


def kernel(f: ModuleMap):
    """(K, embedding K -> domain) in canonical form."""
    M = f.domain
    B = _kernel_basis_free(f)
    C = dvr.solve(B, M.relations(), M.p)
    if C is None:
        raise IllDefined(-1, -1)
    K, gens, _ = _quotient_of_free(M.p, B.shape[1], C)
    return K, _normalized(K, M, matmul(B, gens))


@dataclass(frozen=True, eq=False)
class ImageCokernel:
    image: FGModule
    embedding: ModuleMap      # image -> codomain
    coimage: ModuleMap        # domain -> image
    cokernel: FGModule
    projection: ModuleMap     # codomain -> cokernel
    section: np.ndarray       # lifts of cokernel generators


def image_cokernel(f: ModuleMap) -> ImageCokernel:
    M = f.domain
    B = _kernel_basis_free(f)
    I, gens, proj = _quotient_of_free(M.p, M.ngens, B)
    emb = _normalized(I, f.codomain, matmul(f.matrix, gens))
    coim = ModuleMap(M, I, proj)
    q = cokernel(f)
    return ImageCokernel(I, emb, coim, q.module, q.projection, q.section)


def image(f: ModuleMap):
    ic = image_cokernel(f)
    return ic.image, ic.embedding


def submodule(N: FGModule, S: np.ndarray):
    """Submodule of N generated by the columns of S, with its embedding."""
    g = ModuleMap(free_module(N.p, S.shape[1]), N, N.reduce(S))
    return image(g)


def preimage(f: ModuleMap, Y: np.ndarray):
    """Coordinates X over R with f(X) = Y in the codomain, or None."""
    m = f.domain.ngens
    G = dvr.hstack([f.matrix, f.codomain.relations()], f.codomain.ngens)
    Z = dvr.solve(G, Y, f.p)
    if Z is None:
        return None
    return f.domain.reduce(Z[:m, :])


def factor_through(e: ModuleMap, f: ModuleMap) -> ModuleMap:
    """g with e ∘ g = f, where im f lies in im e (e usually injective)."""
    if e.codomain != f.codomain:
        raise ValueError("maps with different codomains")
    X = preimage(e, f.matrix)
    if X is None:
        raise NotInImage("map does not factor through the given map")
    g = hom_make(f.domain, e.domain, X)
    return g


def factor_through_quotient(q: ModuleMap, f: ModuleMap, section: np.ndarray) -> ModuleMap:
    """g with g ∘ q = f, for q a surjection with known section on generators.

    Requires f to kill ker q; the result is validated.
    """
    g = hom_make(q.codomain, f.codomain, f.codomain.reduce(matmul(f.matrix, section)))
    if not (g @ q) == f:
        raise NotInImage("map does not factor through the quotient")
    return g


def is_injective(f: ModuleMap) -> bool:
    return kernel(f)[0].is_zero


def is_surjective(f: ModuleMap) -> bool:
    return cokernel(f).module.is_zero


def is_iso(f: ModuleMap) -> bool:
    return is_injective(f) and is_surjective(f)


def is_exact(f: ModuleMap, g: ModuleMap) -> bool:
    """Exactness of M --f--> N --g--> P at N."""
    if not (g @ f).is_zero():
        return False
    K, emb = kernel(g)
    h = factor_through(emb, f)
    return is_surjective(h)


def inverse_map(f: ModuleMap) -> ModuleMap:
    """Inverse of an isomorphism."""
    if not is_iso(f):
        raise ValueError("map is not an isomorphism")
    X = preimage(f, dvr.identity(f.codomain.ngens))
    return hom_make(f.codomain, f.domain, X)


# ---------------------------------------------------------------- saturation

def saturation(sub: ModuleMap) -> ModuleMap:
    """Embedding of the saturation of im(sub) in a torsion-free codomain."""
    M = sub.codomain
    if not M.is_torsion_free:
        raise CodomainHasTorsion("saturation needs a torsion-free ambient module")
    if not sub.domain.is_torsion_free:
        raise NotInjective("a module with torsion cannot embed in a lattice")
    snf = smith_normal_form(sub.matrix, M.p)
    r = snf.rank
    if r < sub.domain.ngens:
        raise NotInjective("the given map is not injective")
    return ModuleMap(free_module(M.p, r), M, snf.left_inv[:, :r].copy())


# ---------------------------------------------------------------- residue layer

def mod_p_reduce(f: ModuleMap) -> np.ndarray:
    """Induced F_p-linear map M/pM -> N/pN as an integer matrix."""
    return dvr.reduce_mod_p(f.matrix, f.p)


# ---------------------------------------------------------------- direct sums

@dataclass(frozen=True, eq=False)
class DirectSum:
    module: FGModule
    injections: tuple
    projections: tuple


def direct_sum(mods, p: int | None = None) -> DirectSum:
    mods = list(mods)
    if p is None:
        if not mods:
            raise ValueError("prime required for an empty direct sum")
        p = mods[0].p
    free = sum(M.free_rank for M in mods)
    tors = []
    for a, M in enumerate(mods):
        for j, e in enumerate(M.torsion):
            tors.append((e, a, j))
    tors.sort(key=lambda t: -t[0])  # stable: ties keep summand order
    S = FGModule(p, free, tuple(e for e, _, _ in tors))
    pos = {}
    f = 0
    for a, M in enumerate(mods):
        for i in range(M.free_rank):
            pos[(a, i)] = f
            f += 1
    for t, (_, a, j) in enumerate(tors):
        pos[(a, mods[a].free_rank + j)] = free + t
    injs, projs = [], []
    for a, M in enumerate(mods):
        inj = zeros(S.ngens, M.ngens)
        for i in range(M.ngens):
            inj[pos[(a, i)], i] = mpq(1)
        injs.append(ModuleMap(M, S, inj))
        projs.append(ModuleMap(S, M, inj.T.copy()))
    return DirectSum(S, tuple(injs), tuple(projs))


def block_map(ds_src: DirectSum | None, ds_tgt: DirectSum | None, blocks,
              src: FGModule | None = None, tgt: FGModule | None = None) -> ModuleMap:
    """Assemble a map between direct sums from a grid of component maps.

    ``blocks[i][j]`` maps summand j of the source to summand i of the target;
    None means zero.  Either sum may be replaced by a plain module.
    """
    S = ds_src.module if ds_src is not None else src
    T = ds_tgt.module if ds_tgt is not None else tgt
    total = zeros(T.ngens, S.ngens)
    for i, row in enumerate(blocks):
        for j, b in enumerate(row):
            if b is None:
                continue
            m = b.matrix
            if ds_tgt is not None:
                m = matmul(ds_tgt.injections[i].matrix, m)
            if ds_src is not None:
                m = matmul(m, ds_src.projections[j].matrix)
            total = total + m
    return hom_make(S, T, T.reduce(total))
