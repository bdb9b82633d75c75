"""Lattices over the cyclic group of order p^n and their cohomology.

A lattice is stored as the matrix of a fixed generator g.  Subgroup level k
means U_k = <g^(p^k)>, the subgroup of index p^k.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from gmpy2 import mpq

from . import dvr
from .dvr import matmul, zeros
from .errors import (BadIndex, InternalInconsistency, NonIntegralSolution,
                     NotPermutation, NotPPowerOrder)
from .modules import (FGModule, ModuleMap, free_module, image_cokernel, kernel,
                      quotient)


@dataclass(frozen=True, eq=False)
class GLattice:
    p: int
    n: int
    rank: int
    action: np.ndarray = field(repr=False)

    def __post_init__(self):
        if self.action.shape != (self.rank, self.rank):
            raise ValueError("action matrix has the wrong shape")
        self.action.flags.writeable = False

    def __eq__(self, other):
        return (isinstance(other, GLattice) and (self.p, self.n, self.rank) == (other.p, other.n, other.rank)
                and dvr.equal(self.action, other.action))

    __hash__ = None

    @property
    def module(self) -> FGModule:
        return free_module(self.p, self.rank)

    def power(self, e: int) -> np.ndarray:
        return dvr.mat_pow(self.action, e % self.p ** self.n)

    def generator_of(self, k: int) -> np.ndarray:
        """Matrix of g^(p^k), the generator of U_k."""
        _check_level(self, k)
        return dvr.mat_pow(self.action, self.p ** k)

    def norm(self, k: int) -> np.ndarray:
        """Sum of h^j over U_k = <h>."""
        h = self.generator_of(k)
        total = zeros(self.rank, self.rank)
        term = dvr.identity(self.rank)
        for _ in range(self.p ** (self.n - k)):
            total = total + term
            term = matmul(term, h)
        return total


def _check_level(M, k: int):
    if not 0 <= k <= M.n:
        raise BadIndex(f"subgroup level {k} outside 0..{M.n}")


def make_lattice(p: int, n: int, action) -> GLattice:
    A = dvr.as_matrix(action) if not isinstance(action, np.ndarray) else dvr.as_matrix(action)
    if A.shape[0] != A.shape[1]:
        raise ValueError("action must be square")
    if not dvr.is_local_matrix(A, p):
        raise ValueError("action entries must be p-integral")
    M = GLattice(p, n, A.shape[0], A)
    lattice_validate(M)
    return M


def lattice_validate(M: GLattice) -> None:
    A = dvr.mat_pow(M.action, M.p ** M.n)
    if not dvr.equal(A, dvr.identity(M.rank)):
        raise NotPPowerOrder(f"action does not have order dividing {M.p}^{M.n}")


# ---------------------------------------------------------------- constructors

def trivial_lattice(p: int, n: int, rank: int = 1) -> GLattice:
    return GLattice(p, n, rank, dvr.identity(rank))


def permutation_action(p: int, n: int, mult) -> np.ndarray:
    """Generator matrix on R[⊔ f_k G/U_k] in the standard coset basis."""
    mult = list(mult)
    if len(mult) != n + 1 or any(f < 0 for f in mult):
        raise ValueError("multiplicity vector must have n+1 nonnegative entries")
    blocks = []
    for k, f in enumerate(mult):
        size = p ** k
        cyc = zeros(size, size)
        for a in range(size):
            cyc[(a + 1) % size, a] = mpq(1)
        blocks.extend([cyc] * f)
    return dvr.block_diag(blocks) if blocks else zeros(0, 0)


def permutation_lattice(p: int, n: int, mult) -> GLattice:
    A = permutation_action(p, n, mult)
    return GLattice(p, n, A.shape[0], A)


def regular_lattice(p: int, n: int) -> GLattice:
    return permutation_lattice(p, n, [0] * n + [1])


def orbit_size(mult, p: int) -> int:
    return sum(f * p ** k for k, f in enumerate(mult))


def sublattice(M: GLattice, basis: np.ndarray) -> GLattice:
    """Restriction of the action to the G-stable span of ``basis``."""
    X = dvr.solve(basis, matmul(M.action, basis), M.p)
    if X is None:
        raise ValueError("span is not stable under the action")
    return GLattice(M.p, M.n, basis.shape[1], X)


def augmentation_lattice(p: int, n: int = 1) -> GLattice:
    """The augmentation ideal of R[G] (kernel of the sum-of-coordinates map)."""
    N = p ** n
    basis = zeros(N, N - 1)
    for i in range(N - 1):
        basis[i, i] = mpq(1)
        basis[i + 1, i] = mpq(-1)
    return sublattice(regular_lattice(p, n), basis)


def conjugate(M: GLattice, T: np.ndarray, T_inv: np.ndarray | None = None) -> GLattice:
    if T_inv is None:
        T_inv = dvr.inverse(T, M.p)
        if T_inv is None:
            raise ValueError("change of basis is not invertible over R")
    return GLattice(M.p, M.n, M.rank, matmul(matmul(T, M.action), T_inv))


def dual_lattice(M: GLattice) -> GLattice:
    """Contragredient: transpose of the inverse action."""
    inv = dvr.mat_pow(M.action, M.p ** M.n - 1) if M.rank else M.action.copy()
    return GLattice(M.p, M.n, M.rank, inv.T.copy())


def direct_sum_lattice(*lats: GLattice) -> GLattice:
    p, n = lats[0].p, lats[0].n
    A = dvr.block_diag([L.action for L in lats])
    return GLattice(p, n, A.shape[0], A)


def restrict_to_subgroup(M: GLattice, m: int) -> GLattice:
    """M viewed as a lattice over U_m, generated by g^(p^m)."""
    _check_level(M, m)
    return GLattice(M.p, M.n - m, M.rank, M.generator_of(m))


def equivariant_average(src: GLattice, tgt: GLattice, X: np.ndarray) -> np.ndarray:
    """Sum over the group of g X g^-1: a G-map src -> tgt."""
    order = src.p ** src.n
    A_inv = dvr.mat_pow(src.action, order - 1) if src.rank else src.action
    total = zeros(tgt.rank, src.rank)
    term = X
    for _ in range(order):
        total = total + term
        term = matmul(matmul(tgt.action, term), A_inv)
    return total


def kernel_lattice(src: GLattice, tgt: GLattice, phi: np.ndarray) -> GLattice:
    """Kernel of a G-map between lattices, with the restricted action."""
    K, emb = kernel(ModuleMap(src.module, tgt.module, phi))
    return sublattice(src, emb.matrix)


# ---------------------------------------------------------------- cohomology

def _endo(M: GLattice, A: np.ndarray) -> ModuleMap:
    return ModuleMap(M.module, M.module, A)


def fixed_points(M: GLattice, k: int):
    """(M^{U_k}, embedding); the kernel of h - 1 is saturated."""
    h = M.generator_of(k)
    return kernel(_endo(M, h - dvr.identity(M.rank)))


def coinvariants(M: GLattice, k: int):
    """(M / (h - 1)M, projection)."""
    h = M.generator_of(k)
    q = quotient(M.module, h - dvr.identity(M.rank))
    return q.module, q.projection


def _subquotient(p: int, big: np.ndarray, small: np.ndarray) -> FGModule:
    """span(big) / span(small) where span(small) ⊆ span(big) and big is a basis."""
    C = dvr.solve(big, small, p)
    if C is None:
        raise InternalInconsistency("expected containment of spans")
    return quotient(free_module(p, big.shape[1]), C).module


def tate(M: GLattice, k: int, degree: int) -> FGModule:
    """Tate cohomology of U_k with coefficients in M, degrees -1, 0, 1."""
    _check_level(M, k)
    if degree not in (-1, 0, 1):
        raise ValueError("degree must be -1, 0 or 1")
    N = M.norm(k)
    if degree == 0:
        _, emb = fixed_points(M, k)
        return _subquotient(M.p, emb.matrix, N)
    _, emb = kernel(_endo(M, N))
    h = M.generator_of(k)
    return _subquotient(M.p, emb.matrix, h - dvr.identity(M.rank))


@dataclass(frozen=True)
class PermutationCertificate:
    verdict: bool
    coinvariant_torsion: tuple   # per level k
    h1: tuple                    # torsion exponents of H^1(U_k, M) per level


def is_permutation(M: GLattice) -> PermutationCertificate:
    tors, h1s = [], []
    for k in range(M.n + 1):
        C, _ = coinvariants(M, k)
        H = tate(M, k, 1)
        if C.torsion != H.torsion:
            raise InternalInconsistency(
                f"level {k}: coinvariant torsion {C.torsion} but H^1 {H.torsion}")
        tors.append(C.torsion)
        h1s.append(H.torsion)
    verdict = all(not t for t in tors)
    return PermutationCertificate(verdict, tuple(tors), tuple(h1s))


def fixed_point_ranks(M: GLattice) -> list[int]:
    return [fixed_points(M, j)[0].free_rank for j in range(M.n + 1)]


def multiplicities_from_ranks(p: int, n: int, ranks) -> list[int]:
    """Solve rank_j = sum_k f_k p^min(j,k) for nonnegative integers f."""
    s = [ranks[0]]
    for j in range(1, n + 1):
        diff = ranks[j] - ranks[j - 1]
        step = p ** j - p ** (j - 1)
        if diff % step:
            raise NonIntegralSolution(f"fixed-point ranks {list(ranks)} not realizable")
        s.append(diff // step)
    f = [s[j] - (s[j + 1] if j < n else 0) for j in range(n + 1)]
    if any(x < 0 for x in f):
        raise NonIntegralSolution(f"fixed-point ranks {list(ranks)} give negative multiplicities")
    return f


def perm_multiplicities(M: GLattice) -> list[int]:
    if not is_permutation(M).verdict:
        raise NotPermutation("lattice is not a permutation lattice")
    f = multiplicities_from_ranks(M.p, M.n, fixed_point_ranks(M))
    if orbit_size(f, M.p) != M.rank:
        raise NonIntegralSolution("multiplicities do not account for the rank")
    return f


def fixed_point_lattice(M: GLattice, m: int) -> GLattice:
    """M^{U_m} as a lattice over G/U_m (cyclic of order p^m)."""
    _, emb = fixed_points(M, m)
    E = emb.matrix
    X = dvr.solve(E, matmul(M.action, E), M.p)
    return GLattice(M.p, m, E.shape[1], X)


@dataclass(frozen=True)
class WeissVerdict:
    m: int
    restriction_is_permutation: bool
    fixed_points_are_permutation: bool
    conclusion: bool | None    # True when both hypotheses hold, else None
    is_permutation: bool


def weiss_check(M: GLattice, m: int) -> WeissVerdict:
    _check_level(M, m)
    res = is_permutation(restrict_to_subgroup(M, m)).verdict
    fix = is_permutation(fixed_point_lattice(M, m)).verdict
    actual = is_permutation(M).verdict
    conclusion = True if (res and fix) else None
    if conclusion and not actual:
        raise InternalInconsistency("both hypotheses hold but the lattice is not a permutation lattice")
    return WeissVerdict(m, res, fix, conclusion, actual)


def elequi_triple(M: GLattice, k: int) -> tuple[bool, bool, bool]:
    _check_level(M, k)
    a = tate(dual_lattice(M), k, 1).is_zero
    b = tate(M, k, -1).is_zero
    c = coinvariants(M, k)[0].is_torsion_free
    return a, b, c
