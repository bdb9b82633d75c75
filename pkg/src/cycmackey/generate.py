"""Seeded random instances: lattices and gentle functors."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from gmpy2 import mpq

from . import dvr
from .dvr import matmul
from .errors import BadSpec
from .gentle import (GentleFunctor, functor_of, gentle_direct_sum, gentle_quotient,
                     projective_map_to, subfunctor)
from .lattice import (GLattice, augmentation_lattice, conjugate, direct_sum_lattice,
                      equivariant_average, kernel_lattice, orbit_size, permutation_lattice,
                      regular_lattice, trivial_lattice)
from .modules import ModuleMap, image, saturation

KINDS = ("permutation+conjugate", "kernel-of-random-perm-map", "augmentation", "regular", "trivial")


@dataclass(frozen=True)
class InstanceSpec:
    seed: int
    p: int
    n: int
    kind: str
    mult: tuple | None = None
    rank: int | None = None


def rng_for(seed: int) -> np.random.Generator:
    return np.random.default_rng(seed & 0xFFFFFFFFFFFFFFFF)


def random_unimodular(rng, r: int, p: int, steps: int | None = None):
    """Product of elementary matrices with entries in [-p^2, p^2]; returns (T, T^-1)."""
    T, Ti = dvr.identity(r), dvr.identity(r)
    if r < 2:
        return T, Ti
    bound = p * p
    for _ in range(steps if steps is not None else 2 * r):
        i, j = (int(x) for x in rng.choice(r, size=2, replace=False))
        c = mpq(int(rng.integers(-bound, bound + 1)))
        if c == 0:
            continue
        T[i, :] = T[i, :] + c * T[j, :]      # T <- E T with E = I + c e_ij
        Ti[:, j] = Ti[:, j] - c * Ti[:, i]   # T^-1 <- T^-1 E^-1
    return T, Ti


def random_mult(rng, p: int, n: int, max_rank: int) -> list[int]:
    while True:
        f = [int(rng.integers(0, 3)) for _ in range(n + 1)]
        if 0 < orbit_size(f, p) <= max_rank:
            return f


def random_equivariant(rng, src: GLattice, tgt: GLattice) -> np.ndarray:
    X = dvr.as_matrix(rng.integers(-2, 3, size=(tgt.rank, src.rank)).tolist(), (tgt.rank, src.rank))
    return equivariant_average(src, tgt, X)


def make_instance(spec: InstanceSpec) -> GLattice:
    p, n = spec.p, spec.n
    if p < 2 or any(p % d == 0 for d in range(2, int(p ** 0.5) + 1)):
        raise BadSpec(f"p = {p} is not prime")
    if n < 0:
        raise BadSpec("n must be nonnegative")
    rng = rng_for(spec.seed)
    if spec.kind == "trivial":
        return trivial_lattice(p, n, spec.rank or 1)
    if spec.kind == "regular":
        return regular_lattice(p, n)
    if spec.kind == "augmentation":
        if n < 1:
            raise BadSpec("augmentation needs n >= 1")
        return augmentation_lattice(p, n)
    if spec.kind == "permutation+conjugate":
        mult = list(spec.mult) if spec.mult is not None else random_mult(rng, p, n, spec.rank or 24)
        if len(mult) != n + 1 or any(f < 0 for f in mult):
            raise BadSpec("multiplicities must have n+1 nonnegative entries")
        M = permutation_lattice(p, n, mult)
        T, Ti = random_unimodular(rng, M.rank, p)
        return conjugate(M, T, Ti)
    if spec.kind == "kernel-of-random-perm-map":
        return random_kernel_lattice(rng, p, n, spec.rank or 12)
    raise BadSpec(f"unknown kind {spec.kind!r}; expected one of {KINDS}")


def random_kernel_lattice(rng, p: int, n: int, max_rank: int = 12) -> GLattice:
    """Kernel of a random G-map between permutation lattices, conjugated."""
    while True:
        a = permutation_lattice(p, n, random_mult(rng, p, n, max_rank))
        b = permutation_lattice(p, n, random_mult(rng, p, n, max(1, a.rank - 1)))
        K = kernel_lattice(a, b, random_equivariant(rng, a, b))
        if K.rank:
            break
    T, Ti = random_unimodular(rng, K.rank, p)
    return conjugate(K, T, Ti)


def random_lattice(rng, p: int, n: int, max_rank: int = 12) -> GLattice:
    """A mix of permutation, kernel and augmentation-type lattices."""
    choice = int(rng.integers(0, 4))
    if choice == 1:
        return random_kernel_lattice(rng, p, n, max_rank)
    if choice == 0 or n == 0:
        M = permutation_lattice(p, n, random_mult(rng, p, n, max_rank))
    else:
        # augmentation ideal of a random quotient, plus a permutation summand for choice 3
        m = int(rng.integers(1, n + 1))
        while p ** m - 1 > max_rank:
            m -= 1
        M = _inflated_augmentation(p, n, m)
        room = max_rank - M.rank
        if choice == 3 and room >= 1:
            M = direct_sum_lattice(M, permutation_lattice(p, n, random_mult(rng, p, n, room)))
    T, Ti = random_unimodular(rng, M.rank, p)
    return conjugate(M, T, Ti)


def _inflated_augmentation(p: int, n: int, m: int) -> GLattice:
    """Augmentation ideal of R[G/U_m] as a G-lattice."""
    w = augmentation_lattice(p, m)
    return GLattice(p, n, w.rank, w.action)


# ---------------------------------------------------------------- gentle functors

def _conjugate_gentle(rng, F: GentleFunctor) -> GentleFunctor:
    p, n = F.p, F.n
    Ts = [random_unimodular(rng, V.ngens, p) for V in F.vertices]
    down = [ModuleMap(F.vertices[k + 1], F.vertices[k],
                      matmul(matmul(Ts[k][0], F.down[k].matrix), Ts[k + 1][1])) for k in range(n)]
    up = [ModuleMap(F.vertices[k], F.vertices[k + 1],
                    matmul(matmul(Ts[k + 1][0], F.up[k].matrix), Ts[k][1])) for k in range(n)]
    return GentleFunctor(p, n, F.vertices, down, up)


def random_diagram(rng, n: int) -> str:
    return "".join("<" if b else ">" for b in rng.integers(0, 2, size=n))


def random_gentle(rng, p: int, n: int, max_rank: int = 4) -> GentleFunctor:
    """Sum of random rank-one functors modulo a saturated random subfunctor, conjugated."""
    while True:
        r = int(rng.integers(1, max_rank + 1))
        m = int(rng.integers(0, 3))
        base = gentle_direct_sum(*[functor_of(p, random_diagram(rng, n)) for _ in range(r + m)])
        tops1 = [int(x) for x in rng.integers(0, n + 1, size=m)]
        elements = [dvr.as_matrix(rng.integers(-p, p + 1, size=(r + m, 1)).tolist(), (r + m, 1))
                    for _ in tops1]
        alpha = projective_map_to(base, tops1, elements)
        embs = [saturation(image(c)[1]) for c in alpha.components]
        S, incl = subfunctor(base, embs)
        F, _, _ = gentle_quotient(base, incl)
        rk = F.vertices[0].free_rank
        if 1 <= rk <= max_rank:
            return _conjugate_gentle(rng, F)
