"""Permutation presentations of lattices and the global-dimension witnesses."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import dvr
from .dvr import matmul
from .errors import CertificationFailed, NotHilbert90, WitnessFailed
from .gentle import deflate, gentle_is_projective
from .lattice import (GLattice, augmentation_lattice, direct_sum_lattice, fixed_points,
                      multiplicities_from_ranks, orbit_size, permutation_action,
                      permutation_lattice, regular_lattice, trivial_lattice)
from .mackey import (MackeyFunctor, NatTransform, ext_B, h0, h_0, is_hilbert90,
                     is_i_injective, mackey_resolution, nat_kernel, projective_cover,
                     resolution_is_exact, split_injectivity_check, standard_functor,
                     surjectivity_check)
from .modules import ModuleMap, free_module, is_exact, is_injective, is_iso, is_surjective
from .modules import cokernel as module_cokernel


def realize_permutation(X: MackeyFunctor):
    """Multiplicities f and a certified isomorphism perm_functor(f) -> X."""
    if not X.is_lattice or not is_hilbert90(X):
        raise NotHilbert90("functor is not a Hilbert 90 lattice functor")
    f = gentle_is_projective(deflate(X))
    if f is None:
        raise CertificationFailed("deflation of a Hilbert 90 functor is not projective")
    ranks = [V.free_rank for V in X.levels]
    if multiplicities_from_ranks(X.p, X.n, ranks) != list(f):
        raise CertificationFailed("head multiplicities disagree with the fixed-point rank system")
    _, phi, fX = projective_cover(X)
    if list(fX) != list(f):
        raise CertificationFailed("Mackey head disagrees with the deflated head")
    if not split_injectivity_check(phi) or not surjectivity_check(phi):
        raise CertificationFailed("lifted map fails the injectivity or surjectivity criterion")
    if not all(is_iso(c) for c in phi.components):
        raise CertificationFailed("lifted map is not an isomorphism")
    return list(f), phi


@dataclass(frozen=True, eq=False)
class PermPresentation:
    p: int
    n: int
    omega0: tuple
    omega1: tuple
    inject: np.ndarray    # R[Ω1] -> R[Ω0]
    project: np.ndarray   # R[Ω0] -> M
    verified: bool = False


def verify_presentation(M: GLattice, pres: PermPresentation) -> bool:
    """Exactness, equivariance, saturation and rank balance, all exact."""
    p = M.p
    r0, r1 = orbit_size(pres.omega0, p), orbit_size(pres.omega1, p)
    if r0 - r1 != M.rank:
        return False
    A0 = permutation_action(p, M.n, pres.omega0)
    A1 = permutation_action(p, M.n, pres.omega1)
    I, P = pres.inject, pres.project
    if I.shape != (r0, r1) or P.shape != (M.rank, r0):
        return False
    if not dvr.equal(matmul(A0, I), matmul(I, A1)):
        return False
    if not dvr.equal(matmul(M.action, P), matmul(P, A0)):
        return False
    inj = ModuleMap(free_module(p, r1), free_module(p, r0), I)
    proj = ModuleMap(free_module(p, r0), M.module, P)
    return (is_injective(inj) and module_cokernel(inj).module.is_torsion_free
            and is_surjective(proj) and is_exact(inj, proj))


def present_lattice(M: GLattice) -> PermPresentation:
    X = h0(M)
    _, eps, f0 = projective_cover(X)
    K, kappa = nat_kernel(eps)
    if not is_hilbert90(K):
        raise CertificationFailed("kernel of the projective cover is not Hilbert 90")
    f1, psi = realize_permutation(K)
    if gentle_is_projective(deflate(K)) != f1:
        raise CertificationFailed("deflated kernel multiplicities disagree")
    n = M.n
    # level n is the whole module; orbit bases there are the coset bases
    inject = (kappa @ psi).components[n].matrix
    E = fixed_points(M, n)[1].matrix
    project = matmul(E, eps.components[n].matrix)
    pres = PermPresentation(M.p, n, tuple(f0), tuple(f1), inject, project)
    if not verify_presentation(M, pres):
        raise CertificationFailed("presentation failed exact verification")
    return PermPresentation(M.p, n, tuple(f0), tuple(f1), inject, project, True)


# ---------------------------------------------------------------- global dimension

@dataclass(frozen=True)
class GldimWitness:
    p: int
    n: int
    b_resolution_length: int
    b_resolution_mults: tuple
    ext3_torsion: tuple
    i_injective_lengths: tuple   # (label, length)
    h0_lengths: tuple            # (label, length)

    @property
    def ext3_label(self) -> str:
        if not self.ext3_torsion:
            return "0"
        return " + ".join(f"Z/{self.p ** e}" for e in self.ext3_torsion)


def sample_lattices(p: int, n: int) -> list[tuple[str, GLattice]]:
    out = [("trivial", trivial_lattice(p, n)),
           ("regular", regular_lattice(p, n)),
           ("augmentation", _inflate_augmentation(p, n)),
           ("permutation", permutation_lattice(p, n, [1] * (n + 1)))]
    out.append(("augmentation+trivial", direct_sum_lattice(out[2][1], out[0][1])))
    return out


def _inflate_augmentation(p: int, n: int) -> GLattice:
    """Augmentation ideal of R[G/U_1] viewed as a lattice over G."""
    w = augmentation_lattice(p, 1)
    return GLattice(p, n, w.rank, w.action)


def gldim_witness(p: int, n: int) -> GldimWitness:
    if n < 1:
        raise WitnessFailed("need n >= 1")
    B = standard_functor("B", p, n)
    res = mackey_resolution(B)
    if res.length != 3 or not resolution_is_exact(res):
        raise WitnessFailed(f"resolution of B has length {res.length}")
    T = standard_functor("T", p, n)
    e3 = ext_B(T, 3)
    if e3.free_rank or e3.torsion != (n,):
        raise WitnessFailed(f"Ext^3(B, T) is {e3.describe()}")
    inj = []
    candidates = [(f"J({k})", standard_functor("J", p, n, k)) for k in range(n + 1)]
    candidates += [("T", T), ("Upsilon", standard_functor("Upsilon", p, n))]
    candidates += [(f"h_0({name})", h_0(M)) for name, M in sample_lattices(p, n)]
    for label, X in candidates:
        if X.is_lattice and is_i_injective(X):
            r = mackey_resolution(X)
            if r.length > 2 or not resolution_is_exact(r):
                raise WitnessFailed(f"{label}: resolution length {r.length}")
            inj.append((label, r.length))
    if not inj:
        raise WitnessFailed("no i-injective sample")
    h0s = []
    for label, M in sample_lattices(p, n):
        r = mackey_resolution(h0(M))
        if r.length > 1 or not resolution_is_exact(r):
            raise WitnessFailed(f"h0({label}): resolution length {r.length}")
        h0s.append((label, r.length))
    return GldimWitness(p, n, res.length, res.mults, e3.torsion, tuple(inj), tuple(h0s))
