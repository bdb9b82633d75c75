import pytest

from cycmackey import dvr
from cycmackey.errors import NotPermutation, NotPPowerOrder
from cycmackey.generate import InstanceSpec, make_instance, random_lattice, random_unimodular, rng_for
from cycmackey.lattice import (augmentation_lattice, coinvariants, conjugate, direct_sum_lattice,
                               dual_lattice, elequi_triple, fixed_point_ranks, fixed_points,
                               is_permutation, make_lattice, perm_multiplicities,
                               permutation_lattice, regular_lattice, tate, trivial_lattice,
                               weiss_check)
from cycmackey.modules import FGModule
from oracles import orbit_count, permutation_of_orbits


def test_lattice_validate():
    make_lattice(3, 2, [[1, 0], [0, 1]])
    make_lattice(3, 1, [[0, 0, 1], [1, 0, 0], [0, 1, 0]])
    with pytest.raises(NotPPowerOrder):
        make_lattice(2, 1, [[2]])


def test_fixed_points_examples():
    for p in (2, 3):
        assert fixed_points(trivial_lattice(p, 2), 1)[0] == FGModule(p, 1)
        assert fixed_points(regular_lattice(p, 1), 0)[0] == FGModule(p, 1)
        assert fixed_points(augmentation_lattice(p, 1), 0)[0].is_zero


def test_coinvariants_examples():
    assert coinvariants(trivial_lattice(5, 1), 0)[0] == FGModule(5, 1)
    assert coinvariants(regular_lattice(3, 1), 0)[0] == FGModule(3, 1)
    assert coinvariants(augmentation_lattice(3, 1), 0)[0] == FGModule(3, 0, (1,))


def test_tate_examples():
    for p in (2, 3):
        assert tate(trivial_lattice(p, 2), 0, 0) == FGModule(p, 0, (2,))
        for d in (-1, 0, 1):
            assert tate(regular_lattice(p, 2), 0, d).is_zero
        assert tate(augmentation_lattice(p, 1), 0, -1) == FGModule(p, 0, (1,))


def test_tate_of_trivial_lattice_by_level():
    # the norm of U_k on R is multiplication by p^(n-k)
    p, n = 3, 3
    for k in range(n + 1):
        expected = FGModule(p, 0, (n - k,)) if n > k else FGModule(p, 0)
        assert tate(trivial_lattice(p, n), k, 0) == expected
        assert tate(trivial_lattice(p, n), k, 1).is_zero


def test_is_permutation_examples():
    p = 3
    assert is_permutation(permutation_lattice(p, 1, [1, 1])).verdict
    cert = is_permutation(augmentation_lattice(p, 1))
    assert not cert.verdict and cert.coinvariant_torsion[0] == (1,)
    M = permutation_lattice(p, 2, [0, 1, 0])
    T, Ti = random_unimodular(rng_for(5), M.rank, p)
    assert is_permutation(conjugate(M, T, Ti)).verdict


def test_perm_multiplicities_examples():
    assert perm_multiplicities(trivial_lattice(2, 1)) == [1, 0]
    M = permutation_lattice(2, 1, [1, 2])
    assert fixed_point_ranks(M) == [3, 5]
    assert perm_multiplicities(M) == [1, 2]
    W = regular_lattice(5, 1)
    T, Ti = random_unimodular(rng_for(2), W.rank, 5)
    assert perm_multiplicities(conjugate(W, T, Ti)) == [0, 1]
    with pytest.raises(NotPermutation):
        perm_multiplicities(augmentation_lattice(2, 1))


@pytest.mark.parametrize("p,n", [(2, 1), (2, 2), (2, 3), (3, 1), (3, 2)])
def test_fixed_point_ranks_match_orbit_count(p, n):
    rng = rng_for(100 * p + n)
    for _ in range(6):
        mult = [int(x) for x in rng.integers(0, 3, size=n + 1)]
        if not any(mult):
            continue
        perm = permutation_of_orbits(p, n, mult)
        expected = [orbit_count(perm, p ** j) for j in range(n + 1)]
        assert fixed_point_ranks(permutation_lattice(p, n, mult)) == expected


def test_conjugation_invariance():
    rng = rng_for(9)
    for p, n in [(2, 2), (3, 1)]:
        M = random_lattice(rng, p, n, 8)
        T, Ti = random_unimodular(rng, M.rank, p)
        N = conjugate(M, T, Ti)
        assert is_permutation(M) == is_permutation(N)
        for k in range(n + 1):
            for d in (-1, 0, 1):
                assert tate(M, k, d) == tate(N, k, d)


def test_tate_additivity():
    p, n = 2, 2
    A, B = augmentation_lattice(p, 2), trivial_lattice(p, 2)
    S = direct_sum_lattice(A, B)
    for k in range(n + 1):
        for d in (-1, 0, 1):
            a, b, s = tate(A, k, d), tate(B, k, d), tate(S, k, d)
            assert sorted(s.torsion) == sorted(a.torsion + b.torsion)


def test_weiss_examples():
    p = 2
    v = weiss_check(regular_lattice(p, 2), 1)
    assert v.restriction_is_permutation and v.fixed_points_are_permutation and v.conclusion
    v = weiss_check(augmentation_lattice(p, 1), 0)
    assert v.fixed_points_are_permutation and not v.restriction_is_permutation
    assert v.conclusion is None
    M = make_instance(InstanceSpec(3, 3, 2, "permutation+conjugate"))
    for m in range(3):
        assert weiss_check(M, m).conclusion is True


def test_elequi_examples():
    for p in (2, 3):
        assert elequi_triple(trivial_lattice(p, 1), 0) == (True, True, True)
        assert elequi_triple(augmentation_lattice(p, 1), 0) == (False, False, False)
        assert elequi_triple(regular_lattice(p, 1), 0) == (True, True, True)


def test_dual_lattice_is_contragredient():
    M = make_instance(InstanceSpec(1, 3, 1, "kernel-of-random-perm-map"))
    D = dual_lattice(M)
    assert dvr.equal(dvr.matmul(D.action.T, M.action), dvr.identity(M.rank))
    assert dual_lattice(D) == M
