import pytest
from gmpy2 import mpq
from hypothesis import given, settings
from hypothesis import strategies as st

from cycmackey import dvr
from cycmackey.errors import CodomainHasTorsion, IllDefined, NotInjective
from cycmackey.modules import (FGModule, ModuleMap, cokernel, direct_sum, free_module,
                               hom_make, identity_map, image, image_cokernel, is_exact,
                               is_injective, is_surjective, kernel, mod_p_reduce,
                               saturation, scalar_map, zero_map)
from oracles import brute_image_size, brute_kernel_size, rank_q


def R(p, r=1):
    return free_module(p, r)


def test_canonical_form_rejects_unsorted_torsion():
    with pytest.raises(ValueError):
        FGModule(2, 0, (1, 2))
    with pytest.raises(ValueError):
        FGModule(2, 0, (0,))


def test_hom_make_torsion_rules():
    p = 3
    Rp, Rp2 = FGModule(p, 0, (1,)), FGModule(p, 0, (2,))
    with pytest.raises(IllDefined):
        hom_make(Rp, R(p), [[1]])
    with pytest.raises(IllDefined):
        hom_make(Rp, Rp2, [[1]])
    f = hom_make(Rp, Rp2, [[p]])
    assert f.matrix[0, 0] == p


def test_hom_make_rejects_non_local_entries():
    with pytest.raises(ValueError):
        hom_make(R(2), R(2), [["1/2"]])


def test_kernel_examples():
    p = 2
    K, e = kernel(scalar_map(R(p, 2), p))
    assert K.is_zero
    K, e = kernel(hom_make(R(p), FGModule(p, 0, (1,)), [[1]]))
    assert K == R(p) and dvr.valuation(e.matrix[0, 0], p) == 1
    M = FGModule(p, 1, (2, 1))
    K, e = kernel(zero_map(M, R(p)))
    assert K == M and e == identity_map(M)


def test_cokernel_examples():
    p = 5
    assert cokernel(scalar_map(R(p), p)).module == FGModule(p, 0, (1,))
    f = hom_make(R(p, 2), R(p, 2), [[p, 0], [0, p * p]])
    assert cokernel(f).module == FGModule(p, 0, (2, 1))
    assert cokernel(identity_map(R(p, 3))).module.is_zero


def test_saturation_examples():
    p = 3
    s = saturation(hom_make(R(p), R(p), [[p]]))
    assert s.domain == R(p) and dvr.valuation(s.matrix[0, 0], p) == 0
    s = saturation(hom_make(R(p), R(p, 2), [[1], [p]]))
    assert cokernel(s).module.is_torsion_free
    s = saturation(hom_make(R(p), R(p, 2), [[p], [p * p]]))
    # the saturated line is spanned by (1, p)
    assert dvr.solve(s.matrix, dvr.as_matrix([[1], [p]]), p) is not None
    assert dvr.solve(dvr.as_matrix([[1], [p]]), s.matrix, p) is not None
    with pytest.raises(CodomainHasTorsion):
        saturation(hom_make(R(p), FGModule(p, 1, (1,)), [[1], [0]]))
    with pytest.raises(NotInjective):
        saturation(hom_make(R(p, 2), R(p), [[1, 1]]))


def test_saturation_idempotent():
    p = 2
    s = saturation(hom_make(R(p, 2), R(p, 3), [[2, 0], [4, 6], [0, 8]]))
    assert dvr.equal(saturation(s).matrix, s.matrix)


def test_mod_p_reduce_examples():
    p = 3
    assert (mod_p_reduce(scalar_map(R(p), p)) == 0).all()
    M = FGModule(p, 0, (2,))
    assert mod_p_reduce(identity_map(M)).tolist() == [[1]]
    assert dvr.rank_mod_p(mod_p_reduce(hom_make(R(p, 2), R(p, 2), [[1, 1], [1, 1 + p]])), p) == 1


def test_direct_sum_sorts_torsion():
    p = 2
    ds = direct_sum([FGModule(p, 1, (1,)), FGModule(p, 0, (3,))])
    assert ds.module == FGModule(p, 1, (3, 1))
    for i, pr in zip(ds.injections, ds.projections):
        assert pr @ i == identity_map(i.domain)


@st.composite
def finite_maps(draw):
    p = draw(st.sampled_from([2, 3]))
    dom = sorted(draw(st.lists(st.integers(1, 2), min_size=0, max_size=3)), reverse=True)
    cod = sorted(draw(st.lists(st.integers(1, 2), min_size=0, max_size=3)), reverse=True)
    rows = []
    for f in cod:
        row = []
        for e in dom:
            v = draw(st.integers(0, p ** f - 1))
            if f > e:
                v = (v * p ** (f - e)) % p ** f
            row.append(v)
        rows.append(row)
    return p, dom, cod, rows


@settings(max_examples=60, deadline=None)
@given(finite_maps())
def test_kernel_and_image_match_brute_force(data):
    p, dom, cod, rows = data
    D, C = FGModule(p, 0, tuple(dom)), FGModule(p, 0, tuple(cod))
    f = hom_make(D, C, dvr.as_matrix(rows, (len(cod), len(dom))))
    K, e = kernel(f)
    I, _ = image(f)
    dom_orders = [p ** x for x in dom]
    cod_orders = [p ** x for x in cod]
    assert p ** sum(K.torsion) == brute_kernel_size(rows, dom_orders, cod_orders)
    assert p ** sum(I.torsion) == brute_image_size(rows, dom_orders, cod_orders)
    assert (f @ e).is_zero()
    assert is_injective(e)
    q = cokernel(f)
    assert p ** sum(q.module.torsion) * p ** sum(I.torsion) == p ** sum(cod)
    assert is_exact(f, q.projection) and is_surjective(q.projection)


@settings(max_examples=50, deadline=None)
@given(st.sampled_from([2, 3, 5]), st.integers(0, 4), st.integers(0, 4), st.data())
def test_rank_nullity_on_free_modules(p, m, n, data):
    rows = [[data.draw(st.integers(-9, 9)) for _ in range(m)] for _ in range(n)]
    f = ModuleMap(R(p, m), R(p, n), dvr.as_matrix(rows, (n, m)))
    K, e = kernel(f)
    ic = image_cokernel(f)
    r = rank_q(rows) if n and m else 0
    assert K.free_rank == m - r
    assert ic.image.free_rank == r
    # coker(kernel embedding) is the coimage
    assert cokernel(e).module == ic.image
    assert ic.cokernel.free_rank == n - r


def test_mod_p_reduce_functorial():
    p = 3
    f = hom_make(R(p, 2), R(p, 2), [[1, 2], [3, 4]])
    g = hom_make(R(p, 2), R(p, 1), [[5, mpq(1, 2)]])
    lhs = mod_p_reduce(g @ f)
    rhs = (mod_p_reduce(g) @ mod_p_reduce(f)) % p
    assert lhs.tolist() == rhs.tolist()
