"""Acceptance suite: one test per criterion, one verdict line per criterion.

All arithmetic is exact.  Each test records a line in the terminal summary
(and prints it, visible with ``pytest -s``) before asserting.
"""
import itertools
from functools import lru_cache

import pytest

from conftest import ACCEPTANCE_LINES
from cycmackey.generate import (InstanceSpec, make_instance, random_gentle, random_kernel_lattice,
                                random_lattice, random_mult, rng_for)
from cycmackey.gentle import (deflate, deflate_nat, diagram_of, functor_of, gentle_is_projective,
                              gentle_P, gentle_resolution, gentle_validate, inflate, max_min,
                              rank1_resolution)
from cycmackey.lattice import (augmentation_lattice, dual_lattice, elequi_triple, is_permutation,
                               orbit_size, perm_multiplicities, tate, weiss_check)
from cycmackey.mackey import (NatTransform, direct_sum_functor, dual_star, dual_yoneda, ext_B, h0,
                              h_0, is_hilbert90, mackey_resolution, mackey_validate, nat_kernel,
                              perm_map_to, predicates, projective_cover, resolution_is_exact,
                              six_term_check, standard_functor)
from cycmackey.modules import FGModule, is_exact, is_injective, is_surjective
from cycmackey.presenter import gldim_witness, present_lattice, verify_presentation
from cycmackey import dvr

GRID = [(p, n) for p in (2, 3) for n in (1, 2, 3)]
SMALL_GRID = [(2, 1), (2, 2), (3, 1), (3, 2)]


def report(num: int, ok: bool, detail: str, verdict: str | None = None) -> None:
    line = f"criterion {num:2d}: {verdict or ('PASS' if ok else 'FAIL')}  {detail}"
    ACCEPTANCE_LINES[num] = line
    print(line)


@lru_cache(maxsize=None)
def criterion1_instances():
    """40 conjugated permutation lattices per (p, n), rank <= 24, with their construction vectors."""
    out = []
    for p, n in GRID:
        for i in range(40):
            seed = 10_000 * p + 1_000 * n + i
            mult = random_mult(rng_for(seed), p, n, 24)
            M = make_instance(InstanceSpec(seed, p, n, "permutation+conjugate", tuple(mult)))
            out.append((mult, M))
    return out


def _sections(n):
    return [(j, k) for k in range(n + 1) for j in range(k)]


# ---------------------------------------------------------------- 1

def test_criterion_1_permutation_round_trip():
    items = criterion1_instances()
    good = sum(1 for mult, M in items
               if M.rank <= 24 and is_permutation(M).verdict and perm_multiplicities(M) == mult)
    report(1, good == len(items), f"{good}/{len(items)} conjugated permutation lattices recovered "
                                  f"(p in 2,3; n in 1,2,3; rank <= 24)")
    assert good == len(items) >= 200


# ---------------------------------------------------------------- 2

def test_criterion_2_augmentation_and_elequi():
    omega_ok = []
    for p in (2, 3, 5):
        w = augmentation_lattice(p, 1)
        omega_ok.append(not is_permutation(w).verdict and tate(w, 0, 1) == FGModule(p, 0, (1,)))
    total = agree = 0
    for p, n in SMALL_GRID:
        rng = rng_for(200 + 10 * p + n)
        for _ in range(100):
            M = random_lattice(rng, p, n, 8)
            for k in range(n + 1):
                a, b, c = elequi_triple(M, k)
                total += 1
                agree += a == b == c
    ok = all(omega_ok) and agree == total
    report(2, ok, f"omega p=2,3,5 non-permutation with H^1 = R/p: {sum(omega_ok)}/3; "
                  f"elequi agreement {agree}/{total} (100 lattices x all k per (p,n))")
    assert ok


# ---------------------------------------------------------------- 3

def test_criterion_3_presentations():
    lattices = [M for _, M in criterion1_instances()]
    for p, n in SMALL_GRID:
        rng = rng_for(300 + 10 * p + n)
        for i in range(26):
            lattices.append(random_kernel_lattice(rng, p, n, 10) if i % 2 else random_lattice(rng, p, n, 10))
    good = 0
    for M in lattices:
        pres = present_lattice(M)
        balance = orbit_size(pres.omega0, M.p) - orbit_size(pres.omega1, M.p) == M.rank
        good += bool(balance and pres.verified and verify_presentation(M, pres))
    w = present_lattice(augmentation_lattice(3, 1))
    omega_ok = w.omega0 == (0, 1) and w.omega1 == (1, 0)
    ok = good == len(lattices) and omega_ok
    report(3, ok, f"{good}/{len(lattices)} presentations exact with rank balance; "
                  f"omega (p=3): Omega0={list(w.omega0)} Omega1={list(w.omega1)}")
    assert ok and len(lattices) >= 100


# ---------------------------------------------------------------- 4

def test_criterion_4_six_term_exactness():
    functors = checks = 0
    failures = []
    for p, n in GRID:
        rng = rng_for(400 + 10 * p + n)
        for _ in range(10):
            M = random_lattice(rng, p, n, 8)
            for X in (h0(M), h_0(M)):
                mackey_validate(X)
                functors += 1
                for j, k in _sections(n):
                    checks += 1
                    try:
                        six_term_check(X, j, k)
                    except Exception as exc:  # recorded, then asserted below
                        failures.append((p, n, j, k, repr(exc)))
    ok = not failures and functors >= 100
    report(4, ok, f"{checks - len(failures)}/{checks} sections exact at all six positions "
                  f"over {functors} h0/h_0 functors")
    assert ok, failures[:5]


# ---------------------------------------------------------------- 5

def test_criterion_5_tate_duality():
    pairs = agree = 0
    for p, n in GRID:
        rng = rng_for(500 + 10 * p + n)
        for _ in range(8):
            M = random_lattice(rng, p, n, 8)
            D = dual_lattice(M)
            for k in range(n + 1):
                pairs += 1
                agree += tate(D, k, 1) == tate(M, k, -1)
    ok = agree == pairs >= 100
    report(5, ok, f"{agree}/{pairs} (M, k) pairs with H^1(U_k, M*) = H^-1(U_k, M)")
    assert ok


# ---------------------------------------------------------------- 6

def test_criterion_6_gentle_resolutions():
    diagrams = bad = 0
    for n in range(0, 9):
        for bits in itertools.product("<>", repeat=n):
            d = "".join(bits)
            diagrams += 1
            F = functor_of(2, d)
            mx, mn = max_min(d)
            res = rank1_resolution(F)
            if not (res.is_exact() and sorted(res.tops0) == mx and sorted(res.tops1) == mn
                    and len(mx) == len(mn) + 1 and diagram_of(F) == d):
                bad += 1
    example = max_min("<>><>>><") == ([1, 4, 8], [3, 7])
    rnd = rnd_ok = 0
    for i in range(60):
        rng = rng_for(600 + i)
        p = (2, 3)[i % 2]
        F = random_gentle(rng, p, 1 + i % 6, max_rank=4)
        gentle_validate(F)
        res = gentle_resolution(F)
        rnd += 1
        rnd_ok += bool(res.is_exact() and gentle_is_projective(res.Q1) is not None
                       and gentle_is_projective(res.Q0) is not None)
    ok = bad == 0 and example and rnd_ok == rnd
    report(6, ok, f"{diagrams - bad}/{diagrams} diagrams (n <= 8) exact with Q0/Q1 = max/min; "
                  f"example max/min ok={example}; {rnd_ok}/{rnd} random functors with projective kernel")
    assert ok


# ---------------------------------------------------------------- 7

def test_criterion_7_gldim_witnesses():
    labels = []
    for p, n in SMALL_GRID:
        w = gldim_witness(p, n)
        B = standard_functor("B", p, n)
        res = mackey_resolution(B)
        assert res.length == 3 and resolution_is_exact(res)
        assert ext_B(standard_functor("T", p, n), 3) == FGModule(p, 0, (n,))
        # ext_B raises if the resolution complex and the section formula disagree
        for X in (standard_functor("T", p, n), standard_functor("Upsilon", p, n), B,
                  standard_functor("P", p, n, n), standard_functor("J", p, n, 0)):
            for d in range(4):
                ext_B(X, d)
        labels.append(f"({p},{n})->{w.ext3_label}")
    h0_ok = total = 0
    for i in range(60):
        p, n = SMALL_GRID[i % 4]
        M = random_lattice(rng_for(700 + i), p, n, 8)
        r = mackey_resolution(h0(M))
        total += 1
        h0_ok += bool(r.length <= 1 and resolution_is_exact(r))
        for d in range(4):
            ext_B(h0(M), d)
    ok = h0_ok == total
    report(7, ok, f"B resolutions of length 3 with Ext3(B,T): {', '.join(labels)}; "
                  f"{h0_ok}/{total} h0 functors resolve in length <= 1")
    assert ok


# ---------------------------------------------------------------- 8

def _extended_cover(X, k, x):
    """P ⊕ P(k) -> X: the projective cover plus one extra summand sent to x."""
    P, eps, f = projective_cover(X)
    ind = [int(i == k) for i in range(X.n + 1)]
    psi = perm_map_to(X, ind, [x])
    S, _, projs = direct_sum_functor(P, psi.source)
    return eps @ projs[0] + psi @ projs[1]


def test_criterion_8_deflation():
    proj_ok = all(deflate(standard_functor("P", 2 + (n % 2), n, k)) == gentle_P(2 + (n % 2), n, k)
                  for n in range(0, 4) for k in range(n + 1))
    inv = inv_ok = 0
    for i in range(60):
        F = random_gentle(rng_for(800 + i), (2, 3)[i % 2], 1 + i % 4)
        X = inflate(F)
        mackey_validate(X)
        inv += 1
        inv_ok += deflate(X) == F
    ses = ses_ok = 0
    for i in range(50):
        p, n = SMALL_GRID[i % 4]
        rng = rng_for(880 + i)
        M = make_instance(InstanceSpec(880 + i, p, n, "permutation+conjugate", None, 12))
        X = h0(M)
        k = int(rng.integers(0, n + 1))
        x = dvr.as_matrix(rng.integers(-3, 4, size=(X.levels[k].ngens, 1)).tolist(),
                          (X.levels[k].ngens, 1))
        phi = _extended_cover(X, k, x)
        K, kappa = nat_kernel(phi)
        assert is_hilbert90(X) and is_hilbert90(phi.source) and is_hilbert90(K)
        a, b = deflate_nat(kappa), deflate_nat(phi)
        ses += 1
        ses_ok += all(is_injective(a.components[v]) and is_exact(a.components[v], b.components[v])
                      and is_surjective(b.components[v]) for v in range(n + 1))
    ok = proj_ok and inv_ok == inv and ses_ok == ses
    report(8, ok, f"deflate(P(k)) = gentle P(k) for n <= 3: {proj_ok}; deflate(inflate F) = F "
                  f"{inv_ok}/{inv}; deflated Hilbert 90 sequences exact {ses_ok}/{ses}")
    assert ok


# ---------------------------------------------------------------- 9

@lru_cache(maxsize=None)
def criterion9_table():
    """(label, type_H0(X), i, ii, iii, iv) over random lattice Mackey functors."""
    rows = []
    for i in range(45):
        p, n = GRID[i % len(GRID)]
        M = random_lattice(rng_for(900 + i), p, n, 8)
        cands = [("h0", h0(M)), ("h_0", h_0(M))]
        cands.append(("dual h0", dual_star(h0(M))))
        for label, X in cands:
            if X.is_lattice:
                rows.append((label,) + _ladder(X))
    for p, n in SMALL_GRID:
        for kind in ("T", "Upsilon"):
            rows.append((kind,) + _ladder(standard_functor(kind, p, n)))
        for k in range(n + 1):
            rows.append((f"J({k})",) + _ladder(standard_functor("J", p, n, k)))
    return rows


def _ladder(X):
    Xs = dual_star(X)
    px, ps = predicates(X), predicates(Xs)
    return (px.type_H0, px.hilbert90, ps.type_H_0, ps.co_hilbert90, is_hilbert90(dual_yoneda(X)))


def test_criterion_9_duality_ladder_proven_part():
    """(i)<=>(ii)<=>(iii) everywhere; (i)=>(iv) everywhere; (i)<=>(iv) on type H0 functors."""
    rows = criterion9_table()
    first = sum(1 for r in rows if r[2] == r[3] == r[4])
    forward = sum(1 for r in rows if not r[2] or r[5])
    typed = [r for r in rows if r[1]]
    typed_ok = sum(1 for r in typed if r[2] == r[5])
    literal = sum(1 for r in rows if r[2] == r[3] == r[4] == r[5])
    exceptions = sorted({r[0] for r in rows if r[2] != r[5]})
    ok_part = first == forward == len(rows) and typed_ok == len(typed)
    verdict = "PASS" if literal == len(rows) else "FAIL (literal) / PASS (type H0 part)"
    report(9, literal == len(rows),
           f"{len(rows)} functors: i<=>ii<=>iii {first}/{len(rows)}; i=>iv {forward}/{len(rows)}; "
           f"i<=>iv on type H0 {typed_ok}/{len(typed)}; literal four-way {literal}/{len(rows)}, "
           f"exceptions among {exceptions}", verdict)
    assert len(rows) >= 100 and ok_part


@pytest.mark.xfail(strict=True, reason="hilbert90(X) and hilbert90 of the Yoneda dual differ on "
                                       "functors not of type H0; Upsilon is the smallest case")
def test_criterion_9_literal_four_way_equivalence():
    rows = criterion9_table()
    assert all(r[2] == r[3] == r[4] == r[5] for r in rows)


def test_criterion_9_upsilon_counterexample():
    U = standard_functor("Upsilon", 2, 1)
    assert not is_hilbert90(U)
    assert dual_yoneda(U) == standard_functor("T", 2, 1)
    assert is_hilbert90(dual_yoneda(U))


# ---------------------------------------------------------------- 10

def test_criterion_10_weiss():
    instances = checks = both = agree = 0
    for i in range(216):
        p, n = GRID[i % len(GRID)]
        seed = 1_000 + i
        if i % 2:
            M = make_instance(InstanceSpec(seed, p, n, "permutation+conjugate", None, 12))
        else:
            M = random_lattice(rng_for(seed), p, n, 8)
        instances += 1
        actual = is_permutation(M).verdict
        for m in range(n + 1):
            v = weiss_check(M, m)
            checks += 1
            if v.restriction_is_permutation and v.fixed_points_are_permutation:
                both += 1
                agree += v.conclusion is True and actual
    ok = agree == both and instances >= 200
    report(10, ok, f"{instances} instances, {checks} (M, m) checks; both hypotheses held {both} "
                   f"times and the conclusion agreed {agree}/{both}")
    assert ok
