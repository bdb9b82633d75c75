"""Exact arithmetic in the local ring Z_(p) and dense matrices over it.

Scalars are ``gmpy2.mpq`` values whose denominators are prime to ``p``.
Matrices are numpy arrays of dtype ``object`` holding such scalars; every
routine accepts empty shapes.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import gmpy2
import numpy as np
from gmpy2 import mpq

INF = math.inf
ZERO = mpq(0)
ONE = mpq(1)


# ---------------------------------------------------------------- scalars

def scalar(x) -> mpq:
    if isinstance(x, str):
        return parse_scalar(x)
    return mpq(x)


def parse_scalar(s: str) -> mpq:
    s = s.strip()
    if not s:
        raise ValueError("empty scalar string")
    try:
        return mpq(s)
    except (ValueError, ZeroDivisionError) as exc:
        raise ValueError(f"bad scalar {s!r}") from exc


def format_scalar(x) -> str:
    return str(mpq(x))


def is_local(x, p: int) -> bool:
    """True when ``x`` lies in Z_(p)."""
    return mpq(x).denominator % p != 0


def valuation(x, p: int):
    """p-adic valuation; ``INF`` for zero."""
    if x == 0:
        return INF
    num = x.numerator
    if num % p:
        return 0
    return int(gmpy2.remove(gmpy2.mpz(num), p)[1])


def residue(x, q: int) -> int:
    """Integer representative in [0, q) of ``x`` modulo q (q a power of p)."""
    x = mpq(x)
    num, den = x.numerator, x.denominator
    if den == 1:
        return int(num % q)
    return int((num * gmpy2.invert(den, q)) % q)


# ---------------------------------------------------------------- matrices

def zeros(m: int, n: int) -> np.ndarray:
    a = np.empty((m, n), dtype=object)
    a.fill(ZERO)
    return a


def identity(n: int) -> np.ndarray:
    a = zeros(n, n)
    for i in range(n):
        a[i, i] = ONE
    return a


def scalar_matrix(n: int, c) -> np.ndarray:
    a = zeros(n, n)
    c = mpq(c)
    for i in range(n):
        a[i, i] = c
    return a


def as_matrix(rows, shape: tuple[int, int] | None = None) -> np.ndarray:
    """Convert nested sequences (ints, strings, fractions) to an mpq matrix."""
    if isinstance(rows, np.ndarray) and rows.dtype == object and rows.ndim == 2:
        out = np.empty(rows.shape, dtype=object)
        for idx, v in np.ndenumerate(rows):
            out[idx] = v if type(v) is type(ZERO) else scalar(v)
        if shape is not None and out.shape != tuple(shape):
            raise ValueError(f"matrix shape {out.shape} != {shape}")
        return out
    rows = [list(r) for r in rows]
    if shape is None:
        if not rows:
            raise ValueError("shape required for a matrix without rows")
        shape = (len(rows), len(rows[0]))
    m, n = shape
    if len(rows) != m or any(len(r) != n for r in rows):
        raise ValueError(f"matrix does not have shape {shape}")
    out = zeros(m, n)
    for i, r in enumerate(rows):
        for j, v in enumerate(r):
            out[i, j] = scalar(v)
    return out


def column(values) -> np.ndarray:
    vals = list(values)
    return as_matrix([[v] for v in vals], (len(vals), 1))


def hstack(blocks, m: int | None = None) -> np.ndarray:
    blocks = [b for b in blocks]
    if not blocks:
        return zeros(m or 0, 0)
    rows = blocks[0].shape[0]
    if m is not None and rows != m:
        raise ValueError("row count mismatch")
    return np.concatenate(blocks, axis=1) if len(blocks) > 1 else blocks[0].copy()


def vstack(blocks, n: int | None = None) -> np.ndarray:
    blocks = [b for b in blocks]
    if not blocks:
        return zeros(0, n or 0)
    return np.concatenate(blocks, axis=0) if len(blocks) > 1 else blocks[0].copy()


def block_diag(blocks) -> np.ndarray:
    blocks = list(blocks)
    m = sum(b.shape[0] for b in blocks)
    n = sum(b.shape[1] for b in blocks)
    out = zeros(m, n)
    i = j = 0
    for b in blocks:
        out[i:i + b.shape[0], j:j + b.shape[1]] = b
        i += b.shape[0]
        j += b.shape[1]
    return out


def matmul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    if a.shape[1] != b.shape[0]:
        raise ValueError(f"cannot multiply {a.shape} by {b.shape}")
    if a.shape[1] == 0:
        return zeros(a.shape[0], b.shape[1])
    return a @ b


def mat_pow(a: np.ndarray, e: int) -> np.ndarray:
    result = identity(a.shape[0])
    base = a
    while e:
        if e & 1:
            result = matmul(result, base)
        e >>= 1
        if e:
            base = matmul(base, base)
    return result


def is_zero(a: np.ndarray) -> bool:
    return all(v == 0 for v in a.flat)


def equal(a: np.ndarray, b: np.ndarray) -> bool:
    return a.shape == b.shape and all(x == y for x, y in zip(a.flat, b.flat))


def is_local_matrix(a: np.ndarray, p: int) -> bool:
    return all(v.denominator % p != 0 for v in a.flat)


def to_nested_strings(a: np.ndarray) -> list[list[str]]:
    return [[format_scalar(v) for v in row] for row in a]


# ---------------------------------------------------------------- Smith form

@dataclass(frozen=True)
class SNFDecomposition:
    """``left @ A @ right`` is diagonal with entries ``p**diag[i]``."""

    left: np.ndarray
    diag: tuple
    right: np.ndarray
    left_inv: np.ndarray
    right_inv: np.ndarray

    @property
    def rank(self) -> int:
        return sum(1 for d in self.diag if d != INF)

    def diagonal_matrix(self, p: int) -> np.ndarray:
        m, n = self.left.shape[0], self.right.shape[0]
        d = zeros(m, n)
        for i, v in enumerate(self.diag):
            if v != INF:
                d[i, i] = mpq(p) ** v
        return d


def _find_pivot(W: np.ndarray, t: int, p: int):
    m, n = W.shape
    best = None
    best_v = INF
    for i in range(t, m):
        row = W[i]
        for j in range(t, n):
            x = row[j]
            if x == 0:
                continue
            num = x.numerator
            if num % p:
                return i, j, 0
            v = int(gmpy2.remove(gmpy2.mpz(num), p)[1])
            if v < best_v:
                best_v = v
                best = (i, j, v)
    return best


def smith_normal_form(A, p: int) -> SNFDecomposition:
    """Smith form over Z_(p), pivoting on an entry of least valuation."""
    W = as_matrix(A) if not (isinstance(A, np.ndarray) and A.dtype == object) else A.copy()
    m, n = W.shape
    L, R = identity(m), identity(n)
    Li, Ri = identity(m), identity(n)
    diag = []
    r = min(m, n)
    for t in range(r):
        piv = _find_pivot(W, t, p)
        if piv is None:
            diag.extend([INF] * (r - t))
            break
        i, j, v = piv
        if i != t:
            W[[t, i]] = W[[i, t]]
            L[[t, i]] = L[[i, t]]
            Li[:, [t, i]] = Li[:, [i, t]]
        if j != t:
            W[:, [t, j]] = W[:, [j, t]]
            R[:, [t, j]] = R[:, [j, t]]
            Ri[[t, j]] = Ri[[j, t]]
        pv = mpq(p) ** v
        a = W[t, t]
        if a != pv:
            s = pv / a
            W[t, t:] = W[t, t:] * s
            L[t] = L[t] * s
            Li[:, t] = Li[:, t] / s
        # rows below the pivot
        if t + 1 < m:
            c = W[t + 1:, t] / pv
            nz = [k for k in range(c.shape[0]) if c[k] != 0]
            if nz:
                idx = np.array(nz) + t + 1
                cc = c[nz]
                W[idx, t:] = W[idx, t:] - np.outer(cc, W[t, t:])
                L[idx] = L[idx] - np.outer(cc, L[t])
                Li[:, t] = Li[:, t] + Li[:, idx] @ cc
        # columns right of the pivot
        if t + 1 < n:
            c = W[t, t + 1:] / pv
            nz = [k for k in range(c.shape[0]) if c[k] != 0]
            if nz:
                idx = np.array(nz) + t + 1
                cc = c[nz]
                R[:, idx] = R[:, idx] - np.outer(R[:, t], cc)
                Ri[t] = Ri[t] + cc @ Ri[idx]
                W[t, idx] = ZERO
        diag.append(v)
    return SNFDecomposition(L, tuple(diag), R, Li, Ri)


def solve(A: np.ndarray, B: np.ndarray, p: int, snf: SNFDecomposition | None = None):
    """A matrix X over Z_(p) with ``A @ X == B``, or None if none exists."""
    m, n = A.shape
    if B.shape[0] != m:
        raise ValueError("row count mismatch in solve")
    c = B.shape[1]
    if snf is None:
        snf = smith_normal_form(A, p)
    Y = matmul(snf.left, B)
    Z = zeros(n, c)
    r = snf.rank
    for i in range(r):
        pv = mpq(p) ** snf.diag[i]
        for j in range(c):
            y = Y[i, j]
            if y == 0:
                continue
            z = y / pv
            if z.denominator % p == 0:
                return None
            Z[i, j] = z
    for i in range(r, m):
        for j in range(c):
            if Y[i, j] != 0:
                return None
    return matmul(snf.right, Z)


def inverse(A: np.ndarray, p: int):
    """Inverse over Z_(p), or None when A is not invertible there."""
    m, n = A.shape
    if m != n:
        return None
    snf = smith_normal_form(A, p)
    if any(d != 0 for d in snf.diag):
        return None
    return matmul(snf.right, snf.left)


def rank_over_field(A: np.ndarray) -> int:
    """Rank over the fraction field."""
    return smith_normal_form(A, 2).rank if A.size else 0


# ---------------------------------------------------------------- residue field

def reduce_mod_p(A: np.ndarray, p: int) -> np.ndarray:
    """Entrywise reduction to an integer matrix with entries in [0, p)."""
    out = np.zeros(A.shape, dtype=np.int64)
    for idx, v in np.ndenumerate(A):
        out[idx] = residue(v, p)
    return out


def rank_mod_p(A, p: int) -> int:
    """Rank of an integer matrix over the field with p elements."""
    M = [[int(x) % p for x in row] for row in np.asarray(A).tolist()]
    if not M or not M[0]:
        return 0
    m, n = len(M), len(M[0])
    rank = 0
    for col in range(n):
        piv = next((i for i in range(rank, m) if M[i][col]), None)
        if piv is None:
            continue
        M[rank], M[piv] = M[piv], M[rank]
        inv = pow(M[rank][col], -1, p)
        M[rank] = [(x * inv) % p for x in M[rank]]
        for i in range(m):
            if i != rank and M[i][col]:
                f = M[i][col]
                M[i] = [(x - f * y) % p for x, y in zip(M[i], M[rank])]
        rank += 1
        if rank == m:
            break
    return rank


def complement_columns_mod_p(span, dim: int, p: int) -> list[int]:
    """Indices of standard basis vectors completing ``span`` to F_p^dim.

    ``span`` is an integer matrix with ``dim`` rows; the chosen indices are
    picked greedily in increasing order.
    """
    cur = np.asarray(span, dtype=object).reshape(dim, -1) if dim else np.zeros((0, 0), dtype=object)
    base = [[int(x) % p for x in row] for row in cur.tolist()] if dim else []
    chosen = []
    r = rank_mod_p(np.array(base, dtype=object).reshape(dim, -1), p) if dim and cur.shape[1] else 0
    for i in range(dim):
        if r == dim:
            break
        for row_idx in range(dim):
            base[row_idx].append(1 if row_idx == i else 0)
        r2 = rank_mod_p(np.array(base, dtype=object), p)
        if r2 > r:
            chosen.append(i)
            r = r2
        else:
            for row_idx in range(dim):
                base[row_idx].pop()
    return chosen
