"""Dense exact linear algebra over prime fields F_p.

Matrices are numpy int64 arrays with entries reduced mod p, acting on
column vectors (1-D arrays).  A ``Subspace`` of F_p^n stores a canonical
reduced-row-echelon basis, so two equal subspaces have byte-identical
bases and compare with ``==``.

All operations are pure; nothing here mutates its inputs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

Array = np.ndarray


def is_prime(p: int) -> bool:
    if p < 2:
        return False
    d = 2
    while d * d <= p:
        if p % d == 0:
            return False
        d += 1
    return True


def check_prime(p: int) -> int:
    if not is_prime(int(p)):
        raise ValueError(f"modulus {p} is not prime")
    return int(p)


def _inverse_table(p: int) -> Array:
    # inv[0] unused; p is small (<= a few hundred) throughout this package
    inv = np.zeros(p, dtype=np.int64)
    for a in range(1, p):
        inv[a] = pow(a, p - 2, p)
    return inv


_INV_CACHE: dict[int, Array] = {}


def inverses_mod(p: int) -> Array:
    tab = _INV_CACHE.get(p)
    if tab is None:
        tab = _inverse_table(p)
        _INV_CACHE[p] = tab
    return tab


def asmod(a, p: int) -> Array:
    return np.asarray(a, dtype=np.int64) % p


def identity(n: int) -> Array:
    return np.eye(n, dtype=np.int64)


def zeros(rows: int, cols: int) -> Array:
    return np.zeros((rows, cols), dtype=np.int64)


def matmul(a: Array, b: Array, p: int) -> Array:
    return (a @ b) % p


def mat_pow(a: Array, k: int, p: int) -> Array:
    """a^k mod p by repeated squaring; k >= 0."""
    if k < 0:
        raise ValueError("negative matrix power")
    n = a.shape[0]
    result = identity(n)
    base = a % p
    while k:
        if k & 1:
            result = (result @ base) % p
        base = (base @ base) % p
        k >>= 1
    return result


def rref(a: Array, p: int) -> tuple[Array, list[int]]:
    """Reduced row echelon form over F_p.

    Returns (R, pivot_cols).  R has the same shape as the input with zero
    rows pushed to the bottom; entries above and below pivots are cleared
    and pivots are 1.
    """
    r = asmod(a, p).copy()
    m, n = r.shape
    inv = inverses_mod(p)
    pivots: list[int] = []
    row = 0
    for col in range(n):
        if row == m:
            break
        nz = np.nonzero(r[row:, col])[0]
        if nz.size == 0:
            continue
        i = row + int(nz[0])
        if i != row:
            r[[row, i]] = r[[i, row]]
        r[row] = (r[row] * inv[r[row, col]]) % p
        factors = r[:, col].copy()
        factors[row] = 0
        if np.any(factors):
            # columns left of col are already clear in every affected row
            r[:, col:] -= np.outer(factors, r[row, col:])
            r[:, col:] %= p
        pivots.append(col)
        row += 1
    return r, pivots


def rank(a: Array, p: int) -> int:
    if a.size == 0:
        return 0
    return len(rref(a, p)[1])


def solve(a: Array, b: Array, p: int):
    """One solution x of A x = b over F_p, or None if inconsistent.

    Deterministic: free variables are set to zero, which is the
    lexicographically least assignment.
    """
    a = asmod(a, p)
    b = asmod(b, p)
    m, n = a.shape
    if b.shape != (m,):
        raise ValueError(f"dimension mismatch: A is {m}x{n}, b has length {b.shape}")
    aug = np.concatenate([a, b.reshape(m, 1)], axis=1)
    r, pivots = rref(aug, p)
    if n in pivots:
        return None
    x = np.zeros(n, dtype=np.int64)
    for row, col in enumerate(pivots):
        x[col] = r[row, n]
    return x


class Echelon:
    """Incrementally grown row-echelon basis, for rank and membership tests.

    Rows are kept echelonized (not fully reduced); ``add`` returns True when
    the vector enlarged the span.
    """

    def __init__(self, p: int, ambient: int):
        self.p = p
        self.ambient = ambient
        self.rows: list[Array] = []
        self.pivots: list[int] = []

    def _reduce(self, v: Array) -> Array:
        p = self.p
        inv = inverses_mod(p)
        v = v % p
        for row, piv in zip(self.rows, self.pivots):
            c = v[piv]
            if c:
                v = (v - c * inv[row[piv]] % p * row) % p
        return v

    def add(self, v: Array) -> bool:
        v = self._reduce(np.asarray(v, dtype=np.int64))
        nz = np.nonzero(v)[0]
        if nz.size == 0:
            return False
        piv = int(nz[0])
        idx = 0
        while idx < len(self.pivots) and self.pivots[idx] < piv:
            idx += 1
        self.rows.insert(idx, v)
        self.pivots.insert(idx, piv)
        return True

    def contains(self, v: Array) -> bool:
        return not np.any(self._reduce(np.asarray(v, dtype=np.int64)))

    @property
    def dim(self) -> int:
        return len(self.rows)

    def matrix(self) -> Array:
        if not self.rows:
            return zeros(0, self.ambient)
        return np.stack(self.rows)


@dataclass(frozen=True, eq=False)
class Subspace:
    """A subspace of F_p^ambient with canonical RREF basis rows."""

    p: int
    ambient: int
    basis: Array  # shape (dim, ambient), canonical RREF, pivot-sorted

    @property
    def dim(self) -> int:
        return self.basis.shape[0]

    def __eq__(self, other) -> bool:
        if not isinstance(other, Subspace):
            return NotImplemented
        return (
            self.p == other.p
            and self.ambient == other.ambient
            and self.basis.shape == other.basis.shape
            and bool(np.array_equal(self.basis, other.basis))
        )

    def __repr__(self) -> str:
        return f"Subspace(p={self.p}, ambient={self.ambient}, dim={self.dim})"

    def contains(self, v: Array) -> bool:
        ech = Echelon(self.p, self.ambient)
        for row in self.basis:
            ech.add(row)
        return ech.contains(asmod(v, self.p))

    def contains_space(self, other: "Subspace") -> bool:
        if other.ambient != self.ambient or other.p != self.p:
            raise ValueError("ambient or modulus mismatch")
        ech = Echelon(self.p, self.ambient)
        for row in self.basis:
            ech.add(row)
        return all(ech.contains(row) for row in other.basis)

    def vectors(self):
        """Iterate all p^dim vectors of the subspace (small spaces only)."""
        from itertools import product

        for coeffs in product(range(self.p), repeat=self.dim):
            v = np.zeros(self.ambient, dtype=np.int64)
            for c, row in zip(coeffs, self.basis):
                v = (v + c * row) % self.p
            yield v


def span(p: int, ambient: int, rows) -> Subspace:
    """Canonical subspace spanned by the given row vectors."""
    check_prime(p)
    rows = np.asarray(rows, dtype=np.int64).reshape(-1, ambient)
    if rows.shape[0] == 0:
        basis = zeros(0, ambient)
    else:
        r, pivots = rref(rows, p)
        basis = r[: len(pivots)].copy()
    basis.setflags(write=False)
    return Subspace(p, ambient, basis)


def zero_space(p: int, ambient: int) -> Subspace:
    return span(p, ambient, zeros(0, ambient))


def full_space(p: int, ambient: int) -> Subspace:
    return span(p, ambient, identity(ambient))


def _check_compatible(u: Subspace, v: Subspace):
    if u.p != v.p:
        raise ValueError("modulus mismatch")
    if u.ambient != v.ambient:
        raise ValueError("ambient dimension mismatch")


def sub_sum(u: Subspace, v: Subspace) -> Subspace:
    _check_compatible(u, v)
    return span(u.p, u.ambient, np.concatenate([u.basis, v.basis], axis=0))


def sub_intersect(u: Subspace, v: Subspace) -> Subspace:
    """U n V via the kernel of the stacked coefficient system."""
    _check_compatible(u, v)
    ku, kv = u.dim, v.dim
    if ku == 0 or kv == 0:
        return zero_space(u.p, u.ambient)
    # x = Bu^T a = Bv^T b  <=>  [Bu^T | -Bv^T] (a; b) = 0
    m = np.concatenate([u.basis.T, (-v.basis.T) % u.p], axis=1)
    ker = kernel_matrix(m, u.p)
    vecs = (ker[:, :ku] @ u.basis) % u.p
    return span(u.p, u.ambient, vecs)


def sub_complement(u: Subspace, v: Subspace) -> Subspace:
    """Deterministic W with U = V (+) W, for V a subspace of U.

    Greedy pivot completion: walk U's canonical basis and keep the rows
    that grow the span of V.
    """
    _check_compatible(u, v)
    if not u.contains_space(v):
        raise ValueError("complement requested but V is not contained in U")
    ech = Echelon(u.p, u.ambient)
    for row in v.basis:
        ech.add(row)
    picked = [row for row in u.basis if ech.add(row)]
    return span(u.p, u.ambient, np.array(picked).reshape(-1, u.ambient))


def quotient_basis(u: Subspace, v: Subspace) -> Subspace:
    """Coset representatives for U/V, realized as the canonical complement."""
    return sub_complement(u, v)


def kernel_matrix(a: Array, p: int) -> Array:
    """Basis rows of {x : A x = 0}; shape (nullity, cols)."""
    a = asmod(a, p)
    m, n = a.shape
    if n == 0:
        return zeros(0, 0)
    r, pivots = rref(a, p)
    free = [c for c in range(n) if c not in pivots]
    if not free:
        return zeros(0, n)
    rows = []
    for f in free:
        x = np.zeros(n, dtype=np.int64)
        x[f] = 1
        for row, col in enumerate(pivots):
            x[col] = (-r[row, f]) % p
        rows.append(x)
    return np.stack(rows)


def kernel(a: Array, p: int) -> Subspace:
    return span(p, a.shape[1], kernel_matrix(a, p))


def image(a: Array, p: int) -> Subspace:
    """Column space of A, as a subspace of the codomain F_p^rows."""
    return span(p, a.shape[0], asmod(a, p).T)


def apply_to_space(a: Array, s: Subspace) -> Subspace:
    """Image A(S) of a subspace under the matrix A."""
    if a.shape[1] != s.ambient:
        raise ValueError("dimension mismatch")
    if s.dim == 0:
        return zero_space(s.p, a.shape[0])
    return span(s.p, a.shape[0], (s.basis @ a.T) % s.p)


def preimage(a: Array, w: Subspace) -> Subspace:
    """{x : A x in W} as a subspace of the domain."""
    m, n = a.shape
    if m != w.ambient:
        raise ValueError(f"codomain mismatch: A has {m} rows, W lives in dim {w.ambient}")
    k = w.dim
    if k == 0:
        return kernel(a, w.p)
    # A x = Bw^T c  <=>  [A | -Bw^T] (x; c) = 0, keep the x part
    mtx = np.concatenate([asmod(a, w.p), (-w.basis.T) % w.p], axis=1)
    ker = kernel_matrix(mtx, w.p)
    return span(w.p, n, ker[:, :n])


def solve_in_space(a: Array, s: Subspace, b: Array):
    """Some x in S with A x = b, or None.  Deterministic like solve()."""
    if a.shape[1] != s.ambient:
        raise ValueError("dimension mismatch")
    if s.dim == 0:
        return None if np.any(asmod(b, s.p)) else np.zeros(s.ambient, dtype=np.int64)
    restricted = (a @ s.basis.T) % s.p
    c = solve(restricted, b, s.p)
    if c is None:
        return None
    return (s.basis.T @ c) % s.p
