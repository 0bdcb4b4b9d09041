"""Concrete p-adic instances: cyclic towers over Q_p and their class data.

Two families are supported.  UNRAMIFIED towers (p odd) realize the case
with no p-th root of unity in the base; CYCLOTOMIC towers adjoin p-power
roots of unity (for p = 2 the base is Q_2(i) and the generator acts by
zeta -> zeta^5, the cyclic part of the 2-cyclotomic Galois group).

Elements live in the top field K in floating form pi^val * unit, the
unit being a polynomial in the field generator with coefficients modulo
p^cp, together with an absolute precision bound aprec (in pi-digits):
the represented value is guaranteed modulo pi^aprec.  Addition that
cancels past the bound collapses to an exact zero-at-precision, which
is what equality tests consume.  For cyclotomic towers the generator is
the uniformizer itself (Eisenstein power basis), so valuations read off
coefficients exactly; for unramified towers pi = p.

Class computation per level walks the unit filtration 1 + pi_i^j: free
cancellation through p-th powers below the critical level j = pe/(p-1),
an additive Artin-Schreier step c -> c^p + eta*c at the critical level,
and a new basis class at each remaining slot.  Membership in the p-th
powers is decided constructively by digit-by-digit back-substitution
(pth_root).
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass

import numpy as np

from . import fp_linalg as fl
from . import gmod
from .datum import GaloisDatum, LevelData
from .fp_linalg import Array

UNRAMIFIED = "unramified"
CYCLOTOMIC = "cyclotomic"


class PrecisionError(ArithmeticError):
    """A read or exact division fell outside the precision window."""


class NotPthPower(ValueError):
    """Constructive p-th root extraction ran out of digit moves."""


# ---------------------------------------------------------------------------
# integer polynomial helpers (dense coefficient lists modulo m)


def _poly_trim(a: list[int]) -> list[int]:
    while a and a[-1] == 0:
        a.pop()
    return a


def _poly_mulmod(a: list[int], b: list[int], f: list[int], m: int) -> list[int]:
    """a*b mod (f, m) for monic f; inputs of degree < deg f."""
    d = len(f) - 1
    if not a or not b:
        return [0] * d
    prod = [0] * (len(a) + len(b) - 1)
    for i, ai in enumerate(a):
        if ai:
            for j, bj in enumerate(b):
                prod[i + j] = (prod[i + j] + ai * bj) % m
    for k in range(len(prod) - 1, d - 1, -1):
        c = prod[k]
        if c:
            prod[k] = 0
            for j in range(d):
                prod[k - d + j] = (prod[k - d + j] - c * f[j]) % m
    prod = prod[:d] + [0] * max(0, d - len(prod))
    return [x % m for x in prod]


def _poly_powmod(a: list[int], e: int, f: list[int], m: int) -> list[int]:
    d = len(f) - 1
    result = [1] + [0] * (d - 1)
    base = list(a) + [0] * max(0, d - len(a))
    while e:
        if e & 1:
            result = _poly_mulmod(result, base, f, m)
        base = _poly_mulmod(base, base, f, m)
        e >>= 1
    return result


def _poly_add(a: list[int], b: list[int], m: int) -> list[int]:
    n = max(len(a), len(b))
    return [
        ((a[i] if i < len(a) else 0) + (b[i] if i < len(b) else 0)) % m
        for i in range(n)
    ]


def _cyclotomic_shifted(p: int, power: int) -> list[int]:
    """Coefficients of Phi_{p^power}(x + 1), Eisenstein with constant p."""
    step = p ** (power - 1)
    phi = {0: 1, step: 1} if p == 2 else {t * step: 1 for t in range(p)}
    out = [0] * (max(phi) + 1)
    for k, coef in phi.items():
        for j in range(k + 1):
            out[j] += coef * math.comb(k, j)
    return out


def _gf_poly_gcd(a: list[int], b: list[int], p: int) -> list[int]:
    a = _poly_trim([x % p for x in a])
    b = _poly_trim([x % p for x in b])
    while b:
        inv = pow(b[-1], p - 2, p)
        bb = [x * inv % p for x in b]
        r = list(a)
        while r and len(r) >= len(bb):
            c = r[-1]
            if c:
                off = len(r) - len(bb)
                for j in range(len(bb)):
                    r[off + j] = (r[off + j] - c * bb[j]) % p
            _poly_trim(r)
        a, b = bb, r
    return a


def _small_prime(q: int) -> bool:
    return q >= 2 and all(q % t for t in range(2, int(q**0.5) + 1))


def _gf_irreducible(f: list[int], p: int) -> bool:
    d = len(f) - 1
    x = [0, 1]
    minus_x = [0, p - 1]
    xq = _poly_powmod(x, p**d, f, p)
    if _poly_trim(_poly_add(xq, minus_x, p)) != []:
        return False
    for ell in [q for q in range(2, d + 1) if d % q == 0 and _small_prime(q)]:
        xe = _poly_powmod(x, p ** (d // ell), f, p)
        if len(_gf_poly_gcd(_poly_add(xe, minus_x, p), f, p)) - 1 != 0:
            return False
    return True


def _find_unramified_poly(p: int, d: int) -> list[int]:
    """Deterministic monic irreducible of degree d over F_p, lifted to Z."""
    if d == 1:
        return [1, 1]
    from itertools import product

    for width in range(2, d + 1):
        for tail in product(range(p), repeat=width):
            if tail[0] == 0:
                continue
            f = [0] * d + [1]
            for idx, c in enumerate(tail):
                f[idx] = c
            if _gf_irreducible(f, p):
                return f
    raise AssertionError("no irreducible polynomial found")


# ---------------------------------------------------------------------------
# elements


@dataclass
class LFElement:
    """pi^val * unit; unit None encodes zero (to precision aprec).

    aprec is an absolute precision bound in pi-digits of the top field:
    the represented value is correct modulo pi^aprec.  None means exact.
    """

    tower: "LocalTower"
    val: int
    unit: tuple[int, ...] | None
    aprec: int | None = None

    @property
    def is_zero(self) -> bool:
        return self.unit is None

    def __add__(self, other):
        return self.tower.add(self, other)

    def __sub__(self, other):
        return self.tower.add(self, self.tower.neg(other))

    def __mul__(self, other):
        return self.tower.mul(self, other)

    def __truediv__(self, other):
        return self.tower.mul(self, self.tower.inv(other))

    def __pow__(self, e: int):
        return self.tower.powi(self, e)

    def __repr__(self):
        if self.is_zero:
            return f"LFElement(0, aprec={self.aprec})"
        return f"LFElement(val={self.val}, unit~{list(self.unit[:3])}..., aprec={self.aprec})"


def _amin(*vals):
    finite = [v for v in vals if v is not None]
    return min(finite) if finite else None


class LocalTower:
    """A cyclic tower of p-adic fields with truncated exact arithmetic."""

    def __init__(self, p: int, kind: str, n: int, precision: int):
        fl.check_prime(p)
        kind = kind.lower()
        if kind not in (UNRAMIFIED, CYCLOTOMIC):
            raise ValueError(f"unknown tower kind {kind!r}")
        if n < 1:
            raise ValueError("tower height must be >= 1")
        if kind == UNRAMIFIED and p == 2:
            raise ValueError(
                "unramified towers need p odd (xi_2 = -1 lies in every 2-adic field)"
            )
        self.p = p
        self.kind = kind
        self.n = n

        if kind == UNRAMIFIED:
            self.deg = p**n
            self.e = 1
            self.minpoly = _find_unramified_poly(p, self.deg)
        else:
            if p == 2:
                self.cyclo_power = n + 2  # K = Q_2(zeta_{2^(n+2)}), F = Q_2(i)
                self.deg = 2 ** (n + 1)
            else:
                self.cyclo_power = n + 1  # K = Q_p(zeta_{p^(n+1)}), F = Q_p(zeta_p)
                self.deg = p**n * (p - 1)
            self.e = self.deg
            self.minpoly = _cyclotomic_shifted(p, self.cyclo_power)

        m_min = self.e * math.ceil(p / (p - 1)) + self.e + 8
        if precision < m_min:
            raise PrecisionError(
                f"precision {precision} pi-digits below the threshold {m_min}"
            )
        self.pi_prec = precision
        self.cp = math.ceil(precision / self.e) + (p * self.e) // (p - 1) // self.e + 10
        self.modulus = p**self.cp
        self.rel_cap = self.e * self.cp  # representable relative precision

        self.fpoly = [c % self.modulus for c in self.minpoly]
        if kind == CYCLOTOMIC:
            assert self.minpoly[0] == p
            # pi * (x^(d-1) + a_{d-1} x^(d-2) + ... + a_1) = -p
            self._p_over_pi = [(-c) for c in self.minpoly[1:]]
        else:
            self._p_over_pi = None

        d = self.deg
        self.one = LFElement(self, 0, (1,) + (0,) * (d - 1))
        self.zero = LFElement(self, 0, None)
        self.pi = LFElement(self, 1, (1,) + (0,) * (d - 1))

        self._galois_setup()
        self._level_setup()
        self._classes: dict[int, _LevelClasses] = {}

    # -- element construction ------------------------------------------------

    def from_poly(self, coeffs) -> LFElement:
        d = self.deg
        c = [int(x) % self.modulus for x in coeffs][:d]
        c += [0] * (d - len(c))
        if all(x == 0 for x in c):
            return self.zero
        t = self._poly_val(c)
        return LFElement(self, t, tuple(self._strip(c, t)), t + self.rel_cap)

    def from_int(self, c: int) -> LFElement:
        c = int(c) % self.modulus
        if c == 0:
            return self.zero
        return self.from_poly([c])

    def zeta(self, k: int = 1) -> LFElement:
        """zeta^k for the cyclotomic generator zeta = 1 + pi."""
        if self.kind != CYCLOTOMIC:
            raise ValueError("no distinguished root of unity in this tower")
        return self.powi(self.add(self.one, self.pi), k)

    def zeta_p(self) -> LFElement:
        """A primitive p-th root of unity (cyclotomic towers)."""
        if self.kind != CYCLOTOMIC:
            raise ValueError("xi_p is not in an unramified tower (p odd)")
        return self.zeta(self.p ** (self.cyclo_power - 1))

    # -- valuation machinery ---------------------------------------------------

    def _poly_val(self, c: list[int]) -> int:
        best = None
        if self.kind == UNRAMIFIED:
            for x in c:
                if x:
                    v = 0
                    while x % self.p == 0:
                        x //= self.p
                        v += 1
                    best = v if best is None else min(best, v)
            return 0 if best is None else best
        for k, x in enumerate(c):
            if x:
                v = 0
                while x % self.p == 0:
                    x //= self.p
                    v += 1
                vv = self.e * v + k
                best = vv if best is None else min(best, vv)
        return 0 if best is None else best

    def _strip(self, c: list[int], t: int) -> list[int]:
        """Exactly divide the polynomial by pi^t (valuation must allow it).

        Uses an enlarged working modulus so the quotient keeps cp digits.
        """
        if t == 0:
            return list(c)
        p = self.p
        if self.kind == UNRAMIFIED:
            pt = p**t
            if any(x % pt for x in c):
                raise PrecisionError("strip below the honest valuation")
            return [(x // pt) % self.modulus for x in c]
        mod_hi = self.modulus * p**t
        fhi = [x % mod_hi for x in self.minpoly]
        qt = _poly_powmod([x % mod_hi for x in self._p_over_pi], t, fhi, mod_hi)
        acc = _poly_mulmod([x % mod_hi for x in c], qt, fhi, mod_hi)
        pt = p**t
        if any(x % pt for x in acc):
            raise PrecisionError("strip below the honest valuation")
        return [(x // pt) % self.modulus for x in acc]

    def _shift(self, c: list[int], delta: int) -> list[int]:
        """Multiply a polynomial by pi^delta (delta >= 0)."""
        if delta == 0:
            return list(c)
        if self.kind == UNRAMIFIED:
            pd = self.p**delta
            return [x * pd % self.modulus for x in c]
        xd = _poly_powmod([0, 1], delta, self.fpoly, self.modulus)
        return _poly_mulmod(list(c), xd, self.fpoly, self.modulus)

    # -- arithmetic --------------------------------------------------------------

    def add(self, x: LFElement, y: LFElement) -> LFElement:
        if x.is_zero and y.is_zero:
            return LFElement(self, 0, None, _amin(x.aprec, y.aprec))
        if x.is_zero:
            return self._clip(y, x.aprec)
        if y.is_zero:
            return self._clip(x, y.aprec)
        if x.val > y.val:
            x, y = y, x
        a = _amin(x.aprec, y.aprec, x.val + self.rel_cap)
        delta = y.val - x.val
        if delta >= a - x.val:
            return LFElement(self, x.val, x.unit, a)
        w = _poly_add(list(x.unit), self._shift(list(y.unit), delta), self.modulus)
        if all(v == 0 for v in w):
            return LFElement(self, 0, None, a)
        t = self._poly_val(w)
        if x.val + t >= a:
            return LFElement(self, 0, None, a)
        return LFElement(self, x.val + t, tuple(self._strip(w, t)), a)

    def _clip(self, x: LFElement, aprec) -> LFElement:
        if aprec is None:
            return x
        if x.is_zero:
            return LFElement(self, 0, None, _amin(x.aprec, aprec))
        a = _amin(x.aprec, aprec)
        if x.val >= a:
            return LFElement(self, 0, None, a)
        return LFElement(self, x.val, x.unit, a)

    def neg(self, x: LFElement) -> LFElement:
        if x.is_zero:
            return x
        return LFElement(
            self, x.val, tuple((-v) % self.modulus for v in x.unit), x.aprec
        )

    def mul(self, x: LFElement, y: LFElement) -> LFElement:
        if x.is_zero or y.is_zero:
            a = None
            if x.is_zero and x.aprec is not None:
                a = x.aprec + (y.val if not y.is_zero else 0)
            if y.is_zero and y.aprec is not None:
                ay = y.aprec + (x.val if not x.is_zero else 0)
                a = _amin(a, ay)
            return LFElement(self, 0, None, a)
        u = _poly_mulmod(list(x.unit), list(y.unit), self.fpoly, self.modulus)
        val = x.val + y.val
        a = _amin(
            None if x.aprec is None else x.aprec + y.val,
            None if y.aprec is None else y.aprec + x.val,
            val + self.rel_cap,
        )
        return LFElement(self, val, tuple(u), a)

    def inv(self, x: LFElement) -> LFElement:
        if x.is_zero:
            raise ZeroDivisionError("division by zero")
        u = list(x.unit)
        v = self._residue_inverse(u)
        for _ in range(max(3, math.ceil(math.log2(self.cp * self.e)) + 2)):
            uv = _poly_mulmod(u, v, self.fpoly, self.modulus)
            two_minus = [(-c) % self.modulus for c in uv]
            two_minus[0] = (two_minus[0] + 2) % self.modulus
            v = _poly_mulmod(v, two_minus, self.fpoly, self.modulus)
        rel = None if x.aprec is None else x.aprec - x.val
        a = None if rel is None else -x.val + rel
        a = _amin(a, -x.val + self.rel_cap)
        return LFElement(self, -x.val, tuple(v), a)

    def _residue_inverse(self, u: list[int]) -> list[int]:
        p, d = self.p, self.deg
        if self.kind == CYCLOTOMIC:
            c0 = u[0] % p
            if c0 == 0:
                raise ZeroDivisionError("not a unit")
            return [pow(c0, p - 2, p)] + [0] * (d - 1)
        fbar = [c % p for c in self.fpoly]
        ubar = [v % p for v in u]
        if all(v == 0 for v in ubar):
            raise ZeroDivisionError("not a unit")
        out = _poly_powmod(ubar, p**d - 2, fbar, p)
        return out + [0] * (d - len(out))

    def powi(self, x: LFElement, e: int) -> LFElement:
        if e < 0:
            return self.powi(self.inv(x), -e)
        result = self.one
        base = x
        while e:
            if e & 1:
                result = self.mul(result, base)
            base = self.mul(base, base)
            e >>= 1
        return result

    def eq(self, x: LFElement, y: LFElement) -> bool:
        """Equality of values to the available precision."""
        return self.add(x, self.neg(y)).is_zero

    def residue(self, x: LFElement):
        """Residue of a valuation-zero unit: int mod p, or an F_q tuple."""
        if x.is_zero or x.val != 0:
            raise ValueError("residue requires a valuation-zero unit")
        if x.aprec is not None and x.aprec < self.e:
            raise PrecisionError("no full residue digit left")
        if self.kind == CYCLOTOMIC:
            return x.unit[0] % self.p
        return tuple(v % self.p for v in x.unit)

    # -- Galois action --------------------------------------------------------

    def _galois_setup(self):
        p, d, mod = self.p, self.deg, self.modulus
        if self.kind == CYCLOTOMIC:
            u = 5 if p == 2 else 1 + p
            self.sigma_exponent = u
            zu = _poly_powmod([1, 1], u, self.fpoly, mod)
            zu[0] = (zu[0] - 1) % mod
            gen_image = zu
        else:
            gen_image = self._frobenius_root()
        self.sigma_gen_poly = gen_image

        cols = []
        col = [1] + [0] * (d - 1)
        for _ in range(d):
            cols.append(list(col))
            col = _poly_mulmod(col, gen_image, self.fpoly, mod)
        mat1 = [[cols[j][i] for j in range(d)] for i in range(d)]
        order = p**self.n
        mats: list = [None] * order
        mats[0] = [[1 if i == j else 0 for j in range(d)] for i in range(d)]
        if order > 1:
            mats[1] = mat1
            for k in range(2, order):
                mats[k] = self._mat_mul(mat1, mats[k - 1])
        self._sigma_mats = mats

        if self.kind == CYCLOTOMIC:
            self._sigma_pi_units = []
            for k in range(order):
                img = self.from_poly(self._mat_apply(mats[k], [0, 1]))
                if img.val != 1:
                    raise ValueError("generator image is not a uniformizer")
                self._sigma_pi_units.append(LFElement(self, 0, img.unit))
        # exact order: sigma^(p^n) = 1 and sigma^(p^(n-1)) != 1
        last = self._mat_mul(mats[order - 1], mat1) if order > 1 else mat1
        if self._mats_differ(last, mats[0]):
            raise ValueError("generator does not have order p^n")
        if order > 1 and not self._mats_differ(mats[order // p], mats[0]):
            raise ValueError("non-cyclic configuration: generator order too small")

    def _mats_differ(self, a, b) -> bool:
        """Inequality of automorphism matrices up to the working precision.

        Hensel-lifted entries are exact only to about cp digits; compare
        a few digits below the cap."""
        slack = self.p ** max(1, self.cp - 4)
        for ra, rb in zip(a, b):
            for xa, xb in zip(ra, rb):
                if (xa - xb) % self.modulus % slack != 0:
                    return True
        return False

    def _mat_mul(self, a, b):
        d, mod = self.deg, self.modulus
        out = [[0] * d for _ in range(d)]
        for i in range(d):
            arow = a[i]
            orow = out[i]
            for k in range(d):
                aik = arow[k]
                if aik:
                    brow = b[k]
                    for j in range(d):
                        orow[j] = (orow[j] + aik * brow[j]) % mod
        return out

    def _mat_apply(self, m, vec) -> list[int]:
        d, mod = self.deg, self.modulus
        out = [0] * d
        for j, vj in enumerate(vec):
            if vj:
                for i in range(d):
                    mij = m[i][j]
                    if mij:
                        out[i] = (out[i] + mij * vj) % mod
        return out

    def _frobenius_root(self) -> list[int]:
        """Hensel-lifted Frobenius image of the unramified generator."""
        d, mod = self.deg, self.modulus
        w = [0, 1] + [0] * (d - 2)
        r = self.from_poly(_poly_powmod(w, self.p, self.fpoly, mod))
        deriv = [(k * c) % mod for k, c in enumerate(self.minpoly)][1:]
        for _ in range(max(3, math.ceil(math.log2(self.cp)) + 2)):
            fr = self._eval_intpoly(self.minpoly, r)
            if fr.is_zero:
                break
            fpr = self._eval_intpoly(deriv, r)
            r = self.add(r, self.neg(self.mul(fr, self.inv(fpr))))
        return self._as_poly(r)

    def _eval_intpoly(self, coeffs: list[int], x: LFElement) -> LFElement:
        acc = self.zero
        for c in reversed(coeffs):
            acc = self.add(self.mul(acc, x), self.from_int(c))
        return acc

    def _as_poly(self, x: LFElement) -> list[int]:
        if x.is_zero:
            return [0] * self.deg
        if x.val < 0:
            raise ValueError("element is not integral")
        return self._shift(list(x.unit), x.val)

    def galois(self, x: LFElement, k: int = 1) -> LFElement:
        """sigma^k applied to an element."""
        order = self.p**self.n
        k %= order
        if k == 0 or x.is_zero:
            return x
        img = self._mat_apply(self._sigma_mats[k], list(x.unit))
        if self.kind == UNRAMIFIED:
            return LFElement(self, x.val, tuple(img), x.aprec)
        scale = self.powi(self._sigma_pi_units[k], x.val)
        return self.mul(LFElement(self, x.val, tuple(img), x.aprec), scale)

    def norm(self, x: LFElement, i: int, j: int) -> LFElement:
        """Norm from level i down to level j <= i (conjugates under
        sigma^(p^j) running over Gal(K_i/K_j))."""
        if not 0 <= j <= i <= self.n:
            raise ValueError("bad norm levels")
        if x.is_zero:
            return self.zero
        out = x
        for k in range(1, self.p ** (i - j)):
            out = self.mul(out, self.galois(x, k * self.p**j))
        return out

    # -- tower levels -------------------------------------------------------------

    def _level_setup(self):
        p, n = self.p, self.n
        self.level_uniformizer: list[LFElement] = []
        self.level_e: list[int] = []      # absolute ramification of K_i
        self.level_rel_e: list[int] = []  # e(K / K_i)
        for i in range(n + 1):
            if self.kind == UNRAMIFIED:
                self.level_uniformizer.append(self.from_int(p))
                self.level_e.append(1)
                self.level_rel_e.append(1)
            else:
                rel = p ** (n - i)
                pi_i = self.add(self.zeta(rel), self.neg(self.one))
                if pi_i.val != rel:
                    raise ValueError("level uniformizer has unexpected valuation")
                self.level_uniformizer.append(pi_i)
                self.level_e.append(self.e // rel)
                self.level_rel_e.append(rel)
        if self.kind == CYCLOTOMIC:
            for i in range(n + 1):
                pi_i = self.level_uniformizer[i]
                if not self.eq(self.galois(pi_i, p**i), pi_i):
                    raise ValueError(f"sigma^(p^{i}) does not fix level {i}")
                if i >= 1 and self.eq(self.galois(pi_i, p ** (i - 1)), pi_i):
                    raise ValueError(f"level {i} fixed too early: non-cyclic tower")

    # -- residue machinery -----------------------------------------------------------

    def _residue_frobenius_matrix(self) -> Array:
        p, d = self.p, self.deg
        fbar = [c % p for c in self.fpoly]
        cols = []
        for j in range(d):
            img = _poly_powmod([0] * j + [1], p, fbar, p)
            cols.append(img + [0] * (d - len(img)))
        return np.array(cols, dtype=np.int64).T % p

    def _subfield_residue_basis(self, i: int):
        """F_p-basis of the residue field of K_i (as residue data)."""
        if self.kind == CYCLOTOMIC:
            return [1]
        frob = self._residue_frobenius_matrix()
        fi = fl.mat_pow(frob, self.p**i, self.p)
        sub = fl.kernel((fi - fl.identity(self.deg)) % self.p, self.p)
        if sub.dim != self.p**i:
            raise AssertionError("residue subfield has wrong dimension")
        return [tuple(int(v) for v in row) for row in sub.basis]

    def res_lift(self, residue) -> LFElement:
        """Any integral lift with the given residue (not Teichmuller)."""
        if self.kind == CYCLOTOMIC:
            r = int(residue) % self.p
            return self.zero if r == 0 else self.from_int(r)
        if all(v % self.p == 0 for v in residue):
            return self.zero
        return self.from_poly(list(residue))

    def teichmuller(self, residue) -> LFElement:
        """The Teichmuller lift of a nonzero residue: the root of
        X^(q-1) = 1 reducing to it."""
        p, d = self.p, self.deg
        if self.kind == CYCLOTOMIC:
            r = int(residue) % p
            if r == 0:
                raise ValueError("zero residue")
            if p == 2 or r == 1:
                return self.one
            mod = self.modulus
            x = r
            for _ in range(max(3, math.ceil(math.log2(self.cp)) + 2)):
                num = (pow(x, p - 1, mod) - 1) % mod
                den = (p - 1) * pow(x, p - 2, mod) % mod
                x = (x - num * pow(den, -1, mod)) % mod
            return self.from_int(x)
        x = self.res_lift(residue)
        if x.is_zero:
            raise ValueError("zero residue")
        q = p**d
        for _ in range(max(3, math.ceil(math.log2(self.cp * self.e)) + 3)):
            xq = self.powi(x, q)
            num = self.add(xq, self.neg(x))
            if num.is_zero:
                break
            den = self.add(
                self.mul(self.from_int(q), self.powi(x, q - 1)), self.neg(self.one)
            )
            x = self.add(x, self.neg(self.mul(num, self.inv(den))))
        return x

    def _residue_frob_inverse(self, residue):
        """delta with delta^p = residue in the residue field."""
        p = self.p
        if self.kind == CYCLOTOMIC:
            return int(residue) % p
        d = self.deg
        fbar = [c % p for c in self.fpoly]
        out = _poly_powmod(list(residue), p ** (d - 1), fbar, p)
        return tuple(out + [0] * (d - len(out)))

    # -- p-th roots ----------------------------------------------------------------

    def pth_root(self, x: LFElement) -> LFElement:
        """A y with y^p = x by digit-by-digit back-substitution; raises
        NotPthPower when some filtration digit cannot be matched."""
        p, e = self.p, self.e
        if x.is_zero:
            return self.zero
        if x.val % p:
            raise NotPthPower("valuation is not divisible by p")
        crit = p * e // (p - 1) if (p * e) % (p - 1) == 0 else None
        jstar = (p * e) // (p - 1)

        unit = LFElement(self, 0, x.unit, None if x.aprec is None else x.aprec - x.val)
        res = self.residue(unit)
        t_root = self.teichmuller(self._residue_frob_inverse(res))
        v = t_root
        r = self.mul(unit, self.inv(self.powi(t_root, p)))
        eta = self._critical_eta() if crit is not None else None

        for _ in range(4 * (jstar + self.cp) + 16):
            diff = self.add(r, self.neg(self.one))
            if diff.is_zero:
                break
            s = diff.val
            if s > jstar:
                v = self.mul(v, self._deep_root(r))
                break
            gamma = self.residue(LFElement(self, 0, diff.unit, None))
            if crit is not None and s == crit:
                delta = self._solve_critical(gamma, eta)
                if delta is None:
                    raise NotPthPower(f"critical digit at level {s} unmatched")
                t = e // (p - 1)
            elif s % p == 0 and (crit is None or s < crit):
                delta = self._residue_frob_inverse(gamma)
                t = s // p
            else:
                raise NotPthPower(f"no digit move available at level {s}")
            w = self.add(self.one, self.mul(self.res_lift(delta), self.powi(self.pi, t)))
            v = self.mul(v, w)
            r = self.mul(r, self.inv(self.powi(w, p)))
        else:
            raise AssertionError("digit loop failed to converge")
        return self.mul(v, self.powi(self.pi, x.val // p))

    def _critical_eta(self):
        unit = self.mul(self.from_int(self.p), self.powi(self.inv(self.pi), self.e))
        if unit.val != 0:
            raise AssertionError("p/pi^e is not a unit")
        return self.residue(unit)

    def _solve_critical(self, gamma, eta):
        """delta with delta^p + eta*delta = gamma in the residue field."""
        p = self.p
        if self.kind == CYCLOTOMIC:
            g = int(gamma) % p
            a = (1 + int(eta)) % p  # c^p = c on F_p
            if a == 0:
                return 0 if g == 0 else None
            return g * pow(a, p - 2, p) % p
        frob = self._residue_frobenius_matrix()
        mult = self._residue_mult_matrix(eta)
        sol = fl.solve((frob + mult) % p, np.array(gamma, dtype=np.int64) % p, p)
        return None if sol is None else tuple(int(v) for v in sol)

    def _residue_mult_matrix(self, eta) -> Array:
        p, d = self.p, self.deg
        fbar = [c % p for c in self.fpoly]
        cols = []
        for j in range(d):
            img = _poly_mulmod(list(eta), [0] * j + [1], fbar, p)
            cols.append(img + [0] * (d - len(img)))
        return np.array(cols, dtype=np.int64).T % p

    def _deep_root(self, r: LFElement) -> LFElement:
        """p-th root of a unit deep in the filtration by w *= 1 + err/p."""
        w = self.one
        p_inv = self.inv(self.from_int(self.p))
        for _ in range(4 * self.cp + 8):
            err = self.add(self.mul(r, self.inv(self.powi(w, self.p))), self.neg(self.one))
            if err.is_zero:
                return w
            w = self.mul(w, self.add(self.one, self.mul(err, p_inv)))
        return w

    def is_pth_power(self, x: LFElement) -> bool:
        try:
            y = self.pth_root(x)
        except NotPthPower:
            return False
        return self.eq(self.powi(y, self.p), x)

    # -- class spaces ------------------------------------------------------------------

    def level_val(self, i: int, x: LFElement) -> int:
        rel = self.level_rel_e[i]
        if x.val % rel:
            raise ValueError(
                f"element not at level {i}: valuation {x.val} not divisible by {rel}"
            )
        return x.val // rel

    def classes(self, i: int) -> "_LevelClasses":
        if i not in self._classes:
            self._classes[i] = _LevelClasses(self, i)
        return self._classes[i]

    def class_basis(self, i: int) -> list[LFElement]:
        """Basis of J(K_i) = K_i^x/(K_i^x)^p, uniformizer class first."""
        return self.classes(i).basis_elements

    def class_of(self, i: int, x: LFElement) -> Array:
        """Coordinates of the class of x in the level-i basis."""
        return self.classes(i).class_of(x)

    def dim_class_space(self, i: int) -> int:
        return self.classes(i).dim


class _LevelClasses:
    """Echelonized basis of K_i^x/(K_i^x)^p, with coordinates."""

    def __init__(self, tower: LocalTower, i: int):
        self.t = tower
        self.i = i
        p = tower.p
        self.e_i = tower.level_e[i]
        self.pi_i = tower.level_uniformizer[i]
        self.crit = p * self.e_i // (p - 1) if (p * self.e_i) % (p - 1) == 0 else None
        self.jstar = (p * self.e_i) // (p - 1)
        self.res_basis = tower._subfield_residue_basis(i)
        self.res_dim = len(self.res_basis)
        self._res_mat = self._residue_coord_matrix()
        self._frob_sub = self._frob_matrix_on_subfield()
        self.eta_res = self._eta_res()
        # records: (reduced element, its inverse, filtration level, leading coords)
        self.unit_basis: list[tuple[LFElement, LFElement, int, Array]] = []
        self._build()
        self.basis_elements = [self.pi_i] + [b for b, _, _, _ in self.unit_basis]
        self.dim = len(self.basis_elements)
        expected = self._expected_dim()
        if self.dim != expected:
            raise AssertionError(
                f"level {i}: computed {self.dim} classes, classical count is {expected}"
            )

    def _residue_coord_matrix(self):
        t = self.t
        if t.kind == CYCLOTOMIC:
            return None
        cols = [np.array(b, dtype=np.int64) for b in self.res_basis]
        return np.stack(cols, axis=1) % t.p

    def _res_coords(self, residue) -> Array:
        t = self.t
        if t.kind == CYCLOTOMIC:
            return np.array([int(residue) % t.p], dtype=np.int64)
        sol = fl.solve(self._res_mat, np.array(residue, dtype=np.int64) % t.p, t.p)
        if sol is None:
            raise AssertionError("leading coefficient escaped the residue subfield")
        return sol

    def _res_from_coords(self, coords) -> LFElement:
        t = self.t
        if t.kind == CYCLOTOMIC:
            return t.res_lift(int(coords[0]))
        acc = [0] * t.deg
        for c, b in zip(coords, self.res_basis):
            if int(c) % t.p:
                for k, bv in enumerate(b):
                    acc[k] = (acc[k] + int(c) * bv) % t.p
        return t.res_lift(tuple(acc))

    def _eta_res(self):
        if self.crit is None:
            return None
        t = self.t
        unit = t.mul(t.from_int(t.p), t.powi(t.inv(self.pi_i), self.e_i))
        if unit.val != 0:
            raise AssertionError("p/pi_i^e_i is not a unit")
        return t.residue(unit)

    def _frob_matrix_on_subfield(self) -> Array:
        t = self.t
        p = t.p
        if t.kind == CYCLOTOMIC:
            return np.array([[1]], dtype=np.int64)  # c -> c^p = c on F_p
        fbar = [c % p for c in t.fpoly]
        cols = []
        for b in self.res_basis:
            img = _poly_powmod(list(b), p, fbar, p)
            cols.append(self._res_coords(tuple(img + [0] * (t.deg - len(img)))))
        return np.stack(cols, axis=1) % p

    def _free_map(self, j: int) -> Array | None:
        """F_p-matrix whose image is cancellable at level j by p-th powers."""
        t = self.t
        p = t.p
        if self.crit is not None and j == self.crit:
            return (self._frob_sub + self._mult_matrix(self.eta_res)) % p
        if j % p == 0 and (self.crit is None or j < self.crit):
            return self._frob_sub
        return None

    def _mult_matrix(self, eta_res) -> Array:
        t = self.t
        p = t.p
        if t.kind == CYCLOTOMIC:
            return np.array([[int(eta_res) % p]], dtype=np.int64)
        fbar = [c % p for c in t.fpoly]
        cols = []
        for b in self.res_basis:
            img = _poly_mulmod(list(eta_res), list(b), fbar, p)
            cols.append(self._res_coords(tuple(img + [0] * (t.deg - len(img)))))
        return np.stack(cols, axis=1) % p

    def _free_element(self, j: int, delta_coords) -> LFElement:
        """The explicit p-th power cancelling level j."""
        t = self.t
        p = t.p
        if self.crit is not None and j == self.crit:
            texp = self.e_i // (p - 1)
        else:
            texp = j // p
        lift = self._res_from_coords(delta_coords)
        base = t.add(t.one, t.mul(lift, t.powi(self.pi_i, texp)))
        return t.powi(base, p)

    def _leading(self, u: LFElement):
        """(filtration level, leading coords) of a 1-unit, or (None, None)."""
        t = self.t
        diff = t.add(u, t.neg(t.one))
        if diff.is_zero:
            return None, None
        s = t.level_val(self.i, diff)
        gamma = t.residue(LFElement(t, 0, diff.unit, None))
        return s, self._res_coords(gamma)

    def _reduce(self, u: LFElement):
        """(coords over the unit basis, residual); residual is None when u
        reduced to a p-th power, else (element, level, leading coords)."""
        t = self.t
        p = t.p
        coords = np.zeros(len(self.unit_basis), dtype=np.int64)
        prev = -1
        for _ in range(4 * (self.jstar + t.cp) + 16):
            s, gamma = self._leading(u)
            if s is None or s > self.jstar:
                return coords, None
            if s <= prev:
                raise AssertionError("reduction failed to advance the filtration")
            prev = s
            same = [
                (idx, rec[3]) for idx, rec in enumerate(self.unit_basis) if rec[2] == s
            ]
            free = self._free_map(s)
            blocks = []
            if same:
                blocks.append(np.stack([lead for _, lead in same], axis=1))
            if free is not None:
                blocks.append(free)
            sol = None
            if blocks:
                amat = np.concatenate(blocks, axis=1) % p
                sol = fl.solve(amat, gamma, p)
            if sol is None:
                return coords, (u, s, gamma)
            k = len(same)
            for (idx, _), c in zip(same, sol[:k]):
                c = int(c) % p
                if c:
                    coords[idx] = (coords[idx] + c) % p
                    u = t.mul(u, t.powi(self.unit_basis[idx][1], c))
            if free is not None and np.any(sol[k:] % p):
                u = t.mul(u, t.inv(self._free_element(s, sol[k:])))
        raise AssertionError("reduction loop failed to converge")

    def _build(self):
        t = self.t
        for j in range(1, self.jstar + 1):
            for res in self.res_basis:
                lift = t.res_lift(res)
                cand = t.add(t.one, t.mul(lift, t.powi(self.pi_i, j)))
                _, residual = self._reduce(cand)
                if residual is not None:
                    red, lv, lead = residual
                    self.unit_basis.append((red, t.inv(red), lv, lead))

    def _expected_dim(self) -> int:
        t = self.t
        if t.kind == CYCLOTOMIC:
            d_i = t.deg // t.level_rel_e[self.i]
            zeta_in = 1
        else:
            d_i = t.p**self.i
            zeta_in = 0
        return d_i + 1 + zeta_in

    def class_of(self, x: LFElement) -> Array:
        t = self.t
        p = t.p
        if x.is_zero:
            raise ValueError("zero has no class")
        v = t.level_val(self.i, x)
        unit = t.mul(x, t.powi(t.inv(self.pi_i), v))
        tpart = t.teichmuller(t.residue(unit))
        one_unit = t.mul(unit, t.inv(tpart))
        coords, residual = self._reduce(one_unit)
        if residual is not None:
            raise AssertionError("element escaped the computed class basis")
        out = np.zeros(self.dim, dtype=np.int64)
        out[0] = v % p
        out[1:] = coords % p
        return out


# ---------------------------------------------------------------------------
# public constructors and datum extraction


def make_tower(p: int, kind: str, n: int, precision: int) -> LocalTower:
    """Build and validate a tower; rejects non-cyclic configurations."""
    return LocalTower(p, kind, n, precision)


def pth_power_class_basis(tower: LocalTower, i: int):
    """(basis elements of J(K_i), coordinate function) for a tower level."""
    basis = tower.class_basis(i)

    def class_of(x: LFElement) -> Array:
        return tower.class_of(i, x)

    return basis, class_of


def kummer_generators(tower: LocalTower) -> list[LFElement]:
    """The norm-coherent chain (a_{n-1}, ..., a_0); cyclotomic towers only.

    a_{n-1} is the Kummer generator of the top step (zeta^p, whose p-th
    root generates K over K_{n-1}); the rest are successive norms down
    the tower.  Each step is checked at the class level: a_i is not a
    p-th power in its own field, and it becomes one a level up.
    """
    if tower.kind != CYCLOTOMIC:
        raise ValueError("Kummer generators require xi_p in the base")
    n = tower.n
    chain = [tower.zeta(tower.p)]
    for i in range(n - 1, 0, -1):
        chain.append(tower.norm(chain[-1], i, i - 1))
    for k, a in enumerate(chain):
        i = n - 1 - k
        if not np.any(tower.class_of(i, a)):
            raise AssertionError(f"a_{i} is a p-th power in its own field")
        if np.any(tower.class_of(i + 1, a)):
            raise AssertionError(f"a_{i} does not become a p-th power at level {i + 1}")
    return chain


def _a_classes(tower: LocalTower) -> dict[int, Array]:
    chain = kummer_generators(tower)
    return {
        tower.n - 1 - k: tower.class_of(tower.n - 1 - k, a)
        for k, a in enumerate(chain)
    }


def build_datum(tower: LocalTower) -> GaloisDatum:
    """Extract the full class-level datum from a tower."""
    p, n = tower.p, tower.n
    xi = tower.kind == CYCLOTOMIC
    bases = [tower.class_basis(i) for i in range(n + 1)]
    dims = [len(b) for b in bases]
    dim = dims[n]

    sigma = np.zeros((dim, dim), dtype=np.int64)
    for t, b in enumerate(bases[n]):
        sigma[:, t] = tower.class_of(n, tower.galois(b, 1))
    jmod = gmod.make_module(p, n, sigma)

    a_cls = _a_classes(tower) if xi else {}

    levels = []
    for i in range(n + 1):
        di = dims[i]
        sigma_i = np.zeros((di, di), dtype=np.int64)
        eps = np.zeros((dim, di), dtype=np.int64)
        for t, b in enumerate(bases[i]):
            sigma_i[:, t] = tower.class_of(i, tower.galois(b, 1))
            eps[:, t] = tower.class_of(n, b)
        norm = np.zeros((di, dim), dtype=np.int64)
        for t, b in enumerate(bases[n]):
            norm[:, t] = tower.class_of(i, tower.norm(b, n, i))
        inter = {}
        for j in range(i):
            mtx = np.zeros((dims[j], di), dtype=np.int64)
            for t, b in enumerate(bases[i]):
                mtx[:, t] = tower.class_of(j, tower.norm(b, i, j))
            inter[j] = mtx
        space = gmod.make_module(p, i, sigma_i)
        levels.append(
            LevelData(
                space=space,
                eps=eps,
                norm=norm,
                inter_norm=inter,
                a_class=a_cls.get(i),
            )
        )

    minus_one = None
    if p == 2 and n == 1:
        minus_one = _minus_one_is_norm(tower, levels[0])
    return GaloisDatum(
        p=p, n=n, J=jmod, levels=levels, xi_in_F=xi, minus_one_is_norm=minus_one
    )


def _minus_one_is_norm(tower: LocalTower, level0: LevelData) -> bool:
    """Decide -1 in N(K^x) at the class level (norm groups of local fields
    contain the p-th powers, so the class image decides membership)."""
    target = tower.class_of(0, tower.from_int(-1))
    if not np.any(target):
        return True
    return fl.image(level0.norm, tower.p).contains(target)


def root_norm_crosscheck(
    tower: LocalTower, alpha: LFElement, gamma: LFElement, k: LFElement, i: int
) -> bool:
    """Check the norm-compatibility identity for a root of N(alpha).

    Requires alpha^(sigma-1) = gamma * k^p with gamma at level i < n (and
    n > 1 when p = 2).  Chooses the p-th root of N_{K/F}(alpha) through
    the S-operator expression and compares

        (N_{K/F}(alpha)^(1/p))^(sigma-1)  vs
        N_{K/F}(k) * N_{K_i/F}(gamma)^(p^(n-i-1)).
    """
    p, n = tower.p, tower.n
    if p == 2 and n == 1:
        raise ValueError("the identity requires n > 1 when p = 2")
    if not 0 <= i < n:
        raise ValueError("gamma must sit at a proper level")
    sig_alpha = tower.mul(tower.galois(alpha, 1), tower.inv(alpha))
    if not tower.eq(sig_alpha, tower.mul(gamma, tower.powi(k, p))):
        raise ValueError("precondition alpha^(sigma-1) = gamma * k^p fails")

    def s_operator(x: LFElement) -> LFElement:
        # x^S with S = sum_j (p^n - 1 - j) sigma^j, j = 0..p^n-2
        out = tower.one
        for j in range(p**n - 1):
            out = tower.mul(out, tower.powi(tower.galois(x, j), p**n - 1 - j))
        return out

    gamma_s = s_operator(gamma)
    try:
        root_gamma_s = tower.pth_root(gamma_s)
    except NotPthPower as exc:
        raise ValueError(f"gamma^S is not a p-th power: {exc}") from exc
    root = tower.mul(
        tower.mul(s_operator(k), tower.powi(alpha, p ** (n - 1))), root_gamma_s
    )
    lhs = tower.mul(tower.galois(root, 1), tower.inv(root))
    rhs = tower.mul(
        tower.norm(k, n, 0), tower.powi(tower.norm(gamma, i, 0), p ** (n - i - 1))
    )
    return tower.eq(lhs, rhs)


def sample_norm_identity_cases(
    tower: LocalTower, i: int, count: int, seed: int = 0
) -> list[tuple[LFElement, LFElement, LFElement]]:
    """Seeded (alpha, gamma, k) triples with alpha^(sigma-1) = gamma * k^p.

    Works at the class level: picks a target class in the intersection of
    the level-i image with the image of sigma - 1, solves the class-level
    twist equation for alpha's class, lifts both to field elements through
    the basis representatives, and extracts k with pth_root.
    """
    rng = random.Random(seed)
    p, n = tower.p, tower.n
    eps = _eps_matrix(tower, i)
    basis_i = tower.class_basis(i)
    basis_n = tower.class_basis(n)

    # sigma and eps at the class level
    dim = tower.dim_class_space(n)
    sigma_cls = np.zeros((dim, dim), dtype=np.int64)
    for t, b in enumerate(basis_n):
        sigma_cls[:, t] = tower.class_of(n, tower.galois(b, 1))
    shift = (sigma_cls - fl.identity(dim)) % p
    target_space = fl.sub_intersect(fl.image(eps, p), fl.image(shift, p))
    if target_space.dim == 0:
        raise RuntimeError(f"no norm-identity classes exist at level {i}")

    def lift(coords, basis):
        out_el = tower.one
        for c, b in zip(coords, basis):
            if int(c) % p:
                out_el = tower.mul(out_el, tower.powi(b, int(c)))
        return out_el

    out = []
    attempts = 0
    while len(out) < count and attempts < 100 * count:
        attempts += 1
        weights = [rng.randrange(p) for _ in range(target_space.dim)]
        c_beta = np.zeros(dim, dtype=np.int64)
        for wgt, row in zip(weights, target_space.basis):
            c_beta = (c_beta + wgt * row) % p
        if not np.any(c_beta):
            continue
        x = fl.solve(shift, c_beta, p)
        g = fl.solve(eps, c_beta, p)
        if x is None or g is None:
            continue
        # a random p-th power diversifies alpha without moving the classes
        u = tower.from_poly([rng.randrange(p**2) for _ in range(tower.deg)])
        if u.is_zero or u.val != 0:
            u = tower.one
        alpha = tower.mul(lift(x, basis_n), tower.powi(u, p))
        gamma = lift(g, basis_i)
        beta = tower.mul(tower.galois(alpha, 1), tower.inv(alpha))
        try:
            k = tower.pth_root(tower.mul(beta, tower.inv(gamma)))
        except NotPthPower:
            continue
        out.append((alpha, gamma, k))
    if len(out) < count:
        raise RuntimeError(f"sampled only {len(out)} of {count} cases")
    return out


def _eps_matrix(tower: LocalTower, i: int) -> Array:
    basis_i = tower.class_basis(i)
    dim = tower.dim_class_space(tower.n)
    eps = np.zeros((dim, len(basis_i)), dtype=np.int64)
    for t, b in enumerate(basis_i):
        eps[:, t] = tower.class_of(tower.n, b)
    return eps
