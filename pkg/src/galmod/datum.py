"""The Galois datum: everything the decomposition theorems consume.

A GaloisDatum packages the top module J with, for every level i of the
tower, the class space of the intermediate field, the map induced by
inclusion (eps), the maps induced by norms, and the Kummer class chain
a_i when the base contains a primitive p-th root of unity.

The level invariant m lives in {-inf, 0, 1, ..., n-1}; the sentinel
NEG_INF orders below every integer and m (+) 1 is 0 at the sentinel.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from . import fp_linalg as fl
from . import gmod
from .fp_linalg import Array, Subspace
from .gmod import GModule

NEG_INF = float("-inf")


class HypothesisError(ValueError):
    """A theorem's hypothesis is not met (or not known) for this datum."""


class InconsistencyError(RuntimeError):
    """Axiom-valid data violated a theorem: the datum cannot come from a field."""


def dotplus1(m) -> int:
    """m (+) 1 with the convention (-inf) (+) 1 = 0."""
    if m == NEG_INF:
        return 0
    return int(m) + 1


def level_str(m) -> str:
    if m is None:
        return "n/a"
    if m == NEG_INF:
        return "-inf"
    return str(int(m))


def level_from_str(s):
    if s in (None, "n/a"):
        return None
    if s == "-inf":
        return NEG_INF
    return int(s)


@dataclass(frozen=True, eq=False)
class LevelData:
    space: GModule            # J(K_i) with its induced generator action
    eps: Array                # J(K_i) -> J, induced by inclusion
    norm: Array               # J -> J(K_i), induced by the norm from K
    inter_norm: dict          # {j: matrix J(K_i) -> J(K_j)} for j < i
    a_class: Array | None     # class of a_i in J(K_i); present iff xi_in_F, absent at level n


@dataclass(eq=False)
class GaloisDatum:
    p: int
    n: int
    J: GModule
    levels: list[LevelData]
    xi_in_F: bool
    minus_one_is_norm: bool | None = None
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    # -- cached helpers -------------------------------------------------

    def op_pow(self, k: int) -> Array:
        key = ("op_pow", k)
        if key not in self._cache:
            self._cache[key] = gmod.op_pow(self.J, k)
        return self._cache[key]

    def fixed(self, i: int) -> Subspace:
        key = ("fixed", i)
        if key not in self._cache:
            self._cache[key] = gmod.fixed_points(self.J, i)
        return self._cache[key]

    def eps_image(self, i: int) -> Subspace:
        key = ("eps_image", i)
        if key not in self._cache:
            self._cache[key] = fl.image(self.levels[i].eps, self.p)
        return self._cache[key]

    def norm_kernel(self, i: int) -> Subspace:
        key = ("norm_kernel", i)
        if key not in self._cache:
            self._cache[key] = fl.kernel(self.levels[i].norm, self.p)
        return self._cache[key]


@dataclass(frozen=True, eq=False)
class ExceptionalReport:
    m: int | float                 # level or NEG_INF
    delta: Array | None            # length-minimized exceptional class in J
    norm_class: Array | None       # its image in J(F)


# ---------------------------------------------------------------------------
# validation


def validate(d: GaloisDatum) -> list[str]:
    """Check the datum axioms; returns a list of violations (empty = valid)."""
    v: list[str] = []
    p, n, dim = d.p, d.n, d.J.dim
    if len(d.levels) != n + 1:
        return [f"expected {n + 1} levels, found {len(d.levels)}"]

    top = d.levels[n]
    if top.space.dim != dim or not np.array_equal(top.space.sigma, d.J.sigma):
        v.append("levels[n].space is not J")
    if not np.array_equal(top.eps, fl.identity(dim)):
        v.append("levels[n].eps is not the identity")
    if not np.array_equal(top.norm, fl.identity(dim)):
        v.append("levels[n].norm is not the identity")
    if top.a_class is not None:
        v.append("levels[n] carries an a-class")

    for i, lv in enumerate(d.levels):
        di = lv.space.dim
        if lv.eps.shape != (dim, di):
            v.append(f"level {i}: eps shape {lv.eps.shape} != ({dim},{di})")
            continue
        if lv.norm.shape != (di, dim):
            v.append(f"level {i}: norm shape {lv.norm.shape} != ({di},{dim})")
            continue
        if lv.space.n != i:
            v.append(f"level {i}: space height {lv.space.n} != {i}")
            continue

        # equivariance
        if not np.array_equal(
            (lv.eps @ lv.space.sigma) % p, (d.J.sigma @ lv.eps) % p
        ):
            v.append(f"level {i}: eps is not equivariant")
        if not np.array_equal(
            (lv.norm @ d.J.sigma) % p, (lv.space.sigma @ lv.norm) % p
        ):
            v.append(f"level {i}: norm is not equivariant")

        # image of eps lands in the H_i-fixed part
        if not d.fixed(i).contains_space(d.eps_image(i)):
            v.append(f"level {i}: image(eps) not inside the H_{i}-fixed subspace")

        # eps o norm = (sigma-1)^(p^n - p^i) on J
        if not np.array_equal((lv.eps @ lv.norm) % p, d.op_pow(p**n - p**i)):
            v.append(f"level {i}: eps o norm != (sigma-1)^(p^{n}-p^{i})")

        # inter-norm coherence: norm_j = inter_norm[i->j] o norm_i
        for j, mtx in lv.inter_norm.items():
            if j >= i:
                v.append(f"level {i}: inter_norm target {j} is not below {i}")
                continue
            if not np.array_equal((mtx @ lv.norm) % p, d.levels[j].norm % p):
                v.append(f"level {i}: inter_norm to {j} breaks norm coherence")

        # kernel of eps
        ker = fl.kernel(lv.eps, p)
        if d.xi_in_F and i < n:
            if lv.a_class is None:
                v.append(f"level {i}: xi in F but a-class missing")
            else:
                a_line = fl.span(p, di, lv.a_class.reshape(1, di))
                if a_line.dim != 1:
                    v.append(f"level {i}: a-class is zero")
                elif ker != a_line:
                    v.append(f"level {i}: kernel(eps) != <a_class>")
        else:
            if lv.a_class is not None and (not d.xi_in_F):
                v.append(f"level {i}: a-class present without xi in F")
            if ker.dim != 0:
                v.append(f"level {i}: eps has nontrivial kernel without an a-class")

        # a-chain under inter-norms
        if lv.a_class is not None:
            for j, mtx in lv.inter_norm.items():
                aj = d.levels[j].a_class
                if aj is None:
                    continue
                if not np.array_equal((mtx @ lv.a_class) % p, aj % p):
                    v.append(f"level {i}: inter_norm does not send a_{i} to a_{j}")

        # exact sequence at J^{H_i} (levels below the top only)
        if i < n:
            fixed_i = d.fixed(i)
            # norms of fixed elements land in <a_i>
            norm_of_fixed = fl.apply_to_space(lv.norm, fixed_i)
            if lv.a_class is not None:
                a_line = fl.span(p, di, lv.a_class.reshape(1, di))
                if not a_line.contains_space(norm_of_fixed):
                    v.append(f"level {i}: norms of fixed classes leave <a_{i}>")
            else:
                if norm_of_fixed.dim != 0:
                    v.append(f"level {i}: norms of fixed classes are nonzero without xi")
            # kernel of the norm on the fixed part is exactly image(eps)
            ker_norm_fixed = fl.sub_intersect(fixed_i, d.norm_kernel(i))
            if ker_norm_fixed != d.eps_image(i):
                v.append(f"level {i}: exactness fails at the H_{i}-fixed subspace")

    # fixed submodule shape: dim(J^G / im eps_0) <= 1, gap 1 iff a fixed
    # class with nontrivial norm exists
    fixed0 = d.fixed(0)
    im0 = d.eps_image(0)
    if im0.dim > fixed0.dim or not fixed0.contains_space(im0):
        v.append("image(eps_0) not inside J^G")
    else:
        gap = fixed0.dim - im0.dim
        norm0_on_fixed = fl.apply_to_space(d.levels[0].norm, fixed0)
        if gap > 1:
            v.append(f"dim(J^G / im eps_0) = {gap} > 1")
        elif gap == 1 and norm0_on_fixed.dim == 0:
            v.append("J^G exceeds im eps_0 but no fixed class has a nontrivial norm")
        elif gap == 0 and norm0_on_fixed.dim != 0:
            v.append("fixed class with nontrivial norm despite J^G = im eps_0")

    return v


# ---------------------------------------------------------------------------
# norm-rank vector


def e_ranks(d: GaloisDatum) -> list[int]:
    """The vector (e_0, ..., e_n) of norm-group quotient dimensions.

    V_i is the image of (sigma-1)^(p^i - 1) on im(eps_i), realizing the
    classes of the norms from K_i; e_i = dim(V_i / V_{i+1}) and
    e_n = dim V_n.  The filtration must be nested.
    """
    p, n = d.p, d.n
    spaces = []
    for i in range(n + 1):
        op = d.op_pow(p**i - 1)
        spaces.append(fl.apply_to_space(op, d.eps_image(i)))
    for i in range(n):
        if not spaces[i].contains_space(spaces[i + 1]):
            raise InconsistencyError(f"filtration not nested at level {i}")
    e = [spaces[i].dim - spaces[i + 1].dim for i in range(n)]
    e.append(spaces[n].dim)
    return e


def norm_filtration(d: GaloisDatum) -> list[Subspace]:
    """The nested subspaces V_0 >= V_1 >= ... >= V_n used by e_ranks."""
    p, n = d.p, d.n
    return [
        fl.apply_to_space(d.op_pow(p**i - 1), d.eps_image(i)) for i in range(n + 1)
    ]


# ---------------------------------------------------------------------------
# the invariant m and exceptional classes


def check_definition_hypotheses(d: GaloisDatum):
    """The hypotheses under which the exceptional level is defined."""
    if not d.xi_in_F:
        raise HypothesisError("xi_p not in F: no exceptional elements are defined")
    if d.p == 2 and d.n == 1:
        if d.minus_one_is_norm is None:
            raise HypothesisError(
                "p=2, n=1: minus_one_is_norm is unknown; refusing to guess"
            )
        if not d.minus_one_is_norm:
            raise HypothesisError(
                "p=2, n=1 and -1 is not a norm: the theorem-2 hypothesis fails"
            )


def candidate_space(d: GaloisDatum, i) -> Subspace:
    """S_i = {x : (sigma-1) x in im eps_i}; S_{-inf} = ker(sigma-1)."""
    if i == NEG_INF:
        return d.fixed(0)
    return fl.preimage(d.op_pow(1), d.eps_image(int(i)))


def _norm0_nonvanishing(d: GaloisDatum, s: Subspace) -> Array | None:
    """First canonical basis vector of s with nonzero norm class, if any."""
    norm0 = d.levels[0].norm
    for row in s.basis:
        if np.any((norm0 @ row) % d.p):
            return row.copy()
    return None


def raw_exceptional_level(d: GaloisDatum):
    """min{i : the norm-to-F class map does not vanish on S_i}.

    This is the class-level minimum underlying the definition of the
    invariant; it needs xi_p in the base but no p=2 bookkeeping, which is
    exactly how the restriction corollary consumes it.
    """
    if not d.xi_in_F:
        raise HypothesisError("xi_p not in F")
    for i in [NEG_INF, *range(d.n)]:
        if _norm0_nonvanishing(d, candidate_space(d, i)) is not None:
            return i
    return None


def exceptional_search(d: GaloisDatum) -> ExceptionalReport:
    """Find m = i(K/F) and a length-minimized exceptional class delta.

    delta satisfies norm_0(delta) != 0 and (sigma-1) delta in im(eps_m);
    after reduction modulo S_m n ker(norm_0) its length is p^m + 1
    (with p^(-inf) = 0), and any other outcome on validated data is
    reported as an inconsistency.
    """
    check_definition_hypotheses(d)
    m = None
    delta = None
    for i in [NEG_INF, *range(d.n)]:
        delta = _norm0_nonvanishing(d, candidate_space(d, i))
        if delta is not None:
            m = i
            break
    if m is None:
        raise InconsistencyError(
            "no exceptional class found although the hypotheses guarantee one"
        )
    delta = _minimize_length(d, m, delta)
    expected = 1 if m == NEG_INF else d.p ** int(m) + 1
    got = gmod.length(d.J, delta)
    if got != expected:
        raise InconsistencyError(
            f"exceptional class has length {got}, expected p^m+1 = {expected}"
        )
    norm_class = (d.levels[0].norm @ delta) % d.p
    return ExceptionalReport(m=m, delta=delta, norm_class=norm_class)


def _minimize_length(d: GaloisDatum, m, delta: Array) -> Array:
    """Shorten delta by elements of S_m n ker(norm_0); deterministic.

    delta - w lies in ker(sigma-1)^k iff (sigma-1)^k delta lies in the
    image (sigma-1)^k W, so the minimal length is found by walking the
    operator images instead of repeatedly solving for kernels.
    """
    w_space = fl.sub_intersect(candidate_space(d, m), d.norm_kernel(0))
    if w_space.dim == 0:
        return delta
    nilp = d.op_pow(1)
    delta_k = delta % d.p
    w_rows = w_space.basis
    k = 0
    while True:
        ech = fl.Echelon(d.p, d.J.dim)
        for row in w_rows:
            ech.add(row)
        if ech.contains(delta_k):
            break
        delta_k = (nilp @ delta_k) % d.p
        w_rows = (w_rows @ nilp.T) % d.p
        k += 1
        if k > d.J.dim:
            raise AssertionError("length minimization failed to terminate")
    # witness: solve (sigma-1)^k (delta - w) = 0 with w in W
    op_k = d.op_pow(k)
    t_k = fl.kernel(op_k, d.p)
    stacked = np.concatenate([t_k.basis, w_space.basis], axis=0)
    coeffs = fl.solve(stacked.T, delta, d.p)
    if coeffs is None:
        raise AssertionError("length minimization witness solve failed")
    w_part = (w_space.basis.T @ coeffs[t_k.dim :]) % d.p
    return (delta - w_part) % d.p


def i_via_theorem3(d: GaloisDatum):
    """m computed from the third equivalent condition of the level theorem:
    the least s such that the norm to level s (+) 1 has a nonzero value on
    some H_{s (+) 1}-fixed class.  Always equals exceptional_search(d).m on
    data coming from a genuine extension."""
    check_definition_hypotheses(d)
    for s in [NEG_INF, *range(d.n)]:
        i1 = dotplus1(s)
        fixed = d.fixed(i1)
        if fixed.dim == 0:
            continue
        if np.any((d.levels[i1].norm @ fixed.basis.T) % d.p):
            return s
    raise InconsistencyError("no level qualifies; J must be zero")


def theorem3_level_raw(d: GaloisDatum):
    """Same minimum as i_via_theorem3 but gated only on xi_p, the form the
    restriction corollary needs for quadratic sub-extensions at p = 2."""
    if not d.xi_in_F:
        raise HypothesisError("xi_p not in F")
    for s in [NEG_INF, *range(d.n)]:
        i1 = dotplus1(s)
        fixed = d.fixed(i1)
        if fixed.dim == 0:
            continue
        if np.any((d.levels[i1].norm @ fixed.basis.T) % d.p):
            return s
    raise InconsistencyError("no level qualifies; J must be zero")


# ---------------------------------------------------------------------------
# restriction to a sub-extension K/K_j


def restrict(d: GaloisDatum, j: int) -> GaloisDatum:
    """The datum for K/K_j: same ambient J, generator sigma^(p^j), levels
    j..n relabeled 0..n-j.

    For p = 2 with n-j = 1 the -1-is-a-norm flag of the quadratic
    sub-extension is recomputed from the fixed-submodule criterion: it
    holds exactly when some sigma^(p^j)-fixed class has a nonzero norm
    class at level j.
    """
    if not 0 <= j < d.n:
        raise ValueError(f"restriction level {j} out of range 0..{d.n - 1}")
    if j == 0:
        return d
    p, n = d.p, d.n
    n2 = n - j
    sigma2 = fl.mat_pow(d.J.sigma, p**j, p)
    j2 = gmod.make_module(p, n2, sigma2)
    new_levels = []
    for i2 in range(n2 + 1):
        old = d.levels[j + i2]
        space2 = gmod.make_module(p, i2, fl.mat_pow(old.space.sigma, p**j, p))
        inter2 = {
            t - j: old.inter_norm[t] for t in old.inter_norm if t >= j
        }
        new_levels.append(
            LevelData(
                space=space2,
                eps=old.eps,
                norm=old.norm,
                inter_norm=inter2,
                a_class=old.a_class,
            )
        )
    minus_one = None
    if p == 2 and n2 == 1:
        fixed = fl.kernel((sigma2 - fl.identity(d.J.dim)) % p, p)
        hit = fixed.dim > 0 and bool(
            np.any((d.levels[j].norm @ fixed.basis.T) % p)
        )
        minus_one = hit
    return GaloisDatum(
        p=p,
        n=n2,
        J=j2,
        levels=new_levels,
        xi_in_F=d.xi_in_F,
        minus_one_is_norm=minus_one,
    )


# ---------------------------------------------------------------------------
# norm-equation solving for cyclic submodules


def solve_norm_equation(d: GaloisDatum, gamma) -> Array | None:
    """An alpha whose full norm operator image spans the fixed line of the
    cyclic module of gamma, when the linear system admits one.

    Solves (sigma-1)^(p^n - 1) alpha = (sigma-1)^(l(gamma)-1) gamma.
    Returns None for gamma = 0 (degenerate fixed line) or when the system
    is inconsistent.
    """
    gamma = fl.asmod(gamma, d.p)
    ell = gmod.length(d.J, gamma)
    if ell == 0:
        return None
    target = (d.op_pow(ell - 1) @ gamma) % d.p
    return fl.solve(d.op_pow(d.p**d.n - 1), target, d.p)


# ---------------------------------------------------------------------------
# JSON interchange


def _mat_list(a: Array) -> list:
    return [[int(x) for x in row] for row in a]


def datum_to_json(d: GaloisDatum) -> dict:
    levels = []
    for lv in d.levels:
        levels.append(
            {
                "dim": lv.space.dim,
                "sigma_i": _mat_list(lv.space.sigma),
                "eps": _mat_list(lv.eps),
                "norm": _mat_list(lv.norm),
                "inter_norm": {
                    str(j): _mat_list(m) for j, m in sorted(lv.inter_norm.items())
                },
                "a_class": None
                if lv.a_class is None
                else [int(x) for x in lv.a_class],
            }
        )
    return {
        "p": d.p,
        "n": d.n,
        "xi_in_F": d.xi_in_F,
        "minus_one_is_norm": d.minus_one_is_norm,
        "sigma": _mat_list(d.J.sigma),
        "levels": levels,
    }


def datum_from_json(obj: dict) -> GaloisDatum:
    try:
        p = int(obj["p"])
        n = int(obj["n"])
        xi = bool(obj["xi_in_F"])
        minus_one = obj.get("minus_one_is_norm")
        sigma = np.asarray(obj["sigma"], dtype=np.int64)
        jmod = gmod.make_module(p, n, sigma)
        levels = []
        for i, lv in enumerate(obj["levels"]):
            space = gmod.make_module(p, i, np.asarray(lv["sigma_i"], dtype=np.int64))
            if space.dim != int(lv["dim"]):
                raise ValueError(f"levels[{i}].dim disagrees with sigma_i")
            eps = fl.asmod(np.asarray(lv["eps"], dtype=np.int64).reshape(jmod.dim, space.dim), p)
            norm = fl.asmod(np.asarray(lv["norm"], dtype=np.int64).reshape(space.dim, jmod.dim), p)
            inter = {}
            for k, m in lv.get("inter_norm", {}).items():
                inter[int(k)] = fl.asmod(np.asarray(m, dtype=np.int64), p)
            a_cls = lv.get("a_class")
            a_arr = None if a_cls is None else fl.asmod(np.asarray(a_cls, dtype=np.int64), p)
            levels.append(
                LevelData(space=space, eps=eps, norm=norm, inter_norm=inter, a_class=a_arr)
            )
    except (KeyError, TypeError) as exc:
        raise ValueError(f"malformed datum JSON: {exc}") from exc
    if minus_one is not None:
        minus_one = bool(minus_one)
    return GaloisDatum(
        p=p, n=n, J=jmod, levels=levels, xi_in_F=xi, minus_one_is_norm=minus_one
    )


def load_datum(path: str) -> GaloisDatum:
    with open(path, "r", encoding="utf-8") as fh:
        return datum_from_json(json.load(fh))


def save_datum(d: GaloisDatum, path: str):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(datum_to_json(d), fh, indent=1, sort_keys=False)
        fh.write("\n")
