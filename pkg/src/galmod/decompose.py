"""Constructive decomposition of J and verification of every clause.

decompose() builds the direct-sum decomposition the structure theorems
promise: free summands Y_i of cyclic modules of dimension p^i at every
level, plus the exceptional summand X of dimension p^m + 1 when a
primitive p-th root of unity sits in the base.  verify() re-checks each
theorem clause independently and corollary3_check() exercises the
restriction table for the invariant m.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from . import fp_linalg as fl
from . import gmod
from .datum import (
    NEG_INF,
    GaloisDatum,
    HypothesisError,
    InconsistencyError,
    e_ranks,
    exceptional_search,
    level_from_str,
    level_str,
    norm_filtration,
    restrict,
    theorem3_level_raw,
    validate,
)
from .fp_linalg import Array, Subspace


@dataclass(eq=False)
class Decomposition:
    """The computed answer: m, the X generator, and the Y generators.

    m is None in the theorem-1 case (no X summand), NEG_INF or a level
    otherwise.  y_generators holds (level, coords) pairs; the generator at
    level i spans a cyclic module of dimension p^i.
    """

    p: int
    n: int
    m: int | float | None
    x_generator: Array | None
    y_generators: list[tuple[int, Array]]

    def y_ranks(self) -> list[int]:
        ranks = [0] * (self.n + 1)
        for lvl, _ in self.y_generators:
            ranks[lvl] += 1
        return ranks

    def block_multiset(self) -> list[int]:
        blocks = [self.p**lvl for lvl, _ in self.y_generators]
        if self.x_generator is not None:
            blocks.append(1 if self.m == NEG_INF else self.p ** int(self.m) + 1)
        blocks.sort(reverse=True)
        return blocks


def _theorem_case(d: GaloisDatum) -> str:
    """'T1' or 'T2' according to the hypotheses the datum satisfies."""
    if not d.xi_in_F:
        return "T1"
    if d.p == 2 and d.n == 1:
        if d.minus_one_is_norm is None:
            raise HypothesisError(
                "p=2, n=1 with unknown minus_one_is_norm: cannot pick a theorem case"
            )
        return "T2" if d.minus_one_is_norm else "T1"
    return "T2"


def decompose(d: GaloisDatum) -> Decomposition:
    """Build the decomposition following the constructive proofs.

    Raises InconsistencyError when the certification fails, which on
    validated input means the datum does not come from a genuine field
    extension ("non-realizable datum").
    """
    violations = validate(d)
    if violations:
        raise ValueError("invalid datum: " + "; ".join(violations))
    p, n = d.p, d.n
    case = _theorem_case(d)

    m = None
    x_gen = None
    x_space = None
    x_fixed_line = None
    if case == "T2":
        report = exceptional_search(d)
        m = report.m
        x_gen = report.delta
        x_space = gmod.cyclic_submodule(d.J, x_gen)
        x_fixed = fl.sub_intersect(x_space, d.fixed(0))
        if x_fixed.dim != 1:
            raise InconsistencyError("X has a fixed part of dimension != 1")
        x_fixed_line = x_fixed

    filtration = norm_filtration(d)

    covered = fl.Echelon(p, d.J.dim)
    if x_fixed_line is not None and m != NEG_INF:
        for row in x_fixed_line.basis:
            covered.add(row)

    y_generators: list[tuple[int, Array]] = []
    for i in range(n, -1, -1):
        v_i = filtration[i]
        covered_in_v = fl.sub_intersect(
            v_i, fl.span(p, d.J.dim, covered.matrix())
        )
        fresh = fl.sub_complement(v_i, covered_in_v)
        lift_op = d.op_pow(p**i - 1)
        source = d.eps_image(i)
        for z in fresh.basis:
            w = fl.solve_in_space(lift_op, source, z)
            if w is None:
                raise InconsistencyError(
                    f"norm class at level {i} has no preimage inside im(eps_{i})"
                )
            if gmod.length(d.J, w) != p**i:
                raise InconsistencyError(
                    f"level-{i} generator has length {gmod.length(d.J, w)} != p^{i}"
                )
            y_generators.append((i, w))
            covered.add(z)

    dec = Decomposition(p=p, n=n, m=m, x_generator=x_gen, y_generators=y_generators)

    # final certification: direct sum and span
    parts = [gmod.cyclic_submodule(d.J, w) for _, w in y_generators]
    if x_space is not None:
        parts.append(x_space)
    if not gmod.independent_sum_check(d.J, parts):
        raise InconsistencyError("non-realizable datum: summands are not independent")
    total = sum(part.dim for part in parts)
    if total != d.J.dim:
        raise InconsistencyError(
            f"non-realizable datum: summands span {total} of {d.J.dim} dimensions"
        )
    return dec


def _y_span(d: GaloisDatum, dec: Decomposition) -> Subspace:
    rows = [gmod.cyclic_submodule(d.J, w).basis for _, w in dec.y_generators]
    if not rows:
        return fl.zero_space(d.p, d.J.dim)
    return fl.span(d.p, d.J.dim, np.concatenate(rows, axis=0))


def predicted_subfield_image(dec: Decomposition, d: GaloisDatum, i: int) -> Subspace:
    """The theorem's right-hand side for [K_i^x], assembled from the
    computed summands; 0 <= i < n."""
    if not 0 <= i < d.n:
        raise ValueError(f"level {i} out of range 0..{d.n - 1}")
    if dec.p != d.p or dec.n != d.n:
        raise ValueError("decomposition does not match the datum")
    p = d.p
    y_span = _y_span(d, dec)
    y_fixed = fl.sub_intersect(y_span, d.fixed(i))
    if dec.m is None:
        return y_fixed
    x_space = gmod.cyclic_submodule(d.J, dec.x_generator)
    if dec.m == NEG_INF or int(dec.m) <= i:
        x_part = fl.apply_to_space(d.op_pow(1), x_space)
    else:
        mm = int(dec.m)
        k = 1 + (p**mm - p**i)  # (sigma-1) (sigma^(p^i)-1)^(p^(m-i)-1) on J
        x_part = fl.apply_to_space(d.op_pow(k), x_space)
    return fl.sub_sum(x_part, y_fixed)


def verify(dec: Decomposition, d: GaloisDatum) -> dict:
    """Re-check every theorem clause; returns {clause id: bool} plus notes.

    Clause ids are stable: T.direct-sum, T.span, T2.dimX, T.K{i} for the
    subfield images, C.rank.{i} and C2.rank-shift for the rank identities,
    C.normimage.{i} for the norm subspace clauses, KS.blocks for the
    block-multiset cross-check.
    """
    p, n = d.p, d.n
    report: dict[str, bool] = {}
    notes: list[str] = []

    parts = [gmod.cyclic_submodule(d.J, w) for _, w in dec.y_generators]
    x_space = None
    if dec.x_generator is not None:
        x_space = gmod.cyclic_submodule(d.J, dec.x_generator)
        parts.append(x_space)
    try:
        indep = gmod.independent_sum_check(d.J, parts)
    except (ValueError, AssertionError) as exc:
        indep = False
        notes.append(f"independence check failed: {exc}")
    report["T.direct-sum"] = bool(indep)
    total = sum(part.dim for part in parts)
    report["T.span"] = total == d.J.dim

    if dec.m is not None:
        expected_x = 1 if dec.m == NEG_INF else p ** int(dec.m) + 1
        report["T2.dimX"] = x_space is not None and x_space.dim == expected_x
    for lvl, w in dec.y_generators:
        if gmod.length(d.J, w) != p**lvl:
            notes.append(f"generator at level {lvl} has wrong length")
            report["T.span"] = False

    for i in range(n):
        try:
            predicted = predicted_subfield_image(dec, d, i)
            report[f"T.K{i}"] = predicted == d.eps_image(i)
        except ValueError as exc:
            report[f"T.K{i}"] = False
            notes.append(f"level {i}: {exc}")

    try:
        e = e_ranks(d)
    except InconsistencyError as exc:
        notes.append(str(exc))
        e = None
    ranks = dec.y_ranks()
    if e is None:
        report["C.ranks"] = False
    else:
        for i in range(n + 1):
            if dec.m is not None and dec.m != NEG_INF and int(dec.m) == i:
                report["C2.rank-shift"] = 1 + ranks[i] == e[i]
            else:
                report[f"C.rank.{i}"] = ranks[i] == e[i]

    # norm-image clauses: V_i = (Y_i + ... + Y_n)^G, plus X^G when i <= m
    filtration = norm_filtration(d)
    fixed0 = d.fixed(0)
    for i in range(n + 1):
        ech = fl.Echelon(p, d.J.dim)
        for lvl, w in dec.y_generators:
            if lvl >= i:
                line = (d.op_pow(p**lvl - 1) @ w) % p
                ech.add(line)
        include_x = (
            x_space is not None
            and dec.m is not None
            and dec.m != NEG_INF
            and i <= int(dec.m)
        )
        if include_x:
            xg_fixed = fl.sub_intersect(x_space, fixed0)
            for row in xg_fixed.basis:
                ech.add(row)
        lhs = fl.span(p, d.J.dim, ech.matrix())
        report[f"C.normimage.{i}"] = lhs == filtration[i]

    jt = gmod.jordan_type(d.J)
    report["KS.blocks"] = dec.block_multiset() == jt

    report["_notes"] = notes  # type: ignore[assignment]
    return report


def all_clauses_pass(report: dict) -> bool:
    return all(bool(v) for k, v in report.items() if not k.startswith("_"))


def corollary3_check(d: GaloisDatum, subtowers: dict[int, GaloisDatum] | None = None) -> dict:
    """Check the restriction table for the invariant.

    Part (1): for every 0 <= j < n the invariant of K/K_j (computed on
    restrict(d, j) through the hypothesis-free characterization) must be
    m - j for j <= m and -inf beyond, and identically -inf when
    m = -inf.  Part (2) runs only when companion data for the sub-towers
    K_j/F is supplied and asserts their invariant is -inf.
    """
    report: dict = {}
    m = theorem3_level_raw(d)
    for j in range(d.n):
        sub = restrict(d, j)
        got = theorem3_level_raw(sub)
        if m == NEG_INF:
            expected = NEG_INF
        elif j <= int(m):
            expected = int(m) - j
        else:
            expected = NEG_INF
        report[f"C3.1.j{j}"] = got == expected
    if subtowers:
        for j, sub_d in sorted(subtowers.items()):
            got = theorem3_level_raw(sub_d)
            report[f"C3.2.j{j}"] = got == NEG_INF
    else:
        report["_notes"] = ["part (2) skipped: no sub-tower data supplied"]
    return report


# ---------------------------------------------------------------------------
# JSON interchange


def decomposition_to_json(dec: Decomposition) -> dict:
    return {
        "p": dec.p,
        "n": dec.n,
        "m": level_str(dec.m),
        "x_generator": None
        if dec.x_generator is None
        else [int(x) for x in dec.x_generator],
        "y_generators": [
            {"level": int(lvl), "coords": [int(x) for x in w]}
            for lvl, w in dec.y_generators
        ],
    }


def decomposition_from_json(obj: dict) -> Decomposition:
    try:
        p = int(obj["p"])
        n = int(obj["n"])
        m = level_from_str(obj["m"])
        xg = obj.get("x_generator")
        x_arr = None if xg is None else np.asarray(xg, dtype=np.int64) % p
        ys = [
            (int(item["level"]), np.asarray(item["coords"], dtype=np.int64) % p)
            for item in obj["y_generators"]
        ]
    except (KeyError, TypeError) as exc:
        raise ValueError(f"malformed decomposition JSON: {exc}") from exc
    return Decomposition(p=p, n=n, m=m, x_generator=x_arr, y_generators=ys)


def load_decomposition(path: str) -> Decomposition:
    with open(path, "r", encoding="utf-8") as fh:
        return decomposition_from_json(json.load(fh))


def save_decomposition(dec: Decomposition, path: str):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(decomposition_to_json(dec), fh, indent=1, sort_keys=False)
        fh.write("\n")
