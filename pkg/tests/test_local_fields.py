"""p-adic towers: arithmetic, Galois action, class spaces, datum extraction."""

import json

import numpy as np
import pytest

from galmod.datum import datum_to_json, e_ranks, exceptional_search, i_via_theorem3, validate
from galmod.decompose import all_clauses_pass, decompose, verify
from galmod.local_fields import (
    PrecisionError,
    build_datum,
    kummer_generators,
    make_tower,
    root_norm_crosscheck,
    sample_norm_identity_cases,
)

@pytest.fixture(scope="module")
def unram3():
    return make_tower(3, "unramified", 1, 40)


@pytest.fixture(scope="module")
def cyclo3_1():
    return make_tower(3, "cyclotomic", 1, 60)


def test_make_tower_rejects_bad_input():
    with pytest.raises(ValueError):
        make_tower(3, "eisenstein", 1, 60)
    with pytest.raises(ValueError):
        make_tower(2, "unramified", 1, 40)
    with pytest.raises(PrecisionError):
        make_tower(3, "cyclotomic", 1, 5)
    with pytest.raises(ValueError):
        make_tower(4, "unramified", 1, 40)


def test_unramified_frobenius_order(unram3):
    tw = unram3
    x = tw.from_poly([1, 1, 0])
    assert tw.eq(tw.galois(x, 3), x)
    assert not tw.eq(tw.galois(x, 1), x)


def test_mul_inverse(unram3):
    tw = unram3
    x = tw.from_poly([2, 1, 1])
    assert tw.eq(tw.mul(x, tw.inv(x)), tw.one)


def test_frobenius_on_teichmuller(unram3):
    tw = unram3
    # sigma fixes Teichmuller representatives up to the p-th power map
    omega = tw.teichmuller((0, 1, 0))
    assert tw.eq(tw.galois(omega, 1), tw.powi(omega, 3))


def test_norms_are_fixed(unram3):
    tw = unram3
    x = tw.from_poly([1, 2, 0])
    nx = tw.norm(x, 1, 0)
    assert tw.eq(tw.galois(nx, 1), nx)


def test_unramified_class_dims(unram3):
    assert [unram3.dim_class_space(i) for i in range(2)] == [2, 4]


def test_class_of_pth_powers_is_zero(unram3):
    tw = unram3
    for coeffs in ([1, 1, 0], [2, 0, 1], [1, 2, 2]):
        v = tw.from_poly(coeffs)
        assert not np.any(tw.class_of(1, tw.powi(v, 3)))
    # and the class map is additive on products
    a = tw.from_poly([1, 1, 0])
    b = tw.from_poly([2, 1, 1])
    lhs = tw.class_of(1, tw.mul(a, b))
    rhs = (tw.class_of(1, a) + tw.class_of(1, b)) % 3
    assert np.array_equal(lhs, rhs)


def test_is_pth_power_crosschecks_class(unram3):
    tw = unram3
    v = tw.from_poly([1, 1, 2])
    cube = tw.powi(v, 3)
    assert tw.is_pth_power(cube)
    assert not tw.is_pth_power(tw.mul(cube, tw.pi))
    root = tw.pth_root(cube)
    assert tw.eq(tw.powi(root, 3), cube)


def test_unramified_datum(unram3):
    d = build_datum(unram3)
    assert validate(d) == []
    assert d.xi_in_F is False
    assert e_ranks(d) == [1, 1]
    dec = decompose(d)
    assert dec.m is None
    assert dec.block_multiset() == [3, 1]
    assert all_clauses_pass(verify(dec, d))


def test_cyclotomic_generator_action(cyclo3_1):
    tw = cyclo3_1
    z = tw.zeta()
    assert tw.eq(tw.galois(z, 1), tw.powi(z, 4))
    assert tw.eq(tw.galois(z, 3), z)
    # zeta_3 = zeta_9^3 is fixed by sigma
    z3 = tw.zeta_p()
    assert tw.eq(tw.galois(z3, 1), z3)


def test_binomial_valuation_pattern(cyclo3_1):
    tw = cyclo3_1
    # (1 + pi)^3 - 1 = 3 pi + 3 pi^2 + pi^3: the pi^3 term leads (e = 6)
    z = tw.zeta()
    diff = tw.add(tw.powi(z, 3), tw.neg(tw.one))
    assert diff.val == 3
    tail = tw.add(diff, tw.neg(tw.powi(tw.pi, 3)))
    assert tail.val == 7  # the 3*pi term at valuation e + 1


def test_cyclotomic_class_dims(cyclo3_1):
    assert [cyclo3_1.dim_class_space(i) for i in range(2)] == [4, 8]


def test_zeta9_is_not_a_cube(cyclo3_1):
    tw = cyclo3_1
    assert not tw.is_pth_power(tw.zeta())
    assert np.any(tw.class_of(1, tw.zeta()))


def test_kummer_chain_single_step(cyclo3_1):
    chain = kummer_generators(cyclo3_1)
    assert len(chain) == 1
    # the Kummer generator becomes a p-th power one level up (eps kills it)
    assert not np.any(cyclo3_1.class_of(1, chain[0]))


def test_cyclotomic_datum(cyclo3_1):
    d = build_datum(cyclo3_1)
    assert validate(d) == []
    assert d.xi_in_F is True
    rep = exceptional_search(d)
    assert rep.m == i_via_theorem3(d)
    dec = decompose(d)
    expected_x = 1 if dec.m == float("-inf") else 3 ** int(dec.m) + 1
    assert expected_x in dec.block_multiset()
    assert all_clauses_pass(verify(dec, d))


def test_precision_stability(cyclo3_1):
    base = json.dumps(datum_to_json(build_datum(cyclo3_1)))
    higher = json.dumps(datum_to_json(build_datum(make_tower(3, "cyclotomic", 1, 65))))
    assert base == higher


def test_root_norm_identity_fixed_alpha(cyclo3_1):
    tw = cyclo3_1
    ok = root_norm_crosscheck(tw, tw.from_int(7), tw.one, tw.one, 0)
    assert ok


def test_root_norm_identity_kummer_root(cyclo3_1):
    tw = cyclo3_1
    z = tw.zeta()
    # zeta^(sigma-1) = zeta^3 in K_0 (a unit of the base): gamma = zeta^3, k = 1
    assert root_norm_crosscheck(tw, z, tw.powi(z, 3), tw.one, 0)


def test_root_norm_identity_precondition_checked(cyclo3_1):
    tw = cyclo3_1
    with pytest.raises(ValueError, match="precondition"):
        root_norm_crosscheck(tw, tw.zeta(), tw.one, tw.one, 0)


def test_root_norm_identity_sampled(cyclo3_1):
    for alpha, gamma, k in sample_norm_identity_cases(cyclo3_1, 0, 4, seed=5):
        assert root_norm_crosscheck(cyclo3_1, alpha, gamma, k, 0)


def test_p2_cyclotomic_tower():
    tw = make_tower(2, "cyclotomic", 1, 40)
    assert [tw.dim_class_space(i) for i in range(2)] == [4, 6]
    d = build_datum(tw)
    assert validate(d) == []
    assert d.minus_one_is_norm is not None
    dec = decompose(d)
    assert all_clauses_pass(verify(dec, d))
