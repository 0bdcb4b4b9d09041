"""Parameter legality, generator determinism, sidecar bookkeeping."""

import json

import pytest

from galmod.datum import NEG_INF, datum_to_json, validate
from galmod.synth import (
    SynthParams,
    params_from_json,
    params_to_json,
    random_params,
    sidecar,
    synthesize,
)


def test_params_require_rank_at_m():
    with pytest.raises(ValueError, match="e_1"):
        SynthParams(p=3, n=2, m=1, e=(1, 0, 1)).check()


def test_params_m_range():
    with pytest.raises(ValueError, match="out of range"):
        SynthParams(p=3, n=2, m=2, e=(1, 1, 1)).check()


def test_params_no_x_needs_theorem1_flags():
    with pytest.raises(ValueError):
        SynthParams(p=3, n=1, m=None, e=(1, 1), xi_in_F=True).check()
    # p=2, n=1 with -1 not a norm is the legitimate second route
    SynthParams(
        p=2, n=1, m=None, e=(1, 1), xi_in_F=True, minus_one_is_norm=False
    ).check()


def test_params_x_needs_xi():
    with pytest.raises(ValueError, match="xi_in_F"):
        SynthParams(p=3, n=1, m=0, e=(1, 1), xi_in_F=False).check()


def test_params_p2n1_forces_minus_inf():
    with pytest.raises(ValueError, match="-inf"):
        SynthParams(p=2, n=1, m=0, e=(1, 1), minus_one_is_norm=True).check()
    SynthParams(p=2, n=1, m=NEG_INF, e=(1, 1), minus_one_is_norm=True).check()


def test_params_empty_module_rejected():
    with pytest.raises(ValueError, match="empty"):
        SynthParams(p=3, n=1, m=None, e=(0, 0), xi_in_F=False).check()


def test_dim_accounting():
    params = SynthParams(p=3, n=1, m=0, e=(1, 1))
    # X has dimension p^m + 1 = 2; the rank shift leaves no Y_0 blocks
    assert params.y_ranks() == [0, 1]
    assert params.dim_j() == 2 + 3
    params = SynthParams(p=3, n=2, m=NEG_INF, e=(1, 1, 1))
    assert params.dim_j() == 1 + 1 + 3 + 9


def test_single_free_block_datum():
    d = synthesize(SynthParams(p=2, n=1, m=None, e=(0, 1), xi_in_F=False))
    assert d.J.dim == 2
    assert validate(d) == []


def test_determinism_same_bytes():
    params = SynthParams(p=3, n=2, m=0, e=(1, 1, 1), shuffle_seed=42)
    a = json.dumps(datum_to_json(synthesize(params)), sort_keys=False)
    b = json.dumps(datum_to_json(synthesize(params)), sort_keys=False)
    assert a == b


def test_shuffle_changes_coordinates_not_answer():
    base = SynthParams(p=3, n=2, m=0, e=(1, 1, 1))
    shuffled = SynthParams(p=3, n=2, m=0, e=(1, 1, 1), shuffle_seed=4)
    da, db = synthesize(base), synthesize(shuffled)
    assert json.dumps(datum_to_json(da)) != json.dumps(datum_to_json(db))
    assert validate(db) == []


def test_random_params_deterministic_and_legal():
    p1 = random_params(2, 3, 17)
    p2 = random_params(2, 3, 17)
    assert p1 == p2
    seen_m = set()
    for seed in range(300):
        params = random_params(2, 3, seed)
        params.check()
        assert 1 <= params.dim_j() <= 120
        if params.m is not None and params.m != NEG_INF:
            assert params.e[int(params.m)] >= 1
        seen_m.add(str(params.m))
    assert len(seen_m) >= 4  # hits -inf, n/a and several finite levels


def test_random_params_validate_clean_bulk():
    # every sampled parameter set yields an axiom-clean datum
    for seed in range(1000):
        params = random_params(2, 3, seed)
        assert validate(synthesize(params)) == [], params


def test_sidecar_contents():
    params = SynthParams(p=3, n=1, m=0, e=(1, 1), shuffle_seed=7)
    side = sidecar(params)
    assert side["expected"]["m"] == "0"
    assert side["expected"]["y_ranks"] == [0, 1]
    assert side["expected"]["dim_J"] == 5
    assert side["expected"]["block_multiset"] == [3, 2]
    back = params_from_json(side["params"])
    assert back == params


def test_params_json_roundtrip_minus_inf():
    params = SynthParams(p=2, n=2, m=NEG_INF, e=(1, 0, 1))
    back = params_from_json(params_to_json(params))
    assert back.m == NEG_INF and back == params
