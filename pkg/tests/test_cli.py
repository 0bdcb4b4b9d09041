"""End-to-end CLI flows: synth -> decompose -> verify, local, jordan."""

import json


from galmod.cli import main


def read(path):
    with open(path, "r", encoding="utf-8") as fh:
        return fh.read()


def test_synth_decompose_verify_roundtrip(tmp_path):
    datum = tmp_path / "datum.json"
    side = tmp_path / "side.json"
    dec = tmp_path / "dec.json"
    rc = main([
        "synth", "--p", "3", "--n", "2", "--m", "1", "--e", "1,1,1",
        "--xi", "--seed", "5", "--out", str(datum), "--sidecar", str(side),
    ])
    assert rc == 0
    rc = main(["decompose", "--in", str(datum), "--out", str(dec), "--format", "json"])
    assert rc == 0
    expected = json.loads(read(side))["expected"]
    got = json.loads(read(dec))
    assert got["m"] == expected["m"]
    ranks = [0] * 3
    for item in got["y_generators"]:
        ranks[item["level"]] += 1
    assert ranks == expected["y_ranks"]
    rc = main(["verify", "--in", str(datum), "--decomposition", str(dec)])
    assert rc == 0


def test_verify_fails_on_mutation(tmp_path, capsys):
    datum = tmp_path / "datum.json"
    dec = tmp_path / "dec.json"
    main(["synth", "--p", "2", "--n", "2", "--m", "n/a", "--e", "1,1,1",
          "--out", str(datum)])
    main(["decompose", "--in", str(datum), "--out", str(dec)])
    obj = json.loads(read(dec))
    obj["y_generators"] = obj["y_generators"][1:]
    (dec).write_text(json.dumps(obj))
    rc = main(["verify", "--in", str(datum), "--decomposition", str(dec)])
    assert rc == 1
    out = capsys.readouterr().out
    assert "FAIL" in out and "T.span" in out


def test_synth_rejects_bad_params(tmp_path, capsys):
    rc = main([
        "synth", "--p", "3", "--n", "2", "--m", "1", "--e", "1,0,1",
        "--xi", "--out", str(tmp_path / "x.json"),
    ])
    assert rc == 2
    assert "invalid parameters" in capsys.readouterr().err


def test_decompose_rejects_malformed_json(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text('{"p": 3}')
    rc = main(["decompose", "--in", str(bad)])
    assert rc == 2


def test_byte_identical_outputs(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    args = ["synth", "--p", "2", "--n", "3", "--m", "2", "--e", "1,1,1,1",
            "--xi", "--seed", "9"]
    main(args + ["--out", str(a)])
    main(args + ["--out", str(b)])
    assert read(a) == read(b)


def test_local_pipeline(tmp_path, capsys):
    datum = tmp_path / "local.json"
    rc = main(["local", "--p", "3", "--kind", "unramified", "--n", "1",
               "--precision", "40", "--out", str(datum)])
    assert rc == 0
    rc = main(["decompose", "--in", str(datum)])
    assert rc == 0
    out = capsys.readouterr().out
    assert "blocks" in out


def test_local_cyclotomic_pipeline(tmp_path, capsys):
    datum = tmp_path / "cyclo.json"
    rc = main(["local", "--p", "3", "--kind", "cyclotomic", "--n", "1",
               "--precision", "60", "--out", str(datum)])
    assert rc == 0
    rc = main(["decompose", "--in", str(datum), "--format", "table"])
    assert rc == 0
    out = capsys.readouterr().out
    assert "m " in out or "m  " in out


def test_invariants_command(tmp_path, capsys):
    datum = tmp_path / "datum.json"
    main(["synth", "--p", "3", "--n", "1", "--m", "0", "--e", "1,1",
          "--xi", "--out", str(datum)])
    rc = main(["invariants", "--in", str(datum)])
    assert rc == 0
    out = capsys.readouterr().out
    assert "exact-sequence.L0" in out
    assert "FAIL" not in out


def test_jordan_command(tmp_path, capsys):
    mod = tmp_path / "mod.json"
    mod.write_text(json.dumps({
        "p": 2, "n": 1,
        "sigma": [[1, 0, 0], [1, 1, 0], [0, 0, 1]],
    }))
    rc = main(["jordan", "--in", str(mod)])
    assert rc == 0
    assert "[2, 1]" in capsys.readouterr().out


def test_selftest_quick(capsys):
    rc = main(["selftest", "--quick"])
    assert rc == 0
    out = capsys.readouterr().out
    assert "0 failures" in out
