"""Command line: exit codes, determinism, tamper detection, key handling."""

import json

from chainclass import cli, codec, crypto, wallet

SCENARIO_TEXT = """\
{"setup": {"consensus": "poa", "nodes": 3, "seed": 7, "rounds": 2}}
{"round": 1, "team": "team1", "spend": [[800,900,700,600],[900,800,700,600],[700,600,900,800]], "keywords": {"0": ["price","best"]}, "respond": "correct", "buy_report": true}
{"round": 1, "team": "team2", "spend": [[500,500,500,500],[500,500,500,500],[500,500,500,500]], "respond": "wrong"}
{"round": 2, "team": "team1", "spend": [[800,900,700,600],[900,800,700,600],[700,600,900,800]], "respond": "correct"}
{"round": 2, "team": "team2", "spend": [[1000,0,0,0],[0,1000,0,0],[0,0,1000,0]], "respond": "none", "buy_report": true}
"""


def write_scenario(tmp_path):
    path = tmp_path / "scenario.jsonl"
    path.write_text(SCENARIO_TEXT)
    return str(path)


# -- parser and exit codes ------------------------------------------------------

def test_help_exits_zero(capsys):
    assert cli.main(["--help"]) == 0
    assert "chainclass" in capsys.readouterr().out


def test_no_verb_prints_usage(capsys):
    assert cli.main([]) == 1
    assert "usage" in capsys.readouterr().err


def test_unknown_verb_exits_one(capsys):
    assert cli.main(["frobnicate"]) == 1


def test_bad_flag_exits_one(capsys):
    assert cli.main(["sim", "run", "--scenario", "x", "--bogus"]) == 1


# -- config show ----------------------------------------------------------------

def test_config_show_prints_effective_doc(capsys):
    assert cli.main(["config", "show"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert int(doc["chain"]["gas_price"]) == 20_000_000_000
    assert int(doc["chain"]["block_gas_limit"]) == 6_721_975
    assert doc["chain"]["consensus"] == "poa"
    assert "team1" in doc["accounts"]


def test_config_show_applies_set_overrides(capsys):
    rc = cli.main(["config", "show", "--set", "chain.gas_price=5",
                   "--set", "game.rounds=3"])
    assert rc == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["chain"]["gas_price"] == 5
    assert doc["game"]["rounds"] == 3


def test_config_show_rejects_malformed_set(capsys):
    assert cli.main(["config", "show", "--set", "nonsense"]) == 1
    assert "error" in capsys.readouterr().err


# -- sim run ---------------------------------------------------------------------

def test_sim_run_is_deterministic(tmp_path, capsys):
    scenario = write_scenario(tmp_path)
    t1, t2 = str(tmp_path / "t1.log"), str(tmp_path / "t2.log")
    assert cli.main(["sim", "run", "--scenario", scenario,
                     "--transcript", t1, "--json"]) == 0
    summary = json.loads(capsys.readouterr().err)
    assert summary["converged"] is True
    assert summary["txs_reverted"] == []
    assert cli.main(["sim", "run", "--scenario", scenario,
                     "--transcript", t2, "--json"]) == 0
    capsys.readouterr()
    with open(t1, "rb") as a, open(t2, "rb") as b:
        assert a.read() == b.read()


def test_sim_run_transcript_to_stdout(tmp_path, capsys):
    scenario = write_scenario(tmp_path)
    assert cli.main(["sim", "run", "--scenario", scenario, "--json"]) == 0
    out = capsys.readouterr().out
    records = [json.loads(line) for line in out.strip().splitlines()]
    assert any(r["event"] == "tx_submit" for r in records)
    assert any(r["event"] == "block_produced" for r in records)


def test_sim_run_missing_scenario(tmp_path, capsys):
    assert cli.main(["sim", "run", "--scenario",
                     str(tmp_path / "absent.jsonl")]) == 1
    assert "error" in capsys.readouterr().err


def test_sim_run_rejects_unknown_team(tmp_path, capsys):
    path = tmp_path / "bad.jsonl"
    path.write_text(
        '{"setup": {"consensus": "poa", "nodes": 2, "seed": 1, "rounds": 1}}\n'
        '{"round": 1, "team": "ghost", "spend": [[1,0,0,0],[0,0,0,0],[0,0,0,0]]}\n'
    )
    assert cli.main(["sim", "run", "--scenario", str(path)]) == 1


# -- chain export / verify ---------------------------------------------------------

def test_chain_verify_and_export(tmp_path, capsys):
    scenario = write_scenario(tmp_path)
    log = str(tmp_path / "chain.cclog")
    assert cli.main(["sim", "run", "--scenario", scenario, "--json",
                     "--transcript", str(tmp_path / "t.log"),
                     "--save-chain", log]) == 0
    capsys.readouterr()

    assert cli.main(["chain", "verify", "--file", log]) == 0
    out = capsys.readouterr().out
    assert out.startswith("OK: ")
    count = int(out.split()[1])
    assert count > 1

    export = str(tmp_path / "chain.json")
    assert cli.main(["chain", "export", "--file", log, "--out", export]) == 0
    assert f"exported {count} blocks" in capsys.readouterr().out
    doc = json.loads(open(export).read())
    assert len(doc["blocks"]) == count


def test_chain_verify_names_tampered_height(tmp_path, capsys):
    scenario = write_scenario(tmp_path)
    log = tmp_path / "chain.cclog"
    assert cli.main(["sim", "run", "--scenario", scenario, "--json",
                     "--transcript", str(tmp_path / "t.log"),
                     "--save-chain", str(log)]) == 0
    capsys.readouterr()
    raw = bytearray(log.read_bytes())
    raw[len(raw) // 2] ^= 0xFF
    log.write_bytes(bytes(raw))
    assert cli.main(["chain", "verify", "--file", str(log)]) == 1
    out = capsys.readouterr().out
    assert out.startswith("FAIL:")
    assert "height" in out


def test_chain_verify_missing_file(tmp_path, capsys):
    assert cli.main(["chain", "verify", "--file",
                     str(tmp_path / "absent.cclog")]) in (1, 2)


# -- keys ---------------------------------------------------------------------------

def test_keys_new_addr_sign_round_trip(tmp_path, capsys):
    ks_path = str(tmp_path / "ks.json")
    assert cli.main(["keys", "new", "--out", ks_path,
                     "--passphrase", "hunter2"]) == 0
    address = capsys.readouterr().out.strip()
    assert address.startswith("0x") and len(address) == 42

    assert cli.main(["keys", "addr", "--file", ks_path]) == 0
    assert capsys.readouterr().out.strip() == address

    payload = tmp_path / "payload.bin"
    payload.write_bytes(b"sign me")
    assert cli.main(["keys", "sign", "--file", ks_path, "--in", str(payload),
                     "--passphrase", "hunter2"]) == 0
    sig = codec.from_hex(capsys.readouterr().out.strip())
    keystore = wallet.load_keystore(ks_path)
    assert crypto.verify(keystore.public_key, b"sign me", sig)
    assert crypto.derive_address(keystore.public_key) == codec.from_hex(address)


def test_keys_sign_wrong_passphrase(tmp_path, capsys):
    ks_path = str(tmp_path / "ks.json")
    assert cli.main(["keys", "new", "--out", ks_path,
                     "--passphrase", "right"]) == 0
    payload = tmp_path / "payload.bin"
    payload.write_bytes(b"x")
    capsys.readouterr()
    assert cli.main(["keys", "sign", "--file", ks_path, "--in", str(payload),
                     "--passphrase", "wrong"]) == 2
    assert "error" in capsys.readouterr().err


def test_keys_addr_missing_file(tmp_path):
    assert cli.main(["keys", "addr", "--file",
                     str(tmp_path / "absent.json")]) == 2


# -- bench --------------------------------------------------------------------------

def test_bench_consensus_emits_csv(capsys):
    assert cli.main(["bench", "consensus", "--kind", "poa,pos",
                     "--blocks", "3"]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert lines[0].startswith("kind,")
    assert len(lines) == 3
    assert lines[1].split(",")[0] == "poa"
    assert lines[2].split(",")[0] == "pos"


def test_bench_consensus_rejects_unknown_kind(capsys):
    assert cli.main(["bench", "consensus", "--kind", "junk"]) == 1
