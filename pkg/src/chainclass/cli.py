"""Operator command line.

Verbs: ``node run``, ``sim run``, ``bench consensus``, ``chain export``,
``chain verify``, ``keys new|addr|sign``, ``game deploy``, ``config show``.
Configuration precedence is flags > environment (CHAINCLASS_*) > file >
built-in defaults. Exit codes: 0 success, 1 validation error, 2 runtime
error.
"""

from __future__ import annotations

import argparse
import getpass
import json
import sys
import threading
import time

from chainclass import codec, config as config_mod
from chainclass.errors import ChainClassError


class CliError(Exception):
    """Validation failure; maps to exit code 1."""


def _parse_set(pairs) -> dict:
    """--set a.b=value pairs into a nested override document."""
    doc = {}
    for pair in pairs or ():
        if "=" not in pair:
            raise CliError(f"--set expects key=value, got {pair!r}")
        path, raw = pair.split("=", 1)
        try:
            value = json.loads(raw)
        except json.JSONDecodeError:
            value = raw
        node = doc
        keys = path.split(".")
        for key in keys[:-1]:
            node = node.setdefault(key, {})
        node[keys[-1]] = value
    return doc


def _load_cfg(args) -> config_mod.EffectiveConfig:
    try:
        return config_mod.load_config(
            path=getattr(args, "config_file", None),
            overrides=_parse_set(getattr(args, "set", None)),
        )
    except (OSError, KeyError, ValueError, ChainClassError) as exc:
        raise CliError(f"bad configuration: {exc}")


def _add_config_flags(parser) -> None:
    parser.add_argument("--config-file", metavar="PATH",
                        help="JSON config file merged over defaults")
    parser.add_argument("--set", action="append", metavar="KEY=VALUE",
                        help="override one config key (repeatable)")


def _passphrase(args, confirm: bool = False) -> str:
    if args.passphrase is not None:
        return args.passphrase
    phrase = getpass.getpass("passphrase: ")
    if confirm:
        again = getpass.getpass("repeat passphrase: ")
        if phrase != again:
            raise CliError("passphrases do not match")
    return phrase


# -- commands -----------------------------------------------------------------


def cmd_config_show(args) -> int:
    cfg = _load_cfg(args)
    print(json.dumps(cfg.doc, indent=2, sort_keys=True))
    return 0


def cmd_node_run(args) -> int:
    from chainclass import api
    from chainclass.node import Node

    cfg = _load_cfg(args)
    account = cfg.account(args.account)
    node = Node(args.node_id, account.keypair, cfg)
    block_time = args.block_time if args.block_time is not None else float(
        cfg.api.get("block_time_s", 0))
    instamine = block_time == 0 if args.instamine is None else args.instamine

    if block_time > 0:
        def producer_loop():
            while True:
                time.sleep(block_time)
                if node.is_proposer() and node.pending_txs():
                    node.produce_block()

        thread = threading.Thread(target=producer_loop, daemon=True)
        thread.start()

    print(f"node {args.node_id} as {args.account} "
          f"({cfg.consensus_kind}), instamine={instamine}")
    api.serve(node, cfg, host=args.host, port=args.port, instamine=instamine)
    return 0


def cmd_sim_run(args) -> int:
    from chainclass import netsim

    try:
        scenario = netsim.Scenario.load(args.scenario)
        result = netsim.run_scenario(
            scenario, consensus=args.consensus, nodes=args.nodes,
            seed=args.seed,
        )
    except OSError as exc:
        raise CliError(f"cannot read scenario: {exc}")
    except ChainClassError as exc:
        raise CliError(str(exc))

    transcript = result.transcript_bytes()
    if args.transcript:
        with open(args.transcript, "wb") as fh:
            fh.write(transcript)
    else:
        sys.stdout.write(transcript.decode())
    if args.save_chain:
        from chainclass.chain import save_chain
        save_chain(result.net.nodes["node0"].chain, args.save_chain)
    summary = result.summary()
    out = json.dumps(summary, indent=None if args.json else 2, sort_keys=True)
    print(out, file=sys.stderr)
    if not summary["converged"]:
        raise CliError("nodes did not converge")
    return 0


def cmd_bench_consensus(args) -> int:
    from chainclass import consensus

    print(consensus.CSV_HEADER)
    kinds = args.kind.split(",") if args.kind else ["poa", "pos", "pow"]
    for kind in kinds:
        kind = kind.strip()
        if kind not in ("poa", "pos", "pow"):
            raise CliError(f"unknown consensus kind {kind!r}")
        metrics = consensus.benchmark(
            kind, args.blocks, txs_per_block=args.txs,
            difficulty_bits=args.difficulty_bits,
        )
        print(metrics.csv_row())
    return 0


def cmd_chain_export(args) -> int:
    from chainclass.chain import export_json, load_chain

    cfg = _load_cfg(args)
    try:
        chain = load_chain(args.file, cfg.params, cfg.gas_schedule,
                           cfg.admin_address, cfg.block_gas_limit)
    except (OSError, ChainClassError) as exc:
        raise CliError(f"cannot load chain: {exc}")
    doc = export_json(chain)
    text = json.dumps(doc, indent=2, sort_keys=True)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
        print(f"exported {chain.height + 1} blocks to {args.out}")
    else:
        print(text)
    return 0


def cmd_chain_verify(args) -> int:
    from chainclass.chain import load_chain

    cfg = _load_cfg(args)
    try:
        chain = load_chain(args.file, cfg.params, cfg.gas_schedule,
                           cfg.admin_address, cfg.block_gas_limit)
        count = chain.verify_full()
    except OSError as exc:
        raise CliError(f"cannot read {args.file}: {exc}")
    except ChainClassError as exc:
        print(f"FAIL: {exc}")
        return 1
    print(f"OK: {count} blocks")
    return 0


def cmd_keys_new(args) -> int:
    from chainclass import wallet

    passphrase = _passphrase(args, confirm=True)
    keystore, address = wallet.generate_keypair(passphrase)
    wallet.save_keystore(args.out, keystore)
    print(codec.to_hex(address))
    return 0


def cmd_keys_addr(args) -> int:
    from chainclass import wallet

    keystore = wallet.load_keystore(args.file)
    print(codec.to_hex(keystore.address))
    return 0


def cmd_keys_sign(args) -> int:
    from chainclass import wallet

    keystore = wallet.load_keystore(args.file)
    with open(args.infile, "rb") as fh:
        payload = fh.read()
    signature = keystore.sign_payload(payload, _passphrase(args))
    print(codec.to_hex(signature))
    return 0


def cmd_game_deploy(args) -> int:
    """Deploy and configure the game through a running node's API."""
    import urllib.error
    import urllib.request

    from chainclass import game, vm
    from chainclass.node import build_tx
    from chainclass.tx import DEPLOY_ADDRESS

    cfg = _load_cfg(args)
    admin = cfg.account("admin")
    game_cfg = cfg.game_config()

    def fetch(path):
        with urllib.request.urlopen(args.api + path, timeout=10) as resp:
            return json.loads(resp.read())

    def post(path, payload: bytes):
        req = urllib.request.Request(args.api + path, data=payload, method="POST")
        try:
            with urllib.request.urlopen(req, timeout=10) as resp:
                return json.loads(resp.read())
        except urllib.error.HTTPError as exc:
            detail = json.loads(exc.read()).get("detail", {})
            raise CliError(f"{path} failed: {detail.get('error')}: "
                           f"{detail.get('message')}")

    try:
        account = fetch(f"/accounts/{codec.to_hex(admin.address)}")
    except (urllib.error.URLError, OSError) as exc:
        raise CliError(f"cannot reach {args.api}: {exc}")
    nonce = int(account["nonce"])
    game_addr = vm.contract_address(admin.address, nonce)
    scheduler = cfg.account(cfg.doc["game"].get("scheduler", "scheduler"))
    deploy = build_tx(admin.keypair, nonce, DEPLOY_ADDRESS, "deploy",
                      vm.encode_deploy_args(game.GAME_CODE_ID, scheduler.address),
                      200_000, cfg.gas_price)
    post("/tx", codec.to_hex(deploy.wire()).encode())
    configure = build_tx(admin.keypair, nonce + 1, game_addr, "configure",
                         game_cfg.encode(), 200_000, cfg.gas_price)
    post("/admin/config", codec.to_hex(configure.wire()).encode())
    if args.open_round:
        advance = build_tx(admin.keypair, nonce + 2, game_addr, "advance",
                           b"", 200_000, cfg.gas_price)
        post("/admin/advance", codec.to_hex(advance.wire()).encode())
    doc = {
        "game": codec.to_hex(game_addr),
        "deploy_tx": codec.to_hex(deploy.tx_hash),
        "rounds_total": game_cfg.rounds_total,
        "weekly_budget": str(game_cfg.weekly_budget),
    }
    print(json.dumps(doc, indent=2) if args.json else codec.to_hex(game_addr))
    return 0


# -- wiring ---------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="chainclass",
        description="mini-blockchain marketing simulation toolkit",
    )
    top = parser.add_subparsers(dest="group", metavar="COMMAND")

    node_p = top.add_parser("node", help="run a node with its HTTP service")
    node_sub = node_p.add_subparsers(dest="verb", metavar="VERB")
    run_p = node_sub.add_parser("run", help="host a node and serve the API")
    _add_config_flags(run_p)
    run_p.add_argument("--account", default="authority1",
                       help="producer identity from the accounts table")
    run_p.add_argument("--node-id", default="node0")
    run_p.add_argument("--host", default=None)
    run_p.add_argument("--port", type=int, default=None)
    run_p.add_argument("--block-time", type=float, default=None,
                       help="seconds between blocks; 0 mines on demand")
    run_p.add_argument("--instamine", action="store_true", default=None)
    run_p.set_defaults(func=cmd_node_run)

    sim_p = top.add_parser("sim", help="run headless multi-node scenarios")
    sim_sub = sim_p.add_subparsers(dest="verb", metavar="VERB")
    sim_run = sim_sub.add_parser("run", help="execute a scenario file")
    sim_run.add_argument("--scenario", required=True, metavar="PATH")
    sim_run.add_argument("--consensus", choices=("pow", "pos", "poa"))
    sim_run.add_argument("--nodes", type=int)
    sim_run.add_argument("--seed", type=int)
    sim_run.add_argument("--transcript", metavar="PATH",
                         help="write the transcript here instead of stdout")
    sim_run.add_argument("--save-chain", metavar="PATH",
                         help="write the producing node's chain log")
    sim_run.add_argument("--json", action="store_true",
                         help="compact machine-readable summary")
    sim_run.set_defaults(func=cmd_sim_run)

    bench_p = top.add_parser("bench", help="measure consensus engines")
    bench_sub = bench_p.add_subparsers(dest="verb", metavar="VERB")
    bench_c = bench_sub.add_parser("consensus", help="seal blocks, emit CSV")
    bench_c.add_argument("--kind", help="pow, pos, poa or a comma list")
    bench_c.add_argument("--blocks", type=int, default=50)
    bench_c.add_argument("--txs", type=int, default=0,
                         help="filler txs per block")
    bench_c.add_argument("--difficulty-bits", type=int, default=12)
    bench_c.set_defaults(func=cmd_bench_consensus)

    chain_p = top.add_parser("chain", help="inspect saved chain logs")
    chain_sub = chain_p.add_subparsers(dest="verb", metavar="VERB")
    exp = chain_sub.add_parser("export", help="chain log to JSON")
    _add_config_flags(exp)
    exp.add_argument("--file", required=True, metavar="PATH")
    exp.add_argument("--out", metavar="PATH")
    exp.set_defaults(func=cmd_chain_export)
    ver = chain_sub.add_parser("verify", help="re-execute and check a log")
    _add_config_flags(ver)
    ver.add_argument("--file", required=True, metavar="PATH")
    ver.set_defaults(func=cmd_chain_verify)

    keys_p = top.add_parser("keys", help="keystore management")
    keys_sub = keys_p.add_subparsers(dest="verb", metavar="VERB")
    knew = keys_sub.add_parser("new", help="generate an encrypted keystore")
    knew.add_argument("--out", required=True, metavar="PATH")
    knew.add_argument("--passphrase", help="omit to be prompted")
    knew.set_defaults(func=cmd_keys_new)
    kaddr = keys_sub.add_parser("addr", help="print a keystore's address")
    kaddr.add_argument("--file", required=True, metavar="PATH")
    kaddr.set_defaults(func=cmd_keys_addr)
    ksign = keys_sub.add_parser("sign", help="sign a payload file")
    ksign.add_argument("--file", required=True, metavar="PATH")
    ksign.add_argument("--in", dest="infile", required=True, metavar="PATH")
    ksign.add_argument("--passphrase", help="omit to be prompted")
    ksign.set_defaults(func=cmd_keys_sign)

    game_p = top.add_parser("game", help="game contract operations")
    game_sub = game_p.add_subparsers(dest="verb", metavar="VERB")
    gdep = game_sub.add_parser("deploy", help="deploy and configure the game")
    _add_config_flags(gdep)
    gdep.add_argument("--config", dest="config_file", metavar="PATH",
                      help="alias for --config-file")
    gdep.add_argument("--api", default="http://127.0.0.1:8545",
                      help="base URL of a running node service")
    gdep.add_argument("--open-round", action="store_true",
                      help="also advance into round 1 planning")
    gdep.add_argument("--json", action="store_true")
    gdep.set_defaults(func=cmd_game_deploy)

    config_p = top.add_parser("config", help="effective configuration")
    config_sub = config_p.add_subparsers(dest="verb", metavar="VERB")
    cshow = config_sub.add_parser("show", help="print the merged config")
    _add_config_flags(cshow)
    cshow.set_defaults(func=cmd_config_show)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors; map to 1 (validation), keep
        # --help's 0
        return 0 if exc.code == 0 else 1
    func = getattr(args, "func", None)
    if func is None:
        parser.print_usage(sys.stderr)
        return 1
    try:
        return func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except KeyboardInterrupt:
        return 130
    except ChainClassError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # operational failures: exit 2, not a traceback
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
