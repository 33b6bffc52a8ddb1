"""Emit cross-language test vectors for clients that re-implement signing.

Covers seed derivation, addresses, canonical tx encoding and hashing,
game payload encodings, the default genesis identity, and the report and
login signature messages. A browser client that reproduces these bytes
exactly can interoperate with the chain.
"""

import argparse
import json
import sys

from chainclass import codec, config as config_mod, game, vm
from chainclass.chain import build_genesis
from chainclass.node import build_tx
from chainclass.tx import DEPLOY_ADDRESS


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", help="default stdout")
    args = parser.parse_args()

    cfg = config_mod.load_config()
    admin = cfg.account("admin")
    team1 = cfg.account("team1")
    game_cfg = cfg.game_config()
    game_addr = vm.contract_address(admin.address, 0)

    accounts = []
    for name in ("admin", "scheduler", "team1", "team2"):
        acct = cfg.account(name)
        accounts.append({
            "name": name,
            "seed": codec.to_hex(config_mod.dev_seed(name)),
            "pubkey": codec.to_hex(acct.keypair.public_bytes),
            "address": codec.to_hex(acct.address),
        })

    plan = game.Plan((
        (900, 600, 0, 300),
        (400, 200, 0, 0),
        (0, 100, 0, 0),
    ))
    adjustment = game.Adjustment(
        keywords={0: ("price", "best")},
        target_weights={"students": 2, "professionals": 1},
        spend_delta=((10, -10, 0, 0), (0, 0, 0, 0), (0, 0, 0, 0)),
    )

    txs = []
    for desc, keypair, nonce, contract, method, tx_args, gas in (
        ("deploy game", admin.keypair, 0, DEPLOY_ADDRESS, "deploy",
         vm.encode_deploy_args(game.GAME_CODE_ID,
                               cfg.account("scheduler").address), 200_000),
        ("submit plan", team1.keypair, 0, game_addr, "plan",
         plan.encode(), 200_000),
        ("adjust", team1.keypair, 1, game_addr, "adjust",
         adjustment.encode(), 200_000),
        ("respond to event", team1.keypair, 2, game_addr, "respond",
         b"\x02", 200_000),
        ("buy report", team1.keypair, 3, game_addr, "buy_report",
         codec.enc_u64(2), 200_000),
    ):
        tx = build_tx(keypair, nonce, contract, method, tx_args, gas,
                      cfg.gas_price)
        txs.append({
            "desc": desc,
            "nonce": nonce,
            "contract": codec.to_hex(contract),
            "method": method,
            "args": codec.to_hex(tx_args),
            "gas_limit": str(gas),
            "gas_price": str(cfg.gas_price),
            "sender": codec.to_hex(tx.sender),
            "signing_bytes": codec.to_hex(tx.signing_bytes()),
            "signature": codec.to_hex(tx.signature),
            "wire": codec.to_hex(tx.wire()),
            "tx_hash": codec.to_hex(tx.tx_hash),
        })

    genesis_block, genesis_state = build_genesis(
        cfg.alloc(), timestamp=cfg.genesis_timestamp)

    report_round = 2
    report_msg = (b"chainclass/report/v1" + codec.enc_u64(report_round)
                  + team1.address)
    challenge = bytes(range(32))
    login_msg = b"chainclass/login/v1" + challenge

    doc = {
        "seed_tag": config_mod.DEV_SEED_TAG.decode(),
        "accounts": accounts,
        "game_address": codec.to_hex(game_addr),
        "config_digest": codec.to_hex(game_cfg.digest()),
        "config_encoded": codec.to_hex(game_cfg.encode()),
        "genesis": {
            "hash": codec.to_hex(genesis_block.block_hash),
            "state_root": codec.to_hex(genesis_state.root()),
            "timestamp": cfg.genesis_timestamp,
        },
        "transactions": txs,
        "report_signature": {
            "tag": "chainclass/report/v1",
            "round": report_round,
            "team": codec.to_hex(team1.address),
            "message": codec.to_hex(report_msg),
            "signature": codec.to_hex(team1.keypair.sign(report_msg)),
        },
        "login_signature": {
            "tag": "chainclass/login/v1",
            "challenge": codec.to_hex(challenge),
            "message": codec.to_hex(login_msg),
            "signature": codec.to_hex(team1.keypair.sign(login_msg)),
        },
    }
    text = json.dumps(doc, indent=2) + "\n"
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
        print(f"wrote {args.out}", file=sys.stderr)
    else:
        sys.stdout.write(text)


if __name__ == "__main__":
    main()
