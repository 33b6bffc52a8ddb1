"""Play the bundled classroom scenario and print per-round standings.

Runs the deterministic multi-node simulation, then walks the producing
node's chain to show what the instructor dashboard would: scores, revenue
and market shares per closed round.
"""

import argparse
import pathlib

from chainclass import codec, game, market, units
from chainclass.codec import Reader
from chainclass.netsim import Scenario, run_scenario

DEFAULT_SCENARIO = (
    pathlib.Path(__file__).resolve().parent.parent
    / "scenarios" / "classroom-week.jsonl"
)


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--scenario", default=DEFAULT_SCENARIO)
    parser.add_argument("--consensus", choices=("pow", "pos", "poa"))
    parser.add_argument("--seed", type=int)
    args = parser.parse_args()

    scenario = Scenario.load(args.scenario)
    result = run_scenario(scenario, consensus=args.consensus, seed=args.seed)
    node = result.net.nodes["node0"]
    cfg = result.net.cfg
    state = node.chain.head_state
    game_addr = node.game_address()
    names = {cfg.account(n).address: n for n in cfg.account_names()}

    print(f"blocks: {node.chain.height}  converged: "
          f"{len(set(result.heads.values())) == 1}  "
          f"reverted txs: {len(result.reverted)}")

    for receipts in node.chain.receipts:
        for receipt in receipts:
            for topic, value in receipt.events:
                if topic != "RoundClosed":
                    continue
                rnd = Reader(value[:8]).u64()
                report = market.decode_turn_report(value[8:])
                tag = " (practice)" if rnd == 1 else ""
                event = report.event
                drew = (market.EVENT_KINDS[event.kind]
                        if event.occurred else "none")
                print(f"\nround {rnd}{tag}  event: {drew}")
                for res in report.results:
                    name = names.get(res.team, codec.to_hex(res.team)[:10])
                    shares = "/".join(f"{s / 10**6:.3f}" for s in res.shares)
                    print(f"  {name:8s} spend {res.spend_total:>6d}  "
                          f"revenue {res.revenue:>6d}  shares {shares}  "
                          f"{res.event_outcome:9s} "
                          f"{market.FEEDBACK_PHRASES[res.feedback]}")

    print("\nfinal standings (cumulative score, practice round excluded):")
    scores = []
    for team in cfg.game_config().teams:
        raw = state.get_storage(game_addr, game.k_score(team))
        score = Reader(raw).u64() if raw else 0
        scores.append((score, names.get(team, codec.to_hex(team))))
    for score, name in sorted(scores, reverse=True):
        balance = state.balance(cfg.account(name).address)
        print(f"  {name:8s} score {score:>8d}  "
              f"balance {units.format_subunits(balance)} tokens")


if __name__ == "__main__":
    main()
