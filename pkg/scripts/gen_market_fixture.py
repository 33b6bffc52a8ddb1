"""Regenerate the frozen market-resolution fixture used by the test suite.

The expected values are computed here with exact Fraction arithmetic and a
local round-half-even, independently of chainclass.market, following the
documented model: per-channel sqrt(spend) * reach * keyword score, then
concentration, segment weight, and event modifier, floor-based proportional
shares with the remainder on the lexicographically smallest address, and
half-even unit rounding. The script refuses to write the fixture if the
engine under test disagrees with the oracle.
"""

import json
import math
import sys
from fractions import Fraction
from pathlib import Path

from chainclass import codec, config as config_mod, market
from chainclass.market import EventDraw, TeamInputs, resolve_round

SCALE = 10**6
HALF = SCALE // 2


def rhe(x: Fraction) -> int:
    """Round a non-negative rational to the nearest integer, ties to even."""
    floor = x.numerator // x.denominator
    frac = x - floor
    if frac > Fraction(1, 2):
        return floor + 1
    if frac < Fraction(1, 2):
        return floor
    return floor if floor % 2 == 0 else floor + 1


def mulq(a: int, b: int) -> int:
    return rhe(Fraction(a * b, SCALE))


def sqrt_fp(tokens: int) -> int:
    target = tokens * SCALE * SCALE
    r = math.isqrt(target)
    return r + 1 if (r + 1) ** 2 - target < target - r * r else r


def keyword_score(chosen, vocabulary) -> int:
    chosen_set = {w.casefold() for w in chosen}
    matches = len(chosen_set & {w.casefold() for w in vocabulary})
    denom = max(1, min(len(chosen_set), 3))
    return HALF + rhe(Fraction(HALF * min(matches, denom), denom))


def concentration(cells, kappa: int) -> int:
    flat = [c for row in cells for c in row]
    n, total = len(flat), sum(flat)
    if n == 1:
        return SCALE + kappa
    num = kappa * (n * sum(c * c for c in flat) - total * total)
    return SCALE + rhe(Fraction(num, total * total * (n - 1)))


def norm_weights(raw: dict, segments) -> dict:
    vals = {s: max(0, int(raw.get(s, 0))) for s in segments}
    total = sum(vals.values())
    if total == 0:
        return {s: SCALE for s in segments}
    n = len(segments)
    return {s: rhe(Fraction(v * n * SCALE, total)) for s, v in vals.items()}


def shares_of(values: dict) -> dict:
    addrs = sorted(values)
    total = sum(values.values())
    if total == 0:
        out = {a: SCALE // len(addrs) for a in addrs}
    else:
        out = {a: (values[a] * SCALE) // total for a in addrs}
    out[addrs[0]] += SCALE - sum(out.values())
    return out


def feedback(trend: int) -> int:
    pt = SCALE // 100
    if trend <= -5 * pt:
        return 0
    if trend < -pt:
        return 1
    if trend <= pt:
        return 2
    if trend < 5 * pt:
        return 3
    return 4


def oracle_round(gc, inputs, round_index, event, prior_shares):
    segments = sorted({p.segment for p in gc.products})
    teams = sorted(inputs)
    per_team = {}
    for t in teams:
        ti = inputs[t]
        per_team[t] = {
            "conc": concentration(ti.spend, gc.concentration_gain)
                    if ti.has_plan else SCALE,
            "kscores": [keyword_score(ti.keywords.get(c, ()), gc.channels[c].keywords)
                        for c in range(len(gc.channels))],
            "weights": norm_weights(ti.target_weights, segments),
        }

    effective = {t: [] for t in teams}
    for p, product in enumerate(gc.products):
        reach = [ch.reach.get(product.segment, 0) for ch in gc.channels]
        for t in teams:
            ti = inputs[t]
            if not ti.has_plan:
                effective[t].append(0)
                continue
            acc = 0
            for c in range(len(gc.channels)):
                term = mulq(mulq(sqrt_fp(ti.spend[p][c]), reach[c]),
                            per_team[t]["kscores"][c])
                acc += term
            mod = (gc.event_penalty
                   if event.occurred and event.product == p
                   and ti.response != event.kind else SCALE)
            for factor in (per_team[t]["conc"],
                           per_team[t]["weights"][product.segment], mod):
                acc = mulq(acc, factor)
            effective[t].append(acc)

    shares, units = [], []
    for p, product in enumerate(gc.products):
        s = shares_of({t: effective[t][p] for t in teams})
        d = gc.demand_for(product.segment, round_index)
        shares.append(s)
        units.append({t: rhe(Fraction(d * s[t], SCALE)) for t in teams})

    out = {}
    for t in teams:
        ti = inputs[t]
        revenue = sum(units[p][t] * gc.products[p].unit_price
                      for p in range(len(gc.products)))
        if not event.occurred:
            outcome = "none"
        elif ti.response == event.kind:
            outcome = "avoided"
        else:
            outcome = "penalized"
        team_shares = [shares[p][t] for p in range(len(gc.products))]
        prior = prior_shares.get(t)
        trend = (rhe(Fraction(sum(s - q for s, q in zip(team_shares, prior)),
                              len(gc.products)))
                 if prior else 0)
        out[t] = {
            "spend_total": ti.spend_total() if ti.has_plan else 0,
            "effective": effective[t],
            "shares": team_shares,
            "units": [units[p][t] for p in range(len(gc.products))],
            "revenue": revenue,
            "event_outcome": outcome,
            "feedback": feedback(trend),
        }
    seg_stats = [
        {"segment": p.segment,
         "demand_units": gc.demand_for(p.segment, round_index),
         "units_sold": sum(units[i][t] for t in teams)}
        for i, p in enumerate(gc.products)
    ]
    return out, seg_stats


def fixture_inputs(cfg):
    t = {name: cfg.account(name).address for name in
         ("team1", "team2", "team3", "team4")}
    inputs = {
        t["team1"]: TeamInputs(
            team=t["team1"],
            spend=((800, 900, 700, 600), (900, 800, 700, 600),
                   (700, 600, 900, 800)),
            keywords={0: ["price", "compare", "best"], 1: ["fun"]},
            target_weights={"students": 3, "professionals": 2, "seniors": 1},
            response=2),
        t["team2"]: TeamInputs(
            team=t["team2"],
            spend=((0, 0, 0, 0), (4000, 3000, 0, 0), (0, 0, 0, 0)),
            keywords={0: ["PRICE", "deal"]},
            response=1),
        t["team3"]: TeamInputs(team=t["team3"]),  # sat the round out
        t["team4"]: TeamInputs(
            team=t["team4"],
            spend=((500, 500, 500, 500), (500, 500, 500, 500),
                   (500, 500, 500, 500))),
    }
    prior = {
        t["team1"]: (250000, 250000, 250000),
        t["team4"]: (400000, 150000, 300000),
    }
    event = EventDraw(occurred=True, kind=2, product=1)
    return inputs, prior, event


def main() -> None:
    cfg = config_mod.load_config(environ={})
    gc = cfg.game_config()
    inputs, prior, event = fixture_inputs(cfg)
    round_index = 3

    expected, seg_stats = oracle_round(gc, inputs, round_index, event, prior)
    report = resolve_round(gc, inputs, round_index, event=event,
                           prior_shares=prior)

    mismatches = []
    for res in report.results:
        want = expected[res.team]
        got = {
            "spend_total": res.spend_total,
            "effective": list(res.effective),
            "shares": list(res.shares),
            "units": list(res.units),
            "revenue": res.revenue,
            "event_outcome": res.event_outcome,
            "feedback": res.feedback,
        }
        if got != want:
            mismatches.append((codec.to_hex(res.team), want, got))
    got_segs = [{"segment": s.segment, "demand_units": s.demand_units,
                 "units_sold": s.units_sold} for s in report.segments]
    if got_segs != seg_stats:
        mismatches.append(("segments", seg_stats, got_segs))
    if mismatches:
        for name, want, got in mismatches:
            print(f"MISMATCH {name}:\n  oracle {want}\n  engine {got}")
        sys.exit(1)

    doc = {
        "config_digest": codec.to_hex(gc.digest()),
        "round_index": round_index,
        "event": {"occurred": event.occurred, "kind": event.kind,
                  "product": event.product},
        "teams": {
            name: codec.to_hex(cfg.account(name).address)
            for name in ("team1", "team2", "team3", "team4")
        },
        "inputs": {
            codec.to_hex(ti.team): {
                "spend": [list(r) for r in ti.spend],
                "keywords": {str(c): list(w) for c, w in ti.keywords.items()},
                "target_weights": ti.target_weights,
                "response": ti.response,
            }
            for ti in inputs.values()
        },
        "prior_shares": {codec.to_hex(a): list(s) for a, s in prior.items()},
        "expected": {codec.to_hex(a): v for a, v in expected.items()},
        "segments": seg_stats,
        "report_hex": codec.to_hex(report.canonical_bytes()),
        "report_digest": codec.to_hex(report.digest()),
    }
    out = Path(__file__).resolve().parent.parent / "tests" / "fixtures" / "market_golden.json"
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")
    print(f"oracle and engine agree; wrote {out}")
    print(f"report digest {doc['report_digest']}")


if __name__ == "__main__":
    main()
