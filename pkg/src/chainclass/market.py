"""Turn-resolution engine: spend efficiency, shares, events, and reports.

All outputs are fixed-point (6 decimals, round-half-even) or whole tokens;
intermediate ratios are computed on exact integer rationals and rounded once
at each operation's boundary, so symmetry cases (uniform spend, equal teams)
come out exact and every node renders byte-identical reports.

The functional forms are deliberately the simplest ones with the intended
qualitative behaviour:

- response to spend is a square root per cell (diminishing returns),
- concentrating a fixed budget into fewer cells raises a Herfindahl-based
  multiplier between 1 and 1 + gain (targeted spend is more efficient),
- matching channel keywords scales a channel between 0.5 and 1.0,
- shares are proportional to effective spend, with an equal split when
  nobody spends.

Each form sits behind one function so alternatives can be swapped in.
"""

from __future__ import annotations

from dataclasses import dataclass

from chainclass import codec, fixedpoint as fp
from chainclass.codec import Reader
from chainclass.crypto import sha256
from chainclass.errors import NonCanonicalEncoding, ZeroSpend

EVENT_KINDS = (
    "SalesPromotionSupport",
    "GoodCause",
    "DistributionIssue",
    "TechnicalFault",
)

# One correct response per event kind, index-aligned with EVENT_KINDS.
RESPONSE_CHOICES = (
    "FundPromotion",
    "SponsorCause",
    "RerouteLogistics",
    "IssueRecall",
)

EVENT_OUTCOMES = ("none", "avoided", "penalized")

# Sales-force feedback, indexed by the share-trend quantizer (see
# feedback_index): 0 is a strong slide, 4 a strong pull.
FEEDBACK_PHRASES = (
    "field reps report customers drifting to competitors",
    "field reps sense a slight softening of interest",
    "field reps report steady interest",
    "field reps notice a clear uptick in customer interest",
    "strong pull: customers are asking for the product by name",
)

REPORT_MAGIC = b"CCRP/1"


@dataclass(frozen=True)
class EventDraw:
    occurred: bool
    kind: int = 0
    product: int = 0

    def encode(self) -> bytes:
        return (
            codec.enc_u8(1 if self.occurred else 0)
            + codec.enc_u8(self.kind)
            + codec.enc_u8(self.product)
        )

    @classmethod
    def decode(cls, data: bytes) -> "EventDraw":
        r = Reader(data)
        occurred, kind, product = r.u8(), r.u8(), r.u8()
        r.expect_end()
        if occurred not in (0, 1) or kind >= len(EVENT_KINDS):
            raise NonCanonicalEncoding("bad event draw")
        return cls(occurred=bool(occurred), kind=kind, product=product)


def draw_event(seed: bytes, q_fp: int, n_products: int) -> EventDraw:
    """Pure draw from a 256-bit seed: occurrence, kind, affected product.

    occurred iff seed/2**256 < q, compared exactly in integers; kind and
    product come from domain-separated re-hashes of the seed.
    """
    if not 0 <= q_fp <= fp.ONE:
        raise ValueError("event probability must be in [0, 1]")
    u = int.from_bytes(seed, "big")
    occurred = u * fp.SCALE < q_fp * (1 << 256)
    if not occurred:
        return EventDraw(occurred=False)
    kind = int.from_bytes(sha256(seed + b"kind"), "big") % len(EVENT_KINDS)
    product = int.from_bytes(sha256(seed + b"prod"), "big") % n_products
    return EventDraw(occurred=True, kind=kind, product=product)


def concentration_multiplier(cells, kappa_fp: int) -> int:
    """Herfindahl bonus for targeted spend, in [1, 1 + kappa].

    With spend fractions f_i over n cells, H = sum(f_i**2) and the result is
    1 + kappa * (H - 1/n) / (1 - 1/n), computed on the exact rational
    (n * sum(c**2) - T**2) / (T**2 * (n - 1)) and rounded once.
    """
    flat = [c for row in cells for c in row] if cells and isinstance(cells[0], (list, tuple)) else list(cells)
    n = len(flat)
    total = sum(flat)
    if any(c < 0 for c in flat):
        raise ValueError("negative spend cell")
    if total <= 0:
        raise ZeroSpend("no spend to concentrate")
    if n == 1:
        return fp.ONE + kappa_fp
    sum_sq = sum(c * c for c in flat)
    num = kappa_fp * (n * sum_sq - total * total)
    den = total * total * (n - 1)
    return fp.ONE + fp.div_half_even(num, den)


def keyword_score(chosen, vocabulary) -> int:
    """Channel messaging fit in [0.5, 1.0].

    Case-insensitive exact matches against the channel vocabulary; only the
    first three distinct keywords count, and the ratio is clamped so extra
    off-vocabulary picks cannot push the score above 1.
    """
    chosen_set = {w.casefold() for w in chosen}
    vocab_set = {w.casefold() for w in vocabulary}
    denom = max(1, min(len(chosen_set), 3))
    matches = min(len(chosen_set & vocab_set), denom)
    return fp.HALF + fp.div_half_even(fp.HALF * matches, denom)


def normalize_target_weights(weights: dict, segments) -> dict:
    """Scale raw weights so they average 1 across segments (neutral = 1.0).

    A team that skips targeting, or supplies all zeros, is uniform: every
    segment gets exactly 1. Weight mass is zero-sum across segments, so
    targeting one segment trades off the others.
    """
    segs = list(segments)
    raw = [max(0, int(weights.get(s, 0))) for s in segs]
    total = sum(raw)
    if total == 0:
        return {s: fp.ONE for s in segs}
    n = len(segs)
    return {
        s: fp.div_half_even(w * n * fp.ONE, total)
        for s, w in zip(segs, raw)
    }


def effective_spend(spend_row, reach_fp_row, keyword_fp_row,
                    concentration_fp: int, target_weight_fp: int,
                    event_mod_fp: int) -> int:
    """Effective spend for one (team, product): the sales-force input number.

    Per channel: sqrt(spend) * reach * keyword score; the channel sum is then
    scaled by the concentration multiplier, the segment target weight, and
    the event modifier, in that documented order.
    """
    acc = 0
    for spend, reach, score in zip(spend_row, reach_fp_row, keyword_fp_row):
        term = fp.mul(fp.mul(fp.sqrt_tokens(spend), reach), score)
        acc += term
    for factor in (concentration_fp, target_weight_fp, event_mod_fp):
        acc = fp.mul(acc, factor)
    return acc


def market_share(values: dict) -> dict:
    """Proportional shares summing to exactly 1.0 in fixed point.

    Every team gets floor(E * SCALE / total); the remainder units go to the
    lexicographically smallest address. All-zero inputs split equally.
    """
    addrs = sorted(values)
    if not addrs:
        return {}
    total = sum(values.values())
    if any(v < 0 for v in values.values()):
        raise ValueError("negative effective spend")
    if total == 0:
        base = fp.ONE // len(addrs)
        shares = {a: base for a in addrs}
    else:
        shares = {a: (values[a] * fp.ONE) // total for a in addrs}
    leftover = fp.ONE - sum(shares.values())
    shares[addrs[0]] += leftover
    return shares


def feedback_index(trend_fp: int) -> int:
    """Quantize a share trend (fixed-point delta) into the 5 phrase buckets.

    Buckets on percentage points of share: below -5, [-5, -1), [-1, +1],
    (+1, +5), and at or above +5.
    """
    point = fp.SCALE // 100  # one share point = 0.01
    if trend_fp <= -5 * point:
        return 0
    if trend_fp < -1 * point:
        return 1
    if trend_fp <= 1 * point:
        return 2
    if trend_fp < 5 * point:
        return 3
    return 4


@dataclass(frozen=True)
class TeamResult:
    team: bytes
    spend_total: int
    effective: tuple  # fixed-point per product
    shares: tuple  # fixed-point per product
    units: tuple  # whole units per product
    revenue: int  # whole tokens
    event_outcome: str
    score_delta: int
    feedback: int  # phrase index


@dataclass(frozen=True)
class SegmentStat:
    segment: str
    demand_units: int
    units_sold: int


@dataclass(frozen=True)
class TurnReport:
    round_index: int
    event: EventDraw
    results: tuple  # TeamResult, sorted by team address
    segments: tuple  # SegmentStat, in product order

    def canonical_bytes(self) -> bytes:
        parts = [REPORT_MAGIC, codec.enc_u64(self.round_index), self.event.encode()]
        parts.append(codec.enc_u32(len(self.results)))
        for res in self.results:
            parts.append(res.team)
            parts.append(codec.enc_u64(res.spend_total))
            parts.append(codec.enc_u32(len(res.effective)))
            for e, s, u in zip(res.effective, res.shares, res.units):
                parts.append(codec.enc_u64(e))
                parts.append(codec.enc_u64(s))
                parts.append(codec.enc_u64(u))
            parts.append(codec.enc_u64(res.revenue))
            parts.append(codec.enc_u8(EVENT_OUTCOMES.index(res.event_outcome)))
            parts.append(codec.enc_u64(res.score_delta))
            parts.append(codec.enc_u8(res.feedback))
        parts.append(codec.enc_u32(len(self.segments)))
        for seg in self.segments:
            parts.append(codec.enc_str(seg.segment))
            parts.append(codec.enc_u64(seg.demand_units))
            parts.append(codec.enc_u64(seg.units_sold))
        return b"".join(parts)

    def digest(self) -> bytes:
        return sha256(self.canonical_bytes())

    def result_for(self, team: bytes):
        for res in self.results:
            if res.team == team:
                return res
        return None


def decode_turn_report(data: bytes) -> TurnReport:
    """Strict inverse of TurnReport.canonical_bytes."""
    r = codec.Reader(data)
    if r.take(len(REPORT_MAGIC)) != REPORT_MAGIC:
        raise NonCanonicalEncoding("bad report magic")
    round_index = r.u64()
    event = EventDraw(occurred=r.u8() == 1, kind=r.u8(), product=r.u8())
    results = []
    for _ in range(r.u32()):
        team = r.take(20)
        spend_total = r.u64()
        effective, shares, units = [], [], []
        for _ in range(r.u32()):
            effective.append(r.u64())
            shares.append(r.u64())
            units.append(r.u64())
        revenue = r.u64()
        outcome_idx = r.u8()
        if outcome_idx >= len(EVENT_OUTCOMES):
            raise NonCanonicalEncoding("bad event outcome")
        score_delta = r.u64()
        feedback = r.u8()
        if feedback >= len(FEEDBACK_PHRASES):
            raise NonCanonicalEncoding("bad feedback index")
        results.append(TeamResult(
            team=team, spend_total=spend_total, effective=tuple(effective),
            shares=tuple(shares), units=tuple(units), revenue=revenue,
            event_outcome=EVENT_OUTCOMES[outcome_idx],
            score_delta=score_delta, feedback=feedback,
        ))
    segments = []
    for _ in range(r.u32()):
        segments.append(SegmentStat(
            segment=r.str_(), demand_units=r.u64(), units_sold=r.u64(),
        ))
    r.expect_end()
    return TurnReport(
        round_index=round_index, event=event,
        results=tuple(results), segments=tuple(segments),
    )


@dataclass(frozen=True)
class TeamInputs:
    """One team's frozen decisions for a round."""

    team: bytes
    spend: tuple = ()  # product x channel token matrix; empty = no plan
    keywords: dict = None  # channel index -> list of keyword strings
    target_weights: dict = None  # segment id -> raw weight
    response: int | None = None  # RESPONSE_CHOICES index

    def __post_init__(self):
        object.__setattr__(self, "keywords", dict(self.keywords or {}))
        object.__setattr__(self, "target_weights", dict(self.target_weights or {}))

    @property
    def has_plan(self) -> bool:
        return bool(self.spend)

    def spend_total(self) -> int:
        return sum(c for row in self.spend for c in row)


def resolve_round(config, inputs, round_index: int, *, seed: bytes = None,
                  event: EventDraw | None = None,
                  prior_shares: dict | None = None) -> TurnReport:
    """Resolve one round into a TurnReport. Pure in all arguments.

    ``config`` is a game.GameConfig; ``inputs`` maps team address to
    TeamInputs with the post-adjustment spend matrices. ``event`` is the draw
    made when execution opened; alternatively pass ``seed`` to draw here.
    ``prior_shares`` maps team -> per-product share tuple from the previous
    round and feeds the sales-force trend phrases.
    """
    n_products = len(config.products)
    n_channels = len(config.channels)
    if event is None:
        if seed is None:
            raise ValueError("need an event draw or a seed")
        event = draw_event(seed, config.event_probability, n_products)
    teams = sorted(inputs)
    prior_shares = prior_shares or {}

    # Per-team, per-channel factors independent of the product.
    conc = {}
    kscores = {}
    weights = {}
    segments = [p.segment for p in config.products]
    for t in teams:
        ti = inputs[t]
        if ti.has_plan and ti.spend_total() > 0:
            conc[t] = concentration_multiplier(ti.spend, config.concentration_gain)
        else:
            conc[t] = fp.ONE
        kscores[t] = tuple(
            keyword_score(ti.keywords.get(c, ()), config.channels[c].keywords)
            for c in range(n_channels)
        )
        weights[t] = normalize_target_weights(ti.target_weights, sorted(set(segments)))

    effective = {t: [] for t in teams}
    for p in range(n_products):
        seg = config.products[p].segment
        reach_row = tuple(ch.reach.get(seg, 0) for ch in config.channels)
        for t in teams:
            ti = inputs[t]
            if not ti.has_plan:
                effective[t].append(0)
                continue
            if event.occurred and event.product == p and ti.response != event.kind:
                mod = config.event_penalty
            else:
                mod = fp.ONE
            effective[t].append(
                effective_spend(
                    ti.spend[p], reach_row, kscores[t],
                    conc[t], weights[t].get(seg, fp.ONE), mod,
                )
            )

    shares = []
    units = []
    for p in range(n_products):
        share_p = market_share({t: effective[t][p] for t in teams})
        demand = config.demand_for(config.products[p].segment, round_index)
        units_p = {
            t: fp.div_half_even(demand * share_p[t], fp.SCALE) for t in teams
        }
        shares.append(share_p)
        units.append(units_p)

    results = []
    for t in teams:
        ti = inputs[t]
        revenue = sum(
            units[p][t] * config.products[p].unit_price for p in range(n_products)
        )
        if not event.occurred:
            outcome = "none"
        elif ti.response == event.kind:
            outcome = "avoided"
        else:
            outcome = "penalized"
        team_shares = tuple(shares[p][t] for p in range(n_products))
        prior = prior_shares.get(t)
        if prior:
            diffs = [team_shares[p] - prior[p] for p in range(n_products)]
            trend = fp.div_half_even(sum(diffs), n_products)
        else:
            trend = 0
        results.append(
            TeamResult(
                team=t,
                spend_total=ti.spend_total() if ti.has_plan else 0,
                effective=tuple(effective[t]),
                shares=team_shares,
                units=tuple(units[p][t] for p in range(n_products)),
                revenue=revenue,
                event_outcome=outcome,
                score_delta=revenue,
                feedback=feedback_index(trend),
            )
        )

    seg_stats = tuple(
        SegmentStat(
            segment=config.products[p].segment,
            demand_units=config.demand_for(config.products[p].segment, round_index),
            units_sold=sum(units[p][t] for t in teams),
        )
        for p in range(len(config.products))
    )
    return TurnReport(
        round_index=round_index,
        event=event,
        results=tuple(results),
        segments=seg_stats,
    )


def render_report(report: TurnReport, team: bytes, purchased: bool) -> dict:
    """A team's view of a closed round: own stats always, market if paid."""
    own = report.result_for(team)
    view = {
        "round": report.round_index,
        "event": {
            "occurred": report.event.occurred,
            "kind": EVENT_KINDS[report.event.kind] if report.event.occurred else None,
            "product": report.event.product if report.event.occurred else None,
        },
        "digest": codec.to_hex(report.digest()),
        "purchased": purchased,
    }
    if own is not None:
        view["own"] = _result_json(own)
        view["informal"] = FEEDBACK_PHRASES[own.feedback]
    if purchased:
        view["market"] = {
            "teams": [
                {
                    "team": codec.to_hex(res.team),
                    "spend_total": str(res.spend_total),
                    "shares": [fp.format_fp(s) for s in res.shares],
                }
                for res in report.results
            ],
            "segments": [
                {
                    "segment": seg.segment,
                    "demand_units": str(seg.demand_units),
                    "units_sold": str(seg.units_sold),
                }
                for seg in report.segments
            ],
        }
    return view


def _result_json(res: TeamResult) -> dict:
    return {
        "team": codec.to_hex(res.team),
        "spend_total": str(res.spend_total),
        "effective_spend": [fp.format_fp(e) for e in res.effective],
        "shares": [fp.format_fp(s) for s in res.shares],
        "units_sold": [str(u) for u in res.units],
        "revenue": str(res.revenue),
        "event_outcome": res.event_outcome,
        "score_delta": str(res.score_delta),
    }

