"""On-chain rules of the marketing simulation.

The MarketingSim contract holds the game configuration, walks each round
through Planning -> Execution -> Reporting, stores team decisions, and closes
rounds by running the market engine and crediting revenue. All money moves
through the treasury account: plan spend is escrowed when submitted, report
fees are paid on purchase, revenue is paid out at close. The contract never
mints, so chain-level conservation covers the game for free.

Round 1 is a practice round: its report is produced and revenue is paid, but
cumulative scores start counting from round 2.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from chainclass import codec, fixedpoint as fp, market
from chainclass.codec import Reader
from chainclass.crypto import ADDRESS_LEN, sha256
from chainclass.errors import NonCanonicalEncoding
from chainclass.units import TOKEN
from chainclass.vm import CallContext, Contract, register

GAME_CODE_ID = "marketing-sim-v1"
GAME_VERSION = "1.0.0"

PHASE_SETUP = 0
PHASE_PLANNING = 1
PHASE_EXECUTION = 2
PHASE_REPORTING = 3
PHASE_FINISHED = 4

PHASE_NAMES = ("Setup", "Planning", "Execution", "Reporting", "Finished")

CADENCES = ("weekly", "daily")

EVENT_SEED_TAG = b"chainclass/event/v1"

MAX_KEYWORDS_PER_CHANNEL = 8


@dataclass(frozen=True)
class Product:
    name: str
    unit_price: int  # whole tokens per unit
    segment: str


@dataclass(frozen=True)
class Channel:
    name: str
    reach: dict  # segment id -> fixed-point factor in [0, 1]
    keywords: tuple  # vocabulary the channel responds to

    def __post_init__(self):
        object.__setattr__(self, "reach", dict(self.reach))
        object.__setattr__(self, "keywords", tuple(self.keywords))


@dataclass(frozen=True)
class GameConfig:
    teams: tuple  # addresses
    products: tuple  # Product
    channels: tuple  # Channel
    weekly_budget: int  # tokens
    report_price: int  # tokens
    adjustment_cap: int  # fixed-point fraction
    rounds_total: int
    cadence: str
    event_probability: int  # fixed-point
    event_penalty: int  # fixed-point
    concentration_gain: int  # fixed-point
    demand: dict  # (segment, round) -> units
    gas_price: int
    block_gas_limit: int
    treasury: bytes
    budget_carryover: bool = False

    def __post_init__(self):
        object.__setattr__(self, "teams", tuple(self.teams))
        object.__setattr__(self, "products", tuple(self.products))
        object.__setattr__(self, "channels", tuple(self.channels))
        object.__setattr__(self, "demand", dict(self.demand))

    # -- derived views ----------------------------------------------------

    def segments(self) -> tuple:
        return tuple(sorted({p.segment for p in self.products}))

    def demand_for(self, segment: str, round_index: int) -> int:
        return self.demand[(segment, round_index)]

    def is_team(self, addr: bytes) -> bool:
        return addr in self.teams

    # -- validation --------------------------------------------------------

    def validate(self) -> None:
        """Raise ValueError on the first rule violation."""
        if len(self.teams) < 2:
            raise ValueError("need at least 2 teams")
        if len(set(self.teams)) != len(self.teams):
            raise ValueError("duplicate team address")
        if any(len(t) != ADDRESS_LEN for t in self.teams):
            raise ValueError("bad team address length")
        if len(self.products) != 3:
            raise ValueError("exactly 3 products required")
        if not self.channels:
            raise ValueError("need at least one channel")
        for ch in self.channels:
            for seg, r in ch.reach.items():
                if not 0 <= r <= fp.ONE:
                    raise ValueError(f"reach out of [0,1] for {ch.name}/{seg}")
        if self.weekly_budget <= 0:
            raise ValueError("weekly budget must be positive")
        if self.report_price <= 0:
            raise ValueError("report price must be positive")
        if not 0 <= self.adjustment_cap <= fp.ONE:
            raise ValueError("adjustment cap must be in [0,1]")
        if self.rounds_total < 1:
            raise ValueError("need at least one round")
        if self.cadence not in CADENCES:
            raise ValueError("cadence must be weekly or daily")
        if not 0 <= self.event_probability <= fp.ONE:
            raise ValueError("event probability must be in [0,1]")
        if not 0 <= self.event_penalty <= fp.ONE:
            raise ValueError("event penalty must be in [0,1]")
        if self.concentration_gain < 0:
            raise ValueError("concentration gain must be >= 0")
        for seg in {p.segment for p in self.products}:
            for rnd in range(1, self.rounds_total + 1):
                if (seg, rnd) not in self.demand:
                    raise ValueError(f"missing demand for ({seg}, {rnd})")
        if any(u < 0 for u in self.demand.values()):
            raise ValueError("negative demand")
        if self.gas_price <= 0 or self.block_gas_limit <= 0:
            raise ValueError("gas parameters must be positive")
        if len(self.treasury) != ADDRESS_LEN:
            raise ValueError("bad treasury address")
        if self.treasury in self.teams:
            raise ValueError("treasury cannot be a team")
        if any(p.unit_price <= 0 for p in self.products):
            raise ValueError("unit prices must be positive")

    # -- canonical encoding --------------------------------------------------

    def encode(self) -> bytes:
        parts = [codec.enc_u32(len(self.teams))]
        parts += list(self.teams)
        parts.append(codec.enc_u32(len(self.products)))
        for p in self.products:
            parts.append(codec.enc_str(p.name))
            parts.append(codec.enc_u64(p.unit_price))
            parts.append(codec.enc_str(p.segment))
        parts.append(codec.enc_u32(len(self.channels)))
        for ch in self.channels:
            parts.append(codec.enc_str(ch.name))
            reach = sorted(ch.reach.items())
            parts.append(codec.enc_u32(len(reach)))
            for seg, r in reach:
                parts.append(codec.enc_str(seg))
                parts.append(codec.enc_u64(r))
            parts.append(codec.enc_u32(len(ch.keywords)))
            for w in ch.keywords:
                parts.append(codec.enc_str(w))
        parts.append(codec.enc_u64(self.weekly_budget))
        parts.append(codec.enc_u64(self.report_price))
        parts.append(codec.enc_u64(self.adjustment_cap))
        parts.append(codec.enc_u64(self.rounds_total))
        parts.append(codec.enc_u8(CADENCES.index(self.cadence)))
        parts.append(codec.enc_u64(self.event_probability))
        parts.append(codec.enc_u64(self.event_penalty))
        parts.append(codec.enc_u64(self.concentration_gain))
        demand = sorted(self.demand.items())
        parts.append(codec.enc_u32(len(demand)))
        for (seg, rnd), units in demand:
            parts.append(codec.enc_str(seg))
            parts.append(codec.enc_u64(rnd))
            parts.append(codec.enc_u64(units))
        parts.append(codec.enc_u64(self.gas_price))
        parts.append(codec.enc_u64(self.block_gas_limit))
        parts.append(self.treasury)
        parts.append(codec.enc_u8(1 if self.budget_carryover else 0))
        return b"".join(parts)

    @classmethod
    def decode(cls, data: bytes) -> "GameConfig":
        r = Reader(data)
        teams = tuple(r.take(ADDRESS_LEN) for _ in range(r.u32()))
        products = tuple(
            Product(name=r.str_(), unit_price=r.u64(), segment=r.str_())
            for _ in range(r.u32())
        )
        channels = []
        for _ in range(r.u32()):
            name = r.str_()
            reach = {}
            prev_seg = None
            for _ in range(r.u32()):
                seg = r.str_()
                if prev_seg is not None and seg <= prev_seg:
                    raise NonCanonicalEncoding("reach entries not sorted")
                prev_seg = seg
                reach[seg] = r.u64()
            words = tuple(r.str_() for _ in range(r.u32()))
            channels.append(Channel(name=name, reach=reach, keywords=words))
        weekly_budget = r.u64()
        report_price = r.u64()
        adjustment_cap = r.u64()
        rounds_total = r.u64()
        cadence_idx = r.u8()
        if cadence_idx >= len(CADENCES):
            raise NonCanonicalEncoding("bad cadence tag")
        event_probability = r.u64()
        event_penalty = r.u64()
        concentration_gain = r.u64()
        demand = {}
        prev_key = None
        for _ in range(r.u32()):
            seg = r.str_()
            rnd = r.u64()
            if prev_key is not None and (seg, rnd) <= prev_key:
                raise NonCanonicalEncoding("demand entries not sorted")
            prev_key = (seg, rnd)
            demand[(seg, rnd)] = r.u64()
        gas_price = r.u64()
        block_gas_limit = r.u64()
        treasury = r.take(ADDRESS_LEN)
        carryover = r.u8()
        r.expect_end()
        if carryover not in (0, 1):
            raise NonCanonicalEncoding("bad carryover flag")
        return cls(
            teams=teams, products=products, channels=tuple(channels),
            weekly_budget=weekly_budget, report_price=report_price,
            adjustment_cap=adjustment_cap, rounds_total=rounds_total,
            cadence=CADENCES[cadence_idx], event_probability=event_probability,
            event_penalty=event_penalty, concentration_gain=concentration_gain,
            demand=demand, gas_price=gas_price,
            block_gas_limit=block_gas_limit, treasury=treasury,
            budget_carryover=bool(carryover),
        )

    def digest(self) -> bytes:
        return sha256(self.encode())

    # -- JSON (config files and API responses) ------------------------------

    def to_json(self) -> dict:
        return {
            "teams": [codec.to_hex(t) for t in self.teams],
            "products": [
                {"name": p.name, "unit_price": str(p.unit_price), "segment": p.segment}
                for p in self.products
            ],
            "channels": [
                {
                    "name": c.name,
                    "reach": {s: fp.format_fp(v) for s, v in sorted(c.reach.items())},
                    "keywords": list(c.keywords),
                }
                for c in self.channels
            ],
            "weekly_budget": str(self.weekly_budget),
            "report_price": str(self.report_price),
            "adjustment_cap": fp.format_fp(self.adjustment_cap),
            "rounds_total": self.rounds_total,
            "cadence": self.cadence,
            "event_probability": fp.format_fp(self.event_probability),
            "event_penalty": fp.format_fp(self.event_penalty),
            "concentration_gain": fp.format_fp(self.concentration_gain),
            "demand": [
                {"segment": seg, "round": rnd, "units": str(units)}
                for (seg, rnd), units in sorted(self.demand.items())
            ],
            "gas_price": str(self.gas_price),
            "block_gas_limit": str(self.block_gas_limit),
            "treasury": codec.to_hex(self.treasury),
            "budget_carryover": self.budget_carryover,
        }

    @classmethod
    def from_json(cls, doc: dict) -> "GameConfig":
        return cls(
            teams=tuple(codec.from_hex(t) for t in doc["teams"]),
            products=tuple(
                Product(name=p["name"], unit_price=int(p["unit_price"]),
                        segment=p["segment"])
                for p in doc["products"]
            ),
            channels=tuple(
                Channel(
                    name=c["name"],
                    reach={s: fp.parse(v) for s, v in c["reach"].items()},
                    keywords=tuple(c["keywords"]),
                )
                for c in doc["channels"]
            ),
            weekly_budget=int(doc["weekly_budget"]),
            report_price=int(doc["report_price"]),
            adjustment_cap=fp.parse(doc["adjustment_cap"]),
            rounds_total=int(doc["rounds_total"]),
            cadence=doc["cadence"],
            event_probability=fp.parse(doc["event_probability"]),
            event_penalty=fp.parse(doc["event_penalty"]),
            concentration_gain=fp.parse(doc["concentration_gain"]),
            demand={
                (d["segment"], int(d["round"])): int(d["units"])
                for d in doc["demand"]
            },
            gas_price=int(doc["gas_price"]),
            block_gas_limit=int(doc["block_gas_limit"]),
            treasury=codec.from_hex(doc["treasury"]),
            budget_carryover=bool(doc.get("budget_carryover", False)),
        )


# -- decision payloads -------------------------------------------------------


def encode_spend_matrix(spend, signed: bool = False) -> bytes:
    rows = len(spend)
    cols = len(spend[0]) if rows else 0
    enc = codec.enc_s64 if signed else codec.enc_u64
    parts = [codec.enc_u32(rows), codec.enc_u32(cols)]
    for row in spend:
        if len(row) != cols:
            raise ValueError("ragged spend matrix")
        parts += [enc(c) for c in row]
    return b"".join(parts)


def decode_spend_matrix(r: Reader, signed: bool = False) -> tuple:
    rows = r.u32()
    cols = r.u32()
    if rows * cols > 4096:
        raise NonCanonicalEncoding("spend matrix too large")
    read = r.s64 if signed else r.u64
    return tuple(tuple(read() for _ in range(cols)) for _ in range(rows))


@dataclass(frozen=True)
class Plan:
    spend: tuple  # product x channel, whole tokens

    def total(self) -> int:
        return sum(c for row in self.spend for c in row)

    def encode(self) -> bytes:
        return encode_spend_matrix(self.spend)

    @classmethod
    def decode(cls, data: bytes) -> "Plan":
        r = Reader(data)
        spend = decode_spend_matrix(r)
        r.expect_end()
        return cls(spend=spend)


@dataclass(frozen=True)
class Adjustment:
    keywords: dict = field(default_factory=dict)  # channel index -> tuple of words
    target_weights: dict = field(default_factory=dict)  # segment -> raw weight
    spend_delta: tuple = ()  # product x channel, signed tokens; empty = none

    def __post_init__(self):
        object.__setattr__(
            self, "keywords",
            {int(k): tuple(v) for k, v in self.keywords.items()},
        )
        object.__setattr__(self, "target_weights", dict(self.target_weights))

    def encode(self) -> bytes:
        parts = [codec.enc_u32(len(self.keywords))]
        for ch in sorted(self.keywords):
            words = self.keywords[ch]
            parts.append(codec.enc_u32(ch))
            parts.append(codec.enc_u32(len(words)))
            parts += [codec.enc_str(w) for w in words]
        parts.append(codec.enc_u32(len(self.target_weights)))
        for seg in sorted(self.target_weights):
            parts.append(codec.enc_str(seg))
            parts.append(codec.enc_u64(self.target_weights[seg]))
        if self.spend_delta:
            parts.append(codec.enc_u8(1))
            parts.append(encode_spend_matrix(self.spend_delta, signed=True))
        else:
            parts.append(codec.enc_u8(0))
        return b"".join(parts)

    @classmethod
    def decode(cls, data: bytes) -> "Adjustment":
        r = Reader(data)
        keywords = {}
        prev = -1
        for _ in range(r.u32()):
            ch = r.u32()
            if ch <= prev:
                raise NonCanonicalEncoding("keyword channels not sorted")
            prev = ch
            n = r.u32()
            if n > MAX_KEYWORDS_PER_CHANNEL:
                raise NonCanonicalEncoding("too many keywords")
            keywords[ch] = tuple(r.str_() for _ in range(n))
        weights = {}
        prev_seg = None
        for _ in range(r.u32()):
            seg = r.str_()
            if prev_seg is not None and seg <= prev_seg:
                raise NonCanonicalEncoding("weight segments not sorted")
            prev_seg = seg
            weights[seg] = r.u64()
        has_delta = r.u8()
        if has_delta not in (0, 1):
            raise NonCanonicalEncoding("bad delta flag")
        delta = decode_spend_matrix(r, signed=True) if has_delta else ()
        r.expect_end()
        return cls(keywords=keywords, target_weights=weights, spend_delta=delta)


def apply_delta(spend, delta) -> tuple:
    return tuple(
        tuple(c + d for c, d in zip(srow, drow))
        for srow, drow in zip(spend, delta)
    )


def event_seed(config_digest: bytes, round_index: int, plans: dict) -> bytes:
    """Round event seed: committed to by config and the frozen plan set.

    Depends only on replicated chain state, so every engine draws the same
    event, and no single party picks the outcome (teams commit plans during
    Planning without seeing the resulting seed's draw).
    """
    acc = sha256(b"".join(
        team + plans[team] for team in sorted(plans)
    ))
    return sha256(EVENT_SEED_TAG + config_digest + codec.enc_u64(round_index) + acc)


# -- storage keys -------------------------------------------------------------


def k_round() -> bytes:
    return b"round"


def k_phase() -> bytes:
    return b"phase"


def k_config() -> bytes:
    return b"config"


def k_admin() -> bytes:
    return b"admin"


def k_scheduler() -> bytes:
    return b"scheduler"


def k_event(rnd: int) -> bytes:
    return b"event" + codec.enc_u64(rnd)


def k_plan(rnd: int, team: bytes) -> bytes:
    return b"plan" + codec.enc_u64(rnd) + team


def k_adjust(rnd: int, team: bytes) -> bytes:
    return b"adj" + codec.enc_u64(rnd) + team


def k_response(rnd: int, team: bytes) -> bytes:
    return b"resp" + codec.enc_u64(rnd) + team


def k_escrow(rnd: int, team: bytes) -> bytes:
    return b"escrow" + codec.enc_u64(rnd) + team


def k_purchase(rnd: int, team: bytes) -> bytes:
    return b"bought" + codec.enc_u64(rnd) + team


def k_digest(rnd: int) -> bytes:
    return b"digest" + codec.enc_u64(rnd)


def k_shares(rnd: int, team: bytes) -> bytes:
    return b"shares" + codec.enc_u64(rnd) + team


def k_score(team: bytes) -> bytes:
    return b"score" + team


# -- the contract -------------------------------------------------------------


@register
class MarketingSim(Contract):
    """Phase-gated decision storage plus deterministic round resolution."""

    code_id = GAME_CODE_ID
    version = GAME_VERSION

    def init(self, ctx: CallContext, args: bytes) -> None:
        # args: empty, or a 20-byte scheduler address additionally allowed
        # to advance phases (cadence automation).
        if args and len(args) != ADDRESS_LEN:
            ctx.revert("BadEncoding", "scheduler must be one address")
        ctx.write(k_admin(), ctx.sender)
        if args:
            ctx.write(k_scheduler(), args)
        ctx.write(k_round(), codec.enc_u64(0))
        ctx.write(k_phase(), codec.enc_u8(PHASE_SETUP))

    # -- helpers -----------------------------------------------------------

    def _round(self, ctx) -> int:
        return Reader(ctx.read(k_round())).u64()

    def _phase(self, ctx) -> int:
        return Reader(ctx.read(k_phase())).u8()

    def _config(self, ctx) -> GameConfig:
        raw = ctx.read(k_config())
        if not raw:
            ctx.revert("NoConfig", "game not configured")
        return GameConfig.decode(raw)

    def _require_admin(self, ctx, allow_scheduler: bool = False) -> None:
        if ctx.sender == ctx.read(k_admin()):
            return
        if allow_scheduler and ctx.sender == ctx.read(k_scheduler()):
            return
        ctx.revert("Unauthorized", "admin only")

    def _require_phase(self, ctx, phase: int) -> None:
        if self._phase(ctx) != phase:
            ctx.revert("WrongPhase", f"requires {PHASE_NAMES[phase]}")

    def _require_team(self, ctx, config: GameConfig) -> None:
        if not config.is_team(ctx.sender):
            ctx.revert("NotATeam", "sender is not a registered team")

    # -- dispatch ------------------------------------------------------------

    def call(self, ctx: CallContext, method: str, args: bytes) -> None:
        handlers = {
            "configure": self.op_configure,
            "advance": self.op_advance,
            "plan": self.op_plan,
            "adjust": self.op_adjust,
            "respond": self.op_respond,
            "buy_report": self.op_buy_report,
            "close_round": self.op_close_round,
        }
        handler = handlers.get(method)
        if handler is None:
            ctx.revert("UnknownMethod", method)
        handler(ctx, args)

    # -- operations ------------------------------------------------------------

    def op_configure(self, ctx, args: bytes) -> None:
        self._require_admin(ctx)
        if self._phase(ctx) != PHASE_SETUP:
            ctx.revert("ConfigLocked", "rounds already started")
        try:
            config = GameConfig.decode(args)
            config.validate()
        except NonCanonicalEncoding as exc:
            ctx.revert("BadEncoding", str(exc))
        except ValueError as exc:
            ctx.revert("InvalidConfig", str(exc))
        ctx.write(k_config(), config.encode())
        ctx.emit("ConfigSet", config.digest())

    def op_advance(self, ctx, args: bytes) -> None:
        self._require_admin(ctx, allow_scheduler=True)
        if args:
            ctx.revert("BadEncoding", "advance takes no arguments")
        config = self._config(ctx)
        phase = self._phase(ctx)
        rnd = self._round(ctx)
        if phase == PHASE_SETUP:
            ctx.write(k_round(), codec.enc_u64(1))
            ctx.write(k_phase(), codec.enc_u8(PHASE_PLANNING))
        elif phase == PHASE_PLANNING:
            plans = {}
            for team in config.teams:
                raw = ctx.read(k_plan(rnd, team))
                if raw:
                    plans[team] = raw
            seed = event_seed(config.digest(), rnd, plans)
            draw = market.draw_event(
                seed, config.event_probability, len(config.products)
            )
            ctx.write(k_event(rnd), draw.encode())
            ctx.write(k_phase(), codec.enc_u8(PHASE_EXECUTION))
            ctx.emit("EventDrawn", codec.enc_u64(rnd) + draw.encode())
        elif phase == PHASE_EXECUTION:
            ctx.write(k_phase(), codec.enc_u8(PHASE_REPORTING))
        elif phase == PHASE_REPORTING:
            ctx.revert("TerminalPhase", "close_round ends a Reporting round")
        else:
            ctx.revert("TerminalPhase", "game is finished")

    def op_plan(self, ctx, args: bytes) -> None:
        config = self._config(ctx)
        self._require_team(ctx, config)
        self._require_phase(ctx, PHASE_PLANNING)
        try:
            plan = Plan.decode(args)
        except NonCanonicalEncoding as exc:
            ctx.revert("BadEncoding", str(exc))
        if len(plan.spend) != len(config.products) or any(
            len(row) != len(config.channels) for row in plan.spend
        ):
            ctx.revert("BadEncoding", "spend matrix shape mismatch")
        total = plan.total()
        if total == 0:
            # a stored zero-total plan would make round resolution
            # undefined; sitting out = not submitting
            ctx.revert("ZeroSpend", "plan total must be positive")
        if total > config.weekly_budget:
            ctx.revert("OverBudget", f"plan total {total} exceeds budget")
        rnd = self._round(ctx)
        prior = ctx.read(k_escrow(rnd, ctx.sender))
        if prior:
            ctx.transfer(config.treasury, ctx.sender,
                         Reader(prior).u64() * TOKEN)
        ctx.transfer(ctx.sender, config.treasury, total * TOKEN)
        ctx.write(k_plan(rnd, ctx.sender), args)
        ctx.write(k_escrow(rnd, ctx.sender), codec.enc_u64(total))
        ctx.emit("PlanSubmitted", ctx.sender + codec.enc_u64(total))

    def op_adjust(self, ctx, args: bytes) -> None:
        config = self._config(ctx)
        self._require_team(ctx, config)
        self._require_phase(ctx, PHASE_EXECUTION)
        rnd = self._round(ctx)
        raw_plan = ctx.read(k_plan(rnd, ctx.sender))
        if not raw_plan:
            ctx.revert("NoPlan", "no plan submitted this round")
        try:
            adj = Adjustment.decode(args)
        except NonCanonicalEncoding as exc:
            ctx.revert("BadEncoding", str(exc))
        for ch in adj.keywords:
            if ch >= len(config.channels):
                ctx.revert("UnknownKeywordChannel", f"channel {ch}")
        known = set(config.segments())
        for seg in adj.target_weights:
            if seg not in known:
                ctx.revert("UnknownSegment", seg)
        plan = Plan.decode(raw_plan)
        new_total = plan.total()
        if adj.spend_delta:
            if len(adj.spend_delta) != len(plan.spend) or any(
                len(drow) != len(srow)
                for drow, srow in zip(adj.spend_delta, plan.spend)
            ):
                ctx.revert("BadEncoding", "delta shape mismatch")
            for srow, drow in zip(plan.spend, adj.spend_delta):
                for cell, delta in zip(srow, drow):
                    # exact check of |delta| <= cap * cell, no rounding
                    if abs(delta) * fp.SCALE > config.adjustment_cap * cell:
                        ctx.revert("CapExceeded",
                                   f"|{delta}| over cap on cell {cell}")
                    if cell + delta < 0:
                        ctx.revert("CapExceeded", "negative post-delta spend")
            new_total = sum(
                c for row in apply_delta(plan.spend, adj.spend_delta)
                for c in row
            )
            if new_total == 0:
                ctx.revert("ZeroSpend", "post-delta total must be positive")
            if new_total > config.weekly_budget:
                ctx.revert("OverBudget", "post-delta total exceeds budget")
        old_escrow = Reader(ctx.read(k_escrow(rnd, ctx.sender))).u64()
        if new_total > old_escrow:
            ctx.transfer(ctx.sender, config.treasury,
                         (new_total - old_escrow) * TOKEN)
        elif new_total < old_escrow:
            ctx.transfer(config.treasury, ctx.sender,
                         (old_escrow - new_total) * TOKEN)
        ctx.write(k_adjust(rnd, ctx.sender), args)
        ctx.write(k_escrow(rnd, ctx.sender), codec.enc_u64(new_total))
        ctx.emit("AdjustmentSubmitted", ctx.sender)

    def op_respond(self, ctx, args: bytes) -> None:
        config = self._config(ctx)
        self._require_team(ctx, config)
        self._require_phase(ctx, PHASE_EXECUTION)
        rnd = self._round(ctx)
        raw = ctx.read(k_event(rnd))
        draw = market.EventDraw.decode(raw) if raw else None
        if draw is None or not draw.occurred:
            ctx.revert("NoActiveEvent", "no event this round")
        if len(args) != 1 or args[0] >= len(market.RESPONSE_CHOICES):
            ctx.revert("BadEncoding", "response must be one choice byte")
        ctx.write(k_response(rnd, ctx.sender), args)

    def op_buy_report(self, ctx, args: bytes) -> None:
        config = self._config(ctx)
        self._require_team(ctx, config)
        self._require_phase(ctx, PHASE_REPORTING)
        rnd = self._round(ctx)
        r = Reader(args)
        try:
            requested = r.u64()
            r.expect_end()
        except NonCanonicalEncoding as exc:
            ctx.revert("BadEncoding", str(exc))
        if requested != rnd:
            ctx.revert("WrongRound", f"current round is {rnd}")
        if ctx.read(k_purchase(rnd, ctx.sender)):
            ctx.revert("AlreadyPurchased", "one report per team per round")
        ctx.transfer(ctx.sender, config.treasury, config.report_price * TOKEN)
        ctx.write(k_purchase(rnd, ctx.sender), b"\x01")
        ctx.emit("ReportPurchased", ctx.sender + codec.enc_u64(rnd))

    def op_close_round(self, ctx, args: bytes) -> None:
        self._require_admin(ctx)
        if args:
            ctx.revert("BadEncoding", "close_round takes no arguments")
        self._require_phase(ctx, PHASE_REPORTING)
        config = self._config(ctx)
        rnd = self._round(ctx)
        report = resolve_from_storage(ctx, config, rnd)
        ctx.charge_report_render()
        for res in report.results:
            if res.revenue:
                ctx.transfer(config.treasury, res.team, res.revenue * TOKEN)
            shares = b"".join(codec.enc_u64(s) for s in res.shares)
            ctx.write(k_shares(rnd, res.team), shares)
            if rnd > 1 and res.score_delta:
                raw = ctx.read(k_score(res.team))
                score = Reader(raw).u64() if raw else 0
                ctx.write(k_score(res.team), codec.enc_u64(score + res.score_delta))
            ctx.write(k_escrow(rnd, res.team), b"")
        ctx.write(k_digest(rnd), report.digest())
        if rnd < config.rounds_total:
            ctx.write(k_round(), codec.enc_u64(rnd + 1))
            ctx.write(k_phase(), codec.enc_u8(PHASE_PLANNING))
        else:
            ctx.write(k_phase(), codec.enc_u8(PHASE_FINISHED))
        ctx.emit("RoundClosed", codec.enc_u64(rnd) + report.canonical_bytes())


def team_inputs_from_reader(read, config: GameConfig, rnd: int) -> dict:
    """Assemble frozen per-team inputs for a round from a storage reader.

    ``read`` is any callable (key) -> bytes, so this serves both contract
    execution (metered reads) and off-chain report reconstruction.
    """
    inputs = {}
    for team in config.teams:
        raw_plan = read(k_plan(rnd, team))
        spend = ()
        keywords = {}
        weights = {}
        if raw_plan:
            spend = Plan.decode(raw_plan).spend
            raw_adj = read(k_adjust(rnd, team))
            if raw_adj:
                adj = Adjustment.decode(raw_adj)
                if adj.spend_delta:
                    spend = apply_delta(spend, adj.spend_delta)
                keywords = adj.keywords
                weights = adj.target_weights
        raw_resp = read(k_response(rnd, team))
        response = raw_resp[0] if raw_resp else None
        inputs[team] = market.TeamInputs(
            team=team, spend=spend, keywords=keywords,
            target_weights=weights, response=response,
        )
    return inputs


def resolve_from_storage(ctx, config: GameConfig, rnd: int) -> market.TurnReport:
    """Run the market engine on the decisions stored for round ``rnd``."""
    inputs = team_inputs_from_reader(ctx.read, config, rnd)
    raw_event = ctx.read(k_event(rnd))
    if raw_event:
        draw = market.EventDraw.decode(raw_event)
    else:
        draw = market.EventDraw(occurred=False)
    prior = {}
    if rnd > 1:
        for team in config.teams:
            raw = ctx.read(k_shares(rnd - 1, team))
            if raw:
                r = Reader(raw)
                prior[team] = tuple(r.u64() for _ in range(len(config.products)))
    return market.resolve_round(
        config, inputs, rnd, event=draw, prior_shares=prior,
    )


@register
class BenchNoop(Contract):
    """Does nothing; exists so benchmarks can fill blocks with real txs."""

    code_id = "bench-noop-v1"
    version = "1.0.0"
    deploy_admin_only = False

    def init(self, ctx: CallContext, args: bytes) -> None:
        pass

    def call(self, ctx: CallContext, method: str, args: bytes) -> None:
        if method != "noop":
            ctx.revert("UnknownMethod", method)
