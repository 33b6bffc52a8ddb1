"""Multi-node simulation harness.

Nodes are in-process replicas wired through a virtual-time message bus. The
bus delivers transactions and blocks with seeded latency; every run of the
same scenario with the same seed replays the exact same delivery schedule,
so transcripts are byte-identical across runs and platforms.

Two execution modes share one scenario format: the deterministic virtual
clock (tests, transcripts) and a threaded mode with real sleeps (exercises
actual concurrency; converges to the same chain but its transcript ordering
is not reproducible).

Scenario files are JSON lines. The first line holds the setup record; each
following line is one team's decisions for one round:

    {"setup": {"consensus": "poa", "nodes": 5, "seed": 1, ...}}
    {"round": 1, "team": "team1", "spend": [[...]], "respond": "correct"}

The runner drives phases automatically: plans are submitted and mined, the
phase advances, adjustments and event responses go in, the phase advances,
report purchases go in, the round closes.
"""

from __future__ import annotations

import heapq
import json
import random
import threading
import time
from dataclasses import dataclass, field

from chainclass import codec, config as config_mod, game, market
from chainclass.errors import ScenarioError
from chainclass.node import Node

RESPOND_POLICIES = ("correct", "wrong", "none")


@dataclass(frozen=True)
class LatencyModel:
    """Per-hop delay in milliseconds; fixed or uniform over a seeded range."""

    model: str = "fixed"
    ms: int = 0
    min_ms: int = 0
    max_ms: int = 0

    @classmethod
    def from_doc(cls, doc) -> "LatencyModel":
        if not doc:
            return cls()
        model = doc.get("model", "fixed")
        if model == "fixed":
            return cls(model="fixed", ms=int(doc.get("ms", 0)))
        if model == "uniform":
            return cls(model="uniform", min_ms=int(doc["min_ms"]),
                       max_ms=int(doc["max_ms"]))
        raise ValueError(f"unknown latency model {model!r}")

    def sample_ms(self, rng: random.Random) -> int:
        if self.model == "fixed":
            return self.ms
        return rng.randint(self.min_ms, self.max_ms)


class VirtualNet:
    """Nodes plus a deterministic event-heap message bus.

    Every delivery is an event (time_ms, seq, ...); seq is a global counter
    so ties break by scheduling order, never by dict iteration order. Gossip
    is flood-with-dedup: a node relays whatever it accepted for the first
    time to every peer except the one it came from.
    """

    def __init__(self, cfg, node_specs, latency: LatencyModel, seed: int,
                 transcript=None):
        self.cfg = cfg
        self.latency = latency
        self.rng = random.Random(seed)
        self.now_ms = 0
        self._seq = 0
        self._heap = []
        self.transcript = transcript if transcript is not None else []
        self.nodes = {}
        for node_id, account_name, role in node_specs:
            keypair = cfg.account(account_name).keypair
            self.nodes[node_id] = Node(node_id, keypair, cfg, role=role)

    # -- bus -----------------------------------------------------------------

    def _push(self, delay_ms: int, kind: str, target: str, payload) -> None:
        self._seq += 1
        heapq.heappush(
            self._heap, (self.now_ms + delay_ms, self._seq, kind, target, payload)
        )

    def _log(self, record: dict) -> None:
        self.transcript.append(record)

    def peers_of(self, node_id: str) -> list:
        return [n for n in self.nodes if n != node_id]

    def submit_tx(self, node_id: str, tx, duplicate: bool = False) -> tuple:
        """Submit at the origin node; gossip on acceptance.

        ``duplicate`` schedules a second delivery of the same tx to every
        peer (at-least-once delivery); dedup must absorb it.
        """
        origin = self.nodes[node_id]
        accepted, reason = origin.submit_tx(tx)
        self._log({
            "t": self.now_ms, "event": "tx_submit", "node": node_id,
            "tx": codec.to_hex(tx.tx_hash), "accepted": accepted,
            "reason": reason,
        })
        if accepted:
            self._gossip_tx(node_id, tx)
            if duplicate:
                self._gossip_tx(node_id, tx)
        return accepted, reason

    def _gossip_tx(self, from_id: str, tx) -> None:
        for peer in self.peers_of(from_id):
            self._push(self.latency.sample_ms(self.rng), "tx", peer,
                       (from_id, tx))

    def broadcast_block(self, from_id: str, block) -> None:
        for peer in self.peers_of(from_id):
            self._push(self.latency.sample_ms(self.rng), "block", peer,
                       (from_id, block))

    def _deliver(self, kind: str, target: str, payload) -> None:
        node = self.nodes[target]
        from_id, item = payload
        if kind == "tx":
            accepted, reason = node.submit_tx(item)
            self._log({
                "t": self.now_ms, "event": "tx_deliver", "node": target,
                "from": from_id, "tx": codec.to_hex(item.tx_hash),
                "accepted": accepted, "reason": reason,
            })
            if accepted:
                self._gossip_tx(target, item)
        else:
            outcome = node.receive_block(item)
            self._log({
                "t": self.now_ms, "event": "block_deliver", "node": target,
                "from": from_id, "hash": codec.to_hex(item.block_hash),
                "index": item.index, "outcome": outcome,
            })
            if outcome in ("extended", "adopted", "stored"):
                self.broadcast_block(target, item)

    def run_until_quiet(self, max_events: int = 1_000_000) -> None:
        """Drain the event heap; virtual time jumps between events."""
        count = 0
        while self._heap:
            count += 1
            if count > max_events:
                raise RuntimeError("message storm: bus never quiesced")
            t, _, kind, target, payload = heapq.heappop(self._heap)
            self.now_ms = max(self.now_ms, t)
            self._deliver(kind, target, payload)

    def advance_time(self, ms: int) -> None:
        self.now_ms += ms

    # -- production ------------------------------------------------------------

    def produce(self, node_id: str):
        """Have one node attempt a block at the current virtual time."""
        node = self.nodes[node_id]
        block = node.produce_block(timestamp=self.now_ms // 1000 + 1)
        if block is None:
            self._log({
                "t": self.now_ms, "event": "not_proposer", "node": node_id,
                "height": node.chain.height + 1,
            })
            return None
        self._log({
            "t": self.now_ms, "event": "block_produced", "node": node_id,
            "index": block.index, "hash": codec.to_hex(block.block_hash),
            "txs": len(block.transactions), "gas_used": block.gas_used,
        })
        self.broadcast_block(node_id, block)
        return block

    def produce_rotation(self, producer_ids) -> None:
        """Give every producer one tick; exactly one should seal per height."""
        for node_id in producer_ids:
            self.produce(node_id)
        self.run_until_quiet()

    # -- inspection ----------------------------------------------------------

    def heads(self) -> dict:
        return {
            node_id: codec.to_hex(node.chain.head.block_hash)
            for node_id, node in self.nodes.items()
        }

    def roots(self) -> dict:
        return {
            node_id: codec.to_hex(node.chain.head.state_root)
            for node_id, node in self.nodes.items()
        }

    def converged(self) -> bool:
        return len(set(self.heads().values())) == 1


# -- scenarios ------------------------------------------------------------------


@dataclass
class Scenario:
    setup: dict
    decisions: list  # [{"round": r, "team": name, ...}]

    @classmethod
    def parse(cls, text: str) -> "Scenario":
        setup = None
        decisions = []
        for lineno, raw in enumerate(text.splitlines(), 1):
            raw = raw.strip()
            if not raw or raw.startswith("#"):
                continue
            try:
                record = json.loads(raw)
            except json.JSONDecodeError as exc:
                raise ScenarioError(lineno, f"bad JSON: {exc}")
            if "setup" in record:
                if setup is not None:
                    raise ScenarioError(lineno, "second setup record")
                setup = record["setup"]
                continue
            if setup is None:
                raise ScenarioError(lineno, "first record must be the setup")
            missing = {"round", "team"} - set(record)
            if missing:
                raise ScenarioError(lineno, f"missing fields: {sorted(missing)}")
            respond = record.get("respond", "correct")
            if respond not in RESPOND_POLICIES:
                raise ScenarioError(lineno, f"bad respond policy {respond!r}")
            key = (record["round"], record["team"])
            if any((d["round"], d["team"]) == key for d in decisions):
                raise ScenarioError(lineno, f"duplicate decision for {key}")
            record["_line"] = lineno
            decisions.append(record)
        if setup is None:
            raise ScenarioError(0, "no setup record")
        return cls(setup=setup, decisions=decisions)

    @classmethod
    def load(cls, path) -> "Scenario":
        with open(path, "r", encoding="utf-8") as fh:
            return cls.parse(fh.read())

    def for_round(self, rnd: int) -> list:
        return [d for d in self.decisions if d["round"] == rnd]


@dataclass
class SimResult:
    transcript: list
    heads: dict
    roots: dict
    game_roots: dict
    blocks: int
    gas_total: int
    submitted_tx_hashes: list
    reverted: list  # (tx_hash, error) for committed-but-reverted txs
    net: VirtualNet = field(repr=False, default=None)

    def summary(self) -> dict:
        return {
            "converged": len(set(self.heads.values())) == 1,
            "heads": self.heads,
            "state_roots": self.roots,
            "game_storage_roots": self.game_roots,
            "blocks": self.blocks,
            "gas_total": str(self.gas_total),
            "txs_submitted": len(self.submitted_tx_hashes),
            "txs_reverted": [
                {"tx": codec.to_hex(h), "error": err} for h, err in self.reverted
            ],
        }

    def transcript_bytes(self) -> bytes:
        lines = [json.dumps(r, sort_keys=True, separators=(",", ":"))
                 for r in self.transcript]
        return ("\n".join(lines) + "\n").encode()


def build_net(setup: dict, consensus_override=None, nodes_override=None,
              seed_override=None) -> tuple:
    """Construct (net, cfg, team_nodes) for a scenario setup block."""
    doc = config_mod.default_config_doc()
    doc = config_mod.deep_merge(doc, setup.get("config", {}))
    kind = consensus_override or setup.get("consensus", doc["chain"]["consensus"])
    doc["chain"]["consensus"] = kind
    if "pow_difficulty_bits" in setup:
        doc["chain"]["pow_difficulty_bits"] = setup["pow_difficulty_bits"]
    if "rounds" in setup:
        doc["game"]["rounds_total"] = int(setup["rounds"])

    seed = seed_override if seed_override is not None else int(setup.get("seed", 0))
    latency = LatencyModel.from_doc(setup.get("latency"))
    team_names = list(doc["game"]["teams"])
    n_nodes = int(nodes_override or setup.get("nodes", len(team_names) + 1))
    if n_nodes < 1:
        raise ValueError("need at least one node")

    # Node 0 is the producing authority; teams spread over the remaining
    # nodes round-robin (or share node 0 if it is the only one).
    # Observer nodes need identities of their own; derive dev keys for them.
    specs = [("node0", "authority1", "authority")]
    for i in range(1, n_nodes):
        name = f"observer{i}"
        specs.append((f"node{i}", name, "observer"))
        if name not in doc["accounts"]:
            doc["accounts"][name] = {
                "seed": codec.to_hex(config_mod.dev_seed(name))
            }
    cfg = config_mod.EffectiveConfig.from_doc(doc)

    net = VirtualNet(cfg, specs, latency, seed)
    team_nodes = {}
    for i, team in enumerate(team_names):
        node_id = f"node{1 + i % (n_nodes - 1)}" if n_nodes > 1 else "node0"
        team_nodes[team] = node_id
    return net, cfg, team_nodes


def _decision_tx_args(cfg, decision: dict) -> tuple:
    """(plan_args, adjust_args) canonical encodings from a scenario record."""
    plan_args = None
    if decision.get("spend") is not None:
        spend = tuple(tuple(int(c) for c in row) for row in decision["spend"])
        plan_args = game.Plan(spend).encode()
    keywords = {
        int(ch): tuple(words)
        for ch, words in decision.get("keywords", {}).items()
    }
    weights = {seg: int(w) for seg, w in decision.get("weights", {}).items()}
    delta = decision.get("delta")
    spend_delta = (
        tuple(tuple(int(c) for c in row) for row in delta) if delta else ()
    )
    adjust_args = None
    if keywords or weights or spend_delta:
        adjust_args = game.Adjustment(
            keywords=keywords, target_weights=weights, spend_delta=spend_delta
        ).encode()
    return plan_args, adjust_args


def run_scenario(scenario: Scenario, consensus=None, nodes=None, seed=None,
                 stagger_ms: int = 7) -> SimResult:
    """Execute a scenario headlessly; returns transcript and final roots.

    Submissions within a phase are staggered by ``stagger_ms`` of virtual
    time per tx so latency models actually interleave deliveries.
    """
    net, cfg, team_nodes = build_net(scenario.setup, consensus, nodes, seed)
    admin = cfg.account("admin")
    scheduler = cfg.account("scheduler")
    producer = "node0"
    submitted = []
    for d in scenario.decisions:
        if d["team"] not in team_nodes:
            raise ScenarioError(d["_line"], f"unknown team {d['team']!r}")

    def submit(node_id, keypair, contract, method, args=b"",
               gas_limit=200_000):
        node = net.nodes[node_id]
        # nonce must reflect the *origin node's* view; quiesce first
        tx = node.build_tx(keypair, contract, method, args, gas_limit)
        accepted, reason = net.submit_tx(node_id, tx)
        if not accepted:
            raise ScenarioError(0, f"{method} rejected: {reason}")
        submitted.append(tx.tx_hash)
        net.advance_time(stagger_ms)
        return tx

    def mine():
        net.run_until_quiet()
        block = net.produce(producer)
        net.run_until_quiet()
        return block

    # deploy + configure + open round 1
    game_cfg = cfg.game_config()
    node0 = net.nodes[producer]
    nonce = node0.next_nonce(admin.address)
    from chainclass import vm
    from chainclass.node import build_tx as _build
    from chainclass.tx import DEPLOY_ADDRESS

    game_addr = vm.contract_address(admin.address, nonce)
    deploy = _build(admin.keypair, nonce, DEPLOY_ADDRESS, "deploy",
                    vm.encode_deploy_args(game.GAME_CODE_ID, scheduler.address),
                    200_000, cfg.gas_price)
    accepted, reason = net.submit_tx(producer, deploy)
    if not accepted:
        raise ScenarioError(0, f"deploy rejected: {reason}")
    submitted.append(deploy.tx_hash)
    submit(producer, admin.keypair, game_addr, "configure", game_cfg.encode())
    submit(producer, admin.keypair, game_addr, "advance")
    mine()

    rounds = game_cfg.rounds_total
    for rnd in range(1, rounds + 1):
        decisions = scenario.for_round(rnd)
        # Planning: plans from each team's own node
        for d in decisions:
            plan_args, _ = _decision_tx_args(cfg, d)
            if plan_args is None:
                continue
            team = cfg.account(d["team"])
            submit(team_nodes[d["team"]], team.keypair, game_addr,
                   "plan", plan_args)
        net.run_until_quiet()
        mine()
        # Planning -> Execution (event drawn)
        submit(producer, scheduler.keypair, game_addr, "advance")
        mine()
        raw = net.nodes[producer].chain.head_state.get_storage(
            game_addr, game.k_event(rnd))
        draw = market.EventDraw.decode(raw)
        # Execution: adjustments and event responses
        for d in decisions:
            _, adjust_args = _decision_tx_args(cfg, d)
            team = cfg.account(d["team"])
            if adjust_args is not None:
                if d.get("spend") is None:
                    raise ScenarioError(d["_line"], "adjustment without a plan")
                submit(team_nodes[d["team"]], team.keypair, game_addr,
                       "adjust", adjust_args)
            policy = d.get("respond", "correct")
            if draw.occurred and policy != "none":
                choice = draw.kind if policy == "correct" else (draw.kind + 1) % 4
                submit(team_nodes[d["team"]], team.keypair, game_addr,
                       "respond", bytes([choice]))
        net.run_until_quiet()
        mine()
        # Execution -> Reporting
        submit(producer, scheduler.keypair, game_addr, "advance")
        mine()
        # Reporting: purchases
        for d in decisions:
            if d.get("buy_report"):
                team = cfg.account(d["team"])
                submit(team_nodes[d["team"]], team.keypair, game_addr,
                       "buy_report", codec.enc_u64(rnd))
        net.run_until_quiet()
        mine()
        # Close (opens next round's planning)
        submit(producer, admin.keypair, game_addr, "close_round",
               gas_limit=400_000)
        mine()

    net.run_until_quiet()
    from chainclass import state as state_mod

    game_roots = {
        node_id: codec.to_hex(state_mod.storage_root(
            node.chain.head_state, game_addr))
        for node_id, node in net.nodes.items()
    }
    chain = net.nodes[producer].chain
    reverted = [
        (receipt.tx_hash, receipt.error)
        for receipts in chain.receipts for receipt in receipts
        if not receipt.ok
    ]
    return SimResult(
        transcript=net.transcript,
        heads=net.heads(),
        roots=net.roots(),
        game_roots=game_roots,
        blocks=chain.height,
        gas_total=sum(b.gas_used for b in chain.blocks),
        submitted_tx_hashes=submitted,
        reverted=reverted,
        net=net,
    )


# -- threaded mode ----------------------------------------------------------------


class ThreadedNet:
    """Real-thread variant: per-node locks, sleeping couriers.

    Delivery order is whatever the OS scheduler makes of it, so transcripts
    are not reproducible; the convergence invariant must still hold after
    ``join``. Used by benchmarks and one concurrency test.
    """

    def __init__(self, cfg, node_specs, latency: LatencyModel, seed: int):
        self.cfg = cfg
        self.latency = latency
        self.rng = random.Random(seed)
        self.nodes = {}
        self.locks = {}
        self.threads = []
        for node_id, account_name, role in node_specs:
            keypair = cfg.account(account_name).keypair
            self.nodes[node_id] = Node(node_id, keypair, cfg, role=role)
            self.locks[node_id] = threading.Lock()

    def _courier(self, target: str, kind: str, item) -> None:
        delay = self.latency.sample_ms(self.rng) / 1000.0
        if delay:
            time.sleep(delay)
        with self.locks[target]:
            node = self.nodes[target]
            if kind == "tx":
                node.submit_tx(item)
            else:
                node.receive_block(item)

    def _spawn(self, target: str, kind: str, item) -> None:
        t = threading.Thread(target=self._courier, args=(target, kind, item))
        t.start()
        self.threads.append(t)

    def submit_tx(self, node_id: str, tx) -> tuple:
        with self.locks[node_id]:
            accepted, reason = self.nodes[node_id].submit_tx(tx)
        if accepted:
            for peer in self.nodes:
                if peer != node_id:
                    self._spawn(peer, "tx", tx)
        return accepted, reason

    def produce(self, node_id: str, timestamp: int):
        with self.locks[node_id]:
            block = self.nodes[node_id].produce_block(timestamp=timestamp)
        if block is not None:
            for peer in self.nodes:
                if peer != node_id:
                    self._spawn(peer, "block", block)
        return block

    def join(self) -> None:
        while True:
            live = [t for t in self.threads if t.is_alive()]
            if not live:
                return
            for t in live:
                t.join()

    def heads(self) -> dict:
        return {
            node_id: codec.to_hex(node.chain.head.block_hash)
            for node_id, node in self.nodes.items()
        }
