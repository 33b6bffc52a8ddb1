"""Shared fixtures: configs, single-node game harness, acceptance reporting."""

import json
import time

import pytest

from chainclass import codec, config as config_mod, game, market, state as state_mod, vm
from chainclass.node import Node
from chainclass.tx import DEPLOY_ADDRESS


def make_cfg(overrides=None) -> config_mod.EffectiveConfig:
    return config_mod.load_config(overrides=overrides, environ={})


@pytest.fixture(scope="session")
def cfg():
    return make_cfg()


@pytest.fixture(scope="session")
def game_cfg(cfg):
    return cfg.game_config()


class GameHarness:
    """Single node driving a game through deploy/configure/advance/close.

    Each mine() seals whatever is pending; phase-changing txs always go in
    their own block so later txs see the new phase.
    """

    def __init__(self, cfg, *, configure=True, open_round=True):
        self.cfg = cfg
        self.node = Node("n0", cfg.account("authority1").keypair, cfg)
        self.admin = cfg.account("admin")
        self.scheduler = cfg.account("scheduler")
        self.game_addr = None
        if configure:
            self.deploy_and_configure(open_round=open_round)

    # -- tx plumbing --------------------------------------------------------

    def submit(self, account, method, args=b"", gas_limit=200_000):
        keypair = self.cfg.account(account).keypair
        return self.node.submit_call(keypair, self.game_addr, method, args, gas_limit)

    def mine(self):
        block = self.node.produce_block()
        assert block is not None
        return block

    def call(self, account, method, args=b"", gas_limit=200_000):
        """Submit one tx, mine it, and return its receipt."""
        tx = self.submit(account, method, args, gas_limit)
        self.mine()
        return self.receipt(tx)

    def receipt(self, tx):
        found = self.node.chain.find_tx(tx.tx_hash)
        assert found is not None
        _, receipt = found
        return receipt

    # -- game lifecycle -----------------------------------------------------

    def deploy_and_configure(self, open_round=True):
        self.game_addr = self.node.deploy_contract(
            self.admin.keypair, game.GAME_CODE_ID, self.scheduler.address)
        self.node.submit_call(
            self.admin.keypair, self.game_addr, "configure",
            self.cfg.game_config().encode())
        self.mine()
        if open_round:
            self.advance("admin")

    def advance(self, account="scheduler"):
        return self.call(account, "advance")

    def close_round(self):
        return self.call("admin", "close_round", gas_limit=400_000)

    def plan(self, team, spend, mine=True):
        tx = self.submit(team, "plan", game.Plan(spend=spend).encode())
        if mine:
            self.mine()
            return self.receipt(tx)
        return tx

    def storage(self, key):
        return self.node.chain.head_state.get_storage(self.game_addr, key)

    @property
    def state(self):
        return self.node.chain.head_state

    def phase(self):
        return self.storage(game.k_phase())[0]

    def round(self):
        return codec.Reader(self.storage(game.k_round())).u64()

    def event_draw(self, rnd):
        return market.EventDraw.decode(self.storage(game.k_event(rnd)))

    def game_root(self):
        return state_mod.storage_root(self.state, self.game_addr)


@pytest.fixture
def harness(cfg):
    return GameHarness(cfg)


def flat_plan(game_cfg, total):
    """Spread `total` tokens over a product x channel matrix, cell-major."""
    n_p, n_c = len(game_cfg.products), len(game_cfg.channels)
    cells = n_p * n_c
    base, extra = divmod(total, cells)
    flat = [base + (1 if i < extra else 0) for i in range(cells)]
    return tuple(tuple(flat[p * n_c + c] for c in range(n_c)) for p in range(n_p))


# -- acceptance criteria reporting ------------------------------------------

ACCEPTANCE_LINES = []


def record_acceptance(name, ok, detail=""):
    status = "PASS" if ok else "FAIL"
    ACCEPTANCE_LINES.append(f"[{status}] {name}: {detail}")
    assert ok, f"{name}: {detail}"


class Stopwatch:
    def __enter__(self):
        self.t0 = time.monotonic()
        return self

    def __exit__(self, *exc):
        self.elapsed = time.monotonic() - self.t0

    def within(self, limit_s):
        return self.elapsed < limit_s


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for line in ACCEPTANCE_LINES:
        terminalreporter.write_line(line)


def load_fixture(name):
    from pathlib import Path

    return json.loads((Path(__file__).parent / "fixtures" / name).read_text())
