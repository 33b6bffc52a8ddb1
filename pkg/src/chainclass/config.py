"""Layered runtime configuration.

Precedence, lowest to highest: built-in defaults, config file, environment
variables (prefix CHAINCLASS_, nested path by double underscore, e.g.
CHAINCLASS_CHAIN__CONSENSUS=pow), explicit overrides (CLI flags). The merged
document is a plain JSON-shaped dict; EffectiveConfig resolves it into keys,
addresses, consensus parameters, and the game configuration.

Money and gas values are decimal strings in the document (64-bit integers
overflow common JSON consumers); counts and ports are plain ints.

The default accounts are DEVELOPMENT keys derived from fixed public seeds so
every checkout boots an identical playable chain. Anything beyond a classroom
demo must supply its own accounts.
"""

from __future__ import annotations

import copy
import json
import os
from dataclasses import dataclass

from chainclass import codec, consensus, game, units, vm
from chainclass.crypto import KeyPair, sha256

ENV_PREFIX = "CHAINCLASS_"
DEV_SEED_TAG = b"chainclass/dev/"

DEFAULT_ACCOUNTS = (
    "admin",
    "scheduler",
    "treasury",
    "authority1",
    "team1",
    "team2",
    "team3",
    "team4",
)

_DEMAND_DEFAULTS = {
    "students": (1200, 1150, 1250, 1300, 1200, 1100, 1250, 1350),
    "professionals": (900, 920, 880, 940, 900, 950, 910, 930),
    "seniors": (600, 620, 640, 600, 580, 630, 610, 650),
}


def dev_seed(name: str) -> bytes:
    """Deterministic 32-byte seed for a named development account."""
    return sha256(DEV_SEED_TAG + name.encode())


def default_config_doc() -> dict:
    """The built-in configuration document; callers may mutate their copy."""
    demand = [
        {"segment": seg, "round": rnd + 1, "units": str(u)}
        for seg in sorted(_DEMAND_DEFAULTS)
        for rnd, u in enumerate(_DEMAND_DEFAULTS[seg])
    ]
    return {
        "chain": {
            "consensus": "poa",
            "pow_difficulty_bits": 12,
            "gas_price": "20000000000",
            "block_gas_limit": "6721975",
            "gas_schedule": {
                "tx_base": "21000",
                "per_payload_byte": "16",
                "per_storage_read": "200",
                "per_storage_write": "5000",
                "per_report_render": "1000",
            },
            "genesis_timestamp": 0,
            "authorities": ["authority1"],
            "validators": ["authority1"],
            "admin": "admin",
        },
        "accounts": {
            name: {"seed": codec.to_hex(dev_seed(name))}
            for name in DEFAULT_ACCOUNTS
        },
        "alloc": {
            "admin": "100000",
            "scheduler": "1000",
            "treasury": "2000000",
            "authority1": "10000",
            "team1": "100000",
            "team2": "100000",
            "team3": "100000",
            "team4": "100000",
        },
        "game": {
            "teams": ["team1", "team2", "team3", "team4"],
            "treasury": "treasury",
            "products": [
                {"name": "Pebble Mini", "unit_price": "30", "segment": "students"},
                {"name": "Pebble One", "unit_price": "55", "segment": "professionals"},
                {"name": "Pebble Max", "unit_price": "80", "segment": "seniors"},
            ],
            "channels": [
                {
                    "name": "search",
                    "reach": {"students": "0.7", "professionals": "0.8", "seniors": "0.5"},
                    "keywords": ["price", "compare", "best", "deal", "review"],
                },
                {
                    "name": "social",
                    "reach": {"students": "0.9", "professionals": "0.5", "seniors": "0.2"},
                    "keywords": ["trend", "share", "video", "unboxing", "challenge"],
                },
                {
                    "name": "display",
                    "reach": {"students": "0.5", "professionals": "0.6", "seniors": "0.6"},
                    "keywords": ["banner", "brand", "style", "launch", "design"],
                },
                {
                    "name": "email",
                    "reach": {"students": "0.3", "professionals": "0.7", "seniors": "0.8"},
                    "keywords": ["offer", "loyalty", "discount", "update", "news"],
                },
            ],
            "weekly_budget": "10000",
            "report_price": "500",
            "adjustment_cap": "0.2",
            "rounds_total": 8,
            "cadence": "weekly",
            "event_probability": "0.3",
            "event_penalty": "0.8",
            "concentration_gain": "0.25",
            "demand": demand,
        },
        "api": {
            "host": "127.0.0.1",
            "port": 8545,
            "session_ttl_s": 3600,
            "instamine": True,
            "block_time_s": 0,
        },
    }


def deep_merge(base: dict, override: dict) -> dict:
    """Recursive dict merge; override wins, non-dict values replace."""
    merged = dict(base)
    for key, value in override.items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = deep_merge(merged[key], value)
        else:
            merged[key] = value
    return merged


def env_overrides(environ=None) -> dict:
    """CHAINCLASS_A__B=v -> {"a": {"b": parsed(v)}}; JSON values if valid."""
    environ = os.environ if environ is None else environ
    doc = {}
    for key, raw in environ.items():
        if not key.startswith(ENV_PREFIX):
            continue
        path = [p.lower() for p in key[len(ENV_PREFIX):].split("__")]
        try:
            value = json.loads(raw)
        except json.JSONDecodeError:
            value = raw
        node = doc
        for part in path[:-1]:
            node = node.setdefault(part, {})
        node[path[-1]] = value
    return doc


def load_config_doc(path=None, overrides=None, environ=None) -> dict:
    """Merge defaults <- file <- env <- overrides into one document."""
    doc = default_config_doc()
    if path is not None:
        with open(path, "r", encoding="utf-8") as fh:
            doc = deep_merge(doc, json.load(fh))
    doc = deep_merge(doc, env_overrides(environ))
    if overrides:
        doc = deep_merge(doc, overrides)
    return doc


@dataclass(frozen=True)
class Account:
    name: str
    keypair: KeyPair

    @property
    def address(self) -> bytes:
        return self.keypair.address


class EffectiveConfig:
    """A validated, resolved view over a merged configuration document."""

    def __init__(self, doc: dict):
        self.doc = doc
        self._accounts = {}
        for name, spec in doc.get("accounts", {}).items():
            seed = codec.from_hex(spec["seed"])
            self._accounts[name] = Account(name=name, keypair=KeyPair.from_seed(seed))
        chain = doc["chain"]
        self.consensus_kind = chain["consensus"]
        self.pow_difficulty_bits = int(chain["pow_difficulty_bits"])
        self.gas_price = int(chain["gas_price"])
        self.block_gas_limit = int(chain["block_gas_limit"])
        self.genesis_timestamp = int(chain.get("genesis_timestamp", 0))
        self.admin_address = self.resolve_address(chain["admin"])
        self.params = consensus.ConsensusParams(
            kind=self.consensus_kind,
            pow_difficulty_bits=self.pow_difficulty_bits,
            poa_authorities=tuple(
                self.resolve_address(a) for a in chain.get("authorities", ())
            ),
            pos_validators=tuple(
                self.resolve_address(v) for v in chain.get("validators", ())
            ),
            keys={
                acct.address: acct.keypair.public_bytes
                for acct in self._accounts.values()
            },
        )
        self.params.validate()
        sched = chain["gas_schedule"]
        self.gas_schedule = vm.GasSchedule(
            tx_base=int(sched["tx_base"]),
            per_payload_byte=int(sched["per_payload_byte"]),
            per_storage_read=int(sched["per_storage_read"]),
            per_storage_write=int(sched["per_storage_write"]),
            per_report_render=int(sched["per_report_render"]),
        )

    @classmethod
    def from_doc(cls, doc: dict) -> "EffectiveConfig":
        return cls(copy.deepcopy(doc))

    # -- names and addresses ---------------------------------------------------

    def account(self, name: str) -> Account:
        acct = self._accounts.get(name)
        if acct is None:
            raise KeyError(f"no account named {name!r} in config")
        return acct

    def account_names(self) -> tuple:
        return tuple(self._accounts)

    def resolve_address(self, token: str) -> bytes:
        """Account name or 0x hex -> 20-byte address."""
        if token in self._accounts:
            return self._accounts[token].address
        if token.startswith("0x"):
            raw = codec.from_hex(token)
            if len(raw) == 20:
                return raw
        raise KeyError(f"cannot resolve address {token!r}")

    def name_of(self, addr: bytes):
        for name, acct in self._accounts.items():
            if acct.address == addr:
                return name
        return None

    # -- genesis and game -------------------------------------------------------

    def alloc(self) -> dict:
        """Genesis allocation, address -> subunits."""
        out = {}
        for token, amount in self.doc.get("alloc", {}).items():
            addr = self.resolve_address(token)
            out[addr] = out.get(addr, 0) + units.parse_tokens(amount)
        return out

    def game_config(self) -> game.GameConfig:
        g = self.doc["game"]
        doc = {
            "teams": [codec.to_hex(self.resolve_address(t)) for t in g["teams"]],
            "treasury": codec.to_hex(self.resolve_address(g["treasury"])),
            "products": g["products"],
            "channels": g["channels"],
            "weekly_budget": g["weekly_budget"],
            "report_price": g["report_price"],
            "adjustment_cap": g["adjustment_cap"],
            "rounds_total": g["rounds_total"],
            "cadence": g["cadence"],
            "event_probability": g["event_probability"],
            "event_penalty": g["event_penalty"],
            "concentration_gain": g["concentration_gain"],
            "demand": g["demand"],
            "gas_price": self.doc["chain"]["gas_price"],
            "block_gas_limit": self.doc["chain"]["block_gas_limit"],
            "budget_carryover": g.get("budget_carryover", False),
        }
        cfg = game.GameConfig.from_json(doc)
        cfg.validate()
        return cfg

    # -- api ------------------------------------------------------------------

    @property
    def api(self) -> dict:
        return self.doc.get("api", {})


def load_config(path=None, overrides=None, environ=None) -> EffectiveConfig:
    return EffectiveConfig(load_config_doc(path, overrides, environ))
