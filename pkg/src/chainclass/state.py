"""World state and its Merkle root.

The state is four maps: balances, nonces, contract records, and per-contract
key-value storage. The root is a binary Merkle tree over the flattened entry
list sorted by key bytes, so insertion order never affects it. Zero balances,
zero nonces, and empty storage values are omitted, making "never touched" and
"set back to nothing" indistinguishable, which keeps roots comparable across
nodes that saw different intermediate states.

Tree construction (documented byte-exactly in docs/protocol.md):

- entry keys:  b"b"+addr | b"n"+addr | b"c"+addr | b"s"+addr+storage_key
- leaf         sha256(0x00 || enc_bytes(key) || enc_bytes(value))
- inner node   sha256(0x01 || left || right); an odd last node is promoted
- empty tree   sha256(0x02)
"""

from __future__ import annotations

from dataclasses import dataclass, field

from chainclass import codec
from chainclass.crypto import sha256

EMPTY_ROOT = sha256(b"\x02")


@dataclass(frozen=True)
class ContractRecord:
    """Deployed contract identity; immutable after deploy."""

    address: bytes
    code_id: str
    code_hash: bytes
    version: str

    def encode(self) -> bytes:
        return (
            codec.enc_str(self.code_id)
            + self.code_hash
            + codec.enc_str(self.version)
        )


@dataclass
class WorldState:
    """Balances, nonces, contracts, and contract storage."""

    balances: dict = field(default_factory=dict)
    nonces: dict = field(default_factory=dict)
    contracts: dict = field(default_factory=dict)
    storage: dict = field(default_factory=dict)

    def copy(self) -> "WorldState":
        return WorldState(
            balances=dict(self.balances),
            nonces=dict(self.nonces),
            contracts=dict(self.contracts),
            storage=dict(self.storage),
        )

    def balance(self, addr: bytes) -> int:
        return self.balances.get(addr, 0)

    def nonce(self, addr: bytes) -> int:
        return self.nonces.get(addr, 0)

    def get_storage(self, contract: bytes, key: bytes) -> bytes:
        return self.storage.get((contract, key), b"")

    def set_storage(self, contract: bytes, key: bytes, value: bytes) -> None:
        if value:
            self.storage[(contract, key)] = value
        else:
            self.storage.pop((contract, key), None)

    def total_supply(self) -> int:
        return sum(self.balances.values())

    def root(self) -> bytes:
        return compute_state_root(self)


def state_entries(state: WorldState) -> list:
    """Flatten the state into (key, value) pairs; zero-values omitted."""
    entries = []
    for addr, bal in state.balances.items():
        if bal:
            entries.append((b"b" + addr, codec.enc_u128(bal)))
    for addr, nonce in state.nonces.items():
        if nonce:
            entries.append((b"n" + addr, codec.enc_u64(nonce)))
    for addr, rec in state.contracts.items():
        entries.append((b"c" + addr, rec.encode()))
    for (addr, key), value in state.storage.items():
        if value:
            entries.append((b"s" + addr + key, value))
    entries.sort(key=lambda kv: kv[0])
    return entries


def merkle_root(leaves: list) -> bytes:
    if not leaves:
        return EMPTY_ROOT
    level = leaves
    while len(level) > 1:
        nxt = []
        for i in range(0, len(level) - 1, 2):
            nxt.append(sha256(b"\x01" + level[i] + level[i + 1]))
        if len(level) % 2:
            nxt.append(level[-1])
        level = nxt
    return level[0]


def compute_state_root(state: WorldState) -> bytes:
    leaves = [
        sha256(b"\x00" + codec.enc_bytes(k) + codec.enc_bytes(v))
        for k, v in state_entries(state)
    ]
    return merkle_root(leaves)


def storage_root(state: WorldState, contract: bytes) -> bytes:
    """Root over a single contract's storage entries, same tree rules.

    Lets two chains be compared on game outcomes alone, ignoring
    engine-dependent fields like producer fee balances.
    """
    entries = sorted(
        (b"s" + addr + key, value)
        for (addr, key), value in state.storage.items()
        if addr == contract and value
    )
    leaves = [
        sha256(b"\x00" + codec.enc_bytes(k) + codec.enc_bytes(v))
        for k, v in entries
    ]
    return merkle_root(leaves)
