"""Canonical chain: block execution, validation, replay, and persistence.

A Chain is the linear, fully validated history one node treats as canonical.
Every append re-executes the block's transactions against the parent state
and insists the declared state root matches, so a Chain can never hold a
block whose effects it has not reproduced. Fork bookkeeping (competing tips,
reorgs) lives in the node layer; this module only knows how to build, check,
extend, and replay one chain.

Persisted form (``save``/``load``): the magic line, the genesis allocation,
then length-prefixed canonical block encodings, append-only.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

from chainclass import codec, consensus, vm
from chainclass.block import (
    GENESIS_PREV_HASH,
    SEAL_NONE,
    Block,
    Seal,
    decode_block,
)
from chainclass.codec import Reader
from chainclass.crypto import ADDRESS_LEN, ZERO_ADDRESS
from chainclass.errors import (
    BadLink,
    BadStateRoot,
    BadTx,
    ChainClassError,
    CorruptFile,
    GasOverflow,
)
from chainclass.state import WorldState
from chainclass.tx import SignedTransaction, verify_transaction

LOG_MAGIC = b"CCLOG/1\n"


def build_genesis(alloc: dict, timestamp: int = 0) -> tuple:
    """Genesis block and state from an address -> subunits allocation."""
    state = WorldState(balances={a: b for a, b in alloc.items() if b})
    block = Block(
        index=0,
        prev_hash=GENESIS_PREV_HASH,
        timestamp=timestamp,
        producer=ZERO_ADDRESS,
        transactions=(),
        gas_used=0,
        state_root=state.root(),
        seal=Seal(kind=SEAL_NONE),
    )
    return block, state


def encode_alloc(alloc: dict) -> bytes:
    parts = [codec.enc_u32(len(alloc))]
    for addr in sorted(alloc):
        parts.append(addr)
        parts.append(codec.enc_u128(alloc[addr]))
    return b"".join(parts)


def decode_alloc(r: Reader) -> dict:
    alloc = {}
    prev = None
    for _ in range(r.u32()):
        addr = r.take(ADDRESS_LEN)
        if prev is not None and addr <= prev:
            raise CorruptFile("genesis allocation not sorted")
        prev = addr
        alloc[addr] = r.u128()
    return alloc


def execute_block(parent_state: WorldState, block: Block,
                  schedule: vm.GasSchedule, admin: bytes,
                  block_gas_limit: int) -> tuple:
    """Re-execute a block's txs on the parent state.

    Returns (state, receipts) where state includes the producer's fee
    credit. Raises BadTx or GasOverflow; state-root comparison is the
    caller's job since only it knows the declared root.
    """
    state = parent_state.copy()
    ctx = vm.BlockContext(height=block.index, prev_hash=block.prev_hash)
    receipts = []
    fees = 0
    gas_total = 0
    for i, tx in enumerate(block.transactions):
        try:
            verify_transaction(tx)
            vm.check_admission(state, tx)
        except ChainClassError as exc:
            raise BadTx(i, str(exc)) from exc
        state, receipt = vm.execute(state, tx, ctx, schedule, admin)
        receipts.append(receipt)
        fees += receipt.gas_used * tx.gas_price
        gas_total += receipt.gas_used
        if gas_total > block_gas_limit:
            raise GasOverflow(
                f"block uses {gas_total} gas, limit {block_gas_limit}"
            )
    if fees:
        state.balances[block.producer] = state.balance(block.producer) + fees
    return state, tuple(receipts)


class Chain:
    """A validated linear chain plus the state and receipts at every height."""

    def __init__(self, genesis_block: Block, genesis_state: WorldState,
                 params: consensus.ConsensusParams, schedule: vm.GasSchedule,
                 admin: bytes, block_gas_limit: int, alloc: dict):
        if genesis_block.state_root != genesis_state.root():
            raise BadLink("genesis state root mismatch")
        self.params = params
        self.schedule = schedule
        self.admin = admin
        self.block_gas_limit = block_gas_limit
        self.alloc = dict(alloc)
        self.blocks = [genesis_block]
        self.states = [genesis_state]
        self.receipts = [()]

    @classmethod
    def from_genesis(cls, alloc: dict, params: consensus.ConsensusParams,
                     schedule: vm.GasSchedule, admin: bytes,
                     block_gas_limit: int, timestamp: int = 0) -> "Chain":
        block, state = build_genesis(alloc, timestamp)
        return cls(block, state, params, schedule, admin,
                   block_gas_limit, alloc)

    # -- views ---------------------------------------------------------------

    @property
    def head(self) -> Block:
        return self.blocks[-1]

    @property
    def head_state(self) -> WorldState:
        return self.states[-1]

    @property
    def height(self) -> int:
        return self.head.index

    def block_at(self, index: int) -> Block:
        return self.blocks[index]

    def state_at(self, index: int) -> WorldState:
        return self.states[index]

    def receipts_at(self, index: int) -> tuple:
        return self.receipts[index]

    def find_tx(self, tx_hash: bytes):
        """(block, receipt) for a committed tx, or None."""
        for height, block in enumerate(self.blocks):
            for i, tx in enumerate(block.transactions):
                if tx.tx_hash == tx_hash:
                    return block, self.receipts[height][i]
        return None

    def total_weight(self) -> int:
        return sum(consensus.block_weight(b) for b in self.blocks[1:])

    def prefix(self, index: int) -> "Chain":
        """A new Chain holding heights 0..index (shared immutable entries)."""
        if not 0 <= index <= self.height:
            raise BadLink(f"no block at height {index}")
        out = Chain(self.blocks[0], self.states[0], self.params,
                    self.schedule, self.admin, self.block_gas_limit,
                    self.alloc)
        out.blocks = self.blocks[: index + 1]
        out.states = self.states[: index + 1]
        out.receipts = self.receipts[: index + 1]
        return out

    # -- growing the chain ---------------------------------------------------

    def validate_child(self, block: Block) -> tuple:
        """Check a candidate against the head; returns (state, receipts)."""
        head = self.head
        if block.prev_hash != head.block_hash:
            raise BadLink("prev_hash does not match head")
        if block.index != head.index + 1:
            raise BadLink(
                f"index {block.index} after head index {head.index}"
            )
        if block.timestamp < head.timestamp:
            raise BadLink("timestamp before parent")
        consensus.verify_seal(self.params, block, self.head_state)
        state, receipts = execute_block(
            self.head_state, block, self.schedule, self.admin,
            self.block_gas_limit,
        )
        declared = sum(r.gas_used for r in receipts)
        if declared != block.gas_used:
            raise BadLink(
                f"declared gas_used {block.gas_used}, executed {declared}"
            )
        if state.root() != block.state_root:
            raise BadStateRoot("state root mismatch after execution")
        return state, receipts

    def append(self, block: Block) -> tuple:
        """Validate and append; returns the block's receipts."""
        state, receipts = self.validate_child(block)
        self.blocks.append(block)
        self.states.append(state)
        self.receipts.append(receipts)
        return receipts

    def produce(self, keypair, txs, timestamp: int | None = None) -> tuple:
        """Execute txs on the head, seal, append. Returns (block, attempts).

        Callers pass admission-checked txs in order; anything that no longer
        passes admission (stale nonce after a competing tx, drained balance)
        is skipped rather than failing the block. Gas is reserved by each
        tx's gas_limit, so the block can never exceed the gas limit even if
        every tx burns its whole budget.
        """
        if timestamp is None:
            timestamp = max(int(time.time()), self.head.timestamp)
        producer = keypair.address
        state = self.head_state.copy()
        ctx = vm.BlockContext(height=self.height + 1,
                              prev_hash=self.head.block_hash)
        included = []
        receipts = []
        fees = 0
        reserved = 0
        for tx in txs:
            if reserved + tx.gas_limit > self.block_gas_limit:
                continue
            try:
                verify_transaction(tx)
                vm.check_admission(state, tx)
            except ChainClassError:
                continue
            state, receipt = vm.execute(state, tx, ctx, self.schedule,
                                        self.admin)
            included.append(tx)
            receipts.append(receipt)
            fees += receipt.gas_used * tx.gas_price
            reserved += tx.gas_limit
        if fees:
            state.balances[producer] = state.balance(producer) + fees
        unsealed = Block(
            index=self.height + 1,
            prev_hash=self.head.block_hash,
            timestamp=timestamp,
            producer=producer,
            transactions=tuple(included),
            gas_used=sum(r.gas_used for r in receipts),
            state_root=state.root(),
            seal=Seal(kind=SEAL_NONE),
        )
        seal, attempts = consensus.make_seal(self.params, unsealed, keypair)
        block = unsealed.with_seal(seal)
        self.blocks.append(block)
        self.states.append(state)
        self.receipts.append(tuple(receipts))
        return block, attempts

    # -- whole-chain checks ----------------------------------------------------

    def verify_full(self) -> int:
        """Re-validate every link and every execution from genesis.

        Returns the number of blocks checked; raises the first error found,
        with the failing height in the message.
        """
        if self.blocks[0].prev_hash != GENESIS_PREV_HASH:
            raise BadLink("height 0: genesis prev_hash not zero")
        if self.blocks[0].state_root != self.states[0].root():
            raise BadStateRoot("height 0: genesis state root mismatch")
        replica = Chain(self.blocks[0], self.states[0], self.params,
                        self.schedule, self.admin, self.block_gas_limit,
                        self.alloc)
        for block in self.blocks[1:]:
            try:
                replica.append(block)
            except ChainClassError as exc:
                raise _at_height(exc, block.index)
        return len(self.blocks)


def replay(blocks, genesis_state: WorldState,
           params: consensus.ConsensusParams, schedule: vm.GasSchedule,
           admin: bytes, block_gas_limit: int) -> Chain:
    """Rebuild a full Chain from raw blocks, validating everything."""
    if not blocks:
        raise BadLink("empty block list")
    chain = Chain(blocks[0], genesis_state, params, schedule, admin,
                  block_gas_limit, alloc={})
    for block in blocks[1:]:
        chain.append(block)
    return chain


# -- persistence ---------------------------------------------------------------


def _at_height(exc: ChainClassError, height: int) -> ChainClassError:
    """Prefix the failing height onto an error, keeping its class."""
    exc.args = (f"height {height}: {exc.args[0] if exc.args else ''}",)
    return exc


def save_chain(chain: Chain, path) -> None:
    with open(path, "wb") as fh:
        fh.write(LOG_MAGIC)
        fh.write(encode_alloc(chain.alloc))
        for block in chain.blocks:
            fh.write(codec.enc_bytes(block.wire()))


def load_chain(path, params: consensus.ConsensusParams,
               schedule: vm.GasSchedule, admin: bytes,
               block_gas_limit: int) -> Chain:
    """Load and fully re-validate a persisted chain."""
    with open(path, "rb") as fh:
        data = fh.read()
    if not data.startswith(LOG_MAGIC):
        raise CorruptFile("not a chain log")
    r = Reader(data[len(LOG_MAGIC):])
    try:
        alloc = decode_alloc(r)
        raw_blocks = []
        while r.remaining:
            raw_blocks.append(r.bytes_())
    except ChainClassError as exc:
        raise CorruptFile(f"chain log damaged: {exc}") from exc
    if not raw_blocks:
        raise CorruptFile("chain log has no blocks")
    blocks = []
    for i, raw in enumerate(raw_blocks):
        try:
            blocks.append(decode_block(raw))
        except ChainClassError as exc:
            raise CorruptFile(f"height {i}: undecodable block: {exc}") from exc
    genesis_block, genesis_state = build_genesis(
        alloc, timestamp=blocks[0].timestamp
    )
    if genesis_block.block_hash != blocks[0].block_hash:
        raise CorruptFile("genesis block does not match its allocation")
    chain = Chain(genesis_block, genesis_state, params, schedule, admin,
                  block_gas_limit, alloc)
    for block in blocks[1:]:
        try:
            chain.append(block)
        except ChainClassError as exc:
            raise _at_height(exc, block.index)
    return chain


def export_json(chain: Chain) -> dict:
    """Human-readable dump of every block and tx (hex hashes, string money)."""
    return {
        "height": chain.height,
        "head": codec.to_hex(chain.head.block_hash),
        "blocks": [_block_json(b) for b in chain.blocks],
    }


def _block_json(block: Block) -> dict:
    return {
        "index": block.index,
        "hash": codec.to_hex(block.block_hash),
        "prev_hash": codec.to_hex(block.prev_hash),
        "timestamp": block.timestamp,
        "producer": codec.to_hex(block.producer),
        "gas_used": str(block.gas_used),
        "state_root": codec.to_hex(block.state_root),
        "seal": _seal_json(block.seal),
        "transactions": [_tx_json(tx) for tx in block.transactions],
    }


def _seal_json(seal: Seal) -> dict:
    doc = {"kind": seal.kind}
    if seal.kind == 1:
        doc["difficulty_bits"] = seal.difficulty_bits
        doc["nonce"] = seal.nonce
    elif seal.kind in (2, 3):
        doc["signature"] = codec.to_hex(seal.signature)
    return doc


def _tx_json(tx: SignedTransaction) -> dict:
    return {
        "hash": codec.to_hex(tx.tx_hash),
        "nonce": tx.nonce,
        "from": codec.to_hex(tx.sender),
        "contract": codec.to_hex(tx.contract),
        "method": tx.method,
        "gas_limit": str(tx.gas_limit),
        "gas_price": str(tx.gas_price),
        "payload": codec.to_hex(tx.payload),
        "signature": codec.to_hex(tx.signature),
    }
