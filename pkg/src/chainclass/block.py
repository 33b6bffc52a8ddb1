"""Blocks and seals.

The block hash covers every field except the seal, so PoW can search nonces
and PoS/PoA can sign the hash itself:

    header = "CCBK/1" || u64(index) || prev_hash(32) || u64(timestamp)
             || producer(20) || u32(n_tx) || enc_bytes(tx_wire)*
             || u64(gas_used) || state_root(32)
    block_hash = sha256(header)
    wire       = header || seal

Seal encodings:

    none (genesis)  0x00
    pow             0x01 || u8(difficulty_bits) || u64(nonce)
    pos             0x02 || signature(64)
    poa             0x03 || signature(64)

PoW blocks record the difficulty they were mined at so that cumulative
difficulty (the PoW fork-choice weight) is computable from the chain alone.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from functools import cached_property

from chainclass import codec
from chainclass.codec import Reader
from chainclass.crypto import ADDRESS_LEN, HASH_LEN, SIGNATURE_LEN, sha256
from chainclass.errors import NonCanonicalEncoding
from chainclass.tx import SignedTransaction, decode_transaction

BLOCK_MAGIC = b"CCBK/1"

SEAL_NONE = 0
SEAL_POW = 1
SEAL_POS = 2
SEAL_POA = 3

GENESIS_PREV_HASH = b"\x00" * HASH_LEN


@dataclass(frozen=True)
class Seal:
    kind: int = SEAL_NONE
    difficulty_bits: int = 0
    nonce: int = 0
    signature: bytes = b""

    def encode(self) -> bytes:
        if self.kind == SEAL_NONE:
            return codec.enc_u8(SEAL_NONE)
        if self.kind == SEAL_POW:
            return (
                codec.enc_u8(SEAL_POW)
                + codec.enc_u8(self.difficulty_bits)
                + codec.enc_u64(self.nonce)
            )
        if self.kind in (SEAL_POS, SEAL_POA):
            if len(self.signature) != SIGNATURE_LEN:
                raise ValueError("seal signature must be 64 bytes")
            return codec.enc_u8(self.kind) + self.signature
        raise ValueError(f"unknown seal kind {self.kind}")

    @classmethod
    def decode(cls, r: Reader) -> "Seal":
        kind = r.u8()
        if kind == SEAL_NONE:
            return cls(kind=SEAL_NONE)
        if kind == SEAL_POW:
            return cls(kind=SEAL_POW, difficulty_bits=r.u8(), nonce=r.u64())
        if kind in (SEAL_POS, SEAL_POA):
            return cls(kind=kind, signature=r.take(SIGNATURE_LEN))
        raise NonCanonicalEncoding(f"unknown seal kind {kind}")


@dataclass(frozen=True)
class Block:
    index: int
    prev_hash: bytes
    timestamp: int
    producer: bytes
    transactions: tuple
    gas_used: int
    state_root: bytes
    seal: Seal

    def header_bytes(self) -> bytes:
        parts = [
            BLOCK_MAGIC,
            codec.enc_u64(self.index),
            self.prev_hash,
            codec.enc_u64(self.timestamp),
            self.producer,
            codec.enc_u32(len(self.transactions)),
        ]
        parts.extend(codec.enc_bytes(tx.wire()) for tx in self.transactions)
        parts.append(codec.enc_u64(self.gas_used))
        parts.append(self.state_root)
        return b"".join(parts)

    @cached_property
    def block_hash(self) -> bytes:
        return sha256(self.header_bytes())

    def wire(self) -> bytes:
        return self.header_bytes() + self.seal.encode()

    def with_seal(self, seal: Seal) -> "Block":
        return replace(self, seal=seal)


def block_hash(block: Block) -> bytes:
    return block.block_hash


def decode_block(data: bytes) -> Block:
    r = Reader(data)
    if r.take(len(BLOCK_MAGIC)) != BLOCK_MAGIC:
        raise NonCanonicalEncoding("bad block magic")
    index = r.u64()
    prev_hash = r.take(HASH_LEN)
    timestamp = r.u64()
    producer = r.take(ADDRESS_LEN)
    n_tx = r.u32()
    txs = []
    for _ in range(n_tx):
        txs.append(decode_transaction(r.bytes_()))
    gas_used = r.u64()
    state_root = r.take(HASH_LEN)
    seal = Seal.decode(r)
    r.expect_end()
    return Block(
        index=index,
        prev_hash=prev_hash,
        timestamp=timestamp,
        producer=producer,
        transactions=tuple(txs),
        gas_used=gas_used,
        state_root=state_root,
        seal=seal,
    )
