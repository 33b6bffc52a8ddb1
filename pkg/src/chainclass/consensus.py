"""Interchangeable block-sealing engines: PoW, PoS, and PoA.

- PoW: find a 64-bit nonce so sha256(block_hash || u64(nonce)) has at least
  ``difficulty_bits`` leading zero bits. Attempts are counted; the search is
  deterministic (nonce 0, 1, 2, ...), which keeps transcripts reproducible.
- PoS: the proposer is selected by mapping the parent block hash, taken as a
  uniform integer mod total stake, into the cumulative stake intervals of
  validators sorted by address; the seal is the proposer's signature over the
  block hash. Stake is the validator's balance at the parent state.
- PoA: round-robin over a fixed authority list by height; the seal is the
  authority's signature over the block hash.

Fork choice: PoA and PoS prefer the higher chain, ties broken by the lower
head hash; PoW prefers the larger cumulative difficulty (sum of 2**bits per
block), same tie-break.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

from chainclass import codec
from chainclass.block import SEAL_NONE, SEAL_POA, SEAL_POS, SEAL_POW, Block, Seal
from chainclass.crypto import KeyPair, sha256, verify
from chainclass.errors import BadSeal, EmptyAuthoritySet, NoStake, WrongProposer

POW = "pow"
POS = "pos"
POA = "poa"
KINDS = (POW, POS, POA)

SEAL_KIND = {POW: SEAL_POW, POS: SEAL_POS, POA: SEAL_POA}


@dataclass(frozen=True)
class ConsensusParams:
    kind: str
    pow_difficulty_bits: int = 12
    poa_authorities: tuple = ()
    pos_validators: tuple = ()
    # address -> Ed25519 public key, for verifying PoS/PoA seal signatures.
    keys: dict = field(default_factory=dict)

    def validate(self) -> None:
        if self.kind not in KINDS:
            raise ValueError(f"unknown consensus kind {self.kind!r}")
        if self.kind == POW and not 1 <= self.pow_difficulty_bits <= 64:
            raise ValueError("difficulty_bits must be in [1, 64]")
        if self.kind == POA and not self.poa_authorities:
            raise EmptyAuthoritySet("PoA needs at least one authority")
        if self.kind == POS and not self.pos_validators:
            raise NoStake("PoS needs at least one validator")


def leading_zero_bits(digest: bytes) -> int:
    n = int.from_bytes(digest, "big")
    return 256 - n.bit_length()


def pow_meets(header_hash: bytes, nonce: int, difficulty_bits: int) -> bool:
    digest = sha256(header_hash + codec.enc_u64(nonce))
    return leading_zero_bits(digest) >= difficulty_bits


def seal_pow(header_hash: bytes, difficulty_bits: int) -> tuple:
    """Search nonces from zero; returns (Seal, attempts)."""
    if not 1 <= difficulty_bits <= 64:
        raise ValueError("difficulty_bits must be in [1, 64]")
    nonce = 0
    attempts = 0
    while True:
        attempts += 1
        if pow_meets(header_hash, nonce, difficulty_bits):
            return Seal(kind=SEAL_POW, difficulty_bits=difficulty_bits, nonce=nonce), attempts
        nonce += 1


def select_proposer_poa(height: int, authorities: tuple) -> bytes:
    if not authorities:
        raise EmptyAuthoritySet("empty authority set")
    return authorities[height % len(authorities)]


def select_proposer_pos(seed: bytes, stakes: dict) -> bytes:
    """Stake-weighted choice, deterministic in (seed, stakes).

    Addresses are visited in canonical byte order; the seed picks a point in
    [0, total_stake) and the owner of that cumulative interval proposes.
    """
    entries = sorted((a, s) for a, s in stakes.items() if s > 0)
    total = sum(s for _, s in entries)
    if total <= 0:
        raise NoStake("no validator with positive stake")
    point = int.from_bytes(seed, "big") % total
    acc = 0
    for addr, stake in entries:
        acc += stake
        if point < acc:
            return addr
    raise AssertionError("unreachable")


def pos_stakes(params: ConsensusParams, parent_state) -> dict:
    return {a: parent_state.balance(a) for a in params.pos_validators}


def expected_proposer(params: ConsensusParams, height: int, prev_hash: bytes,
                      parent_state) -> bytes | None:
    """The address allowed to produce at ``height``; None means anyone (PoW)."""
    if params.kind == POA:
        return select_proposer_poa(height, params.poa_authorities)
    if params.kind == POS:
        return select_proposer_pos(prev_hash, pos_stakes(params, parent_state))
    return None


def make_seal(params: ConsensusParams, block: Block, keypair: KeyPair) -> tuple:
    """Seal a block with the producer's engine. Returns (Seal, hash_attempts)."""
    if params.kind == POW:
        return seal_pow(block.block_hash, params.pow_difficulty_bits)
    sig = keypair.sign(block.block_hash)
    return Seal(kind=SEAL_KIND[params.kind], signature=sig), 0


def verify_seal(params: ConsensusParams, block: Block, parent_state) -> None:
    """Raise WrongProposer or BadSeal unless the seal is valid under params."""
    seal = block.seal
    if params.kind == POW:
        if seal.kind != SEAL_POW:
            raise BadSeal("expected a pow seal")
        if seal.difficulty_bits < params.pow_difficulty_bits:
            raise BadSeal(
                f"declared difficulty {seal.difficulty_bits} below "
                f"minimum {params.pow_difficulty_bits}"
            )
        if not pow_meets(block.block_hash, seal.nonce, seal.difficulty_bits):
            raise BadSeal("nonce does not meet the difficulty target")
        return

    if params.kind == POA:
        if seal.kind != SEAL_POA:
            raise BadSeal("expected a poa seal")
        expect = select_proposer_poa(block.index, params.poa_authorities)
    else:
        if seal.kind != SEAL_POS:
            raise BadSeal("expected a pos seal")
        expect = select_proposer_pos(block.prev_hash, pos_stakes(params, parent_state))
    if block.producer != expect:
        raise WrongProposer(
            f"producer {block.producer.hex()} is not the scheduled proposer"
        )
    pubkey = params.keys.get(block.producer)
    if pubkey is None:
        raise BadSeal("no registered key for producer")
    if not verify(pubkey, block.block_hash, seal.signature):
        raise BadSeal("seal signature does not verify")


def block_weight(block: Block) -> int:
    """Per-block fork-choice weight: 2**bits for PoW, 1 otherwise."""
    if block.seal.kind == SEAL_POW:
        return 1 << block.seal.difficulty_bits
    return 0 if block.seal.kind == SEAL_NONE else 1


def tip_is_better(kind: str, a_height: int, a_weight: int, a_hash: bytes,
                  b_height: int, b_weight: int, b_hash: bytes) -> bool:
    """True if tip A wins over tip B under the engine's fork-choice rule."""
    if kind == POW:
        key_a, key_b = a_weight, b_weight
    else:
        key_a, key_b = a_height, b_height
    if key_a != key_b:
        return key_a > key_b
    return a_hash < b_hash


@dataclass
class ConsensusMetrics:
    """Cost measurements backing the PoW/PoS/PoA comparison."""

    kind: str
    blocks_produced: int = 0
    hash_attempts: int = 0
    selection_hashes: int = 0
    wall_time: float = 0.0

    @property
    def attempts_per_block(self) -> float:
        if self.blocks_produced == 0:
            return 0.0
        return self.hash_attempts / self.blocks_produced

    def csv_row(self) -> str:
        return (
            f"{self.kind},{self.blocks_produced},{self.hash_attempts},"
            f"{self.wall_time:.6f},{self.attempts_per_block:.2f}"
        )


CSV_HEADER = "kind,blocks,hash_attempts,wall_time_s,attempts_per_block"


def benchmark(kind: str, n_blocks: int, txs_per_block: int = 0,
              difficulty_bits: int = 12) -> ConsensusMetrics:
    """Produce ``n_blocks`` on a single-node chain, counting seal work.

    PoA and PoS perform no hash search (their per-block cost is one signature,
    plus one proposer-selection hash for PoS, reported separately). PoW
    attempts follow a geometric distribution with mean 2**difficulty_bits.
    """
    from chainclass.node import Node  # local import: node builds on this module
    from chainclass.config import EffectiveConfig, default_config_doc

    if n_blocks < 1:
        raise ValueError("n_blocks must be >= 1")
    doc = default_config_doc()
    doc["chain"]["consensus"] = kind
    doc["chain"]["pow_difficulty_bits"] = difficulty_bits
    cfg = EffectiveConfig.from_doc(doc)
    authority = cfg.account("authority1")
    node = Node(node_id="bench", keypair=authority.keypair, cfg=cfg)

    metrics = ConsensusMetrics(kind=kind)
    admin = cfg.account("admin")
    noop_addr = None
    if txs_per_block > 0:
        noop_addr = node.deploy_noop(admin.keypair)

    start = time.perf_counter()
    for i in range(n_blocks):
        if noop_addr is not None:
            node.submit_noop_txs(admin.keypair, noop_addr, txs_per_block, filler=i)
        block, attempts = node.produce_block(timestamp=i + 1, count_attempts=True)
        assert block is not None, "benchmark node must be the proposer"
        metrics.blocks_produced += 1
        metrics.hash_attempts += attempts
        if kind == POS:
            metrics.selection_hashes += 1
    metrics.wall_time = time.perf_counter() - start
    return metrics
