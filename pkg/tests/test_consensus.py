"""Seal rules, proposer selection, fork choice, and the cost benchmark."""

import dataclasses
import hashlib
import random

import pytest
from scipy import stats

from chainclass import block as block_mod, consensus
from chainclass.crypto import KeyPair
from chainclass.errors import BadSeal, NoStake, WrongProposer
from conftest import make_cfg

KPS = {name: KeyPair.from_seed(bytes([i]) * 32)
       for i, name in enumerate(["a", "b", "c"], start=1)}


def poa_params(names=("a", "b", "c")):
    return consensus.ConsensusParams(
        kind=consensus.POA,
        pow_difficulty_bits=8,
        poa_authorities=tuple(KPS[n].address for n in names),
        pos_validators=(),
        keys={kp.address: kp.public_bytes for kp in KPS.values()},
    )


# -- proposer selection -------------------------------------------------------

def test_poa_round_robin():
    auth = tuple(KPS[n].address for n in ("a", "b", "c"))
    got = [consensus.select_proposer_poa(h, auth) for h in range(1, 7)]
    assert got == [auth[1], auth[2], auth[0], auth[1], auth[2], auth[0]]


def test_pos_is_deterministic_and_stake_weighted():
    stakes = {KPS["a"].address: 10, KPS["b"].address: 30}
    seed = hashlib.sha256(b"x").digest()
    assert (consensus.select_proposer_pos(seed, stakes)
            == consensus.select_proposer_pos(seed, stakes))
    # a zero-stake validator never proposes
    stakes[KPS["c"].address] = 0
    for i in range(200):
        s = hashlib.sha256(bytes([i])).digest()
        assert consensus.select_proposer_pos(s, stakes) != KPS["c"].address


def test_pos_no_stake_raises():
    with pytest.raises(NoStake):
        consensus.select_proposer_pos(b"\x01" * 32, {KPS["a"].address: 0})


def test_pos_proportionality_chi_squared():
    # fixed RNG so the p-value is reproducible run to run
    rng = random.Random(1234)
    stakes = {
        KPS["a"].address: 1,
        KPS["b"].address: 2,
        KPS["c"].address: 5,
    }
    n = 20_000
    counts = {a: 0 for a in stakes}
    for _ in range(n):
        counts[consensus.select_proposer_pos(rng.randbytes(32), stakes)] += 1
    order = sorted(stakes)
    observed = [counts[a] for a in order]
    expected = [n * stakes[a] / 8 for a in order]
    _, p = stats.chisquare(observed, expected)
    assert p > 0.01, f"p={p}, counts={observed}"


# -- pow search ----------------------------------------------------------------

def test_leading_zero_bits():
    assert consensus.leading_zero_bits(b"\x00\x00\xff" + b"\x00" * 29) == 16
    assert consensus.leading_zero_bits(b"\x80" + b"\x00" * 31) == 0
    assert consensus.leading_zero_bits(b"\x01" + b"\xff" * 31) == 7
    assert consensus.leading_zero_bits(b"\x00" * 32) == 256


def test_pow_meets_matches_manual_hash():
    header = hashlib.sha256(b"header").digest()
    for nonce in range(50):
        digest = hashlib.sha256(header + nonce.to_bytes(8, "big")).digest()
        want = consensus.leading_zero_bits(digest) >= 4
        assert consensus.pow_meets(header, nonce, 4) == want


def test_seal_pow_finds_valid_nonce():
    header = hashlib.sha256(b"block").digest()
    seal, attempts = consensus.seal_pow(header, 8)
    assert consensus.pow_meets(header, seal.nonce, 8)
    assert seal.difficulty_bits == 8  # seal records the target it met
    assert attempts == seal.nonce + 1  # search starts at zero


def test_pow_attempts_geometric_mean():
    # mean attempts ~ 2^bits; 60 trials at 8 bits keeps this quick
    total = 0
    for i in range(60):
        header = hashlib.sha256(b"trial%d" % i).digest()
        _, attempts = consensus.seal_pow(header, 8)
        total += attempts
    mean = total / 60
    assert 128 < mean < 512, mean  # 2x band around 256


# -- seals on real blocks -------------------------------------------------------

def sealed_block(params, keypair, height=1):
    block = block_mod.Block(
        index=height, prev_hash=b"\x11" * 32, timestamp=12,
        producer=keypair.address, transactions=(), gas_used=0,
        state_root=b"\x22" * 32, seal=block_mod.Seal(kind=block_mod.SEAL_NONE))
    seal, _ = consensus.make_seal(params, block, keypair)
    return block.with_seal(seal)


def test_poa_seal_round_trip():
    params = poa_params()
    b = sealed_block(params, KPS["b"], height=1)  # 1 mod 3 -> authority b
    consensus.verify_seal(params, b, parent_state=None)


def test_poa_wrong_proposer_rejected():
    params = poa_params()
    with pytest.raises(WrongProposer):
        b = sealed_block(params, KPS["a"], height=1)
        consensus.verify_seal(params, b, parent_state=None)


def test_seal_signature_tamper_rejected():
    params = poa_params()
    b = sealed_block(params, KPS["b"], height=1)
    sig = bytearray(b.seal.signature)
    sig[3] ^= 0x40
    forged = b.with_seal(dataclasses.replace(b.seal, signature=bytes(sig)))
    with pytest.raises(BadSeal):
        consensus.verify_seal(params, forged, parent_state=None)


def test_pow_seal_insufficient_difficulty_rejected():
    cfg = make_cfg({"chain": {"consensus": "pow", "pow_difficulty_bits": 8}})
    kp = cfg.account("authority1").keypair
    b = sealed_block(cfg.params, kp)
    assert b.seal.difficulty_bits == 8
    # a nonce that meets 8 bits almost surely misses 30
    hard = dataclasses.replace(cfg.params, pow_difficulty_bits=30)
    with pytest.raises(BadSeal):
        consensus.verify_seal(hard, b, parent_state=None)


def test_pow_seal_rejects_understated_bits():
    # a seal claiming fewer bits than the engine requires must not verify
    cfg = make_cfg({"chain": {"consensus": "pow", "pow_difficulty_bits": 8}})
    kp = cfg.account("authority1").keypair
    easy = dataclasses.replace(cfg.params, pow_difficulty_bits=2)
    b = sealed_block(easy, kp)
    with pytest.raises(BadSeal):
        consensus.verify_seal(cfg.params, b, parent_state=None)


def test_pos_seal_checks_parent_state_stake(cfg):
    pos_cfg = make_cfg({"chain": {"consensus": "pos"}})
    kp = pos_cfg.account("authority1").keypair
    from chainclass.state import WorldState

    parent = WorldState()
    parent.balances[kp.address] = 100
    b = sealed_block(
        dataclasses.replace(pos_cfg.params), kp)
    consensus.verify_seal(pos_cfg.params, b, parent_state=parent)
    # with no stake anywhere the seal cannot verify
    with pytest.raises((BadSeal, NoStake)):
        consensus.verify_seal(pos_cfg.params, b, parent_state=WorldState())


# -- fork choice -----------------------------------------------------------------

def test_fork_choice_height_for_poa_pos():
    a, b = b"\xaa" * 32, b"\xbb" * 32
    assert consensus.tip_is_better("poa", 5, 0, a, 4, 0, b)
    assert not consensus.tip_is_better("pos", 4, 0, a, 5, 0, b)
    # equal height: lower hash wins
    assert consensus.tip_is_better("poa", 5, 0, a, 5, 0, b)
    assert not consensus.tip_is_better("poa", 5, 0, b, 5, 0, a)


def test_fork_choice_weight_for_pow():
    a, b = b"\xaa" * 32, b"\xbb" * 32
    # a shorter chain with more accumulated difficulty wins under pow
    assert consensus.tip_is_better("pow", 3, 2**14, a, 5, 2**12 * 3, b)
    assert not consensus.tip_is_better("pow", 5, 100, a, 3, 200, b)
    assert consensus.tip_is_better("pow", 5, 100, a, 3, 100, b)  # tie: low hash


def test_block_weight_is_two_to_difficulty():
    seal = block_mod.Seal(kind=block_mod.SEAL_POW, difficulty_bits=10)
    b = block_mod.Block(
        index=1, prev_hash=b"\x00" * 32, timestamp=0, producer=b"\x00" * 20,
        transactions=(), gas_used=0, state_root=b"\x00" * 32, seal=seal)
    assert consensus.block_weight(b) == 2**10


# -- cost benchmark ---------------------------------------------------------------

def test_benchmark_signature_engines_do_no_search():
    for kind in ("poa", "pos"):
        m = consensus.benchmark(kind, n_blocks=5)
        assert m.blocks_produced == 5
        assert m.hash_attempts == 0
        row = m.csv_row()
        assert row.startswith(f"{kind},5,0,")


def test_benchmark_pow_counts_attempts():
    m = consensus.benchmark("pow", n_blocks=8, difficulty_bits=6)
    assert m.blocks_produced == 8
    assert m.hash_attempts >= 8
    assert m.attempts_per_block == m.hash_attempts / 8


def test_csv_header_matches_rows():
    cols = consensus.CSV_HEADER.split(",")
    row = consensus.benchmark("poa", n_blocks=1).csv_row().split(",")
    assert len(row) == len(cols)
