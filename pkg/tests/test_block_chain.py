"""Blocks, the chain, the append-only log file, and replay."""

import dataclasses

import pytest

from chainclass import block as block_mod, chain as chain_mod, codec
from chainclass.chain import Chain, load_chain, replay, save_chain
from chainclass.errors import (
    BadLink, BadSeal, BadStateRoot, ChainClassError, CorruptFile,
    NonCanonicalEncoding,
)

GENESIS_HASH_HEX = (
    "8ca9ad5ada7f577f017aa43f68686c0dc6986ee6328dd63907e1e762d59c5db0")
GENESIS_STATE_ROOT_HEX = (
    "dac77c9c369b4d568a1007f315e6fd9489d219a8ffc330db74a315c8ac431f83")


def fresh_chain(cfg):
    return Chain.from_genesis(
        alloc=cfg.alloc(), params=cfg.params, schedule=cfg.gas_schedule,
        admin=cfg.admin_address, block_gas_limit=cfg.block_gas_limit,
        timestamp=cfg.genesis_timestamp)


def grown_chain(cfg, blocks=3):
    """A chain with a few blocks of noop traffic."""
    from chainclass.node import Node

    node = Node("n0", cfg.account("authority1").keypair, cfg)
    admin = cfg.account("admin").keypair
    noop = node.deploy_noop(admin)
    node.produce_block()
    for _ in range(blocks - 1):
        node.submit_noop_txs(admin, noop, 3)
        node.produce_block()
    return node.chain


def test_genesis_hash_pinned(cfg):
    chain = fresh_chain(cfg)
    g = chain.block_at(0)
    assert g.block_hash.hex() == GENESIS_HASH_HEX
    assert g.state_root.hex() == GENESIS_STATE_ROOT_HEX
    assert g.prev_hash == b"\x00" * 32
    assert g.transactions == ()


def test_genesis_alloc_funds_accounts(cfg):
    chain = fresh_chain(cfg)
    state = chain.head_state
    for name in cfg.account_names():
        assert state.balance(cfg.account(name).address) > 0
    assert state.total_supply() == sum(cfg.alloc().values())


def test_block_wire_round_trip(cfg):
    chain = grown_chain(cfg)
    for i in range(chain.height + 1):
        b = chain.block_at(i)
        again = block_mod.decode_block(b.wire())
        assert again == b
        assert again.block_hash == b.block_hash


def test_block_wire_strict(cfg):
    data = grown_chain(cfg, 1).head.wire()
    with pytest.raises(NonCanonicalEncoding):
        block_mod.decode_block(data + b"\x00")
    with pytest.raises(NonCanonicalEncoding):
        block_mod.decode_block(data[:-1])


def test_block_hash_excludes_seal(cfg):
    # the seal signs the header hash, so the hash must not cover the seal
    b = grown_chain(cfg, 1).head
    resealed = b.with_seal(block_mod.Seal(kind=block_mod.SEAL_NONE))
    assert resealed.block_hash == b.block_hash


def test_append_rejects_bad_link(cfg):
    chain = grown_chain(cfg, 2)
    bad = dataclasses.replace(chain.head, prev_hash=b"\x01" * 32)
    with pytest.raises((BadLink, BadSeal)):
        chain.prefix(chain.height - 1).append(bad)


def test_append_rejects_wrong_state_root(cfg):
    chain = grown_chain(cfg, 2)
    head = chain.head
    parent = chain.prefix(head.index - 1)
    forged = dataclasses.replace(head, state_root=b"\x00" * 32)
    kp = cfg.account("authority1").keypair
    from chainclass import consensus

    seal, _ = consensus.make_seal(cfg.params, forged, kp)
    with pytest.raises(BadStateRoot):
        parent.append(forged.with_seal(seal))


def test_verify_full_counts_blocks(cfg):
    chain = grown_chain(cfg, 3)
    assert chain.verify_full() == chain.height + 1


def test_save_load_round_trip(cfg, tmp_path):
    chain = grown_chain(cfg, 3)
    path = tmp_path / "chain.cclog"
    save_chain(chain, path)
    assert path.read_bytes().startswith(b"CCLOG/1\n")
    loaded = load_chain(path, cfg.params, cfg.gas_schedule,
                        admin=cfg.admin_address,
                        block_gas_limit=cfg.block_gas_limit)
    assert loaded.height == chain.height
    assert loaded.head.block_hash == chain.head.block_hash
    assert loaded.head_state.root() == chain.head_state.root()


def test_load_rejects_tampered_block(cfg, tmp_path):
    chain = grown_chain(cfg, 3)
    path = tmp_path / "chain.cclog"
    save_chain(chain, path)
    raw = bytearray(path.read_bytes())
    # flip a byte well past the header so some block record corrupts
    raw[len(raw) // 2] ^= 0xFF
    path.write_bytes(bytes(raw))
    with pytest.raises(ChainClassError) as exc_info:
        load_chain(path, cfg.params, cfg.gas_schedule,
                   admin=cfg.admin_address,
                   block_gas_limit=cfg.block_gas_limit)
    assert "height" in str(exc_info.value)  # names the offending height


def test_load_rejects_bad_magic(cfg, tmp_path):
    path = tmp_path / "chain.cclog"
    path.write_bytes(b"NOTALOG\n")
    with pytest.raises(CorruptFile):
        load_chain(path, cfg.params, cfg.gas_schedule,
                   admin=cfg.admin_address,
                   block_gas_limit=cfg.block_gas_limit)


def test_replay_reaches_same_roots(cfg):
    chain = grown_chain(cfg, 3)
    genesis_state = chain.state_at(0)
    blocks = [chain.block_at(i) for i in range(chain.height + 1)]
    rebuilt = replay(blocks, genesis_state, cfg.params, cfg.gas_schedule,
                     admin=cfg.admin_address,
                     block_gas_limit=cfg.block_gas_limit)
    assert rebuilt.head_state.root() == chain.head_state.root()
    assert rebuilt.head.block_hash == chain.head.block_hash


def test_export_json_shape(cfg):
    chain = grown_chain(cfg, 2)
    doc = chain_mod.export_json(chain)
    assert doc["height"] == chain.height
    assert len(doc["blocks"]) == chain.height + 1
    b1 = doc["blocks"][1]
    assert b1["hash"] == codec.to_hex(chain.block_at(1).block_hash)
    assert b1["prev_hash"] == codec.to_hex(chain.block_at(0).block_hash)
    # counters ride as decimal strings so JSON consumers keep precision
    assert b1["gas_used"] == str(chain.block_at(1).gas_used)


def test_prefix_is_a_real_chain(cfg):
    chain = grown_chain(cfg, 3)
    p = chain.prefix(1)
    assert p.height == 1
    assert p.head.block_hash == chain.block_at(1).block_hash
    assert p.head_state.root() == chain.state_at(1).root()
    # the prefix can grow independently of the original
    assert chain.height == 3


def test_state_at_is_per_height(cfg):
    chain = grown_chain(cfg, 3)
    roots = {chain.state_at(i).root() for i in range(chain.height + 1)}
    assert len(roots) == chain.height + 1  # every block changed state


def test_find_tx(cfg):
    chain = grown_chain(cfg, 2)
    tx = chain.block_at(chain.height).transactions[0]
    block, receipt = chain.find_tx(tx.tx_hash)
    assert block.index == chain.height
    assert receipt.tx_hash == tx.tx_hash
    assert chain.find_tx(b"\x00" * 32) is None
