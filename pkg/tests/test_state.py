"""World-state Merkle commitment checked against a hand-rolled oracle."""

import hashlib

from hypothesis import given, strategies as st

from chainclass import codec, state as state_mod
from chainclass.state import ContractRecord, WorldState

A1 = b"\x11" * 20
A2 = b"\x22" * 20
A3 = b"\x33" * 20


def h(data: bytes) -> bytes:
    return hashlib.sha256(data).digest()


def oracle_leaf(k: bytes, v: bytes) -> bytes:
    return h(b"\x00" + codec.enc_bytes(k) + codec.enc_bytes(v))


def oracle_root(pairs):
    """Independent Merkle: sorted leaves, odd node promoted unhashed."""
    level = [oracle_leaf(k, v) for k, v in sorted(pairs)]
    if not level:
        return h(b"\x02")
    while len(level) > 1:
        nxt = [h(b"\x01" + level[i] + level[i + 1])
               for i in range(0, len(level) - 1, 2)]
        if len(level) % 2:
            nxt.append(level[-1])
        level = nxt
    return level[0]


def test_empty_root_constant():
    assert state_mod.EMPTY_ROOT == h(b"\x02")
    assert state_mod.EMPTY_ROOT.hex() == (
        "dbc1b4c900ffe48d575b5da5c638040125f65db0fe3e24494b76ea986457d986")
    assert WorldState().root() == state_mod.EMPTY_ROOT


def test_root_matches_manual_three_entry_oracle():
    s = WorldState()
    s.balances[A1] = 5
    s.balances[A2] = 7
    s.nonces[A1] = 2
    pairs = [
        (b"b" + A1, codec.enc_u128(5)),
        (b"b" + A2, codec.enc_u128(7)),
        (b"n" + A1, codec.enc_u64(2)),
    ]
    assert s.root() == oracle_root(pairs)


def test_root_covers_contracts_and_storage():
    s = WorldState()
    s.balances[A1] = 1
    rec = ContractRecord(address=A3, code_id="x", code_hash=b"\xaa" * 32,
                         version="1")
    s.contracts[A3] = rec
    s.set_storage(A3, b"k1", b"v1")
    pairs = [
        (b"b" + A1, codec.enc_u128(1)),
        (b"c" + A3, rec.encode()),
        (b"s" + A3 + b"k1", b"v1"),
    ]
    assert s.root() == oracle_root(pairs)


@given(st.dictionaries(st.binary(min_size=20, max_size=20),
                       st.integers(1, 2**100), max_size=12),
       st.dictionaries(st.binary(min_size=20, max_size=20),
                       st.integers(1, 2**40), max_size=6))
def test_root_matches_oracle_random_states(balances, nonces):
    s = WorldState()
    s.balances.update(balances)
    s.nonces.update(nonces)
    pairs = [(b"b" + a, codec.enc_u128(b)) for a, b in balances.items()]
    pairs += [(b"n" + a, codec.enc_u64(n)) for a, n in nonces.items()]
    assert s.root() == oracle_root(pairs)


def test_zero_values_leave_no_trace():
    s = WorldState()
    s.balances[A1] = 10
    t = WorldState()
    t.balances[A1] = 10
    t.balances[A2] = 0
    t.nonces[A3] = 0
    t.set_storage(A3, b"k", b"val")
    t.set_storage(A3, b"k", b"")  # delete
    assert s.root() == t.root()


def test_insertion_order_irrelevant():
    s = WorldState()
    s.balances[A1] = 1
    s.balances[A2] = 2
    t = WorldState()
    t.balances[A2] = 2
    t.balances[A1] = 1
    assert s.root() == t.root()


def test_root_changes_on_any_mutation():
    s = WorldState()
    s.balances[A1] = 5
    base = s.root()
    s.balances[A1] = 6
    assert s.root() != base
    s.balances[A1] = 5
    s.nonces[A2] = 1
    assert s.root() != base


def test_copy_is_deep():
    s = WorldState()
    s.balances[A1] = 5
    s.set_storage(A3, b"k", b"v")
    c = s.copy()
    c.balances[A1] = 9
    c.set_storage(A3, b"k", b"w")
    assert s.balance(A1) == 5
    assert s.get_storage(A3, b"k") == b"v"
    assert s.root() != c.root()


def test_storage_root_isolates_one_contract():
    s = WorldState()
    s.balances[A1] = 99  # outside the subtree
    s.set_storage(A2, b"a", b"1")
    s.set_storage(A2, b"b", b"2")
    s.set_storage(A3, b"a", b"other")
    sub = state_mod.storage_root(s, A2)
    # oracle over A2's storage entries only, full key shape
    assert sub == oracle_root([(b"s" + A2 + b"a", b"1"),
                               (b"s" + A2 + b"b", b"2")])
    s.balances[A1] = 1  # unrelated change leaves the subtree alone
    assert state_mod.storage_root(s, A2) == sub
    s.set_storage(A2, b"a", b"9")
    assert state_mod.storage_root(s, A2) != sub


def test_storage_root_empty_contract():
    assert state_mod.storage_root(WorldState(), A1) == state_mod.EMPTY_ROOT


def test_total_supply_sums_balances():
    s = WorldState()
    s.balances[A1] = 3
    s.balances[A2] = 4
    assert s.total_supply() == 7
