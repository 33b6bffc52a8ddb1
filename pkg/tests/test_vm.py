"""Contract execution: gas accounting, atomic reverts, deploy addresses."""

import hashlib

import pytest

from chainclass import codec, vm
from chainclass.crypto import KeyPair
from chainclass.errors import InsufficientFeeBalance, StaleNonce
from chainclass.state import WorldState
from chainclass.tx import DEPLOY_ADDRESS, encode_payload, sign_transaction

KP = KeyPair.from_seed(b"\x51" * 32)
ADMIN = KeyPair.from_seed(b"\x52" * 32)
GAS_PRICE = 20_000_000_000
SCHEDULE = vm.GasSchedule()
CTX = vm.BlockContext(height=1, prev_hash=b"\x00" * 32)


def funded_state(balance=10**18):
    s = WorldState()
    s.balances[KP.address] = balance
    s.balances[ADMIN.address] = balance
    return s


def noop_deployed(state):
    """Deploy the benchmark contract; returns (state, contract address)."""
    tx = sign_transaction(
        KP, state.nonce(KP.address), DEPLOY_ADDRESS,
        encode_payload("deploy", vm.encode_deploy_args("bench-noop-v1", b"")),
        100_000, GAS_PRICE)
    new_state, receipt = vm.execute(state, tx, CTX, SCHEDULE, ADMIN.address)
    assert receipt.ok, receipt.error
    return new_state, receipt.contract_address


def call_tx(state, contract, method, args=b"", gas_limit=50_000, keypair=KP):
    return sign_transaction(
        keypair, state.nonce(keypair.address), contract,
        encode_payload(method, args), gas_limit, GAS_PRICE)


def test_contract_address_derivation():
    want = hashlib.sha256(
        b"CCDEPLOY" + KP.address + (7).to_bytes(8, "big")).digest()[-20:]
    assert vm.contract_address(KP.address, 7) == want
    assert vm.contract_address(KP.address, 8) != want


def test_deploy_creates_record_at_derived_address():
    state = funded_state()
    expected = vm.contract_address(KP.address, 0)
    new_state, addr = noop_deployed(state)
    assert addr == expected
    rec = new_state.contracts[addr]
    assert rec.code_id == "bench-noop-v1"
    assert rec.code_hash == vm.code_hash("bench-noop-v1", rec.version)


def test_deploy_unknown_code_reverts():
    state = funded_state()
    tx = sign_transaction(
        KP, 0, b"\x00" * 20,
        encode_payload("deploy", vm.encode_deploy_args("no-such-code", b"")),
        100_000, GAS_PRICE)
    new_state, receipt = vm.execute(state, tx, CTX, SCHEDULE, ADMIN.address)
    assert not receipt.ok
    assert new_state.contracts == {}
    assert new_state.nonce(KP.address) == 1  # nonce burns even on revert


def test_intrinsic_gas_formula():
    state = funded_state()
    state, addr = noop_deployed(state)
    args = b"\x00" * (100 - len(encode_payload("noop")))
    tx = call_tx(state, addr, "noop", args)
    assert len(tx.payload) == 100
    assert vm.intrinsic_gas(tx, SCHEDULE) == 21_000 + 16 * 100 == 22_600
    _, receipt = vm.execute(state, tx, CTX, SCHEDULE, ADMIN.address)
    assert receipt.ok
    assert receipt.gas_used == 22_600  # noop adds nothing on top


def test_fee_charged_and_unused_gas_refunded():
    state = funded_state()
    state, addr = noop_deployed(state)
    before = state.balance(KP.address)
    tx = call_tx(state, addr, "noop", gas_limit=50_000)
    new_state, receipt = vm.execute(state, tx, CTX, SCHEDULE, ADMIN.address)
    spent = before - new_state.balance(KP.address)
    assert spent == receipt.gas_used * GAS_PRICE  # only used gas is paid for
    assert receipt.gas_used < 50_000


def test_fee_credited_to_producer_via_block(cfg):
    # fees leave the sender and land with the block producer, zero-sum
    from chainclass.node import Node

    node = Node("n0", cfg.account("authority1").keypair, cfg)
    producer = cfg.account("authority1").address
    admin = cfg.account("admin")
    before_producer = node.chain.head_state.balance(producer)
    before_admin = node.chain.head_state.balance(admin.address)
    addr = node.deploy_noop(admin.keypair)
    node.submit_noop_txs(admin.keypair, addr, 2)
    node.produce_block()
    state = node.chain.head_state
    fees = sum(r.gas_used for r in node.chain.receipts_at(1)) * cfg.gas_price
    assert state.balance(producer) == before_producer + fees
    assert state.balance(admin.address) == before_admin - fees
    assert state.total_supply() == sum(cfg.alloc().values())


def test_out_of_gas_consumes_limit_and_reverts():
    state = funded_state()
    state, addr = noop_deployed(state)
    # below intrinsic cost the call cannot even start
    tx = call_tx(state, addr, "noop", gas_limit=21_001)
    new_state, receipt = vm.execute(state, tx, CTX, SCHEDULE, ADMIN.address)
    assert not receipt.ok
    assert receipt.error == "OutOfGas"
    assert receipt.gas_used == 21_001  # the whole limit burns
    spent = state.balance(KP.address) - new_state.balance(KP.address)
    assert spent == 21_001 * GAS_PRICE


def test_revert_keeps_fee_and_nonce_but_no_state():
    state = funded_state()
    state, addr = noop_deployed(state)
    root_before = state.root()
    tx = call_tx(state, addr, "frobnicate")  # unknown method
    new_state, receipt = vm.execute(state, tx, CTX, SCHEDULE, ADMIN.address)
    assert receipt.status == "reverted"
    assert "UnknownMethod" in receipt.error
    # storage untouched; only fee and nonce moved
    assert new_state.storage == state.storage
    assert new_state.nonce(KP.address) == state.nonce(KP.address) + 1
    assert new_state.root() != root_before  # fee movement is visible


def test_call_to_missing_contract_reverts():
    state = funded_state()
    tx = call_tx(state, b"\x77" * 20, "noop")
    _, receipt = vm.execute(state, tx, CTX, SCHEDULE, ADMIN.address)
    assert not receipt.ok


def test_stale_nonce_rejected_before_inclusion():
    state = funded_state()
    state, addr = noop_deployed(state)
    tx = call_tx(state, addr, "noop")
    state2, _ = vm.execute(state, tx, CTX, SCHEDULE, ADMIN.address)
    with pytest.raises(StaleNonce):
        vm.execute(state2, tx, CTX, SCHEDULE, ADMIN.address)  # replay
    future = sign_transaction(KP, 99, addr, encode_payload("noop"),
                              50_000, GAS_PRICE)
    with pytest.raises(StaleNonce):
        vm.execute(state2, future, CTX, SCHEDULE, ADMIN.address)


def test_insufficient_fee_balance_rejected():
    state = funded_state(balance=1000)  # far below 21000 * gas price
    tx = call_tx(state, b"\x77" * 20, "noop")
    with pytest.raises(InsufficientFeeBalance):
        vm.execute(state, tx, CTX, SCHEDULE, ADMIN.address)


def test_execution_is_deterministic():
    def run():
        state = funded_state()
        state, addr = noop_deployed(state)
        tx = call_tx(state, addr, "noop", args=b"abc")
        new_state, receipt = vm.execute(state, tx, CTX, SCHEDULE, ADMIN.address)
        return new_state.root(), receipt
    (root_a, rec_a), (root_b, rec_b) = run(), run()
    assert root_a == root_b
    assert rec_a == rec_b


def test_gas_meter_raises_past_limit():
    meter = vm.GasMeter(100)
    meter.consume(60)
    meter.consume(40)
    with pytest.raises(vm.OutOfGas):
        meter.consume(1)


def test_code_hash_distinguishes_versions():
    assert vm.code_hash("a", "1.0.0") != vm.code_hash("a", "1.0.1")
    assert vm.code_hash("a", "1.0.0") != vm.code_hash("b", "1.0.0")
