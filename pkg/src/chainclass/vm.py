"""Deterministic contract execution with gas metering.

Contracts are native, registered transition functions identified by a
``code_id`` and a semantic version; deploying one pins its ``code_hash``
(sha256 of id and version) into the state forever. Execution is a pure
function of (state, tx, block context): contracts see only the sender, the
height, and the parent hash, never wall clocks or node identity.

Fee flow: the sender must cover ``gas_limit * gas_price`` up front; after
execution the unused part is returned and the spent fee is held out of the
sender's balance. The block assembler credits the sum of fees to the block
producer, so token supply is conserved per block, never per half-applied tx.

Reverted transactions keep their fee and nonce increment and nothing else:
storage writes, balance transfers, and events are buffered in the call
context and dropped on revert.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from chainclass import codec
from chainclass.codec import Reader
from chainclass.crypto import sha256
from chainclass.errors import InsufficientFeeBalance, StaleNonce
from chainclass.state import ContractRecord, WorldState
from chainclass.tx import SignedTransaction, decode_payload


@dataclass(frozen=True)
class GasSchedule:
    """Gas prices per primitive; EVM-comparable magnitudes, set at genesis."""

    tx_base: int = 21000
    per_payload_byte: int = 16
    per_storage_read: int = 200
    per_storage_write: int = 5000
    per_report_render: int = 1000


@dataclass(frozen=True)
class BlockContext:
    height: int
    prev_hash: bytes


@dataclass(frozen=True)
class ExecutionReceipt:
    tx_hash: bytes
    status: str  # "ok" | "reverted"
    gas_used: int
    events: tuple = ()
    error: str | None = None
    contract_address: bytes | None = None  # set for successful deploys

    @property
    def ok(self) -> bool:
        return self.status == "ok"


class OutOfGas(Exception):
    pass


class ContractRevert(Exception):
    def __init__(self, code: str, message: str = ""):
        super().__init__(message or code)
        self.code = code


class GasMeter:
    def __init__(self, limit: int):
        self.limit = limit
        self.used = 0

    def consume(self, amount: int) -> None:
        if amount < 0:
            raise ValueError("negative gas")
        if self.used + amount > self.limit:
            raise OutOfGas()
        self.used += amount


class CallContext:
    """Buffered view of the world handed to a contract during one call."""

    def __init__(self, working: WorldState, meter: GasMeter, sender: bytes,
                 contract: bytes, block_ctx: BlockContext, schedule: GasSchedule):
        self._working = working
        self._meter = meter
        self.sender = sender
        self.contract = contract
        self.height = block_ctx.height
        self.prev_hash = block_ctx.prev_hash
        self._schedule = schedule
        self.events: list = []

    # -- metered state access -- #

    def read(self, key: bytes) -> bytes:
        self._meter.consume(self._schedule.per_storage_read)
        return self._working.get_storage(self.contract, key)

    def write(self, key: bytes, value: bytes) -> None:
        self._meter.consume(self._schedule.per_storage_write)
        self._working.set_storage(self.contract, key, value)

    def charge(self, units: int) -> None:
        self._meter.consume(units)

    def charge_report_render(self) -> None:
        self._meter.consume(self._schedule.per_report_render)

    # -- money -- #

    def balance(self, addr: bytes) -> int:
        return self._working.balance(addr)

    def transfer(self, frm: bytes, to: bytes, amount: int) -> None:
        if amount < 0:
            raise ContractRevert("NegativeTransfer")
        if self._working.balance(frm) < amount:
            raise ContractRevert("InsufficientBalance")
        self._working.balances[frm] = self._working.balance(frm) - amount
        self._working.balances[to] = self._working.balance(to) + amount

    # -- events / failure -- #

    def emit(self, topic: str, value: bytes = b"") -> None:
        self.events.append((topic, value))

    def revert(self, code: str, message: str = "") -> None:
        raise ContractRevert(code, message)


class Contract:
    """Base for registered contracts. Subclasses define the rule set."""

    code_id: str = ""
    version: str = ""
    deploy_admin_only: bool = True

    def init(self, ctx: CallContext, args: bytes) -> None:
        raise NotImplementedError

    def call(self, ctx: CallContext, method: str, args: bytes) -> None:
        raise NotImplementedError


REGISTRY: dict = {}


def register(cls):
    """Class decorator adding a contract to the node binary's registry."""
    if not cls.code_id:
        raise ValueError("contract needs a code_id")
    REGISTRY[cls.code_id] = cls
    return cls


def code_hash(code_id: str, version: str) -> bytes:
    return sha256(codec.enc_str(code_id) + codec.enc_str(version))


def contract_address(sender: bytes, nonce: int) -> bytes:
    return sha256(b"CCDEPLOY" + sender + codec.enc_u64(nonce))[-20:]


def intrinsic_gas(tx: SignedTransaction, schedule: GasSchedule) -> int:
    return schedule.tx_base + schedule.per_payload_byte * len(tx.payload)


def encode_deploy_args(code_id: str, init_args: bytes) -> bytes:
    return codec.enc_str(code_id) + codec.enc_bytes(init_args)


def decode_deploy_args(args: bytes) -> tuple:
    r = Reader(args)
    code_id = r.str_()
    init_args = r.bytes_()
    r.expect_end()
    return code_id, init_args


def check_admission(state: WorldState, tx: SignedTransaction) -> None:
    """Inclusion-level preconditions: nonce continuity and fee cover."""
    current = state.nonce(tx.sender)
    if tx.nonce != current:
        raise StaleNonce(f"tx nonce {tx.nonce}, account nonce {current}")
    if state.balance(tx.sender) < tx.max_fee():
        raise InsufficientFeeBalance(
            f"balance {state.balance(tx.sender)} below max fee {tx.max_fee()}"
        )


def execute(state: WorldState, tx: SignedTransaction, block_ctx: BlockContext,
            schedule: GasSchedule, admin: bytes) -> tuple:
    """Apply one verified transaction. Returns (new_state, receipt).

    Raises StaleNonce / InsufficientFeeBalance for txs that may not be
    included at all; every contract-level failure becomes a reverted receipt.
    """
    check_admission(state, tx)
    max_fee = tx.max_fee()

    working = state.copy()
    working.balances[tx.sender] = working.balance(tx.sender) - max_fee
    working.nonces[tx.sender] = tx.nonce + 1

    meter = GasMeter(tx.gas_limit)
    target = tx.contract
    deployed: bytes | None = None
    error: str | None = None
    events: tuple = ()

    try:
        meter.consume(intrinsic_gas(tx, schedule))
        method, args = decode_payload(tx.payload)
        if tx.is_deploy:
            if method != "deploy":
                raise ContractRevert("BadPayload", "deploy txs use the deploy method")
            code_id, init_args = decode_deploy_args(args)
            cls = REGISTRY.get(code_id)
            if cls is None:
                raise ContractRevert("UnknownCode", code_id)
            if cls.deploy_admin_only and tx.sender != admin:
                raise ContractRevert("Unauthorized", "deploy restricted to admin")
            addr = contract_address(tx.sender, tx.nonce)
            if addr in working.contracts:
                raise ContractRevert("AddressCollision")
            ctx = CallContext(working, meter, tx.sender, addr, block_ctx, schedule)
            meter.consume(schedule.per_storage_write)  # the record itself
            cls().init(ctx, init_args)
            working.contracts[addr] = ContractRecord(
                address=addr,
                code_id=code_id,
                code_hash=code_hash(code_id, cls.version),
                version=cls.version,
            )
            deployed = addr
        else:
            record = working.contracts.get(target)
            if record is None:
                raise ContractRevert("UnknownContract", target.hex())
            cls = REGISTRY.get(record.code_id)
            if cls is None:
                raise ContractRevert("UnknownCode", record.code_id)
            ctx = CallContext(working, meter, tx.sender, target, block_ctx, schedule)
            cls().call(ctx, method, args)
        gas_used = meter.used
        events = tuple(ctx.events)
        status = "ok"
    except OutOfGas:
        gas_used = tx.gas_limit
        status, error = "reverted", "OutOfGas"
    except ContractRevert as rv:
        gas_used = meter.used
        status, error = "reverted", rv.code

    fee = gas_used * tx.gas_price
    if status == "ok":
        new_state = working
        new_state.balances[tx.sender] = new_state.balance(tx.sender) + (max_fee - fee)
    else:
        new_state = state.copy()
        new_state.balances[tx.sender] = new_state.balance(tx.sender) - fee
        new_state.nonces[tx.sender] = tx.nonce + 1
        deployed = None

    receipt = ExecutionReceipt(
        tx_hash=tx.tx_hash,
        status=status,
        gas_used=gas_used,
        events=events if status == "ok" else (),
        error=error,
        contract_address=deployed,
    )
    return new_state, receipt
