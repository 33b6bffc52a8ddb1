"""A single simulated node: mempool, block production, fork handling.

Nodes are plain in-process objects. Networking (latency, delivery order,
relaying) belongs to the netsim module; the HTTP face belongs to the api
module. Everything here is synchronous and deterministic so the same inputs
always yield the same chain.

Mempool policy: one tx per (sender, nonce), nonces strictly sequential on
top of the committed state, iteration in (sender, nonce) order. A block
producer therefore never guesses: any two nodes with the same mempool set
build byte-identical blocks.
"""

from __future__ import annotations

from chainclass import codec, consensus, vm
from chainclass.block import Block
from chainclass.chain import Chain
from chainclass.errors import ChainClassError, InvalidSuffix, TxRejected
from chainclass.tx import (
    DEPLOY_ADDRESS,
    SignedTransaction,
    encode_payload,
    sign_transaction,
    verify_transaction,
)

DEFAULT_GAS_LIMIT = 200_000

# Pads a noop payload to exactly 100 bytes: 21000 + 16*100 = 22600 gas.
NOOP_FILLER_LEN = 84


def build_tx(keypair, nonce: int, contract: bytes, method: str,
             args: bytes = b"", gas_limit: int = DEFAULT_GAS_LIMIT,
             gas_price: int = 20_000_000_000) -> SignedTransaction:
    """Sign a contract call in one step."""
    return sign_transaction(
        keypair, nonce, contract, encode_payload(method, args),
        gas_limit, gas_price,
    )


class Node:
    """One replica: a validated chain plus a pending-transaction pool."""

    def __init__(self, node_id: str, keypair, cfg, role: str = "authority"):
        self.node_id = node_id
        self.keypair = keypair
        self.cfg = cfg
        self.role = role
        self.chain = Chain.from_genesis(
            alloc=cfg.alloc(),
            params=cfg.params,
            schedule=cfg.gas_schedule,
            admin=cfg.admin_address,
            block_gas_limit=cfg.block_gas_limit,
            timestamp=cfg.genesis_timestamp,
        )
        self.mempool = {}  # (sender, nonce) -> tx
        self.seen_txs = set()  # tx hashes ever accepted (dedup for gossip)
        self.orphans = {}  # block_hash -> Block, not on the canonical chain

    # -- mempool -----------------------------------------------------------

    def pending_count(self, sender: bytes) -> int:
        return sum(1 for (s, _) in self.mempool if s == sender)

    def next_nonce(self, sender: bytes) -> int:
        return self.chain.head_state.nonce(sender) + self.pending_count(sender)

    def submit_tx(self, tx: SignedTransaction) -> tuple:
        """Admit a tx to the mempool. Returns (accepted, reason).

        Rejections: bad signature or encoding, a nonce that is not the next
        sequential one for the sender (counting queued txs), or a balance
        below the fee reservation. Duplicates are rejected but unseen.
        """
        if tx.tx_hash in self.seen_txs:
            return False, "Duplicate"
        try:
            verify_transaction(tx)
        except ChainClassError as exc:
            return False, exc.code
        expected = self.next_nonce(tx.sender)
        if tx.nonce != expected:
            return False, "StaleNonce" if tx.nonce < expected else "NonceGap"
        if self.chain.head_state.balance(tx.sender) < tx.max_fee():
            return False, "InsufficientFeeBalance"
        self.mempool[(tx.sender, tx.nonce)] = tx
        self.seen_txs.add(tx.tx_hash)
        return True, None

    def pending_txs(self) -> list:
        return [self.mempool[key] for key in sorted(self.mempool)]

    def _prune_mempool(self) -> None:
        state = self.chain.head_state
        stale = [
            key for key, tx in self.mempool.items()
            if tx.nonce < state.nonce(tx.sender)
        ]
        for key in stale:
            del self.mempool[key]

    # -- production ----------------------------------------------------------

    def is_proposer(self) -> bool:
        expected = consensus.expected_proposer(
            self.cfg.params, self.chain.height + 1,
            self.chain.head.block_hash, self.chain.head_state,
        )
        return expected is None or expected == self.keypair.address

    def produce_block(self, timestamp: int | None = None,
                      count_attempts: bool = False):
        """Seal pending txs into a block, or (None, 0) if not the proposer."""
        if not self.is_proposer():
            return (None, 0) if count_attempts else None
        block, attempts = self.chain.produce(
            self.keypair, self.pending_txs(), timestamp,
        )
        self._prune_mempool()
        return (block, attempts) if count_attempts else block

    # -- block import and fork choice ----------------------------------------

    def receive_block(self, block: Block) -> str:
        """Feed one block from the network.

        Returns "extended" (appended to head), "adopted" (caused a reorg),
        "known" (already have it), "stored" (valid-looking side/orphan block,
        kept for later), or "rejected".
        """
        if any(b.block_hash == block.block_hash for b in self.chain.blocks):
            return "known"
        if block.block_hash in self.orphans:
            return "known"
        if (block.prev_hash == self.chain.head.block_hash
                and block.index == self.chain.height + 1):
            try:
                self.chain.append(block)
            except ChainClassError:
                return "rejected"
            self._prune_mempool()
            return "extended"
        self.orphans[block.block_hash] = block
        if self._try_reorg():
            return "adopted"
        return "stored"

    def _attach_index(self, block: Block):
        """Height whose canonical block is this block's parent, or None."""
        parent_height = block.index - 1
        if 0 <= parent_height <= self.chain.height:
            parent = self.chain.block_at(parent_height)
            if parent.block_hash == block.prev_hash:
                return parent_height
        return None

    def _candidate_suffixes(self) -> list:
        """All orphan chains that attach to the canonical chain."""
        suffixes = []
        by_prev = {}
        for block in self.orphans.values():
            by_prev.setdefault(block.prev_hash, []).append(block)

        def extend(path):
            tip = path[-1]
            children = by_prev.get(tip.block_hash, ())
            if not children:
                suffixes.append(path)
                return
            for child in children:
                extend(path + [child])

        for block in self.orphans.values():
            if self._attach_index(block) is not None:
                extend([block])
        return suffixes

    def _try_reorg(self) -> bool:
        """Adopt the best fully valid competing branch, if any beats the head."""
        best = None
        for suffix in self._candidate_suffixes():
            attach = self._attach_index(suffix[0])
            candidate = self.chain.prefix(attach)
            try:
                for block in suffix:
                    candidate.append(block)
            except ChainClassError:
                continue
            if consensus.tip_is_better(
                self.cfg.params.kind,
                candidate.height, candidate.total_weight(),
                candidate.head.block_hash,
                self.chain.height, self.chain.total_weight(),
                self.chain.head.block_hash,
            ) and (
                best is None or consensus.tip_is_better(
                    self.cfg.params.kind,
                    candidate.height, candidate.total_weight(),
                    candidate.head.block_hash,
                    best.height, best.total_weight(),
                    best.head.block_hash,
                )
            ):
                best = candidate
        if best is None:
            return False
        self._adopt(best)
        return True

    def _adopt(self, candidate: Chain) -> None:
        """Switch to a better branch; re-queue txs the new branch dropped."""
        old_blocks = self.chain.blocks
        fork = 0
        for i in range(min(len(old_blocks), len(candidate.blocks))):
            if old_blocks[i].block_hash != candidate.blocks[i].block_hash:
                break
            fork = i
        new_hashes = {
            tx.tx_hash
            for b in candidate.blocks[fork + 1:]
            for tx in b.transactions
        }
        dropped = [
            tx
            for b in old_blocks[fork + 1:]
            for tx in b.transactions
            if tx.tx_hash not in new_hashes
        ]
        for block in candidate.blocks[fork + 1:]:
            self.orphans.pop(block.block_hash, None)
        self.chain = candidate
        self._prune_mempool()
        for tx in sorted(dropped, key=lambda t: (t.sender, t.nonce)):
            self.seen_txs.discard(tx.tx_hash)
            self.submit_tx(tx)

    def resolve_fork(self, suffix) -> Block:
        """Evaluate a competing suffix directly; adopt it if it wins.

        The suffix must attach to this node's canonical chain and validate
        block by block, else InvalidSuffix. Returns the head after the
        decision (which may be the unchanged current head).
        """
        if not suffix:
            raise InvalidSuffix("empty suffix")
        attach = self._attach_index(suffix[0])
        if attach is None:
            raise InvalidSuffix("suffix does not attach to this chain")
        candidate = self.chain.prefix(attach)
        try:
            for block in suffix:
                candidate.append(block)
        except ChainClassError as exc:
            raise InvalidSuffix(f"suffix invalid: {exc}") from exc
        if consensus.tip_is_better(
            self.cfg.params.kind,
            candidate.height, candidate.total_weight(),
            candidate.head.block_hash,
            self.chain.height, self.chain.total_weight(),
            self.chain.head.block_hash,
        ):
            self._adopt(candidate)
        return self.chain.head

    # -- convenience builders ---------------------------------------------------

    def build_tx(self, keypair, contract: bytes, method: str,
                 args: bytes = b"", gas_limit: int = DEFAULT_GAS_LIMIT) -> SignedTransaction:
        """Sign a call with the node's gas price and the sender's next nonce."""
        return build_tx(
            keypair, self.next_nonce(keypair.address), contract, method,
            args, gas_limit, self.cfg.gas_price,
        )

    def submit_call(self, keypair, contract: bytes, method: str,
                    args: bytes = b"",
                    gas_limit: int = DEFAULT_GAS_LIMIT) -> SignedTransaction:
        tx = self.build_tx(keypair, contract, method, args, gas_limit)
        accepted, reason = self.submit_tx(tx)
        if not accepted:
            raise TxRejected(reason)
        return tx

    def deploy_contract(self, keypair, code_id: str,
                        init_args: bytes = b"",
                        gas_limit: int = DEFAULT_GAS_LIMIT) -> bytes:
        """Queue a deploy tx; returns the deterministic contract address."""
        nonce = self.next_nonce(keypair.address)
        addr = vm.contract_address(keypair.address, nonce)
        tx = build_tx(
            keypair, nonce, DEPLOY_ADDRESS, "deploy",
            vm.encode_deploy_args(code_id, init_args),
            gas_limit, self.cfg.gas_price,
        )
        accepted, reason = self.submit_tx(tx)
        if not accepted:
            raise TxRejected(reason, f"deploy rejected: {reason}")
        return addr

    def deploy_noop(self, keypair) -> bytes:
        return self.deploy_contract(keypair, "bench-noop-v1")

    def submit_noop_txs(self, keypair, contract: bytes, n: int,
                        filler: int = 0) -> list:
        """Queue n noop calls with 100-byte payloads (22600 gas each)."""
        txs = []
        for j in range(n):
            args = codec.enc_u64(filler) + codec.enc_u64(j) + bytes(NOOP_FILLER_LEN)
            txs.append(self.submit_call(keypair, contract, "noop", args,
                                        gas_limit=25_000))
        return txs

    # -- queries -----------------------------------------------------------------

    def game_address(self):
        """Address of the deployed marketing game, or None."""
        for addr, rec in self.chain.head_state.contracts.items():
            if rec.code_id == "marketing-sim-v1":
                return addr
        return None

    def summary(self) -> dict:
        return {
            "node": self.node_id,
            "height": self.chain.height,
            "head": codec.to_hex(self.chain.head.block_hash),
            "state_root": codec.to_hex(self.chain.head.state_root),
            "mempool": len(self.mempool),
        }
