"""HTTP/JSON boundary between one node and human-facing clients.

The service holds no private keys and no state of its own: every response
is derived from the node's committed chain, so a restarted service serves
identical data. Writes are signed transactions produced client-side; the
admin endpoints merely check the wrapper (sender and method) before
funneling them into the same mempool path as any other tx.

Auth for private reads is signature-based: either a per-request Ed25519
signature over a domain-tagged message, or a short-lived session token
obtained by signing a server challenge. Money and gas amounts are decimal
strings; hashes, addresses and byte blobs are 0x-prefixed hex.
"""

from __future__ import annotations

import os
import threading
import time

from fastapi import Body, FastAPI, HTTPException, Query, Request

from chainclass import codec, crypto, game, market
from chainclass.chain import _block_json, _tx_json
from chainclass.errors import ChainClassError
from chainclass.tx import decode_transaction

REPORT_SIG_TAG = b"chainclass/report/v1"
LOGIN_SIG_TAG = b"chainclass/login/v1"
CHALLENGE_TTL_S = 120
ADMIN_METHODS = {"config": "configure", "advance": "advance", "close": "close_round"}
LONG_POLL_MAX_S = 25.0
LONG_POLL_TICK_S = 0.05


def _bad(status: int, error: str, message: str = ""):
    raise HTTPException(status_code=status,
                        detail={"error": error, "message": message})


def _hex_arg(value: str, error: str = "BadHex") -> bytes:
    try:
        return codec.from_hex(value)
    except (ValueError, ChainClassError) as exc:
        _bad(400, error, str(exc))


class Sessions:
    """Challenge/login tokens with idle expiry. Thread-safe, in-memory."""

    def __init__(self, ttl_s: int):
        self.ttl_s = ttl_s
        self._lock = threading.Lock()
        self._challenges = {}  # hex nonce -> (address, expires)
        self._tokens = {}  # token -> (address, expires)

    def new_challenge(self, address: bytes) -> str:
        nonce = codec.to_hex(os.urandom(32))
        with self._lock:
            self._purge()
            self._challenges[nonce] = (address, time.monotonic() + CHALLENGE_TTL_S)
        return nonce

    def login(self, address: bytes, challenge: str, pubkey: bytes,
              signature: bytes) -> str:
        with self._lock:
            self._purge()
            entry = self._challenges.pop(challenge, None)
        if entry is None or entry[0] != address:
            _bad(403, "UnknownChallenge", "request a fresh challenge")
        if crypto.derive_address(pubkey) != address:
            _bad(403, "WrongSigner", "public key does not match address")
        message = LOGIN_SIG_TAG + codec.from_hex(challenge)
        if not crypto.verify(pubkey, message, signature):
            _bad(403, "BadSignature", "challenge signature does not verify")
        token = codec.to_hex(os.urandom(32))
        with self._lock:
            self._tokens[token] = (address, time.monotonic() + self.ttl_s)
        return token

    def resolve(self, token: str):
        """Address for a live token, refreshing its idle timer; else None."""
        with self._lock:
            self._purge()
            entry = self._tokens.get(token)
            if entry is None:
                return None
            address = entry[0]
            self._tokens[token] = (address, time.monotonic() + self.ttl_s)
            return address

    def _purge(self) -> None:
        now = time.monotonic()
        for store in (self._challenges, self._tokens):
            dead = [k for k, (_, exp) in store.items() if exp < now]
            for k in dead:
                del store[k]


def create_app(node, cfg, *, instamine: bool = True) -> FastAPI:
    """Wire one node into a FastAPI app. ``cfg`` is an EffectiveConfig."""
    app = FastAPI(title="chainclass", docs_url=None, redoc_url=None)
    lock = threading.RLock()
    sessions = Sessions(cfg.api.get("session_ttl_s", 3600))
    app.state.node = node
    app.state.instamine = instamine

    def head_hash() -> str:
        return codec.to_hex(node.chain.head.block_hash)

    def mine() -> None:
        if instamine and node.is_proposer():
            block = node.produce_block()
            if block is not None:
                for peer in getattr(node, "broadcast_targets", []):
                    peer(block)

    def submit_raw(body: bytes):
        """Decode hex body -> tx; 400 malformed, 422 invalid. Returns tx."""
        try:
            text = body.decode("ascii").strip()
            raw = codec.from_hex(text)
        except (UnicodeDecodeError, ValueError, ChainClassError) as exc:
            _bad(400, "BadHex", str(exc))
        try:
            tx = decode_transaction(raw)
        except ChainClassError as exc:
            _bad(400, "BadEncoding", str(exc))
        with lock:
            accepted, reason = node.submit_tx(tx)
            if accepted:
                mine()
        if not accepted:
            _bad(422, reason, f"transaction rejected: {reason}")
        return tx

    def game_address() -> bytes:
        addr = node.game_address()
        if addr is None:
            _bad(404, "NoGame", "no marketing-sim contract deployed")
        return addr

    def game_view():
        state = node.chain.head_state
        addr = game_address()
        rnd_raw = state.get_storage(addr, game.k_round())
        phase_raw = state.get_storage(addr, game.k_phase())
        rnd = codec.Reader(rnd_raw).u64() if rnd_raw else 0
        phase = phase_raw[0] if phase_raw else game.PHASE_SETUP
        return state, addr, rnd, phase

    def closed_round(rnd: int, current: int, phase: int) -> bool:
        if rnd < 1:
            return False
        if phase == game.PHASE_FINISHED:
            return rnd <= current
        return rnd < current

    def find_report(addr: bytes, rnd: int) -> market.TurnReport:
        for receipts in reversed(node.chain.receipts):
            for receipt in receipts:
                for topic, value in receipt.events:
                    if topic != "RoundClosed":
                        continue
                    if codec.Reader(value[:8]).u64() == rnd:
                        return market.decode_turn_report(value[8:])
        _bad(404, "NoReport", f"no closed round {rnd}")

    def resolve_account(text: str) -> bytes:
        try:
            return cfg.resolve_address(text)
        except (KeyError, ValueError, ChainClassError) as exc:
            _bad(404, "UnknownAccount", str(exc))

    # -- transactions -------------------------------------------------------

    @app.post("/tx")
    async def post_tx(request: Request):
        tx = submit_raw(await request.body())
        return {"tx_hash": codec.to_hex(tx.tx_hash), "accepted": True,
                "head": head_hash()}

    # -- chain and state reads ------------------------------------------------

    @app.get("/round")
    def get_round():
        state, addr, rnd, phase = game_view()
        doc = {
            "game": codec.to_hex(addr),
            "round": rnd,
            "phase": phase,
            "phase_name": game.PHASE_NAMES[phase],
            "head": head_hash(),
        }
        cfg_raw = state.get_storage(addr, game.k_config())
        if cfg_raw:
            game_cfg = game.GameConfig.decode(cfg_raw)
            doc["rounds_total"] = game_cfg.rounds_total
            doc["cadence"] = game_cfg.cadence
            doc["weekly_budget"] = str(game_cfg.weekly_budget)
            doc["report_price"] = str(game_cfg.report_price)
            doc["teams"] = [codec.to_hex(t) for t in game_cfg.teams]
        return doc

    @app.get("/chain/head")
    def get_head():
        block = node.chain.head
        doc = _block_json(block)
        doc["height"] = node.chain.height
        doc["head"] = doc["hash"]
        return doc

    @app.get("/chain/blocks")
    def get_blocks(from_: int = Query(0, alias="from"), to: int = Query(None)):
        height = node.chain.height
        if to is None:
            to = height
        if from_ < 0 or to < from_ or from_ > height:
            _bad(404, "BadRange", f"range [{from_}, {to}] outside [0, {height}]")
        to = min(to, height)
        return {
            "blocks": [_block_json(node.chain.block_at(i))
                       for i in range(from_, to + 1)],
            "head": head_hash(),
        }

    @app.get("/state/{contract}/{key}")
    def get_state(contract: str, key: str):
        addr = _hex_arg(contract)
        state = node.chain.head_state
        if state.contracts.get(addr) is None:
            _bad(404, "UnknownContract", contract)
        value = state.get_storage(addr, _hex_arg(key))
        return {"value": codec.to_hex(value), "head": head_hash()}

    @app.get("/accounts/{addr}")
    def get_account(addr: str):
        address = resolve_account(addr)
        state = node.chain.head_state
        return {
            "address": codec.to_hex(address),
            "balance": str(state.balance(address)),
            "nonce": state.nonce(address),
            "head": head_hash(),
        }

    @app.get("/receipt/{tx_hash}")
    def get_receipt(tx_hash: str):
        wanted = _hex_arg(tx_hash)
        found = node.chain.find_tx(wanted)
        if found is None:
            _bad(404, "UnknownTx", tx_hash)
        block, receipt = found
        return _receipt_json(receipt, block, head_hash())

    # -- reports ---------------------------------------------------------------

    @app.get("/report/{rnd}")
    def get_report(rnd: int, team: str, pub: str = None, sig: str = None,
                   token: str = None):
        state, addr, current, phase = game_view()
        team_addr = resolve_account(team)
        cfg_raw = state.get_storage(addr, game.k_config())
        if not cfg_raw:
            _bad(409, "NotConfigured", "game has no configuration yet")
        game_cfg = game.GameConfig.decode(cfg_raw)
        if team_addr not in game_cfg.teams:
            _bad(404, "UnknownTeam", team)
        if not closed_round(rnd, current, phase):
            _bad(409, "RoundOpen", f"round {rnd} is not closed")

        signer = None
        if token is not None:
            signer = sessions.resolve(token)
            if signer is None:
                _bad(403, "BadToken", "token unknown or expired")
        elif pub is not None and sig is not None:
            pubkey = _hex_arg(pub)
            message = REPORT_SIG_TAG + codec.enc_u64(rnd) + team_addr
            if not crypto.verify(pubkey, message, _hex_arg(sig)):
                _bad(403, "BadSignature", "report signature does not verify")
            signer = crypto.derive_address(pubkey)
        else:
            _bad(403, "AuthRequired", "pass pub+sig or a session token")
        if signer != team_addr and signer != cfg.admin_address:
            _bad(403, "WrongSigner", "only the team or the admin may read this")

        report = find_report(addr, rnd)
        purchased = bool(state.get_storage(addr, game.k_purchase(rnd, team_addr)))
        view = market.render_report(report, team_addr, purchased)
        view["head"] = head_hash()
        view["test_round"] = rnd == 1
        return view

    # -- admin -------------------------------------------------------------------

    def admin_endpoint(kind: str):
        async def handler(request: Request):
            body = await request.body()
            try:
                raw = codec.from_hex(body.decode("ascii").strip())
                tx = decode_transaction(raw)
            except (UnicodeDecodeError, ChainClassError) as exc:
                _bad(400, "BadEncoding", str(exc))
            if tx.sender != cfg.admin_address:
                _bad(403, "NotAdmin", "admin signature required")
            if tx.method != ADMIN_METHODS[kind]:
                _bad(400, "WrongMethod",
                     f"expected a {ADMIN_METHODS[kind]} transaction")
            with lock:
                accepted, reason = node.submit_tx(tx)
                if accepted:
                    mine()
            if not accepted:
                _bad(422, reason, f"transaction rejected: {reason}")
            found = node.chain.find_tx(tx.tx_hash)
            if found is None:
                return {"tx_hash": codec.to_hex(tx.tx_hash), "accepted": True,
                        "pending": True, "head": head_hash()}
            block, receipt = found
            if not receipt.ok:
                _bad(422, receipt.error or "Reverted",
                     f"{ADMIN_METHODS[kind]} reverted: {receipt.error}")
            return _receipt_json(receipt, block, head_hash())

        return handler

    app.post("/admin/config")(admin_endpoint("config"))
    app.post("/admin/advance")(admin_endpoint("advance"))
    app.post("/admin/close")(admin_endpoint("close"))

    # -- events ------------------------------------------------------------------

    def flat_events():
        out = []
        for block_index, receipts in enumerate(node.chain.receipts):
            for receipt in receipts:
                for topic, value in receipt.events:
                    out.append({
                        "cursor": len(out),
                        "block": block_index,
                        "tx_hash": codec.to_hex(receipt.tx_hash),
                        "topic": topic,
                        "value": codec.to_hex(value),
                    })
        return out

    @app.get("/events")
    def get_events(since: int = 0, wait: float = 0.0):
        events = flat_events()
        if since < 0 or since > len(events):
            _bad(410, "CursorExpired", "restart from cursor 0")
        deadline = time.monotonic() + min(max(wait, 0.0), LONG_POLL_MAX_S)
        while len(events) == since and time.monotonic() < deadline:
            time.sleep(LONG_POLL_TICK_S)
            events = flat_events()
        fresh = events[since:]
        return {"events": fresh, "next": since + len(fresh),
                "head": head_hash()}

    # -- sessions -----------------------------------------------------------------

    @app.post("/session/challenge")
    def post_challenge(payload: dict = Body(...)):
        address = resolve_account(str(payload.get("address", "")))
        challenge = sessions.new_challenge(address)
        return {"challenge": challenge, "expires_in": CHALLENGE_TTL_S,
                "sign_tag": LOGIN_SIG_TAG.decode()}

    @app.post("/session/login")
    def post_login(payload: dict = Body(...)):
        try:
            address = resolve_account(str(payload["address"]))
            challenge = str(payload["challenge"])
            pubkey = _hex_arg(str(payload["pub"]))
            signature = _hex_arg(str(payload["sig"]))
        except KeyError as exc:
            _bad(400, "MissingField", str(exc))
        token = sessions.login(address, challenge, pubkey, signature)
        return {"token": token, "expires_in": sessions.ttl_s}

    return app


def _receipt_json(receipt, block, head: str) -> dict:
    tx_index = next(
        i for i, tx in enumerate(block.transactions)
        if tx.tx_hash == receipt.tx_hash
    )
    doc = {
        "tx_hash": codec.to_hex(receipt.tx_hash),
        "block": block.index,
        "index": tx_index,
        "status": receipt.status,
        "gas_used": str(receipt.gas_used),
        "error": receipt.error,
        "events": [
            {"topic": topic, "value": codec.to_hex(value)}
            for topic, value in receipt.events
        ],
        "head": head,
    }
    if receipt.contract_address is not None:
        doc["contract_address"] = codec.to_hex(receipt.contract_address)
    return doc


def serve(node, cfg, *, host: str = None, port: int = None,
          instamine: bool = None) -> None:
    """Run the service with uvicorn (blocking)."""
    import uvicorn

    api_cfg = cfg.api
    app = create_app(
        node, cfg,
        instamine=api_cfg.get("instamine", True) if instamine is None else instamine,
    )
    uvicorn.run(
        app,
        host=api_cfg.get("host", "127.0.0.1") if host is None else host,
        port=api_cfg.get("port", 8545) if port is None else port,
        log_level="warning",
    )
