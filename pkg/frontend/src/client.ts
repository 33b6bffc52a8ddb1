// Client-side game state: one unlocked signer, the observed round and
// phase, the local plan draft, the event banner, and a report cache.
//
// Two invariants from the design brief hold everywhere in this module:
// the private key lives only in page memory (the Signer closure) and is
// never sent to the service; and every mutation leaves as one locally
// signed transaction POSTed to /tx. Reads always reflect the committed
// head. Nothing shown as final is optimistic.

import { ApiClient, ApiError, EventDoc, Receipt, RoundInfo } from "./api.js";
import { fromHex, Reader, toHex, toSafe } from "./codec.js";
import { Signer } from "./crypto.js";
import {
  AdjustmentDraft,
  decodeEventDraw,
  decodeGameConfig,
  encodeAdjustment,
  encodeBuyReport,
  encodeGameConfig,
  encodePlan,
  encodeRespond,
  EventDraw,
  GameConfigJson,
  kConfig,
  kEvent,
  planTotal,
  SpendMatrix,
} from "./game.js";
import { loginMessage, reportAuthMessage, signTx, TxFields } from "./tx.js";
import { parseFp, SCALE } from "./fixedpoint.js";

export const DEFAULT_GAS_LIMIT = 200_000;
export const ADMIN_GAS_LIMIT = 400_000;
// the platform default; once the game is configured the on-chain value wins
export const DEFAULT_GAS_PRICE = 20_000_000_000n;

// Rejected before anything is signed; the server would revert it anyway.
export class ClientValidation extends Error {
  constructor(
    public code: string,
    detail: string,
  ) {
    super(`${code}: ${detail}`);
  }
}

export interface PlanCheck {
  total: number;
  budget: number;
  ok: boolean;
  reason?: string;
}

export function checkPlan(spend: SpendMatrix, budget: number): PlanCheck {
  for (const row of spend) {
    for (const c of row) {
      if (!Number.isInteger(c) || c < 0) {
        return { total: 0, budget, ok: false, reason: "cells must be whole nonnegative tokens" };
      }
    }
  }
  const total = planTotal(spend);
  if (total === 0) return { total, budget, ok: false, reason: "plan spends nothing" };
  if (total > budget) {
    return { total, budget, ok: false, reason: `total ${total} exceeds budget ${budget}` };
  }
  return { total, budget, ok: true };
}

// Mirrors the contract's cap rule: |delta| * SCALE must not exceed
// cap * planned cell, and no cell may go negative.
export function checkDelta(
  planned: SpendMatrix,
  delta: SpendMatrix,
  capFp: number,
): { ok: boolean; reason?: string } {
  if (delta.length !== planned.length) return { ok: false, reason: "delta shape mismatch" };
  for (let p = 0; p < planned.length; p++) {
    if (delta[p].length !== planned[p].length) {
      return { ok: false, reason: "delta shape mismatch" };
    }
    for (let c = 0; c < planned[p].length; c++) {
      const cell = planned[p][c];
      const d = delta[p][c];
      if (!Number.isInteger(d)) return { ok: false, reason: "delta cells must be integers" };
      if (Math.abs(d) * SCALE > capFp * cell) {
        return { ok: false, reason: `delta ${d} exceeds cap on a cell of ${cell}` };
      }
      if (cell + d < 0) return { ok: false, reason: "adjusted cell would be negative" };
    }
  }
  return { ok: true };
}

export function deltaBound(cell: number, capFp: number): number {
  return Math.floor((cell * capFp) / SCALE);
}

export interface ReportCacheEntry {
  view: any;
  fetchedAt: number;
}

export class GameClient {
  round = 0;
  phase = 0;
  phaseName = "Setup";
  gameAddress: string | null = null;
  config: GameConfigJson | null = null;
  planDraft: SpendMatrix | null = null;
  planCommitted = false;
  activeEvent: (EventDraw & { round: number }) | null = null;
  isAdmin = false;
  reports = new Map<number, ReportCacheEntry>();
  sessionToken: string | null = null;

  private chain: Promise<unknown> = Promise.resolve();

  constructor(
    public api: ApiClient,
    public signer: Signer,
  ) {}

  get addressHex(): string {
    return toHex(this.signer.address);
  }

  // -- chain sync -------------------------------------------------------------

  async syncRound(): Promise<RoundInfo> {
    const info = await this.api.round();
    this.gameAddress = info.game;
    this.round = info.round;
    this.phase = info.phase;
    this.phaseName = info.phase_name;
    if (!this.config) await this.loadConfig();
    if (this.config) {
      this.isAdmin = !this.config.teams.includes(this.addressHex);
    }
    return info;
  }

  async loadConfig(): Promise<GameConfigJson | null> {
    if (!this.gameAddress) return null;
    const hex = await this.api.state(this.gameAddress, kConfig());
    if (hex === "0x") return null;
    this.config = decodeGameConfig(fromHex(hex));
    return this.config;
  }

  budget(): number {
    if (!this.config) throw new ClientValidation("NoConfig", "config not loaded");
    return toSafe(BigInt(this.config.weekly_budget));
  }

  async refreshEventBanner(): Promise<void> {
    if (!this.gameAddress || this.round === 0) return;
    const hex = await this.api.state(this.gameAddress, kEvent(this.round));
    if (hex === "0x") {
      this.activeEvent = null;
      return;
    }
    const draw = decodeEventDraw(fromHex(hex));
    this.activeEvent = draw.occurred ? { ...draw, round: this.round } : null;
  }

  // Applies one event feed entry to local state; returns true if the
  // entry concerned this client's view.
  applyEvent(ev: EventDoc): boolean {
    switch (ev.topic) {
      case "EventDrawn": {
        const r = new Reader(fromHex(ev.value));
        const round = toSafe(r.u64());
        const draw = decodeEventDraw(r.take(3));
        r.expectEnd();
        this.activeEvent = draw.occurred ? { ...draw, round } : null;
        return true;
      }
      case "PlanSubmitted": {
        const sender = toHex(fromHex(ev.value).slice(0, 20));
        if (sender === this.addressHex) {
          this.planCommitted = true;
          return true;
        }
        return false;
      }
      case "RoundClosed":
      case "ConfigSet":
        return true;
      default:
        return false;
    }
  }

  // -- signed writes ------------------------------------------------------

  // All writes flow through here; the promise chain keeps nonce order even
  // when the UI fires several actions at once.
  private submit(fields: Omit<TxFields, "nonce">): Promise<Receipt> {
    const run = this.chain.then(async () => {
      const acct = await this.api.account(this.addressHex);
      const tx = signTx(this.signer, { ...fields, nonce: acct.nonce });
      const posted = await this.api.postTx(tx.wireHex);
      return this.api.receipt(posted.tx_hash);
    });
    this.chain = run.catch(() => undefined);
    return run;
  }

  private gameTarget(): Uint8Array {
    if (!this.gameAddress) throw new ClientValidation("NoGame", "no game deployed");
    return fromHex(this.gameAddress);
  }

  private gasPrice(): bigint {
    return this.config ? BigInt(this.config.gas_price) : DEFAULT_GAS_PRICE;
  }

  async submitPlan(spend: SpendMatrix): Promise<Receipt> {
    const check = checkPlan(spend, this.budget());
    if (!check.ok) throw new ClientValidation("OverBudget", check.reason!);
    this.planDraft = spend.map((r) => [...r]);
    const receipt = await this.submit({
      contract: this.gameTarget(),
      method: "plan",
      args: encodePlan(spend),
      gasLimit: DEFAULT_GAS_LIMIT,
      gasPrice: this.gasPrice(),
    });
    if (receipt.status === "ok") this.planCommitted = true;
    return receipt;
  }

  async submitAdjustment(adj: AdjustmentDraft): Promise<Receipt> {
    if (adj.spendDelta && this.planDraft && this.config) {
      const cap = parseFp(this.config.adjustment_cap);
      const check = checkDelta(this.planDraft, adj.spendDelta, cap);
      if (!check.ok) throw new ClientValidation("CapExceeded", check.reason!);
    }
    return this.submit({
      contract: this.gameTarget(),
      method: "adjust",
      args: encodeAdjustment(adj),
      gasLimit: DEFAULT_GAS_LIMIT,
      gasPrice: this.gasPrice(),
    });
  }

  respondToEvent(choice: number): Promise<Receipt> {
    return this.submit({
      contract: this.gameTarget(),
      method: "respond",
      args: encodeRespond(choice),
      gasLimit: DEFAULT_GAS_LIMIT,
      gasPrice: this.gasPrice(),
    });
  }

  async buyReport(round: number): Promise<Receipt> {
    const receipt = await this.submit({
      contract: this.gameTarget(),
      method: "buy_report",
      args: encodeBuyReport(round),
      gasLimit: DEFAULT_GAS_LIMIT,
      gasPrice: this.gasPrice(),
    });
    if (receipt.status === "ok") this.reports.delete(round);
    return receipt;
  }

  // -- report reads ---------------------------------------------------------

  async fetchReport(round: number, team?: string): Promise<any> {
    const target = team ?? this.addressHex;
    const cached = this.reports.get(round);
    if (cached && target === this.addressHex) return cached.view;
    const auth = this.sessionToken
      ? { token: this.sessionToken }
      : this.signedReportAuth(round, target);
    const view = await this.api.report(round, target, auth);
    if (target === this.addressHex) {
      this.reports.set(round, { view, fetchedAt: Date.now() });
    }
    return view;
  }

  private signedReportAuth(round: number, teamHex: string) {
    const msg = reportAuthMessage(round, fromHex(teamHex));
    return {
      pub: toHex(this.signer.publicKey),
      sig: toHex(this.signer.sign(msg)),
    };
  }

  async login(): Promise<string> {
    const { challenge } = await this.api.sessionChallenge(this.addressHex);
    const sig = this.signer.sign(loginMessage(fromHex(challenge)));
    const { token } = await this.api.sessionLogin({
      address: this.addressHex,
      challenge,
      pub: toHex(this.signer.publicKey),
      sig: toHex(sig),
    });
    this.sessionToken = token;
    return token;
  }

  // -- admin actions ----------------------------------------------------------

  private adminTx(
    endpoint: "config" | "advance" | "close",
    method: string,
    args: Uint8Array,
  ): Promise<Receipt> {
    const run = this.chain.then(async () => {
      const acct = await this.api.account(this.addressHex);
      const tx = signTx(this.signer, {
        nonce: acct.nonce,
        contract: this.gameTarget(),
        method,
        args,
        gasLimit: ADMIN_GAS_LIMIT,
        gasPrice: this.gasPrice(),
      });
      return this.api.adminPost(endpoint, tx.wireHex);
    });
    this.chain = run.catch(() => undefined);
    return run;
  }

  configure(cfg: GameConfigJson): Promise<Receipt> {
    return this.adminTx("config", "configure", encodeGameConfig(cfg));
  }

  advancePhase(): Promise<Receipt> {
    return this.adminTx("advance", "advance", new Uint8Array(0));
  }

  closeRound(): Promise<Receipt> {
    return this.adminTx("close", "close_round", new Uint8Array(0));
  }
}

// Long-poll /events and hand each entry to the sink; restarts from zero
// after a 410 (cursor expired, e.g. across a reorg).
export async function pollEvents(
  api: ApiClient,
  sink: (ev: EventDoc) => void,
  opts: { cursor?: number; wait?: number; stop?: () => boolean } = {},
): Promise<number> {
  let cursor = opts.cursor ?? 0;
  for (;;) {
    if (opts.stop?.()) return cursor;
    let page;
    try {
      page = await api.events(cursor, opts.wait);
    } catch (err) {
      if (err instanceof ApiError && err.status === 410) {
        cursor = 0;
        continue;
      }
      throw err;
    }
    for (const ev of page.events) sink(ev);
    if (page.next === cursor && !opts.wait) return cursor;
    cursor = page.next;
  }
}
