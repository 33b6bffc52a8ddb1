// Game-contract data model: the canonical config codec, decision payload
// encoders, event draw decoding, and the contract's storage key layout.
// Everything here must stay byte-compatible with the chain's game module;
// the vectors fixture pins that in tests.

import {
  concat,
  encS64,
  encStr,
  encU32,
  encU64,
  encU8,
  EncodingError,
  Reader,
  toHex,
  toSafe,
} from "./codec.js";
import { sha256 } from "./crypto.js";
import { formatFp, parseFp } from "./fixedpoint.js";

export const GAME_CODE_ID = "marketing-sim-v1";

export const PHASE_SETUP = 0;
export const PHASE_PLANNING = 1;
export const PHASE_EXECUTION = 2;
export const PHASE_REPORTING = 3;
export const PHASE_FINISHED = 4;

export const PHASE_NAMES = [
  "Setup",
  "Planning",
  "Execution",
  "Reporting",
  "Finished",
] as const;

export const CADENCES = ["weekly", "daily"] as const;

export const EVENT_KINDS = [
  "SalesPromotionSupport",
  "GoodCause",
  "DistributionIssue",
  "TechnicalFault",
] as const;

// One correct response per event kind, index-aligned with EVENT_KINDS.
export const RESPONSE_CHOICES = [
  "FundPromotion",
  "SponsorCause",
  "RerouteLogistics",
  "IssueRecall",
] as const;

export interface ProductJson {
  name: string;
  unit_price: string;
  segment: string;
}

export interface ChannelJson {
  name: string;
  reach: Record<string, string>;
  keywords: string[];
}

export interface DemandJson {
  segment: string;
  round: number;
  units: string;
}

// JSON shape shared with the chain's config files and API responses.
export interface GameConfigJson {
  teams: string[];
  products: ProductJson[];
  channels: ChannelJson[];
  weekly_budget: string;
  report_price: string;
  adjustment_cap: string;
  rounds_total: number;
  cadence: string;
  event_probability: string;
  event_penalty: string;
  concentration_gain: string;
  demand: DemandJson[];
  gas_price: string;
  block_gas_limit: string;
  treasury: string;
  budget_carryover: boolean;
}

function cmpStr(a: string, b: string): number {
  return a < b ? -1 : a > b ? 1 : 0;
}

export function encodeGameConfig(cfg: GameConfigJson): Uint8Array {
  const parts: Uint8Array[] = [encU32(cfg.teams.length)];
  for (const t of cfg.teams) parts.push(addressBytes(t));
  parts.push(encU32(cfg.products.length));
  for (const p of cfg.products) {
    parts.push(encStr(p.name), encU64(BigInt(p.unit_price)), encStr(p.segment));
  }
  parts.push(encU32(cfg.channels.length));
  for (const ch of cfg.channels) {
    parts.push(encStr(ch.name));
    const reach = Object.entries(ch.reach).sort(([a], [b]) => cmpStr(a, b));
    parts.push(encU32(reach.length));
    for (const [seg, r] of reach) parts.push(encStr(seg), encU64(parseFp(r)));
    parts.push(encU32(ch.keywords.length));
    for (const w of ch.keywords) parts.push(encStr(w));
  }
  parts.push(
    encU64(BigInt(cfg.weekly_budget)),
    encU64(BigInt(cfg.report_price)),
    encU64(parseFp(cfg.adjustment_cap)),
    encU64(cfg.rounds_total),
    encU8(cadenceIndex(cfg.cadence)),
    encU64(parseFp(cfg.event_probability)),
    encU64(parseFp(cfg.event_penalty)),
    encU64(parseFp(cfg.concentration_gain)),
  );
  const demand = [...cfg.demand].sort(
    (a, b) => cmpStr(a.segment, b.segment) || a.round - b.round,
  );
  parts.push(encU32(demand.length));
  for (const d of demand) {
    parts.push(encStr(d.segment), encU64(d.round), encU64(BigInt(d.units)));
  }
  parts.push(
    encU64(BigInt(cfg.gas_price)),
    encU64(BigInt(cfg.block_gas_limit)),
    addressBytes(cfg.treasury),
    encU8(cfg.budget_carryover ? 1 : 0),
  );
  return concat(...parts);
}

export function decodeGameConfig(data: Uint8Array): GameConfigJson {
  const r = new Reader(data);
  const teams: string[] = [];
  for (let i = r.u32(); i > 0; i--) teams.push(toHex(r.take(20)));
  const products: ProductJson[] = [];
  for (let i = r.u32(); i > 0; i--) {
    products.push({
      name: r.str(),
      unit_price: r.u64().toString(),
      segment: r.str(),
    });
  }
  const channels: ChannelJson[] = [];
  for (let i = r.u32(); i > 0; i--) {
    const name = r.str();
    const reach: Record<string, string> = {};
    for (let j = r.u32(); j > 0; j--) reach[r.str()] = formatFp(toSafe(r.u64()));
    const keywords: string[] = [];
    for (let j = r.u32(); j > 0; j--) keywords.push(r.str());
    channels.push({ name, reach, keywords });
  }
  const weekly_budget = r.u64().toString();
  const report_price = r.u64().toString();
  const adjustment_cap = formatFp(toSafe(r.u64()));
  const rounds_total = toSafe(r.u64());
  const cadenceIdx = r.u8();
  if (cadenceIdx >= CADENCES.length) throw new EncodingError("bad cadence tag");
  const event_probability = formatFp(toSafe(r.u64()));
  const event_penalty = formatFp(toSafe(r.u64()));
  const concentration_gain = formatFp(toSafe(r.u64()));
  const demand: DemandJson[] = [];
  for (let i = r.u32(); i > 0; i--) {
    demand.push({ segment: r.str(), round: toSafe(r.u64()), units: r.u64().toString() });
  }
  const gas_price = r.u64().toString();
  const block_gas_limit = r.u64().toString();
  const treasury = toHex(r.take(20));
  const carryover = r.u8();
  r.expectEnd();
  if (carryover > 1) throw new EncodingError("bad carryover flag");
  return {
    teams,
    products,
    channels,
    weekly_budget,
    report_price,
    adjustment_cap,
    rounds_total,
    cadence: CADENCES[cadenceIdx],
    event_probability,
    event_penalty,
    concentration_gain,
    demand,
    gas_price,
    block_gas_limit,
    treasury,
    budget_carryover: carryover === 1,
  };
}

export function configDigest(cfg: GameConfigJson): string {
  return toHex(sha256(encodeGameConfig(cfg)));
}

function cadenceIndex(cadence: string): number {
  const i = CADENCES.indexOf(cadence as (typeof CADENCES)[number]);
  if (i < 0) throw new EncodingError(`unknown cadence: ${cadence}`);
  return i;
}

function addressBytes(hex: string): Uint8Array {
  const b = new Reader(fromHexStrict(hex)).take(20);
  return b;
}

function fromHexStrict(hex: string): Uint8Array {
  const t = hex.startsWith("0x") ? hex.slice(2) : hex;
  if (t.length !== 40) throw new EncodingError(`not a 20-byte address: ${hex}`);
  const out = new Uint8Array(20);
  for (let i = 0; i < 20; i++) out[i] = parseInt(t.slice(2 * i, 2 * i + 2), 16);
  return out;
}

// -- decision payloads -------------------------------------------------------

export type SpendMatrix = number[][];

export function planTotal(spend: SpendMatrix): number {
  let total = 0;
  for (const row of spend) for (const c of row) total += c;
  return total;
}

function encodeSpendMatrix(spend: SpendMatrix, signed: boolean): Uint8Array {
  const rows = spend.length;
  const cols = rows ? spend[0].length : 0;
  const parts: Uint8Array[] = [encU32(rows), encU32(cols)];
  for (const row of spend) {
    if (row.length !== cols) throw new EncodingError("ragged spend matrix");
    for (const c of row) parts.push(signed ? encS64(c) : encU64(c));
  }
  return concat(...parts);
}

export function encodePlan(spend: SpendMatrix): Uint8Array {
  return encodeSpendMatrix(spend, false);
}

export interface AdjustmentDraft {
  keywords?: Record<number, string[]>;
  targetWeights?: Record<string, number>;
  spendDelta?: SpendMatrix;
}

export function encodeAdjustment(adj: AdjustmentDraft): Uint8Array {
  const kw = adj.keywords ?? {};
  const channels = Object.keys(kw)
    .map(Number)
    .sort((a, b) => a - b);
  const parts: Uint8Array[] = [encU32(channels.length)];
  for (const ch of channels) {
    const words = kw[ch];
    parts.push(encU32(ch), encU32(words.length));
    for (const w of words) parts.push(encStr(w));
  }
  const weights = adj.targetWeights ?? {};
  const segments = Object.keys(weights).sort(cmpStr);
  parts.push(encU32(segments.length));
  for (const seg of segments) parts.push(encStr(seg), encU64(weights[seg]));
  const delta = adj.spendDelta;
  if (delta && delta.length) {
    parts.push(encU8(1), encodeSpendMatrix(delta, true));
  } else {
    parts.push(encU8(0));
  }
  return concat(...parts);
}

export function encodeRespond(choice: number): Uint8Array {
  if (choice < 0 || choice >= RESPONSE_CHOICES.length) {
    throw new EncodingError(`response choice out of range: ${choice}`);
  }
  return encU8(choice);
}

export function encodeBuyReport(round: number): Uint8Array {
  return encU64(round);
}

export interface EventDraw {
  occurred: boolean;
  kind: number;
  product: number;
}

export function decodeEventDraw(data: Uint8Array): EventDraw {
  const r = new Reader(data);
  const occurred = r.u8() === 1;
  const kind = r.u8();
  const product = r.u8();
  r.expectEnd();
  return { occurred, kind, product };
}

// -- contract storage keys (hex-encoded in /state paths) ----------------------

const ascii = (s: string) => new TextEncoder().encode(s);

export function kConfig(): Uint8Array {
  return ascii("config");
}

export function kPhase(): Uint8Array {
  return ascii("phase");
}

export function kRound(): Uint8Array {
  return ascii("round");
}

export function kEvent(round: number): Uint8Array {
  return concat(ascii("event"), encU64(round));
}

export function kPlan(round: number, team: Uint8Array): Uint8Array {
  return concat(ascii("plan"), encU64(round), team);
}

export function kPurchase(round: number, team: Uint8Array): Uint8Array {
  return concat(ascii("bought"), encU64(round), team);
}
