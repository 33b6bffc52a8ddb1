// Typed client for the node HTTP service (docs/api.md in the chain
// package). The service holds no keys and performs no game logic for us:
// every write posted here is a fully signed transaction, and every read
// carries the node's head hash so callers can detect reorgs.

import { toHex } from "./codec.js";

export class ApiError extends Error {
  constructor(
    public status: number,
    public code: string,
    detail?: string,
  ) {
    super(detail ? `${code}: ${detail}` : code);
  }
}

export interface PostTxResult {
  tx_hash: string;
  accepted: boolean;
  head: string;
}

export interface EventDoc {
  cursor: number;
  block: number;
  tx_hash: string;
  topic: string;
  value: string;
}

export interface EventsPage {
  events: EventDoc[];
  next: number;
  head: string;
}

export interface Receipt {
  tx_hash: string;
  block: number;
  index: number;
  status: "ok" | "reverted";
  gas_used: string;
  error: string | null;
  events: { topic: string; value: string }[];
  head: string;
  contract_address?: string;
}

export interface RoundInfo {
  game: string;
  round: number;
  phase: number;
  phase_name: string;
  head: string;
  rounds_total?: number;
  cadence?: string;
  weekly_budget?: string;
  report_price?: string;
  teams?: string[];
}

export interface AccountInfo {
  address: string;
  balance: string;
  nonce: number;
  head: string;
}

export interface ReportAuth {
  pub?: string;
  sig?: string;
  token?: string;
}

export type AdminEndpoint = "config" | "advance" | "close";

export class ApiClient {
  constructor(public baseUrl: string) {}

  private async request(
    method: string,
    path: string,
    body?: string | object,
  ): Promise<any> {
    const init: RequestInit = { method };
    if (typeof body === "string") {
      init.body = body;
      init.headers = { "content-type": "text/plain" };
    } else if (body !== undefined) {
      init.body = JSON.stringify(body);
      init.headers = { "content-type": "application/json" };
    }
    const res = await fetch(this.baseUrl + path, init);
    const text = await res.text();
    let doc: any = null;
    try {
      doc = text ? JSON.parse(text) : null;
    } catch {
      doc = null;
    }
    if (!res.ok) {
      const detail = doc?.detail;
      const code =
        typeof detail === "object" && detail?.error
          ? detail.error
          : typeof detail === "string"
            ? detail
            : `HTTP${res.status}`;
      const extra = typeof detail === "object" ? detail?.detail : undefined;
      throw new ApiError(res.status, code, extra);
    }
    return doc;
  }

  // body is the hex of a canonical signed transaction
  postTx(wireHex: string): Promise<PostTxResult> {
    return this.request("POST", "/tx", wireHex);
  }

  adminPost(endpoint: AdminEndpoint, wireHex: string): Promise<Receipt> {
    return this.request("POST", `/admin/${endpoint}`, wireHex);
  }

  round(): Promise<RoundInfo> {
    return this.request("GET", "/round");
  }

  head(): Promise<any> {
    return this.request("GET", "/chain/head");
  }

  blocks(from: number, to?: number): Promise<any> {
    const q = to === undefined ? `from=${from}` : `from=${from}&to=${to}`;
    return this.request("GET", `/chain/blocks?${q}`);
  }

  async state(contract: string, key: Uint8Array): Promise<string> {
    const doc = await this.request("GET", `/state/${contract}/${toHex(key)}`);
    return doc.value;
  }

  account(nameOrAddress: string): Promise<AccountInfo> {
    return this.request("GET", `/accounts/${nameOrAddress}`);
  }

  receipt(txHash: string): Promise<Receipt> {
    return this.request("GET", `/receipt/${txHash}`);
  }

  report(round: number, team: string, auth: ReportAuth): Promise<any> {
    const params = new URLSearchParams({ team });
    if (auth.token) params.set("token", auth.token);
    if (auth.pub) params.set("pub", auth.pub);
    if (auth.sig) params.set("sig", auth.sig);
    return this.request("GET", `/report/${round}?${params}`);
  }

  events(since: number, wait?: number): Promise<EventsPage> {
    const q = wait ? `since=${since}&wait=${wait}` : `since=${since}`;
    return this.request("GET", `/events?${q}`);
  }

  sessionChallenge(address: string): Promise<{
    challenge: string;
    expires_in: number;
    sign_tag: string;
  }> {
    return this.request("POST", "/session/challenge", { address });
  }

  sessionLogin(doc: {
    address: string;
    challenge: string;
    pub: string;
    sig: string;
  }): Promise<{ token: string; expires_in: number }> {
    return this.request("POST", "/session/login", doc);
  }
}
