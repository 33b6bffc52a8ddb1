// Reporting stage dashboard. While the round is still open the stage is a
// purchase panel: teams buy the market report for the current round on
// chain; the dashboard itself unlocks once the instructor closes the
// round. Closed rounds render own shares, units, revenue and the informal
// sales-force feedback always, and the competitor/market section only if
// that team bought the round's report. Round 1 carries a "test round"
// badge; it is not scored.

import { ApiError } from "../api.js";
import { GameClient } from "../client.js";
import { fpPercent } from "../fixedpoint.js";
import { EVENT_KINDS, kPurchase, PHASE_FINISHED } from "../game.js";
import { clear, el, setStatus } from "./dom.js";

const TOKEN = 10n ** 18n;

export async function renderReport(
  root: HTMLElement,
  client: GameClient,
  round: number,
): Promise<void> {
  clear(root);
  root.append(el("h2", {}, `Round ${round} report`));
  const status = el("div", { class: "status", id: "report-status" });
  root.append(status);

  let view: any;
  try {
    view = await client.fetchReport(round);
  } catch (err) {
    if (err instanceof ApiError && err.status === 409) {
      await renderBuyPanel(root, client, round, status);
      return;
    }
    if (err instanceof ApiError) {
      setStatus(status, "err", err.message);
      return;
    }
    throw err;
  }
  renderView(root, client, view, status);
}

// The round is not closed yet: offer the on-chain purchase.
async function renderBuyPanel(
  root: HTMLElement,
  client: GameClient,
  round: number,
  status: HTMLElement,
): Promise<void> {
  root.append(
    el("p", { id: "report-pending" },
      "The round is still open; the dashboard unlocks when the instructor closes it."),
  );
  const purchased = await hasPurchased(client, round);
  if (purchased) {
    root.append(
      el("p", { class: "badge", id: "report-purchased" },
        "market report purchased for this round"),
    );
    return;
  }
  const price = client.config?.report_price ?? "?";
  const buy = el("button", { id: "buy-report" },
    `Buy market report (${price} tokens)`) as HTMLButtonElement;
  buy.addEventListener("click", async () => {
    try {
      const acct = await client.api.account(client.addressHex);
      const cost = BigInt(client.config!.report_price) * TOKEN;
      if (BigInt(acct.balance) < cost) {
        setStatus(status, "err",
          `insufficient balance: report costs ${client.config!.report_price} tokens`);
        return;
      }
      setStatus(status, "info", "buying report");
      const receipt = await client.buyReport(round);
      if (receipt.status !== "ok") {
        setStatus(status, "err", receipt.error ?? "reverted");
        return;
      }
      setStatus(status, "ok", "market report purchased");
      buy.replaceWith(
        el("p", { class: "badge", id: "report-purchased" },
          "market report purchased for this round"),
      );
    } catch (err) {
      if (err instanceof ApiError) setStatus(status, "err", err.message);
      else throw err;
    }
  });
  root.append(buy);
}

async function hasPurchased(client: GameClient, round: number): Promise<boolean> {
  if (!client.gameAddress) return false;
  const hex = await client.api.state(
    client.gameAddress,
    kPurchase(round, client.signer.address),
  );
  return hex !== "0x";
}

function renderView(
  root: HTMLElement,
  client: GameClient,
  view: any,
  status: HTMLElement,
): void {
  if (view.test_round) {
    root.append(
      el("span", { class: "badge badge-test", id: "test-round-badge" },
        "test round — not scored"),
    );
  }

  if (view.event?.occurred) {
    root.append(
      el("p", { id: "report-event" },
        `Event this round: ${EVENT_KINDS[view.event.kind] ?? view.event.kind}`),
    );
  }

  if (view.own) {
    const own = view.own;
    const table = el("table", { id: "own-stats" });
    const rows: [string, string][] = [
      ["Spend", own.spend_total],
      ["Revenue", own.revenue],
      ["Units sold", own.units_sold.join(", ")],
      ["Shares", own.shares.map(fpPercent).join(", ")],
      ["Score delta", own.score_delta],
      ["Event outcome", own.event_outcome ?? "none"],
    ];
    for (const [k, v] of rows) {
      table.append(el("tr", {}, el("th", {}, k), el("td", {}, v)));
    }
    root.append(table);
  }
  if (view.informal) {
    root.append(el("p", { class: "informal", id: "informal-feedback" }, view.informal));
  }

  if (view.market) {
    root.append(renderMarket(view.market));
  } else {
    root.append(
      el("p", { class: "muted", id: "no-market" },
        "Market statistics were not purchased for this round."),
    );
  }
  setStatus(status, "info", `report digest ${view.digest.slice(0, 18)}..`);
}

function renderMarket(market: any): HTMLElement {
  const section = el("section", { id: "market-section" },
    el("h3", {}, "Competition"));
  const teams = el("table", { id: "competitor-table" });
  teams.append(el("tr", {},
    el("th", {}, "Team"), el("th", {}, "Spend"), el("th", {}, "Shares")));
  for (const t of market.teams) {
    teams.append(el("tr", { class: "competitor-row" },
      el("td", {}, t.team.slice(0, 10) + ".."),
      el("td", {}, t.spend_total),
      el("td", {}, t.shares.map(fpPercent).join(", "))));
  }
  const segments = el("table", { id: "segment-table" });
  segments.append(el("tr", {},
    el("th", {}, "Segment"), el("th", {}, "Demand"), el("th", {}, "Sold")));
  for (const s of market.segments) {
    segments.append(el("tr", {},
      el("td", {}, s.segment), el("td", {}, s.demand_units), el("td", {}, s.units_sold)));
  }
  section.append(teams, el("h3", {}, "Segments"), segments);
  return section;
}

// Closed-round browser: pick any finished round, newest first.
export async function renderReports(root: HTMLElement, client: GameClient): Promise<void> {
  clear(root);
  const last = client.phase === PHASE_FINISHED ? client.round : client.round - 1;
  if (last < 1) {
    root.append(el("p", { class: "muted", id: "no-reports" },
      "No rounds have closed yet."));
    return;
  }
  const nav = el("div", { class: "report-nav", id: "report-nav" });
  const body = el("div", { id: "report-body" });
  for (let r = last; r >= 1; r--) {
    const btn = el("button", { id: `report-nav-${r}` }, `Round ${r}`);
    btn.addEventListener("click", () => void renderReport(body, client, r));
    nav.append(btn);
  }
  root.append(nav, body);
  await renderReport(body, client, last);
}
