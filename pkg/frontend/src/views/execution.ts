// Execution stage: keyword pickers per channel, target weight inputs per
// segment, spend-delta editors clamped to the configured cap, and the
// event-response dialog that appears while an event is active. Controls
// stay disabled until a plan exists; the cap is enforced before signing
// and, regardless, by the contract.

import { ApiError } from "../api.js";
import { ClientValidation, deltaBound, GameClient } from "../client.js";
import { EVENT_KINDS, RESPONSE_CHOICES, SpendMatrix } from "../game.js";
import { parseFp } from "../fixedpoint.js";
import { clear, el, setStatus } from "./dom.js";

export function renderExecution(root: HTMLElement, client: GameClient): void {
  clear(root);
  const cfg = client.config;
  if (!cfg) {
    root.append(el("p", { class: "muted" }, "Waiting for game configuration."));
    return;
  }
  root.append(el("h2", {}, "Execution"));

  renderEventDialog(root, client);

  if (!client.planDraft) {
    root.append(
      el(
        "p",
        { class: "muted", id: "exec-disabled" },
        "No plan was submitted this round; adjustments are unavailable.",
      ),
    );
    return;
  }

  const capFp = parseFp(cfg.adjustment_cap);
  const planned = client.planDraft;
  const delta: SpendMatrix = planned.map((row) => row.map(() => 0));
  const keywords: Record<number, string[]> = {};
  const weights: Record<string, number> = {};

  const kwSection = el("fieldset", { id: "exec-keywords" }, el("legend", {}, "Keywords"));
  cfg.channels.forEach((ch, idx) => {
    const input = el("input", {
      type: "text",
      id: `kw-${idx}`,
      placeholder: ch.keywords.join(", "),
    }) as HTMLInputElement;
    input.addEventListener("input", () => {
      const words = input.value
        .split(",")
        .map((w) => w.trim())
        .filter(Boolean);
      if (words.length) keywords[idx] = words;
      else delete keywords[idx];
    });
    kwSection.append(el("label", { for: `kw-${idx}` }, ch.name, ": "), input);
  });

  const segments = [...new Set(cfg.products.map((p) => p.segment))].sort();
  const wSection = el("fieldset", { id: "exec-weights" }, el("legend", {}, "Target weights"));
  for (const seg of segments) {
    const input = el("input", {
      type: "number",
      min: "0",
      step: "1",
      id: `weight-${seg}`,
      value: "",
    }) as HTMLInputElement;
    input.addEventListener("input", () => {
      const v = Math.floor(Number(input.value));
      if (Number.isFinite(v) && v >= 0 && input.value !== "") weights[seg] = v;
      else delete weights[seg];
    });
    wSection.append(el("label", { for: `weight-${seg}` }, seg, ": "), input);
  }

  // delta inputs carry their exact legal range so the cap is visible
  const dSection = el("fieldset", { id: "exec-delta" }, el("legend", {}, "Spend delta"));
  const dTable = el("table", {});
  const dHead = el("tr", {}, el("th", {}, ""));
  for (const ch of cfg.channels) dHead.append(el("th", {}, ch.name));
  dTable.append(dHead);
  planned.forEach((row, p) => {
    const tr = el("tr", {}, el("th", {}, cfg.products[p].name));
    row.forEach((cell, c) => {
      const bound = deltaBound(cell, capFp);
      const input = el("input", {
        type: "number",
        id: `delta-${p}-${c}`,
        min: String(-bound),
        max: String(bound),
        step: "1",
        value: "0",
        title: `planned ${cell}, cap ±${bound}`,
      }) as HTMLInputElement;
      input.addEventListener("input", () => {
        const v = Math.trunc(Number(input.value) || 0);
        delta[p][c] = Math.max(-bound, Math.min(bound, v));
        input.value = String(delta[p][c]);
      });
      tr.append(el("td", {}, input));
    });
    dTable.append(tr);
  });
  dSection.append(dTable);

  const submit = el("button", { id: "adjust-submit" }, "Submit adjustment") as HTMLButtonElement;
  const status = el("div", { class: "status", id: "adjust-status" });
  submit.addEventListener("click", async () => {
    const hasDelta = delta.some((row) => row.some((d) => d !== 0));
    setStatus(status, "info", "signing and submitting adjustment");
    try {
      const receipt = await client.submitAdjustment({
        keywords,
        targetWeights: weights,
        spendDelta: hasDelta ? delta.map((r) => [...r]) : undefined,
      });
      if (receipt.status === "ok") {
        setStatus(status, "ok", `adjustment committed in block ${receipt.block}`);
      } else {
        setStatus(status, "err", receipt.error ?? "reverted");
      }
    } catch (err) {
      if (err instanceof ClientValidation || err instanceof ApiError) {
        setStatus(status, "err", err.message);
      } else {
        throw err;
      }
    }
  });

  root.append(kwSection, wSection, dSection, submit, status);
}

function renderEventDialog(root: HTMLElement, client: GameClient): void {
  const ev = client.activeEvent;
  if (!ev) return;
  const cfg = client.config!;
  const banner = el(
    "div",
    { class: "event-banner", id: "event-banner" },
    el("strong", {}, EVENT_KINDS[ev.kind]),
    ` hits ${cfg.products[ev.product]?.name ?? "a product"} this round. Choose a response:`,
  );
  const status = el("div", { class: "status", id: "respond-status" });
  const choices = el("div", { class: "event-choices" });
  RESPONSE_CHOICES.forEach((label, i) => {
    const btn = el("button", { id: `respond-${i}`, class: "respond" }, label);
    btn.addEventListener("click", async () => {
      setStatus(status, "info", `responding: ${label}`);
      try {
        const receipt = await client.respondToEvent(i);
        if (receipt.status === "ok") setStatus(status, "ok", `response recorded (${label})`);
        else setStatus(status, "err", receipt.error ?? "reverted");
      } catch (err) {
        if (err instanceof ApiError) setStatus(status, "err", err.message);
        else throw err;
      }
    });
    choices.append(btn);
  });
  banner.append(choices, status);
  root.append(banner);
}
