// Planning stage: the budget matrix form. One number input per
// product x channel cell, a live total against the weekly budget W, and
// a submit button that is disabled the moment the draft goes over W or
// spends nothing. Server rejections (422 reasons) are shown verbatim;
// resubmission before the phase ends replaces the escrowed plan.

import { ApiError } from "../api.js";
import { ClientValidation, checkPlan, GameClient } from "../client.js";
import { planTotal, SpendMatrix } from "../game.js";
import { clear, el, setStatus } from "./dom.js";

export function renderPlanning(root: HTMLElement, client: GameClient): void {
  clear(root);
  const cfg = client.config;
  if (!cfg) {
    root.append(el("p", { class: "muted" }, "Waiting for game configuration."));
    return;
  }
  const budget = client.budget();
  // the draft is client state, not view state: a re-render or a phase
  // banner refresh must never wipe half-typed numbers
  if (!client.planDraft) {
    client.planDraft = cfg.products.map(() => cfg.channels.map(() => 0));
  }
  const draft: SpendMatrix = client.planDraft;

  const table = el("table", { class: "plan-grid", id: "plan-grid" });
  const header = el("tr", {}, el("th", {}, "Product \\ Channel"));
  for (const ch of cfg.channels) header.append(el("th", {}, ch.name));
  table.append(header);

  const totalCell = el("span", { id: "plan-total" }, String(planTotal(draft)));
  const budgetCell = el("span", { id: "plan-budget" }, String(budget));
  const submit = el("button", { id: "plan-submit" }, "Submit plan") as HTMLButtonElement;
  // the validation hint and the submit outcome live in separate elements,
  // so a late receipt can never be overwritten by draft edits
  const hint = el("div", { class: "status", id: "plan-validation" });
  const status = el("div", { class: "status", id: "plan-status" });
  const committed = el("span", {
    id: "plan-committed",
    class: "badge hidden",
  }, "committed");

  const refresh = () => {
    const check = checkPlan(draft, budget);
    totalCell.textContent = String(check.total);
    submit.disabled = !check.ok;
    if (!check.ok && check.reason) setStatus(hint, "err", check.reason);
    else setStatus(hint, "info", "draft within budget");
    committed.classList.toggle("hidden", !client.planCommitted);
  };

  cfg.products.forEach((product, p) => {
    const row = el("tr", {}, el("th", {}, product.name));
    cfg.channels.forEach((_, c) => {
      const input = el("input", {
        type: "number",
        min: "0",
        step: "1",
        id: `plan-${p}-${c}`,
        value: String(draft[p][c]),
      }) as HTMLInputElement;
      input.addEventListener("input", () => {
        draft[p][c] = Math.max(0, Math.floor(Number(input.value) || 0));
        refresh();
      });
      row.append(el("td", {}, input));
    });
    table.append(row);
  });

  submit.addEventListener("click", async () => {
    setStatus(status, "info", "signing and submitting plan");
    try {
      const receipt = await client.submitPlan(draft.map((r) => [...r]));
      if (receipt.status === "ok") {
        setStatus(status, "ok", `plan committed in block ${receipt.block}`);
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
    refresh();
  });

  root.append(
    el("h2", {}, "Planning"),
    table,
    el(
      "p",
      { class: "plan-summary" },
      "Total ",
      totalCell,
      " of ",
      budgetCell,
      " ",
      committed,
    ),
    hint,
    submit,
    status,
  );
  refresh();
}
