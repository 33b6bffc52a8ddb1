// Instructor panel: the config editor (editable only before the game
// starts; locked with an explanatory banner afterwards), phase advance
// and round close buttons, the live event log, and an all-team overview.
// Every button press is a signed admin transaction through /admin/*.

import { ApiError, EventDoc } from "../api.js";
import { GameClient } from "../client.js";
import { GameConfigJson, PHASE_SETUP } from "../game.js";
import { clear, el, setStatus } from "./dom.js";

export function renderAdmin(root: HTMLElement, client: GameClient): void {
  clear(root);
  root.append(el("h2", {}, "Instructor panel"));
  const status = el("div", { class: "status", id: "admin-status" });

  const editor = el("textarea", {
    id: "config-editor",
    rows: "14",
    cols: "80",
  }) as HTMLTextAreaElement;
  if (client.config) editor.value = JSON.stringify(client.config, null, 2);

  const configSection = el("section", { id: "admin-config" },
    el("h3", {}, "Game configuration"));
  if (client.phase === PHASE_SETUP) {
    const apply = el("button", { id: "config-apply" }, "Apply configuration");
    apply.addEventListener("click", async () => {
      let cfg: GameConfigJson;
      try {
        cfg = JSON.parse(editor.value);
      } catch {
        setStatus(status, "err", "config editor does not hold valid JSON");
        return;
      }
      try {
        const receipt = await client.configure(cfg);
        if (receipt.status === "ok") {
          await client.loadConfig();
          setStatus(status, "ok", `configuration set in block ${receipt.block}`);
        } else {
          setStatus(status, "err", receipt.error ?? "reverted");
        }
      } catch (err) {
        if (err instanceof ApiError) setStatus(status, "err", err.message);
        else throw err;
      }
    });
    configSection.append(editor, apply);
  } else {
    editor.setAttribute("readonly", "readonly");
    configSection.append(
      el("p", { class: "notice", id: "config-locked" },
        "ConfigLocked: the game has started; configuration is read-only."),
      editor,
    );
  }

  const advance = el("button", { id: "admin-advance" }, "Advance phase");
  advance.addEventListener("click", () =>
    runAdmin(client, status, () => client.advancePhase(), "phase advanced"));
  const close = el("button", { id: "admin-close" }, "Close round");
  close.addEventListener("click", () =>
    runAdmin(client, status, () => client.closeRound(), "round closed"));

  const teams = el("ul", { id: "team-overview" });
  for (const t of client.config?.teams ?? []) {
    teams.append(el("li", { class: "team-row" }, t));
  }

  root.append(
    configSection,
    el("section", {},
      el("h3", {}, "Phase control"),
      el("p", { id: "admin-phase" },
        `Round ${client.round}, phase ${client.phaseName}`),
      advance, close),
    el("section", {}, el("h3", {}, "Teams"), teams),
    el("section", {},
      el("h3", {}, "Event log"),
      el("ul", { id: "event-log" })),
    status,
  );
}

async function runAdmin(
  client: GameClient,
  status: HTMLElement,
  action: () => Promise<{ status: string; error: string | null; block: number }>,
  okText: string,
): Promise<void> {
  try {
    const receipt = await action();
    if (receipt.status === "ok") {
      await client.syncRound();
      const phaseLine = document.getElementById("admin-phase");
      if (phaseLine) {
        phaseLine.textContent = `Round ${client.round}, phase ${client.phaseName}`;
      }
      setStatus(status, "ok", `${okText} (block ${receipt.block})`);
    } else {
      setStatus(status, "err", receipt.error ?? "reverted");
    }
  } catch (err) {
    if (err instanceof ApiError) setStatus(status, "err", err.message);
    else throw err;
  }
}

// Appends one feed entry to the visible event log, newest last.
export function appendEventLog(ev: EventDoc): void {
  const log = document.getElementById("event-log");
  if (!log) return;
  log.append(el("li", { class: "event-entry" },
    `block ${ev.block}: ${ev.topic}`));
}
