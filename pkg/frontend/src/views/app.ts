// Application shell: keystore upload and unlock, the round/phase status
// bar, and stage navigation. The whole view is reconstructed from the
// API on every sync; a hard refresh loses nothing but the unlocked key.

import { ApiClient } from "../api.js";
import { GameClient, pollEvents } from "../client.js";
import { parseKeystore, unlockKeystore, WrongPassphrase } from "../keystore.js";
import {
  PHASE_EXECUTION,
  PHASE_FINISHED,
  PHASE_PLANNING,
  PHASE_REPORTING,
} from "../game.js";
import { appendEventLog, renderAdmin } from "./admin.js";
import { clear, el, setStatus } from "./dom.js";
import { renderExecution } from "./execution.js";
import { renderPlanning } from "./planning.js";
import { renderReport, renderReports } from "./report.js";

export interface AppHandle {
  client: GameClient | null;
  sync: () => Promise<void>;
  startPolling: () => void;
  stopPolling: () => void;
}

export function mountApp(root: HTMLElement, api: ApiClient): AppHandle {
  clear(root);
  let stopped = true;
  const handle: AppHandle = {
    client: null,
    sync: async () => {},
    startPolling: () => {
      if (!stopped) return;
      stopped = false;
      void pollEvents(api, (ev) => {
        appendEventLog(ev);
        if (handle.client?.applyEvent(ev)) void handle.sync();
      }, { wait: 20, stop: () => stopped }).catch(() => undefined);
    },
    stopPolling: () => {
      stopped = true;
    },
  };
  let tab: "stage" | "reports" = "stage";

  const status = el("div", { class: "status", id: "app-status" });
  const statusBar = el("div", { class: "statusbar" },
    el("span", { id: "who" }, "locked"),
    " | ",
    el("span", { id: "round-phase" }, "no game"),
    status);
  const nav = el("nav", { id: "team-nav", class: "hidden" });
  const stageBtn = el("button", { id: "nav-stage" }, "Current stage");
  const reportsBtn = el("button", { id: "nav-reports" }, "Reports");
  stageBtn.addEventListener("click", () => {
    tab = "stage";
    void handle.sync();
  });
  reportsBtn.addEventListener("click", () => {
    tab = "reports";
    void handle.sync();
  });
  nav.append(stageBtn, reportsBtn);
  const stage = el("main", { id: "stage" });

  // keystore unlock form; the file never leaves the page
  const fileInput = el("input", { type: "file", id: "keystore-file" }) as HTMLInputElement;
  const passInput = el("input", {
    type: "password",
    id: "keystore-pass",
    placeholder: "passphrase",
  }) as HTMLInputElement;
  const unlockBtn = el("button", { id: "keystore-unlock" }, "Unlock") as HTMLButtonElement;
  const unlockForm = el("div", { class: "unlock", id: "unlock-form" },
    el("h2", {}, "Unlock account"),
    fileInput, passInput, unlockBtn,
    el("div", { class: "status", id: "unlock-status" }));

  unlockBtn.addEventListener("click", async () => {
    const unlockStatus = document.getElementById("unlock-status")!;
    const file = fileInput.files?.[0];
    if (!file) {
      setStatus(unlockStatus, "err", "choose a keystore file first");
      return;
    }
    try {
      const signer = await unlockKeystore(
        parseKeystore(await file.text()),
        passInput.value,
      );
      passInput.value = "";
      handle.client = new GameClient(api, signer);
      document.getElementById("who")!.textContent = handle.client.addressHex;
      unlockForm.classList.add("hidden");
      await handle.sync();
    } catch (err) {
      if (err instanceof WrongPassphrase) {
        setStatus(unlockStatus, "err", "wrong passphrase");
      } else {
        setStatus(unlockStatus, "err", String(err));
      }
    }
  });

  handle.sync = async () => {
    const client = handle.client;
    if (!client) return;
    try {
      await client.syncRound();
    } catch {
      document.getElementById("round-phase")!.textContent = "no game deployed yet";
      return;
    }
    await client.refreshEventBanner();
    document.getElementById("round-phase")!.textContent =
      `round ${client.round} — ${client.phaseName}`;
    if (client.isAdmin) {
      nav.classList.add("hidden");
      renderAdmin(stage, client);
      return;
    }
    nav.classList.remove("hidden");
    if (tab === "reports") {
      await renderReports(stage, client);
      return;
    }
    switch (client.phase) {
      case PHASE_PLANNING:
        renderPlanning(stage, client);
        break;
      case PHASE_EXECUTION:
        renderExecution(stage, client);
        break;
      case PHASE_REPORTING:
        await renderReport(stage, client, client.round);
        break;
      case PHASE_FINISHED:
        await renderReports(stage, client);
        break;
      default:
        clear(stage).append(el("p", { class: "muted" }, "Game is being set up."));
    }
  };

  root.append(statusBar, nav, unlockForm, stage);
  return handle;
}
