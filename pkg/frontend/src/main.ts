// Browser entry point. The node service address comes from the ?api=
// query parameter and defaults to the local node.

import { ApiClient } from "./api.js";
import { mountApp } from "./views/app.js";

document.addEventListener("DOMContentLoaded", () => {
  const params = new URLSearchParams(window.location.search);
  const base = params.get("api") ?? "http://127.0.0.1:8545";
  const root = document.getElementById("app");
  if (!root) return;
  const handle = mountApp(root, new ApiClient(base));
  handle.startPolling();
});
