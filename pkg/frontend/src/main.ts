/** Boot: mount the wizard, resuming the session from the URL hash so a page
 * reload re-fetches the same server state. */

import { ApiClient } from "./api.js";
import { Wizard } from "./wizard.js";

function apiBase(): string {
  const params = new URLSearchParams(window.location.search);
  return params.get("api") ?? "http://127.0.0.1:8080";
}

async function boot(): Promise<void> {
  const root = document.getElementById("app");
  if (!root) {
    throw new Error("missing #app element");
  }
  const wizard = new Wizard(root, new ApiClient(apiBase()));
  const existing = window.location.hash.replace(/^#/, "");
  try {
    await wizard.start(existing || undefined);
  } catch {
    // Stale or expired session in the hash: start a fresh one.
    await wizard.start();
  }
  const sid = wizard.store.get().sessionId;
  if (sid) {
    window.location.hash = sid;
  }
}

void boot();
