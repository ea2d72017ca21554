/**
 * Browser shell: hash routing, admin token entry, event wiring.
 *
 * All rendering goes through the controllers; this file only moves strings
 * into the DOM and events back out.
 */

import { ApiClient } from "./api.js";
import { BrowseController, QueueController, StatsController } from "./controllers.js";
import { escapeHtml } from "./render.js";
import { getToken, setToken } from "./session.js";

const client = new ApiClient("", getToken);
const queue = new QueueController(client);
const browse = new BrowseController(client);
const stats = new StatsController(client);

const app = document.getElementById("app") as HTMLElement;
const nav = document.getElementById("nav") as HTMLElement;

type View = "queue" | "browse" | "stats";

function currentView(): View {
  const h = location.hash.replace("#/", "");
  if (h === "browse" || h === "stats") return h;
  return "queue";
}

function renderNav(): void {
  const view = currentView();
  const link = (v: View, label: string) =>
    `<a href="#/${v}" class="${view === v ? "active" : ""}">${label}</a>`;
  const tokenState = getToken() === null ? "no token" : "token set";
  nav.innerHTML = `
    ${link("queue", "moderation")}
    ${link("browse", "browse")}
    ${link("stats", "statistics")}
    <span class="token-state">${escapeHtml(tokenState)}</span>
    <button data-action="edit-token">set token</button>`;
}

function tokenForm(): string {
  return `
  <div class="token-form">
    <h2>admin token</h2>
    <p class="muted">kept in memory for this tab only; entering a new one replaces it</p>
    <input type="password" id="token-input" placeholder="X-Admin-Token">
    <button data-action="save-token">use token</button>
  </div>`;
}

let editingToken = false;

async function show(): Promise<void> {
  renderNav();
  const view = currentView();
  if (view === "queue") {
    if (editingToken || getToken() === null) {
      app.innerHTML = tokenForm();
      return;
    }
    if (queue.entries === null) await queue.refresh();
    app.innerHTML = queue.html();
  } else if (view === "browse") {
    if (browse.page === null) await browse.load();
    app.innerHTML = browse.html();
  } else {
    await stats.load();
    app.innerHTML = stats.html();
  }
}

function readBrowseFilters(): Record<string, string | undefined> {
  const out: Record<string, string | undefined> = {};
  for (const el of app.querySelectorAll<HTMLInputElement | HTMLSelectElement>("[data-filter]")) {
    const key = el.dataset.filter as string;
    out[key] = el.value === "" ? undefined : el.value;
  }
  return out;
}

app.addEventListener("click", (ev) => {
  const target = (ev.target as HTMLElement).closest<HTMLElement>("[data-action]");
  if (target === null) return;
  const action = target.dataset.action;
  const batchId = target.dataset.batch ?? "";
  const run = async () => {
    switch (action) {
      case "save-token": {
        const input = document.getElementById("token-input") as HTMLInputElement;
        setToken(input.value);
        editingToken = false;
        queue.entries = null;
        await show();
        break;
      }
      case "refresh-queue":
        await queue.refresh();
        app.innerHTML = queue.html();
        break;
      case "open":
        queue.open(batchId);
        app.innerHTML = queue.html();
        break;
      case "approve":
        target.setAttribute("disabled", "");
        await queue.approve(batchId);
        app.innerHTML = queue.html();
        break;
      case "reject":
        target.setAttribute("disabled", "");
        await queue.reject(batchId);
        app.innerHTML = queue.html();
        break;
      case "browse-apply":
        ev.preventDefault();
        await browse.applyFilters(readBrowseFilters());
        app.innerHTML = browse.html();
        break;
      case "browse-prev":
        await browse.prev();
        app.innerHTML = browse.html();
        break;
      case "browse-next":
        await browse.next();
        app.innerHTML = browse.html();
        break;
    }
  };
  void run();
});

nav.addEventListener("click", (ev) => {
  const target = (ev.target as HTMLElement).closest<HTMLElement>("[data-action]");
  if (target?.dataset.action === "edit-token") {
    editingToken = true;
    location.hash = "#/queue";
    void show();
  }
});

app.addEventListener("change", (ev) => {
  const el = ev.target as HTMLSelectElement;
  if (el.dataset.role === "scheme") {
    queue.setScheme(el.dataset.batch ?? "", el.value);
    app.innerHTML = queue.html();
  }
});

// live-enable the reject button as the reason is typed, without a re-render
// that would steal focus from the input
app.addEventListener("input", (ev) => {
  const el = ev.target as HTMLInputElement;
  if (el.dataset.role !== "reason") return;
  const batchId = el.dataset.batch ?? "";
  queue.setReason(batchId, el.value);
  const button = app.querySelector<HTMLButtonElement>(
    `button[data-action="reject"][data-batch="${CSS.escape(batchId)}"]`,
  );
  if (button !== null) button.disabled = el.value.trim() === "";
});

window.addEventListener("hashchange", () => void show());
void show();
