/**
 * Pure HTML renderers. Every function maps server JSON (plus a little view
 * state) to a markup string; no fetching, no DOM, no arithmetic on corpus
 * numbers. Counts, fractions, shares and reward amounts are printed exactly
 * as the API sent them.
 */

import type {
  BrowseFilters,
  BrowsePage,
  QueueEntry,
  StatsBucket,
  StatsReport,
} from "./types.js";

export type BannerKind = "success" | "conflict" | "auth" | "error";

export interface Banner {
  kind: BannerKind;
  text: string;
}

const LANGUAGE_OPTIONS = ["", "english", "chinese", "mixed", "unknown"];
const SOURCE_OPTIONS = ["", "mturk", "shorttask", "zhubajie", "local", "community"];
const METHOD_OPTIONS = ["", "transcription", "export", "upload"];

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;")
    .replace(/'/g, "&#39;");
}

/** Shares arrive rounded to one decimal; keep the server's notation for
 * integer values (54.0 stays "54.0", never "54"). */
export function formatShare(share: number): string {
  return Number.isInteger(share) ? share.toFixed(1) : String(share);
}

export function renderBanner(banner: Banner | null): string {
  if (banner === null) return "";
  return `<div class="banner banner-${banner.kind}" role="alert">${escapeHtml(banner.text)}</div>`;
}

// ---------------------------------------------------------------------------
// moderation queue
// ---------------------------------------------------------------------------

export function rejectDisabled(reason: string): boolean {
  return reason.trim() === "";
}

function renderRewardPreviewRow(name: string, entry: QueueEntry): string {
  const preview = entry.reward_previews[name];
  if (preview === undefined) return "";
  const note = preview.below_minimum
    ? ' <span class="below-min">below scheme minimum</span>'
    : "";
  return (
    `<tr><td>${escapeHtml(name)}</td>` +
    `<td class="amount" data-scheme-amount="${escapeHtml(name)}">` +
    `${escapeHtml(preview.amount)} ${escapeHtml(preview.currency)}</td>` +
    `<td>${note}</td></tr>`
  );
}

function renderReport(entry: QueueEntry): string {
  const r = entry.report;
  const langs = Object.entries(r.language_counts)
    .map(([lang, n]) => `${escapeHtml(lang)}: ${n}`)
    .join(", ");
  const reasons =
    r.reasons.length === 0
      ? ""
      : `<ul class="report-reasons">${r.reasons
          .map((t) => `<li>${escapeHtml(t)}</li>`)
          .join("")}</ul>`;
  return `
    <dl class="report">
      <dt>recommendation</dt><dd class="rec rec-${escapeHtml(r.recommendation)}">${escapeHtml(r.recommendation)}</dd>
      <dt>messages</dt><dd>${r.message_count}</dd>
      <dt>languages</dt><dd>${langs}</dd>
      <dt>exact duplicates</dt><dd>${r.exact_duplicates.length}</dd>
      <dt>near duplicates</dt><dd>${r.near_duplicates.length}</dd>
      <dt>blocklist fraction</dt><dd>${r.blocklist_fraction}</dd>
      <dt>flagged fraction</dt><dd>${r.flagged_fraction}</dd>
    </dl>${reasons}`;
}

function renderQueueDetail(entry: QueueEntry, schemeChoice: string, reasonDraft: string): string {
  const id = entry.batch.id;
  const schemeNames = Object.keys(entry.reward_previews).sort();
  const options = schemeNames
    .map(
      (name) =>
        `<option value="${escapeHtml(name)}"${name === schemeChoice ? " selected" : ""}>${escapeHtml(name)}</option>`,
    )
    .join("");
  const previewRows = schemeNames.map((n) => renderRewardPreviewRow(n, entry)).join("");
  const chosen = entry.reward_previews[schemeChoice];
  const chosenLine =
    chosen === undefined
      ? ""
      : `<p class="chosen-preview">reward on approval: <strong data-chosen-amount>` +
        `${escapeHtml(chosen.amount)} ${escapeHtml(chosen.currency)}</strong></p>`;
  const messages = entry.messages
    .map(
      (m) =>
        `<tr><td class="msg-id">${escapeHtml(m.id)}</td>` +
        `<td>${escapeHtml(m.language)}</td>` +
        `<td class="msg-body">${escapeHtml(m.body)}</td></tr>`,
    )
    .join("");
  const more =
    entry.batch.message_count > entry.messages.length
      ? `<p class="muted">showing first ${entry.messages.length} of ${entry.batch.message_count} messages</p>`
      : "";
  const disabled = rejectDisabled(reasonDraft) ? " disabled" : "";
  return `
  <div class="queue-detail">
    <h3>batch ${escapeHtml(id)}</h3>
    ${renderReport(entry)}
    <table class="messages"><thead><tr><th>id</th><th>lang</th><th>body</th></tr></thead>
      <tbody>${messages}</tbody></table>
    ${more}
    <table class="previews"><thead><tr><th>scheme</th><th>reward</th><th></th></tr></thead>
      <tbody>${previewRows}</tbody></table>
    <div class="decision-controls">
      <label>scheme
        <select data-role="scheme" data-batch="${escapeHtml(id)}">${options}</select>
      </label>
      ${chosenLine}
      <button data-action="approve" data-batch="${escapeHtml(id)}">approve</button>
      <label>reason
        <input type="text" data-role="reason" data-batch="${escapeHtml(id)}"
               value="${escapeHtml(reasonDraft)}" placeholder="required to reject">
      </label>
      <button data-action="reject" data-batch="${escapeHtml(id)}"${disabled}>reject</button>
    </div>
  </div>`;
}

export function renderQueue(
  entries: QueueEntry[] | null,
  openId: string | null,
  schemeChoice: Record<string, string>,
  reasonDraft: Record<string, string>,
  banner: Banner | null,
): string {
  const head = `<h2>moderation queue</h2>${renderBanner(banner)}
    <button data-action="refresh-queue">refresh</button>`;
  if (entries === null) return `${head}<p class="muted">loading...</p>`;
  if (entries.length === 0) return `${head}<p class="empty-state">queue is empty</p>`;
  const rows = entries
    .map((e) => {
      const b = e.batch;
      const open = b.id === openId;
      const row =
        `<tr class="queue-row${open ? " open" : ""}" data-action="open" data-batch="${escapeHtml(b.id)}">` +
        `<td>${escapeHtml(b.id)}</td><td>${escapeHtml(b.source)}</td>` +
        `<td>${escapeHtml(b.method)}</td><td>${b.message_count}</td>` +
        `<td>${escapeHtml(b.received_at)}</td>` +
        `<td class="rec rec-${escapeHtml(e.report.recommendation)}">${escapeHtml(e.report.recommendation)}</td></tr>`;
      if (!open) return row;
      const detail = renderQueueDetail(
        e,
        schemeChoice[b.id] ?? Object.keys(e.reward_previews).sort()[0] ?? "",
        reasonDraft[b.id] ?? "",
      );
      return `${row}<tr class="detail-row"><td colspan="6">${detail}</td></tr>`;
    })
    .join("");
  return `${head}
    <table class="queue"><thead>
      <tr><th>batch</th><th>source</th><th>method</th><th>messages</th><th>received</th><th>screening</th></tr>
    </thead><tbody>${rows}</tbody></table>`;
}

// ---------------------------------------------------------------------------
// corpus browser
// ---------------------------------------------------------------------------

function selectControl(name: string, options: string[], current: string): string {
  const opts = options
    .map(
      (o) =>
        `<option value="${escapeHtml(o)}"${o === current ? " selected" : ""}>${o === "" ? "any" : escapeHtml(o)}</option>`,
    )
    .join("");
  return `<label>${name}<select data-filter="${name}">${opts}</select></label>`;
}

export function renderBrowse(
  page: BrowsePage | null,
  filters: BrowseFilters,
  banner: Banner | null,
): string {
  const form = `
  <form class="filters" data-role="browse-filters">
    ${selectControl("language", LANGUAGE_OPTIONS, filters.language ?? "")}
    ${selectControl("source", SOURCE_OPTIONS, filters.source ?? "")}
    ${selectControl("method", METHOD_OPTIONS, filters.method ?? "")}
    <label>profile
      <input type="text" data-filter="profile_id" value="${escapeHtml(filters.profile_id ?? "")}">
    </label>
    <button data-action="browse-apply">apply</button>
  </form>`;
  const head = `<h2>corpus browser</h2>${renderBanner(banner)}${form}`;
  if (page === null) return `${head}<p class="muted">loading...</p>`;
  if (page.total === 0) return `${head}<p class="empty-state">no messages match</p>`;
  const rows = page.messages
    .map(
      (m) =>
        `<tr><td class="msg-id">${escapeHtml(m.id)}</td>` +
        `<td>${escapeHtml(m.language)}</td><td>${escapeHtml(m.source)}</td>` +
        `<td>${escapeHtml(m.method)}</td>` +
        `<td>${m.sent_at === null ? "" : escapeHtml(m.sent_at)}</td>` +
        `<td class="msg-body">${escapeHtml(m.body)}</td></tr>`,
    )
    .join("");
  const from = page.offset + 1;
  const to = page.offset + page.messages.length;
  const prevDisabled = page.offset === 0 ? " disabled" : "";
  const nextDisabled = to >= page.total ? " disabled" : "";
  return `${head}
  <table class="corpus"><thead>
    <tr><th>id</th><th>lang</th><th>source</th><th>method</th><th>sent</th><th>body</th></tr>
  </thead><tbody>${rows}</tbody></table>
  <div class="pager">
    <button data-action="browse-prev"${prevDisabled}>prev</button>
    <span class="pager-state">${from}-${to} of ${page.total}</span>
    <button data-action="browse-next"${nextDisabled}>next</button>
  </div>`;
}

// ---------------------------------------------------------------------------
// statistics
// ---------------------------------------------------------------------------

export function renderBarChart(title: string, buckets: StatsBucket[]): string {
  if (buckets.length === 0) return "";
  const bars = buckets
    .map((b) => {
      const label = formatShare(b.share);
      return `
      <div class="bar-row">
        <span class="bar-label">${escapeHtml(b.label)}</span>
        <span class="bar-track"><span class="bar-fill" style="width:${label}%"></span></span>
        <span class="bar-value">${label}% (${b.count})</span>
      </div>`;
    })
    .join("");
  return `<div class="chart"><h4>${escapeHtml(title)}</h4>${bars}</div>`;
}

const DEMOGRAPHIC_TITLES: Record<string, string> = {
  age_bucket: "age",
  gender: "gender",
  native_speaker: "native speaker",
  daily_sms_bucket: "messages per day",
  years_sms_bucket: "years using sms",
  phone_brand: "phone brand",
  smartphone: "smartphone",
};

export function renderStats(report: StatsReport | null, banner: Banner | null): string {
  const head = `<h2>statistics</h2>${renderBanner(banner)}`;
  if (report === null) return `${head}<p class="muted">loading...</p>`;
  if (report.summary.total_messages === 0) {
    return `${head}<div class="empty-state"><p>the corpus is empty</p>
      <p class="muted">approved messages will show up here</p></div>`;
  }
  const langCards = Object.entries(report.summary.languages)
    .map(
      ([lang, s]) => `
    <div class="card">
      <h4>${escapeHtml(lang)}</h4>
      <p><span class="big">${s.messages}</span> messages</p>
      <p>${s.contributors} contributors</p>
      <p>${s.mean_messages_per_contributor} messages per contributor</p>
    </div>`,
    )
    .join("");
  const sections = Object.keys(report.contributor_distribution)
    .map((lang) => {
      const dist = renderBarChart(
        `contributor volume (${lang})`,
        report.contributor_distribution[lang] ?? [],
      );
      const demo = Object.entries(report.demographics)
        .map(([dim, byLang]) => {
          const entry = byLang[lang];
          if (entry === undefined) return "";
          return renderBarChart(
            `${DEMOGRAPHIC_TITLES[dim] ?? dim} (${lang}, ${entry.weight_basis.replace("_", " ")})`,
            entry.buckets,
          );
        })
        .join("");
      const methods = Object.entries(report.methods[lang] ?? {})
        .map(([m, n]) => `<tr><td>${escapeHtml(m)}</td><td>${n}</td></tr>`)
        .join("");
      const sources = Object.entries(report.sources[lang] ?? {})
        .map(
          ([s, row]) =>
            `<tr><td>${escapeHtml(s)}</td><td>${row.messages}</td><td>${row.contributors}</td></tr>`,
        )
        .join("");
      return `
    <section class="lang-stats">
      <h3>${escapeHtml(lang)}</h3>
      <div class="tables">
        <table class="kv"><caption>by method</caption>
          <thead><tr><th>method</th><th>messages</th></tr></thead><tbody>${methods}</tbody></table>
        <table class="kv"><caption>by source</caption>
          <thead><tr><th>source</th><th>messages</th><th>contributors</th></tr></thead>
          <tbody>${sources}</tbody></table>
      </div>
      ${dist}${demo}
    </section>`;
    })
    .join("");
  return `${head}
  <p class="summary-line">total messages: <span class="big">${report.summary.total_messages}</span></p>
  <div class="cards">${langCards}</div>
  ${sections}`;
}
