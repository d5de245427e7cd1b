// DOM wiring for the analyst console. All state lives in the stores; this
// file only renders and forwards events.

import { ApiClient } from "./api.js";
import { DashboardStore } from "./dashboard.js";
import { formatMetric, formatPercent, sparklineData, topVarianceIndices } from "./format.js";
import { QueueStore } from "./queue.js";
import { ABSTAIN, ASSIGNABLE_CLASSES } from "./types.js";

const params = new URLSearchParams(window.location.search);
const baseUrl = params.get("service") ?? "http://127.0.0.1:8137";
const analyst = params.get("analyst") ?? "analyst";

const api = new ApiClient(baseUrl);
const queue = new QueueStore(api, analyst);
const dashboard = new DashboardStore(api);

function el(id: string): HTMLElement {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing #${id}`);
  return node;
}

function sparklineSvg(values: number[]): string {
  const width = 8;
  const bars = values
    .map((v, i) => {
      const h = Math.max(1, Math.round(v * 18));
      return `<rect x="${i * width}" y="${18 - h}" width="${width - 2}" height="${h}"></rect>`;
    })
    .join("");
  return `<svg class="spark" width="${values.length * width}" height="18">${bars}</svg>`;
}

function renderQueue(): void {
  const tbody = el("queue-body");
  const rows = queue.rows;
  el("queue-banner").textContent = queue.stale
    ? `stale data — last fetch failed: ${queue.lastError} (retrying)`
    : "";
  if (rows.length === 0) {
    tbody.innerHTML = `<tr><td colspan="5" class="empty">queue is empty — no unknown-pool samples await review</td></tr>`;
    return;
  }
  const matrix = rows.map((r) => r.query.features);
  const indices = topVarianceIndices(matrix);
  const sparks = sparklineData(matrix, indices);
  tbody.innerHTML = rows
    .map((row, i) => {
      const top = row.query.top_classes
        .map((t) => `${t.label} ${formatPercent(t.p)}`)
        .join(", ");
      const options = [`<option value="">choose…</option>`]
        .concat(
          ASSIGNABLE_CLASSES.map(
            (c) =>
              `<option value="${c}" ${row.choice === c ? "selected" : ""}>${c}</option>`,
          ),
          [`<option value="${ABSTAIN}" ${row.choice === ABSTAIN ? "selected" : ""}>abstain</option>`],
        )
        .join("");
      const stateNote =
        row.state === "in-flight"
          ? "submitting…"
          : row.state === "rejected"
            ? `rejected: ${row.rejectionReason}`
            : "";
      return `<tr data-id="${row.query.id}" class="${row.state}">
        <td>${row.query.id}</td>
        <td>${row.query.uncertainty.toFixed(3)}</td>
        <td>${top}</td>
        <td>${sparklineSvg(sparks[i])}</td>
        <td><select ${row.state === "in-flight" ? "disabled" : ""}>${options}</select>
            <span class="note">${stateNote}</span></td>
      </tr>`;
    })
    .join("");
  tbody.querySelectorAll("select").forEach((select) => {
    select.addEventListener("change", (ev) => {
      const target = ev.target as HTMLSelectElement;
      const id = (target.closest("tr") as HTMLElement).dataset.id as string;
      if (target.value) queue.selectLabel(id, target.value as never);
      renderControls();
    });
  });
}

function renderControls(): void {
  (el("submit-btn") as HTMLButtonElement).disabled = queue.submittable().length === 0;
  (el("retrain-btn") as HTMLButtonElement).disabled = !dashboard.canRetrain;
}

function renderDashboard(): void {
  const s = dashboard.status;
  if (!s) return;
  el("version").textContent = `model v${s.model_version}`;
  el("pool-counts").textContent =
    `unknown ${s.pools.unknown} · queued ${s.pools.queued} · labeled ${s.pools.labeled}`;
  el("pending-labels").textContent = String(s.labels_since_retrain);
  if (dashboard.versionBanner !== null) {
    el("version-banner").textContent = `model updated to v${dashboard.versionBanner}`;
  }
  const retrain = dashboard.retrain;
  el("retrain-state").textContent =
    retrain.kind === "running"
      ? "retraining…"
      : retrain.kind === "done"
        ? `published v${retrain.version}`
        : retrain.kind === "failed"
          ? `retrain failed: ${retrain.detail} — previous version stays live`
          : "";
  const historyBody = el("history-body");
  historyBody.innerHTML = dashboard.history
    .slice()
    .reverse()
    .map((h) => {
      const m = h.metrics as Record<string, unknown>;
      return `<tr><td>v${h.version}</td><td>${h.classes.length}</td>
        <td>${formatMetric(m["macro_f1"])}</td>
        <td>${formatMetric(m["macro_accuracy"])}</td>
        <td>${h.unknown_remaining}</td></tr>`;
    })
    .join("");
}

async function tick(): Promise<void> {
  await Promise.all([dashboard.pollOnce(), queue.refresh()]);
  renderQueue();
  renderDashboard();
  renderControls();
}

el("submit-btn").addEventListener("click", async () => {
  renderControls();
  try {
    await queue.submit();
  } finally {
    await tick();
  }
});

el("retrain-btn").addEventListener("click", async () => {
  renderControls();
  await dashboard.triggerRetrain();
  await tick();
});

void tick();
setInterval(() => void tick(), dashboard.pollIntervalMs);
