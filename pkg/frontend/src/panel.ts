/** Detail panel content for a selected vulnerability.
 *
 * Pure HTML-string builder: the caller owns the container element and
 * wires the neighbor-click delegation (clicking a neighbor re-centers the
 * selection on it).
 */

import type { CveDetail, Neighbor } from "./types.js";

function escapeHtml(raw: string): string {
  return raw.replace(/&/g, "&amp;").replace(/</g, "&lt;")
    .replace(/>/g, "&gt;").replace(/"/g, "&quot;");
}

export function renderPanelHtml(detail: CveDetail,
                                neighbors: Neighbor[]): string {
  const labels = Object.entries(detail.labels)
    .filter(([, value]) => value !== "none")
    .map(([name, value]) =>
      `<tr><td>${escapeHtml(name)}</td><td>${escapeHtml(value)}</td></tr>`)
    .join("");
  const clusters = Object.entries(detail.clusters)
    .map(([method, id]) =>
      `<tr><td>${escapeHtml(method)}</td><td>${id < 0 ? "noise" : id}</td></tr>`)
    .join("");
  const neighborItems = neighbors.map((n) =>
    `<li><a href="#" class="neighbor" data-id="${escapeHtml(n.id)}">` +
    `${escapeHtml(n.id)}</a> <span class="dist">` +
    `${n.distance.toFixed(4)}</span></li>`).join("");
  return `
<h2>${escapeHtml(detail.id)}</h2>
<p class="published">published ${escapeHtml(detail.published)}
   (day ${detail.day_of_year})</p>
<p class="description">${escapeHtml(detail.description)}</p>
<p class="cwes">${detail.cwes.map(escapeHtml).join(", ") || "no CWE"}</p>
<h3>Labels</h3>
<table>${labels || "<tr><td>none</td></tr>"}</table>
<h3>Clusters</h3>
<table>${clusters}</table>
<h3>Nearest neighbors</h3>
<ol class="neighbors">${neighborItems}</ol>`;
}

/** Ids of the neighbor links inside a rendered panel, in display order. */
export function neighborIdsFromHtml(html: string): string[] {
  const out: string[] = [];
  const pattern = /data-id="([^"]+)"/g;
  let match: RegExpExecArray | null;
  while ((match = pattern.exec(html)) !== null) {
    out.push(match[1]);
  }
  return out;
}
