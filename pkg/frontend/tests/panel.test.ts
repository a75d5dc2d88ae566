import { describe, expect, it } from "vitest";

import { neighborIdsFromHtml, renderPanelHtml } from "../src/panel.js";
import type { CveDetail, Neighbor } from "../src/types.js";

const DETAIL: CveDetail = {
  id: "CVE-2020-1234",
  published: "2020-03-04",
  year: 2020,
  day_of_year: 64,
  description: "Buffer overflow in Foo <1.2> allows remote attackers.",
  cwes: ["CWE-787"],
  cpes: [["foo", "bar"]],
  labels: { "cvss_v3.C": "HIGH", "cvss_v3.A": "none" },
  clusters: { pca_kmeans: 3, pca_optics: -1 },
  x: 0.5,
  y: -1.5,
};

const NEIGHBORS: Neighbor[] = [
  { id: "CVE-2019-0001", distance: 0.1234567 },
  { id: "CVE-2018-0002", distance: 0.25 },
];

describe("detail panel", () => {
  it("shows the CVE id, description, and labels", () => {
    const html = renderPanelHtml(DETAIL, NEIGHBORS);
    expect(html).toContain("CVE-2020-1234");
    expect(html).toContain("cvss_v3.C");
    expect(html).not.toContain("cvss_v3.A</td>");  // "none" labels hidden
    expect(html).toContain("noise");               // NOISE cluster id
  });

  it("escapes markup in description text", () => {
    const html = renderPanelHtml(DETAIL, []);
    expect(html).toContain("&lt;1.2&gt;");
    expect(html).not.toContain("<1.2>");
  });

  it("renders clickable neighbor entries in order", () => {
    const html = renderPanelHtml(DETAIL, NEIGHBORS);
    expect(neighborIdsFromHtml(html)).toEqual(
      ["CVE-2019-0001", "CVE-2018-0002"]);
    expect(html).toContain("0.1235");
  });
});
