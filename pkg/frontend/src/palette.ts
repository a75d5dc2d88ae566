/** Fixed, documented colors so screenshots are comparable across runs.
 *
 * Missing labels ("none") render white. CVSS impact overlays use the
 * black/orange/red ramp for no/low/high impact; every other overlay gets
 * a categorical color keyed by the value's position in the sorted value
 * set. Values outside the palette fall back to gray with a console
 * diagnostic.
 */

export const NONE_COLOR = "#ffffff";
export const FALLBACK_COLOR = "#9e9e9e";

export const CATEGORICAL = [
  "#4e79a7", "#f28e2b", "#e15759", "#76b7b2", "#59a14f",
  "#edc948", "#b07aa1", "#ff9da7", "#9c755f", "#bab0ac",
  "#1f77b4", "#aec7e8", "#2ca02c", "#98df8a", "#d62728",
  "#ff9896", "#9467bd", "#c5b0d5", "#8c564b", "#c49c94",
];

const RISK_RAMP: Record<string, string> = {
  NONE: "#000000",
  LOW: "#ff8c00",
  PARTIAL: "#ff8c00",
  HIGH: "#d50000",
  COMPLETE: "#d50000",
};

const RISK_OVERLAY = /^cvss_v[23]\.(C|I|A)$/;

export interface ColorScale {
  color(value: string): string;
  legend(): [string, string][];
}

export function isRiskOverlay(overlay: string): boolean {
  return RISK_OVERLAY.test(overlay);
}

export function makeColorScale(overlay: string, values: string[]): ColorScale {
  const domain = [...new Set(values.filter((v) => v !== "none"))].sort();
  const lookup = new Map<string, string>();
  if (isRiskOverlay(overlay)) {
    for (const value of domain) {
      if (value in RISK_RAMP) lookup.set(value, RISK_RAMP[value]);
    }
  } else {
    domain.forEach((value, index) => {
      lookup.set(value, CATEGORICAL[index % CATEGORICAL.length]);
    });
  }
  const warned = new Set<string>();
  return {
    color(value: string): string {
      if (value === "none") return NONE_COLOR;
      const hit = lookup.get(value);
      if (hit !== undefined) return hit;
      if (!warned.has(value)) {
        warned.add(value);
        console.warn(`overlay ${overlay}: value ${value} outside palette`);
      }
      return FALLBACK_COLOR;
    },
    legend(): [string, string][] {
      return [...lookup.entries()];
    },
  };
}
