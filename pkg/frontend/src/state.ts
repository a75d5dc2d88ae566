/** View state with a version counter for stale-response discarding.
 *
 * Every mutation bumps the version; an async fetch started under version
 * v applies its result only if the state still reports v as current.
 */

import type { ViewState } from "./types.js";

export class StateStore {
  private state: ViewState;
  private listeners: ((state: ViewState) => void)[] = [];

  constructor(overlay = "cluster", method = "") {
    this.state = { overlay, year: "all", method, selectedId: null,
                   neighborK: 5, version: 0 };
  }

  get current(): ViewState {
    return { ...this.state };
  }

  isCurrent(version: number): boolean {
    return this.state.version === version;
  }

  onChange(listener: (state: ViewState) => void): void {
    this.listeners.push(listener);
  }

  private bump(patch: Partial<ViewState>): ViewState {
    this.state = { ...this.state, ...patch,
                   version: this.state.version + 1 };
    for (const listener of this.listeners) listener(this.current);
    return this.current;
  }

  setOverlay(overlay: string): ViewState {
    return this.bump({ overlay });
  }

  setYear(year: number | "all"): ViewState {
    // the day-of-year overlay only makes sense inside a single year
    if (year === "all" && this.state.overlay === "day") {
      return this.bump({ year, overlay: "cluster" });
    }
    return this.bump({ year });
  }

  setMethod(method: string): ViewState {
    return this.bump({ method });
  }

  select(id: string | null): ViewState {
    return this.bump({ selectedId: id });
  }

  setNeighborK(neighborK: number): ViewState {
    return this.bump({ neighborK });
  }

  /** Overlays offered for the current year filter. */
  availableOverlays(all: string[]): string[] {
    if (this.state.year === "all") {
      return all.filter((name) => name !== "day");
    }
    return all;
  }
}
