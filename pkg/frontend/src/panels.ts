/** Control panel (Animation / Location / View / Help tabs), the focus data
 * panel, and the pointer-anchored hover box. Pure DOM; all numbers displayed
 * come from API payloads untouched. */

import { FACTOR_MAX, FACTOR_MIN, SPEED_STEPS, VIEW_PRESETS, type UiState } from "./state";
import type { PickPayload, RegionInfo, SeriesPayload } from "./types";

const ALL_VARIABLES = ["confirmed", "deaths", "recovered", "active", "vaccinations"];
const ALL_RATES = ["incidence", "mortality", "recovery"];

export interface PanelCallbacks {
  onStateChange(mutate: (state: UiState) => void): void;
  onPlay(): void;
  onPause(): void;
  onResume(): void;
  onStop(): void;
  onStepForward(): void;
  onStepBackward(): void;
  onLeftHandleDrag(day: number): void;
  onRightHandleDrag(day: number): void;
  onFocusPicked(regionId: string | null): void;
  onBaselinePicked(regionId: string | null): void;
}

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  attrs: Record<string, string> = {},
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  for (const [key, value] of Object.entries(attrs)) node.setAttribute(key, value);
  if (text !== undefined) node.textContent = text;
  return node;
}

function labeled(label: string, input: HTMLElement): HTMLElement {
  const wrap = el("label", { class: "field" });
  wrap.append(el("span", {}, label), input);
  return wrap;
}

export class ControlPanel {
  readonly root: HTMLElement;
  private readonly tabs = new Map<string, HTMLElement>();
  private readonly dateLabel: HTMLElement;
  private readonly statusLabel: HTMLElement;
  private readonly noticeLabel: HTMLElement;
  private leftHandle!: HTMLInputElement;
  private rightHandle!: HTMLInputElement;
  private windowInput!: HTMLInputElement;
  private maximumCheckbox!: HTMLInputElement;
  private focusSelect!: HTMLSelectElement;
  private baselineSelect!: HTMLSelectElement;
  private rangeLabel!: HTMLElement;

  constructor(
    container: HTMLElement,
    private state: UiState,
    private nDays: number,
    private readonly callbacks: PanelCallbacks,
  ) {
    this.root = el("div", { class: "control-panel" });
    const tabBar = el("div", { class: "tab-bar" });
    const tabBodies = el("div", { class: "tab-bodies" });
    for (const name of ["Animation", "Location", "View", "Help"]) {
      const button = el("button", { type: "button" }, name);
      button.addEventListener("click", () => this.showTab(name));
      tabBar.appendChild(button);
      const body = el("div", { class: "tab-body", "data-tab": name });
      this.tabs.set(name, body);
      tabBodies.appendChild(body);
    }
    this.root.append(tabBar, tabBodies);
    this.dateLabel = el("div", { class: "date-label" }, "—");
    this.statusLabel = el("div", { class: "status-label" }, "stopped");
    this.noticeLabel = el("div", { class: "notice-label" });
    this.root.append(this.dateLabel, this.statusLabel, this.noticeLabel);
    container.appendChild(this.root);

    this.buildAnimationTab();
    this.buildLocationTab();
    this.buildViewTab();
    this.buildHelpTab();
    this.showTab("Animation");
  }

  private change(mutate: (state: UiState) => void): void {
    this.callbacks.onStateChange(mutate);
  }

  updateState(state: UiState, nDays: number): void {
    this.state = state;
    this.nDays = nDays;
    this.leftHandle.max = String(nDays - 1);
    this.rightHandle.max = String(nDays - 1);
    this.leftHandle.value = String(state.startDay);
    this.rightHandle.value = String(state.endDay);
    this.windowInput.value = String(state.windowSize);
    this.windowInput.disabled = state.maximumWindow;
    this.maximumCheckbox.checked = state.maximumWindow;
    this.rangeLabel.textContent = `days ${state.startDay}–${state.endDay}`;
  }

  setCurrentDate(date: string | null): void {
    this.dateLabel.textContent = date ?? "—";
  }

  setPlayback(status: string): void {
    this.statusLabel.textContent = status;
  }

  setNotice(message: string | null): void {
    this.noticeLabel.textContent = message ?? "";
    this.noticeLabel.classList.toggle("visible", message !== null);
  }

  setRegions(regions: RegionInfo[]): void {
    for (const select of [this.focusSelect, this.baselineSelect]) {
      select.replaceChildren(el("option", { value: "" }, "(none)"));
      for (const region of regions) {
        select.appendChild(el("option", { value: region.id }, region.display_name));
      }
    }
    this.focusSelect.value = this.state.focus ?? "";
    this.baselineSelect.value = this.state.baseline ?? "";
  }

  setFocusSelection(focus: string | null, baseline: string | null): void {
    this.focusSelect.value = focus ?? "";
    this.baselineSelect.value = baseline ?? "";
  }

  private showTab(name: string): void {
    for (const [tab, body] of this.tabs) {
      body.classList.toggle("active", tab === name);
    }
  }

  private buildAnimationTab(): void {
    const body = this.tabs.get("Animation")!;

    const modeRow = el("div", { class: "row" });
    for (const mode of ["total", "window"] as const) {
      const radio = el("input", { type: "radio", name: "mode", value: mode });
      radio.checked = this.state.mode === mode;
      radio.addEventListener("change", () => this.change((s) => { s.mode = mode; }));
      modeRow.append(labeled(mode === "total" ? "Total" : "Window", radio));
    }
    body.appendChild(modeRow);

    // Dual-handle time slider: left box = window start, right box = end.
    const slider = el("div", { class: "time-slider" });
    this.leftHandle = el("input", {
      type: "range", min: "0", max: String(this.nDays - 1), class: "handle left",
    });
    this.rightHandle = el("input", {
      type: "range", min: "0", max: String(this.nDays - 1), class: "handle right",
    });
    this.leftHandle.value = String(this.state.startDay);
    this.rightHandle.value = String(this.state.endDay);
    this.leftHandle.addEventListener("input", () => {
      this.callbacks.onLeftHandleDrag(Number(this.leftHandle.value));
    });
    this.rightHandle.addEventListener("input", () => {
      this.callbacks.onRightHandleDrag(Number(this.rightHandle.value));
    });
    this.rangeLabel = el("span", { class: "range-label" },
                         `days ${this.state.startDay}–${this.state.endDay}`);
    slider.append(this.leftHandle, this.rightHandle, this.rangeLabel);
    body.appendChild(slider);

    this.windowInput = el("input", {
      type: "number", min: "1", value: String(this.state.windowSize),
    });
    this.windowInput.addEventListener("change", () => {
      const days = Number(this.windowInput.value);
      this.change((s) => { s.windowSize = days; });
    });
    this.maximumCheckbox = el("input", { type: "checkbox" });
    this.maximumCheckbox.checked = this.state.maximumWindow;
    this.maximumCheckbox.addEventListener("change", () => {
      const checked = this.maximumCheckbox.checked;
      this.change((s) => { s.maximumWindow = checked; });
    });
    const windowRow = el("div", { class: "row" });
    windowRow.append(labeled("Window Size", this.windowInput),
                     labeled("Maximum", this.maximumCheckbox));
    body.appendChild(windowRow);

    const aggRow = el("div", { class: "row" });
    for (const [agg, label] of [["cumulative", "Cumulative"],
                                ["daily_avg", "Daily average"]] as const) {
      const radio = el("input", { type: "radio", name: "agg", value: agg });
      radio.checked = this.state.aggregation === agg;
      radio.addEventListener("change", () => this.change((s) => { s.aggregation = agg; }));
      aggRow.append(labeled(label, radio));
    }
    body.appendChild(aggRow);

    const controls = el("div", { class: "row playback" });
    const buttons: Array<[string, () => void]> = [
      ["<", this.callbacks.onStepBackward],
      ["Start", this.callbacks.onPlay],
      ["Pause", this.callbacks.onPause],
      ["Resume", this.callbacks.onResume],
      ["Stop", this.callbacks.onStop],
      [">", this.callbacks.onStepForward],
    ];
    for (const [label, handler] of buttons) {
      const button = el("button", { type: "button" }, label);
      button.addEventListener("click", handler);
      controls.appendChild(button);
    }
    body.appendChild(controls);

    const speed = el("input", {
      type: "range", min: "0", max: String(SPEED_STEPS.length - 1), step: "1",
      value: String(SPEED_STEPS.indexOf(this.state.speed as 1)),
    });
    speed.addEventListener("input", () => {
      const step = SPEED_STEPS[Number(speed.value)] ?? 1;
      this.change((s) => { s.speed = step; });
    });
    body.appendChild(labeled("Speed (dates/s)", speed));
  }

  private buildLocationTab(): void {
    const body = this.tabs.get("Location")!;
    this.focusSelect = el("select");
    this.focusSelect.addEventListener("change", () => {
      this.callbacks.onFocusPicked(this.focusSelect.value || null);
    });
    // Baseline can only be set here, never by clicking the map.
    this.baselineSelect = el("select");
    this.baselineSelect.addEventListener("change", () => {
      this.callbacks.onBaselinePicked(this.baselineSelect.value || null);
    });
    body.append(
      labeled("Animation Focus", this.focusSelect),
      labeled("Baseline Location", this.baselineSelect),
      el("p", { class: "hint" },
         "Click the map to set the focus; the baseline comes from this menu only."),
    );
  }

  private buildViewTab(): void {
    const body = this.tabs.get("View")!;

    const presets = el("div", { class: "row" });
    for (const [name, preset] of Object.entries(VIEW_PRESETS)) {
      const button = el("button", { type: "button" },
                        name === "default" ? "Default" : "Rate");
      button.addEventListener("click", () => this.change((s) => {
        s.variables = [...preset.variables];
        s.rates = [...preset.rates];
      }));
      presets.appendChild(button);
    }
    body.appendChild(presets);

    const series = el("div", { class: "series-checks" });
    const addCheck = (name: string, kind: "variables" | "rates") => {
      const check = el("input", { type: "checkbox", value: name });
      check.checked = this.state[kind].includes(name);
      check.addEventListener("change", () => this.change((s) => {
        const selected = new Set(s[kind]);
        if (check.checked) selected.add(name);
        else selected.delete(name);
        const order = kind === "variables" ? ALL_VARIABLES : ALL_RATES;
        s[kind] = order.filter((n) => selected.has(n));
      }));
      series.appendChild(labeled(name, check));
    };
    for (const name of ALL_VARIABLES) addCheck(name, "variables");
    for (const name of ALL_RATES) addCheck(name, "rates");
    body.appendChild(series);

    const methodRow = el("div", { class: "row" });
    for (const method of ["linear", "log", "flannery"] as const) {
      const radio = el("input", { type: "radio", name: "scale", value: method });
      radio.checked = this.state.scaleMethod === method;
      radio.addEventListener("change", () => this.change((s) => { s.scaleMethod = method; }));
      methodRow.append(labeled(method, radio));
    }
    body.appendChild(methodRow);

    const factors = el("div", { class: "factor-sliders" });
    for (const name of [...ALL_VARIABLES, ...ALL_RATES]) {
      const slider = el("input", {
        type: "range", min: String(FACTOR_MIN), max: String(FACTOR_MAX),
        step: "0.1", value: String(this.state.factors[name] ?? 1.0),
      });
      slider.addEventListener("input", () => {
        const value = Number(slider.value);
        this.change((s) => { s.factors = { ...s.factors, [name]: value }; });
      });
      factors.appendChild(labeled(`${name} ×`, slider));
    }
    body.appendChild(factors);

    const clusterSlider = el("input", {
      type: "range", min: "0", max: "200", step: "10",
      value: String(this.state.clusterPx),
    });
    clusterSlider.addEventListener("input", () => {
      const value = Number(clusterSlider.value);
      this.change((s) => { s.clusterPx = value; });
    });
    body.appendChild(labeled("Aggregation radius (px)", clusterSlider));
  }

  private buildHelpTab(): void {
    const body = this.tabs.get("Help")!;
    body.appendChild(el("div", { class: "help" }));
    body.querySelector(".help")!.innerHTML = `
      <p>Each map symbol is a set of concentric hollow circles; radius encodes
      magnitude. Dashed circles are variable counts, solid circles are rates,
      and a rate shares its variable's color.</p>
      <p><b>Animation tab</b>: pick Total mode (growing totals) or Window mode
      (fixed-width trailing window, "Maximum" spans the whole range). Start,
      pause, resume, or stop playback; step one day with &lt; and &gt;.
      Dragging the left slider box replays with the window width held fixed.</p>
      <p><b>Location tab</b>: choose the Animation Focus (or click the map) and
      an optional Baseline for side-by-side values below the map.</p>
      <p><b>View tab</b>: select variables/rates, presets, radius scaling law,
      per-series size factors (0.1×–8×), and marker aggregation radius.</p>
      <p>Hover anywhere to inspect the nearest region with nonzero values.</p>`;
  }
}

export class HoverBox {
  private readonly node: HTMLElement;

  constructor(container: HTMLElement) {
    this.node = el("div", { class: "hover-box" });
    container.appendChild(this.node);
  }

  /** Anchored on the pointer and follows it. */
  moveTo(x: number, y: number): void {
    this.node.style.left = `${x + 14}px`;
    this.node.style.top = `${y + 14}px`;
  }

  show(pick: PickPayload): void {
    const rows: string[] = [`<b>${escapeHtml(pick.display_name ?? pick.region ?? "")}</b>`];
    for (const [name, value] of Object.entries(pick.values ?? {})) {
      rows.push(`${escapeHtml(name)}: ${formatNumber(value)}`);
    }
    for (const [name, value] of Object.entries(pick.rates ?? {})) {
      rows.push(`${escapeHtml(name)}: ${formatNumber(value)}`);
    }
    this.node.innerHTML = rows.join("<br>");
    this.node.classList.add("visible");
  }

  hide(): void {
    this.node.classList.remove("visible");
  }
}

export class FocusDataPanel {
  private readonly node: HTMLElement;

  constructor(container: HTMLElement) {
    this.node = el("div", { class: "focus-panel" });
    container.appendChild(this.node);
  }

  clear(): void {
    this.node.replaceChildren();
    this.node.classList.remove("visible");
  }

  /** Side-by-side values for focus and baseline at one report date. */
  showRow(payload: SeriesPayload, date: string): void {
    const row = payload.rows.find((r) => r.date === date) ??
      payload.rows[payload.rows.length - 1];
    if (!row) {
      this.clear();
      return;
    }
    const table = el("table");
    const header = el("tr");
    header.append(el("th", {}, `Animation Focus Data — ${row.date}`),
                  el("th", {}, payload.focus));
    if (payload.baseline) header.append(el("th", {}, payload.baseline));
    table.appendChild(header);
    const cells = (kind: "variables" | "rates") => {
      for (const name of Object.keys(row.focus[kind])) {
        const tr = el("tr");
        tr.appendChild(el("td", {}, name));
        tr.appendChild(el("td", {}, formatCell(row.focus[kind][name])));
        if (row.baseline) {
          tr.appendChild(el("td", {}, formatCell(row.baseline[kind][name])));
        }
        table.appendChild(tr);
      }
    };
    cells("variables");
    cells("rates");
    this.node.replaceChildren(table);
    this.node.classList.add("visible");
  }
}

function formatNumber(value: number): string {
  if (Number.isInteger(value)) return value.toLocaleString("en-US");
  return value.toPrecision(4);
}

function formatCell(value: number | null): string {
  return value === null ? "—" : formatNumber(value);
}

function escapeHtml(text: string): string {
  return text.replace(/[&<>"']/g, (c) =>
    ({ "&": "&amp;", "<": "&lt;", ">": "&gt;", '"': "&quot;", "'": "&#39;" }[c]!));
}
