/**
 * Minimal SVG line-chart renderer: a figure is a grid of panels, each
 * with its own y-scale, optional horizontal truth line, and a shared
 * color per series across panels. No DOM, no canvas; plain strings.
 */

export interface Series {
  label: string;
  color: string;
  x: number[];
  y: number[];
}

export interface Panel {
  title: string;
  series: Series[];
  /** Horizontal reference drawn dashed in green. */
  truth?: number;
  /** Restrict the x-axis (and the drawn points) to [lo, hi]. */
  xRange?: [number, number];
  logY?: boolean;
}

export interface FigureOptions {
  title: string;
  columns?: number;
  panelWidth?: number;
  panelHeight?: number;
}

const TRUTH_COLOR = "#2ca02c";

function esc(s: string): string {
  return s.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");
}

function niceTicks(min: number, max: number, count: number): number[] {
  const range = max - min || 1;
  const rough = range / count;
  const mag = Math.pow(10, Math.floor(Math.log10(rough)));
  const step = [1, 2, 5, 10].map((m) => m * mag).find((n) => n >= rough) ?? rough;
  const start = Math.ceil(min / step) * step;
  const ticks: number[] = [];
  for (let v = start; v <= max + step * 0.01; v += step) ticks.push(v);
  return ticks;
}

function fmtTick(v: number): string {
  if (v === 0) return "0";
  const abs = Math.abs(v);
  if (abs >= 10000 || abs < 0.01) return v.toExponential(0);
  return Number(v.toFixed(3)).toString();
}

interface Window {
  x: number[];
  y: number[];
}

function windowed(series: Series, xRange?: [number, number]): Window {
  if (!xRange) return { x: series.x, y: series.y };
  const x: number[] = [];
  const y: number[] = [];
  for (let i = 0; i < series.x.length; i++) {
    if (series.x[i] >= xRange[0] && series.x[i] <= xRange[1]) {
      x.push(series.x[i]);
      y.push(series.y[i]);
    }
  }
  return { x, y };
}

function renderPanel(
  panel: Panel,
  x0: number,
  y0: number,
  width: number,
  height: number
): string {
  const ml = 46;
  const mr = 8;
  const mt = 18;
  const mb = 28;
  const pw = width - ml - mr;
  const ph = height - mt - mb;
  const data = panel.series.map((s) => windowed(s, panel.xRange));

  const xs = data.flatMap((w) => w.x);
  const xMin = panel.xRange ? panel.xRange[0] : Math.min(...xs);
  const xMax = panel.xRange ? panel.xRange[1] : Math.max(...xs);
  const ys = data.flatMap((w) => w.y);
  if (panel.truth !== undefined) ys.push(panel.truth);
  let yMin = Math.min(...ys);
  let yMax = Math.max(...ys);
  const pad = (yMax - yMin || Math.abs(yMax) || 1) * 0.06;
  yMin -= pad;
  yMax += pad;

  const xOf = (v: number) => x0 + ml + ((v - xMin) / (xMax - xMin || 1)) * pw;
  const yOf = (v: number) => y0 + mt + ph - ((v - yMin) / (yMax - yMin || 1)) * ph;

  let s = "";
  s += `<text x="${x0 + ml}" y="${y0 + 12}" font-size="10" font-weight="600" fill="#222">${esc(panel.title)}</text>\n`;
  s += `<rect x="${x0 + ml}" y="${y0 + mt}" width="${pw}" height="${ph}" fill="none" stroke="#999" stroke-width="0.6"/>\n`;

  for (const v of niceTicks(yMin, yMax, 4)) {
    const y = yOf(v);
    if (y < y0 + mt - 0.5 || y > y0 + mt + ph + 0.5) continue;
    s += `<line x1="${x0 + ml}" y1="${y.toFixed(1)}" x2="${x0 + ml + pw}" y2="${y.toFixed(1)}" stroke="#eee" stroke-width="0.5"/>\n`;
    s += `<text x="${x0 + ml - 4}" y="${(y + 2.6).toFixed(1)}" font-size="7" fill="#555" text-anchor="end">${fmtTick(v)}</text>\n`;
  }
  for (const v of niceTicks(xMin, xMax, 5)) {
    const x = xOf(v);
    if (x < x0 + ml - 0.5 || x > x0 + ml + pw + 0.5) continue;
    s += `<text x="${x.toFixed(1)}" y="${y0 + mt + ph + 12}" font-size="7" fill="#555" text-anchor="middle">${fmtTick(v)}</text>\n`;
  }
  s += `<text x="${x0 + ml + pw / 2}" y="${y0 + mt + ph + 24}" font-size="8" fill="#555" text-anchor="middle">iteration</text>\n`;

  if (panel.truth !== undefined) {
    const y = yOf(panel.truth).toFixed(1);
    s += `<line x1="${x0 + ml}" y1="${y}" x2="${x0 + ml + pw}" y2="${y}" stroke="${TRUTH_COLOR}" stroke-width="1.1" stroke-dasharray="5,3" class="truth-line"/>\n`;
  }

  panel.series.forEach((series, idx) => {
    const w = data[idx];
    if (w.x.length === 0) return;
    const pts = w.x
      .map((xv, i) => `${xOf(xv).toFixed(1)},${yOf(w.y[i]).toFixed(1)}`)
      .join(" ");
    s += `<polyline points="${pts}" fill="none" stroke="${series.color}" stroke-width="1" opacity="0.9"/>\n`;
  });
  return s;
}

export function renderFigure(panels: Panel[], opts: FigureOptions): string {
  const columns = opts.columns ?? Math.min(2, panels.length);
  const rows = Math.ceil(panels.length / columns);
  const pw = opts.panelWidth ?? 330;
  const ph = opts.panelHeight ?? 190;
  const legendHeight = 16;
  const headerHeight = 22 + legendHeight;
  const width = columns * pw + 16;
  const height = headerHeight + rows * ph + 8;

  let s = `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${height}" viewBox="0 0 ${width} ${height}" font-family="Helvetica, Arial, sans-serif">\n`;
  s += `<rect width="${width}" height="${height}" fill="#fff"/>\n`;
  s += `<text x="8" y="15" font-size="12" font-weight="700" fill="#111">${esc(opts.title)}</text>\n`;

  // shared legend: series labels in panel order, truth marker when used
  const seen = new Map<string, string>();
  for (const panel of panels) {
    for (const series of panel.series) {
      if (!seen.has(series.label)) seen.set(series.label, series.color);
    }
  }
  let lx = 8;
  const ly = 15 + legendHeight;
  for (const [label, color] of seen) {
    s += `<line x1="${lx}" y1="${ly - 3}" x2="${lx + 16}" y2="${ly - 3}" stroke="${color}" stroke-width="2"/>\n`;
    s += `<text x="${lx + 20}" y="${ly}" font-size="8" fill="#333">${esc(label)}</text>\n`;
    lx += 26 + label.length * 4.6;
  }
  if (panels.some((p) => p.truth !== undefined)) {
    s += `<line x1="${lx}" y1="${ly - 3}" x2="${lx + 16}" y2="${ly - 3}" stroke="${TRUTH_COLOR}" stroke-width="2" stroke-dasharray="5,3"/>\n`;
    s += `<text x="${lx + 20}" y="${ly}" font-size="8" fill="#333">truth</text>\n`;
  }

  panels.forEach((panel, i) => {
    const col = i % columns;
    const row = Math.floor(i / columns);
    s += renderPanel(panel, 8 + col * pw, headerHeight + row * ph, pw - 8, ph - 6);
  });
  s += `</svg>\n`;
  return s;
}
