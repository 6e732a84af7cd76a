/** Deterministic SVG figure builder: fixed canvas, numeric formatting and
 * tick placement depend only on the data, so identical inputs produce
 * byte-identical images. */

export interface Extent {
  min: number;
  max: number;
}

export function extend(values: number[], ext?: Extent): Extent {
  let min = ext ? ext.min : Infinity;
  let max = ext ? ext.max : -Infinity;
  for (const v of values) {
    if (Number.isFinite(v)) {
      if (v < min) min = v;
      if (v > max) max = v;
    }
  }
  return { min, max };
}

function pad(ext: Extent): Extent {
  if (!Number.isFinite(ext.min) || !Number.isFinite(ext.max)) {
    return { min: 0, max: 1 };
  }
  const span = ext.max - ext.min;
  if (span === 0) {
    return { min: ext.min - 1, max: ext.max + 1 };
  }
  return { min: ext.min - 0.05 * span, max: ext.max + 0.05 * span };
}

export function fmt(x: number): string {
  if (!Number.isFinite(x)) return "0";
  return Number(x.toPrecision(6)).toString();
}

export function ticks(ext: Extent, target = 6): number[] {
  const span = ext.max - ext.min;
  if (span <= 0) return [ext.min];
  const raw = span / target;
  const mag = Math.pow(10, Math.floor(Math.log10(raw)));
  const norm = raw / mag;
  const step = (norm < 1.5 ? 1 : norm < 3.5 ? 2 : norm < 7.5 ? 5 : 10) * mag;
  const out: number[] = [];
  for (let t = Math.ceil(ext.min / step) * step; t <= ext.max + 1e-12 * span; t += step) {
    out.push(Math.abs(t) < 1e-12 * span ? 0 : t);
  }
  return out;
}

export const PALETTE = ["#1f6fb4", "#d95f02", "#2b9348", "#9d4edd", "#c9184a", "#5f6c7b"];

/** Two-ended diverging map (blue - white - red) for pressure fields. */
export function diverging(t: number): string {
  const c = Math.max(0, Math.min(1, t));
  const lerp = (a: number, b: number, s: number) => Math.round(a + (b - a) * s);
  let r: number, g: number, b: number;
  if (c < 0.5) {
    const s = c / 0.5;
    [r, g, b] = [lerp(33, 247, s), lerp(102, 247, s), lerp(172, 247, s)];
  } else {
    const s = (c - 0.5) / 0.5;
    [r, g, b] = [lerp(247, 178, s), lerp(247, 24, s), lerp(247, 43, s)];
  }
  return `rgb(${r},${g},${b})`;
}

export interface Series {
  x: number[];
  y: number[];
  label: string;
  dashed?: boolean;
  markers?: boolean;
}

export class Figure {
  width = 720;
  height = 480;
  marginLeft = 72;
  marginRight = 24;
  marginTop = 28;
  marginBottom = 56;
  body: string[] = [];
  private xExt: Extent = { min: Infinity, max: -Infinity };
  private yExt: Extent = { min: Infinity, max: -Infinity };
  private series: Series[] = [];
  private points: { x: number; y: number; color: string }[] = [];
  private colorbar?: { min: number; max: number; label: string };

  constructor(public xLabel: string, public yLabel: string, public title = "") {}

  addSeries(s: Series) {
    this.series.push(s);
    this.xExt = extend(s.x, this.xExt);
    this.yExt = extend(s.y, this.yExt);
  }

  addPoints(pts: { x: number; y: number; color: string }[]) {
    this.points.push(...pts);
    this.xExt = extend(pts.map((p) => p.x), this.xExt);
    this.yExt = extend(pts.map((p) => p.y), this.yExt);
  }

  setColorbar(min: number, max: number, label: string) {
    this.colorbar = { min, max, label };
    this.marginRight = 96;
  }

  /** Force equal x/y data-to-pixel scaling (particle fields). */
  equalAspect = false;

  render(): string {
    let xe = pad(this.xExt);
    let ye = pad(this.yExt);
    const w = this.width - this.marginLeft - this.marginRight;
    const h = this.height - this.marginTop - this.marginBottom;
    if (this.equalAspect) {
      const sx = w / (xe.max - xe.min);
      const sy = h / (ye.max - ye.min);
      const s = Math.min(sx, sy);
      const cx = 0.5 * (xe.min + xe.max);
      const cy = 0.5 * (ye.min + ye.max);
      xe = { min: cx - 0.5 * w / s, max: cx + 0.5 * w / s };
      ye = { min: cy - 0.5 * h / s, max: cy + 0.5 * h / s };
    }
    const X = (v: number) => this.marginLeft + ((v - xe.min) / (xe.max - xe.min)) * w;
    const Y = (v: number) => this.marginTop + h - ((v - ye.min) / (ye.max - ye.min)) * h;

    const out: string[] = [];
    out.push(
      `<svg xmlns="http://www.w3.org/2000/svg" width="${this.width}" height="${this.height}" viewBox="0 0 ${this.width} ${this.height}">`,
    );
    out.push(`<rect width="${this.width}" height="${this.height}" fill="white"/>`);
    if (this.title) {
      out.push(
        `<text x="${this.width / 2}" y="18" font-family="sans-serif" font-size="14" text-anchor="middle">${this.title}</text>`,
      );
    }
    // frame and ticks
    out.push(
      `<rect x="${this.marginLeft}" y="${this.marginTop}" width="${w}" height="${h}" fill="none" stroke="#333" stroke-width="1"/>`,
    );
    for (const t of ticks(xe)) {
      const px = X(t);
      out.push(`<line x1="${fmt(px)}" y1="${this.marginTop + h}" x2="${fmt(px)}" y2="${this.marginTop + h + 5}" stroke="#333"/>`);
      out.push(
        `<text x="${fmt(px)}" y="${this.marginTop + h + 20}" font-family="sans-serif" font-size="11" text-anchor="middle">${fmt(t)}</text>`,
      );
    }
    for (const t of ticks(ye)) {
      const py = Y(t);
      out.push(`<line x1="${this.marginLeft - 5}" y1="${fmt(py)}" x2="${this.marginLeft}" y2="${fmt(py)}" stroke="#333"/>`);
      out.push(
        `<text x="${this.marginLeft - 8}" y="${fmt(py + 4)}" font-family="sans-serif" font-size="11" text-anchor="end">${fmt(t)}</text>`,
      );
    }
    out.push(
      `<text x="${this.marginLeft + w / 2}" y="${this.height - 12}" font-family="sans-serif" font-size="13" text-anchor="middle">${this.xLabel}</text>`,
    );
    out.push(
      `<text x="16" y="${this.marginTop + h / 2}" font-family="sans-serif" font-size="13" text-anchor="middle" transform="rotate(-90 16 ${this.marginTop + h / 2})">${this.yLabel}</text>`,
    );

    // clip drawing to the frame
    out.push(`<clipPath id="frame"><rect x="${this.marginLeft}" y="${this.marginTop}" width="${w}" height="${h}"/></clipPath>`);
    out.push(`<g clip-path="url(#frame)">`);
    for (const p of this.points) {
      out.push(
        `<circle cx="${fmt(X(p.x))}" cy="${fmt(Y(p.y))}" r="2.2" fill="${p.color}"/>`,
      );
    }
    this.series.forEach((s, k) => {
      const color = PALETTE[k % PALETTE.length];
      const pts: string[] = [];
      for (let i = 0; i < s.x.length; i++) {
        if (Number.isFinite(s.x[i]) && Number.isFinite(s.y[i])) {
          pts.push(`${fmt(X(s.x[i]))},${fmt(Y(s.y[i]))}`);
        }
      }
      const dash = s.dashed ? ` stroke-dasharray="7 4"` : "";
      out.push(
        `<polyline points="${pts.join(" ")}" fill="none" stroke="${color}" stroke-width="1.6"${dash}/>`,
      );
      if (s.markers) {
        for (const p of pts) {
          const [px, py] = p.split(",");
          out.push(`<circle cx="${px}" cy="${py}" r="2.8" fill="${color}"/>`);
        }
      }
    });
    out.push(`</g>`);

    // legend
    this.series.forEach((s, k) => {
      const color = PALETTE[k % PALETTE.length];
      const ly = this.marginTop + 14 + 16 * k;
      const lx = this.marginLeft + 10;
      const dash = s.dashed ? ` stroke-dasharray="7 4"` : "";
      out.push(`<line x1="${lx}" y1="${ly}" x2="${lx + 26}" y2="${ly}" stroke="${color}" stroke-width="1.6"${dash}/>`);
      out.push(
        `<text x="${lx + 32}" y="${ly + 4}" font-family="sans-serif" font-size="12">${s.label}</text>`,
      );
    });

    if (this.colorbar) {
      const cbX = this.width - 72;
      const steps = 24;
      for (let i = 0; i < steps; i++) {
        const y0 = this.marginTop + (h * (steps - 1 - i)) / steps;
        out.push(
          `<rect x="${cbX}" y="${fmt(y0)}" width="14" height="${fmt(h / steps + 0.5)}" fill="${diverging((i + 0.5) / steps)}"/>`,
        );
      }
      out.push(`<rect x="${cbX}" y="${this.marginTop}" width="14" height="${h}" fill="none" stroke="#333"/>`);
      out.push(
        `<text x="${cbX + 18}" y="${this.marginTop + 10}" font-family="sans-serif" font-size="11">${fmt(this.colorbar.max)}</text>`,
      );
      out.push(
        `<text x="${cbX + 18}" y="${this.marginTop + h}" font-family="sans-serif" font-size="11">${fmt(this.colorbar.min)}</text>`,
      );
      out.push(
        `<text x="${cbX + 7}" y="${this.marginTop - 8}" font-family="sans-serif" font-size="11" text-anchor="middle">${this.colorbar.label}</text>`,
      );
    }
    out.push("</svg>");
    return out.join("\n") + "\n";
  }
}
