/**
 * Hand-rolled SVG assembly.
 *
 * Every coordinate is formatted with a fixed number of decimals and every
 * element is emitted in a fixed order, so a figure rendered from the same
 * inputs is byte-identical on any platform; goldens can be diffed as text.
 */

/** Pixel coordinate: two decimals, always. */
export function px(v: number): string {
  return v.toFixed(2);
}

/** Tick label: three significant digits, trailing zeros trimmed. */
export function tickLabel(v: number): string {
  if (v === 0) return "0";
  return String(parseFloat(v.toPrecision(3)));
}

export interface Scale {
  (v: number): number;
}

export function linearScale(d0: number, d1: number, r0: number, r1: number): Scale {
  const span = d1 - d0;
  if (!(span > 0)) {
    // Degenerate domain: pin everything to the middle of the range.
    return () => (r0 + r1) / 2;
  }
  return (v: number) => r0 + ((v - d0) / span) * (r1 - r0);
}

export function ticks(d0: number, d1: number, n = 5): number[] {
  const out: number[] = [];
  for (let i = 0; i < n; i++) {
    out.push(d0 + ((d1 - d0) * i) / (n - 1));
  }
  return out;
}

export interface Margins {
  top: number;
  right: number;
  bottom: number;
  left: number;
}

export class Svg {
  private parts: string[] = [];

  constructor(
    readonly width: number,
    readonly height: number,
  ) {
    this.parts.push(
      `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${height}" ` +
        `viewBox="0 0 ${width} ${height}" font-family="Helvetica, Arial, sans-serif">`,
    );
    this.parts.push(`<rect width="${width}" height="${height}" fill="white"/>`);
  }

  raw(element: string): void {
    this.parts.push(element);
  }

  line(x1: number, y1: number, x2: number, y2: number, attrs: string): void {
    this.parts.push(
      `<line x1="${px(x1)}" y1="${px(y1)}" x2="${px(x2)}" y2="${px(y2)}" ${attrs}/>`,
    );
  }

  polyline(pts: Array<[number, number]>, attrs: string): void {
    const coords = pts.map(([x, y]) => `${px(x)},${px(y)}`).join(" ");
    this.parts.push(`<polyline points="${coords}" fill="none" ${attrs}/>`);
  }

  circle(cx: number, cy: number, r: number, attrs: string): void {
    this.parts.push(`<circle cx="${px(cx)}" cy="${px(cy)}" r="${px(r)}" ${attrs}/>`);
  }

  rect(x: number, y: number, w: number, h: number, attrs: string): void {
    this.parts.push(
      `<rect x="${px(x)}" y="${px(y)}" width="${px(w)}" height="${px(h)}" ${attrs}/>`,
    );
  }

  text(x: number, y: number, content: string, attrs: string): void {
    this.parts.push(`<text x="${px(x)}" y="${px(y)}" ${attrs}>${escapeXml(content)}</text>`);
  }

  render(): string {
    return this.parts.join("\n") + "\n</svg>\n";
  }
}

export function escapeXml(s: string): string {
  return s.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");
}

export interface Frame {
  svg: Svg;
  x: Scale;
  y: Scale;
  left: number;
  right: number;
  top: number;
  bottom: number;
}

/**
 * Axes, tick marks, labels, and a frame around the plot area.
 * The y pixel axis is flipped so larger values sit higher.
 */
export function frame(
  svg: Svg,
  m: Margins,
  xDomain: [number, number],
  yDomain: [number, number],
  xLabel: string,
  yLabel: string,
  title: string,
): Frame {
  const left = m.left;
  const right = svg.width - m.right;
  const top = m.top;
  const bottom = svg.height - m.bottom;
  const x = linearScale(xDomain[0], xDomain[1], left, right);
  const y = linearScale(yDomain[0], yDomain[1], bottom, top);

  svg.text((left + right) / 2, top - 16, title, `text-anchor="middle" font-size="14" fill="#222"`);
  svg.rect(left, top, right - left, bottom - top, `fill="none" stroke="#444" stroke-width="1"`);

  for (const t of ticks(xDomain[0], xDomain[1])) {
    const tx = x(t);
    svg.line(tx, bottom, tx, bottom + 5, `stroke="#444" stroke-width="1"`);
    svg.text(tx, bottom + 18, tickLabel(t), `text-anchor="middle" font-size="11" fill="#222"`);
  }
  for (const t of ticks(yDomain[0], yDomain[1])) {
    const ty = y(t);
    svg.line(left - 5, ty, left, ty, `stroke="#444" stroke-width="1"`);
    svg.text(left - 8, ty + 4, tickLabel(t), `text-anchor="end" font-size="11" fill="#222"`);
  }
  svg.text((left + right) / 2, bottom + 36, xLabel, `text-anchor="middle" font-size="12" fill="#222"`);
  svg.raw(
    `<text x="${px(16)}" y="${px((top + bottom) / 2)}" text-anchor="middle" font-size="12" ` +
      `fill="#222" transform="rotate(-90 ${px(16)} ${px((top + bottom) / 2)})">${escapeXml(yLabel)}</text>`,
  );
  return { svg, x, y, left, right, top, bottom };
}

const INDICATOR_COLORS: Record<string, string> = {
  rmse: "#1f77b4",
  gcme: "#d62728",
  dlcme: "#2ca02c",
};

const FALLBACK_COLORS = ["#9467bd", "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f", "#bcbd22"];

/** Stable series color: fixed per indicator name, palette by index otherwise. */
export function seriesColor(name: string, index: number): string {
  for (const key of Object.keys(INDICATOR_COLORS)) {
    if (name === key || name.startsWith(`${key} `)) {
      return INDICATOR_COLORS[key]!;
    }
  }
  return FALLBACK_COLORS[index % FALLBACK_COLORS.length]!;
}

export function legend(f: Frame, entries: Array<[string, string]>): void {
  let yPos = f.top + 8;
  for (const [name, color] of entries) {
    f.svg.line(f.right + 10, yPos, f.right + 30, yPos, `stroke="${color}" stroke-width="2"`);
    f.svg.text(f.right + 35, yPos + 4, name, `font-size="11" fill="#222"`);
    yPos += 18;
  }
}

/** Diverging blue-white-red map for v in [-1, 1]. */
export function divergingColor(v: number): string {
  const t = Math.max(-1, Math.min(1, v));
  const lerp = (a: number, b: number, u: number) => Math.round(a + (b - a) * u);
  let r: number, g: number, b: number;
  if (t < 0) {
    const u = t + 1; // 0 at -1, 1 at 0
    r = lerp(33, 247, u);
    g = lerp(102, 247, u);
    b = lerp(172, 247, u);
  } else {
    r = lerp(247, 178, t);
    g = lerp(247, 24, t);
    b = lerp(247, 43, t);
  }
  return `rgb(${r},${g},${b})`;
}
