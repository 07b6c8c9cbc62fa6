/** Minimal deterministic SVG document builder (no DOM dependency). */

export interface Attrs {
  [key: string]: string | number;
}

function attrText(attrs: Attrs): string {
  return Object.entries(attrs)
    .map(([k, v]) => ` ${k}="${v}"`)
    .join("");
}

export class SvgDoc {
  private parts: string[] = [];

  constructor(
    readonly width: number,
    readonly height: number,
  ) {}

  element(tag: string, attrs: Attrs, content?: string): this {
    if (content === undefined) {
      this.parts.push(`<${tag}${attrText(attrs)}/>`);
    } else {
      this.parts.push(`<${tag}${attrText(attrs)}>${content}</${tag}>`);
    }
    return this;
  }

  rect(x: number, y: number, w: number, h: number, fill: string): this {
    return this.element("rect", {
      x: fmt(x),
      y: fmt(y),
      width: fmt(w),
      height: fmt(h),
      fill,
    });
  }

  path(d: string, stroke: string, extra: Attrs = {}): this {
    return this.element("path", { d, stroke, fill: "none", ...extra });
  }

  text(x: number, y: number, content: string, extra: Attrs = {}): this {
    return this.element(
      "text",
      { x: fmt(x), y: fmt(y), "font-family": "sans-serif", ...extra },
      escapeXml(content),
    );
  }

  line(x1: number, y1: number, x2: number, y2: number, stroke: string, extra: Attrs = {}): this {
    return this.element("line", {
      x1: fmt(x1),
      y1: fmt(y1),
      x2: fmt(x2),
      y2: fmt(y2),
      stroke,
      ...extra,
    });
  }

  render(): string {
    return (
      `<svg xmlns="http://www.w3.org/2000/svg" width="${this.width}"` +
      ` height="${this.height}" viewBox="0 0 ${this.width} ${this.height}">\n` +
      this.parts.join("\n") +
      "\n</svg>\n"
    );
  }
}

export function fmt(v: number): string {
  return Number.isInteger(v) ? String(v) : v.toFixed(2);
}

export function escapeXml(s: string): string {
  return s
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;");
}
