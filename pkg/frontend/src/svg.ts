/** SVG renderer: a direct serialization of the scene primitives. */

import { Primitive, Scene } from "./scene.js";

function esc(s: string): string {
  return s.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");
}

function n(v: number): string {
  return Number.isInteger(v) ? String(v) : v.toFixed(2);
}

function render(prim: Primitive): string {
  switch (prim.kind) {
    case "rect":
      return `<rect x="${n(prim.x)}" y="${n(prim.y)}" width="${n(prim.w)}" height="${n(prim.h)}" fill="${prim.fill}"/>`;
    case "line": {
      const dash = prim.dash ? ` stroke-dasharray="${prim.dash}"` : "";
      return (
        `<line x1="${n(prim.x1)}" y1="${n(prim.y1)}" x2="${n(prim.x2)}" y2="${n(prim.y2)}"` +
        ` stroke="${prim.color}" stroke-width="${n(prim.width)}"${dash}/>`
      );
    }
    case "polyline": {
      const points = prim.points.map(([x, y]) => `${n(x)},${n(y)}`).join(" ");
      return `<polyline points="${points}" fill="none" stroke="${prim.color}" stroke-width="${n(prim.width)}"/>`;
    }
    case "text": {
      const anchor = { start: "start", middle: "middle", end: "end" }[prim.anchor];
      return (
        `<text x="${n(prim.x)}" y="${n(prim.y)}" font-size="${n(prim.size)}"` +
        ` font-family="Helvetica, Arial, sans-serif" fill="${prim.color}"` +
        ` text-anchor="${anchor}">${esc(prim.text)}</text>`
      );
    }
  }
}

export function renderSvg(scene: Scene): string {
  const body = scene.prims.map(render).join("\n");
  return (
    `<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 ${scene.width} ${scene.height}"` +
    ` width="${scene.width}" height="${scene.height}">\n${body}\n</svg>\n`
  );
}
