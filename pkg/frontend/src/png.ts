/**
 * PNG renderer: rasterizes the scene onto an RGBA canvas and encodes it with
 * the stock zlib. Text uses an embedded 5x7 pixel font (uppercase mapping),
 * which keeps the renderer dependency-free.
 */

import { deflateSync } from "node:zlib";

import { Primitive, Scene } from "./scene.js";

// --- 5x7 font: 7 rows of 5 bits per glyph, MSB on the left ------------------

const FONT: Record<string, number[]> = {
  "0": [0b01110, 0b10001, 0b10011, 0b10101, 0b11001, 0b10001, 0b01110],
  "1": [0b00100, 0b01100, 0b00100, 0b00100, 0b00100, 0b00100, 0b01110],
  "2": [0b01110, 0b10001, 0b00001, 0b00010, 0b00100, 0b01000, 0b11111],
  "3": [0b11111, 0b00010, 0b00100, 0b00010, 0b00001, 0b10001, 0b01110],
  "4": [0b00010, 0b00110, 0b01010, 0b10010, 0b11111, 0b00010, 0b00010],
  "5": [0b11111, 0b10000, 0b11110, 0b00001, 0b00001, 0b10001, 0b01110],
  "6": [0b00110, 0b01000, 0b10000, 0b11110, 0b10001, 0b10001, 0b01110],
  "7": [0b11111, 0b00001, 0b00010, 0b00100, 0b01000, 0b01000, 0b01000],
  "8": [0b01110, 0b10001, 0b10001, 0b01110, 0b10001, 0b10001, 0b01110],
  "9": [0b01110, 0b10001, 0b10001, 0b01111, 0b00001, 0b00010, 0b01100],
  A: [0b01110, 0b10001, 0b10001, 0b11111, 0b10001, 0b10001, 0b10001],
  B: [0b11110, 0b10001, 0b10001, 0b11110, 0b10001, 0b10001, 0b11110],
  C: [0b01110, 0b10001, 0b10000, 0b10000, 0b10000, 0b10001, 0b01110],
  D: [0b11100, 0b10010, 0b10001, 0b10001, 0b10001, 0b10010, 0b11100],
  E: [0b11111, 0b10000, 0b10000, 0b11110, 0b10000, 0b10000, 0b11111],
  F: [0b11111, 0b10000, 0b10000, 0b11110, 0b10000, 0b10000, 0b10000],
  G: [0b01110, 0b10001, 0b10000, 0b10111, 0b10001, 0b10001, 0b01111],
  H: [0b10001, 0b10001, 0b10001, 0b11111, 0b10001, 0b10001, 0b10001],
  I: [0b01110, 0b00100, 0b00100, 0b00100, 0b00100, 0b00100, 0b01110],
  J: [0b00111, 0b00010, 0b00010, 0b00010, 0b00010, 0b10010, 0b01100],
  K: [0b10001, 0b10010, 0b10100, 0b11000, 0b10100, 0b10010, 0b10001],
  L: [0b10000, 0b10000, 0b10000, 0b10000, 0b10000, 0b10000, 0b11111],
  M: [0b10001, 0b11011, 0b10101, 0b10101, 0b10001, 0b10001, 0b10001],
  N: [0b10001, 0b10001, 0b11001, 0b10101, 0b10011, 0b10001, 0b10001],
  O: [0b01110, 0b10001, 0b10001, 0b10001, 0b10001, 0b10001, 0b01110],
  P: [0b11110, 0b10001, 0b10001, 0b11110, 0b10000, 0b10000, 0b10000],
  Q: [0b01110, 0b10001, 0b10001, 0b10001, 0b10101, 0b10010, 0b01101],
  R: [0b11110, 0b10001, 0b10001, 0b11110, 0b10100, 0b10010, 0b10001],
  S: [0b01111, 0b10000, 0b10000, 0b01110, 0b00001, 0b00001, 0b11110],
  T: [0b11111, 0b00100, 0b00100, 0b00100, 0b00100, 0b00100, 0b00100],
  U: [0b10001, 0b10001, 0b10001, 0b10001, 0b10001, 0b10001, 0b01110],
  V: [0b10001, 0b10001, 0b10001, 0b10001, 0b10001, 0b01010, 0b00100],
  W: [0b10001, 0b10001, 0b10001, 0b10101, 0b10101, 0b10101, 0b01010],
  X: [0b10001, 0b10001, 0b01010, 0b00100, 0b01010, 0b10001, 0b10001],
  Y: [0b10001, 0b10001, 0b10001, 0b01010, 0b00100, 0b00100, 0b00100],
  Z: [0b11111, 0b00001, 0b00010, 0b00100, 0b01000, 0b10000, 0b11111],
  " ": [0, 0, 0, 0, 0, 0, 0],
  ".": [0, 0, 0, 0, 0, 0b01100, 0b01100],
  ",": [0, 0, 0, 0, 0b01100, 0b00100, 0b01000],
  "-": [0, 0, 0, 0b11111, 0, 0, 0],
  _: [0, 0, 0, 0, 0, 0, 0b11111],
  "(": [0b00010, 0b00100, 0b01000, 0b01000, 0b01000, 0b00100, 0b00010],
  ")": [0b01000, 0b00100, 0b00010, 0b00010, 0b00010, 0b00100, 0b01000],
  ":": [0, 0b01100, 0b01100, 0, 0b01100, 0b01100, 0],
  "=": [0, 0, 0b11111, 0, 0b11111, 0, 0],
  "/": [0b00001, 0b00010, 0b00010, 0b00100, 0b01000, 0b01000, 0b10000],
  "+": [0, 0b00100, 0b00100, 0b11111, 0b00100, 0b00100, 0],
  "?": [0b01110, 0b10001, 0b00001, 0b00010, 0b00100, 0, 0b00100],
};

function glyph(ch: string): number[] {
  return FONT[ch] ?? FONT[ch.toUpperCase()] ?? FONT["?"];
}

// --- canvas -----------------------------------------------------------------

function parseColor(color: string): [number, number, number] {
  const hex = color.startsWith("#") ? color.slice(1) : "000000";
  return [
    parseInt(hex.slice(0, 2), 16),
    parseInt(hex.slice(2, 4), 16),
    parseInt(hex.slice(4, 6), 16),
  ];
}

class Canvas {
  readonly pixels: Uint8Array;

  constructor(readonly width: number, readonly height: number) {
    this.pixels = new Uint8Array(width * height * 4).fill(255);
  }

  set(x: number, y: number, rgb: [number, number, number]) {
    const xi = Math.round(x);
    const yi = Math.round(y);
    if (xi < 0 || yi < 0 || xi >= this.width || yi >= this.height) return;
    const at = (yi * this.width + xi) * 4;
    this.pixels[at] = rgb[0];
    this.pixels[at + 1] = rgb[1];
    this.pixels[at + 2] = rgb[2];
    this.pixels[at + 3] = 255;
  }

  brush(x: number, y: number, rgb: [number, number, number], width: number) {
    const r = Math.max(0, Math.round(width / 2) - 1);
    for (let dx = -r; dx <= r; dx++) {
      for (let dy = -r; dy <= r; dy++) {
        this.set(x + dx, y + dy, rgb);
      }
    }
    this.set(x, y, rgb);
  }

  line(
    x1: number,
    y1: number,
    x2: number,
    y2: number,
    rgb: [number, number, number],
    width: number,
    dash?: string,
  ) {
    const steps = Math.max(Math.abs(x2 - x1), Math.abs(y2 - y1), 1);
    let pattern: number[] | null = null;
    if (dash) pattern = dash.split(",").map((p) => Number(p));
    const period = pattern ? pattern[0] + (pattern[1] ?? pattern[0]) : 0;
    for (let i = 0; i <= steps; i++) {
      if (pattern && i % period >= pattern[0]) continue;
      const t = i / steps;
      this.brush(x1 + (x2 - x1) * t, y1 + (y2 - y1) * t, rgb, width);
    }
  }

  fillRect(x: number, y: number, w: number, h: number, rgb: [number, number, number]) {
    for (let yy = y; yy < y + h; yy++) {
      for (let xx = x; xx < x + w; xx++) {
        this.set(xx, yy, rgb);
      }
    }
  }

  text(
    x: number,
    y: number,
    content: string,
    size: number,
    rgb: [number, number, number],
    anchor: "start" | "middle" | "end",
  ) {
    const scale = Math.max(1, Math.round(size / 8));
    const advance = 6 * scale;
    const total = content.length * advance - scale;
    let left = Math.round(x);
    if (anchor === "middle") left -= Math.round(total / 2);
    if (anchor === "end") left -= total;
    const top = Math.round(y) - 7 * scale; // y is the text baseline
    for (const ch of content) {
      const rows = glyph(ch);
      for (let row = 0; row < 7; row++) {
        for (let colBit = 0; colBit < 5; colBit++) {
          if ((rows[row] >> (4 - colBit)) & 1) {
            this.fillRect(left + colBit * scale, top + row * scale, scale, scale, rgb);
          }
        }
      }
      left += advance;
    }
  }
}

// --- PNG encoding -------------------------------------------------------------

const CRC_TABLE = (() => {
  const table = new Uint32Array(256);
  for (let i = 0; i < 256; i++) {
    let c = i;
    for (let k = 0; k < 8; k++) {
      c = c & 1 ? 0xedb88320 ^ (c >>> 1) : c >>> 1;
    }
    table[i] = c >>> 0;
  }
  return table;
})();

function crc32(data: Uint8Array): number {
  let crc = 0xffffffff;
  for (const byte of data) {
    crc = CRC_TABLE[(crc ^ byte) & 0xff] ^ (crc >>> 8);
  }
  return (crc ^ 0xffffffff) >>> 0;
}

function chunk(type: string, data: Uint8Array): Buffer {
  const head = Buffer.alloc(4);
  head.writeUInt32BE(data.length);
  const typed = Buffer.concat([Buffer.from(type, "ascii"), data]);
  const crc = Buffer.alloc(4);
  crc.writeUInt32BE(crc32(typed));
  return Buffer.concat([head, typed, crc]);
}

export function encodePng(width: number, height: number, rgba: Uint8Array): Buffer {
  const ihdr = Buffer.alloc(13);
  ihdr.writeUInt32BE(width, 0);
  ihdr.writeUInt32BE(height, 4);
  ihdr[8] = 8; // bit depth
  ihdr[9] = 6; // RGBA
  const raw = Buffer.alloc((width * 4 + 1) * height);
  for (let y = 0; y < height; y++) {
    raw[y * (width * 4 + 1)] = 0; // filter: none
    rgba
      .subarray(y * width * 4, (y + 1) * width * 4)
      .forEach((v, i) => (raw[y * (width * 4 + 1) + 1 + i] = v));
  }
  return Buffer.concat([
    Buffer.from([137, 80, 78, 71, 13, 10, 26, 10]),
    chunk("IHDR", ihdr),
    chunk("IDAT", deflateSync(raw, { level: 9 })),
    chunk("IEND", new Uint8Array(0)),
  ]);
}

// --- renderer -----------------------------------------------------------------

function draw(canvas: Canvas, prim: Primitive): void {
  switch (prim.kind) {
    case "rect":
      canvas.fillRect(prim.x, prim.y, prim.w, prim.h, parseColor(prim.fill));
      return;
    case "line":
      canvas.line(prim.x1, prim.y1, prim.x2, prim.y2, parseColor(prim.color), prim.width, prim.dash);
      return;
    case "polyline": {
      const rgb = parseColor(prim.color);
      for (let i = 1; i < prim.points.length; i++) {
        const [x1, y1] = prim.points[i - 1];
        const [x2, y2] = prim.points[i];
        canvas.line(x1, y1, x2, y2, rgb, prim.width);
      }
      return;
    }
    case "text":
      canvas.text(prim.x, prim.y, prim.text, prim.size, parseColor(prim.color), prim.anchor);
      return;
  }
}

export function renderPng(scene: Scene): Buffer {
  const canvas = new Canvas(scene.width, scene.height);
  for (const prim of scene.prims) {
    draw(canvas, prim);
  }
  return encodePng(scene.width, scene.height, canvas.pixels);
}
