// Minimal PNG encoder (8-bit RGBA, no interlace) on top of node:zlib.
import { deflateSync } from "node:zlib";

const CRC_TABLE = (() => {
  const table = new Uint32Array(256);
  for (let n = 0; n < 256; n++) {
    let c = n;
    for (let k = 0; k < 8; k++) {
      c = c & 1 ? 0xedb88320 ^ (c >>> 1) : c >>> 1;
    }
    table[n] = c >>> 0;
  }
  return table;
})();

function crc32(buf: Buffer): number {
  let c = 0xffffffff;
  for (let i = 0; i < buf.length; i++) {
    c = CRC_TABLE[(c ^ buf[i]) & 0xff] ^ (c >>> 8);
  }
  return (c ^ 0xffffffff) >>> 0;
}

function chunk(type: string, payload: Buffer): Buffer {
  const head = Buffer.alloc(8);
  head.writeUInt32BE(payload.length, 0);
  head.write(type, 4, "latin1");
  const crcBuf = Buffer.alloc(4);
  crcBuf.writeUInt32BE(crc32(Buffer.concat([head.subarray(4), payload])), 0);
  return Buffer.concat([head, payload, crcBuf]);
}

export function encodePng(width: number, height: number,
                          rgba: Uint8Array): Buffer {
  if (rgba.length !== width * height * 4) {
    throw new Error("rgba buffer size does not match dimensions");
  }
  const ihdr = Buffer.alloc(13);
  ihdr.writeUInt32BE(width, 0);
  ihdr.writeUInt32BE(height, 4);
  ihdr.writeUInt8(8, 8); // bit depth
  ihdr.writeUInt8(6, 9); // color type RGBA
  const raw = Buffer.alloc(height * (1 + width * 4));
  for (let y = 0; y < height; y++) {
    const rowStart = y * (1 + width * 4);
    raw[rowStart] = 0; // filter: none
    rgba.subarray(y * width * 4, (y + 1) * width * 4)
      .forEach((v, i) => (raw[rowStart + 1 + i] = v));
  }
  return Buffer.concat([
    Buffer.from([0x89, 0x50, 0x4e, 0x47, 0x0d, 0x0a, 0x1a, 0x0a]),
    chunk("IHDR", ihdr),
    chunk("IDAT", deflateSync(raw, { level: 9 })),
    chunk("IEND", Buffer.alloc(0)),
  ]);
}

// Tiny raster painter for the PNG companions of the vector figures.
export class Raster {
  readonly pixels: Uint8Array;

  constructor(readonly width: number, readonly height: number) {
    this.pixels = new Uint8Array(width * height * 4);
    this.fill(255, 255, 255);
  }

  fill(r: number, g: number, b: number): void {
    for (let i = 0; i < this.width * this.height; i++) {
      this.pixels.set([r, g, b, 255], i * 4);
    }
  }

  set(x: number, y: number, rgb: [number, number, number]): void {
    const xi = Math.round(x);
    const yi = Math.round(y);
    if (xi < 0 || yi < 0 || xi >= this.width || yi >= this.height) return;
    this.pixels.set([rgb[0], rgb[1], rgb[2], 255], (yi * this.width + xi) * 4);
  }

  line(x0: number, y0: number, x1: number, y1: number,
       rgb: [number, number, number]): void {
    const steps = Math.max(Math.abs(x1 - x0), Math.abs(y1 - y0), 1) * 2;
    for (let s = 0; s <= steps; s++) {
      const f = s / steps;
      this.set(x0 + f * (x1 - x0), y0 + f * (y1 - y0), rgb);
    }
  }

  encode(): Buffer {
    return encodePng(this.width, this.height, this.pixels);
  }
}
