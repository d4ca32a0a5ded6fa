// Reader for the pipeline's binary array format ("ASF1").
// Layout: magic "ASF1" | u8 flags (bit0 = complex) | u8 rank | u16 reserved |
// per dim { u64 size, 16-byte name, f64 min, f64 step } | f64 LE payload
// (complex as interleaved re/im pairs).
import { readFileSync } from "node:fs";

export interface AxisInfo {
  name: string;
  min: number;
  step: number;
  size: number;
}

export interface ArrayFile {
  shape: number[];
  axes: AxisInfo[];
  complex: boolean;
  data: Float64Array; // complex data interleaved
}

export function readArrayFile(path: string): ArrayFile {
  const buf = readFileSync(path);
  if (buf.length < 8 || buf.toString("latin1", 0, 4) !== "ASF1") {
    throw new Error(`${path}: not an ASF1 file`);
  }
  const flags = buf.readUInt8(4);
  const rank = buf.readUInt8(5);
  let off = 8;
  const shape: number[] = [];
  const axes: AxisInfo[] = [];
  for (let d = 0; d < rank; d++) {
    const size = Number(buf.readBigUInt64LE(off));
    off += 8;
    const rawName = buf.subarray(off, off + 16);
    off += 16;
    const zero = rawName.indexOf(0);
    const name = rawName.toString("utf8", 0, zero < 0 ? 16 : zero);
    const min = buf.readDoubleLE(off);
    const step = buf.readDoubleLE(off + 8);
    off += 16;
    shape.push(size);
    axes.push({ name, min, step, size });
  }
  const complex = (flags & 1) !== 0;
  const count = shape.reduce((a, b) => a * b, 1) * (complex ? 2 : 1);
  if (buf.length !== off + count * 8) {
    throw new Error(
      `${path}: payload length ${buf.length - off} does not match header ` +
        `(${count * 8} bytes expected)`,
    );
  }
  const data = new Float64Array(count);
  for (let i = 0; i < count; i++) data[i] = buf.readDoubleLE(off + 8 * i);
  return { shape, axes, complex, data };
}

export function axisValues(axis: AxisInfo): number[] {
  const out = new Array<number>(axis.size);
  for (let i = 0; i < axis.size; i++) out[i] = axis.min + axis.step * i;
  return out;
}
