/**
 * Minimal PNG writer/reader for RGBA rasters.
 *
 * Writes 8-bit truecolor+alpha with filter type 0 on every scanline and a
 * fixed deflate level, so identical rasters give identical bytes.  The
 * reader only understands what the writer emits (plus filter types 1/2 for
 * robustness) — it exists for round-trip tests and pixel assertions, not
 * as a general decoder.
 */

import { deflateSync, inflateSync } from "node:zlib";

import { Raster, makeRaster } from "./raster.js";

const SIGNATURE = Buffer.from([137, 80, 78, 71, 13, 10, 26, 10]);

const CRC_TABLE = new Uint32Array(256);
for (let n = 0; n < 256; n++) {
  let c = n;
  for (let k = 0; k < 8; k++) {
    c = c & 1 ? 0xedb88320 ^ (c >>> 1) : c >>> 1;
  }
  CRC_TABLE[n] = c >>> 0;
}

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
  head.write(type, 4, "ascii");
  const crc = Buffer.alloc(4);
  crc.writeUInt32BE(crc32(Buffer.concat([head.subarray(4), payload])), 0);
  return Buffer.concat([head, payload, crc]);
}

export function encodePng(raster: Raster): Buffer {
  const { width, height, data } = raster;
  const ihdr = Buffer.alloc(13);
  ihdr.writeUInt32BE(width, 0);
  ihdr.writeUInt32BE(height, 4);
  ihdr[8] = 8; // bit depth
  ihdr[9] = 6; // RGBA
  const stride = width * 4;
  const raw = Buffer.alloc((stride + 1) * height);
  for (let y = 0; y < height; y++) {
    raw[y * (stride + 1)] = 0; // filter: none
    raw.set(data.subarray(y * stride, (y + 1) * stride), y * (stride + 1) + 1);
  }
  return Buffer.concat([
    SIGNATURE,
    chunk("IHDR", ihdr),
    chunk("IDAT", deflateSync(raw, { level: 9 })),
    chunk("IEND", Buffer.alloc(0)),
  ]);
}

export function decodePng(bytes: Buffer): Raster {
  if (!bytes.subarray(0, 8).equals(SIGNATURE)) {
    throw new Error("not a PNG file");
  }
  let width = 0;
  let height = 0;
  const idat: Buffer[] = [];
  let off = 8;
  while (off < bytes.length) {
    const len = bytes.readUInt32BE(off);
    const type = bytes.toString("ascii", off + 4, off + 8);
    const payload = bytes.subarray(off + 8, off + 8 + len);
    if (type === "IHDR") {
      width = payload.readUInt32BE(0);
      height = payload.readUInt32BE(4);
      if (payload[8] !== 8 || payload[9] !== 6) {
        throw new Error("decoder only handles 8-bit RGBA");
      }
    } else if (type === "IDAT") {
      idat.push(payload);
    }
    off += 12 + len;
  }
  const raw = inflateSync(Buffer.concat(idat));
  const stride = width * 4;
  const out = makeRaster(width, height);
  for (let y = 0; y < height; y++) {
    const filter = raw[y * (stride + 1)];
    const line = raw.subarray(y * (stride + 1) + 1, (y + 1) * (stride + 1));
    for (let x = 0; x < stride; x++) {
      let v = line[x];
      if (filter === 1) {
        v = (v + (x >= 4 ? out.data[y * stride + x - 4] : 0)) & 0xff;
      } else if (filter === 2) {
        v = (v + (y > 0 ? out.data[(y - 1) * stride + x] : 0)) & 0xff;
      } else if (filter !== 0) {
        throw new Error(`unsupported scanline filter ${filter}`);
      }
      out.data[y * stride + x] = v;
    }
  }
  return out;
}
