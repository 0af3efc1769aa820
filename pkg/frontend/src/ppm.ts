// Binary PPM (P6, maxval 255) decoding for preview images and billboards.

export interface RgbImage {
  width: number;
  height: number;
  rgba: Uint8ClampedArray; // width * height * 4
}

export function decodePpm(bytes: Uint8Array): RgbImage {
  if (bytes[0] !== 0x50 || bytes[1] !== 0x36) {
    throw new Error("not a P6 PPM");
  }
  let i = 2;
  const fields: number[] = [];
  while (fields.length < 3) {
    while (i < bytes.length && isSpace(bytes[i])) i++;
    if (bytes[i] === 0x23) {
      while (i < bytes.length && bytes[i] !== 0x0a) i++;
      continue;
    }
    let start = i;
    while (i < bytes.length && !isSpace(bytes[i])) i++;
    fields.push(parseInt(ascii(bytes, start, i), 10));
  }
  i++; // the single whitespace after maxval
  const [width, height, maxval] = fields;
  if (maxval !== 255) throw new Error(`unsupported maxval ${maxval}`);
  const rgba = new Uint8ClampedArray(width * height * 4);
  for (let p = 0; p < width * height; p++) {
    rgba[p * 4] = bytes[i + p * 3];
    rgba[p * 4 + 1] = bytes[i + p * 3 + 1];
    rgba[p * 4 + 2] = bytes[i + p * 3 + 2];
    rgba[p * 4 + 3] = 255;
  }
  return { width, height, rgba };
}

function isSpace(b: number): boolean {
  return b === 0x20 || b === 0x0a || b === 0x0d || b === 0x09;
}

function ascii(bytes: Uint8Array, start: number, end: number): string {
  let s = "";
  for (let j = start; j < end; j++) s += String.fromCharCode(bytes[j]);
  return s;
}
