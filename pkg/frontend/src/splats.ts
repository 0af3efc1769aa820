// Minimal splat PLY reader for point-sprite previews: positions, DC color,
// opacity. Binary little-endian only; unknown scalar properties are skipped
// by width, matching the engine's tolerance.

const SH_C0 = 0.28209479177387814;

const TYPE_WIDTHS: Record<string, number> = {
  char: 1, int8: 1, uchar: 1, uint8: 1,
  short: 2, int16: 2, ushort: 2, uint16: 2,
  int: 4, int32: 4, uint: 4, uint32: 4, float: 4, float32: 4,
  double: 8, float64: 8,
};

export interface SplatPoints {
  count: number;
  positions: Float32Array; // xyz interleaved
  colors: Uint8ClampedArray; // rgb in [0,255] from the DC term
  opacity: Float32Array; // sigmoid of the stored logit
  sizes: Float32Array; // mean exp(log_scale) in meters
}

export function parseSplatPoints(bytes: Uint8Array): SplatPoints {
  const headerEnd = findHeaderEnd(bytes);
  const header = new TextDecoder().decode(bytes.subarray(0, headerEnd));
  if (!header.startsWith("ply")) throw new Error("missing ply magic");
  if (!header.includes("binary_little_endian")) throw new Error("unsupported PLY format");

  let count = 0;
  let inVertex = false;
  const offsets: Record<string, number> = {};
  let stride = 0;
  for (const line of header.split("\n")) {
    const parts = line.trim().split(/\s+/);
    if (parts[0] === "element") {
      inVertex = parts[1] === "vertex";
      if (inVertex) count = parseInt(parts[2], 10);
    } else if (parts[0] === "property" && inVertex) {
      if (parts[1] === "list") throw new Error("list properties unsupported");
      const width = TYPE_WIDTHS[parts[1]];
      if (!width) throw new Error(`unknown property type ${parts[1]}`);
      if (parts[1] === "float" || parts[1] === "float32") offsets[parts[2]] = stride;
      stride += width;
    }
  }
  for (const req of ["x", "y", "z"]) {
    if (!(req in offsets)) throw new Error(`PLY lacks ${req}`);
  }

  const view = new DataView(bytes.buffer, bytes.byteOffset + headerEnd);
  const positions = new Float32Array(count * 3);
  const colors = new Uint8ClampedArray(count * 3);
  const opacity = new Float32Array(count);
  const sizes = new Float32Array(count);
  const f = (rec: number, name: string) => view.getFloat32(rec * stride + offsets[name], true);
  const hasDc = "f_dc_0" in offsets;
  const hasOpacity = "opacity" in offsets;
  const hasScale = "scale_0" in offsets;
  for (let r = 0; r < count; r++) {
    positions[r * 3] = f(r, "x");
    positions[r * 3 + 1] = f(r, "y");
    positions[r * 3 + 2] = f(r, "z");
    for (let c = 0; c < 3; c++) {
      const dc = hasDc ? f(r, `f_dc_${c}`) : 0;
      colors[r * 3 + c] = Math.round(Math.min(Math.max(0.5 + SH_C0 * dc, 0), 1) * 255);
    }
    opacity[r] = hasOpacity ? 1 / (1 + Math.exp(-f(r, "opacity"))) : 1;
    sizes[r] = hasScale
      ? (Math.exp(f(r, "scale_0")) + Math.exp(f(r, "scale_1")) + Math.exp(f(r, "scale_2"))) / 3
      : 0.02;
  }
  return { count, positions, colors, opacity, sizes };
}

function findHeaderEnd(bytes: Uint8Array): number {
  const marker = "end_header\n";
  const limit = Math.min(bytes.length, 64 * 1024);
  outer: for (let i = 0; i < limit - marker.length; i++) {
    for (let j = 0; j < marker.length; j++) {
      if (bytes[i + j] !== marker.charCodeAt(j)) continue outer;
    }
    return i + marker.length;
  }
  throw new Error("PLY header has no end_header");
}
