// OBJ text parsing for low-fidelity meshes (v and f records only).

export interface WireMesh {
  vertices: Float32Array; // xyz interleaved
  edges: Uint32Array; // vertex index pairs, deduplicated
}

export function parseObjWireframe(text: string): WireMesh {
  const verts: number[] = [];
  const edgeSet = new Set<string>();
  const edges: number[] = [];

  const addEdge = (a: number, b: number) => {
    const key = a < b ? `${a}/${b}` : `${b}/${a}`;
    if (!edgeSet.has(key)) {
      edgeSet.add(key);
      edges.push(a, b);
    }
  };

  for (const raw of text.split("\n")) {
    const parts = raw.trim().split(/\s+/);
    if (parts[0] === "v" && parts.length >= 4) {
      verts.push(parseFloat(parts[1]), parseFloat(parts[2]), parseFloat(parts[3]));
    } else if (parts[0] === "f" && parts.length >= 4) {
      const idx = parts.slice(1).map((p) => parseInt(p.split("/")[0], 10) - 1);
      for (let i = 0; i < idx.length; i++) {
        addEdge(idx[i], idx[(i + 1) % idx.length]);
      }
    }
  }
  return { vertices: new Float32Array(verts), edges: new Uint32Array(edges) };
}
