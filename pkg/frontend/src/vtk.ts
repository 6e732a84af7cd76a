/** Reader for the solver's legacy-ASCII VTK particle snapshots. */

import { SchemaError } from "./csv.js";

export interface Snapshot {
  points: [number, number][];
  scalars: Map<string, number[]>;
  vectors: Map<string, [number, number][]>;
}

export function parseVtk(text: string): Snapshot {
  const lines = text.split(/\r?\n/);
  const snap: Snapshot = { points: [], scalars: new Map(), vectors: new Map() };
  let n = 0;
  let i = 0;
  while (i < lines.length) {
    const ln = lines[i].trim();
    if (ln.startsWith("POINTS")) {
      n = parseInt(ln.split(/\s+/)[1], 10);
      for (let j = 0; j < n; j++) {
        const parts = lines[i + 1 + j].trim().split(/\s+/).map(Number);
        snap.points.push([parts[0], parts[1]]);
      }
      i += n;
    } else if (ln.startsWith("VECTORS")) {
      const name = ln.split(/\s+/)[1];
      const arr: [number, number][] = [];
      for (let j = 0; j < n; j++) {
        const parts = lines[i + 1 + j].trim().split(/\s+/).map(Number);
        arr.push([parts[0], parts[1]]);
      }
      snap.vectors.set(name, arr);
      i += n;
    } else if (ln.startsWith("SCALARS")) {
      const name = ln.split(/\s+/)[1];
      const arr: number[] = [];
      for (let j = 0; j < n; j++) {
        arr.push(Number(lines[i + 2 + j]));
      }
      snap.scalars.set(name, arr);
      i += n + 1;
    }
    i += 1;
  }
  return snap;
}

export function scalarField(snap: Snapshot, name: string, source = "vtk"): number[] {
  const arr = snap.scalars.get(name);
  if (!arr) {
    throw new SchemaError(
      `${source}: missing scalar '${name}' (has: ${[...snap.scalars.keys()].join(", ")})`,
    );
  }
  return arr;
}
