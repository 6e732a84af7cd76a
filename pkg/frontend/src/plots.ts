/** The three figure kinds: depth profiles with the analytical dashed
 * reference, probe time histories, and particle pressure fields. */

import { column, parseCsv, SchemaError, Table } from "./csv.js";
import { parseVtk, scalarField, Snapshot } from "./vtk.js";
import { diverging, extend, Extent, Figure } from "./svg.js";

export interface NamedInput {
  name: string;
  text: string;
}

/** Profile plot: numerical solution as markers+solid, analytical dashed. */
export function plotProfile(inputs: NamedInput[], title = ""): string {
  if (inputs.length === 0) throw new SchemaError("profile plot needs a CSV");
  const fig = new Figure("dimensionless depth Z", "dimensionless pressure P", title);
  let haveExact = false;
  inputs.forEach((input, k) => {
    const table = parseCsv(input.text);
    const Z = column(table, "Z", input.name);
    const P = column(table, "P_numerical", input.name);
    fig.addSeries({ x: Z, y: P, label: `${input.name}`, markers: true });
    if (!haveExact) {
      const Pex = column(table, "P_exact", input.name);
      haveExact = true;
      fig.addSeries({ x: Z, y: Pex, label: "analytical", dashed: true });
    }
  });
  return fig.render();
}

/** Probe histories: one curve per CSV, legend from the file labels. */
export function plotHistory(inputs: NamedInput[], title = ""): string {
  if (inputs.length === 0) throw new SchemaError("history plot needs a CSV");
  const fig = new Figure("t [s]", "excess pore pressure [Pa]", title);
  for (const input of inputs) {
    const table = parseCsv(input.text);
    fig.addSeries({
      x: column(table, "t", input.name),
      y: column(table, "p_excess", input.name),
      label: input.name,
    });
  }
  return fig.render();
}

export interface FieldOptions {
  title?: string;
  /** shared color range across a snapshot sequence */
  range?: Extent;
}

/** Scan a snapshot sequence for the shared colorbar range. */
export function fieldRange(texts: string[]): Extent {
  let ext: Extent = { min: Infinity, max: -Infinity };
  for (const text of texts) {
    const snap = loadField(text);
    ext = extend(scalarField(snap, "excess_pressure"), ext);
  }
  if (!Number.isFinite(ext.min)) return { min: 0, max: 1 };
  return ext;
}

function loadField(text: string): Snapshot {
  if (text.startsWith("# vtk")) {
    return parseVtk(text);
  }
  // flattened CSV snapshot: columns x, y, excess_pressure
  const table: Table = parseCsv(text);
  return {
    points: column(table, "x").map((x, i) => [x, column(table, "y")[i]]),
    scalars: new Map([["excess_pressure", column(table, "excess_pressure")]]),
    vectors: new Map(),
  };
}

/** Particle scatter colored by excess pressure with a colorbar. */
export function plotField(text: string, opts: FieldOptions = {}): string {
  const snap = loadField(text);
  const fig = new Figure("x [m]", "y [m]", opts.title ?? "");
  fig.equalAspect = true;
  if (snap.points.length === 0) {
    fig.addSeries({ x: [0, 1], y: [0, 1], label: "(empty snapshot)" });
    return fig.render();
  }
  const p = scalarField(snap, "excess_pressure");
  const range = opts.range ?? extend(p);
  const span = range.max - range.min || 1.0;
  fig.addPoints(
    snap.points.map(([x, y], i) => ({
      x,
      y,
      color: diverging((p[i] - range.min) / span),
    })),
  );
  fig.setColorbar(range.min, range.max, "p [Pa]");
  return fig.render();
}
