/** Command-line entry points:
 *
 *    plot profile  <profile.csv ...> -o out.svg [--title T]
 *    plot history  <history.csv ...> -o out.svg [--title T]
 *    plot field    <snapshot.vtk|csv> -o out.svg [--title T]
 *                  [--sequence more.vtk ...]   (shared colorbar range)
 */

import { readFileSync, writeFileSync } from "fs";
import { basename } from "path";
import { SchemaError } from "./csv.js";
import { fieldRange, plotField, plotHistory, plotProfile } from "./plots.js";

interface Args {
  kind: string;
  inputs: string[];
  output: string;
  title: string;
  sequence: string[];
}

export function parseArgs(argv: string[]): Args {
  const [kind, ...rest] = argv;
  if (!kind || !["profile", "history", "field"].includes(kind)) {
    throw new SchemaError("usage: plot profile|history|field <inputs> -o <image>");
  }
  const args: Args = { kind, inputs: [], output: "", title: "", sequence: [] };
  for (let i = 0; i < rest.length; i++) {
    const a = rest[i];
    if (a === "-o" || a === "--output") {
      args.output = rest[++i];
    } else if (a === "--title") {
      args.title = rest[++i];
    } else if (a === "--sequence") {
      while (i + 1 < rest.length && !rest[i + 1].startsWith("-")) {
        args.sequence.push(rest[++i]);
      }
    } else {
      args.inputs.push(a);
    }
  }
  if (!args.output) throw new SchemaError("missing -o <image>");
  if (args.inputs.length === 0) throw new SchemaError("no input files given");
  return args;
}

function label(path: string): string {
  return basename(path).replace(/\.(csv|vtk)$/, "");
}

export function run(argv: string[]): number {
  let args: Args;
  try {
    args = parseArgs(argv);
  } catch (e) {
    console.error((e as Error).message);
    return 2;
  }
  try {
    const named = args.inputs.map((p) => ({
      name: label(p),
      text: readFileSync(p, "utf-8"),
    }));
    let svg: string;
    if (args.kind === "profile") {
      svg = plotProfile(named, args.title);
    } else if (args.kind === "history") {
      svg = plotHistory(named, args.title);
    } else {
      const range =
        args.sequence.length > 0
          ? fieldRange([named[0].text, ...args.sequence.map((p) => readFileSync(p, "utf-8"))])
          : undefined;
      svg = plotField(named[0].text, { title: args.title, range });
    }
    writeFileSync(args.output, svg);
    return 0;
  } catch (e) {
    if (e instanceof SchemaError) {
      console.error(`schema error: ${e.message}`);
      return 2;
    }
    console.error(`error: ${(e as Error).message}`);
    return 1;
  }
}

const isMain = process.argv[1] && import.meta.url.endsWith(basename(process.argv[1]));
if (isMain) {
  process.exit(run(process.argv.slice(2)));
}
