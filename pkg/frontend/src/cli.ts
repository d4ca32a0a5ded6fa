#!/usr/bin/env node
// attoplot <figure-id> --manifest <path> --out <dir>
//          [--log-floor <fraction>] [--instants a,b,c]
import { loadManifest } from "./manifest.js";
import { FIGURE_IDS, FigureId, render } from "./render.js";
import { DEFAULT_STYLE, StyleOptions } from "./figures/common.js";

function usage(): string {
  return `usage: attoplot <${FIGURE_IDS.join("|")}> --manifest <path> ` +
    `--out <dir> [--log-floor f] [--instants a,b,c]\n`;
}

export function main(argv: string[]): number {
  const args = [...argv];
  const figure = args.shift();
  if (!figure || !(FIGURE_IDS as readonly string[]).includes(figure)) {
    process.stderr.write(usage());
    return 2;
  }
  let manifestPath = "";
  let outDir = "";
  const style: StyleOptions = { ...DEFAULT_STYLE };
  while (args.length > 0) {
    const flag = args.shift();
    const value = args.shift();
    if (value === undefined) {
      process.stderr.write(`missing value for ${flag}\n` + usage());
      return 2;
    }
    switch (flag) {
      case "--manifest":
        manifestPath = value;
        break;
      case "--out":
        outDir = value;
        break;
      case "--log-floor":
        style.logFloorFraction = Number(value);
        break;
      case "--instants":
        style.instants = value.split(",").map(Number);
        break;
      default:
        process.stderr.write(`unknown flag ${flag}\n` + usage());
        return 2;
    }
  }
  if (!manifestPath || !outDir) {
    process.stderr.write(usage());
    return 2;
  }
  try {
    const man = loadManifest(manifestPath);
    const written = render(figure as FigureId, man, outDir, style);
    process.stdout.write(written.map((p) => p + "\n").join(""));
    return 0;
  } catch (err) {
    process.stderr.write(`attoplot: ${(err as Error).message}\n`);
    return 1;
  }
}

const invokedDirectly = process.argv[1]?.endsWith("cli.js") ||
  process.argv[1]?.endsWith("attoplot");
if (invokedDirectly) {
  process.exit(main(process.argv.slice(2)));
}
