/** Usage: node dist/cli.js <figure-id|all> <input-dir> <output-dir>
 *
 * Reads the sweep/cdf CSVs produced by the aoinet CLI from the input
 * directory and writes one SVG per figure into the output directory.
 * Nothing is written when rendering fails.
 */

import { mkdirSync, readFileSync, writeFileSync } from "node:fs";
import { join } from "node:path";

import { FIGURE_IDS, FigureId, SPECS, renderFigure } from "./figures.js";

function main(argv: string[]): number {
  if (argv.length !== 3) {
    process.stderr.write(
      "usage: cli.js <fig4|fig5|fig6|fig7|fig8|fig9|all> <input-dir> <output-dir>\n");
    return 2;
  }
  const [which, inputDir, outputDir] = argv;
  const ids: FigureId[] = which === "all"
    ? [...FIGURE_IDS]
    : [which as FigureId];
  if (ids.some((id) => !FIGURE_IDS.includes(id))) {
    process.stderr.write(`unknown figure id '${which}'\n`);
    return 2;
  }
  mkdirSync(outputDir, { recursive: true });
  let failures = 0;
  for (const id of ids) {
    const inPath = join(inputDir, SPECS[id].input);
    try {
      const svg = renderFigure(id, readFileSync(inPath, "utf-8"));
      const outPath = join(outputDir, `${id}.svg`);
      writeFileSync(outPath, svg);
      process.stdout.write(`${id}: wrote ${outPath}\n`);
    } catch (err) {
      failures += 1;
      process.stderr.write(`${id}: ${(err as Error).message}\n`);
    }
  }
  return failures === 0 ? 0 : 1;
}

process.exitCode = main(process.argv.slice(2));
