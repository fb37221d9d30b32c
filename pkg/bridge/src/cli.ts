#!/usr/bin/env node
/**
 * bridge parse --input records.jsonl --out-dir out [--languages en,de]
 *              [--parser-command "python3 parse_wrapper.py"]
 */

import { readFileSync } from "node:fs";

import { parseCorpus, parseRecordsJsonl } from "./bridge.js";
import { CommandBackend } from "./command.js";
import { HeuristicBackend } from "./heuristic.js";

interface CliArgs {
  input?: string;
  outDir?: string;
  languages?: string[];
  parserCommand?: string;
}

function parseArgs(argv: string[]): CliArgs {
  const args: CliArgs = {};
  for (let i = 0; i < argv.length; i++) {
    switch (argv[i]) {
      case "--input":
        args.input = argv[++i];
        break;
      case "--out-dir":
        args.outDir = argv[++i];
        break;
      case "--languages":
        args.languages = (argv[++i] ?? "").split(",").filter((l) => l);
        break;
      case "--parser-command":
        args.parserCommand = argv[++i];
        break;
      default:
        throw new Error(`unknown option ${argv[i]}`);
    }
  }
  return args;
}

export function main(argv: string[]): number {
  const [command, ...rest] = argv;
  if (command !== "parse") {
    console.error("usage: bridge parse --input <file> --out-dir <dir> [--languages <list>]");
    return 2;
  }
  let args: CliArgs;
  try {
    args = parseArgs(rest);
  } catch (e) {
    console.error(`error: ${(e as Error).message}`);
    return 2;
  }
  if (!args.input || !args.outDir) {
    console.error("error: --input and --out-dir are required");
    return 2;
  }
  try {
    const records = parseRecordsJsonl(readFileSync(args.input, "utf-8"));
    const backend = args.parserCommand
      ? new CommandBackend(args.parserCommand)
      : new HeuristicBackend();
    const result = parseCorpus(records, args.outDir, {
      backend,
      languages: args.languages,
    });
    console.log(`wrote ${result.written} documents to ${args.outDir}`);
    console.log(`manifest: ${result.manifestPath}`);
    if (result.rejectsPath) {
      console.log(`rejects: ${result.rejects.length} (${result.rejectsPath})`);
    }
    return 0;
  } catch (e) {
    console.error(`error: ${(e as Error).message}`);
    return 1;
  }
}

process.exitCode = main(process.argv.slice(2));
