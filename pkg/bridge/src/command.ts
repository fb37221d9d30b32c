/**
 * External-parser backend: pipes a document's text to a user-supplied
 * command (e.g. a small spaCy wrapper script) and reads CoNLL-U back on
 * stdout. The command receives the language code as its final argument.
 */

import { spawnSync } from "node:child_process";

import { ParsedSentence, ParserBackend } from "./types.js";

export class CommandBackend implements ParserBackend {
  readonly name: string;
  readonly version = "external";
  private readonly argv: string[];

  constructor(command: string) {
    this.argv = command.split(/\s+/).filter((a) => a.length > 0);
    if (this.argv.length === 0) {
      throw new Error("empty parser command");
    }
    this.name = `command:${this.argv[0]}`;
  }

  parse(text: string, language: string): ParsedSentence[] {
    const result = spawnSync(this.argv[0], [...this.argv.slice(1), language], {
      input: text,
      encoding: "utf-8",
      maxBuffer: 64 * 1024 * 1024,
    });
    if (result.status !== 0) {
      throw new Error(
        `parser command failed (exit ${result.status}): ${result.stderr}`,
      );
    }
    return parseConlluOutput(result.stdout);
  }
}

/** Minimal CoNLL-U reader for the command backend's output. */
export function parseConlluOutput(output: string): ParsedSentence[] {
  const sentences: ParsedSentence[] = [];
  let current: ParsedSentence = [];
  for (const line of output.split("\n")) {
    if (line.trim() === "") {
      if (current.length > 0) sentences.push(current);
      current = [];
      continue;
    }
    if (line.startsWith("#")) continue;
    const cols = line.split("\t");
    if (cols.length !== 10) {
      throw new Error(`parser command emitted a malformed line: ${line}`);
    }
    if (cols[0].includes("-") || cols[0].includes(".")) continue;
    current.push({
      form: cols[1],
      head: Number(cols[6]) || 0,
      deprel: cols[7],
      upos: cols[3],
    });
  }
  if (current.length > 0) sentences.push(current);
  return sentences;
}
