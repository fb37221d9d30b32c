import { mkdirSync, renameSync, writeFileSync } from "node:fs";
import { join } from "node:path";

import { toConllu } from "./conllu.js";
import { HeuristicBackend } from "./heuristic.js";
import { canonicalLanguage, ParserBackend, RawRecord } from "./types.js";

export interface ParseCorpusOptions {
  backend?: ParserBackend;
  /** Restrict processing to these canonical language codes. */
  languages?: string[];
}

export interface Reject {
  doc_id: string;
  reason: string;
}

export interface ParseCorpusResult {
  manifestPath: string;
  rejectsPath: string | null;
  written: number;
  rejects: Reject[];
}

/** Write a file via temp + rename so readers never see partial content. */
export function atomicWrite(path: string, content: string): void {
  const tmp = `${path}.tmp`;
  writeFileSync(tmp, content, "utf-8");
  renameSync(tmp, path);
}

export function validateRecord(record: Partial<RawRecord>): string | null {
  for (const key of ["doc_id", "text", "class_label", "domain", "language"] as const) {
    if (typeof record[key] !== "string" || record[key] === "") {
      return `missing or empty field ${key}`;
    }
  }
  return null;
}

/**
 * Parse every record to a CoNLL-U file and write the dataset manifest.
 *
 * Unsupported languages and invalid records go to a rejects file and do
 * not abort the batch. The manifest's first line declares the class,
 * domain, and language sets plus parser provenance; each further line
 * references one emitted CoNLL-U file.
 */
export function parseCorpus(
  records: RawRecord[],
  outDir: string,
  options: ParseCorpusOptions = {},
): ParseCorpusResult {
  const backend = options.backend ?? new HeuristicBackend();
  const conlluDir = join(outDir, "conllu");
  mkdirSync(conlluDir, { recursive: true });

  const rejects: Reject[] = [];
  const manifestRecords: object[] = [];
  const classes = new Set<string>();
  const domains = new Set<string>();
  const languages = new Set<string>();
  const seen = new Set<string>();

  for (const record of records) {
    const invalid = validateRecord(record);
    if (invalid) {
      rejects.push({ doc_id: record.doc_id ?? "<missing>", reason: invalid });
      continue;
    }
    if (seen.has(record.doc_id)) {
      rejects.push({ doc_id: record.doc_id, reason: "duplicate doc_id" });
      continue;
    }
    const lang = canonicalLanguage(record.language);
    if (lang === undefined) {
      rejects.push({
        doc_id: record.doc_id,
        reason: `unsupported language ${record.language}`,
      });
      continue;
    }
    if (options.languages && !options.languages.includes(lang)) {
      rejects.push({
        doc_id: record.doc_id,
        reason: `language ${lang} excluded by --languages`,
      });
      continue;
    }
    const sentences = backend.parse(record.text, lang);
    const fileName = `${record.doc_id}.conllu`;
    atomicWrite(join(conlluDir, fileName), toConllu(sentences, record.doc_id));
    seen.add(record.doc_id);
    classes.add(record.class_label);
    domains.add(record.domain);
    languages.add(lang);
    manifestRecords.push({
      doc_id: record.doc_id,
      conllu: `conllu/${fileName}`,
      class_label: record.class_label,
      domain: record.domain,
      language: lang,
    });
  }

  const header = {
    classes: [...classes].sort(),
    domains: [...domains].sort(),
    languages: [...languages].sort(),
    parser: { backend: backend.name, version: backend.version },
  };
  const manifestPath = join(outDir, "manifest.jsonl");
  const lines = [JSON.stringify(header), ...manifestRecords.map((r) => JSON.stringify(r))];
  atomicWrite(manifestPath, lines.join("\n") + "\n");

  let rejectsPath: string | null = null;
  if (rejects.length > 0) {
    rejectsPath = join(outDir, "rejects.jsonl");
    atomicWrite(rejectsPath, rejects.map((r) => JSON.stringify(r)).join("\n") + "\n");
  }
  return { manifestPath, rejectsPath, written: manifestRecords.length, rejects };
}

/** Read RawRecords from a JSON-lines file body. */
export function parseRecordsJsonl(body: string): RawRecord[] {
  const records: RawRecord[] = [];
  body.split("\n").forEach((line, i) => {
    const trimmed = line.trim();
    if (!trimmed) return;
    try {
      records.push(JSON.parse(trimmed) as RawRecord);
    } catch (e) {
      throw new Error(`input line ${i + 1}: not valid JSON`);
    }
  });
  return records;
}
