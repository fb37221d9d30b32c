/** One raw corpus record, as found in the input JSON-lines file. */
export interface RawRecord {
  doc_id: string;
  text: string;
  class_label: string;
  domain: string;
  language: string;
}

export interface ParsedToken {
  form: string;
  head: number; // 0 for the root
  deprel: string;
  upos: string;
}

export type ParsedSentence = ParsedToken[];

/** A parser turns one document's text into dependency-annotated sentences. */
export interface ParserBackend {
  readonly name: string;
  readonly version: string;
  parse(text: string, language: string): ParsedSentence[];
}

/** Languages with a parser available, keyed by canonical name. */
export const SUPPORTED_LANGUAGES: ReadonlyMap<string, string> = new Map([
  ["english", "en"],
  ["en", "en"],
  ["chinese", "zh"],
  ["zh", "zh"],
  ["german", "de"],
  ["de", "de"],
  ["italian", "it"],
  ["it", "it"],
  ["russian", "ru"],
  ["ru", "ru"],
]);

export function canonicalLanguage(language: string): string | undefined {
  return SUPPORTED_LANGUAGES.get(language.trim().toLowerCase());
}
