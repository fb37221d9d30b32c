/**
 * Built-in deterministic annotator used when no external parser command is
 * configured. It segments sentences, tokenizes per language, and assigns
 * dependency labels from each language's label inventory by a stable hash
 * of the token. Every token always receives a non-empty deprel, which is
 * the contract downstream consumers rely on; the labels themselves are
 * placeholders, not linguistic analyses. Hook up a real pretrained parser
 * through the command backend for research use.
 */

import { ParsedSentence, ParsedToken, ParserBackend } from "./types.js";

const SENTENCE_END = /([.!?。！？]+)/;
const TRAILING_PUNCT = /^(.*?)([,;:、，；："')\]]+)$/;
const LEADING_PUNCT = /^(["'(\[]+)(.*)$/;

/** Content-word label pools per language, mirroring the label schemes the
 * corresponding pretrained models emit (UD for most, TIGER-style for de). */
const LABELS: Record<string, string[]> = {
  en: ["nsubj", "dobj", "det", "amod", "prep", "pobj", "advmod", "attr", "dep"],
  zh: ["nsubj", "dobj", "advmod", "discourse", "cc", "nmod", "dep"],
  de: ["sb", "nk", "mo", "cd", "par", "cp", "oa"],
  it: ["nsubj", "obj", "det", "det:poss", "amod", "obl", "parataxis"],
  ru: ["nsubj", "obj", "nmod", "amod", "ccomp", "det", "dep"],
};

function hashString(s: string): number {
  let h = 2166136261;
  for (let i = 0; i < s.length; i++) {
    h ^= s.charCodeAt(i);
    h = Math.imul(h, 16777619);
  }
  return h >>> 0;
}

function isPunct(tok: string): boolean {
  return /^[\p{P}\p{S}]+$/u.test(tok);
}

export function splitSentences(text: string): string[] {
  const parts = text.split(SENTENCE_END);
  const sentences: string[] = [];
  for (let i = 0; i < parts.length; i += 2) {
    const body = parts[i].trim();
    const terminator = parts[i + 1] ?? "";
    if (body.length > 0) {
      sentences.push((body + terminator).trim());
    } else if (terminator && sentences.length > 0) {
      sentences[sentences.length - 1] += terminator;
    }
  }
  return sentences;
}

export function tokenize(sentence: string, language: string): string[] {
  if (language === "zh") {
    // no whitespace segmentation: one token per character, punctuation kept
    return Array.from(sentence.replace(/\s+/g, "")).filter((c) => c.length > 0);
  }
  const tokens: string[] = [];
  for (const chunk of sentence.split(/\s+/)) {
    if (!chunk) continue;
    let rest = chunk;
    const lead = rest.match(LEADING_PUNCT);
    const leading: string[] = [];
    if (lead && lead[2]) {
      leading.push(...Array.from(lead[1]));
      rest = lead[2];
    }
    const trailing: string[] = [];
    let m = rest.match(TRAILING_PUNCT);
    while (m && m[1]) {
      trailing.unshift(...Array.from(m[2]));
      rest = m[1];
      m = rest.match(TRAILING_PUNCT);
    }
    tokens.push(...leading);
    if (rest) tokens.push(rest);
    tokens.push(...trailing);
  }
  // Split the sentence terminator off the final token so it becomes its
  // own punct token; periods elsewhere (abbreviations, pre-quote) stay put.
  const last = tokens[tokens.length - 1];
  const term = last?.match(/^(.+?)([.!?]+)$/);
  if (term) {
    tokens.splice(tokens.length - 1, 1, term[1], ...Array.from(term[2]));
  }
  return tokens;
}

function annotateSentence(tokens: string[], language: string): ParsedSentence {
  const pool = LABELS[language] ?? LABELS.en;
  let rootIndex = tokens.findIndex((t) => !isPunct(t));
  if (rootIndex < 0) rootIndex = 0;
  return tokens.map((form, i): ParsedToken => {
    if (i === rootIndex) {
      return { form, head: 0, deprel: "ROOT", upos: "X" };
    }
    if (isPunct(form)) {
      return { form, head: rootIndex + 1, deprel: "punct", upos: "PUNCT" };
    }
    const label = pool[hashString(form) % pool.length];
    return { form, head: rootIndex + 1, deprel: label, upos: "X" };
  });
}

export class HeuristicBackend implements ParserBackend {
  readonly name = "heuristic";
  readonly version = "1";

  parse(text: string, language: string): ParsedSentence[] {
    return splitSentences(text)
      .map((s) => annotateSentence(tokenize(s, language), language))
      .filter((s) => s.length > 0);
  }
}
