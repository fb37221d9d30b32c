import { ParsedSentence } from "./types.js";

/** Serialize annotated sentences as 10-column CoNLL-U. */
export function toConllu(sentences: ParsedSentence[], docId: string): string {
  const lines: string[] = [`# newdoc id = ${docId}`];
  sentences.forEach((sentence, si) => {
    lines.push(`# sent_id = ${docId}-s${si + 1}`);
    sentence.forEach((tok, ti) => {
      lines.push(
        [
          String(ti + 1),
          tok.form,
          tok.form.toLowerCase(),
          tok.upos,
          "_",
          "_",
          String(tok.head),
          tok.deprel,
          "_",
          "_",
        ].join("\t"),
      );
    });
    lines.push("");
  });
  return lines.join("\n") + "\n";
}
