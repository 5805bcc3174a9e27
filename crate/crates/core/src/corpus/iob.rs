//! CoNLL-style IOB reader and writer.
//!
//! Layout: one `token<TAB>tag` pair per line, a blank line between sentences,
//! and optional `# doc:<id>` lines that set the document id for the sentences
//! that follow (`# doc:` with an empty id clears it). Other lines starting with
//! `#` and containing no TAB are comments.

use super::{Corpus, CorpusError, Sentence, Tag};

const DOC_PREFIX: &str = "# doc:";

pub fn parse_iob(text: &str) -> Result<Corpus, CorpusError> {
    let text = text.strip_prefix('\u{feff}').unwrap_or(text);
    let mut sentences = Vec::new();
    let mut doc: Option<String> = None;
    let mut tokens = Vec::new();
    let mut tags = Vec::new();
    let mut sentence_doc: Option<String> = None;

    let mut flush = |tokens: &mut Vec<String>, tags: &mut Vec<Tag>, sdoc: &Option<String>| {
        if !tokens.is_empty() {
            sentences.push(Sentence {
                tokens: std::mem::take(tokens),
                tags: std::mem::take(tags),
                doc_id: sdoc.clone(),
            });
        }
    };

    for (idx, raw) in text.split('\n').enumerate() {
        let line_no = idx + 1;
        let line = raw.strip_suffix('\r').unwrap_or(raw);
        if line.trim().is_empty() {
            flush(&mut tokens, &mut tags, &sentence_doc);
            continue;
        }
        if !line.contains('\t') && line.starts_with('#') {
            if let Some(id) = line.strip_prefix(DOC_PREFIX) {
                flush(&mut tokens, &mut tags, &sentence_doc);
                let id = id.trim();
                doc = (!id.is_empty()).then(|| id.to_string());
            }
            continue;
        }
        let mut fields = line.split('\t');
        let (token, tag) = match (fields.next(), fields.next(), fields.next()) {
            (Some(tok), Some(tag), None) => (tok, tag),
            (_, None, _) => {
                return Err(CorpusError::Parse {
                    line: line_no,
                    column: 1,
                    message: "expected token<TAB>tag".into(),
                })
            }
            _ => {
                return Err(CorpusError::Parse {
                    line: line_no,
                    column: 1,
                    message: "more than one TAB on line".into(),
                })
            }
        };
        if token.is_empty() {
            return Err(CorpusError::Parse {
                line: line_no,
                column: 1,
                message: "empty token".into(),
            });
        }
        let tag: Tag = tag
            .parse()
            .map_err(|e: super::tags::UnknownTag| CorpusError::Parse {
                line: line_no,
                column: token.chars().count() + 2,
                message: e.to_string(),
            })?;
        if tokens.is_empty() {
            sentence_doc = doc.clone();
        }
        tokens.push(token.to_string());
        tags.push(tag);
    }
    flush(&mut tokens, &mut tags, &sentence_doc);

    if sentences.is_empty() {
        return Err(CorpusError::Empty);
    }
    Ok(Corpus { sentences })
}

/// Writes a corpus in the layout accepted by [`parse_iob`].
pub fn serialize_iob(corpus: &Corpus) -> String {
    let mut out = String::new();
    let mut current: Option<&str> = None;
    for s in &corpus.sentences {
        let doc = s.doc_id.as_deref();
        if doc != current {
            out.push_str(DOC_PREFIX);
            out.push_str(doc.unwrap_or(""));
            out.push('\n');
            current = doc;
        }
        for (tok, tag) in s.tokens.iter().zip(&s.tags) {
            out.push_str(tok);
            out.push('\t');
            out.push_str(tag.as_str());
            out.push('\n');
        }
        out.push('\n');
    }
    out
}
