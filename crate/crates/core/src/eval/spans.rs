use serde::{Deserialize, Serialize};

use crate::corpus::{EntityType, Tag};

use super::EvalError;

/// Typed token range `[start, end)` within one sentence.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct EntitySpan {
    pub entity_type: EntityType,
    pub start: usize,
    pub end: usize,
}

impl EntitySpan {
    pub fn new(entity_type: EntityType, start: usize, end: usize) -> Self {
        EntitySpan {
            entity_type,
            start,
            end,
        }
    }

    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.end == self.start
    }
}

/// Decodes IOB tags into spans. `B-X` opens a span, `I-X` extends an open
/// span of type X, `O` closes. An `I-X` with no open X span starts a new one.
pub fn decode_entities(tags: &[Tag]) -> Vec<EntitySpan> {
    let mut spans = Vec::new();
    let mut open: Option<(EntityType, usize)> = None;
    for (i, &tag) in tags.iter().enumerate() {
        let ty = tag.entity_type();
        let continues = !tag.is_begin() && matches!((open, ty), (Some((o, _)), Some(t)) if o == t);
        if continues {
            continue;
        }
        if let Some((o, start)) = open.take() {
            spans.push(EntitySpan::new(o, start, i));
        }
        if let Some(t) = ty {
            open = Some((t, i));
        }
    }
    if let Some((o, start)) = open {
        spans.push(EntitySpan::new(o, start, tags.len()));
    }
    spans
}

/// Like [`decode_entities`] over tag strings; unknown labels are an error.
pub fn decode_tag_strings<S: AsRef<str>>(tags: &[S]) -> Result<Vec<EntitySpan>, EvalError> {
    let parsed = tags
        .iter()
        .map(|t| {
            t.as_ref()
                .parse::<Tag>()
                .map_err(|e| EvalError::Tag(e.to_string()))
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(decode_entities(&parsed))
}
