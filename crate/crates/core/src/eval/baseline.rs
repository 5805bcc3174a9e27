use std::collections::HashMap;

use crate::corpus::{Corpus, Tag};

use super::EvalError;

/// Tags each word with the label it carried most often in training.
/// Unseen words get `O`; frequency ties go to the lower tag id.
#[derive(Clone, Debug)]
pub struct MostFrequentTag {
    table: HashMap<String, Tag>,
}

impl MostFrequentTag {
    pub fn train(corpus: &Corpus) -> Result<Self, EvalError> {
        if corpus.is_empty() {
            return Err(EvalError::Argument(
                "baseline needs a non-empty training corpus".into(),
            ));
        }
        let mut counts: HashMap<&str, [usize; 5]> = HashMap::new();
        for s in &corpus.sentences {
            for (w, t) in s.tokens.iter().zip(&s.tags) {
                counts.entry(w.as_str()).or_default()[t.id()] += 1;
            }
        }
        let table = counts
            .into_iter()
            .map(|(w, c)| {
                let mut best = 0;
                for id in 1..c.len() {
                    if c[id] > c[best] {
                        best = id;
                    }
                }
                (w.to_string(), Tag::from_id(best).unwrap())
            })
            .collect();
        Ok(MostFrequentTag { table })
    }

    pub fn tag(&self, word: &str) -> Tag {
        self.table.get(word).copied().unwrap_or(Tag::O)
    }

    pub fn predict(&self, tokens: &[String]) -> Vec<Tag> {
        tokens.iter().map(|w| self.tag(w)).collect()
    }
}
