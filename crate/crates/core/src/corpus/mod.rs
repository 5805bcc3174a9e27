//! IOB corpus model, reader/writer, vocabularies, padding, splits, statistics
//! and the synthetic corpus generator.

mod encode;
mod iob;
mod split;
mod stats;
mod synth;
mod tags;
mod vocab;

pub use encode::{encode_and_pad, encode_tokens, EncodedBatch, EncodedRow};
pub use iob::{parse_iob, serialize_iob};
pub use split::{kfold, split, Fold};
pub use stats::{dataset_stats, DatasetStats};
pub use synth::{ambiguous_words, generate_synthetic_corpus, SynthConfig};
pub use tags::{EntityType, Tag, TagSet, UnknownTag};
pub use vocab::{Vocabulary, PAD_ID, PAD_TOKEN, UNK_ID, UNK_TOKEN};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CorpusError {
    #[error("line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("corpus is empty")]
    Empty,
    #[error("invalid sentence: {0}")]
    InvalidSentence(String),
    #[error("{0}")]
    Argument(String),
}

/// A tokenized sentence with one IOB tag per token.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Sentence {
    pub tokens: Vec<String>,
    pub tags: Vec<Tag>,
    pub doc_id: Option<String>,
}

impl Sentence {
    pub fn new(tokens: Vec<String>, tags: Vec<Tag>) -> Result<Self, CorpusError> {
        let s = Sentence {
            tokens,
            tags,
            doc_id: None,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn with_doc(mut self, doc_id: impl Into<String>) -> Self {
        self.doc_id = Some(doc_id.into());
        self
    }

    pub fn validate(&self) -> Result<(), CorpusError> {
        if self.tokens.is_empty() {
            return Err(CorpusError::InvalidSentence("no tokens".into()));
        }
        if self.tokens.len() != self.tags.len() {
            return Err(CorpusError::InvalidSentence(format!(
                "{} tokens but {} tags",
                self.tokens.len(),
                self.tags.len()
            )));
        }
        if let Some(t) = self
            .tokens
            .iter()
            .find(|t| t.is_empty() || t.contains(['\t', '\n', '\r']))
        {
            return Err(CorpusError::InvalidSentence(format!("bad token {t:?}")));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Corpus {
    pub sentences: Vec<Sentence>,
}

impl Corpus {
    pub fn new(sentences: Vec<Sentence>) -> Self {
        Corpus { sentences }
    }

    pub fn len(&self) -> usize {
        self.sentences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sentences.is_empty()
    }

    pub fn subset(&self, indices: &[usize]) -> Corpus {
        Corpus::new(indices.iter().map(|&i| self.sentences[i].clone()).collect())
    }

    pub fn token_count(&self) -> usize {
        self.sentences.iter().map(Sentence::len).sum()
    }
}
