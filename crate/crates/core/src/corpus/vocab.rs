use std::collections::HashMap;

use super::{Corpus, CorpusError};

pub const PAD_ID: usize = 0;
pub const UNK_ID: usize = 1;
pub const PAD_TOKEN: &str = "<PAD>";
pub const UNK_TOKEN: &str = "<UNK>";

/// Word/id mapping. Ids 0 and 1 are reserved for padding and unknown words;
/// corpus words get ids from 2 upward in first-occurrence order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Vocabulary {
    words: Vec<String>,
    index: HashMap<String, usize>,
}

impl Vocabulary {
    pub fn build(corpus: &Corpus) -> Result<Self, CorpusError> {
        if corpus.is_empty() {
            return Err(CorpusError::Empty);
        }
        Ok(Self::from_words(
            corpus
                .sentences
                .iter()
                .flat_map(|s| s.tokens.iter().cloned()),
        ))
    }

    /// Builds a vocabulary from non-reserved words; duplicates keep their first id.
    pub fn from_words<I: IntoIterator<Item = String>>(words: I) -> Self {
        let mut v = Vocabulary {
            words: vec![PAD_TOKEN.to_string(), UNK_TOKEN.to_string()],
            index: HashMap::new(),
        };
        for w in words {
            if !v.index.contains_key(&w) {
                v.index.insert(w.clone(), v.words.len());
                v.words.push(w);
            }
        }
        v
    }

    /// Total ids including the two reserved ones.
    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Distinct corpus words, excluding reserved ids.
    pub fn num_words(&self) -> usize {
        self.words.len() - 2
    }

    /// Id of `word`, or [`UNK_ID`] for words not seen at build time. Case-sensitive.
    pub fn id(&self, word: &str) -> usize {
        self.index.get(word).copied().unwrap_or(UNK_ID)
    }

    pub fn contains(&self, word: &str) -> bool {
        self.index.contains_key(word)
    }

    pub fn word(&self, id: usize) -> Option<&str> {
        self.words.get(id).map(String::as_str)
    }

    /// Non-reserved words in id order.
    pub fn corpus_words(&self) -> &[String] {
        &self.words[2..]
    }
}
