use crate::tensor::Matrix;

use super::{Sentence, Tag, TagSet, Vocabulary, PAD_ID};

/// One sentence as fixed-length id rows.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EncodedRow {
    pub word_ids: Vec<usize>,
    pub tag_ids: Vec<usize>,
    /// Number of real (non-padding) positions.
    pub length: usize,
    pub truncated: bool,
}

impl EncodedRow {
    pub fn max_len(&self) -> usize {
        self.word_ids.len()
    }

    /// Labels as a `max_len x num_tags` one-hot matrix.
    pub fn one_hot(&self, num_tags: usize) -> Matrix {
        let mut m = Matrix::zeros(self.tag_ids.len(), num_tags);
        for (t, &tag) in self.tag_ids.iter().enumerate() {
            m.set(t, tag, 1.0);
        }
        m
    }
}

/// Maps words through `vocab` (unseen words become UNK), truncates from the
/// right past `max_len`, and post-pads with PAD / tag O.
pub fn encode_and_pad(
    sentence: &Sentence,
    vocab: &Vocabulary,
    tagset: &TagSet,
    max_len: usize,
) -> EncodedRow {
    let length = sentence.len().min(max_len);
    let mut word_ids = vec![PAD_ID; max_len];
    let mut tag_ids = vec![tagset.padding_id(); max_len];
    for t in 0..length {
        word_ids[t] = vocab.id(&sentence.tokens[t]);
        tag_ids[t] = tagset.id(sentence.tags[t]);
    }
    EncodedRow {
        word_ids,
        tag_ids,
        length,
        truncated: sentence.len() > max_len,
    }
}

/// Word ids only, for inference on untagged token sequences.
pub fn encode_tokens(tokens: &[String], vocab: &Vocabulary, max_len: usize) -> EncodedRow {
    let length = tokens.len().min(max_len);
    let mut word_ids = vec![PAD_ID; max_len];
    for (t, tok) in tokens.iter().take(length).enumerate() {
        word_ids[t] = vocab.id(tok);
    }
    EncodedRow {
        word_ids,
        tag_ids: vec![Tag::PADDING.id(); max_len],
        length,
        truncated: tokens.len() > max_len,
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EncodedBatch {
    pub rows: Vec<EncodedRow>,
    pub max_len: usize,
    pub num_tags: usize,
}

impl EncodedBatch {
    pub fn encode(
        sentences: &[Sentence],
        vocab: &Vocabulary,
        tagset: &TagSet,
        max_len: usize,
    ) -> Self {
        EncodedBatch {
            rows: sentences
                .iter()
                .map(|s| encode_and_pad(s, vocab, tagset, max_len))
                .collect(),
            max_len,
            num_tags: tagset.len(),
        }
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn truncated_count(&self) -> usize {
        self.rows.iter().filter(|r| r.truncated).count()
    }

    pub fn lengths(&self) -> Vec<usize> {
        self.rows.iter().map(|r| r.length).collect()
    }
}
