use crate::corpus::{encode_tokens, Tag, TagSet, Vocabulary};
use crate::tensor::argmax;

use super::network::infer_sentence;
use super::{ModelConfig, ModelError, ModelParams};

/// Tags each token with the arg-max label (ties to the lowest tag id).
///
/// Sentences longer than `max_len` are tagged in consecutive windows of
/// `max_len` tokens, so every input token receives a tag.
pub fn predict_tags(
    params: &ModelParams,
    cfg: &ModelConfig,
    tokens: &[String],
    vocab: &Vocabulary,
    tagset: &TagSet,
) -> Result<Vec<(String, Tag)>, ModelError> {
    let mut out = Vec::with_capacity(tokens.len());
    for window in tokens.chunks(cfg.max_len) {
        let row = encode_tokens(window, vocab, cfg.max_len);
        let probs = infer_sentence(params, &row.word_ids)?;
        for (t, tok) in window.iter().enumerate() {
            let id = argmax(probs.row(t));
            let tag = tagset
                .tag(id)
                .ok_or_else(|| ModelError::Shape(format!("tag id {id} out of range")))?;
            out.push((tok.clone(), tag));
        }
    }
    Ok(out)
}
