#![allow(dead_code)]

use std::collections::BTreeSet;

use mner::corpus::Tag;
use mner::tensor::RngState;

pub const ALL_TAGS: [Tag; 5] = [
    Tag::BMaterial,
    Tag::IMaterial,
    Tag::BProcess,
    Tag::IProcess,
    Tag::O,
];

/// Spans as `(type, start, end)` triples, type 0 = material, 1 = process.
pub fn oracle_spans(tags: &[Tag]) -> BTreeSet<(u8, usize, usize)> {
    let kind = |t: Tag| match t {
        Tag::BMaterial | Tag::IMaterial => Some(0u8),
        Tag::BProcess | Tag::IProcess => Some(1u8),
        Tag::O => None,
    };
    let mut spans = BTreeSet::new();
    let mut open: Option<(u8, usize)> = None;
    for (i, &t) in tags.iter().enumerate() {
        let continues =
            matches!(t, Tag::IMaterial | Tag::IProcess) && open.map(|(k, _)| k) == kind(t);
        if continues {
            continue;
        }
        if let Some((k, s)) = open.take() {
            spans.insert((k, s, i));
        }
        if let Some(k) = kind(t) {
            open = Some((k, i));
        }
    }
    if let Some((k, s)) = open {
        spans.insert((k, s, tags.len()));
    }
    spans
}

/// Exact-match TP/FP/FN by set intersection.
pub fn oracle_counts(gold: &[Vec<Tag>], pred: &[Vec<Tag>]) -> (usize, usize, usize) {
    let (mut tp, mut fp, mut fn_) = (0, 0, 0);
    for (g, p) in gold.iter().zip(pred) {
        let gs = oracle_spans(g);
        let ps = oracle_spans(p);
        let hit = gs.intersection(&ps).count();
        tp += hit;
        fp += ps.len() - hit;
        fn_ += gs.len() - hit;
    }
    (tp, fp, fn_)
}

/// Random gold sequence and a prediction that copies it with some noise, so
/// matches, near misses and spurious spans all occur.
pub fn random_pair(rng: &mut RngState, max_len: usize) -> (Vec<Tag>, Vec<Tag>) {
    let n = 1 + rng.below(max_len);
    let gold: Vec<Tag> = (0..n)
        .map(|_| {
            if rng.bernoulli(0.5) {
                Tag::O
            } else {
                *rng.choose(&ALL_TAGS)
            }
        })
        .collect();
    let noise = rng.uniform();
    let pred = gold
        .iter()
        .map(|&t| {
            if rng.bernoulli(noise) {
                *rng.choose(&ALL_TAGS)
            } else {
                t
            }
        })
        .collect();
    (gold, pred)
}
