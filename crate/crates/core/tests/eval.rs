//! Span decoding and entity metrics against a brute-force oracle.

mod common;

use common::{oracle_counts, oracle_spans, random_pair};
use mner::corpus::{generate_synthetic_corpus, parse_iob, SynthConfig, Tag};
use mner::eval::{
    comparison_report, decode_entities, decode_tag_strings, entity_prf, evaluate_baseline,
    f1_score, token_accuracy, ComparisonTable, MatchMode, MostFrequentTag,
};
use mner::tensor::RngState;

#[test]
fn decoder_agrees_with_oracle() {
    let mut rng = RngState::new(17);
    for _ in 0..2000 {
        let (tags, _) = random_pair(&mut rng, 30);
        let decoded = decode_entities(&tags);
        assert!(decoded.windows(2).all(|w| w[0].end <= w[1].start));
        let ours: std::collections::BTreeSet<(u8, usize, usize)> = decoded
            .iter()
            .map(|s| {
                (
                    u8::from(s.entity_type != mner::corpus::EntityType::Material),
                    s.start,
                    s.end,
                )
            })
            .collect();
        assert_eq!(ours, oracle_spans(&tags), "{tags:?}");
        for s in &decoded {
            assert!(tags[s.start..s.end].iter().all(|&t| t != Tag::O));
        }
    }
}

#[test]
fn strict_counts_equal_oracle() {
    let mut rng = RngState::new(23);
    let pairs: Vec<_> = (0..500).map(|_| random_pair(&mut rng, 40)).collect();
    let gold: Vec<_> = pairs.iter().map(|p| p.0.clone()).collect();
    let pred: Vec<_> = pairs.iter().map(|p| p.1.clone()).collect();
    let r = entity_prf("m", &gold, &pred, MatchMode::Strict).unwrap();
    let (tp, fp, fn_) = oracle_counts(&gold, &pred);
    assert_eq!(
        (
            r.counts.overall.tp,
            r.counts.overall.fp,
            r.counts.overall.fn_
        ),
        (tp, fp, fn_)
    );
    let per_type_sum: usize = r.counts.per_type.values().map(|c| c.tp).sum();
    assert_eq!(per_type_sum, tp);
}

#[test]
fn metrics_are_permutation_invariant() {
    let mut rng = RngState::new(29);
    let pairs: Vec<_> = (0..100).map(|_| random_pair(&mut rng, 20)).collect();
    let score = |ps: &[(Vec<Tag>, Vec<Tag>)]| {
        let g: Vec<_> = ps.iter().map(|p| p.0.clone()).collect();
        let p: Vec<_> = ps.iter().map(|p| p.1.clone()).collect();
        entity_prf("m", &g, &p, MatchMode::Strict).unwrap().counts
    };
    let mut shuffled = pairs.clone();
    rng.shuffle(&mut shuffled);
    assert_eq!(score(&pairs), score(&shuffled));
}

#[test]
fn decode_examples() {
    let spans = |t: &[&str]| -> Vec<(usize, usize)> {
        decode_tag_strings(t)
            .unwrap()
            .iter()
            .map(|s| (s.start, s.end))
            .collect()
    };
    assert_eq!(spans(&["B-material", "I-material", "O"]), vec![(0, 2)]);
    assert_eq!(spans(&["O", "I-process"]), vec![(1, 2)]);
    assert_eq!(spans(&["B-material", "B-material"]), vec![(0, 1), (1, 2)]);
    assert_eq!(spans(&["B-material", "I-process"]), vec![(0, 1), (1, 2)]);
    assert!(decode_tag_strings(&["B-alloy"]).is_err());
}

#[test]
fn boundary_strictness_and_first_token_mode() {
    let gold = vec![vec![Tag::BMaterial, Tag::IMaterial]];
    let pred = vec![vec![Tag::BMaterial, Tag::O]];
    let r = entity_prf("m", &gold, &pred, MatchMode::Strict).unwrap();
    assert_eq!(
        (
            r.counts.overall.tp,
            r.counts.overall.fp,
            r.counts.overall.fn_
        ),
        (0, 1, 1)
    );
    assert_eq!(r.overall.f1, 0.0);
    let r = entity_prf("m", &gold, &pred, MatchMode::FirstToken).unwrap();
    assert_eq!(r.overall.f1, 1.0);
    assert!(entity_prf("m", &gold, &[], MatchMode::Strict).is_err());
}

#[test]
fn f1_bounds_over_count_grid() {
    for tp in 0..12usize {
        for fp in 0..12usize {
            for fn_ in 0..12usize {
                let p = if tp + fp == 0 {
                    0.0
                } else {
                    tp as f64 / (tp + fp) as f64
                };
                let r = if tp + fn_ == 0 {
                    0.0
                } else {
                    tp as f64 / (tp + fn_) as f64
                };
                let f = f1_score(p, r);
                assert_eq!(f, f1_score(r, p));
                assert!((0.0..=1.0).contains(&f));
                assert!(f <= p.max(r) + 1e-15);
            }
        }
    }
    assert_eq!(f1_score(0.0, 0.0), 0.0);
}

#[test]
fn token_accuracy_examples() {
    let g = vec![vec![0, 1, 4, 4, 4, 4]];
    let p = vec![vec![0, 2, 4, 4, 0, 0]];
    assert_eq!(token_accuracy(&g, &p, &[4], true).unwrap(), 0.75);
    assert_eq!(token_accuracy(&g, &p, &[4], false).unwrap(), 0.5);
    assert_eq!(
        token_accuracy(&[vec![4, 4]], &[vec![4, 4]], &[2], true).unwrap(),
        1.0
    );
    assert!(token_accuracy(&g, &[vec![0]], &[4], true).is_err());
}

#[test]
fn baseline_rules() {
    let train =
        parse_iob("carbon\tB-material\nis\tO\n\ncarbon\tB-material\n\nx\tO\n\nx\tB-process\n")
            .unwrap();
    let b = MostFrequentTag::train(&train).unwrap();
    assert_eq!(b.tag("carbon"), Tag::BMaterial);
    assert_eq!(b.tag("unseen"), Tag::O);
    assert_eq!(b.tag("x"), Tag::BProcess);
}

#[test]
fn baseline_is_near_perfect_on_unambiguous_synthetic_text() {
    let corpus = generate_synthetic_corpus(5, &SynthConfig::with_sentences(300));
    let train = corpus.subset(&(0..250).collect::<Vec<_>>());
    let test = corpus.subset(&(250..300).collect::<Vec<_>>());
    let b = MostFrequentTag::train(&train).unwrap();
    let r = evaluate_baseline(&b, &test, "mft", MatchMode::Strict).unwrap();
    assert!(r.overall.f1 > 0.9, "{}", r.overall.f1);
}

#[test]
fn comparison_table_orders_and_round_trips() {
    let make = |name: &str, tags: Vec<Tag>| {
        entity_prf(
            name,
            &[vec![Tag::BMaterial, Tag::O, Tag::BProcess]],
            &[tags],
            MatchMode::Strict,
        )
        .unwrap()
    };
    let low = make("low", vec![Tag::BProcess, Tag::O, Tag::O]);
    let high = make("high", vec![Tag::BMaterial, Tag::O, Tag::BProcess]);
    let table = comparison_report(&[low, high]).unwrap();
    assert_eq!(table.rows[0].model, "high");
    let parsed = ComparisonTable::parse_tsv(&table.render_tsv()).unwrap();
    assert_eq!(parsed.rows.len(), 2);
    assert_eq!(parsed.render_tsv(), table.render_tsv());
    assert!(table.render_text().contains("high"));
    assert!(comparison_report(&[]).is_err());
}
