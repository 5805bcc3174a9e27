//! Forward pass against a scalar re-implementation, bundle persistence and
//! parameter bookkeeping.

use mner::corpus::{generate_synthetic_corpus, parse_iob, SynthConfig};
use mner::model::{infer_sentence, LstmParams, ModelBundle, ModelConfig, ModelParams};
use mner::tensor::{Matrix, RngState};
use mner::training::{train, TrainConfig};

fn sig(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// One LSTM direction written with explicit loops; gate blocks are laid out
/// input, forget, candidate, output along the columns.
#[allow(clippy::needless_range_loop)]
fn scalar_direction(p: &LstmParams, xs: &[Vec<f64>], reverse: bool) -> Vec<Vec<f64>> {
    let u = p.u.rows();
    let d = p.w.rows();
    let n = xs.len();
    let mut h = vec![0.0; u];
    let mut c = vec![0.0; u];
    let mut out = vec![vec![0.0; u]; n];
    let order: Vec<usize> = if reverse {
        (0..n).rev().collect()
    } else {
        (0..n).collect()
    };
    for t in order {
        let mut z = vec![0.0; 4 * u];
        for (j, zj) in z.iter_mut().enumerate() {
            let mut acc = p.b.get(0, j);
            for k in 0..d {
                acc += xs[t][k] * p.w.get(k, j);
            }
            for k in 0..u {
                acc += h[k] * p.u.get(k, j);
            }
            *zj = acc;
        }
        let mut hn = vec![0.0; u];
        for k in 0..u {
            let i = sig(z[k]);
            let f = sig(z[u + k]);
            let g = z[2 * u + k].tanh();
            let o = sig(z[3 * u + k]);
            c[k] = f * c[k] + i * g;
            hn[k] = o * c[k].tanh();
        }
        h = hn;
        out[t] = h.clone();
    }
    out
}

fn scalar_forward(p: &ModelParams, ids: &[usize]) -> Vec<Vec<f64>> {
    let xs: Vec<Vec<f64>> = ids.iter().map(|&id| p.embedding.row(id).to_vec()).collect();
    let hf = scalar_direction(&p.forward, &xs, false);
    let hb = scalar_direction(&p.backward, &xs, true);
    let tags = p.dense_b.cols();
    ids.iter()
        .enumerate()
        .map(|(t, _)| {
            let h: Vec<f64> = hf[t].iter().chain(&hb[t]).copied().collect();
            let logits: Vec<f64> = (0..tags)
                .map(|j| {
                    p.dense_b.get(0, j)
                        + h.iter()
                            .enumerate()
                            .map(|(k, v)| v * p.dense_w.get(k, j))
                            .sum::<f64>()
                })
                .collect();
            let m = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let e: Vec<f64> = logits.iter().map(|l| (l - m).exp()).collect();
            let s: f64 = e.iter().sum();
            e.into_iter().map(|v| v / s).collect()
        })
        .collect()
}

fn perturbed(cfg: &ModelConfig, seed: u64) -> ModelParams {
    let mut p = ModelParams::init(cfg).unwrap();
    let mut rng = RngState::new(seed);
    for t in p.tensors_mut() {
        for v in t.as_mut_slice() {
            *v += rng.uniform_range(-0.5, 0.5);
        }
    }
    p
}

#[test]
fn forward_matches_scalar_oracle_on_four_tokens() {
    let cfg = ModelConfig {
        max_len: 4,
        embedding_dim: 3,
        lstm_units: 2,
        num_words: 6,
        ..Default::default()
    };
    let p = perturbed(&cfg, 5);
    for ids in [[2, 3, 4, 5], [5, 1, 0, 0], [2, 2, 2, 2]] {
        let probs = infer_sentence(&p, &ids).unwrap();
        let oracle = scalar_forward(&p, &ids);
        for (t, row) in oracle.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                assert!(
                    (probs.get(t, j) - v).abs() < 1e-12,
                    "t={t} j={j}: {} vs {v}",
                    probs.get(t, j)
                );
            }
            assert!((probs.row(t).iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }
}

#[test]
fn hand_computed_single_unit_step() {
    let cfg = ModelConfig {
        max_len: 1,
        embedding_dim: 1,
        lstm_units: 1,
        num_words: 3,
        ..Default::default()
    };
    let mut p = ModelParams::zeros(&cfg);
    p.embedding.set(2, 0, 1.0);
    for dir in [&mut p.forward, &mut p.backward] {
        dir.w = Matrix::from_vec(1, 4, vec![0.5, 0.0, 1.0, 0.25]).unwrap();
        dir.b = Matrix::zeros(1, 4);
    }
    p.dense_w = Matrix::zeros(2, 5);
    p.dense_w.set(0, 0, 1.0);
    p.dense_w.set(1, 0, 1.0);
    let probs = infer_sentence(&p, &[2]).unwrap();
    let h = sig(0.25) * (sig(0.5) * 1.0f64.tanh()).tanh();
    let e = (2.0 * h).exp();
    assert!((probs.get(0, 0) - e / (e + 4.0)).abs() < 1e-14);
    assert!((probs.get(0, 4) - 1.0 / (e + 4.0)).abs() < 1e-14);
}

#[test]
fn param_count_is_closed_form() {
    let cfg = ModelConfig {
        num_words: 1000,
        ..Default::default()
    };
    let p = ModelParams::init(&cfg).unwrap();
    let summed: usize = p.tensors().iter().map(|t| t.len()).sum();
    assert_eq!(p.param_count(), summed);
    assert_eq!(cfg.param_count(), summed);
    let (v, d, u, k) = (1000, 90, 200, 5);
    assert_eq!(
        summed,
        v * d + 2 * (4 * u * (d + u) + 4 * u) + 2 * u * k + k
    );
}

#[test]
fn init_is_seeded_and_pad_row_is_zero() {
    let cfg = ModelConfig {
        max_len: 6,
        embedding_dim: 4,
        lstm_units: 3,
        num_words: 10,
        seed: 11,
        ..Default::default()
    };
    let a = ModelParams::init(&cfg).unwrap();
    assert_eq!(a, ModelParams::init(&cfg).unwrap());
    assert!(a.embedding.row(0).iter().all(|&v| v == 0.0));
    for k in 0..3 {
        assert_eq!(a.forward.b.get(0, 3 + k), 1.0);
        assert_eq!(a.backward.b.get(0, 3 + k), 1.0);
    }
    let b = ModelParams::init(&ModelConfig { seed: 12, ..cfg }).unwrap();
    assert_ne!(a, b);
}

#[test]
fn saved_bundle_predicts_bit_identically() {
    let corpus = generate_synthetic_corpus(4, &SynthConfig::with_sentences(30));
    let mc = ModelConfig {
        max_len: 12,
        embedding_dim: 8,
        lstm_units: 6,
        ..Default::default()
    };
    let tc = TrainConfig {
        max_epochs: 2,
        ..Default::default()
    };
    let (bundle, _) = train(&mc, &tc, &corpus).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.bundle");
    bundle.save(&path).unwrap();
    let loaded = ModelBundle::load(&path).unwrap();
    assert_eq!(loaded.to_bytes(), bundle.to_bytes());
    for s in &corpus.sentences {
        let ids: Vec<usize> = s.tokens.iter().map(|t| bundle.vocab.id(t)).collect();
        let a = infer_sentence(&bundle.params, &pad(&ids, 12)).unwrap();
        let b = infer_sentence(&loaded.params, &pad(&ids, 12)).unwrap();
        assert_eq!(a.as_slice(), b.as_slice());
        assert_eq!(
            bundle.predict(&s.tokens).unwrap(),
            loaded.predict(&s.tokens).unwrap()
        );
    }
}

fn pad(ids: &[usize], n: usize) -> Vec<usize> {
    let mut v: Vec<usize> = ids.iter().copied().take(n).collect();
    v.resize(n, 0);
    v
}

#[test]
fn long_sentences_are_tagged_in_windows() {
    let corpus = parse_iob("carbon\tB-material\nis\tO\n").unwrap();
    let mc = ModelConfig {
        max_len: 3,
        embedding_dim: 2,
        lstm_units: 2,
        ..Default::default()
    };
    let tc = TrainConfig {
        max_epochs: 0,
        validation_split: 0.0,
        ..Default::default()
    };
    let (bundle, _) = train(&mc, &tc, &corpus).unwrap();
    let tokens: Vec<String> = (0..8).map(|i| format!("w{i}")).collect();
    let tagged = bundle.predict(&tokens).unwrap();
    assert_eq!(tagged.len(), 8);
    assert!(tagged.iter().zip(&tokens).all(|((t, _), w)| t == w));
}
