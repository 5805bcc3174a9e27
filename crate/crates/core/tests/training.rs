//! Training loop and cross-validation behaviour.

use mner::corpus::{generate_synthetic_corpus, parse_iob, Corpus, SynthConfig};
use mner::eval::MatchMode;
use mner::model::ModelConfig;
use mner::parallel::Execution;
use mner::training::{cross_validate, train, train_with_observer, TrainConfig, TrainError};

fn small_model(max_len: usize) -> ModelConfig {
    ModelConfig {
        max_len,
        embedding_dim: 8,
        lstm_units: 8,
        ..Default::default()
    }
}

fn identical_corpus(n: usize) -> Corpus {
    let one = "carbon\tB-material\nis\tO\nannealed\tB-process\n\n";
    parse_iob(&one.repeat(n)).unwrap()
}

#[test]
fn degenerate_two_fold_run_is_perfect() {
    let tc = TrainConfig {
        max_epochs: 40,
        learning_rate: 0.05,
        patience: None,
        ..Default::default()
    };
    let report = cross_validate(
        &small_model(4),
        &tc,
        &identical_corpus(10),
        2,
        MatchMode::Strict,
        1,
    )
    .unwrap();
    assert_eq!(report.folds.len(), 2);
    for f in &report.folds {
        assert_eq!(f.model.overall.f1, 1.0, "fold {}", f.fold);
    }
    assert_eq!(report.model.f1.mean, 1.0);
    assert_eq!(report.model.f1.std, 0.0);
}

#[test]
fn cross_validation_is_reproducible_and_independent_of_jobs() {
    let corpus = generate_synthetic_corpus(8, &SynthConfig::with_sentences(30));
    let tc = TrainConfig {
        max_epochs: 3,
        ..Default::default()
    };
    let mc = small_model(12);
    let a = cross_validate(&mc, &tc, &corpus, 3, MatchMode::Strict, 1).unwrap();
    let b = cross_validate(&mc, &tc, &corpus, 3, MatchMode::Strict, 1).unwrap();
    let c = cross_validate(&mc, &tc, &corpus, 3, MatchMode::Strict, 3).unwrap();
    assert_eq!(a, b);
    assert_eq!(a, c);
    assert_eq!(a.folds.len(), 3);
    assert_eq!(a.to_kv(), c.to_kv());
    assert!(cross_validate(&mc, &tc, &corpus, 1, MatchMode::Strict, 1).is_err());
}

#[test]
fn patience_zero_stops_at_first_rise() {
    let corpus = generate_synthetic_corpus(2, &SynthConfig::with_sentences(40));
    let tc = TrainConfig {
        max_epochs: 30,
        patience: Some(0),
        learning_rate: 0.05,
        ..Default::default()
    };
    let (_, h) = train(&small_model(12), &tc, &corpus).unwrap();
    let losses = h.val_losses();
    let n = losses.len();
    if n < 30 {
        assert!(h.stopped_early);
        assert!(losses[n - 1] >= losses[n - 2]);
        assert!(losses[..n - 1].windows(2).all(|w| w[1] < w[0]));
        assert_eq!(h.best_epoch, Some(n - 1));
    }
}

#[test]
fn disabled_early_stopping_gives_identical_bundles() {
    let corpus = generate_synthetic_corpus(3, &SynthConfig::with_sentences(25));
    let tc = TrainConfig {
        max_epochs: 4,
        patience: None,
        execution: Execution::Parallel,
        ..Default::default()
    };
    let (a, ha) = train(&small_model(12), &tc, &corpus).unwrap();
    let (b, hb) = train(&small_model(12), &tc, &corpus).unwrap();
    assert_eq!(a.to_bytes(), b.to_bytes());
    assert_eq!(ha.epochs.len(), 4);
    assert_eq!(ha.val_losses(), hb.val_losses());
}

#[test]
fn more_epochs_do_not_change_the_start() {
    let corpus = generate_synthetic_corpus(3, &SynthConfig::with_sentences(25));
    let run = |epochs| {
        let tc = TrainConfig {
            max_epochs: epochs,
            patience: None,
            ..Default::default()
        };
        let mut first = None;
        train_with_observer(&small_model(12), &tc, &corpus, |v| {
            if v.record.epoch == 1 {
                first = Some(v.params.clone());
            }
            Ok(())
        })
        .unwrap();
        first.unwrap()
    };
    assert_eq!(run(1), run(3));
}

#[test]
fn masked_loss_trains() {
    let corpus = generate_synthetic_corpus(6, &SynthConfig::with_sentences(20));
    let tc = TrainConfig {
        max_epochs: 2,
        mask_padding: true,
        ..Default::default()
    };
    let (_, h) = train(&small_model(20), &tc, &corpus).unwrap();
    assert!(h.epochs.iter().all(|e| e.train_loss.is_finite()));
}

#[test]
fn observer_errors_abort_training() {
    let corpus = identical_corpus(5);
    let tc = TrainConfig {
        max_epochs: 5,
        ..Default::default()
    };
    let err = train_with_observer(&small_model(4), &tc, &corpus, |_| {
        Err(TrainError::Io("disk full".into()))
    })
    .unwrap_err();
    assert_eq!(err, TrainError::Io("disk full".into()));
}

#[test]
fn invalid_configuration_is_rejected() {
    let tc = TrainConfig {
        batch_size: 0,
        ..Default::default()
    };
    assert!(matches!(
        train(&small_model(4), &tc, &identical_corpus(5)),
        Err(TrainError::Config(_))
    ));
}
