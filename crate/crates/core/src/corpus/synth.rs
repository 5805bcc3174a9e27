//! Template-based synthetic corpus for desk-scale experiments.
//!
//! Sentences are filled from small built-in gazetteers of electrode materials,
//! electrolytes and synthesis processes. Every gazetteer token has exactly one
//! tag, so a per-word lookup tags the plain corpus perfectly. Setting
//! `ambiguous_fraction > 0` marks that share of single-token entries as
//! ambiguous: they additionally appear untagged after cue words ("keyword",
//! "label", ...) in distractor sentences, which only a context-aware tagger
//! can resolve.

use crate::tensor::RngState;

use super::{Corpus, EntityType, Sentence, Tag};

const MATERIALS: &[&str] = &[
    "graphene",
    "MnO2",
    "RuO2",
    "NiO",
    "Co3O4",
    "polyaniline",
    "polypyrrole",
    "KOH",
    "Na2SO4",
    "H2SO4",
    "TiO2",
    "V2O5",
    "MXene",
    "PEDOT",
    "PVDF",
    "carbon",
    "nickel",
    "Fe3O4",
    "LiPF6",
    "acetonitrile",
    "carbon nanotubes",
    "carbon aerogel",
    "nickel foam",
    "acetylene black",
    "ionic liquid",
    "Super P",
    "manganese dioxide",
    "cobalt oxide",
    "nickel hydroxide",
    "activated graphite felt",
];

const PROCESSES: &[&str] = &[
    "annealing",
    "calcination",
    "carbonization",
    "activation",
    "electrodeposition",
    "sonication",
    "pyrolysis",
    "electrospinning",
    "etching",
    "hydrothermal synthesis",
    "chemical vapor deposition",
    "freeze drying",
    "ball milling",
    "sol gel method",
    "spin coating",
];

const NUMBERS: &[&str] = &["2", "5", "10", "0.5", "100", "250", "800", "1", "6", "3.5"];

/// `{M}` material slot, `{P}` process slot, `{N}` number.
const MATERIAL_TEMPLATES: &[&str] = &[
    "The {M} electrode exhibited a specific capacitance of {N} F g-1 .",
    "{M} was used as the active material .",
    "A composite of {M} and {M} was prepared .",
    "The electrolyte was {N} M {M} in water .",
    "We coated {M} onto {M} as current collector .",
    "The capacitance of {M} remained high after {N} cycles .",
    "{M} shows excellent rate capability .",
    "Electrodes made of {M} were tested in a two electrode cell .",
    "The mass loading of {M} was {N} mg cm-2 .",
];

const PROCESS_TEMPLATES: &[&str] = &[
    "The samples were treated by {P} at {N} °C .",
    "{P} improved the pore structure .",
    "After {P} the surface area increased to {N} m2 g-1 .",
    "The precursor underwent {P} for {N} h .",
];

const MIXED_TEMPLATES: &[&str] = &[
    "{M} was obtained by {P} for {N} h .",
    "After {P} , the {M} showed high conductivity .",
    "{P} of {M} yielded a porous network .",
    "The {M} film was deposited by {P} on {M} .",
];

const PLAIN_TEMPLATES: &[&str] = &[
    "The results are summarized in Table {N} .",
    "Cyclic voltammetry curves are shown in Figure {N} .",
    "The cell was cycled at a current density of {N} A g-1 .",
    "These observations agree with previous reports .",
];

/// `{A}` is an ambiguous gazetteer word used outside any entity.
const DISTRACTOR_TEMPLATES: &[&str] = &[
    "The keyword {A} appears in the index .",
    "Search term : {A} .",
    "The label {A} refers to the legend of Figure {N} .",
    "Sample code {A} denotes the reference batch .",
];

#[derive(Clone, Debug, PartialEq)]
pub struct SynthConfig {
    pub n_sentences: usize,
    /// Sentences per synthetic document (document ids `synth-0`, `synth-1`, ...).
    pub sentences_per_document: usize,
    /// Share of single-token gazetteer entries that also occur untagged.
    pub ambiguous_fraction: f64,
    /// Probability that a sentence is a distractor when ambiguous words exist.
    pub distractor_rate: f64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            n_sentences: 100,
            sentences_per_document: 20,
            ambiguous_fraction: 0.0,
            distractor_rate: 0.2,
        }
    }
}

impl SynthConfig {
    pub fn with_sentences(n: usize) -> Self {
        SynthConfig {
            n_sentences: n,
            ..Default::default()
        }
    }
}

/// Single-token gazetteer words marked ambiguous for the given seed and fraction.
pub fn ambiguous_words(seed: u64, fraction: f64) -> Vec<&'static str> {
    let mut singles: Vec<&'static str> = MATERIALS
        .iter()
        .chain(PROCESSES)
        .copied()
        .filter(|w| !w.contains(' '))
        .collect();
    let count = (singles.len() as f64 * fraction.clamp(0.0, 1.0)).round() as usize;
    let mut rng = RngState::derive(seed, 0xA3B1);
    rng.shuffle(&mut singles);
    singles.truncate(count);
    singles
}

pub fn generate_synthetic_corpus(seed: u64, config: &SynthConfig) -> Corpus {
    let mut rng = RngState::new(seed);
    let ambiguous = ambiguous_words(seed, config.ambiguous_fraction);
    let per_doc = config.sentences_per_document.max(1);
    let sentences = (0..config.n_sentences)
        .map(|i| {
            let template = if !ambiguous.is_empty() && rng.bernoulli(config.distractor_rate) {
                *rng.choose(DISTRACTOR_TEMPLATES)
            } else {
                let u = rng.uniform();
                if u < 0.60 {
                    *rng.choose(MATERIAL_TEMPLATES)
                } else if u < 0.70 {
                    *rng.choose(PROCESS_TEMPLATES)
                } else if u < 0.85 {
                    *rng.choose(MIXED_TEMPLATES)
                } else {
                    *rng.choose(PLAIN_TEMPLATES)
                }
            };
            let mut s = fill(template, &mut rng, &ambiguous);
            s.doc_id = Some(format!("synth-{}", i / per_doc));
            s
        })
        .collect();
    Corpus::new(sentences)
}

fn fill(template: &str, rng: &mut RngState, ambiguous: &[&str]) -> Sentence {
    let mut tokens = Vec::new();
    let mut tags = Vec::new();
    let push_entity =
        |entry: &str, ty: EntityType, tokens: &mut Vec<String>, tags: &mut Vec<Tag>| {
            for (k, w) in entry.split(' ').enumerate() {
                tokens.push(w.to_string());
                tags.push(if k == 0 {
                    Tag::begin(ty)
                } else {
                    Tag::inside(ty)
                });
            }
        };
    for piece in template.split(' ') {
        match piece {
            "{M}" => push_entity(
                rng.choose(MATERIALS),
                EntityType::Material,
                &mut tokens,
                &mut tags,
            ),
            "{P}" => push_entity(
                rng.choose(PROCESSES),
                EntityType::Process,
                &mut tokens,
                &mut tags,
            ),
            "{N}" => {
                tokens.push(rng.choose(NUMBERS).to_string());
                tags.push(Tag::O);
            }
            "{A}" => {
                tokens.push(rng.choose(ambiguous).to_string());
                tags.push(Tag::O);
            }
            word => {
                tokens.push(word.to_string());
                tags.push(Tag::O);
            }
        }
    }
    Sentence {
        tokens,
        tags,
        doc_id: None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{dataset_stats, parse_iob, serialize_iob};
    use std::collections::HashMap;

    #[test]
    fn small_corpus_is_well_formed() {
        let c = generate_synthetic_corpus(1, &SynthConfig::with_sentences(3));
        assert_eq!(c.len(), 3);
        for s in &c.sentences {
            assert!(s.validate().is_ok());
        }
        assert_eq!(parse_iob(&serialize_iob(&c)).unwrap(), c);
    }

    #[test]
    fn deterministic_per_seed() {
        let cfg = SynthConfig::with_sentences(50);
        assert_eq!(
            generate_synthetic_corpus(8, &cfg),
            generate_synthetic_corpus(8, &cfg)
        );
        assert_ne!(
            generate_synthetic_corpus(8, &cfg),
            generate_synthetic_corpus(9, &cfg)
        );
    }

    #[test]
    fn material_process_ratio() {
        let c = generate_synthetic_corpus(1, &SynthConfig::with_sentences(1000));
        let st = dataset_stats(&c);
        let ratio = st.material_sentences as f64 / st.process_sentences as f64;
        assert!((2.5..=6.0).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn gazetteer_tokens_have_one_tag_each() {
        let c = generate_synthetic_corpus(3, &SynthConfig::with_sentences(2000));
        let mut seen: HashMap<&str, Tag> = HashMap::new();
        for s in &c.sentences {
            for (w, t) in s.tokens.iter().zip(&s.tags) {
                if let Some(prev) = seen.insert(w, *t) {
                    assert_eq!(prev, *t, "token {w} has two tags");
                }
            }
        }
    }

    #[test]
    fn ambiguous_variant_has_untagged_gazetteer_words() {
        let cfg = SynthConfig {
            n_sentences: 500,
            ambiguous_fraction: 0.2,
            ..Default::default()
        };
        let amb = ambiguous_words(42, 0.2);
        assert!(!amb.is_empty());
        let c = generate_synthetic_corpus(42, &cfg);
        let untagged = c
            .sentences
            .iter()
            .flat_map(|s| s.tokens.iter().zip(&s.tags))
            .filter(|(w, t)| **t == Tag::O && amb.contains(&w.as_str()))
            .count();
        assert!(untagged > 0);
    }
}
