use std::collections::BTreeSet;
use std::fmt::Write;

use super::{Corpus, EntityType};

/// Dataset overview counts. Document-level fields are `None` when any sentence
/// lacks a document id.
#[derive(Clone, Debug, PartialEq)]
pub struct DatasetStats {
    pub sentences: usize,
    pub documents: Option<usize>,
    pub entity_sentences: usize,
    pub annotated_words: usize,
    pub material_sentences: usize,
    pub process_sentences: usize,
    pub material_words: usize,
    pub process_words: usize,
    pub avg_entity_sentences_per_document: Option<f64>,
    pub avg_annotated_words_per_document: Option<f64>,
    pub avg_annotated_words_per_entity_sentence: f64,
    pub avg_material_words_per_document: Option<f64>,
    pub avg_process_words_per_document: Option<f64>,
    pub avg_material_words_per_material_sentence: f64,
    pub avg_process_words_per_process_sentence: f64,
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

pub fn dataset_stats(corpus: &Corpus) -> DatasetStats {
    let mut entity_sentences = 0;
    let mut annotated_words = 0;
    let mut material_sentences = 0;
    let mut process_sentences = 0;
    let mut material_words = 0;
    let mut process_words = 0;
    let mut docs = BTreeSet::new();
    let mut all_have_docs = true;

    for s in &corpus.sentences {
        match &s.doc_id {
            Some(d) => {
                docs.insert(d.as_str());
            }
            None => all_have_docs = false,
        }
        let mut has_mat = false;
        let mut has_proc = false;
        for tag in &s.tags {
            match tag.entity_type() {
                Some(EntityType::Material) => {
                    has_mat = true;
                    material_words += 1;
                }
                Some(EntityType::Process) => {
                    has_proc = true;
                    process_words += 1;
                }
                None => {}
            }
        }
        let words = s.tags.iter().filter(|t| t.entity_type().is_some()).count();
        annotated_words += words;
        entity_sentences += usize::from(words > 0);
        material_sentences += usize::from(has_mat);
        process_sentences += usize::from(has_proc);
    }

    let documents = (all_have_docs && !corpus.is_empty()).then_some(docs.len());
    let per_doc = |n: usize| documents.map(|d| ratio(n, d));
    DatasetStats {
        sentences: corpus.len(),
        documents,
        entity_sentences,
        annotated_words,
        material_sentences,
        process_sentences,
        material_words,
        process_words,
        avg_entity_sentences_per_document: per_doc(entity_sentences),
        avg_annotated_words_per_document: per_doc(annotated_words),
        avg_annotated_words_per_entity_sentence: ratio(annotated_words, entity_sentences),
        avg_material_words_per_document: per_doc(material_words),
        avg_process_words_per_document: per_doc(process_words),
        avg_material_words_per_material_sentence: ratio(material_words, material_sentences),
        avg_process_words_per_process_sentence: ratio(process_words, process_sentences),
    }
}

impl DatasetStats {
    /// The twelve overview rows in display order; document-level rows carry `None`
    /// when document ids are missing.
    pub fn rows(&self) -> Vec<(&'static str, Option<f64>)> {
        vec![
            ("documents", self.documents.map(|d| d as f64)),
            ("entity_sentences", Some(self.entity_sentences as f64)),
            ("annotated_words", Some(self.annotated_words as f64)),
            ("material_sentences", Some(self.material_sentences as f64)),
            ("process_sentences", Some(self.process_sentences as f64)),
            (
                "avg_entity_sentences_per_document",
                self.avg_entity_sentences_per_document,
            ),
            (
                "avg_annotated_words_per_document",
                self.avg_annotated_words_per_document,
            ),
            (
                "avg_annotated_words_per_entity_sentence",
                Some(self.avg_annotated_words_per_entity_sentence),
            ),
            (
                "avg_material_words_per_document",
                self.avg_material_words_per_document,
            ),
            (
                "avg_process_words_per_document",
                self.avg_process_words_per_document,
            ),
            (
                "avg_material_words_per_material_sentence",
                Some(self.avg_material_words_per_material_sentence),
            ),
            (
                "avg_process_words_per_process_sentence",
                Some(self.avg_process_words_per_process_sentence),
            ),
        ]
    }

    /// `name<TAB>value` lines: the twelve overview rows, then supporting totals.
    /// Omitted document-level rows are replaced by a single `document_ids<TAB>missing` flag.
    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        for (name, value) in self.rows() {
            match value {
                Some(v) if name.starts_with("avg_") => writeln!(out, "{name}\t{v:.4}").unwrap(),
                Some(v) => writeln!(out, "{name}\t{}", v as usize).unwrap(),
                None => {}
            }
        }
        if self.documents.is_none() {
            out.push_str("document_ids\tmissing\n");
        }
        writeln!(out, "sentences\t{}", self.sentences).unwrap();
        writeln!(out, "material_words\t{}", self.material_words).unwrap();
        writeln!(out, "process_words\t{}", self.process_words).unwrap();
        out
    }
}
