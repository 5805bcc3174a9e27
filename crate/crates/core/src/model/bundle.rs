//! Single-file model bundle.
//!
//! Layout:
//!
//! ```text
//! MNER-BUNDLE\n
//! format_version<TAB>1\n
//! <key><TAB><value>\n ...        config, seed, tag names, sizes
//! vocab<TAB><count>\n
//! <word>\n ...                   non-reserved words in id order
//! end_header\n
//! per tensor: rows u32 LE, cols u32 LE, rows*cols f64 LE
//! crc32 (IEEE) of every preceding byte, u32 LE
//! ```
//!
//! Tensors follow the fixed order embedding, forward.{w,u,b},
//! backward.{w,u,b}, dense.w, dense.b. The header records the body length so a
//! truncated file is reported as such rather than as a checksum failure.

use std::fmt::Write as _;
use std::path::Path;

use thiserror::Error;

use crate::corpus::{Tag, TagSet, Vocabulary};

use super::{predict_tags, ModelConfig, ModelError, ModelParams};

pub const MAGIC: &str = "MNER-BUNDLE";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum BundleError {
    #[error("not a model bundle (bad magic)")]
    BadMagic,
    #[error("unsupported bundle format version {found}, expected {expected}")]
    Version { found: u32, expected: u32 },
    #[error("bundle truncated: expected {expected} bytes, found {found}")]
    Truncated { expected: usize, found: usize },
    #[error("bundle checksum mismatch: stored {stored:08x}, computed {computed:08x}")]
    Checksum { stored: u32, computed: u32 },
    #[error("malformed bundle header: {0}")]
    Header(String),
    #[error("bundle tensors do not match the recorded configuration: {0}")]
    Shape(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

/// A trained tagger together with everything needed to apply it.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelBundle {
    pub config: ModelConfig,
    pub params: ModelParams,
    pub vocab: Vocabulary,
    pub tagset: TagSet,
}

impl ModelBundle {
    pub fn predict(&self, tokens: &[String]) -> Result<Vec<(String, Tag)>, ModelError> {
        predict_tags(
            &self.params,
            &self.config,
            tokens,
            &self.vocab,
            &self.tagset,
        )
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let tensors = self.params.tensors();
        let body_len: usize = tensors.iter().map(|t| 8 + 8 * t.len()).sum();

        let c = &self.config;
        let mut header = String::new();
        writeln!(header, "{MAGIC}").unwrap();
        writeln!(header, "format_version\t{FORMAT_VERSION}").unwrap();
        writeln!(header, "max_len\t{}", c.max_len).unwrap();
        writeln!(header, "embedding_dim\t{}", c.embedding_dim).unwrap();
        writeln!(header, "lstm_units\t{}", c.lstm_units).unwrap();
        writeln!(header, "spatial_dropout\t{:?}", c.spatial_dropout).unwrap();
        writeln!(header, "recurrent_dropout\t{:?}", c.recurrent_dropout).unwrap();
        writeln!(header, "num_words\t{}", c.num_words).unwrap();
        writeln!(header, "num_tags\t{}", c.num_tags).unwrap();
        writeln!(header, "seed\t{}", c.seed).unwrap();
        let tags: Vec<&str> = self.tagset.names().collect();
        writeln!(header, "tags\t{}", tags.join("\t")).unwrap();
        writeln!(header, "body_bytes\t{body_len}").unwrap();
        writeln!(header, "vocab\t{}", self.vocab.num_words()).unwrap();
        for w in self.vocab.corpus_words() {
            writeln!(header, "{w}").unwrap();
        }
        writeln!(header, "end_header").unwrap();

        let mut out = header.into_bytes();
        out.reserve(body_len + 4);
        for t in tensors {
            out.extend_from_slice(&(t.rows() as u32).to_le_bytes());
            out.extend_from_slice(&(t.cols() as u32).to_le_bytes());
            for v in t.as_slice() {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
        let crc = crc32fast::hash(&out);
        out.extend_from_slice(&crc.to_le_bytes());
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, BundleError> {
        let mut lines = HeaderReader { bytes, pos: 0 };
        if lines.next_line()? != MAGIC {
            return Err(BundleError::BadMagic);
        }
        let version_line = lines.next_line()?;
        let found = match version_line.split_once('\t') {
            Some(("format_version", v)) => v
                .parse::<u32>()
                .map_err(|_| BundleError::Header(format!("bad version {v:?}")))?,
            _ => return Err(BundleError::Header("missing format_version".into())),
        };
        if found != FORMAT_VERSION {
            return Err(BundleError::Version {
                found,
                expected: FORMAT_VERSION,
            });
        }

        let mut field = |name: &str| -> Result<String, BundleError> {
            let line = lines.next_line()?;
            match line.split_once('\t') {
                Some((k, v)) if k == name => Ok(v.to_string()),
                _ => Err(BundleError::Header(format!(
                    "expected {name}, found {line:?}"
                ))),
            }
        };
        fn num<T: std::str::FromStr>(name: &str, v: String) -> Result<T, BundleError> {
            v.parse()
                .map_err(|_| BundleError::Header(format!("bad value for {name}: {v:?}")))
        }
        let config = ModelConfig {
            max_len: num("max_len", field("max_len")?)?,
            embedding_dim: num("embedding_dim", field("embedding_dim")?)?,
            lstm_units: num("lstm_units", field("lstm_units")?)?,
            spatial_dropout: num("spatial_dropout", field("spatial_dropout")?)?,
            recurrent_dropout: num("recurrent_dropout", field("recurrent_dropout")?)?,
            num_words: num("num_words", field("num_words")?)?,
            num_tags: num("num_tags", field("num_tags")?)?,
            seed: num("seed", field("seed")?)?,
        };
        let tag_names = field("tags")?;
        let tag_names: Vec<&str> = tag_names.split('\t').collect();
        let tagset = TagSet::from_names(&tag_names).map_err(BundleError::Header)?;
        let body_len: usize = num("body_bytes", field("body_bytes")?)?;
        let vocab_len: usize = num("vocab", field("vocab")?)?;
        let mut words = Vec::with_capacity(vocab_len);
        for _ in 0..vocab_len {
            words.push(lines.next_line()?.to_string());
        }
        if lines.next_line()? != "end_header" {
            return Err(BundleError::Header("missing end_header".into()));
        }
        let header_end = lines.pos;

        let expected = header_end + body_len + 4;
        if bytes.len() < expected {
            return Err(BundleError::Truncated {
                expected,
                found: bytes.len(),
            });
        }
        if bytes.len() > expected {
            return Err(BundleError::Header(format!(
                "{} trailing bytes after checksum",
                bytes.len() - expected
            )));
        }
        let (payload, crc_bytes) = bytes.split_at(expected - 4);
        let stored = u32::from_le_bytes(crc_bytes.try_into().unwrap());
        let computed = crc32fast::hash(payload);
        if stored != computed {
            return Err(BundleError::Checksum { stored, computed });
        }

        let vocab = Vocabulary::from_words(words);
        if vocab.len() != config.num_words {
            return Err(BundleError::Shape(format!(
                "vocabulary has {} ids, config says {}",
                vocab.len(),
                config.num_words
            )));
        }
        config.validate()?;
        let mut params = ModelParams::zeros(&config);
        let mut pos = header_end;
        for (name, t) in super::params::TENSOR_NAMES.iter().zip(params.tensors_mut()) {
            let rows = u32::from_le_bytes(payload[pos..pos + 4].try_into().unwrap()) as usize;
            let cols = u32::from_le_bytes(payload[pos + 4..pos + 8].try_into().unwrap()) as usize;
            pos += 8;
            if (rows, cols) != t.shape() {
                return Err(BundleError::Shape(format!(
                    "{name}: stored {rows}x{cols}, expected {}x{}",
                    t.rows(),
                    t.cols()
                )));
            }
            for v in t.as_mut_slice() {
                *v = f64::from_le_bytes(payload[pos..pos + 8].try_into().unwrap());
                pos += 8;
            }
        }
        if pos != payload.len() {
            return Err(BundleError::Shape(
                "body length disagrees with tensor shapes".into(),
            ));
        }
        Ok(ModelBundle {
            config,
            params,
            vocab,
            tagset,
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), BundleError> {
        std::fs::write(path, self.to_bytes())?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, BundleError> {
        Self::from_bytes(&std::fs::read(path)?)
    }
}

struct HeaderReader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> HeaderReader<'a> {
    fn next_line(&mut self) -> Result<&'a str, BundleError> {
        let rest = &self.bytes[self.pos..];
        let end = rest
            .iter()
            .position(|&b| b == b'\n')
            .ok_or(BundleError::Truncated {
                expected: self.bytes.len() + 1,
                found: self.bytes.len(),
            })?;
        let line = std::str::from_utf8(&rest[..end])
            .map_err(|_| BundleError::Header("header is not UTF-8".into()))?;
        self.pos += end + 1;
        Ok(line)
    }
}
