//! Binary checkpoint file.
//!
//! Layout, all integers little-endian:
//!
//! ```text
//! "MULRNN"  u32 version
//! u32 len   config text (UTF-8, `key = value` sections)
//! u32 count
//! count x { u32 name_len, name, u32 rank, rank x u64 dim, f64 values (row-major) }
//! u32 crc32 of every preceding byte
//! ```
//!
//! Adam moments, when present, are stored as extra arrays named
//! `adam.m/<param>` and `adam.v/<param>`.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::config::{read_lm, write_lm, Doc};
use crate::data::Vocabulary;
use crate::error::{Error, Result};
use crate::model::LanguageModel;
use crate::tensor::{Matrix, ParamSet};

use super::adam::{AdamConfig, AdamState};

pub const MAGIC: &[u8; 6] = b"MULRNN";
pub const FORMAT_VERSION: u32 = 1;

const M_PREFIX: &str = "adam.m/";
const V_PREFIX: &str = "adam.v/";

#[derive(Clone, Debug, PartialEq)]
pub struct Checkpoint {
    pub model: LanguageModel,
    pub vocab: Vocabulary,
    pub adam: Option<AdamState>,
    pub epoch: usize,
    pub valid_bpc: f64,
    pub seed: u64,
}

impl Checkpoint {
    /// A checkpoint with no optimizer state, e.g. for a hand-built model.
    pub fn from_model(model: LanguageModel, vocab: Vocabulary, seed: u64) -> Self {
        Checkpoint {
            model,
            vocab,
            adam: None,
            epoch: 0,
            valid_bpc: f64::NAN,
            seed,
        }
    }

    fn config_text(&self) -> String {
        let mut o = String::new();
        write_lm(&mut o, "model", &self.model.config);
        let _ = writeln!(o, "\n[checkpoint]");
        let _ = writeln!(o, "vocabulary = {}", self.vocab.to_spec());
        let _ = writeln!(o, "epoch = {}", self.epoch);
        let _ = writeln!(o, "valid_bpc = {}", self.valid_bpc);
        let _ = writeln!(o, "seed = {}", self.seed);
        if let Some(a) = &self.adam {
            let _ = writeln!(o, "\n[adam]");
            let _ = writeln!(o, "t = {}", a.t);
            let _ = writeln!(o, "lr = {}", a.config.lr);
            let _ = writeln!(o, "beta1 = {}", a.config.beta1);
            let _ = writeln!(o, "beta2 = {}", a.config.beta2);
            let _ = writeln!(o, "eps = {}", a.config.eps);
        }
        o
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut arrays: Vec<(String, &Matrix)> = self
            .model
            .params
            .iter()
            .map(|(n, m)| (n.to_string(), m))
            .collect();
        if let Some(a) = &self.adam {
            arrays.extend(a.m.iter().map(|(n, m)| (format!("{M_PREFIX}{n}"), m)));
            arrays.extend(a.v.iter().map(|(n, m)| (format!("{V_PREFIX}{n}"), m)));
        }

        let mut out = Vec::new();
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
        let text = self.config_text();
        out.extend_from_slice(&(text.len() as u32).to_le_bytes());
        out.extend_from_slice(text.as_bytes());
        out.extend_from_slice(&(arrays.len() as u32).to_le_bytes());
        for (name, m) in arrays {
            out.extend_from_slice(&(name.len() as u32).to_le_bytes());
            out.extend_from_slice(name.as_bytes());
            out.extend_from_slice(&2u32.to_le_bytes());
            out.extend_from_slice(&(m.rows() as u64).to_le_bytes());
            out.extend_from_slice(&(m.cols() as u64).to_le_bytes());
            for x in m.data() {
                out.extend_from_slice(&x.to_le_bytes());
            }
        }
        let crc = crc32fast::hash(&out);
        out.extend_from_slice(&crc.to_le_bytes());
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < MAGIC.len() + 8 || &bytes[..MAGIC.len()] != MAGIC {
            return Err(Error::Checkpoint("not a checkpoint file (bad magic)".into()));
        }
        let (body, trailer) = bytes.split_at(bytes.len() - 4);
        let stored = u32::from_le_bytes(trailer.try_into().unwrap());
        if crc32fast::hash(body) != stored {
            return Err(Error::Checkpoint("checksum mismatch; file is corrupt".into()));
        }
        let mut r = Reader {
            buf: body,
            pos: MAGIC.len(),
        };
        let version = r.u32()?;
        if version != FORMAT_VERSION {
            return Err(Error::Checkpoint(format!(
                "unsupported format version {version} (expected {FORMAT_VERSION})"
            )));
        }
        let text_len = r.u32()? as usize;
        let text = std::str::from_utf8(r.take(text_len)?)
            .map_err(|_| Error::Checkpoint("config block is not UTF-8".into()))?;

        let mut params = ParamSet::new();
        let mut m = ParamSet::new();
        let mut v = ParamSet::new();
        for _ in 0..r.u32()? {
            let name_len = r.u32()? as usize;
            let name = std::str::from_utf8(r.take(name_len)?)
                .map_err(|_| Error::Checkpoint("array name is not UTF-8".into()))?
                .to_string();
            let rank = r.u32()?;
            if rank != 2 {
                return Err(Error::Checkpoint(format!("array {name} has rank {rank}, expected 2")));
            }
            let rows = r.u64()? as usize;
            let cols = r.u64()? as usize;
            let n = rows
                .checked_mul(cols)
                .filter(|n| n.checked_mul(8).is_some_and(|b| b <= r.remaining()))
                .ok_or_else(|| Error::Checkpoint(format!("array {name} is truncated")))?;
            let data = r
                .take(n * 8)?
                .chunks_exact(8)
                .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
                .collect();
            let mat = Matrix::from_vec(rows, cols, data)?;
            if let Some(p) = name.strip_prefix(M_PREFIX) {
                m.insert(p, mat);
            } else if let Some(p) = name.strip_prefix(V_PREFIX) {
                v.insert(p, mat);
            } else {
                params.insert(name, mat);
            }
        }
        if r.remaining() != 0 {
            return Err(Error::Checkpoint(format!("{} trailing bytes", r.remaining())));
        }

        let mut doc = Doc::parse(text)?;
        let config = read_lm(&mut doc, "model")?;
        let vocab = Vocabulary::from_spec(&doc.require::<String>("checkpoint", "vocabulary")?)?;
        let epoch = doc.require("checkpoint", "epoch")?;
        let valid_bpc = doc.require("checkpoint", "valid_bpc")?;
        let seed = doc.require("checkpoint", "seed")?;
        let adam = match doc.get_opt::<u64>("adam", "t", "", None)? {
            None => None,
            Some(t) => Some(AdamState {
                config: AdamConfig {
                    lr: doc.require("adam", "lr")?,
                    beta1: doc.require("adam", "beta1")?,
                    beta2: doc.require("adam", "beta2")?,
                    eps: doc.require("adam", "eps")?,
                },
                t,
                m,
                v,
            }),
        };
        doc.finish(&["model", "checkpoint", "adam"])?;

        if vocab.size() != config.vocab_size() {
            return Err(Error::Checkpoint(format!(
                "vocabulary of {} symbols does not match model input size {}",
                vocab.size(),
                config.vocab_size()
            )));
        }
        let model = LanguageModel::from_params(config, params)?;
        if let Some(a) = &adam {
            for (name, p) in model.params.iter() {
                let ok = |s: &ParamSet| s.get(name).is_some_and(|x| x.shape() == p.shape());
                if !ok(&a.m) || !ok(&a.v) || a.m.len() != model.params.len() || a.v.len() != model.params.len() {
                    return Err(Error::Checkpoint(format!("adam moments do not match parameter {name}")));
                }
            }
        }
        Ok(Checkpoint {
            model,
            vocab,
            adam,
            epoch,
            valid_bpc,
            seed,
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_bytes()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
        Self::from_bytes(&bytes)
    }
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn remaining(&self) -> usize {
        self.buf.len() - self.pos
    }

    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if n > self.remaining() {
            return Err(Error::Checkpoint("unexpected end of file".into()));
        }
        let s = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cells::{CellDims, CellKind, InitScheme};
    use crate::model::LmConfig;
    use crate::tensor::Rng;

    fn sample_checkpoint(with_adam: bool) -> Checkpoint {
        let vocab = Vocabulary::from_text("abcde ").with_unknown();
        let cfg = LmConfig::new(CellKind::Mlstm, CellDims::new(vocab.size(), 6, 4).unwrap(), 5).unwrap();
        let model = LanguageModel::new(cfg, &mut Rng::new(3), InitScheme::default()).unwrap();
        let adam = with_adam.then(|| {
            let mut a = AdamState::new(AdamConfig::default(), &model.params);
            a.t = 12;
            for (_, m) in a.m.iter_mut() {
                m.fill(0.125);
            }
            a
        });
        Checkpoint {
            model,
            vocab,
            adam,
            epoch: 4,
            valid_bpc: 2.0 / 3.0,
            seed: 99,
        }
    }

    #[test]
    fn round_trip_is_exact() {
        for with_adam in [false, true] {
            let c = sample_checkpoint(with_adam);
            let back = Checkpoint::from_bytes(&c.to_bytes()).unwrap();
            assert_eq!(back, c);
            assert_eq!(back.valid_bpc.to_bits(), c.valid_bpc.to_bits());
        }
    }

    #[test]
    fn header_and_corruption() {
        let bytes = sample_checkpoint(true).to_bytes();
        assert_eq!(&bytes[..6], b"MULRNN");
        assert_eq!(u32::from_le_bytes(bytes[6..10].try_into().unwrap()), FORMAT_VERSION);

        let mut flipped = bytes.clone();
        flipped[40] ^= 1;
        let err = Checkpoint::from_bytes(&flipped).unwrap_err().to_string();
        assert!(err.contains("checksum"), "{err}");

        let err = Checkpoint::from_bytes(b"NOTACKPT....").unwrap_err().to_string();
        assert!(err.contains("magic"), "{err}");
    }

    #[test]
    fn nan_bpc_survives() {
        let mut c = sample_checkpoint(false);
        c.valid_bpc = f64::NAN;
        assert!(Checkpoint::from_bytes(&c.to_bytes()).unwrap().valid_bpc.is_nan());
    }
}
