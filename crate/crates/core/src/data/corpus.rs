use std::fs;
use std::path::Path;

use super::vocab::{TokenId, Vocabulary};
use crate::error::{Error, Result};

/// Reference character counts for the standard Penn Treebank splits.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SplitSizes {
    pub train: usize,
    pub valid: usize,
    pub test: usize,
}

impl SplitSizes {
    pub const PTB: SplitSizes = SplitSizes {
        train: 5_100_000,
        valid: 400_000,
        test: 450_000,
    };

    pub const TEXT8: SplitSizes = SplitSizes {
        train: 90_000_000,
        valid: 5_000_000,
        test: 5_000_000,
    };

    /// Relative tolerance for the PTB count check.
    pub const PTB_TOLERANCE: f64 = 0.02;

    pub fn total(&self) -> usize {
        self.train + self.valid + self.test
    }

    /// Each split divided by `divisor`, rounded to nearest.
    pub fn scaled_down(&self, divisor: usize) -> SplitSizes {
        let s = |x: usize| (x + divisor / 2) / divisor;
        SplitSizes {
            train: s(self.train),
            valid: s(self.valid),
            test: s(self.test),
        }
    }
}

#[derive(Clone, Debug)]
pub struct CorpusSplits {
    pub train: String,
    pub valid: String,
    pub test: String,
    pub sizes: SplitSizes,
    pub vocab: Vocabulary,
    /// Non-fatal findings such as count deviations.
    pub warnings: Vec<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Split {
    Train,
    Valid,
    Test,
}

impl std::str::FromStr for Split {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "train" => Ok(Split::Train),
            "valid" | "validation" => Ok(Split::Valid),
            "test" => Ok(Split::Test),
            other => Err(Error::Config(format!(
                "unknown split {other:?}; expected train, valid or test"
            ))),
        }
    }
}

impl CorpusSplits {
    pub fn text(&self, split: Split) -> &str {
        match split {
            Split::Train => &self.train,
            Split::Valid => &self.valid,
            Split::Test => &self.test,
        }
    }

    pub fn encode(&self, split: Split) -> Result<Vec<TokenId>> {
        self.vocab.encode(self.text(split))
    }
}

fn read_split(path: &Path, label: &str) -> Result<String> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let text = String::from_utf8(bytes).map_err(|e| {
        Error::Corpus(format!(
            "{}: invalid UTF-8 at byte {}",
            path.display(),
            e.utf8_error().valid_up_to()
        ))
    })?;
    if text.is_empty() {
        return Err(Error::Corpus(format!("empty split: {label} ({})", path.display())));
    }
    Ok(text)
}

/// Loads pre-split, already preprocessed PTB files and checks their
/// character counts against the standard sizes.
pub fn load_ptb(train: &Path, valid: &Path, test: &Path) -> Result<CorpusSplits> {
    load_ptb_expecting(train, valid, test, SplitSizes::PTB)
}

/// As [`load_ptb`], with the reference sizes supplied (fixture corpora use
/// scaled-down references).
pub fn load_ptb_expecting(
    train: &Path,
    valid: &Path,
    test: &Path,
    expected: SplitSizes,
) -> Result<CorpusSplits> {
    let train = read_split(train, "train")?;
    let valid = read_split(valid, "valid")?;
    let test = read_split(test, "test")?;
    let sizes = SplitSizes {
        train: train.chars().count(),
        valid: valid.chars().count(),
        test: test.chars().count(),
    };
    let mut warnings = Vec::new();
    for (label, got, want) in [
        ("train", sizes.train, expected.train),
        ("valid", sizes.valid, expected.valid),
        ("test", sizes.test, expected.test),
    ] {
        let dev = (got as f64 - want as f64).abs() / want as f64;
        if dev > SplitSizes::PTB_TOLERANCE {
            warnings.push(format!(
                "{label} split has {got} characters, {:.1}% away from the expected {want}",
                dev * 100.0
            ));
        }
    }
    let vocab = Vocabulary::from_text(&train).with_unknown();
    Ok(CorpusSplits {
        train,
        valid,
        test,
        sizes,
        vocab,
        warnings,
    })
}

/// How strictly `load_text8` treats the file length.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Text8Mode {
    /// Exactly 100M characters, split 90M/5M/5M.
    #[default]
    Strict,
    /// Any length; splits in the same 90:5:5 proportion.
    Fixture,
}

pub const TEXT8_LEN: usize = 100_000_000;

pub fn load_text8(path: &Path, mode: Text8Mode) -> Result<CorpusSplits> {
    let text = read_split(path, "text8")?;
    split_text8(text, mode)
}

/// Validates and splits an in-memory Text8-style corpus.
pub fn split_text8(text: String, mode: Text8Mode) -> Result<CorpusSplits> {
    if let Some((offset, c)) = text
        .chars()
        .enumerate()
        .find(|&(_, c)| c != ' ' && !c.is_ascii_lowercase())
    {
        return Err(Error::Corpus(format!(
            "character {c:?} at offset {offset} is outside the a-z/space alphabet"
        )));
    }
    // alphabet-valid text is ASCII, so byte length = character count
    let len = text.len();
    if mode == Text8Mode::Strict && len != TEXT8_LEN {
        return Err(Error::Corpus(format!(
            "text8 must hold exactly {TEXT8_LEN} characters (first 100M plain text characters), found {len}; \
             use fixture mode for smaller files"
        )));
    }
    let train_end = len * 90 / 100;
    let valid_end = train_end + len * 5 / 100;
    let sizes = SplitSizes {
        train: train_end,
        valid: valid_end - train_end,
        test: len - valid_end,
    };
    Ok(CorpusSplits {
        train: text[..train_end].to_string(),
        valid: text[train_end..valid_end].to_string(),
        test: text[valid_end..].to_string(),
        sizes,
        vocab: Vocabulary::text8(),
        warnings: Vec::new(),
    })
}

/// Any single text file split 90:5:5, vocabulary from the train part plus a
/// reserved unknown id.
pub fn load_raw(path: &Path) -> Result<CorpusSplits> {
    let text = read_split(path, "raw")?;
    Ok(split_raw(&text))
}

pub fn split_raw(text: &str) -> CorpusSplits {
    let chars: Vec<char> = text.chars().collect();
    let len = chars.len();
    let train_end = len * 90 / 100;
    let valid_end = train_end + len * 5 / 100;
    let train: String = chars[..train_end].iter().collect();
    let vocab = Vocabulary::from_text(&train).with_unknown();
    CorpusSplits {
        sizes: SplitSizes {
            train: train_end,
            valid: valid_end - train_end,
            test: len - valid_end,
        },
        valid: chars[train_end..valid_end].iter().collect(),
        test: chars[valid_end..].iter().collect(),
        train,
        vocab,
        warnings: Vec::new(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write(dir: &Path, name: &str, body: &str) -> std::path::PathBuf {
        let p = dir.join(name);
        fs::File::create(&p).unwrap().write_all(body.as_bytes()).unwrap();
        p
    }

    #[test]
    fn ptb_fixture_vocab_is_sorted_train_chars() {
        let dir = tempfile::tempdir().unwrap();
        let a = write(dir.path(), "train.txt", "the cat <unk> N sat\n");
        let b = write(dir.path(), "valid.txt", "a dog\n");
        let c = write(dir.path(), "test.txt", "the mat\n");
        let s = load_ptb(&a, &b, &c).unwrap();
        let mut expect: Vec<char> = "the cat <unk> N sat\n".chars().collect();
        expect.sort();
        expect.dedup();
        assert_eq!(s.vocab.chars(), expect.as_slice());
        assert_eq!(s.vocab.size(), expect.len() + 1);
        // 'd', 'o' and 'g' never occur in train
        let ids = s.encode(Split::Valid).unwrap();
        assert_eq!(ids.iter().filter(|&&i| Some(i) == s.vocab.unknown_id()).count(), 3);
        assert_eq!(s.warnings.len(), 3);
    }

    #[test]
    fn ptb_empty_split_and_missing_file() {
        let dir = tempfile::tempdir().unwrap();
        let a = write(dir.path(), "train.txt", "abc");
        let b = write(dir.path(), "valid.txt", "");
        let err = load_ptb(&a, &b, &a).unwrap_err().to_string();
        assert!(err.contains("empty split"), "{err}");
        let missing = dir.path().join("nope.txt");
        let err = load_ptb(&a, &a, &missing).unwrap_err();
        assert!(matches!(err, Error::Io { .. }));
        assert!(err.to_string().contains("nope.txt"));
    }

    #[test]
    fn ptb_counts_within_tolerance_do_not_warn() {
        let dir = tempfile::tempdir().unwrap();
        let want = SplitSizes::PTB.scaled_down(1000);
        let a = write(dir.path(), "t", &"x".repeat(want.train + 50));
        let b = write(dir.path(), "v", &"x".repeat(want.valid));
        let c = write(dir.path(), "s", &"x".repeat(want.test - 5));
        let s = load_ptb_expecting(&a, &b, &c, want).unwrap();
        assert!(s.warnings.is_empty(), "{:?}", s.warnings);
    }

    #[test]
    fn text8_fixture_split_and_strict_length() {
        let text: String = (0..1000).map(|i| if i % 7 == 0 { ' ' } else { 'q' }).collect();
        let s = split_text8(text.clone(), Text8Mode::Fixture).unwrap();
        assert_eq!((s.sizes.train, s.sizes.valid, s.sizes.test), (900, 50, 50));
        assert_eq!(s.vocab.size(), 27);
        let err = split_text8(text, Text8Mode::Strict).unwrap_err().to_string();
        assert!(err.contains("100000000"), "{err}");
    }

    #[test]
    fn text8_rejects_foreign_characters_with_offset() {
        let err = split_text8("ab cÉd".into(), Text8Mode::Fixture)
            .unwrap_err()
            .to_string();
        assert!(err.contains("offset 4"), "{err}");
    }
}
