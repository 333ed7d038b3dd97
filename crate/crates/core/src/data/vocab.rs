use std::collections::{BTreeSet, HashMap};

use crate::error::{Error, Result};

pub type TokenId = u32;

/// Printed in place of the reserved unknown id.
pub const UNKNOWN_CHAR: char = '\u{FFFD}';

/// Bijective character/id map with ids sorted by code point. An optional
/// reserved id, one past the last character, absorbs characters that were
/// not seen when the vocabulary was built.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Vocabulary {
    chars: Vec<char>,
    index: HashMap<char, TokenId>,
    unknown: Option<TokenId>,
}

impl Vocabulary {
    pub fn from_chars(chars: impl IntoIterator<Item = char>) -> Self {
        let set: BTreeSet<char> = chars.into_iter().collect();
        let chars: Vec<char> = set.into_iter().collect();
        let index = chars
            .iter()
            .enumerate()
            .map(|(i, &c)| (c, i as TokenId))
            .collect();
        Vocabulary {
            chars,
            index,
            unknown: None,
        }
    }

    pub fn from_text(text: &str) -> Self {
        Self::from_chars(text.chars())
    }

    /// Space plus `a`..=`z`.
    pub fn text8() -> Self {
        Self::from_chars(std::iter::once(' ').chain('a'..='z'))
    }

    /// Adds the reserved unknown id (no-op if already present).
    pub fn with_unknown(mut self) -> Self {
        if self.unknown.is_none() {
            self.unknown = Some(self.chars.len() as TokenId);
        }
        self
    }

    pub fn size(&self) -> usize {
        self.chars.len() + usize::from(self.unknown.is_some())
    }

    pub fn chars(&self) -> &[char] {
        &self.chars
    }

    pub fn unknown_id(&self) -> Option<TokenId> {
        self.unknown
    }

    pub fn id(&self, c: char) -> Option<TokenId> {
        self.index.get(&c).copied()
    }

    pub fn char_of(&self, id: TokenId) -> Option<char> {
        if Some(id) == self.unknown {
            return Some(UNKNOWN_CHAR);
        }
        self.chars.get(id as usize).copied()
    }

    /// Encodes `text`; characters outside the vocabulary map to the reserved
    /// id or fail with the offending character offset.
    pub fn encode(&self, text: &str) -> Result<Vec<TokenId>> {
        let mut out = Vec::with_capacity(text.len());
        for (offset, c) in text.chars().enumerate() {
            match (self.id(c), self.unknown) {
                (Some(id), _) => out.push(id),
                (None, Some(unk)) => out.push(unk),
                (None, None) => {
                    return Err(Error::Corpus(format!(
                        "character {c:?} at offset {offset} is not in the vocabulary"
                    )))
                }
            }
        }
        Ok(out)
    }

    pub fn decode(&self, ids: &[TokenId]) -> String {
        ids.iter()
            .map(|&id| self.char_of(id).unwrap_or(UNKNOWN_CHAR))
            .collect()
    }

    /// Serialized form: the characters in id order, then a flag for the
    /// reserved id.
    pub fn to_spec(&self) -> String {
        let escaped: String = self
            .chars
            .iter()
            .map(|c| format!("{:04x}", *c as u32))
            .collect::<Vec<_>>()
            .join(",");
        format!("{}|{}", escaped, u8::from(self.unknown.is_some()))
    }

    pub fn from_spec(spec: &str) -> Result<Self> {
        let (chars, unk) = spec
            .rsplit_once('|')
            .ok_or_else(|| Error::Config(format!("malformed vocabulary {spec:?}")))?;
        let mut parsed = Vec::new();
        for part in chars.split(',').filter(|p| !p.is_empty()) {
            let code = u32::from_str_radix(part, 16)
                .ok()
                .and_then(char::from_u32)
                .ok_or_else(|| Error::Config(format!("bad code point {part:?} in vocabulary")))?;
            parsed.push(code);
        }
        let vocab = Vocabulary::from_chars(parsed.iter().copied());
        if vocab.chars.len() != parsed.len() || vocab.chars != parsed {
            return Err(Error::Config("vocabulary must be sorted and distinct".into()));
        }
        Ok(match unk {
            "1" => vocab.with_unknown(),
            "0" => vocab,
            other => return Err(Error::Config(format!("bad unknown flag {other:?}"))),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn sorted_by_code_point() {
        let v = Vocabulary::from_text("hello world");
        assert_eq!(v.chars(), &[' ', 'd', 'e', 'h', 'l', 'o', 'r', 'w']);
        assert_eq!(v.id(' '), Some(0));
        assert_eq!(Vocabulary::text8().size(), 27);
    }

    #[test]
    fn unknown_handling() {
        let v = Vocabulary::from_text("ab");
        assert!(v.encode("abc").is_err());
        let v = v.with_unknown();
        assert_eq!(v.encode("abc").unwrap(), vec![0, 1, 2]);
        assert_eq!(v.decode(&[2]), UNKNOWN_CHAR.to_string());
        assert_eq!(v.size(), 3);
    }

    #[test]
    fn spec_round_trip() {
        let v = Vocabulary::from_text("N <unk> ab").with_unknown();
        assert_eq!(Vocabulary::from_spec(&v.to_spec()).unwrap(), v);
        let v = Vocabulary::text8();
        assert_eq!(Vocabulary::from_spec(&v.to_spec()).unwrap(), v);
    }

    proptest! {
        #[test]
        fn decode_encode_round_trip(s in "[a-z <>N]{0,64}") {
            let v = Vocabulary::from_text("abcdefghijklmnopqrstuvwxyz <>N");
            prop_assert_eq!(v.decode(&v.encode(&s).unwrap()), s);
        }
    }
}
