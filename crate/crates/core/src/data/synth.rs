//! Deterministic synthetic corpora for fixtures, examples and desk-scale
//! experiments when the real corpora are not on disk.

use crate::tensor::Rng;

/// `pattern` repeated and cut to exactly `len` characters.
pub fn periodic(pattern: &str, len: usize) -> String {
    assert!(!pattern.is_empty(), "pattern must be non-empty");
    pattern.chars().cycle().take(len).collect()
}

/// English-flavoured text over `a-z` and space.
///
/// Words come from a fixed pseudo-lexicon spelled by a letter-level Markov
/// chain; word frequencies are Zipfian and each word has a few favoured
/// successors, so there is structure at both the character and the word
/// level. The output is exactly `len` characters and depends only on `seed`.
pub fn text8_like(len: usize, seed: u64) -> String {
    const LEXICON: usize = 1500;
    const VOWELS: &[u8] = b"aeiou";
    const CONSONANTS: &[u8] = b"bcdfghjklmnpqrstvwxyz";

    let mut rng = Rng::new(seed);

    // sparse letter transitions: each letter prefers four followers
    let letters: Vec<u8> = (b'a'..=b'z').collect();
    let follow: Vec<Vec<u8>> = letters
        .iter()
        .map(|&c| {
            let pool = if VOWELS.contains(&c) { CONSONANTS } else { VOWELS };
            let mut f: Vec<u8> = (0..3).map(|_| pool[rng.below(pool.len())]).collect();
            f.push(letters[rng.below(26)]);
            f
        })
        .collect();

    let mut words: Vec<String> = Vec::with_capacity(LEXICON);
    while words.len() < LEXICON {
        let wlen = 1 + rng.below(3) + rng.below(3) + rng.below(4);
        let mut c = if rng.unit() < 0.3 {
            VOWELS[rng.below(VOWELS.len())]
        } else {
            CONSONANTS[rng.below(CONSONANTS.len())]
        };
        let mut w = String::with_capacity(wlen);
        w.push(c as char);
        for _ in 1..wlen {
            let opts = &follow[(c - b'a') as usize];
            // mostly follow the chain, occasionally any letter
            c = if rng.unit() < 0.85 {
                opts[rng.below(opts.len())]
            } else {
                letters[rng.below(26)]
            };
            w.push(c as char);
        }
        if !words.contains(&w) {
            words.push(w);
        }
    }

    let zipf: Vec<f64> = (1..=LEXICON).map(|r| 1.0 / r as f64).collect();
    let successors: Vec<[usize; 3]> = (0..LEXICON)
        .map(|_| [0, 1, 2].map(|_| rng.categorical(&zipf)))
        .collect();

    let mut out = String::with_capacity(len + 16);
    let mut prev = rng.categorical(&zipf);
    while out.len() < len {
        out.push_str(&words[prev]);
        out.push(' ');
        prev = if rng.unit() < 0.5 {
            successors[prev][rng.below(3)]
        } else {
            rng.categorical(&zipf)
        };
    }
    out.truncate(len);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn periodic_exact_length() {
        assert_eq!(periodic("abc", 7), "abcabca");
    }

    #[test]
    fn text8_like_is_deterministic_and_in_alphabet() {
        let a = text8_like(5000, 1);
        assert_eq!(a.len(), 5000);
        assert_eq!(a, text8_like(5000, 1));
        assert_ne!(a, text8_like(5000, 2));
        assert!(a.chars().all(|c| c == ' ' || c.is_ascii_lowercase()));
        assert!(!a.contains("  "));
    }
}
