#![allow(dead_code)]

use drc::script::EditOp;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_text(rng: &mut impl Rng, len: usize, alphabet: &[u8]) -> Vec<u8> {
    (0..len).map(|_| *alphabet.choose(rng).expect("alphabet")).collect()
}

/// A source that shares long stretches with the reference: random substrings
/// of it, with a stray character now and then.
pub fn related_source(rng: &mut impl Rng, reference: &[u8], len: usize) -> Vec<u8> {
    let mut s = Vec::with_capacity(len + 40);
    while s.len() < len {
        if rng.gen_bool(0.2) {
            s.push(*reference.choose(rng).expect("non-empty reference"));
        } else {
            let l = rng.gen_range(1..=40.min(reference.len()));
            let start = rng.gen_range(0..=reference.len() - l);
            s.extend_from_slice(&reference[start..start + l]);
        }
    }
    s.truncate(len);
    s
}

/// A random edit that is valid for a string of length `n`.
pub fn random_edit(rng: &mut impl Rng, n: usize, alphabet: &[u8]) -> EditOp {
    let c = *alphabet.choose(rng).expect("alphabet");
    if n == 0 {
        return EditOp::Insert(1, c);
    }
    match rng.gen_range(0..5) {
        0 => EditOp::Replace(rng.gen_range(1..=n), c),
        1 => EditOp::Insert(rng.gen_range(1..=n + 1), c),
        2 => EditOp::Delete(rng.gen_range(1..=n)),
        3 => EditOp::Access(rng.gen_range(1..=n)),
        _ => {
            let i = rng.gen_range(1..=n);
            EditOp::Extract(i, rng.gen_range(1..=(n - i + 1).min(64)))
        }
    }
}

/// Word salad with a small vocabulary, roughly like prose.
pub fn prose(rng: &mut impl Rng, len: usize) -> Vec<u8> {
    const WORDS: &[&str] = &[
        "the", "of", "and", "a", "to", "in", "is", "that", "for", "it", "as", "was", "with",
        "be", "by", "on", "not", "he", "this", "are", "or", "his", "from", "at", "which",
        "but", "have", "an", "had", "they", "you", "were", "their", "one", "all", "we",
        "can", "her", "has", "there", "been", "if", "more", "when", "will", "would", "who",
        "so", "no", "reference", "string", "block", "cover", "suffix", "tree", "index",
    ];
    let mut s = Vec::with_capacity(len + 16);
    while s.len() < len {
        s.extend_from_slice(WORDS.choose(rng).expect("words").as_bytes());
        s.push(if rng.gen_bool(0.08) { b'\n' } else { b' ' });
    }
    s.truncate(len);
    s
}
