use serde::{Deserialize, Serialize};

use super::{AugmentedPair, Representation};
use crate::linalg::{trace_word, CMat, C64};

/// Traces of a fixed list of words in a few matrices.
///
/// Every value carries a magnitude bound (the product of the Frobenius norms
/// of its letters, at least 1) so that comparisons are relative to the size
/// the word can attain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Fingerprint {
    pub words: Vec<Vec<usize>>,
    pub values: Vec<C64>,
    pub scales: Vec<f64>,
}

impl Fingerprint {
    pub fn evaluate(mats: &[&CMat], words: Vec<Vec<usize>>) -> Fingerprint {
        let norms: Vec<f64> = mats.iter().map(|m| m.norm_fro()).collect();
        let values = words
            .iter()
            .map(|w| trace_word(mats, w).expect("words index into the alphabet"))
            .collect();
        let scales = words
            .iter()
            .map(|w| w.iter().map(|&i| norms[i]).product::<f64>().max(1.0))
            .collect();
        Fingerprint { words, values, scales }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Largest absolute difference over matching words.
    pub fn max_abs_diff(&self, other: &Fingerprint) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Largest difference relative to the word magnitude bound.
    pub fn distance(&self, other: &Fingerprint) -> f64 {
        assert_eq!(self.words, other.words, "fingerprints over different word sets");
        self.values
            .iter()
            .zip(&other.values)
            .zip(self.scales.iter().zip(&other.scales))
            .map(|((a, b), (sa, sb))| (a - b).norm() / sa.max(*sb))
            .fold(0.0, f64::max)
    }
}

/// Lexicographically least rotation of `w`.
fn canonical_rotation(w: &[usize]) -> Vec<usize> {
    (0..w.len())
        .map(|s| w[s..].iter().chain(&w[..s]).copied().collect::<Vec<_>>())
        .min()
        .unwrap_or_default()
}

/// Words over an alphabet of `letters` symbols up to length `max_len`.
///
/// All cyclic classes up to length 4 are listed; beyond that only pure powers
/// of every letter and the two-letter words `0ⁱ1ʲ` are kept, so the count
/// grows linearly rather than exponentially in `max_len`.
pub fn trace_word_set(letters: usize, max_len: usize) -> Vec<Vec<usize>> {
    let mut out: Vec<Vec<usize>> = Vec::new();
    let full = max_len.min(4);
    for len in 1..=full {
        let total = letters.pow(len as u32);
        for mut code in 0..total {
            let mut w = vec![0; len];
            for slot in w.iter_mut().rev() {
                *slot = code % letters;
                code /= letters;
            }
            if canonical_rotation(&w) == w {
                out.push(w);
            }
        }
    }
    for len in full + 1..=max_len {
        for l in 0..letters {
            out.push(vec![l; len]);
        }
        if letters >= 2 {
            for i in 1..len {
                let mut w = vec![0; i];
                w.extend(std::iter::repeat_n(1, len - i));
                out.push(w);
            }
        }
    }
    out
}

/// Trace words in `(A, B, vw)` up to length `max_len` (default `2n`).
pub fn fingerprint(r: &Representation, max_len: Option<usize>) -> Fingerprint {
    let vw = &r.v * &r.w;
    let len = max_len.unwrap_or(2 * r.n).max(1);
    Fingerprint::evaluate(&[&r.a, &r.b, &vw], trace_word_set(3, len))
}

/// Trace words in `(Â, B̂, E_{n+1,n+1})`; invariant under conjugation by
/// `diag(L, 1)`.
pub fn pair_fingerprint(p: &AugmentedPair, max_len: Option<usize>) -> Fingerprint {
    let n = p.n();
    let corner = CMat::unit(n + 1, n + 1, n, n);
    let len = max_len.unwrap_or(2 * n).max(2);
    Fingerprint::evaluate(&[&p.a_hat, &p.b_hat, &corner], trace_word_set(3, len))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn word_set_counts_necklaces() {
        // binary necklaces of length 1..4: 2, 3, 4, 6
        assert_eq!(trace_word_set(2, 4).len(), 15);
        // ternary necklaces of length 1..2: 3 + 6
        assert_eq!(trace_word_set(3, 2).len(), 9);
    }

    #[test]
    fn long_words_are_sparse() {
        let words = trace_word_set(3, 6);
        let long: Vec<_> = words.iter().filter(|w| w.len() == 6).collect();
        assert_eq!(long.len(), 3 + 5);
        assert!(long.contains(&&vec![0; 6]));
        assert!(long.contains(&&vec![0, 0, 1, 1, 1, 1]));
    }

    #[test]
    fn canonical_rotation_is_least() {
        assert_eq!(canonical_rotation(&[2, 0, 1]), vec![0, 1, 2]);
        assert_eq!(canonical_rotation(&[1, 0, 1, 0]), vec![0, 1, 0, 1]);
    }
}
