//! Sign codes with pairwise Hamming distance at least `K/8`.

use rand::Rng;

use crate::error::{invalid, Result};
use crate::numerics::SeededRng;

/// Lengths up to this are built by scanning the whole cube in order.
pub const EXHAUSTIVE_MAX_LEN: usize = 24;

/// Refuse to materialize more codewords than this.
pub const MAX_CODEWORDS: usize = 1 << 20;

/// Codewords in `{−1, +1}^K`. Bit 0 maps to `+1`, bit 1 to `−1`, so the
/// all-zero reference word is the all-`+1` codeword stored first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SignFamily {
    pub k: usize,
    pub codewords: Vec<Vec<i8>>,
}

impl SignFamily {
    /// The reference word in `{0, 1}` coordinates.
    pub fn reference_bits(&self) -> Vec<u8> {
        vec![0; self.k]
    }

    pub fn len(&self) -> usize {
        self.codewords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.codewords.is_empty()
    }

    pub fn min_distance(&self) -> Option<usize> {
        let mut best: Option<usize> = None;
        for (i, a) in self.codewords.iter().enumerate() {
            for b in &self.codewords[i + 1..] {
                let h = hamming(a, b);
                best = Some(best.map_or(h, |m| m.min(h)));
            }
        }
        best
    }

    /// Full pairwise check against the `K/8` distance and `2^{K/8}` size bounds.
    pub fn audit(&self) -> Result<()> {
        if self.codewords.iter().any(|c| c.len() != self.k || c.iter().any(|&s| s != 1 && s != -1)) {
            return Err(invalid("codewords must be ±1 vectors of the family length"));
        }
        let need = min_distance_for(self.k);
        if let Some(m) = self.min_distance() {
            if m < need {
                return Err(invalid(format!("minimum distance {m} is below {need}")));
            }
        }
        if self.len() < target_size(self.k) {
            return Err(invalid(format!("{} codewords, need at least {}", self.len(), target_size(self.k))));
        }
        Ok(())
    }
}

pub fn hamming(a: &[i8], b: &[i8]) -> usize {
    a.iter().zip(b).filter(|(x, y)| x != y).count()
}

/// `⌈K/8⌉`.
pub fn min_distance_for(k: usize) -> usize {
    k.div_ceil(8)
}

/// `⌈2^{K/8}⌉`, saturating.
pub fn target_size(k: usize) -> usize {
    let v = 2f64.powf(k as f64 / 8.0).ceil();
    if v >= usize::MAX as f64 {
        usize::MAX
    } else {
        v as usize
    }
}

fn to_signs(bits: u64, k: usize) -> Vec<i8> {
    (0..k).map(|i| if (bits >> (k - 1 - i)) & 1 == 1 { -1 } else { 1 }).collect()
}

/// Family of length `K` with pairwise distance `≥ K/8` and at least `2^{K/8}` members.
pub fn varshamov_gilbert(k: usize, rng: &mut SeededRng) -> Result<SignFamily> {
    let target = target_size(k);
    if target > MAX_CODEWORDS {
        return Err(invalid(format!(
            "length {k} needs {target} codewords, more than the {MAX_CODEWORDS} this builder materializes"
        )));
    }
    sign_family(k, target, rng)
}

/// Like [`varshamov_gilbert`] but stops after `size` codewords, which may be
/// fewer than `2^{K/8}`; the distance guarantee is kept.
pub fn sign_family(k: usize, size: usize, rng: &mut SeededRng) -> Result<SignFamily> {
    if k < 8 {
        return Err(invalid(format!("sign codes need K >= 8, got {k}")));
    }
    if size == 0 {
        return Err(invalid("sign code size must be positive"));
    }
    let need = min_distance_for(k);
    let mut codewords: Vec<Vec<i8>> = Vec::new();
    if k <= EXHAUSTIVE_MAX_LEN {
        // Lexicographic greedy over the full cube.
        for bits in 0..(1u64 << k) {
            let w = to_signs(bits, k);
            if codewords.iter().all(|c| hamming(c, &w) >= need) {
                codewords.push(w);
                if codewords.len() == size {
                    break;
                }
            }
        }
        if codewords.len() < size.min(target_size(k)) {
            return Err(invalid(format!("exhaustive search found only {} codewords", codewords.len())));
        }
    } else {
        codewords.push(vec![1; k]);
        let max_draws = 1000 * size + 10_000;
        let mut draws = 0usize;
        while codewords.len() < size {
            if draws == max_draws {
                return Err(invalid(format!(
                    "randomized greedy stalled at {} of {size} codewords",
                    codewords.len()
                )));
            }
            draws += 1;
            let w: Vec<i8> = (0..k).map(|_| if rng.random::<bool>() { -1 } else { 1 }).collect();
            if codewords.iter().all(|c| hamming(c, &w) >= need) {
                codewords.push(w);
            }
        }
    }
    Ok(SignFamily { k, codewords })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_lengths_meet_both_bounds() {
        let mut rng = SeededRng::new(0);
        for k in [8, 16, 24] {
            let fam = varshamov_gilbert(k, &mut rng).unwrap();
            fam.audit().unwrap();
            assert!(fam.len() >= target_size(k));
            assert_eq!(fam.codewords[0], vec![1; k]);
        }
        assert_eq!(target_size(8), 2);
        assert_eq!(target_size(16), 4);
        assert_eq!(min_distance_for(16), 2);
    }

    #[test]
    fn long_codes_use_random_greedy() {
        let fam = varshamov_gilbert(40, &mut SeededRng::new(3)).unwrap();
        fam.audit().unwrap();
        assert_eq!(fam.len(), 32);
    }

    #[test]
    fn rejects_short_and_huge() {
        let mut rng = SeededRng::new(0);
        assert!(varshamov_gilbert(7, &mut rng).is_err());
        assert!(varshamov_gilbert(400, &mut rng).is_err());
        let capped = sign_family(400, 16, &mut rng).unwrap();
        assert_eq!(capped.len(), 16);
        assert!(capped.min_distance().unwrap() >= 50);
    }
}
