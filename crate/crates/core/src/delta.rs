//! Minimal pairwise distance among level-n compositions, and exact-overlap
//! detection.
//!
//! The distance search never does the full quadratic sweep: compositions are
//! embedded into R^{1+d^2+d}, bucketed on a grid whose side is the current
//! best distance, and only neighbor buckets are compared. Any pair at
//! distance below the bucket side differs by less than the side in every
//! embedding coordinate, so it lands in adjacent buckets and is found.

use std::collections::HashMap;

use crate::error::{FelError, Result};
use crate::ifs::{IFSSystem, Word};
use crate::rational::RatSimilitude;

/// Result of the separation scan.
#[derive(Debug, Clone)]
pub struct DeltaReport {
    pub n: u32,
    pub delta: f64,
    /// Lexicographically least minimizing pair (0-based words).
    pub argmin: (Word, Word),
    /// True when the minimum is an exact-rational coincidence.
    pub exact_zero: bool,
}

struct Embedded {
    /// Embedding coordinates per composition (t, U row-major, a).
    coords: Vec<f64>,
    word_id: u64,
}

fn decode_word(id: u64, n: u32, alphabet: usize) -> Word {
    let mut w = vec![0u8; n as usize];
    let mut x = id;
    for i in (0..n as usize).rev() {
        w[i] = (x % alphabet as u64) as u8;
        x /= alphabet as u64;
    }
    w
}

/// Eq.-47 distance from embedding slices.
fn dist_47(a: &[f64], b: &[f64], d: usize) -> f64 {
    let dt = (a[0] - b[0]).abs();
    // operator norm of the U difference
    let m = nalgebra::DMatrix::from_fn(d, d, |i, j| a[1 + i * d + j] - b[1 + i * d + j]);
    let du = crate::linalg::operator_norm(&m);
    let mut da = 0.0;
    for i in 0..d {
        let x = a[1 + d * d + i] - b[1 + d * d + i];
        da += x * x;
    }
    dt + du + da.sqrt()
}

/// Delta_n: minimum Eq.-47 distance over distinct equal-length words, with a
/// lexicographic tie-break on the word pair. In exact mode a rational
/// coincidence short-circuits to an exact zero.
pub fn delta_n(sys: &IFSSystem, n: u32, budget: u64) -> Result<DeltaReport> {
    if n == 0 {
        return Err(FelError::InvalidParameter("delta needs n >= 1".into()));
    }
    sys.check_budget(n, budget)?;
    if let Some(pair) = exact_overlap_at(sys, n, budget)? {
        return Ok(DeltaReport { n, delta: 0.0, argmin: pair, exact_zero: true });
    }
    let d = sys.dim();
    let stride = 1 + d * d + d;
    let alphabet = sys.alphabet_len();

    let mut items: Vec<Embedded> = Vec::with_capacity(sys.word_count(n) as usize);
    {
        let mut word_id = 0u64;
        sys.compositions(n, budget, |_, g, _| {
            items.push(Embedded { coords: g.embedding(), word_id });
            word_id += 1;
        })?;
    }

    // initial upper bound: lexicographic-consecutive pairs of the embedding
    let mut order: Vec<usize> = (0..items.len()).collect();
    order.sort_by(|&i, &j| {
        items[i]
            .coords
            .iter()
            .zip(&items[j].coords)
            .map(|(a, b)| a.partial_cmp(b).unwrap())
            .find(|o| *o != std::cmp::Ordering::Equal)
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let mut best = f64::INFINITY;
    let mut best_pair = (0u64, 0u64);
    let consider = |i: usize, j: usize, best: &mut f64, best_pair: &mut (u64, u64)| {
        let a = &items[i];
        let b = &items[j];
        if a.word_id == b.word_id {
            return;
        }
        let dist = dist_47(&a.coords, &b.coords, d);
        let pair = if a.word_id < b.word_id {
            (a.word_id, b.word_id)
        } else {
            (b.word_id, a.word_id)
        };
        if dist < *best - 1e-18 || (dist <= *best + 1e-18 && pair < *best_pair) {
            *best = dist;
            *best_pair = pair;
        }
    };
    for w in order.windows(2) {
        consider(w[0], w[1], &mut best, &mut best_pair);
    }

    // shrinking bucket passes: complete for all pairs within the bucket side
    loop {
        let side = best;
        if !(side.is_finite() && side > 0.0) {
            break;
        }
        let mut buckets: HashMap<Vec<i64>, Vec<usize>> = HashMap::new();
        for (idx, it) in items.iter().enumerate() {
            let key: Vec<i64> = it.coords.iter().map(|&x| (x / side).floor() as i64).collect();
            buckets.entry(key).or_default().push(idx);
        }
        let prev_best = best;
        let mut neighbor = vec![0i64; stride];
        for (key, members) in buckets.iter() {
            // same-bucket pairs
            for i in 0..members.len() {
                for j in i + 1..members.len() {
                    consider(members[i], members[j], &mut best, &mut best_pair);
                }
            }
            // neighbor buckets in strictly-greater lexicographic order to
            // avoid double work
            let mut carry = vec![-1i64; stride];
            loop {
                // advance odometer over {-1,0,1}^stride
                let mut pos = 0;
                loop {
                    if pos == stride {
                        break;
                    }
                    carry[pos] += 1;
                    if carry[pos] <= 1 {
                        break;
                    }
                    carry[pos] = -1;
                    pos += 1;
                }
                if pos == stride {
                    break;
                }
                if carry.iter().all(|&c| c == 0) {
                    continue;
                }
                if carry.iter().rev().find(|&&c| c != 0).map(|&c| c < 0).unwrap_or(false) {
                    continue; // visit each unordered neighbor pair once
                }
                for (i, k) in key.iter().enumerate() {
                    neighbor[i] = k + carry[i];
                }
                if let Some(others) = buckets.get(&neighbor) {
                    for &i in members {
                        for &j in others {
                            consider(i, j, &mut best, &mut best_pair);
                        }
                    }
                }
            }
        }
        if best >= prev_best * 0.999999 {
            break;
        }
    }

    Ok(DeltaReport {
        n,
        delta: best,
        argmin: (
            decode_word(best_pair.0, n, alphabet),
            decode_word(best_pair.1, n, alphabet),
        ),
        exact_zero: false,
    })
}

/// Brute-force reference for validating the bucketed search on small systems.
pub fn delta_n_bruteforce(sys: &IFSSystem, n: u32, budget: u64) -> Result<DeltaReport> {
    sys.check_budget(n, budget)?;
    let d = sys.dim();
    let mut items: Vec<Vec<f64>> = Vec::new();
    sys.compositions(n, budget, |_, g, _| items.push(g.embedding()))?;
    let mut best = f64::INFINITY;
    let mut best_pair = (0u64, 0u64);
    for i in 0..items.len() {
        for j in i + 1..items.len() {
            let dist = dist_47(&items[i], &items[j], d);
            let pair = (i as u64, j as u64);
            if dist < best - 1e-18 || (dist <= best + 1e-18 && pair < best_pair) {
                best = dist;
                best_pair = pair;
            }
        }
    }
    Ok(DeltaReport {
        n,
        delta: best,
        argmin: (
            decode_word(best_pair.0, n, sys.alphabet_len()),
            decode_word(best_pair.1, n, sys.alphabet_len()),
        ),
        exact_zero: false,
    })
}

fn exact_overlap_at(sys: &IFSSystem, n: u32, budget: u64) -> Result<Option<(Word, Word)>> {
    let comps = match sys.rational_compositions(n, budget)? {
        Some(c) => c,
        None => return Ok(None),
    };
    let mut seen: HashMap<RatSimilitude, Word> = HashMap::new();
    for (word, g, _) in comps {
        if let Some(first) = seen.get(&g) {
            return Ok(Some((first.clone(), word)));
        }
        seen.insert(g, word);
    }
    Ok(None)
}

/// Numerically coincident pair (distance below tol) for systems without
/// rational coefficients.
#[derive(Debug, Clone)]
pub struct OverlapReport {
    pub n: u32,
    pub words: (Word, Word),
    /// Exact rational equality vs numerical coincidence at 1e-12.
    pub exact: bool,
}

/// First n <= n_max at which two distinct words yield the same map.
pub fn exact_overlaps(sys: &IFSSystem, n_max: u32, budget: u64) -> Result<Option<OverlapReport>> {
    for n in 1..=n_max {
        if sys.rational().is_some() {
            if let Some(words) = exact_overlap_at(sys, n, budget)? {
                return Ok(Some(OverlapReport { n, words, exact: true }));
            }
        } else {
            let rep = delta_n(sys, n, budget)?;
            if rep.delta <= 1e-12 {
                return Ok(Some(OverlapReport { n, words: rep.argmin, exact: false }));
            }
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::named;

    #[test]
    fn cantor_delta_1() {
        let sys = named::cantor3();
        let rep = delta_n(&sys, 1, 1 << 20).unwrap();
        assert!((rep.delta - 2.0 / 3.0).abs() < 1e-12);
        assert_eq!(rep.argmin, (vec![0], vec![1]));
    }

    #[test]
    fn cantor_delta_scales_by_thirds() {
        // Delta_n = (2/3) 3^{-(n-1)} by self-similar separation
        let sys = named::cantor3();
        for n in 1..=6u32 {
            let rep = delta_n(&sys, n, 1 << 20).unwrap();
            let want = (2.0 / 3.0) * 3.0f64.powi(-(n as i32 - 1));
            assert!((rep.delta - want).abs() < 1e-9, "n={n}: {} vs {want}", rep.delta);
        }
    }

    #[test]
    fn overlap_system_delta_zero() {
        let sys = named::dyadic_overlap();
        let rep = delta_n(&sys, 2, 1 << 20).unwrap();
        assert_eq!(rep.delta, 0.0);
        assert!(rep.exact_zero);
    }

    #[test]
    fn overlap_detection() {
        // {x/2, x/2}: overlap at n = 1
        let sys = named::duplicate_halving();
        let rep = exact_overlaps(&sys, 4, 1 << 20).unwrap().unwrap();
        assert_eq!(rep.n, 1);
        assert!(rep.exact);

        // {x/2, x/2+1/2, x/2+1}: overlap at n = 2 with words (1,3)/(2,1)
        let sys = named::dyadic_overlap();
        let rep = exact_overlaps(&sys, 4, 1 << 20).unwrap().unwrap();
        assert_eq!(rep.n, 2);
        assert_eq!(rep.words, (vec![0, 2], vec![1, 0]));

        // middle-thirds cantor: none up to n = 10
        let sys = named::cantor3();
        assert!(exact_overlaps(&sys, 10, 1 << 22).unwrap().is_none());
    }

    #[test]
    fn bucketed_matches_bruteforce() {
        for sys in [named::cantor3(), named::garsia(), named::fat_sierpinski(0.55).unwrap()] {
            for n in 1..=6u32 {
                if sys.word_count(n) > 1 << 12 {
                    continue;
                }
                let fast = delta_n(&sys, n, 1 << 22).unwrap();
                let brute = delta_n_bruteforce(&sys, n, 1 << 22).unwrap();
                assert!(
                    (fast.delta - brute.delta).abs() <= 1e-12 * (1.0 + brute.delta),
                    "n={n}: {} vs {}",
                    fast.delta,
                    brute.delta
                );
                assert_eq!(fast.argmin, brute.argmin, "n={n}");
            }
        }
    }

    #[test]
    fn delta_decays_exponentially() {
        // log2 Delta_n / n stays below -min t_i + slack on test systems
        for sys in [named::cantor3(), named::garsia()] {
            let min_t = sys.maps().iter().map(|g| g.t).fold(f64::INFINITY, f64::min);
            for n in [4u32, 8] {
                let rep = delta_n(&sys, n, 1 << 22).unwrap();
                let rate = rep.delta.log2() / n as f64;
                assert!(rate <= -min_t + 1.5, "rate {rate} at n={n}");
            }
        }
    }
}
