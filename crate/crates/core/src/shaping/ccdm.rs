//! Constant composition distribution matching.
//!
//! Every codeword is a permutation of one fixed amplitude multiset. Indices map to
//! the lexicographically first `2^k` permutations through exact multiset ranking,
//! which is the arithmetic-coding interval recursion with integer endpoints.

use num_bigint::BigUint;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use super::mb::fit_mb;
use super::{AmplitudeAlphabet, ShapingRate};
use crate::error::{Error, Result};

/// Number of occurrences of each amplitude level in a block.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CcdmComposition {
    pub alphabet: AmplitudeAlphabet,
    pub counts: Vec<u64>,
}

impl CcdmComposition {
    pub fn new(alphabet: &AmplitudeAlphabet, counts: Vec<u64>) -> Result<Self> {
        if counts.len() != alphabet.len() {
            return Err(Error::config(
                "composition",
                format!("{} counts for {} levels", counts.len(), alphabet.len()),
            ));
        }
        if counts.iter().sum::<u64>() == 0 {
            return Err(Error::config("composition", "empty block"));
        }
        Ok(Self {
            alphabet: alphabet.clone(),
            counts,
        })
    }

    pub fn n(&self) -> usize {
        self.counts.iter().sum::<u64>() as usize
    }

    /// `n! / Π c_a!`, the number of distinct permutations.
    pub fn multinomial(&self) -> BigUint {
        multinomial(&self.counts)
    }

    /// `floor(log2 multinomial)`.
    pub fn capacity_bits(&self) -> u64 {
        self.multinomial().bits() - 1
    }

    pub fn avg_energy(&self) -> f64 {
        let total: u64 = self
            .alphabet
            .levels()
            .zip(&self.counts)
            .map(|(a, &c)| u64::from(a * a) * c)
            .sum();
        total as f64 / self.n() as f64
    }

    pub fn probabilities(&self) -> Vec<f64> {
        let n = self.n() as f64;
        self.counts.iter().map(|&c| c as f64 / n).collect()
    }
}

fn multinomial(counts: &[u64]) -> BigUint {
    // running product of binomials keeps every intermediate exact
    let mut acc = BigUint::one();
    let mut placed = 0u64;
    for &c in counts {
        for i in 1..=c {
            acc *= placed + i;
            acc /= i;
        }
        placed += c;
    }
    acc
}

/// Largest-remainder rounding of `n · p` to integers summing to `n`. Ties in the
/// remainders go to the smaller amplitude.
pub fn quantize_composition(
    alphabet: &AmplitudeAlphabet,
    n: usize,
    probabilities: &[f64],
) -> Result<CcdmComposition> {
    if probabilities.len() != alphabet.len() {
        return Err(Error::config("composition", "probability vector length"));
    }
    let scaled: Vec<f64> = probabilities.iter().map(|p| p * n as f64).collect();
    let mut counts: Vec<u64> = scaled.iter().map(|x| x.floor() as u64).collect();
    let assigned: u64 = counts.iter().sum();
    let mut order: Vec<usize> = (0..counts.len()).collect();
    order.sort_by(|&a, &b| {
        let ra = scaled[a] - scaled[a].floor();
        let rb = scaled[b] - scaled[b].floor();
        rb.total_cmp(&ra).then(a.cmp(&b))
    });
    for &i in order.iter().take((n as u64).saturating_sub(assigned) as usize) {
        counts[i] += 1;
    }
    CcdmComposition::new(alphabet, counts)
}

/// A single-symbol move: one occurrence of level `from` becomes level `to`.
struct Move {
    from: usize,
    to: usize,
    multinomial: BigUint,
    delta_energy: f64,
    delta_bits: f64,
}

fn candidate_moves(comp: &CcdmComposition, mult: &BigUint) -> Vec<Move> {
    let levels: Vec<f64> = comp.alphabet.levels().map(|a| f64::from(a * a)).collect();
    let mut out = Vec::new();
    for from in 0..comp.counts.len() {
        if comp.counts[from] == 0 {
            continue;
        }
        for to in 0..comp.counts.len() {
            if to == from {
                continue;
            }
            let cf = comp.counts[from];
            let ct = comp.counts[to];
            // n!/Π c! changes by c_from / (c_to + 1)
            out.push(Move {
                from,
                to,
                multinomial: mult * cf / (ct + 1),
                delta_energy: levels[to] - levels[from],
                delta_bits: (cf as f64 / (ct + 1) as f64).log2(),
            });
        }
    }
    out
}

/// Picks the composition for a CCDM of length `n` at `rate`: largest-remainder
/// quantization of the matching MB distribution, raised to the required capacity
/// if rounding fell short, then moved greedily toward lower energy while
/// `floor(log2 multinomial) >= floor(n · rate)` still holds.
pub fn ccdm_select_composition(
    alphabet: &AmplitudeAlphabet,
    n: usize,
    rate: ShapingRate,
) -> Result<CcdmComposition> {
    if n == 0 {
        return Err(Error::config("shaping.n", "block length must be positive"));
    }
    let target = rate.bits_per_block(n);
    if target == 0 {
        let mut counts = vec![0; alphabet.len()];
        counts[0] = n as u64;
        return CcdmComposition::new(alphabet, counts);
    }
    let uniform = quantize_composition(alphabet, n, &vec![1.0 / alphabet.len() as f64; alphabet.len()])?;
    let best_bits = uniform.capacity_bits();
    if best_bits < target {
        return Err(Error::InfeasibleRate {
            requested_bits: target,
            achievable_bits: best_bits,
        });
    }
    let mb = fit_mb(alphabet, rate.as_f64().min(alphabet.max_rate_bits()))?;
    let mut comp = quantize_composition(alphabet, n, &mb.probabilities)?;
    let mut mult = comp.multinomial();

    // raise capacity: cheapest energy per gained bit first
    while mult.bits() - 1 < target {
        let best = candidate_moves(&comp, &mult)
            .into_iter()
            .filter(|m| m.multinomial > mult)
            .min_by(|a, b| {
                (a.delta_energy / a.delta_bits).total_cmp(&(b.delta_energy / b.delta_bits))
            })
            .expect("the uniform composition meets the target, so a rate-raising move exists");
        comp.counts[best.from] -= 1;
        comp.counts[best.to] += 1;
        mult = best.multinomial;
    }

    // lower energy: most energy saved per lost bit, never dropping below target
    loop {
        let best = candidate_moves(&comp, &mult)
            .into_iter()
            .filter(|m| m.delta_energy < 0.0 && m.multinomial.bits() > target)
            .min_by(|a, b| {
                let ea = a.delta_energy / (-a.delta_bits).max(1e-12);
                let eb = b.delta_energy / (-b.delta_bits).max(1e-12);
                ea.total_cmp(&eb).then(a.from.cmp(&b.from)).then(a.to.cmp(&b.to))
            });
        match best {
            Some(m) => {
                comp.counts[m.from] -= 1;
                comp.counts[m.to] += 1;
                mult = m.multinomial;
            }
            None => break,
        }
    }
    Ok(comp)
}

/// Encoder/decoder over a fixed composition, carrying `k` bits per block.
#[derive(Debug, Clone)]
pub struct CcdmCodec {
    composition: CcdmComposition,
    k: u64,
}

impl CcdmCodec {
    pub fn new(composition: CcdmComposition, k: u64) -> Result<Self> {
        let capacity = composition.capacity_bits();
        if k > capacity {
            return Err(Error::InfeasibleRate {
                requested_bits: k,
                achievable_bits: capacity,
            });
        }
        Ok(Self { composition, k })
    }

    pub fn composition(&self) -> &CcdmComposition {
        &self.composition
    }

    pub fn k(&self) -> u64 {
        self.k
    }

    pub fn n(&self) -> usize {
        self.composition.n()
    }

    /// The permutation of rank `index`.
    pub fn encode(&self, index: &BigUint) -> Result<Vec<u32>> {
        if *index >= BigUint::one() << self.k {
            return Err(Error::IndexOutOfRange { bits: self.k });
        }
        let alphabet = &self.composition.alphabet;
        let mut counts = self.composition.counts.clone();
        let mut remaining = self.n() as u64;
        let mut total = self.composition.multinomial();
        let mut rank = index.clone();
        let mut out = Vec::with_capacity(self.n());
        while remaining > 0 {
            for j in 0..counts.len() {
                if counts[j] == 0 {
                    continue;
                }
                // permutations of the remainder that start with level j
                let sub = &total * counts[j] / remaining;
                if rank < sub {
                    out.push(alphabet.level(j));
                    counts[j] -= 1;
                    total = sub;
                    break;
                }
                rank -= sub;
            }
            remaining -= 1;
        }
        Ok(out)
    }

    pub fn decode(&self, seq: &[u32]) -> Result<BigUint> {
        let alphabet = &self.composition.alphabet;
        let mut counts = vec![0u64; alphabet.len()];
        for &a in seq {
            let j = alphabet
                .index_of(a)
                .ok_or_else(|| Error::NotACodeword(format!("amplitude {a} not in alphabet")))?;
            counts[j] += 1;
        }
        if counts != self.composition.counts {
            return Err(Error::NotACodeword(format!(
                "composition {counts:?} differs from {:?}",
                self.composition.counts
            )));
        }
        let mut remaining = seq.len() as u64;
        let mut total = self.composition.multinomial();
        let mut rank = BigUint::zero();
        for &a in seq {
            let jp = alphabet.index_of(a).expect("checked above");
            for j in 0..jp {
                if counts[j] > 0 {
                    rank += &total * counts[j] / remaining;
                }
            }
            total = &total * counts[jp] / remaining;
            counts[jp] -= 1;
            remaining -= 1;
        }
        if rank >= BigUint::one() << self.k {
            return Err(Error::NotACodeword(format!(
                "rank {rank} is beyond the 2^{} used codewords",
                self.k
            )));
        }
        Ok(rank)
    }
}
