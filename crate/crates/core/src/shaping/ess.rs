//! Enumerative sphere shaping.
//!
//! The trellis counts amplitude sequences whose block energy `Σ a²` stays within
//! a bound. Odd amplitudes satisfy `a² ≡ 1 (mod 8)`, so a block of `n` amplitudes
//! has energy `n + 8w` where `w = Σ (a² - 1)/8`. The table is indexed by that
//! lattice coordinate `w` instead of raw energy, which shrinks it by a factor of
//! eight and makes every stored column reachable.
//!
//! Codewords are the sequences in lexicographic order (smaller amplitudes first)
//! among all sequences with energy at most `E_max`; only the first `2^k` are used.

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};

use super::{big_ratio, AmplitudeAlphabet};
use crate::error::{Error, Result};

/// Which codewords enter energy statistics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EnergyStatistics {
    /// The `2^k` codewords the encoder actually emits.
    #[default]
    UsedCodewords,
    /// Every sequence inside the energy sphere.
    FullCodebook,
}

#[derive(Debug, Clone)]
struct Column {
    /// `counts[i]`: number of suffixes of length `n - i` with lattice weight within budget.
    counts: Vec<BigUint>,
    /// `weights[i]`: total lattice weight summed over those suffixes.
    weights: Vec<BigUint>,
}

#[derive(Debug, Clone)]
pub struct EssTrellis {
    alphabet: AmplitudeAlphabet,
    n: usize,
    k: u64,
    lattice: Vec<usize>,
    budget: usize,
    columns: Vec<Column>,
}

impl EssTrellis {
    /// Builds the smallest sphere that holds at least `2^k` sequences of length `n`.
    pub fn build(alphabet: &AmplitudeAlphabet, n: usize, k: u64) -> Result<Self> {
        if n == 0 {
            return Err(Error::config("shaping.n", "block length must be positive"));
        }
        let size = alphabet.len();
        let all_sequences = BigUint::from(size).pow(n as u32);
        let target = BigUint::one() << k;
        if target > all_sequences {
            return Err(Error::InfeasibleRate {
                requested_bits: k,
                achievable_bits: all_sequences.bits() - 1,
            });
        }

        let lattice = alphabet.lattice_weights();
        let mut columns: Vec<Column> = Vec::new();
        for budget in 0.. {
            let mut counts = vec![BigUint::zero(); n + 1];
            let mut weights = vec![BigUint::zero(); n + 1];
            counts[n] = BigUint::one();
            for i in (0..n).rev() {
                let mut c = BigUint::zero();
                let mut s = BigUint::zero();
                for &t in lattice.iter().take_while(|&&t| t <= budget) {
                    let (tc, ts) = if t == 0 {
                        (&counts[i + 1], &weights[i + 1])
                    } else {
                        let col = &columns[budget - t];
                        (&col.counts[i + 1], &col.weights[i + 1])
                    };
                    c += tc;
                    s += ts + tc * t;
                }
                counts[i] = c;
                weights[i] = s;
            }
            let done = counts[0] >= target;
            columns.push(Column { counts, weights });
            if done {
                return Ok(Self {
                    alphabet: alphabet.clone(),
                    n,
                    k,
                    lattice,
                    budget,
                    columns,
                });
            }
        }
        unreachable!("the full sequence space always meets the target")
    }

    pub fn alphabet(&self) -> &AmplitudeAlphabet {
        &self.alphabet
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> u64 {
        self.k
    }

    /// Maximum block energy `Σ a²`.
    pub fn e_max(&self) -> u64 {
        (self.n + 8 * self.budget) as u64
    }

    /// Number of sequences inside the energy sphere (at least `2^k`).
    pub fn codebook_size(&self) -> &BigUint {
        &self.columns[self.budget].counts[0]
    }

    /// Number of suffixes from position `i` with lattice weight at most `w`.
    fn count(&self, i: usize, w: usize) -> &BigUint {
        &self.columns[w].counts[i]
    }

    fn suffix_weight(&self, i: usize, w: usize) -> &BigUint {
        &self.columns[w].weights[i]
    }

    /// Number of sequences with block energy at most `energy`, for energies up
    /// to `E_max`.
    pub fn sequences_within(&self, energy: u64) -> BigUint {
        if energy < self.n as u64 {
            return BigUint::zero();
        }
        let w = ((energy - self.n as u64) / 8) as usize;
        self.count(0, w.min(self.budget)).clone()
    }

    fn used_codewords(&self) -> BigUint {
        BigUint::one() << self.k
    }

    /// Amplitude sequence of lexicographic rank `index`.
    pub fn encode(&self, index: &BigUint) -> Result<Vec<u32>> {
        if *index >= self.used_codewords() {
            return Err(Error::IndexOutOfRange { bits: self.k });
        }
        Ok(self.encode_unchecked(index))
    }

    /// Inverse of [`encode`](Self::encode).
    pub fn decode(&self, seq: &[u32]) -> Result<BigUint> {
        if seq.len() != self.n {
            return Err(Error::NotACodeword(format!(
                "length {} differs from block length {}",
                seq.len(),
                self.n
            )));
        }
        let mut rank = BigUint::zero();
        let mut w = self.budget;
        for (i, &a) in seq.iter().enumerate() {
            let j = self
                .alphabet
                .index_of(a)
                .ok_or_else(|| Error::NotACodeword(format!("amplitude {a} not in alphabet")))?;
            let t = self.lattice[j];
            if t > w {
                let energy: u64 = seq.iter().map(|&a| u64::from(a * a)).sum();
                return Err(Error::NotACodeword(format!(
                    "block energy {energy} exceeds E_max = {}",
                    self.e_max()
                )));
            }
            for &smaller in &self.lattice[..j] {
                rank += self.count(i + 1, w - smaller);
            }
            w -= t;
        }
        if rank >= self.used_codewords() {
            return Err(Error::NotACodeword(format!(
                "rank {rank} is beyond the 2^{} used codewords",
                self.k
            )));
        }
        Ok(rank)
    }

    /// Average energy per amplitude.
    pub fn avg_energy(&self, stats: EnergyStatistics) -> f64 {
        let (weight, count) = match stats {
            EnergyStatistics::FullCodebook => (
                self.suffix_weight(0, self.budget).clone(),
                self.codebook_size().clone(),
            ),
            EnergyStatistics::UsedCodewords => (self.used_weight(), self.used_codewords()),
        };
        let n = self.n as f64;
        (n + 8.0 * big_ratio(&weight, &count)) / n
    }

    /// Total lattice weight of codewords with rank below `2^k`, accumulated
    /// along the trellis path of rank `2^k`: every branch that sorts before the
    /// path contributes all of its completions.
    fn used_weight(&self) -> BigUint {
        let used = self.used_codewords();
        if used == *self.codebook_size() {
            return self.suffix_weight(0, self.budget).clone();
        }
        let mut total = BigUint::zero();
        let mut rank = used;
        let mut w = self.budget;
        let mut prefix = 0usize;
        for i in 0..self.n {
            for &t in self.lattice.iter().take_while(|&&t| t <= w) {
                let c = self.count(i + 1, w - t);
                if rank < *c {
                    prefix += t;
                    w -= t;
                    break;
                }
                total += c * (prefix + t) + self.suffix_weight(i + 1, w - t);
                rank -= c;
            }
        }
        total
    }

    /// Probability of each amplitude level over the used codewords.
    pub fn amplitude_distribution(&self) -> Vec<f64> {
        let used = self.used_codewords();
        let positional = self.positional_counts();
        let freq = if used == *self.codebook_size() {
            positional[0][self.budget].clone()
        } else {
            // every subtree sorting before the path of rank 2^k is used in full
            let mut freq = vec![BigUint::zero(); self.alphabet.len()];
            let mut prefix = vec![0u64; self.alphabet.len()];
            let mut w = self.budget;
            for (i, a) in self.encode_unchecked(&used).into_iter().enumerate() {
                let jp = self.alphabet.index_of(a).expect("path stays in alphabet");
                for (j, &t) in self.lattice.iter().enumerate().take(jp) {
                    let c = self.count(i + 1, w - t);
                    for (f, &p) in freq.iter_mut().zip(&prefix) {
                        *f += c * p;
                    }
                    freq[j] += c;
                    for (f, sub) in freq.iter_mut().zip(&positional[i + 1][w - t]) {
                        *f += sub;
                    }
                }
                prefix[jp] += 1;
                w -= self.lattice[jp];
            }
            freq
        };
        let total = &used * BigUint::from(self.n);
        freq.iter().map(|f| big_ratio(f, &total)).collect()
    }

    fn encode_unchecked(&self, index: &BigUint) -> Vec<u32> {
        let mut rank = index.clone();
        let mut w = self.budget;
        let mut out = Vec::with_capacity(self.n);
        for i in 0..self.n {
            for (j, &t) in self.lattice.iter().enumerate().take_while(|(_, &t)| t <= w) {
                let c = self.count(i + 1, w - t);
                if rank < *c {
                    out.push(self.alphabet.level(j));
                    w -= t;
                    break;
                }
                rank -= c;
            }
        }
        out
    }

    /// `out[i][w][j]`: occurrences of level j across all suffixes from position i
    /// with budget w.
    fn positional_counts(&self) -> Vec<Vec<Vec<BigUint>>> {
        let size = self.alphabet.len();
        let mut out = vec![vec![vec![BigUint::zero(); size]; self.budget + 1]; self.n + 1];
        for i in (0..self.n).rev() {
            for w in 0..=self.budget {
                let mut acc = vec![BigUint::zero(); size];
                for (j, &t) in self.lattice.iter().enumerate().take_while(|(_, &t)| t <= w) {
                    acc[j] += self.count(i + 1, w - t);
                    for (jj, a) in acc.iter_mut().enumerate() {
                        *a += &out[i + 1][w - t][jj];
                    }
                }
                out[i][w] = acc;
            }
        }
        out
    }

    /// Rate actually delivered, `k / n`.
    pub fn rate_bits(&self) -> f64 {
        self.k as f64 / self.n as f64
    }

    /// Capacity of the full sphere in bits, `log2 |codebook|`.
    pub fn sphere_bits(&self) -> f64 {
        let size = self.codebook_size();
        let shift = size.bits().saturating_sub(64);
        (size >> shift).to_f64().unwrap_or(f64::INFINITY).log2() + shift as f64
    }
}
