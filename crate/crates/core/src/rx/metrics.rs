use serde::{Deserialize, Serialize};

use super::SymbolPairs;
use crate::error::{Error, Result};
use crate::pas::Modulation;
use crate::shaping::{mb, AmplitudeAlphabet, ShapingCodec};

/// Reported SNR when the residual vanishes or exceeds this.
pub const SNR_CAP_DB: f64 = 60.0;
/// Below this many PDM symbols GMI estimates carry a variance warning.
pub const MIN_GMI_SYMBOLS: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnrEstimate {
    pub per_subcarrier_db: Vec<f64>,
    /// Mean of the linear per-subcarrier SNRs, in dB.
    pub mean_db: f64,
    /// Complex residual variance per subcarrier, in the units of `tx`.
    pub noise_variance: Vec<f64>,
    pub capped: bool,
    pub data_symbols: usize,
    pub warnings: Vec<String>,
}

/// `10 log10(Σ|x|² / Σ|y - x|²)` per subcarrier on equalized pairs, averaged
/// over subcarriers in linear units.
pub fn snr_db(pairs: &[SymbolPairs]) -> SnrEstimate {
    let cap = 10f64.powf(SNR_CAP_DB / 10.0);
    let mut est = SnrEstimate {
        per_subcarrier_db: Vec::with_capacity(pairs.len()),
        mean_db: f64::NAN,
        noise_variance: Vec::with_capacity(pairs.len()),
        capped: false,
        data_symbols: pairs.iter().map(|p| p.len()).sum(),
        warnings: Vec::new(),
    };
    if pairs.is_empty() || pairs.iter().any(|p| p.is_empty()) {
        est.warnings.push("empty data set: no non-pilot symbols".into());
        return est;
    }
    if est.data_symbols < 1000 {
        est.warnings
            .push(format!("SNR from only {} symbols", est.data_symbols));
    }
    let mut lin_sum = 0.0;
    for p in pairs {
        let s: f64 = p.tx.iter().map(|x| x.norm_sqr()).sum();
        let e: f64 = p.rx.iter().zip(&p.tx).map(|(y, x)| (y - x).norm_sqr()).sum();
        let mut lin = s / e;
        if !(lin < cap) {
            lin = cap;
            est.capped = true;
        }
        est.noise_variance.push(e / p.len() as f64);
        est.per_subcarrier_db.push(10.0 * lin.log10());
        lin_sum += lin;
    }
    est.mean_db = 10.0 * (lin_sum / pairs.len() as f64).log10();
    if est.capped {
        est.warnings.push(format!("SNR capped at {SNR_CAP_DB} dB"));
    }
    est
}

/// Which amplitude entropy enters `H` in the NGMI normalization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EntropyBasis {
    /// The codec's operational rate `k / n`.
    #[default]
    Operational,
    /// The entropy of the codec's marginal amplitude distribution.
    Distribution,
}

impl EntropyBasis {
    pub fn amplitude_bits(&self, codec: &ShapingCodec) -> f64 {
        match self {
            EntropyBasis::Operational => codec.rate_bits(),
            EntropyBasis::Distribution => mb::entropy_bits(&codec.amplitude_distribution()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GmiEstimate {
    /// Bits per PDM symbol.
    pub gmi_bits: f64,
    pub ngmi: f64,
    /// `H = 4 (amplitude bits + 1)` per PDM symbol.
    pub entropy_bits: f64,
    /// `m_tot = 4 m` bit levels per PDM symbol.
    pub bit_levels: usize,
    pub pdm_symbols: usize,
    pub warnings: Vec<String>,
}

/// Bit-metric GMI with a circular Gaussian auxiliary channel of variance
/// `noise_variance[s]` on subcarrier `s`, binary-reflected Gray labels per
/// real dimension and prior `amplitude_prior` over `alphabet` with uniform signs.
pub fn gmi_ngmi(
    pairs: &[SymbolPairs],
    noise_variance: &[f64],
    alphabet: &AmplitudeAlphabet,
    amplitude_prior: &[f64],
    amplitude_bits: f64,
) -> Result<GmiEstimate> {
    if pairs.len() != noise_variance.len() {
        return Err(Error::Alignment {
            expected: pairs.len(),
            got: noise_variance.len(),
        });
    }
    if amplitude_prior.len() != alphabet.len() {
        return Err(Error::Alignment {
            expected: alphabet.len(),
            got: amplitude_prior.len(),
        });
    }
    let m = alphabet.bits_per_quadrature() as usize;
    let levels_n = alphabet.levels_per_quadrature() as usize;
    // Signed levels in ascending order with their labels and log-priors.
    let half = levels_n / 2;
    let levels: Vec<f64> = (0..levels_n)
        .map(|j| 2.0 * j as f64 - (levels_n as f64 - 1.0))
        .collect();
    let labels: Vec<usize> = (0..levels_n).map(|j| j ^ (j >> 1)).collect();
    let log_prior: Vec<f64> = (0..levels_n)
        .map(|j| {
            let a = if j >= half { j - half } else { half - 1 - j };
            (amplitude_prior[a] / 2.0).ln()
        })
        .collect();

    let mut loss = 0.0;
    let mut dims = 0usize;
    let mut metric = vec![0.0; levels_n];
    for (p, &var) in pairs.iter().zip(noise_variance) {
        let s2 = (var / 2.0).max(1e-300);
        for (y, x) in p.rx.iter().zip(&p.tx) {
            for (yv, xv) in [(y.re, x.re), (y.im, x.im)] {
                let t = nearest_level(xv, levels_n);
                for j in 0..levels_n {
                    metric[j] = log_prior[j] - (yv - levels[j]).powi(2) / (2.0 * s2);
                }
                let all = log_sum_exp(metric.iter().copied());
                for bit in 0..m {
                    let want = (labels[t] >> bit) & 1;
                    let matched = log_sum_exp(
                        (0..levels_n)
                            .filter(|&j| (labels[j] >> bit) & 1 == want)
                            .map(|j| metric[j]),
                    );
                    loss += all - matched;
                }
                dims += 1;
            }
        }
    }
    let pdm_symbols = dims / 4;
    let mut warnings = Vec::new();
    if dims == 0 {
        return Err(Error::Degenerate("no data symbols for GMI".into()));
    }
    if pdm_symbols < MIN_GMI_SYMBOLS {
        warnings.push(format!(
            "GMI from {pdm_symbols} PDM symbols (< {MIN_GMI_SYMBOLS}); estimator variance is elevated"
        ));
    }
    let loss_pdm = 4.0 * loss / dims as f64 / std::f64::consts::LN_2;
    let entropy_bits = 4.0 * (amplitude_bits + 1.0);
    let bit_levels = 4 * m;
    Ok(GmiEstimate {
        gmi_bits: entropy_bits - loss_pdm,
        ngmi: 1.0 - loss_pdm / bit_levels as f64,
        entropy_bits,
        bit_levels,
        pdm_symbols,
        warnings,
    })
}

fn nearest_level(x: f64, levels: usize) -> usize {
    ((x + levels as f64 - 1.0) / 2.0)
        .round()
        .clamp(0.0, levels as f64 - 1.0) as usize
}

fn log_sum_exp(it: impl Iterator<Item = f64> + Clone) -> f64 {
    let m = it.clone().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + it.map(|v| (v - m).exp()).sum::<f64>().ln()
}

/// Metrics of one channel in one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub channel: usize,
    pub frequency_thz: f64,
    pub n: usize,
    pub subcarriers: usize,
    pub symbol_rate_gbd: f64,
    pub modulation: Modulation,
    pub power_dbm: f64,
    pub seed: u64,
    pub snr_db: f64,
    pub snr_db_per_subcarrier: Vec<f64>,
    pub snr_capped: bool,
    pub gmi_bits: f64,
    pub ngmi: f64,
    pub entropy_bits: f64,
    pub bit_levels: usize,
    pub noise_variance: Vec<f64>,
    pub data_symbols: usize,
    pub warnings: Vec<String>,
}

impl MetricsReport {
    pub const CSV_HEADER: &'static str = "channel,n,N_SC,R_Sym,R_S,P_dBm,seed,snr_db,gmi,ngmi";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{:.6},{:.6},{:.6}",
            self.channel,
            self.n,
            self.subcarriers,
            self.symbol_rate_gbd,
            self.modulation.label(),
            self.power_dbm,
            self.seed,
            self.snr_db,
            self.gmi_bits,
            self.ngmi
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn awgn_pairs(tx: &[Complex64], sigma2: f64, seed: u64) -> SymbolPairs {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = (sigma2 / 2.0).sqrt();
        let rx = tx
            .iter()
            .map(|x| {
                let re: f64 = StandardNormal.sample(&mut rng);
                let im: f64 = StandardNormal.sample(&mut rng);
                x + Complex64::new(re, im) * s
            })
            .collect();
        SymbolPairs { tx: tx.to_vec(), rx }
    }

    fn qpsk(n: usize, seed: u64) -> Vec<Complex64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|_| {
                Complex64::new(
                    if rng.random() { 1.0 } else { -1.0 },
                    if rng.random() { 1.0 } else { -1.0 },
                )
            })
            .collect()
    }

    #[test]
    fn snr_matches_injected_noise() {
        let tx = qpsk(100_000, 1);
        let e: f64 = tx.iter().map(|x| x.norm_sqr()).sum::<f64>() / tx.len() as f64;
        let p = awgn_pairs(&tx, 0.1 * e, 2);
        let est = snr_db(&[p]);
        assert!((est.mean_db - 10.0).abs() < 0.1, "{}", est.mean_db);
        assert!(!est.capped);
    }

    #[test]
    fn noiseless_is_capped() {
        let tx = qpsk(2000, 1);
        let est = snr_db(&[SymbolPairs { tx: tx.clone(), rx: tx }]);
        assert_eq!(est.mean_db, SNR_CAP_DB);
        assert!(est.capped);
    }

    #[test]
    fn empty_data_set_is_flagged() {
        let est = snr_db(&[SymbolPairs::default()]);
        assert!(est.mean_db.is_nan());
        assert!(est.warnings[0].contains("empty"));
    }

    #[test]
    fn linear_averaging_across_subcarriers() {
        let tx = qpsk(50_000, 3);
        let a = awgn_pairs(&tx, 0.2, 4);
        let b = awgn_pairs(&tx, 0.02, 5);
        let est = snr_db(&[a, b]);
        let lin: f64 = est.per_subcarrier_db.iter().map(|d| 10f64.powf(d / 10.0)).sum::<f64>() / 2.0;
        assert!((est.mean_db - 10.0 * lin.log10()).abs() < 1e-12);
    }

    /// BPSK capacity with unit amplitude and unit noise variance by
    /// trapezoidal integration.
    fn bpsk_capacity() -> f64 {
        let (lo, hi, n) = (-12.0, 14.0, 200_000);
        let h = (hi - lo) / n as f64;
        let mut acc = 0.0;
        for i in 0..=n {
            let y: f64 = lo + i as f64 * h;
            let pdf = (-(y - 1.0).powi(2) / 2.0).exp() / (2.0 * std::f64::consts::PI).sqrt();
            let w = if i == 0 || i == n { 0.5 } else { 1.0 };
            acc += w * pdf * (1.0 + (-2.0 * y).exp()).log2();
        }
        1.0 - acc * h
    }

    #[test]
    fn qpsk_gmi_at_zero_db() {
        let c = bpsk_capacity();
        assert!((c - 0.486_2).abs() < 1e-3, "{c}");
        let tx = qpsk(100_000, 7);
        // Es = 2 per 2D symbol; SNR 0 dB.
        let p = awgn_pairs(&tx, 2.0, 8);
        let qpsk_alphabet = AmplitudeAlphabet::new(2).unwrap();
        let g = gmi_ngmi(&[p], &[2.0], &qpsk_alphabet, &[1.0], 0.0).unwrap();
        let per_2d = g.gmi_bits / 2.0;
        assert!((per_2d - 2.0 * c).abs() < 0.01, "{per_2d} vs {}", 2.0 * c);
        assert_eq!(g.bit_levels, 4);
        assert!(g.warnings.is_empty());
    }

    #[test]
    fn noise_free_limit() {
        let a = AmplitudeAlphabet::qam16();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let lv = [-3.0, -1.0, 1.0, 3.0];
        let tx: Vec<Complex64> = (0..4000)
            .map(|_| Complex64::new(lv[rng.random_range(0..4)], lv[rng.random_range(0..4)]))
            .collect();
        let p = awgn_pairs(&tx, 1e-4, 2);
        let g = gmi_ngmi(&[p], &[1e-4], &a, &[0.5, 0.5], 1.0).unwrap();
        assert!((g.gmi_bits - 8.0).abs() < 1e-9);
        assert!((g.ngmi - 1.0).abs() < 1e-9);
        assert!(!g.warnings.is_empty());
    }

    #[test]
    fn ngmi_monotone_in_snr() {
        let a = AmplitudeAlphabet::qam16();
        let prior = [0.7, 0.3];
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut level = || {
            let amp = if rng.random::<f64>() < prior[0] { 1.0 } else { 3.0 };
            if rng.random() { amp } else { -amp }
        };
        let tx: Vec<Complex64> = (0..40_000).map(|_| Complex64::new(level(), level())).collect();
        let e: f64 = tx.iter().map(|x| x.norm_sqr()).sum::<f64>() / tx.len() as f64;
        let unit = awgn_pairs(&vec![Complex64::new(0.0, 0.0); tx.len()], 1.0, 4);
        let mut last = f64::NEG_INFINITY;
        for snr in 0..=20 {
            let var = e / 10f64.powf(snr as f64 / 10.0);
            let rx = tx.iter().zip(&unit.rx).map(|(x, w)| x + w * var.sqrt()).collect();
            let p = SymbolPairs { tx: tx.clone(), rx };
            let g = gmi_ngmi(&[p], &[var], &a, &prior, mb::entropy_bits(&prior)).unwrap();
            assert!(g.ngmi >= last - 1e-12, "snr {snr}: {} < {last}", g.ngmi);
            assert!(g.gmi_bits <= g.entropy_bits + 1e-12);
            last = g.ngmi;
        }
        assert!(last > 0.99);
    }

    #[test]
    fn gray_labels_cover_64qam() {
        let a = AmplitudeAlphabet::qam64();
        let tx: Vec<Complex64> = (0..8)
            .flat_map(|i| (0..8).map(move |j| Complex64::new(2.0 * i as f64 - 7.0, 2.0 * j as f64 - 7.0)))
            .collect();
        let p = SymbolPairs { tx: tx.clone(), rx: tx };
        let g = gmi_ngmi(&[p], &[1e-3], &a, &[0.25; 4], 2.0).unwrap();
        assert_eq!(g.bit_levels, 12);
        assert!((g.ngmi - 1.0).abs() < 1e-9);
    }
}
