use num_bigint::BigUint;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{RateConfig, DIMENSIONS};
use crate::error::{Error, Result};
use crate::shaping::{AmplitudeAlphabet, ShapingCodec};

/// Dual-polarization symbols in amplitude units, one entry per symbol in the
/// order (XI, XQ, YI, YQ).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PdmSymbolFrame {
    pub symbols: Vec<[f64; DIMENSIONS]>,
    pub pilot_mask: Vec<bool>,
    pub ledger: FrameLedger,
}

/// What was transmitted, block by block, for receiver-side evaluation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameLedger {
    pub codec: String,
    pub n: usize,
    pub k: u64,
    pub seed: u64,
    pub pilot_period: usize,
    /// PDM symbols occupied by one block, `ceil(n / 4)`.
    pub symbols_per_block: usize,
    pub pilot_amplitude: f64,
    pub blocks: Vec<BlockRecord>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockRecord {
    /// Shaped index as lowercase hex.
    pub index_hex: String,
    /// `true` marks a negative dimension; one entry per amplitude.
    pub negative: Vec<bool>,
    /// Position of the block's first symbol within the data-symbol stream.
    pub first_data_symbol: usize,
    /// False when the frame was cut before the block ended.
    pub complete: bool,
}

impl BlockRecord {
    pub fn index(&self) -> BigUint {
        BigUint::parse_bytes(self.index_hex.as_bytes(), 16).unwrap_or_default()
    }
}

impl PdmSymbolFrame {
    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn pilot_count(&self) -> usize {
        self.pilot_mask.iter().filter(|&&p| p).count()
    }

    pub fn ledger_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.ledger)?)
    }
}

/// Combines amplitudes and sign bits into one symbol.
pub fn signed_symbol(amplitudes: [u32; DIMENSIONS], negative: [bool; DIMENSIONS]) -> [f64; DIMENSIONS] {
    let mut out = [0.0; DIMENSIONS];
    for d in 0..DIMENSIONS {
        let a = f64::from(amplitudes[d]);
        out[d] = if negative[d] { -a } else { a };
    }
    out
}

fn bits_to_index(bits: &[bool]) -> BigUint {
    let mut acc = BigUint::zero();
    for &b in bits {
        acc <<= 1u32;
        if b {
            acc += 1u32;
        }
    }
    acc
}

fn is_pilot(position: usize, period: usize) -> bool {
    position.is_multiple_of(period)
}

/// Frames `num_blocks` shaped blocks from `payload` (k bits per block, MSB
/// first). Amplitudes fill dimensions in (XI, XQ, YI, YQ) order; blocks whose
/// length is not a multiple of four are padded with the smallest level so that
/// each block starts on a symbol boundary. Sign bits and pilots come from a
/// seeded uniform source standing in for information and parity bits. Pilots
/// are QPSK at the constellation's RMS amplitude, at every symbol index that is
/// a multiple of the pilot period.
pub fn frame(
    codec: &ShapingCodec,
    payload: &[bool],
    num_blocks: usize,
    rates: &RateConfig,
    seed: u64,
) -> Result<PdmSymbolFrame> {
    let n = codec.n();
    let k = codec.k() as usize;
    let needed = k * num_blocks;
    if payload.len() < needed {
        return Err(Error::PayloadUnderflow {
            needed,
            available: payload.len(),
        });
    }
    let symbols_per_block = n.div_ceil(DIMENSIONS);
    let padded = symbols_per_block * DIMENSIONS;

    let mut amplitudes = Vec::with_capacity(num_blocks * padded);
    let mut indices = Vec::with_capacity(num_blocks);
    for b in 0..num_blocks {
        let index = bits_to_index(&payload[b * k..(b + 1) * k]);
        let mut seq = codec.encode(&index)?;
        seq.resize(padded, 1);
        amplitudes.extend_from_slice(&seq);
        indices.push(index);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pilot_amplitude = codec.avg_energy().sqrt();
    let data_symbols = amplitudes.len() / DIMENSIONS;
    let mut symbols = Vec::with_capacity(data_symbols + data_symbols / rates.pilot_period + 1);
    let mut pilot_mask = Vec::with_capacity(symbols.capacity());
    let mut negative_flags = Vec::with_capacity(amplitudes.len());
    let mut next = 0;
    let mut position = 0;
    while next < data_symbols {
        if is_pilot(position, rates.pilot_period) {
            let mut p = [0.0; DIMENSIONS];
            for v in p.iter_mut() {
                *v = if rng.random::<bool>() {
                    -pilot_amplitude
                } else {
                    pilot_amplitude
                };
            }
            symbols.push(p);
            pilot_mask.push(true);
        } else {
            let mut amps = [0u32; DIMENSIONS];
            let mut neg = [false; DIMENSIONS];
            for d in 0..DIMENSIONS {
                amps[d] = amplitudes[next * DIMENSIONS + d];
                neg[d] = rng.random::<bool>();
            }
            negative_flags.extend_from_slice(&neg);
            symbols.push(signed_symbol(amps, neg));
            pilot_mask.push(false);
            next += 1;
        }
        position += 1;
    }

    let blocks = indices
        .into_iter()
        .enumerate()
        .map(|(b, index)| BlockRecord {
            index_hex: index.to_str_radix(16),
            negative: negative_flags[b * padded..b * padded + n].to_vec(),
            first_data_symbol: b * symbols_per_block,
            complete: true,
        })
        .collect();

    Ok(PdmSymbolFrame {
        symbols,
        pilot_mask,
        ledger: FrameLedger {
            codec: codec.describe(),
            n,
            k: k as u64,
            seed,
            pilot_period: rates.pilot_period,
            symbols_per_block,
            pilot_amplitude,
            blocks,
        },
    })
}

/// Frame of exactly `total_symbols` symbols carrying a seeded random payload.
/// The final block is cut short when the length does not divide evenly; its
/// ledger entry is marked incomplete.
pub fn frame_random(
    codec: &ShapingCodec,
    total_symbols: usize,
    rates: &RateConfig,
    seed: u64,
) -> Result<PdmSymbolFrame> {
    if total_symbols == 0 {
        return Err(Error::config("frame.symbols", "must be positive"));
    }
    let pilots = total_symbols.div_ceil(rates.pilot_period);
    let data = total_symbols - pilots;
    let per_block = codec.n().div_ceil(DIMENSIONS);
    let blocks = data.div_ceil(per_block).max(1);
    let k = codec.k() as usize;

    let mut payload_rng = ChaCha8Rng::seed_from_u64(seed);
    payload_rng.set_stream(1);
    let payload: Vec<bool> = (0..k * blocks).map(|_| payload_rng.random()).collect();

    let mut f = frame(codec, &payload, blocks, rates, seed)?;
    f.symbols.truncate(total_symbols);
    f.pilot_mask.truncate(total_symbols);
    for block in &mut f.ledger.blocks {
        block.complete = block.first_data_symbol + per_block <= data;
    }
    Ok(f)
}

/// Nearest signed level: returns (amplitude, negative). Zero resolves to positive.
pub fn hard_decision(x: f64, alphabet: &AmplitudeAlphabet) -> (u32, bool) {
    let negative = x < 0.0;
    let idx = ((x.abs() - 1.0) / 2.0).round().clamp(0.0, (alphabet.len() - 1) as f64);
    (alphabet.level(idx as usize), negative)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DeframedBlock {
    pub amplitudes: Vec<u32>,
    pub negative: Vec<bool>,
    /// Decoded index, or why the block could not be decoded.
    pub index: std::result::Result<BigUint, String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Deframed {
    /// Signed hard decisions for every symbol, pilots included.
    pub decisions: Vec<[f64; DIMENSIONS]>,
    pub blocks: Vec<DeframedBlock>,
}

/// Receiver-side inverse of [`frame`]: per-dimension hard decisions, regrouped
/// into blocks and decoded. Blocks that fail to decode are flagged, not
/// corrected.
pub fn deframe(
    frame: &PdmSymbolFrame,
    codec: &ShapingCodec,
    rx: &[[f64; DIMENSIONS]],
) -> Result<Deframed> {
    if rx.len() != frame.symbols.len() {
        return Err(Error::Alignment {
            expected: frame.symbols.len(),
            got: rx.len(),
        });
    }
    let alphabet = codec.alphabet();
    let mut decisions = Vec::with_capacity(rx.len());
    let mut data_amps = Vec::new();
    let mut data_neg = Vec::new();
    for (sym, &pilot) in rx.iter().zip(&frame.pilot_mask) {
        let mut dec = [0.0; DIMENSIONS];
        for d in 0..DIMENSIONS {
            let (a, neg) = hard_decision(sym[d], alphabet);
            dec[d] = if neg { -f64::from(a) } else { f64::from(a) };
            if !pilot {
                data_amps.push(a);
                data_neg.push(neg);
            }
        }
        decisions.push(dec);
    }

    let n = frame.ledger.n;
    let padded = frame.ledger.symbols_per_block * DIMENSIONS;
    let blocks = frame
        .ledger
        .blocks
        .iter()
        .map(|rec| {
            let start = rec.first_data_symbol * DIMENSIONS;
            let end = (start + n).min(data_amps.len());
            let amplitudes = data_amps[start.min(end)..end].to_vec();
            let negative = data_neg[start.min(end)..end].to_vec();
            let index = if rec.complete && start + padded <= data_amps.len() {
                codec.decode(&amplitudes).map_err(|e| e.to_string())
            } else {
                Err("incomplete block".to_string())
            };
            DeframedBlock {
                amplitudes,
                negative,
                index,
            }
        })
        .collect();
    Ok(Deframed { decisions, blocks })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shaping::{ShapingConfig, ShapingKind, ShapingRate};

    fn codec(n: usize, tenths: u64, kind: ShapingKind) -> ShapingCodec {
        let cfg = ShapingConfig::new(n, ShapingRate::tenths(tenths), AmplitudeAlphabet::qam16(), kind)
            .unwrap();
        ShapingCodec::build(&cfg).unwrap()
    }

    #[test]
    fn direct_symbol_construction() {
        assert_eq!(
            signed_symbol([1, 3, 1, 1], [false, true, false, false]),
            [1.0, -3.0, 1.0, 1.0]
        );
    }

    #[test]
    fn pilot_ratio_of_4800_symbols() {
        let c = codec(20, 8, ShapingKind::Ess);
        let f = frame_random(&c, 4800, &RateConfig::default(), 7).unwrap();
        assert_eq!(f.len(), 4800);
        assert_eq!(f.pilot_count(), 100);
        for window in f.pilot_mask.chunks(48) {
            assert_eq!(window.iter().filter(|&&p| p).count(), 1);
        }
    }

    #[test]
    fn underflow() {
        let c = codec(20, 8, ShapingKind::Ess);
        let err = frame(&c, &[true; 10], 1, &RateConfig::default(), 0).unwrap_err();
        assert!(matches!(err, Error::PayloadUnderflow { needed: 16, available: 10 }));
    }

    #[test]
    fn noiseless_round_trip() {
        for (n, kind) in [(20, ShapingKind::Ess), (80, ShapingKind::Ess), (1280, ShapingKind::Ccdm)] {
            let c = codec(n, 7, kind);
            let k = c.k() as usize;
            let payload: Vec<bool> = (0..3 * k).map(|i| (i * 7 + i / 3) % 5 < 2).collect();
            let f = frame(&c, &payload, 3, &RateConfig::default(), 11).unwrap();
            let d = deframe(&f, &c, &f.symbols).unwrap();
            for ((dec, sym), &pilot) in d.decisions.iter().zip(&f.symbols).zip(&f.pilot_mask) {
                if !pilot {
                    assert_eq!(dec, sym);
                }
            }
            for (b, (rec, got)) in f.ledger.blocks.iter().zip(&d.blocks).enumerate() {
                assert_eq!(got.index.as_ref().unwrap(), &rec.index());
                assert_eq!(got.negative, rec.negative);
                let bits = &payload[b * k..(b + 1) * k];
                assert_eq!(rec.index(), bits_to_index(bits));
            }
        }
    }

    #[test]
    fn hard_decisions() {
        let a = AmplitudeAlphabet::qam16();
        assert_eq!(hard_decision(2.9, &a), (3, false));
        assert_eq!(hard_decision(-0.1, &a), (1, true));
        assert_eq!(hard_decision(0.0, &a), (1, false));
        assert_eq!(hard_decision(-7.5, &a), (3, true));
    }

    #[test]
    fn misaligned_rx() {
        let c = codec(20, 8, ShapingKind::Ess);
        let f = frame_random(&c, 96, &RateConfig::default(), 1).unwrap();
        assert!(matches!(
            deframe(&f, &c, &f.symbols[1..]),
            Err(Error::Alignment { .. })
        ));
    }

    #[test]
    fn corrupted_block_is_flagged() {
        let c = codec(20, 8, ShapingKind::Ess);
        let f = frame_random(&c, 96, &RateConfig::default(), 1).unwrap();
        let mut rx = f.symbols.clone();
        // push every amplitude of the first data symbol to 3: exceeds E_max
        for s in rx.iter_mut().skip(1).take(5) {
            for v in s.iter_mut() {
                *v = 3.0;
            }
        }
        let d = deframe(&f, &c, &rx).unwrap();
        assert!(d.blocks[0].index.is_err());
        assert!(d.blocks[1].index.is_ok());
    }

    #[test]
    fn truncated_final_block_is_incomplete() {
        let c = codec(1280, 8, ShapingKind::Ccdm);
        let f = frame_random(&c, 1000, &RateConfig::default(), 3).unwrap();
        assert_eq!(f.len(), 1000);
        let last = f.ledger.blocks.last().unwrap();
        assert!(!last.complete);
        assert!(f.ledger.blocks[0].complete);
        let d = deframe(&f, &c, &f.symbols).unwrap();
        assert!(d.blocks.last().unwrap().index.is_err());
        assert!(d.blocks[0].index.is_ok());
    }

    #[test]
    fn ledger_serializes() {
        let c = codec(20, 8, ShapingKind::Ess);
        let f = frame_random(&c, 96, &RateConfig::default(), 1).unwrap();
        let json = f.ledger_json().unwrap();
        let back: FrameLedger = serde_json::from_str(&json).unwrap();
        assert_eq!(back, f.ledger);
    }

    #[test]
    fn same_seed_same_frame() {
        let c = codec(40, 6, ShapingKind::Ess);
        let a = frame_random(&c, 500, &RateConfig::default(), 99).unwrap();
        let b = frame_random(&c, 500, &RateConfig::default(), 99).unwrap();
        let other = frame_random(&c, 500, &RateConfig::default(), 100).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.symbols, other.symbols);
    }
}
