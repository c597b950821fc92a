//! ESS and CCDM against brute-force enumeration of every amplitude sequence.
//!
//! Codebooks up to 2^14 words are checked word by word; larger ones on a
//! fixed sample of ranks including both ends. Counts and energies are always
//! exhaustive.

use num_bigint::BigUint;
use shapelink::shaping::{
    AmplitudeAlphabet, CcdmCodec, CcdmComposition, EnergyStatistics, EssTrellis,
};

const EXHAUSTIVE_WORDS: u64 = 1 << 14;
const SAMPLES: u64 = 257;

fn alphabets() -> [AmplitudeAlphabet; 2] {
    [AmplitudeAlphabet::qam16(), AmplitudeAlphabet::qam64()]
}

/// Sequence of lexicographic rank `r` among all `levels^n` sequences.
fn sequence(r: u64, n: usize, levels: u64) -> Vec<u32> {
    let mut out = vec![0u32; n];
    let mut r = r;
    for i in (0..n).rev() {
        out[i] = 2 * (r % levels) as u32 + 1;
        r /= levels;
    }
    out
}

fn ranks_to_check(words: u64) -> Vec<u64> {
    if words <= EXHAUSTIVE_WORDS {
        return (0..words).collect();
    }
    let mut v: Vec<u64> = (0..SAMPLES).map(|i| i * (words - 1) / (SAMPLES - 1)).collect();
    v.extend([1, words - 2]);
    v.sort_unstable();
    v.dedup();
    v
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12 * b.abs().max(1.0)
}

/// Panics on the first mismatch.
pub fn ess_matches_enumeration(max_n: usize) {
    for alphabet in alphabets() {
        let levels = alphabet.len() as u64;
        for n in 1..=max_n {
            let total = levels.pow(n as u32);
            let energies: Vec<u32> = (0..total)
                .map(|r| sequence(r, n, levels).iter().map(|a| a * a).sum())
                .collect();
            let e_top = *energies.iter().max().unwrap() as usize;
            let mut hist = vec![0u64; e_top + 1];
            for &e in &energies {
                hist[e as usize] += 1;
            }
            let cumulative: Vec<u64> = hist
                .iter()
                .scan(0u64, |acc, &h| {
                    *acc += h;
                    Some(*acc)
                })
                .collect();
            let max_k = 63 - total.leading_zeros() as u64;
            for k in 0..=max_k {
                let words = 1u64 << k;
                let t = EssTrellis::build(&alphabet, n, k).unwrap();
                let e_max = cumulative.iter().position(|&c| c >= words).unwrap();
                assert_eq!(t.e_max() as usize, e_max, "E_max n={n} k={k} M={levels}");
                for e in (n..=e_max).step_by(8) {
                    assert_eq!(
                        t.sequences_within(e as u64),
                        BigUint::from(cumulative[e]),
                        "count within {e}, n={n} k={k}"
                    );
                }
                assert_eq!(*t.codebook_size(), BigUint::from(cumulative[e_max]));

                let ranks = ranks_to_check(words);
                let mut next = 0;
                let mut used = 0u64;
                let mut used_energy = 0u64;
                let mut sphere_energy = 0u64;
                let mut outside = None;
                let mut freq = vec![0u64; levels as usize];
                for (r, &e) in energies.iter().enumerate() {
                    if e as usize > e_max {
                        outside.get_or_insert(r as u64);
                        continue;
                    }
                    sphere_energy += u64::from(e);
                    if used == words {
                        continue;
                    }
                    used_energy += u64::from(e);
                    let seq = (n <= 8 || next < ranks.len() && ranks[next] == used)
                        .then(|| sequence(r as u64, n, levels));
                    if let Some(seq) = &seq {
                        if n <= 8 {
                            for &a in seq {
                                freq[(a / 2) as usize] += 1;
                            }
                        }
                        if next < ranks.len() && ranks[next] == used {
                            let idx = BigUint::from(used);
                            assert_eq!(&t.encode(&idx).unwrap(), seq, "encode n={n} k={k} r={used}");
                            assert_eq!(t.decode(seq).unwrap(), idx, "decode n={n} k={k}");
                            next += 1;
                        }
                    }
                    used += 1;
                }
                assert_eq!(next, ranks.len());
                assert!(t.encode(&BigUint::from(words)).is_err());
                if let Some(r) = outside {
                    assert!(t.decode(&sequence(r, n, levels)).is_err());
                }

                let used_avg = used_energy as f64 / (words * n as u64) as f64;
                let full_avg = sphere_energy as f64 / (cumulative[e_max] * n as u64) as f64;
                assert!(close(t.avg_energy(EnergyStatistics::UsedCodewords), used_avg));
                assert!(close(t.avg_energy(EnergyStatistics::FullCodebook), full_avg));
                if n <= 8 {
                    let p = t.amplitude_distribution();
                    for (j, &f) in freq.iter().enumerate() {
                        assert!(close(p[j], f as f64 / (words * n as u64) as f64), "p n={n} k={k}");
                    }
                }
            }
            assert!(EssTrellis::build(&alphabet, n, max_k + 1).is_err());
        }
    }
}

/// All compositions of `n` into `parts` nonnegative counts.
fn compositions(n: u64, parts: usize) -> Vec<Vec<u64>> {
    if parts == 1 {
        return vec![vec![n]];
    }
    (0..=n)
        .flat_map(|c| {
            compositions(n - c, parts - 1).into_iter().map(move |mut rest| {
                rest.insert(0, c);
                rest
            })
        })
        .collect()
}

fn next_permutation(v: &mut [u32]) -> bool {
    let Some(i) = v.windows(2).rposition(|w| w[0] < w[1]) else {
        return false;
    };
    let j = v.iter().rposition(|&x| x > v[i]).unwrap();
    v.swap(i, j);
    v[i + 1..].reverse();
    true
}

/// Panics on the first mismatch.
pub fn ccdm_matches_enumeration(max_n: usize) {
    for alphabet in alphabets() {
        let levels = alphabet.len();
        for n in 1..=max_n as u64 {
            for counts in compositions(n, levels) {
                let comp = CcdmComposition::new(&alphabet, counts.clone()).unwrap();
                let mut perm: Vec<u32> = counts
                    .iter()
                    .enumerate()
                    .flat_map(|(j, &c)| std::iter::repeat_n(2 * j as u32 + 1, c as usize))
                    .collect();
                let mut perms = Vec::new();
                let mut energy = 0u64;
                loop {
                    perms.push(perm.clone());
                    energy += perm.iter().map(|&a| u64::from(a * a)).sum::<u64>();
                    if !next_permutation(&mut perm) {
                        break;
                    }
                }
                let size = perms.len() as u64;
                assert_eq!(comp.multinomial(), BigUint::from(size), "{counts:?}");
                let capacity = 63 - size.leading_zeros() as u64;
                assert_eq!(comp.capacity_bits(), capacity);
                assert!(close(comp.avg_energy(), energy as f64 / (size * n) as f64));

                assert!(CcdmCodec::new(comp.clone(), capacity + 1).is_err());
                for k in 0..=capacity {
                    let codec = CcdmCodec::new(comp.clone(), k).unwrap();
                    let words = 1u64 << k;
                    if k < capacity && words > EXHAUSTIVE_WORDS {
                        continue;
                    }
                    for r in ranks_to_check(words) {
                        let idx = BigUint::from(r);
                        let seq = &perms[r as usize];
                        assert_eq!(&codec.encode(&idx).unwrap(), seq, "{counts:?} k={k} r={r}");
                        assert_eq!(codec.decode(seq).unwrap(), idx);
                    }
                    assert!(codec.encode(&BigUint::from(words)).is_err());
                    if words < size {
                        assert!(codec.decode(&perms[words as usize]).is_err());
                    }
                }
            }
        }
    }
}
