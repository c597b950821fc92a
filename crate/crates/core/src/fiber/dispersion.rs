use serde::{Deserialize, Serialize};

use super::{wavelength_nm, LinkSpec};

/// Accumulated dispersion along the link at one frequency.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DispersionMap {
    pub frequency_thz: f64,
    /// `(distance_km, ps/nm)` at the start and at every span end.
    pub profile: Vec<(f64, f64)>,
    pub net_per_loop_ps_nm: f64,
}

impl DispersionMap {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("distance_km,ps_per_nm\n");
        for (d, a) in &self.profile {
            s.push_str(&format!("{d:.3},{a:.6}\n"));
        }
        s
    }

    /// Linear interpolation of the accumulated dispersion at `distance_km`.
    pub fn at(&self, distance_km: f64) -> f64 {
        let p = &self.profile;
        for w in p.windows(2) {
            let ((d0, a0), (d1, a1)) = (w[0], w[1]);
            if distance_km <= d1 {
                return a0 + (a1 - a0) * (distance_km - d0) / (d1 - d0);
            }
        }
        p.last().map_or(0.0, |x| x.1)
    }
}

/// Piecewise-linear accumulation of `D(λ) L` over the spans, `λ = c / f`.
pub fn dispersion_map(link: &LinkSpec, frequency_thz: f64) -> DispersionMap {
    let lambda = wavelength_nm(frequency_thz);
    let mut profile = vec![(0.0, 0.0)];
    let (mut dist, mut acc) = (0.0, 0.0);
    for _ in 0..link.loops {
        for s in &link.spans {
            dist += s.length_km;
            acc += s.dispersion_at(lambda) * s.length_km;
            profile.push((dist, acc));
        }
    }
    let net = link
        .spans
        .iter()
        .map(|s| s.dispersion_at(lambda) * s.length_km)
        .sum();
    DispersionMap {
        frequency_thz,
        profile,
        net_per_loop_ps_nm: net,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fiber::SpanSpec;

    fn hand_net(f: f64) -> f64 {
        let l = 299_792.458 / f;
        let d = l - 1550.13;
        6.0 * 40.3 * (-2.47 - 0.1026 * d) + 40.3 * (17.24 + 0.092 * d)
    }

    #[test]
    fn matches_hand_evaluation() {
        let link = LinkSpec::paper_scale();
        for f in [192.3, 192.8, 195.2] {
            let m = dispersion_map(&link, f);
            assert!((m.net_per_loop_ps_nm - hand_net(f)).abs() < 1e-9);
        }
        assert!((dispersion_map(&link, 192.8).net_per_loop_ps_nm + 3.98).abs() < 0.05);
        assert!((dispersion_map(&link, 195.2).net_per_loop_ps_nm - 399.5).abs() < 0.5);
        assert!((dispersion_map(&link, 192.3).net_per_loop_ps_nm + 89.0).abs() < 0.5);
    }

    #[test]
    fn profile_shape() {
        let link = LinkSpec::paper_scale();
        let m = dispersion_map(&link, 193.4);
        assert_eq!(m.profile.len(), 71);
        let last = m.profile.last().unwrap();
        assert!((last.0 - 2821.0).abs() < 1e-9);
        assert!((last.1 - 10.0 * m.net_per_loop_ps_nm).abs() < 1e-6);
        assert!(m.to_csv().starts_with("distance_km,ps_per_nm\n0.000,0.000000\n"));
    }

    #[test]
    fn single_span_is_linear_in_distance() {
        let link = LinkSpec {
            spans: vec![SpanSpec::ssmf()],
            loops: 1,
            ..LinkSpec::paper_scale()
        };
        let m = dispersion_map(&link, 193.0);
        let slope = m.profile[1].1 / m.profile[1].0;
        for d in [1.0, 10.0, 25.5, 40.3] {
            assert!((m.at(d) - slope * d).abs() < 1e-9);
        }
    }
}
