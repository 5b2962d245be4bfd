//! Link gains, SINR and Shannon rates.

use rand::Rng;
use rand_distr::{Distribution, Exp1};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Fading {
    Rayleigh,
    None,
}

/// Propagation and service parameters shared by every engine.
///
/// `noise_psd_dbm_hz = None` selects interference-limited operation and
/// `theta0_db = None` disables the service threshold.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelParams {
    pub alpha: f64,
    pub d0_m: f64,
    pub fading: Fading,
    pub noise_psd_dbm_hz: Option<f64>,
    pub bandwidth_hz: f64,
    pub tx_power_dbm: f64,
    pub theta0_db: Option<f64>,
    pub n_subchannels: u32,
}

impl Default for ChannelParams {
    fn default() -> Self {
        Self {
            alpha: 4.0,
            d0_m: 1.0,
            fading: Fading::Rayleigh,
            noise_psd_dbm_hz: None,
            bandwidth_hz: 10.0e6,
            tx_power_dbm: 30.0,
            theta0_db: Some(-6.0),
            n_subchannels: 10,
        }
    }
}

impl ChannelParams {
    /// Finite-area coordination defaults: thermal noise on, no threshold.
    pub fn finite_area() -> Self {
        Self {
            noise_psd_dbm_hz: Some(-174.0),
            theta0_db: None,
            ..Self::default()
        }
    }

    pub fn violations(&self) -> Vec<String> {
        let mut v = Vec::new();
        if !(self.alpha > 2.0) || !self.alpha.is_finite() {
            v.push(format!("path-loss exponent must exceed 2 (alpha = {})", self.alpha));
        }
        if !(self.d0_m > 0.0) || !self.d0_m.is_finite() {
            v.push(format!("reference distance d0_m must be positive (d0_m = {})", self.d0_m));
        }
        if self.n_subchannels < 1 {
            v.push("n_subchannels must be at least 1".to_string());
        }
        if !(self.bandwidth_hz > 0.0) || !self.bandwidth_hz.is_finite() {
            v.push(format!("bandwidth_hz must be positive (bandwidth_hz = {})", self.bandwidth_hz));
        }
        if !self.tx_power_dbm.is_finite() {
            v.push("tx_power_dbm must be finite".to_string());
        }
        if let Some(n) = self.noise_psd_dbm_hz {
            if !n.is_finite() {
                v.push("noise_psd_dbm_hz must be finite (omit it for interference-limited mode)".into());
            }
        }
        if let Some(t) = self.theta0_db {
            if !t.is_finite() {
                v.push("theta0_db must be finite (omit it to disable the threshold)".into());
            }
        }
        v
    }

    pub fn validate(&self) -> Result<()> {
        let v = self.violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidParameter(v.join("; ")))
        }
    }

    pub fn tx_power_mw(&self) -> f64 {
        db_to_linear(self.tx_power_dbm)
    }

    /// Linear service threshold; zero when disabled.
    pub fn theta0_linear(&self) -> f64 {
        self.theta0_db.map(db_to_linear).unwrap_or(0.0)
    }

    /// Noise power over one of `n_sub` equal subchannels, in mW.
    pub fn noise_mw(&self, n_sub: u32) -> f64 {
        match self.noise_psd_dbm_hz {
            None => 0.0,
            Some(psd) => db_to_linear(psd) * self.bandwidth_hz / n_sub.max(1) as f64,
        }
    }

    pub fn subchannel_noise_mw(&self) -> f64 {
        self.noise_mw(self.n_subchannels)
    }
}

#[inline]
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

#[inline]
pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default, Serialize, Deserialize)]
pub struct LinkGain(pub f64);

impl LinkGain {
    pub fn value(self) -> f64 {
        self.0
    }
}

/// Power-law path gain `(max(d, d0)/d0)^-alpha`.
pub fn path_gain(d_m: f64, params: &ChannelParams) -> LinkGain {
    LinkGain(path_gain_sq(d_m * d_m, params.d0_m, params.alpha))
}

/// Path gain from a squared distance, avoiding the square root.
#[inline]
pub fn path_gain_sq(d2: f64, d0_m: f64, alpha: f64) -> f64 {
    let r2 = (d2 / (d0_m * d0_m)).max(1.0);
    if alpha == 4.0 {
        1.0 / (r2 * r2)
    } else {
        r2.powf(-0.5 * alpha)
    }
}

/// Power fading factor: unit-mean exponential under Rayleigh fading.
#[inline]
pub fn draw_fading<R: Rng + ?Sized>(fading: Fading, rng: &mut R) -> f64 {
    match fading {
        Fading::Rayleigh => Exp1.sample(rng),
        Fading::None => 1.0,
    }
}

/// SINR with every AN transmitting at `params.tx_power_dbm`.
///
/// Returns `f64::INFINITY` when the denominator vanishes (no active
/// interferer and no noise).
pub fn sinr(
    serving: LinkGain,
    interferers: &[LinkGain],
    active: &[bool],
    params: &ChannelParams,
) -> Result<f64> {
    if interferers.len() != active.len() {
        return Err(Error::InvalidParameter(format!(
            "{} interferer gains but {} activity flags",
            interferers.len(),
            active.len()
        )));
    }
    let p = params.tx_power_mw();
    let interference: f64 = interferers
        .iter()
        .zip(active)
        .filter(|(_, &a)| a)
        .map(|(g, _)| p * g.0)
        .sum();
    Ok(ratio(p * serving.0, interference + params.subchannel_noise_mw()))
}

#[inline]
pub(crate) fn ratio(signal: f64, denominator: f64) -> f64 {
    if denominator > 0.0 {
        signal / denominator
    } else {
        f64::INFINITY
    }
}

/// `share * log2(1 + sinr)` above the threshold, zero below it.
///
/// The result is per unit of total system bandwidth.
#[inline]
pub fn shannon_rate(sinr_linear: f64, share: f64, theta0_linear: f64) -> f64 {
    debug_assert!((0.0..=1.0).contains(&share));
    if sinr_linear >= theta0_linear && sinr_linear > 0.0 {
        share * sinr_linear.ln_1p() / std::f64::consts::LN_2
    } else {
        0.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn p4() -> ChannelParams {
        ChannelParams::default()
    }

    #[test]
    fn path_gain_reference_points() {
        let p = p4();
        assert_eq!(path_gain(1.0, &p).0, 1.0);
        assert!((path_gain(10.0, &p).0 - 1e-4).abs() < 1e-18);
        assert_eq!(path_gain(0.5, &p).0, 1.0);
        assert_eq!(path_gain(0.0, &p).0, 1.0);
        let p3 = ChannelParams { alpha: 3.0, ..p };
        assert!((path_gain(10.0, &p3).0 - 1e-3).abs() < 1e-15);
    }

    #[test]
    fn no_fading_is_unity() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert_eq!(draw_fading(Fading::None, &mut rng), 1.0);
    }

    #[test]
    fn rayleigh_moments() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let n = 1_000_000;
        let (mut sum, mut above) = (0.0, 0usize);
        for _ in 0..n {
            let h = draw_fading(Fading::Rayleigh, &mut rng);
            sum += h;
            above += (h > 1.0) as usize;
        }
        assert!((sum / n as f64 - 1.0).abs() < 0.003);
        assert!((above as f64 / n as f64 - (-1f64).exp()).abs() < 0.002);
    }

    #[test]
    fn sinr_sentinel_and_symmetry() {
        let p = p4();
        assert_eq!(sinr(LinkGain(0.3), &[], &[], &p).unwrap(), f64::INFINITY);
        assert_eq!(sinr(LinkGain(1.0), &[LinkGain(1.0)], &[true], &p).unwrap(), 1.0);
        assert_eq!(sinr(LinkGain(1.0), &[LinkGain(1.0)], &[false], &p).unwrap(), f64::INFINITY);
        assert!(sinr(LinkGain(1.0), &[LinkGain(1.0)], &[], &p).is_err());
    }

    #[test]
    fn sinr_noise_limited_link_budget() {
        let p = ChannelParams {
            noise_psd_dbm_hz: Some(-174.0),
            n_subchannels: 1,
            bandwidth_hz: 10.0e6,
            ..p4()
        };
        // Gain 1e-4 (-40 dB) at 30 dBm against -174 + 70 dBm of noise.
        let s = sinr(LinkGain(1e-4), &[], &[], &p).unwrap();
        let noise_dbm = -174.0 + 10.0 * 1.0e7f64.log10();
        assert!((linear_to_db(s) - (30.0 - 40.0 - noise_dbm)).abs() < 1e-9);
        assert!((linear_to_db(s) - 94.0).abs() < 1e-9);
        // The same gain is reached at 10 m; at 100 m it is -80 dB.
        assert_eq!(path_gain(10.0, &p).0, 1e-4);
        let far = sinr(path_gain(100.0, &p), &[], &[], &p).unwrap();
        assert!((linear_to_db(far) - 54.0).abs() < 1e-9);
    }

    #[test]
    fn shannon_rate_examples() {
        assert!((shannon_rate(1.0, 1.0, db_to_linear(-6.0)) - 1.0).abs() < 1e-15);
        let th = db_to_linear(-6.0);
        assert_eq!(shannon_rate(th * (1.0 - 1e-12), 1.0, th), 0.0);
        assert!(shannon_rate(th, 1.0, th) > 0.0);
        assert!((shannon_rate(3.0, 0.5, 0.0) - 1.0).abs() < 1e-15);
        assert_eq!(shannon_rate(0.0, 1.0, 0.0), 0.0);
    }

    #[test]
    fn validation_messages() {
        let bad = ChannelParams { alpha: 2.0, ..p4() };
        assert!(bad.violations().iter().any(|m| m.contains("path-loss exponent must exceed 2")));
        assert!(p4().validate().is_ok());
        assert!(ChannelParams { n_subchannels: 0, ..p4() }.validate().is_err());
    }

    proptest! {
        #[test]
        fn sinr_monotone_in_gains(
            gs in 1e-9f64..1.0,
            gi in proptest::collection::vec(1e-9f64..1.0, 1..6),
            k in 0usize..6,
            bump in 1.0f64..10.0,
        ) {
            let p = ChannelParams { noise_psd_dbm_hz: Some(-174.0), ..p4() };
            let ig: Vec<LinkGain> = gi.iter().map(|&g| LinkGain(g)).collect();
            let act = vec![true; ig.len()];
            let base = sinr(LinkGain(gs), &ig, &act, &p).unwrap();
            let mut more = ig.clone();
            let k = k % more.len();
            more[k] = LinkGain(more[k].0 * bump);
            prop_assert!(sinr(LinkGain(gs), &more, &act, &p).unwrap() <= base);
            prop_assert!(sinr(LinkGain(gs * bump), &ig, &act, &p).unwrap() >= base);
        }

        #[test]
        fn rate_monotone_and_linear_in_share(a in 0.0f64..1e4, b in 0.0f64..1e4, share in 0.0f64..1.0) {
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            prop_assert!(shannon_rate(lo, 1.0, 0.0) <= shannon_rate(hi, 1.0, 0.0));
            let full = shannon_rate(hi, 1.0, 0.0);
            prop_assert!((shannon_rate(hi, share, 0.0) - share * full).abs() <= 1e-12 * full.max(1.0));
        }
    }
}
