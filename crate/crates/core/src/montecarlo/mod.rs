//! Snapshot simulation of the typical downlink UE in an infinite network.
//!
//! Each trial draws ANs and background UEs as independent HPPPs in a disk
//! centred on the typical UE, associates every UE with its nearest AN, and
//! evaluates the typical UE's SIR and rate. Background UEs are never stored:
//! sparse ones are streamed into per-AN counters, dense ones are counted per
//! AN as Poisson draws over clipped Voronoi cell areas, which has the same
//! joint law.

mod cdf;
mod cells;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use cdf::{CdfKind, RateCdf, MAX_GRID_POINTS};

use crate::channel::{draw_fading, path_gain_sq, ratio, shannon_rate, ChannelParams};
use crate::error::{Error, Result};
use cells::{cell_area, cell_areas, CellScratch};
use crate::pointprocess::{poisson_count, sample_hppp, NearestIndex, NodeKind, Point, Window};
use crate::rng::{Purpose, StreamFactory, MAX_ATTEMPTS};
use crate::stats::binomial_stderr;

/// Minimum expected AN count in the simulation window.
pub const MIN_WINDOW_ANS: f64 = 500.0;
/// Expected AN count per unit of `1/τ` in the simulation window.
pub const WINDOW_ANS_PER_INV_TAU: f64 = 20.0;
/// Background UEs are streamed one by one when there are fewer than this
/// many per AN; otherwise per-AN counts are drawn from cell areas.
pub const STREAM_UES_BELOW_RATIO: f64 = 3.0;
/// Expected background UEs per subchannel in the window, so that sparse
/// networks still see enough active interferers.
pub const WINDOW_UES_PER_SUBCHANNEL: f64 = 50.0;

/// How interfering ANs decide whether they transmit on the typical UE's subchannel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ActivityModel {
    /// Active with probability `min(load, N) / N`.
    #[default]
    LoadDriven,
    /// Every AN transmits.
    Full,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimSpec {
    /// ANs per km².
    pub lambda_an: f64,
    /// Background UEs per km².
    pub lambda_ue: f64,
    pub params: ChannelParams,
    pub n_trials: usize,
    pub master_seed: u64,
    #[serde(default)]
    pub activity: ActivityModel,
    /// Overrides the serving-cell load `K` when set.
    #[serde(default)]
    pub forced_load: Option<u32>,
}

impl SimSpec {
    pub fn new(lambda_an: f64, lambda_ue: f64, params: ChannelParams, n_trials: usize, master_seed: u64) -> Self {
        Self {
            lambda_an,
            lambda_ue,
            params,
            n_trials,
            master_seed,
            activity: ActivityModel::LoadDriven,
            forced_load: None,
        }
    }

    pub fn with_activity(mut self, activity: ActivityModel) -> Self {
        self.activity = activity;
        self
    }

    pub fn with_forced_load(mut self, k: u32) -> Self {
        self.forced_load = Some(k);
        self
    }

    /// Densification ratio `λ_AN / λ_UE` (infinite without UEs).
    pub fn tau(&self) -> f64 {
        if self.lambda_ue > 0.0 {
            self.lambda_an / self.lambda_ue
        } else {
            f64::INFINITY
        }
    }

    pub fn validate(&self) -> Result<()> {
        let mut v = self.params.violations();
        if !(self.lambda_an > 0.0) || !self.lambda_an.is_finite() {
            v.push(format!("lambda_an must be positive (lambda_an = {})", self.lambda_an));
        }
        if !(self.lambda_ue >= 0.0) || !self.lambda_ue.is_finite() {
            v.push(format!("lambda_ue must be non-negative (lambda_ue = {})", self.lambda_ue));
        }
        if self.n_trials < 1 {
            v.push("n_trials must be at least 1".into());
        }
        if self.forced_load == Some(0) {
            v.push("forced serving load must be at least 1".into());
        }
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidParameter(v.join("; ")))
        }
    }

    /// Disk centred at the origin holding `max(500, 20/τ, 50·N·τ)` ANs on average.
    pub fn window(&self) -> Result<Window> {
        let tau = self.tau();
        let mut n = MIN_WINDOW_ANS.max(WINDOW_ANS_PER_INV_TAU / tau);
        if tau.is_finite() {
            n = n.max(WINDOW_UES_PER_SUBCHANNEL * self.params.n_subchannels as f64 * tau);
        }
        Window::disk_with_area(Point::ORIGIN, n / self.lambda_an)
    }
}

/// Per-trial record of the typical UE.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialOutcome {
    pub sir: f64,
    /// Serving-cell load including the typical UE.
    pub load: u32,
    pub rate: f64,
    pub subchannel: u32,
    pub n_ans: usize,
}

fn run_trial(spec: &SimSpec, window: &Window, streams: &StreamFactory, trial: u64) -> Result<TrialOutcome> {
    for attempt in 0..MAX_ATTEMPTS {
        if let Some(out) = try_trial(spec, window, streams, trial, attempt)? {
            return Ok(out);
        }
    }
    Err(Error::SimulationFailure(format!(
        "trial {trial}: no usable snapshot after {MAX_ATTEMPTS} attempts"
    )))
}

/// Background-UE count of AN `a` drawn from its clipped Voronoi area.
fn cell_load<R: Rng>(
    spec: &SimSpec,
    window: &Window,
    index: &NearestIndex<'_>,
    a: usize,
    scratch: &mut CellScratch,
    rng: &mut R,
) -> Result<u32> {
    let Window::Disk { center, radius_m } = *window else {
        return Err(Error::InvalidParameter("simulation window must be a disk".into()));
    };
    let area_km2 = cell_area(index, a, center, radius_m, scratch) * 1e-6;
    Ok(poisson_count(spec.lambda_ue * area_km2, rng)? as u32)
}

/// One snapshot; `None` when it has no AN, or no interferer and no noise.
fn try_trial(
    spec: &SimSpec,
    window: &Window,
    streams: &StreamFactory,
    trial: u64,
    attempt: u32,
) -> Result<Option<TrialOutcome>> {
    let params = &spec.params;
    let mut rng = streams.stream_attempt(trial, Purpose::AccessNodes, attempt);
    let ans = sample_hppp(spec.lambda_an, window, NodeKind::An, &mut rng)?;
    if ans.is_empty() {
        return Ok(None);
    }
    let points = &ans.points;

    let typical = window.center();
    let index = NearestIndex::new(points);
    let (serving, _) = index.nearest(&typical).ok_or(Error::NoServer)?;
    let mut rng = streams.stream_attempt(trial, Purpose::Users, attempt);
    let loads = match spec.activity {
        // Only the serving cell's load matters.
        ActivityModel::Full => {
            let mut loads = vec![0u32; points.len()];
            loads[serving] = cell_load(spec, window, &index, serving, &mut CellScratch::default(), &mut rng)?;
            loads
        }
        ActivityModel::LoadDriven if spec.lambda_ue >= STREAM_UES_BELOW_RATIO * spec.lambda_an => {
            let Window::Disk { center, radius_m } = *window else {
                return Err(Error::InvalidParameter("simulation window must be a disk".into()));
            };
            cell_areas(&index, center, radius_m)
                .into_iter()
                .map(|area| Ok(poisson_count(spec.lambda_ue * area * 1e-6, &mut rng)? as u32))
                .collect::<Result<Vec<u32>>>()?
        }
        ActivityModel::LoadDriven => {
            let mut loads = vec![0u32; points.len()];
            let n_ues = poisson_count(spec.lambda_ue * window.area_km2(), &mut rng)?;
            for _ in 0..n_ues {
                let p = window.sample_uniform(&mut rng);
                loads[index.nearest(&p).ok_or(Error::NoServer)?.0] += 1;
            }
            loads
        }
    };
    let load = spec.forced_load.unwrap_or(loads[serving] + 1);

    let n_sub = params.n_subchannels;
    let subchannel = streams
        .stream_attempt(trial, Purpose::Subchannel, attempt)
        .random_range(0..n_sub);

    // Fading and activity draws are taken for every AN in index order so that
    // the activity model does not shift the fading sequence.
    let mut fade = streams.stream_attempt(trial, Purpose::Fading, attempt);
    let mut act = streams.stream_attempt(trial, Purpose::Activity, attempt);
    let (d0, alpha) = (params.d0_m, params.alpha);
    let nf = n_sub as f64;
    let mut signal = 0.0;
    let mut interference = 0.0;
    let mut n_active = 0usize;
    for (i, p) in points.iter().enumerate() {
        let h = draw_fading(params.fading, &mut fade);
        let u: f64 = act.random();
        if i == serving {
            signal = path_gain_sq(p.dist2(&typical), d0, alpha) * h;
            continue;
        }
        let active = match spec.activity {
            ActivityModel::Full => true,
            ActivityModel::LoadDriven => u * nf < loads[i].min(n_sub) as f64,
        };
        if active {
            interference += path_gain_sq(p.dist2(&typical), d0, alpha) * h;
            n_active += 1;
        }
    }
    let noise = params.subchannel_noise_mw();
    if n_active == 0 && noise == 0.0 {
        return Ok(None);
    }
    let pw = params.tx_power_mw();
    let sir = ratio(pw * signal, pw * interference + noise);
    let rate = shannon_rate(sir, 1.0 / load as f64, params.theta0_linear());
    Ok(Some(TrialOutcome {
        sir,
        load,
        rate,
        subchannel,
        n_ans: points.len(),
    }))
}

/// Runs every trial of `spec`; the output order is the trial order.
pub fn simulate_trials(spec: &SimSpec) -> Result<Vec<TrialOutcome>> {
    spec.validate()?;
    let window = spec.window()?;
    let streams = StreamFactory::new(spec.master_seed);
    (0..spec.n_trials as u64)
        .into_par_iter()
        .map(|t| run_trial(spec, &window, &streams, t))
        .collect()
}

pub fn simulate_typical_rate(spec: &SimSpec) -> Result<RateCdf> {
    let rates: Vec<f64> = simulate_trials(spec)?.iter().map(|o| o.rate).collect();
    RateCdf::from_samples(&rates)
}

/// SIR samples in trial order.
pub fn simulate_sir(spec: &SimSpec) -> Result<Vec<f64>> {
    Ok(simulate_trials(spec)?.iter().map(|o| o.sir).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Coverage {
    pub theta_db: f64,
    pub prob: f64,
    pub stderr: f64,
    pub n_trials: usize,
}

fn check_interference_limited(spec: &SimSpec) -> Result<()> {
    if spec.params.noise_psd_dbm_hz.is_some() {
        return Err(Error::InvalidParameter(
            "coverage estimation requires interference-limited operation (no noise)".into(),
        ));
    }
    Ok(())
}

fn coverage_from_sir(sir: &[f64], theta_db: f64) -> Coverage {
    let theta = crate::channel::db_to_linear(theta_db);
    let n = sir.len();
    let hits = sir.iter().filter(|&&s| s >= theta).count();
    let prob = hits as f64 / n as f64;
    Coverage {
        theta_db,
        prob,
        stderr: binomial_stderr(prob, n),
        n_trials: n,
    }
}

/// `P(SIR ≥ θ)` with its binomial standard error.
pub fn estimate_coverage(spec: &SimSpec, theta_db: f64) -> Result<Coverage> {
    Ok(coverage_curve(spec, &[theta_db])?[0])
}

/// Coverage at several thresholds from one shared set of trials.
pub fn coverage_curve(spec: &SimSpec, thetas_db: &[f64]) -> Result<Vec<Coverage>> {
    check_interference_limited(spec)?;
    if thetas_db.iter().any(|t| t.is_nan()) {
        return Err(Error::InvalidParameter("threshold must not be NaN".into()));
    }
    let sir = simulate_sir(spec)?;
    Ok(thetas_db.iter().map(|&t| coverage_from_sir(&sir, t)).collect())
}

pub fn quantile(cdf: &RateCdf, p: f64) -> Result<f64> {
    cdf.quantile(p)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(lambda_an: f64, lambda_ue: f64, n: usize, seed: u64) -> SimSpec {
        SimSpec::new(lambda_an, lambda_ue, ChannelParams::default(), n, seed)
    }

    #[test]
    fn guard_window_holds_enough_ans() {
        let s = spec(100.0, 1000.0, 1, 0);
        let w = s.window().unwrap();
        assert!((w.area_km2() * 100.0 - 500.0).abs() < 1e-9);
        let s = spec(1.0, 100.0, 1, 0);
        assert!((s.window().unwrap().area_km2() * 1.0 - 2000.0).abs() < 1e-6);
        let s = spec(100.0, 10.0, 1, 0);
        assert!((s.window().unwrap().area_km2() * 100.0 - 5000.0).abs() < 1e-6);
    }

    #[test]
    fn invalid_specs_rejected() {
        assert!(simulate_trials(&spec(0.0, 1.0, 10, 0)).is_err());
        assert!(simulate_trials(&spec(1.0, 1.0, 0, 0)).is_err());
        assert!(simulate_trials(&spec(1.0, -1.0, 1, 0)).is_err());
        let mut s = spec(1.0, 1.0, 1, 0);
        s.params.alpha = 2.0;
        assert!(simulate_trials(&s).is_err());
    }

    #[test]
    fn coverage_needs_no_noise() {
        let mut s = spec(100.0, 100.0, 10, 0);
        s.params.noise_psd_dbm_hz = Some(-174.0);
        assert!(estimate_coverage(&s, 0.0).is_err());
    }

    #[test]
    fn same_seed_same_trials() {
        let s = spec(100.0, 300.0, 200, 9);
        let a = simulate_trials(&s).unwrap();
        let b = simulate_trials(&s).unwrap();
        assert_eq!(a, b);
        let c = simulate_trials(&SimSpec { master_seed: 10, ..s }).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn trial_prefix_is_stable() {
        let a = simulate_trials(&spec(100.0, 300.0, 50, 3)).unwrap();
        let b = simulate_trials(&spec(100.0, 300.0, 120, 3)).unwrap();
        assert_eq!(a[..], b[..50]);
    }

    #[test]
    fn loads_include_typical_ue() {
        let mut s = spec(100.0, 0.0, 50, 1);
        s.params.noise_psd_dbm_hz = Some(-174.0);
        for o in simulate_trials(&s).unwrap() {
            assert_eq!(o.load, 1);
        }
        let big = simulate_trials(&spec(10.0, 1000.0, 200, 1)).unwrap();
        let mean = big.iter().map(|o| o.load as f64).sum::<f64>() / big.len() as f64;
        // Size-biased cell: 1 + 4.5 / (3.5 τ) with τ = 0.01.
        assert!((mean - (1.0 + 4.5 / 0.035)).abs() < 15.0, "mean load {mean}");
    }

    #[test]
    fn threshold_outage_maps_to_zero_rate() {
        let s = spec(100.0, 100.0, 2000, 4);
        let th = s.params.theta0_linear();
        for o in simulate_trials(&s).unwrap() {
            assert_eq!(o.rate == 0.0, o.sir < th);
            assert!(o.subchannel < s.params.n_subchannels);
        }
    }

    #[test]
    fn coverage_tends_to_one_for_low_threshold() {
        let s = spec(100.0, 100.0, 2000, 5).with_activity(ActivityModel::Full);
        let c = estimate_coverage(&s, -60.0).unwrap();
        assert!(c.prob > 0.999);
    }

    #[test]
    fn quantile_plumbing() {
        let s = spec(100.0, 100.0, 1000, 6);
        let cdf = simulate_typical_rate(&s).unwrap();
        assert_eq!(quantile(&cdf, 0.5).unwrap(), cdf.median().unwrap());
        assert!(quantile(&cdf, 1.0).is_err());
        cdf.check_invariants().unwrap();
    }
}
