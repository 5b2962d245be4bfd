//! Semi-analytic coverage, load and rate distributions.
//!
//! Coverage follows the nearest-AN/Rayleigh model with independently thinned
//! interferers. Cell loads use the Gamma(3.5) approximation of
//! Poisson–Voronoi cell areas: the typical UE's own cell is size-biased
//! (shape 4.5), other cells are not. Load and SIR are composed as if
//! independent, which is an approximation that the Monte Carlo engine
//! certifies.

use crate::channel::ChannelParams;
use crate::error::{Error, Result};
use crate::montecarlo::{CdfKind, RateCdf};
use crate::quadrature::{integrate_to_infinity, QuadConfig, QuadResult};

/// Gamma shape of the normalised Poisson–Voronoi cell area.
pub const VORONOI_SHAPE: f64 = 3.5;
pub const DEFAULT_K_MAX: usize = 64;
pub const RHO_REL_TOL: f64 = 1e-10;

/// Adaptive truncation keeps the load tail below this mass.
const LOAD_TAIL_TARGET: f64 = 1e-12;
const LOAD_K_CAP: usize = 5_000_000;

/// `ρ(θ, α) = θ^(2/α) ∫_{θ^(-2/α)}^∞ du / (1 + u^(α/2))` with its error bound.
pub fn rho_integral_with(theta: f64, alpha: f64, rel_tol: f64) -> Result<QuadResult> {
    if !(alpha > 2.0) {
        return Err(Error::Divergence(format!(
            "interference integral diverges for path-loss exponent {alpha} <= 2"
        )));
    }
    if !(theta >= 0.0) {
        return Err(Error::InvalidParameter(format!("SIR threshold must be positive, got {theta}")));
    }
    if theta == 0.0 {
        return Ok(QuadResult { value: 0.0, abs_error: 0.0, intervals: 0 });
    }
    if theta.is_infinite() {
        return Ok(QuadResult { value: f64::INFINITY, abs_error: 0.0, intervals: 0 });
    }
    let half = 0.5 * alpha;
    let scale = theta.powf(2.0 / alpha);
    let lower = 1.0 / scale;
    let cfg = QuadConfig {
        abs_tol: 0.0,
        rel_tol,
        max_intervals: 4000,
    };
    let r = integrate_to_infinity(|u: f64| 1.0 / (1.0 + u.powf(half)), lower, cfg)?;
    Ok(QuadResult {
        value: scale * r.value,
        abs_error: scale * r.abs_error,
        intervals: r.intervals,
    })
}

pub fn rho_integral(theta: f64, alpha: f64) -> Result<f64> {
    Ok(rho_integral_with(theta, alpha, RHO_REL_TOL)?.value)
}

/// `P(SIR ≥ θ) = 1 / (1 + activity · ρ(θ, α))`.
///
/// Takes no density: the result is the same for every AN density.
pub fn coverage_probability(theta: f64, alpha: f64, activity: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&activity) {
        return Err(Error::InvalidParameter(format!(
            "activity must lie in [0, 1], got {activity}"
        )));
    }
    if activity == 0.0 {
        rho_integral(theta, alpha)?;
        return Ok(1.0);
    }
    let rho = rho_integral(theta, alpha)?;
    Ok(1.0 / (1.0 + activity * rho))
}

/// Distribution of the total UE count `K` (typical UE included) in the
/// typical UE's serving cell. `pmf[i] = P(K = i + 1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadPmf {
    pub pmf: Vec<f64>,
    pub tail_mass: f64,
}

impl LoadPmf {
    pub fn mean_co_load(&self) -> f64 {
        self.pmf.iter().enumerate().map(|(k, p)| k as f64 * p).sum()
    }
}

/// Negative-binomial weights from a Poisson mixture over Gamma(shape, 3.5)
/// areas, in units of the mean cell area.
fn mixed_poisson_terms(tau: f64, shape: f64) -> impl Iterator<Item = f64> {
    let q = VORONOI_SHAPE * tau / (VORONOI_SHAPE * tau + 1.0);
    let mut p = q.powf(shape);
    let mut k = 0usize;
    std::iter::from_fn(move || {
        let out = p;
        p *= (k as f64 + shape) / (k as f64 + 1.0) * (1.0 - q);
        k += 1;
        Some(out)
    })
}

fn check_tau(tau: f64) -> Result<()> {
    if !(tau > 0.0) || !tau.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "densification ratio must be positive and finite, got {tau}"
        )));
    }
    Ok(())
}

/// Size-biased load law truncated at `k_max` with explicit tail mass.
pub fn load_pmf(tau: f64, k_max: usize) -> Result<LoadPmf> {
    check_tau(tau)?;
    if k_max < 1 {
        return Err(Error::InvalidParameter("k_max must be at least 1".into()));
    }
    let pmf: Vec<f64> = mixed_poisson_terms(tau, VORONOI_SHAPE + 1.0).take(k_max).collect();
    let tail_mass = (1.0 - pmf.iter().sum::<f64>()).max(0.0);
    Ok(LoadPmf { pmf, tail_mass })
}

/// Load law truncated where the tail drops below 1e-12 (at least 64 terms).
pub fn load_pmf_adaptive(tau: f64) -> Result<LoadPmf> {
    check_tau(tau)?;
    let mut pmf = Vec::new();
    let mut acc = 0.0;
    for p in mixed_poisson_terms(tau, VORONOI_SHAPE + 1.0) {
        pmf.push(p);
        acc += p;
        if (pmf.len() >= DEFAULT_K_MAX && 1.0 - acc < LOAD_TAIL_TARGET) || pmf.len() >= LOAD_K_CAP {
            break;
        }
    }
    let tail_mass = (1.0 - acc).max(0.0);
    Ok(LoadPmf { pmf, tail_mass })
}

/// Fraction of subchannels an arbitrary (not size-biased) cell keeps busy:
/// `E[min(K', N)] / N`.
pub fn activity(tau: f64, n_subchannels: u32) -> Result<f64> {
    check_tau(tau)?;
    if n_subchannels < 1 {
        return Err(Error::InvalidParameter("n_subchannels must be at least 1".into()));
    }
    let n = n_subchannels as usize;
    let (mut below, mut mass) = (0.0, 0.0);
    for (k, p) in mixed_poisson_terms(tau, VORONOI_SHAPE).take(n).enumerate() {
        below += k as f64 * p;
        mass += p;
    }
    let n = n as f64;
    Ok(((below + n * (1.0 - mass)) / n).clamp(0.0, 1.0))
}

/// Typical-UE rate model at a fixed densification ratio.
#[derive(Debug, Clone)]
pub struct SemiAnalyticRate {
    pub tau: f64,
    pub alpha: f64,
    pub theta0: f64,
    pub activity: f64,
    pub load: LoadPmf,
}

impl SemiAnalyticRate {
    pub fn new(tau: f64, params: &ChannelParams) -> Result<Self> {
        params.validate()?;
        Ok(Self {
            tau,
            alpha: params.alpha,
            theta0: params.theta0_linear(),
            activity: activity(tau, params.n_subchannels)?,
            load: load_pmf_adaptive(tau)?,
        })
    }

    fn coverage(&self, theta: f64) -> Result<f64> {
        coverage_probability(theta, self.alpha, self.activity)
    }

    /// `F(r) = Σ_K P(K) [1 − P_cov(max(θ0, 2^(rK) − 1))]`, tail counted as outage.
    pub fn cdf(&self, r: f64) -> Result<f64> {
        if r < 0.0 {
            return Ok(0.0);
        }
        let mut covered = 0.0;
        for (i, &p) in self.load.pmf.iter().enumerate() {
            let k = (i + 1) as f64;
            let theta = (r * k * std::f64::consts::LN_2).exp_m1().max(self.theta0);
            let c = self.coverage(theta)?;
            covered += p * c;
            // Coverage only shrinks with K; stop once the rest is negligible.
            if c < 1e-16 {
                break;
            }
        }
        Ok((1.0 - covered).clamp(0.0, 1.0))
    }

    pub fn outage_mass(&self) -> Result<f64> {
        self.cdf(0.0)
    }

    /// Smallest `r` with `F(r) ≥ p`, by bisection.
    pub fn quantile(&self, p: f64) -> Result<f64> {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "quantile level must lie in (0, 1), got {p}"
            )));
        }
        if self.cdf(0.0)? >= p {
            return Ok(0.0);
        }
        let mut hi = 1.0;
        while self.cdf(hi)? < p {
            hi *= 2.0;
            if hi > 1e4 {
                return Err(Error::SimulationFailure(format!("quantile {p} beyond 1e4 bps/Hz")));
            }
        }
        let mut lo = 0.0;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if self.cdf(mid)? >= p {
                hi = mid;
            } else {
                lo = mid;
            }
            if hi - lo <= 1e-13 * hi {
                break;
            }
        }
        Ok(hi)
    }

    pub fn median(&self) -> Result<f64> {
        self.quantile(0.5)
    }

    /// Tabulates the CDF on a geometric grid spanning six decades below the
    /// rate where `F` exceeds `1 - 1e-6`.
    pub fn to_rate_cdf(&self, n_points: usize) -> Result<RateCdf> {
        let n_points = n_points.clamp(16, super::montecarlo::MAX_GRID_POINTS - 1);
        let r_max = self.quantile(1.0 - 1e-6)?.max(1e-12);
        let r_min = r_max * 1e-6;
        let ratio = (r_max / r_min).powf(1.0 / (n_points - 1) as f64);
        let mut grid = vec![0.0];
        let mut r = r_min;
        for _ in 0..n_points {
            grid.push(r);
            r *= ratio;
        }
        *grid.last_mut().unwrap() = r_max;
        let mut cdf = Vec::with_capacity(grid.len());
        let mut prev: f64 = 0.0;
        for &g in &grid {
            // Clamp guards against round-off dips between neighbouring points.
            let v = self.cdf(g)?.max(prev);
            cdf.push(v);
            prev = v;
        }
        Ok(RateCdf {
            kind: CdfKind::Semianalytic,
            grid,
            cdf,
            n_trials: None,
        })
    }
}

pub fn rate_cdf_semianalytic(tau: f64, params: &ChannelParams) -> Result<RateCdf> {
    SemiAnalyticRate::new(tau, params)?.to_rate_cdf(1024)
}

pub fn median_rate_semianalytic(tau: f64, params: &ChannelParams) -> Result<f64> {
    SemiAnalyticRate::new(tau, params)?.median()
}
