//! Densification planning: minimum densification ratio for a target median
//! rate, scaling-law diagnostics and densification/exploitation tradeoffs.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytic::median_rate_semianalytic;
use crate::channel::ChannelParams;
use crate::error::{Error, Result};
use crate::montecarlo::{simulate_typical_rate, SimSpec};
use crate::stats::{linear_fit, LinearFit};

/// Monte Carlo median-rate evaluator. Every evaluation reuses `master_seed`,
/// so evaluations at different `τ` share their random numbers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEngine {
    /// Background-UE density (UEs/km²); `λ_AN = τ · lambda_ue`.
    pub lambda_ue: f64,
    pub n_trials: usize,
    pub master_seed: u64,
    /// Relative excursion of a bisection midpoint outside its bracket's
    /// medians that is still put down to sampling noise.
    pub slack: f64,
}

impl Default for McEngine {
    fn default() -> Self {
        Self {
            lambda_ue: 100.0,
            n_trials: 10_000,
            master_seed: 1,
            slack: 0.03,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Engine {
    Montecarlo(McEngine),
    Semianalytic,
}

impl Engine {
    /// Median typical-UE rate (bps/Hz) at densification ratio `tau`.
    pub fn median_rate(&self, tau: f64, params: &ChannelParams) -> Result<f64> {
        if !(tau > 0.0) || !tau.is_finite() {
            return Err(Error::InvalidParameter(format!("tau must be positive, got {tau}")));
        }
        match self {
            Engine::Semianalytic => median_rate_semianalytic(tau, params),
            Engine::Montecarlo(mc) => {
                let spec = SimSpec::new(tau * mc.lambda_ue, mc.lambda_ue, *params, mc.n_trials, mc.master_seed);
                simulate_typical_rate(&spec)?.median()
            }
        }
    }

    fn slack(&self) -> f64 {
        match self {
            Engine::Semianalytic => 1e-9,
            Engine::Montecarlo(mc) => mc.slack,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlannerQuery {
    pub target_median_rate: f64,
    pub engine: Engine,
    pub params: ChannelParams,
    pub tau_bracket: (f64, f64),
    /// Relative tolerance on the median rate.
    pub tolerance: f64,
}

impl PlannerQuery {
    pub fn new(target_median_rate: f64, engine: Engine, params: ChannelParams) -> Self {
        Self {
            target_median_rate,
            engine,
            params,
            tau_bracket: (1e-3, 1e3),
            tolerance: 0.01,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let (lo, hi) = self.tau_bracket;
        let mut v = self.params.violations();
        if !(lo > 0.0 && lo < hi) || !hi.is_finite() {
            v.push(format!("tau bracket must satisfy 0 < lo < hi (got ({lo}, {hi}))"));
        }
        if !(self.target_median_rate > 0.0) || !self.target_median_rate.is_finite() {
            v.push(format!("target median rate must be positive (got {})", self.target_median_rate));
        }
        if !(self.tolerance > 0.0) {
            v.push(format!("tolerance must be positive (got {})", self.tolerance));
        }
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidParameter(v.join("; ")))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MinTau {
    pub tau: f64,
    /// Median rate at `tau`.
    pub median_rate: f64,
    pub evaluations: usize,
}

/// Smallest `τ` whose median rate reaches the target, by bisection on `log τ`.
pub fn min_tau(query: &PlannerQuery) -> Result<MinTau> {
    query.validate()?;
    let target = query.target_median_rate;
    let eval = |tau: f64| query.engine.median_rate(tau, &query.params);
    let (mut lo, mut hi) = query.tau_bracket;
    let (mut r_lo, mut r_hi) = (eval(lo)?, eval(hi)?);
    let mut evaluations = 2;
    if !(r_lo < target && target <= r_hi) {
        return Err(Error::BracketNotStraddling {
            lo,
            hi,
            rate_lo: r_lo,
            rate_hi: r_hi,
            target,
        });
    }
    let slack = query.engine.slack() * target;
    let within = |r: f64| (r - target).abs() <= query.tolerance * target;
    loop {
        let mid = (lo * hi).sqrt();
        if mid <= lo || mid >= hi || hi / lo - 1.0 < 1e-12 {
            // The bracket collapsed without a midpoint inside the tolerance.
            let (tau, r) = if (r_lo - target).abs() < (r_hi - target).abs() {
                (lo, r_lo)
            } else {
                (hi, r_hi)
            };
            if within(r) {
                return Ok(MinTau {
                    tau,
                    median_rate: r,
                    evaluations,
                });
            }
            return Err(Error::NonMonotone(format!(
                "median rate jumps from {r_lo} to {r_hi} across tau = {lo}, missing target {target}"
            )));
        }
        let r = eval(mid)?;
        evaluations += 1;
        if r < r_lo - slack || r > r_hi + slack {
            return Err(Error::NonMonotone(format!(
                "median({mid}) = {r} lies outside [median({lo}) = {r_lo}, median({hi}) = {r_hi}]"
            )));
        }
        if within(r) {
            return Ok(MinTau {
                tau: mid,
                median_rate: r,
                evaluations,
            });
        }
        if r < target {
            lo = mid;
            r_lo = r;
        } else {
            hi = mid;
            r_hi = r;
        }
    }
}

/// `min_tau` over a grid of targets, evaluated in parallel, in grid order.
pub fn min_tau_curve(base: &PlannerQuery, targets: &[f64]) -> Result<Vec<(f64, MinTau)>> {
    targets
        .par_iter()
        .map(|&r0| {
            let q = PlannerQuery {
                target_median_rate: r0,
                ..*base
            };
            Ok((r0, min_tau(&q)?))
        })
        .collect()
}

/// Relative spread `max/min - 1` of `τ_min / r0`; near zero in the linear regime.
pub fn ratio_variation(r0: &[f64], tau_min: &[f64]) -> Result<f64> {
    if r0.len() != tau_min.len() || r0.is_empty() {
        return Err(Error::InvalidParameter("need equally long, non-empty grids".into()));
    }
    let ratios: Vec<f64> = r0.iter().zip(tau_min).map(|(r, t)| t / r).collect();
    let max = ratios.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
    Ok(max / min - 1.0)
}

/// Least-squares fit of `ln τ_min` against `r0`; a high R² marks the
/// exponential regime.
pub fn log_linear_fit(r0: &[f64], tau_min: &[f64]) -> Result<LinearFit> {
    if r0.len() != tau_min.len() || r0.len() < 2 {
        return Err(Error::InvalidParameter("need at least two points".into()));
    }
    if tau_min.iter().any(|t| !(*t > 0.0)) {
        return Err(Error::InvalidParameter("tau values must be positive".into()));
    }
    let ln: Vec<f64> = tau_min.iter().map(|t| t.ln()).collect();
    Ok(linear_fit(r0, &ln))
}

/// `r0,tau_min` table with a header row.
pub fn write_min_tau_csv<W: Write>(rows: &[(f64, MinTau)], mut w: W) -> std::io::Result<()> {
    writeln!(w, "r0,tau_min")?;
    for (r0, m) in rows {
        writeln!(w, "{r0},{}", m.tau)?;
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TradeoffPoint {
    /// UE density ratio `λ'_UE / λ_UE`.
    pub x: f64,
    /// Densification ratio of the densified network.
    pub tau: f64,
    /// Median rate of the densified network.
    pub rate: f64,
    /// Rate ratio `r'0 / r0`.
    pub y: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TradeoffCurve {
    pub points: Vec<TradeoffPoint>,
    pub base_lambda_an: f64,
    pub base_lambda_ue: f64,
    /// Median rate of the base network.
    pub base_rate: f64,
    /// `λ'_AN / λ_AN`.
    pub densification_factor: f64,
}

impl TradeoffCurve {
    pub fn is_nonincreasing(&self) -> bool {
        self.points.windows(2).all(|w| w[1].y <= w[0].y)
    }

    pub fn is_strictly_decreasing(&self) -> bool {
        self.points.windows(2).all(|w| w[1].y < w[0].y)
    }

    /// `x,rate_ratio,area_capacity` table with a header row.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "x,rate_ratio,area_capacity")?;
        for (p, (_, c)) in self.points.iter().zip(area_capacity(self).points) {
            writeln!(w, "{},{},{}", p.x, p.y, c)?;
        }
        Ok(())
    }
}

/// Rate ratio `r'0/r0` when the AN density grows by `factor` and the UE
/// density by each `x`, i.e. `τ' = factor · τ / x`.
pub fn tradeoff_curve(
    base: (f64, f64),
    densification_factor: f64,
    x_grid: &[f64],
    engine: &Engine,
    params: &ChannelParams,
) -> Result<TradeoffCurve> {
    let (lambda_an, lambda_ue) = base;
    if !(lambda_an > 0.0 && lambda_ue > 0.0) || !lambda_an.is_finite() || !lambda_ue.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "base densities must be positive (got ({lambda_an}, {lambda_ue}))"
        )));
    }
    if !(densification_factor > 0.0) || !densification_factor.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "densification factor must be positive (got {densification_factor})"
        )));
    }
    if x_grid.is_empty() || x_grid.iter().any(|x| !(*x > 0.0) || !x.is_finite()) {
        return Err(Error::InvalidParameter("x grid must be non-empty and positive".into()));
    }
    if x_grid.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::InvalidParameter("x grid must be strictly ascending".into()));
    }
    let tau_base = lambda_an / lambda_ue;
    let base_rate = engine.median_rate(tau_base, params)?;
    if !(base_rate > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "base network has zero median rate at tau = {tau_base}"
        )));
    }
    let points = x_grid
        .par_iter()
        .map(|&x| {
            // At x = factor the ratio is unchanged, so reuse the base network.
            if x == densification_factor {
                return Ok(TradeoffPoint {
                    x,
                    tau: tau_base,
                    rate: base_rate,
                    y: 1.0,
                });
            }
            let tau = densification_factor * tau_base / x;
            let rate = engine.median_rate(tau, params)?;
            Ok(TradeoffPoint {
                x,
                tau,
                rate,
                y: rate / base_rate,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(TradeoffCurve {
        points,
        base_lambda_an: lambda_an,
        base_lambda_ue: lambda_ue,
        base_rate,
        densification_factor,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AreaCapacity {
    /// `(x, λ'_AN · r'0)` in bps/Hz per km².
    pub points: Vec<(f64, f64)>,
    pub argmax_x: f64,
    pub max_capacity: f64,
}

impl AreaCapacity {
    pub fn argmax_at_least(&self, x: f64) -> bool {
        self.argmax_x >= x
    }
}

/// Area capacity along a tradeoff curve. Ties go to the larger `x`.
pub fn area_capacity(curve: &TradeoffCurve) -> AreaCapacity {
    let lambda_an = curve.densification_factor * curve.base_lambda_an;
    let points: Vec<(f64, f64)> = curve
        .points
        .iter()
        .map(|p| (p.x, lambda_an * p.y * curve.base_rate))
        .collect();
    let (mut argmax_x, mut max_capacity) = (f64::NAN, f64::NEG_INFINITY);
    for &(x, c) in &points {
        if c >= max_capacity {
            argmax_x = x;
            max_capacity = c;
        }
    }
    AreaCapacity {
        points,
        argmax_x,
        max_capacity,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sa(target: f64) -> PlannerQuery {
        PlannerQuery::new(target, Engine::Semianalytic, ChannelParams::default())
    }

    #[test]
    fn min_tau_hits_target() {
        let m = min_tau(&sa(1.0)).unwrap();
        assert!((m.median_rate - 1.0).abs() <= 0.01);
        let check = median_rate_semianalytic(m.tau, &ChannelParams::default()).unwrap();
        assert_eq!(check, m.median_rate);
    }

    #[test]
    fn doubling_target_needs_more_tau() {
        let a = min_tau(&sa(0.5)).unwrap().tau;
        let b = min_tau(&sa(1.0)).unwrap().tau;
        assert!(b > a);
    }

    #[test]
    fn bracket_must_straddle() {
        let mut q = sa(1.0);
        q.tau_bracket = (1.0, 10.0);
        assert!(matches!(min_tau(&q), Err(Error::BracketNotStraddling { .. })));
        q.tau_bracket = (10.0, 1.0);
        assert!(matches!(min_tau(&q), Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn min_tau_is_repeatable() {
        let q = PlannerQuery {
            tau_bracket: (0.05, 2.0),
            ..PlannerQuery::new(
                0.5,
                Engine::Montecarlo(McEngine {
                    n_trials: 300,
                    ..McEngine::default()
                }),
                ChannelParams::default(),
            )
        };
        assert_eq!(min_tau(&q).unwrap(), min_tau(&q).unwrap());
    }

    #[test]
    fn diagnostics() {
        let r0 = [1.0, 2.0, 4.0];
        assert!(ratio_variation(&r0, &[0.1, 0.2, 0.4]).unwrap().abs() < 1e-12);
        assert!((ratio_variation(&r0, &[0.1, 0.2, 0.44]).unwrap() - 0.1).abs() < 1e-12);
        let taus: Vec<f64> = r0.iter().map(|r| (0.7 * r - 2.0f64).exp()).collect();
        let fit = log_linear_fit(&r0, &taus).unwrap();
        assert!((fit.slope - 0.7).abs() < 1e-12 && (fit.r_squared - 1.0).abs() < 1e-12);
    }

    fn toy_curve(ys: &[(f64, f64)]) -> TradeoffCurve {
        TradeoffCurve {
            points: ys
                .iter()
                .map(|&(x, y)| TradeoffPoint { x, tau: 1.0, rate: y, y })
                .collect(),
            base_lambda_an: 5.0,
            base_lambda_ue: 100.0,
            base_rate: 1.0,
            densification_factor: 100.0,
        }
    }

    #[test]
    fn capacity_ties_go_to_larger_x() {
        let cap = area_capacity(&toy_curve(&[(1.0, 2.0), (2.0, 3.0), (5.0, 3.0), (10.0, 1.0)]));
        assert_eq!(cap.argmax_x, 5.0);
        assert_eq!(cap.max_capacity, 500.0 * 3.0);
        assert!(cap.argmax_at_least(5.0) && !cap.argmax_at_least(10.0));
    }

    #[test]
    fn tradeoff_endpoint_is_exact() {
        let c = tradeoff_curve((5.0, 100.0), 100.0, &[1.0, 10.0, 100.0], &Engine::Semianalytic, &ChannelParams::default())
            .unwrap();
        assert_eq!(c.points[2].y, 1.0);
        assert!(c.is_strictly_decreasing());
        assert!((c.points[0].tau - 5.0).abs() < 1e-12);
        let mut buf = Vec::new();
        c.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("x,rate_ratio,area_capacity\n"));
        assert_eq!(text.lines().count(), 4);
    }

    #[test]
    fn tradeoff_rejects_bad_grids() {
        let p = ChannelParams::default();
        let e = Engine::Semianalytic;
        assert!(tradeoff_curve((5.0, 100.0), 100.0, &[2.0, 1.0], &e, &p).is_err());
        assert!(tradeoff_curve((5.0, 100.0), 0.0, &[1.0], &e, &p).is_err());
        assert!(tradeoff_curve((5.0, 100.0), 10.0, &[], &e, &p).is_err());
    }
}
