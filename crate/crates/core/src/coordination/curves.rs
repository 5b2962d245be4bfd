use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::policy::evaluate;
use super::{CoordProblem, PolicyId};
use crate::channel::ChannelParams;
use crate::error::{Error, Result};
use crate::pointprocess::Window;
use crate::rng::StreamFactory;
use crate::stats::mean_stderr;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveSpec {
    pub tau_grid: Vec<f64>,
    pub n_ues: usize,
    pub window: Window,
    pub params: ChannelParams,
    pub n_rb: usize,
    pub n_realizations: usize,
    pub master_seed: u64,
}

impl CurveSpec {
    pub fn validate(&self) -> Result<()> {
        let mut v = self.params.violations();
        if self.tau_grid.is_empty() || self.tau_grid.iter().any(|t| !(*t > 0.0) || !t.is_finite()) {
            v.push("tau grid must be non-empty and positive".into());
        }
        if self.n_ues == 0 {
            v.push("n_ues must be at least 1".into());
        }
        if self.n_rb == 0 {
            v.push("n_rb must be at least 1".into());
        }
        if self.n_realizations == 0 {
            v.push("n_realizations must be at least 1".into());
        }
        for &t in &self.tau_grid {
            if self.n_ans(t) == 0 {
                v.push(format!("tau = {t} leaves no AN for {} UEs", self.n_ues));
            }
        }
        if let Err(e) = self.window.validate() {
            v.push(e.to_string());
        }
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidParameter(v.join("; ")))
        }
    }

    pub fn n_ans(&self, tau: f64) -> usize {
        (tau * self.n_ues as f64).round() as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub tau: f64,
    pub mean_min_rate: f64,
    pub stderr: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GuaranteedRateCurve {
    pub policy: PolicyId,
    pub points: Vec<CurvePoint>,
}

/// Mean minimum UE rate per `τ` for several policies. All policies see the
/// same realizations, and realization `r` uses the same streams at every `τ`.
pub fn guaranteed_rate_curves(spec: &CurveSpec, policies: &[PolicyId]) -> Result<Vec<GuaranteedRateCurve>> {
    spec.validate()?;
    let streams = StreamFactory::new(spec.master_seed);
    let jobs: Vec<(usize, u64)> = (0..spec.tau_grid.len())
        .flat_map(|t| (0..spec.n_realizations as u64).map(move |r| (t, r)))
        .collect();
    let results: Vec<Vec<f64>> = jobs
        .par_iter()
        .map(|&(t, r)| {
            let n_ans = spec.n_ans(spec.tau_grid[t]);
            let problem = CoordProblem::sample(&spec.window, n_ans, spec.n_ues, &spec.params, spec.n_rb, &streams, r)?;
            Ok(evaluate(&problem, policies)?.iter().map(|a| a.min_rate).collect())
        })
        .collect::<Result<_>>()?;
    Ok(policies
        .iter()
        .enumerate()
        .map(|(k, &policy)| {
            let points = spec
                .tau_grid
                .iter()
                .enumerate()
                .map(|(t, &tau)| {
                    let xs: Vec<f64> = results[t * spec.n_realizations..(t + 1) * spec.n_realizations]
                        .iter()
                        .map(|v| v[k])
                        .collect();
                    let (mean_min_rate, stderr) = mean_stderr(&xs);
                    CurvePoint {
                        tau,
                        mean_min_rate,
                        stderr,
                    }
                })
                .collect();
            GuaranteedRateCurve { policy, points }
        })
        .collect())
}

pub fn guaranteed_rate_curve(spec: &CurveSpec, policy: PolicyId) -> Result<GuaranteedRateCurve> {
    Ok(guaranteed_rate_curves(spec, &[policy])?.remove(0))
}

/// Smallest `τ` whose mean minimum rate reaches `target`, interpolating
/// linearly in `log τ` between grid points.
fn required_tau(curve: &GuaranteedRateCurve, target: f64) -> Result<f64> {
    let pts = &curve.points;
    let i = pts
        .iter()
        .position(|p| p.mean_min_rate >= target)
        .ok_or_else(|| Error::UnachievableTarget {
            policy: curve.policy.name().to_string(),
            target,
        })?;
    if i == 0 {
        return Ok(pts[0].tau);
    }
    let (a, b) = (pts[i - 1], pts[i]);
    let f = (target - a.mean_min_rate) / (b.mean_min_rate - a.mean_min_rate);
    Ok((a.tau.ln() + f * (b.tau.ln() - a.tau.ln())).exp())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SavingsRow {
    pub target_rate: f64,
    pub policy: PolicyId,
    pub tau_required: f64,
    pub tau_baseline: f64,
    pub savings_pct: f64,
}

/// `100 · (1 − τ_policy(g) / τ_baseline(g))` for every target and every
/// non-baseline curve.
pub fn densification_savings(targets: &[f64], curves: &[GuaranteedRateCurve]) -> Result<Vec<SavingsRow>> {
    let base = curves
        .iter()
        .find(|c| c.policy == PolicyId::Baseline)
        .ok_or_else(|| Error::InvalidParameter("savings need a baseline curve".into()))?;
    if curves.iter().any(|c| c.points.windows(2).any(|w| !(w[0].tau < w[1].tau))) {
        return Err(Error::InvalidParameter("curve tau grids must be ascending".into()));
    }
    let mut rows = Vec::new();
    for &g in targets {
        if !(g > 0.0) {
            return Err(Error::InvalidParameter(format!("target rate must be positive, got {g}")));
        }
        let tau_baseline = required_tau(base, g)?;
        for c in curves.iter().filter(|c| c.policy != PolicyId::Baseline) {
            let tau_required = required_tau(c, g)?;
            rows.push(SavingsRow {
                target_rate: g,
                policy: c.policy,
                tau_required,
                tau_baseline,
                savings_pct: 100.0 * (1.0 - tau_required / tau_baseline),
            });
        }
    }
    Ok(rows)
}

/// `tau,policy,mean_min_rate,stderr`, one row per grid point and policy.
pub fn write_curves_csv<W: Write>(curves: &[GuaranteedRateCurve], mut w: W) -> std::io::Result<()> {
    writeln!(w, "tau,policy,mean_min_rate,stderr")?;
    for c in curves {
        for p in &c.points {
            writeln!(w, "{},{},{},{}", p.tau, c.policy, p.mean_min_rate, p.stderr)?;
        }
    }
    Ok(())
}

/// `target_rate,policy,savings_pct`.
pub fn write_savings_csv<W: Write>(rows: &[SavingsRow], mut w: W) -> std::io::Result<()> {
    writeln!(w, "target_rate,policy,savings_pct")?;
    for r in rows {
        writeln!(w, "{},{},{}", r.target_rate, r.policy, r.savings_pct)?;
    }
    Ok(())
}
