//! Finite-area networks under an uncoordinated baseline and two coordinated
//! resource-allocation policies.
//!
//! Every UE has exactly one link, to its nearest AN. A cell with at most
//! `n_rb` UEs gives each link its own resource block (share `1/n_rb`). A
//! cell with more UEs is saturated: the AN transmits at the cap on every RB
//! and its UEs time-share all of them (share `1/load`).

mod curves;
mod policy;
mod power;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::channel::{db_to_linear, draw_fading, linear_to_db, path_gain, ChannelParams};
use crate::error::{Error, Result};
use crate::pointprocess::{sample_fixed, NetworkSnapshot, NodeKind, Window};
use crate::rng::{Purpose, StreamFactory};

pub use curves::{
    densification_savings, guaranteed_rate_curve, guaranteed_rate_curves, write_curves_csv, write_savings_csv,
    CurvePoint, CurveSpec, GuaranteedRateCurve, SavingsRow,
};
pub use policy::{evaluate, evaluate_baseline, evaluate_policy1, evaluate_policy2};
pub use power::maxmin_sinr_powers;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PolicyId {
    Baseline,
    Policy1,
    Policy2,
}

impl PolicyId {
    pub const ALL: [PolicyId; 3] = [PolicyId::Baseline, PolicyId::Policy1, PolicyId::Policy2];

    pub fn name(self) -> &'static str {
        match self {
            PolicyId::Baseline => "baseline",
            PolicyId::Policy1 => "policy1",
            PolicyId::Policy2 => "policy2",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown policy '{s}'")))
    }
}

impl std::fmt::Display for PolicyId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoordProblem {
    pub snapshot: NetworkSnapshot,
    /// Noise must be on; `tx_power_dbm` is the per-link power cap.
    pub params: ChannelParams,
    pub n_rb: usize,
    /// `gains[a][u]`: path loss times fading from AN `a` to UE `u`.
    pub gains: Vec<Vec<f64>>,
    /// Baseline round-robin offset of each AN.
    pub rb_phase: Vec<usize>,
}

impl CoordProblem {
    pub fn new(
        snapshot: NetworkSnapshot,
        params: ChannelParams,
        n_rb: usize,
        gains: Vec<Vec<f64>>,
        rb_phase: Vec<usize>,
    ) -> Result<Self> {
        params.validate()?;
        if params.noise_psd_dbm_hz.is_none() {
            return Err(Error::InvalidParameter("coordination requires noise to be on".into()));
        }
        if n_rb == 0 {
            return Err(Error::InvalidParameter("n_rb must be at least 1".into()));
        }
        let (n_an, n_ue) = (snapshot.ans.len(), snapshot.ues.len());
        if n_an == 0 {
            return Err(Error::NoServer);
        }
        if gains.len() != n_an || gains.iter().any(|row| row.len() != n_ue) {
            return Err(Error::InvalidParameter(format!("gains must be {n_an} x {n_ue}")));
        }
        if gains.iter().flatten().any(|g| !(*g >= 0.0) || !g.is_finite()) {
            return Err(Error::InvalidParameter("gains must be finite and non-negative".into()));
        }
        if rb_phase.len() != n_an || rb_phase.iter().any(|&r| r >= n_rb) {
            return Err(Error::InvalidParameter("one RB phase in [0, n_rb) per AN".into()));
        }
        Ok(Self {
            snapshot,
            params,
            n_rb,
            gains,
            rb_phase,
        })
    }

    /// Random instance: `n_ans` and `n_ues` uniform nodes, path loss with
    /// fading on every AN-UE pair, and random baseline phases.
    ///
    /// Realization `r` draws from the same streams whatever `n_ans` is, so
    /// a denser network extends a sparser one node by node.
    pub fn sample(
        window: &Window,
        n_ans: usize,
        n_ues: usize,
        params: &ChannelParams,
        n_rb: usize,
        streams: &StreamFactory,
        realization: u64,
    ) -> Result<Self> {
        if n_rb == 0 {
            return Err(Error::InvalidParameter("n_rb must be at least 1".into()));
        }
        let mut rng = streams.stream(realization, Purpose::Users);
        let ues = sample_fixed(n_ues, window, NodeKind::Ue, &mut rng)?;
        let mut rng = streams.stream(realization, Purpose::AccessNodes);
        let ans = sample_fixed(n_ans, window, NodeKind::An, &mut rng)?;
        let snapshot = NetworkSnapshot::new(*window, ans, ues)?;
        let mut fade = streams.stream(realization, Purpose::Fading);
        let gains = snapshot
            .ans
            .points
            .iter()
            .map(|a| {
                snapshot
                    .ues
                    .points
                    .iter()
                    .map(|u| path_gain(a.dist(u), params).0 * draw_fading(params.fading, &mut fade))
                    .collect()
            })
            .collect();
        let mut rng = streams.stream(realization, Purpose::ResourcePhase);
        let rb_phase = (0..n_ans).map(|_| rng.random_range(0..n_rb)).collect();
        Self::new(snapshot, *params, n_rb, gains, rb_phase)
    }

    pub fn n_ues(&self) -> usize {
        self.snapshot.ues.len()
    }

    pub fn cap_mw(&self) -> f64 {
        db_to_linear(self.params.tx_power_dbm)
    }

    /// Noise over one resource block, in mW.
    pub fn noise_mw(&self) -> f64 {
        self.params.noise_mw(self.n_rb as u32)
    }

    pub(crate) fn saturated(&self, an: usize) -> bool {
        self.snapshot.loads[an] > self.n_rb
    }

    /// UEs of every AN, in UE index order.
    pub(crate) fn cells(&self) -> Vec<Vec<usize>> {
        let mut cells = vec![Vec::new(); self.snapshot.ans.len()];
        for (u, &a) in self.snapshot.assoc.iter().enumerate() {
            cells[a].push(u);
        }
        cells
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RbUse {
    /// The link alone holds this RB of its AN.
    Dedicated(usize),
    /// The link time-shares every RB of its AN with the AN's other links.
    Shared,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Allocation {
    pub policy: PolicyId,
    pub assoc: Vec<usize>,
    /// Per link (UE).
    pub rb_of: Vec<RbUse>,
    /// Per link; never above the cap.
    pub power_dbm: Vec<f64>,
    /// Per UE, bps/Hz of total bandwidth.
    pub rates: Vec<f64>,
    pub min_rate: f64,
    /// Set when an evaluation fell back to a simpler allocation.
    pub diagnostic: Option<String>,
}

impl Allocation {
    pub(crate) fn build(problem: &CoordProblem, policy: PolicyId, rb_of: Vec<RbUse>, power_mw: &[f64]) -> Self {
        let rates = link_rates(problem, &rb_of, power_mw);
        let min_rate = rates.iter().cloned().fold(f64::INFINITY, f64::min);
        Self {
            policy,
            assoc: problem.snapshot.assoc.clone(),
            rb_of,
            power_dbm: power_mw.iter().map(|&p| linear_to_db(p)).collect(),
            rates,
            min_rate: if min_rate.is_finite() { min_rate } else { 0.0 },
            diagnostic: None,
        }
    }

    /// No AN serves two links on the same RB at once.
    pub fn is_orthogonal(&self) -> bool {
        let mut seen = std::collections::HashSet::new();
        self.rb_of.iter().zip(&self.assoc).all(|(r, &a)| match r {
            RbUse::Dedicated(rb) => seen.insert((a, *rb)),
            RbUse::Shared => true,
        })
    }
}

/// Transmitters on each RB: `(AN, power mW)`. An AN with a shared link
/// transmits at the cap on every RB.
pub(crate) fn transmitters(problem: &CoordProblem, rb_of: &[RbUse], power_mw: &[f64]) -> Vec<Vec<(usize, f64)>> {
    let mut tx = vec![Vec::new(); problem.n_rb];
    let mut everywhere = vec![false; problem.snapshot.ans.len()];
    for (u, r) in rb_of.iter().enumerate() {
        let a = problem.snapshot.assoc[u];
        match r {
            RbUse::Dedicated(rb) => tx[*rb].push((a, power_mw[u])),
            RbUse::Shared => everywhere[a] = true,
        }
    }
    let cap = problem.cap_mw();
    for (a, _) in everywhere.iter().enumerate().filter(|(_, e)| **e) {
        for list in tx.iter_mut() {
            list.push((a, cap));
        }
    }
    tx
}

/// SINR of UE `u` served by `a` at `p` mW against the transmitters of one RB.
pub(crate) fn sinr_on(problem: &CoordProblem, tx: &[(usize, f64)], u: usize, a: usize, p: f64) -> f64 {
    let interference: f64 = tx
        .iter()
        .filter(|(b, _)| *b != a)
        .map(|&(b, q)| q * problem.gains[b][u])
        .sum();
    crate::channel::ratio(p * problem.gains[a][u], interference + problem.noise_mw())
}

pub(crate) fn link_rates(problem: &CoordProblem, rb_of: &[RbUse], power_mw: &[f64]) -> Vec<f64> {
    let tx = transmitters(problem, rb_of, power_mw);
    let n_rb = problem.n_rb as f64;
    let theta0 = problem.params.theta0_linear();
    let rate = |s: f64, share: f64| crate::channel::shannon_rate(s, share, theta0);
    rb_of
        .iter()
        .enumerate()
        .map(|(u, r)| {
            let a = problem.snapshot.assoc[u];
            match r {
                RbUse::Dedicated(rb) => rate(sinr_on(problem, &tx[*rb], u, a, power_mw[u]), 1.0 / n_rb),
                RbUse::Shared => {
                    let share = 1.0 / (problem.snapshot.loads[a] as f64 * n_rb);
                    tx.iter()
                        .map(|list| rate(sinr_on(problem, list, u, a, problem.cap_mw()), share))
                        .sum()
                }
            }
        })
        .collect()
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::pointprocess::{Point, PointSet};

    /// Problem with explicit positions and gains, noise at -174 dBm/Hz.
    pub(crate) fn toy(ans: &[(f64, f64)], ues: &[(f64, f64)], gains: Vec<Vec<f64>>, n_rb: usize) -> CoordProblem {
        let pts = |v: &[(f64, f64)], k| PointSet::new(k, v.iter().map(|&(x, y)| Point::new(x, y)).collect());
        let window = Window::square(Point::ORIGIN, 1000.0).unwrap();
        let snap = NetworkSnapshot::new(window, pts(ans, NodeKind::An), pts(ues, NodeKind::Ue)).unwrap();
        let n_an = ans.len();
        CoordProblem::new(snap, ChannelParams::finite_area(), n_rb, gains, vec![0; n_an]).unwrap()
    }

    #[test]
    fn sampled_problems_are_valid_and_nested() {
        let w = Window::square(Point::ORIGIN, 1000.0).unwrap();
        let p = ChannelParams::finite_area();
        let s = StreamFactory::new(3);
        let small = CoordProblem::sample(&w, 10, 50, &p, 4, &s, 7).unwrap();
        let big = CoordProblem::sample(&w, 40, 50, &p, 4, &s, 7).unwrap();
        assert_eq!(small.gains.len(), 10);
        assert!(small.gains.iter().all(|r| r.len() == 50));
        assert_eq!(small.snapshot.ues, big.snapshot.ues);
        assert_eq!(small.snapshot.ans.points[..], big.snapshot.ans.points[..10]);
        assert_eq!(small.gains[..], big.gains[..10]);
    }

    #[test]
    fn problem_validation() {
        let w = Window::square(Point::ORIGIN, 1000.0).unwrap();
        let s = StreamFactory::new(3);
        let quiet = ChannelParams::default();
        assert!(CoordProblem::sample(&w, 3, 5, &quiet, 4, &s, 0).is_err());
        let p = ChannelParams::finite_area();
        assert!(CoordProblem::sample(&w, 0, 5, &p, 4, &s, 0).is_err());
        assert!(CoordProblem::sample(&w, 3, 5, &p, 0, &s, 0).is_err());
    }

    #[test]
    fn policy_names_round_trip() {
        for p in PolicyId::ALL {
            assert_eq!(PolicyId::parse(p.name()).unwrap(), p);
        }
        assert!(PolicyId::parse("policy3").is_err());
    }
}
