use std::cmp::Ordering;

use super::power::maxmin_sinr_powers;
use super::{link_rates, transmitters, Allocation, CoordProblem, PolicyId, RbUse};
use crate::error::Result;

/// Uncoordinated operation at full power: nearest-AN association, and each
/// unsaturated AN hands out its RBs round-robin starting from its own random
/// phase. Saturated ANs time-share every RB among their UEs.
pub fn evaluate_baseline(problem: &CoordProblem) -> Allocation {
    let mut rb_of = vec![RbUse::Shared; problem.n_ues()];
    for (a, ues) in problem.cells().iter().enumerate() {
        if problem.saturated(a) {
            continue;
        }
        for (i, &u) in ues.iter().enumerate() {
            rb_of[u] = RbUse::Dedicated((problem.rb_phase[a] + i) % problem.n_rb);
        }
    }
    let power = vec![problem.cap_mw(); problem.n_ues()];
    Allocation::build(problem, PolicyId::Baseline, rb_of, &power)
}

/// Ascending rates compared lexicographically; `Greater` means `a` is better.
fn leximin(a: &[f64], b: &[f64]) -> Ordering {
    let sorted = |v: &[f64]| {
        let mut s = v.to_vec();
        s.sort_by(f64::total_cmp);
        s
    };
    let (a, b) = (sorted(a), sorted(b));
    for (x, y) in a.iter().zip(&b) {
        let tol = 1e-12 * x.abs().max(y.abs());
        if (x - y).abs() > tol {
            return x.total_cmp(y);
        }
    }
    Ordering::Equal
}

/// Interference-aware orthogonalization at full power.
///
/// Links of unsaturated cells are coloured greedily in descending order of
/// their worst cross-interference-to-signal ratio, each into the free RB of
/// its AN that minimises the interference it suffers plus the interference
/// it causes. A leximin local search over single moves and co-cell swaps
/// then polishes the colouring.
pub fn evaluate_policy1(problem: &CoordProblem) -> Allocation {
    let g = &problem.gains;
    let assoc = &problem.snapshot.assoc;
    let n_rb = problem.n_rb;
    let links: Vec<usize> = (0..problem.n_ues()).filter(|&u| !problem.saturated(assoc[u])).collect();
    // Interference-to-signal ratio that link `m`'s AN inflicts on link `l`.
    let isr = |l: usize, m: usize| g[assoc[m]][l] / g[assoc[l]][l];
    let conflict = |l: usize, m: usize| {
        if assoc[l] == assoc[m] {
            0.0
        } else {
            isr(l, m).max(isr(m, l))
        }
    };
    let mut order: Vec<(f64, usize)> = links
        .iter()
        .map(|&l| {
            let worst = links.iter().map(|&m| conflict(l, m)).fold(0.0, f64::max);
            (worst, l)
        })
        .collect();
    // NaN ratios (zero own gain) sort first, like infinite conflicts.
    order.sort_by(|x, y| y.0.total_cmp(&x.0).then(x.1.cmp(&y.1)));

    let mut rb_of = vec![RbUse::Shared; problem.n_ues()];
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); n_rb];
    let mut used = vec![vec![false; n_rb]; problem.snapshot.ans.len()];
    for &(_, l) in &order {
        let a = assoc[l];
        let cost = |r: usize| -> f64 {
            members[r]
                .iter()
                .filter(|&&m| assoc[m] != a)
                .map(|&m| isr(l, m) + isr(m, l))
                .sum()
        };
        let best = (0..n_rb)
            .filter(|&r| !used[a][r])
            .map(|r| (cost(r), r))
            .min_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)))
            .map(|(_, r)| r)
            .expect("an unsaturated cell always has a free RB");
        used[a][best] = true;
        members[best].push(l);
        rb_of[l] = RbUse::Dedicated(best);
    }

    let power = vec![problem.cap_mw(); problem.n_ues()];
    let mut rates = link_rates(problem, &rb_of, &power);
    const MAX_SWEEPS: usize = 20;
    for _ in 0..MAX_SWEEPS {
        let mut improved = false;
        for &l in &links {
            let RbUse::Dedicated(r) = rb_of[l] else { continue };
            for r2 in (0..n_rb).filter(|&r2| r2 != r) {
                let mut trial = rb_of.clone();
                trial[l] = RbUse::Dedicated(r2);
                // A co-cell link holding r2 takes r in exchange.
                if let Some(&m) = links
                    .iter()
                    .find(|&&m| m != l && assoc[m] == assoc[l] && rb_of[m] == RbUse::Dedicated(r2))
                {
                    trial[m] = RbUse::Dedicated(r);
                }
                let trial_rates = link_rates(problem, &trial, &power);
                if leximin(&trial_rates, &rates) == Ordering::Greater {
                    rb_of = trial;
                    rates = trial_rates;
                    improved = true;
                    break;
                }
            }
        }
        if !improved {
            break;
        }
    }
    Allocation::build(problem, PolicyId::Policy1, rb_of, &power)
}

/// Policy I's colouring followed by max-min SINR power control on every RB.
///
/// Saturated ANs stay at the cap and count as fixed interference. Falls
/// back to Policy I's full powers if power control would lower the minimum
/// rate.
pub fn evaluate_policy2(problem: &CoordProblem) -> Allocation {
    let p1 = evaluate_policy1(problem);
    policy2_from(problem, &p1)
}

fn policy2_from(problem: &CoordProblem, p1: &Allocation) -> Allocation {
    let g = &problem.gains;
    let assoc = &problem.snapshot.assoc;
    let cap = problem.cap_mw();
    let mut power = vec![cap; problem.n_ues()];
    // Saturated transmitters alone (dedicated links muted): the fixed part
    // of every RB's interference.
    let fixed = transmitters(problem, &p1.rb_of, &vec![0.0; problem.n_ues()]);
    for (r, fixed_r) in fixed.iter().enumerate() {
        let on: Vec<usize> = (0..problem.n_ues())
            .filter(|&u| p1.rb_of[u] == RbUse::Dedicated(r))
            .collect();
        if on.is_empty() {
            continue;
        }
        let signal: Vec<f64> = on.iter().map(|&u| g[assoc[u]][u]).collect();
        let cross: Vec<Vec<f64>> = on
            .iter()
            .map(|&u| on.iter().map(|&v| g[assoc[v]][u]).collect())
            .collect();
        let floor: Vec<f64> = on
            .iter()
            .map(|&u| {
                let extra: f64 = fixed_r.iter().map(|&(b, q)| q * g[b][u]).sum();
                problem.noise_mw() + extra
            })
            .collect();
        for (&u, p) in on.iter().zip(maxmin_sinr_powers(&signal, &cross, &floor, cap)) {
            power[u] = p;
        }
    }
    let alloc = Allocation::build(problem, PolicyId::Policy2, p1.rb_of.clone(), &power);
    if alloc.min_rate >= p1.min_rate {
        return alloc;
    }
    let mut fallback = p1.clone();
    fallback.policy = PolicyId::Policy2;
    fallback.diagnostic = Some(format!(
        "power control lowered the minimum rate ({} < {}); kept full power",
        alloc.min_rate, p1.min_rate
    ));
    fallback
}

/// Allocations for several policies on one problem; Policy II reuses
/// Policy I's colouring.
pub fn evaluate(problem: &CoordProblem, policies: &[PolicyId]) -> Result<Vec<Allocation>> {
    let needs_p1 = policies.iter().any(|p| *p != PolicyId::Baseline);
    let p1 = needs_p1.then(|| evaluate_policy1(problem));
    Ok(policies
        .iter()
        .map(|p| match p {
            PolicyId::Baseline => evaluate_baseline(problem),
            PolicyId::Policy1 => p1.clone().expect("computed above"),
            PolicyId::Policy2 => policy2_from(problem, p1.as_ref().expect("computed above")),
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::super::tests::toy;
    use super::*;
    use crate::channel::ChannelParams;

    fn snr_rate(problem: &CoordProblem, g: f64, share: f64) -> f64 {
        share * (1.0 + problem.cap_mw() * g / problem.noise_mw()).log2()
    }

    #[test]
    fn lone_link_gets_full_band_with_one_rb() {
        let p = toy(&[(0.0, 0.0)], &[(10.0, 0.0)], vec![vec![1e-4]], 1);
        let a = evaluate_baseline(&p);
        assert!((a.min_rate - snr_rate(&p, 1e-4, 1.0)).abs() < 1e-12);
        assert_eq!(a.power_dbm, vec![p.params.tx_power_dbm]);
    }

    #[test]
    fn two_ues_split_two_rbs_without_interference() {
        let p = toy(&[(0.0, 0.0)], &[(10.0, 0.0), (0.0, 20.0)], vec![vec![1e-4, 1e-6]], 2);
        let a = evaluate_baseline(&p);
        assert!(a.is_orthogonal());
        assert!((a.rates[0] - snr_rate(&p, 1e-4, 0.5)).abs() < 1e-12);
        assert!((a.rates[1] - snr_rate(&p, 1e-6, 0.5)).abs() < 1e-12);
    }

    #[test]
    fn symmetric_pairs_on_one_rb() {
        let (gs, gi) = (1e-6, 1e-8);
        let p = toy(&[(0.0, 0.0), (100.0, 0.0)], &[(1.0, 0.0), (99.0, 0.0)], vec![vec![gs, gi], vec![gi, gs]], 1);
        let a = evaluate_baseline(&p);
        let cap = p.cap_mw();
        let expect = (1.0 + gs * cap / (gi * cap + p.noise_mw())).log2();
        assert!((a.rates[0] - expect).abs() < 1e-12 && (a.rates[1] - expect).abs() < 1e-12);
        // Power control cannot beat full power here.
        let b = evaluate_policy2(&p);
        assert!((b.min_rate - a.min_rate).abs() < 1e-9 * a.min_rate);
        assert!(b.power_dbm.iter().all(|&d| (d - p.params.tx_power_dbm).abs() < 1e-9));
    }

    #[test]
    fn saturated_cells_time_share() {
        let g = vec![vec![1e-6, 1e-6, 1e-6]];
        let p = toy(&[(0.0, 0.0)], &[(1.0, 0.0), (2.0, 0.0), (3.0, 0.0)], g, 2);
        for a in [evaluate_baseline(&p), evaluate_policy1(&p), evaluate_policy2(&p)] {
            assert!(a.rb_of.iter().all(|r| *r == RbUse::Shared));
            assert!((a.rates[0] - snr_rate(&p, 1e-6, 1.0 / 3.0)).abs() < 1e-12);
        }
    }

    #[test]
    fn strong_conflict_is_separated() {
        let (gs, gi) = (1e-6, 1e-7);
        let mut p = toy(&[(0.0, 0.0), (50.0, 0.0)], &[(1.0, 0.0), (49.0, 0.0)], vec![vec![gs, gi], vec![gi, gs]], 2);
        p.rb_phase = vec![1, 1];
        let base = evaluate_baseline(&p);
        assert_eq!(base.rb_of[0], base.rb_of[1]);
        let a = evaluate_policy1(&p);
        assert_ne!(a.rb_of[0], a.rb_of[1]);
        assert!((a.rates[0] - snr_rate(&p, gs, 0.5)).abs() < 1e-12);
        assert!(a.min_rate > base.min_rate);
    }

    #[test]
    fn single_link_per_rb_keeps_the_cap() {
        let p = toy(&[(0.0, 0.0), (500.0, 0.0)], &[(1.0, 0.0), (499.0, 0.0)], vec![vec![1e-6, 1e-12], vec![1e-12, 1e-6]], 2);
        let a = evaluate_policy2(&p);
        assert!(a.power_dbm.iter().all(|&d| (d - p.params.tx_power_dbm).abs() < 1e-12));
    }

    #[test]
    fn evaluate_matches_individual_policies() {
        let w = crate::pointprocess::Window::square(crate::pointprocess::Point::ORIGIN, 1000.0).unwrap();
        let s = crate::rng::StreamFactory::new(11);
        let p = CoordProblem::sample(&w, 30, 50, &ChannelParams::finite_area(), 4, &s, 2).unwrap();
        let all = evaluate(&p, &PolicyId::ALL).unwrap();
        assert_eq!(all[0], evaluate_baseline(&p));
        assert_eq!(all[1], evaluate_policy1(&p));
        assert_eq!(all[2], evaluate_policy2(&p));
        for a in &all {
            assert!(a.is_orthogonal());
            assert!(a.power_dbm.iter().all(|&d| d <= p.params.tx_power_dbm + 1e-9));
        }
        assert!(all[2].min_rate >= all[1].min_rate);
    }
}
