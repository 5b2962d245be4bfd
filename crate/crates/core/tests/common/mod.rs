//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use udn_core::channel::ChannelParams;
use udn_core::coordination::{CoordProblem, RbUse};
use udn_core::pointprocess::{Point, Window};
use udn_core::rng::StreamFactory;

pub fn sample(side_m: f64, n_ans: usize, n_ues: usize, n_rb: usize, seed: u64) -> CoordProblem {
    let w = Window::square(Point::ORIGIN, side_m).unwrap();
    CoordProblem::sample(&w, n_ans, n_ues, &ChannelParams::finite_area(), n_rb, &StreamFactory::new(seed), 0).unwrap()
}

/// Rates from first principles: a link with its own RB gets `1/n_rb` of the
/// band at power `p`; a link of an AN with more UEs than RBs gets
/// `1/(load * n_rb)` of every RB with its AN at the cap there. Every AN
/// holding a link on an RB interferes on it.
pub fn oracle_rates(p: &CoordProblem, rb: &[Option<usize>], power: &[f64]) -> Vec<f64> {
    let n_ans = p.snapshot.ans.len();
    let cap = p.cap_mw();
    let noise = p.noise_mw();
    let assoc = &p.snapshot.assoc;
    let loads = &p.snapshot.loads;
    let mut on = vec![vec![0.0; n_ans]; p.n_rb];
    for (u, r) in rb.iter().enumerate() {
        match r {
            Some(r) => on[*r][assoc[u]] = power[u],
            None => on.iter_mut().for_each(|row| row[assoc[u]] = cap),
        }
    }
    let sinr = |u: usize, r: usize, pw: f64| {
        let a = assoc[u];
        let i: f64 = (0..n_ans).filter(|&b| b != a).map(|b| on[r][b] * p.gains[b][u]).sum();
        pw * p.gains[a][u] / (i + noise)
    };
    (0..rb.len())
        .map(|u| match rb[u] {
            Some(r) => (1.0 + sinr(u, r, power[u])).log2() / p.n_rb as f64,
            None => {
                let share = 1.0 / (loads[assoc[u]] * p.n_rb) as f64;
                (0..p.n_rb).map(|r| share * (1.0 + sinr(u, r, cap)).log2()).sum()
            }
        })
        .collect()
}

pub fn min(xs: &[f64]) -> f64 {
    xs.iter().cloned().fold(f64::INFINITY, f64::min)
}

pub fn as_option(r: &[RbUse]) -> Vec<Option<usize>> {
    r.iter()
        .map(|x| match x {
            RbUse::Dedicated(r) => Some(*r),
            RbUse::Shared => None,
        })
        .collect()
}

/// Best full-power min rate over every orthogonal RB assignment.
pub fn enumeration_optimum(p: &CoordProblem) -> f64 {
    let n = p.n_ues();
    let links: Vec<usize> = (0..n).filter(|&u| p.snapshot.loads[p.snapshot.assoc[u]] <= p.n_rb).collect();
    let power = vec![p.cap_mw(); n];
    let mut best = f64::NEG_INFINITY;
    let combos = p.n_rb.pow(links.len() as u32);
    for code in 0..combos {
        let mut rb = vec![None; n];
        let mut c = code;
        for &l in &links {
            rb[l] = Some(c % p.n_rb);
            c /= p.n_rb;
        }
        let clash = links
            .iter()
            .any(|&l| links.iter().any(|&m| m < l && p.snapshot.assoc[m] == p.snapshot.assoc[l] && rb[m] == rb[l]));
        if !clash {
            best = best.max(min(&oracle_rates(p, &rb, &power)));
        }
    }
    best
}

/// Max-min SINR over a 50x50 grid in log power, zoomed around the best cell.
pub fn grid_maxmin(p: &CoordProblem, rb: &[Option<usize>]) -> f64 {
    let cap = p.cap_mw();
    let (mut lo, mut hi) = ([cap.ln() - 30.0; 2], [cap.ln(); 2]);
    let mut best = (f64::NEG_INFINITY, [cap; 2]);
    for _ in 0..6 {
        let step = [(hi[0] - lo[0]) / 49.0, (hi[1] - lo[1]) / 49.0];
        for i in 0..50 {
            for j in 0..50 {
                let pw = [(lo[0] + step[0] * i as f64).exp(), (lo[1] + step[1] * j as f64).exp()];
                let m = min(&oracle_rates(p, rb, &pw));
                if m > best.0 {
                    best = (m, pw);
                }
            }
        }
        for k in 0..2 {
            let c = best.1[k].ln();
            lo[k] = (c - 2.0 * step[k]).max(cap.ln() - 30.0);
            hi[k] = (c + 2.0 * step[k]).min(cap.ln());
        }
    }
    best.0
}
