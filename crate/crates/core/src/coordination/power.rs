//! Max-min SINR power control for links sharing one resource block.

/// Powers solving `p_i g_ii = γ (Σ_{j≠i} p_j g_ij + n_i)` for every link,
/// or `None` when no non-negative solution within the cap exists.
fn powers_for(gamma: f64, signal: &[f64], cross: &[Vec<f64>], floor: &[f64], cap: f64) -> Option<Vec<f64>> {
    let n = signal.len();
    // Row i: p_i - γ Σ_j (g_ij / g_ii) p_j = γ n_i / g_ii.
    let mut m: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            let mut row: Vec<f64> = (0..n)
                .map(|j| if i == j { 1.0 } else { -gamma * cross[i][j] / signal[i] })
                .collect();
            row.push(gamma * floor[i] / signal[i]);
            row
        })
        .collect();
    for col in 0..n {
        let piv = (col..n).max_by(|&a, &b| m[a][col].abs().total_cmp(&m[b][col].abs()))?;
        if m[piv][col].abs() < 1e-300 {
            return None;
        }
        m.swap(col, piv);
        for r in col + 1..n {
            let f = m[r][col] / m[col][col];
            if f != 0.0 {
                for c in col..=n {
                    m[r][c] -= f * m[col][c];
                }
            }
        }
    }
    let mut p = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|j| m[i][j] * p[j]).sum();
        p[i] = (m[i][n] - s) / m[i][i];
    }
    // A positive solution certifies that the target is reachable at all.
    let ok = p.iter().all(|&x| x > 0.0 && x.is_finite() && x <= cap * (1.0 + 1e-12));
    ok.then_some(p)
}

fn min_sinr(p: &[f64], signal: &[f64], cross: &[Vec<f64>], floor: &[f64]) -> f64 {
    (0..p.len())
        .map(|i| {
            let interference: f64 = (0..p.len()).filter(|&j| j != i).map(|j| p[j] * cross[i][j]).sum();
            p[i] * signal[i] / (interference + floor[i])
        })
        .fold(f64::INFINITY, f64::min)
}

/// Powers (mW, at most `cap`) maximising the smallest SINR among links on
/// one RB.
///
/// `signal[i]` is link i's own gain, `cross[i][j]` the gain from link j's
/// transmitter to link i's receiver and `floor[i] > 0` its noise plus any
/// fixed interference. Bisection on the common target over
/// `[min SINR at full power, min SNR at full power]`; the winning powers
/// are scaled up until one reaches the cap.
pub fn maxmin_sinr_powers(signal: &[f64], cross: &[Vec<f64>], floor: &[f64], cap: f64) -> Vec<f64> {
    let n = signal.len();
    let full = vec![cap; n];
    if n <= 1 || signal.iter().any(|&g| !(g > 0.0)) || floor.iter().any(|&f| !(f > 0.0)) {
        return full;
    }
    let mut lo = min_sinr(&full, signal, cross, floor);
    let mut hi = (0..n)
        .map(|i| cap * signal[i] / floor[i])
        .fold(f64::INFINITY, f64::min);
    let mut best = full;
    if !(hi > lo) {
        return best;
    }
    for _ in 0..100 {
        let mid = (lo * hi).sqrt();
        match powers_for(mid, signal, cross, floor, cap) {
            Some(p) => {
                lo = mid;
                best = p;
            }
            None => hi = mid,
        }
        if hi / lo - 1.0 < 1e-10 {
            break;
        }
    }
    let top = best.iter().cloned().fold(0.0, f64::max);
    best.iter().map(|&x| (x * cap / top).min(cap)).collect()
}
