use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Maximum number of stored grid points for an empirical CDF.
pub const MAX_GRID_POINTS: usize = 2048;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CdfKind {
    Empirical,
    Semianalytic,
}

/// Distribution of the typical-UE rate in bps/Hz.
///
/// `grid[0]` is always `0.0`, so `cdf[0]` carries the outage mass. The
/// grid is strictly ascending and `cdf` is nondecreasing in `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateCdf {
    pub kind: CdfKind,
    pub grid: Vec<f64>,
    pub cdf: Vec<f64>,
    pub n_trials: Option<usize>,
}

impl RateCdf {
    /// Empirical CDF from raw rate samples (any order).
    ///
    /// When there are more distinct positive samples than the grid allows,
    /// the grid keeps evenly spaced order statistics.
    pub fn from_samples(samples: &[f64]) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::InvalidParameter("no samples".into()));
        }
        if samples.iter().any(|r| !(*r >= 0.0) || r.is_infinite()) {
            return Err(Error::InvalidParameter("rates must be finite and non-negative".into()));
        }
        let mut sorted = samples.to_vec();
        sorted.sort_by(f64::total_cmp);
        Ok(Self::from_sorted(&sorted))
    }

    pub(crate) fn from_sorted(sorted: &[f64]) -> Self {
        let n = sorted.len();
        let nf = n as f64;
        let zeros = sorted.partition_point(|&r| r <= 0.0);
        let mut grid = vec![0.0];
        let mut cdf = vec![zeros as f64 / nf];

        // Distinct positive values with their last index.
        let mut distinct: Vec<(f64, usize)> = Vec::new();
        for (i, &r) in sorted.iter().enumerate().skip(zeros) {
            match distinct.last_mut() {
                Some(last) if last.0 == r => last.1 = i,
                _ => distinct.push((r, i)),
            }
        }
        let room = MAX_GRID_POINTS - 1;
        if distinct.len() <= room {
            for (r, last) in distinct {
                grid.push(r);
                cdf.push((last + 1) as f64 / nf);
            }
        } else {
            let m = distinct.len();
            let mut prev = usize::MAX;
            for j in 0..room {
                // Always keep the largest value so the CDF reaches one.
                let k = ((j + 1) * m).div_ceil(room) - 1;
                if k == prev {
                    continue;
                }
                prev = k;
                let (r, last) = distinct[k];
                grid.push(r);
                cdf.push((last + 1) as f64 / nf);
            }
        }
        Self {
            kind: CdfKind::Empirical,
            grid,
            cdf,
            n_trials: Some(n),
        }
    }

    pub fn outage_mass(&self) -> f64 {
        self.cdf[0]
    }

    /// CDF value at `r` (right-continuous step for empirical, linear for semianalytic).
    pub fn eval(&self, r: f64) -> f64 {
        if r < 0.0 {
            return 0.0;
        }
        let i = self.grid.partition_point(|&g| g <= r);
        if i == 0 {
            return 0.0;
        }
        match self.kind {
            CdfKind::Empirical => self.cdf[i - 1],
            CdfKind::Semianalytic => {
                if i == self.grid.len() {
                    return *self.cdf.last().unwrap();
                }
                let (x0, x1) = (self.grid[i - 1], self.grid[i]);
                let (y0, y1) = (self.cdf[i - 1], self.cdf[i]);
                y0 + (y1 - y0) * (r - x0) / (x1 - x0)
            }
        }
    }

    /// Smallest rate whose CDF reaches `p`, interpolated between grid points.
    ///
    /// Empirical CDFs interpolate between step midpoints, so the median of
    /// `{1, 2, 3, 4}` is 2.5. A zero-rate mass of at least `p` yields 0.
    pub fn quantile(&self, p: f64) -> Result<f64> {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "quantile level must lie in (0, 1), got {p}"
            )));
        }
        if self.cdf[0] >= p {
            return Ok(0.0);
        }
        let (xs, ys): (Vec<f64>, Vec<f64>) = match self.kind {
            CdfKind::Semianalytic => (self.grid.clone(), self.cdf.clone()),
            CdfKind::Empirical => {
                let mut xs = Vec::with_capacity(self.grid.len());
                let mut ys = Vec::with_capacity(self.grid.len());
                for i in 1..self.grid.len() {
                    xs.push(self.grid[i]);
                    ys.push(0.5 * (self.cdf[i - 1] + self.cdf[i]));
                }
                (xs, ys)
            }
        };
        let i = ys.partition_point(|&y| y < p);
        if i == 0 {
            return Ok(xs[0]);
        }
        if i == ys.len() {
            return Ok(*xs.last().unwrap());
        }
        let (x0, x1, y0, y1) = (xs[i - 1], xs[i], ys[i - 1], ys[i]);
        if y1 == y0 {
            return Ok(x1);
        }
        Ok(x0 + (x1 - x0) * (p - y0) / (y1 - y0))
    }

    pub fn median(&self) -> Result<f64> {
        self.quantile(0.5)
    }

    pub fn check_invariants(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidParameter(m.to_string()));
        if self.grid.len() != self.cdf.len() || self.grid.is_empty() {
            return bad("grid and cdf lengths differ or are empty");
        }
        if self.grid[0] != 0.0 {
            return bad("grid must start at zero");
        }
        if self.grid.windows(2).any(|w| !(w[0] < w[1])) {
            return bad("grid must be strictly ascending");
        }
        if self.cdf.windows(2).any(|w| w[1] < w[0]) {
            return bad("cdf must be nondecreasing");
        }
        if self.cdf.iter().any(|c| !(0.0..=1.0).contains(c)) {
            return bad("cdf values must lie in [0, 1]");
        }
        Ok(())
    }

    /// `rate_bps_hz,cdf` table with a header row.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "rate_bps_hz,cdf")?;
        for (r, c) in self.grid.iter().zip(&self.cdf) {
            writeln!(w, "{r},{c}")?;
        }
        Ok(())
    }
}
