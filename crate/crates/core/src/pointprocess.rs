//! Random network geometries and nearest-AN association.

use rand::Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const M2_PER_KM2: f64 = 1.0e6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const ORIGIN: Point = Point { x: 0.0, y: 0.0 };

    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    #[inline]
    pub fn dist2(&self, other: &Point) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        dx * dx + dy * dy
    }

    #[inline]
    pub fn dist(&self, other: &Point) -> f64 {
        self.dist2(other).sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case")]
pub enum Window {
    Disk { center: Point, radius_m: f64 },
    Square { center: Point, side_m: f64 },
}

impl Window {
    pub fn disk(center: Point, radius_m: f64) -> Result<Self> {
        let w = Window::Disk { center, radius_m };
        w.validate()?;
        Ok(w)
    }

    pub fn square(center: Point, side_m: f64) -> Result<Self> {
        let w = Window::Square { center, side_m };
        w.validate()?;
        Ok(w)
    }

    /// Disk centred at `center` whose area is `area_km2`.
    pub fn disk_with_area(center: Point, area_km2: f64) -> Result<Self> {
        if !(area_km2 > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "window area must be positive, got {area_km2}"
            )));
        }
        Self::disk(center, (area_km2 * M2_PER_KM2 / std::f64::consts::PI).sqrt())
    }

    pub fn validate(&self) -> Result<()> {
        let size = match self {
            Window::Disk { radius_m, .. } => radius_m,
            Window::Square { side_m, .. } => side_m,
        };
        if !(size.is_finite() && *size > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "window size must be finite and positive, got {size}"
            )));
        }
        Ok(())
    }

    pub fn center(&self) -> Point {
        match *self {
            Window::Disk { center, .. } | Window::Square { center, .. } => center,
        }
    }

    pub fn area_km2(&self) -> f64 {
        match *self {
            Window::Disk { radius_m, .. } => std::f64::consts::PI * radius_m * radius_m / M2_PER_KM2,
            Window::Square { side_m, .. } => side_m * side_m / M2_PER_KM2,
        }
    }

    pub fn contains(&self, p: &Point) -> bool {
        match *self {
            Window::Disk { center, radius_m } => p.dist2(&center) <= radius_m * radius_m,
            Window::Square { center, side_m } => {
                let h = side_m / 2.0;
                (p.x - center.x).abs() <= h && (p.y - center.y).abs() <= h
            }
        }
    }

    /// Axis-aligned bounding box as `(min, max)`.
    pub fn bounds(&self) -> (Point, Point) {
        let (c, h) = match *self {
            Window::Disk { center, radius_m } => (center, radius_m),
            Window::Square { center, side_m } => (center, side_m / 2.0),
        };
        (Point::new(c.x - h, c.y - h), Point::new(c.x + h, c.y + h))
    }

    pub fn translated(&self, dx: f64, dy: f64) -> Self {
        match *self {
            Window::Disk { center, radius_m } => Window::Disk {
                center: Point::new(center.x + dx, center.y + dy),
                radius_m,
            },
            Window::Square { center, side_m } => Window::Square {
                center: Point::new(center.x + dx, center.y + dy),
                side_m,
            },
        }
    }

    /// One point uniformly distributed over the window.
    pub fn sample_uniform<R: Rng + ?Sized>(&self, rng: &mut R) -> Point {
        match *self {
            Window::Disk { center, radius_m } => loop {
                // Rejection from the bounding square.
                let x = 2.0 * rng.random::<f64>() - 1.0;
                let y = 2.0 * rng.random::<f64>() - 1.0;
                if x * x + y * y <= 1.0 {
                    break Point::new(center.x + radius_m * x, center.y + radius_m * y);
                }
            },
            Window::Square { center, side_m } => Point::new(
                center.x + side_m * (rng.random::<f64>() - 0.5),
                center.y + side_m * (rng.random::<f64>() - 0.5),
            ),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NodeKind {
    An,
    Ue,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointSet {
    pub kind: NodeKind,
    pub points: Vec<Point>,
}

impl PointSet {
    pub fn new(kind: NodeKind, points: Vec<Point>) -> Self {
        Self { kind, points }
    }

    pub fn empty(kind: NodeKind) -> Self {
        Self::new(kind, Vec::new())
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Poisson-distributed count with mean `mean`; zero when the mean is zero.
pub fn poisson_count<R: Rng + ?Sized>(mean: f64, rng: &mut R) -> Result<usize> {
    if !(mean >= 0.0 && mean.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "Poisson mean must be finite and non-negative, got {mean}"
        )));
    }
    if mean == 0.0 {
        return Ok(0);
    }
    let dist = Poisson::new(mean).map_err(|e| Error::InvalidParameter(e.to_string()))?;
    Ok(dist.sample(rng) as usize)
}

/// Homogeneous Poisson point process with `density` nodes per km².
pub fn sample_hppp<R: Rng + ?Sized>(
    density: f64,
    window: &Window,
    kind: NodeKind,
    rng: &mut R,
) -> Result<PointSet> {
    if !(density >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "density must be non-negative, got {density}"
        )));
    }
    window.validate()?;
    let n = poisson_count(density * window.area_km2(), rng)?;
    sample_fixed(n, window, kind, rng)
}

/// Exactly `count` i.i.d. uniform points.
pub fn sample_fixed<R: Rng + ?Sized>(
    count: usize,
    window: &Window,
    kind: NodeKind,
    rng: &mut R,
) -> Result<PointSet> {
    window.validate()?;
    let points = (0..count).map(|_| window.sample_uniform(rng)).collect();
    Ok(PointSet::new(kind, points))
}

/// Uniform bucket grid for nearest-neighbour queries over a fixed point set.
///
/// The grid carries one ring of empty padding buckets, so the 3×3 block
/// around any interior bucket is three contiguous runs of `entries`.
/// Ties are resolved towards the lowest point index, matching brute force.
#[derive(Debug, Clone)]
pub struct NearestIndex<'a> {
    points: &'a [Point],
    origin: Point,
    cell: f64,
    /// Unpadded bucket counts.
    nx: usize,
    ny: usize,
    /// Padded row stride.
    stride: usize,
    starts: Vec<u32>,
    /// Points in bucket order with their original index.
    entries: Vec<(Point, u32)>,
}

#[inline(always)]
fn scan_run(q: &Point, run: &[(Point, u32)], bd: &mut f64, bi: &mut u32) {
    for (p, i) in run {
        let d2 = q.dist2(p);
        let better = d2 < *bd || (d2 == *bd && *i < *bi);
        *bd = if better { d2 } else { *bd };
        *bi = if better { *i } else { *bi };
    }
}

impl<'a> NearestIndex<'a> {
    pub fn new(points: &'a [Point]) -> Self {
        let (mut lo, mut hi) = (Point::new(f64::MAX, f64::MAX), Point::new(f64::MIN, f64::MIN));
        for p in points {
            lo.x = lo.x.min(p.x);
            lo.y = lo.y.min(p.y);
            hi.x = hi.x.max(p.x);
            hi.y = hi.y.max(p.y);
        }
        if points.is_empty() {
            lo = Point::ORIGIN;
            hi = Point::ORIGIN;
        }
        let w = (hi.x - lo.x).max(1e-9);
        let h = (hi.y - lo.y).max(1e-9);
        // About two points per bucket.
        let target_cells = (points.len() as f64 / 2.0).max(1.0);
        let cell = ((w * h) / target_cells).sqrt().max(w.max(h) / 4096.0);
        let nx = ((w / cell).floor() as usize + 1).max(1);
        let ny = ((h / cell).floor() as usize + 1).max(1);
        let stride = nx + 2;

        let mut counts = vec![0u32; stride * (ny + 2) + 1];
        let mut bucket_of = Vec::with_capacity(points.len());
        for p in points {
            let (cx, cy) = Self::cell_coords(lo, cell, nx, ny, p);
            let b = (cy + 1) * stride + cx + 1;
            bucket_of.push(b);
            counts[b + 1] += 1;
        }
        for i in 1..counts.len() {
            counts[i] += counts[i - 1];
        }
        let starts = counts.clone();
        let mut fill = counts;
        let mut entries = vec![(Point::ORIGIN, 0u32); points.len()];
        for (i, &b) in bucket_of.iter().enumerate() {
            entries[fill[b] as usize] = (points[i], i as u32);
            fill[b] += 1;
        }
        Self {
            points,
            origin: lo,
            cell,
            nx,
            ny,
            stride,
            starts,
            entries,
        }
    }

    pub fn points(&self) -> &'a [Point] {
        self.points
    }

    #[inline]
    fn cell_coords(origin: Point, cell: f64, nx: usize, ny: usize, p: &Point) -> (usize, usize) {
        let cx = ((p.x - origin.x) / cell).floor().clamp(0.0, (nx - 1) as f64) as usize;
        let cy = ((p.y - origin.y) / cell).floor().clamp(0.0, (ny - 1) as f64) as usize;
        (cx, cy)
    }

    /// Entries of the unpadded buckets `x0..=x1` in row `y`.
    #[inline]
    fn run(&self, y: usize, x0: usize, x1: usize) -> &[(Point, u32)] {
        let row = (y + 1) * self.stride + 1;
        &self.entries[self.starts[row + x0] as usize..self.starts[row + x1 + 1] as usize]
    }

    /// Appends the indices of all points within `radius` of `q`.
    pub fn within(&self, q: &Point, radius: f64, out: &mut Vec<u32>) {
        if self.points.is_empty() {
            return;
        }
        let lo = Point::new(q.x - radius, q.y - radius);
        let hi = Point::new(q.x + radius, q.y + radius);
        let (x0, y0) = Self::cell_coords(self.origin, self.cell, self.nx, self.ny, &lo);
        let (x1, y1) = Self::cell_coords(self.origin, self.cell, self.nx, self.ny, &hi);
        let r2 = radius * radius;
        for y in y0..=y1 {
            for (p, i) in self.run(y, x0, x1) {
                if q.dist2(p) <= r2 {
                    out.push(*i);
                }
            }
        }
    }

    /// Squared distance from `q` to the outside of the bucket block
    /// `[x0, x1] × [y0, y1]`; sides on the grid edge count as infinitely far.
    #[inline]
    fn gap2(&self, q: &Point, x0: usize, x1: usize, y0: usize, y1: usize) -> f64 {
        let mut gap = f64::INFINITY;
        if x0 > 0 {
            gap = gap.min(q.x - (self.origin.x + x0 as f64 * self.cell));
        }
        if x1 + 1 < self.nx {
            gap = gap.min(self.origin.x + (x1 + 1) as f64 * self.cell - q.x);
        }
        if y0 > 0 {
            gap = gap.min(q.y - (self.origin.y + y0 as f64 * self.cell));
        }
        if y1 + 1 < self.ny {
            gap = gap.min(self.origin.y + (y1 + 1) as f64 * self.cell - q.y);
        }
        if gap.is_infinite() {
            f64::INFINITY
        } else if gap > 0.0 {
            gap * gap
        } else {
            0.0
        }
    }

    /// Visits points in rings of buckets around `q`. After each ring,
    /// `limit` gives the squared radius beyond which no more points are
    /// needed; the walk stops once every unvisited bucket lies beyond it.
    pub(crate) fn visit_rings<S, F, L>(&self, q: &Point, state: &mut S, mut visit: F, mut limit: L)
    where
        F: FnMut(&mut S, u32, &Point),
        L: FnMut(&mut S) -> f64,
    {
        if self.points.is_empty() {
            return;
        }
        let (cx, cy) = Self::cell_coords(self.origin, self.cell, self.nx, self.ny, q);
        let (cx, cy) = (cx as isize, cy as isize);
        let (nx, ny) = (self.nx as isize, self.ny as isize);
        for ring in 0..=nx.max(ny) {
            let (xl, xh, yl, yh) = (cx - ring, cx + ring, cy - ring, cy + ring);
            let xa = xl.max(0) as usize;
            let xb = xh.min(nx - 1) as usize;
            for y in yl.max(0)..=yh.min(ny - 1) {
                let runs: [Option<(usize, usize)>; 2] = if y == yl || y == yh {
                    [Some((xa, xb)), None]
                } else {
                    [
                        (xl >= 0).then_some((xl as usize, xl as usize)),
                        (xh < nx).then_some((xh as usize, xh as usize)),
                    ]
                };
                for (x0, x1) in runs.into_iter().flatten() {
                    for (p, i) in self.run(y as usize, x0, x1) {
                        visit(state, *i, p);
                    }
                }
            }
            let ya = yl.max(0) as usize;
            let yb = yh.min(ny - 1) as usize;
            if xa == 0 && ya == 0 && xb + 1 == self.nx && yb + 1 == self.ny {
                break;
            }
            if self.gap2(q, xa, xb, ya, yb) > limit(state) {
                break;
            }
        }
    }

    /// Index of the nearest point and its squared distance.
    pub fn nearest(&self, q: &Point) -> Option<(usize, f64)> {
        if self.points.is_empty() {
            return None;
        }
        let (cx, cy) = Self::cell_coords(self.origin, self.cell, self.nx, self.ny, q);
        let mut bd = f64::INFINITY;
        let mut bi = u32::MAX;
        // 3×3 block first; the padding keeps it in range.
        let row = (cy + 1) * self.stride + cx + 1;
        for r in [row - self.stride, row, row + self.stride] {
            let run = &self.entries[self.starts[r - 1] as usize..self.starts[r + 2] as usize];
            scan_run(q, run, &mut bd, &mut bi);
        }
        let x0 = cx.saturating_sub(1);
        let y0 = cy.saturating_sub(1);
        let x1 = (cx + 1).min(self.nx - 1);
        let y1 = (cy + 1).min(self.ny - 1);
        if bi != u32::MAX && bd < self.gap2(q, x0, x1, y0, y1) {
            return Some((bi as usize, bd));
        }
        let max_ring = self.nx.max(self.ny);
        for ring in 2..=max_ring {
            let (xl, xh) = (cx as isize - ring as isize, cx as isize + ring as isize);
            let (yl, yh) = (cy as isize - ring as isize, cy as isize + ring as isize);
            let xa = xl.max(0) as usize;
            let xb = xh.min(self.nx as isize - 1) as usize;
            for y in yl.max(0)..=yh.min(self.ny as isize - 1) {
                let y = y as usize;
                if y as isize == yl || y as isize == yh {
                    scan_run(q, self.run(y, xa, xb), &mut bd, &mut bi);
                } else {
                    if xl >= 0 {
                        scan_run(q, self.run(y, xl as usize, xl as usize), &mut bd, &mut bi);
                    }
                    if xh < self.nx as isize {
                        scan_run(q, self.run(y, xh as usize, xh as usize), &mut bd, &mut bi);
                    }
                }
            }
            let ya = yl.max(0) as usize;
            let yb = yh.min(self.ny as isize - 1) as usize;
            if bi != u32::MAX && bd < self.gap2(q, xa, xb, ya, yb) {
                break;
            }
            if xa == 0 && ya == 0 && xb + 1 == self.nx && yb + 1 == self.ny {
                break;
            }
        }
        Some((bi as usize, bd))
    }
}

/// Nearest-AN index for every UE and the resulting per-AN load.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Association {
    pub assoc: Vec<usize>,
    pub loads: Vec<usize>,
}

pub fn associate_nearest(ans: &PointSet, ues: &PointSet) -> Result<Association> {
    if ans.is_empty() {
        return Err(Error::NoServer);
    }
    let mut loads = vec![0usize; ans.len()];
    let assoc: Vec<usize> = if ans.len() * ues.len() <= 4096 {
        ues.points
            .iter()
            .map(|u| nearest_brute(&ans.points, u))
            .collect()
    } else {
        let index = NearestIndex::new(&ans.points);
        ues.points
            .iter()
            .map(|u| index.nearest(u).map(|(i, _)| i).unwrap_or(0))
            .collect()
    };
    for &a in &assoc {
        loads[a] += 1;
    }
    Ok(Association { assoc, loads })
}

pub(crate) fn nearest_brute(points: &[Point], q: &Point) -> usize {
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (i, p) in points.iter().enumerate() {
        let d = q.dist2(p);
        if d < best_d {
            best_d = d;
            best = i;
        }
    }
    best
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkSnapshot {
    pub window: Window,
    pub ans: PointSet,
    pub ues: PointSet,
    pub typical_ue_index: Option<usize>,
    pub assoc: Vec<usize>,
    pub loads: Vec<usize>,
}

impl NetworkSnapshot {
    pub fn new(window: Window, ans: PointSet, ues: PointSet) -> Result<Self> {
        let Association { assoc, loads } = associate_nearest(&ans, &ues)?;
        Ok(Self {
            window,
            ans,
            ues,
            typical_ue_index: None,
            assoc,
            loads,
        })
    }

    pub fn serving_an(&self, ue: usize) -> usize {
        self.assoc[ue]
    }

    pub fn translated(&self, dx: f64, dy: f64) -> Result<Self> {
        let shift = |ps: &PointSet| {
            PointSet::new(
                ps.kind,
                ps.points.iter().map(|p| Point::new(p.x + dx, p.y + dy)).collect(),
            )
        };
        let mut s = Self::new(self.window.translated(dx, dy), shift(&self.ans), shift(&self.ues))?;
        s.typical_ue_index = self.typical_ue_index;
        Ok(s)
    }
}

/// Inserts a UE at the window centre and marks it as the typical UE.
///
/// The snapshot must have at least one AN so the new UE can be served.
pub fn place_typical_ue(snapshot: &NetworkSnapshot) -> Result<NetworkSnapshot> {
    let mut ues = snapshot.ues.clone();
    ues.points.push(snapshot.window.center());
    let idx = ues.len() - 1;
    let mut out = NetworkSnapshot::new(snapshot.window, snapshot.ans.clone(), ues)?;
    out.typical_ue_index = Some(idx);
    Ok(out)
}
