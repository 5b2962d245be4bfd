//! Voronoi cell areas clipped to a disk.
//!
//! Given the cell areas, the background-UE count of each AN is an
//! independent Poisson variable, which replaces per-UE association when UEs
//! outnumber ANs.

use delaunator::{next_halfedge, EMPTY};

use crate::pointprocess::{NearestIndex, Point};

#[inline]
fn cross(a: Point, b: Point) -> f64 {
    a.x * b.y - a.y * b.x
}

#[inline]
fn dot(a: Point, b: Point) -> f64 {
    a.x * b.x + a.y * b.y
}

/// Signed area of the triangle `(0, p, q)` intersected with the disk of
/// radius `r` about the origin.
fn triangle_disk_area(p: Point, q: Point, r: f64) -> f64 {
    let sector = |u: Point, v: Point| 0.5 * r * r * cross(u, v).atan2(dot(u, v));
    let d = Point::new(q.x - p.x, q.y - p.y);
    let a = dot(d, d);
    if a == 0.0 {
        return 0.0;
    }
    let b = dot(p, d);
    let c = dot(p, p) - r * r;
    let disc = b * b - a * c;
    if disc <= 0.0 {
        return sector(p, q);
    }
    let s = disc.sqrt();
    let t1 = (-b - s) / a;
    let t2 = (-b + s) / a;
    if t2 <= 0.0 || t1 >= 1.0 {
        return sector(p, q);
    }
    let (t1, t2) = (t1.max(0.0), t2.min(1.0));
    let m1 = Point::new(p.x + d.x * t1, p.y + d.y * t1);
    let m2 = Point::new(p.x + d.x * t2, p.y + d.y * t2);
    sector(p, m1) + 0.5 * cross(m1, m2) + sector(m2, q)
}

/// Area of a convex polygon (counter-clockwise) intersected with a disk.
pub(crate) fn polygon_disk_area(poly: &[Point], center: Point, r: f64) -> f64 {
    let n = poly.len();
    let mut area = 0.0;
    for i in 0..n {
        let p = poly[i];
        let q = poly[(i + 1) % n];
        area += triangle_disk_area(
            Point::new(p.x - center.x, p.y - center.y),
            Point::new(q.x - center.x, q.y - center.y),
            r,
        );
    }
    area.max(0.0)
}

fn shoelace(poly: &[Point]) -> f64 {
    let n = poly.len();
    let mut a = 0.0;
    for i in 0..n {
        a += cross(poly[i], poly[(i + 1) % n]);
    }
    (0.5 * a).max(0.0)
}

/// Largest squared norm over the intersection of a convex polygon
/// (counter-clockwise) with the disk `(c, r)`.
fn max_dist2_in_disk(poly: &[Point], c: Point, r: f64) -> f64 {
    let r2 = r * r;
    let n = poly.len();
    let mut m: f64 = 0.0;
    for i in 0..n {
        let p = poly[i];
        let q = poly[(i + 1) % n];
        let pc = Point::new(p.x - c.x, p.y - c.y);
        if dot(pc, pc) <= r2 {
            m = m.max(dot(p, p));
        }
        // Edge crossings of the circle.
        let d = Point::new(q.x - p.x, q.y - p.y);
        let a = dot(d, d);
        if a == 0.0 {
            continue;
        }
        let b = dot(pc, d);
        let disc = b * b - a * (dot(pc, pc) - r2);
        if disc < 0.0 {
            continue;
        }
        let s = disc.sqrt();
        for t in [(-b - s) / a, (-b + s) / a] {
            if (0.0..=1.0).contains(&t) {
                let x = Point::new(p.x + d.x * t, p.y + d.y * t);
                m = m.max(dot(x, x));
            }
        }
    }
    // The point of the circle farthest from the origin, if the polygon holds it.
    let norm = dot(c, c).sqrt();
    let far = if norm > 0.0 {
        Point::new(c.x * (1.0 + r / norm), c.y * (1.0 + r / norm))
    } else {
        Point::new(r, 0.0)
    };
    let holds = (0..n).all(|i| {
        let p = poly[i];
        let q = poly[(i + 1) % n];
        cross(Point::new(q.x - p.x, q.y - p.y), Point::new(far.x - p.x, far.y - p.y)) >= 0.0
    });
    if holds {
        m = m.max(dot(far, far));
    }
    m
}

/// Keeps the part of `poly` with `n · y ≤ c`.
fn clip(poly: &[Point], n: Point, c: f64, out: &mut Vec<Point>) {
    out.clear();
    let len = poly.len();
    for i in 0..len {
        let p = poly[i];
        let q = poly[(i + 1) % len];
        let sp = dot(n, p) - c;
        let sq = dot(n, q) - c;
        if sp <= 0.0 {
            out.push(p);
        }
        if (sp < 0.0 && sq > 0.0) || (sp > 0.0 && sq < 0.0) {
            let t = sp / (sp - sq);
            out.push(Point::new(p.x + (q.x - p.x) * t, p.y + (q.y - p.y) * t));
        }
    }
}

/// Reusable buffers for [`cell_area`].
#[derive(Default)]
pub(crate) struct CellScratch {
    poly: Vec<Point>,
    tmp: Vec<Point>,
    ring: Vec<(f64, Point)>,
}

/// Area (m²) of the nearest-point region of `points[a]` inside the disk
/// `(center, radius)`. Coincident points go to the lowest index.
pub(crate) fn cell_area(
    index: &NearestIndex<'_>,
    a: usize,
    center: Point,
    radius: f64,
    scratch: &mut CellScratch,
) -> f64 {
    let pa = index.points()[a];
    // Work relative to `pa`, starting from the square around the disk.
    let c = Point::new(center.x - pa.x, center.y - pa.y);
    let (x0, x1) = (c.x - radius, c.x + radius);
    let (y0, y1) = (c.y - radius, c.y + radius);
    let CellScratch { poly, tmp, ring } = scratch;
    poly.clear();
    poly.extend([
        Point::new(x0, y0),
        Point::new(x1, y0),
        Point::new(x1, y1),
        Point::new(x0, y1),
    ]);
    let reach2 = |poly: &[Point]| {
        let inside = poly.iter().all(|v| {
            let (dx, dy) = (v.x - c.x, v.y - c.y);
            dx * dx + dy * dy <= radius * radius
        });
        if inside {
            poly.iter().map(|v| dot(*v, *v)).fold(0.0, f64::max)
        } else {
            max_dist2_in_disk(poly, c, radius)
        }
    };
    struct Walk<'s> {
        poly: &'s mut Vec<Point>,
        tmp: &'s mut Vec<Point>,
        /// Neighbours of the current ring, clipped nearest first at ring end.
        ring: &'s mut Vec<(f64, Point)>,
        rmax2: f64,
        shadowed: bool,
    }
    impl Walk<'_> {
        fn flush(&mut self) {
            self.ring.sort_unstable_by(|x, y| x.0.total_cmp(&y.0));
            for &(d2, n) in self.ring.iter() {
                // A point farther than twice the region's reach cannot cut it.
                if d2 > 4.0 * self.rmax2 {
                    break;
                }
                clip(self.poly, n, 0.5 * d2, self.tmp);
                std::mem::swap(self.poly, self.tmp);
                // The farthest vertex bounds the exact reach from above.
                let vmax = self.poly.iter().map(|v| dot(*v, *v)).fold(0.0, f64::max);
                self.rmax2 = self.rmax2.min(vmax);
            }
            self.ring.clear();
        }
    }
    let mut w = Walk {
        poly,
        tmp,
        ring,
        rmax2: f64::INFINITY,
        shadowed: false,
    };
    w.rmax2 = reach2(w.poly);
    w.ring.clear();
    index.visit_rings(
        &pa,
        &mut w,
        |w, b, pb| {
            let b = b as usize;
            if b == a || w.shadowed {
                return;
            }
            let n = Point::new(pb.x - pa.x, pb.y - pa.y);
            let d2 = dot(n, n);
            if d2 == 0.0 {
                // A coincident point with a lower index owns the whole region.
                w.shadowed = b < a;
                return;
            }
            if d2 <= 4.0 * w.rmax2 {
                w.ring.push((d2, n));
            }
        },
        |w| {
            if w.shadowed {
                return 0.0;
            }
            w.flush();
            w.rmax2 = reach2(w.poly);
            4.0 * w.rmax2
        },
    );
    if !w.shadowed {
        w.flush();
    }
    let (poly, shadowed) = (&*w.poly, w.shadowed);
    if shadowed || poly.len() < 3 {
        return 0.0;
    }
    let inside = poly.iter().all(|v| {
        let (dx, dy) = (v.x - c.x, v.y - c.y);
        dx * dx + dy * dy <= radius * radius
    });
    if inside {
        shoelace(poly)
    } else {
        polygon_disk_area(poly, c, radius)
    }
}

fn circumcenter(a: Point, b: Point, c: Point) -> Point {
    let (bx, by) = (b.x - a.x, b.y - a.y);
    let (cx, cy) = (c.x - a.x, c.y - a.y);
    let bl = bx * bx + by * by;
    let cl = cx * cx + cy * cy;
    let d = 0.5 / (bx * cy - by * cx);
    Point::new(a.x + (cy * bl - by * cl) * d, a.y + (bx * cl - cx * bl) * d)
}

/// Clipped Voronoi areas (m²) of every point, from a Delaunay triangulation.
///
/// Falls back to [`cell_area`] per point when the triangulation does not
/// cover every point (fewer than three points, collinear or coincident input).
pub(crate) fn cell_areas(index: &NearestIndex<'_>, center: Point, radius: f64) -> Vec<f64> {
    let points = index.points();
    let n = points.len();
    let fallback = || {
        let mut scratch = CellScratch::default();
        (0..n).map(|a| cell_area(index, a, center, radius, &mut scratch)).collect()
    };
    if n < 3 {
        return fallback();
    }
    let input: Vec<delaunator::Point> = points
        .iter()
        .map(|p| delaunator::Point { x: p.x, y: p.y })
        .collect();
    let tri = delaunator::triangulate(&input);
    let (triangles, halfedges) = (&tri.triangles, &tri.halfedges);
    // One incoming half-edge per point, a hull edge where there is one.
    let mut inedge = vec![EMPTY; n];
    for e in 0..triangles.len() {
        let end = triangles[next_halfedge(e)];
        if inedge[end] == EMPTY || halfedges[e] == EMPTY {
            inedge[end] = e;
        }
    }
    if inedge.contains(&EMPTY) {
        return fallback();
    }
    let centers: Vec<Point> = triangles
        .chunks_exact(3)
        .map(|t| circumcenter(points[t[0]], points[t[1]], points[t[2]]))
        .collect();

    let r2 = radius * radius;
    let mut poly: Vec<Point> = Vec::with_capacity(16);
    let mut tmp: Vec<Point> = Vec::with_capacity(16);
    let mut nbrs: Vec<usize> = Vec::with_capacity(16);
    let mut areas = Vec::with_capacity(n);
    for (a, &start) in inedge.iter().enumerate() {
        let pa = points[a];
        let c = Point::new(center.x - pa.x, center.y - pa.y);
        poly.clear();
        nbrs.clear();
        let mut incoming = start;
        let closed = loop {
            poly.push(Point::new(centers[incoming / 3].x - pa.x, centers[incoming / 3].y - pa.y));
            nbrs.push(triangles[incoming]);
            let outgoing = next_halfedge(incoming);
            incoming = halfedges[outgoing];
            if incoming == EMPTY {
                nbrs.push(triangles[next_halfedge(outgoing)]);
                break false;
            }
            if incoming == start {
                break true;
            }
        };
        if !closed {
            // Unbounded hull cell: clip the disk's bounding square instead.
            poly.clear();
            poly.extend([
                Point::new(c.x - radius, c.y - radius),
                Point::new(c.x + radius, c.y - radius),
                Point::new(c.x + radius, c.y + radius),
                Point::new(c.x - radius, c.y + radius),
            ]);
            for &b in &nbrs {
                let nb = Point::new(points[b].x - pa.x, points[b].y - pa.y);
                clip(&poly, nb, 0.5 * dot(nb, nb), &mut tmp);
                std::mem::swap(&mut poly, &mut tmp);
            }
        }
        if poly.len() < 3 {
            areas.push(0.0);
            continue;
        }
        let mut signed = 0.0;
        for i in 0..poly.len() {
            signed += cross(poly[i], poly[(i + 1) % poly.len()]);
        }
        if signed < 0.0 {
            poly.reverse();
        }
        let inside = poly.iter().all(|v| {
            let (dx, dy) = (v.x - c.x, v.y - c.y);
            dx * dx + dy * dy <= r2
        });
        areas.push(if inside { shoelace(&poly) } else { polygon_disk_area(&poly, c, radius) });
    }
    areas
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pointprocess::{nearest_brute, sample_fixed, NodeKind, Window};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    #[test]
    fn square_and_disk_overlaps() {
        let sq = |h: f64| {
            vec![
                Point::new(-h, -h),
                Point::new(h, -h),
                Point::new(h, h),
                Point::new(-h, h),
            ]
        };
        // Square inside the disk.
        assert!((polygon_disk_area(&sq(1.0), Point::ORIGIN, 10.0) - 4.0).abs() < 1e-12);
        // Disk inside the square.
        assert!((polygon_disk_area(&sq(10.0), Point::ORIGIN, 1.0) - PI).abs() < 1e-12);
        // Quarter disk: square [0,2]² against the unit disk.
        let q = [
            Point::new(0.0, 0.0),
            Point::new(2.0, 0.0),
            Point::new(2.0, 2.0),
            Point::new(0.0, 2.0),
        ];
        assert!((polygon_disk_area(&q, Point::ORIGIN, 1.0) - PI / 4.0).abs() < 1e-12);
        // Disjoint.
        assert!(polygon_disk_area(&sq(1.0), Point::new(50.0, 0.0), 1.0).abs() < 1e-12);
    }

    #[test]
    fn areas_partition_the_disk() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for n in [1, 2, 3, 40, 700] {
            let w = Window::disk(Point::new(30.0, -20.0), 400.0).unwrap();
            let ans = sample_fixed(n, &w, NodeKind::An, &mut rng).unwrap();
            let idx = NearestIndex::new(&ans.points);
            let mut scratch = CellScratch::default();
            let total: f64 = (0..n)
                .map(|a| cell_area(&idx, a, w.center(), 400.0, &mut scratch))
                .sum();
            let disk = PI * 400.0 * 400.0;
            assert!((total - disk).abs() / disk < 1e-9, "n = {n}: {total} vs {disk}");
        }
    }

    #[test]
    fn areas_match_point_counting() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let w = Window::disk(Point::ORIGIN, 200.0).unwrap();
        let ans = sample_fixed(25, &w, NodeKind::An, &mut rng).unwrap();
        let idx = NearestIndex::new(&ans.points);
        let mut scratch = CellScratch::default();
        let m = 400_000;
        let mut hits = vec![0usize; 25];
        for _ in 0..m {
            let q = w.sample_uniform(&mut rng);
            hits[nearest_brute(&ans.points, &q)] += 1;
        }
        let disk = PI * 200.0 * 200.0;
        for a in 0..25 {
            let frac = cell_area(&idx, a, w.center(), 200.0, &mut scratch) / disk;
            let emp = hits[a] as f64 / m as f64;
            let sd = (frac * (1.0 - frac) / m as f64).sqrt();
            assert!((frac - emp).abs() < 5.0 * sd + 1e-12, "AN {a}: {frac} vs {emp}");
        }
    }

    #[test]
    fn triangulated_areas_match_clipping() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for n in [1, 2, 3, 4, 30, 600] {
            let w = Window::disk(Point::new(-15.0, 40.0), 300.0).unwrap();
            let ans = sample_fixed(n, &w, NodeKind::An, &mut rng).unwrap();
            let idx = NearestIndex::new(&ans.points);
            let fast = cell_areas(&idx, w.center(), 300.0);
            let mut scratch = CellScratch::default();
            for (a, f) in fast.iter().enumerate() {
                let slow = cell_area(&idx, a, w.center(), 300.0, &mut scratch);
                assert!((f - slow).abs() <= 1e-7 * slow.max(1.0), "n = {n}, AN {a}: {f} vs {slow}");
            }
        }
        // Collinear and coincident inputs take the fallback.
        let line: Vec<Point> = (0..5).map(|i| Point::new(i as f64 * 10.0, 0.0)).collect();
        let idx = NearestIndex::new(&line);
        let total: f64 = cell_areas(&idx, Point::ORIGIN, 100.0).iter().sum();
        assert!((total - PI * 1e4).abs() < 1e-6);
        let dup = vec![Point::new(0.0, 0.0), Point::new(10.0, 0.0), Point::new(0.0, 0.0), Point::new(0.0, 7.0)];
        let idx = NearestIndex::new(&dup);
        let areas = cell_areas(&idx, Point::ORIGIN, 50.0);
        assert_eq!(areas[2], 0.0);
        assert!((areas.iter().sum::<f64>() - PI * 2500.0).abs() < 1e-6);
    }

    #[test]
    fn coincident_points_go_to_lowest_index() {
        let pts = vec![Point::new(0.0, 0.0), Point::new(10.0, 0.0), Point::new(0.0, 0.0)];
        let idx = NearestIndex::new(&pts);
        let mut s = CellScratch::default();
        let a0 = cell_area(&idx, 0, Point::ORIGIN, 50.0, &mut s);
        let a2 = cell_area(&idx, 2, Point::ORIGIN, 50.0, &mut s);
        let a1 = cell_area(&idx, 1, Point::ORIGIN, 50.0, &mut s);
        assert_eq!(a2, 0.0);
        assert!((a0 + a1 - PI * 2500.0).abs() < 1e-6);
    }
}

