//! Level-set extraction by marching squares and simple shape measures on
//! the resulting polylines.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::grid::GridFn2;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Polyline {
    /// For closed curves the first point is repeated at the end.
    pub points: Vec<(f64, f64)>,
    pub closed: bool,
}

impl Polyline {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn length(&self) -> f64 {
        self.points.windows(2).map(|w| dist(w[0], w[1])).sum()
    }

    /// Shoelace area, positive for counter-clockwise curves. Zero for open
    /// polylines.
    pub fn signed_area(&self) -> f64 {
        if !self.closed {
            return 0.0;
        }
        0.5 * self.points.windows(2).map(|w| w[0].0 * w[1].1 - w[1].0 * w[0].1).sum::<f64>()
    }
}

/// Identifies a crossing by the grid edge it lies on: `(i, j, vertical)` is
/// the edge from `(i, j)` to `(i + 1, j)` or, if vertical, to `(i, j + 1)`.
type EdgeKey = (usize, usize, bool);

/// Polylines of `{u = level}`.
///
/// Corners with `u >= level` count as inside. Crossings are placed by linear
/// interpolation along cell edges; the two ambiguous saddle cases are
/// resolved by comparing the mean of the four corners with `level`. Curves
/// that reach the edge of the grid come back open, all others closed.
pub fn marching_squares(u: &GridFn2, level: f64) -> Vec<Polyline> {
    let g = *u.grid();
    let inside = |i: usize, j: usize| u.at(i, j) >= level;
    let point = |e: EdgeKey| -> (f64, f64) {
        let (i, j, vertical) = e;
        let (i1, j1) = if vertical { (i, j + 1) } else { (i + 1, j) };
        let (a, b) = (u.at(i, j), u.at(i1, j1));
        let t = if a == b { 0.5 } else { ((level - a) / (b - a)).clamp(0.0, 1.0) };
        let (x0, y0) = (g.x(i), g.y(j));
        let (x1, y1) = (g.x(i1), g.y(j1));
        (x0 + t * (x1 - x0), y0 + t * (y1 - y0))
    };

    let mut segments: Vec<(EdgeKey, EdgeKey)> = Vec::new();
    for j in 0..g.ny - 1 {
        for i in 0..g.nx - 1 {
            // corners counter-clockwise from the lower left
            let c = [inside(i, j), inside(i + 1, j), inside(i + 1, j + 1), inside(i, j + 1)];
            let case = c.iter().enumerate().fold(0u8, |m, (k, &b)| m | ((b as u8) << k));
            let bottom = (i, j, false);
            let right = (i + 1, j, true);
            let top = (i, j + 1, false);
            let left = (i, j, true);
            let mut push = |a, b| segments.push((a, b));
            match case {
                0 | 15 => {}
                1 | 14 => push(left, bottom),
                2 | 13 => push(bottom, right),
                3 | 12 => push(left, right),
                4 | 11 => push(right, top),
                6 | 9 => push(bottom, top),
                7 | 8 => push(left, top),
                5 | 10 => {
                    let mean = 0.25 * (u.at(i, j) + u.at(i + 1, j) + u.at(i + 1, j + 1) + u.at(i, j + 1));
                    // centre joins the diagonal whose corners share its state
                    let joined = (mean >= level) == (case == 5);
                    if joined {
                        push(left, top);
                        push(bottom, right);
                    } else {
                        push(left, bottom);
                        push(right, top);
                    }
                }
                _ => unreachable!(),
            }
        }
    }
    chain(&segments).into_iter().map(|(keys, closed)| Polyline { points: keys.into_iter().map(point).collect(), closed }).collect()
}

/// Links segments sharing an edge crossing. Open chains start at crossings
/// used once; the remaining ones form cycles.
fn chain(segments: &[(EdgeKey, EdgeKey)]) -> Vec<(Vec<EdgeKey>, bool)> {
    let mut adj: HashMap<EdgeKey, Vec<usize>> = HashMap::new();
    for (s, &(a, b)) in segments.iter().enumerate() {
        adj.entry(a).or_default().push(s);
        adj.entry(b).or_default().push(s);
    }
    let mut used = vec![false; segments.len()];
    let mut out = Vec::new();
    let walk = |start: EdgeKey, used: &mut Vec<bool>| -> Vec<EdgeKey> {
        let mut keys = vec![start];
        let mut at = start;
        while let Some(&s) = adj[&at].iter().find(|&&s| !used[s]) {
            used[s] = true;
            let (a, b) = segments[s];
            at = if a == at { b } else { a };
            keys.push(at);
        }
        keys
    };
    // deterministic order: sort candidate starts
    let mut ends: Vec<EdgeKey> = adj.iter().filter(|(_, v)| v.len() == 1).map(|(&k, _)| k).collect();
    ends.sort_unstable();
    for e in ends {
        if adj[&e].iter().any(|&s| !used[s]) {
            out.push((walk(e, &mut used), false));
        }
    }
    let mut rest: Vec<EdgeKey> = adj.keys().copied().collect();
    rest.sort_unstable();
    for k in rest {
        if adj[&k].iter().any(|&s| !used[s]) {
            let keys = walk(k, &mut used);
            let closed = keys.first() == keys.last();
            out.push((keys, closed));
        }
    }
    out
}

fn dist(a: (f64, f64), b: (f64, f64)) -> f64 {
    (a.0 - b.0).hypot(a.1 - b.1)
}

fn point_segment(p: (f64, f64), a: (f64, f64), b: (f64, f64)) -> f64 {
    let (dx, dy) = (b.0 - a.0, b.1 - a.1);
    let len2 = dx * dx + dy * dy;
    if len2 == 0.0 {
        return dist(p, a);
    }
    let t = (((p.0 - a.0) * dx + (p.1 - a.1) * dy) / len2).clamp(0.0, 1.0);
    dist(p, (a.0 + t * dx, a.1 + t * dy))
}

fn directed(from: &[Polyline], to: &[Polyline]) -> f64 {
    let mut worst: f64 = 0.0;
    for p in from.iter().flat_map(|l| l.points.iter()) {
        let mut best = f64::INFINITY;
        for l in to {
            match l.points.len() {
                0 => {}
                1 => best = best.min(dist(*p, l.points[0])),
                _ => {
                    for w in l.points.windows(2) {
                        best = best.min(point_segment(*p, w[0], w[1]));
                    }
                }
            }
        }
        worst = worst.max(best);
    }
    worst
}

/// Symmetric Hausdorff distance between two curve sets, measured from the
/// vertices of each to the segments of the other. Infinite if exactly one
/// side is empty.
pub fn hausdorff(a: &[Polyline], b: &[Polyline]) -> f64 {
    let empty = |s: &[Polyline]| s.iter().all(|l| l.is_empty());
    match (empty(a), empty(b)) {
        (true, true) => 0.0,
        (true, false) | (false, true) => f64::INFINITY,
        _ => directed(a, b).max(directed(b, a)),
    }
}

/// Area, centroid and second central moments of the region bounded by a
/// closed polyline.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Moments {
    pub area: f64,
    pub centroid: (f64, f64),
    pub mu20: f64,
    pub mu11: f64,
    pub mu02: f64,
}

impl Moments {
    /// `a / b` of the ellipse with the same second moments.
    pub fn axis_ratio(&self) -> f64 {
        let tr = self.mu20 + self.mu02;
        let disc = ((self.mu20 - self.mu02).powi(2) + 4.0 * self.mu11 * self.mu11).sqrt();
        ((tr + disc) / (tr - disc)).sqrt()
    }

    /// Angle of the major axis from the x-axis.
    pub fn orientation(&self) -> f64 {
        0.5 * (2.0 * self.mu11).atan2(self.mu20 - self.mu02)
    }
}

pub fn moments(line: &Polyline) -> Option<Moments> {
    if !line.closed || line.points.len() < 4 {
        return None;
    }
    let (mut a, mut cx, mut cy, mut ixx, mut ixy, mut iyy) = (0.0, 0.0, 0.0, 0.0, 0.0, 0.0);
    for w in line.points.windows(2) {
        let ((x0, y0), (x1, y1)) = (w[0], w[1]);
        let cr = x0 * y1 - x1 * y0;
        a += cr;
        cx += (x0 + x1) * cr;
        cy += (y0 + y1) * cr;
        ixx += (x0 * x0 + x0 * x1 + x1 * x1) * cr;
        iyy += (y0 * y0 + y0 * y1 + y1 * y1) * cr;
        ixy += (x0 * y1 + 2.0 * x0 * y0 + 2.0 * x1 * y1 + x1 * y0) * cr;
    }
    a *= 0.5;
    if a.abs() < 1e-300 {
        return None;
    }
    let (cx, cy) = (cx / (6.0 * a), cy / (6.0 * a));
    let (ixx, iyy, ixy) = (ixx / 12.0, iyy / 12.0, ixy / 24.0);
    // the region's moments ∫x², ∫y², ∫xy about the origin, then central
    Some(Moments {
        area: a.abs(),
        centroid: (cx, cy),
        mu20: (ixx - a * cx * cx) / a,
        mu02: (iyy - a * cy * cy) / a,
        mu11: (ixy - a * cx * cy) / a,
    })
}

/// Polygon area over convex hull area, in `(0, 1]`; 1 for convex curves.
pub fn convexity(line: &Polyline) -> Option<f64> {
    let m = moments(line)?;
    let hull = convex_hull(&line.points);
    let hull_area = 0.5 * hull.iter().zip(hull.iter().cycle().skip(1)).map(|(p, q)| p.0 * q.1 - q.0 * p.1).sum::<f64>();
    Some(m.area / hull_area.abs())
}

/// Andrew's monotone chain, counter-clockwise, without repeated endpoint.
pub fn convex_hull(points: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let mut p: Vec<(f64, f64)> = points.to_vec();
    p.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    p.dedup();
    if p.len() < 3 {
        return p;
    }
    let cross = |o: (f64, f64), a: (f64, f64), b: (f64, f64)| (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0);
    let mut hull: Vec<(f64, f64)> = Vec::with_capacity(2 * p.len());
    for pass in 0..2 {
        let start = hull.len();
        let iter: Box<dyn Iterator<Item = &(f64, f64)>> = if pass == 0 { Box::new(p.iter()) } else { Box::new(p.iter().rev()) };
        for &q in iter {
            while hull.len() >= start + 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], q) <= 0.0 {
                hull.pop();
            }
            hull.push(q);
        }
        hull.pop();
    }
    hull
}

/// The closed polyline enclosing the largest area, if any.
pub fn largest_closed(lines: &[Polyline]) -> Option<&Polyline> {
    lines
        .iter()
        .filter(|l| l.closed)
        .max_by(|a, b| a.signed_area().abs().total_cmp(&b.signed_area().abs()))
}

/// True if no two non-adjacent segments of the polyline cross.
pub fn is_simple(line: &Polyline) -> bool {
    let p = &line.points;
    let n = p.len().saturating_sub(1);
    let orient = |a: (f64, f64), b: (f64, f64), c: (f64, f64)| {
        let v = (b.0 - a.0) * (c.1 - a.1) - (b.1 - a.1) * (c.0 - a.0);
        (v > 0.0) as i8 - (v < 0.0) as i8
    };
    for s in 0..n {
        for t in s + 2..n {
            if line.closed && s == 0 && t == n - 1 {
                continue;
            }
            let (a, b, c, d) = (p[s], p[s + 1], p[t], p[t + 1]);
            let (o1, o2, o3, o4) = (orient(a, b, c), orient(a, b, d), orient(c, d, a), orient(c, d, b));
            if o1 * o2 < 0 && o3 * o4 < 0 {
                return false;
            }
        }
    }
    true
}
