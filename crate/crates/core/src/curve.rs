//! The limit curve t ↦ f(a, t).
//!
//! Dyadic parameters map to contact points: at iteration k the interval
//! [i/2^k, (i+1)/2^k] is carried by the i-th empty polygon in curve order,
//! whose entry contact is f(i/2^k). Other parameters are evaluated by
//! refining until the carrying polygon is smaller than the requested
//! tolerance.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{param, Error, Result};
use crate::geom::{point_in_polygon, segment_distance, BBox, Location, Point, Polygon};
use crate::substitution::{inscribe_rhombus, new_state, AspectParam, EmptyPolygon, GasketState};

/// Smallest tolerance [`eval`] accepts.
pub const MIN_EVAL_TOL: f64 = 1e-12;

/// One polygon of the state together with the parameter interval it carries.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvePiece {
    pub level: u32,
    pub index: u64,
    pub polygon: EmptyPolygon,
}

impl CurvePiece {
    /// `[index / 2^level, (index + 1) / 2^level]`.
    pub fn interval(&self) -> (f64, f64) {
        let n = (self.level as f64).exp2();
        (self.index as f64 / n, (self.index + 1) as f64 / n)
    }

    pub fn entry(&self) -> Point {
        self.polygon.entry
    }

    pub fn exit(&self) -> Point {
        self.polygon.exit
    }
}

pub fn pieces(s: &GasketState) -> Vec<CurvePiece> {
    s.polygons()
        .iter()
        .enumerate()
        .map(|(i, &polygon)| CurvePiece {
            level: s.k(),
            index: i as u64,
            polygon,
        })
        .collect()
}

/// Closed polygonal approximant through contact points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClosedPolyline {
    pub points: Vec<Point>,
}

impl ClosedPolyline {
    pub fn new(points: Vec<Point>) -> Result<Self> {
        if points.len() < 4 {
            return param(format!(
                "closed polyline needs at least 4 points, got {}",
                points.len()
            ));
        }
        if points[0] == points[points.len() - 1] {
            return param("closed polyline must not repeat its first point");
        }
        Ok(ClosedPolyline { points })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn signed_area(&self) -> f64 {
        crate::geom::signed_area_of(&self.points)
    }
}

/// The 2^k contacts in curve order starting at (0, 1), counterclockwise.
/// Needs k ≥ 2 (iteration 1 has only two contacts).
pub fn polyline(s: &GasketState) -> Result<ClosedPolyline> {
    ClosedPolyline::new(s.contacts())
}

/// f(a, t) to within `tol`.
pub fn eval(a: AspectParam, t: f64, tol: f64) -> Result<Point> {
    if !(tol >= MIN_EVAL_TOL) {
        return param(format!(
            "tolerance must be at least {MIN_EVAL_TOL:e}, got {tol:e}"
        ));
    }
    if !(0.0..=1.0).contains(&t) {
        return param(format!("curve parameter must lie in [0, 1], got {t}"));
    }
    let s = new_state(a)?;
    let templates = s.templates();
    // Binary digits of t are consumed one per level; doubling and removing
    // the integer part are exact in floating point.
    let mut frac = if t == 1.0 { 0.0 } else { t };
    let mut take_bit = || {
        frac *= 2.0;
        if frac >= 1.0 {
            frac -= 1.0;
            1
        } else {
            0
        }
    };
    let mut piece = s.polygons()[take_bit()];
    while piece.diameter(templates) >= tol {
        piece = inscribe_rhombus(&piece, templates).children[take_bit()];
    }
    Ok(piece.entry)
}

/// Upper bound on the diameter of every empty polygon at iteration 2k:
/// (2/a)·((1+a)/2)^(k−1).
pub fn convergence_bound(a: AspectParam, k: u32) -> Result<f64> {
    if k == 0 {
        return param("convergence bound is defined for k >= 1");
    }
    let av = a.value();
    Ok(2.0 / av * ((1.0 + av) / 2.0).powi(k as i32 - 1))
}

/// What went wrong between two polygons.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ViolationKind {
    /// Adjacent polygons whose shared contacts differ from the expected.
    ContactMismatch,
    /// Boundaries meet somewhere other than a shared contact.
    BoundaryContact,
    /// Edges leave a shared contact in the same direction.
    OverlappingEdges,
    /// One polygon pokes into the other near a shared contact or contains it.
    InteriorOverlap,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub first: usize,
    pub second: usize,
    pub kind: ViolationKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimplicityReport {
    pub iteration: u32,
    pub polygons: usize,
    pub candidate_pairs: usize,
    pub adjacent_pairs: usize,
    pub violations: Vec<Violation>,
    pub passed: bool,
}

/// Finite-depth Jordan check: cyclically adjacent polygons meet exactly at
/// their shared contact and all other pairs are disjoint.
///
/// `tol` is relative to the smaller polygon of each pair.
pub fn check_simple(s: &GasketState, tol: f64) -> SimplicityReport {
    let templates = s.templates();
    let n = s.polygons().len();
    let polys: Vec<Polygon> = (0..n).map(|i| s.polygon_vertices(i)).collect();
    let diams: Vec<f64> = s.polygons().iter().map(|p| p.diameter(templates)).collect();
    let boxes: Vec<BBox> = polys
        .iter()
        .zip(&diams)
        .map(|(p, d)| p.bbox().expand(tol * d))
        .collect();

    // Sweep and prune on x.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| boxes[i].min.x.total_cmp(&boxes[j].min.x).then(i.cmp(&j)));
    let mut pairs = Vec::new();
    for (oi, &i) in order.iter().enumerate() {
        for &j in &order[oi + 1..] {
            if boxes[j].min.x > boxes[i].max.x {
                break;
            }
            if boxes[i].overlaps(&boxes[j]) {
                pairs.push((i.min(j), i.max(j)));
            }
        }
    }
    pairs.sort_unstable();

    let adjacent = |i: usize, j: usize| n >= 2 && (j == i + 1 || (i == 0 && j == n - 1));
    let results: Vec<Option<ViolationKind>> = pairs
        .par_iter()
        .map(|&(i, j)| {
            let (pi, pj) = (&s.polygons()[i], &s.polygons()[j]);
            let eff = tol * diams[i].min(diams[j]);
            let shared = shared_contacts(pi, pj, eff);
            let expected = if n == 2 {
                2
            } else if adjacent(i, j) {
                1
            } else {
                0
            };
            if shared.len() != expected {
                return Some(ViolationKind::ContactMismatch);
            }
            check_pair(&polys[i], &polys[j], &shared, eff)
        })
        .collect();

    let violations: Vec<Violation> = pairs
        .iter()
        .zip(results)
        .filter_map(|(&(first, second), r)| {
            r.map(|kind| Violation {
                first,
                second,
                kind,
            })
        })
        .collect();
    let adjacent_pairs = pairs.iter().filter(|&&(i, j)| adjacent(i, j)).count();
    let expected_adjacent = if n == 2 { 1 } else { n };
    SimplicityReport {
        iteration: s.k(),
        polygons: n,
        candidate_pairs: pairs.len(),
        adjacent_pairs,
        passed: violations.is_empty() && adjacent_pairs == expected_adjacent,
        violations,
    }
}

fn shared_contacts(p: &EmptyPolygon, q: &EmptyPolygon, tol: f64) -> Vec<Point> {
    let mut out: Vec<Point> = Vec::new();
    for c in [p.entry, p.exit] {
        if (c.dist(q.entry) <= tol || c.dist(q.exit) <= tol) && out.iter().all(|o| o.dist(c) > tol)
        {
            out.push(c);
        }
    }
    out
}

fn is_at_any(p: Point, shared: &[Point], tol: f64) -> Option<Point> {
    shared.iter().copied().find(|c| c.dist(p) <= tol)
}

/// Point just inside `poly` next to its vertex `c`.
fn probe_near(poly: &Polygon, c: Point, tol: f64) -> Option<Point> {
    let n = poly.len();
    let i = (0..n).find(|&i| poly.vertices[i].dist(c) <= tol)?;
    let (u, v, w) = (
        poly.vertices[(i + n - 1) % n],
        poly.vertices[i],
        poly.vertices[(i + 1) % n],
    );
    let (du, dw) = (u - v, w - v);
    let (lu, lw) = (du.norm(), dw.norm());
    let mut dir = du * (1.0 / lu) + dw * (1.0 / lw);
    let convex = (v - u).cross(w - v) > 0.0;
    if !convex {
        dir = -dir;
    }
    let len = dir.norm();
    if len == 0.0 {
        return None;
    }
    Some(v + dir * (1e-3 * lu.min(lw) / len))
}

fn check_pair(p: &Polygon, q: &Polygon, shared: &[Point], tol: f64) -> Option<ViolationKind> {
    for (a, b) in p.edges() {
        for (c, d) in q.edges() {
            if segment_distance(a, b, c, d) > tol {
                continue;
            }
            // The only allowed touching is two edges leaving a shared contact.
            let at_p = is_at_any(a, shared, tol).or_else(|| is_at_any(b, shared, tol));
            let at_q = is_at_any(c, shared, tol).or_else(|| is_at_any(d, shared, tol));
            match (at_p, at_q) {
                (Some(x), Some(y)) if x.dist(y) <= tol => {
                    let dp = if a.dist(x) <= tol { b - a } else { a - b };
                    let dq = if c.dist(x) <= tol { d - c } else { c - d };
                    let cos = dp.dot(dq) / (dp.norm() * dq.norm());
                    if cos > 1.0 - 1e-12 {
                        return Some(ViolationKind::OverlappingEdges);
                    }
                    // Away from the contact the edges must be separated.
                    let (fp, fq) = (x + dp, x + dq);
                    let (mp, mq) = (x.lerp(fp, 0.5), x.lerp(fq, 0.5));
                    if segment_distance(mp, fp, mq, fq) <= tol {
                        return Some(ViolationKind::BoundaryContact);
                    }
                }
                _ => return Some(ViolationKind::BoundaryContact),
            }
        }
    }
    for &c in shared {
        let (Some(pp), Some(pq)) = (probe_near(p, c, tol), probe_near(q, c, tol)) else {
            return Some(ViolationKind::ContactMismatch);
        };
        if point_in_polygon(pp, q, 0.0) == Location::Inside
            || point_in_polygon(pq, p, 0.0) == Location::Inside
        {
            return Some(ViolationKind::InteriorOverlap);
        }
    }
    // Boundaries do not cross, so overlap would mean containment.
    let outside = |from: &Polygon, into: &Polygon| {
        from.vertices
            .iter()
            .filter(|&&v| is_at_any(v, shared, tol).is_none())
            .all(|&v| point_in_polygon(v, into, 0.0) != Location::Inside)
    };
    if !outside(p, q) || !outside(q, p) {
        return Some(ViolationKind::InteriorOverlap);
    }
    None
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveSample {
    pub t: f64,
    pub point: Point,
}

/// `n` evenly spaced evaluations of f on [0, 1).
pub fn sample(a: AspectParam, n: usize, tol: f64) -> Result<Vec<CurveSample>> {
    if n == 0 {
        return Err(Error::Parameter("need at least one sample".into()));
    }
    (0..n)
        .into_par_iter()
        .map(|i| {
            let t = i as f64 / n as f64;
            eval(a, t, tol).map(|point| CurveSample { t, point })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::substitution::run_to;

    #[test]
    fn polyline_at_two() {
        let a = AspectParam::new(0.4).unwrap();
        let s = run_to(a, 2).unwrap();
        let pl = polyline(&s).unwrap();
        let want = [(0.0, 1.0), (-0.4, 0.0), (0.0, -1.0), (0.4, 0.0)];
        for (p, (x, y)) in pl.points.iter().zip(want) {
            assert!(p.dist(Point::new(x, y)) < 1e-12);
        }
        assert!(pl.signed_area() > 0.0);
        assert!(polyline(&run_to(a, 1).unwrap()).is_err());
    }

    #[test]
    fn eval_at_quarters() {
        let a = AspectParam::new(0.35).unwrap();
        let at = |t| eval(a, t, 1e-6).unwrap();
        assert_eq!(at(0.0), Point::new(0.0, 1.0));
        assert_eq!(at(1.0), Point::new(0.0, 1.0));
        assert_eq!(at(0.5), Point::new(0.0, -1.0));
        assert!(at(0.25).dist(Point::new(-0.35, 0.0)) < 1e-15);
        assert!(at(0.75).dist(Point::new(0.35, 0.0)) < 1e-15);
    }

    #[test]
    fn eval_rejects_bad_input() {
        let a = AspectParam::koch();
        assert!(eval(a, 0.3, 1e-13).is_err());
        assert!(eval(a, 1.5, 1e-6).is_err());
        assert!(eval(a, f64::NAN, 1e-6).is_err());
    }

    #[test]
    fn bound_formula() {
        let a = AspectParam::new(0.5).unwrap();
        assert_eq!(convergence_bound(a, 1).unwrap(), 4.0);
        assert!(convergence_bound(a, 0).is_err());
        let b: Vec<f64> = (1..40).map(|k| convergence_bound(a, k).unwrap()).collect();
        assert!(b.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn small_states_are_simple() {
        for a in [0.3, 0.7] {
            for k in 1..=6 {
                let s = run_to(AspectParam::new(a).unwrap(), k).unwrap();
                let r = check_simple(&s, 1e-9);
                assert!(r.passed, "a={a} k={k}: {:?}", r.violations);
            }
        }
    }

    #[test]
    fn check_simple_detects_overlap() {
        // Duplicate a polygon in place of its neighbour's successor.
        let s = run_to(AspectParam::new(0.5).unwrap(), 4).unwrap();
        let mut polys = s.polygons().to_vec();
        polys[5] = polys[9];
        let broken = s.with_polygons(polys);
        let r = check_simple(&broken, 1e-9);
        assert!(!r.passed);
    }
}
