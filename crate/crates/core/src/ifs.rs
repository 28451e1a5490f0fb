//! The quadrant of the curve as the attractor of three similarities, with
//! checks of self-similarity and the open set condition.
//!
//! Labels: A = (a, 0) and C = (0, 1) are the contacts bounding the upper
//! right quadrant, B is the outer vertex of the wedge between them. S1 fixes
//! C with ratio a; S2 and S3 have ratio (1 − a²)/2 and meet at H.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::curve::convergence_bound;
use crate::error::{param, Error, Result};
use crate::geom::{cloud_distance, point_in_polygon, polygon_area, Location, Point, Polygon};
use crate::substitution::{AspectParam, GasketState, CONTACT_GRID};

/// Deepest attractor refinement (2·3^14 ≈ 9.6e6 points before dedup).
pub const MAX_ATTRACTOR_DEPTH: u32 = 14;

/// Minimum sample count for [`verify_open_set`].
pub const MIN_OPEN_SET_SAMPLES: usize = 10_000;

const SOLVE_TOL: f64 = 1e-12;

fn to_c(p: Point) -> Complex64 {
    Complex64::new(p.x, p.y)
}

fn to_p(z: Complex64) -> Point {
    Point::new(z.re, z.im)
}

/// `z ↦ m·z + t`, or `m·conj(z) + t` when `reflect` is set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlaneSimilarity {
    pub m: Complex64,
    pub t: Complex64,
    pub reflect: bool,
}

impl PlaneSimilarity {
    /// The similarity of the given orientation taking p1 to q1 and p2 to q2.
    pub fn through(p1: Point, q1: Point, p2: Point, q2: Point, reflect: bool) -> Result<Self> {
        let dp = to_c(p2) - to_c(p1);
        if dp.norm() == 0.0 {
            return Err(Error::DegenerateGeometry(
                "similarity source points coincide".into(),
            ));
        }
        let dp = if reflect { dp.conj() } else { dp };
        let m = (to_c(q2) - to_c(q1)) / dp;
        let z1 = if reflect { to_c(p1).conj() } else { to_c(p1) };
        Ok(PlaneSimilarity {
            m,
            t: to_c(q1) - m * z1,
            reflect,
        })
    }

    pub fn apply(&self, p: Point) -> Point {
        let z = if self.reflect {
            to_c(p).conj()
        } else {
            to_c(p)
        };
        to_p(self.m * z + self.t)
    }

    pub fn ratio(&self) -> f64 {
        self.m.norm()
    }

    /// This map followed by the homothety of the given factor about `centre`.
    pub fn scaled_about(&self, centre: Point, factor: f64) -> PlaneSimilarity {
        let c = to_c(centre);
        PlaneSimilarity {
            m: self.m * factor,
            t: c + (self.t - c) * factor,
            reflect: self.reflect,
        }
    }

    pub fn apply_polygon(&self, poly: &Polygon) -> Polygon {
        let mut vertices: Vec<Point> = poly.vertices.iter().map(|&p| self.apply(p)).collect();
        if self.reflect {
            vertices.reverse();
        }
        Polygon { vertices }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuadrantLabels {
    pub a: Point,
    pub b: Point,
    pub c: Point,
    pub d: Point,
    pub e: Point,
    pub f: Point,
    pub g: Point,
    pub h: Point,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuadrantSystem {
    pub a: f64,
    pub maps: [PlaneSimilarity; 3],
    pub ratios: [f64; 3],
    pub labels: QuadrantLabels,
}

impl QuadrantSystem {
    /// Triangle ABC, counterclockwise.
    pub fn triangle(&self) -> Polygon {
        let l = &self.labels;
        Polygon {
            vertices: vec![l.a, l.b, l.c],
        }
    }

    /// The rhombus AHGD removed between the three image triangles.
    pub fn rhombus_ahgd(&self) -> Polygon {
        let l = &self.labels;
        Polygon {
            vertices: vec![l.a, l.h, l.g, l.d],
        }
    }

    pub fn apply_all(&self, points: &[Point]) -> Vec<Point> {
        let mut out = Vec::with_capacity(3 * points.len());
        for m in &self.maps {
            out.extend(points.iter().map(|&p| m.apply(p)));
        }
        out
    }

    /// Copy with map `i` replaced.
    pub fn with_map(&self, i: usize, map: PlaneSimilarity) -> QuadrantSystem {
        let mut s = self.clone();
        s.maps[i] = map;
        s.ratios[i] = map.ratio();
        s
    }
}

/// Solves the three maps from their prescribed images of A and C, picking
/// for each the one orientation whose image of ABC stays inside ABC and
/// off the interior of AHGD, then checks the images of B against D, F, E.
pub fn quadrant_system(a: AspectParam) -> Result<QuadrantSystem> {
    let a = a.geometric()?;
    let a2 = a * a;
    let c = (1.0 - a2) / 2.0;
    let pa = Point::new(a, 0.0);
    let pb = Point::new((1.0 + a2) / (2.0 * a), c);
    let pc = Point::new(0.0, 1.0);
    let pd = Point::new(a * (1.0 + a2) / 2.0, c);
    let pg = Point::new(a, 1.0 - a2);
    let ph = Point::new(a * (3.0 - a2) / 2.0, c);
    // E and F: lower and upper vertices of the horizontal rhombus from H to B.
    let half = (pb.x - ph.x) / 2.0;
    let pe = Point::new(ph.x + half, c - a * half);
    let pf = Point::new(ph.x + half, c + a * half);
    let labels = QuadrantLabels {
        a: pa,
        b: pb,
        c: pc,
        d: pd,
        e: pe,
        f: pf,
        g: pg,
        h: ph,
    };

    let abc = Polygon::new(vec![pa, pb, pc])?;
    let ahgd = Polygon::new(vec![pa, ph, pg, pd])?;
    let constraints = [(pg, pc, pd), (ph, pg, pf), (ph, pa, pe)];
    let mut maps = Vec::with_capacity(3);
    for (i, &(qa, qc, qb)) in constraints.iter().enumerate() {
        let mut fitting = Vec::new();
        for reflect in [false, true] {
            let m = PlaneSimilarity::through(pa, qa, pc, qc, reflect)?;
            let img = m.apply_polygon(&abc);
            if img
                .vertices
                .iter()
                .all(|&w| point_in_polygon(w, &abc, SOLVE_TOL) != Location::Outside)
                && !interiors_overlap(&img, &ahgd, SOLVE_TOL)
            {
                fitting.push(m);
            }
        }
        let chosen = if fitting.len() == 1 {
            Some(fitting[0])
        } else {
            None
        };
        let m = chosen.ok_or_else(|| {
            Error::Invariant(format!(
                "{} orientations of S{} fit inside ABC outside AHGD",
                fitting.len(),
                i + 1
            ))
        })?;
        if m.apply(pb).dist(qb) > SOLVE_TOL {
            return Err(Error::Invariant(format!(
                "S{} sends B to {:?}, expected {:?}",
                i + 1,
                m.apply(pb),
                qb
            )));
        }
        maps.push(m);
    }
    let maps: [PlaneSimilarity; 3] = maps.try_into().expect("three maps");
    let ratios = [maps[0].ratio(), maps[1].ratio(), maps[2].ratio()];
    let expected = [a, c, c];
    for i in 0..3 {
        if (ratios[i] - expected[i]).abs() > SOLVE_TOL {
            return Err(Error::Invariant(format!(
                "S{} has ratio {}, expected {}",
                i + 1,
                ratios[i],
                expected[i]
            )));
        }
    }
    Ok(QuadrantSystem {
        a,
        maps,
        ratios,
        labels,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PointCloud {
    pub points: Vec<Point>,
    pub method: String,
    pub depth: Option<u32>,
    pub samples: Option<usize>,
    pub seed: Option<u64>,
}

fn grid_key(p: Point) -> (i64, i64) {
    (
        (p.x / CONTACT_GRID).round() as i64,
        (p.y / CONTACT_GRID).round() as i64,
    )
}

/// Sorts lexicographically and drops points sharing a grid cell.
fn dedup_sorted(mut points: Vec<Point>) -> Vec<Point> {
    points.sort_by_key(|p| grid_key(*p));
    points.dedup_by(|p, q| grid_key(*p) == grid_key(*q));
    points
}

/// Images of {A, C} under all words of the given length.
pub fn attractor(sys: &QuadrantSystem, depth: u32) -> Result<PointCloud> {
    if depth == 0 {
        return param("attractor depth must be at least 1");
    }
    if depth > MAX_ATTRACTOR_DEPTH {
        return Err(Error::Resource(format!(
            "attractor depth {depth} exceeds the cap of {MAX_ATTRACTOR_DEPTH}"
        )));
    }
    let mut points = vec![sys.labels.a, sys.labels.c];
    for _ in 0..depth {
        points = dedup_sorted(sys.apply_all(&points));
    }
    Ok(PointCloud {
        points,
        method: "refinement".into(),
        depth: Some(depth),
        samples: None,
        seed: None,
    })
}

/// Contacts of `s` in the closed upper-right quadrant.
pub fn quadrant_contacts(s: &GasketState) -> Vec<Point> {
    s.contacts()
        .into_iter()
        .filter(|p| p.x >= -CONTACT_GRID && p.y >= -CONTACT_GRID)
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SelfSimilarityReport {
    pub a: f64,
    pub iteration: u32,
    pub points: usize,
    pub distance: f64,
    pub tol: f64,
    /// Largest empty-polygon diameter at this iteration.
    pub max_piece_diameter: f64,
    pub convergence_bound: f64,
    pub bound: f64,
    pub passed: bool,
}

/// Hausdorff distance between the quadrant contacts Q and S1(Q) ∪ S2(Q) ∪
/// S3(Q), compared with `tol` plus the largest piece diameter of `s`.
pub fn verify_self_similarity(
    sys: &QuadrantSystem,
    s: &GasketState,
    tol: f64,
) -> Result<SelfSimilarityReport> {
    if s.k() < 8 || !s.k().is_multiple_of(2) {
        return param(format!(
            "self-similarity needs an even iteration of at least 8, got {}",
            s.k()
        ));
    }
    if !(tol >= 0.0 && tol.is_finite()) {
        return param(format!("tolerance must be nonnegative, got {tol}"));
    }
    let q = quadrant_contacts(s);
    let images = sys.apply_all(&q);
    let distance = cloud_distance(&q, &images)?;
    let max_piece_diameter = s.max_polygon_diameter();
    let bound = tol + max_piece_diameter;
    Ok(SelfSimilarityReport {
        a: sys.a,
        iteration: s.k(),
        points: q.len(),
        distance,
        tol,
        max_piece_diameter,
        convergence_bound: convergence_bound(s.a(), s.k() / 2)?,
        bound,
        passed: distance <= bound,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OpenSetReport {
    pub a: f64,
    pub samples: usize,
    pub seed: u64,
    /// Sample images that fell outside ABC.
    pub containment_failures: usize,
    /// Image triangles with a vertex outside ABC.
    pub triangles_outside: Vec<usize>,
    /// Pairs of image triangles whose interiors overlap.
    pub overlapping_pairs: Vec<(usize, usize)>,
    pub passed: bool,
}

/// True when the interiors of two convex polygons overlap by more than `tol`.
fn interiors_overlap(p: &Polygon, q: &Polygon, tol: f64) -> bool {
    for poly in [p, q] {
        for (u, v) in poly.edges() {
            let d = v - u;
            let axis = Point::new(-d.y, d.x) * (1.0 / d.norm());
            let proj = |r: &Polygon| {
                r.vertices
                    .iter()
                    .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), w| {
                        let t = axis.dot(*w);
                        (lo.min(t), hi.max(t))
                    })
            };
            let (plo, phi) = proj(p);
            let (qlo, qhi) = proj(q);
            if phi <= qlo + tol || qhi <= plo + tol {
                return false;
            }
        }
    }
    true
}

/// Seeded sampling of the open triangle ABC plus exact triangle tests.
pub fn verify_open_set(sys: &QuadrantSystem, n_samples: usize, seed: u64) -> Result<OpenSetReport> {
    if n_samples < MIN_OPEN_SET_SAMPLES {
        return param(format!(
            "open set check needs at least {MIN_OPEN_SET_SAMPLES} samples, got {n_samples}"
        ));
    }
    let tri = sys.triangle();
    let scale = polygon_area(&tri)?.sqrt();
    let tol = SOLVE_TOL * scale.max(1.0);
    let l = &sys.labels;
    let (u, v) = (l.b - l.a, l.c - l.a);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut containment_failures = 0;
    let mut drawn = 0;
    while drawn < n_samples {
        let (mut s, mut t): (f64, f64) = (rng.gen(), rng.gen());
        if s + t > 1.0 {
            s = 1.0 - s;
            t = 1.0 - t;
        }
        let p = l.a + u * s + v * t;
        if point_in_polygon(p, &tri, 0.0) != Location::Inside {
            continue;
        }
        drawn += 1;
        for m in &sys.maps {
            if point_in_polygon(m.apply(p), &tri, tol) == Location::Outside {
                containment_failures += 1;
            }
        }
    }
    let images: Vec<Polygon> = sys.maps.iter().map(|m| m.apply_polygon(&tri)).collect();
    let triangles_outside: Vec<usize> = images
        .iter()
        .enumerate()
        .filter(|(_, img)| {
            img.vertices
                .iter()
                .any(|&w| point_in_polygon(w, &tri, tol) == Location::Outside)
        })
        .map(|(i, _)| i)
        .collect();
    let mut overlapping_pairs = Vec::new();
    for i in 0..3 {
        for j in i + 1..3 {
            if interiors_overlap(&images[i], &images[j], tol) {
                overlapping_pairs.push((i, j));
            }
        }
    }
    let passed =
        containment_failures == 0 && triangles_outside.is_empty() && overlapping_pairs.is_empty();
    Ok(OpenSetReport {
        a: sys.a,
        samples: n_samples,
        seed,
        containment_failures,
        triangles_outside,
        overlapping_pairs,
        passed,
    })
}

/// Similarity dimension: the s with Σ c_i^s = 1.
pub fn moran_dimension(ratios: &[f64]) -> Result<f64> {
    if ratios.is_empty() {
        return param("moran_dimension needs at least one ratio");
    }
    if ratios.iter().any(|&c| !(c > 0.0 && c < 1.0)) {
        return param(format!("ratios must lie in (0, 1), got {ratios:?}"));
    }
    let f = |s: f64| ratios.iter().map(|c| c.powf(s)).sum::<f64>() - 1.0;
    let cmax = ratios.iter().cloned().fold(0.0, f64::max);
    // Every term is at most cmax^s, which is 1/m at this s.
    let (mut lo, mut hi) = (0.0f64, (ratios.len() as f64).ln() / -cmax.ln());
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}
