//! The classical Koch snowflake and its comparison with the gasket
//! construction at a = 1/√3.

use std::collections::HashMap;

use serde::Serialize;

use crate::error::{param, Error, Result};
use crate::geom::{point_in_polygon, signed_area_of, BBox, Location, Point, PointGrid, Polygon};
use crate::substitution::{run_to, AspectParam};

/// Deepest snowflake level [`snowflake`] will build (3·4^12 ≈ 5e7 vertices).
pub const MAX_SNOWFLAKE_LEVEL: u32 = 12;

/// Deepest level accepted by [`verify_equivalence`].
pub const MAX_EQUIVALENCE_LEVEL: u32 = 6;

const ANCHOR_TOL: f64 = 1e-12;

/// Points sampled in the interior of every snowflake segment.
const SAMPLES_PER_SEGMENT: usize = 8;

/// Starting triangle of the snowflake: equilateral and counterclockwise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SnowflakeAnchor {
    vertices: [Point; 3],
}

impl SnowflakeAnchor {
    pub fn new(vertices: [Point; 3]) -> Result<Self> {
        if !vertices.iter().all(|p| p.is_finite()) {
            return param("anchor vertices must be finite");
        }
        let sides = [
            vertices[0].dist(vertices[1]),
            vertices[1].dist(vertices[2]),
            vertices[2].dist(vertices[0]),
        ];
        let side = sides[0];
        if !(side > 0.0) {
            return param("anchor triangle is degenerate");
        }
        if sides.iter().any(|s| (s - side).abs() > ANCHOR_TOL * side) {
            return param(format!(
                "anchor triangle is not equilateral: sides {sides:?}"
            ));
        }
        if signed_area_of(&vertices) <= 0.0 {
            return param("anchor triangle must be counterclockwise");
        }
        Ok(SnowflakeAnchor { vertices })
    }

    pub fn vertices(&self) -> [Point; 3] {
        self.vertices
    }

    pub fn side(&self) -> f64 {
        self.vertices[0].dist(self.vertices[1])
    }

    /// Area enclosed by the limit snowflake: 8/5 of the triangle.
    pub fn limit_area(&self) -> f64 {
        let l = self.side();
        1.6 * 3f64.sqrt() / 4.0 * l * l
    }
}

/// Closed snowflake polygon at level k (first vertex not repeated).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SnowflakePolyline {
    pub level: u32,
    pub points: Vec<Point>,
}

impl SnowflakePolyline {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn segments(&self) -> impl Iterator<Item = (Point, Point)> + '_ {
        let n = self.points.len();
        (0..n).map(move |i| (self.points[i], self.points[(i + 1) % n]))
    }

    pub fn total_length(&self) -> f64 {
        self.segments().map(|(p, q)| p.dist(q)).sum()
    }

    pub fn signed_area(&self) -> f64 {
        signed_area_of(&self.points)
    }
}

fn refine(points: &[Point]) -> Vec<Point> {
    // Spikes go to whichever side increases the enclosed signed area:
    // right of travel on a counterclockwise curve.
    let sign = signed_area_of(points).signum();
    let h = 3f64.sqrt() / 6.0 * sign;
    let n = points.len();
    let mut out = Vec::with_capacity(4 * n);
    for i in 0..n {
        let (p, q) = (points[i], points[(i + 1) % n]);
        let d = q - p;
        out.push(p);
        out.push(p + d * (1.0 / 3.0));
        out.push(p + d * 0.5 + Point::new(d.y, -d.x) * h);
        out.push(p + d * (2.0 / 3.0));
    }
    out
}

/// Snowflake after k rounds of middle-third replacement (1 ≤ k ≤ 12).
pub fn snowflake(anchor: &SnowflakeAnchor, k: u32) -> Result<SnowflakePolyline> {
    if k == 0 {
        return param("snowflake level must be at least 1");
    }
    if k > MAX_SNOWFLAKE_LEVEL {
        return Err(Error::Resource(format!(
            "snowflake level {k} exceeds the cap of {MAX_SNOWFLAKE_LEVEL}"
        )));
    }
    let mut points = anchor.vertices.to_vec();
    for _ in 0..k {
        points = refine(&points);
    }
    Ok(SnowflakePolyline { level: k, points })
}

/// The triangle that places the snowflake in the gasket's frame, checked
/// against the iteration-2 contacts at a = 1/√3.
pub fn gasket_alignment() -> Result<SnowflakeAnchor> {
    let r3 = 3f64.sqrt();
    let anchor = SnowflakeAnchor::new([
        Point::new(0.0, 1.0),
        Point::new(-r3 / 2.0, -0.5),
        Point::new(r3 / 2.0, -0.5),
    ])?;
    let flake = snowflake(&anchor, 1)?;
    let contacts = run_to(AspectParam::koch(), 2)?.contacts();
    let grid = PointGrid::new(&flake.points).expect("nonempty");
    for c in contacts {
        let d = grid.nearest_distance(c);
        if d > 1e-12 {
            return Err(Error::Invariant(format!(
                "contact ({}, {}) is {d:e} from the nearest level-1 snowflake vertex",
                c.x, c.y
            )));
        }
    }
    Ok(anchor)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContactMatch {
    pub contact: usize,
    pub vertex: usize,
    pub distance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EquivalenceReport {
    pub a: f64,
    pub k: u32,
    pub iteration: u32,
    pub tol: f64,
    pub contacts: usize,
    pub snowflake_vertices: usize,
    pub matches: Vec<ContactMatch>,
    pub unmatched: usize,
    pub max_mismatch: f64,
    /// Largest distance between contact i and snowflake vertex 3i.
    pub parametric_max_mismatch: f64,
    pub samples: usize,
    pub samples_outside: usize,
    pub passed: bool,
}

/// Uniform grid of polygon bounding boxes for point-location queries.
struct PolygonIndex<'a> {
    polygons: &'a [Polygon],
    origin: Point,
    cell: f64,
    cells: HashMap<(i64, i64), Vec<u32>>,
}

impl<'a> PolygonIndex<'a> {
    fn new(polygons: &'a [Polygon], cell: f64) -> Self {
        let mut all = polygons[0].bbox();
        for p in polygons {
            let b = p.bbox();
            all.include(b.min);
            all.include(b.max);
        }
        let mut index = PolygonIndex {
            polygons,
            origin: all.min,
            cell,
            cells: HashMap::new(),
        };
        for (i, p) in polygons.iter().enumerate() {
            let b = p.bbox();
            let (x0, y0) = index.key(b.min);
            let (x1, y1) = index.key(b.max);
            for x in x0..=x1 {
                for y in y0..=y1 {
                    index.cells.entry((x, y)).or_default().push(i as u32);
                }
            }
        }
        index
    }

    fn key(&self, p: Point) -> (i64, i64) {
        (
            ((p.x - self.origin.x) / self.cell).floor() as i64,
            ((p.y - self.origin.y) / self.cell).floor() as i64,
        )
    }

    fn covers(&self, q: Point, tol: f64) -> bool {
        let probe = BBox { min: q, max: q }.expand(tol);
        let (x0, y0) = self.key(probe.min);
        let (x1, y1) = self.key(probe.max);
        for x in x0..=x1 {
            for y in y0..=y1 {
                let Some(ids) = self.cells.get(&(x, y)) else {
                    continue;
                };
                for &i in ids {
                    let poly = &self.polygons[i as usize];
                    if poly.bbox().expand(tol).contains(q)
                        && point_in_polygon(q, poly, tol) != Location::Outside
                    {
                        return true;
                    }
                }
            }
        }
        false
    }
}

/// Compares the gasket at iteration 2k with snowflake level k, at a = 1/√3.
pub fn verify_equivalence(k: u32, tol: f64) -> Result<EquivalenceReport> {
    verify_equivalence_at(AspectParam::koch(), k, tol)
}

/// [`verify_equivalence`] for an arbitrary parameter; it can only pass at
/// a = 1/√3.
pub fn verify_equivalence_at(a: AspectParam, k: u32, tol: f64) -> Result<EquivalenceReport> {
    if !(1..=MAX_EQUIVALENCE_LEVEL).contains(&k) {
        return param(format!(
            "equivalence level must lie in 1..={MAX_EQUIVALENCE_LEVEL}, got {k}"
        ));
    }
    if !(tol > 0.0 && tol.is_finite()) {
        return param(format!("tolerance must be positive, got {tol}"));
    }
    let anchor = gasket_alignment()?;
    let flake = snowflake(&anchor, k)?;
    let state = run_to(a, 2 * k)?;
    let contacts = state.contacts();

    let grid = PointGrid::new(&flake.points).expect("nonempty");
    let mut matches = Vec::new();
    let mut max_mismatch: f64 = 0.0;
    for (i, &c) in contacts.iter().enumerate() {
        let (v, d) = grid.nearest(c);
        max_mismatch = max_mismatch.max(d);
        if d <= tol {
            matches.push(ContactMatch {
                contact: i,
                vertex: v,
                distance: d,
            });
        }
    }
    let unmatched = contacts.len() - matches.len();

    let parametric_max_mismatch = if 3 * contacts.len() == flake.len() {
        contacts
            .iter()
            .enumerate()
            .map(|(i, c)| c.dist(flake.points[3 * i]))
            .fold(0.0, f64::max)
    } else {
        f64::INFINITY
    };

    let polygons: Vec<Polygon> = (0..state.polygons().len())
        .map(|i| state.polygon_vertices(i))
        .collect();
    let cell = state.max_polygon_diameter().max(tol);
    let index = PolygonIndex::new(&polygons, cell);
    let mut samples = 0;
    let mut samples_outside = 0;
    for (p, q) in flake.segments() {
        for j in 0..SAMPLES_PER_SEGMENT {
            let x = p.lerp(q, j as f64 / SAMPLES_PER_SEGMENT as f64);
            samples += 1;
            if !index.covers(x, tol) {
                samples_outside += 1;
            }
        }
    }

    let passed = unmatched == 0 && samples_outside == 0 && contacts.len() == 4usize.pow(k);
    Ok(EquivalenceReport {
        a: a.value(),
        k,
        iteration: 2 * k,
        tol,
        contacts: contacts.len(),
        snowflake_vertices: flake.len(),
        matches,
        unmatched,
        max_mismatch,
        parametric_max_mismatch,
        samples,
        samples_outside,
        passed,
    })
}
