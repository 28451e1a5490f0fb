//! Plane primitives: points, dihedral similarities, polygons and a few
//! predicates the construction and its checks rely on.
//!
//! Coordinates are in construction units, where the initial rhombus has
//! height 2. [`DEFAULT_TOL`] is the geometric tolerance used throughout.

use std::collections::HashMap;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default geometric tolerance in construction units.
pub const DEFAULT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const ORIGIN: Point = Point { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn dot(self, o: Point) -> f64 {
        self.x * o.x + self.y * o.y
    }

    /// z-component of the 3d cross product.
    pub fn cross(self, o: Point) -> f64 {
        self.x * o.y - self.y * o.x
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn dist(self, o: Point) -> f64 {
        (self - o).norm()
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn lerp(self, o: Point, t: f64) -> Point {
        self + (o - self) * t
    }
}

impl Add for Point {
    type Output = Point;
    fn add(self, o: Point) -> Point {
        Point::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Point {
    type Output = Point;
    fn sub(self, o: Point) -> Point {
        Point::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<f64> for Point {
    type Output = Point;
    fn mul(self, s: f64) -> Point {
        Point::new(self.x * s, self.y * s)
    }
}

impl Neg for Point {
    type Output = Point;
    fn neg(self) -> Point {
        Point::new(-self.x, -self.y)
    }
}

/// Element of the dihedral group of the square, stored symbolically.
///
/// Acts as: optionally swap the coordinates, then optionally negate each.
/// Composition is exact.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct Ortho {
    pub swap: bool,
    pub neg_x: bool,
    pub neg_y: bool,
}

impl Ortho {
    pub const IDENTITY: Ortho = Ortho::new(false, false, false);
    /// Reflection across the x axis: (x, y) -> (x, -y).
    pub const REFLECT_X: Ortho = Ortho::new(false, false, true);
    /// Reflection across the y axis: (x, y) -> (-x, y).
    pub const REFLECT_Y: Ortho = Ortho::new(false, true, false);
    pub const ROT180: Ortho = Ortho::new(false, true, true);
    /// Counterclockwise quarter turn: (x, y) -> (-y, x).
    pub const ROT90: Ortho = Ortho::new(true, true, false);
    pub const ROT270: Ortho = Ortho::new(true, false, true);
    /// Reflection across the diagonal y = x.
    pub const DIAGONAL: Ortho = Ortho::new(true, false, false);
    pub const ANTI_DIAGONAL: Ortho = Ortho::new(true, true, true);

    /// All eight elements in a fixed order.
    pub const ALL: [Ortho; 8] = [
        Ortho::IDENTITY,
        Ortho::REFLECT_X,
        Ortho::REFLECT_Y,
        Ortho::ROT180,
        Ortho::ROT90,
        Ortho::ROT270,
        Ortho::DIAGONAL,
        Ortho::ANTI_DIAGONAL,
    ];

    pub const fn new(swap: bool, neg_x: bool, neg_y: bool) -> Self {
        Ortho { swap, neg_x, neg_y }
    }

    pub fn apply(self, p: Point) -> Point {
        let (u, v) = if self.swap { (p.y, p.x) } else { (p.x, p.y) };
        Point::new(
            if self.neg_x { -u } else { u },
            if self.neg_y { -v } else { v },
        )
    }

    /// `self ∘ other`: apply `other` first.
    pub fn compose(self, other: Ortho) -> Ortho {
        // N1 S1 N2 S2 = N1 (S1 N2 S1) S1 S2, and conjugating a negation by
        // a swap exchanges its two flags.
        let (nx2, ny2) = if self.swap {
            (other.neg_y, other.neg_x)
        } else {
            (other.neg_x, other.neg_y)
        };
        Ortho {
            swap: self.swap ^ other.swap,
            neg_x: self.neg_x ^ nx2,
            neg_y: self.neg_y ^ ny2,
        }
    }

    pub fn inverse(self) -> Ortho {
        Ortho::ALL
            .into_iter()
            .find(|o| o.compose(self) == Ortho::IDENTITY)
            .expect("D4 is a group")
    }

    /// True when the determinant is -1.
    pub fn is_reflection(self) -> bool {
        self.swap ^ self.neg_x ^ self.neg_y
    }

    /// True when the map exchanges the horizontal and vertical directions.
    pub fn swaps_axes(self) -> bool {
        self.swap
    }
}

/// `p -> scale * ortho(p) + shift`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimilarityMap {
    pub scale: f64,
    pub ortho: Ortho,
    pub shift: Point,
}

impl Default for SimilarityMap {
    fn default() -> Self {
        SimilarityMap::IDENTITY
    }
}

impl SimilarityMap {
    pub const IDENTITY: SimilarityMap = SimilarityMap {
        scale: 1.0,
        ortho: Ortho::IDENTITY,
        shift: Point::ORIGIN,
    };

    pub fn new(scale: f64, ortho: Ortho, shift: Point) -> Result<Self> {
        if !(scale > 0.0 && scale.is_finite()) || !shift.is_finite() {
            return Err(Error::Parameter(format!(
                "similarity needs a positive finite scale and finite shift (scale = {scale})"
            )));
        }
        Ok(SimilarityMap {
            scale,
            ortho,
            shift,
        })
    }

    pub fn scaling(scale: f64) -> Self {
        SimilarityMap {
            scale,
            ..Self::IDENTITY
        }
    }

    pub fn translation(shift: Point) -> Self {
        SimilarityMap {
            shift,
            ..Self::IDENTITY
        }
    }

    pub fn orthogonal(ortho: Ortho) -> Self {
        SimilarityMap {
            ortho,
            ..Self::IDENTITY
        }
    }

    pub fn apply(&self, p: Point) -> Point {
        self.ortho.apply(p) * self.scale + self.shift
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &SimilarityMap) -> SimilarityMap {
        SimilarityMap {
            scale: self.scale * other.scale,
            ortho: self.ortho.compose(other.ortho),
            shift: self.apply(other.shift),
        }
    }

    pub fn inverse(&self) -> SimilarityMap {
        let inv = self.ortho.inverse();
        let scale = 1.0 / self.scale;
        SimilarityMap {
            scale,
            ortho: inv,
            shift: -(inv.apply(self.shift) * scale),
        }
    }

    /// Maps every vertex; the result is re-oriented counterclockwise when
    /// the map is a reflection.
    pub fn apply_polygon(&self, poly: &Polygon) -> Polygon {
        let mut vertices: Vec<Point> = poly.vertices.iter().map(|&p| self.apply(p)).collect();
        if self.ortho.is_reflection() {
            vertices.reverse();
        }
        Polygon { vertices }
    }

    /// Maps every vertex keeping the vertex order, so orientation flips
    /// under reflections.
    pub fn apply_polygon_raw(&self, poly: &Polygon) -> Polygon {
        Polygon {
            vertices: poly.vertices.iter().map(|&p| self.apply(p)).collect(),
        }
    }
}

/// Axis-aligned bounding box.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BBox {
    pub min: Point,
    pub max: Point,
}

impl BBox {
    pub fn of(points: &[Point]) -> Option<BBox> {
        let first = *points.first()?;
        let mut b = BBox {
            min: first,
            max: first,
        };
        for &p in &points[1..] {
            b.include(p);
        }
        Some(b)
    }

    pub fn include(&mut self, p: Point) {
        self.min.x = self.min.x.min(p.x);
        self.min.y = self.min.y.min(p.y);
        self.max.x = self.max.x.max(p.x);
        self.max.y = self.max.y.max(p.y);
    }

    pub fn expand(&self, by: f64) -> BBox {
        BBox {
            min: Point::new(self.min.x - by, self.min.y - by),
            max: Point::new(self.max.x + by, self.max.y + by),
        }
    }

    pub fn overlaps(&self, o: &BBox) -> bool {
        self.min.x <= o.max.x
            && o.min.x <= self.max.x
            && self.min.y <= o.max.y
            && o.min.y <= self.max.y
    }

    pub fn contains(&self, p: Point) -> bool {
        p.x >= self.min.x && p.x <= self.max.x && p.y >= self.min.y && p.y <= self.max.y
    }

    pub fn width(&self) -> f64 {
        self.max.x - self.min.x
    }

    pub fn height(&self) -> f64 {
        self.max.y - self.min.y
    }

    /// Euclidean distance from `p` to the box (0 inside).
    pub fn distance_to(&self, p: Point) -> f64 {
        let dx = (self.min.x - p.x).max(0.0).max(p.x - self.max.x);
        let dy = (self.min.y - p.y).max(0.0).max(p.y - self.max.y);
        dx.hypot(dy)
    }
}

/// Simple polygon, implicitly closed. Counterclockwise unless built
/// otherwise on purpose (orientation tests).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Polygon {
    pub vertices: Vec<Point>,
}

impl Polygon {
    /// Validates vertex count, finiteness and distinct consecutive vertices.
    pub fn new(vertices: Vec<Point>) -> Result<Self> {
        if vertices.len() < 3 {
            return Err(Error::DegenerateGeometry(format!(
                "polygon needs at least 3 vertices, got {}",
                vertices.len()
            )));
        }
        if let Some(p) = vertices.iter().find(|p| !p.is_finite()) {
            return Err(Error::DegenerateGeometry(format!(
                "non-finite vertex {p:?}"
            )));
        }
        let n = vertices.len();
        for i in 0..n {
            let (p, q) = (vertices[i], vertices[(i + 1) % n]);
            if p.dist(q) <= DEFAULT_TOL * 1e-3 {
                return Err(Error::DegenerateGeometry(format!(
                    "consecutive vertices {i} and {} coincide",
                    (i + 1) % n
                )));
            }
        }
        Ok(Polygon { vertices })
    }

    /// Like [`Polygon::new`] but reorders the vertices counterclockwise.
    pub fn new_ccw(mut vertices: Vec<Point>) -> Result<Self> {
        if shoelace(&vertices) < 0.0 {
            vertices.reverse();
        }
        Polygon::new(vertices)
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn edges(&self) -> impl Iterator<Item = (Point, Point)> + '_ {
        let n = self.vertices.len();
        (0..n).map(move |i| (self.vertices[i], self.vertices[(i + 1) % n]))
    }

    /// Signed shoelace area without the degeneracy check.
    pub fn signed_area(&self) -> f64 {
        shoelace(&self.vertices)
    }

    pub fn bbox(&self) -> BBox {
        BBox::of(&self.vertices).expect("polygon has vertices")
    }

    /// Mean of the vertices.
    pub fn vertex_centroid(&self) -> Point {
        let n = self.vertices.len() as f64;
        let s = self.vertices.iter().fold(Point::ORIGIN, |acc, &p| acc + p);
        s * (1.0 / n)
    }
}

fn shoelace(points: &[Point]) -> f64 {
    let n = points.len();
    if n < 3 {
        return 0.0;
    }
    let mut twice = 0.0;
    for i in 0..n {
        twice += points[i].cross(points[(i + 1) % n]);
    }
    twice * 0.5
}

/// Signed area of a closed point sequence (counterclockwise positive).
pub fn signed_area_of(points: &[Point]) -> f64 {
    shoelace(points)
}

/// Signed shoelace area. Fails when the polygon is degenerate
/// (|area| below the tolerance scaled by the polygon size).
pub fn polygon_area(p: &Polygon) -> Result<f64> {
    let area = p.signed_area();
    let d = polygon_diameter(p);
    if area.abs() <= DEFAULT_TOL * d * d {
        return Err(Error::DegenerateGeometry(format!(
            "polygon area {area:e} is below tolerance"
        )));
    }
    Ok(area)
}

/// Maximum pairwise vertex distance; for a polygon this is the diameter of
/// the filled set.
pub fn polygon_diameter(p: &Polygon) -> f64 {
    let v = &p.vertices;
    let mut best: f64 = 0.0;
    for i in 0..v.len() {
        for j in i + 1..v.len() {
            best = best.max(v[i].dist(v[j]));
        }
    }
    best
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Location {
    Inside,
    Boundary,
    Outside,
}

/// Distance from `p` to the segment `a`-`b`.
pub fn point_segment_distance(p: Point, a: Point, b: Point) -> f64 {
    let ab = b - a;
    let len2 = ab.dot(ab);
    if len2 == 0.0 {
        return p.dist(a);
    }
    let t = ((p - a).dot(ab) / len2).clamp(0.0, 1.0);
    p.dist(a + ab * t)
}

fn orient(a: Point, b: Point, c: Point) -> f64 {
    (b - a).cross(c - a)
}

/// True when the closed segments properly cross or touch.
pub fn segments_intersect(a: Point, b: Point, c: Point, d: Point) -> bool {
    let d1 = orient(c, d, a);
    let d2 = orient(c, d, b);
    let d3 = orient(a, b, c);
    let d4 = orient(a, b, d);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
    {
        return true;
    }
    (d1 == 0.0 && point_segment_distance(a, c, d) == 0.0)
        || (d2 == 0.0 && point_segment_distance(b, c, d) == 0.0)
        || (d3 == 0.0 && point_segment_distance(c, a, b) == 0.0)
        || (d4 == 0.0 && point_segment_distance(d, a, b) == 0.0)
}

/// Minimum distance between the closed segments `a`-`b` and `c`-`d`.
pub fn segment_distance(a: Point, b: Point, c: Point, d: Point) -> f64 {
    if segments_intersect(a, b, c, d) {
        return 0.0;
    }
    point_segment_distance(a, c, d)
        .min(point_segment_distance(b, c, d))
        .min(point_segment_distance(c, a, b))
        .min(point_segment_distance(d, a, b))
}

/// Winding-number classification with a boundary band of width `tol`.
pub fn point_in_polygon(q: Point, p: &Polygon, tol: f64) -> Location {
    if p.edges()
        .any(|(a, b)| point_segment_distance(q, a, b) <= tol)
    {
        return Location::Boundary;
    }
    let mut winding = 0i32;
    for (a, b) in p.edges() {
        if a.y <= q.y {
            if b.y > q.y && orient(a, b, q) > 0.0 {
                winding += 1;
            }
        } else if b.y <= q.y && orient(a, b, q) < 0.0 {
            winding -= 1;
        }
    }
    if winding != 0 {
        Location::Inside
    } else {
        Location::Outside
    }
}

/// Uniform-grid index over a point set for nearest-neighbour queries.
pub struct PointGrid<'a> {
    points: &'a [Point],
    bbox: BBox,
    cell: f64,
    cells: HashMap<(i64, i64), Vec<u32>>,
}

impl<'a> PointGrid<'a> {
    pub fn new(points: &'a [Point]) -> Option<Self> {
        let bbox = BBox::of(points)?;
        let extent = bbox.width().max(bbox.height());
        let cell = if extent > 0.0 {
            extent / (points.len() as f64).sqrt().max(1.0)
        } else {
            1.0
        };
        let mut cells: HashMap<(i64, i64), Vec<u32>> = HashMap::new();
        for (i, &p) in points.iter().enumerate() {
            cells
                .entry(Self::key(bbox, cell, p))
                .or_default()
                .push(i as u32);
        }
        Some(PointGrid {
            points,
            bbox,
            cell,
            cells,
        })
    }

    fn key(bbox: BBox, cell: f64, p: Point) -> (i64, i64) {
        (
            ((p.x - bbox.min.x) / cell).floor() as i64,
            ((p.y - bbox.min.y) / cell).floor() as i64,
        )
    }

    /// Distance from `q` to the nearest indexed point.
    pub fn nearest_distance(&self, q: Point) -> f64 {
        self.nearest(q).1
    }

    /// Index of and distance to the nearest indexed point (lowest index
    /// on ties).
    pub fn nearest(&self, q: Point) -> (usize, f64) {
        let (cx, cy) = Self::key(self.bbox, self.cell, q);
        let span_x = (self.bbox.width() / self.cell).ceil() as i64 + 1;
        let span_y = (self.bbox.height() / self.cell).ceil() as i64 + 1;
        let r0 = ((self.bbox.distance_to(q) / self.cell).floor() as i64 - 1).max(0);
        let r_max = r0 + span_x.max(span_y) + 2;
        let mut best = (usize::MAX, f64::INFINITY);
        let mut r = r0;
        while r <= r_max {
            for dx in -r..=r {
                for dy in -r..=r {
                    if dx.abs() != r && dy.abs() != r {
                        continue;
                    }
                    if let Some(ids) = self.cells.get(&(cx + dx, cy + dy)) {
                        for &i in ids {
                            let d = q.dist(self.points[i as usize]);
                            if d < best.1 || (d == best.1 && (i as usize) < best.0) {
                                best = (i as usize, d);
                            }
                        }
                    }
                }
            }
            // Everything in rings beyond r is at least r cells away.
            if best.1 <= r as f64 * self.cell {
                break;
            }
            r += 1;
        }
        best
    }
}

/// Symmetric Hausdorff distance between two finite point sets.
pub fn cloud_distance(a: &[Point], b: &[Point]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::Parameter(
            "cloud_distance needs two nonempty point sets".into(),
        ));
    }
    Ok(directed_distance(a, b).max(directed_distance(b, a)))
}

/// `sup_{p in from} d(p, to)`.
pub fn directed_distance(from: &[Point], to: &[Point]) -> f64 {
    let grid = PointGrid::new(to).expect("nonempty");
    from.iter()
        .map(|&p| grid.nearest_distance(p))
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_square() -> Polygon {
        Polygon::new(vec![
            Point::new(0.0, 0.0),
            Point::new(1.0, 0.0),
            Point::new(1.0, 1.0),
            Point::new(0.0, 1.0),
        ])
        .unwrap()
    }

    #[test]
    fn similarity_examples() {
        let p = Point::new(1.0, 2.0);
        assert_eq!(SimilarityMap::IDENTITY.apply(p), p);
        assert_eq!(
            SimilarityMap::scaling(2.0).apply(Point::new(1.0, 0.0)),
            Point::new(2.0, 0.0)
        );
        assert_eq!(
            SimilarityMap::orthogonal(Ortho::REFLECT_X).apply(p),
            Point::new(1.0, -2.0)
        );
        assert_eq!(
            SimilarityMap::orthogonal(Ortho::ROT90).apply(Point::new(1.0, 0.0)),
            Point::new(0.0, 1.0)
        );
    }

    #[test]
    fn ortho_group_laws() {
        let probe = Point::new(1.0, 2.0);
        for g in Ortho::ALL {
            for h in Ortho::ALL {
                assert_eq!(g.compose(h).apply(probe), g.apply(h.apply(probe)));
                assert_eq!(
                    g.compose(h).is_reflection(),
                    g.is_reflection() ^ h.is_reflection()
                );
            }
            assert_eq!(g.compose(g.inverse()), Ortho::IDENTITY);
        }
        let distinct: std::collections::HashSet<_> = Ortho::ALL
            .iter()
            .map(|g| g.apply(probe).x.to_bits() as u128 * 31 + g.apply(probe).y.to_bits() as u128)
            .collect();
        assert_eq!(distinct.len(), 8);
    }

    #[test]
    fn reflection_flips_orientation() {
        let sq = unit_square();
        for g in Ortho::ALL {
            let raw = SimilarityMap::orthogonal(g).apply_polygon_raw(&sq);
            assert_eq!(raw.signed_area() < 0.0, g.is_reflection());
            let fixed = SimilarityMap::orthogonal(g).apply_polygon(&sq);
            assert!(fixed.signed_area() > 0.0);
        }
    }

    #[test]
    fn inverse_roundtrip() {
        let t = SimilarityMap::new(2.5, Ortho::ROT270, Point::new(-1.0, 3.0)).unwrap();
        let p = Point::new(0.3, -0.7);
        let back = t.inverse().apply(t.apply(p));
        assert!(back.dist(p) < 1e-15);
    }

    #[test]
    fn areas() {
        assert_eq!(polygon_area(&unit_square()).unwrap(), 1.0);
        let cw = Polygon::new(unit_square().vertices.into_iter().rev().collect()).unwrap();
        assert_eq!(polygon_area(&cw).unwrap(), -1.0);
        let rhombus = Polygon::new(vec![
            Point::new(2.0, 0.0),
            Point::new(0.0, 1.0),
            Point::new(-2.0, 0.0),
            Point::new(0.0, -1.0),
        ])
        .unwrap();
        assert_eq!(polygon_area(&rhombus).unwrap(), 4.0);
        let flat = Polygon::new(vec![
            Point::new(0.0, 0.0),
            Point::new(1.0, 0.0),
            Point::new(2.0, 0.0),
        ])
        .unwrap();
        assert!(matches!(
            polygon_area(&flat),
            Err(Error::DegenerateGeometry(_))
        ));
    }

    #[test]
    fn polygon_validation() {
        assert!(Polygon::new(vec![Point::ORIGIN, Point::new(1.0, 0.0)]).is_err());
        assert!(Polygon::new(vec![Point::ORIGIN, Point::ORIGIN, Point::new(1.0, 1.0)]).is_err());
        assert!(Polygon::new(vec![
            Point::ORIGIN,
            Point::new(f64::NAN, 0.0),
            Point::new(1.0, 1.0)
        ])
        .is_err());
    }

    #[test]
    fn diameter_of_square() {
        assert!((polygon_diameter(&unit_square()) - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn point_location() {
        let sq = SimilarityMap::translation(Point::new(-0.5, -0.5)).apply_polygon(&unit_square());
        assert_eq!(point_in_polygon(Point::ORIGIN, &sq, 1e-9), Location::Inside);
        assert_eq!(
            point_in_polygon(Point::new(0.5, 0.5), &sq, 1e-9),
            Location::Boundary
        );
        assert_eq!(
            point_in_polygon(Point::new(10.0, 10.0), &sq, 1e-9),
            Location::Outside
        );
        assert_eq!(
            point_in_polygon(Point::new(0.5 + 1e-10, 0.0), &sq, 1e-9),
            Location::Boundary
        );
    }

    #[test]
    fn point_location_nonconvex() {
        // Dart with its reflex vertex at the origin.
        let dart = Polygon::new(vec![
            Point::new(0.0, -1.0),
            Point::new(1.0, 0.0),
            Point::new(0.0, -0.3),
            Point::new(-1.0, 0.0),
        ])
        .unwrap();
        assert_eq!(
            point_in_polygon(Point::new(0.0, -0.1), &dart, 1e-9),
            Location::Outside
        );
        assert_eq!(
            point_in_polygon(Point::new(0.0, -0.5), &dart, 1e-9),
            Location::Inside
        );
        assert_eq!(
            point_in_polygon(Point::new(0.6, -0.2), &dart, 1e-9),
            Location::Inside
        );
    }

    #[test]
    fn cloud_distance_examples() {
        let a = vec![Point::new(0.0, 0.0), Point::new(1.0, 0.0)];
        assert_eq!(cloud_distance(&a, &a).unwrap(), 0.0);
        assert_eq!(
            cloud_distance(&[Point::ORIGIN], &[Point::new(3.0, 4.0)]).unwrap(),
            5.0
        );
        assert_eq!(cloud_distance(&a, &[Point::ORIGIN]).unwrap(), 1.0);
        assert!(cloud_distance(&[], &a).is_err());
    }

    #[test]
    fn segment_distances() {
        let d = segment_distance(
            Point::new(0.0, 0.0),
            Point::new(1.0, 0.0),
            Point::new(0.0, 1.0),
            Point::new(1.0, 1.0),
        );
        assert_eq!(d, 1.0);
        let d = segment_distance(
            Point::new(0.0, 0.0),
            Point::new(1.0, 1.0),
            Point::new(0.0, 1.0),
            Point::new(1.0, 0.0),
        );
        assert_eq!(d, 0.0);
    }
}
