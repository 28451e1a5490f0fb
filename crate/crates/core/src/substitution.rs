//! The gasket hierarchy: empty polygons, inserted rhombi and contact points.
//!
//! Every empty polygon is a similar copy of one of two canonical templates,
//! the *wedge* (a right triangle) and the *dart* (a non-convex
//! quadrilateral). Templates live in a frame where the next rhombus to be
//! inserted is vertical (edge slopes ±1/a) and are normalised to height 1.
//! A polygon is stored as its template kind plus a [`SimilarityMap`] whose
//! orthogonal part is an element of D4; maps that exchange the axes place a
//! template in the opposite phase, where the next rhombus is horizontal.
//!
//! Inserting the rhombus into a template splits it into two children,
//! themselves template copies. The split rules are derived once per
//! parameter value in closed form, so generating iteration k costs O(2^k)
//! with no geometric search.

use std::collections::BTreeMap;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{param, Error, Result};
use crate::geom::Ortho;
use crate::geom::{polygon_diameter, Point, Polygon, SimilarityMap, DEFAULT_TOL};

/// Highest iteration [`step`] will produce (2^26 ≈ 6.7e7 polygons).
pub const MAX_ITERATION: u32 = 26;

/// Grid used to identify contact points that were produced twice.
pub const CONTACT_GRID: f64 = 1e-12;

/// Construction parameter a ∈ (0, 1): the slope of horizontal rhombus edges.
///
/// Values extremely close to 1 cannot be stored as a plain `f64`, so the
/// parameter may instead be given by its complement δ = 1 − a. Analytic
/// quantities then use δ directly.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AspectParam {
    value: f64,
    complement: Option<f64>,
}

impl AspectParam {
    pub fn new(a: f64) -> Result<Self> {
        if !(a > 0.0 && a < 1.0) {
            return param(format!("aspect parameter must lie in (0, 1), got {a}"));
        }
        Ok(AspectParam {
            value: a,
            complement: None,
        })
    }

    /// a = 1 − δ with 0 < δ < 1/2.
    pub fn from_complement(delta: f64) -> Result<Self> {
        if !(delta > 0.0 && delta < 0.5) {
            return param(format!("complement must lie in (0, 1/2), got {delta}"));
        }
        Ok(AspectParam {
            value: 1.0 - delta,
            complement: Some(delta),
        })
    }

    /// a = 1/√3, where the construction yields the Koch snowflake.
    pub fn koch() -> Self {
        AspectParam {
            value: 1.0 / 3f64.sqrt(),
            complement: None,
        }
    }

    /// Nearest `f64` to a (inexact for tiny complements).
    pub fn value(&self) -> f64 {
        self.value
    }

    /// The stored complement, if the parameter was built from one.
    pub fn complement_repr(&self) -> Option<f64> {
        self.complement
    }

    /// 1 − a.
    pub fn complement(&self) -> f64 {
        self.complement.unwrap_or(1.0 - self.value)
    }

    /// ln a, stable near a = 1.
    pub fn ln(&self) -> f64 {
        match self.complement {
            Some(d) => (-d).ln_1p(),
            None => self.value.ln(),
        }
    }

    /// (1 − a²)/2, the ratio of the two smaller self-similar pieces.
    pub fn child_ratio(&self) -> f64 {
        match self.complement {
            Some(d) => d * (2.0 - d) / 2.0,
            None => (1.0 - self.value) * (1.0 + self.value) / 2.0,
        }
    }

    /// The value as a plain float, failing if it is not strictly below 1.
    pub fn geometric(&self) -> Result<f64> {
        let exact = match self.complement {
            Some(d) => ((1.0 - self.value) - d).abs() <= 1e-6 * d,
            None => true,
        };
        if self.value < 1.0 && exact {
            Ok(self.value)
        } else {
            param(format!(
                "a = 1 - {:e} is not representable as a double; geometry needs a < 1",
                self.complement()
            ))
        }
    }
}

/// Orientation of a rhombus: horizontal ones have edge slopes ±a, vertical
/// ones ±1/a.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Phase {
    Horizontal,
    Vertical,
}

impl Phase {
    pub fn flipped(self) -> Phase {
        match self {
            Phase::Horizontal => Phase::Vertical,
            Phase::Vertical => Phase::Horizontal,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rhombus {
    pub center: Point,
    pub phase: Phase,
    /// Half of the horizontal diagonal.
    pub half_width: f64,
    /// Half of the vertical diagonal.
    pub half_height: f64,
}

impl Rhombus {
    /// Right, top, left, bottom (counterclockwise).
    pub fn vertices(&self) -> [Point; 4] {
        let c = self.center;
        [
            Point::new(c.x + self.half_width, c.y),
            Point::new(c.x, c.y + self.half_height),
            Point::new(c.x - self.half_width, c.y),
            Point::new(c.x, c.y - self.half_height),
        ]
    }

    pub fn polygon(&self) -> Polygon {
        Polygon {
            vertices: self.vertices().to_vec(),
        }
    }

    pub fn area(&self) -> f64 {
        2.0 * self.half_width * self.half_height
    }

    pub fn transformed(&self, t: &SimilarityMap) -> Rhombus {
        let (hw, hh) = (self.half_width * t.scale, self.half_height * t.scale);
        let swap = t.ortho.swaps_axes();
        Rhombus {
            center: t.apply(self.center),
            phase: if swap {
                self.phase.flipped()
            } else {
                self.phase
            },
            half_width: if swap { hh } else { hw },
            half_height: if swap { hw } else { hh },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PolygonKind {
    Wedge,
    Dart,
}

/// How one child of a template sits inside the template frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChildRule {
    pub kind: PolygonKind,
    pub local: SimilarityMap,
    /// True when the child's second template contact comes first along the
    /// parent's traversal.
    pub reversed: bool,
}

/// Canonical wedge or dart of height 1 together with its split rule.
#[derive(Debug, Clone)]
pub struct Template {
    pub kind: PolygonKind,
    pub polygon: Polygon,
    pub contacts: [Point; 2],
    /// The largest vertical rhombus inside the template.
    pub rhombus: Rhombus,
    /// Where that rhombus touches a horizontal one.
    pub new_contact: Point,
    /// Child covering contacts[0] → new_contact, then new_contact → contacts[1].
    pub children: [ChildRule; 2],
    pub diameter: f64,
    pub area: f64,
}

/// Both templates for one parameter value.
#[derive(Debug, Clone)]
pub struct Templates {
    a: f64,
    wedge: Template,
    dart: Template,
}

/// Closed-form template geometry before the child maps are fitted.
struct RawTemplate {
    kind: PolygonKind,
    vertices: Vec<Point>,
    contacts: [Point; 2],
    rhombus: Rhombus,
    new_contact: Point,
    children: [(PolygonKind, Vec<Point>); 2],
}

fn raw_wedge(a: f64) -> RawTemplate {
    let b = (1.0 - a * a) / 2.0;
    // Right angle at p; q is the top contact, t the far corner.
    let p = Point::new(-a, 0.0);
    let q = Point::new(0.0, 1.0);
    let t = Point::new(-(1.0 + a * a) / (2.0 * a), b);
    let hw = a * b;
    let rhombus = Rhombus {
        center: Point::new(-a, b),
        phase: Phase::Vertical,
        half_width: hw,
        half_height: b,
    };
    let [right, top, left, _bottom] = rhombus.vertices();
    RawTemplate {
        kind: PolygonKind::Wedge,
        vertices: vec![p, q, t],
        contacts: [q, p],
        rhombus,
        new_contact: top,
        children: [
            (PolygonKind::Wedge, vec![top, right, q]),
            (PolygonKind::Dart, vec![t, left, p, top]),
        ],
    }
}

fn raw_dart(a: f64) -> RawTemplate {
    let b = (1.0 - a * a) / 2.0;
    let tip = Point::new(0.0, -1.0);
    let reflex = Point::new(0.0, -a * a);
    let right = Point::new(a, 0.0);
    let left = Point::new(-a, 0.0);
    let rhombus = Rhombus {
        center: Point::new(0.0, -(1.0 + a * a) / 2.0),
        phase: Phase::Vertical,
        half_width: a * b,
        half_height: b,
    };
    let [r_right, _top, r_left, _bottom] = rhombus.vertices();
    RawTemplate {
        kind: PolygonKind::Dart,
        vertices: vec![tip, right, reflex, left],
        contacts: [right, left],
        rhombus,
        new_contact: reflex,
        children: [
            (PolygonKind::Wedge, vec![reflex, r_right, right]),
            (PolygonKind::Wedge, vec![reflex, left, r_left]),
        ],
    }
}

/// Finds a similarity with D4 orthogonal part mapping the vertex set of
/// `template` onto `target` (same number of vertices). Candidates are tried
/// in [`Ortho::ALL`] order and the first fit is returned.
pub fn fit_placement(template: &Polygon, target: &[Point]) -> Option<SimilarityMap> {
    if template.len() != target.len() || target.len() < 3 {
        return None;
    }
    let target_poly = Polygon {
        vertices: target.to_vec(),
    };
    let diam = polygon_diameter(&target_poly);
    let scale = diam / polygon_diameter(template);
    let tc = target_poly.vertex_centroid();
    let sc = template.vertex_centroid();
    let tol = 1e-9 * diam;
    Ortho::ALL.into_iter().find_map(|g| {
        let shift = tc - g.apply(sc) * scale;
        let map = SimilarityMap {
            scale,
            ortho: g,
            shift,
        };
        let ok = template
            .vertices
            .iter()
            .all(|&v| target.iter().any(|&w| map.apply(v).dist(w) <= tol));
        ok.then_some(map)
    })
}

impl Template {
    fn build(raw: RawTemplate, kinds: &BTreeMap<u8, Polygon>) -> Result<Template> {
        let polygon = Polygon::new_ccw(raw.vertices)?;
        let segments = [
            (raw.contacts[0], raw.new_contact),
            (raw.new_contact, raw.contacts[1]),
        ];
        let mut children = Vec::with_capacity(2);
        for ((kind, verts), (start, end)) in raw.children.into_iter().zip(segments) {
            let child_template = &kinds[&(kind as u8)];
            let local = fit_placement(child_template, &verts).ok_or_else(|| {
                Error::Invariant(format!(
                    "no D4 similarity places a {kind:?} onto its child region"
                ))
            })?;
            let contact0 = child_template.vertices[CONTACT_SLOTS[kind as usize][0]];
            let mapped = local.apply(contact0);
            let scale = local.scale;
            let reversed = if mapped.dist(start) <= 1e-9 * scale {
                false
            } else if mapped.dist(end) <= 1e-9 * scale {
                true
            } else {
                return Err(Error::Invariant(format!(
                    "child {kind:?} does not carry the expected contacts"
                )));
            };
            children.push(ChildRule {
                kind,
                local,
                reversed,
            });
        }
        let diameter = polygon_diameter(&polygon);
        let area = polygon.signed_area();
        Ok(Template {
            kind: raw.kind,
            polygon,
            contacts: raw.contacts,
            rhombus: raw.rhombus,
            new_contact: raw.new_contact,
            children: [children[0], children[1]],
            diameter,
            area,
        })
    }
}

/// Index of the two contacts in each template's ccw vertex list, by kind.
/// Wedge ccw order is (p, q, t) with contacts (q, p); dart ccw order is
/// (tip, right, reflex, left) with contacts (right, left).
const CONTACT_SLOTS: [[usize; 2]; 2] = [[1, 0], [1, 3]];

impl Templates {
    pub fn new(a: f64) -> Result<Templates> {
        if !(a > 0.0 && a < 1.0) {
            return param(format!("aspect parameter must lie in (0, 1), got {a}"));
        }
        let (w, d) = (raw_wedge(a), raw_dart(a));
        let mut kinds = BTreeMap::new();
        kinds.insert(
            PolygonKind::Wedge as u8,
            Polygon::new_ccw(w.vertices.clone())?,
        );
        kinds.insert(
            PolygonKind::Dart as u8,
            Polygon::new_ccw(d.vertices.clone())?,
        );
        for (kind, slots) in [
            (PolygonKind::Wedge, CONTACT_SLOTS[0]),
            (PolygonKind::Dart, CONTACT_SLOTS[1]),
        ] {
            let raw = if kind == PolygonKind::Wedge { &w } else { &d };
            let poly = &kinds[&(kind as u8)];
            if poly.vertices[slots[0]] != raw.contacts[0]
                || poly.vertices[slots[1]] != raw.contacts[1]
            {
                return Err(Error::Invariant(format!(
                    "{kind:?} contact slots out of sync"
                )));
            }
        }
        let wedge = Template::build(w, &kinds)?;
        let dart = Template::build(d, &kinds)?;
        Ok(Templates { a, wedge, dart })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn get(&self, kind: PolygonKind) -> &Template {
        match kind {
            PolygonKind::Wedge => &self.wedge,
            PolygonKind::Dart => &self.dart,
        }
    }

    pub fn wedge(&self) -> &Template {
        &self.wedge
    }

    pub fn dart(&self) -> &Template {
        &self.dart
    }
}

/// A not-yet-filled region: a template placed in the plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EmptyPolygon {
    pub kind: PolygonKind,
    pub placement: SimilarityMap,
    /// True when traversal enters at the template's second contact.
    pub reversed: bool,
    pub entry: Point,
    pub exit: Point,
}

impl EmptyPolygon {
    /// Orientation of the rhombus that will be inserted next.
    pub fn phase(&self) -> Phase {
        if self.placement.ortho.swaps_axes() {
            Phase::Horizontal
        } else {
            Phase::Vertical
        }
    }

    /// Height relative to the canonical template (1 for the iteration-2
    /// wedges).
    pub fn height(&self) -> f64 {
        self.placement.scale
    }

    pub fn vertices(&self, templates: &Templates) -> Polygon {
        self.placement
            .apply_polygon(&templates.get(self.kind).polygon)
    }

    pub fn diameter(&self, templates: &Templates) -> f64 {
        self.placement.scale * templates.get(self.kind).diameter
    }

    pub fn area(&self, templates: &Templates) -> f64 {
        self.placement.scale * self.placement.scale * templates.get(self.kind).area
    }
}

/// Result of filling one empty polygon.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Inscription {
    pub rhombus: Rhombus,
    pub contact: Point,
    /// In traversal order: (entry → contact), (contact → exit).
    pub children: [EmptyPolygon; 2],
}

/// Places the largest rhombus of the polygon's phase and returns the two
/// resulting empty polygons in curve order.
pub fn inscribe_rhombus(p: &EmptyPolygon, templates: &Templates) -> Inscription {
    let tpl = templates.get(p.kind);
    let t = &p.placement;
    let rhombus = tpl.rhombus.transformed(t);
    let contact = t.apply(tpl.new_contact);
    let make = |rule: &ChildRule, reversed: bool, entry: Point, exit: Point| EmptyPolygon {
        kind: rule.kind,
        placement: t.compose(&rule.local),
        reversed,
        entry,
        exit,
    };
    let [r0, r1] = &tpl.children;
    let children = if p.reversed {
        [
            make(r1, !r1.reversed, p.entry, contact),
            make(r0, !r0.reversed, contact, p.exit),
        ]
    } else {
        [
            make(r0, r0.reversed, p.entry, contact),
            make(r1, r1.reversed, contact, p.exit),
        ]
    };
    Inscription {
        rhombus,
        contact,
        children,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlacedRhombus {
    /// 0 for the initial rhombus.
    pub iteration: u32,
    pub rhombus: Rhombus,
}

/// One contact point and how many polygons reference it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegisteredContact {
    pub point: Point,
    pub references: u32,
}

/// Contacts deduplicated on a [`CONTACT_GRID`] lattice.
#[derive(Debug, Clone, Default)]
pub struct ContactRegistry {
    entries: BTreeMap<(i64, i64), RegisteredContact>,
}

impl ContactRegistry {
    pub fn key(p: Point) -> (i64, i64) {
        (
            (p.x / CONTACT_GRID).round() as i64,
            (p.y / CONTACT_GRID).round() as i64,
        )
    }

    pub fn insert(&mut self, p: Point) {
        self.entries
            .entry(Self::key(p))
            .and_modify(|e| e.references += 1)
            .or_insert(RegisteredContact {
                point: p,
                references: 1,
            });
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn contains(&self, p: Point) -> bool {
        self.entries.contains_key(&Self::key(p))
    }

    pub fn iter(&self) -> impl Iterator<Item = &RegisteredContact> {
        self.entries.values()
    }
}

/// State of the construction after iteration k.
#[derive(Debug, Clone)]
pub struct GasketState {
    a: AspectParam,
    k: u32,
    templates: Arc<Templates>,
    polygons: Vec<EmptyPolygon>,
    rhombi: Vec<PlacedRhombus>,
}

impl GasketState {
    pub fn a(&self) -> AspectParam {
        self.a
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn templates(&self) -> &Templates {
        &self.templates
    }

    /// Empty polygons in curve order, starting at (0, 1) and running
    /// counterclockwise.
    pub fn polygons(&self) -> &[EmptyPolygon] {
        &self.polygons
    }

    pub fn rhombi(&self) -> &[PlacedRhombus] {
        &self.rhombi
    }

    pub fn initial_rhombus(&self) -> Rhombus {
        self.rhombi[0].rhombus
    }

    pub fn polygon_vertices(&self, i: usize) -> Polygon {
        self.polygons[i].vertices(&self.templates)
    }

    /// Contact points in curve order; contact i is where polygon i begins.
    pub fn contacts(&self) -> Vec<Point> {
        self.polygons.iter().map(|p| p.entry).collect()
    }

    /// Every contact with the number of polygons that reference it.
    pub fn contact_registry(&self) -> ContactRegistry {
        let mut reg = ContactRegistry::default();
        for p in &self.polygons {
            reg.insert(p.entry);
            reg.insert(p.exit);
        }
        reg
    }

    /// Same parameter and rhombi with a different polygon list; used to
    /// build corrupted states for negative checks.
    #[doc(hidden)]
    pub fn with_polygons(&self, polygons: Vec<EmptyPolygon>) -> GasketState {
        GasketState {
            polygons,
            ..self.clone()
        }
    }

    pub fn max_polygon_diameter(&self) -> f64 {
        self.polygons
            .iter()
            .map(|p| p.diameter(&self.templates))
            .fold(0.0, f64::max)
    }
}

/// Iteration 1: the initial horizontal rhombus with the largest vertical
/// rhombus inside it, leaving two darts.
pub fn new_state(a: AspectParam) -> Result<GasketState> {
    let av = a.geometric()?;
    let templates = Arc::new(Templates::new(av)?);
    let initial = Rhombus {
        center: Point::ORIGIN,
        phase: Phase::Horizontal,
        half_width: 1.0 / av,
        half_height: 1.0,
    };
    let vertical = Rhombus {
        center: Point::ORIGIN,
        phase: Phase::Vertical,
        half_width: av,
        half_height: 1.0,
    };
    let top = Point::new(0.0, 1.0);
    let bottom = Point::new(0.0, -1.0);
    let darts = [
        (
            vec![
                Point::new(-1.0 / av, 0.0),
                bottom,
                Point::new(-av, 0.0),
                top,
            ],
            top,
            bottom,
        ),
        (
            vec![Point::new(1.0 / av, 0.0), top, Point::new(av, 0.0), bottom],
            bottom,
            top,
        ),
    ];
    let dart = templates.dart();
    let mut polygons = Vec::with_capacity(2);
    for (verts, entry, exit) in darts {
        let placement = fit_placement(&dart.polygon, &verts)
            .ok_or_else(|| Error::Invariant("iteration-1 dart is not a template copy".into()))?;
        let reversed = placement.apply(dart.contacts[0]).dist(entry) > DEFAULT_TOL;
        polygons.push(EmptyPolygon {
            kind: PolygonKind::Dart,
            placement,
            reversed,
            entry,
            exit,
        });
    }
    Ok(GasketState {
        a,
        k: 1,
        templates,
        polygons,
        rhombi: vec![
            PlacedRhombus {
                iteration: 0,
                rhombus: initial,
            },
            PlacedRhombus {
                iteration: 1,
                rhombus: vertical,
            },
        ],
    })
}

/// Fills every empty polygon once.
pub fn step(s: &GasketState) -> Result<GasketState> {
    let next = s.k + 1;
    if next > MAX_ITERATION {
        return Err(Error::Resource(format!(
            "iteration {next} exceeds the cap of {MAX_ITERATION}"
        )));
    }
    let templates = &*s.templates;
    let inscriptions: Vec<Inscription> = s
        .polygons
        .par_iter()
        .with_min_len(1 << 12)
        .map(|p| inscribe_rhombus(p, templates))
        .collect();
    let mut polygons = Vec::with_capacity(inscriptions.len() * 2);
    let mut rhombi = Vec::with_capacity(s.rhombi.len() + inscriptions.len());
    rhombi.extend_from_slice(&s.rhombi);
    for ins in &inscriptions {
        polygons.extend_from_slice(&ins.children);
        rhombi.push(PlacedRhombus {
            iteration: next,
            rhombus: ins.rhombus,
        });
    }
    Ok(GasketState {
        a: s.a,
        k: next,
        templates: Arc::clone(&s.templates),
        polygons,
        rhombi,
    })
}

/// The state at iteration `k` (1 ≤ k ≤ [`MAX_ITERATION`]).
pub fn run_to(a: AspectParam, k: u32) -> Result<GasketState> {
    if k == 0 {
        return param("iteration must be at least 1");
    }
    if k > MAX_ITERATION {
        return Err(Error::Resource(format!(
            "iteration {k} exceeds the cap of {MAX_ITERATION}"
        )));
    }
    let mut s = new_state(a)?;
    while s.k < k {
        s = step(&s)?;
    }
    Ok(s)
}

/// Total area of the empty polygons.
pub fn union_area(s: &GasketState) -> f64 {
    s.polygons.iter().map(|p| p.area(&s.templates)).sum()
}

/// Total area of the rhombi inserted so far (the initial rhombus excluded).
pub fn rhombi_area_sum(s: &GasketState) -> f64 {
    s.rhombi
        .iter()
        .filter(|r| r.iteration > 0)
        .map(|r| r.rhombus.area())
        .sum()
}
