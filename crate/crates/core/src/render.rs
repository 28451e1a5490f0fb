//! Deterministic SVG, CSV and JSON output.
//!
//! SVG coordinates are written with exactly nine decimals and the y axis is
//! flipped once, by a transform on the outer group.

use std::fmt::Write as _;

use serde::Serialize;

use crate::curve::ClosedPolyline;
use crate::error::{param, Error, Result};
use crate::geom::{BBox, Point, Polygon};
use crate::substitution::{GasketState, PolygonKind};

#[derive(Debug, Clone, PartialEq)]
pub enum Shape {
    Polygon(Polygon),
    Closed(ClosedPolyline),
    /// Open polyline, e.g. a plotted function.
    Path(Vec<Point>),
    Points(Vec<Point>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Style {
    pub class: String,
    pub fill: String,
    pub stroke: String,
    /// In screen pixels.
    pub stroke_width: f64,
    /// Radius of point markers in scene units.
    pub point_radius: f64,
}

impl Style {
    pub fn new(class: &str, fill: &str, stroke: &str) -> Self {
        Style {
            class: class.into(),
            fill: fill.into(),
            stroke: stroke.into(),
            stroke_width: 0.5,
            point_radius: 0.004,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    pub style: Style,
    pub shapes: Vec<Shape>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scene {
    pub viewport: BBox,
    pub layers: Vec<Layer>,
}

fn shape_points(s: &Shape) -> &[Point] {
    match s {
        Shape::Polygon(p) => &p.vertices,
        Shape::Closed(c) => &c.points,
        Shape::Path(p) | Shape::Points(p) => p,
    }
}

impl Scene {
    /// Scene whose viewport is the layers' bounding box plus a 2% margin.
    pub fn fitted(layers: Vec<Layer>) -> Result<Scene> {
        let mut bbox: Option<BBox> = None;
        for p in layers
            .iter()
            .flat_map(|l| l.shapes.iter())
            .flat_map(shape_points)
        {
            match bbox.as_mut() {
                Some(b) => b.include(*p),
                None => bbox = Some(BBox { min: *p, max: *p }),
            }
        }
        let bbox = bbox.ok_or_else(|| Error::Parameter("scene has no geometry".into()))?;
        let margin = 0.02 * bbox.width().max(bbox.height()).max(1e-9);
        Ok(Scene {
            viewport: bbox.expand(margin),
            layers,
        })
    }

    pub fn element_count(&self) -> usize {
        self.layers
            .iter()
            .flat_map(|l| l.shapes.iter())
            .map(|s| match s {
                Shape::Points(p) => p.len(),
                _ => 1,
            })
            .sum()
    }
}

/// Fixed nine-decimal formatting with negative zero printed as zero.
pub fn fmt9(x: f64) -> String {
    let s = format!("{x:.9}");
    if s.starts_with('-') && s[1..].bytes().all(|b| b == b'0' || b == b'.') {
        s[1..].to_string()
    } else {
        s
    }
}

fn points_attr(points: &[Point]) -> String {
    let mut s = String::with_capacity(points.len() * 24);
    for (i, p) in points.iter().enumerate() {
        if i > 0 {
            s.push(' ');
        }
        s.push_str(&fmt9(p.x));
        s.push(',');
        s.push_str(&fmt9(p.y));
    }
    s
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

pub fn emit_svg(scene: &Scene) -> Result<String> {
    if scene.element_count() == 0 {
        return param("cannot render an empty scene");
    }
    let v = scene.viewport;
    if !(v.width() > 0.0 && v.height() > 0.0) {
        return param("scene viewport is empty");
    }
    let mut out = String::new();
    out.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" viewBox=\"{} {} {} {}\">",
        fmt9(v.min.x),
        fmt9(-v.max.y),
        fmt9(v.width()),
        fmt9(v.height())
    );
    out.push_str("<g transform=\"scale(1,-1)\">\n");
    for layer in &scene.layers {
        let st = &layer.style;
        let _ = writeln!(
            out,
            "<g class=\"{}\" fill=\"{}\" stroke=\"{}\" stroke-width=\"{}\" vector-effect=\"non-scaling-stroke\">",
            escape(&st.class),
            escape(&st.fill),
            escape(&st.stroke),
            fmt9(st.stroke_width)
        );
        for shape in &layer.shapes {
            match shape {
                Shape::Polygon(p) => {
                    let _ = writeln!(out, "<polygon points=\"{}\"/>", points_attr(&p.vertices));
                }
                Shape::Closed(c) => {
                    let _ = writeln!(out, "<polygon points=\"{}\"/>", points_attr(&c.points));
                }
                Shape::Path(p) => {
                    let _ = writeln!(
                        out,
                        "<polyline fill=\"none\" points=\"{}\"/>",
                        points_attr(p)
                    );
                }
                Shape::Points(p) => {
                    let r = fmt9(st.point_radius);
                    for q in p {
                        let _ = writeln!(
                            out,
                            "<circle cx=\"{}\" cy=\"{}\" r=\"{r}\"/>",
                            fmt9(q.x),
                            fmt9(q.y)
                        );
                    }
                }
            }
        }
        out.push_str("</g>\n");
    }
    out.push_str("</g>\n</svg>\n");
    Ok(out)
}

/// Header plus rows of preformatted cells.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Table {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push_numbers(&mut self, row: &[f64]) {
        self.rows.push(row.iter().map(|&x| num(x)).collect());
    }
}

/// Shortest decimal that parses back to `x`.
pub fn num(x: f64) -> String {
    format!("{x:?}")
}

pub fn emit_csv(table: &Table) -> Result<String> {
    if table.header.is_empty() {
        return param("csv header is empty");
    }
    if let Some(i) = table
        .rows
        .iter()
        .position(|r| r.len() != table.header.len())
    {
        return param(format!(
            "csv row {i} has {} cells, header has {}",
            table.rows[i].len(),
            table.header.len()
        ));
    }
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    let io = |e: csv::Error| Error::Invariant(format!("csv encoding failed: {e}"));
    w.write_record(&table.header).map_err(io)?;
    for r in &table.rows {
        w.write_record(r).map_err(io)?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| Error::Invariant(format!("csv encoding failed: {e}")))?;
    String::from_utf8(bytes).map_err(|e| Error::Invariant(e.to_string()))
}

/// Pretty JSON with object keys in lexicographic order.
pub fn emit_json<T: Serialize + ?Sized>(report: &T) -> Result<String> {
    let value = serde_json::to_value(report)
        .map_err(|e| Error::Invariant(format!("json encoding failed: {e}")))?;
    let mut s =
        serde_json::to_string_pretty(&value).map_err(|e| Error::Invariant(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

/// Rhombi (initial one first) and the empty polygons, wedges and darts in
/// separate layers.
pub fn gasket_scene(s: &GasketState) -> Result<Scene> {
    let rhombi = s
        .rhombi()
        .iter()
        .map(|r| Shape::Polygon(r.rhombus.polygon()))
        .collect();
    let mut wedges = Vec::new();
    let mut darts = Vec::new();
    for (i, p) in s.polygons().iter().enumerate() {
        let shape = Shape::Polygon(s.polygon_vertices(i));
        match p.kind {
            PolygonKind::Wedge => wedges.push(shape),
            PolygonKind::Dart => darts.push(shape),
        }
    }
    Scene::fitted(vec![
        Layer {
            style: Style::new("rhombus", "#dddddd", "#555555"),
            shapes: rhombi,
        },
        Layer {
            style: Style::new("wedge", "#3b6ea5", "#1d3a5a"),
            shapes: wedges,
        },
        Layer {
            style: Style::new("dart", "#c8553d", "#6b2a1e"),
            shapes: darts,
        },
    ])
}

pub fn curve_scene(c: &ClosedPolyline) -> Result<Scene> {
    Scene::fitted(vec![Layer {
        style: Style::new("curve", "none", "#000000"),
        shapes: vec![Shape::Closed(c.clone())],
    }])
}

pub fn points_scene(points: &[Point], class: &str) -> Result<Scene> {
    Scene::fitted(vec![Layer {
        style: Style::new(class, "#000000", "none"),
        shapes: vec![Shape::Points(points.to_vec())],
    }])
}

/// Plot of (x, y) samples as an open polyline.
pub fn plot_scene(samples: &[Point], class: &str) -> Result<Scene> {
    Scene::fitted(vec![Layer {
        style: Style::new(class, "none", "#000000"),
        shapes: vec![Shape::Path(samples.to_vec())],
    }])
}
