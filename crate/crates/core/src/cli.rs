//! Command-line interface.
//!
//! Exit codes: 0 success, 2 bad parameters or usage, 3 resource cap, 4 a
//! verification ran and found a violation, 1 anything else.

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::analysis::{
    area_closed_form, box_counting, dimension, dimension_profile, empirical_area, shaded_x,
    shaded_x_residual, verify_max_at_koch, wedge_dart_diameters, BoxCountReport,
};
use crate::curve::{check_simple, polyline};
use crate::error::{Error, Result};
use crate::geom::{polygon_area, Point, DEFAULT_TOL};
use crate::ifs::{
    quadrant_system, verify_open_set, verify_self_similarity, OpenSetReport, QuadrantLabels,
    SelfSimilarityReport,
};
use crate::koch::{verify_equivalence_at, EquivalenceReport};
use crate::render::{
    curve_scene, emit_csv, emit_json, emit_svg, gasket_scene, num, plot_scene, points_scene, Table,
};
use crate::substitution::{run_to, union_area, AspectParam, PolygonKind};

pub const EXIT_OK: i32 = 0;
pub const EXIT_OTHER: i32 = 1;
pub const EXIT_PARAMETER: i32 = 2;
pub const EXIT_RESOURCE: i32 = 3;
pub const EXIT_VERIFICATION: i32 = 4;

#[derive(Debug, Parser)]
#[command(
    name = "gasket",
    version,
    about = "Rhombus gasket curves and the Koch snowflake"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Svg,
    Csv,
    Json,
}

#[derive(Debug, Args)]
struct Common {
    /// Aspect parameter a in (0, 1) [default: 1/√3]
    #[arg(long, allow_negative_numbers = true, conflicts_with = "a_complement")]
    a: Option<f64>,
    /// Give a as 1 − δ, for δ in (0, 1/2)
    #[arg(long, allow_negative_numbers = true)]
    a_complement: Option<f64>,
    /// Iteration depth (default depends on the command)
    #[arg(long)]
    k: Option<u32>,
    /// Geometric tolerance
    #[arg(long, default_value_t = DEFAULT_TOL, allow_negative_numbers = true)]
    tol: f64,
    /// Output file (default: standard output)
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Seed for sampled checks
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Worker threads (default: all cores)
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Empty polygons and rhombi at iteration k
    Iterate(Common),
    /// Closed polyline through the contacts at iteration k
    Curve(Common),
    /// Contact points at iteration k
    Contacts(Common),
    /// Hausdorff dimension from the Moran equation
    Dim(Common),
    /// Dimension as a function of a
    DimPlot {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 0.005)]
        a_min: f64,
        #[arg(long, default_value_t = 0.995)]
        a_max: f64,
        #[arg(long, default_value_t = 199)]
        n: usize,
    },
    /// Finite-difference check that the dimension peaks at 1/√3
    DimMaxCheck {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 1e-5)]
        h: f64,
    },
    /// Closed-form enclosed area and related quantities
    Area(Common),
    /// Shoelace area of the contact polyline against the closed form
    AreaEmpirical(Common),
    /// Box-counting slope of the contact cloud
    Boxdim {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 10)]
        levels: usize,
    },
    /// Compare the gasket at iteration 2k with snowflake level k
    KochCompare(Common),
    /// Quadrant similarity system: self-similarity and open set checks
    IfsVerify {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
    },
    /// Check that the polygons at iteration k form a simple closed chain
    SimpleCheck(Common),
}

impl Command {
    fn common(&self) -> &Common {
        match self {
            Command::Iterate(c)
            | Command::Curve(c)
            | Command::Contacts(c)
            | Command::Dim(c)
            | Command::Area(c)
            | Command::AreaEmpirical(c)
            | Command::KochCompare(c)
            | Command::SimpleCheck(c) => c,
            Command::DimPlot { common, .. }
            | Command::DimMaxCheck { common, .. }
            | Command::Boxdim { common, .. }
            | Command::IfsVerify { common, .. } => common,
        }
    }

    fn name(&self) -> &'static str {
        match self {
            Command::Iterate(_) => "iterate",
            Command::Curve(_) => "curve",
            Command::Contacts(_) => "contacts",
            Command::Dim(_) => "dim",
            Command::DimPlot { .. } => "dim-plot",
            Command::DimMaxCheck { .. } => "dim-max-check",
            Command::Area(_) => "area",
            Command::AreaEmpirical(_) => "area-empirical",
            Command::Boxdim { .. } => "boxdim",
            Command::KochCompare(_) => "koch-compare",
            Command::IfsVerify { .. } => "ifs-verify",
            Command::SimpleCheck(_) => "simple-check",
        }
    }

    fn default_k(&self) -> u32 {
        match self {
            Command::KochCompare(_) => 3,
            Command::Boxdim { .. } => 16,
            _ => 8,
        }
    }

    /// Accepted formats, default first.
    fn formats(&self) -> &'static [Format] {
        use Format::*;
        match self {
            Command::Iterate(_) | Command::Curve(_) => &[Svg, Json, Csv],
            Command::Contacts(_) => &[Csv, Json, Svg],
            Command::DimPlot { .. } => &[Csv, Json, Svg],
            Command::Dim(_)
            | Command::Area(_)
            | Command::AreaEmpirical(_)
            | Command::Boxdim { .. } => &[Json, Csv],
            Command::DimMaxCheck { .. }
            | Command::KochCompare(_)
            | Command::IfsVerify { .. }
            | Command::SimpleCheck(_) => &[Json],
        }
    }
}

/// Validated settings shared by all commands.
#[derive(Debug, Clone)]
struct RunConfig {
    a: AspectParam,
    a_given: bool,
    k: u32,
    tol: f64,
    format: Format,
    seed: u64,
}

fn config(cmd: &Command) -> Result<RunConfig> {
    let c = cmd.common();
    let a = match (c.a, c.a_complement) {
        (Some(a), _) => AspectParam::new(a)?,
        (None, Some(d)) => AspectParam::from_complement(d)?,
        (None, None) => AspectParam::koch(),
    };
    if !(c.tol > 0.0 && c.tol.is_finite()) {
        return Err(Error::Parameter(format!(
            "--tol must be positive, got {}",
            c.tol
        )));
    }
    if c.threads == Some(0) {
        return Err(Error::Parameter("--threads must be at least 1".into()));
    }
    let allowed = cmd.formats();
    let format = match c.format {
        None => allowed[0],
        Some(f) if allowed.contains(&f) => f,
        Some(f) => {
            return Err(Error::Parameter(format!(
                "{} does not produce {:?} output",
                cmd.name(),
                f
            )))
        }
    };
    Ok(RunConfig {
        a,
        a_given: c.a.is_some() || c.a_complement.is_some(),
        k: c.k.unwrap_or(cmd.default_k()),
        tol: c.tol,
        format,
        seed: c.seed,
    })
}

/// A rendered document and whether the verification it reports passed.
struct Outcome {
    text: String,
    passed: bool,
}

impl Outcome {
    fn ok(text: String) -> Self {
        Outcome { text, passed: true }
    }
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Parameter(_) => EXIT_PARAMETER,
        Error::Resource(_) => EXIT_RESOURCE,
        Error::DegenerateGeometry(_) | Error::Invariant(_) => EXIT_OTHER,
    }
}

/// Runs the CLI on `argv` (program name first) and returns the exit code.
pub fn run<S: AsRef<str>>(argv: &[S], out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let cli = match Cli::try_parse_from(argv.iter().map(|s| s.as_ref())) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() {
                EXIT_PARAMETER
            } else {
                EXIT_OK
            };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                err.write_all(text.as_bytes())
            } else {
                out.write_all(text.as_bytes())
            };
            return code;
        }
    };
    let cmd = &cli.command;
    let cfg = match config(cmd) {
        Ok(c) => c,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return exit_code(&e);
        }
    };
    let result = match cmd.common().threads {
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(|| dispatch(cmd, &cfg)),
            Err(e) => Err(Error::Resource(format!("cannot start {n} threads: {e}"))),
        },
        None => dispatch(cmd, &cfg),
    };
    let outcome = match result {
        Ok(o) => o,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return exit_code(&e);
        }
    };
    let written = match &cmd.common().out {
        Some(path) => std::fs::write(path, outcome.text.as_bytes())
            .map_err(|e| format!("cannot write {}: {e}", path.display())),
        None => out
            .write_all(outcome.text.as_bytes())
            .map_err(|e| format!("cannot write output: {e}")),
    };
    if let Err(msg) = written {
        let _ = writeln!(err, "error: {msg}");
        return EXIT_OTHER;
    }
    if outcome.passed {
        EXIT_OK
    } else {
        let _ = writeln!(err, "{}: verification failed", cmd.name());
        EXIT_VERIFICATION
    }
}

fn point_rows(points: &[Point]) -> Table {
    let mut t = Table::new(&["index", "x", "y"]);
    for (i, p) in points.iter().enumerate() {
        t.rows.push(vec![i.to_string(), num(p.x), num(p.y)]);
    }
    t
}

#[derive(Serialize)]
struct PolygonRecord {
    index: usize,
    kind: PolygonKind,
    height: f64,
    entry: Point,
    exit: Point,
    vertices: Vec<Point>,
}

#[derive(Serialize)]
struct IterateReport {
    a: AspectParam,
    k: u32,
    polygons: Vec<PolygonRecord>,
    rhombi: usize,
    union_area: f64,
}

#[derive(Serialize)]
struct PointsReport {
    a: AspectParam,
    k: u32,
    points: Vec<Point>,
}

#[derive(Serialize)]
struct AreaReport {
    a: AspectParam,
    area: f64,
    shaded_x: f64,
    shaded_x_residual: f64,
    wedge_diameter: f64,
    dart_diameter: f64,
}

#[derive(Serialize)]
struct EmpiricalAreaReport {
    a: AspectParam,
    k: u32,
    empirical: f64,
    closed_form: f64,
    error: f64,
    relative_error: f64,
    union_area: f64,
    tol: f64,
    passed: bool,
}

#[derive(Serialize)]
struct BoxdimReport {
    a: AspectParam,
    k: u32,
    points: usize,
    dimension: f64,
    estimate: BoxCountReport,
}

#[derive(Serialize)]
struct IfsReport {
    a: f64,
    labels: QuadrantLabels,
    ratios: [f64; 3],
    expected_ratios: [f64; 3],
    ahgd_area: f64,
    ahgd_expected: f64,
    self_similarity: SelfSimilarityReport,
    open_set: OpenSetReport,
    passed: bool,
}

fn dispatch(cmd: &Command, cfg: &RunConfig) -> Result<Outcome> {
    let a = cfg.a;
    let k = cfg.k;
    match cmd {
        Command::Iterate(_) => {
            let s = run_to(a, k)?;
            Ok(Outcome::ok(match cfg.format {
                Format::Svg => emit_svg(&gasket_scene(&s)?)?,
                Format::Json => {
                    let polygons = s
                        .polygons()
                        .iter()
                        .enumerate()
                        .map(|(i, p)| PolygonRecord {
                            index: i,
                            kind: p.kind,
                            height: p.height(),
                            entry: p.entry,
                            exit: p.exit,
                            vertices: s.polygon_vertices(i).vertices,
                        })
                        .collect();
                    emit_json(&IterateReport {
                        a,
                        k,
                        polygons,
                        rhombi: s.rhombi().len(),
                        union_area: union_area(&s),
                    })?
                }
                Format::Csv => {
                    let mut t = Table::new(&[
                        "index", "kind", "height", "entry_x", "entry_y", "exit_x", "exit_y",
                    ]);
                    for (i, p) in s.polygons().iter().enumerate() {
                        let kind = match p.kind {
                            PolygonKind::Wedge => "wedge",
                            PolygonKind::Dart => "dart",
                        };
                        t.rows.push(vec![
                            i.to_string(),
                            kind.into(),
                            num(p.height()),
                            num(p.entry.x),
                            num(p.entry.y),
                            num(p.exit.x),
                            num(p.exit.y),
                        ]);
                    }
                    emit_csv(&t)?
                }
            }))
        }
        Command::Curve(_) => {
            let s = run_to(a, k)?;
            let c = polyline(&s)?;
            Ok(Outcome::ok(match cfg.format {
                Format::Svg => emit_svg(&curve_scene(&c)?)?,
                Format::Json => emit_json(&PointsReport {
                    a,
                    k,
                    points: c.points,
                })?,
                Format::Csv => emit_csv(&point_rows(&c.points))?,
            }))
        }
        Command::Contacts(_) => {
            let s = run_to(a, k)?;
            let pts = s.contacts();
            Ok(Outcome::ok(match cfg.format {
                Format::Svg => emit_svg(&points_scene(&pts, "contact")?)?,
                Format::Json => emit_json(&PointsReport { a, k, points: pts })?,
                Format::Csv => emit_csv(&point_rows(&pts))?,
            }))
        }
        Command::Dim(_) => {
            let r = dimension(a, cfg.tol.max(crate::analysis::MIN_DIMENSION_TOL))?;
            Ok(Outcome::ok(match cfg.format {
                Format::Csv => {
                    let mut t = Table::new(&["a", "complement", "s", "residual", "iterations"]);
                    t.rows.push(vec![
                        num(a.value()),
                        num(a.complement()),
                        num(r.s),
                        num(r.residual),
                        r.iterations.to_string(),
                    ]);
                    emit_csv(&t)?
                }
                _ => emit_json(&r)?,
            }))
        }
        Command::DimPlot {
            a_min, a_max, n, ..
        } => {
            let rows = dimension_profile(*a_min, *a_max, *n)?;
            Ok(Outcome::ok(match cfg.format {
                Format::Csv => {
                    let mut t = Table::new(&["a", "dimension"]);
                    for r in &rows {
                        t.push_numbers(&[r.a, r.s]);
                    }
                    emit_csv(&t)?
                }
                Format::Json => emit_json(&rows)?,
                Format::Svg => {
                    let pts: Vec<Point> = rows.iter().map(|r| Point::new(r.a, r.s - 1.0)).collect();
                    emit_svg(&plot_scene(&pts, "dimension")?)?
                }
            }))
        }
        Command::DimMaxCheck { h, .. } => {
            let r = verify_max_at_koch(*h)?;
            Ok(Outcome {
                passed: r.passed,
                text: emit_json(&r)?,
            })
        }
        Command::Area(_) => {
            let x = shaded_x(a);
            let (w, d) = wedge_dart_diameters(a);
            let r = AreaReport {
                a,
                area: area_closed_form(a),
                shaded_x: x,
                shaded_x_residual: shaded_x_residual(a, x),
                wedge_diameter: w,
                dart_diameter: d,
            };
            Ok(Outcome::ok(match cfg.format {
                Format::Csv => {
                    let mut t =
                        Table::new(&["a", "area", "shaded_x", "wedge_diameter", "dart_diameter"]);
                    t.push_numbers(&[a.value(), r.area, r.shaded_x, w, d]);
                    emit_csv(&t)?
                }
                _ => emit_json(&r)?,
            }))
        }
        Command::AreaEmpirical(_) => {
            let s = run_to(a, k)?;
            let empirical = empirical_area(&s)?;
            let closed_form = area_closed_form(a);
            let error = (empirical - closed_form).abs();
            let bound = union_area(&s);
            let r = EmpiricalAreaReport {
                a,
                k,
                empirical,
                closed_form,
                error,
                relative_error: error / closed_form,
                union_area: bound,
                tol: cfg.tol,
                passed: error <= bound + cfg.tol,
            };
            let text = match cfg.format {
                Format::Csv => {
                    let mut t =
                        Table::new(&["a", "k", "empirical", "closed_form", "error", "union_area"]);
                    t.rows.push(vec![
                        num(a.value()),
                        k.to_string(),
                        num(empirical),
                        num(closed_form),
                        num(error),
                        num(bound),
                    ]);
                    emit_csv(&t)?
                }
                _ => emit_json(&r)?,
            };
            Ok(Outcome {
                text,
                passed: r.passed,
            })
        }
        Command::Boxdim { levels, .. } => {
            let s = run_to(a, k)?;
            let pts = s.contacts();
            let estimate = box_counting(&pts, *levels)?;
            let dim = dimension(a, crate::analysis::MIN_DIMENSION_TOL)?.s;
            Ok(Outcome::ok(match cfg.format {
                Format::Csv => {
                    let mut t = Table::new(&["epsilon", "count"]);
                    for l in &estimate.levels {
                        t.rows.push(vec![num(l.epsilon), l.count.to_string()]);
                    }
                    emit_csv(&t)?
                }
                _ => emit_json(&BoxdimReport {
                    a,
                    k,
                    points: pts.len(),
                    dimension: dim,
                    estimate,
                })?,
            }))
        }
        Command::KochCompare(_) => {
            let a = if cfg.a_given { a } else { AspectParam::koch() };
            let r: EquivalenceReport = verify_equivalence_at(a, k, cfg.tol)?;
            Ok(Outcome {
                passed: r.passed,
                text: emit_json(&r)?,
            })
        }
        Command::IfsVerify { samples, .. } => {
            let sys = quadrant_system(a)?;
            let s = run_to(a, k)?;
            let self_similarity = verify_self_similarity(&sys, &s, cfg.tol)?;
            let open_set = verify_open_set(&sys, *samples, cfg.seed)?;
            let av = sys.a;
            let c = (1.0 - av * av) / 2.0;
            let expected_ratios = [av, c, c];
            let ahgd_area = polygon_area(&sys.rhombus_ahgd())?;
            let ahgd_expected = av * (1.0 - av * av).powi(2) / 2.0;
            let ratios_ok = sys
                .ratios
                .iter()
                .zip(expected_ratios)
                .all(|(r, e)| (r - e).abs() <= 1e-12);
            let passed = ratios_ok
                && self_similarity.passed
                && open_set.passed
                && (ahgd_area - ahgd_expected).abs() <= 1e-9;
            let r = IfsReport {
                a: av,
                labels: sys.labels,
                ratios: sys.ratios,
                expected_ratios,
                ahgd_area,
                ahgd_expected,
                self_similarity,
                open_set,
                passed,
            };
            Ok(Outcome {
                passed,
                text: emit_json(&r)?,
            })
        }
        Command::SimpleCheck(_) => {
            let s = run_to(a, k)?;
            let r = check_simple(&s, cfg.tol);
            Ok(Outcome {
                passed: r.passed,
                text: emit_json(&r)?,
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_str(args: &[&str]) -> (i32, String, String) {
        let mut argv = vec!["gasket"];
        argv.extend_from_slice(args);
        let (mut out, mut err) = (Vec::new(), Vec::new());
        let code = run(&argv, &mut out, &mut err);
        (
            code,
            String::from_utf8(out).unwrap(),
            String::from_utf8(err).unwrap(),
        )
    }

    #[test]
    fn usage_errors() {
        assert_eq!(run_str(&["frobnicate"]).0, EXIT_PARAMETER);
        assert_eq!(run_str(&["dim", "--bogus"]).0, EXIT_PARAMETER);
        assert_eq!(run_str(&[]).0, EXIT_PARAMETER);
        assert_eq!(run_str(&["--help"]).0, EXIT_OK);
    }

    #[test]
    fn parameter_and_resource_errors() {
        assert_eq!(run_str(&["dim", "--a", "1.5"]).0, EXIT_PARAMETER);
        assert_eq!(
            run_str(&["dim", "--a", "0.5", "--a-complement", "0.1"]).0,
            EXIT_PARAMETER
        );
        assert_eq!(run_str(&["dim", "--format", "svg"]).0, EXIT_PARAMETER);
        assert_eq!(run_str(&["iterate", "--k", "0"]).0, EXIT_PARAMETER);
        assert_eq!(run_str(&["iterate", "--k", "40"]).0, EXIT_RESOURCE);
        assert_eq!(run_str(&["dim", "--threads", "0"]).0, EXIT_PARAMETER);
    }

    #[test]
    fn verification_failure_exit() {
        let (code, out, _) = run_str(&["koch-compare", "--a", "0.5", "--k", "1"]);
        assert_eq!(code, EXIT_VERIFICATION);
        assert!(out.contains("\"passed\": false"));
    }
}
