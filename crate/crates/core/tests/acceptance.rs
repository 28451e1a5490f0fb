//! The twelve acceptance criteria, run in order with one PASS/FAIL line each.
//!
//! Run with `cargo test --test acceptance -- --nocapture` to see the lines.

use std::time::{Duration, Instant};

use gasket::analysis::{
    area_closed_form, box_counting, dimension, dimension_profile, empirical_area,
    verify_max_at_koch, wedge_dart_diameters,
};
use gasket::cli::run;
use gasket::curve::check_simple;
use gasket::geom::{polygon_area, polygon_diameter, Point};
use gasket::ifs::{quadrant_system, verify_open_set, verify_self_similarity};
use gasket::koch::{gasket_alignment, verify_equivalence, verify_equivalence_at};
use gasket::substitution::{new_state, run_to, step, union_area, AspectParam, PolygonKind};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

/// (name, time budget in seconds, check)
type Criterion = (&'static str, u64, fn() -> Outcome);

fn koch() -> AspectParam {
    AspectParam::koch()
}

fn param(a: f64) -> AspectParam {
    AspectParam::new(a).unwrap()
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn c1_dimension_at_koch() -> Outcome {
    let r = dimension(koch(), 1e-13).map_err(|e| e.to_string())?;
    let want = 1.261_859_507_142_914_8;
    ensure((r.s - want).abs() <= 1e-12, || {
        format!("s = {} vs {want}", r.s)
    })?;
    ensure(r.residual <= 1e-13, || format!("residual {:e}", r.residual))?;
    Ok(format!("s = {:.16}, residual = {:.1e}", r.s, r.residual))
}

fn c2_near_boundary() -> Outcome {
    let a = AspectParam::from_complement(1e-16).map_err(|e| e.to_string())?;
    let r = dimension(a, 1e-13).map_err(|e| e.to_string())?;
    ensure((r.s - 1.018).abs() <= 1e-3, || format!("s = {}", r.s))?;
    Ok(format!("delta = 1e-16: s = {:.6}", r.s))
}

fn c3_maximum() -> Outcome {
    let m = verify_max_at_koch(1e-5).map_err(|e| e.to_string())?;
    ensure(m.slope.abs() < 1e-4, || format!("slope {}", m.slope))?;
    ensure(m.second_difference < 0.0, || {
        format!("second difference {}", m.second_difference)
    })?;
    let rows = dimension_profile(0.005, 0.995, 199).map_err(|e| e.to_string())?;
    let best = rows.iter().max_by(|x, y| x.s.total_cmp(&y.s)).unwrap();
    let nearest = rows
        .iter()
        .min_by(|x, y| (x.a - 0.5774).abs().total_cmp(&(y.a - 0.5774).abs()))
        .unwrap();
    ensure(best.a == nearest.a, || {
        format!(
            "profile max at {} but nearest grid point is {}",
            best.a, nearest.a
        )
    })?;
    Ok(format!(
        "slope = {:.1e}, second difference = {:.3}, profile max at a = {}",
        m.slope, m.second_difference, best.a
    ))
}

fn c4_area_oracle() -> Outcome {
    let anchor = gasket_alignment().map_err(|e| e.to_string())?;
    let l = anchor.side();
    let oracle = 8.0 / 5.0 * 3f64.sqrt() / 4.0 * l * l;
    let got = area_closed_form(koch());
    ensure((got - oracle).abs() <= 1e-12, || {
        format!("{got} vs {oracle}")
    })?;
    ensure((oracle - 6.0 * 3f64.sqrt() / 5.0).abs() <= 1e-12, || {
        format!("oracle {oracle}")
    })?;
    Ok(format!(
        "area = {got:.12}, snowflake oracle (side {l:.6}) = {oracle:.12}"
    ))
}

fn c5_empirical_area() -> Outcome {
    let mut parts = Vec::new();
    for a in [param(0.3), param(0.5), koch(), param(0.8)] {
        let s = run_to(a, 14).map_err(|e| e.to_string())?;
        let emp = empirical_area(&s).map_err(|e| e.to_string())?;
        let exact = area_closed_form(a);
        let err = (emp - exact).abs();
        let bound = union_area(&s);
        ensure(err / exact <= 0.01, || {
            format!("a = {}: relative error {:.3e}", a.value(), err / exact)
        })?;
        ensure(err <= bound, || {
            format!(
                "a = {}: error {err:e} above union area {bound:e}",
                a.value()
            )
        })?;
        parts.push(format!("{:.4}: {:.2e}", a.value(), err / exact));
    }
    Ok(format!("relative errors {}", parts.join(", ")))
}

fn c6_equivalence() -> Outcome {
    for k in 1..=5 {
        let r = verify_equivalence(k, 1e-9).map_err(|e| e.to_string())?;
        ensure(r.passed && r.matches.len() == 4usize.pow(k), || {
            format!(
                "k = {k}: {} matches, {} unmatched, max mismatch {:e}, {} samples outside",
                r.matches.len(),
                r.unmatched,
                r.max_mismatch,
                r.samples_outside
            )
        })?;
    }
    let control = verify_equivalence_at(param(0.5), 3, 1e-9).map_err(|e| e.to_string())?;
    ensure(!control.passed, || "a = 0.5 control passed".into())?;
    Ok(format!(
        "k = 1..5 all contacts matched; a = 0.5 control fails ({} unmatched)",
        control.unmatched
    ))
}

fn c7_census() -> Outcome {
    for a in [param(0.3), koch(), param(0.8)] {
        let mut states = vec![new_state(a).map_err(|e| e.to_string())?];
        while states.last().unwrap().k() < 16 {
            let next = step(states.last().unwrap()).map_err(|e| e.to_string())?;
            states.push(next);
        }
        for s in &states {
            let n = 1usize << s.k();
            ensure(s.polygons().len() == n, || {
                format!("k = {}: {} polygons", s.k(), s.polygons().len())
            })?;
            let contacts = s.contact_registry().len();
            ensure(contacts == n, || {
                format!("k = {}: {contacts} distinct contacts", s.k())
            })?;
        }
        for w in states.windows(3).filter(|w| w[2].k() <= 12) {
            for (i, p) in w[0].polygons().iter().enumerate() {
                let wedges = w[2].polygons()[4 * i..4 * i + 4]
                    .iter()
                    .filter(|q| q.kind == PolygonKind::Wedge)
                    .count();
                let want = if p.kind == PolygonKind::Wedge { 3 } else { 2 };
                ensure(wedges == want, || {
                    format!("a = {}, k = {}, #{i}: {wedges} wedges", a.value(), w[0].k())
                })?;
            }
        }
    }
    Ok("2^k polygons and contacts for k <= 16; 3W+1D / 2W+2D for k <= 12".into())
}

fn c8_metric_lemmas() -> Outcome {
    let mut worst: f64 = 0.0;
    for a in [param(0.3), koch(), param(0.8)] {
        let av = a.value();
        let (w, d) = wedge_dart_diameters(a);
        let mut states = vec![new_state(a).map_err(|e| e.to_string())?];
        while states.last().unwrap().k() < 12 {
            let next = step(states.last().unwrap()).map_err(|e| e.to_string())?;
            states.push(next);
        }
        for w2 in states.windows(3) {
            for (i, p) in w2[0].polygons().iter().enumerate() {
                for q in &w2[2].polygons()[4 * i..4 * i + 4] {
                    let h = p.height();
                    let e = (q.height() - av * av * h)
                        .abs()
                        .min((q.height() - (1.0 - av * av) * h / 2.0).abs());
                    worst = worst.max(e);
                    ensure(e <= 1e-9, || {
                        format!(
                            "a = {av}, k = {}: height {} from {h}",
                            w2[2].k(),
                            q.height()
                        )
                    })?;
                }
            }
        }
        for s in &states {
            for (i, p) in s.polygons().iter().enumerate() {
                let want = p.height() * if p.kind == PolygonKind::Wedge { w } else { d };
                let got = polygon_diameter(&s.polygon_vertices(i));
                worst = worst.max((got - want).abs());
                ensure((got - want).abs() <= 1e-9, || {
                    format!("a = {av}, k = {}, #{i}: diameter {got} vs {want}", s.k())
                })?;
            }
        }
    }
    Ok(format!("largest deviation {worst:.1e}"))
}

fn c9_jordan() -> Outcome {
    let mut parts = Vec::new();
    for a in [param(0.3), koch(), param(0.9)] {
        let s = run_to(a, 12).map_err(|e| e.to_string())?;
        let r = check_simple(&s, 1e-9);
        ensure(r.passed, || {
            format!("a = {}: {} violations", a.value(), r.violations.len())
        })?;
        parts.push(format!("{:.4} ({} pairs)", a.value(), r.candidate_pairs));
    }
    Ok(format!("iteration 12 simple for a = {}", parts.join(", ")))
}

fn c10_box_counting() -> Outcome {
    const LEVELS: usize = 10;
    let mut parts = Vec::new();
    for a in [param(0.4), koch(), param(0.75)] {
        let s = run_to(a, 20).map_err(|e| e.to_string())?;
        let r = box_counting(&s.contacts(), LEVELS).map_err(|e| e.to_string())?;
        let dim = dimension(a, 1e-13).map_err(|e| e.to_string())?.s;
        ensure((r.slope - dim).abs() <= 0.05, || {
            format!("a = {}: slope {} vs {dim}", a.value(), r.slope)
        })?;
        parts.push(format!("{:.4}: {:.4} vs {:.4}", a.value(), r.slope, dim));
    }
    let line: Vec<Point> = (0..100_000)
        .map(|i| Point::new(-0.7 + 1.3 * i as f64 / 100_000.0, 0.2))
        .collect();
    let r = box_counting(&line, LEVELS).map_err(|e| e.to_string())?;
    ensure((r.slope - 1.0).abs() <= 0.05, || {
        format!("segment slope {}", r.slope)
    })?;
    Ok(format!("{}; segment {:.4}", parts.join(", "), r.slope))
}

fn c11_ifs() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for a in [param(0.2), koch(), param(0.8)] {
        let av = a.value();
        let sys = quadrant_system(a).map_err(|e| e.to_string())?;
        let c = (1.0 - av * av) / 2.0;
        for _ in 0..100 {
            let p = Point::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
            let q = Point::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
            for (m, want) in sys.maps.iter().zip([av, c, c]) {
                let r = m.apply(p).dist(m.apply(q)) / p.dist(q);
                ensure((r - want).abs() <= 1e-12, || {
                    format!("a = {av}: ratio {r} vs {want}")
                })?;
            }
        }
        let s = run_to(a, 16).map_err(|e| e.to_string())?;
        let ss = verify_self_similarity(&sys, &s, 1e-3).map_err(|e| e.to_string())?;
        ensure(ss.passed, || {
            format!(
                "a = {av}: self-similarity distance {} > {}",
                ss.distance, ss.bound
            )
        })?;
        let os = verify_open_set(&sys, 10_000, 11).map_err(|e| e.to_string())?;
        ensure(os.passed, || format!("a = {av}: open set {os:?}"))?;
        let area = polygon_area(&sys.rhombus_ahgd()).map_err(|e| e.to_string())?;
        let want = av * (1.0 - av * av).powi(2) / 2.0;
        ensure((area - want).abs() <= 1e-9, || {
            format!("a = {av}: area(AHGD) {area} vs {want}")
        })?;
    }
    let sys = quadrant_system(koch()).unwrap();
    let bad = sys.with_map(0, sys.maps[0].scaled_about(sys.labels.c, 0.9));
    let s = run_to(koch(), 16).unwrap();
    let ss = verify_self_similarity(&bad, &s, 1e-3).unwrap();
    ensure(!ss.passed, || "perturbed S1 still self-similar".into())?;
    Ok("ratios, self-similarity at 16, open set and area(AHGD) for a = 0.2, 1/sqrt3, 0.8".into())
}

fn c12_determinism() -> Outcome {
    let commands: &[&[&str]] = &[
        &["iterate"],
        &["curve"],
        &["contacts"],
        &["dim"],
        &["dim-plot"],
        &["dim-max-check"],
        &["area"],
        &["area-empirical"],
        &["boxdim"],
        &["koch-compare"],
        &["ifs-verify"],
        &["simple-check"],
    ];
    let n = std::thread::available_parallelism()
        .map(|n| n.get())
        .unwrap_or(4)
        .max(2)
        .to_string();
    let go = |args: &[&str]| {
        let mut argv = vec!["gasket"];
        argv.extend_from_slice(args);
        let (mut out, mut err) = (Vec::new(), Vec::new());
        let code = run(&argv, &mut out, &mut err);
        (code, out)
    };
    for cmd in commands {
        let one: Vec<&str> = cmd.iter().copied().chain(["--threads", "1"]).collect();
        let many: Vec<&str> = cmd
            .iter()
            .copied()
            .chain(["--threads", n.as_str()])
            .collect();
        let first = go(cmd);
        ensure(first.0 == 0, || format!("{cmd:?} exited {}", first.0))?;
        ensure(go(cmd) == first, || format!("{cmd:?} differs between runs"))?;
        ensure(go(&one) == first, || {
            format!("{cmd:?} differs with --threads 1")
        })?;
        ensure(go(&many) == first, || {
            format!("{cmd:?} differs with --threads {n}")
        })?;
    }
    Ok(format!(
        "12 subcommands byte-identical across runs and --threads 1 / {n}"
    ))
}

#[test]
fn acceptance() {
    let criteria: [Criterion; 12] = [
        ("dimension at the Koch point", 1, c1_dimension_at_koch),
        ("near-boundary dimension", 1, c2_near_boundary),
        ("maximum location", 5, c3_maximum),
        ("area closed form vs snowflake oracle", 1, c4_area_oracle),
        ("empirical area convergence", 30, c5_empirical_area),
        ("equivalence with the Koch snowflake", 30, c6_equivalence),
        ("structure census", 10, c7_census),
        ("metric lemmas", 20, c8_metric_lemmas),
        ("finite-depth Jordan property", 60, c9_jordan),
        ("box-counting cross-check", 60, c10_box_counting),
        ("IFS verification", 30, c11_ifs),
        ("determinism", 30, c12_determinism),
    ];
    println!();
    let mut failed = Vec::new();
    for (i, (name, budget, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = f();
        let elapsed = start.elapsed();
        let over = elapsed > Duration::from_secs(*budget);
        let (status, detail) = match (&outcome, over) {
            (Ok(d), false) => ("PASS", d.clone()),
            (Ok(d), true) => ("FAIL", format!("{d} (over the {budget} s budget)")),
            (Err(e), _) => ("FAIL", e.clone()),
        };
        println!(
            "[{status}] {:>2}. {name} ({:.2} s / {budget} s): {detail}",
            i + 1,
            elapsed.as_secs_f64()
        );
        if status == "FAIL" {
            failed.push(i + 1);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
