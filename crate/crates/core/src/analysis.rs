//! Dimension and area of the curves: the Moran equation, the enclosed-area
//! formula, and empirical estimates from finite iterations.

use std::collections::HashSet;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::curve::polyline;
use crate::error::{param, Result};
use crate::geom::Point;
use crate::substitution::{AspectParam, GasketState};

/// Smallest tolerance accepted by [`dimension`].
pub const MIN_DIMENSION_TOL: f64 = 1e-13;

const MAX_BISECTIONS: u32 = 200;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DimensionReport {
    pub a: AspectParam,
    pub s: f64,
    /// |a^s + 2((1 − a²)/2)^s − 1| at the returned s.
    pub residual: f64,
    pub iterations: u32,
    /// Final bisection bracket.
    pub bracket: (f64, f64),
}

/// a^s + 2((1 − a²)/2)^s − 1, evaluated without cancellation near a = 1.
pub fn moran_residual(a: AspectParam, s: f64) -> f64 {
    (s * a.ln()).exp_m1() + 2.0 * a.child_ratio().powf(s)
}

fn moran_derivative(a: AspectParam, s: f64) -> f64 {
    let c = a.child_ratio();
    a.ln() * (s * a.ln()).exp() + 2.0 * c.ln() * c.powf(s)
}

/// Root of the Moran equation for the ratios (a, (1 − a²)/2, (1 − a²)/2).
///
/// The residual is strictly decreasing in s, positive at 1 and negative at
/// 2, so bisection on [1, 2] always converges; one Newton step polishes the
/// midpoint when it improves the residual.
pub fn dimension(a: AspectParam, tol: f64) -> Result<DimensionReport> {
    if !(tol >= MIN_DIMENSION_TOL) || !tol.is_finite() {
        return param(format!(
            "dimension tolerance must be at least {MIN_DIMENSION_TOL:e}, got {tol}"
        ));
    }
    let (mut lo, mut hi) = (1.0f64, 2.0f64);
    let mut iterations = 0;
    while hi - lo > tol && iterations < MAX_BISECTIONS {
        let mid = 0.5 * (lo + hi);
        let r = moran_residual(a, mid);
        if r > 0.0 {
            lo = mid;
        } else if r < 0.0 {
            hi = mid;
        } else {
            lo = mid;
            hi = mid;
        }
        iterations += 1;
    }
    let mut s = 0.5 * (lo + hi);
    let mut residual = moran_residual(a, s).abs();
    let d = moran_derivative(a, s);
    if d != 0.0 {
        let polished = s - moran_residual(a, s) / d;
        let r = moran_residual(a, polished).abs();
        if polished >= lo && polished <= hi && r < residual {
            s = polished;
            residual = r;
            iterations += 1;
        }
    }
    Ok(DimensionReport {
        a,
        s,
        residual,
        iterations,
        bracket: (lo, hi),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfileRow {
    pub a: f64,
    pub s: f64,
    pub residual: f64,
}

/// Dimension at n evenly spaced parameters from `a_min` to `a_max`.
pub fn dimension_profile(a_min: f64, a_max: f64, n: usize) -> Result<Vec<ProfileRow>> {
    if !(0.0 < a_min && a_min < a_max && a_max < 1.0) {
        return param(format!(
            "profile needs 0 < a_min < a_max < 1, got [{a_min}, {a_max}]"
        ));
    }
    if n < 2 {
        return param("profile needs at least two samples");
    }
    let step = (a_max - a_min) / (n - 1) as f64;
    (0..n)
        .into_par_iter()
        .map(|i| {
            let a = if i == n - 1 {
                a_max
            } else {
                a_min + step * i as f64
            };
            let r = dimension(AspectParam::new(a)?, MIN_DIMENSION_TOL)?;
            Ok(ProfileRow {
                a,
                s: r.s,
                residual: r.residual,
            })
        })
        .collect()
}

/// Central first and second differences of a ↦ dim at `a` with step `h`.
pub fn finite_differences(a: f64, h: f64) -> Result<(f64, f64)> {
    if !(h > 0.0) || a - h <= 0.0 || a + h >= 1.0 {
        return param(format!(
            "finite differences need 0 < a - h < a + h < 1 (a = {a}, h = {h})"
        ));
    }
    let s = |x: f64| -> Result<f64> { Ok(dimension(AspectParam::new(x)?, MIN_DIMENSION_TOL)?.s) };
    let (minus, centre, plus) = (s(a - h)?, s(a)?, s(a + h)?);
    Ok((
        (plus - minus) / (2.0 * h),
        (plus - 2.0 * centre + minus) / (h * h),
    ))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaxCheckReport {
    pub a: f64,
    pub h: f64,
    pub s: f64,
    pub slope: f64,
    pub second_difference: f64,
    pub passed: bool,
}

/// Checks that the dimension has a local maximum at a = 1/√3.
pub fn verify_max_at_koch(h: f64) -> Result<MaxCheckReport> {
    if !(h > 0.0 && h <= 1e-4) {
        return param(format!("step must lie in (0, 1e-4], got {h}"));
    }
    let a = AspectParam::koch().value();
    let (slope, second) = finite_differences(a, h)?;
    let s = dimension(AspectParam::koch(), MIN_DIMENSION_TOL)?.s;
    Ok(MaxCheckReport {
        a,
        h,
        s,
        slope,
        second_difference: second,
        passed: slope.abs() < 1e-4 && second < 0.0,
    })
}

/// Area enclosed by the limit curve: 8a/(1 + 4a² − a⁴).
pub fn area_closed_form(a: AspectParam) -> f64 {
    let a = a.value();
    let a2 = a * a;
    8.0 * a / (1.0 + 4.0 * a2 - a2 * a2)
}

/// Area of the curve's region inside one triangle of the quadrant
/// decomposition: a(3 − 4a² + a⁴) / (2(1 + 4a² − a⁴)).
pub fn shaded_x(a: AspectParam) -> f64 {
    let a = a.value();
    let a2 = a * a;
    a * (3.0 - 4.0 * a2 + a2 * a2) / (2.0 * (1.0 + 4.0 * a2 - a2 * a2))
}

/// x minus the right side of the self-similar area balance
/// x = a(1−a²)²/2 + [a(1−a⁴)/4 − a²x] + 2((1−a²)/2)²x.
pub fn shaded_x_residual(a: AspectParam, x: f64) -> f64 {
    let a = a.value();
    let a2 = a * a;
    let c = (1.0 - a2) / 2.0;
    let rhs = a * (1.0 - a2).powi(2) / 2.0 + (a * (1.0 - a2 * a2) / 4.0 - a2 * x) + 2.0 * c * c * x;
    x - rhs
}

/// Diameters of the height-1 wedge and dart.
pub fn wedge_dart_diameters(a: AspectParam) -> (f64, f64) {
    let a = a.value();
    let w = (1.0 + a * a).powf(1.5) / (2.0 * a);
    let d = (2.0 * a).max((1.0 + a * a).sqrt());
    (w, d)
}

/// Minimum cloud size for [`box_counting`].
pub const MIN_BOX_POINTS: usize = 10_000;

/// Coarse levels left out of the box-counting fit.
pub const BOX_DISCARD: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoxLevel {
    pub epsilon: f64,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxCountReport {
    pub levels: Vec<BoxLevel>,
    /// Number of levels that entered the fit.
    pub fitted: usize,
    pub slope: f64,
    pub r_squared: f64,
}

/// Least-squares line through (x, y); returns (slope, intercept, R²).
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let slope = sxy / sxx;
    let r2 = if syy > 0.0 {
        sxy * sxy / (sxx * syy)
    } else {
        1.0
    };
    (slope, my - slope * mx, r2)
}

/// Box-counting estimate over `levels` dyadic grids anchored at the origin.
///
/// The coarsest cell is the smallest power of two covering the cloud's
/// extent; each level halves it.
pub fn box_counting(points: &[Point], levels: usize) -> Result<BoxCountReport> {
    if points.len() < MIN_BOX_POINTS {
        return param(format!(
            "box counting needs at least {MIN_BOX_POINTS} points, got {}",
            points.len()
        ));
    }
    if !(4..=12).contains(&levels) {
        return param(format!(
            "box counting levels must lie in 4..=12, got {levels}"
        ));
    }
    if points.iter().any(|p| !p.is_finite()) {
        return param("box counting needs finite points");
    }
    let extent = points
        .iter()
        .fold(0.0f64, |m, p| m.max(p.x.abs()).max(p.y.abs()));
    let eps0 = 2f64.powi(extent.max(f64::MIN_POSITIVE).log2().ceil() as i32);
    let table: Vec<BoxLevel> = (0..levels)
        .into_par_iter()
        .map(|j| {
            let eps = eps0 / 2f64.powi(j as i32);
            let cells: HashSet<(i64, i64)> = points
                .iter()
                .map(|p| ((p.x / eps).floor() as i64, (p.y / eps).floor() as i64))
                .collect();
            BoxLevel {
                epsilon: eps,
                count: cells.len(),
            }
        })
        .collect();
    let used = &table[BOX_DISCARD..];
    let xs: Vec<f64> = used.iter().map(|l| (1.0 / l.epsilon).ln()).collect();
    let ys: Vec<f64> = used.iter().map(|l| (l.count as f64).ln()).collect();
    let (slope, _, r_squared) = linear_fit(&xs, &ys);
    let fitted = used.len();
    Ok(BoxCountReport {
        levels: table,
        fitted,
        slope,
        r_squared,
    })
}

/// Shoelace area of the contact polyline; k must be even and at least 4.
pub fn empirical_area(s: &GasketState) -> Result<f64> {
    if s.k() < 4 || !s.k().is_multiple_of(2) {
        return param(format!(
            "empirical area needs an even iteration of at least 4, got {}",
            s.k()
        ));
    }
    Ok(polyline(s)?.signed_area().abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::polygon_diameter;
    use crate::substitution::{run_to, Templates};

    const LOG3_4: f64 = 1.261_859_507_142_914_8;

    #[test]
    fn koch_dimension() {
        let r = dimension(AspectParam::koch(), 1e-13).unwrap();
        assert!((r.s - LOG3_4).abs() < 1e-12, "{}", r.s);
        assert!(r.residual <= 1e-13);
        assert!(r.bracket.0 <= r.s && r.s <= r.bracket.1);
    }

    #[test]
    fn near_boundary_dimension() {
        let r = dimension(AspectParam::from_complement(1e-16).unwrap(), 1e-13).unwrap();
        assert!((r.s - 1.018).abs() < 1e-3, "{}", r.s);
    }

    #[test]
    fn half_brackets() {
        let a = AspectParam::new(0.5).unwrap();
        assert!(moran_residual(a, 1.25) > 0.0 && moran_residual(a, 1.26) < 0.0);
        let s = dimension(a, 1e-12).unwrap().s;
        assert!(s > 1.25 && s < 1.26);
    }

    #[test]
    fn tolerance_floor() {
        assert!(dimension(AspectParam::koch(), 1e-14).is_err());
        assert!(dimension(AspectParam::koch(), f64::NAN).is_err());
    }

    #[test]
    fn profile_shape() {
        let rows = dimension_profile(0.05, 0.95, 19).unwrap();
        assert_eq!(rows.len(), 19);
        let best = rows.iter().max_by(|x, y| x.s.total_cmp(&y.s)).unwrap();
        let nearest = rows
            .iter()
            .min_by(|x, y| (x.a - 0.5774).abs().total_cmp(&(y.a - 0.5774).abs()))
            .unwrap();
        assert_eq!(best.a, nearest.a);
        assert!(rows
            .iter()
            .all(|r| r.residual <= 1e-12 && r.s > 1.0 && r.s < 2.0));
        let ends = dimension_profile(0.01, 0.99, 2).unwrap();
        assert!(ends[0].s > 1.0 && ends[0].s < 1.1);
        assert!(ends[1].s > 1.0 && ends[1].s < 1.35);
        assert!(dimension_profile(0.5, 0.4, 3).is_err());
        assert!(dimension_profile(0.1, 0.4, 1).is_err());
    }

    #[test]
    fn maximum_at_koch() {
        let r = verify_max_at_koch(1e-5).unwrap();
        assert!(r.passed, "{r:?}");
        let (slope, _) = finite_differences(0.4, 1e-5).unwrap();
        assert!(slope > 0.01);
        assert!(verify_max_at_koch(1e-3).is_err());
    }

    #[test]
    fn area_values() {
        let r3 = 3f64.sqrt();
        assert!((area_closed_form(AspectParam::koch()) - 6.0 * r3 / 5.0).abs() < 1e-12);
        assert!((area_closed_form(AspectParam::new(0.5).unwrap()) - 64.0 / 31.0).abs() < 1e-12);
        assert!(area_closed_form(AspectParam::new(1e-9).unwrap()) < 1e-7);
        // Derivative numerator 1 − 4a² + 3a⁴ vanishes at 1/√3.
        let h = 1e-6;
        let f = |a: f64| area_closed_form(AspectParam::new(a).unwrap());
        let k = 1.0 / r3;
        assert!(((f(k + h) - f(k - h)) / (2.0 * h)).abs() < 1e-6);
    }

    #[test]
    fn shaded_part() {
        let k = AspectParam::koch();
        let x = shaded_x(k);
        assert!((x - 0.4 / 3f64.sqrt()).abs() < 1e-12);
        assert!((2.0 * k.value() + 4.0 * x - area_closed_form(k)).abs() < 1e-12);
        for i in 1..=9 {
            let a = AspectParam::new(i as f64 / 10.0).unwrap();
            assert!(shaded_x_residual(a, shaded_x(a)).abs() < 1e-12);
        }
        let half = AspectParam::new(0.5).unwrap();
        assert!((4.0 * shaded_x(half) - (64.0 / 31.0 - 1.0)).abs() < 1e-12);
    }

    #[test]
    fn diameters_match_templates() {
        let (w, d) = wedge_dart_diameters(AspectParam::new(0.5).unwrap());
        assert!((w - 1.397_542_485).abs() < 1e-8);
        assert!((d - 1.118_033_989).abs() < 1e-8);
        let k = 1.0 / 3f64.sqrt();
        assert!((2.0 * k - (1.0 + k * k).sqrt()).abs() < 1e-15);
        for a in [0.2, 0.5, k, 0.8] {
            let t = Templates::new(a).unwrap();
            let (w, d) = wedge_dart_diameters(AspectParam::new(a).unwrap());
            assert!((polygon_diameter(&t.wedge().polygon) - w).abs() < 1e-9);
            assert!((polygon_diameter(&t.dart().polygon) - d).abs() < 1e-9);
            assert!(w < 2.0 / a && d < 2.0 / a);
        }
    }

    #[test]
    fn box_counting_segment() {
        let pts: Vec<Point> = (0..20_000)
            .map(|i| Point::new(i as f64 / 20_000.0 * 0.9, 0.3))
            .collect();
        let r = box_counting(&pts, 10).unwrap();
        assert!((r.slope - 1.0).abs() < 0.05, "{r:?}");
        assert!(r.levels.windows(2).all(|w| w[0].count <= w[1].count));
        assert!(box_counting(&pts[..100], 10).is_err());
        assert!(box_counting(&pts, 3).is_err());
    }

    #[test]
    fn empirical_area_domain() {
        let s = run_to(AspectParam::koch(), 5).unwrap();
        assert!(empirical_area(&s).is_err());
        let s = run_to(AspectParam::koch(), 2).unwrap();
        assert!(empirical_area(&s).is_err());
        let s = run_to(AspectParam::koch(), 8).unwrap();
        let err = (empirical_area(&s).unwrap() - area_closed_form(s.a())).abs();
        assert!(err <= crate::substitution::union_area(&s) + 1e-9);
    }
}
