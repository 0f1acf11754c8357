//! Hyperbolic areas of regions of the fundamental domain: closed forms for
//! metric balls about i and for neighbourhoods of the imaginary axis, and a
//! generic iterated-quadrature routine for arbitrary regions.

use std::cell::Cell;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::hyperbolic::HPoint;
use crate::special::quadrature::{integrate_with, QuadratureOptions, QuadratureResult};

/// Area of the fundamental domain.
pub const OMEGA_AREA: f64 = PI / 3.0;

/// asinh(1/2) = ln((1 + sqrt 5)/2): balls about i stop being embedded.
pub const R_EMBEDDED: f64 = 0.481_211_825_059_603_4;

/// asinh(1/sqrt 3) = artanh(1/2) = ln(3)/2: balls about i reach the corner
/// e^{i pi/3}, which is also the farthest point from the imaginary axis.
pub const R_CORNER: f64 = 0.549_306_144_334_054_8;

/// Hyperbolic area of the intersection of the fundamental domain with the
/// ball of radius `r` about i.
pub fn area_ball_cap(r: f64) -> f64 {
    assert!(r >= 0.0, "negative radius {r}");
    let s = r.sinh();
    let half = (0.5 * r).sinh();
    if r <= R_EMBEDDED {
        2.0 * PI * half * half
    } else if r <= R_CORNER {
        // ball minus the two caps beyond |Re z| = 1/2
        let c = r.cosh();
        let q = (4.0 * s * s - 1.0).max(0.0).sqrt();
        2.0 * PI * half * half + 4.0 * q.atan() - 2.0 * c * (4.0 * c * q / (4.0 - 6.0 * s * s)).atan()
    } else {
        // domain minus the part above the ball's upper arc; the arc height
        // integral is done with x = sinh(r) sin(theta)
        let c = r.cosh();
        let theta = (0.5 / s).asin();
        OMEGA_AREA - 2.0 * theta + 4.0 * c * ((-r).exp() * (0.5 * theta).tan()).atan()
    }
}

/// Hyperbolic area of `{z in fundamental domain : d(z, iR) <= r}`.
pub fn area_cone_strip(r: f64) -> f64 {
    assert!(r >= 0.0, "negative radius {r}");
    if r == 0.0 {
        return 0.0;
    }
    let t = r.tanh();
    if t <= 0.5 {
        let s = r.sinh();
        2.0 * s.atan() + 2.0 * s * (1.0 / (2.0 * t)).ln()
    } else {
        OMEGA_AREA
    }
}

/// Axis-aligned rectangle in the upper half-plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct RegionQuadrature {
    pub tol: f64,
    /// Log-spaced heights probed per vertical line before bisecting each
    /// membership change.
    pub scan_points: usize,
    /// Cap on indicator evaluations.
    pub budget: usize,
}

impl RegionQuadrature {
    pub fn new(tol: f64) -> Self {
        Self {
            tol,
            scan_points: 2048,
            budget: 100_000_000,
        }
    }
}

/// Hyperbolic area `∬ dx dy / y^2` of `{p in bounds : indicator(p)}`.
///
/// Each vertical line is scanned on a log-spaced grid; every change of
/// membership is located by bisection and the `dy / y^2` integral over the
/// resulting intervals is exact. The line integrals are then integrated in
/// `x` adaptively. Features thinner than the scan spacing are missed, so the
/// routine is suited to regions bounded by a few smooth arcs.
pub fn area_region<F>(indicator: F, bounds: Rect, opts: &RegionQuadrature) -> Result<QuadratureResult>
where
    F: Fn(HPoint) -> bool,
{
    let Rect { x_min, x_max, y_min, y_max } = bounds;
    if !(y_min > 0.0 && y_max > y_min && x_max >= x_min && x_min.is_finite() && x_max.is_finite() && y_max.is_finite()) {
        return Err(Error::InvalidInput(format!("bad bounds {bounds:?}")));
    }
    if opts.scan_points < 2 {
        return Err(Error::InvalidInput("scan_points must be at least 2".into()));
    }
    let evaluations = Cell::new(0usize);
    let exhausted = Cell::new(false);
    let (ly0, ly1) = (y_min.ln(), y_max.ln());
    let step = (ly1 - ly0) / (opts.scan_points - 1) as f64;

    let member = |x: f64, ly: f64| {
        evaluations.set(evaluations.get() + 1);
        let y = ly.exp().clamp(y_min, y_max);
        indicator(HPoint::new(x, y).expect("bounds lie in the upper half-plane"))
    };
    let line = |x: f64| -> f64 {
        if exhausted.get() || evaluations.get() > opts.budget {
            exhausted.set(true);
            return 0.0;
        }
        let mut total = 0.0;
        let mut inside = member(x, ly0);
        let mut start = if inside { y_min } else { 0.0 };
        for k in 1..opts.scan_points {
            let lhi = if k + 1 == opts.scan_points { ly1 } else { ly0 + step * k as f64 };
            let now = member(x, lhi);
            if now != inside {
                let (mut lo, mut hi) = (ly0 + step * (k - 1) as f64, lhi);
                while hi - lo > 1e-15 {
                    let mid = 0.5 * (lo + hi);
                    if mid <= lo || mid >= hi {
                        break;
                    }
                    if member(x, mid) == inside {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                let edge = (0.5 * (lo + hi)).exp();
                if inside {
                    total += 1.0 / start - 1.0 / edge;
                } else {
                    start = edge;
                }
                inside = now;
            }
        }
        if inside {
            total += 1.0 / start - 1.0 / y_max;
        }
        total
    };

    let outer = QuadratureOptions::new(opts.tol).budget(usize::MAX);
    let result = integrate_with(line, x_min, x_max, &outer)?;
    if exhausted.get() {
        return Err(Error::BudgetExhausted {
            evaluations: evaluations.get(),
            error_estimate: result.error_estimate,
        });
    }
    Ok(QuadratureResult {
        evaluations: evaluations.get(),
        ..result
    })
}
