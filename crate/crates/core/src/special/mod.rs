//! Special functions used by the closed-form moments, and the quadrature
//! engine that every numerical cross-check is built on.

pub mod quadrature;

pub use quadrature::{integrate, integrate_with, Endpoints, QuadratureOptions, QuadratureResult};

use std::f64::consts::PI;

/// Catalan's constant G = sum (-1)^n / (2n+1)^2.
pub const CATALAN: f64 = 0.915_965_594_177_219_015_054_603_514_932_384_110_774;

pub fn catalan_constant() -> f64 {
    CATALAN
}

/// Real dilogarithm Li2(x) on [-1, 1].
///
/// The power series is used for |x| <= 1/2. Above 1/2 the reflection
/// Li2(x) + Li2(1-x) = pi^2/6 - ln(x) ln(1-x) moves the argument into the
/// series range, and below -1/2 the Landen identity
/// Li2(x) = -Li2(x/(x-1)) - ln^2(1-x)/2 maps it into (1/3, 1/2].
pub fn dilog(x: f64) -> f64 {
    assert!((-1.0..=1.0).contains(&x), "dilog argument {x} outside [-1, 1]");
    if x == 1.0 {
        PI * PI / 6.0
    } else if x > 0.5 {
        PI * PI / 6.0 - x.ln() * (-x).ln_1p() - dilog_series(1.0 - x)
    } else if x < -0.5 {
        let l = (-x).ln_1p();
        -dilog_series(x / (x - 1.0)) - 0.5 * l * l
    } else {
        dilog_series(x)
    }
}

fn dilog_series(x: f64) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    let mut sum = 0.0;
    let mut power = 1.0;
    for n in 1..200u32 {
        power *= x;
        let term = power / f64::from(n * n);
        sum += term;
        if term.abs() < 1e-18 * sum.abs() {
            break;
        }
    }
    sum
}

/// 4 sum_{n>=0} (-1)^n / (3^n (2n+1)^2), i.e. the Lerch transcendent
/// Phi(-1/3, 2, 1/2).
pub fn lerch_special() -> f64 {
    let mut sum = 0.0;
    let mut scale = 1.0;
    for n in 0..100u32 {
        let k = f64::from(2 * n + 1);
        let term = scale / (k * k);
        sum += term;
        if term.abs() < 1e-18 {
            break;
        }
        scale /= -3.0;
    }
    4.0 * sum
}
