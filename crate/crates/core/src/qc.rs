//! Affine quasiconformal maps between flat tori.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hyperbolic::{dist_h2, HPoint};
use crate::modular::{orbit_points, reduce, SQUARE_ORBIT_DEPTH};

/// `z -> a z + b conj(z)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AffineMap {
    pub a: Complex64,
    pub b: Complex64,
}

impl AffineMap {
    pub const IDENTITY: AffineMap = AffineMap { a: Complex64::new(1.0, 0.0), b: Complex64::new(0.0, 0.0) };

    /// Fails unless the map preserves orientation (`|a| > |b|`).
    pub fn new(a: Complex64, b: Complex64) -> Result<Self> {
        let m = Self { a, b };
        m.check()?;
        Ok(m)
    }

    fn check(&self) -> Result<()> {
        let (na, nb) = (self.a.norm(), self.b.norm());
        if na > nb {
            Ok(())
        } else {
            Err(Error::NotInvertible { a_abs: na, b_abs: nb })
        }
    }

    pub fn apply(&self, z: Complex64) -> Complex64 {
        self.a * z + self.b * z.conj()
    }
}

/// The affine map sending the lattice `<1, i>` to `<1, tau>` with 1 fixed
/// and `i -> tau`.
pub fn extremal_map(tau: HPoint) -> AffineMap {
    let t = tau.to_complex();
    let it = Complex64::i() * t;
    AffineMap { a: (1.0 - it) / 2.0, b: (1.0 + it) / 2.0 }
}

/// `log K` with `K = (|a| + |b|)/(|a| - |b|)`.
pub fn log_distortion(m: &AffineMap) -> Result<f64> {
    m.check()?;
    let (na, nb) = (m.a.norm(), m.b.norm());
    // |a|^2 - |b|^2 as a product of sums and differences avoids cancellation
    let gap = (m.a.re - m.b.re) * (m.a.re + m.b.re) + (m.a.im - m.b.im) * (m.a.im + m.b.im);
    if gap.is_nan() || gap <= 0.0 {
        return Err(Error::NotInvertible { a_abs: na, b_abs: nb });
    }
    let sum = na + nb;
    Ok((sum * sum / gap).ln())
}

pub fn distortion(m: &AffineMap) -> Result<f64> {
    log_distortion(m).map(f64::exp)
}

/// Least distortion of a map between the tori with period ratios `tau1`,
/// `tau2`: the exponential of their distance on the moduli space, found by
/// minimizing over modular images of the reduced `tau2`.
pub fn extremal_distortion_between(tau1: HPoint, tau2: HPoint) -> Result<f64> {
    let p = reduce(tau1)?.reduced.point();
    let q = reduce(tau2)?.reduced.point();
    let d = orbit_points(q, SQUARE_ORBIT_DEPTH)
        .into_iter()
        .map(|w| dist_h2(p, w))
        .fold(f64::INFINITY, f64::min);
    Ok(d.exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modular::{quotient_dist_to_rect, quotient_dist_to_square};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn hp(x: f64, y: f64) -> HPoint {
        HPoint::new(x, y).unwrap()
    }

    #[test]
    fn square_is_identity() {
        let m = extremal_map(HPoint::I);
        assert_eq!(m, AffineMap::IDENTITY);
        assert_eq!(distortion(&m).unwrap(), 1.0);
    }

    #[test]
    fn doubled_height() {
        let m = extremal_map(hp(0.0, 2.0));
        assert!((m.a - Complex64::new(1.5, 0.0)).norm() < 1e-15);
        assert!((m.b - Complex64::new(-0.5, 0.0)).norm() < 1e-15);
        assert!((m.apply(Complex64::i()) - Complex64::new(0.0, 2.0)).norm() < 1e-15);
        let k = distortion(&m).unwrap();
        assert!((k - 2.0).abs() < 1e-15);
        assert!((k - dist_h2(HPoint::I, hp(0.0, 2.0)).exp()).abs() < 1e-14);
    }

    #[test]
    fn rejects_orientation_reversing() {
        let err = AffineMap::new(Complex64::new(0.5, 0.0), Complex64::new(1.0, 0.0));
        assert!(matches!(err, Err(Error::NotInvertible { .. })));
        let m = AffineMap { a: Complex64::new(1.0, 0.0), b: Complex64::new(0.0, 1.0) };
        assert!(distortion(&m).is_err());
    }

    #[test]
    fn log_distortion_is_distance_from_square() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..1000 {
            let x: f64 = rng.random_range(-0.5..0.5);
            let y = (1.0 - x * x).sqrt() / rng.random_range(1e-6..1.0f64);
            let tau = hp(x, y);
            let lhs = log_distortion(&extremal_map(tau)).unwrap();
            assert!((lhs - dist_h2(HPoint::I, tau)).abs() < 1e-12, "{tau:?}");
        }
    }

    #[test]
    fn between_examples() {
        let tau = hp(0.3, 1.7);
        assert!((extremal_distortion_between(tau, tau).unwrap() - 1.0).abs() < 1e-12);
        assert!((extremal_distortion_between(tau, hp(1.3, 1.7)).unwrap() - 1.0).abs() < 1e-12);
        let hex = hp(0.5, 3f64.sqrt() / 2.0);
        let k = extremal_distortion_between(hex, HPoint::I).unwrap();
        assert!((k - 3f64.sqrt()).abs() < 1e-12);
        let k = extremal_distortion_between(tau, HPoint::I).unwrap();
        assert!((k - quotient_dist_to_square(tau).unwrap().exp()).abs() < 1e-12);
    }

    #[test]
    fn rect_distortion_bound() {
        let mut rng = ChaCha8Rng::seed_from_u64(19);
        for _ in 0..10_000 {
            let tau = hp(rng.random_range(-3.0..3.0), rng.random_range(0.05..5.0));
            let k = quotient_dist_to_rect(tau).unwrap().exp();
            assert!((1.0..=3f64.sqrt() + 1e-12).contains(&k));
        }
    }

    fn point() -> impl Strategy<Value = HPoint> {
        (-2.0..2.0f64, 0.2..4.0f64).prop_map(|(x, y)| hp(x, y))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn symmetric(p in point(), q in point()) {
            let a = extremal_distortion_between(p, q).unwrap();
            let b = extremal_distortion_between(q, p).unwrap();
            prop_assert!((a - b).abs() < 1e-12 * a.max(1.0));
        }

        #[test]
        fn submultiplicative(p in point(), q in point(), w in point()) {
            let k13 = extremal_distortion_between(p, w).unwrap();
            let k12 = extremal_distortion_between(p, q).unwrap();
            let k23 = extremal_distortion_between(q, w).unwrap();
            prop_assert!(k13 <= k12 * k23 * (1.0 + 1e-12));
        }

        #[test]
        fn periods_map_to_periods(p in point(), zr in -3.0..3.0f64, zi in -3.0..3.0f64) {
            let m = extremal_map(p);
            let z = Complex64::new(zr, zi);
            prop_assert!((m.apply(z + 1.0) - m.apply(z) - 1.0).norm() < 1e-12);
            let di = m.apply(z + Complex64::i()) - m.apply(z);
            prop_assert!((di - p.to_complex()).norm() < 1e-12);
        }
    }
}
