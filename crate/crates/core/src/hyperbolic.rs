//! Upper half-plane and Poincare disk: points, Moebius maps, distances,
//! and metric balls.

use std::f64::consts::PI;
use std::ops::Mul;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A point of the upper half-plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HPoint {
    x: f64,
    y: f64,
}

impl HPoint {
    /// The base point i.
    pub const I: HPoint = HPoint { x: 0.0, y: 1.0 };

    pub fn new(x: f64, y: f64) -> Result<Self> {
        if x.is_finite() && y.is_finite() && y > 0.0 {
            Ok(Self { x, y })
        } else {
            Err(Error::NotInUpperHalfPlane { x, y })
        }
    }

    pub fn from_complex(z: Complex64) -> Result<Self> {
        Self::new(z.re, z.im)
    }

    pub fn x(&self) -> f64 {
        self.x
    }

    pub fn y(&self) -> f64 {
        self.y
    }

    pub fn to_complex(self) -> Complex64 {
        Complex64::new(self.x, self.y)
    }

    pub fn norm_sqr(&self) -> f64 {
        self.x * self.x + self.y * self.y
    }

    /// Argument in (0, pi).
    pub fn arg(&self) -> f64 {
        self.y.atan2(self.x)
    }
}

/// A point of the open unit disk.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DPoint {
    u: f64,
    v: f64,
}

impl DPoint {
    pub const ORIGIN: DPoint = DPoint { u: 0.0, v: 0.0 };

    pub fn new(u: f64, v: f64) -> Result<Self> {
        if u.is_finite() && v.is_finite() && u * u + v * v < 1.0 {
            Ok(Self { u, v })
        } else {
            Err(Error::NotInUnitDisk { u, v })
        }
    }

    pub fn u(&self) -> f64 {
        self.u
    }

    pub fn v(&self) -> f64 {
        self.v
    }

    pub fn to_complex(self) -> Complex64 {
        Complex64::new(self.u, self.v)
    }

    pub fn abs(&self) -> f64 {
        self.u.hypot(self.v)
    }
}

/// A 2x2 complex matrix with determinant one, acting by linear fractional
/// transformations. `m` and `-m` act identically and are not distinguished.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MoebiusMap {
    pub a: Complex64,
    pub b: Complex64,
    pub c: Complex64,
    pub d: Complex64,
}

impl MoebiusMap {
    pub const IDENTITY: MoebiusMap = MoebiusMap {
        a: Complex64::new(1.0, 0.0),
        b: Complex64::new(0.0, 0.0),
        c: Complex64::new(0.0, 0.0),
        d: Complex64::new(1.0, 0.0),
    };

    /// Builds the map and rescales the entries so that `ad - bc = 1`.
    pub fn new(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Result<Self> {
        let entries = [a, b, c, d];
        if entries.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::DegenerateMap("non-finite entry".into()));
        }
        let det = a * d - b * c;
        if det.norm() == 0.0 {
            return Err(Error::DegenerateMap("zero determinant".into()));
        }
        let k = det.sqrt();
        Ok(Self {
            a: a / k,
            b: b / k,
            c: c / k,
            d: d / k,
        })
    }

    pub fn from_real(a: f64, b: f64, c: f64, d: f64) -> Result<Self> {
        Self::new(a.into(), b.into(), c.into(), d.into())
    }

    pub fn determinant(&self) -> Complex64 {
        self.a * self.d - self.b * self.c
    }

    pub fn trace(&self) -> Complex64 {
        self.a + self.d
    }

    pub fn inverse(&self) -> Self {
        Self {
            a: self.d,
            b: -self.b,
            c: -self.c,
            d: self.a,
        }
    }

    pub fn commutator(&self, other: &Self) -> Self {
        *self * *other * self.inverse() * other.inverse()
    }

    /// True when every entry is real up to `tol`.
    pub fn is_real(&self, tol: f64) -> bool {
        [self.a, self.b, self.c, self.d].iter().all(|z| z.im.abs() <= tol)
    }

    /// Action on the Riemann sphere minus infinity.
    pub fn apply(&self, z: Complex64) -> Result<Complex64> {
        let den = self.c * z + self.d;
        if den.norm() == 0.0 {
            return Err(Error::PoleHit);
        }
        Ok((self.a * z + self.b) / den)
    }

    /// Fixed points, the roots of `c z^2 + (d - a) z - b = 0`. A map with
    /// `c = 0` has infinity as a fixed point, which is omitted.
    pub fn fixed_points(&self) -> Vec<Complex64> {
        if self.c.norm() == 0.0 {
            let da = self.d - self.a;
            if da.norm() == 0.0 {
                return Vec::new();
            }
            return vec![self.b / da];
        }
        let p = self.d - self.a;
        let disc = (p * p + 4.0 * self.b * self.c).sqrt();
        vec![(-p + disc) / (2.0 * self.c), (-p - disc) / (2.0 * self.c)]
    }
}

impl Mul for MoebiusMap {
    type Output = MoebiusMap;

    fn mul(self, o: MoebiusMap) -> MoebiusMap {
        MoebiusMap {
            a: self.a * o.a + self.b * o.c,
            b: self.a * o.b + self.b * o.d,
            c: self.c * o.a + self.d * o.c,
            d: self.c * o.b + self.d * o.d,
        }
    }
}

/// A closed Euclidean disk (or circle, depending on use).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EuclideanDisk {
    pub center: Complex64,
    pub radius: f64,
}

impl EuclideanDisk {
    pub fn new(center: Complex64, radius: f64) -> Result<Self> {
        if radius >= 0.0 && radius.is_finite() {
            Ok(Self { center, radius })
        } else {
            Err(Error::InvalidInput(format!("disk radius {radius}")))
        }
    }

    pub fn contains(&self, z: Complex64) -> bool {
        (z - self.center).norm() <= self.radius
    }

    pub fn boundary_point(&self, theta: f64) -> Complex64 {
        self.center + Complex64::from_polar(self.radius, theta)
    }
}

/// Hyperbolic distance in the upper half-plane (curvature -1).
///
/// Evaluated as `2 asinh(|z - w| / (2 sqrt(y_z y_w)))`, which equals
/// `acosh(1 + |z - w|^2 / (2 y_z y_w))` but keeps full relative precision for
/// nearby points, where the `acosh` form loses about half its digits.
pub fn dist_h2(z: HPoint, w: HPoint) -> f64 {
    let chord = (z.x - w.x).hypot(z.y - w.y);
    2.0 * (chord / (2.0 * (z.y * w.y).sqrt())).asinh()
}

/// Hyperbolic distance in the unit disk from the origin to `w`.
pub fn dist_disk_from_origin(w: DPoint) -> f64 {
    2.0 * w.abs().atanh()
}

/// The Cayley map (1 + i tau)/(1 - i tau), sending i to the origin.
pub fn cayley(tau: HPoint) -> DPoint {
    let t = tau.to_complex();
    let i = Complex64::i();
    let w = (1.0 + i * t) / (1.0 - i * t);
    // |w| < 1 holds exactly on the upper half-plane; guard the rounding.
    let r = w.norm();
    let w = if r >= 1.0 { w * ((1.0 - f64::EPSILON) / r) } else { w };
    DPoint { u: w.re, v: w.im }
}

/// Action of `m` on the upper half-plane.
///
/// For real matrices the imaginary part is computed as `y / |cz + d|^2`,
/// which keeps full relative precision even far from the real axis.
pub fn apply_moebius(m: &MoebiusMap, z: HPoint) -> Result<HPoint> {
    if m.is_real(0.0) {
        let (a, b, c, d) = (m.a.re, m.b.re, m.c.re, m.d.re);
        let cx_d = c * z.x + d;
        let cy = c * z.y;
        let den = cx_d * cx_d + cy * cy;
        if den == 0.0 {
            return Err(Error::PoleHit);
        }
        let x = ((a * z.x + b) * cx_d + a * c * z.y * z.y) / den;
        let y = z.y / den;
        return HPoint::new(x, y);
    }
    let w = m.apply(z.to_complex())?;
    HPoint::from_complex(w)
}

/// Distance from `tau` to the imaginary axis, asinh(|x| / y).
pub fn dist_to_imaginary_axis(tau: HPoint) -> f64 {
    (tau.x.abs() / tau.y).asinh()
}

/// The hyperbolic ball of radius `r` about i, as a Euclidean disk.
pub fn ball_about_i(r: f64) -> EuclideanDisk {
    assert!(r >= 0.0, "negative radius {r}");
    EuclideanDisk {
        center: Complex64::new(0.0, r.cosh()),
        radius: r.sinh(),
    }
}

pub fn hyperbolic_disk_area(r: f64) -> f64 {
    let s = (0.5 * r).sinh();
    4.0 * PI * s * s
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn hp(x: f64, y: f64) -> HPoint {
        HPoint::new(x, y).unwrap()
    }

    fn random_point(rng: &mut impl Rng) -> HPoint {
        hp(rng.random_range(-3.0..3.0), (rng.random_range(-2.5f64..2.5)).exp())
    }

    /// Length of the geodesic from z to w, by integrating |dz|/y along it.
    fn geodesic_length_oracle(z: HPoint, w: HPoint) -> f64 {
        // Geodesic through z, w: a circle centered on the real axis.
        let c = (w.norm_sqr() - z.norm_sqr()) / (2.0 * (w.x - z.x));
        let t0 = z.y.atan2(z.x - c);
        let t1 = w.y.atan2(w.x - c);
        // with z = c + R e^{it}: |dz|/y = dt / sin t
        crate::special::integrate(|t: f64| 1.0 / t.sin(), t0.min(t1), t0.max(t1), 1e-14)
            .unwrap()
            .value
    }

    #[test]
    fn distance_examples() {
        assert_eq!(dist_h2(HPoint::I, HPoint::I), 0.0);
        assert!((dist_h2(HPoint::I, hp(0.0, 2.0)) - 2f64.ln()).abs() < 1e-15);
        let d = dist_h2(HPoint::I, hp(1.0, 1.0));
        assert!((d - 1.5f64.acosh()).abs() < 1e-15);
        assert!((d - geodesic_length_oracle(HPoint::I, hp(1.0, 1.0))).abs() < 1e-12);
        assert!((d - 0.962_42).abs() < 1e-5);
    }

    #[test]
    fn nearby_points_keep_relative_precision() {
        let z = hp(0.3, 0.7);
        for &eps in &[1e-12, 0.5e-6, 1e-6, 2e-6, 1e-3] {
            let w = hp(0.3, 0.7 + eps);
            // vertical separation: ln(y_w / y_z)
            let exact = ((w.y() - z.y()) / z.y()).ln_1p();
            assert!((dist_h2(z, w) - exact).abs() < 1e-14 * exact, "{eps}");
        }
        let far = dist_h2(hp(0.0, 1e-8), hp(0.0, 1e8));
        assert!((far - 16.0 * std::f64::consts::LN_10).abs() < 1e-13);
    }

    #[test]
    fn metric_axioms_on_random_triples() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..10_000 {
            let (a, b, c) = (random_point(&mut rng), random_point(&mut rng), random_point(&mut rng));
            assert_eq!(dist_h2(a, b), dist_h2(b, a));
            assert!(dist_h2(a, c) <= dist_h2(a, b) + dist_h2(b, c) + 1e-12);
        }
    }

    #[test]
    fn moebius_invariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..2_000 {
            let (a, b, c): (f64, f64, f64) = (
                rng.random_range(-3.0..3.0),
                rng.random_range(-3.0..3.0),
                rng.random_range(-3.0..3.0),
            );
            // choose d so that ad - bc = 1
            if a.abs() < 0.1 {
                continue;
            }
            let d = (1.0 + b * c) / a;
            let g = MoebiusMap::from_real(a, b, c, d).unwrap();
            let (z, w) = (random_point(&mut rng), random_point(&mut rng));
            let (gz, gw) = (apply_moebius(&g, z).unwrap(), apply_moebius(&g, w).unwrap());
            let (d0, d1) = (dist_h2(z, w), dist_h2(gz, gw));
            assert!((d0 - d1).abs() < 1e-10 * d0.max(1.0), "{d0} vs {d1}");
        }
    }

    #[test]
    fn moebius_examples_and_composition() {
        let s = MoebiusMap::from_real(0.0, -1.0, 1.0, 0.0).unwrap();
        let t = MoebiusMap::from_real(1.0, 1.0, 0.0, 1.0).unwrap();
        let id = MoebiusMap::IDENTITY;
        let z = hp(0.25, 1.7);
        assert_eq!(apply_moebius(&id, z).unwrap(), z);
        let si = apply_moebius(&s, HPoint::I).unwrap();
        assert!(si.x().abs() < 1e-15 && (si.y() - 1.0).abs() < 1e-15);
        assert_eq!(apply_moebius(&t, HPoint::I).unwrap(), hp(1.0, 1.0));

        let m1 = s * t;
        let lhs = apply_moebius(&m1, z).unwrap();
        let rhs = apply_moebius(&s, apply_moebius(&t, z).unwrap()).unwrap();
        assert!((lhs.x() - rhs.x()).abs() < 1e-12 && (lhs.y() - rhs.y()).abs() < 1e-12);
    }

    #[test]
    fn moebius_normalizes_determinant_and_detects_poles() {
        let m = MoebiusMap::from_real(2.0, 0.0, 0.0, 2.0).unwrap();
        assert!((m.determinant() - Complex64::new(1.0, 0.0)).norm() < 1e-12);
        assert!(MoebiusMap::from_real(1.0, 2.0, 2.0, 4.0).is_err());
        let s = MoebiusMap::from_real(0.0, -1.0, 1.0, 0.0).unwrap();
        assert_eq!(s.apply(Complex64::new(0.0, 0.0)), Err(Error::PoleHit));
    }

    #[test]
    fn disk_distance_and_cayley() {
        assert_eq!(dist_disk_from_origin(DPoint::ORIGIN), 0.0);
        let w = DPoint::new(0.5, 0.0).unwrap();
        assert!((dist_disk_from_origin(w) - 3f64.ln()).abs() < 1e-15);

        let c = cayley(HPoint::I);
        assert!(c.abs() < 1e-16);
        let c2 = cayley(hp(0.0, 2.0));
        assert!((c2.u() + 1.0 / 3.0).abs() < 1e-15 && c2.v().abs() < 1e-15);
        assert!((dist_disk_from_origin(c2) - 2f64.ln()).abs() < 1e-15);

        let eps = 1e-7;
        assert!(cayley(hp(0.0, 1.0 + eps)).abs() < 2.0 * eps);
    }

    #[test]
    fn cayley_conjugates_metrics() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..10_000 {
            let tau = random_point(&mut rng);
            let lhs = dist_disk_from_origin(cayley(tau));
            let rhs = dist_h2(HPoint::I, tau);
            assert!((lhs - rhs).abs() < 1e-12 * rhs.max(1.0), "{tau:?}: {lhs} vs {rhs}");
        }
    }

    /// Minimize t -> dist(tau, i t) on a log-spaced grid, then polish the
    /// bracketing cell by golden-section search.
    fn axis_distance_oracle(tau: HPoint) -> (f64, f64) {
        let f = |s: f64| dist_h2(tau, hp(0.0, s.exp()));
        let (lo, hi) = ((1e-3f64).ln(), (1e3f64).ln());
        let n = 10_000;
        let step = (hi - lo) / f64::from(n - 1);
        let (mut best_k, mut best) = (0, f64::INFINITY);
        for k in 0..n {
            let v = f(lo + step * f64::from(k));
            if v < best {
                best = v;
                best_k = k;
            }
        }
        let grid_min = best;
        let (mut a, mut b) = (
            lo + step * (f64::from(best_k) - 1.0),
            lo + step * (f64::from(best_k) + 1.0),
        );
        let g = 0.5 * (5f64.sqrt() - 1.0);
        for _ in 0..100 {
            let c = b - g * (b - a);
            let d = a + g * (b - a);
            if f(c) < f(d) {
                b = d;
            } else {
                a = c;
            }
        }
        (grid_min, f(0.5 * (a + b)).min(grid_min))
    }

    #[test]
    fn imaginary_axis_distance_examples() {
        assert_eq!(dist_to_imaginary_axis(hp(0.0, 3.3)), 0.0);
        let rho2 = hp(-0.5, 0.75f64.sqrt());
        let d = dist_to_imaginary_axis(rho2);
        assert!((d - 0.5 * 3f64.ln()).abs() < 1e-15);
        assert!((d - 0.5f64.atanh()).abs() < 1e-15);
        assert!((d - axis_distance_oracle(rho2).1).abs() < 1e-9);
        let d = dist_to_imaginary_axis(hp(1.0, 1.0));
        assert!((d - (1.0 + 2f64.sqrt()).ln()).abs() < 1e-15);
        assert!((d - axis_distance_oracle(hp(1.0, 1.0)).1).abs() < 1e-9);
    }

    #[test]
    fn imaginary_axis_distance_is_grid_minimum() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..1_000 {
            let tau = hp(rng.random_range(-2.0..2.0), (rng.random_range(-1.5f64..1.5)).exp());
            let d = dist_to_imaginary_axis(tau);
            let (grid, polished) = axis_distance_oracle(tau);
            assert!(d <= grid + 1e-12);
            assert!((d - polished).abs() < 1e-6, "{tau:?}: {d} vs {polished}");
        }
    }

    #[test]
    fn balls_about_i() {
        let b0 = ball_about_i(0.0);
        assert_eq!(b0.radius, 0.0);
        assert_eq!(b0.center, Complex64::new(0.0, 1.0));
        let b = ball_about_i(0.5f64.asinh());
        assert!((b.center.im - 5f64.sqrt() / 2.0).abs() < 1e-15);
        assert!((b.radius - 0.5).abs() < 1e-15);

        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..20 {
            let r = rng.random_range(0.0..3.0);
            let ball = ball_about_i(r);
            for _ in 0..100 {
                let p = ball.boundary_point(rng.random_range(0.0..2.0 * PI));
                let d = dist_h2(HPoint::I, HPoint::from_complex(p).unwrap());
                assert!((d - r).abs() < 1e-10, "r = {r}, d = {d}");
            }
        }
    }

    #[test]
    fn disk_area() {
        assert_eq!(hyperbolic_disk_area(0.0), 0.0);
        assert!((hyperbolic_disk_area(1.0) - 3.412_276_265_284_902).abs() < 1e-14);
        let r = 1e-3;
        assert!((hyperbolic_disk_area(r) - PI * r * r).abs() < r.powi(4));
    }

    #[test]
    fn fixed_points() {
        let t = MoebiusMap::from_real(2.0, 1.0, 1.0, 1.0).unwrap();
        for p in t.fixed_points() {
            assert!((t.apply(p).unwrap() - p).norm() < 1e-12);
        }
    }
}
