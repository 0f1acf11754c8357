//! Rectangular punctured-torus groups acting on the unit disk.
//!
//! The group is generated by a hyperbolic `f` with axis the real diameter
//! and a hyperbolic `g` with axis the imaginary diameter. The commutator is
//! parabolic exactly when `r s = 1`, and then the four isometric circles of
//! `f^{±1}`, `g^{±1}` bound an ideal quadrilateral.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hyperbolic::{EuclideanDisk, MoebiusMap};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RectangularGroup {
    pub r: f64,
    pub s: f64,
    pub a: MoebiusMap,
    pub b: MoebiusMap,
}

/// The punctured-torus group with `s = 1/r`.
pub fn make_group(r: f64) -> Result<RectangularGroup> {
    make_group_rs(r, 1.0 / r)
}

/// The two-parameter family; only `r s = 1` gives a punctured torus.
pub fn make_group_rs(r: f64, s: f64) -> Result<RectangularGroup> {
    if !(r > 0.0 && r.is_finite()) || !(s > 0.0 && s.is_finite()) {
        return Err(Error::InvalidInput(format!("group parameters r = {r}, s = {s}")));
    }
    let ar = (r * r + 1.0).sqrt() / r;
    let bs = (s * s + 1.0).sqrt() / s;
    let c = |re: f64, im: f64| Complex64::new(re, im);
    // both determinants are exactly 1 in exact arithmetic
    let a = MoebiusMap { a: c(ar, 0.0), b: c(1.0 / r, 0.0), c: c(1.0 / r, 0.0), d: c(ar, 0.0) };
    let b = MoebiusMap { a: c(bs, 0.0), b: c(0.0, 1.0 / s), c: c(0.0, -1.0 / s), d: c(bs, 0.0) };
    Ok(RectangularGroup { r, s, a, b })
}

impl RectangularGroup {
    pub fn commutator(&self) -> MoebiusMap {
        self.a.commutator(&self.b)
    }

    pub fn commutator_trace(&self) -> Complex64 {
        self.commutator().trace()
    }

    pub fn is_punctured_torus(&self, tol: f64) -> bool {
        (self.r * self.s - 1.0).abs() <= tol
    }

    /// The generators `f, f^-1, g, g^-1` in that order.
    pub fn generators(&self) -> [MoebiusMap; 4] {
        [self.a, self.a.inverse(), self.b, self.b.inverse()]
    }
}

/// `f(z) = (sqrt(r^2+1) z + 1)/(z + sqrt(r^2+1))`.
pub fn mobius_f(g: &RectangularGroup, z: Complex64) -> Result<Complex64> {
    g.a.apply(z)
}

pub fn mobius_g(g: &RectangularGroup, z: Complex64) -> Result<Complex64> {
    g.b.apply(z)
}

/// Isometric circle `|c z + d| = 1` of a map with `c != 0`.
pub fn isometric_circle(m: &MoebiusMap) -> Result<EuclideanDisk> {
    if m.c.norm() == 0.0 {
        return Err(Error::DegenerateMap("isometric circle of an affine map".into()));
    }
    EuclideanDisk::new(-m.d / m.c, 1.0 / m.c.norm())
}

/// Ideal quadrilateral cut out of the unit disk by four circles orthogonal
/// to the unit circle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IdealQuadrilateral {
    pub l_f: EuclideanDisk,
    pub l_f_inv: EuclideanDisk,
    pub l_g: EuclideanDisk,
    pub l_g_inv: EuclideanDisk,
    /// Counter-clockwise from the third quadrant: `l_f ∩ l_g`,
    /// `l_g ∩ l_f_inv`, `l_f_inv ∩ l_g_inv`, `l_g_inv ∩ l_f`.
    pub vertices: [Complex64; 4],
}

impl IdealQuadrilateral {
    pub fn circles(&self) -> [EuclideanDisk; 4] {
        [self.l_f, self.l_f_inv, self.l_g, self.l_g_inv]
    }

    /// Open interior: inside the unit disk and outside all four disks.
    pub fn contains(&self, z: Complex64) -> bool {
        z.norm() < 1.0 && self.circles().iter().all(|c| (z - c.center).norm() > c.radius)
    }
}

/// The two points where a circle orthogonal to the unit circle meets it.
fn unit_circle_feet(c: &EuclideanDisk) -> [Complex64; 2] {
    let n = c.center.norm_sqr();
    let rot = Complex64::new(1.0, c.radius);
    let rot_bar = rot.conj();
    [c.center * rot / n, c.center * rot_bar / n]
}

fn common_foot(p: &EuclideanDisk, q: &EuclideanDisk) -> Complex64 {
    let fp = unit_circle_feet(p);
    let fq = unit_circle_feet(q);
    let mut best = (f64::INFINITY, fp[0]);
    for u in fp {
        for v in fq {
            let d = (u - v).norm();
            if d < best.0 {
                best = (d, (u + v) / 2.0);
            }
        }
    }
    let z = best.1;
    z / z.norm()
}

/// The four isometric circles and the ideal vertices where they meet.
pub fn isometric_circles(g: &RectangularGroup) -> Result<IdealQuadrilateral> {
    if !g.is_punctured_torus(1e-12) {
        return Err(Error::InvalidInput(format!(
            "isometric circles meet on the unit circle only when r s = 1 (got {})",
            g.r * g.s
        )));
    }
    let [f, f_inv, gg, g_inv] = g.generators();
    let l_f = isometric_circle(&f)?;
    let l_f_inv = isometric_circle(&f_inv)?;
    let l_g = isometric_circle(&gg)?;
    let l_g_inv = isometric_circle(&g_inv)?;
    let vertices = [
        common_foot(&l_f, &l_g),
        common_foot(&l_g, &l_f_inv),
        common_foot(&l_f_inv, &l_g_inv),
        common_foot(&l_g_inv, &l_f),
    ];
    Ok(IdealQuadrilateral { l_f, l_f_inv, l_g, l_g_inv, vertices })
}

/// Largest distance from `m` applied to `samples` points of `from` to the
/// circle `to`.
pub fn side_pairing_error(m: &MoebiusMap, from: &EuclideanDisk, to: &EuclideanDisk, samples: usize) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for k in 0..samples {
        let theta = std::f64::consts::TAU * (k as f64 + 0.5) / samples as f64;
        let w = m.apply(from.boundary_point(theta))?;
        worst = worst.max(((w - to.center).norm() - to.radius).abs());
    }
    Ok(worst)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SquareGroupReport {
    pub vertices: [Complex64; 4],
    /// Largest distance from a vertex to the nearest of `(±1±i)/sqrt 2`.
    pub vertex_error: f64,
    pub f_fixed_points: Vec<Complex64>,
    pub g_fixed_points: Vec<Complex64>,
    /// Angle between the axes of `f` and `g` at their crossing.
    pub axis_angle: f64,
    pub pass: bool,
}

/// Checks that `r = s = 1` gives the ideal square whose generator axes are
/// the real and imaginary diameters, crossing at right angles at 0.
pub fn square_group_check() -> Result<SquareGroupReport> {
    let g = make_group(1.0)?;
    let q = isometric_circles(&g)?;
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let expected = [(-h, -h), (h, -h), (h, h), (-h, h)].map(|(x, y)| Complex64::new(x, y));
    let vertex_error = q
        .vertices
        .iter()
        .map(|v| expected.iter().map(|e| (v - e).norm()).fold(f64::INFINITY, f64::min))
        .fold(0.0, f64::max);
    let f_fixed_points = g.a.fixed_points();
    let g_fixed_points = g.b.fixed_points();
    let axis_angle = match (&f_fixed_points[..], &g_fixed_points[..]) {
        ([f0, f1], [g0, g1]) => ((g1 - g0) / (f1 - f0)).arg().abs().rem_euclid(std::f64::consts::PI),
        _ => f64::NAN,
    };
    let on = |pts: &[Complex64], targets: [Complex64; 2]| {
        pts.len() == 2 && targets.iter().all(|t| pts.iter().any(|p| (p - t).norm() < 1e-12))
    };
    let pass = vertex_error < 1e-12
        && on(&f_fixed_points, [Complex64::new(1.0, 0.0), Complex64::new(-1.0, 0.0)])
        && on(&g_fixed_points, [Complex64::new(0.0, 1.0), Complex64::new(0.0, -1.0)])
        && (axis_angle - std::f64::consts::FRAC_PI_2).abs() < 1e-12;
    Ok(SquareGroupReport { vertices: q.vertices, vertex_error, f_fixed_points, g_fixed_points, axis_angle, pass })
}

/// Everything the command line emits for a group.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupDescription {
    pub r: f64,
    pub s: f64,
    pub a: MoebiusMap,
    pub b: MoebiusMap,
    pub commutator_trace: Complex64,
    pub quadrilateral: IdealQuadrilateral,
}

pub fn describe_group(r: f64) -> Result<GroupDescription> {
    let g = make_group(r)?;
    Ok(GroupDescription {
        r: g.r,
        s: g.s,
        a: g.a,
        b: g.b,
        commutator_trace: g.commutator_trace(),
        quadrilateral: isometric_circles(&g)?,
    })
}
