//! The modular fundamental domain, reduction into it, orbit enumeration,
//! and distances on the quotient orbifold.

use std::collections::{HashMap, HashSet, VecDeque};
use std::ops::Mul;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hyperbolic::{dist_h2, dist_to_imaginary_axis, HPoint, MoebiusMap};

pub const MAX_REDUCTION_STEPS: usize = 10_000;

/// Orbit depth used for brute-force distances to the square point.
pub const SQUARE_ORBIT_DEPTH: usize = 8;
/// Orbit depth used for brute-force distances to the rectangular locus.
pub const RECT_ORBIT_DEPTH: usize = 6;

/// Membership in the fundamental domain
/// `{|z| >= 1, -1/2 < Re z <= 1/2}`, with `Re z >= 0` on the unit circle.
pub fn in_fundamental_domain(x: f64, y: f64) -> bool {
    let m = x * x + y * y;
    y > 0.0 && x > -0.5 && x <= 0.5 && m >= 1.0 && (m > 1.0 || x >= 0.0)
}

/// A point certified to lie in the fundamental domain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "HPoint", into = "HPoint")]
pub struct FundamentalPoint(HPoint);

impl FundamentalPoint {
    pub fn new(p: HPoint) -> Result<Self> {
        if in_fundamental_domain(p.x(), p.y()) {
            Ok(Self(p))
        } else {
            Err(Error::NotInFundamentalDomain { x: p.x(), y: p.y() })
        }
    }

    pub fn point(&self) -> HPoint {
        self.0
    }

    pub fn x(&self) -> f64 {
        self.0.x()
    }

    pub fn y(&self) -> f64 {
        self.0.y()
    }
}

impl TryFrom<HPoint> for FundamentalPoint {
    type Error = Error;

    fn try_from(p: HPoint) -> Result<Self> {
        Self::new(p)
    }
}

impl From<FundamentalPoint> for HPoint {
    fn from(p: FundamentalPoint) -> HPoint {
        p.0
    }
}

/// An element of SL(2, Z).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ModularElement {
    pub a: i64,
    pub b: i64,
    pub c: i64,
    pub d: i64,
}

impl ModularElement {
    pub const IDENTITY: Self = Self { a: 1, b: 0, c: 0, d: 1 };
    pub const S: Self = Self { a: 0, b: -1, c: 1, d: 0 };
    pub const T: Self = Self { a: 1, b: 1, c: 0, d: 1 };
    pub const T_INV: Self = Self { a: 1, b: -1, c: 0, d: 1 };

    pub fn translation(n: i64) -> Self {
        Self { a: 1, b: n, c: 0, d: 1 }
    }

    pub fn inverse(&self) -> Self {
        Self { a: self.d, b: -self.b, c: -self.c, d: self.a }
    }

    /// Representative with a sign fixed so that `g` and `-g` compare equal.
    pub fn projective(&self) -> Self {
        let neg = self.c < 0 || (self.c == 0 && self.d < 0);
        if neg {
            Self { a: -self.a, b: -self.b, c: -self.c, d: -self.d }
        } else {
            *self
        }
    }

    fn checked_mul(&self, o: &Self) -> Option<Self> {
        let f = |p: i64, q: i64, r: i64, s: i64| p.checked_mul(q)?.checked_add(r.checked_mul(s)?);
        Some(Self {
            a: f(self.a, o.a, self.b, o.c)?,
            b: f(self.a, o.b, self.b, o.d)?,
            c: f(self.c, o.a, self.d, o.c)?,
            d: f(self.c, o.b, self.d, o.d)?,
        })
    }

    pub fn to_moebius(&self) -> MoebiusMap {
        MoebiusMap::from_real(self.a as f64, self.b as f64, self.c as f64, self.d as f64)
            .expect("modular elements have determinant one")
    }

    /// Action on the upper half-plane. Never hits a pole since `y > 0`.
    pub fn apply(&self, z: HPoint) -> HPoint {
        let (a, b, c, d) = (self.a as f64, self.b as f64, self.c as f64, self.d as f64);
        let cx_d = c * z.x() + d;
        let cy = c * z.y();
        let den = cx_d * cx_d + cy * cy;
        let x = ((a * z.x() + b) * cx_d + a * c * z.y() * z.y()) / den;
        HPoint::new(x, z.y() / den).expect("SL(2,Z) preserves the upper half-plane")
    }
}

impl Mul for ModularElement {
    type Output = ModularElement;

    fn mul(self, o: Self) -> Self {
        self.checked_mul(&o).expect("modular element overflow")
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReductionResult {
    pub reduced: FundamentalPoint,
    /// The element `g` with `g * input = reduced`.
    pub word: ModularElement,
    /// Number of S applications plus translation blocks (`T^n` counts once).
    pub steps: usize,
}

/// Translate `x` into (-1/2, 1/2], returning the integer shift.
fn wrap_real_part(x: f64) -> (f64, i64) {
    let mut n = (x - 0.5).ceil();
    let mut r = x - n;
    // rounding in `x - 0.5` can leave us one period off
    if r > 0.5 {
        n += 1.0;
        r = x - n;
    } else if r <= -0.5 {
        n -= 1.0;
        r = x - n;
    }
    (r, n as i64)
}

/// Reduce `tau` into the fundamental domain by alternating translations and
/// the inversion `z -> -1/z`.
pub fn reduce(tau: HPoint) -> Result<ReductionResult> {
    let (mut x, mut y) = (tau.x(), tau.y());
    let mut word = ModularElement::IDENTITY;
    let mut steps = 0;
    let overflow = |steps| Error::ReductionDiverged { steps };
    loop {
        let (nx, n) = wrap_real_part(x);
        if n != 0 {
            if n.unsigned_abs() > 1 << 52 {
                return Err(overflow(steps));
            }
            x = nx;
            word = ModularElement::translation(-n).checked_mul(&word).ok_or(overflow(steps))?;
            steps += 1;
        }
        let m = x * x + y * y;
        if m >= 1.0 {
            break;
        }
        x = -x / m;
        y /= m;
        word = ModularElement::S.checked_mul(&word).ok_or(overflow(steps))?;
        steps += 1;
        if steps > MAX_REDUCTION_STEPS || !(y.is_finite() && y > 0.0) {
            return Err(overflow(steps));
        }
    }
    if x * x + y * y == 1.0 && x < 0.0 {
        // identify the left half of the bottom arc with the right half
        x = -x;
        word = ModularElement::S.checked_mul(&word).ok_or(overflow(steps))?;
        steps += 1;
    }
    let reduced = FundamentalPoint::new(HPoint::new(x, y)?)?;
    Ok(ReductionResult { reduced, word, steps })
}

/// All distinct group elements (up to sign) expressible as words of length
/// at most `max_word_len` in S, T and T^-1.
pub fn orbit_elements(max_word_len: usize) -> Vec<ModularElement> {
    let gens = [ModularElement::S, ModularElement::T, ModularElement::T_INV];
    let mut seen = HashSet::new();
    let mut out = vec![ModularElement::IDENTITY];
    seen.insert(ModularElement::IDENTITY);
    let mut frontier = vec![ModularElement::IDENTITY];
    for _ in 0..max_word_len {
        let mut next = Vec::new();
        for g in &frontier {
            for h in &gens {
                let w = (*h * *g).projective();
                if seen.insert(w) {
                    out.push(w);
                    next.push(w);
                }
            }
        }
        frontier = next;
    }
    out
}

/// Deduplicating point set with a 1e-9 tolerance, bucketed on a grid.
struct PointSet {
    cell: f64,
    buckets: HashMap<(i64, i64), Vec<HPoint>>,
}

impl PointSet {
    fn new(cell: f64) -> Self {
        Self { cell, buckets: HashMap::new() }
    }

    fn key(&self, p: HPoint) -> (i64, i64) {
        ((p.x() / self.cell).floor() as i64, (p.y() / self.cell).floor() as i64)
    }

    fn insert(&mut self, p: HPoint) -> bool {
        let (kx, ky) = self.key(p);
        for dx in -1..=1 {
            for dy in -1..=1 {
                if let Some(v) = self.buckets.get(&(kx + dx, ky + dy)) {
                    if v.iter().any(|q| (q.x() - p.x()).abs() <= self.cell && (q.y() - p.y()).abs() <= self.cell) {
                        return false;
                    }
                }
            }
        }
        self.buckets.entry((kx, ky)).or_default().push(p);
        true
    }
}

/// Images of `base` under words of length at most `max_word_len` in S, T,
/// T^-1, deduplicated to within 1e-9 (breadth-first, so `base` comes first).
pub fn orbit_points(base: HPoint, max_word_len: usize) -> Vec<HPoint> {
    let gens = [ModularElement::S, ModularElement::T, ModularElement::T_INV];
    let mut set = PointSet::new(1e-9);
    set.insert(base);
    let mut out = vec![base];
    let mut queue = VecDeque::from([(base, 0usize)]);
    while let Some((p, len)) = queue.pop_front() {
        if len == max_word_len {
            continue;
        }
        for g in &gens {
            let q = g.apply(p);
            if set.insert(q) {
                out.push(q);
                queue.push_back((q, len + 1));
            }
        }
    }
    out
}

/// Distance on the quotient from `tau` to the square point i*.
pub fn quotient_dist_to_square(tau: HPoint) -> Result<f64> {
    Ok(dist_h2(reduce(tau)?.reduced.point(), HPoint::I))
}

/// Distance on the quotient from `tau` to the rectangular locus (the image
/// of the imaginary axis). Never exceeds artanh(1/2).
pub fn quotient_dist_to_rect(tau: HPoint) -> Result<f64> {
    Ok(dist_to_imaginary_axis(reduce(tau)?.reduced.point()))
}

/// Brute-force quotient distance: min of `dist_h2(tau, p)` over `orbit`.
pub fn orbit_min_distance(tau: HPoint, orbit: &[HPoint]) -> f64 {
    orbit.iter().map(|&p| dist_h2(tau, p)).fold(f64::INFINITY, f64::min)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn hp(x: f64, y: f64) -> HPoint {
        HPoint::new(x, y).unwrap()
    }

    fn close(p: HPoint, q: HPoint, tol: f64) -> bool {
        (p.x() - q.x()).abs() <= tol && (p.y() - q.y()).abs() <= tol
    }

    fn random_word(rng: &mut impl Rng, max_len: usize) -> ModularElement {
        let gens = [ModularElement::S, ModularElement::T, ModularElement::T_INV];
        let len = rng.random_range(0..=max_len);
        (0..len).fold(ModularElement::IDENTITY, |w, _| gens[rng.random_range(0..3)] * w)
    }

    #[test]
    fn domain_membership_convention() {
        assert!(in_fundamental_domain(0.5, 2.0));
        assert!(!in_fundamental_domain(-0.5, 2.0));
        assert!(in_fundamental_domain(0.0, 1.0));
        assert!(!in_fundamental_domain(0.6, 0.8));
        assert!(in_fundamental_domain(0.5, 0.75f64.sqrt() + 1e-15));
        assert!(!in_fundamental_domain(0.3, 0.9));
        assert!(FundamentalPoint::new(hp(0.1, 0.5)).is_err());
    }

    #[test]
    fn reduce_examples() {
        let r = reduce(hp(5.0, 1.0)).unwrap();
        assert!(close(r.reduced.point(), HPoint::I, 0.0));
        assert_eq!(r.word, ModularElement::translation(-5));

        let r = reduce(hp(0.3, 0.4)).unwrap();
        assert!(close(r.reduced.point(), hp(-0.2, 1.6), 1e-14), "{:?}", r.reduced);

        let third = 2.0 * PI / 3.0;
        let r = reduce(hp(third.cos(), third.sin())).unwrap();
        let rho = hp(0.5, 0.75f64.sqrt());
        assert!(close(r.reduced.point(), rho, 1e-12), "{:?}", r.reduced);
        assert!(r.reduced.x() >= 0.0);
    }

    #[test]
    fn reduce_is_identity_on_reduced_points() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..1_000 {
            let x: f64 = rng.random_range(-0.49..0.5);
            let y = (1.0 - x * x).sqrt() + rng.random_range(0.0..5.0);
            let p = hp(x, y);
            if !in_fundamental_domain(x, y) {
                continue;
            }
            let r = reduce(p).unwrap();
            assert_eq!(r.word, ModularElement::IDENTITY);
            assert_eq!(r.reduced.point(), p);
            assert_eq!(r.steps, 0);
        }
    }

    #[test]
    fn reduce_word_maps_input_to_output() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..10_000 {
            let p = hp(rng.random_range(-4.0..4.0), rng.random_range(0.05..3.0));
            let r = reduce(p).unwrap();
            let q = apply_word(&r.word, p);
            assert!(close(q, r.reduced.point(), 1e-10 * q.y().max(1.0)), "{p:?} -> {q:?} vs {:?}", r.reduced);
        }
    }

    fn apply_word(w: &ModularElement, p: HPoint) -> HPoint {
        crate::hyperbolic::apply_moebius(&w.to_moebius(), p).unwrap()
    }

    #[test]
    fn reduce_is_orbit_invariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..10_000 {
            let p = hp(rng.random_range(-2.0..2.0), rng.random_range(0.1..4.0));
            let g = random_word(&mut rng, 10);
            let gp = g.apply(p);
            let a = reduce(p).unwrap().reduced.point();
            let b = reduce(gp).unwrap().reduced.point();
            let tol = 1e-9 * a.y().max(1.0);
            // points within rounding of the vertical edges may land on either side
            let edge = (a.x().abs() - 0.5).abs() < 1e-9;
            assert!(close(a, b, tol) || edge, "{p:?} vs {gp:?}: {a:?} {b:?}");
        }
    }

    #[test]
    fn reduce_rejects_points_hugging_the_real_axis() {
        let err = reduce(hp(0.123_456_789, 1e-300)).unwrap_err();
        assert!(matches!(err, Error::ReductionDiverged { .. }), "{err:?}");
    }

    #[test]
    fn orbit_points_examples() {
        assert_eq!(orbit_points(HPoint::I, 0), vec![HPoint::I]);
        let o1 = orbit_points(HPoint::I, 1);
        assert_eq!(o1.len(), 3);
        assert!(o1.iter().any(|p| close(*p, hp(1.0, 1.0), 1e-12)));
        assert!(o1.iter().any(|p| close(*p, hp(-1.0, 1.0), 1e-12)));

        let o2 = orbit_points(hp(0.0, 2.0), 2);
        for q in [hp(0.0, 2.0), hp(1.0, 2.0), hp(-1.0, 2.0), hp(2.0, 2.0), hp(-2.0, 2.0), hp(0.0, 0.5)] {
            assert!(o2.iter().any(|p| close(*p, q, 1e-12)), "missing {q:?}");
        }
        // no duplicates
        for (i, p) in o2.iter().enumerate() {
            for q in &o2[i + 1..] {
                assert!(!close(*p, *q, 1e-9));
            }
        }
    }

    #[test]
    fn orbit_elements_are_distinct_and_unimodular() {
        let els = orbit_elements(5);
        let set: HashSet<_> = els.iter().copied().collect();
        assert_eq!(set.len(), els.len());
        for g in &els {
            assert_eq!(g.a * g.d - g.b * g.c, 1);
        }
    }

    #[test]
    fn square_distance_examples() {
        assert_eq!(quotient_dist_to_square(HPoint::I).unwrap(), 0.0);
        let d = quotient_dist_to_square(hp(0.0, 0.5)).unwrap();
        assert!((d - 2f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn square_distance_matches_orbit_brute_force() {
        let orbit = orbit_points(HPoint::I, SQUARE_ORBIT_DEPTH);
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..1_000 {
            let p = hp(rng.random_range(-1.5..1.5), rng.random_range(0.2..3.0));
            let d = quotient_dist_to_square(p).unwrap();
            let brute = orbit_min_distance(p, &orbit);
            assert!((d - brute).abs() < 1e-9, "{p:?}: {d} vs {brute}");
        }
    }

    #[test]
    fn rect_distance_examples() {
        assert_eq!(quotient_dist_to_rect(hp(0.0, 3.0)).unwrap(), 0.0);
        let rho = hp(0.5, 0.75f64.sqrt());
        let d = quotient_dist_to_rect(rho).unwrap();
        assert!((d - 0.5f64.atanh()).abs() < 1e-15);
    }

    #[test]
    fn rect_distance_matches_orbit_brute_force() {
        let words = orbit_elements(RECT_ORBIT_DEPTH);
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let bound = 0.5f64.atanh();
        for _ in 0..1_000 {
            let x: f64 = rng.random_range(-0.5..0.5);
            let y = (1.0 - x * x).sqrt() + rng.random_range(0.0..3.0);
            if !in_fundamental_domain(x, y) {
                continue;
            }
            let p = hp(x, y);
            let d = quotient_dist_to_rect(p).unwrap();
            let brute = words
                .iter()
                .map(|g| dist_to_imaginary_axis(g.apply(p)))
                .fold(f64::INFINITY, f64::min);
            assert!((d - brute).abs() < 1e-9, "{p:?}: {d} vs {brute}");
            assert!(d <= bound + 1e-15);
        }
    }
}
