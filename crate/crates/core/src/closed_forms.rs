//! Exact densities and distribution functions of the distances (and
//! extremal distortions) from a uniformly random lattice to the square
//! lattice and to the rectangular locus, plus the shortest-geodesic law of
//! rectangular tori built from random ideal quadrilaterals.

use std::f64::consts::PI;
use std::fmt;
use std::io::Write;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::area::{area_ball_cap, area_cone_strip, OMEGA_AREA, R_CORNER, R_EMBEDDED};
use crate::error::{Error, Result};
use crate::special::quadrature::{integrate_with, Endpoints, QuadratureOptions, QuadratureResult, DEFAULT_BUDGET};
use crate::special::{catalan_constant, dilog, lerch_special};

/// Truncation point for the square-distance density; the (3/pi) e^{-r}
/// tail beyond it is below 1e-17.
pub const R_MAX: f64 = 40.0;

/// Right end of the support of the rectangular distortion, sqrt 3.
pub const K_RECT_MAX: f64 = 1.732_050_807_568_877_2;

/// ln(3 + 2 sqrt 2) = ln((sqrt 2 + 1)/(sqrt 2 - 1)).
pub const GEODESIC_MAX: f64 = 1.762_747_174_039_086;

pub type Eval = fn(f64) -> f64;

/// One closed-form branch of a density, valid on `[lo, hi]`.
#[derive(Debug, Clone, Copy)]
pub struct Piece {
    pub lo: f64,
    pub hi: f64,
    pub density: Eval,
    /// Endpoint behaviour handed to the quadrature engine.
    pub endpoints: Endpoints,
}

/// Asymptotic form of the density beyond the last finite breakpoint.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Tail {
    /// `coefficient * exp(-rate x)`
    Exponential { coefficient: f64, rate: f64 },
    /// `coefficient * x^(-exponent)`
    Power { coefficient: f64, exponent: f64 },
}

#[derive(Debug, Clone)]
pub struct PiecewiseDensity {
    pub name: &'static str,
    pieces: Vec<Piece>,
    cdf: Option<Eval>,
    tail: Option<Tail>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentReport {
    pub mean: f64,
    pub variance: f64,
    pub quadrature_tolerance: f64,
    pub error_estimate: f64,
}

impl PiecewiseDensity {
    /// Support endpoints followed by the interior breakpoints, in order.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self.pieces.iter().map(|p| p.lo).collect();
        v.push(self.pieces.last().expect("non-empty").hi);
        v
    }

    pub fn support(&self) -> (f64, f64) {
        let b = self.breakpoints();
        (b[0], b[b.len() - 1])
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    pub fn tail(&self) -> Option<Tail> {
        self.tail
    }

    pub fn has_closed_cdf(&self) -> bool {
        self.cdf.is_some()
    }

    pub fn pdf(&self, x: f64) -> f64 {
        let (lo, hi) = self.support();
        if x.is_nan() {
            return f64::NAN;
        }
        if x < lo || x > hi {
            return 0.0;
        }
        let piece = self
            .pieces
            .iter()
            .find(|p| x <= p.hi)
            .expect("x within support");
        (piece.density)(x)
    }

    /// Evaluate branch `index` at `x` even outside its interval, for
    /// one-sided limits at breakpoints.
    pub fn piece_value(&self, index: usize, x: f64) -> f64 {
        (self.pieces[index].density)(x)
    }

    /// Distribution function: the closed form when one exists, otherwise
    /// quadrature of the density to 1e-12.
    pub fn cdf(&self, x: f64) -> f64 {
        match self.cdf {
            Some(f) => f(x),
            None => self
                .cdf_by_quadrature(x, 1e-12)
                .expect("densities integrate within the default budget"),
        }
    }

    pub fn cdf_by_quadrature(&self, x: f64, tol: f64) -> Result<f64> {
        let (lo, _) = self.support();
        if x <= lo {
            return Ok(0.0);
        }
        let mut total = 0.0;
        let share = tol / self.pieces.len() as f64;
        for p in &self.pieces {
            if x <= p.lo {
                break;
            }
            let hi = x.min(p.hi);
            let endpoints = if hi < p.hi { drop_right(p.endpoints) } else { p.endpoints };
            if hi.is_infinite() {
                total += self.integrate_tail_piece(p, 0, share, DEFAULT_BUDGET)?.value;
            } else {
                let opts = QuadratureOptions::new(share).endpoints(endpoints);
                total += integrate_with(p.density, p.lo, hi, &opts)?.value;
            }
        }
        Ok(total.clamp(0.0, 1.0))
    }

    /// `∫ x^order f(x) dx` over the support.
    pub fn integrate_moment(&self, order: u32, tol: f64) -> Result<QuadratureResult> {
        self.integrate_moment_within(order, tol, DEFAULT_BUDGET)
    }

    /// As [`integrate_moment`](Self::integrate_moment) with a cap on the
    /// total number of integrand evaluations.
    pub fn integrate_moment_within(&self, order: u32, tol: f64, budget: usize) -> Result<QuadratureResult> {
        let share = tol / (self.pieces.len() + 1) as f64;
        let mut value = 0.0;
        let mut error_estimate = 0.0;
        let mut evaluations = 0;
        for p in &self.pieces {
            let left = budget.saturating_sub(evaluations);
            let r = if p.hi.is_infinite() {
                self.integrate_tail_piece(p, order, share, left)?
            } else {
                let f = |x: f64| x.powi(order as i32) * (p.density)(x);
                let opts = QuadratureOptions::new(share).endpoints(p.endpoints).budget(left);
                integrate_with(f, p.lo, p.hi, &opts)?
            };
            value += r.value;
            error_estimate += r.error_estimate;
            evaluations += r.evaluations;
        }
        Ok(QuadratureResult { value, error_estimate, evaluations })
    }

    /// Integral over an unbounded last piece: quadrature up to a cutoff
    /// chosen from the tail law, plus the analytic tail beyond it.
    fn integrate_tail_piece(&self, p: &Piece, order: u32, tol: f64, budget: usize) -> Result<QuadratureResult> {
        let k = order as i32;
        match self.tail {
            Some(Tail::Power { coefficient, exponent }) => {
                let e = exponent - f64::from(order) - 1.0;
                if e <= 0.0 {
                    return Err(Error::DivergentMoment { distribution: self.name, order });
                }
                // coefficient * X^-e / e <= tol / 1000
                let cutoff = (coefficient / (e * tol * 1e-3)).powf(1.0 / e).max(2.0 * p.lo);
                let tail = coefficient * cutoff.powf(-e) / e;
                // x = lo e^u spreads the slow decay evenly
                let lo = p.lo;
                let f = |u: f64| {
                    let x = lo * u.exp();
                    x.powi(k) * (p.density)(x) * x
                };
                let opts = QuadratureOptions::new(tol).endpoints(p.endpoints).budget(budget);
                let r = integrate_with(f, 0.0, (cutoff / lo).ln(), &opts)?;
                Ok(QuadratureResult {
                    value: r.value + tail,
                    error_estimate: r.error_estimate + tail * 1e-3,
                    evaluations: r.evaluations,
                })
            }
            Some(Tail::Exponential { coefficient, rate }) => {
                let cutoff = R_MAX.max(p.lo);
                let f = |x: f64| x.powi(k) * (p.density)(x);
                let opts = QuadratureOptions::new(tol).endpoints(p.endpoints).budget(budget);
                let r = integrate_with(f, p.lo, cutoff, &opts)?;
                let tail = coefficient * exponential_tail_moment(order, rate, cutoff);
                Ok(QuadratureResult {
                    value: r.value + tail,
                    error_estimate: r.error_estimate + tail,
                    evaluations: r.evaluations,
                })
            }
            None => Err(Error::InvalidInput(format!("{}: unbounded piece without tail law", self.name))),
        }
    }
}

fn drop_right(e: Endpoints) -> Endpoints {
    match e {
        Endpoints::SingularBoth | Endpoints::SingularLeft => Endpoints::SingularLeft,
        _ => Endpoints::Regular,
    }
}

/// `∫_X^∞ x^k e^{-a x} dx`.
fn exponential_tail_moment(k: u32, a: f64, x: f64) -> f64 {
    let mut sum = 0.0;
    let mut falling = 1.0;
    for j in 0..=k {
        sum += falling * x.powi((k - j) as i32) / a.powi(j as i32 + 1);
        falling *= f64::from(k - j);
    }
    (-a * x).exp() * sum
}

/// Mean and variance of `density` by adaptive quadrature.
pub fn moments(density: &PiecewiseDensity, tol: f64) -> Result<MomentReport> {
    moments_within(density, tol, DEFAULT_BUDGET)
}

/// [`moments`] with at most `budget` integrand evaluations per moment.
pub fn moments_within(density: &PiecewiseDensity, tol: f64, budget: usize) -> Result<MomentReport> {
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::InvalidInput(format!("tolerance {tol}")));
    }
    let first = density.integrate_moment_within(1, tol, budget)?;
    let second = density.integrate_moment_within(2, tol, budget)?;
    let mean = first.value;
    let variance = (second.value - mean * mean).max(0.0);
    Ok(MomentReport {
        mean,
        variance,
        quadrature_tolerance: tol,
        error_estimate: first.error_estimate + second.error_estimate * (1.0 + 2.0 * mean.abs()),
    })
}

// Square lattice --------------------------------------------------------

/// P(d(tau, i*) <= r): the normalized area of the ball about i* of radius r.
pub fn cdf_square_distance(r: f64) -> f64 {
    if r <= 0.0 {
        return 0.0;
    }
    (area_ball_cap(r) / OMEGA_AREA).clamp(0.0, 1.0)
}

fn square_piece_near(r: f64) -> f64 {
    3.0 * r.sinh()
}

fn square_piece_middle(r: f64) -> f64 {
    let s = r.sinh();
    let c = r.cosh();
    // 2 cosh 2r - 3 = 4 sinh^2 r - 1 and 7 - 3 cosh 2r = 4 - 6 sinh^2 r
    let q = (4.0 * s * s - 1.0).max(0.0).sqrt();
    s * (3.0 - 6.0 / PI * (4.0 * c * q / (4.0 - 6.0 * s * s)).atan())
}

fn square_piece_far(r: f64) -> f64 {
    if r > R_MAX {
        return tail_square(r);
    }
    let s = r.sinh();
    let c = r.cosh();
    let c2 = (2.0 * r).cosh();
    let q = (4.0 * s * s - 1.0).max(0.0).sqrt();
    let num = 4.0 * (1.0 - c2 - c * q);
    let den = 5.0 * c2 - 2.0 * (4.0 * r).cosh() - 8.0 * s * s * c * q + 1.0;
    3.0 / PI * s * (num / den).atan()
}

/// Density of the distance to the square point.
pub fn pdf_square_distance(r: f64) -> f64 {
    if r < 0.0 {
        0.0
    } else if r <= R_EMBEDDED {
        square_piece_near(r)
    } else if r <= R_CORNER {
        square_piece_middle(r)
    } else {
        square_piece_far(r)
    }
}

/// Large-distance asymptotic (3/pi) e^{-r} of the square-distance density.
pub fn tail_square(r: f64) -> f64 {
    3.0 / PI * (-r).exp()
}

/// Density of the extremal distortion K = e^d to the square torus.
pub fn pdf_distortion_square(k: f64) -> f64 {
    if k < 1.0 {
        return 0.0;
    }
    pdf_square_distance(k.ln()) / k
}

pub fn cdf_distortion_square(k: f64) -> f64 {
    if k <= 1.0 {
        0.0
    } else {
        cdf_square_distance(k.ln())
    }
}

/// P(K <= k) for the extremal distortion to the square torus.
pub fn prob_distortion_square_le(k: f64) -> f64 {
    cdf_distortion_square(k)
}

// Rectangular locus -----------------------------------------------------

/// Density of the distance to the rectangular locus. Has an integrable
/// logarithmic singularity at 0, where it returns +inf.
pub fn pdf_rect_distance(r: f64) -> f64 {
    if !(0.0..R_CORNER).contains(&r) {
        return 0.0;
    }
    if r == 0.0 {
        return f64::INFINITY;
    }
    6.0 / PI * r.cosh() * (0.5 / r.tanh()).ln()
}

pub fn cdf_rect_distance(r: f64) -> f64 {
    if r <= 0.0 {
        return 0.0;
    }
    (area_cone_strip(r) / OMEGA_AREA).clamp(0.0, 1.0)
}

/// Density of the extremal distortion to the nearest rectangular torus,
/// supported on [1, sqrt 3].
pub fn pdf_distortion_rect(k: f64) -> f64 {
    if !(1.0..K_RECT_MAX).contains(&k) {
        return 0.0;
    }
    if k == 1.0 {
        return f64::INFINITY;
    }
    let k2 = k * k;
    3.0 / (PI * k2) * (k2 + 1.0) * (0.5 * (k2 + 1.0) / (k2 - 1.0)).ln()
}

pub fn cdf_distortion_rect(k: f64) -> f64 {
    if k <= 1.0 {
        0.0
    } else {
        cdf_rect_distance(k.ln())
    }
}

// Random ideal quadrilaterals -------------------------------------------

/// Density of the shortest geodesic length of the rectangular punctured
/// torus obtained from a random ideal quadrilateral.
pub fn pdf_shortest_geodesic_quadrilateral(l: f64) -> f64 {
    if l <= 0.0 || l > GEODESIC_MAX {
        return 0.0;
    }
    let h = (0.5 * l).sinh();
    let q = (0.25 * l).sinh();
    // ln cosh(l/2) = ln(1 + 2 sinh^2(l/4)), cosh l - 1 = 2 sinh^2(l/2)
    let log_cosh = (2.0 * q * q).ln_1p();
    let log_coth = (1.0 / (0.5 * l).tanh()).ln();
    6.0 / (PI * PI) / l.sinh() * (4.0 * log_cosh + 4.0 * h * h * log_coth)
}

// Closed-form expectations ----------------------------------------------

/// E[distance to the rectangular locus], from Catalan's constant and the
/// alternating series Phi(-1/3, 2, 1/2).
pub fn expected_rect_distance_closed() -> f64 {
    let s3 = 3f64.sqrt();
    (12.0 * catalan_constant() - s3 * lerch_special() - PI * 3f64.ln()
        + 12.0 * ((s3 + 1.0) / (2.0 * 2f64.sqrt())).ln())
        / PI
}

/// E[extremal distortion to the nearest rectangular torus].
pub fn expected_distortion_closed() -> f64 {
    expected_distortion_with(dilog)
}

/// The expected-distortion formula with the dilogarithm supplied by the
/// caller, so alternative evaluations of Li2 can be swapped in.
pub fn expected_distortion_with(li2: impl Fn(f64) -> f64) -> f64 {
    let ln2 = std::f64::consts::LN_2;
    3.0 / PI * (0.25 * li2(1.0 / 9.0) - li2(1.0 / 3.0) + PI * PI / 8.0 + ln2 * (1.0 - 3f64.sqrt().ln()))
}

// Catalogue -------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Distribution {
    /// Distance to the square point i*.
    Square,
    /// Distance to the rectangular locus.
    Rect,
    /// Extremal distortion to the square torus.
    DistortionSquare,
    /// Extremal distortion to the nearest rectangular torus.
    DistortionRect,
    /// Shortest geodesic of a random-quadrilateral rectangular torus.
    Quadrilateral,
}

impl Distribution {
    pub const ALL: [Distribution; 5] = [
        Distribution::Square,
        Distribution::Rect,
        Distribution::DistortionSquare,
        Distribution::DistortionRect,
        Distribution::Quadrilateral,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Distribution::Square => "square",
            Distribution::Rect => "rect",
            Distribution::DistortionSquare => "distortion-square",
            Distribution::DistortionRect => "distortion-rect",
            Distribution::Quadrilateral => "quadrilateral",
        }
    }

    pub fn density(&self) -> PiecewiseDensity {
        let name = self.name();
        match self {
            Distribution::Square => PiecewiseDensity {
                name,
                pieces: vec![
                    Piece { lo: 0.0, hi: R_EMBEDDED, density: square_piece_near, endpoints: Endpoints::Regular },
                    Piece { lo: R_EMBEDDED, hi: R_CORNER, density: square_piece_middle, endpoints: Endpoints::SingularBoth },
                    Piece { lo: R_CORNER, hi: f64::INFINITY, density: square_piece_far, endpoints: Endpoints::SingularLeft },
                ],
                cdf: Some(cdf_square_distance),
                tail: Some(Tail::Exponential { coefficient: 3.0 / PI, rate: 1.0 }),
            },
            Distribution::Rect => PiecewiseDensity {
                name,
                pieces: vec![Piece { lo: 0.0, hi: R_CORNER, density: pdf_rect_distance, endpoints: Endpoints::SingularLeft }],
                cdf: Some(cdf_rect_distance),
                tail: None,
            },
            Distribution::DistortionSquare => {
                let (k1, k2) = (R_EMBEDDED.exp(), R_CORNER.exp());
                PiecewiseDensity {
                    name,
                    pieces: vec![
                        Piece { lo: 1.0, hi: k1, density: pdf_distortion_square, endpoints: Endpoints::Regular },
                        Piece { lo: k1, hi: k2, density: pdf_distortion_square, endpoints: Endpoints::SingularBoth },
                        Piece { lo: k2, hi: f64::INFINITY, density: pdf_distortion_square, endpoints: Endpoints::SingularLeft },
                    ],
                    cdf: Some(cdf_distortion_square),
                    tail: Some(Tail::Power { coefficient: 3.0 / PI, exponent: 2.0 }),
                }
            }
            Distribution::DistortionRect => PiecewiseDensity {
                name,
                pieces: vec![Piece { lo: 1.0, hi: K_RECT_MAX, density: pdf_distortion_rect, endpoints: Endpoints::SingularLeft }],
                cdf: Some(cdf_distortion_rect),
                tail: None,
            },
            Distribution::Quadrilateral => PiecewiseDensity {
                name,
                pieces: vec![Piece {
                    lo: 0.0,
                    hi: GEODESIC_MAX,
                    density: pdf_shortest_geodesic_quadrilateral,
                    endpoints: Endpoints::SingularLeft,
                }],
                cdf: None,
                tail: None,
            },
        }
    }
}

impl fmt::Display for Distribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Distribution {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Distribution::ALL
            .into_iter()
            .find(|d| d.name() == s)
            .ok_or_else(|| Error::UnknownDistribution(s.to_string()))
    }
}

/// One row of a sampled density table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TableRow {
    pub r: f64,
    pub pdf: f64,
    pub cdf: f64,
}

pub fn density_table(dist: Distribution, xs: &[f64]) -> Vec<TableRow> {
    let density = dist.density();
    xs.iter()
        .map(|&r| TableRow { r, pdf: density.pdf(r), cdf: density.cdf(r) })
        .collect()
}

/// Write `rows` as CSV with header `r,pdf,cdf`.
pub fn write_table_csv<W: Write>(rows: &[TableRow], out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}
