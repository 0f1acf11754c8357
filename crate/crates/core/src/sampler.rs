//! Reproducible uniform sampling of lattices from the fundamental domain.
//!
//! Sample `i` draws from its own ChaCha stream keyed by `(seed, i)`, so a
//! batch is bit-identical however the work is split across threads.

use std::f64::consts::PI;
use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rand::distr::Open01;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hyperbolic::{dist_h2, dist_to_imaginary_axis, HPoint};
use crate::modular::{in_fundamental_domain, reduce, FundamentalPoint};

/// Acceptance probability of the rejection sampler, `pi sqrt 3 / 6`.
pub const REJECTION_ACCEPTANCE: f64 = 0.906_899_682_117_108_9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SamplingMethod {
    InverseTransform,
    Rejection,
}

impl SamplingMethod {
    pub fn name(&self) -> &'static str {
        match self {
            SamplingMethod::InverseTransform => "inverse-transform",
            SamplingMethod::Rejection => "rejection",
        }
    }
}

impl fmt::Display for SamplingMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SamplingMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "inverse-transform" => Ok(SamplingMethod::InverseTransform),
            "rejection" => Ok(SamplingMethod::Rejection),
            _ => Err(Error::InvalidInput(format!("unknown sampling method {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SamplerConfig {
    pub seed: u64,
    pub count: usize,
    pub method: SamplingMethod,
}

impl SamplerConfig {
    pub fn new(seed: u64, count: usize, method: SamplingMethod) -> Result<Self> {
        if count == 0 {
            return Err(Error::InvalidInput("sample count must be at least 1".into()));
        }
        Ok(Self { seed, count, method })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleBatch {
    pub config: SamplerConfig,
    pub points: Vec<FundamentalPoint>,
    /// Proposals drawn in total; equals `count` for the inverse transform.
    pub proposals: u64,
}

impl SampleBatch {
    pub fn acceptance_rate(&self) -> f64 {
        self.points.len() as f64 / self.proposals as f64
    }
}

fn stream(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Snap a point that rounding pushed just outside the domain back in.
fn settle(x: f64, y: f64) -> FundamentalPoint {
    let p = HPoint::new(x, y).expect("finite point above the axis");
    if in_fundamental_domain(x, y) {
        FundamentalPoint::new(p).expect("checked membership")
    } else {
        reduce(p).expect("near-domain points reduce in a few steps").reduced
    }
}

fn inverse_transform_point(rng: &mut ChaCha8Rng) -> FundamentalPoint {
    let u = rng.random_range(-PI / 6.0..PI / 6.0);
    let x = u.sin();
    let v: f64 = rng.sample(Open01);
    settle(x, (1.0 - x * x).sqrt() / v)
}

fn rejection_point(rng: &mut ChaCha8Rng) -> (FundamentalPoint, u64) {
    let h = 3f64.sqrt() / 2.0;
    let mut proposals = 0;
    loop {
        proposals += 1;
        let x = 0.5 - rng.random::<f64>();
        let v: f64 = rng.sample(Open01);
        let y = h / v;
        if in_fundamental_domain(x, y) {
            let p = HPoint::new(x, y).expect("finite proposal");
            return (FundamentalPoint::new(p).expect("accepted"), proposals);
        }
    }
}

/// Uniform sample from the normalized hyperbolic area on the fundamental
/// domain with the method named in `config`.
pub fn sample(config: &SamplerConfig) -> SampleBatch {
    let seed = config.seed;
    let draws: Vec<(FundamentalPoint, u64)> = (0..config.count as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream(seed, i);
            match config.method {
                SamplingMethod::InverseTransform => (inverse_transform_point(&mut rng), 1),
                SamplingMethod::Rejection => rejection_point(&mut rng),
            }
        })
        .collect();
    let proposals = draws.iter().map(|d| d.1).sum();
    SampleBatch { config: *config, points: draws.into_iter().map(|d| d.0).collect(), proposals }
}

pub fn sample_uniform(seed: u64, count: usize) -> Result<SampleBatch> {
    Ok(sample(&SamplerConfig::new(seed, count, SamplingMethod::InverseTransform)?))
}

pub fn sample_rejection(seed: u64, count: usize) -> Result<SampleBatch> {
    Ok(sample(&SamplerConfig::new(seed, count, SamplingMethod::Rejection)?))
}

/// One sampled lattice with its distances and distortions to the square
/// point and to the rectangular locus.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SampleRecord {
    pub index: usize,
    pub x: f64,
    pub y: f64,
    pub d_square: f64,
    pub d_rect: f64,
    #[serde(rename = "K_square")]
    pub k_square: f64,
    #[serde(rename = "K_rect")]
    pub k_rect: f64,
}

impl SampleRecord {
    pub fn new(index: usize, p: FundamentalPoint) -> Self {
        // points are already reduced, so quotient distances are direct
        let d_square = dist_h2(p.point(), HPoint::I);
        let d_rect = dist_to_imaginary_axis(p.point());
        Self { index, x: p.x(), y: p.y(), d_square, d_rect, k_square: d_square.exp(), k_rect: d_rect.exp() }
    }
}

pub fn records(batch: &SampleBatch) -> Vec<SampleRecord> {
    batch.points.par_iter().enumerate().map(|(i, &p)| SampleRecord::new(i, p)).collect()
}

/// CSV with header `index,x,y,d_square,d_rect,K_square,K_rect` and LF line
/// endings.
pub fn write_csv<W: Write>(batch: &SampleBatch, out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    for r in records(batch) {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleDocument {
    pub seed: u64,
    pub count: usize,
    pub method: SamplingMethod,
    pub proposals: u64,
    pub samples: Vec<SampleRecord>,
}

pub fn write_json<W: Write>(batch: &SampleBatch, mut out: W) -> Result<()> {
    let doc = SampleDocument {
        seed: batch.config.seed,
        count: batch.config.count,
        method: batch.config.method,
        proposals: batch.proposals,
        samples: records(batch),
    };
    serde_json::to_writer_pretty(&mut out, &doc)?;
    writeln!(out)?;
    Ok(())
}
