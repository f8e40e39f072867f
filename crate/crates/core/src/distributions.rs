//! Inter-arrival laws with closed-form moment metadata.
//!
//! Every law carries its exact mean and variance; nothing downstream
//! estimates moments from samples. Laws are validated when constructed
//! (directly or through serde), so sampling cannot fail.

use rand::Rng;
use rand_distr::{Distribution, Exp, Gamma, Pareto, Uniform};
use serde::{Deserialize, Serialize};
use statrs::function::gamma::{gamma, ln_gamma};

use crate::error::{Error, Result};
use crate::rng::RngStream;

/// Parameters of an inter-arrival law, tagged by `kind` in JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum LawKind {
    Exponential { rate: f64 },
    Gamma { shape: f64, scale: f64 },
    Uniform { lo: f64, hi: f64 },
    DiscreteAtoms { values: Vec<f64>, probs: Vec<f64> },
    /// Type I Pareto supported on `[scale, inf)` with tail index `shape`.
    Pareto { shape: f64, scale: f64 },
}

/// A validated non-negative inter-arrival law.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "LawKind", into = "LawKind")]
pub struct InterArrivalLaw {
    kind: LawKind,
    // cumulative weights for DiscreteAtoms, empty otherwise
    cumulative: Vec<f64>,
}

impl TryFrom<LawKind> for InterArrivalLaw {
    type Error = Error;

    fn try_from(kind: LawKind) -> Result<Self> {
        InterArrivalLaw::new(kind)
    }
}

impl From<InterArrivalLaw> for LawKind {
    fn from(law: InterArrivalLaw) -> Self {
        law.kind
    }
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidLaw(format!("{name} must be positive and finite, got {v}")))
    }
}

/// p-th raw moment, possibly infinite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PthMoment {
    Finite(f64),
    Infinite(InfiniteTag),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InfiniteTag {
    Infinite,
}

impl PthMoment {
    pub const INFINITE: PthMoment = PthMoment::Infinite(InfiniteTag::Infinite);

    pub fn is_finite(&self) -> bool {
        matches!(self, PthMoment::Finite(_))
    }

    pub fn value(&self) -> Option<f64> {
        match self {
            PthMoment::Finite(v) => Some(*v),
            PthMoment::Infinite(_) => None,
        }
    }
}

/// Whether a law satisfies the `E[U^p] < inf` (p > 2) integrability
/// requirement at a given order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentCertificate {
    pub p: f64,
    pub p_moment: PthMoment,
}

impl MomentCertificate {
    pub fn within_hypotheses(&self) -> bool {
        self.p > 2.0 && self.p_moment.is_finite()
    }
}

impl InterArrivalLaw {
    pub fn new(kind: LawKind) -> Result<Self> {
        let mut cumulative = Vec::new();
        match &kind {
            LawKind::Exponential { rate } => positive("rate", *rate)?,
            LawKind::Gamma { shape, scale } => {
                positive("shape", *shape)?;
                positive("scale", *scale)?;
            }
            LawKind::Uniform { lo, hi } => {
                if !(lo.is_finite() && hi.is_finite() && *lo >= 0.0 && hi > lo) {
                    return Err(Error::InvalidLaw(format!(
                        "uniform needs 0 <= lo < hi, got lo={lo} hi={hi}"
                    )));
                }
            }
            LawKind::DiscreteAtoms { values, probs } => {
                if values.is_empty() || values.len() != probs.len() {
                    return Err(Error::InvalidLaw(
                        "atoms need equally many values and probs, at least one".into(),
                    ));
                }
                if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
                    return Err(Error::InvalidLaw("atom values must be finite and >= 0".into()));
                }
                if probs.iter().any(|p| !p.is_finite() || *p < 0.0) {
                    return Err(Error::InvalidLaw("atom probs must be finite and >= 0".into()));
                }
                let total: f64 = probs.iter().sum();
                if (total - 1.0).abs() > 1e-9 {
                    return Err(Error::InvalidLaw(format!("atom probs sum to {total}, not 1")));
                }
                let zero_mass: f64 = values
                    .iter()
                    .zip(probs)
                    .filter(|(v, _)| **v == 0.0)
                    .map(|(_, p)| p)
                    .sum();
                if zero_mass >= 1.0 - 1e-12 {
                    return Err(Error::InvalidLaw("P{U = 0} must be < 1".into()));
                }
                let mut acc = 0.0;
                for p in probs {
                    acc += p / total;
                    cumulative.push(acc);
                }
                *cumulative.last_mut().unwrap() = 1.0;
            }
            LawKind::Pareto { shape, scale } => {
                positive("shape", *shape)?;
                positive("scale", *scale)?;
                if *shape <= 1.0 {
                    return Err(Error::InvalidLaw(format!(
                        "pareto shape {shape} <= 1 has infinite mean"
                    )));
                }
            }
        }
        Ok(Self { kind, cumulative })
    }

    pub fn exponential(rate: f64) -> Result<Self> {
        Self::new(LawKind::Exponential { rate })
    }

    pub fn gamma(shape: f64, scale: f64) -> Result<Self> {
        Self::new(LawKind::Gamma { shape, scale })
    }

    pub fn uniform(lo: f64, hi: f64) -> Result<Self> {
        Self::new(LawKind::Uniform { lo, hi })
    }

    pub fn atoms(values: Vec<f64>, probs: Vec<f64>) -> Result<Self> {
        Self::new(LawKind::DiscreteAtoms { values, probs })
    }

    pub fn point_mass(value: f64) -> Result<Self> {
        Self::atoms(vec![value], vec![1.0])
    }

    pub fn pareto(shape: f64, scale: f64) -> Result<Self> {
        Self::new(LawKind::Pareto { shape, scale })
    }

    pub fn kind(&self) -> &LawKind {
        &self.kind
    }

    /// Short human-readable name, used in report labels.
    pub fn label(&self) -> String {
        match &self.kind {
            LawKind::Exponential { rate } => format!("exponential(rate={rate})"),
            LawKind::Gamma { shape, scale } => format!("gamma(shape={shape}, scale={scale})"),
            LawKind::Uniform { lo, hi } => format!("uniform({lo}, {hi})"),
            LawKind::DiscreteAtoms { values, probs } => {
                format!("atoms(values={values:?}, probs={probs:?})")
            }
            LawKind::Pareto { shape, scale } => format!("pareto(shape={shape}, scale={scale})"),
        }
    }

    /// Exact `(mean, variance)`. Variance is `+inf` for Pareto with shape <= 2.
    pub fn moments(&self) -> (f64, f64) {
        match &self.kind {
            LawKind::Exponential { rate } => (1.0 / rate, 1.0 / (rate * rate)),
            LawKind::Gamma { shape, scale } => (shape * scale, shape * scale * scale),
            LawKind::Uniform { lo, hi } => ((lo + hi) / 2.0, (hi - lo) * (hi - lo) / 12.0),
            LawKind::DiscreteAtoms { values, probs } => {
                let mean: f64 = values.iter().zip(probs).map(|(v, p)| v * p).sum();
                let var = values
                    .iter()
                    .zip(probs)
                    .map(|(v, p)| p * (v - mean) * (v - mean))
                    .sum();
                (mean, var)
            }
            LawKind::Pareto { shape: a, scale: s } => {
                let mean = a * s / (a - 1.0);
                let var = if *a > 2.0 {
                    s * s * a / ((a - 1.0) * (a - 1.0) * (a - 2.0))
                } else {
                    f64::INFINITY
                };
                (mean, var)
            }
        }
    }

    pub fn mean(&self) -> f64 {
        self.moments().0
    }

    pub fn variance(&self) -> f64 {
        self.moments().1
    }

    /// Raw moment `E[U^p]` for `p > 2`.
    pub fn pth_moment(&self, p: f64) -> Result<PthMoment> {
        if !(p.is_finite() && p > 2.0) {
            return Err(Error::InvalidMomentOrder(p));
        }
        let m = match &self.kind {
            LawKind::Exponential { rate } => gamma_ratio(1.0, p) / rate.powf(p),
            LawKind::Gamma { shape, scale } => scale.powf(p) * gamma_ratio(*shape, p),
            LawKind::Uniform { lo, hi } => {
                (hi.powf(p + 1.0) - lo.powf(p + 1.0)) / ((p + 1.0) * (hi - lo))
            }
            LawKind::DiscreteAtoms { values, probs } => {
                values.iter().zip(probs).map(|(v, w)| w * v.powf(p)).sum()
            }
            LawKind::Pareto { shape: a, scale: s } => {
                if *a <= p {
                    return Ok(PthMoment::INFINITE);
                }
                a * s.powf(p) / (a - p)
            }
        };
        Ok(if m.is_finite() { PthMoment::Finite(m) } else { PthMoment::INFINITE })
    }

    pub fn certificate(&self, p: f64) -> Result<MomentCertificate> {
        Ok(MomentCertificate { p, p_moment: self.pth_moment(p)? })
    }

    /// Normalizing constant `C = sqrt(mean / variance)`.
    pub fn kac_constant(&self) -> Result<f64> {
        let (mean, var) = self.moments();
        if var == 0.0 {
            return Err(Error::DegenerateLaw);
        }
        if !var.is_finite() {
            return Err(Error::InfiniteVariance);
        }
        Ok((mean / var).sqrt())
    }

    /// Law of `U / factor`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        positive("scale factor", factor)?;
        let kind = match &self.kind {
            LawKind::Exponential { rate } => LawKind::Exponential { rate: rate * factor },
            LawKind::Gamma { shape, scale } => {
                LawKind::Gamma { shape: *shape, scale: scale / factor }
            }
            LawKind::Uniform { lo, hi } => LawKind::Uniform { lo: lo / factor, hi: hi / factor },
            LawKind::DiscreteAtoms { values, probs } => LawKind::DiscreteAtoms {
                values: values.iter().map(|v| v / factor).collect(),
                probs: probs.clone(),
            },
            LawKind::Pareto { shape, scale } => {
                LawKind::Pareto { shape: *shape, scale: scale / factor }
            }
        };
        Self::new(kind)
    }

    /// Prepared sampler; construct once per path rather than per draw.
    pub fn sampler(&self) -> Sampler<'_> {
        let inner = match &self.kind {
            LawKind::Exponential { rate } => SamplerKind::Exp(Exp::new(*rate).unwrap()),
            LawKind::Gamma { shape, scale } => {
                SamplerKind::Gamma(Gamma::new(*shape, *scale).unwrap())
            }
            LawKind::Uniform { lo, hi } => SamplerKind::Uniform(Uniform::new(*lo, *hi).unwrap()),
            LawKind::DiscreteAtoms { values, .. } => SamplerKind::Atoms(values, &self.cumulative),
            LawKind::Pareto { shape, scale } => {
                SamplerKind::Pareto(Pareto::new(*scale, *shape).unwrap())
            }
        };
        Sampler { inner }
    }

    /// One draw. Prefer [`InterArrivalLaw::sampler`] in loops.
    pub fn sample(&self, stream: &mut RngStream) -> f64 {
        self.sampler().draw(stream)
    }
}

// Gamma(k + p) / Gamma(k)
fn gamma_ratio(k: f64, p: f64) -> f64 {
    if k + p < 170.0 {
        gamma(k + p) / gamma(k)
    } else {
        (ln_gamma(k + p) - ln_gamma(k)).exp()
    }
}

enum SamplerKind<'a> {
    Exp(Exp<f64>),
    Gamma(Gamma<f64>),
    Uniform(Uniform<f64>),
    Atoms(&'a [f64], &'a [f64]),
    Pareto(Pareto<f64>),
}

pub struct Sampler<'a> {
    inner: SamplerKind<'a>,
}

impl Sampler<'_> {
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match &self.inner {
            SamplerKind::Exp(d) => d.sample(rng),
            SamplerKind::Gamma(d) => d.sample(rng),
            SamplerKind::Uniform(d) => d.sample(rng),
            SamplerKind::Atoms(values, cumulative) => {
                if values.len() == 1 {
                    return values[0];
                }
                let u: f64 = rng.random();
                let i = cumulative.partition_point(|&c| c <= u);
                values[i.min(values.len() - 1)]
            }
            SamplerKind::Pareto(d) => d.sample(rng),
        }
    }
}
