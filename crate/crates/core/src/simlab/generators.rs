//! Seedable data-generating distributions.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::data::{Dataset, Sample};
use crate::error::{Error, Result};
use crate::rng::{SeedPath, StreamRng};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CovariateLaw {
    #[default]
    StandardNormal,
    Uniform01,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoxResponse {
    /// `f(x) = sum_j x_j`
    Linear,
    /// `f(x) = 1{x_1 > 1/2}`
    Step,
    /// `f(x) = 0`
    Constant,
}

/// Distribution of one observation `Z = (X, Y)`. Noise terms are Gaussian.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum GeneratorSpec {
    /// `Y = X beta + sigma * eps`, covariates i.i.d. from `covariates`.
    LinearGaussian {
        beta: Vec<f64>,
        sigma: f64,
        #[serde(default)]
        covariates: CovariateLaw,
    },
    /// `X ~ U[0,1]`, `Y = 1 - X + sigma * eps`.
    OneMinusX { sigma: f64 },
    /// `X ~ U[0,1]^d`, `Y = f(X) + sigma * eps`.
    UniformBox {
        d: usize,
        response: BoxResponse,
        #[serde(default)]
        sigma: f64,
    },
    /// `Y` takes `values[i]` with probability `probs[i]`; the single covariate equals `Y`.
    TwoPoint { values: Vec<f64>, probs: Vec<f64> },
    /// Finite distribution over whole observations.
    Discrete { support: Vec<Sample>, probs: Vec<f64> },
}

/// Moments of the response `Y` that are known in closed form.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ResponseMoments {
    pub mean: f64,
    pub variance: f64,
    /// `E|Y - mu|^3`, when known.
    pub abs3: Option<f64>,
    /// `E(Y - mu)^4`, when known.
    pub mu4: Option<f64>,
}

const NORMAL_ABS3: f64 = 1.595_769_121_605_730_7; // 2 * sqrt(2 / pi)

fn normal_moments(mean: f64, variance: f64) -> ResponseMoments {
    ResponseMoments { mean, variance, abs3: Some(NORMAL_ABS3 * variance.powf(1.5)), mu4: Some(3.0 * variance * variance) }
}

fn check_probs(probs: &[f64], len: usize) -> Result<()> {
    if probs.len() != len || len == 0 {
        return Err(Error::invalid("support and probabilities must have equal nonzero length"));
    }
    if probs.iter().any(|p| !(*p >= 0.0)) {
        return Err(Error::invalid("probabilities must be nonnegative"));
    }
    let total: f64 = probs.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::invalid(format!("probabilities sum to {total}, not 1")));
    }
    Ok(())
}

fn pick<R: Rng>(probs: &[f64], rng: &mut R) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (i, p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return i;
        }
    }
    probs.len() - 1
}

impl GeneratorSpec {
    pub fn two_point(values: [f64; 2], probs: [f64; 2]) -> Self {
        GeneratorSpec::TwoPoint { values: values.to_vec(), probs: probs.to_vec() }
    }

    pub fn validate(&self) -> Result<()> {
        let sigma_ok = |s: f64| s.is_finite() && s >= 0.0;
        match self {
            GeneratorSpec::LinearGaussian { beta, sigma, .. } => {
                if beta.is_empty() || !sigma_ok(*sigma) || beta.iter().any(|b| !b.is_finite()) {
                    return Err(Error::invalid("linear_gaussian needs nonempty finite beta and sigma >= 0"));
                }
            }
            GeneratorSpec::OneMinusX { sigma } => {
                if !sigma_ok(*sigma) {
                    return Err(Error::invalid("sigma must be >= 0"));
                }
            }
            GeneratorSpec::UniformBox { d, sigma, .. } => {
                if *d == 0 || !sigma_ok(*sigma) {
                    return Err(Error::invalid("uniform_box needs d >= 1 and sigma >= 0"));
                }
            }
            GeneratorSpec::TwoPoint { values, probs } => check_probs(probs, values.len())?,
            GeneratorSpec::Discrete { support, probs } => {
                check_probs(probs, support.len())?;
                Dataset::new(support.clone())?;
            }
        }
        Ok(())
    }

    /// Covariate dimension.
    pub fn p(&self) -> usize {
        match self {
            GeneratorSpec::LinearGaussian { beta, .. } => beta.len(),
            GeneratorSpec::OneMinusX { .. } | GeneratorSpec::TwoPoint { .. } => 1,
            GeneratorSpec::UniformBox { d, .. } => *d,
            GeneratorSpec::Discrete { support, .. } => support[0].x.len(),
        }
    }

    /// Overwrites `row` with a fresh draw (reuses its covariate buffer).
    pub fn fill<R: Rng>(&self, rng: &mut R, row: &mut Sample) {
        row.x.resize(self.p(), 0.0);
        match self {
            GeneratorSpec::LinearGaussian { beta, sigma, covariates } => {
                let mut y = 0.0;
                for (xj, b) in row.x.iter_mut().zip(beta) {
                    *xj = match covariates {
                        CovariateLaw::StandardNormal => rng.sample(StandardNormal),
                        CovariateLaw::Uniform01 => rng.random(),
                    };
                    y += *xj * b;
                }
                let eps: f64 = rng.sample(StandardNormal);
                row.y = y + sigma * eps;
            }
            GeneratorSpec::OneMinusX { sigma } => {
                let x: f64 = rng.random();
                let eps: f64 = rng.sample(StandardNormal);
                row.x[0] = x;
                row.y = 1.0 - x + sigma * eps;
            }
            GeneratorSpec::UniformBox { response, sigma, .. } => {
                for xj in row.x.iter_mut() {
                    *xj = rng.random();
                }
                let f = match response {
                    BoxResponse::Linear => row.x.iter().sum(),
                    BoxResponse::Step => f64::from(u8::from(row.x[0] > 0.5)),
                    BoxResponse::Constant => 0.0,
                };
                let eps: f64 = if *sigma > 0.0 { rng.sample(StandardNormal) } else { 0.0 };
                row.y = f + sigma * eps;
            }
            GeneratorSpec::TwoPoint { values, probs } => {
                let v = values[pick(probs, rng)];
                row.x[0] = v;
                row.y = v;
            }
            GeneratorSpec::Discrete { support, probs } => {
                let z = &support[pick(probs, rng)];
                row.x.copy_from_slice(&z.x);
                row.y = z.y;
            }
        }
    }

    pub fn draw<R: Rng>(&self, rng: &mut R) -> Sample {
        let mut row = Sample::new(Vec::with_capacity(self.p()), 0.0);
        self.fill(rng, &mut row);
        row
    }

    pub fn draw_rows(&self, rng: &mut StreamRng, n: usize) -> Vec<Sample> {
        (0..n).map(|_| self.draw(rng)).collect()
    }

    /// `n` i.i.d. observations, a pure function of `(self, n, seed)`.
    pub fn generate(&self, n: usize, seed: u64) -> Result<Dataset> {
        self.validate()?;
        if n == 0 {
            return Err(Error::invalid("n must be at least 1"));
        }
        let mut rng = SeedPath::new(seed).rng();
        Dataset::new(self.draw_rows(&mut rng, n))
    }

    /// Closed-form moments of the response, when available.
    pub fn response_moments(&self) -> Option<ResponseMoments> {
        match self {
            GeneratorSpec::LinearGaussian { beta, sigma, covariates } => match covariates {
                CovariateLaw::StandardNormal => {
                    normal_moments(0.0, beta.iter().map(|b| b * b).sum::<f64>() + sigma * sigma).into()
                }
                CovariateLaw::Uniform01 => {
                    let mean = beta.iter().sum::<f64>() / 2.0;
                    let var = beta.iter().map(|b| b * b).sum::<f64>() / 12.0 + sigma * sigma;
                    if beta.iter().all(|b| *b == 0.0) {
                        Some(normal_moments(0.0, var))
                    } else {
                        Some(ResponseMoments { mean, variance: var, abs3: None, mu4: None })
                    }
                }
            },
            GeneratorSpec::OneMinusX { sigma } => {
                let var = 1.0 / 12.0 + sigma * sigma;
                if *sigma == 0.0 {
                    // Y ~ U[0,1]: E|Y - 1/2|^3 = 1/32, E(Y - 1/2)^4 = 1/80.
                    Some(ResponseMoments { mean: 0.5, variance: var, abs3: Some(1.0 / 32.0), mu4: Some(1.0 / 80.0) })
                } else {
                    Some(ResponseMoments { mean: 0.5, variance: var, abs3: None, mu4: None })
                }
            }
            GeneratorSpec::UniformBox { d, response, sigma } => {
                let s2 = sigma * sigma;
                match response {
                    BoxResponse::Constant => Some(normal_moments(0.0, s2)),
                    BoxResponse::Linear => Some(ResponseMoments {
                        mean: *d as f64 / 2.0,
                        variance: *d as f64 / 12.0 + s2,
                        abs3: None,
                        mu4: None,
                    }),
                    BoxResponse::Step => Some(ResponseMoments { mean: 0.5, variance: 0.25 + s2, abs3: None, mu4: None }),
                }
            }
            GeneratorSpec::TwoPoint { values, probs } => Some(discrete_moments(values, probs)),
            GeneratorSpec::Discrete { support, probs } => {
                let ys: Vec<f64> = support.iter().map(|z| z.y).collect();
                Some(discrete_moments(&ys, probs))
            }
        }
    }
}

fn discrete_moments(values: &[f64], probs: &[f64]) -> ResponseMoments {
    let mean: f64 = values.iter().zip(probs).map(|(v, p)| v * p).sum();
    let central = |k: i32| values.iter().zip(probs).map(|(v, p)| p * (v - mean).abs().powi(k)).sum::<f64>();
    ResponseMoments { mean, variance: central(2), abs3: Some(central(3)), mu4: Some(central(4)) }
}
