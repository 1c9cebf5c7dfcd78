//! One Gibbs scan of the point-difference model.
//!
//! Scan order: abilities (joint Gaussian block), `mu`, `sigma^2`, then the
//! prior scales. The Laplace priors use the exponential scale-mixture
//! representation, under which the reciprocal scales are inverse Gaussian.

use nalgebra::{Cholesky, DMatrix, DVector};
use rand::Rng;
use rand_distr::{Distribution, Gamma, InverseGaussian, StandardNormal};

use crate::error::{Error, Result};
use crate::model::design::Design;
use crate::model::prior::{PriorKind, PriorSpec};
use crate::model::slice::slice_step;

const MAX_VARIANCE_RETRIES: usize = 100;
const MIN_ABS_DEVIATION: f64 = 1e-12;

/// State of one chain.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainState {
    /// Abilities of all players; the reference entry stays at zero.
    pub xi: Vec<f64>,
    pub mu: f64,
    pub sigma2: f64,
    pub lambda: f64,
    /// Latent mixture scales of the free players (Laplace priors only).
    pub omega: Vec<f64>,
}

/// Counters reported alongside the draws.
#[derive(Debug, Clone, Default, PartialEq, Eq, serde::Serialize)]
pub struct StepCounters {
    pub variance_retries: usize,
    pub slice_evaluations: usize,
    /// Scans where `sigma^2` had an improper conditional and was left unchanged.
    pub sigma2_skipped: usize,
}

/// Gibbs sampler over a fixed design and prior.
pub struct GibbsSampler<'a> {
    design: &'a Design,
    prior: PriorSpec,
    gram: DMatrix<f64>,
    cross: DVector<f64>,
}

fn inverse_gamma<R: Rng + ?Sized>(shape: f64, scale: f64, rng: &mut R) -> f64 {
    match Gamma::new(shape, 1.0) {
        Ok(g) => scale / g.sample(rng),
        Err(_) => f64::NAN,
    }
}

impl<'a> GibbsSampler<'a> {
    pub fn new(design: &'a Design, prior: PriorSpec) -> Result<Self> {
        prior.validate()?;
        Ok(Self {
            design,
            prior,
            gram: design.gram(),
            cross: design.cross(),
        })
    }

    pub fn design(&self) -> &Design {
        self.design
    }

    /// Prior variance of each free ability given the current scales.
    pub fn prior_variances(&self, state: &ChainState) -> Vec<f64> {
        match self.prior.kind {
            PriorKind::FixedLaplace => state.omega.clone(),
            PriorKind::GammaLaplace => state.omega.iter().map(|w| state.sigma2 * w).collect(),
            PriorKind::HalfCauchyNormal => {
                vec![state.sigma2 * state.lambda; self.design.num_free()]
            }
        }
    }

    /// Initial state; `spread` scales the random ability start.
    pub fn initial_state<R: Rng + ?Sized>(&self, spread: f64, rng: &mut R) -> ChainState {
        let p = self.design.num_free();
        let y = &self.design.response;
        let var = if y.len() > 1 {
            let m = y.iter().sum::<f64>() / y.len() as f64;
            y.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (y.len() - 1) as f64
        } else {
            1.0
        };
        let jitter: f64 = rng.sample::<f64, _>(StandardNormal) * 0.5 * spread.min(1.0);
        let omega = match self.prior.kind {
            PriorKind::FixedLaplace => vec![2.0 * self.prior.laplace_scale.powi(2); p],
            PriorKind::GammaLaplace => vec![2.0; p],
            PriorKind::HalfCauchyNormal => Vec::new(),
        };
        let free: Vec<f64> = (0..p)
            .map(|_| spread * rng.sample::<f64, _>(StandardNormal))
            .collect();
        ChainState {
            xi: self.design.expand(&free),
            mu: 0.0,
            sigma2: var.max(1e-6) * jitter.exp(),
            lambda: 1.0,
            omega,
        }
    }

    /// Mean and covariance of the free abilities given `mu`, `sigma^2` and
    /// the prior variances.
    pub fn xi_conditional(
        &self,
        mu: f64,
        sigma2: f64,
        variances: &[f64],
    ) -> Result<(DVector<f64>, DMatrix<f64>)> {
        let chol = self.precision_cholesky(sigma2, variances)?;
        let rhs = self.conditional_rhs(mu, sigma2, variances);
        let mean = chol.solve(&rhs);
        Ok((mean, chol.inverse()))
    }

    fn precision_cholesky(
        &self,
        sigma2: f64,
        variances: &[f64],
    ) -> Result<Cholesky<f64, nalgebra::Dyn>> {
        let mut q = &self.gram / sigma2;
        for (c, v) in variances.iter().enumerate() {
            q[(c, c)] += 1.0 / v;
        }
        Cholesky::new(q).ok_or_else(|| {
            Error::Numerical("ability precision matrix is not positive definite".into())
        })
    }

    fn conditional_rhs(&self, mu: f64, sigma2: f64, variances: &[f64]) -> DVector<f64> {
        let mut rhs = &self.cross / sigma2;
        for (c, v) in variances.iter().enumerate() {
            rhs[c] += mu / v;
        }
        rhs
    }

    /// One full scan.
    pub fn step<R: Rng + ?Sized>(
        &self,
        state: &mut ChainState,
        rng: &mut R,
        counters: &mut StepCounters,
    ) -> Result<()> {
        let p = self.design.num_free();

        // abilities
        let variances = self.prior_variances(state);
        let chol = self.precision_cholesky(state.sigma2, &variances)?;
        let mean = chol.solve(&self.conditional_rhs(state.mu, state.sigma2, &variances));
        let z = DVector::from_fn(p, |_, _| rng.sample::<f64, _>(StandardNormal));
        let noise = chol
            .l()
            .tr_solve_lower_triangular(&z)
            .ok_or_else(|| Error::Numerical("triangular solve failed".into()))?;
        let free: Vec<f64> = (mean + noise).iter().copied().collect();
        for (c, &v) in free.iter().enumerate() {
            state.xi[self.design.player_of(c)] = v;
        }

        // location
        let mut precision = 1.0 / self.prior.mu_sd.powi(2);
        let mut weighted = 0.0;
        for (x, v) in free.iter().zip(&variances) {
            precision += 1.0 / v;
            weighted += x / v;
        }
        state.mu = weighted / precision + rng.sample::<f64, _>(StandardNormal) / precision.sqrt();

        // noise variance
        let rss = self.design.rss(&free);
        let n = self.design.num_rows() as f64;
        let (shape, scale) = match self.prior.kind {
            PriorKind::FixedLaplace => (0.5 * n, 0.5 * rss),
            PriorKind::GammaLaplace => {
                let s: f64 = free
                    .iter()
                    .zip(&state.omega)
                    .map(|(x, w)| (x - state.mu).powi(2) / w)
                    .sum();
                (0.5 * (n + p as f64), 0.5 * (rss + s))
            }
            PriorKind::HalfCauchyNormal => {
                let s: f64 = free.iter().map(|x| (x - state.mu).powi(2)).sum();
                (0.5 * (n + p as f64), 0.5 * (rss + s / state.lambda))
            }
        };
        if shape > 0.0 && scale > 0.0 {
            let mut tries = 0;
            loop {
                let draw = inverse_gamma(shape, scale, rng);
                if draw.is_finite() && draw > 0.0 {
                    state.sigma2 = draw;
                    break;
                }
                tries += 1;
                counters.variance_retries += 1;
                if tries >= MAX_VARIANCE_RETRIES {
                    return Err(Error::Numerical(format!(
                        "sigma^2 draw failed {tries} times (shape {shape}, scale {scale})"
                    )));
                }
            }
        } else {
            counters.sigma2_skipped += 1;
        }

        // prior scales
        match self.prior.kind {
            PriorKind::FixedLaplace => {
                let rate = 1.0 / self.prior.laplace_scale;
                for (w, x) in state.omega.iter_mut().zip(&free) {
                    let dev = (x - state.mu).abs().max(MIN_ABS_DEVIATION);
                    *w = 1.0 / sample_inverse_gaussian(rate / dev, rate * rate, rng)?;
                }
            }
            PriorKind::GammaLaplace => {
                let sigma = state.sigma2.sqrt();
                let root = state.lambda.sqrt();
                for (w, x) in state.omega.iter_mut().zip(&free) {
                    let dev = (x - state.mu).abs().max(MIN_ABS_DEVIATION);
                    *w = 1.0 / sample_inverse_gaussian(root * sigma / dev, state.lambda, rng)?;
                }
                let shape = 1.0 + p as f64;
                let rate = 1.0 + 0.5 * state.omega.iter().sum::<f64>();
                let g = Gamma::new(shape, 1.0 / rate)
                    .map_err(|e| Error::Numerical(format!("lambda conditional: {e}")))?;
                state.lambda = g.sample(rng);
            }
            PriorKind::HalfCauchyNormal => {
                let s: f64 = free.iter().map(|x| (x - state.mu).powi(2)).sum();
                let half_p = 0.5 * p as f64;
                let c = s / (2.0 * state.sigma2);
                // density of u = ln(lambda), Jacobian included
                let log_density = |u: f64| -> f64 {
                    let two_u = 2.0 * u;
                    let log1p_exp = if two_u > 30.0 {
                        two_u
                    } else {
                        two_u.exp().ln_1p()
                    };
                    -half_p * u - c * (-u).exp() - log1p_exp + u
                };
                let (u, evals) = slice_step(state.lambda.ln(), log_density, 1.0, 100, rng);
                counters.slice_evaluations += evals;
                state.lambda = u.exp();
            }
        }
        Ok(())
    }
}

fn sample_inverse_gaussian<R: Rng + ?Sized>(mean: f64, shape: f64, rng: &mut R) -> Result<f64> {
    let d = InverseGaussian::new(mean, shape)
        .map_err(|e| Error::Numerical(format!("inverse Gaussian({mean}, {shape}): {e}")))?;
    let v: f64 = d.sample(rng);
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(Error::Numerical(format!(
            "inverse Gaussian({mean}, {shape}) produced {v}"
        )))
    }
}
