use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Prior on the free abilities. Every kind places `Normal(0, mu_sd^2)` on the
/// common location `mu` and `1 / sigma^2` on the noise variance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PriorKind {
    /// `xi ~ Laplace(mu, b)` with fixed scale `b` (prior 1).
    FixedLaplace,
    /// `xi ~ Laplace(mu, sigma / sqrt(lambda))`, `lambda ~ Gamma(1, 1)` (prior 2).
    GammaLaplace,
    /// `xi ~ Normal(mu, sigma^2 lambda)`, `lambda ~ Half-Cauchy(0, 1)` (prior 3).
    HalfCauchyNormal,
}

impl PriorKind {
    /// Prior by its number, 1 to 3.
    pub fn from_index(index: u8) -> Result<Self> {
        match index {
            1 => Ok(Self::FixedLaplace),
            2 => Ok(Self::GammaLaplace),
            3 => Ok(Self::HalfCauchyNormal),
            other => Err(Error::InvalidConfig(format!(
                "prior index must be 1, 2 or 3, got {other}"
            ))),
        }
    }

    pub fn index(self) -> u8 {
        match self {
            Self::FixedLaplace => 1,
            Self::GammaLaplace => 2,
            Self::HalfCauchyNormal => 3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PriorSpec {
    pub kind: PriorKind,
    /// Laplace scale of the fixed-scale prior.
    pub laplace_scale: f64,
    /// Standard deviation of the normal prior on `mu`.
    pub mu_sd: f64,
}

impl PriorSpec {
    pub fn new(kind: PriorKind) -> Self {
        Self {
            kind,
            laplace_scale: 3.0,
            mu_sd: 3.0,
        }
    }

    pub fn from_index(index: u8) -> Result<Self> {
        Ok(Self::new(PriorKind::from_index(index)?))
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.laplace_scale > 0.0 && self.mu_sd > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "prior constants must be positive: {self:?}"
            )));
        }
        Ok(())
    }
}
