//! Service-time laws.
//!
//! Both families are parameterised by a service rate `mu` with mean service
//! time `1/mu`. A law exposes its transform `E[exp(-gamma S)]`, raw moments,
//! seeded sampling, and the law of the residual service time seen by a
//! Poisson arrival that finds the server busy.

use std::fmt;
use std::str::FromStr;

use rand::Rng;

use crate::error::{Error, Result};
use crate::quad::DensityLaw;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ServiceFamily {
    Exponential,
    Deterministic,
}

impl ServiceFamily {
    pub const ALL: [ServiceFamily; 2] = [ServiceFamily::Exponential, ServiceFamily::Deterministic];

    /// Short tag used on the command line and in CSV output.
    pub fn tag(self) -> &'static str {
        match self {
            ServiceFamily::Exponential => "exp",
            ServiceFamily::Deterministic => "det",
        }
    }
}

impl fmt::Display for ServiceFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for ServiceFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "exp" | "exponential" | "m" => Ok(ServiceFamily::Exponential),
            "det" | "deterministic" | "d" => Ok(ServiceFamily::Deterministic),
            other => Err(Error::Parse(format!(
                "unknown service family `{other}` (expected exp|det)"
            ))),
        }
    }
}

/// A service-time distribution with rate `mu > 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ServiceModel {
    family: ServiceFamily,
    rate: f64,
}

impl ServiceModel {
    pub fn new(family: ServiceFamily, rate: f64) -> Result<Self> {
        if !(rate.is_finite() && rate > 0.0) {
            return Err(Error::Domain(format!(
                "service rate must be positive and finite, got {rate}"
            )));
        }
        Ok(ServiceModel { family, rate })
    }

    pub fn exponential(rate: f64) -> Result<Self> {
        Self::new(ServiceFamily::Exponential, rate)
    }

    pub fn deterministic(rate: f64) -> Result<Self> {
        Self::new(ServiceFamily::Deterministic, rate)
    }

    pub fn family(&self) -> ServiceFamily {
        self.family
    }

    /// Service rate `mu`.
    pub fn rate(&self) -> f64 {
        self.rate
    }

    pub fn mean(&self) -> f64 {
        1.0 / self.rate
    }

    /// `E[exp(-gamma S)]` for `gamma >= 0`.
    pub fn mgf(&self, gamma: f64) -> Result<f64> {
        check_transform_arg(gamma)?;
        Ok(match self.family {
            ServiceFamily::Exponential => self.rate / (gamma + self.rate),
            ServiceFamily::Deterministic => (-gamma / self.rate).exp(),
        })
    }

    /// Raw moment `E[S^k]` for `k >= 1`.
    pub fn moment(&self, k: i32) -> Result<f64> {
        if k <= 0 {
            return Err(Error::Domain(format!("moment order must be positive, got {k}")));
        }
        let scale = self.rate.powi(-k);
        Ok(match self.family {
            ServiceFamily::Exponential => factorial(k as u32) * scale,
            ServiceFamily::Deterministic => scale,
        })
    }

    /// `P[S > x]`.
    pub fn survival(&self, x: f64) -> f64 {
        if x < 0.0 {
            return 1.0;
        }
        match self.family {
            ServiceFamily::Exponential => (-self.rate * x).exp(),
            ServiceFamily::Deterministic => {
                if x < self.mean() {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    /// One service time. Exponential draws use the inverse CDF so that one
    /// uniform is consumed per draw; deterministic draws consume nothing.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self.family {
            ServiceFamily::Exponential => exp_inverse_cdf(rng, self.rate),
            ServiceFamily::Deterministic => self.mean(),
        }
    }

    pub fn residual(&self) -> ResidualLaw {
        ResidualLaw { parent: *self }
    }
}

impl fmt::Display for ServiceModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}(mu={})", self.family, self.rate)
    }
}

impl DensityLaw for ServiceModel {
    fn density(&self, x: f64) -> f64 {
        match self.family {
            ServiceFamily::Exponential if x >= 0.0 => self.rate * (-self.rate * x).exp(),
            _ => 0.0,
        }
    }

    fn continuous_support(&self) -> Option<(f64, f64)> {
        match self.family {
            ServiceFamily::Exponential => Some((0.0, f64::INFINITY)),
            ServiceFamily::Deterministic => None,
        }
    }

    fn atoms(&self) -> Vec<(f64, f64)> {
        match self.family {
            ServiceFamily::Exponential => Vec::new(),
            ServiceFamily::Deterministic => vec![(self.mean(), 1.0)],
        }
    }

    fn decay_rate(&self) -> f64 {
        self.rate
    }
}

/// Law of the remaining service time `eta` of the packet in service, as seen
/// by an arrival that finds the server busy: density `P[S > r] / E[S]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResidualLaw {
    parent: ServiceModel,
}

impl ResidualLaw {
    pub fn parent(&self) -> ServiceModel {
        self.parent
    }

    /// `E[exp(-gamma eta)] = (1 - MGF_S(gamma)) / (gamma E[S])`, with the
    /// `gamma -> 0` limit of 1.
    pub fn mgf(&self, gamma: f64) -> Result<f64> {
        check_transform_arg(gamma)?;
        let mu = self.parent.rate;
        Ok(match self.parent.family {
            // memoryless: identical to the parent transform
            ServiceFamily::Exponential => mu / (gamma + mu),
            ServiceFamily::Deterministic => {
                let x = gamma / mu;
                if x == 0.0 {
                    1.0
                } else {
                    -(-x).exp_m1() / x
                }
            }
        })
    }

    /// Density of the residual time at `r >= 0`.
    ///
    /// Deterministic parents are represented analytically as
    /// `Uniform[0, 1/mu)`; [`ResidualLaw::generic_density`] gives the
    /// survival-ratio form for comparison.
    pub fn density(&self, r: f64) -> Result<f64> {
        if r.is_nan() || r < 0.0 {
            return Err(Error::Domain(format!("residual time must be non-negative, got {r}")));
        }
        let mu = self.parent.rate;
        Ok(match self.parent.family {
            ServiceFamily::Exponential => mu * (-mu * r).exp(),
            ServiceFamily::Deterministic => {
                if r < 1.0 / mu {
                    mu
                } else {
                    0.0
                }
            }
        })
    }

    /// `P[S > r] / E[S]`.
    pub fn generic_density(&self, r: f64) -> f64 {
        self.parent.survival(r) / self.parent.mean()
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self.parent.family {
            ServiceFamily::Exponential => exp_inverse_cdf(rng, self.parent.rate),
            ServiceFamily::Deterministic => rng.gen::<f64>() * self.parent.mean(),
        }
    }
}

impl DensityLaw for ResidualLaw {
    fn density(&self, x: f64) -> f64 {
        if x < 0.0 {
            0.0
        } else {
            ResidualLaw::density(self, x).unwrap_or(0.0)
        }
    }

    fn continuous_support(&self) -> Option<(f64, f64)> {
        match self.parent.family {
            ServiceFamily::Exponential => Some((0.0, f64::INFINITY)),
            ServiceFamily::Deterministic => Some((0.0, self.parent.mean())),
        }
    }

    fn atoms(&self) -> Vec<(f64, f64)> {
        Vec::new()
    }

    fn decay_rate(&self) -> f64 {
        self.parent.rate
    }
}

/// `-ln(U) / rate` with `U` uniform on `(0, 1]`.
pub(crate) fn exp_inverse_cdf<R: Rng + ?Sized>(rng: &mut R, rate: f64) -> f64 {
    let u = 1.0 - rng.gen::<f64>();
    -u.ln() / rate
}

pub(crate) fn factorial(k: u32) -> f64 {
    (1..=k).map(f64::from).product()
}

fn check_transform_arg(gamma: f64) -> Result<()> {
    if gamma.is_nan() || gamma < 0.0 {
        return Err(Error::Domain(format!(
            "transform argument must be non-negative, got {gamma}"
        )));
    }
    Ok(())
}
