use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::Real;

/// Weights of the training objective. Defaults are the published values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LossWeights {
    pub alpha_ssi: f64,
    pub alpha_reg: f64,
    pub alpha_pps_sup: f64,
    pub alpha_pps_corr: f64,
    /// Only used when an externally computed virtual-normal term is supplied.
    pub alpha_vnl: f64,
}

impl Default for LossWeights {
    fn default() -> Self {
        Self {
            alpha_ssi: 1.0,
            alpha_reg: 0.1,
            alpha_pps_sup: 1.0,
            alpha_pps_corr: 1.0,
            alpha_vnl: 10.0,
        }
    }
}

impl LossWeights {
    pub fn zero() -> Self {
        Self {
            alpha_ssi: 0.0,
            alpha_reg: 0.0,
            alpha_pps_sup: 0.0,
            alpha_pps_corr: 0.0,
            alpha_vnl: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let all = [
            ("alpha_ssi", self.alpha_ssi),
            ("alpha_reg", self.alpha_reg),
            ("alpha_pps_sup", self.alpha_pps_sup),
            ("alpha_pps_corr", self.alpha_pps_corr),
            ("alpha_vnl", self.alpha_vnl),
        ];
        for (name, w) in all {
            if !(w >= 0.0 && w.is_finite()) {
                return Err(Error::InvalidParameter(format!("{name} must be >= 0, got {w}")));
            }
        }
        Ok(())
    }
}

/// Loss values to combine; `None` terms contribute nothing.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct LossTerms<T> {
    pub ssi: Option<T>,
    pub reg: Option<T>,
    pub pps_sup: Option<T>,
    pub pps_corr: Option<T>,
    pub vnl: Option<T>,
}

pub fn aggregate_loss<T: Real>(terms: &LossTerms<T>, weights: &LossWeights) -> Result<T> {
    weights.validate()?;
    let parts = [
        ("ssi", terms.ssi, weights.alpha_ssi),
        ("reg", terms.reg, weights.alpha_reg),
        ("pps_sup", terms.pps_sup, weights.alpha_pps_sup),
        ("pps_corr", terms.pps_corr, weights.alpha_pps_corr),
        ("vnl", terms.vnl, weights.alpha_vnl),
    ];
    let mut total = T::zero();
    for (name, value, alpha) in parts {
        if let Some(x) = value {
            if !x.is_finite() {
                return Err(Error::NonFiniteTerm(name));
            }
            total = total + T::lit(alpha) * x;
        }
    }
    Ok(total)
}
