use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Grid, Mask};
use crate::losses::ssi_align;
use crate::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Alignment {
    #[default]
    None,
    Ssi,
}

/// Standard depth-error summary. `sqrel_x1000` is the squared relative
/// error multiplied by 1000.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub rmse: f64,
    pub rmse_log: f64,
    pub absrel: f64,
    pub sqrel_x1000: f64,
    pub delta_1_1: f64,
    pub pixel_count: usize,
    /// Valid pixels dropped because the (aligned) prediction was not positive.
    pub excluded_count: usize,
    pub alignment: Alignment,
}

impl MetricReport {
    /// One `key value` pair per line.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "rmse {}", self.rmse);
        let _ = writeln!(s, "rmse_log {}", self.rmse_log);
        let _ = writeln!(s, "absrel {}", self.absrel);
        let _ = writeln!(s, "sqrel_x1000 {}", self.sqrel_x1000);
        let _ = writeln!(s, "delta_1_1 {}", self.delta_1_1);
        let _ = writeln!(s, "pixel_count {}", self.pixel_count);
        let _ = writeln!(s, "excluded_count {}", self.excluded_count);
        let _ = writeln!(
            s,
            "alignment {}",
            match self.alignment {
                Alignment::None => "none",
                Alignment::Ssi => "ssi",
            }
        );
        s
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

pub fn depth_metrics<T: Real>(pred: &Grid<T>, gt: &Grid<T>, mask: &Mask, align: Alignment) -> Result<MetricReport> {
    pred.check_shape(gt)?;
    pred.check_shape(mask)?;
    for (u, v, &g) in gt.enumerate() {
        if *mask.get(u, v) && !(g > T::zero() && g.is_finite()) {
            return Err(Error::InvalidDepth {
                u,
                v,
                value: g.to_f64_lossy(),
            });
        }
    }
    let st = match align {
        Alignment::None => None,
        Alignment::Ssi => Some(ssi_align(pred, gt, mask)?),
    };
    let mut pairs = Vec::new();
    let mut excluded = 0;
    for ((&p, &g), &m) in pred.as_slice().iter().zip(gt.as_slice()).zip(mask.as_slice()) {
        if !m {
            continue;
        }
        let p = st.map_or(p, |st| st.apply(p));
        if p > T::zero() && p.is_finite() {
            pairs.push((p.to_f64_lossy(), g.to_f64_lossy()));
        } else {
            excluded += 1;
        }
    }
    if pairs.is_empty() {
        return Err(Error::TooFewPixels { needed: 1, found: 0 });
    }
    let n = pairs.len() as f64;
    let mean = |f: &dyn Fn(f64, f64) -> f64| pairs.iter().map(|&(p, g)| f(p, g)).sum::<f64>() / n;
    Ok(MetricReport {
        rmse: mean(&|p, g| (p - g) * (p - g)).sqrt(),
        rmse_log: mean(&|p, g| (p.ln() - g.ln()).powi(2)).sqrt(),
        absrel: mean(&|p, g| (p - g).abs() / g),
        sqrel_x1000: 1000.0 * mean(&|p, g| (p - g) * (p - g) / g),
        delta_1_1: mean(&|p, g| if (p / g).max(g / p) < 1.1 { 1.0 } else { 0.0 }),
        pixel_count: pairs.len(),
        excluded_count: excluded,
        alignment: align,
    })
}
