//! The differential literal `{"k": 3, "terms": [[exponent, re, im], ...]}`
//! for `Σ (re + i·im) z^exponent dz^k`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use affsphere_core::differentials::{Chart, MeromorphicKDifferential};

use crate::error::{AppError, Result};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChartSpec {
    /// The plane, with the point at infinity reachable.
    #[default]
    Plane,
    /// A punctured disk around 0.
    PuncturedDisk,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DifferentialLiteral {
    pub k: u32,
    pub terms: Vec<(i32, f64, f64)>,
    #[serde(default)]
    pub chart: ChartSpec,
}

impl DifferentialLiteral {
    pub fn monomial(k: u32, exponent: i32, a: Complex64) -> DifferentialLiteral {
        DifferentialLiteral { k, terms: vec![(exponent, a.re, a.im)], chart: ChartSpec::Plane }
    }

    pub fn to_differential(&self) -> Result<MeromorphicKDifferential> {
        if self.k == 0 {
            return Err(AppError::field("differential.k", "weight must be at least 1"));
        }
        for (i, &(e, re, im)) in self.terms.iter().enumerate() {
            if !(re.is_finite() && im.is_finite()) {
                return Err(AppError::field(format!("differential.terms[{i}]"), format!("non-finite coefficient at exponent {e}")));
            }
        }
        let chart = match self.chart {
            ChartSpec::Plane => Chart::PlaneWithInfinity,
            ChartSpec::PuncturedDisk => Chart::PuncturedDisk,
        };
        let terms = self.terms.iter().map(|&(e, re, im)| (e, Complex64::new(re, im)));
        let phi = MeromorphicKDifferential::new(self.k, terms, chart)?;
        if phi.is_zero() {
            return Err(AppError::field("differential.terms", "the differential is identically zero"));
        }
        Ok(phi)
    }
}
