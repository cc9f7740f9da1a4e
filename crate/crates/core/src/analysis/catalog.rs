//! Theoretical decay exponents and the interpolation optimization that
//! produces the large-`q` rate.

use serde::{Deserialize, Serialize};

use crate::evolution::{critical_exponent, validate_alpha};
use crate::{Result, SqgError};

/// Serialized under the same identifiers [`TheoremId::name`] prints.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TheoremId {
    /// `‖θ‖_{L²}` for `L¹ ∩ L²` data.
    #[serde(rename = "CW_13")]
    Cw13,
    /// `‖θ‖_{L^p}` for `L¹ ∩ L^p` data, `1 < p < ∞`.
    #[serde(rename = "CC_bound")]
    CcBound,
    /// `‖θ‖_{L^p}` for `L² ∩ L^p` data, `p ≥ 2`.
    #[serde(rename = "JU_14")]
    Ju14,
    /// `‖θ‖_{L²}` for `L^p ∩ L²` data, `1 ≤ p < 2`.
    #[serde(rename = "THM_13")]
    Thm13,
    /// Weighted `‖θ‖_{L^q}` for small critical data, `q ≥ m`.
    #[serde(rename = "THM_14")]
    Thm14,
    /// Weighted `‖∇θ‖_{L^q}` for small critical data, `q ≥ m`.
    #[serde(rename = "THM_14_grad")]
    Thm14Grad,
    /// `‖θ‖_{L^q}` after the waiting time, `q ≥ m`.
    #[serde(rename = "THM_15")]
    Thm15,
    /// `‖θ‖²_{L²}` against `ln(e + t)`, `1 ≤ p < 2`.
    #[serde(rename = "LOG_PRELIM")]
    LogPrelim,
}

impl TheoremId {
    pub const ALL: [TheoremId; 8] = [
        TheoremId::Cw13,
        TheoremId::CcBound,
        TheoremId::Ju14,
        TheoremId::Thm13,
        TheoremId::Thm14,
        TheoremId::Thm14Grad,
        TheoremId::Thm15,
        TheoremId::LogPrelim,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            TheoremId::Cw13 => "CW_13",
            TheoremId::CcBound => "CC_bound",
            TheoremId::Ju14 => "JU_14",
            TheoremId::Thm13 => "THM_13",
            TheoremId::Thm14 => "THM_14",
            TheoremId::Thm14Grad => "THM_14_grad",
            TheoremId::Thm15 => "THM_15",
            TheoremId::LogPrelim => "LOG_PRELIM",
        }
    }

    /// Variable the exponent applies to.
    pub fn base(&self) -> RateBase {
        match self {
            TheoremId::LogPrelim => RateBase::LogTime,
            _ => RateBase::Time,
        }
    }

    /// Whether the bounded quantity is the squared norm.
    pub fn squared(&self) -> bool {
        matches!(self, TheoremId::LogPrelim)
    }

    /// Whether the `pq` argument is read.
    pub fn uses_exponent(&self) -> bool {
        !matches!(self, TheoremId::Cw13)
    }

    /// A representative admissible exponent for tabulation.
    pub fn sample_exponent(&self, alpha: f64) -> f64 {
        match self {
            TheoremId::Cw13 | TheoremId::Thm13 | TheoremId::LogPrelim => 1.0,
            TheoremId::CcBound => 2.0,
            TheoremId::Ju14 => 4.0,
            TheoremId::Thm14 | TheoremId::Thm14Grad | TheoremId::Thm15 => {
                2.0 * critical_exponent(alpha)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RateBase {
    /// `t^{exponent}`
    Time,
    /// `ln(e + t)^{exponent}`
    LogTime,
}

/// One resolved catalog row.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RateCatalogEntry {
    pub theorem: TheoremId,
    pub alpha: f64,
    pub pq: f64,
    pub exponent: f64,
    pub base: RateBase,
    pub squared: bool,
}

fn need(cond: bool, constraint: &str) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(SqgError::invalid(format!(
            "parameter constraint violated: {constraint}"
        )))
    }
}

/// Printed exponent of the named estimate.
pub fn catalog_rate(theorem: TheoremId, alpha: f64, pq: f64) -> Result<f64> {
    validate_alpha(alpha)?;
    let m = critical_exponent(alpha);
    let a = alpha;
    Ok(match theorem {
        TheoremId::Cw13 => -1.0 / (2.0 * a),
        TheoremId::CcBound => {
            need(pq > 1.0 && pq.is_finite(), "1 < p < infinity")?;
            -(pq - 1.0) / (a * pq)
        }
        TheoremId::Ju14 => {
            need(pq >= 2.0 && pq.is_finite(), "p >= 2")?;
            (2.0 - pq) / (2.0 * pq * a)
        }
        TheoremId::Thm13 => {
            need((1.0..2.0).contains(&pq), "1 <= p < 2")?;
            -(1.0 / (2.0 * a)) * (2.0 / pq - 1.0)
        }
        TheoremId::Thm14 => {
            need(pq >= m && pq.is_finite(), "m <= q < infinity")?;
            -(1.0 / a) * (1.0 / m - 1.0 / pq)
        }
        TheoremId::Thm14Grad => {
            need(pq >= m && pq.is_finite(), "m <= q < infinity")?;
            -(1.0 / (2.0 * a) + (1.0 / a) * (1.0 / m - 1.0 / pq))
        }
        TheoremId::Thm15 => {
            need(pq >= m && pq.is_finite(), "m <= q < infinity")?;
            (1.0 / pq) * (4.0 * a - 3.0) / (a * (2.0 * a - 1.0)) - 1.0 + 1.0 / (2.0 * a)
        }
        TheoremId::LogPrelim => {
            need((1.0..2.0).contains(&pq), "1 <= p < 2")?;
            -(1.0 + 1.0 / a)
        }
    })
}

pub fn catalog_entry(theorem: TheoremId, alpha: f64, pq: f64) -> Result<RateCatalogEntry> {
    Ok(RateCatalogEntry {
        theorem,
        alpha,
        pq,
        exponent: catalog_rate(theorem, alpha, pq)?,
        base: theorem.base(),
        squared: theorem.squared(),
    })
}

/// Interpolation exponent `f(r) = C₁(r−q)/(r−m) − C₂` for `q ≤ r`.
pub fn interpolated_rate(r: f64, q: f64, alpha: f64) -> Result<f64> {
    validate_alpha(alpha)?;
    let m = critical_exponent(alpha);
    need(q >= m, "q >= m")?;
    need(r >= q && r > m, "r >= q and r > m")?;
    let (c1, c2) = interpolation_constants(q, alpha, m);
    if r.is_infinite() {
        return Ok(c1 - c2);
    }
    Ok(c1 * (r - q) / (r - m) - c2)
}

fn interpolation_constants(q: f64, alpha: f64, m: f64) -> (f64, f64) {
    let c1 = (1.0 - 1.0 / alpha) * m / q;
    let c2 = (1.0 / alpha) * (1.0 / m - 1.0 / q);
    (c1, c2)
}

/// `lim_{r→∞} f(r) = C₁ − C₂`.
///
/// Fails if the result disagrees with the catalog large-`q` exponent beyond
/// round-off or if `f` increases anywhere on a probe set of `r` values.
pub fn optimal_rate(q: f64, alpha: f64) -> Result<f64> {
    validate_alpha(alpha)?;
    let m = critical_exponent(alpha);
    need(q >= m && q.is_finite(), "m <= q < infinity")?;
    let (c1, c2) = interpolation_constants(q, alpha, m);
    let rate = c1 - c2;
    let printed = catalog_rate(TheoremId::Thm15, alpha, q)?;
    if (rate - printed).abs() > 1e-12 * (1.0 + printed.abs()) {
        return Err(SqgError::invalid(format!(
            "optimized rate {rate} disagrees with catalog value {printed}"
        )));
    }
    let probes = [q * (1.0 + 1e-9) + 1e-9, q + 1.0, 2.0 * q, 10.0 * q, 1e6 * q];
    let values: Vec<f64> = probes
        .iter()
        .map(|&r| interpolated_rate(r.max(m * (1.0 + 1e-12)), q, alpha))
        .collect::<Result<_>>()?;
    if values.windows(2).any(|w| w[1] > w[0] + 1e-14) {
        return Err(SqgError::invalid(
            "interpolation exponent is not non-increasing in r",
        ));
    }
    Ok(rate)
}
