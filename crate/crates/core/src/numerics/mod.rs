//! Statistics kernels: cosine similarity, standardization, the signed log
//! transform, Pearson correlation and one-way ANOVA.

pub mod special;

use std::str::FromStr;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use special::{f_cdf, f_sf, ln_beta, ln_gamma, regularized_incomplete_beta};

#[derive(Clone, Debug, PartialEq, Error)]
pub enum NumericsError {
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("zero-norm vector")]
    ZeroVector,
    #[error("need at least {needed} values, got {got}")]
    TooShort { needed: usize, got: usize },
    #[error("input has zero variance")]
    Constant,
    #[error("input contains a non-finite value")]
    NonFinite,
    #[error("need at least two groups, got {0}")]
    TooFewGroups(usize),
    #[error("group {0:?} is empty")]
    EmptyGroup(String),
    #[error("total sample size {total} must exceed the number of groups {groups}")]
    TooFewObservations { total: usize, groups: usize },
}

fn ensure_finite(values: &[f64]) -> Result<(), NumericsError> {
    if values.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(NumericsError::NonFinite)
    }
}

pub fn dot(u: &[f64], v: &[f64]) -> f64 {
    u.iter().zip(v).map(|(a, b)| a * b).sum()
}

pub fn norm(u: &[f64]) -> f64 {
    dot(u, u).sqrt()
}

pub fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Cosine similarity, clamped to `[-1, 1]`.
pub fn cosine(u: &[f64], v: &[f64]) -> Result<f64, NumericsError> {
    if u.len() != v.len() {
        return Err(NumericsError::LengthMismatch {
            left: u.len(),
            right: v.len(),
        });
    }
    let (nu, nv) = (norm(u), norm(v));
    if nu == 0.0 || nv == 0.0 {
        return Err(NumericsError::ZeroVector);
    }
    Ok((dot(u, v) / (nu * nv)).clamp(-1.0, 1.0))
}

/// Delta degrees of freedom for the standard deviation.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "u8", try_from = "u8")]
pub enum Ddof {
    /// Divide by `n`.
    #[default]
    Population,
    /// Divide by `n - 1`.
    Sample,
}

impl Ddof {
    fn value(self) -> usize {
        match self {
            Ddof::Population => 0,
            Ddof::Sample => 1,
        }
    }
}

impl From<Ddof> for u8 {
    fn from(d: Ddof) -> u8 {
        d.value() as u8
    }
}

impl TryFrom<u8> for Ddof {
    type Error = String;

    fn try_from(v: u8) -> Result<Self, Self::Error> {
        match v {
            0 => Ok(Ddof::Population),
            1 => Ok(Ddof::Sample),
            other => Err(format!("ddof must be 0 or 1, got {other}")),
        }
    }
}

impl FromStr for Ddof {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.parse::<u8>()
            .map_err(|_| format!("ddof must be 0 or 1, got {s:?}"))
            .and_then(Ddof::try_from)
    }
}

pub fn std_dev(values: &[f64], ddof: Ddof) -> f64 {
    let m = mean(values);
    let ss: f64 = values.iter().map(|v| (v - m) * (v - m)).sum();
    (ss / (values.len() - ddof.value()) as f64).sqrt()
}

/// Standardize to zero mean and unit standard deviation.
pub fn zscore(values: &[f64], ddof: Ddof) -> Result<Vec<f64>, NumericsError> {
    if values.len() < 2 {
        return Err(NumericsError::TooShort {
            needed: 2,
            got: values.len(),
        });
    }
    ensure_finite(values)?;
    let m = mean(values);
    let sd = std_dev(values, ddof);
    if sd == 0.0 || values.iter().all(|&v| v == values[0]) {
        return Err(NumericsError::Constant);
    }
    Ok(values.iter().map(|v| (v - m) / sd).collect())
}

/// `sign(x) * ln(1 + |x|)`: an odd, monotone log transform defined on all
/// reals.
pub fn signed_log1p(x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x.signum() * x.abs().ln_1p()
    }
}

/// Sample Pearson product-moment correlation, clamped to `[-1, 1]`.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64, NumericsError> {
    if x.len() != y.len() {
        return Err(NumericsError::LengthMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    if x.len() < 3 {
        return Err(NumericsError::TooShort {
            needed: 3,
            got: x.len(),
        });
    }
    ensure_finite(x)?;
    ensure_finite(y)?;
    let (mx, my) = (mean(x), mean(y));
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(NumericsError::Constant);
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

/// One labelled group of observations.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroupSample {
    pub label: String,
    pub values: Vec<f64>,
}

impl GroupSample {
    pub fn new(label: impl Into<String>, values: Vec<f64>) -> Self {
        GroupSample {
            label: label.into(),
            values,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnovaResult {
    /// `+inf` when the within-group sum of squares vanishes but the between
    /// sum does not. Serialized as `null` in JSON.
    pub f_stat: f64,
    pub p_value: f64,
    pub eta_squared: f64,
    pub df_between: usize,
    pub df_within: usize,
    pub ss_between: f64,
    pub ss_within: f64,
    pub group_means: IndexMap<String, f64>,
    pub group_sizes: IndexMap<String, usize>,
}

/// One-way ANOVA with the F-test p-value and eta squared (`SSB / SST`).
pub fn one_way_anova(groups: &[GroupSample]) -> Result<AnovaResult, NumericsError> {
    if groups.len() < 2 {
        return Err(NumericsError::TooFewGroups(groups.len()));
    }
    for g in groups {
        if g.values.is_empty() {
            return Err(NumericsError::EmptyGroup(g.label.clone()));
        }
        ensure_finite(&g.values)?;
    }
    let total: usize = groups.iter().map(|g| g.values.len()).sum();
    if total <= groups.len() {
        return Err(NumericsError::TooFewObservations {
            total,
            groups: groups.len(),
        });
    }

    let means: Vec<f64> = groups.iter().map(|g| mean(&g.values)).collect();
    let grand = groups.iter().flat_map(|g| &g.values).sum::<f64>() / total as f64;
    let ss_within: f64 = groups
        .iter()
        .zip(&means)
        .map(|(g, m)| g.values.iter().map(|v| (v - m) * (v - m)).sum::<f64>())
        .sum();
    let ss_between = if means.iter().all(|&m| m == means[0]) {
        0.0
    } else {
        groups
            .iter()
            .zip(&means)
            .map(|(g, m)| g.values.len() as f64 * (m - grand) * (m - grand))
            .sum()
    };

    let df_between = groups.len() - 1;
    let df_within = total - groups.len();
    let ss_total = ss_between + ss_within;
    let eta_squared = if ss_total > 0.0 {
        (ss_between / ss_total).clamp(0.0, 1.0)
    } else {
        0.0
    };
    let (f_stat, p_value) = if ss_between == 0.0 {
        (0.0, 1.0)
    } else if ss_within == 0.0 {
        (f64::INFINITY, 0.0)
    } else {
        let f = (ss_between / df_between as f64) / (ss_within / df_within as f64);
        (f, f_sf(f, df_between as f64, df_within as f64))
    };

    Ok(AnovaResult {
        f_stat,
        p_value,
        eta_squared,
        df_between,
        df_within,
        ss_between,
        ss_within,
        group_means: groups
            .iter()
            .zip(&means)
            .map(|(g, m)| (g.label.clone(), *m))
            .collect(),
        group_sizes: groups
            .iter()
            .map(|g| (g.label.clone(), g.values.len()))
            .collect(),
    })
}
