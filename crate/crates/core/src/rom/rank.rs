//! Reduced-dimension selection from a singular-value spectrum.

use crate::error::{Error, Result};

/// Singular values below this fraction of `sigma_1` count as zero.
pub const ZERO_RELATIVE: f64 = 1e-12;

pub const DEFAULT_THRESHOLD: f64 = 1e-2;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RankRule {
    /// `r = min { i : C_i < V }`, `C_i = S_i / S_1`, `S_i = sum_{j >= i} sigma_j`.
    CumulativeSigma { threshold: f64 },
    /// Smallest `n` with `sum_{j > n} sigma_j^2 <= eps * sum_j sigma_j^2`.
    EnergyTail { epsilon: f64 },
}

impl Default for RankRule {
    fn default() -> Self {
        RankRule::CumulativeSigma { threshold: DEFAULT_THRESHOLD }
    }
}

impl RankRule {
    pub fn validate(&self) -> Result<()> {
        let v = match *self {
            RankRule::CumulativeSigma { threshold } => threshold,
            RankRule::EnergyTail { epsilon } => epsilon,
        };
        if !(v.is_finite() && v > 0.0) {
            return Err(Error::invalid(format!("rank threshold must be positive, got {v}")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RankSelection {
    pub rank: usize,
    /// False when no index met the bound and the full length was returned.
    pub satisfied: bool,
}

fn cleaned(singular_values: &[f64]) -> Result<Vec<f64>> {
    let first = *singular_values
        .first()
        .ok_or_else(|| Error::invalid("empty singular-value spectrum"))?;
    if singular_values.iter().any(|s| !s.is_finite() || *s < 0.0) {
        return Err(Error::invalid("singular values must be finite and nonnegative"));
    }
    if first <= 0.0 {
        return Err(Error::invalid("all-zero singular-value spectrum"));
    }
    if singular_values
        .windows(2)
        .any(|w| w[1] > w[0] * (1.0 + 1e-12) + f64::MIN_POSITIVE)
    {
        return Err(Error::invalid("singular values must be nonincreasing"));
    }
    let cutoff = ZERO_RELATIVE * first;
    Ok(singular_values
        .iter()
        .map(|&s| if s < cutoff { 0.0 } else { s })
        .collect())
}

/// `C_i` for `i = 1..=len`, using the zero cutoff.
pub fn cumulative_ratios(singular_values: &[f64]) -> Result<Vec<f64>> {
    let s = cleaned(singular_values)?;
    let mut tails = vec![0.0; s.len()];
    let mut acc = 0.0;
    for i in (0..s.len()).rev() {
        acc += s[i];
        tails[i] = acc;
    }
    let total = tails[0];
    Ok(tails.into_iter().map(|t| t / total).collect())
}

pub fn select_rank(singular_values: &[f64], rule: RankRule) -> Result<RankSelection> {
    rule.validate()?;
    match rule {
        RankRule::CumulativeSigma { threshold } => {
            let ratios = cumulative_ratios(singular_values)?;
            Ok(match ratios.iter().position(|&c| c < threshold) {
                Some(i) => RankSelection { rank: i + 1, satisfied: true },
                None => RankSelection { rank: ratios.len(), satisfied: false },
            })
        }
        RankRule::EnergyTail { epsilon } => {
            let s = cleaned(singular_values)?;
            let mut tails = vec![0.0; s.len() + 1];
            for i in (0..s.len()).rev() {
                tails[i] = tails[i + 1] + s[i] * s[i];
            }
            let total = tails[0];
            // tails[n] = sum_{j > n} sigma_j^2 in 1-based terms
            let rank = (1..=s.len()).find(|&n| tails[n] <= epsilon * total).unwrap_or(s.len());
            Ok(RankSelection { rank, satisfied: true })
        }
    }
}
