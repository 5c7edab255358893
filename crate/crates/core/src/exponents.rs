//! Exact exponent algebra of the incidence bounds and least-squares
//! exponent fitting for measured counts.

use num_traits::Signed;

use crate::error::{Error, Result};
use crate::rational::{format_rat, Rat};

fn rat_u(n: u64) -> Rat {
    Rat::from_integer(n.into())
}

/// alpha = (beta d + d - 3 beta + 1) / (d - 1), beta > 2, d >= 4.
pub fn predict_alpha(d: u32, beta: &Rat) -> Result<Rat> {
    if d < 4 {
        return Err(Error::domain("d must be at least 4"));
    }
    if beta <= &rat_u(2) {
        return Err(Error::domain("beta must exceed 2"));
    }
    let d_rat = rat_u(d as u64);
    let num = beta * &d_rat + &d_rat - rat_u(3) * beta + rat_u(1);
    Ok(num / (d_rat - rat_u(1)))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExponentRecord {
    pub d: u32,
    pub epsilon: Rat,
    pub delta: Rat,
    pub beta: Option<Rat>,
    pub alpha: Option<Rat>,
    /// Incidence bound I = Omega(m^me n^ne).
    pub m_exponent: Rat,
    pub n_exponent: Rat,
    /// Balanced bound Omega((mn)^mne) at delta = (d+2)/(d+4).
    pub mn_exponent: Rat,
    /// n = Theta(m^noe).
    pub n_of_m_exponent: Rat,
}

impl ExponentRecord {
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        s.push_str(&format!("d={}\n", self.d));
        s.push_str(&format!("epsilon={}\n", format_rat(&self.epsilon)));
        s.push_str(&format!("delta={}\n", format_rat(&self.delta)));
        if let Some(beta) = &self.beta {
            s.push_str(&format!("beta={}\n", format_rat(beta)));
        }
        if let Some(alpha) = &self.alpha {
            s.push_str(&format!("alpha={}\n", format_rat(alpha)));
        }
        s.push_str(&format!("m_exponent={}\n", format_rat(&self.m_exponent)));
        s.push_str(&format!("n_exponent={}\n", format_rat(&self.n_exponent)));
        s.push_str(&format!("mn_exponent={}\n", format_rat(&self.mn_exponent)));
        s.push_str(&format!(
            "n_of_m_exponent={}\n",
            format_rat(&self.n_of_m_exponent)
        ));
        s
    }

    pub fn with_beta(mut self, beta: &Rat) -> Result<ExponentRecord> {
        self.alpha = Some(predict_alpha(self.d, beta)?);
        self.beta = Some(beta.clone());
        Ok(self)
    }
}

/// The incidence exponents at a given delta: I = Omega(m^delta n^((d+2-
/// delta(d+1))/3 - eps)), with the balanced and inverse-function exponents
/// alongside. delta = (2d-2)/(2d-1) specializes the pair to the flagship
/// bound.
pub fn theorem_exponents(d: u32, epsilon: &Rat, delta: &Rat) -> Result<ExponentRecord> {
    if d < 4 {
        return Err(Error::domain("d must be at least 4"));
    }
    if epsilon.is_negative() {
        return Err(Error::domain("epsilon must be nonnegative"));
    }
    let d_rat = rat_u(d as u64);
    let n_exponent =
        (&d_rat + rat_u(2) - delta * (&d_rat + rat_u(1))) / rat_u(3) - epsilon;
    let mn_exponent = rat_u(1) - rat_u(2) / (&d_rat + rat_u(4)) - epsilon;
    let n_of_m_exponent = (rat_u(3) - rat_u(3) * epsilon) / (&d_rat + rat_u(1));
    Ok(ExponentRecord {
        d,
        epsilon: epsilon.clone(),
        delta: delta.clone(),
        beta: None,
        alpha: None,
        m_exponent: delta.clone(),
        n_exponent,
        mn_exponent,
        n_of_m_exponent,
    })
}

/// delta = (2d-2)/(2d-1), the specialization giving the flagship pair.
pub fn flagship_delta(d: u32) -> Rat {
    let d_rat = rat_u(d as u64);
    (rat_u(2) * &d_rat - rat_u(2)) / (rat_u(2) * &d_rat - rat_u(1))
}

/// The displayed chain ((d+1)/(d-1))((beta-1)/beta) + alpha/beta -
/// (d-4)/(d-1), which simplifies to (d+2)/(d-1).
pub fn section52_chain(d: u32, beta: &Rat) -> Result<Rat> {
    let alpha = predict_alpha(d, beta)?;
    let d_rat = rat_u(d as u64);
    let dm1 = &d_rat - rat_u(1);
    let term1 = (&d_rat + rat_u(1)) / &dm1 * (beta - rat_u(1)) / beta;
    let term2 = &alpha / beta;
    let term3 = (&d_rat - rat_u(4)) / &dm1;
    Ok(term1 + term2 - term3)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitResult {
    pub slope: f64,
    pub intercept: f64,
    /// Sum of squared residuals in log-log space.
    pub residual: f64,
}

/// Least-squares line through (log x, log y).
pub fn fit_exponent(samples: &[(f64, f64)]) -> Result<FitResult> {
    if samples.len() < 2 {
        return Err(Error::domain("need at least 2 samples"));
    }
    for &(x, y) in samples {
        if x <= 0.0 || y <= 0.0 || !x.is_finite() || !y.is_finite() {
            return Err(Error::domain("samples must be positive and finite"));
        }
    }
    let logs: Vec<(f64, f64)> = samples.iter().map(|&(x, y)| (x.ln(), y.ln())).collect();
    let n = logs.len() as f64;
    let mean_x = logs.iter().map(|l| l.0).sum::<f64>() / n;
    let mean_y = logs.iter().map(|l| l.1).sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for &(x, y) in &logs {
        sxx += (x - mean_x) * (x - mean_x);
        sxy += (x - mean_x) * (y - mean_y);
    }
    if sxx == 0.0 {
        return Err(Error::domain("all x values coincide; slope undefined"));
    }
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let residual = logs
        .iter()
        .map(|&(x, y)| {
            let r = y - (slope * x + intercept);
            r * r
        })
        .sum();
    Ok(FitResult {
        slope,
        intercept,
        residual,
    })
}
