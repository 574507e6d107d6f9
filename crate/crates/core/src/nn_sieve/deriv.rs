//! Exact derivatives of the sigmoid and of sieve networks.
//!
//! The m-th sigmoid derivative has the closed form
//! `σ^(m)(z) = Σ_{a=1..m} (-1)^(a-1) C_a^(m) σ^a(z) (1-σ(z))^(m+1-a)` with
//! integer coefficients defined by `C_1^(1) = 1` and
//! `C_a^(m) = a C_a^(m-1) + (m+1-a) C_{a-1}^(m-1)` (zero outside
//! `1 ≤ a ≤ m`). The row sums satisfy `Σ_a C_a^(m) = m!`, which gives the
//! uniform bound `sup_x |D^β f(x)| ≤ V M^|β| |β|!` over the sieve.

use super::SieveNetwork;
use crate::data::Dataset;
use crate::error::{Error, Result};

/// Logistic sigmoid `σ(z) = 1 / (1 + e^{-z})`.
#[inline]
pub fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

/// First derivative `σ'(z) = σ(z)(1 - σ(z))` given `s = σ(z)`.
#[inline]
pub(crate) fn sigmoid_prime_from(s: f64) -> f64 {
    s * (1.0 - s)
}

/// The coefficient row `C_1^(m) .. C_m^(m)` as exact integers.
///
/// `m = 0` is rejected (the recurrence has no row there) and values that do
/// not fit in `u64` raise a degeneracy error instead of wrapping.
pub fn sigmoid_deriv_coeffs(m: usize) -> Result<Vec<u64>> {
    if m == 0 {
        return Err(Error::InvalidConfig(
            "sigmoid derivative coefficients start at m = 1".into(),
        ));
    }
    let overflow = || Error::Degenerate(format!("coefficient row overflows u64 at m = {m}"));
    let mut row: Vec<u64> = vec![1];
    for mm in 2..=m {
        let mut next = vec![0u64; mm];
        for (idx, slot) in next.iter_mut().enumerate() {
            let a = idx + 1;
            let keep = if a <= row.len() { row[a - 1] } else { 0 };
            let carry = if a >= 2 { row[a - 2] } else { 0 };
            let t1 = (a as u64).checked_mul(keep).ok_or_else(overflow)?;
            let t2 = ((mm + 1 - a) as u64)
                .checked_mul(carry)
                .ok_or_else(overflow)?;
            *slot = t1.checked_add(t2).ok_or_else(overflow)?;
        }
        row = next;
    }
    Ok(row)
}

/// Same recurrence carried in `f64` (exact while every entry is below 2^53,
/// i.e. for all `m ≤ 18`; larger rows round but never overflow).
fn coeff_row_f64(m: usize) -> Vec<f64> {
    let mut row = vec![1.0];
    for mm in 2..=m {
        let mut next = vec![0.0; mm];
        for (idx, slot) in next.iter_mut().enumerate() {
            let a = idx + 1;
            let keep = if a <= row.len() { row[a - 1] } else { 0.0 };
            let carry = if a >= 2 { row[a - 2] } else { 0.0 };
            *slot = a as f64 * keep + (mm + 1 - a) as f64 * carry;
        }
        row = next;
    }
    row
}

/// `σ^(m)(z)`; `m = 0` returns `σ(z)` itself.
pub fn sigmoid_mth_deriv(z: f64, m: usize) -> f64 {
    let s = sigmoid(z);
    if m == 0 {
        return s;
    }
    let row = coeff_row_f64(m);
    let one_minus = 1.0 - s;
    let mut acc = 0.0;
    for (idx, &c) in row.iter().enumerate() {
        let a = idx + 1;
        let sign = if a % 2 == 1 { 1.0 } else { -1.0 };
        acc += sign * c * s.powi(a as i32) * one_minus.powi((m + 1 - a) as i32);
    }
    acc
}

impl SieveNetwork {
    /// Exact mixed partial derivative `D^β f(x)` for a multi-index `β`
    /// (one entry per input coordinate, `|β| ≥ 1`):
    /// `D^β f(x) = Σ_j α_j γ_j^β σ^(|β|)(γ_jᵀx + γ_{0,j})`.
    pub fn partial_derivative(&self, x: &[f64], beta: &[usize]) -> Result<f64> {
        if x.len() != self.d() || beta.len() != self.d() {
            return Err(Error::DimensionMismatch(format!(
                "x ({}) and beta ({}) must both have length d = {}",
                x.len(),
                beta.len(),
                self.d()
            )));
        }
        let order: usize = beta.iter().sum();
        if order == 0 {
            return Err(Error::InvalidConfig(
                "partial derivative needs |beta| >= 1; use forward for |beta| = 0".into(),
            ));
        }
        let mut acc = 0.0;
        for j in 0..self.r() {
            let row = self.gamma_row(j);
            let mut mono = 1.0;
            for (g, &b) in row.iter().zip(beta) {
                if b > 0 {
                    mono *= g.powi(b as i32);
                }
            }
            if mono == 0.0 {
                continue;
            }
            let z = row.iter().zip(x).map(|(g, v)| g * v).sum::<f64>() + self.gamma0s[j];
            acc += self.alphas[j] * mono * sigmoid_mth_deriv(z, order);
        }
        Ok(acc)
    }

    /// Uniform bound `V · M^m · m!` on any order-`m` partial derivative over
    /// the whole sieve. Overflow is an error rather than infinity.
    pub fn sup_derivative_bound(&self, m: usize) -> Result<f64> {
        let mut factorial = 1.0_f64;
        for k in 2..=m {
            factorial *= k as f64;
        }
        let bound = self.v_budget() * self.m_budget().powi(m as i32) * factorial;
        if !bound.is_finite() {
            return Err(Error::Degenerate(format!(
                "derivative bound overflows f64 at m = {m}"
            )));
        }
        Ok(bound)
    }

    /// Empirical significance functional
    /// `φ̂ = (1/n) Σ_i Σ_{s ∈ S} (D^{e_s} f(X_i))²` over the tested feature
    /// set `S` (0-based column indices). Zero exactly when the network does
    /// not depend on any tested feature.
    pub fn phi_hat(&self, data: &Dataset, features: &[usize]) -> Result<f64> {
        self.check_data_dim(data)?;
        if features.is_empty() {
            return Err(Error::InvalidConfig("tested feature set is empty".into()));
        }
        for &s in features {
            if s >= self.d() {
                return Err(Error::DimensionMismatch(format!(
                    "tested feature {s} out of range for d = {}",
                    self.d()
                )));
            }
        }
        let d = self.d();
        let mut unit_weight = vec![0.0; self.r()];
        let mut acc = 0.0;
        for i in 0..data.n() {
            let x = data.row(i);
            let units = unit_weight
                .iter_mut()
                .zip(self.gammas.chunks_exact(d))
                .zip(self.alphas.iter().zip(&self.gamma0s));
            for ((w, row), (&a, &g0)) in units {
                let z = row.iter().zip(x).map(|(g, v)| g * v).sum::<f64>() + g0;
                *w = a * sigmoid_prime_from(sigmoid(z));
            }
            for &s in features {
                let deriv: f64 = unit_weight
                    .iter()
                    .zip(self.gammas.chunks_exact(d))
                    .map(|(w, row)| w * row[s])
                    .sum();
                acc += deriv * deriv;
            }
        }
        Ok(acc / data.n() as f64)
    }
}
