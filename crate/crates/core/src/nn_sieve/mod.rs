//! The constrained network sieve.
//!
//! Members are one-hidden-layer sigmoid networks
//! `f(x) = α₀ + Σ_j α_j σ(γ_jᵀx + γ_{0,j})` subject to two ℓ1 budgets: the
//! output layer including the bias satisfies `|α₀| + Σ|α_j| ≤ V`, and every
//! hidden unit including its bias satisfies `|γ_{0,j}| + Σ_i |γ_{i,j}| ≤ M`.
//! This module provides evaluation, the exact loss gradient, exact partial
//! derivatives of any order, Euclidean projection onto the budget set, and
//! projected-subgradient training.

mod deriv;
mod project;
mod train;

pub use deriv::{sigmoid, sigmoid_deriv_coeffs, sigmoid_mth_deriv};
pub use project::project_l1;
pub use train::{train, TrainConfig};

use crate::data::Dataset;
use crate::error::{Error, Result};

/// Slack allowed when checking the ℓ1 budgets, absorbing projection rounding.
pub(crate) fn budget_slack(radius: f64) -> f64 {
    1e-9_f64.max(radius * 1e-12)
}

/// A one-hidden-layer sigmoid network with ℓ1 budget parameters.
///
/// Weights are validated at construction (finite, budgets satisfied,
/// `V > 4`, `M > 0`) and the value is immutable from outside the crate, so a
/// `SieveNetwork` always represents a member of the sieve space.
#[derive(Debug, Clone, PartialEq)]
pub struct SieveNetwork {
    pub(crate) alpha0: f64,
    /// Hidden-to-output weights, length `r`.
    pub(crate) alphas: Vec<f64>,
    /// Input-to-hidden weights, `r × d` row-major (one row per unit).
    pub(crate) gammas: Vec<f64>,
    /// Hidden biases, length `r`.
    pub(crate) gamma0s: Vec<f64>,
    v_budget: f64,
    m_budget: f64,
    d: usize,
}

impl SieveNetwork {
    pub fn new(
        d: usize,
        alpha0: f64,
        alphas: Vec<f64>,
        gammas: Vec<f64>,
        gamma0s: Vec<f64>,
        v_budget: f64,
        m_budget: f64,
    ) -> Result<Self> {
        let net = Self::unchecked(d, alpha0, alphas, gammas, gamma0s, v_budget, m_budget)?;
        net.check_finite()?;
        if !net.is_feasible() {
            return Err(Error::InvalidConfig(format!(
                "weights violate the l1 budgets (output l1 {} vs V {}, max unit l1 {} vs M {})",
                net.output_l1(),
                v_budget,
                (0..net.r()).map(|j| net.unit_l1(j)).fold(0.0_f64, f64::max),
                m_budget
            )));
        }
        Ok(net)
    }

    /// Shape/parameter validation only; callers must establish finiteness and
    /// feasibility themselves (used before projecting a raw draw).
    fn unchecked(
        d: usize,
        alpha0: f64,
        alphas: Vec<f64>,
        gammas: Vec<f64>,
        gamma0s: Vec<f64>,
        v_budget: f64,
        m_budget: f64,
    ) -> Result<Self> {
        let r = alphas.len();
        if r == 0 || d == 0 {
            return Err(Error::InvalidConfig(
                "network needs r >= 1 and d >= 1".into(),
            ));
        }
        if !v_budget.is_finite() || v_budget <= 4.0 {
            return Err(Error::InvalidConfig(format!(
                "output budget V must be finite and > 4, got {v_budget}"
            )));
        }
        if !m_budget.is_finite() || m_budget <= 0.0 {
            return Err(Error::InvalidConfig(format!(
                "hidden budget M must be finite and > 0, got {m_budget}"
            )));
        }
        if gammas.len() != r * d || gamma0s.len() != r {
            return Err(Error::DimensionMismatch(format!(
                "weight shapes: gammas {} (want {}), gamma0s {} (want {})",
                gammas.len(),
                r * d,
                gamma0s.len(),
                r
            )));
        }
        Ok(SieveNetwork {
            alpha0,
            alphas,
            gammas,
            gamma0s,
            v_budget,
            m_budget,
            d,
        })
    }

    /// The all-zero network of the given shape.
    pub fn zeros(d: usize, r: usize, v_budget: f64, m_budget: f64) -> Result<Self> {
        Self::new(
            d,
            0.0,
            vec![0.0; r],
            vec![0.0; r * d],
            vec![0.0; r],
            v_budget,
            m_budget,
        )
    }

    /// Constant network `f ≡ value` (clamped into the output budget).
    pub fn constant(d: usize, r: usize, v_budget: f64, m_budget: f64, value: f64) -> Result<Self> {
        let mut net = Self::zeros(d, r, v_budget, m_budget)?;
        net.alpha0 = value.clamp(-v_budget, v_budget);
        Ok(net)
    }

    /// Random initialization: every weight i.i.d. uniform on
    /// `[-init_scale, init_scale)` drawn from `rng` in the order
    /// `α₀, α₁..α_r, (γ_{0,j}, γ_{1,j}..γ_{d,j}) for j = 1..r`,
    /// then projected onto the budget set.
    pub fn random(
        d: usize,
        r: usize,
        v_budget: f64,
        m_budget: f64,
        init_scale: f64,
        rng: &mut crate::rng::Rng,
    ) -> Result<Self> {
        if !init_scale.is_finite() || init_scale < 0.0 {
            return Err(Error::InvalidConfig(format!(
                "init_scale must be finite and >= 0, got {init_scale}"
            )));
        }
        let alpha0 = rng.uniform_sym(init_scale);
        let alphas: Vec<f64> = (0..r).map(|_| rng.uniform_sym(init_scale)).collect();
        let mut gammas = vec![0.0; r * d];
        let mut gamma0s = vec![0.0; r];
        for j in 0..r {
            gamma0s[j] = rng.uniform_sym(init_scale);
            for v in &mut gammas[j * d..(j + 1) * d] {
                *v = rng.uniform_sym(init_scale);
            }
        }
        let mut net = Self::unchecked(d, alpha0, alphas, gammas, gamma0s, v_budget, m_budget)?;
        let mut block = Vec::new();
        let mut scratch = Vec::new();
        project::project_net_in_place(&mut net, &mut block, &mut scratch);
        Ok(net)
    }

    #[inline]
    pub fn r(&self) -> usize {
        self.alphas.len()
    }

    #[inline]
    pub fn d(&self) -> usize {
        self.d
    }

    #[inline]
    pub fn alpha0(&self) -> f64 {
        self.alpha0
    }

    #[inline]
    pub fn alphas(&self) -> &[f64] {
        &self.alphas
    }

    /// Row-major `r × d` input-to-hidden weights.
    #[inline]
    pub fn gammas(&self) -> &[f64] {
        &self.gammas
    }

    #[inline]
    pub fn gamma0s(&self) -> &[f64] {
        &self.gamma0s
    }

    #[inline]
    pub fn gamma_row(&self, j: usize) -> &[f64] {
        &self.gammas[j * self.d..(j + 1) * self.d]
    }

    #[inline]
    pub fn v_budget(&self) -> f64 {
        self.v_budget
    }

    #[inline]
    pub fn m_budget(&self) -> f64 {
        self.m_budget
    }

    /// `|α₀| + Σ_j |α_j|`.
    pub fn output_l1(&self) -> f64 {
        self.alpha0.abs() + self.alphas.iter().map(|a| a.abs()).sum::<f64>()
    }

    /// `|γ_{0,j}| + Σ_i |γ_{i,j}|` for unit `j`.
    pub fn unit_l1(&self, j: usize) -> f64 {
        self.gamma0s[j].abs() + self.gamma_row(j).iter().map(|g| g.abs()).sum::<f64>()
    }

    /// Both ℓ1 budgets hold (up to projection rounding slack).
    pub fn is_feasible(&self) -> bool {
        if self.output_l1() > self.v_budget + budget_slack(self.v_budget) {
            return false;
        }
        let m_slack = budget_slack(self.m_budget);
        (0..self.r()).all(|j| self.unit_l1(j) <= self.m_budget + m_slack)
    }

    pub(crate) fn check_finite(&self) -> Result<()> {
        let ok = self.alpha0.is_finite()
            && self.alphas.iter().all(|v| v.is_finite())
            && self.gammas.iter().all(|v| v.is_finite())
            && self.gamma0s.iter().all(|v| v.is_finite());
        if ok {
            Ok(())
        } else {
            Err(Error::NonFinite("network weight".into()))
        }
    }

    fn check_input_dim(&self, len: usize) -> Result<()> {
        if len != self.d {
            return Err(Error::DimensionMismatch(format!(
                "input has length {len}, network expects d = {}",
                self.d
            )));
        }
        Ok(())
    }

    fn check_data_dim(&self, data: &Dataset) -> Result<()> {
        self.check_input_dim(data.d())
    }

    /// Evaluate the network, storing each unit's activation in `sig`.
    ///
    /// This is the single evaluation kernel: `mse`, the training loop, and
    /// `forward` all run exactly this operation sequence, so losses computed
    /// on different paths are bit-identical.
    #[inline]
    pub(crate) fn forward_units(&self, x: &[f64], sig: &mut [f64]) -> f64 {
        let mut f = self.alpha0;
        let units = self
            .gammas
            .chunks_exact(self.d)
            .zip(&self.alphas)
            .zip(&self.gamma0s)
            .zip(sig.iter_mut());
        for (((row, &a), &g0), s_out) in units {
            let z = dot(row, x) + g0;
            let s = sigmoid(z);
            *s_out = s;
            f += a * s;
        }
        f
    }

    /// `f(x)`. The output is bounded: `|f(x)| ≤ V` for every feasible net.
    pub fn forward(&self, x: &[f64]) -> Result<f64> {
        self.check_input_dim(x.len())?;
        let mut sig = vec![0.0; self.r()];
        Ok(self.forward_units(x, &mut sig))
    }

    /// Sample squared-error loss `(1/n) Σ_i (y_i - f(x_i))²`.
    pub fn mse(&self, data: &Dataset) -> Result<f64> {
        self.check_data_dim(data)?;
        let mut sig = vec![0.0; self.r()];
        let mut sse = 0.0;
        for i in 0..data.n() {
            let f = self.forward_units(data.row(i), &mut sig);
            let e = data.y()[i] - f;
            sse += e * e;
        }
        Ok(sse / data.n() as f64)
    }

    /// Exact gradient of [`Self::mse`] with respect to every weight.
    pub fn grad_mse(&self, data: &Dataset) -> Result<Gradient> {
        self.check_data_dim(data)?;
        let mut grad = Gradient::zeros_like(self);
        let mut sig = vec![0.0; self.r()];
        loss_and_grad(self, data, &mut grad, &mut sig);
        Ok(grad)
    }

    /// Euclidean projection onto the budget set: the output block
    /// `(α₀, α₁..α_r)` onto the ℓ1 ball of radius `V`, each unit block
    /// `(γ_{0,j}, γ_{1,j}..γ_{d,j})` onto radius `M`. Idempotent.
    pub fn project_constraints(&self) -> SieveNetwork {
        let mut net = self.clone();
        let mut block = Vec::new();
        let mut scratch = Vec::new();
        project::project_net_in_place(&mut net, &mut block, &mut scratch);
        net
    }

    pub(crate) fn apply_step(&mut self, grad: &Gradient, step: f64) {
        self.alpha0 -= step * grad.d_alpha0;
        for (w, g) in self.alphas.iter_mut().zip(&grad.d_alphas) {
            *w -= step * g;
        }
        for (w, g) in self.gamma0s.iter_mut().zip(&grad.d_gamma0s) {
            *w -= step * g;
        }
        for (w, g) in self.gammas.iter_mut().zip(&grad.d_gammas) {
            *w -= step * g;
        }
    }
}

/// Gradient of the loss; same shapes as the network's weight fields.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradient {
    pub d_alpha0: f64,
    pub d_alphas: Vec<f64>,
    pub d_gammas: Vec<f64>,
    pub d_gamma0s: Vec<f64>,
}

impl Gradient {
    pub fn zeros_like(net: &SieveNetwork) -> Self {
        Gradient {
            d_alpha0: 0.0,
            d_alphas: vec![0.0; net.r()],
            d_gammas: vec![0.0; net.r() * net.d()],
            d_gamma0s: vec![0.0; net.r()],
        }
    }

    fn set_zero(&mut self) {
        self.d_alpha0 = 0.0;
        self.d_alphas.iter_mut().for_each(|v| *v = 0.0);
        self.d_gammas.iter_mut().for_each(|v| *v = 0.0);
        self.d_gamma0s.iter_mut().for_each(|v| *v = 0.0);
    }

    fn scale(&mut self, c: f64) {
        self.d_alpha0 *= c;
        self.d_alphas.iter_mut().for_each(|v| *v *= c);
        self.d_gammas.iter_mut().for_each(|v| *v *= c);
        self.d_gamma0s.iter_mut().for_each(|v| *v *= c);
    }
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Fused loss + gradient pass used by the training loop. Returns the loss of
/// `net` (bit-identical to `net.mse(data)`) and fills `grad`.
pub(crate) fn loss_and_grad(
    net: &SieveNetwork,
    data: &Dataset,
    grad: &mut Gradient,
    sig: &mut [f64],
) -> f64 {
    grad.set_zero();
    let d = net.d();
    let mut sse = 0.0;
    for i in 0..data.n() {
        let x = data.row(i);
        let f = net.forward_units(x, sig);
        let e = data.y()[i] - f;
        sse += e * e;
        grad.d_alpha0 += e;
        let units = sig
            .iter()
            .zip(&net.alphas)
            .zip(grad.d_alphas.iter_mut())
            .zip(grad.d_gamma0s.iter_mut())
            .zip(grad.d_gammas.chunks_exact_mut(d));
        for ((((&s, &a), g_alpha), g_gamma0), g_row) in units {
            *g_alpha += e * s;
            let t = e * a * s * (1.0 - s);
            *g_gamma0 += t;
            for (g, &xv) in g_row.iter_mut().zip(x) {
                *g += t * xv;
            }
        }
    }
    grad.scale(-2.0 / data.n() as f64);
    sse / data.n() as f64
}
