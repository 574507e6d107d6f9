//! The sieve quasi-likelihood ratio test.
//!
//! For a tested feature set S, the null estimator minimizes the sample
//! squared-error loss over networks whose incoming weights in every tested
//! coordinate are zero (so the empirical significance functional vanishes
//! exactly), and the alternative estimator minimizes over the full sieve,
//! warm-started from the null fit with the freed weights at zero. The
//! statistic is `LRₙ = n (Qₙ(f̂⁰) - Qₙ(f̂))`, scaled by the null-residual
//! variance estimate `σ̂² = Qₙ(f̂⁰)` and calibrated against χ²₁.

use crate::data::Dataset;
use crate::distributions::{chisq1_sf, PValue};
use crate::error::{Error, Result};
use crate::nn_sieve::{train, SieveNetwork, TrainConfig};
use crate::rng::Rng;

/// Step-size base used for null fits (step `0.1 / ln(e + k)`).
pub const DEFAULT_NULL_STEP: f64 = 0.1;
/// Step-size base used for alternative fits (step `0.1 / (300 ln(e + k))`).
pub const DEFAULT_ALT_STEP: f64 = 0.1 / 300.0;
/// Default output-layer ℓ1 budget.
pub const DEFAULT_V_BUDGET: f64 = 1000.0;
/// Default hidden-layer ℓ1 budget. Large enough to be effectively inactive
/// at the default scales; configurable.
pub const DEFAULT_M_BUDGET: f64 = 1000.0;

/// The tested feature set S (0-based column indices, non-empty, distinct).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HypothesisSpec {
    features: Vec<usize>,
}

impl HypothesisSpec {
    pub fn new(mut features: Vec<usize>, d: usize) -> Result<Self> {
        if features.is_empty() {
            return Err(Error::InvalidConfig("tested feature set is empty".into()));
        }
        features.sort_unstable();
        for w in features.windows(2) {
            if w[0] == w[1] {
                return Err(Error::InvalidConfig(format!(
                    "tested feature {} repeated",
                    w[0]
                )));
            }
        }
        if *features.last().unwrap() >= d {
            return Err(Error::InvalidConfig(format!(
                "tested feature {} out of range for d = {d}",
                features.last().unwrap()
            )));
        }
        Ok(HypothesisSpec { features })
    }

    pub fn single(feature: usize, d: usize) -> Result<Self> {
        Self::new(vec![feature], d)
    }

    pub fn features(&self) -> &[usize] {
        &self.features
    }

    pub fn covers_all(&self, d: usize) -> bool {
        self.features.len() == d
    }
}

/// Shape and budget parameters of the sieve used in a test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SieveShape {
    /// Hidden width rₙ.
    pub width: usize,
    pub v_budget: f64,
    pub m_budget: f64,
}

impl SieveShape {
    /// The experiment defaults: width `⌊√n⌋` (at least 1), `V = M = 1000`.
    pub fn for_sample_size(n: usize) -> Self {
        SieveShape {
            width: ((n as f64).sqrt().floor() as usize).max(1),
            v_budget: DEFAULT_V_BUDGET,
            m_budget: DEFAULT_M_BUDGET,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.width == 0 {
            return Err(Error::InvalidConfig("sieve width must be >= 1".into()));
        }
        let budgets_ok = self.v_budget.is_finite()
            && self.v_budget > 4.0
            && self.m_budget.is_finite()
            && self.m_budget > 0.0;
        if !budgets_ok {
            return Err(Error::InvalidConfig(
                "sieve budgets need V > 4 and M > 0".into(),
            ));
        }
        Ok(())
    }
}

/// Everything a completed test reports.
#[derive(Debug, Clone)]
pub struct TestOutcome {
    /// `max(0, n (loss_null - loss_alt))`.
    pub lr_stat: f64,
    /// Null-residual variance estimate (denominator n).
    pub sigma_hat_sq: f64,
    /// `lr_stat / sigma_hat_sq`, the χ²₁-calibrated statistic.
    pub scaled_stat: f64,
    pub p_value: PValue,
    pub loss_null: f64,
    pub loss_alt: f64,
    /// True when the raw statistic was negative and clamped to zero. Never
    /// fires when warm start and best-iterate tracking are enabled.
    pub clamped: bool,
    pub spec: HypothesisSpec,
    pub n: usize,
}

/// Fit the null estimator: a network of input dimension d whose weights in
/// every tested coordinate are identically zero.
///
/// When S covers all features the null estimator is the constant network at
/// the response mean. Otherwise the network is trained on the reduced
/// (d - |S|)-column data from a seeded random initialization and re-embedded
/// into dimension d with zeros in the tested coordinates.
pub fn fit_null(
    data: &Dataset,
    spec: &HypothesisSpec,
    shape: &SieveShape,
    config: &TrainConfig,
) -> Result<SieveNetwork> {
    shape.validate()?;
    config.validate()?;
    let d = data.d();
    if spec.features().last().copied().unwrap_or(0) >= d {
        return Err(Error::DimensionMismatch(format!(
            "hypothesis tests feature {} but data has d = {d}",
            spec.features().last().unwrap()
        )));
    }

    if spec.covers_all(d) {
        return SieveNetwork::constant(
            d,
            shape.width,
            shape.v_budget,
            shape.m_budget,
            data.mean_y(),
        );
    }

    let kept: Vec<usize> = (0..d).filter(|c| !spec.features().contains(c)).collect();
    let reduced = data.select_columns(&kept)?;
    let mut rng = Rng::seed_from_u64(config.seed);
    let init = SieveNetwork::random(
        kept.len(),
        shape.width,
        shape.v_budget,
        shape.m_budget,
        config.init_scale,
        &mut rng,
    )?;
    let (reduced_net, _) = train(&reduced, config, init)?;

    // Re-embed into the full input dimension with exact zeros in S.
    let r = reduced_net.r();
    let mut gammas = vec![0.0; r * d];
    for j in 0..r {
        let row = reduced_net.gamma_row(j);
        for (k, &c) in kept.iter().enumerate() {
            gammas[j * d + c] = row[k];
        }
    }
    SieveNetwork::new(
        d,
        reduced_net.alpha0(),
        reduced_net.alphas().to_vec(),
        gammas,
        reduced_net.gamma0s().to_vec(),
        shape.v_budget,
        shape.m_budget,
    )
}

/// Fit the alternative estimator over the full sieve, warm-started at the
/// null fit (freed weights begin at zero). With best-iterate tracking the
/// returned loss never exceeds `mse(null_net, data)`.
///
/// A constant null fit (every hidden weight zero, as produced when S covers
/// all features) is a stationary point of the loss: the output-weight
/// gradients vanish because the residuals are centred and the input-weight
/// gradients vanish because the output weights are zero, so a plain warm
/// start could never move. In that case the initial iterate keeps the
/// constant output (`α₀` from the null fit, output weights zero — the
/// warm-start loss still equals the null loss exactly) but draws random
/// hidden input weights from `config.seed`, which makes the output-weight
/// gradients nonzero.
pub fn fit_alt(
    data: &Dataset,
    config: &TrainConfig,
    null_net: &SieveNetwork,
) -> Result<(SieveNetwork, f64)> {
    let hidden_is_zero = null_net.alphas().iter().all(|&a| a == 0.0)
        && null_net.gammas().iter().all(|&g| g == 0.0)
        && null_net.gamma0s().iter().all(|&g| g == 0.0);
    let init = if hidden_is_zero {
        config.validate()?;
        let mut rng = Rng::seed_from_u64(config.seed);
        let template = SieveNetwork::random(
            null_net.d(),
            null_net.r(),
            null_net.v_budget(),
            null_net.m_budget(),
            config.init_scale,
            &mut rng,
        )?;
        SieveNetwork::new(
            null_net.d(),
            null_net.alpha0(),
            vec![0.0; null_net.r()],
            template.gammas().to_vec(),
            template.gamma0s().to_vec(),
            null_net.v_budget(),
            null_net.m_budget(),
        )?
    } else {
        null_net.clone()
    };
    train(data, config, init)
}

/// `LRₙ = max(0, n (loss_null - loss_alt))`; the flag reports whether the
/// clamp fired.
pub fn lr_statistic(loss_null: f64, loss_alt: f64, n: usize) -> (f64, bool) {
    let raw = n as f64 * (loss_null - loss_alt);
    if raw < 0.0 {
        (0.0, true)
    } else {
        (raw, false)
    }
}

/// Null-residual variance estimate `σ̂² = (1/n) Σ (yᵢ - f̂⁰(xᵢ))²`
/// (denominator n, not n - 1). A value of exactly zero is a degenerate
/// perfect fit and is reported as an error.
pub fn sigma_hat_sq(data: &Dataset, null_net: &SieveNetwork) -> Result<f64> {
    let value = null_net.mse(data)?;
    if value == 0.0 {
        return Err(Error::Degenerate(
            "null fit interpolates the data; variance estimate is zero".into(),
        ));
    }
    Ok(value)
}

/// Run the full test: null fit, warm-started alternative fit, statistic,
/// variance estimate, and χ²₁ p-value.
///
/// Rows are brought into a canonical order first, so any row permutation of
/// the input produces a bit-identical outcome (floating-point sums are not
/// otherwise order-invariant).
pub fn sqlr_test(
    data: &Dataset,
    spec: &HypothesisSpec,
    shape: &SieveShape,
    null_config: &TrainConfig,
    alt_config: &TrainConfig,
) -> Result<TestOutcome> {
    alt_config.validate()?;
    let data = data.canonical_row_order();
    let null_net = fit_null(&data, spec, shape, null_config)?;
    let loss_null = sigma_hat_sq(&data, &null_net)?;
    let (_, loss_alt) = fit_alt(&data, alt_config, &null_net)?;
    let (lr_stat, clamped) = lr_statistic(loss_null, loss_alt, data.n());
    let scaled_stat = lr_stat / loss_null;
    let p_value = chisq1_sf(scaled_stat)?;
    Ok(TestOutcome {
        lr_stat,
        sigma_hat_sq: loss_null,
        scaled_stat,
        p_value,
        loss_null,
        loss_alt,
        clamped,
        spec: spec.clone(),
        n: data.n(),
    })
}
