//! Data pipeline: CSV ingestion, feature scaling, covariate
//! residualization, and the per-feature association scan.

use rayon::prelude::*;
use std::path::Path;

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::ftest::{f_test_feature, ols_residuals};
use crate::nn_sieve::TrainConfig;
use crate::sqlr::{sqlr_test, HypothesisSpec, SieveShape, DEFAULT_ALT_STEP, DEFAULT_NULL_STEP};

/// Parsed CSV contents: the regression dataset plus any covariate columns
/// kept aside for residualization.
#[derive(Debug, Clone)]
pub struct LoadedData {
    pub dataset: Dataset,
    /// Row-major `n × c` covariate matrix (empty when no covariates).
    pub covariates: Vec<f64>,
    pub covariate_names: Vec<String>,
    /// Rows dropped because a selected cell was empty.
    pub dropped_rows: usize,
}

/// Load an RFC-4180 CSV with a header row.
///
/// `features` empty means "all columns except the response and covariates,
/// in header order". Rows with an empty cell in any selected column are
/// dropped (counted in `dropped_rows`); any other non-numeric cell is an
/// error naming the row and column.
pub fn load_csv(
    path: &Path,
    response: &str,
    features: &[String],
    covariates: &[String],
) -> Result<LoadedData> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)?;
    let headers: Vec<String> = reader.headers()?.iter().map(|h| h.to_string()).collect();

    let find = |name: &str| -> Result<usize> {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::MissingColumn(name.to_string()))
    };

    let response_idx = find(response)?;
    let covariate_idx: Vec<usize> = covariates.iter().map(|c| find(c)).collect::<Result<_>>()?;
    let feature_idx: Vec<usize> = if features.is_empty() {
        (0..headers.len())
            .filter(|i| *i != response_idx && !covariate_idx.contains(i))
            .collect()
    } else {
        features.iter().map(|f| find(f)).collect::<Result<_>>()?
    };
    if feature_idx.is_empty() {
        return Err(Error::InvalidConfig(
            "no feature columns left after excluding response and covariates".into(),
        ));
    }

    let mut x = Vec::new();
    let mut cov = Vec::new();
    let mut y = Vec::new();
    let mut dropped = 0usize;
    for (row_number, record) in reader.records().enumerate() {
        let record = record?;
        let selected: Vec<usize> = std::iter::once(response_idx)
            .chain(feature_idx.iter().copied())
            .chain(covariate_idx.iter().copied())
            .collect();
        if selected
            .iter()
            .any(|&c| record.get(c).map(|v| v.trim().is_empty()).unwrap_or(true))
        {
            dropped += 1;
            continue;
        }
        let parse = |c: usize| -> Result<f64> {
            let raw = record.get(c).unwrap().trim();
            raw.parse::<f64>().map_err(|e| Error::BadCell {
                row: row_number + 1,
                column: headers[c].clone(),
                message: format!("{raw:?}: {e}"),
            })
        };
        y.push(parse(response_idx)?);
        for &c in &feature_idx {
            x.push(parse(c)?);
        }
        for &c in &covariate_idx {
            cov.push(parse(c)?);
        }
    }
    if y.is_empty() {
        return Err(Error::EmptyDataset);
    }

    let dataset = Dataset::new(x, y, feature_idx.len())?
        .with_names(feature_idx.iter().map(|&c| headers[c].clone()).collect())?;
    Ok(LoadedData {
        dataset,
        covariates: cov,
        covariate_names: covariates.to_vec(),
        dropped_rows: dropped,
    })
}

/// Scaling record for one column.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ColumnScale {
    pub min: f64,
    pub max: f64,
    /// Constant columns cannot be scaled; they map to zero and are flagged.
    pub constant: bool,
}

/// Affine min-max map of every column onto `[-1, 1]`, in place. Idempotent on
/// already-scaled data up to rounding; returns the per-column `(min, max)`
/// needed to invert the map.
pub fn scale_columns(x: &mut [f64], n: usize, d: usize) -> Vec<ColumnScale> {
    debug_assert_eq!(x.len(), n * d);
    let mut scales = Vec::with_capacity(d);
    for c in 0..d {
        let mut min = f64::INFINITY;
        let mut max = f64::NEG_INFINITY;
        for i in 0..n {
            let v = x[i * d + c];
            min = min.min(v);
            max = max.max(v);
        }
        let constant = min == max;
        for i in 0..n {
            let v = &mut x[i * d + c];
            *v = if constant {
                0.0
            } else {
                2.0 * (*v - min) / (max - min) - 1.0
            };
        }
        scales.push(ColumnScale { min, max, constant });
    }
    scales
}

/// Scaled copy of a dataset (names preserved).
pub fn scale_dataset(data: &Dataset) -> Result<(Dataset, Vec<ColumnScale>)> {
    let mut x = data.x().to_vec();
    let scales = scale_columns(&mut x, data.n(), data.d());
    let mut out = Dataset::new(x, data.y().to_vec(), data.d())?;
    if let Some(names) = data.feature_names() {
        out = out.with_names(names.to_vec())?;
    }
    Ok((out, scales))
}

/// Residuals of the OLS regression of `y` on an intercept plus the covariate
/// columns (row-major `n × c`). With no covariates this is `y - mean(y)`.
/// The residual mean is zero up to rounding.
pub fn adjust_covariates(y: &[f64], covariates: &[f64], n: usize, c: usize) -> Result<Vec<f64>> {
    if y.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "response has {} entries, expected {n}",
            y.len()
        )));
    }
    if c == 0 {
        let mean = y.iter().sum::<f64>() / n as f64;
        return Ok(y.iter().map(|v| v - mean).collect());
    }
    let (_, residuals) = ols_residuals(covariates, n, c, y)?;
    Ok(residuals)
}

/// Write a dataset with a replacement response column (residuals from
/// [`adjust_covariates`]) as CSV: response first, then the feature columns.
/// Numbers use the shortest round-trip rendering.
pub fn write_adjusted_csv(
    path: &Path,
    response_name: &str,
    residuals: &[f64],
    data: &Dataset,
) -> Result<()> {
    if residuals.len() != data.n() {
        return Err(Error::DimensionMismatch(format!(
            "{} residuals for n = {}",
            residuals.len(),
            data.n()
        )));
    }
    let mut writer = csv::Writer::from_path(path)?;
    let mut header = vec![response_name.to_string()];
    match data.feature_names() {
        Some(names) => header.extend(names.iter().cloned()),
        None => header.extend((0..data.d()).map(|j| format!("X{}", j + 1))),
    }
    writer.write_record(&header)?;
    for (i, res) in residuals.iter().enumerate() {
        let mut record = vec![res.to_string()];
        record.extend(data.row(i).iter().map(|v| v.to_string()));
        writer.write_record(&record)?;
    }
    writer.flush()?;
    Ok(())
}

/// Configuration of an association scan.
#[derive(Debug, Clone, PartialEq)]
pub struct ScanConfig {
    pub seed: u64,
    pub level: f64,
    /// Hidden width; `None` means `⌊√n⌋`.
    pub width: Option<usize>,
    pub v_budget: f64,
    pub m_budget: f64,
    pub null_iterations: usize,
    pub alt_iterations: usize,
    pub null_step: f64,
    pub alt_step: f64,
    pub init_scale: f64,
    /// Test features in parallel (results are identical either way).
    pub parallel: bool,
}

impl Default for ScanConfig {
    fn default() -> Self {
        ScanConfig {
            seed: 0,
            level: 0.05,
            width: None,
            v_budget: crate::sqlr::DEFAULT_V_BUDGET,
            m_budget: crate::sqlr::DEFAULT_M_BUDGET,
            null_iterations: 3000,
            alt_iterations: 3000,
            null_step: DEFAULT_NULL_STEP,
            alt_step: DEFAULT_ALT_STEP,
            init_scale: 0.5,
            parallel: true,
        }
    }
}

impl ScanConfig {
    pub fn shape_for(&self, n: usize) -> SieveShape {
        SieveShape {
            width: self
                .width
                .unwrap_or_else(|| ((n as f64).sqrt().floor() as usize).max(1)),
            v_budget: self.v_budget,
            m_budget: self.m_budget,
        }
    }

    pub fn null_config(&self) -> TrainConfig {
        TrainConfig {
            iterations: self.null_iterations,
            step_base: self.null_step,
            seed: self.seed,
            init_scale: self.init_scale,
            track_best: true,
        }
    }

    pub fn alt_config(&self) -> TrainConfig {
        TrainConfig {
            iterations: self.alt_iterations,
            step_base: self.alt_step,
            seed: self.seed,
            init_scale: self.init_scale,
            track_best: true,
        }
    }
}

/// One scanned feature.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureResult {
    pub feature_index: usize,
    pub feature: String,
    pub lr_stat: f64,
    pub sigma_hat_sq: f64,
    pub scaled_stat: f64,
    pub p_sqlr: f64,
    /// `None` when the baseline is undefined (joint tests).
    pub p_ftest: Option<f64>,
    pub f_degenerate: bool,
    pub clamped: bool,
}

/// Scan output, sorted by SQLR p-value ascending with ties broken by feature
/// index.
#[derive(Debug, Clone, PartialEq)]
pub struct ScanResult {
    pub results: Vec<FeatureResult>,
    pub n: usize,
    pub d: usize,
}

/// Test every feature one at a time (`S = {j}`), pairing the SQLR p-value
/// with the partial F-test baseline.
///
/// Every feature's test uses the same base seed, so two identical columns
/// receive identical statistics; feature-level parallelism cannot change any
/// reported number. A rank-deficient linear design (e.g. collinear columns)
/// leaves the baseline undefined for that feature, reported as a missing
/// `p_ftest` rather than failing the whole scan.
pub fn scan(data: &Dataset, config: &ScanConfig) -> Result<ScanResult> {
    let d = data.d();
    let run_feature = |j: usize| -> Result<FeatureResult> {
        let spec = HypothesisSpec::single(j, d)?;
        let out = sqlr_test(
            data,
            &spec,
            &config.shape_for(data.n()),
            &config.null_config(),
            &config.alt_config(),
        )?;
        let (p_ftest, f_degenerate) = match f_test_feature(data, j) {
            Ok(baseline) => (Some(baseline.p_value.value()), baseline.degenerate),
            Err(Error::RankDeficient) => (None, false),
            Err(e) => return Err(e),
        };
        Ok(FeatureResult {
            feature_index: j,
            feature: data.feature_label(j),
            lr_stat: out.lr_stat,
            sigma_hat_sq: out.sigma_hat_sq,
            scaled_stat: out.scaled_stat,
            p_sqlr: out.p_value.value(),
            p_ftest,
            f_degenerate,
            clamped: out.clamped,
        })
    };

    let mut results: Vec<FeatureResult> = if config.parallel {
        (0..d)
            .into_par_iter()
            .map(run_feature)
            .collect::<Result<_>>()?
    } else {
        (0..d).map(run_feature).collect::<Result<_>>()?
    };
    results.sort_by(|a, b| {
        a.p_sqlr
            .total_cmp(&b.p_sqlr)
            .then(a.feature_index.cmp(&b.feature_index))
    });
    Ok(ScanResult {
        results,
        n: data.n(),
        d,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write_csv(content: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(content.as_bytes()).unwrap();
        f.flush().unwrap();
        f
    }

    #[test]
    fn loads_numeric_csv() {
        let f = write_csv("y,a,b\n1,2,3\n4,5,6\n7,8,9\n");
        let loaded = load_csv(f.path(), "y", &[], &[]).unwrap();
        assert_eq!(loaded.dataset.n(), 3);
        assert_eq!(loaded.dataset.d(), 2);
        assert_eq!(loaded.dataset.row(1), &[5.0, 6.0]);
        assert_eq!(loaded.dataset.y(), &[1.0, 4.0, 7.0]);
        assert_eq!(loaded.dropped_rows, 0);
        assert_eq!(loaded.dataset.feature_names().unwrap(), &["a", "b"]);
    }

    #[test]
    fn drops_rows_with_missing_cells() {
        let f = write_csv("y,a\n1,2\n3,\n5,6\n");
        let loaded = load_csv(f.path(), "y", &[], &[]).unwrap();
        assert_eq!(loaded.dataset.n(), 2);
        assert_eq!(loaded.dropped_rows, 1);
    }

    #[test]
    fn missing_column_is_named() {
        let f = write_csv("y,a\n1,2\n");
        match load_csv(f.path(), "y", &["typo".into()], &[]) {
            Err(Error::MissingColumn(name)) => assert_eq!(name, "typo"),
            other => panic!("expected MissingColumn, got {other:?}"),
        }
    }

    #[test]
    fn bad_cell_reports_row_and_column() {
        let f = write_csv("y,a\n1,2\n3,oops\n");
        match load_csv(f.path(), "y", &[], &[]) {
            Err(Error::BadCell { row, column, .. }) => {
                assert_eq!(row, 2);
                assert_eq!(column, "a");
            }
            other => panic!("expected BadCell, got {other:?}"),
        }
    }

    #[test]
    fn covariates_are_split_out() {
        let f = write_csv("y,a,age\n1,2,30\n4,5,40\n");
        let loaded = load_csv(f.path(), "y", &[], &["age".into()]).unwrap();
        assert_eq!(loaded.dataset.d(), 1);
        assert_eq!(loaded.covariates, vec![30.0, 40.0]);
    }

    #[test]
    fn scaling_maps_to_unit_interval() {
        let mut x = vec![0.0, 5.0, 10.0];
        let scales = scale_columns(&mut x, 3, 1);
        assert_eq!(x, vec![-1.0, 0.0, 1.0]);
        assert_eq!(scales[0].min, 0.0);
        assert_eq!(scales[0].max, 10.0);
        assert!(!scales[0].constant);
    }

    #[test]
    fn scaling_is_idempotent() {
        let mut x = vec![-1.0, 0.25, 1.0, -0.5];
        let before = x.clone();
        scale_columns(&mut x, 4, 1);
        for (a, b) in x.iter().zip(&before) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn constant_columns_map_to_zero() {
        let mut x = vec![3.0, 3.0, 3.0];
        let scales = scale_columns(&mut x, 3, 1);
        assert_eq!(x, vec![0.0, 0.0, 0.0]);
        assert!(scales[0].constant);
    }

    #[test]
    fn adjust_without_covariates_centres_the_response() {
        let out = adjust_covariates(&[1.0, 2.0, 3.0], &[], 3, 0).unwrap();
        assert_eq!(out, vec![-1.0, 0.0, 1.0]);
    }

    #[test]
    fn adjust_linear_response_gives_zero_residuals() {
        let cov = vec![0.0, 1.0, 2.0, 3.0];
        let y: Vec<f64> = cov.iter().map(|c| 2.0 - 0.5 * c).collect();
        let out = adjust_covariates(&y, &cov, 4, 1).unwrap();
        assert!(out.iter().all(|r| r.abs() < 1e-12));
    }

    #[test]
    fn adjust_hand_example() {
        // y = (1, 2, 4) on covariate (0, 1, 2): slope 1.5, intercept 5/6,
        // residuals (1/6, -1/3, 1/6).
        let out = adjust_covariates(&[1.0, 2.0, 4.0], &[0.0, 1.0, 2.0], 3, 1).unwrap();
        assert!((out[0] - 1.0 / 6.0).abs() < 1e-12);
        assert!((out[1] + 1.0 / 3.0).abs() < 1e-12);
        assert!((out[2] - 1.0 / 6.0).abs() < 1e-12);
        let mean: f64 = out.iter().sum::<f64>() / 3.0;
        assert!(mean.abs() < 1e-10);
    }

    #[test]
    fn residuals_are_orthogonal_to_covariates() {
        let mut rng = crate::rng::Rng::seed_from_u64(8);
        let n = 40;
        let c = 3;
        let cov: Vec<f64> = (0..n * c).map(|_| rng.uniform_sym(2.0)).collect();
        let y: Vec<f64> = (0..n).map(|_| rng.standard_normal()).collect();
        let res = adjust_covariates(&y, &cov, n, c).unwrap();
        for k in 0..c {
            let dot: f64 = (0..n).map(|i| res[i] * cov[i * c + k]).sum();
            assert!(dot.abs() < 1e-8, "column {k} correlation {dot}");
        }
        let mean: f64 = res.iter().sum::<f64>() / n as f64;
        assert!(mean.abs() < 1e-10);
    }

    fn fast_scan_config() -> ScanConfig {
        ScanConfig {
            null_iterations: 40,
            alt_iterations: 40,
            width: Some(3),
            ..ScanConfig::default()
        }
    }

    #[test]
    fn single_feature_scan_has_one_row() {
        let mut rng = crate::rng::Rng::seed_from_u64(5);
        let x: Vec<f64> = (0..30).map(|_| rng.uniform_sym(1.0)).collect();
        let y: Vec<f64> = (0..30).map(|_| rng.standard_normal()).collect();
        let data = Dataset::new(x, y, 1).unwrap();
        let result = scan(&data, &fast_scan_config()).unwrap();
        assert_eq!(result.results.len(), 1);
    }

    #[test]
    fn duplicated_column_gets_identical_statistics() {
        // Every feature's test uses the same seed, so when the two columns
        // are copies the reduced designs coincide and both features must
        // report bit-identical statistics.
        let mut rng = crate::rng::Rng::seed_from_u64(6);
        let n = 30;
        let col: Vec<f64> = (0..n).map(|_| rng.uniform_sym(1.0)).collect();
        let mut x = Vec::new();
        for &v in &col {
            x.extend_from_slice(&[v, v]);
        }
        let y: Vec<f64> = (0..n).map(|_| rng.standard_normal()).collect();
        let data = Dataset::new(x, y, 2).unwrap();
        let result = scan(&data, &fast_scan_config()).unwrap();
        let a = &result.results[0];
        let b = &result.results[1];
        assert_eq!(a.lr_stat.to_bits(), b.lr_stat.to_bits());
        assert_eq!(a.p_sqlr.to_bits(), b.p_sqlr.to_bits());
        assert_eq!(a.sigma_hat_sq.to_bits(), b.sigma_hat_sq.to_bits());
    }

    #[test]
    fn scan_is_a_sorted_permutation_and_parallel_matches_serial() {
        let mut rng = crate::rng::Rng::seed_from_u64(77);
        let n = 35;
        let d = 4;
        let x: Vec<f64> = (0..n * d).map(|_| rng.uniform_sym(1.0)).collect();
        let y: Vec<f64> = (0..n).map(|_| rng.standard_normal()).collect();
        let data = Dataset::new(x, y, d).unwrap();
        let par = scan(&data, &fast_scan_config()).unwrap();
        let ser = scan(
            &data,
            &ScanConfig {
                parallel: false,
                ..fast_scan_config()
            },
        )
        .unwrap();
        assert_eq!(par, ser);
        let mut indices: Vec<usize> = par.results.iter().map(|r| r.feature_index).collect();
        indices.sort_unstable();
        assert_eq!(indices, vec![0, 1, 2, 3]);
        for w in par.results.windows(2) {
            assert!(w[0].p_sqlr <= w[1].p_sqlr);
        }
    }

    #[test]
    fn baseline_p_is_scaling_invariant() {
        let mut rng = crate::rng::Rng::seed_from_u64(12);
        let n = 25;
        let d = 2;
        let x: Vec<f64> = (0..n * d).map(|_| 3.0 + rng.uniform_sym(5.0)).collect();
        let y: Vec<f64> = (0..n)
            .map(|i| 0.4 * x[i * d] + rng.standard_normal())
            .collect();
        let raw = Dataset::new(x, y, d).unwrap();
        let (scaled, _) = scale_dataset(&raw).unwrap();
        for j in 0..d {
            let p_raw = f_test_feature(&raw, j).unwrap().p_value.value();
            let p_scaled = f_test_feature(&scaled, j).unwrap().p_value.value();
            assert!(
                (p_raw - p_scaled).abs() < 1e-9,
                "feature {j}: {p_raw} vs {p_scaled}"
            );
        }
    }
}
