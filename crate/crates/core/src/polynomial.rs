//! Cubic frequency model `IL(w) = a*w + b*w^2 + c*w^3` with per-curve fitting.
//!
//! There is deliberately no intercept: loss is zero at DC. Frequencies enter
//! the fit in raw GHz so the coefficients keep physical units. The key fact
//! this module makes enforceable: with `a, b, c >= 0` the cubic is
//! non-negative for every `w >= 0`, so the constrained (NNLS) fit yields a
//! model that cannot predict negative loss. Unconstrained least squares
//! carries no such guarantee and is kept behind a method tag.

use crate::data_pipeline::{
    group_curves, CurveGroup, Dataset, DesignParams, ExcludedGroup, FEATURE_NAMES,
};
use crate::error::{Error, Result};
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

/// Cubic coefficients, in dB/GHz, dB/GHz^2, dB/GHz^3.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolyCoeffs {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl PolyCoeffs {
    pub fn as_array(&self) -> [f64; 3] {
        [self.a, self.b, self.c]
    }

    pub fn from_array(v: [f64; 3]) -> Self {
        PolyCoeffs {
            a: v[0],
            b: v[1],
            c: v[2],
        }
    }
}

/// Coefficient fitting method.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FitMethod {
    /// Unconstrained ordinary least squares.
    Ols,
    /// Non-negative least squares; guarantees a non-negative cubic.
    Nnls,
}

impl std::fmt::Display for FitMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            FitMethod::Ols => write!(f, "ols"),
            FitMethod::Nnls => write!(f, "nnls"),
        }
    }
}

/// Outcome of one per-curve fit, with the residual diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolyFitReport {
    pub coeffs: PolyCoeffs,
    /// Largest absolute residual over the fitted points, in dB.
    pub max_abs_residual: f64,
    pub rms_residual: f64,
    pub n_points: usize,
    pub method: FitMethod,
}

/// Frequency powers `(w, w^2, w^3)`.
pub fn power_series(frequency_ghz: f64) -> Result<[f64; 3]> {
    if frequency_ghz < 0.0 || !frequency_ghz.is_finite() {
        return Err(Error::NegativeFrequency(frequency_ghz));
    }
    let w = frequency_ghz;
    Ok([w, w * w, w * w * w])
}

/// Evaluate the cubic at `w`, Horner form; exactly zero at `w = 0`.
pub fn eval_poly(coeffs: &PolyCoeffs, frequency_ghz: f64) -> f64 {
    frequency_ghz * (coeffs.a + frequency_ghz * (coeffs.b + frequency_ghz * coeffs.c))
}

/// Unconstrained least-squares fit of one curve via thin QR on the
/// unit-scaled design matrix.
pub fn fit_ols(curve: &CurveGroup) -> Result<PolyFitReport> {
    let (design, rhs, scales) = build_system(curve)?;
    let z = solve_ols(&design, &rhs)?;
    let coeffs = PolyCoeffs {
        a: z[0] / scales[0],
        b: z[1] / scales[1],
        c: z[2] / scales[2],
    };
    Ok(report(curve, coeffs, FitMethod::Ols))
}

/// Non-negative least squares by the active-set method: same residual
/// objective as [`fit_ols`] subject to `a, b, c >= 0`.
pub fn fit_nnls(curve: &CurveGroup) -> Result<PolyFitReport> {
    let (design, rhs, scales) = build_system(curve)?;
    let z = nnls_active_set(&design, &rhs)?;
    let coeffs = PolyCoeffs {
        a: z[0] / scales[0],
        b: z[1] / scales[1],
        c: z[2] / scales[2],
    };
    Ok(report(curve, coeffs, FitMethod::Nnls))
}

fn fit_with(curve: &CurveGroup, method: FitMethod) -> Result<PolyFitReport> {
    match method {
        FitMethod::Ols => fit_ols(curve),
        FitMethod::Nnls => fit_nnls(curve),
    }
}

/// Per-curve fit failure kept alongside the successes.
#[derive(Debug, Clone)]
pub struct FitFailure {
    pub params: DesignParams,
    pub reason: String,
}

/// All per-curve fits over a dataset plus the derived coefficient table.
#[derive(Debug, Clone)]
pub struct FitAllResult {
    pub fits: Vec<(DesignParams, PolyFitReport)>,
    pub failures: Vec<FitFailure>,
    pub excluded: Vec<ExcludedGroup>,
    /// Global maximum of the per-curve worst residuals, in dB.
    pub max_abs_residual: f64,
}

/// Default residual (the per-curve worst |misfit|) above which a curve is
/// flagged as poorly cubic. A diagnostic, never a hard gate.
pub const RESIDUAL_WARN_DB: f64 = 0.5;

impl FitAllResult {
    /// Rows of the derived coefficient dataset: design parameters paired with
    /// the fitted `(a, b, c)` -- the branch network's training table.
    pub fn coeff_rows(&self) -> Vec<([f64; 7], [f64; 3])> {
        self.fits
            .iter()
            .map(|(p, r)| (p.as_array(), r.coeffs.as_array()))
            .collect()
    }

    /// Curves whose worst residual exceeds `threshold_db`: the cubic form is
    /// a poor description of these sweeps.
    pub fn poorly_cubic(&self, threshold_db: f64) -> Vec<&(DesignParams, PolyFitReport)> {
        self.fits
            .iter()
            .filter(|(_, r)| r.max_abs_residual > threshold_db)
            .collect()
    }
}

/// Fit every curve in the dataset. Per-curve failures are collected, not
/// fatal; zero successes is an error.
pub fn fit_all(dataset: &Dataset, method: FitMethod) -> Result<FitAllResult> {
    let grouping = group_curves(dataset);
    let mut fits = Vec::new();
    let mut failures = Vec::new();
    for group in &grouping.groups {
        match fit_with(group, method) {
            Ok(report) => fits.push((group.params, report)),
            Err(e) => failures.push(FitFailure {
                params: group.params,
                reason: e.to_string(),
            }),
        }
    }
    if fits.is_empty() {
        return Err(Error::NoFittableCurves(format!(
            "{} group(s), {} excluded, {} failed",
            grouping.groups.len(),
            grouping.excluded.len(),
            failures.len()
        )));
    }
    let max_abs_residual = fits
        .iter()
        .map(|(_, r)| r.max_abs_residual)
        .fold(0.0f64, f64::max);
    Ok(FitAllResult {
        fits,
        failures,
        excluded: grouping.excluded,
        max_abs_residual,
    })
}

/// Write the coefficient dataset: the 7 design columns, then `a,b,c` and the
/// per-curve worst residual.
pub fn save_coeff_csv(result: &FitAllResult, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut w = BufWriter::new(file);
    let io_err = |source| Error::Io {
        path: path.to_path_buf(),
        source,
    };
    writeln!(
        w,
        "{},a,b,c,max_abs_residual_db",
        FEATURE_NAMES[..7].join(",")
    )
    .map_err(io_err)?;
    for (params, report) in &result.fits {
        let p = params.as_array();
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{},{},{}",
            p[0],
            p[1],
            p[2],
            p[3],
            p[4],
            p[5],
            p[6],
            report.coeffs.a,
            report.coeffs.b,
            report.coeffs.c,
            report.max_abs_residual
        )
        .map_err(io_err)?;
    }
    w.flush().map_err(io_err)
}

/// Build the column-equilibrated design matrix and right-hand side.
/// Returned `scales` are the original column norms; solutions on the scaled
/// system are divided by them to recover physical coefficients.
fn build_system(curve: &CurveGroup) -> Result<(DMatrix<f64>, DVector<f64>, [f64; 3])> {
    let n = curve.points.len();
    if n < 4 {
        return Err(Error::InvalidConfig(format!(
            "cubic fit needs at least 4 points, got {n}"
        )));
    }
    let mut design = DMatrix::zeros(n, 3);
    let mut rhs = DVector::zeros(n);
    for (i, &(f, il)) in curve.points.iter().enumerate() {
        let powers = power_series(f)?;
        for j in 0..3 {
            design[(i, j)] = powers[j];
        }
        rhs[i] = il;
    }
    let mut scales = [0.0f64; 3];
    for (j, scale) in scales.iter_mut().enumerate() {
        let norm = design.column(j).norm();
        if norm <= f64::MIN_POSITIVE.sqrt() {
            return Err(Error::RankDeficient(format!(
                "design column {} (w^{}) is numerically zero",
                j,
                j + 1
            )));
        }
        *scale = norm;
        for i in 0..n {
            design[(i, j)] /= norm;
        }
    }
    Ok((design, rhs, scales))
}

/// Least squares on (a subset of) the scaled columns via thin QR.
fn solve_ols(design: &DMatrix<f64>, rhs: &DVector<f64>) -> Result<DVector<f64>> {
    let k = design.ncols();
    let qr = design.clone().qr();
    let r = qr.r();
    for j in 0..k {
        // Unit-scaled columns make the diagonal O(1) unless rank-deficient.
        if r[(j, j)].abs() < 1e-10 {
            return Err(Error::RankDeficient(format!(
                "R diagonal {j} = {:.3e} (frequencies do not span a cubic)",
                r[(j, j)]
            )));
        }
    }
    let qty = qr.q().transpose() * rhs;
    r.solve_upper_triangular(&qty)
        .ok_or_else(|| Error::RankDeficient("upper-triangular solve failed".to_string()))
}

/// Lawson-Hanson active-set NNLS on the scaled system.
fn nnls_active_set(design: &DMatrix<f64>, rhs: &DVector<f64>) -> Result<DVector<f64>> {
    let k = design.ncols();
    let mut x = DVector::zeros(k);
    let mut free = vec![false; k];

    let aty_inf = (design.transpose() * rhs).amax();
    let tol = 1e-13 * aty_inf.max(1.0);

    for _outer in 0..10 * k {
        // Dual vector over the clamped set.
        let w = design.transpose() * (rhs - design * &x);
        let mut best: Option<(usize, f64)> = None;
        for j in 0..k {
            if !free[j] && w[j] > tol && best.is_none_or(|(_, bw)| w[j] > bw) {
                best = Some((j, w[j]));
            }
        }
        let Some((enter, _)) = best else {
            return Ok(x); // KKT satisfied
        };
        free[enter] = true;

        loop {
            let cols: Vec<usize> = (0..k).filter(|&j| free[j]).collect();
            let sub = design.select_columns(cols.iter());
            let z = solve_ols(&sub, rhs)?;

            if z.iter().all(|&v| v > 0.0) {
                x.fill(0.0);
                for (idx, &j) in cols.iter().enumerate() {
                    x[j] = z[idx];
                }
                break;
            }

            // Step back along (z - x) until the first coefficient hits zero.
            let mut alpha = f64::INFINITY;
            for (idx, &j) in cols.iter().enumerate() {
                if z[idx] <= 0.0 {
                    let denom = x[j] - z[idx];
                    if denom > 0.0 {
                        alpha = alpha.min(x[j] / denom);
                    } else {
                        alpha = 0.0;
                    }
                }
            }
            if !alpha.is_finite() {
                return Err(Error::Numerical(
                    "nnls interpolation step failed".to_string(),
                ));
            }
            for (idx, &j) in cols.iter().enumerate() {
                x[j] += alpha * (z[idx] - x[j]);
            }
            for &j in &cols {
                if x[j] <= tol.max(1e-14) {
                    x[j] = 0.0;
                    free[j] = false;
                }
            }
            if !free.iter().any(|&f| f) {
                // Everything clamped again; fall back to the dual scan.
                break;
            }
        }
    }
    Err(Error::Numerical(
        "nnls active-set iteration limit exceeded".to_string(),
    ))
}

fn report(curve: &CurveGroup, coeffs: PolyCoeffs, method: FitMethod) -> PolyFitReport {
    let mut max_abs = 0.0f64;
    let mut sum_sq = 0.0f64;
    for &(f, il) in &curve.points {
        let r = il - eval_poly(&coeffs, f);
        max_abs = max_abs.max(r.abs());
        sum_sq += r * r;
    }
    PolyFitReport {
        coeffs,
        max_abs_residual: max_abs,
        rms_residual: (sum_sq / curve.points.len() as f64).sqrt(),
        n_points: curve.points.len(),
        method,
    }
}
