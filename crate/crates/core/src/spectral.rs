//! Polynomial spectral filters on the normalized Laplacian.
//!
//! A filter `F = sum_m alpha_m L^m` has spectral response
//! `h(lambda) = sum_m alpha_m lambda^m`. It is applied with Horner's rule as
//! repeated sparse matvecs, so `L^m` is never formed. [`SpectralOracle`] is
//! a dense eigendecomposition used only to cross-check the sparse path on
//! small grids.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};
use crate::graph::NormalizedLaplacian;

/// Largest graph the dense oracle will decompose.
pub const ORACLE_MAX_VERTICES: usize = 4096;

/// Number of uniform spectrum samples used to fit the initial filter bank.
pub const FIT_SAMPLES: usize = 256;

#[derive(Debug, Clone, PartialEq)]
pub struct PolynomialFilter {
    coefficients: Vec<f64>,
}

impl PolynomialFilter {
    pub fn new(coefficients: Vec<f64>) -> Result<Self> {
        if coefficients.is_empty() {
            return Err(Error::InvalidArgument(
                "a filter needs at least one coefficient".into(),
            ));
        }
        if coefficients.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidArgument(
                "non-finite filter coefficient".into(),
            ));
        }
        Ok(Self { coefficients })
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn degree(&self) -> usize {
        self.coefficients.len() - 1
    }

    /// `h(lambda)` by Horner's rule.
    pub fn response(&self, lambda: f64) -> f64 {
        self.coefficients
            .iter()
            .rev()
            .fold(0.0, |acc, &a| acc * lambda + a)
    }
}

fn check_len(l: &NormalizedLaplacian, y: &[f64]) -> Result<()> {
    if y.len() != l.n() {
        return Err(Error::InvalidArgument(format!(
            "signal has {} values but the graph has {} vertices",
            y.len(),
            l.n()
        )));
    }
    Ok(())
}

/// `sum_m alpha_m L^m y` with Horner's rule: `M` sparse matvecs.
pub fn filter_matvec(l: &NormalizedLaplacian, f: &PolynomialFilter, y: &[f64]) -> Result<Vec<f64>> {
    check_len(l, y)?;
    let alpha = f.coefficients();
    let m = alpha.len() - 1;
    let mut acc: Vec<f64> = y.iter().map(|v| alpha[m] * v).collect();
    let mut tmp = vec![0.0; y.len()];
    for a in alpha[..m].iter().rev() {
        l.apply_into(&acc, &mut tmp);
        for ((o, &t), &v) in acc.iter_mut().zip(&tmp).zip(y) {
            *o = t + a * v;
        }
    }
    Ok(acc)
}

/// `[y, L y, ..., L^max_power y]`.
pub fn laplacian_powers(
    l: &NormalizedLaplacian,
    y: &[f64],
    max_power: usize,
) -> Result<Vec<Vec<f64>>> {
    check_len(l, y)?;
    let mut out = Vec::with_capacity(max_power + 1);
    out.push(y.to_vec());
    for m in 1..=max_power {
        let next = l.apply(&out[m - 1]);
        out.push(next);
    }
    Ok(out)
}

/// `[t_0, ..., t_kmax]` with `t_0 = z`, `t_1 = L~ z`, `t_k = 2 L~ t_{k-1} - t_{k-2}`
/// and `L~ = L - I`.
pub fn chebyshev_sequence(
    l: &NormalizedLaplacian,
    z: &[f64],
    k_max: usize,
) -> Result<Vec<Vec<f64>>> {
    check_len(l, z)?;
    let n = z.len();
    let mut seq: Vec<Vec<f64>> = Vec::with_capacity(k_max + 1);
    seq.push(z.to_vec());
    if k_max >= 1 {
        let mut t1 = vec![0.0; n];
        l.apply_shifted_into(z, &mut t1);
        seq.push(t1);
    }
    for k in 2..=k_max {
        let mut next = vec![0.0; n];
        l.apply_shifted_into(&seq[k - 1], &mut next);
        for (o, &prev2) in next.iter_mut().zip(&seq[k - 2]) {
            *o = 2.0 * *o - prev2;
        }
        seq.push(next);
    }
    Ok(seq)
}

/// Dense eigendecomposition `L = X diag(lambda) X^T` for test-sized graphs.
///
/// Eigenvalues ascend; each eigenvector's first component with magnitude
/// above `1e-12` is positive.
#[derive(Debug, Clone)]
pub struct SpectralOracle {
    eigenvalues: Vec<f64>,
    // Column k is eigenvector k.
    eigenvectors: DMatrix<f64>,
}

impl SpectralOracle {
    pub fn new(l: &NormalizedLaplacian) -> Result<Self> {
        let n = l.n();
        if n > ORACLE_MAX_VERTICES {
            return Err(Error::OracleTooLarge(n));
        }
        let dense = DMatrix::from_row_slice(n, n, &l.matrix().to_dense());
        let eig = SymmetricEigen::new(dense);
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let eigenvalues = order.iter().map(|&k| eig.eigenvalues[k]).collect();
        let mut eigenvectors = DMatrix::zeros(n, n);
        for (dst, &src) in order.iter().enumerate() {
            let mut col = eig.eigenvectors.column(src).into_owned();
            if let Some(first) = col.iter().find(|v| v.abs() > 1e-12) {
                if *first < 0.0 {
                    col.neg_mut();
                }
            }
            eigenvectors.set_column(dst, &col);
        }
        Ok(Self {
            eigenvalues,
            eigenvectors,
        })
    }

    pub fn n(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn eigenvector(&self, k: usize) -> Vec<f64> {
        self.eigenvectors.column(k).iter().copied().collect()
    }

    pub fn eigenvectors(&self) -> &DMatrix<f64> {
        &self.eigenvectors
    }

    /// Graph Fourier transform `y_hat(lambda_i) = <y, chi_i>`.
    pub fn forward_transform(&self, y: &[f64]) -> Result<Vec<f64>> {
        self.check(y)?;
        let v = DVector::from_column_slice(y);
        Ok(self.eigenvectors.tr_mul(&v).iter().copied().collect())
    }

    pub fn inverse_transform(&self, coeffs: &[f64]) -> Result<Vec<f64>> {
        self.check(coeffs)?;
        let c = DVector::from_column_slice(coeffs);
        Ok((&self.eigenvectors * c).iter().copied().collect())
    }

    /// `X g(Lambda) X^T y` for an arbitrary spectral function `g`.
    pub fn apply_spectral_fn(&self, g: impl Fn(f64) -> f64, y: &[f64]) -> Result<Vec<f64>> {
        let mut coeffs = self.forward_transform(y)?;
        for (c, &lambda) in coeffs.iter_mut().zip(&self.eigenvalues) {
            *c *= g(lambda);
        }
        self.inverse_transform(&coeffs)
    }

    fn check(&self, y: &[f64]) -> Result<()> {
        if y.len() != self.n() {
            return Err(Error::InvalidArgument(format!(
                "signal has {} values but the oracle has {} vertices",
                y.len(),
                self.n()
            )));
        }
        Ok(())
    }
}

/// `X diag(h(lambda_i)) X^T y`.
pub fn oracle_filter(o: &SpectralOracle, f: &PolynomialFilter, y: &[f64]) -> Result<Vec<f64>> {
    o.apply_spectral_fn(|lambda| f.response(lambda), y)
}

/// Generalized translation of `y` to `center`:
/// `sqrt(N) * sum_i y_hat(lambda_i) chi_i(center) chi_i`.
pub fn translate_signal(o: &SpectralOracle, y: &[f64], center: usize) -> Result<Vec<f64>> {
    let n = o.n();
    if center >= n {
        return Err(Error::OutOfBounds(format!(
            "center {center} is not a vertex of a graph with {n} vertices"
        )));
    }
    let mut coeffs = o.forward_transform(y)?;
    let scale = (n as f64).sqrt();
    for (i, c) in coeffs.iter_mut().enumerate() {
        *c *= scale * o.eigenvectors[(center, i)];
    }
    o.inverse_transform(&coeffs)
}

/// Indicator of the open interval `(a, b)` on the spectrum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralWindow {
    pub a: f64,
    pub b: f64,
}

impl SpectralWindow {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !(0.0 <= a && a < b && b <= NormalizedLaplacian::SPECTRUM_BOUND) {
            return Err(Error::InvalidArgument(format!(
                "window ({a}, {b}) must satisfy 0 <= a < b <= 2"
            )));
        }
        Ok(Self { a, b })
    }

    pub fn value(&self, lambda: f64) -> f64 {
        if self.a < lambda && lambda < self.b {
            1.0
        } else {
            0.0
        }
    }

    /// `count` equal windows of width `4 / (count + 1)` overlapping by half,
    /// tiling `[0, 2]`.
    pub fn tiling(count: usize) -> Vec<SpectralWindow> {
        let step = NormalizedLaplacian::SPECTRUM_BOUND / (count as f64 + 1.0);
        (0..count)
            .map(|i| {
                let a = i as f64 * step;
                // Clamp the last edge so rounding cannot push it past 2.
                let b = (a + 2.0 * step).min(NormalizedLaplacian::SPECTRUM_BOUND);
                SpectralWindow { a, b }
            })
            .collect()
    }
}

/// Midpoints of `samples` equal cells of `[0, 2]`. Midpoints keep every
/// sample off the window edges, where the indicator jumps.
pub fn fit_grid(samples: usize) -> Vec<f64> {
    let h = NormalizedLaplacian::SPECTRUM_BOUND / samples as f64;
    (0..samples).map(|j| (j as f64 + 0.5) * h).collect()
}

/// Least-squares polynomial of the given degree through `(xs, ys)`.
pub fn fit_polynomial(xs: &[f64], ys: &[f64], degree: usize) -> Result<PolynomialFilter> {
    if xs.len() != ys.len() || xs.len() <= degree {
        return Err(Error::InvalidArgument(format!(
            "cannot fit degree {degree} to {} points",
            xs.len()
        )));
    }
    let vander = DMatrix::from_fn(xs.len(), degree + 1, |r, c| xs[r].powi(c as i32));
    let rhs = DVector::from_column_slice(ys);
    let svd = vander.svd(true, true);
    let coeffs = svd
        .solve(&rhs, 1e-14)
        .map_err(|e| Error::InvalidArgument(format!("least squares failed: {e}")))?;
    PolynomialFilter::new(coeffs.iter().copied().collect())
}

/// Initial filters: one degree-`degree` least-squares fit per window of
/// [`SpectralWindow::tiling`], over [`FIT_SAMPLES`] points of [`fit_grid`].
pub fn init_filter_bank(num_filters: usize, degree: usize) -> Result<Vec<PolynomialFilter>> {
    if num_filters == 0 {
        return Err(Error::InvalidArgument(
            "filter bank needs at least one filter".into(),
        ));
    }
    let xs = fit_grid(FIT_SAMPLES);
    SpectralWindow::tiling(num_filters)
        .into_iter()
        .map(|w| {
            let ys: Vec<f64> = xs.iter().map(|&x| w.value(x)).collect();
            fit_polynomial(&xs, &ys, degree)
        })
        .collect()
}

/// `(lambda, h(lambda))` on `samples` evenly spaced points of `[0, 2]`,
/// endpoints included.
pub fn spectral_response(f: &PolynomialFilter, samples: usize) -> Result<Vec<(f64, f64)>> {
    if samples < 2 {
        return Err(Error::InvalidArgument(
            "need at least two response samples".into(),
        ));
    }
    let step = NormalizedLaplacian::SPECTRUM_BOUND / (samples - 1) as f64;
    Ok((0..samples)
        .map(|j| {
            let lambda = if j == samples - 1 {
                NormalizedLaplacian::SPECTRUM_BOUND
            } else {
                j as f64 * step
            };
            (lambda, f.response(lambda))
        })
        .collect())
}
