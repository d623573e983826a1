//! Orthogonal matching pursuit restricted to a known sub-band support.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::sensing::EffectiveSensingMatrix;
use crate::signal::SparseSpectrum;

/// Early exit once the residual falls below this fraction of `||y||`.
const RESIDUAL_TOL: f64 = 1e-10;
/// Relative size below which a new direction counts as dependent.
const RANK_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct RecoveryResult {
    /// Selected bins in selection order.
    pub support: Vec<usize>,
    /// Least-squares coefficients, aligned with `support`.
    pub coefficients: Vec<Complex64>,
    pub residual_norm: f64,
    pub iterations: usize,
    /// `||r||` before the first iteration and after each one.
    pub residual_history: Vec<f64>,
    /// Set when a selected column was numerically dependent on earlier ones;
    /// the coefficients are then the minimum-norm least-squares solution.
    pub rank_deficient: bool,
}

impl RecoveryResult {
    pub fn sorted_support(&self) -> Vec<usize> {
        let mut s = self.support.clone();
        s.sort_unstable();
        s
    }

    /// Dense length-`n` spectrum estimate.
    pub fn to_dense(&self, n: usize) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); n];
        for (&k, &c) in self.support.iter().zip(&self.coefficients) {
            out[k] = c;
        }
        out
    }
}

/// Greedy recovery of a `k`-sparse spectrum from `y = Theta s`, choosing
/// columns from `support` only. Each step picks the column with the largest
/// normalized correlation `|theta_j^H r| / ||theta_j||` (ties go to the
/// lowest bin) and refits all selected coefficients by least squares.
pub fn omp(
    theta: &EffectiveSensingMatrix,
    y: &[Complex64],
    k: usize,
    support: &[usize],
) -> Result<RecoveryResult> {
    let a = theta.entries();
    let (m, n) = a.shape();
    if y.len() != m {
        return Err(Error::DimensionMismatch {
            expected: m,
            actual: y.len(),
        });
    }
    if k > support.len() {
        return Err(Error::invalid(format!(
            "sparsity {k} exceeds support size {}",
            support.len()
        )));
    }
    let mut seen = vec![false; n];
    let mut col_norms = Vec::with_capacity(support.len());
    for &j in support {
        if j >= n {
            return Err(Error::invalid(format!("bin {j} out of range 0..{n}")));
        }
        if std::mem::replace(&mut seen[j], true) {
            return Err(Error::invalid(format!("duplicate bin {j} in support")));
        }
        let norm = a.column(j).norm();
        if norm == 0.0 {
            return Err(Error::invalid(format!(
                "column {j} of the sensing matrix is zero"
            )));
        }
        col_norms.push(norm);
    }

    let y = DVector::from_column_slice(y);
    let y_norm = y.norm();
    let mut residual = y.clone();
    let mut history = vec![y_norm];
    let mut chosen: Vec<usize> = Vec::with_capacity(k);
    let mut used = vec![false; support.len()];
    let mut basis = OrthoBasis::default();

    while chosen.len() < k && residual.norm() > RESIDUAL_TOL * y_norm {
        let mut best: Option<(usize, f64)> = None;
        for (slot, &j) in support.iter().enumerate() {
            if used[slot] {
                continue;
            }
            let corr = a.column(j).dotc(&residual).norm() / col_norms[slot];
            let better = match best {
                None => true,
                Some((b, c)) => corr > c || (corr == c && j < support[b]),
            };
            if better {
                best = Some((slot, corr));
            }
        }
        let Some((slot, _)) = best else { break };
        used[slot] = true;
        chosen.push(support[slot]);

        if let Some(q) = basis.push(a.column(support[slot]).clone_owned()) {
            let c = q.dotc(&residual);
            residual.axpy(-c, q, Complex64::new(1.0, 0.0));
        }
        history.push(residual.norm());
    }

    let coefficients = if basis.deficient {
        min_norm_solve(a.select_columns(&chosen), &y)
    } else {
        basis.solve(&y)
    };

    Ok(RecoveryResult {
        iterations: chosen.len(),
        support: chosen,
        coefficients: coefficients.iter().copied().collect(),
        residual_norm: residual.norm(),
        residual_history: history,
        rank_deficient: basis.deficient,
    })
}

/// Incremental QR of the selected columns by Gram-Schmidt with one
/// reorthogonalization pass. The residual is updated by projecting out each
/// new direction, so its norm cannot grow beyond rounding.
#[derive(Default)]
struct OrthoBasis {
    q: Vec<DVector<Complex64>>,
    /// Columns of the triangular factor; `r[j][i]` is `R_{ij}`.
    r: Vec<Vec<Complex64>>,
    deficient: bool,
}

impl OrthoBasis {
    /// Adds a column; returns the new unit direction, or `None` when the
    /// column already lies in the span.
    fn push(&mut self, column: DVector<Complex64>) -> Option<&DVector<Complex64>> {
        let scale = column.norm();
        let mut v = column;
        let mut coeffs = vec![Complex64::new(0.0, 0.0); self.q.len()];
        for _ in 0..2 {
            for (qi, ci) in self.q.iter().zip(coeffs.iter_mut()) {
                let c = qi.dotc(&v);
                v.axpy(-c, qi, Complex64::new(1.0, 0.0));
                *ci += c;
            }
        }
        let norm = v.norm();
        if norm <= RANK_TOL * scale {
            self.deficient = true;
            return None;
        }
        coeffs.push(Complex64::new(norm, 0.0));
        self.r.push(coeffs);
        self.q.push(v / Complex64::new(norm, 0.0));
        self.q.last()
    }

    /// Back-substitution of `R x = Q^H y`.
    fn solve(&self, y: &DVector<Complex64>) -> DVector<Complex64> {
        let n = self.q.len();
        let mut x = DVector::from_iterator(n, self.q.iter().map(|q| q.dotc(y)));
        for i in (0..n).rev() {
            let mut acc = x[i];
            for j in i + 1..n {
                acc -= self.r[j][i] * x[j];
            }
            x[i] = acc / self.r[i][i];
        }
        x
    }
}

/// Minimum-norm least squares via SVD.
fn min_norm_solve(a: DMatrix<Complex64>, y: &DVector<Complex64>) -> DVector<Complex64> {
    let svd = a.svd(true, true);
    let eps = RANK_TOL * svd.singular_values.max();
    // only fails when U or V^T were not computed
    svd.solve(y, eps).expect("SVD computed with U and V^T")
}

/// Exact support match between the estimate and the truth.
pub fn support_success(result: &RecoveryResult, truth: &SparseSpectrum) -> bool {
    result.sorted_support() == truth.support()
}
