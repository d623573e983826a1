//! Mutual coherence between sensing atoms and the Fourier basis.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::signal::SubBandSpec;
use crate::wavelet::{
    bandwidth_10db, gabor_atom_periodic, width_for_bandwidth, AtomParams, WaveletFrame,
};

const UNIT_NORM_TOL: f64 = 1e-6;

/// `mu = max_{i,k} |(A B)_{ik}|`, where the rows of `analysis` are the
/// conjugated sensing atoms (as in `W^H`) and the columns of `basis` are the
/// sparsifying vectors (as in `F^H`). Rows and columns must be unit-norm.
pub fn mutual_coherence(analysis: &DMatrix<Complex64>, basis: &DMatrix<Complex64>) -> Result<f64> {
    if analysis.ncols() != basis.nrows() {
        return Err(Error::DimensionMismatch {
            expected: analysis.ncols(),
            actual: basis.nrows(),
        });
    }
    for (i, row) in analysis.row_iter().enumerate() {
        check_unit(row.norm(), "row", i)?;
    }
    for (k, col) in basis.column_iter().enumerate() {
        check_unit(col.norm(), "column", k)?;
    }
    let gram = analysis * basis;
    Ok(gram.iter().map(|c| c.norm()).fold(0.0, f64::max))
}

fn check_unit(norm: f64, what: &str, index: usize) -> Result<()> {
    if (norm - 1.0).abs() > UNIT_NORM_TOL {
        return Err(Error::invalid(format!(
            "{what} {index} has norm {norm}, expected 1"
        )));
    }
    Ok(())
}

/// Coherence of `frame` with the Fourier columns in `support` only.
pub fn local_mutual_coherence(frame: &WaveletFrame, support: &[usize]) -> Result<f64> {
    if support.is_empty() {
        return Err(Error::invalid("support must not be empty"));
    }
    let n = frame.n();
    if let Some(&k) = support.iter().find(|&&k| k >= n) {
        return Err(Error::invalid(format!("bin {k} out of range 0..{n}")));
    }
    for (i, atom) in frame.atoms().iter().enumerate() {
        check_unit(atom.norm(), "atom", i)?;
    }
    let image = frame.fourier_image();
    let mut mu = 0.0f64;
    for i in 0..image.nrows() {
        for &k in support {
            mu = mu.max(image[(i, k)].norm());
        }
    }
    Ok(mu)
}

/// Lower bound `1/sqrt(N)` reached by the Dirac/Fourier pair.
pub fn welch_bound(n: usize) -> f64 {
    1.0 / (n as f64).sqrt()
}

/// Closed-form peak coherence `(tau sqrt(2 pi))^(1/2) / sqrt(N)` of a Gabor
/// atom whose center frequency sits on a bin.
pub fn gabor_peak_coherence(tau: f64, n: usize) -> f64 {
    (tau * (2.0 * PI).sqrt()).sqrt() / (n as f64).sqrt()
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoherenceCurve {
    /// Atom bandwidth over the band-of-interest bandwidth, one per width.
    pub ratios: Vec<f64>,
    pub widths: Vec<f64>,
    pub coherences: Vec<f64>,
    /// Gaussian closed-form prediction at each width.
    pub closed_form: Vec<f64>,
    pub bound: f64,
}

impl CoherenceCurve {
    pub fn len(&self) -> usize {
        self.ratios.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ratios.is_empty()
    }
}

/// Bandwidth of the widest sub-band, normalized to the Nyquist rate.
pub fn band_of_interest_bandwidth(spec: &SubBandSpec) -> f64 {
    let widest = spec.bands().iter().map(|b| b.len()).max().unwrap_or(0);
    widest as f64 * spec.bin_width()
}

/// Atom widths realizing the given `BW_p / BW_RF` ratios.
pub fn widths_for_ratios(spec: &SubBandSpec, ratios: &[f64]) -> Result<Vec<f64>> {
    let bw_rf = band_of_interest_bandwidth(spec);
    ratios
        .iter()
        .map(|&r| {
            if r > 0.0 && r.is_finite() {
                Ok(width_for_bandwidth(r * bw_rf))
            } else {
                Err(Error::invalid(format!(
                    "bandwidth ratio must be positive, got {r}"
                )))
            }
        })
        .collect()
}

/// `points` ratios log-spaced from `hi` down to `lo`, so widths ascend.
pub fn log_ratio_grid(hi: f64, lo: f64, points: usize) -> Result<Vec<f64>> {
    if !(lo > 0.0 && hi > lo) || points < 2 {
        return Err(Error::invalid(
            "ratio grid needs 0 < lo < hi and at least two points",
        ));
    }
    let (a, b) = (hi.ln(), lo.ln());
    Ok((0..points)
        .map(|i| (a + (b - a) * i as f64 / (points - 1) as f64).exp())
        .collect())
}

/// Local coherence of a frame of periodized Gabor atoms placed at every
/// band center and every shift, one sweep point per width.
pub fn coherence_sweep(spec: &SubBandSpec, widths: &[f64]) -> Result<CoherenceCurve> {
    if widths.is_empty() {
        return Err(Error::invalid("width grid must not be empty"));
    }
    for w in widths.windows(2) {
        if !(w[1] > w[0]) {
            return Err(Error::invalid("widths must be strictly ascending"));
        }
    }
    if !(widths[0] > 0.0) {
        return Err(Error::invalid("widths must be positive"));
    }
    let n = spec.n();
    let support = spec.support();
    let bw_rf = band_of_interest_bandwidth(spec);
    let coherences = widths
        .par_iter()
        .map(|&tau| {
            let frame = sweep_frame(spec, tau)?;
            local_mutual_coherence(&frame, &support)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(CoherenceCurve {
        ratios: widths.iter().map(|&t| bandwidth_10db(t) / bw_rf).collect(),
        widths: widths.to_vec(),
        coherences,
        closed_form: widths.iter().map(|&t| gabor_peak_coherence(t, n)).collect(),
        bound: welch_bound(n),
    })
}

fn sweep_frame(spec: &SubBandSpec, tau: f64) -> Result<WaveletFrame> {
    let n = spec.n();
    let mut atoms = Vec::with_capacity(n * spec.bands().len());
    for b in 0..spec.bands().len() {
        let fc = spec.center_freq(b);
        for shift in 0..n {
            atoms.push(gabor_atom_periodic(
                AtomParams::new(fc, tau, shift as f64)?,
                n,
            )?);
        }
    }
    WaveletFrame::from_atoms(atoms)
}
