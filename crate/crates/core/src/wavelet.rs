//! Gabor atoms, C-Morlet families and analysis frames on the N-point grid.
//!
//! An atom with center frequency `f_c`, width `tau` and shift `delta` is
//!
//! ```text
//! psi(t) = 2^(1/4) / (sqrt(tau) pi^(1/4)) * exp(j 2 pi f_c (t - delta)) * exp(-((t - delta) / tau)^2)
//! ```
//!
//! sampled at `t = 0..N` with `t - delta` taken as the circular offset in
//! `[-N/2, N/2)`. The envelope is truncated to `|t - delta| <= 4 tau` and the
//! samples are renormalized to unit l2 norm.

use std::f64::consts::{PI, SQRT_2};
use std::sync::OnceLock;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::signal::dft_slice;

/// Envelope truncation radius in units of `tau`.
pub const TRUNCATION_WIDTHS: f64 = 4.0;

/// Bandwidth reference constant for the -10 dB atom bandwidth.
pub const ALPHA_10DB: f64 = 0.33;

/// Parameters of a single Gabor atom (normalized frequency, samples).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AtomParams {
    pub center_freq: f64,
    pub width: f64,
    pub shift: f64,
}

impl AtomParams {
    pub fn new(center_freq: f64, width: f64, shift: f64) -> Result<Self> {
        if !(width > 0.0) || !width.is_finite() {
            return Err(Error::invalid(format!(
                "atom width must be positive, got {width}"
            )));
        }
        if !center_freq.is_finite() || !shift.is_finite() {
            return Err(Error::invalid("atom frequency and shift must be finite"));
        }
        Ok(Self {
            center_freq,
            width,
            shift,
        })
    }

    fn check_grid(&self, n: usize) -> Result<()> {
        if n < 2 {
            return Err(Error::invalid(format!(
                "grid length must be at least 2, got {n}"
            )));
        }
        if !(self.width > 0.0) {
            return Err(Error::invalid(format!(
                "atom width must be positive, got {}",
                self.width
            )));
        }
        if self.shift < 0.0 || self.shift >= n as f64 {
            return Err(Error::invalid(format!(
                "shift {} outside [0, {n})",
                self.shift
            )));
        }
        Ok(())
    }
}

/// -10 dB bandwidth of a Gaussian atom of width `tau`: `1 / (tau pi alpha sqrt 2)`.
pub fn bandwidth_10db(tau: f64) -> f64 {
    1.0 / (tau * PI * ALPHA_10DB * SQRT_2)
}

/// Width whose -10 dB bandwidth equals `bandwidth`.
pub fn width_for_bandwidth(bandwidth: f64) -> f64 {
    1.0 / (bandwidth * PI * ALPHA_10DB * SQRT_2)
}

/// Quality factor `f_c tau pi alpha sqrt 2`.
pub fn quality_factor(center_freq: f64, tau: f64) -> f64 {
    center_freq * tau * PI * ALPHA_10DB * SQRT_2
}

#[derive(Debug, Clone, PartialEq)]
pub struct WaveletAtom {
    params: AtomParams,
    samples: Vec<Complex64>,
}

impl WaveletAtom {
    /// Single-sample pulse at integer shift `shift`.
    pub fn dirac(shift: usize, n: usize) -> Result<Self> {
        // Truncation radius 0.5 keeps only the sample at the shift itself.
        gabor_atom(AtomParams::new(0.0, 0.125, shift as f64)?, n)
    }

    pub fn params(&self) -> &AtomParams {
        &self.params
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn norm(&self) -> f64 {
        self.samples
            .iter()
            .map(|c| c.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// Unitary DFT of the atom samples.
    pub fn spectrum(&self) -> Vec<Complex64> {
        dft_slice(&self.samples)
    }
}

fn circular_offset(t: usize, shift: f64, n: usize) -> f64 {
    let nf = n as f64;
    let d = (t as f64 - shift).rem_euclid(nf);
    if d >= nf / 2.0 {
        d - nf
    } else {
        d
    }
}

fn envelope_sample(p: &AtomParams, d: f64) -> Complex64 {
    let env = (-(d / p.width).powi(2)).exp();
    Complex64::from_polar(env, 2.0 * PI * p.center_freq * d)
}

fn normalize(p: AtomParams, mut samples: Vec<Complex64>) -> Result<WaveletAtom> {
    let norm = samples.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    if norm == 0.0 || !norm.is_finite() {
        return Err(Error::DegenerateAtom {
            index: None,
            reason: format!(
                "no grid point within {TRUNCATION_WIDTHS} widths of shift {} (width {})",
                p.shift, p.width
            ),
        });
    }
    samples.iter_mut().for_each(|c| *c /= norm);
    Ok(WaveletAtom { params: p, samples })
}

/// Compactly supported Gabor atom on the circular grid.
///
/// The truncated envelope must fit in half the grid so it never wraps onto
/// itself; wider atoms are available through [`gabor_atom_periodic`].
pub fn gabor_atom(p: AtomParams, n: usize) -> Result<WaveletAtom> {
    p.check_grid(n)?;
    let radius = TRUNCATION_WIDTHS * p.width;
    if radius > n as f64 / 2.0 {
        return Err(Error::invalid(format!(
            "truncation window 4*tau = {radius} exceeds half the grid ({})",
            n / 2
        )));
    }
    let samples = (0..n)
        .map(|t| {
            let d = circular_offset(t, p.shift, n);
            if d.abs() <= radius {
                envelope_sample(&p, d)
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
        .collect();
    normalize(p, samples)
}

/// Gabor atom periodized over the N-point grid: every image `t - delta + mN`
/// inside the truncation radius contributes. Identical to [`gabor_atom`]
/// whenever the truncated window fits in half the grid.
pub fn gabor_atom_periodic(p: AtomParams, n: usize) -> Result<WaveletAtom> {
    p.check_grid(n)?;
    let radius = TRUNCATION_WIDTHS * p.width;
    let nf = n as f64;
    let images = (radius / nf).ceil() as i64 + 1;
    let samples = (0..n)
        .map(|t| {
            let d0 = circular_offset(t, p.shift, n);
            (-images..=images)
                .map(|m| d0 + m as f64 * nf)
                .filter(|d| d.abs() <= radius)
                .map(|d| envelope_sample(&p, d))
                .sum()
        })
        .collect();
    normalize(p, samples)
}

/// Continuous-frequency closed form of the unit-norm Gabor atom spectrum:
/// `(tau sqrt(2 pi))^(1/2) exp(-j 2 pi delta f) exp(-(pi tau (f - f_c))^2)`.
pub fn gabor_spectrum(p: &AtomParams, f: f64) -> Complex64 {
    let peak = (p.width * (2.0 * PI).sqrt()).sqrt();
    let env = (-(PI * p.width * (f - p.center_freq)).powi(2)).exp();
    Complex64::from_polar(peak * env, -2.0 * PI * p.shift * f)
}

/// C-Morlet family with constant quality factor across scales.
#[derive(Debug, Clone, PartialEq)]
pub struct MorletFamily {
    q: f64,
    scales: Vec<(f64, f64)>,
}

impl MorletFamily {
    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn alpha(&self) -> f64 {
        ALPHA_10DB
    }

    /// `(center_freq, width)` per scale.
    pub fn scales(&self) -> &[(f64, f64)] {
        &self.scales
    }

    /// -10 dB bandwidth of each scale (`f_c / Q`).
    pub fn bandwidths(&self) -> Vec<f64> {
        self.scales
            .iter()
            .map(|&(_, tau)| bandwidth_10db(tau))
            .collect()
    }

    /// One atom per scale, all at the same shift.
    pub fn atoms(&self, shift: f64, n: usize) -> Result<Vec<WaveletAtom>> {
        self.scales
            .iter()
            .map(|&(fc, tau)| gabor_atom(AtomParams::new(fc, tau, shift)?, n))
            .collect()
    }
}

pub fn morlet_family(q: f64, center_freqs: &[f64]) -> Result<MorletFamily> {
    if !(q > 0.0) || !q.is_finite() {
        return Err(Error::invalid(format!(
            "quality factor must be positive, got {q}"
        )));
    }
    let scales = center_freqs
        .iter()
        .map(|&fc| {
            if !(fc > 0.0 && fc <= 0.5) {
                return Err(Error::invalid(format!(
                    "center frequency {fc} outside (0, 1/2]"
                )));
            }
            Ok((fc, q / (fc * PI * ALPHA_10DB * SQRT_2)))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(MorletFamily { q, scales })
}

/// A stack of unit-norm atoms on a common grid.
///
/// The analysis matrix `W^H` has one conjugated atom per row; its Fourier
/// image `W^H F^H` is computed on first use and cached.
#[derive(Debug, Clone)]
pub struct WaveletFrame {
    atoms: Vec<WaveletAtom>,
    n: usize,
    fourier: OnceLock<DMatrix<Complex64>>,
}

impl WaveletFrame {
    pub fn from_atoms(atoms: Vec<WaveletAtom>) -> Result<Self> {
        let n = match atoms.first() {
            Some(a) => a.len(),
            None => return Err(Error::invalid("frame needs at least one atom")),
        };
        if let Some(bad) = atoms.iter().find(|a| a.len() != n) {
            return Err(Error::DimensionMismatch {
                expected: n,
                actual: bad.len(),
            });
        }
        Ok(Self {
            atoms,
            n,
            fourier: OnceLock::new(),
        })
    }

    pub fn atoms(&self) -> &[WaveletAtom] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    /// Grid length N.
    pub fn n(&self) -> usize {
        self.n
    }

    /// `W^H`: W x N, row `i` is the conjugate of atom `i`.
    pub fn analysis_matrix(&self) -> DMatrix<Complex64> {
        DMatrix::from_fn(self.atoms.len(), self.n, |i, t| {
            self.atoms[i].samples[t].conj()
        })
    }

    /// `W^H F^H`: row `i` is the conjugate of the unitary DFT of atom `i`.
    pub fn fourier_image(&self) -> &DMatrix<Complex64> {
        self.fourier.get_or_init(|| {
            let mut m = DMatrix::zeros(self.atoms.len(), self.n);
            for (i, atom) in self.atoms.iter().enumerate() {
                for (k, c) in atom.spectrum().into_iter().enumerate() {
                    m[(i, k)] = c.conj();
                }
            }
            m
        })
    }
}

impl PartialEq for WaveletFrame {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.atoms == other.atoms
    }
}

pub fn build_frame(params: &[AtomParams], n: usize) -> Result<WaveletFrame> {
    if params.is_empty() {
        return Err(Error::invalid("frame needs at least one atom"));
    }
    let atoms = params
        .iter()
        .enumerate()
        .map(|(i, p)| {
            gabor_atom(*p, n).map_err(|e| match e {
                Error::DegenerateAtom { reason, .. } => Error::DegenerateAtom {
                    index: Some(i),
                    reason,
                },
                other => other,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    WaveletFrame::from_atoms(atoms)
}

/// Full Gabor grid: every integer shift for each center frequency,
/// frequency-major.
pub fn gabor_grid_params(n: usize, width: f64, center_freqs: &[f64]) -> Result<Vec<AtomParams>> {
    center_freqs
        .iter()
        .flat_map(|&fc| (0..n).map(move |d| AtomParams::new(fc, width, d as f64)))
        .collect()
}
