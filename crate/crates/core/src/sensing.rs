//! Measurement plans and effective sensing matrices.
//!
//! A plan selects `M` rows Omega of an acquisition system. For NUS the rows
//! are Nyquist time samples; for NUWS/NUWBS they are atoms of a
//! [`WaveletFrame`]. The effective matrix maps the DFT coefficients `s` of
//! `x = F^H s` to the measurements: `Theta = R_Omega W^H F^H` (or
//! `R_Omega F^H` for NUS).

use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::seq::index;
use rand::Rng;

use crate::error::{Error, Result};
use crate::signal::{add_noise_to, Signal, SubBandSpec};
use crate::wavelet::{gabor_atom, AtomParams, WaveletFrame, TRUNCATION_WIDTHS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AcquisitionMode {
    Nus,
    Nuws,
    Nuwbs,
}

impl std::fmt::Display for AcquisitionMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            AcquisitionMode::Nus => "nus",
            AcquisitionMode::Nuws => "nuws",
            AcquisitionMode::Nuwbs => "nuwbs",
        })
    }
}

#[derive(Debug, Clone)]
pub struct MeasurementPlan {
    mode: AcquisitionMode,
    n: usize,
    omega: Vec<usize>,
    frame: Option<Arc<WaveletFrame>>,
    nuwbs: Option<NuwbsSelection>,
}

#[derive(Debug, Clone, PartialEq)]
struct NuwbsSelection {
    gamma: usize,
    puncture_keep: f64,
    branch_of: Vec<usize>,
}

impl MeasurementPlan {
    pub fn mode(&self) -> AcquisitionMode {
        self.mode
    }

    /// Grid length N.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of measurements M = |Omega|.
    pub fn m(&self) -> usize {
        self.omega.len()
    }

    pub fn omega(&self) -> &[usize] {
        &self.omega
    }

    pub fn frame(&self) -> Option<&Arc<WaveletFrame>> {
        self.frame.as_ref()
    }

    /// Sub-sampling ratio (NUWBS only).
    pub fn gamma(&self) -> Option<usize> {
        self.nuwbs.as_ref().map(|s| s.gamma)
    }

    /// Fraction of comb slots kept after puncturing (NUWBS only).
    pub fn puncture_keep(&self) -> Option<f64> {
        self.nuwbs.as_ref().map(|s| s.puncture_keep)
    }

    /// Branch (sub-band) of each selected measurement (NUWBS only).
    pub fn branches(&self) -> Option<&[usize]> {
        self.nuwbs.as_ref().map(|s| s.branch_of.as_slice())
    }
}

/// Plan sampling the Nyquist grid at the time indices in `omega`.
pub fn nus_plan(omega: &[usize], n: usize) -> Result<MeasurementPlan> {
    if omega.is_empty() {
        return Err(Error::invalid("NUS plan needs at least one sample"));
    }
    check_indices(omega, n, "time sample")?;
    Ok(MeasurementPlan {
        mode: AcquisitionMode::Nus,
        n,
        omega: omega.to_vec(),
        frame: None,
        nuwbs: None,
    })
}

/// Plan selecting arbitrary rows of `frame`; overlapping atoms are allowed.
pub fn nuws_plan(frame: Arc<WaveletFrame>, omega: &[usize]) -> Result<MeasurementPlan> {
    if omega.is_empty() {
        return Err(Error::invalid("NUWS plan needs at least one atom"));
    }
    check_indices(omega, frame.len(), "frame row")?;
    Ok(MeasurementPlan {
        mode: AcquisitionMode::Nuws,
        n: frame.n(),
        omega: omega.to_vec(),
        frame: Some(frame),
        nuwbs: None,
    })
}

fn check_indices(omega: &[usize], bound: usize, what: &str) -> Result<()> {
    let mut seen = vec![false; bound];
    for &i in omega {
        if i >= bound {
            return Err(Error::invalid(format!(
                "{what} index {i} out of range 0..{bound}"
            )));
        }
        if std::mem::replace(&mut seen[i], true) {
            return Err(Error::invalid(format!("duplicate {what} index {i}")));
        }
    }
    Ok(())
}

/// The full NUWBS wavelet comb before puncturing: one branch per sub-band,
/// each with a fixed center frequency at the band's center bin and shifts
/// on a `gamma`-strided grid.
#[derive(Debug, Clone)]
pub struct NuwbsLayout {
    frame: Arc<WaveletFrame>,
    gamma: usize,
    slots_per_branch: usize,
    branches: usize,
}

impl NuwbsLayout {
    /// `widths[b]` is the atom width used on branch `b`.
    pub fn new(spec: &SubBandSpec, widths: &[f64], gamma: usize) -> Result<Self> {
        let n = spec.n();
        if gamma < 1 || gamma > n {
            return Err(Error::invalid(format!(
                "gamma must be in 1..={n}, got {gamma}"
            )));
        }
        if widths.len() != spec.bands().len() {
            return Err(Error::DimensionMismatch {
                expected: spec.bands().len(),
                actual: widths.len(),
            });
        }
        let slots = n / gamma;
        let mut atoms = Vec::with_capacity(slots * widths.len());
        for (b, &tau) in widths.iter().enumerate() {
            let span = TRUNCATION_WIDTHS * tau;
            if !(tau > 0.0) || span > gamma as f64 {
                return Err(Error::PlanInfeasible {
                    branch: b,
                    reason: format!(
                        "truncation radius 4*tau = {span} exceeds shift spacing gamma = {gamma}"
                    ),
                });
            }
            let fc = spec.center_freq(b);
            for k in 0..slots {
                let p = AtomParams::new(fc, tau, (k * gamma) as f64)?;
                atoms.push(gabor_atom(p, n).map_err(|e| Error::PlanInfeasible {
                    branch: b,
                    reason: e.to_string(),
                })?);
            }
        }
        Ok(Self {
            frame: Arc::new(WaveletFrame::from_atoms(atoms)?),
            gamma,
            slots_per_branch: slots,
            branches: widths.len(),
        })
    }

    pub fn frame(&self) -> &Arc<WaveletFrame> {
        &self.frame
    }

    pub fn gamma(&self) -> usize {
        self.gamma
    }

    pub fn branches(&self) -> usize {
        self.branches
    }

    pub fn slots_per_branch(&self) -> usize {
        self.slots_per_branch
    }

    pub fn total_slots(&self) -> usize {
        self.slots_per_branch * self.branches
    }

    /// Punctures the comb, keeping `round(keep * total_slots)` atoms split as
    /// evenly as possible over branches (lower branches take the remainder).
    /// Within a branch the kept shifts are drawn uniformly without
    /// replacement and listed in time order.
    pub fn select<R: Rng + ?Sized>(&self, keep: f64, rng: &mut R) -> Result<MeasurementPlan> {
        if !(keep > 0.0 && keep <= 1.0) {
            return Err(Error::invalid(format!(
                "puncture fraction must be in (0, 1], got {keep}"
            )));
        }
        let total = ((keep * self.total_slots() as f64).round() as usize).max(1);
        let base = total / self.branches;
        let extra = total % self.branches;
        let mut omega = Vec::with_capacity(total);
        let mut branch_of = Vec::with_capacity(total);
        for b in 0..self.branches {
            let count = base + usize::from(b < extra);
            let offset = b * self.slots_per_branch;
            if count == self.slots_per_branch {
                omega.extend(offset..offset + count);
            } else {
                let mut picked = index::sample(rng, self.slots_per_branch, count).into_vec();
                picked.sort_unstable();
                omega.extend(picked.into_iter().map(|k| offset + k));
            }
            branch_of.extend(std::iter::repeat_n(b, count));
        }
        Ok(MeasurementPlan {
            mode: AcquisitionMode::Nuwbs,
            n: self.frame.n(),
            omega,
            frame: Some(Arc::clone(&self.frame)),
            nuwbs: Some(NuwbsSelection {
                gamma: self.gamma,
                puncture_keep: keep,
                branch_of,
            }),
        })
    }
}

/// NUWBS plan with a common atom width on every branch.
pub fn nuwbs_plan<R: Rng + ?Sized>(
    spec: &SubBandSpec,
    tau: f64,
    gamma: usize,
    puncture_keep: f64,
    rng: &mut R,
) -> Result<MeasurementPlan> {
    let widths = vec![tau; spec.bands().len()];
    NuwbsLayout::new(spec, &widths, gamma)?.select(puncture_keep, rng)
}

/// `Theta` together with the mode of the plan that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct EffectiveSensingMatrix {
    entries: DMatrix<Complex64>,
    mode: AcquisitionMode,
}

impl EffectiveSensingMatrix {
    pub fn new(entries: DMatrix<Complex64>, mode: AcquisitionMode) -> Self {
        Self { entries, mode }
    }

    pub fn entries(&self) -> &DMatrix<Complex64> {
        &self.entries
    }

    pub fn mode(&self) -> AcquisitionMode {
        self.mode
    }

    pub fn nrows(&self) -> usize {
        self.entries.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.entries.ncols()
    }

    /// `Theta s`.
    pub fn apply(&self, s: &[Complex64]) -> Result<Vec<Complex64>> {
        if s.len() != self.ncols() {
            return Err(Error::DimensionMismatch {
                expected: self.ncols(),
                actual: s.len(),
            });
        }
        Ok((0..self.nrows())
            .map(|i| self.entries.row(i).iter().zip(s).map(|(a, b)| a * b).sum())
            .collect())
    }
}

pub fn effective_matrix(plan: &MeasurementPlan) -> EffectiveSensingMatrix {
    let m = plan.m();
    let n = plan.n();
    let entries = match plan.frame() {
        None => {
            let scale = 1.0 / (n as f64).sqrt();
            DMatrix::from_fn(m, n, |i, k| {
                let t = plan.omega[i];
                // reduce k*t mod n before scaling to keep the phase exact
                let phase = 2.0 * PI * ((k * t) % n) as f64 / n as f64;
                Complex64::from_polar(scale, phase)
            })
        }
        Some(frame) => {
            let image = frame.fourier_image();
            DMatrix::from_fn(m, n, |i, k| image[(plan.omega[i], k)])
        }
    };
    EffectiveSensingMatrix::new(entries, plan.mode())
}

/// Acquires `y = R_Omega W^H x` (or `R_Omega x`) in the time domain and adds
/// measurement-domain noise at `snr_db` (`f64::INFINITY` for noiseless).
pub fn measure<R: Rng + ?Sized>(
    plan: &MeasurementPlan,
    x: &Signal,
    snr_db: f64,
    rng: &mut R,
) -> Result<Vec<Complex64>> {
    if x.len() != plan.n() {
        return Err(Error::DimensionMismatch {
            expected: plan.n(),
            actual: x.len(),
        });
    }
    let samples = x.samples();
    let clean: Vec<Complex64> = match plan.frame() {
        None => plan.omega.iter().map(|&t| samples[t]).collect(),
        Some(frame) => plan
            .omega
            .iter()
            .map(|&i| {
                frame.atoms()[i]
                    .samples()
                    .iter()
                    .zip(samples)
                    .map(|(w, v)| v * w.conj())
                    .sum()
            })
            .collect(),
    };
    add_noise_to(&clean, snr_db, rng)
}
