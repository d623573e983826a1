//! Simulation and analysis of non-uniform wavelet sampling (NUWS) and
//! non-uniform wavelet bandpass sampling (NUWBS) for sparse multi-band RF
//! signals.
//!
//! All frequencies are normalized to the Nyquist rate (`f_Nyq = 1`), so bin
//! `k` of an `N`-point grid sits at normalized frequency `k / N`. Time is
//! measured in Nyquist samples. The DFT is unitary in both directions.
//!
//! Module map:
//!
//! - [`signal`]: signal/spectrum types, unitary DFT pair, multi-band synthesis, noise
//! - [`wavelet`]: Gabor atoms, C-Morlet families, analysis frames
//! - [`sensing`]: NUS / NUWS / NUWBS measurement plans and effective sensing matrices
//! - [`coherence`]: mutual and local coherence, bandwidth sweeps
//! - [`recovery`]: support-restricted OMP and scoring
//! - [`phase`]: empirical phase transitions and the l1 weak-threshold reference curve
//! - [`bandpass`]: time-domain serial wavelet bandpass sampling and its equivalent filters
//! - [`seed`]: deterministic per-trial generator derivation
//! - [`report`]: CSV emission of experiment results

pub mod bandpass;
pub mod coherence;
mod error;
pub mod phase;
pub mod recovery;
pub mod report;
pub mod seed;
pub mod sensing;
pub mod signal;
pub mod wavelet;

pub use num_complex::Complex64;

pub use crate::bandpass::{
    h_cwt, h_wbs, mix_integrate_decimate, rejection_sweep, sinc, wavelet_comb, IntegrationWindow,
    PipelineConfig, PulseShape, RejectionCurve,
};
pub use crate::coherence::{
    coherence_sweep, local_mutual_coherence, mutual_coherence, CoherenceCurve,
};
pub use crate::error::{Error, Result};
pub use crate::phase::{
    dt_curve, phase_transition, DtPoint, PhaseTransitionConfig, PhaseTransitionGrid,
};
pub use crate::recovery::{omp, support_success, RecoveryResult};
pub use crate::seed::{seed_derive, SeededRng};
pub use crate::sensing::{
    effective_matrix, measure, nus_plan, nuwbs_plan, nuws_plan, AcquisitionMode,
    EffectiveSensingMatrix, MeasurementPlan, NuwbsLayout,
};
pub use crate::signal::{
    add_noise, dft, idft, make_multiband_signal, Signal, SparseSpectrum, Spectrum, SubBandSpec,
};
pub use crate::wavelet::{
    build_frame, gabor_atom, gabor_atom_periodic, gabor_spectrum, morlet_family, AtomParams,
    MorletFamily, WaveletAtom, WaveletFrame,
};
