//! Plot-ready CSV tables with fixed column order.
//!
//! Numbers use Rust's shortest round-trip formatting, so identical results
//! give identical bytes. Unattainable cells are written as `NaN`.

use std::fmt::Write;

use crate::bandpass::RejectionCurve;
use crate::coherence::CoherenceCurve;
use crate::phase::{DtPoint, PhaseTransitionGrid};

pub const PHASE_HEADER: &str = "m_ratio,k_ratio,success_rate,trials";
pub const DT_HEADER: &str = "delta,rho,k_ratio";
pub const COHERENCE_HEADER: &str = "bwp_over_bwrf,mu,welch_bound";
pub const REJECTION_HEADER: &str = "offset,h_wbs_sim_db,h_wbs_analytic_db,h_cwt_db,sinc_db";

/// One row per (M, K) cell, M-major.
pub fn phase_csv(grid: &PhaseTransitionGrid) -> String {
    let mut out = format!("{PHASE_HEADER}\n");
    for (i, m) in grid.m_axis.iter().enumerate() {
        for (j, k) in grid.k_axis.iter().enumerate() {
            writeln!(out, "{m},{k},{},{}", grid.success[i][j], grid.trials).unwrap();
        }
    }
    out
}

pub fn dt_csv(points: &[DtPoint]) -> String {
    let mut out = format!("{DT_HEADER}\n");
    for p in points {
        writeln!(out, "{},{},{}", p.delta, p.rho, p.k_ratio).unwrap();
    }
    out
}

pub fn coherence_csv(curve: &CoherenceCurve) -> String {
    let mut out = format!("{COHERENCE_HEADER}\n");
    for (r, mu) in curve.ratios.iter().zip(&curve.coherences) {
        writeln!(out, "{r},{mu},{}", curve.bound).unwrap();
    }
    out
}

/// Offsets are multiplied by `offset_scale` (1 for normalized units, the
/// Nyquist rate in Hz for physical ones).
pub fn rejection_csv(curve: &RejectionCurve, offset_scale: f64) -> String {
    let mut out = format!("{REJECTION_HEADER}\n");
    for i in 0..curve.len() {
        writeln!(
            out,
            "{},{},{},{},{}",
            curve.offsets[i] * offset_scale,
            curve.h_wbs_sim_db[i],
            curve.h_wbs_analytic_db[i],
            curve.h_cwt_db[i],
            curve.sinc_db[i]
        )
        .unwrap();
    }
    out
}
