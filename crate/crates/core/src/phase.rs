//! Empirical recovery phase transitions and the l1 weak-threshold curve.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::recovery::{omp, support_success};
use crate::seed::seed_derive;
use crate::sensing::{effective_matrix, measure, NuwbsLayout};
use crate::signal::{make_multiband_signal, SubBandSpec};

/// One point of the weak phase-transition curve. `k_ratio = delta * rho` is
/// the curve expressed as `K / N` rather than `K / M`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DtPoint {
    pub delta: f64,
    pub rho: f64,
    pub k_ratio: f64,
}

fn phi(z: f64) -> f64 {
    (-0.5 * z * z).exp() / (2.0 * PI).sqrt()
}

/// Upper Gaussian tail `P(Z > z)`.
fn upper_tail(z: f64) -> f64 {
    0.5 * libm::erfc(z / std::f64::consts::SQRT_2)
}

/// Parametric form of the real, signed weak threshold: as `z` runs over
/// `(0, inf)` the pair sweeps `delta` from 1 down to 0.
fn threshold_at(z: f64) -> (f64, f64) {
    let p = phi(z);
    let tail = upper_tail(z);
    let delta = 2.0 * p / (z + 2.0 * (p - z * tail));
    let rho = 1.0 - z * tail / p;
    (delta, rho)
}

/// Weak threshold `rho(delta)` for sparse recovery by l1 minimization with
/// Gaussian measurements, real signed signals.
pub fn dt_rho(delta: f64) -> Result<f64> {
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(Error::invalid(format!(
            "delta must be in (0, 1], got {delta}"
        )));
    }
    if delta == 1.0 {
        return Ok(1.0);
    }
    // delta(z) is decreasing; phi underflows a little past z = 37
    let (mut lo, mut hi) = (0.0f64, 37.0f64);
    if threshold_at(hi).0 >= delta {
        return Ok(threshold_at(hi).1);
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if threshold_at(mid).0 > delta {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * hi.max(1.0) {
            break;
        }
    }
    Ok(threshold_at(0.5 * (lo + hi)).1)
}

pub fn dt_curve(deltas: &[f64]) -> Result<Vec<DtPoint>> {
    deltas
        .iter()
        .map(|&delta| {
            let rho = dt_rho(delta)?;
            Ok(DtPoint {
                delta,
                rho,
                k_ratio: delta * rho,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhaseTransitionConfig {
    pub spec: SubBandSpec,
    pub gamma: usize,
    /// Atom width on each branch.
    pub widths: Vec<f64>,
    /// Measurement counts M.
    pub m_grid: Vec<usize>,
    /// Sparsity levels K.
    pub k_grid: Vec<usize>,
    pub trials: usize,
    /// `f64::INFINITY` for noiseless runs.
    pub snr_db: f64,
    pub master_seed: u64,
}

impl PhaseTransitionConfig {
    pub fn validate(&self) -> Result<()> {
        if self.m_grid.is_empty() || self.k_grid.is_empty() {
            return Err(Error::invalid("M and K grids must not be empty"));
        }
        if self.trials == 0 {
            return Err(Error::invalid("trials must be at least 1"));
        }
        if self.m_grid.contains(&0) {
            return Err(Error::invalid("M grid values must be at least 1"));
        }
        let sigma = self.spec.occupied_bins();
        if let Some(&k) = self.k_grid.iter().find(|&&k| k > sigma) {
            return Err(Error::invalid(format!(
                "K = {k} exceeds the {sigma} occupied bins"
            )));
        }
        if self.snr_db.is_nan() {
            return Err(Error::invalid("SNR must not be NaN"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhaseTransitionGrid {
    pub m_values: Vec<usize>,
    pub k_values: Vec<usize>,
    /// `M / |Sigma|`.
    pub m_axis: Vec<f64>,
    /// `K / |Sigma|`.
    pub k_axis: Vec<f64>,
    /// `success[i][j]` for `m_values[i]`, `k_values[j]`; NaN where the cell
    /// is unattainable.
    pub success: Vec<Vec<f64>>,
    /// False where M exceeds the available comb slots.
    pub feasible: Vec<bool>,
    pub trials: usize,
    pub dt_curve: Vec<DtPoint>,
}

impl PhaseTransitionGrid {
    /// Binomial standard error of a cell's success rate.
    pub fn std_error(&self, i: usize, j: usize) -> f64 {
        let p = self.success[i][j];
        (p * (1.0 - p) / self.trials as f64).sqrt()
    }
}

/// Runs `trials` seeded recoveries per (M, K) cell. Each trial punctures the
/// full comb to exactly M atoms, draws a fresh K-sparse signal, measures and
/// recovers it with OMP restricted to Sigma. Trial streams are keyed on
/// `(M, K, trial)` so the grid does not depend on scheduling.
pub fn phase_transition(cfg: &PhaseTransitionConfig) -> Result<PhaseTransitionGrid> {
    cfg.validate()?;
    let layout = NuwbsLayout::new(&cfg.spec, &cfg.widths, cfg.gamma)?;
    let slots = layout.total_slots();
    let sigma = cfg.spec.support();
    let occupied = sigma.len() as f64;

    let cells: Vec<(usize, usize)> = (0..cfg.m_grid.len())
        .flat_map(|i| (0..cfg.k_grid.len()).map(move |j| (i, j)))
        .collect();
    let rates = cells
        .par_iter()
        .map(|&(i, j)| {
            let m = cfg.m_grid[i];
            if m > slots {
                return Ok(f64::NAN);
            }
            let k = cfg.k_grid[j];
            let keep = m as f64 / slots as f64;
            let mut hits = 0usize;
            for trial in 0..cfg.trials {
                let mut rng = seed_derive(cfg.master_seed, &[m as u64, k as u64, trial as u64]);
                let plan = layout.select(keep, &mut rng)?;
                let (truth, x) = make_multiband_signal(&cfg.spec, k, &mut rng)?;
                let y = measure(&plan, &x, cfg.snr_db, &mut rng)?;
                let result = omp(&effective_matrix(&plan), &y, k, &sigma)?;
                hits += usize::from(support_success(&result, &truth));
            }
            Ok(hits as f64 / cfg.trials as f64)
        })
        .collect::<Result<Vec<f64>>>()?;

    let success = rates
        .chunks(cfg.k_grid.len())
        .map(<[f64]>::to_vec)
        .collect();
    let m_axis: Vec<f64> = cfg.m_grid.iter().map(|&m| m as f64 / occupied).collect();
    let deltas: Vec<f64> = m_axis.iter().map(|&d| d.min(1.0)).collect();
    Ok(PhaseTransitionGrid {
        m_values: cfg.m_grid.clone(),
        k_values: cfg.k_grid.clone(),
        k_axis: cfg.k_grid.iter().map(|&k| k as f64 / occupied).collect(),
        feasible: cfg.m_grid.iter().map(|&m| m <= slots).collect(),
        success,
        trials: cfg.trials,
        dt_curve: dt_curve(&deltas)?,
        m_axis,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Independent route: `rho(delta) = max_z [1 - (2/delta) A(z)] /
    /// [1 + z^2 - 2 A(z)]` with `A(z) = int_z^inf (w - z)^2 phi(w) dw`
    /// evaluated by composite Simpson quadrature.
    fn rho_by_quadrature(delta: f64) -> f64 {
        let a = |z: f64| {
            let steps = 4000;
            let h = 12.0 / steps as f64;
            let f = |w: f64| (w - z).powi(2) * phi(w);
            let mut s = f(z) + f(z + 12.0);
            for i in 1..steps {
                let w = z + i as f64 * h;
                s += if i % 2 == 1 { 4.0 } else { 2.0 } * f(w);
            }
            s * h / 3.0
        };
        let objective = |z: f64| {
            let az = a(z);
            (1.0 - 2.0 / delta * az) / (1.0 + z * z - 2.0 * az)
        };
        // coarse scan, then golden-section refinement
        let mut best = 0.0;
        let mut best_val = f64::NEG_INFINITY;
        for i in 0..=600 {
            let z = i as f64 * 0.01;
            let v = objective(z);
            if v > best_val {
                best_val = v;
                best = z;
            }
        }
        let (mut lo, mut hi) = ((best - 0.01f64).max(0.0), best + 0.01);
        let g = (5f64.sqrt() - 1.0) / 2.0;
        for _ in 0..80 {
            let c = hi - g * (hi - lo);
            let d = lo + g * (hi - lo);
            if objective(c) > objective(d) {
                hi = d;
            } else {
                lo = c;
            }
        }
        objective(0.5 * (lo + hi))
    }

    #[test]
    fn closed_form_matches_quadrature() {
        for delta in [0.1, 0.25, 0.5, 0.75, 0.9] {
            let a = dt_rho(delta).unwrap();
            let b = rho_by_quadrature(delta);
            assert!((a - b).abs() < 1e-4, "delta {delta}: {a} vs {b}");
        }
    }

    #[test]
    fn endpoints() {
        assert_eq!(dt_rho(1.0).unwrap(), 1.0);
        assert!(dt_rho(1e-6).unwrap() < 0.05);
        assert!(dt_rho(0.0).is_err());
        assert!(dt_rho(-0.5).is_err());
        assert!(dt_rho(1.5).is_err());
    }

    #[test]
    fn curve_is_increasing() {
        let deltas: Vec<f64> = (1..=100).map(|i| i as f64 / 100.0).collect();
        let curve = dt_curve(&deltas).unwrap();
        for w in curve.windows(2) {
            assert!(w[1].rho > w[0].rho);
            assert!(w[1].k_ratio > w[0].k_ratio);
        }
        for p in &curve {
            assert!((p.k_ratio - p.delta * p.rho).abs() < 1e-15);
        }
    }

    fn small_config() -> PhaseTransitionConfig {
        PhaseTransitionConfig {
            spec: SubBandSpec::new(256, vec![48..64, 160..176]).unwrap(),
            gamma: 16,
            widths: vec![4.0, 4.0],
            m_grid: vec![8, 32, 40],
            k_grid: vec![0, 2, 24],
            trials: 12,
            snr_db: f64::INFINITY,
            master_seed: 7,
        }
    }

    #[test]
    fn grid_shape_and_flags() {
        let grid = phase_transition(&small_config()).unwrap();
        assert_eq!(grid.success.len(), 3);
        assert_eq!(grid.feasible, vec![true, true, false]);
        assert!(grid.success[2].iter().all(|v| v.is_nan()));
        assert_eq!(grid.success[0][0], 1.0);
        assert_eq!(grid.success[1][0], 1.0);
        assert_eq!(grid.success[1][1], 1.0);
        for row in &grid.success[..2] {
            for &p in row {
                assert!((0.0..=1.0).contains(&p));
            }
        }
        assert_eq!(grid.m_axis, vec![0.25, 1.0, 1.25]);
        assert_eq!(grid.dt_curve[2].rho, 1.0);
    }

    #[test]
    fn grid_is_deterministic() {
        let a = phase_transition(&small_config()).unwrap();
        let b = phase_transition(&small_config()).unwrap();
        for (ra, rb) in a.success.iter().zip(&b.success) {
            for (x, y) in ra.iter().zip(rb) {
                assert_eq!(x.to_bits(), y.to_bits());
            }
        }
    }

    #[test]
    fn config_validation() {
        let mut c = small_config();
        c.trials = 0;
        assert!(phase_transition(&c).is_err());
        let mut c = small_config();
        c.k_grid = vec![33];
        assert!(phase_transition(&c).is_err());
        let mut c = small_config();
        c.m_grid.clear();
        assert!(phase_transition(&c).is_err());
        let mut c = small_config();
        c.widths = vec![5.0, 4.0];
        assert!(matches!(
            phase_transition(&c),
            Err(Error::PlanInfeasible { branch: 0, .. })
        ));
    }
}
