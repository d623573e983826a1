//! Serial wavelet bandpass sampling: a wavelet comb mixes the input down,
//! an integrate-and-dump stage integrates over each comb period, and the
//! result is read out at the comb rate `f_s = 1 / T_s`.
//!
//! Time is in Nyquist samples and frequency in cycles per Nyquist sample.
//! Continuous-time signals live on a grid with `oversample` points per
//! Nyquist sample. Comb period `n` is the interval `[n T_s, (n + 1) T_s]`
//! and its pulse is centered at `(n + 1/2) T_s`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::wavelet::TRUNCATION_WIDTHS;

/// Terms of the mixture-of-sincs response whose Gaussian weight falls
/// below this are dropped.
pub const WBS_WEIGHT_FLOOR: f64 = 1e-12;

/// Comb periods simulated per sweep point.
const SIM_PERIODS: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PulseShape {
    /// Truncated Gaussian-windowed carrier.
    Gabor,
    /// Single grid point carrying unit area.
    Dirac,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IntegrationWindow {
    /// Integrate-and-dump over the whole comb period.
    Period,
    /// Integrate each pulse over its own truncated support only.
    AtomSupport,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    /// Decimation ratio `f_Nyq / f_s`; also `T_s` in Nyquist samples.
    pub kappa: usize,
    /// Pulse width in Nyquist samples.
    pub tau: f64,
    pub center_freq: f64,
    /// Simulation grid points per Nyquist sample.
    pub oversample: usize,
    pub pulse: PulseShape,
    pub window: IntegrationWindow,
    /// Physical comb rate in Hz, for labelling outputs.
    pub f_s_hz: Option<f64>,
}

impl PipelineConfig {
    /// `T_s = 4 tau` with `kappa = 16`, carrier at `2 f_s` and a 1 GHz comb.
    pub fn preset() -> Self {
        let kappa = 16;
        Self {
            kappa,
            tau: kappa as f64 / 4.0,
            center_freq: 2.0 / kappa as f64,
            oversample: 8,
            pulse: PulseShape::Gabor,
            window: IntegrationWindow::Period,
            f_s_hz: Some(1e9),
        }
    }

    pub fn t_s(&self) -> f64 {
        self.kappa as f64
    }

    pub fn f_s(&self) -> f64 {
        1.0 / self.kappa as f64
    }

    /// Grid points per comb period.
    pub fn period_points(&self) -> usize {
        self.kappa * self.oversample
    }

    pub fn step(&self) -> f64 {
        1.0 / self.oversample as f64
    }

    /// Nyquist rate in Hz when a physical comb rate is set.
    pub fn f_nyq_hz(&self) -> Option<f64> {
        self.f_s_hz.map(|f| f * self.kappa as f64)
    }

    pub fn validate(&self) -> Result<()> {
        if self.kappa == 0 {
            return Err(Error::invalid("kappa must be at least 1"));
        }
        if self.oversample == 0 {
            return Err(Error::invalid("oversample must be at least 1"));
        }
        if !(0.0..=0.5).contains(&self.center_freq) {
            return Err(Error::invalid(format!(
                "center frequency must be in [0, 0.5], got {}",
                self.center_freq
            )));
        }
        if let Some(f) = self.f_s_hz {
            if !(f > 0.0 && f.is_finite()) {
                return Err(Error::invalid(format!(
                    "physical comb rate must be positive, got {f}"
                )));
            }
        }
        match self.pulse {
            PulseShape::Gabor => {
                if !(self.tau > 0.0 && self.tau.is_finite()) {
                    return Err(Error::invalid(format!(
                        "tau must be positive, got {}",
                        self.tau
                    )));
                }
                if TRUNCATION_WIDTHS * self.tau > self.t_s() {
                    return Err(Error::CombOverlap(format!(
                        "truncation radius 4*tau = {} exceeds T_s = {}",
                        TRUNCATION_WIDTHS * self.tau,
                        self.t_s()
                    )));
                }
            }
            PulseShape::Dirac => {
                if !self.period_points().is_multiple_of(2) {
                    return Err(Error::invalid(
                        "Dirac pulses need an even number of grid points per period",
                    ));
                }
            }
        }
        Ok(())
    }

    fn radius(&self) -> f64 {
        match self.pulse {
            PulseShape::Gabor => TRUNCATION_WIDTHS * self.tau,
            PulseShape::Dirac => 0.0,
        }
    }

    /// Pulse `p(d)` at offset `d` from its center, for Gabor pulses.
    fn gabor(&self, d: f64) -> Complex64 {
        let envelope = (-(d / self.tau).powi(2)).exp();
        Complex64::from_polar(envelope, 2.0 * PI * self.center_freq * d)
    }
}

fn pulse_center(cfg: &PipelineConfig, n: i64) -> f64 {
    (n as f64 + 0.5) * cfg.t_s()
}

/// Adds pulse `n` into `out`, a grid starting at t = 0.
fn add_pulse(cfg: &PipelineConfig, n: i64, out: &mut [Complex64]) {
    let h = cfg.step();
    let c = pulse_center(cfg, n);
    match cfg.pulse {
        PulseShape::Dirac => {
            let i = (c / h).round();
            if i >= 0.0 && (i as usize) < out.len() {
                out[i as usize] += Complex64::new(1.0 / h, 0.0);
            }
        }
        PulseShape::Gabor => {
            let r = cfg.radius();
            let lo = ((c - r) / h).ceil().max(0.0) as usize;
            let hi = ((c + r) / h).floor();
            if hi < 0.0 {
                return;
            }
            let hi = (hi as usize).min(out.len().saturating_sub(1));
            for (i, v) in out.iter_mut().enumerate().take(hi + 1).skip(lo) {
                let d = i as f64 * h - c;
                if d.abs() <= r {
                    *v += cfg.gabor(d);
                }
            }
        }
    }
}

/// Samples of `p_c(t) = sum_n p(t - (n + 1/2) T_s)` on the grid covering
/// `[0, duration]`, including the tails of pulses centered just outside.
pub fn wavelet_comb(cfg: &PipelineConfig, duration: usize) -> Result<Vec<Complex64>> {
    cfg.validate()?;
    if duration < cfg.kappa {
        return Err(Error::invalid(format!(
            "duration {duration} is shorter than one comb period {}",
            cfg.kappa
        )));
    }
    let mut out = vec![Complex64::new(0.0, 0.0); duration * cfg.oversample + 1];
    let periods = duration.div_ceil(cfg.kappa) as i64;
    for n in -1..=periods {
        add_pulse(cfg, n, &mut out);
    }
    Ok(out)
}

/// Trapezoid rule on `values` with spacing `h`.
fn trapezoid(values: impl ExactSizeIterator<Item = Complex64>, h: f64) -> Complex64 {
    let last = values.len().saturating_sub(1);
    let mut acc = Complex64::new(0.0, 0.0);
    for (i, v) in values.enumerate() {
        acc += if i == 0 || i == last { v * 0.5 } else { v };
    }
    acc * h
}

/// Mixes `x` (given on the oversampled grid starting at t = 0) with the
/// conjugate comb, integrates and dumps once per comb period.
///
/// With [`IntegrationWindow::Period`] there is one output per complete
/// period of the grid. With [`IntegrationWindow::AtomSupport`] there is one
/// output per pulse whose support lies inside the grid.
pub fn mix_integrate_decimate(x: &[Complex64], cfg: &PipelineConfig) -> Result<Vec<Complex64>> {
    cfg.validate()?;
    let p = cfg.period_points();
    if x.len() < p + 1 {
        return Err(Error::invalid(format!(
            "input has {} grid points, one comb period needs {}",
            x.len(),
            p + 1
        )));
    }
    let h = cfg.step();
    match cfg.window {
        IntegrationWindow::Period => {
            let periods = (x.len() - 1) / p;
            let comb = wavelet_comb(cfg, periods * cfg.kappa)?;
            Ok((0..periods)
                .map(|n| {
                    let range = n * p..=(n + 1) * p;
                    trapezoid(
                        x[range.clone()]
                            .iter()
                            .zip(&comb[range])
                            .map(|(a, b)| a * b.conj()),
                        h,
                    )
                })
                .collect())
        }
        IntegrationWindow::AtomSupport => {
            let duration = (x.len() - 1) as f64 * h;
            let r = cfg.radius();
            let mut out = Vec::new();
            for n in 0.. {
                let c = pulse_center(cfg, n);
                if c + r > duration {
                    break;
                }
                if c - r < 0.0 {
                    continue;
                }
                let mut pulse = vec![Complex64::new(0.0, 0.0); x.len()];
                add_pulse(cfg, n, &mut pulse);
                let lo = ((c - r) / h).floor().max(0.0) as usize;
                let hi = (((c + r) / h).ceil() as usize).min(x.len() - 1);
                let range = lo..=hi;
                out.push(trapezoid(
                    x[range.clone()]
                        .iter()
                        .zip(&pulse[range])
                        .map(|(a, b)| a * b.conj()),
                    h,
                ));
            }
            Ok(out)
        }
    }
}

/// `sin(pi u) / (pi u)`, exactly zero at nonzero integers.
pub fn sinc(u: f64) -> f64 {
    if u == 0.0 {
        return 1.0;
    }
    let r = u.round();
    let frac = u - r;
    if frac == 0.0 {
        return 0.0;
    }
    let sign = if r.rem_euclid(2.0) == 0.0 { 1.0 } else { -1.0 };
    sign * (PI * frac).sin() / (PI * u)
}

/// Gaussian response of the ideal wavelet filter at absolute frequency `f`,
/// 1 at the carrier.
pub fn h_cwt(f: f64, cfg: &PipelineConfig) -> f64 {
    (-(PI * cfg.tau * (f - cfg.center_freq)).powi(2)).exp()
}

/// Mixture-of-sincs response at offset `f` from the carrier:
/// `|sum_{k=-kappa/2}^{kappa/2-1} sinc(T_s f - k) exp(-(pi tau k f_s)^2)|`.
pub fn h_wbs(f: f64, cfg: &PipelineConfig) -> Result<f64> {
    if !cfg.kappa.is_multiple_of(2) || cfg.kappa == 0 {
        return Err(Error::invalid(format!(
            "the mixture-of-sincs response needs an even kappa, got {}",
            cfg.kappa
        )));
    }
    let half = (cfg.kappa / 2) as i64;
    let x = f * cfg.t_s();
    let mut acc = 0.0;
    for k in -half..half {
        let w = (-(PI * cfg.tau * k as f64 * cfg.f_s()).powi(2)).exp();
        if w < WBS_WEIGHT_FLOOR {
            continue;
        }
        acc += sinc(x - k as f64) * w;
    }
    Ok(acc.abs())
}

/// Plain integrate-and-dump response `|sinc(T_s f)|`.
pub fn h_sinc(f: f64, cfg: &PipelineConfig) -> f64 {
    sinc(f * cfg.t_s()).abs()
}

fn db(v: f64) -> f64 {
    20.0 * v.log10()
}

#[derive(Debug, Clone, PartialEq)]
pub struct RejectionCurve {
    /// Interferer offsets from the carrier, cycles per Nyquist sample.
    pub offsets: Vec<f64>,
    pub h_wbs_sim_db: Vec<f64>,
    pub h_wbs_analytic_db: Vec<f64>,
    pub h_cwt_db: Vec<f64>,
    pub sinc_db: Vec<f64>,
    /// Offsets that fold exactly onto the useful bin.
    pub folds_onto_signal: Vec<bool>,
    pub weight_floor: f64,
}

impl RejectionCurve {
    pub fn len(&self) -> usize {
        self.offsets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.offsets.is_empty()
    }
}

/// Response of the simulated pipeline to a tone at `f_c + offset`: the
/// output stream's DTFT magnitude at the folded frequency, per period.
pub fn simulated_response(cfg: &PipelineConfig, offset: f64, amplitude: f64) -> Result<f64> {
    let h = cfg.step();
    let points = SIM_PERIODS * cfg.period_points() + 1;
    let freq = cfg.center_freq + offset;
    let x: Vec<Complex64> = (0..points)
        .map(|i| Complex64::from_polar(amplitude, 2.0 * PI * freq * i as f64 * h))
        .collect();
    let y = mix_integrate_decimate(&x, cfg)?;
    let step = 2.0 * PI * offset * cfg.t_s();
    let acc: Complex64 = y
        .iter()
        .enumerate()
        .map(|(n, v)| v * Complex64::from_polar(1.0, -step * n as f64))
        .sum();
    Ok(acc.norm() / y.len() as f64)
}

/// Sweeps interferer offsets and records simulated and analytic responses in
/// dB, all relative to a tone at the carrier.
pub fn rejection_sweep(
    cfg: &PipelineConfig,
    offsets: &[f64],
    amplitude: f64,
) -> Result<RejectionCurve> {
    cfg.validate()?;
    if !(amplitude > 0.0 && amplitude.is_finite()) {
        return Err(Error::invalid(format!(
            "amplitude must be positive, got {amplitude}"
        )));
    }
    let limit = 0.5 - cfg.center_freq;
    if let Some(&f) = offsets.iter().find(|&&f| !(f > 0.0 && f < limit)) {
        return Err(Error::invalid(format!("offset {f} outside (0, {limit})")));
    }
    let reference = simulated_response(cfg, 0.0, amplitude)?;
    let analytic_ref = h_wbs(0.0, cfg)?;
    let rows = offsets
        .par_iter()
        .map(|&f| {
            let sim = simulated_response(cfg, f, amplitude)? / reference;
            let analytic = h_wbs(f, cfg)? / analytic_ref;
            Ok((db(sim), db(analytic)))
        })
        .collect::<Result<Vec<_>>>()?;
    let folds = offsets
        .iter()
        .map(|&f| {
            let r = f * cfg.t_s();
            (r - r.round()).abs() < 1e-12
        })
        .collect();
    Ok(RejectionCurve {
        offsets: offsets.to_vec(),
        h_wbs_sim_db: rows.iter().map(|r| r.0).collect(),
        h_wbs_analytic_db: rows.iter().map(|r| r.1).collect(),
        h_cwt_db: offsets
            .iter()
            .map(|&f| db(h_cwt(cfg.center_freq + f, cfg)))
            .collect(),
        sinc_db: offsets.iter().map(|&f| db(h_sinc(f, cfg))).collect(),
        folds_onto_signal: folds,
        weight_floor: WBS_WEIGHT_FLOOR,
    })
}
