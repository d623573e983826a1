//! Experiment configuration files (TOML).
//!
//! Every field is optional in the file; [`ExperimentConfig::resolve`] fills
//! defaults for the chosen experiment and validates everything before any
//! computation starts.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use a2i_core::bandpass::{IntegrationWindow, PipelineConfig, PulseShape};
use a2i_core::wavelet::morlet_family;
use a2i_core::SubBandSpec;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    CoherenceSweep,
    PhaseTransition,
    RejectionSweep,
    MeasureRecover,
}

impl Experiment {
    pub const ALL: [Experiment; 4] = [
        Experiment::CoherenceSweep,
        Experiment::PhaseTransition,
        Experiment::RejectionSweep,
        Experiment::MeasureRecover,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::CoherenceSweep => "coherence-sweep",
            Experiment::PhaseTransition => "phase-transition",
            Experiment::RejectionSweep => "rejection-sweep",
            Experiment::MeasureRecover => "measure-recover",
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Experiment {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Experiment::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| {
                let names: Vec<_> = Experiment::ALL.iter().map(|e| e.name()).collect();
                format!(
                    "unknown experiment `{s}`, expected one of {}",
                    names.join(", ")
                )
            })
    }
}

/// Contents of a configuration file. Field names are stable.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub experiment: Option<Experiment>,
    /// Grid length N.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    /// Half-open bin ranges `[start, end]`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sub_bands: Option<Vec<[usize; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau_grid: Option<Vec<f64>>,
    /// Quality factor; selects per-band C-Morlet widths.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m_grid: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k_grid: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trials: Option<usize>,
    /// Absent means noiseless.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub snr_db: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub master_seed: Option<u64>,
    /// Output path prefix.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kappa: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub center_freq: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oversample: Option<usize>,
    /// Interferer offsets, in units of the comb rate f_s.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub offsets: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f_s_hz: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub puncture_keep: Option<f64>,
    /// Sparsity for a single measure-recover run.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    /// `[widest, narrowest]` BW_p / BW_RF for a coherence sweep.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bw_ratio_range: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

fn err<T>(msg: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError(msg.into()))
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|e| ConfigError(e.message().to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn emit(&self) -> String {
        toml::to_string(self).expect("config fields are all TOML-representable")
    }

    /// Fills defaults for `experiment` and checks every precondition.
    pub fn resolve(&self, experiment: Experiment) -> Result<Resolved, ConfigError> {
        if let Some(e) = self.experiment {
            if e != experiment {
                return err(format!(
                    "config is for `{e}` but `{experiment}` was requested"
                ));
            }
        }
        let mut full = self.clone();
        full.experiment = Some(experiment);
        full.master_seed.get_or_insert(0);
        full.output
            .get_or_insert_with(|| experiment.name().to_string());
        if let Some(snr) = full.snr_db {
            if snr.is_nan() {
                return err("snr_db must be a number");
            }
        }
        let plan = match experiment {
            Experiment::CoherenceSweep => Plan::Coherence(resolve_coherence(&mut full)?),
            Experiment::PhaseTransition => Plan::Phase(resolve_phase(&mut full)?),
            Experiment::RejectionSweep => Plan::Rejection(resolve_rejection(&mut full)?),
            Experiment::MeasureRecover => Plan::Recover(resolve_recover(&mut full)?),
        };
        Ok(Resolved { config: full, plan })
    }
}

/// A validated configuration with every default written out.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub config: ExperimentConfig,
    pub plan: Plan,
}

impl Resolved {
    pub fn experiment(&self) -> Experiment {
        self.config.experiment.expect("set by resolve")
    }

    pub fn master_seed(&self) -> u64 {
        self.config.master_seed.expect("set by resolve")
    }

    pub fn output(&self) -> &str {
        self.config.output.as_deref().expect("set by resolve")
    }

    pub fn snr_db(&self) -> f64 {
        self.config.snr_db.unwrap_or(f64::INFINITY)
    }
}

#[derive(Debug, Clone)]
pub enum Plan {
    Coherence(CoherencePlan),
    Phase(PhasePlan),
    Rejection(RejectionPlan),
    Recover(RecoverPlan),
}

#[derive(Debug, Clone)]
pub struct CoherencePlan {
    pub spec: SubBandSpec,
    /// Explicit widths, or `None` to derive them from the ratio grid.
    pub widths: Option<Vec<f64>>,
    pub ratio_range: [f64; 2],
    pub points: usize,
}

#[derive(Debug, Clone)]
pub struct PhasePlan {
    pub spec: SubBandSpec,
    pub gamma: usize,
    pub widths: Vec<f64>,
    pub m_grid: Vec<usize>,
    pub k_grid: Vec<usize>,
    pub trials: usize,
}

#[derive(Debug, Clone)]
pub struct RejectionPlan {
    pub pipeline: PipelineConfig,
    /// Offsets in cycles per Nyquist sample.
    pub offsets: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct RecoverPlan {
    pub spec: SubBandSpec,
    pub gamma: usize,
    pub widths: Vec<f64>,
    pub puncture_keep: f64,
    pub k: usize,
}

const DEFAULT_N: usize = 256;
const DEFAULT_BANDS: [[usize; 2]; 2] = [[48, 64], [160, 176]];
const DEFAULT_GAMMA: usize = 16;

fn resolve_spec(full: &mut ExperimentConfig) -> Result<SubBandSpec, ConfigError> {
    let n = *full.n.get_or_insert(DEFAULT_N);
    let bands = full.sub_bands.get_or_insert_with(|| DEFAULT_BANDS.to_vec());
    SubBandSpec::new(n, bands.iter().map(|[a, b]| *a..*b).collect())
        .map_err(|e| ConfigError(format!("sub_bands: {e}")))
}

/// Per-branch widths: C-Morlet widths at the band centers when `q` is set,
/// otherwise `tau` (default `gamma / 4`) on every branch.
fn resolve_widths(
    full: &mut ExperimentConfig,
    spec: &SubBandSpec,
    gamma: usize,
) -> Result<Vec<f64>, ConfigError> {
    let bands = spec.bands().len();
    match (full.q, full.tau) {
        (Some(_), Some(_)) => err("set either q or tau, not both"),
        (Some(q), None) => {
            // bins above N/2 are negative frequencies on the circular grid
            let centers: Vec<f64> = (0..bands)
                .map(|b| {
                    let f = spec.center_freq(b);
                    f.min(1.0 - f)
                })
                .collect();
            let family = morlet_family(q, &centers).map_err(|e| ConfigError(format!("q: {e}")))?;
            Ok(family.scales().iter().map(|&(_, tau)| tau).collect())
        }
        (None, tau) => {
            let tau = *full.tau.get_or_insert(tau.unwrap_or(gamma as f64 / 4.0));
            if !(tau > 0.0 && tau.is_finite()) {
                return err(format!("tau must be positive, got {tau}"));
            }
            Ok(vec![tau; bands])
        }
    }
}

fn resolve_gamma(full: &mut ExperimentConfig, n: usize) -> Result<usize, ConfigError> {
    let gamma = *full.gamma.get_or_insert(DEFAULT_GAMMA);
    if gamma == 0 || gamma > n {
        return err(format!("gamma must be in 1..={n}, got {gamma}"));
    }
    Ok(gamma)
}

fn resolve_coherence(full: &mut ExperimentConfig) -> Result<CoherencePlan, ConfigError> {
    let spec = resolve_spec(full)?;
    let widths = match &full.tau_grid {
        Some(grid) => {
            if grid.is_empty() {
                return err("tau_grid must not be empty");
            }
            if grid.iter().any(|t| !(*t > 0.0 && t.is_finite())) {
                return err("tau_grid values must be positive");
            }
            if grid.windows(2).any(|w| !(w[1] > w[0])) {
                return err("tau_grid must be strictly ascending");
            }
            Some(grid.clone())
        }
        None => None,
    };
    let ratio_range = *full.bw_ratio_range.get_or_insert([10.0, 0.1]);
    let points = *full.points.get_or_insert(10);
    if widths.is_none() {
        let [hi, lo] = ratio_range;
        if !(lo > 0.0 && hi > lo && hi.is_finite()) {
            return err("bw_ratio_range must be [widest, narrowest] with widest > narrowest > 0");
        }
        if points < 2 {
            return err("points must be at least 2");
        }
    }
    Ok(CoherencePlan {
        spec,
        widths,
        ratio_range,
        points,
    })
}

fn resolve_phase(full: &mut ExperimentConfig) -> Result<PhasePlan, ConfigError> {
    let spec = resolve_spec(full)?;
    let gamma = resolve_gamma(full, spec.n())?;
    let widths = resolve_widths(full, &spec, gamma)?;
    let slots = spec.bands().len() * (spec.n() / gamma);
    let m_grid = full
        .m_grid
        .get_or_insert_with(|| (2..=slots).step_by(2).collect())
        .clone();
    let occupied = spec.occupied_bins();
    let k_grid = full
        .k_grid
        .get_or_insert_with(|| (0..=occupied).collect())
        .clone();
    let trials = *full.trials.get_or_insert(100);
    if m_grid.is_empty() || k_grid.is_empty() {
        return err("m_grid and k_grid must not be empty");
    }
    if m_grid.contains(&0) {
        return err("m_grid values must be at least 1");
    }
    if let Some(k) = k_grid.iter().find(|&&k| k > occupied) {
        return err(format!(
            "k_grid value {k} exceeds the {occupied} occupied bins"
        ));
    }
    if trials == 0 {
        return err("trials must be at least 1");
    }
    Ok(PhasePlan {
        spec,
        gamma,
        widths,
        m_grid,
        k_grid,
        trials,
    })
}

fn resolve_rejection(full: &mut ExperimentConfig) -> Result<RejectionPlan, ConfigError> {
    let preset = PipelineConfig::preset();
    let kappa = *full.kappa.get_or_insert(preset.kappa);
    if kappa == 0 || !kappa.is_multiple_of(2) {
        return err(format!(
            "kappa must be a positive even integer, got {kappa}"
        ));
    }
    let f_s = 1.0 / kappa as f64;
    let tau = *full.tau.get_or_insert(kappa as f64 / 4.0);
    let center_freq = *full.center_freq.get_or_insert(2.0 * f_s);
    let oversample = *full.oversample.get_or_insert(preset.oversample);
    if let Some(hz) = full.f_s_hz {
        if !(hz > 0.0 && hz.is_finite()) {
            return err(format!("f_s_hz must be positive, got {hz}"));
        }
    }
    let pipeline = PipelineConfig {
        kappa,
        tau,
        center_freq,
        oversample,
        pulse: PulseShape::Gabor,
        window: IntegrationWindow::Period,
        f_s_hz: full.f_s_hz,
    };
    let offsets_fs = full
        .offsets
        .get_or_insert_with(|| {
            let top = ((0.5 - center_freq) / f_s * 20.0).ceil() as usize;
            (1..top).map(|i| i as f64 * 0.05).collect()
        })
        .clone();
    if offsets_fs.is_empty() {
        return err("offsets must not be empty");
    }
    let limit = (0.5 - center_freq) / f_s;
    if let Some(o) = offsets_fs.iter().find(|&&o| !(o > 0.0 && o < limit)) {
        return err(format!("offset {o} f_s outside (0, {limit}) f_s"));
    }
    Ok(RejectionPlan {
        pipeline,
        offsets: offsets_fs.iter().map(|o| o * f_s).collect(),
    })
}

fn resolve_recover(full: &mut ExperimentConfig) -> Result<RecoverPlan, ConfigError> {
    let spec = resolve_spec(full)?;
    let gamma = resolve_gamma(full, spec.n())?;
    let widths = resolve_widths(full, &spec, gamma)?;
    let puncture_keep = *full.puncture_keep.get_or_insert(1.0);
    if !(puncture_keep > 0.0 && puncture_keep <= 1.0) {
        return err(format!(
            "puncture_keep must be in (0, 1], got {puncture_keep}"
        ));
    }
    let k = *full.k.get_or_insert(4);
    if k > spec.occupied_bins() {
        return err(format!(
            "k = {k} exceeds the {} occupied bins",
            spec.occupied_bins()
        ));
    }
    Ok(RecoverPlan {
        spec,
        gamma,
        widths,
        puncture_keep,
        k,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn experiment_names_round_trip() {
        for e in Experiment::ALL {
            assert_eq!(e.name().parse::<Experiment>().unwrap(), e);
        }
        assert!("sweep".parse::<Experiment>().is_err());
    }

    #[test]
    fn unknown_fields_are_rejected() {
        assert!(ExperimentConfig::parse("nn = 3").is_err());
        assert!(ExperimentConfig::parse("n = -3").is_err());
    }

    #[test]
    fn phase_defaults() {
        let r = ExperimentConfig::default()
            .resolve(Experiment::PhaseTransition)
            .unwrap();
        let Plan::Phase(p) = &r.plan else { panic!() };
        assert_eq!(p.m_grid, (1..=16).map(|i| 2 * i).collect::<Vec<_>>());
        assert_eq!(p.k_grid.len(), 33);
        assert_eq!(p.widths, vec![4.0, 4.0]);
        assert_eq!(p.trials, 100);
        assert_eq!(r.snr_db(), f64::INFINITY);
        assert_eq!(r.output(), "phase-transition");
    }

    #[test]
    fn morlet_widths_follow_band_centers() {
        let cfg = ExperimentConfig {
            q: Some(2.0),
            ..Default::default()
        };
        let r = cfg.resolve(Experiment::MeasureRecover).unwrap();
        let Plan::Recover(p) = &r.plan else { panic!() };
        assert!(p.widths[0] > p.widths[1], "{:?}", p.widths);
        let both = ExperimentConfig {
            q: Some(2.0),
            tau: Some(1.0),
            ..Default::default()
        };
        assert!(both.resolve(Experiment::MeasureRecover).is_err());
    }

    #[test]
    fn mismatched_experiment_is_an_error() {
        let cfg = ExperimentConfig {
            experiment: Some(Experiment::CoherenceSweep),
            ..Default::default()
        };
        assert!(cfg.resolve(Experiment::PhaseTransition).is_err());
    }

    #[test]
    fn bad_values_are_caught_before_running() {
        let bad = [
            ExperimentConfig {
                trials: Some(0),
                ..Default::default()
            },
            ExperimentConfig {
                k_grid: Some(vec![40]),
                ..Default::default()
            },
            ExperimentConfig {
                gamma: Some(0),
                ..Default::default()
            },
            ExperimentConfig {
                sub_bands: Some(vec![[10, 5]]),
                ..Default::default()
            },
            ExperimentConfig {
                snr_db: Some(f64::NAN),
                ..Default::default()
            },
        ];
        for cfg in bad {
            assert!(cfg.resolve(Experiment::PhaseTransition).is_err(), "{cfg:?}");
        }
        let odd = ExperimentConfig {
            kappa: Some(15),
            ..Default::default()
        };
        assert!(odd.resolve(Experiment::RejectionSweep).is_err());
        let far = ExperimentConfig {
            offsets: Some(vec![7.0]),
            ..Default::default()
        };
        assert!(far.resolve(Experiment::RejectionSweep).is_err());
        let grid = ExperimentConfig {
            tau_grid: Some(vec![2.0, 1.0]),
            ..Default::default()
        };
        assert!(grid.resolve(Experiment::CoherenceSweep).is_err());
    }

    #[test]
    fn rejection_defaults_match_the_preset() {
        let r = ExperimentConfig::default()
            .resolve(Experiment::RejectionSweep)
            .unwrap();
        let Plan::Rejection(p) = &r.plan else {
            panic!()
        };
        let preset = PipelineConfig {
            f_s_hz: None,
            ..PipelineConfig::preset()
        };
        assert_eq!(p.pipeline, preset);
        assert_eq!(p.offsets.len(), 119);
        assert!(p.offsets.iter().all(|&f| f > 0.0 && f < 0.375));
    }
}
