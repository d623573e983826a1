//! Experiment execution and output files.

use std::fmt;
use std::path::{Path, PathBuf};
use std::time::Instant;

use a2i_core::coherence::{log_ratio_grid, widths_for_ratios};
use a2i_core::recovery::support_success;
use a2i_core::report;
use a2i_core::{
    coherence_sweep, effective_matrix, make_multiband_signal, measure, omp, phase_transition,
    rejection_sweep, seed_derive, Error, NuwbsLayout, PhaseTransitionConfig,
};
use serde_json::{json, Value};

use crate::config::{
    CoherencePlan, ConfigError, Experiment, ExperimentConfig, PhasePlan, Plan, RecoverPlan,
    RejectionPlan, Resolved,
};

/// Command-line overrides applied on top of the configuration file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub out: Option<String>,
    pub threads: Option<usize>,
}

#[derive(Debug)]
pub enum RunError {
    Config(String),
    Infeasible(String),
    Io(String),
    Compute(String),
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) => 2,
            RunError::Infeasible(_) => 3,
            RunError::Io(_) | RunError::Compute(_) => 1,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            RunError::Config(_) => "config",
            RunError::Infeasible(_) => "infeasible",
            RunError::Io(_) => "io",
            RunError::Compute(_) => "compute",
        }
    }

    pub fn message(&self) -> &str {
        match self {
            RunError::Config(m)
            | RunError::Infeasible(m)
            | RunError::Io(m)
            | RunError::Compute(m) => m,
        }
    }

    /// Single-line JSON for stderr.
    pub fn to_json(&self) -> String {
        json!({ "error": self.kind(), "message": self.message() }).to_string()
    }
}

impl fmt::Display for RunError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.kind(), self.message())
    }
}

impl std::error::Error for RunError {}

impl From<ConfigError> for RunError {
    fn from(e: ConfigError) -> Self {
        RunError::Config(e.0)
    }
}

impl From<Error> for RunError {
    fn from(e: Error) -> Self {
        match e {
            Error::PlanInfeasible { .. } | Error::CombOverlap(_) => {
                RunError::Infeasible(e.to_string())
            }
            Error::InvalidArgument(_) | Error::DimensionMismatch { .. } => {
                RunError::Config(e.to_string())
            }
            other => RunError::Compute(other.to_string()),
        }
    }
}

/// Files written by a run.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub files: Vec<PathBuf>,
    pub metadata: Value,
}

/// Loads, validates and runs one experiment.
pub fn run(
    experiment: Experiment,
    config_path: &Path,
    overrides: &Overrides,
) -> Result<RunOutput, RunError> {
    let mut cfg = ExperimentConfig::load(config_path)?;
    if let Some(seed) = overrides.seed {
        cfg.master_seed = Some(seed);
    }
    if let Some(out) = &overrides.out {
        cfg.output = Some(out.clone());
    }
    let resolved = cfg.resolve(experiment)?;
    let threads = match overrides.threads {
        Some(0) => return Err(RunError::Config("threads must be at least 1".into())),
        Some(t) => t,
        None => rayon::current_num_threads(),
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| RunError::Compute(e.to_string()))?;
    let start = Instant::now();
    let tables = pool.install(|| execute(&resolved))?;
    let wall_clock = start.elapsed().as_secs_f64();

    let prefix = resolved.output().to_string();
    let mut files = Vec::new();
    for (suffix, body) in &tables.csv {
        let path = PathBuf::from(format!("{prefix}{suffix}"));
        write_file(&path, body)?;
        files.push(path);
    }
    let metadata = json!({
        "experiment": experiment.name(),
        "version": env!("CARGO_PKG_VERSION"),
        "config": resolved.config,
        "master_seed": resolved.master_seed(),
        "threads": threads,
        "wall_clock_s": wall_clock,
        "results": tables.summary,
    });
    let meta_path = PathBuf::from(format!("{prefix}.meta.json"));
    let mut text =
        serde_json::to_string_pretty(&metadata).map_err(|e| RunError::Compute(e.to_string()))?;
    text.push('\n');
    write_file(&meta_path, &text)?;
    files.push(meta_path);
    Ok(RunOutput { files, metadata })
}

fn write_file(path: &Path, body: &str) -> Result<(), RunError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)
            .map_err(|e| RunError::Io(format!("{}: {e}", dir.display())))?;
    }
    std::fs::write(path, body).map_err(|e| RunError::Io(format!("{}: {e}", path.display())))
}

/// CSV bodies keyed by file suffix, plus a JSON summary for the metadata.
struct Tables {
    csv: Vec<(&'static str, String)>,
    summary: Value,
}

fn execute(resolved: &Resolved) -> Result<Tables, RunError> {
    match &resolved.plan {
        Plan::Coherence(p) => run_coherence(p),
        Plan::Phase(p) => run_phase(p, resolved),
        Plan::Rejection(p) => run_rejection(p),
        Plan::Recover(p) => run_recover(p, resolved),
    }
}

fn run_coherence(p: &CoherencePlan) -> Result<Tables, RunError> {
    let widths = match &p.widths {
        Some(w) => w.clone(),
        None => {
            let [hi, lo] = p.ratio_range;
            widths_for_ratios(&p.spec, &log_ratio_grid(hi, lo, p.points)?)?
        }
    };
    let curve = coherence_sweep(&p.spec, &widths)?;
    Ok(Tables {
        csv: vec![(".csv", report::coherence_csv(&curve))],
        summary: json!({
            "widths": curve.widths,
            "closed_form": curve.closed_form,
            "welch_bound": curve.bound,
        }),
    })
}

fn run_phase(p: &PhasePlan, resolved: &Resolved) -> Result<Tables, RunError> {
    let cfg = PhaseTransitionConfig {
        spec: p.spec.clone(),
        gamma: p.gamma,
        widths: p.widths.clone(),
        m_grid: p.m_grid.clone(),
        k_grid: p.k_grid.clone(),
        trials: p.trials,
        snr_db: resolved.snr_db(),
        master_seed: resolved.master_seed(),
    };
    let grid = phase_transition(&cfg)?;
    let infeasible: Vec<usize> = grid
        .m_values
        .iter()
        .zip(&grid.feasible)
        .filter(|(_, ok)| !**ok)
        .map(|(m, _)| *m)
        .collect();
    Ok(Tables {
        csv: vec![
            (".csv", report::phase_csv(&grid)),
            (".dt.csv", report::dt_csv(&grid.dt_curve)),
        ],
        summary: json!({
            "occupied_bins": p.spec.occupied_bins(),
            "widths": p.widths,
            "infeasible_m": infeasible,
        }),
    })
}

fn run_rejection(p: &RejectionPlan) -> Result<Tables, RunError> {
    p.pipeline.validate()?;
    let curve = rejection_sweep(&p.pipeline, &p.offsets, 1.0)?;
    let scale = p.pipeline.f_nyq_hz().unwrap_or(1.0);
    let folded: Vec<f64> = curve
        .offsets
        .iter()
        .zip(&curve.folds_onto_signal)
        .filter(|(_, f)| **f)
        .map(|(o, _)| o * scale)
        .collect();
    Ok(Tables {
        csv: vec![(".csv", report::rejection_csv(&curve, scale))],
        summary: json!({
            "offset_unit": if p.pipeline.f_s_hz.is_some() { "Hz" } else { "f_nyq" },
            "folds_onto_signal": folded,
            "weight_floor": curve.weight_floor,
        }),
    })
}

const RECOVER_HEADER: &str = "bin,true_re,true_im,recovered_re,recovered_im";

fn run_recover(p: &RecoverPlan, resolved: &Resolved) -> Result<Tables, RunError> {
    let seed = resolved.master_seed();
    let layout = NuwbsLayout::new(&p.spec, &p.widths, p.gamma)?;
    let plan = layout.select(p.puncture_keep, &mut seed_derive(seed, &[0]))?;
    let (truth, x) = make_multiband_signal(&p.spec, p.k, &mut seed_derive(seed, &[1]))?;
    let y = measure(&plan, &x, resolved.snr_db(), &mut seed_derive(seed, &[2]))?;
    let theta = effective_matrix(&plan);
    let sigma = p.spec.support();
    let result = omp(&theta, &y, p.k, &sigma)?;
    let recovered = result.to_dense(p.spec.n());
    let mut csv = format!("{RECOVER_HEADER}\n");
    for &bin in &sigma {
        let (t, r) = (truth.coefficients()[bin], recovered[bin]);
        csv.push_str(&format!("{bin},{},{},{},{}\n", t.re, t.im, r.re, r.im));
    }
    Ok(Tables {
        csv: vec![(".csv", csv)],
        summary: json!({
            "m": plan.m(),
            "total_slots": layout.total_slots(),
            "true_support": truth.support(),
            "recovered_support": result.sorted_support(),
            "support_success": support_success(&result, &truth),
            "residual_norm": result.residual_norm,
            "rank_deficient": result.rank_deficient,
        }),
    })
}
