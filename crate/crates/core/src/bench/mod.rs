//! Seeded Monte Carlo sweeps over matrix kinds, sizes and solvers, with
//! aggregation and file output.

pub mod output;
pub mod plot;
pub mod stats;

use std::path::PathBuf;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analog::{CircuitConfig, Engine};
use crate::error::{Error, Result};
use crate::linalg::{solve_dense, Vector};
use crate::mapping::{MapConfig, DEFAULT_G0};
use crate::matgen::{gen_rhs, generate, GenSpec, MatrixKind};
use crate::metrics::relative_error;
use crate::rng::{derive_indexed, derive_seed};
use crate::solver::{solve_multi_stage, SolveConfig, SolverKind};

pub use output::{emit, read_records_csv, write_records_csv, EmitOptions, Manifest};
pub use stats::{aggregate, GroupStats};

/// Largest size a network-engine sweep accepts without `allow_large_network`.
pub const NETWORK_SIZE_CAP: usize = 128;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub kinds: Vec<MatrixKind>,
    pub sizes: Vec<usize>,
    pub trials: usize,
    pub engine: Engine,
    /// Wire segment resistance, ohms (network engine only).
    pub r_seg: f64,
    pub sigma_rel: f64,
    /// Unit conductance, siemens.
    pub g0: f64,
    pub solvers: Vec<SolverKind>,
    /// Partitioning depth used for the `two_stage` solver.
    pub depth: usize,
    pub master_seed: u64,
    pub out_dir: PathBuf,
    /// Lifts the network-engine size cap.
    pub allow_large_network: bool,
    pub toeplitz_diag_boost: f64,
    /// Rows of the Wishart factor as a multiple of `n` (rounded up).
    pub wishart_m_factor: f64,
    pub array_max: Option<usize>,
    pub dac_bits: Option<u32>,
    pub adc_bits: Option<u32>,
    pub global_normalization: bool,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            kinds: vec![MatrixKind::Wishart, MatrixKind::Toeplitz],
            sizes: vec![8, 16, 32, 64, 128, 256, 512],
            trials: 40,
            engine: Engine::Ideal,
            r_seg: 1.0,
            sigma_rel: 0.05,
            g0: DEFAULT_G0,
            solvers: SolverKind::ALL.to_vec(),
            depth: 2,
            master_seed: 0,
            out_dir: PathBuf::from("out"),
            allow_large_network: false,
            toeplitz_diag_boost: 1.0,
            wishart_m_factor: 1.0,
            array_max: None,
            dac_bits: None,
            adc_bits: None,
            global_normalization: false,
        }
    }
}

impl SweepConfig {
    pub fn from_toml(s: &str) -> Result<Self> {
        let cfg: SweepConfig = toml::from_str(s).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::Config("trials must be >= 1".into()));
        }
        if self.kinds.is_empty() || self.sizes.is_empty() || self.solvers.is_empty() {
            return Err(Error::Config("kinds, sizes and solvers must be nonempty".into()));
        }
        if let Some(&n) = self.sizes.iter().find(|&&n| n < 2) {
            return Err(Error::Config(format!("size {n} is below 2")));
        }
        if self.depth < 2 && self.solvers.contains(&SolverKind::TwoStage) {
            return Err(Error::Config(format!("two_stage needs depth >= 2, got {}", self.depth)));
        }
        if self.engine == Engine::Network && !self.allow_large_network {
            if let Some(&n) = self.sizes.iter().find(|&&n| n > NETWORK_SIZE_CAP) {
                return Err(Error::Config(format!(
                    "network-engine size {n} exceeds {NETWORK_SIZE_CAP}; set allow_large_network = true"
                )));
            }
        }
        if !(self.wishart_m_factor >= 1.0 && self.wishart_m_factor.is_finite()) {
            return Err(Error::Config(format!("wishart_m_factor must be >= 1, got {}", self.wishart_m_factor)));
        }
        self.solve_config(0).validate()?;
        for &kind in &self.kinds {
            for &n in &self.sizes {
                self.gen_spec(kind, n, 0).validate()?;
            }
        }
        Ok(())
    }

    pub fn solver_depth(&self, kind: SolverKind) -> usize {
        match kind {
            SolverKind::TwoStage => self.depth,
            other => other.depth(),
        }
    }

    pub fn gen_spec(&self, kind: MatrixKind, n: usize, seed: u64) -> GenSpec {
        GenSpec {
            wishart_m: Some((self.wishart_m_factor * n as f64).ceil() as usize),
            toeplitz_diag_boost: self.toeplitz_diag_boost,
            ..GenSpec::new(kind, n, seed)
        }
    }

    pub fn solve_config(&self, seed: u64) -> SolveConfig {
        SolveConfig {
            map: MapConfig {
                g0: self.g0,
                sigma_rel: self.sigma_rel,
                dac_bits: self.dac_bits,
                adc_bits: self.adc_bits,
                global_normalization: self.global_normalization,
                ..MapConfig::default()
            },
            circuit: CircuitConfig {
                r_seg: self.r_seg,
                engine: self.engine,
                ..CircuitConfig::default()
            },
            array_max: self.array_max,
            k: None,
            seed,
        }
    }

    /// Seeds of one trial; a pure function of the master seed and the
    /// trial coordinates.
    pub fn trial_seeds(&self, kind: MatrixKind, n: usize, trial: usize) -> TrialSeeds {
        let base = derive_seed(self.master_seed, &format!("{}/{n}", kind.as_str()));
        TrialSeeds {
            matrix: derive_indexed(base, "matrix", trial as u64),
            rhs: derive_indexed(base, "rhs", trial as u64),
            program: derive_indexed(base, "program", trial as u64),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrialSeeds {
    pub matrix: u64,
    pub rhs: u64,
    pub program: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub matrix: MatrixKind,
    pub size: usize,
    pub solver: SolverKind,
    pub trial: usize,
    pub seeds: TrialSeeds,
    /// `None` when the trial failed.
    pub relative_error: Option<f64>,
    /// Failure message, empty on success.
    pub error: String,
    pub wall_time_s: f64,
}

impl SweepRecord {
    pub fn ok(&self) -> bool {
        self.relative_error.is_some()
    }
}

/// One trial: builds the system, solves it digitally for the reference and
/// with each requested solver.
pub fn run_trial(cfg: &SweepConfig, kind: MatrixKind, n: usize, trial: usize) -> Vec<SweepRecord> {
    let seeds = cfg.trial_seeds(kind, n, trial);
    let record = |solver, outcome: Result<f64>, wall: f64| SweepRecord {
        matrix: kind,
        size: n,
        solver,
        trial,
        seeds,
        relative_error: outcome.as_ref().ok().copied(),
        error: outcome.err().map(|e| e.to_string()).unwrap_or_default(),
        wall_time_s: wall,
    };
    let system = generate(&cfg.gen_spec(kind, n, seeds.matrix)).and_then(|a| {
        let b = gen_rhs(n, seeds.rhs)?;
        let x = solve_dense(&a, &b)?;
        Ok((a, b, x))
    });
    let (a, b, x_ref) = match system {
        Ok(s) => s,
        Err(e) => {
            let msg = format!("reference: {e}");
            return cfg.solvers.iter().map(|&s| record(s, Err(Error::Singular(msg.clone())), 0.0)).collect();
        }
    };
    let solve_cfg = cfg.solve_config(seeds.program);
    cfg.solvers
        .iter()
        .map(|&solver| {
            let start = Instant::now();
            let outcome = solve_multi_stage(&a, &b, cfg.solver_depth(solver), &solve_cfg)
                .and_then(|r| relative_error(&x_ref, &r.x_hat));
            record(solver, outcome, start.elapsed().as_secs_f64())
        })
        .collect()
}

/// Runs every (kind, size, trial) in parallel. Records come back in a fixed
/// order: kind, size, trial, then solver as listed in the config.
pub fn run_sweep(cfg: &SweepConfig) -> Result<Vec<SweepRecord>> {
    cfg.validate()?;
    if cfg.engine == Engine::Network && cfg.sizes.iter().any(|&n| n > NETWORK_SIZE_CAP) {
        eprintln!("warning: network-engine sweep above size {NETWORK_SIZE_CAP}; expect long runtimes");
    }
    let jobs: Vec<(MatrixKind, usize, usize)> = cfg
        .kinds
        .iter()
        .flat_map(|&k| cfg.sizes.iter().flat_map(move |&n| (0..cfg.trials).map(move |t| (k, n, t))))
        .collect();
    Ok(jobs.par_iter().flat_map_iter(|&(k, n, t)| run_trial(cfg, k, n, t)).collect())
}

/// Reference and solver outputs for one trial, for the overlay plot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Showcase {
    pub matrix: MatrixKind,
    pub size: usize,
    pub trial: usize,
    pub x_ref: Vector,
    pub solutions: Vec<(SolverKind, Vector)>,
}

pub fn showcase(cfg: &SweepConfig, kind: MatrixKind, n: usize, trial: usize) -> Result<Showcase> {
    let seeds = cfg.trial_seeds(kind, n, trial);
    let a = generate(&cfg.gen_spec(kind, n, seeds.matrix))?;
    let b = gen_rhs(n, seeds.rhs)?;
    let x_ref = solve_dense(&a, &b)?;
    let solve_cfg = cfg.solve_config(seeds.program);
    let mut solutions = Vec::new();
    for &s in &cfg.solvers {
        solutions.push((s, solve_multi_stage(&a, &b, cfg.solver_depth(s), &solve_cfg)?.x_hat));
    }
    Ok(Showcase { matrix: kind, size: n, trial, x_ref, solutions })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> SweepConfig {
        SweepConfig {
            sizes: vec![4, 8],
            trials: 3,
            ..SweepConfig::default()
        }
    }

    #[test]
    fn noise_free_sweep_is_exact() {
        let cfg = SweepConfig { sigma_rel: 0.0, ..small() };
        let recs = run_sweep(&cfg).unwrap();
        assert_eq!(recs.len(), 2 * 2 * 3 * 3);
        assert!(recs.iter().all(|r| r.relative_error.unwrap() <= 1e-8));
    }

    #[test]
    fn replay_reproduces_error() {
        let cfg = small();
        let recs = run_sweep(&cfg).unwrap();
        let r = &recs[7];
        let again = run_trial(&cfg, r.matrix, r.size, r.trial);
        let same = again.iter().find(|x| x.solver == r.solver).unwrap();
        assert_eq!(same.relative_error, r.relative_error);
        assert_eq!(same.seeds, r.seeds);
    }

    #[test]
    fn failed_solver_is_isolated() {
        // 4x4 arrays cannot hold the 8x8 original system.
        let cfg = SweepConfig { array_max: Some(4), sizes: vec![8], ..small() };
        for r in &run_sweep(&cfg).unwrap() {
            assert_eq!(r.ok(), r.solver != SolverKind::Original, "{r:?}");
            assert_eq!(r.ok(), r.error.is_empty());
        }
    }

    #[test]
    fn network_cap() {
        let cfg = SweepConfig { engine: Engine::Network, sizes: vec![256], ..small() };
        assert!(cfg.validate().is_err());
        assert!(SweepConfig { allow_large_network: true, ..cfg }.validate().is_ok());
    }

    #[test]
    fn toml_round_trip() {
        let cfg = small();
        assert_eq!(SweepConfig::from_toml(&cfg.to_toml().unwrap()).unwrap(), cfg);
        assert!(SweepConfig::from_toml("trials = 0").is_err());
        assert!(SweepConfig::from_toml("bogus = 1").is_err());
        let parsed = SweepConfig::from_toml("kinds = [\"toeplitz\"]\nsolvers = [\"original\", \"one_stage\"]").unwrap();
        assert_eq!(parsed.kinds, vec![MatrixKind::Toeplitz]);
    }
}
