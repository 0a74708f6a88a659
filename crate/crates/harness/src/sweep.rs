//! Grid sweeps over horizon, gap target and dimension, with independent
//! seeded trials run in parallel.

use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::config::{ExperimentConfig, GapTarget};
use crate::error::{HarnessError, Result};
use crate::generate::generate_instance_stream;
use crate::run::{run_experiment, run_stream, GapStatus, RunOutput};
use crate::trace::format_real;

pub const SWEEP_FILE: &str = "sweep.csv";

#[derive(Debug, Clone, PartialEq)]
pub struct SweepGrid {
    pub rounds: Vec<usize>,
    pub gaps: Vec<GapTarget>,
    pub dimensions: Vec<usize>,
    pub trials: usize,
}

/// One cell of the grid, one trial.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialSpec {
    pub rounds: usize,
    pub gap: GapTarget,
    pub dimension: usize,
    pub trial: usize,
    pub seed: u64,
    pub dir: PathBuf,
}

#[derive(Debug, Clone)]
pub struct TrialResult {
    pub spec: TrialSpec,
    pub output: RunOutput,
}

fn gap_slug(g: GapTarget) -> String {
    g.to_string().replace(':', "-")
}

impl SweepGrid {
    /// Trials in grid order; trial `i` of every cell uses seed `base + i`.
    pub fn trials(&self, base: &ExperimentConfig, out: &Path) -> Vec<TrialSpec> {
        let mut specs = Vec::new();
        for &rounds in &self.rounds {
            for &gap in &self.gaps {
                for &dimension in &self.dimensions {
                    for trial in 0..self.trials {
                        let dir = out.join(format!("T{rounds}_gap-{}_n{dimension}", gap_slug(gap))).join(format!("trial{trial}"));
                        specs.push(TrialSpec {
                            rounds,
                            gap,
                            dimension,
                            trial,
                            seed: base.seed.wrapping_add(trial as u64),
                            dir,
                        });
                    }
                }
            }
        }
        specs
    }

    pub fn validate(&self) -> Result<()> {
        if self.rounds.is_empty() || self.gaps.is_empty() || self.dimensions.is_empty() || self.trials == 0 {
            return Err(HarnessError::Config("sweep grid has an empty axis".into()));
        }
        Ok(())
    }
}

impl TrialSpec {
    pub fn config(&self, base: &ExperimentConfig) -> ExperimentConfig {
        let mut cfg = base.clone();
        cfg.rounds = self.rounds;
        cfg.gap = self.gap;
        cfg.dimension = self.dimension;
        cfg.seed = self.seed;
        cfg.out = self.dir.clone();
        cfg
    }
}

/// Run every trial; `write` controls whether per-trial files are written.
pub fn run_sweep(base: &ExperimentConfig, grid: &SweepGrid, out: &Path, write: bool) -> Result<Vec<TrialResult>> {
    grid.validate()?;
    let specs = grid.trials(base, out);
    for spec in &specs {
        spec.config(base).validate()?;
    }
    let results = specs
        .into_par_iter()
        .map(|spec| {
            let cfg = spec.config(base);
            let output = if write {
                run_experiment(&cfg)?.output
            } else {
                run_stream(&cfg, &generate_instance_stream(&cfg)?)?
            };
            Ok(TrialResult { spec, output })
        })
        .collect::<Result<Vec<_>>>()?;
    if write {
        write_sweep_csv(&out.join(SWEEP_FILE), &results)?;
    }
    Ok(results)
}

pub const SWEEP_HEADER: [&str; 12] = [
    "rounds",
    "gap",
    "dimension",
    "trial",
    "seed",
    "final_regret",
    "final_subopt_regret",
    "final_loss_sum",
    "gap_delta",
    "mistakes",
    "last_mistake",
    "failed",
];

pub fn write_sweep_csv(path: &Path, results: &[TrialResult]) -> Result<()> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent).map_err(|e| HarnessError::io(parent, e))?;
    }
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(SWEEP_HEADER)?;
    for r in results {
        let o = &r.output;
        let delta = match o.gap {
            GapStatus::Certified { delta, .. } => format_real(delta),
            _ => String::new(),
        };
        let failed = o.failed_checks().join(";");
        w.write_record([
            r.spec.rounds.to_string(),
            r.spec.gap.to_string(),
            r.spec.dimension.to_string(),
            r.spec.trial.to_string(),
            r.spec.seed.to_string(),
            format_real(o.ledger.linearized_regret()),
            format_real(o.ledger.subopt_regret()),
            format_real(o.ledger.loss_sum()),
            delta,
            o.empirical.mistakes.to_string(),
            o.empirical.last_mistake.to_string(),
            failed,
        ])?;
    }
    w.flush().map_err(|e| HarnessError::io(path, e))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trial_seeds_and_dirs_are_deterministic() {
        let base = ExperimentConfig::with_seed(40);
        let grid = SweepGrid {
            rounds: vec![10, 20],
            gaps: vec![GapTarget::None, GapTarget::Margin(0.5)],
            dimensions: vec![3],
            trials: 2,
        };
        let specs = grid.trials(&base, Path::new("o"));
        assert_eq!(specs.len(), 8);
        assert_eq!(specs[0].seed, 40);
        assert_eq!(specs[1].seed, 41);
        assert_eq!(specs[3].dir, Path::new("o/T10_gap-margin-0.5_n3/trial1"));
    }
}
