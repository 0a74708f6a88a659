//! One experiment: generate a stream, run the learner, certify every bound
//! that applies, and write the trace and summary.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use invlin_core::analysis::{
    adaptive_bound, certify_gap, check_adaptive_bounds, check_entropy_simplex_bound, check_gap_bound,
    check_gap_inequality_all, check_gradient_energy, check_linearization, check_offset_bound, check_plateau,
    check_subopt_regret, check_total_loss_identity, empirical_constants, gap_bound, offline_evaluate, offset_bound,
    online_to_batch, BoundCheck, EmpiricalConstants, GapCertificate, OfflineEstimate, RegretLedger,
};
use invlin_core::learner::{build_schedule, Learner, Regularizer, RegularizerConfig, ScheduleKind};
use invlin_core::{EnumerationCap, Error as CoreError, Vector};

use crate::config::{ExperimentConfig, GapTarget};
use crate::error::{HarnessError, Result};
use crate::family::build_family;
use crate::generate::{build_regularizer_for, generate_instance_stream, holdout_sampler, holdout_seed, InstanceStream};
use crate::stream::{write_stream, StoredStream};
use crate::trace::{format_real, write_trace_file, TraceRow};

pub const TRACE_FILE: &str = "trace.csv";
pub const SUMMARY_FILE: &str = "summary.txt";
pub const STREAM_FILE: &str = "stream.txt";
pub const PREDICTION_FILE: &str = "prediction.txt";

#[derive(Debug, Clone, PartialEq)]
pub enum CheckStatus {
    Pass,
    Fail,
    /// Not applicable to this run.
    Skipped(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub name: String,
    pub status: CheckStatus,
    /// `min(bound - value)` over checked rounds; negative on failure.
    pub margin: Option<f64>,
    pub worst_round: Option<usize>,
    pub detail: Option<String>,
    /// Empirical checks are reported but never affect the exit status.
    pub empirical: bool,
}

impl CheckOutcome {
    fn from_check(c: &BoundCheck) -> Self {
        Self {
            name: c.name.to_string(),
            status: if c.passed { CheckStatus::Pass } else { CheckStatus::Fail },
            margin: Some(c.margin),
            worst_round: Some(c.worst_round),
            detail: None,
            empirical: false,
        }
    }

    fn skipped(name: &str, reason: impl Into<String>) -> Self {
        Self { name: name.into(), status: CheckStatus::Skipped(reason.into()), margin: None, worst_round: None, detail: None, empirical: false }
    }

    fn failed(name: &str, detail: impl Into<String>) -> Self {
        Self { name: name.into(), status: CheckStatus::Fail, margin: None, worst_round: None, detail: Some(detail.into()), empirical: false }
    }

    fn passed(name: &str, detail: impl Into<String>) -> Self {
        Self { name: name.into(), status: CheckStatus::Pass, margin: None, worst_round: None, detail: Some(detail.into()), empirical: false }
    }

    fn empirical(mut self) -> Self {
        self.empirical = true;
        self
    }

    /// A failed certified check.
    pub fn is_failure(&self) -> bool {
        self.status == CheckStatus::Fail && !self.empirical
    }
}

/// Outcome of gap certification on the training stream.
#[derive(Debug, Clone, PartialEq)]
pub enum GapStatus {
    Certified { delta: f64, delta_integral: Option<f64> },
    NotSatisfied { round: usize },
    /// Some feasible set exceeded the enumeration cap.
    Refused,
    NotRequested,
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub c_star: Vector,
    pub c_star_integral: Option<Vector>,
    pub config: RegularizerConfig,
    pub schedule: ScheduleKind,
    pub ledger: RegretLedger,
    pub rows: Vec<TraceRow>,
    pub gap: GapStatus,
    pub c_bar: Vector,
    pub offline: Option<OfflineEstimate>,
    pub empirical: EmpiricalConstants,
    pub checks: Vec<CheckOutcome>,
}

impl RunOutput {
    pub fn failed_checks(&self) -> Vec<&str> {
        self.checks.iter().filter(|c| c.is_failure()).map(|c| c.name.as_str()).collect()
    }

    pub fn passed(&self) -> bool {
        self.failed_checks().is_empty()
    }

    pub fn check(&self, name: &str) -> Option<&CheckOutcome> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn exit_code(&self) -> i32 {
        if self.passed() { 0 } else { 1 }
    }
}

/// `K` for a config: the explicit override, else the family's bound.
pub fn diameter_for(cfg: &ExperimentConfig, reg: &dyn Regularizer) -> Result<f64> {
    match cfg.diameter {
        Some(k) => Ok(k),
        None => Ok(build_family(cfg)?.diameter_bound(reg.norms())),
    }
}

/// Run the learner over a fixed stream. `ĉ_t` is computed before round `t`
/// is observed.
pub fn simulate(cfg: &ExperimentConfig, stream: &InstanceStream) -> Result<(RegretLedger, RegularizerConfig, ScheduleKind)> {
    let reg = build_regularizer_for(cfg)?;
    let schedule = build_schedule(&cfg.schedule)?;
    let kind = schedule.kind();
    let config = RegularizerConfig::for_regularizer(reg.as_ref(), diameter_for(cfg, reg.as_ref())?);
    let mut learner = Learner::new(reg, schedule, config)?;
    let mut ledger = RegretLedger::new();
    for obs in &stream.observations {
        let record = learner.step(obs, Some(&stream.c_star))?;
        ledger.push(record)?;
    }
    Ok((ledger, config, kind))
}

fn certify(cfg: &ExperimentConfig, stream: &InstanceStream, reg: &dyn Regularizer) -> Result<GapStatus> {
    if cfg.gap == GapTarget::None {
        return Ok(GapStatus::NotRequested);
    }
    let cap = EnumerationCap(cfg.enumeration_cap);
    let norms = reg.norms();
    let run = |c: &Vector| match certify_gap(&stream.observations, c, norms, cap) {
        Ok(cert) => Ok(Some(cert)),
        Err(CoreError::EnumerationRefused { .. }) => Ok(None),
        Err(e) => Err(HarnessError::from(e)),
    };
    let Some(cert) = run(&stream.c_star)? else {
        return Ok(GapStatus::Refused);
    };
    match cert {
        GapCertificate::NotSatisfied { round, .. } => Ok(GapStatus::NotSatisfied { round }),
        GapCertificate::Satisfied { delta, .. } => {
            let delta_integral = match &stream.c_star_integral {
                Some(ci) => run(ci)?.and_then(|c| c.delta()),
                None => None,
            };
            Ok(GapStatus::Certified { delta, delta_integral })
        }
    }
}

fn push_result(checks: &mut Vec<CheckOutcome>, name: &str, r: std::result::Result<BoundCheck, CoreError>) {
    match r {
        Ok(c) => checks.push(CheckOutcome::from_check(&c)),
        // a violated precondition means the configured constants are wrong
        Err(e) => checks.push(CheckOutcome::failed(name, e.to_string())),
    }
}

fn trace_rows(ledger: &RegretLedger, config: &RegularizerConfig, kind: ScheduleKind, gap: Option<f64>) -> Vec<TraceRow> {
    ledger
        .records()
        .iter()
        .zip(ledger.prefixes())
        .map(|(r, p)| TraceRow {
            t: r.round,
            l_sub: r.suboptimality,
            l_est: r.estimate,
            total: r.total,
            regret: p.regret,
            subopt_regret: p.subopt_regret,
            beta: r.beta,
            g_norm: r.grad_norm,
            bound_adaptive: (kind == ScheduleKind::Adaptive).then(|| adaptive_bound(config, p.sum_sq_grad)),
            bound_offset: (kind == ScheduleKind::Offset).then(|| offset_bound(config, p.round)),
            bound_gap: gap.map(|d| gap_bound(config, d)),
        })
        .collect()
}

/// Checks that need only the ledger: the loss identity, per-round
/// linearization, suboptimality-regret domination and the schedule's regret
/// bounds. `entropy_simplex` adds the closed-form simplex bound.
pub fn ledger_checks(
    ledger: &RegretLedger,
    config: &RegularizerConfig,
    kind: ScheduleKind,
    dimension: usize,
    entropy_simplex: bool,
) -> Vec<CheckOutcome> {
    let mut checks = Vec::new();
    checks.push(CheckOutcome::from_check(&check_total_loss_identity(ledger)));
    checks.push(CheckOutcome::from_check(&check_linearization(ledger)));
    checks.push(CheckOutcome::from_check(&check_subopt_regret(ledger)));

    match kind {
        ScheduleKind::Adaptive => {
            match check_adaptive_bounds(ledger, config, kind) {
                Ok(both) => {
                    checks.push(CheckOutcome::from_check(&both.adaptive));
                    checks.push(CheckOutcome::from_check(&both.uniform));
                }
                Err(e) => {
                    checks.push(CheckOutcome::failed("adaptive_bound", e.to_string()));
                    checks.push(CheckOutcome::failed("uniform_bound", e.to_string()));
                }
            }
            if entropy_simplex {
                push_result(
                    &mut checks,
                    "entropy_simplex_bound",
                    check_entropy_simplex_bound(ledger, config.diameter, dimension),
                );
            }
            checks.push(CheckOutcome::skipped("offset_bound", "adaptive schedule"));
        }
        ScheduleKind::Offset => {
            for name in ["adaptive_bound", "uniform_bound"] {
                checks.push(CheckOutcome::skipped(name, "offset schedule"));
            }
            push_result(&mut checks, "offset_bound", check_offset_bound(ledger, config, kind));
        }
    }
    checks
}

/// Simulate, certify and evaluate one stream. Pure: writes nothing.
pub fn run_stream(cfg: &ExperimentConfig, stream: &InstanceStream) -> Result<RunOutput> {
    let reg = build_regularizer_for(cfg)?;
    let norms = reg.norms();
    let (ledger, config, kind) = simulate(cfg, stream)?;
    let mut checks = ledger_checks(&ledger, &config, kind, cfg.dimension, cfg.regularizer == "simplex-entropy");

    let gap = certify(cfg, stream, reg.as_ref())?;
    let optimal = ledger.agent_always_optimal();
    match (&gap, cfg.gap) {
        (GapStatus::NotRequested, _) => checks.push(CheckOutcome::skipped("gap_certificate", "no gap target")),
        (GapStatus::Refused, _) => checks.push(CheckOutcome::skipped("gap_certificate", "enumeration refused")),
        (GapStatus::NotSatisfied { round }, _) => {
            let msg = format!("no positive gap at round {round}");
            if optimal {
                checks.push(CheckOutcome::failed("gap_certificate", msg));
            } else {
                checks.push(CheckOutcome::skipped("gap_certificate", format!("noisy agent: {msg}")));
            }
        }
        (GapStatus::Certified { delta, delta_integral }, target) => {
            checks.push(CheckOutcome::passed("gap_certificate", format!("delta = {}", format_real(*delta))));
            match (target, delta_integral) {
                (GapTarget::Integral, Some(di)) => {
                    let floor = 1.0 / config.diameter;
                    let ok = *di >= floor - invlin_core::tau(*di, floor);
                    let detail = format!("delta_integral = {}, 1/K = {}", format_real(*di), format_real(floor));
                    checks.push(if ok {
                        CheckOutcome::passed("integral_gap_floor", detail)
                    } else {
                        CheckOutcome::failed("integral_gap_floor", detail)
                    });
                }
                (GapTarget::Margin(target), _) => {
                    let detail = format!("delta = {}, target = {}", format_real(*delta), format_real(target));
                    checks.push(if *delta >= target {
                        CheckOutcome::passed("margin_target", detail)
                    } else {
                        CheckOutcome::failed("margin_target", detail)
                    });
                }
                _ => {}
            }
        }
    }

    let delta = match gap {
        // Δ = ∞ (every set a single point) still certifies: the bound is 0
        GapStatus::Certified { delta, .. } => Some(delta),
        _ => None,
    };
    let gap_names = ["gap_inequality", "gradient_energy", "gap_bound", "plateau"];
    let gap_applicable = match (delta, kind, optimal) {
        (None, ..) => Err("no certified gap"),
        (_, ScheduleKind::Offset, _) => Err("offset schedule"),
        (_, _, false) => Err("agent not always optimal"),
        (Some(d), ScheduleKind::Adaptive, true) => Ok(d),
    };
    match gap_applicable {
        Ok(d) => {
            push_result(
                &mut checks,
                "gap_inequality",
                check_gap_inequality_all(&ledger, &stream.c_star, &config, d, norms),
            );
            push_result(&mut checks, "gradient_energy", check_gradient_energy(&ledger, &config, d));
            push_result(&mut checks, "gap_bound", check_gap_bound(&ledger, &config, d));
            if ledger.rounds() >= cfg.burn_in {
                push_result(&mut checks, "plateau", check_plateau(&ledger, ledger.rounds()));
                if let Some(last) = checks.last_mut() {
                    *last = last.clone().empirical();
                }
            } else {
                checks.push(CheckOutcome::skipped("plateau", format!("fewer than burn_in = {} rounds", cfg.burn_in)).empirical());
            }
        }
        Err(reason) => {
            for name in gap_names {
                let c = CheckOutcome::skipped(name, reason);
                checks.push(if name == "plateau" { c.empirical() } else { c });
            }
        }
    }

    let c_bar = online_to_batch(ledger.records())?;
    let sampler = holdout_sampler(cfg, stream)?;
    let offline = offline_evaluate(&c_bar, &stream.c_star, &sampler, cfg.holdout, holdout_seed(cfg.seed))?;
    checks.push(CheckOutcome::from_check(&offline.check_against(ledger.subopt_regret(), ledger.rounds())));

    let empirical = empirical_constants(&ledger, &stream.c_star, norms)?;
    let bound_gap = if gap_applicable.is_ok() { delta } else { None };
    let rows = trace_rows(&ledger, &config, kind, bound_gap);
    Ok(RunOutput {
        c_star: stream.c_star.clone(),
        c_star_integral: stream.c_star_integral.clone(),
        config,
        schedule: kind,
        ledger,
        rows,
        gap,
        c_bar,
        offline: Some(offline),
        empirical,
        checks,
    })
}

fn vec_text(v: &Vector) -> String {
    v.iter().map(|x| format_real(*x)).collect::<Vec<_>>().join(" ")
}

/// `key = value` lines; check lines are `check.<name> = pass|FAIL|skipped ...`.
pub fn summary_text(cfg: &ExperimentConfig, out: &RunOutput) -> String {
    let mut s = String::new();
    let mut kv = |k: &str, v: String| {
        let _ = writeln!(s, "{k} = {v}");
    };
    kv("seed", cfg.seed.to_string());
    kv("rounds", cfg.rounds.to_string());
    kv("dimension", cfg.dimension.to_string());
    kv("family", cfg.family.clone());
    kv("regularizer", cfg.regularizer.clone());
    kv("schedule", cfg.schedule.clone());
    kv("gap_target", cfg.gap.to_string());
    kv("agent_noise", cfg.agent_noise.to_string());
    kv("lambda", format_real(out.config.lambda));
    kv("scale_b", format_real(out.config.scale));
    kv("offset_h", format_real(out.config.offset_radius));
    kv("diameter_k", format_real(out.config.diameter));
    kv("c_star", vec_text(&out.c_star));
    if let Some(ci) = &out.c_star_integral {
        kv("c_star_integral", vec_text(ci));
    }
    kv("final_regret", format_real(out.ledger.linearized_regret()));
    kv("final_subopt_regret", format_real(out.ledger.subopt_regret()));
    kv("final_loss_sum", format_real(out.ledger.loss_sum()));
    kv("sum_sq_grad", format_real(out.ledger.sum_sq_grad()));
    match &out.gap {
        GapStatus::Certified { delta, delta_integral } => {
            kv("gap_status", "certified".into());
            kv("gap_delta", format_real(*delta));
            if let Some(di) = delta_integral {
                kv("gap_delta_integral", format_real(*di));
            }
        }
        GapStatus::NotSatisfied { round } => kv("gap_status", format!("not-satisfied (round {round})")),
        GapStatus::Refused => kv("gap_status", "refused (enumeration cap)".into()),
        GapStatus::NotRequested => kv("gap_status", "not-requested".into()),
    }
    kv("c_bar", vec_text(&out.c_bar));
    if let Some(o) = &out.offline {
        kv("offline_samples", o.samples.to_string());
        kv("offline_prediction_loss", format_real(o.prediction_loss));
        kv("offline_truth_loss", format_real(o.truth_loss));
        kv("offline_std_err", format_real(o.std_err));
    }
    kv("empirical_max_grad_norm", format_real(out.empirical.max_grad_norm));
    kv("empirical_max_dual_distance", format_real(out.empirical.max_dual_distance));
    kv("mistakes", out.empirical.mistakes.to_string());
    kv("last_mistake", out.empirical.last_mistake.to_string());
    for c in &out.checks {
        let mut line = match &c.status {
            CheckStatus::Pass => "pass".to_string(),
            CheckStatus::Fail if c.empirical => "FAIL (empirical, not counted)".to_string(),
            CheckStatus::Fail => "FAIL".to_string(),
            CheckStatus::Skipped(why) => format!("skipped ({why})"),
        };
        if let Some(m) = c.margin {
            let _ = write!(line, " margin={}", format_real(m));
        }
        if let Some(r) = c.worst_round {
            let _ = write!(line, " worst_round={r}");
        }
        if let Some(d) = &c.detail {
            let _ = write!(line, " [{d}]");
        }
        kv(&format!("check.{}", c.name), line);
    }
    let failed = out.failed_checks();
    kv("failed", if failed.is_empty() { "none".into() } else { failed.join(",") });
    kv("status", if failed.is_empty() { "pass".into() } else { "fail".into() });
    s
}

#[derive(Debug, Clone)]
pub struct RunReport {
    pub output: RunOutput,
    pub dir: PathBuf,
}

impl RunReport {
    pub fn trace_path(&self) -> PathBuf {
        self.dir.join(TRACE_FILE)
    }

    pub fn summary_path(&self) -> PathBuf {
        self.dir.join(SUMMARY_FILE)
    }

    pub fn exit_code(&self) -> i32 {
        self.output.exit_code()
    }
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| HarnessError::io(path, e))
}

/// Generate, run and write `trace.csv`, `summary.txt` and `prediction.txt`
/// (the averaged prediction) into `cfg.out`, plus `stream.txt` if
/// `cfg.save_stream`.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<RunReport> {
    cfg.validate()?;
    let stream = generate_instance_stream(cfg)?;
    let output = run_stream(cfg, &stream)?;
    let dir = cfg.out.clone();
    std::fs::create_dir_all(&dir).map_err(|e| HarnessError::io(&dir, e))?;
    write_trace_file(&dir.join(TRACE_FILE), &output.rows)?;
    write_text(&dir.join(SUMMARY_FILE), &summary_text(cfg, &output))?;
    if cfg.save_stream {
        write_stream(&dir.join(STREAM_FILE), &StoredStream::from(&stream))?;
    }
    write_text(&dir.join(PREDICTION_FILE), &format!("{}\n", vec_text(&output.c_bar)))?;
    Ok(RunReport { output, dir })
}

/// Mean `ℓ_sub(prediction)` over a stored stream. Without `c*` the truth
/// loss is reported as 0 and the standard error is that of the prediction
/// loss alone.
pub fn evaluate_stream(prediction: &Vector, stream: &StoredStream) -> Result<OfflineEstimate> {
    use invlin_core::loss::suboptimality_loss;
    if stream.observations.is_empty() {
        return Err(HarnessError::Config("stream has no observations".into()));
    }
    let mut pred_sum = 0.0;
    let mut truth_sum = 0.0;
    let mut diffs = Vec::with_capacity(stream.observations.len());
    for obs in &stream.observations {
        let pred = suboptimality_loss(obs.feasible_set(), obs.agent_choice(), prediction)?.value;
        let truth = match &stream.c_star {
            Some(c) => suboptimality_loss(obs.feasible_set(), obs.agent_choice(), c)?.value,
            None => 0.0,
        };
        pred_sum += pred;
        truth_sum += truth;
        diffs.push(pred - truth);
    }
    let m = diffs.len() as f64;
    let mean = diffs.iter().sum::<f64>() / m;
    let std_err = if diffs.len() > 1 {
        (diffs.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (m - 1.0) / m).sqrt()
    } else {
        0.0
    };
    Ok(OfflineEstimate { samples: diffs.len(), prediction_loss: pred_sum / m, truth_loss: truth_sum / m, std_err })
}
