//! Per-trial pipeline: generate, learn, classify, score.

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::config::{ExperimentConfig, Scenario, SweepGrid};
use crate::bloch::{BlochVec, PlanarAngle, PlaneTag};
use crate::classify::{classify_holdout, score, LabelOrientation};
use crate::constz::{cos_theta_z_estimated, learn_axis_constz, mixture_targets_constz, ConstZFrame};
use crate::decomposition::{cos_theta_estimated, learn_axis_equal_counts, success_prob, theta_from_cos};
use crate::ensemble::{Case, EnsembleSpec, Priors, QubitSource, StreamRole, TrialStreams};
use crate::equal_prior::EqualPriorLearner;
use crate::error::Result;
use crate::helstrom::helstrom;

/// One row of output. Optional fields are absent when the pipeline stopped
/// before producing them; `status` then carries the error tag.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrialResult {
    pub trial: u64,
    pub cell: u64,
    pub scenario: Scenario,
    pub case: Option<Case>,
    pub eta0: f64,
    pub theta_true: f64,
    pub alpha_true: f64,
    pub beta_true: f64,
    pub n_z: Option<f64>,
    pub axis: Option<BlochVec>,
    pub alpha_hat: Option<f64>,
    pub theta_hat: Option<f64>,
    pub n_hat: Option<BlochVec>,
    /// Holdout success under the conventional label orientation.
    pub success_emp: Option<f64>,
    /// Holdout success under the better orientation.
    pub success_oriented: Option<f64>,
    pub swapped: Option<bool>,
    pub holdout_correct: Option<u64>,
    pub success_analytic: Option<f64>,
    pub success_oracle: Option<f64>,
    pub z_score: Option<f64>,
    /// Qubits consumed by learning.
    pub shots_learn: u64,
    /// Qubits consumed by the holdout.
    pub shots_holdout: u64,
    pub qubits_consumed: u64,
    pub status: String,
}

impl TrialResult {
    pub fn is_ok(&self) -> bool {
        self.status == "ok"
    }
}

/// Pooled holdout statistics of one grid cell.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CellSummary {
    pub cell: u64,
    pub scenario: Scenario,
    pub eta0: f64,
    pub theta: f64,
    pub alpha: f64,
    pub beta: f64,
    pub n_z: Option<f64>,
    pub trials: u64,
    pub ok_trials: u64,
    pub holdout_total: u64,
    pub pooled_success: Option<f64>,
    pub success_analytic: Option<f64>,
    pub pooled_z: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentOutput {
    pub rows: Vec<TrialResult>,
    pub summary: Vec<CellSummary>,
}

struct Truth {
    spec: EnsembleSpec,
    analytic: Result<f64, &'static str>,
    oracle: Result<f64, &'static str>,
    theta: f64,
    beta: f64,
}

fn plane_of(cfg: &ExperimentConfig) -> PlaneTag {
    match cfg.scenario {
        Scenario::ConstZ => PlaneTag::ConstZ(cfg.nz),
        _ => PlaneTag::XZ,
    }
}

/// Success of the Helstrom measurement on the two case mixtures, built from
/// the states of both decompositions rather than from the closed forms.
fn oracle_from_states(priors: Priors, a: &EnsembleSpec, b: &EnsembleSpec) -> Result<f64> {
    let (e0, e1) = (priors.eta0(), priors.eta1());
    let m0 = e0 * a.psi0 + e1 * b.psi1;
    let m1 = e1 * a.psi1 + e0 * b.psi0;
    Ok(helstrom(&m0, &m1)?.success)
}

fn ground_truth(cfg: &ExperimentConfig, case: Option<Case>) -> Result<Truth> {
    match cfg.scenario {
        Scenario::EqualPriorXz => {
            let spec = EnsembleSpec::equal_prior_xz(cfg.alpha, cfg.beta)?;
            let oracle = helstrom(&spec.psi0, &spec.psi1).map(|h| h.success).map_err(|e| e.status_tag());
            Ok(Truth {
                spec,
                analytic: Ok(0.5 * (1.0 + cfg.beta.sin())),
                oracle,
                theta: 2.0 * cfg.beta,
                beta: cfg.beta,
            })
        }
        Scenario::UnequalPriorXz | Scenario::ConstZ => {
            let priors = Priors::new(cfg.eta0)?;
            let plane = plane_of(cfg);
            let build = |c| EnsembleSpec::from_mixture_geometry(priors, cfg.theta, cfg.alpha, plane, c);
            let (a, b) = (build(Case::A)?, build(Case::B)?);
            let spec = match case.unwrap_or(Case::A) {
                Case::A => a.clone(),
                Case::B => b.clone(),
            };
            let n = spec.ensemble_bloch();
            let analytic = match cfg.scenario {
                Scenario::ConstZ => ConstZFrame::from_bloch(&n)
                    .and_then(|f| mixture_targets_constz(&f, cfg.theta, priors))
                    .and_then(|t| helstrom(&t.m0, &t.m1))
                    .map(|h| h.success),
                _ => success_prob(priors, cfg.theta, n.norm()),
            }
            .map_err(|e| e.status_tag());
            let oracle = oracle_from_states(priors, &a, &b).map_err(|e| e.status_tag());
            Ok(Truth { spec, analytic, oracle, theta: cfg.theta, beta: cfg.theta / 2.0 })
        }
    }
}

struct Learned {
    axis: BlochVec,
    alpha_hat: f64,
    theta_hat: Option<f64>,
    n_hat: Option<BlochVec>,
}

fn learn(cfg: &ExperimentConfig, source: &mut QubitSource<'_>, streams: &TrialStreams) -> Result<Learned> {
    let priors = source.priors();
    match cfg.scenario {
        Scenario::EqualPriorXz => {
            let learner = EqualPriorLearner {
                phi0: cfg.phi0,
                shots_per_setting: cfg.shots_learn,
                weak_threshold: cfg.weak_threshold,
            };
            let est = learner.learn(source, streams)?;
            // the tuning amplitude is cos(beta); theta = 2 beta
            let amp = est.delta0.hypot(est.delta1);
            Ok(Learned {
                axis: est.axis(),
                alpha_hat: est.alpha_hat.radians(),
                theta_hat: Some(2.0 * theta_from_cos(amp)),
                n_hat: None,
            })
        }
        Scenario::UnequalPriorXz => {
            let est = learn_axis_equal_counts(source, cfg.shots_learn, streams)?;
            let theta_hat = cos_theta_estimated(est.n_hat.norm(), priors).ok().map(theta_from_cos);
            Ok(Learned {
                axis: est.axis,
                alpha_hat: PlaneTag::XZ.angle_of(&est.n_hat).radians(),
                theta_hat,
                n_hat: Some(est.n_hat),
            })
        }
        Scenario::ConstZ => {
            let plane = source.plane();
            let est = learn_axis_constz(source, cfg.shots_learn, streams)?.estimate;
            let r = plane.in_plane_part(&est.n_hat);
            let theta_hat = cos_theta_z_estimated(r.norm(), plane.offset(), priors).ok().map(theta_from_cos);
            Ok(Learned {
                axis: est.axis,
                alpha_hat: plane.angle_of(&est.n_hat).radians(),
                theta_hat,
                n_hat: Some(est.n_hat),
            })
        }
    }
}

/// Runs trial `index` (global across the grid) of one cell.
pub fn run_trial(cfg: &ExperimentConfig, cell: u64, index: u64) -> Result<TrialResult> {
    cfg.validate()?;
    let streams = TrialStreams::new(cfg.seed, index);
    let case = match cfg.scenario {
        Scenario::EqualPriorXz => None,
        _ => Some(if streams.rng(StreamRole::CaseDraw).random_bool(0.5) { Case::B } else { Case::A }),
    };
    let truth = ground_truth(cfg, case)?;
    let mut row = TrialResult {
        trial: index,
        cell,
        scenario: cfg.scenario,
        case,
        eta0: truth.spec.priors.eta0(),
        theta_true: truth.theta,
        alpha_true: PlanarAngle::new(cfg.alpha).radians(),
        beta_true: truth.beta,
        n_z: (cfg.scenario == Scenario::ConstZ).then_some(cfg.nz),
        axis: None,
        alpha_hat: None,
        theta_hat: None,
        n_hat: None,
        success_emp: None,
        success_oriented: None,
        swapped: None,
        holdout_correct: None,
        success_analytic: truth.analytic.as_ref().ok().copied(),
        success_oracle: truth.oracle.as_ref().ok().copied(),
        z_score: None,
        shots_learn: 0,
        shots_holdout: 0,
        qubits_consumed: 0,
        status: "ok".into(),
    };

    let mut source = QubitSource::new(&truth.spec);
    let outcome = (|| -> Result<(), &'static str> {
        let learned = learn(cfg, &mut source, &streams);
        row.shots_learn = source.consumed();
        let learned = learned.map_err(|e| e.status_tag())?;
        row.axis = Some(learned.axis);
        row.alpha_hat = Some(learned.alpha_hat);
        row.theta_hat = learned.theta_hat;
        row.n_hat = learned.n_hat;

        let confusion =
            classify_holdout(&mut source, &learned.axis, cfg.shots_holdout, &mut streams.rng(StreamRole::Holdout))
                .map_err(|e| e.status_tag())?;
        row.shots_holdout = source.consumed() - row.shots_learn;
        let convention = LabelOrientation::for_case(case);
        row.holdout_correct = Some(confusion.correct(convention));
        let analytic = match truth.analytic {
            Ok(p) => p,
            Err(e) => {
                // still report the empirical side before surfacing the error
                let n = confusion.total() as f64;
                row.success_emp = Some(confusion.correct(convention) as f64 / n);
                row.success_oriented = Some(confusion.diagonal().max(confusion.anti_diagonal()) as f64 / n);
                return Err(e);
            }
        };
        let report = score(&confusion, analytic, convention).map_err(|e| e.status_tag())?;
        row.success_emp = Some(report.convention_success);
        row.success_oriented = Some(report.empirical_success);
        row.swapped = Some(report.swapped);
        row.z_score = Some(report.z_score);
        truth.oracle.map(|_| ())
    })();
    row.qubits_consumed = source.consumed();
    if let Err(tag) = outcome {
        row.status = tag.to_string();
    }
    Ok(row)
}

fn summarize(cell: u64, cfg: &ExperimentConfig, rows: &[TrialResult]) -> CellSummary {
    let ok: Vec<&TrialResult> = rows.iter().filter(|r| r.is_ok()).collect();
    let holdout_total: u64 = ok.iter().map(|r| r.shots_holdout).sum();
    let correct: u64 = ok.iter().filter_map(|r| r.holdout_correct).sum();
    let pooled = (holdout_total > 0).then(|| correct as f64 / holdout_total as f64);
    let analytic = rows.iter().find_map(|r| r.success_analytic);
    let pooled_z = match (pooled, analytic) {
        (Some(p), Some(a)) => {
            let var = a * (1.0 - a) / holdout_total as f64;
            let sigma = if var > 0.0 { var.sqrt() } else { 1.0 / holdout_total as f64 };
            Some((p - a) / sigma)
        }
        _ => None,
    };
    let truth_row = rows.first();
    CellSummary {
        cell,
        scenario: cfg.scenario,
        eta0: truth_row.map_or(cfg.eta0, |r| r.eta0),
        theta: truth_row.map_or(cfg.theta, |r| r.theta_true),
        alpha: PlanarAngle::new(cfg.alpha).radians(),
        beta: truth_row.map_or(cfg.beta, |r| r.beta_true),
        n_z: (cfg.scenario == Scenario::ConstZ).then_some(cfg.nz),
        trials: rows.len() as u64,
        ok_trials: ok.len() as u64,
        holdout_total,
        pooled_success: pooled,
        success_analytic: analytic,
        pooled_z,
    }
}

/// Runs every cell of a grid. Trial `t` of cell `c` uses the global index
/// `c * trials + t` for its random streams and its row number; rows come
/// back in that order whatever the scheduling.
pub fn run_sweep(grid: &SweepGrid) -> Result<ExperimentOutput> {
    let cells = grid.cells();
    for c in &cells {
        c.validate()?;
    }
    let trials = grid.base.trials;
    let jobs: Vec<(u64, u64)> = (0..cells.len() as u64).flat_map(|c| (0..trials).map(move |t| (c, t))).collect();
    let rows =
        jobs.par_iter().map(|&(c, t)| run_trial(&cells[c as usize], c, c * trials + t)).collect::<Result<Vec<_>>>()?;
    let summary = cells
        .iter()
        .enumerate()
        .map(|(c, cfg)| {
            let start = c * trials as usize;
            summarize(c as u64, cfg, &rows[start..start + trials as usize])
        })
        .collect();
    Ok(ExperimentOutput { rows, summary })
}

/// Runs `config.trials` trials of a single scenario.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentOutput> {
    run_sweep(&SweepGrid::single(config.clone()))
}
