//! Property batteries behind the `oracle-check` and `selftest` subcommands.

use std::f64::consts::{PI, TAU};

use rand::Rng;
use serde::Serialize;

use crate::bloch::{perp_in_plane, prob_plus, BlochVec, PlaneTag};
use crate::constz::{cos_theta_z, decompose_constz, ConstZFrame};
use crate::decomposition::{decompose, mixture_targets, success_prob};
use crate::ensemble::{Case, Priors, RngStream};
use crate::equal_prior::{delta_analytic, solve_alpha};
use crate::error::Result;
use crate::helstrom::{equal_count_condition, helstrom};

pub const ORACLE_TOL: f64 = 1e-12;

/// Worst-case deviations over a batch of random consistent instances.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct OracleReport {
    pub instances: u64,
    /// `||m0| - |m1||`.
    pub norm_gap: f64,
    /// Distance of the Helstrom axis from `+-n_perp`.
    pub axis_error: f64,
    /// `|1/2 + lambda/2 - P_s|`.
    pub success_error: f64,
    /// Distance of `m0`, `m1` rebuilt from the case decompositions.
    pub recombination_error: f64,
}

impl OracleReport {
    pub fn passed(&self) -> bool {
        [self.norm_gap, self.axis_error, self.success_error, self.recombination_error].iter().all(|e| *e <= ORACLE_TOL)
    }
}

/// A random instance: priors, angle between the states, ensemble vector in x-z.
pub fn random_instance<R: Rng + ?Sized>(rng: &mut R) -> (Priors, f64, BlochVec) {
    let eta0 = rng.random_range(0.05..0.95);
    let theta = rng.random_range(0.05..PI - 0.05);
    let dir: f64 = rng.random_range(0.0..TAU);
    let priors = Priors::new(eta0).expect("interior prior");
    let e1 = priors.eta1();
    let norm = (eta0 * eta0 + e1 * e1 + 2.0 * eta0 * e1 * theta.cos()).sqrt();
    (priors, theta, BlochVec::new(norm * dir.cos(), 0.0, norm * dir.sin()))
}

/// Checks the mixture targets against the Helstrom oracle on random instances.
pub fn oracle_battery(instances: u64, seed: u64) -> Result<OracleReport> {
    let mut rng = RngStream::new(seed, 0).rng();
    let mut report = OracleReport { instances, ..Default::default() };
    for _ in 0..instances {
        let (priors, theta, n) = random_instance(&mut rng);
        let t = mixture_targets(&n, theta, priors)?;
        let h = helstrom(&t.m0, &t.m1)?;
        let perp = perp_in_plane(&n, PlaneTag::XZ)?;
        let a = decompose(&n, theta, priors, Case::A)?;
        let b = decompose(&n, theta, priors, Case::B)?;
        let (e0, e1) = (priors.eta0(), priors.eta1());
        let m0 = e0 * a.n0 + e1 * b.n1;
        let m1 = e1 * a.n1 + e0 * b.n0;
        report.norm_gap = report.norm_gap.max((t.m0.norm() - t.m1.norm()).abs());
        report.axis_error = report.axis_error.max(h.p0_axis.max_abs_diff(&perp).min(h.p0_axis.max_abs_diff(&-perp)));
        report.success_error = report.success_error.max((h.success - success_prob(priors, theta, n.norm())?).abs());
        report.recombination_error = report.recombination_error.max(m0.max_abs_diff(&t.m0).max(m1.max_abs_diff(&t.m1)));
    }
    Ok(report)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn outcome(name: &'static str, worst: f64, tol: f64) -> CheckOutcome {
    CheckOutcome { name, passed: worst <= tol, detail: format!("worst {worst:.3e} (tol {tol:.0e})") }
}

fn born_rule_complement() -> Result<CheckOutcome> {
    let mut rng = RngStream::new(11, 0).rng();
    let mut worst = 0.0f64;
    for _ in 0..2000 {
        let a: f64 = rng.random_range(0.0..TAU);
        let b: f64 = rng.random_range(0.0..PI);
        let s = BlochVec::new(b.sin() * a.cos(), b.sin() * a.sin(), b.cos());
        let n = s * rng.random_range(-1.0..1.0);
        worst = worst.max((prob_plus(&s, &n)? + prob_plus(&-s, &n)? - 1.0).abs());
    }
    Ok(CheckOutcome { name: "born rule complement", passed: worst == 0.0, detail: format!("worst {worst:e}") })
}

fn alpha_inversion_grid() -> Result<CheckOutcome> {
    let mut worst = 0.0f64;
    for k in 0..100 {
        let alpha = k as f64 * TAU / 100.0;
        for beta in [0.2, 0.6, 1.0] {
            for phi0 in [0.0, 0.3, 1.1] {
                let d0 = delta_analytic(alpha, beta, phi0);
                let d1 = delta_analytic(alpha, beta, phi0 + PI / 4.0);
                let got = solve_alpha(d0, d1, phi0, 0.0)?;
                worst = worst.max(got.wrapped_distance(alpha, TAU));
            }
        }
    }
    Ok(outcome("alpha inversion grid", worst, 1e-10))
}

fn decomposition_round_trip() -> Result<CheckOutcome> {
    let mut rng = RngStream::new(12, 0).rng();
    let mut worst = 0.0f64;
    for _ in 0..2000 {
        let (priors, theta, n) = random_instance(&mut rng);
        for case in [Case::A, Case::B] {
            let d = decompose(&n, theta, priors, case)?;
            let back = priors.eta0() * d.n0 + priors.eta1() * d.n1;
            worst = worst.max(back.max_abs_diff(&n)).max((d.n0.norm() - 1.0).abs()).max((d.n1.norm() - 1.0).abs());
        }
    }
    Ok(outcome("decomposition round trip", worst, 1e-12))
}

fn constz_coincident() -> Result<CheckOutcome> {
    let mut worst = 0.0f64;
    for nz in [-0.7, 0.0, 0.3, 0.9] {
        for eta0 in [0.2, 0.5, 0.8] {
            let radius = (1.0f64 - nz * nz).sqrt();
            let c = cos_theta_z(radius, nz, Priors::new(eta0)?)?;
            worst = worst.max((c - 1.0).abs());
            let frame = ConstZFrame::new(radius * 0.6, radius * 0.8, nz)?;
            let d = decompose_constz(&frame, 0.0, Priors::new(eta0)?, Case::A)?;
            worst = worst.max(d.n0.max_abs_diff(&frame.bloch())).max(d.n1.max_abs_diff(&frame.bloch()));
        }
    }
    Ok(outcome("constant-z coincident states", worst, 1e-12))
}

fn equal_purity() -> Result<CheckOutcome> {
    let mut rng = RngStream::new(13, 0).rng();
    let mut worst = 0.0f64;
    for _ in 0..2000 {
        let (priors, theta, n) = random_instance(&mut rng);
        let t = mixture_targets(&n, theta, priors)?;
        // n_perp is parallel to m0 - m1
        let perp = perp_in_plane(&n, PlaneTag::XZ)?;
        let along = perp.dot(&(t.m0 - t.m1)) - t.m0.distance(&t.m1);
        worst = worst.max(equal_count_condition(&t.m0, &t.m1).abs()).max(along.abs());
    }
    Ok(outcome("equal-purity mixtures", worst, 1e-12))
}

type Suite = (&'static str, fn() -> Result<CheckOutcome>);

/// Invariant suites that need no file I/O.
pub fn selftest() -> Vec<CheckOutcome> {
    let suites: [Suite; 5] = [
        ("born rule complement", born_rule_complement),
        ("alpha inversion grid", alpha_inversion_grid),
        ("decomposition round trip", decomposition_round_trip),
        ("constant-z coincident states", constz_coincident),
        ("equal-purity mixtures", equal_purity),
    ];
    let mut out: Vec<CheckOutcome> = suites
        .iter()
        .map(|&(name, f)| f().unwrap_or_else(|e| CheckOutcome { name, passed: false, detail: e.to_string() }))
        .collect();
    out.push(match oracle_battery(1000, 14) {
        Ok(r) => CheckOutcome {
            name: "oracle equivalence",
            passed: r.passed(),
            detail: format!(
                "norm {:.1e}, axis {:.1e}, success {:.1e}, recombination {:.1e}",
                r.norm_gap, r.axis_error, r.success_error, r.recombination_error
            ),
        },
        Err(e) => CheckOutcome { name: "oracle equivalence", passed: false, detail: e.to_string() },
    });
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn battery_passes() {
        let r = oracle_battery(500, 1).unwrap();
        assert!(r.passed(), "{r:?}");
        assert_eq!(r.instances, 500);
    }

    #[test]
    fn selftest_passes() {
        for c in selftest() {
            assert!(c.passed, "{}: {}", c.name, c.detail);
        }
    }
}
