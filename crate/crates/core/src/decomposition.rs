//! Unequal priors in the x-z plane.
//!
//! With known priors, a measured ensemble vector `n` fixes the angle `theta`
//! between the two pure states but leaves two mirror-image decompositions
//! (cases A and B). The learned measurement must therefore discriminate the
//! equiprobable mixtures `rho0 = eta0 rho0^A + eta1 rho1^B` and
//! `rho1 = eta1 rho1^A + eta0 rho0^B`, whose Bloch vectors `m0`, `m1` have
//! equal length. The optimal axis is then `s = n_perp`, found by measuring
//! only `sigma_x` and `sigma_z`.

use crate::bloch::{perp_in_plane, BlochVec, PlanarAngle, PlaneTag, EPS_CLAMP, EPS_DEGENERATE, EPS_PHYS};
use crate::ensemble::{estimate_pauli, Case, Priors, QubitSource, TrialStreams};
use crate::error::{Error, Result};

/// One of the two pure-state decompositions of an ensemble vector.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DecompositionPair {
    pub n0: BlochVec,
    pub n1: BlochVec,
    pub case: Case,
}

/// Bloch vectors of the two equiprobable mixtures to discriminate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MixtureTargets {
    pub m0: BlochVec,
    pub m1: BlochVec,
    pub theta: PlanarAngle,
}

/// `cos(theta) = (|n|^2 - eta0^2 - eta1^2) / (2 eta0 eta1)` for exact inputs.
pub fn cos_theta(n_norm: f64, priors: Priors) -> Result<f64> {
    cos_theta_within(n_norm, priors, EPS_PHYS)
}

/// As [`cos_theta`], but tolerating shot noise up to [`EPS_CLAMP`] past `[-1, 1]`.
pub fn cos_theta_estimated(n_norm: f64, priors: Priors) -> Result<f64> {
    cos_theta_within(n_norm, priors, EPS_CLAMP)
}

pub(crate) fn cos_theta_within(n_norm: f64, priors: Priors, tolerance: f64) -> Result<f64> {
    priors.require_interior()?;
    let (e0, e1) = (priors.eta0(), priors.eta1());
    let c = (n_norm * n_norm - e0 * e0 - e1 * e1) / (2.0 * e0 * e1);
    clamp_cosine(c, tolerance)
}

pub(crate) fn clamp_cosine(c: f64, tolerance: f64) -> Result<f64> {
    if !c.is_finite() || c.abs() > 1.0 + tolerance {
        return Err(Error::CosThetaOutOfRange { value: c, tolerance });
    }
    Ok(c.clamp(-1.0, 1.0))
}

/// Principal angle in `[0, pi]` for a cosine.
pub fn theta_from_cos(c: f64) -> f64 {
    c.clamp(-1.0, 1.0).acos()
}

fn require_theta(theta: f64) -> Result<()> {
    if (0.0..=std::f64::consts::PI).contains(&theta) {
        Ok(())
    } else {
        Err(Error::Contract(format!("theta = {theta} outside [0, pi]")))
    }
}

/// Applies the case matrices to the plane coordinates `(u, w)` of an ensemble
/// vector, with the overall `prefactor` (`1/|n|^2` for unit states).
pub(crate) fn apply_case_matrices(
    (u, w): (f64, f64),
    theta: f64,
    priors: Priors,
    case: Case,
    prefactor: f64,
) -> ((f64, f64), (f64, f64)) {
    let (e0, e1) = (priors.eta0(), priors.eta1());
    let (s, c) = theta.sin_cos();
    let d0 = e0 + e1 * c;
    let d1 = e1 + e0 * c;
    // case B mirrors the off-diagonal signs of case A
    let sign = match case {
        Case::A => 1.0,
        Case::B => -1.0,
    };
    let o0 = sign * e1 * s;
    let o1 = sign * e0 * s;
    let n0 = (prefactor * (d0 * u - o0 * w), prefactor * (o0 * u + d0 * w));
    let n1 = (prefactor * (d1 * u + o1 * w), prefactor * (-o1 * u + d1 * w));
    (n0, n1)
}

/// The case-A or case-B pure states reproducing the x-z ensemble vector `n`.
pub fn decompose(n: &BlochVec, theta: f64, priors: Priors, case: Case) -> Result<DecompositionPair> {
    PlaneTag::XZ.require_contains(n, "ensemble vector")?;
    require_theta(theta)?;
    let norm_sq = n.norm_sq();
    if !(norm_sq.sqrt() > EPS_DEGENERATE) {
        return Err(Error::DegenerateEnsemble(format!("|n| = {:e}", norm_sq.sqrt())));
    }
    let coords = PlaneTag::XZ.plane_coords(n);
    let ((u0, w0), (u1, w1)) = apply_case_matrices(coords, theta, priors, case, 1.0 / norm_sq);
    Ok(DecompositionPair { n0: PlaneTag::XZ.from_coords(u0, w0, 0.0), n1: PlaneTag::XZ.from_coords(u1, w1, 0.0), case })
}

/// `m0 = n + (2 eta0 eta1 sin(theta) / |n|) n_perp`, `m1` with the opposite sign.
pub fn mixture_targets(n: &BlochVec, theta: f64, priors: Priors) -> Result<MixtureTargets> {
    PlaneTag::XZ.require_contains(n, "ensemble vector")?;
    require_theta(theta)?;
    let perp = perp_in_plane(n, PlaneTag::XZ)?;
    let k = 2.0 * priors.eta0() * priors.eta1() * theta.sin() / n.norm();
    let targets = MixtureTargets { m0: *n + k * perp, m1: *n - k * perp, theta: PlanarAngle::new(theta) };
    debug_assert!({
        let (c0, c1) = mixture_targets_components(n, theta, priors);
        let scale = 1.0 + k;
        c0.max_abs_diff(&targets.m0) <= 1e-12 * scale && c1.max_abs_diff(&targets.m1) <= 1e-12 * scale
    });
    Ok(targets)
}

/// Component form of the mixture vectors, written out over `|n|^2`.
pub fn mixture_targets_components(n: &BlochVec, theta: f64, priors: Priors) -> (BlochVec, BlochVec) {
    let nn = n.norm_sq();
    let k = 2.0 * priors.eta0() * priors.eta1() * theta.sin();
    let m0 = BlochVec::new((n.x * nn - k * n.z) / nn, 0.0, (k * n.x + n.z * nn) / nn);
    let m1 = BlochVec::new((n.x * nn + k * n.z) / nn, 0.0, (-k * n.x + n.z * nn) / nn);
    (m0, m1)
}

/// Success probability `1/2 + eta0 eta1 sin(theta) / |n|` of `s = n_perp`,
/// averaged over equally likely cases A and B.
pub fn success_prob(priors: Priors, theta: f64, n_norm: f64) -> Result<f64> {
    require_theta(theta)?;
    if !(n_norm > EPS_DEGENERATE) {
        return Err(Error::DegenerateEnsemble(format!("|n| = {n_norm:e}")));
    }
    Ok(0.5 + priors.eta0() * priors.eta1() * theta.sin() / n_norm)
}

/// A learned measurement axis with the estimate it was derived from.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AxisEstimate {
    pub axis: BlochVec,
    pub n_hat: BlochVec,
    pub shots_used: u64,
}

/// Estimates `n` from `sigma_x`, `sigma_z` and returns the equal-count axis `n_perp`.
pub fn learn_axis_equal_counts(
    source: &mut QubitSource<'_>,
    shots_per_axis: u64,
    streams: &TrialStreams,
) -> Result<AxisEstimate> {
    if source.plane() != PlaneTag::XZ {
        return Err(Error::Contract("equal-count learner needs the x-z plane".into()));
    }
    let est = estimate_pauli(source, shots_per_axis, streams)?;
    let axis = perp_in_plane(&est.n_hat, PlaneTag::XZ)?;
    Ok(AxisEstimate { axis, n_hat: est.n_hat, shots_used: est.shots_used() })
}
