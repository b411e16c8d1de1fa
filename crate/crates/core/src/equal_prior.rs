//! Equal-prior learner for states in the x-z plane.
//!
//! The measurement `|v0> = cos(phi)|0> + sin(phi)|1>` has count difference
//! `Delta(phi) = cos(alpha - 2 phi) cos(beta)` on the ensemble. Measuring it
//! at `phi0` and `phi0 + pi/4` gives the cosine and sine of `alpha - 2 phi0`
//! up to the common positive factor `cos(beta)`, which fixes `alpha` and
//! therefore the optimal setting `phi* = alpha/2 + pi/4`.
//!
//! Angles `alpha`, `beta` and `phi` here follow the state parametrization
//! `cos(g/2)|0> + sin(g/2)|1>`, i.e. polar angles from `+z` for Bloch
//! vectors, not the in-plane angle convention of [`crate::bloch`].

use std::f64::consts::{FRAC_PI_4, PI};

use crate::bloch::{reduce_mod, BlochVec, PlanarAngle, PlaneTag};
use crate::ensemble::{QubitSource, StreamRole, TrialStreams};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EqualPriorEstimate {
    pub alpha_hat: PlanarAngle,
    /// Optimal setting, reported modulo `pi`.
    pub phi_star: PlanarAngle,
    pub delta0: f64,
    pub delta1: f64,
    pub shots_used: u64,
}

impl EqualPriorEstimate {
    /// Bloch vector of the learned `Pi_0`.
    pub fn axis(&self) -> BlochVec {
        povm_axis_from_phi(self.phi_star.radians())
    }
}

/// Noise-free count difference `cos(alpha - 2 phi) cos(beta)`.
pub fn delta_analytic(alpha: f64, beta: f64, phi: f64) -> f64 {
    (alpha - 2.0 * phi).cos() * beta.cos()
}

/// Bloch vector of `|v0><v0|` for `|v0> = cos(phi)|0> + sin(phi)|1>`.
pub fn povm_axis_from_phi(phi: f64) -> BlochVec {
    let (s, c) = (2.0 * phi).sin_cos();
    BlochVec::new(s, 0.0, c)
}

/// Optimal setting for a given `alpha`, reduced modulo `pi`.
pub fn optimal_phi(alpha: f64) -> PlanarAngle {
    PlanarAngle::new(reduce_mod(alpha / 2.0 + FRAC_PI_4, PI))
}

/// Default weak-signal threshold: three binomial standard deviations at p = 1/2.
pub fn default_weak_threshold(shots: u64) -> f64 {
    3.0 / (shots as f64).sqrt()
}

/// Empirical `p0 - p1` for the setting `phi`.
pub fn estimate_delta<R: rand::Rng + ?Sized>(
    source: &mut QubitSource<'_>,
    phi: f64,
    shots: u64,
    rng: &mut R,
) -> Result<f64> {
    let batch = source.measure(&povm_axis_from_phi(phi), shots, rng)?;
    Ok(batch.mean())
}

/// Recovers `alpha` from `Delta(phi0)` and `Delta(phi0 + pi/4)`.
///
/// Uses both signs, so the result is determined modulo `2 pi` (the plain
/// ratio only fixes it modulo `pi`).
pub fn solve_alpha(delta0: f64, delta1: f64, phi0: f64, weak_threshold: f64) -> Result<PlanarAngle> {
    if delta0.abs().max(delta1.abs()) <= weak_threshold {
        return Err(Error::WeakSignal { delta0, delta1, threshold: weak_threshold });
    }
    Ok(PlanarAngle::new(2.0 * phi0 + delta1.atan2(delta0)))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EqualPriorLearner {
    pub phi0: f64,
    pub shots_per_setting: u64,
    /// `None` selects [`default_weak_threshold`].
    pub weak_threshold: Option<f64>,
}

impl EqualPriorLearner {
    pub fn new(phi0: f64, shots_per_setting: u64) -> Self {
        EqualPriorLearner { phi0, shots_per_setting, weak_threshold: None }
    }

    pub fn learn(&self, source: &mut QubitSource<'_>, streams: &TrialStreams) -> Result<EqualPriorEstimate> {
        if !source.priors().is_equal() {
            return Err(Error::InvalidPriors(format!(
                "equal-prior learner needs eta0 = eta1, got eta0 = {}",
                source.priors().eta0()
            )));
        }
        if source.plane() != PlaneTag::XZ {
            return Err(Error::Contract("equal-prior learner needs the x-z plane".into()));
        }
        let shots = self.shots_per_setting;
        let before = source.consumed();
        let delta0 = estimate_delta(source, self.phi0, shots, &mut streams.rng(StreamRole::SettingBase))?;
        let delta1 =
            estimate_delta(source, self.phi0 + FRAC_PI_4, shots, &mut streams.rng(StreamRole::SettingShifted))?;
        let tau = self.weak_threshold.unwrap_or_else(|| default_weak_threshold(shots));
        let alpha_hat = solve_alpha(delta0, delta1, self.phi0, tau)?;
        Ok(EqualPriorEstimate {
            alpha_hat,
            phi_star: optimal_phi(alpha_hat.radians()),
            delta0,
            delta1,
            shots_used: source.consumed() - before,
        })
    }
}

/// Runs the two-setting procedure with default threshold.
pub fn learn_equal_prior(
    source: &mut QubitSource<'_>,
    phi0: f64,
    shots_per_setting: u64,
    streams: &TrialStreams,
) -> Result<EqualPriorEstimate> {
    EqualPriorLearner::new(phi0, shots_per_setting).learn(source, streams)
}
