//! The hidden two-state ensemble and the measurement channel learners use.
//!
//! Learners never see an [`EnsembleSpec`]'s states directly: they hold a
//! [`QubitSource`], which only answers projective measurements and counts
//! every qubit it destroys.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use crate::bloch::{prob_plus_unchecked, BlochVec, PlaneTag, EPS_PHYS};
use crate::error::{Error, Result};

/// Prior probabilities `(eta0, eta1)` of the two hidden states.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Priors {
    eta0: f64,
    eta1: f64,
}

impl Priors {
    pub const EQUAL: Priors = Priors { eta0: 0.5, eta1: 0.5 };

    pub fn new(eta0: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&eta0) {
            return Err(Error::InvalidPriors(format!("eta0 = {eta0} outside [0, 1]")));
        }
        Ok(Priors { eta0, eta1: 1.0 - eta0 })
    }

    pub fn from_pair(eta0: f64, eta1: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&eta0) || !(0.0..=1.0).contains(&eta1) {
            return Err(Error::InvalidPriors(format!("({eta0}, {eta1}) not probabilities")));
        }
        if (eta0 + eta1 - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidPriors(format!("eta0 + eta1 = {} != 1", eta0 + eta1)));
        }
        Ok(Priors { eta0, eta1 })
    }

    pub fn eta0(&self) -> f64 {
        self.eta0
    }

    pub fn eta1(&self) -> f64 {
        self.eta1
    }

    pub fn is_equal(&self) -> bool {
        (self.eta0 - self.eta1).abs() <= 1e-12
    }

    /// Both priors strictly inside `(0, 1)`.
    pub(crate) fn require_interior(&self) -> Result<()> {
        if self.eta0 > 0.0 && self.eta1 > 0.0 {
            Ok(())
        } else {
            Err(Error::InvalidPriors(format!("need 0 < eta0 < 1, got eta0 = {}", self.eta0)))
        }
    }
}

/// Which of the two mirror-image decompositions of a fixed ensemble holds.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Case {
    /// `n1` sits at `alpha - theta` when `n0` sits at `alpha`.
    A,
    /// `n1` sits at `alpha + theta` when `n0` sits at `alpha`.
    B,
}

impl fmt::Display for Case {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Case::A => "A",
            Case::B => "B",
        })
    }
}

/// Ground truth of an ensemble: two pure states with priors, in a known plane.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSpec {
    pub priors: Priors,
    pub psi0: BlochVec,
    pub psi1: BlochVec,
    pub plane: PlaneTag,
    pub case: Option<Case>,
}

impl EnsembleSpec {
    pub fn new(priors: Priors, psi0: BlochVec, psi1: BlochVec, plane: PlaneTag, case: Option<Case>) -> Result<Self> {
        plane.validate()?;
        for (name, psi) in [("psi0", &psi0), ("psi1", &psi1)] {
            if !psi.is_pure() {
                return Err(Error::Contract(format!("{name} = {psi} is not a pure state")));
            }
            plane.require_contains(psi, name)?;
        }
        Ok(EnsembleSpec { priors, psi0, psi1, plane, case })
    }

    /// Equal-prior x-z ensemble with `psi0 = cos((a+b)/2)|0> + sin((a+b)/2)|1>`
    /// and `psi1` the same with `a - b`. Both angles are polar angles from `+z`.
    pub fn equal_prior_xz(alpha: f64, beta: f64) -> Result<Self> {
        if !(0.0..=std::f64::consts::FRAC_PI_2).contains(&beta) {
            return Err(Error::Config(format!("beta = {beta} outside [0, pi/2]")));
        }
        EnsembleSpec::new(
            Priors::EQUAL,
            crate::bloch::bloch_from_state_angle(alpha + beta),
            crate::bloch::bloch_from_state_angle(alpha - beta),
            PlaneTag::XZ,
            None,
        )
    }

    /// Builds the ensemble whose states subtend `theta` and whose ensemble
    /// Bloch vector points along the in-plane angle `n_direction`, realized as
    /// decomposition `case`.
    ///
    /// The construction is purely angular: `n0` at `a`, `n1` at `a -/+ theta`,
    /// with `a` chosen so that `eta0 n0 + eta1 n1` has direction `n_direction`.
    pub fn from_mixture_geometry(
        priors: Priors,
        theta: f64,
        n_direction: f64,
        plane: PlaneTag,
        case: Case,
    ) -> Result<Self> {
        plane.validate()?;
        if !(0.0..=std::f64::consts::PI).contains(&theta) {
            return Err(Error::Config(format!("theta = {theta} outside [0, pi]")));
        }
        let (eta0, eta1) = (priors.eta0, priors.eta1);
        let turn = match case {
            Case::A => -theta,
            Case::B => theta,
        };
        // n = e^{ia} (eta0 + eta1 e^{i turn})
        let offset = (eta1 * turn.sin()).atan2(eta0 + eta1 * turn.cos());
        let a0 = n_direction - offset;
        let a1 = a0 + turn;
        let height = plane.offset();
        let radius = (1.0 - height * height).sqrt();
        let psi0 = plane.from_coords(radius * a0.cos(), radius * a0.sin(), height);
        let psi1 = plane.from_coords(radius * a1.cos(), radius * a1.sin(), height);
        EnsembleSpec::new(priors, psi0, psi1, plane, Some(case))
    }

    /// Ensemble Bloch vector `eta0 psi0 + eta1 psi1`.
    pub fn ensemble_bloch(&self) -> BlochVec {
        self.priors.eta0 * self.psi0 + self.priors.eta1 * self.psi1
    }

    pub fn state(&self, label: u8) -> BlochVec {
        if label == 0 {
            self.psi0
        } else {
            self.psi1
        }
    }

    /// Draws one member: its hidden label and pure state.
    pub fn draw_qubit<R: Rng + ?Sized>(&self, rng: &mut R) -> (u8, BlochVec) {
        let label = if rng.random::<f64>() < self.priors.eta0 { 0 } else { 1 };
        (label, self.state(label))
    }

    /// Probability that a fresh member gives `+1` along `axis`.
    pub fn prob_plus_mixture(&self, axis: &BlochVec) -> f64 {
        self.priors.eta0 * prob_plus_unchecked(axis, &self.psi0)
            + self.priors.eta1 * prob_plus_unchecked(axis, &self.psi1)
    }

    /// Measures `shots` fresh members along `axis`.
    ///
    /// Each member is independently state 0 with probability `eta0` and then
    /// gives `+1` with that state's Born probability, so the `+1` count is
    /// exactly binomial in the mixture probability; it is sampled as such.
    pub fn measure_shots<R: Rng + ?Sized>(&self, axis: &BlochVec, shots: u64, rng: &mut R) -> Result<ShotBatch> {
        axis.require_unit("measurement axis")?;
        if shots == 0 {
            return Err(Error::Contract("shots must be >= 1".into()));
        }
        let p = self.prob_plus_mixture(axis).clamp(0.0, 1.0);
        let n_plus = sample_binomial(shots, p, rng);
        Ok(ShotBatch { axis: *axis, n_plus, n_minus: shots - n_plus, total: shots })
    }
}

pub(crate) fn sample_binomial<R: Rng + ?Sized>(n: u64, p: f64, rng: &mut R) -> u64 {
    if n == 0 {
        return 0;
    }
    Binomial::new(n, p).expect("probability clamped to [0, 1]").sample(rng)
}

/// Outcome counts of one measurement setting.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShotBatch {
    pub axis: BlochVec,
    pub n_plus: u64,
    pub n_minus: u64,
    pub total: u64,
}

impl ShotBatch {
    /// Empirical mean of the `+1/-1` outcomes.
    pub fn mean(&self) -> f64 {
        (self.n_plus as f64 - self.n_minus as f64) / self.total as f64
    }

    pub fn freq_plus(&self) -> f64 {
        self.n_plus as f64 / self.total as f64
    }
}

/// One reproducible random stream: a root seed plus a stream index.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RngStream {
    pub seed: u64,
    pub stream_id: u64,
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        RngStream { seed, stream_id }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream_id);
        rng
    }
}

/// What a stream is used for inside one trial.
///
/// In-plane measurement streams are keyed by plane axis, not by Cartesian
/// axis, so an x-z run and a constant-z run at `n_z = 0` draw identical
/// samples for corresponding settings.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
#[repr(u64)]
pub enum StreamRole {
    CaseDraw = 0,
    PlaneFirstAxis = 1,
    PlaneSecondAxis = 2,
    PlaneNormal = 3,
    SettingBase = 4,
    SettingShifted = 5,
    Holdout = 6,
}

const ROLES_PER_TRIAL: u64 = 16;

/// The family of streams belonging to one trial.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct TrialStreams {
    pub seed: u64,
    pub trial: u64,
}

impl TrialStreams {
    pub fn new(seed: u64, trial: u64) -> Self {
        TrialStreams { seed, trial }
    }

    pub fn stream(&self, role: StreamRole) -> RngStream {
        RngStream::new(self.seed, self.trial * ROLES_PER_TRIAL + role as u64)
    }

    pub fn rng(&self, role: StreamRole) -> ChaCha8Rng {
        self.stream(role).rng()
    }
}

/// Metered access to an ensemble. Every measured member is destroyed and counted.
#[derive(Debug)]
pub struct QubitSource<'a> {
    spec: &'a EnsembleSpec,
    consumed: u64,
}

impl<'a> QubitSource<'a> {
    pub fn new(spec: &'a EnsembleSpec) -> Self {
        QubitSource { spec, consumed: 0 }
    }

    /// Declared plane: prior knowledge the learners are allowed to use.
    pub fn plane(&self) -> PlaneTag {
        self.spec.plane
    }

    pub fn priors(&self) -> Priors {
        self.spec.priors
    }

    pub fn consumed(&self) -> u64 {
        self.consumed
    }

    pub(crate) fn spec(&self) -> &EnsembleSpec {
        self.spec
    }

    pub fn measure<R: Rng + ?Sized>(&mut self, axis: &BlochVec, shots: u64, rng: &mut R) -> Result<ShotBatch> {
        let batch = self.spec.measure_shots(axis, shots, rng)?;
        self.consumed += batch.total;
        Ok(batch)
    }

    /// Takes `count` members, returning how many carried hidden label 0.
    /// Used only by the evaluator.
    pub(crate) fn take_labels<R: Rng + ?Sized>(&mut self, count: u64, rng: &mut R) -> u64 {
        self.consumed += count;
        sample_binomial(count, self.spec.priors.eta0, rng)
    }
}

/// Ensemble Bloch vector estimate plus the batches it came from.
#[derive(Clone, Debug, PartialEq)]
pub struct PauliEstimate {
    pub n_hat: BlochVec,
    pub batches: Vec<ShotBatch>,
}

impl PauliEstimate {
    pub fn shots_used(&self) -> u64 {
        self.batches.iter().map(|b| b.total).sum()
    }
}

/// Estimates the ensemble Bloch vector from Pauli expectation values.
///
/// The two in-plane axes are always measured. For a constant-z plane the
/// z axis is measured too and kept as the estimate's z component; for the
/// x-z plane the y component is fixed to zero by the declared plane.
pub fn estimate_pauli(
    source: &mut QubitSource<'_>,
    shots_per_axis: u64,
    streams: &TrialStreams,
) -> Result<PauliEstimate> {
    let plane = source.plane();
    let first = plane.from_coords(1.0, 0.0, 0.0);
    let second = plane.from_coords(0.0, 1.0, 0.0);
    let b1 = source.measure(&first, shots_per_axis, &mut streams.rng(StreamRole::PlaneFirstAxis))?;
    let b2 = source.measure(&second, shots_per_axis, &mut streams.rng(StreamRole::PlaneSecondAxis))?;
    let mut batches = vec![b1, b2];
    let normal = match plane {
        PlaneTag::XZ => 0.0,
        PlaneTag::ConstZ(_) => {
            let b3 = source.measure(&BlochVec::Z, shots_per_axis, &mut streams.rng(StreamRole::PlaneNormal))?;
            batches.push(b3);
            b3.mean()
        }
    };
    let n_hat = plane.from_coords(b1.mean(), b2.mean(), normal);
    debug_assert!(n_hat.norm() <= 3f64.sqrt() + EPS_PHYS);
    Ok(PauliEstimate { n_hat, batches })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

    fn spec(eta0: f64, psi0: BlochVec, psi1: BlochVec) -> EnsembleSpec {
        EnsembleSpec::new(Priors::new(eta0).unwrap(), psi0, psi1, PlaneTag::XZ, None).unwrap()
    }

    #[test]
    fn priors_validation() {
        assert!(Priors::new(1.2).is_err());
        assert!(Priors::from_pair(0.5, 0.6).is_err());
        assert!(Priors::from_pair(0.3, 0.7).is_ok());
        assert!(Priors::EQUAL.is_equal());
    }

    #[test]
    fn spec_rejects_mixed_or_out_of_plane_states() {
        let p = Priors::EQUAL;
        assert!(EnsembleSpec::new(p, BlochVec::new(0.5, 0.0, 0.0), BlochVec::Z, PlaneTag::XZ, None).is_err());
        assert!(EnsembleSpec::new(p, BlochVec::Y, BlochVec::Z, PlaneTag::XZ, None).is_err());
        assert!(EnsembleSpec::new(p, BlochVec::X, BlochVec::Y, PlaneTag::ConstZ(0.0), None).is_ok());
    }

    #[test]
    fn ensemble_bloch_examples() {
        assert_eq!(spec(0.5, BlochVec::Z, -BlochVec::Z).ensemble_bloch(), BlochVec::ZERO);
        let n = spec(0.5, BlochVec::X, BlochVec::Z).ensemble_bloch();
        assert!(n.max_abs_diff(&BlochVec::new(0.5, 0.0, 0.5)) < 1e-15);
        let n = spec(0.7, BlochVec::X, BlochVec::Z).ensemble_bloch();
        assert!(n.max_abs_diff(&BlochVec::new(0.7, 0.0, 0.3)) < 1e-15);
    }

    #[test]
    fn deterministic_priors_draw_one_state() {
        let mut rng = RngStream::new(1, 0).rng();
        let s = spec(1.0, BlochVec::X, BlochVec::Z);
        assert!((0..1000).all(|_| s.draw_qubit(&mut rng) == (0, BlochVec::X)));
        let s = spec(0.0, BlochVec::X, BlochVec::Z);
        assert!((0..1000).all(|_| s.draw_qubit(&mut rng) == (1, BlochVec::Z)));
    }

    #[test]
    fn draw_frequency_concentrates() {
        let s = spec(0.5, BlochVec::X, BlochVec::Z);
        let mut rng = RngStream::new(7, 3).rng();
        let n = 100_000;
        let zeros = (0..n).filter(|_| s.draw_qubit(&mut rng).0 == 0).count();
        let tol = 5.0 * (0.25 / n as f64).sqrt();
        assert!((zeros as f64 / n as f64 - 0.5).abs() <= tol);
    }

    #[test]
    fn eigenstate_measurement_is_certain() {
        let s = spec(1.0, BlochVec::X, BlochVec::Z);
        let b = s.measure_shots(&BlochVec::X, 100, &mut RngStream::new(0, 0).rng()).unwrap();
        assert_eq!((b.n_plus, b.n_minus, b.total), (100, 0, 100));
    }

    #[test]
    fn perpendicular_axis_is_fair_coin() {
        let s = spec(0.3, BlochVec::X, BlochVec::new(0.6, 0.0, 0.8));
        let shots = 100_000;
        let b = s.measure_shots(&BlochVec::Y, shots, &mut RngStream::new(2, 9).rng()).unwrap();
        let sigma = (0.25 / shots as f64).sqrt();
        assert!((b.freq_plus() - 0.5).abs() <= 5.0 * sigma);
    }

    #[test]
    fn mixture_probability_matches_two_term_sum() {
        // states at +-45 degrees from the axis, brute-force Born rule on amplitudes
        let axis = BlochVec::Z;
        let psi0 = crate::bloch::bloch_from_state_angle(FRAC_PI_4);
        let psi1 = crate::bloch::bloch_from_state_angle(-FRAC_PI_4);
        let s = spec(0.5, psi0, psi1);
        let born = |g: f64| (g / 2.0).cos().powi(2);
        let expected = 0.5 * born(FRAC_PI_4) + 0.5 * born(-FRAC_PI_4);
        assert_abs_diff_eq!(s.prob_plus_mixture(&axis), expected, epsilon = 1e-15);
        assert_abs_diff_eq!(expected, 0.5 * (1.0 + FRAC_PI_4.cos()), epsilon = 1e-15);
    }

    #[test]
    fn measure_rejects_bad_input() {
        let s = spec(0.5, BlochVec::X, BlochVec::Z);
        let mut rng = RngStream::new(0, 0).rng();
        assert!(s.measure_shots(&BlochVec::new(0.5, 0.0, 0.0), 10, &mut rng).is_err());
        assert!(s.measure_shots(&BlochVec::X, 0, &mut rng).is_err());
    }

    #[test]
    fn frequencies_within_five_sigma_over_seeds() {
        let s = spec(0.35, crate::bloch::bloch_from_state_angle(0.4), crate::bloch::bloch_from_state_angle(2.2));
        let axis = BlochVec::new(0.6, 0.0, 0.8);
        let p = s.prob_plus_mixture(&axis);
        let total = 20_000;
        let tol = 5.0 * (p * (1.0 - p) / total as f64).sqrt();
        let inside = (0..100)
            .filter(|&seed| {
                let b = s.measure_shots(&axis, total, &mut RngStream::new(seed, 0).rng()).unwrap();
                (b.freq_plus() - p).abs() <= tol
            })
            .count();
        assert!(inside >= 99, "{inside}/100 inside 5 sigma");
    }

    #[test]
    fn same_stream_same_batch() {
        let s = spec(0.5, BlochVec::X, BlochVec::Z);
        let stream = RngStream::new(42, 5);
        let a = s.measure_shots(&BlochVec::Z, 12345, &mut stream.rng()).unwrap();
        let b = s.measure_shots(&BlochVec::Z, 12345, &mut stream.rng()).unwrap();
        assert_eq!(a, b);
        let c = s.measure_shots(&BlochVec::Z, 12345, &mut RngStream::new(42, 6).rng()).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn pauli_estimate_of_pure_zero_ensemble_is_exact() {
        let s = spec(0.5, BlochVec::Z, BlochVec::Z);
        let mut src = QubitSource::new(&s);
        let est = estimate_pauli(&mut src, 1000, &TrialStreams::new(3, 0)).unwrap();
        assert_eq!(est.n_hat.z, 1.0);
        assert_eq!(est.n_hat.y, 0.0);
        assert_eq!(src.consumed(), 2000);
    }

    #[test]
    fn pauli_estimate_concentrates() {
        let s = spec(0.5, BlochVec::X, BlochVec::Z);
        let n = s.ensemble_bloch();
        let inside = (0..20)
            .filter(|&seed| {
                let mut src = QubitSource::new(&s);
                let est = estimate_pauli(&mut src, 1_000_000, &TrialStreams::new(seed, 0)).unwrap();
                est.n_hat.max_abs_diff(&n) <= 5e-3
            })
            .count();
        assert_eq!(inside, 20);
    }

    #[test]
    fn pauli_estimate_large_sample_limit() {
        let s = EnsembleSpec::from_mixture_geometry(
            Priors::new(0.7).unwrap(),
            FRAC_PI_2,
            0.3,
            PlaneTag::ConstZ(0.6),
            Case::A,
        )
        .unwrap();
        let mut src = QubitSource::new(&s);
        let est = estimate_pauli(&mut src, 10_000_000, &TrialStreams::new(11, 4)).unwrap();
        assert!(est.n_hat.max_abs_diff(&s.ensemble_bloch()) < 2e-3);
        assert_eq!(est.batches.len(), 3);
        assert_eq!(src.consumed(), est.shots_used());
    }

    #[test]
    fn mixture_geometry_builds_requested_ensemble() {
        for case in [Case::A, Case::B] {
            for &(eta0, theta, dir) in &[(0.7, FRAC_PI_2, 0.0), (0.5, 2.0, 4.0), (0.2, 0.3, -1.0)] {
                let pri = Priors::new(eta0).unwrap();
                let s = EnsembleSpec::from_mixture_geometry(pri, theta, dir, PlaneTag::XZ, case).unwrap();
                let angle = s.psi0.dot(&s.psi1).clamp(-1.0, 1.0).acos();
                assert_abs_diff_eq!(angle, theta, epsilon = 1e-9);
                let n = s.ensemble_bloch();
                let dir_n = PlaneTag::XZ.angle_of(&n);
                assert!(dir_n.wrapped_distance(dir, 2.0 * PI) < 1e-12);
                let expected_norm =
                    (eta0 * eta0 + (1.0 - eta0).powi(2) + 2.0 * eta0 * (1.0 - eta0) * theta.cos()).sqrt();
                assert_abs_diff_eq!(n.norm(), expected_norm, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn cases_share_the_ensemble_vector() {
        let pri = Priors::new(0.65).unwrap();
        let a = EnsembleSpec::from_mixture_geometry(pri, 1.1, 0.8, PlaneTag::XZ, Case::A).unwrap();
        let b = EnsembleSpec::from_mixture_geometry(pri, 1.1, 0.8, PlaneTag::XZ, Case::B).unwrap();
        assert!(a.ensemble_bloch().max_abs_diff(&b.ensemble_bloch()) < 1e-15);
        assert!(a.psi0.max_abs_diff(&b.psi0) > 0.1);
    }
}
