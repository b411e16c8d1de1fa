//! Applying a learned axis to held-out members and scoring the labels.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::bloch::{prob_plus_unchecked, BlochVec};
use crate::ensemble::{sample_binomial, Case, QubitSource};
use crate::error::{Error, Result};

/// `counts[true_label][predicted_label]`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub counts: [[u64; 2]; 2],
}

impl ConfusionMatrix {
    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn diagonal(&self) -> u64 {
        self.counts[0][0] + self.counts[1][1]
    }

    pub fn anti_diagonal(&self) -> u64 {
        self.counts[0][1] + self.counts[1][0]
    }

    /// Correct count when predicted cluster 0 is read as `orientation` says.
    pub fn correct(&self, orientation: LabelOrientation) -> u64 {
        match orientation {
            LabelOrientation::Direct => self.diagonal(),
            LabelOrientation::Swapped => self.anti_diagonal(),
        }
    }

    /// Exchanges the predicted columns, as flipping the axis sign would.
    pub fn swap_predicted(&self) -> ConfusionMatrix {
        let c = self.counts;
        ConfusionMatrix { counts: [[c[0][1], c[0][0]], [c[1][1], c[1][0]]] }
    }
}

impl std::ops::AddAssign for ConfusionMatrix {
    fn add_assign(&mut self, rhs: ConfusionMatrix) {
        for (row, other) in self.counts.iter_mut().zip(rhs.counts) {
            for (c, o) in row.iter_mut().zip(other) {
                *c += o;
            }
        }
    }
}

/// How the `+1` cluster maps to hidden labels.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LabelOrientation {
    /// `+1` outcome means label 0.
    Direct,
    /// `+1` outcome means label 1.
    Swapped,
}

impl LabelOrientation {
    pub fn flip(self) -> Self {
        match self {
            LabelOrientation::Direct => LabelOrientation::Swapped,
            LabelOrientation::Swapped => LabelOrientation::Direct,
        }
    }

    /// Conventional reading for a ground-truth case: the `+1` projector
    /// detects `m0`, i.e. `rho0^A` or `rho1^B`.
    pub fn for_case(case: Option<Case>) -> Self {
        match case {
            Some(Case::B) => LabelOrientation::Swapped,
            _ => LabelOrientation::Direct,
        }
    }
}

/// Measures `n_holdout` fresh members along `axis`; `+1` predicts label 0.
///
/// The four confusion cells are sampled jointly: the label-0 count is
/// binomial in `eta0`, and each label's `+1` count is binomial in that
/// state's Born probability, which is the exact joint law of
/// member-by-member classification.
pub fn classify_holdout<R: Rng + ?Sized>(
    source: &mut QubitSource<'_>,
    axis: &BlochVec,
    n_holdout: u64,
    rng: &mut R,
) -> Result<ConfusionMatrix> {
    axis.require_unit("classification axis")?;
    if n_holdout == 0 {
        return Err(Error::Contract("holdout size must be >= 1".into()));
    }
    let zeros = source.take_labels(n_holdout, rng);
    let ones = n_holdout - zeros;
    let spec = source.spec();
    let plus0 = sample_binomial(zeros, prob_plus_unchecked(axis, &spec.psi0), rng);
    let plus1 = sample_binomial(ones, prob_plus_unchecked(axis, &spec.psi1), rng);
    Ok(ConfusionMatrix { counts: [[plus0, zeros - plus0], [plus1, ones - plus1]] })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub confusion: ConfusionMatrix,
    /// Success after choosing the better of the two label orientations.
    pub empirical_success: f64,
    /// The better orientation was [`LabelOrientation::Swapped`].
    pub swapped: bool,
    /// Success under the fixed conventional orientation.
    pub convention_success: f64,
    pub analytic_success: f64,
    /// `(convention_success - analytic) / sigma` under binomial variance.
    pub z_score: f64,
}

/// Scores a confusion matrix against an analytic success probability.
///
/// When the analytic value sits at 0 or 1 the binomial variance vanishes;
/// the standard deviation then falls back to one count, `1 / total`.
pub fn score(confusion: &ConfusionMatrix, analytic_success: f64, convention: LabelOrientation) -> Result<EvalReport> {
    let total = confusion.total();
    if total == 0 {
        return Err(Error::Contract("cannot score an empty confusion matrix".into()));
    }
    let n = total as f64;
    let direct = confusion.diagonal() as f64 / n;
    let swapped_rate = confusion.anti_diagonal() as f64 / n;
    let swapped = swapped_rate > direct;
    let convention_success = confusion.correct(convention) as f64 / n;
    let var = analytic_success * (1.0 - analytic_success) / n;
    let sigma = if var > 0.0 { var.sqrt() } else { 1.0 / n };
    Ok(EvalReport {
        confusion: *confusion,
        empirical_success: direct.max(swapped_rate),
        swapped,
        convention_success,
        analytic_success,
        z_score: (convention_success - analytic_success) / sigma,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bloch::PlaneTag;
    use crate::ensemble::{EnsembleSpec, Priors, RngStream};
    use std::f64::consts::FRAC_1_SQRT_2;

    #[test]
    fn orthogonal_states_are_separated_perfectly() {
        let spec = EnsembleSpec::new(Priors::EQUAL, BlochVec::Z, -BlochVec::Z, PlaneTag::XZ, None).unwrap();
        let mut src = QubitSource::new(&spec);
        let c = classify_holdout(&mut src, &BlochVec::Z, 10_000, &mut RngStream::new(1, 0).rng()).unwrap();
        assert_eq!(c.anti_diagonal(), 0);
        assert_eq!(c.total(), 10_000);
        assert_eq!(src.consumed(), 10_000);
        let r = score(&c, 1.0, LabelOrientation::Direct).unwrap();
        assert_eq!((r.empirical_success, r.convention_success, r.z_score), (1.0, 1.0, 0.0));
    }

    #[test]
    fn identical_states_are_chance() {
        let spec = EnsembleSpec::new(Priors::EQUAL, BlochVec::X, BlochVec::X, PlaneTag::XZ, None).unwrap();
        let mut src = QubitSource::new(&spec);
        let n = 100_000;
        let c = classify_holdout(&mut src, &BlochVec::Z, n, &mut RngStream::new(2, 0).rng()).unwrap();
        let r = score(&c, 0.5, LabelOrientation::Direct).unwrap();
        assert!(r.z_score.abs() <= 5.0);
    }

    #[test]
    fn perpendicular_axis_reaches_closed_form() {
        let s = FRAC_1_SQRT_2;
        let spec =
            EnsembleSpec::new(Priors::EQUAL, BlochVec::new(s, 0.0, s), BlochVec::new(s, 0.0, -s), PlaneTag::XZ, None)
                .unwrap();
        let mut src = QubitSource::new(&spec);
        let n = 100_000;
        let c = classify_holdout(&mut src, &BlochVec::Z, n, &mut RngStream::new(3, 0).rng()).unwrap();
        let p = 0.853_553_390_593_273_7;
        let r = score(&c, p, LabelOrientation::Direct).unwrap();
        let tol = 5.0 * (p * (1.0 - p) / n as f64).sqrt();
        assert!((r.convention_success - p).abs() <= tol);
    }

    #[test]
    fn score_examples() {
        let c = ConfusionMatrix { counts: [[50, 0], [0, 50]] };
        let r = score(&c, 1.0, LabelOrientation::Direct).unwrap();
        assert_eq!((r.empirical_success, r.z_score, r.swapped), (1.0, 0.0, false));

        // 75_100 correct of 100_000 against 0.75: sigma = 0.001369..
        let c = ConfusionMatrix { counts: [[37_600, 12_400], [12_500, 37_500]] };
        let r = score(&c, 0.75, LabelOrientation::Direct).unwrap();
        assert!((r.z_score - 0.001 / (0.75f64 * 0.25 / 1e5).sqrt()).abs() < 1e-9);
        assert!(r.z_score.abs() <= 1.0);

        let c = ConfusionMatrix { counts: [[0, 40], [60, 0]] };
        let r = score(&c, 1.0, LabelOrientation::Direct).unwrap();
        assert_eq!((r.empirical_success, r.swapped, r.convention_success), (1.0, true, 0.0));
        assert!(r.z_score.is_finite());

        assert!(score(&ConfusionMatrix::default(), 0.5, LabelOrientation::Direct).is_err());
    }

    #[test]
    fn orientation_invariance() {
        let c = ConfusionMatrix { counts: [[812, 190], [233, 765]] };
        for conv in [LabelOrientation::Direct, LabelOrientation::Swapped] {
            let a = score(&c, 0.8, conv).unwrap();
            let b = score(&c.swap_predicted(), 0.8, conv.flip()).unwrap();
            assert_eq!(a.empirical_success, b.empirical_success);
            assert_eq!(a.convention_success, b.convention_success);
            assert_eq!(a.z_score, b.z_score);
            assert_eq!(a.swapped, !b.swapped);
        }
    }

    #[test]
    fn flipped_axis_swaps_predictions_statistically() {
        let spec = EnsembleSpec::equal_prior_xz(0.9, 0.5).unwrap();
        let axis = BlochVec::new(0.9f64.cos(), 0.0, -0.9f64.sin());
        let n = 200_000;
        let mut src = QubitSource::new(&spec);
        let plus = classify_holdout(&mut src, &axis, n, &mut RngStream::new(4, 0).rng()).unwrap();
        let mut src = QubitSource::new(&spec);
        let minus = classify_holdout(&mut src, &-axis, n, &mut RngStream::new(4, 1).rng()).unwrap();
        let a = score(&plus, 0.5 * (1.0 + 0.5f64.sin()), LabelOrientation::Direct).unwrap();
        let b = score(&minus, 0.5 * (1.0 + 0.5f64.sin()), LabelOrientation::Swapped).unwrap();
        assert!(a.z_score.abs() < 5.0 && b.z_score.abs() < 5.0);
    }

    #[test]
    fn joint_sampling_matches_member_by_member() {
        // per-member simulation as an independent check of the cell laws
        let spec = EnsembleSpec::new(
            Priors::new(0.3).unwrap(),
            crate::bloch::bloch_from_state_angle(0.4),
            crate::bloch::bloch_from_state_angle(2.0),
            PlaneTag::XZ,
            None,
        )
        .unwrap();
        let axis = BlochVec::new(0.6, 0.0, 0.8);
        let n = 200_000u64;
        let mut rng = RngStream::new(9, 0).rng();
        let mut naive = ConfusionMatrix::default();
        for _ in 0..n {
            let (label, state) = spec.draw_qubit(&mut rng);
            let plus = rng.random::<f64>() < 0.5 * (1.0 + axis.dot(&state));
            naive.counts[label as usize][usize::from(!plus)] += 1;
        }
        let mut src = QubitSource::new(&spec);
        let joint = classify_holdout(&mut src, &axis, n, &mut RngStream::new(9, 1).rng()).unwrap();
        for t in 0..2 {
            for p in 0..2 {
                let a = naive.counts[t][p] as f64 / n as f64;
                let b = joint.counts[t][p] as f64 / n as f64;
                let q = 0.5 * (a + b);
                let sigma = (2.0 * q * (1.0 - q) / n as f64).sqrt();
                assert!((a - b).abs() <= 5.0 * sigma, "cell {t}{p}: {a} vs {b}");
            }
        }
    }
}
