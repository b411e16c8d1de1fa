//! Minimum-error measurement for two equiprobable qubit states.
//!
//! For qubits, `rho0 - rho1 = (m0 - m1) . sigma / 2 = lambda (P0 - P1)` with
//! `lambda = |m0 - m1| / 2` and `P0` the projector with Bloch vector
//! `(m0 - m1)/|m0 - m1|`. Diagonalizing the difference operator reduces to
//! normalizing a vector, so no matrix eigensolver is involved.

use crate::bloch::{prob_plus_unchecked, BlochVec, EPS_DEGENERATE};
use crate::ensemble::Priors;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HelstromResult {
    /// Bloch vector of `P0`, the detector for `rho0`.
    pub p0_axis: BlochVec,
    pub lambda: f64,
    pub success: f64,
    /// Set when `m0 = m1`; any axis is then optimal and `p0_axis` is `+z`.
    pub degenerate: bool,
}

/// Helstrom measurement for `rho0`, `rho1` each with probability 1/2.
pub fn helstrom(m0: &BlochVec, m1: &BlochVec) -> Result<HelstromResult> {
    let diff = *m0 - *m1;
    let d = diff.norm();
    if !(d > EPS_DEGENERATE) {
        return Err(Error::DegenerateEnsemble(format!("|m0 - m1| = {d:e}")));
    }
    let lambda = d / 2.0;
    Ok(HelstromResult { p0_axis: diff * (1.0 / d), lambda, success: 0.5 + lambda / 2.0, degenerate: false })
}

/// Like [`helstrom`] but returns a flagged chance-level result for `m0 = m1`.
pub fn helstrom_or_degenerate(m0: &BlochVec, m1: &BlochVec) -> HelstromResult {
    helstrom(m0, m1).unwrap_or_else(|_| {
        let lambda = m0.distance(m1) / 2.0;
        HelstromResult { p0_axis: BlochVec::Z, lambda, success: 0.5 + lambda / 2.0, degenerate: true }
    })
}

/// Optimal success `1/2 + |m0 - m1| / 4`.
pub fn success_equal_priors(m0: &BlochVec, m1: &BlochVec) -> f64 {
    0.5 + m0.distance(m1) / 4.0
}

/// `|m0|^2 - |m1|^2`, proportional to `Tr(rho0^2) - Tr(rho1^2)`.
///
/// Zero exactly when the Helstrom detectors fire equally often on the
/// half-half mixture.
pub fn equal_count_condition(m0: &BlochVec, m1: &BlochVec) -> f64 {
    m0.norm_sq() - m1.norm_sq()
}

/// Detector click probabilities of `axis` on the mixture `(rho0 + rho1)/2`.
pub fn detector_probabilities(axis: &BlochVec, m0: &BlochVec, m1: &BlochVec) -> Result<(f64, f64)> {
    axis.require_unit("measurement axis")?;
    let mean = (*m0 + *m1) * 0.5;
    mean.require_physical("mixture")?;
    let p0 = prob_plus_unchecked(axis, &mean);
    Ok((p0, 1.0 - p0))
}

/// Closed-form minimum-error success for two pure states with priors:
/// `1/2 (1 + sqrt(1 - 4 eta0 eta1 |<psi0|psi1>|^2))`.
///
/// For unit Bloch vectors the squared overlap is `(1 + n0 . n1) / 2`.
pub fn pure_state_success(priors: Priors, psi0: &BlochVec, psi1: &BlochVec) -> f64 {
    let overlap_sq = (0.5 * (1.0 + psi0.dot(psi1))).clamp(0.0, 1.0);
    let disc = (1.0 - 4.0 * priors.eta0() * priors.eta1() * overlap_sq).max(0.0);
    0.5 * (1.0 + disc.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bloch::PlaneTag;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_1_SQRT_2, PI, TAU};

    #[test]
    fn helstrom_examples() {
        let h = helstrom(&BlochVec::Z, &-BlochVec::Z).unwrap();
        assert_eq!(h.p0_axis, BlochVec::Z);
        assert_eq!((h.lambda, h.success), (1.0, 1.0));

        let m0 = BlochVec::new(FRAC_1_SQRT_2, 0.0, FRAC_1_SQRT_2);
        let m1 = BlochVec::new(FRAC_1_SQRT_2, 0.0, -FRAC_1_SQRT_2);
        let h = helstrom(&m0, &m1).unwrap();
        assert!(h.p0_axis.max_abs_diff(&BlochVec::Z) < 1e-15);
        assert_abs_diff_eq!(h.lambda, FRAC_1_SQRT_2, epsilon = 1e-15);
        assert_abs_diff_eq!(h.success, 0.853_553_390_593_273_7, epsilon = 1e-15);

        let m = BlochVec::new(0.3, 0.1, 0.2);
        let h = helstrom(&(m + BlochVec::new(1e-5, 0.0, 0.0)), &m).unwrap();
        assert_abs_diff_eq!(h.success, 0.5, epsilon = 1e-5);
    }

    #[test]
    fn helstrom_degenerate() {
        let m = BlochVec::new(0.3, 0.1, 0.2);
        assert!(matches!(helstrom(&m, &m), Err(Error::DegenerateEnsemble(_))));
        let h = helstrom_or_degenerate(&m, &m);
        assert!(h.degenerate);
        assert_eq!(h.success, 0.5);
    }

    #[test]
    fn equal_count_examples() {
        assert_eq!(equal_count_condition(&BlochVec::X, &BlochVec::Z), 0.0);
        assert_abs_diff_eq!(
            equal_count_condition(&BlochVec::new(0.9, 0.0, 0.0), &BlochVec::new(0.1, 0.0, 0.0)),
            0.80,
            epsilon = 1e-15
        );
        assert_eq!(equal_count_condition(&BlochVec::Y, &BlochVec::ZERO), 1.0);
    }

    #[test]
    fn detector_examples() {
        let m0 = BlochVec::new(0.6, 0.0, 0.3);
        let m1 = BlochVec::new(0.0, 0.0, -0.670_820_393_249_936_9);
        let h = helstrom(&m0, &m1).unwrap();
        let (p0, p1) = detector_probabilities(&h.p0_axis, &m0, &m1).unwrap();
        assert_abs_diff_eq!(p0, 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(p1, 0.5, epsilon = 1e-12);

        let m = BlochVec::new(0.0, 0.0, 0.4);
        let (p0, _) = detector_probabilities(&BlochVec::Z, &m, &m).unwrap();
        assert_abs_diff_eq!(p0, 0.7, epsilon = 1e-15);

        let (p0, _) = detector_probabilities(&BlochVec::new(0.6, 0.8, 0.0), &m0, &-m0).unwrap();
        assert_eq!(p0, 0.5);
        assert!(detector_probabilities(&BlochVec::new(0.6, 0.0, 0.0), &m0, &m1).is_err());
    }

    #[test]
    fn pure_state_bound_matches_vector_form_at_equal_priors() {
        for &(a, b) in &[(0.2, 1.0), (2.0, 2.9), (0.0, PI)] {
            let n0 = BlochVec::new(f64::cos(a), 0.0, f64::sin(a));
            let n1 = BlochVec::new(f64::cos(b), 0.0, f64::sin(b));
            let closed = pure_state_success(Priors::EQUAL, &n0, &n1);
            assert_abs_diff_eq!(closed, success_equal_priors(&n0, &n1), epsilon = 1e-12);
        }
    }

    fn vec_in_xz(max_len: f64) -> impl Strategy<Value = BlochVec> {
        (0.0..TAU, 0.0..max_len).prop_map(|(a, r)| BlochVec::new(r * a.cos(), 0.0, r * a.sin()))
    }

    proptest! {
        #[test]
        fn equal_norm_converse(a in 0.0..TAU, b in 0.0..TAU, r in 0.05..1.0f64) {
            // both vectors of length r in the x-z plane: the in-plane axis with
            // zero overlap on (m0 + m1) is the Helstrom axis up to sign
            let m0 = BlochVec::new(r * a.cos(), 0.0, r * a.sin());
            let m1 = BlochVec::new(r * b.cos(), 0.0, r * b.sin());
            prop_assume!(m0.distance(&m1) > 1e-3 && (m0 + m1).norm() > 1e-3);
            let h = helstrom(&m0, &m1).unwrap();
            let s = crate::bloch::perp_in_plane(&(m0 + m1), PlaneTag::XZ).unwrap();
            let dist = h.p0_axis.max_abs_diff(&s).min(h.p0_axis.max_abs_diff(&-s));
            prop_assert!(dist <= 1e-12);
            prop_assert!(equal_count_condition(&m0, &m1).abs() <= 1e-12);
        }

        #[test]
        fn success_is_optimal_over_axes(m0 in vec_in_xz(1.0), m1 in vec_in_xz(1.0), t in 0.0..TAU) {
            prop_assume!(m0.distance(&m1) > 1e-6);
            let h = helstrom(&m0, &m1).unwrap();
            let s = BlochVec::new(t.cos(), 0.0, t.sin());
            let p = 0.5 + s.dot(&(m0 - m1)) / 4.0;
            prop_assert!(p <= h.success + 1e-15);
            prop_assert!((0.5..=1.0).contains(&h.success));
        }

        #[test]
        fn success_monotone_in_separation(m in vec_in_xz(0.5), d in vec_in_xz(0.5), k in 0.0..1.0f64) {
            let lo = success_equal_priors(&(m + d * k), &m);
            let hi = success_equal_priors(&(m + d), &m);
            prop_assert!(lo <= hi + 1e-15);
        }
    }
}
