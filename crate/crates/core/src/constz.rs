//! States whose Bloch vectors share a z component.
//!
//! Writing `n = r + n_z z` and `n_j = r_j + n_z z`, the in-plane parts satisfy
//! `r = eta0 r0 + eta1 r1` with `|r_j| = (1 - n_z^2)^(1/2)`. Everything from
//! the x-z plane carries over to the x-y plane after rescaling by that radius.
//!
//! The angle formula follows from squaring `r = eta0 r0 + eta1 r1`:
//! `|r|^2 = (1 - n_z^2)(eta0^2 + eta1^2 + 2 eta0 eta1 cos(theta))`, so
//! `cos(theta) = (|r|^2/(1 - n_z^2) - eta0^2 - eta1^2) / (2 eta0 eta1)`.

use crate::bloch::{perp_in_plane, BlochVec, PlanarAngle, PlaneTag, EPS_CLAMP, EPS_DEGENERATE, EPS_PHYS};
use crate::decomposition::{apply_case_matrices, clamp_cosine, AxisEstimate, DecompositionPair, MixtureTargets};
use crate::ensemble::{estimate_pauli, Case, Priors, QubitSource, TrialStreams};
use crate::error::{Error, Result};

/// A Bloch vector split into its x-y part and its common height.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConstZFrame {
    pub n_z: f64,
    /// In-plane part, zero z component.
    pub r: BlochVec,
    /// `(1 - n_z^2)^(1/2)`, the in-plane radius of pure states at this height.
    pub r_radius: f64,
}

impl ConstZFrame {
    pub fn new(r_x: f64, r_y: f64, n_z: f64) -> Result<Self> {
        if !(n_z.abs() < 1.0) {
            return Err(Error::Contract(format!("n_z = {n_z} outside (-1, 1)")));
        }
        let r_radius = (1.0 - n_z * n_z).sqrt();
        let r = BlochVec::new(r_x, r_y, 0.0);
        if r.norm() > r_radius * (1.0 + EPS_CLAMP) {
            return Err(Error::Contract(format!(
                "in-plane norm {} exceeds radius {r_radius} at n_z = {n_z}",
                r.norm()
            )));
        }
        Ok(ConstZFrame { n_z, r, r_radius })
    }

    pub fn from_bloch(n: &BlochVec) -> Result<Self> {
        ConstZFrame::new(n.x, n.y, n.z)
    }

    pub fn plane(&self) -> PlaneTag {
        PlaneTag::ConstZ(self.n_z)
    }

    pub fn bloch(&self) -> BlochVec {
        self.r + BlochVec::new(0.0, 0.0, self.n_z)
    }

    fn require_nondegenerate(&self) -> Result<f64> {
        let rn = self.r.norm();
        if rn > EPS_DEGENERATE {
            Ok(rn)
        } else {
            Err(Error::DegenerateEnsemble(format!("in-plane norm |r| = {rn:e}")))
        }
    }
}

/// `cos(theta)` between the in-plane parts, for exact inputs.
pub fn cos_theta_z(r_norm: f64, n_z: f64, priors: Priors) -> Result<f64> {
    cos_theta_z_within(r_norm, n_z, priors, EPS_PHYS)
}

/// As [`cos_theta_z`], with the shot-noise tolerance.
pub fn cos_theta_z_estimated(r_norm: f64, n_z: f64, priors: Priors) -> Result<f64> {
    cos_theta_z_within(r_norm, n_z, priors, EPS_CLAMP)
}

fn cos_theta_z_within(r_norm: f64, n_z: f64, priors: Priors, tolerance: f64) -> Result<f64> {
    priors.require_interior()?;
    if !(n_z.abs() < 1.0) {
        return Err(Error::Contract(format!("n_z = {n_z} outside (-1, 1)")));
    }
    let (e0, e1) = (priors.eta0(), priors.eta1());
    let c = (r_norm * r_norm / (1.0 - n_z * n_z) - e0 * e0 - e1 * e1) / (2.0 * e0 * e1);
    clamp_cosine(c, tolerance)
}

/// Case-A or case-B states for a constant-z ensemble.
pub fn decompose_constz(frame: &ConstZFrame, theta: f64, priors: Priors, case: Case) -> Result<DecompositionPair> {
    if !(0.0..=std::f64::consts::PI).contains(&theta) {
        return Err(Error::Contract(format!("theta = {theta} outside [0, pi]")));
    }
    let rn = frame.require_nondegenerate()?;
    let plane = frame.plane();
    let prefactor = frame.r_radius * frame.r_radius / (rn * rn);
    let ((u0, w0), (u1, w1)) = apply_case_matrices(plane.plane_coords(&frame.r), theta, priors, case, prefactor);
    Ok(DecompositionPair { n0: plane.from_coords(u0, w0, frame.n_z), n1: plane.from_coords(u1, w1, frame.n_z), case })
}

/// `m0 = eta0 r0^A + eta1 r1^B + n_z z`, `m1 = eta1 r1^A + eta0 r0^B + n_z z`.
pub fn mixture_targets_constz(frame: &ConstZFrame, theta: f64, priors: Priors) -> Result<MixtureTargets> {
    let a = decompose_constz(frame, theta, priors, Case::A)?;
    let b = decompose_constz(frame, theta, priors, Case::B)?;
    let (e0, e1) = (priors.eta0(), priors.eta1());
    let lift = BlochVec::new(0.0, 0.0, frame.n_z);
    let flat = |v: BlochVec| BlochVec::new(v.x, v.y, 0.0);
    Ok(MixtureTargets {
        m0: e0 * flat(a.n0) + e1 * flat(b.n1) + lift,
        m1: e1 * flat(a.n1) + e0 * flat(b.n0) + lift,
        theta: PlanarAngle::new(theta),
    })
}

/// A learned constant-z axis along with the estimated height.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConstZAxisEstimate {
    pub estimate: AxisEstimate,
    pub frame_hat: Option<ConstZFrame>,
}

/// Estimates `n` from all three Pauli axes and returns the x-y axis `s` with
/// `s . r = 0`, oriented as the +90 degree rotation of `r` about `+z`.
pub fn learn_axis_constz(
    source: &mut QubitSource<'_>,
    shots_per_axis: u64,
    streams: &TrialStreams,
) -> Result<ConstZAxisEstimate> {
    let PlaneTag::ConstZ(_) = source.plane() else {
        return Err(Error::Contract("constant-z learner needs a constant-z plane".into()));
    };
    let est = estimate_pauli(source, shots_per_axis, streams)?;
    let axis = perp_in_plane(&est.n_hat, source.plane())?;
    Ok(ConstZAxisEstimate {
        estimate: AxisEstimate { axis, n_hat: est.n_hat, shots_used: est.shots_used() },
        frame_hat: ConstZFrame::from_bloch(&est.n_hat).ok(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decomposition::{cos_theta, decompose, mixture_targets};
    use crate::ensemble::EnsembleSpec;
    use crate::helstrom::success_equal_priors;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, PI, TAU};

    fn relabel(v: BlochVec) -> BlochVec {
        // (x, z) of the x-z plane onto (x, y)
        BlochVec::new(v.x, v.z, v.y)
    }

    #[test]
    fn cos_theta_z_examples() {
        let nz: f64 = 0.6;
        let radius = (1.0 - nz * nz).sqrt();
        let c = cos_theta_z(radius, nz, Priors::EQUAL).unwrap();
        assert_abs_diff_eq!(c, 1.0, epsilon = 1e-15);
        // the formula without the factor 2 would give 2 here
        let unhalved = (radius * radius / (1.0 - nz * nz) - 0.5) / 0.25;
        assert_abs_diff_eq!(unhalved, 2.0, epsilon = 1e-12);

        for r in [0.3, 0.6, 0.9] {
            assert_eq!(
                cos_theta_z(r, 0.0, Priors::new(0.4).unwrap()).unwrap(),
                cos_theta(r, Priors::new(0.4).unwrap()).unwrap()
            );
        }
        let c = cos_theta_z(0.8 * FRAC_1_SQRT_2, 0.6, Priors::EQUAL).unwrap();
        assert_abs_diff_eq!(c, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn frame_validation() {
        assert!(ConstZFrame::new(0.9, 0.0, 0.6).is_err());
        assert!(ConstZFrame::new(0.3, 0.0, 1.0).is_err());
        let f = ConstZFrame::new(0.3, 0.4, 0.6).unwrap();
        assert_abs_diff_eq!(f.r_radius, 0.8, epsilon = 1e-15);
    }

    #[test]
    fn decompose_example_at_height() {
        let frame = ConstZFrame::new(0.8 * FRAC_1_SQRT_2, 0.0, 0.6).unwrap();
        let d = decompose_constz(&frame, FRAC_PI_2, Priors::EQUAL, Case::A).unwrap();
        let expected0 = BlochVec::new(0.8 * FRAC_1_SQRT_2, 0.8 * FRAC_1_SQRT_2, 0.6);
        let expected1 = BlochVec::new(0.8 * FRAC_1_SQRT_2, -0.8 * FRAC_1_SQRT_2, 0.6);
        assert!(d.n0.max_abs_diff(&expected0) < 1e-15);
        assert!(d.n1.max_abs_diff(&expected1) < 1e-15);
        assert_abs_diff_eq!(d.n0.norm(), 1.0, epsilon = 1e-15);
        let mean = (d.n0 + d.n1) * 0.5;
        assert!(mean.max_abs_diff(&frame.bloch()) < 1e-15);
    }

    #[test]
    fn decompose_coincident() {
        let radius = (1.0f64 - 0.25).sqrt();
        let frame = ConstZFrame::new(radius * 0.6, -radius * 0.8, -0.5).unwrap();
        let d = decompose_constz(&frame, 0.0, Priors::new(0.3).unwrap(), Case::B).unwrap();
        let u = frame.r * (frame.r_radius / frame.r.norm()) + BlochVec::new(0.0, 0.0, -0.5);
        assert!(d.n0.max_abs_diff(&u) < 1e-15 && d.n1.max_abs_diff(&u) < 1e-15);
        assert_abs_diff_eq!(d.n0.norm(), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn degenerate_in_plane_part() {
        let frame = ConstZFrame::new(0.0, 0.0, 0.4).unwrap();
        assert!(matches!(decompose_constz(&frame, 1.0, Priors::EQUAL, Case::A), Err(Error::DegenerateEnsemble(_))));
    }

    #[test]
    fn mixture_examples() {
        let radius = (1.0f64 - 0.25).sqrt();
        let frame = ConstZFrame::new(radius * 0.8, radius * 0.6, 0.5).unwrap();
        let t = mixture_targets_constz(&frame, 0.0, Priors::new(0.7).unwrap()).unwrap();
        assert!(t.m0.max_abs_diff(&frame.bloch()) < 1e-15);
        assert!(t.m1.max_abs_diff(&frame.bloch()) < 1e-15);

        let pri = Priors::EQUAL;
        let theta: f64 = 2.0;
        let rr = (1.0 - 0.36f64).sqrt() * (0.5 + 0.5 * theta.cos()).sqrt();
        let frame = ConstZFrame::new(rr * 0.6, rr * 0.8, 0.6).unwrap();
        let t = mixture_targets_constz(&frame, theta, pri).unwrap();
        let a = decompose_constz(&frame, theta, pri, Case::A).unwrap();
        assert!(t.m0.max_abs_diff(&a.n0) < 1e-12);
        assert!(t.m1.max_abs_diff(&a.n1) < 1e-12);
    }

    #[test]
    fn learned_axis_examples() {
        assert_eq!(perp_in_plane(&BlochVec::new(0.4, 0.0, 0.5), PlaneTag::ConstZ(0.5)).unwrap(), BlochVec::Y);
        assert_eq!(perp_in_plane(&BlochVec::new(0.0, 0.4, 0.5), PlaneTag::ConstZ(0.5)).unwrap(), -BlochVec::X);
    }

    #[test]
    fn learned_axis_properties() {
        let pri = Priors::new(0.6).unwrap();
        let spec = EnsembleSpec::from_mixture_geometry(pri, 1.4, 0.9, PlaneTag::ConstZ(0.45), Case::B).unwrap();
        let mut src = QubitSource::new(&spec);
        let est = learn_axis_constz(&mut src, 200_000, &TrialStreams::new(8, 2)).unwrap();
        let s = est.estimate.axis;
        assert_eq!(s.z, 0.0);
        assert_abs_diff_eq!(s.norm(), 1.0, epsilon = 1e-15);
        let r_hat = PlaneTag::ConstZ(0.45).in_plane_part(&est.estimate.n_hat);
        assert_abs_diff_eq!(s.dot(&r_hat), 0.0, epsilon = 1e-15);
        assert_eq!(src.consumed(), 600_000);
        let f = est.frame_hat.unwrap();
        assert_abs_diff_eq!(f.n_z, 0.45, epsilon = 0.01);
    }

    #[test]
    fn rejects_xz_source() {
        let spec = EnsembleSpec::equal_prior_xz(0.3, 0.3).unwrap();
        let mut src = QubitSource::new(&spec);
        assert!(learn_axis_constz(&mut src, 10, &TrialStreams::new(0, 0)).is_err());
    }

    fn instance() -> impl Strategy<Value = (Priors, f64, f64, f64)> {
        (0.05..0.95f64, 0.0..PI, 0.0..TAU, -0.95..0.95f64).prop_map(|(e, t, d, z)| (Priors::new(e).unwrap(), t, d, z))
    }

    fn in_plane_norm(pri: Priors, theta: f64, nz: f64) -> f64 {
        let (e0, e1) = (pri.eta0(), pri.eta1());
        (1.0 - nz * nz).sqrt() * (e0 * e0 + e1 * e1 + 2.0 * e0 * e1 * theta.cos()).sqrt()
    }

    proptest! {
        #[test]
        fn round_trip((pri, theta, dir, nz) in instance()) {
            let rn = in_plane_norm(pri, theta, nz);
            prop_assume!(rn > 1e-3);
            let frame = ConstZFrame::new(rn * dir.cos(), rn * dir.sin(), nz).unwrap();
            for case in [Case::A, Case::B] {
                let d = decompose_constz(&frame, theta, pri, case).unwrap();
                let back = pri.eta0() * d.n0 + pri.eta1() * d.n1;
                prop_assert!(back.max_abs_diff(&frame.bloch()) <= 1e-12);
                prop_assert!((d.n0.norm() - 1.0).abs() <= 1e-12);
                prop_assert!((d.n1.norm() - 1.0).abs() <= 1e-12);
            }
            let c = cos_theta_z(rn, nz, pri).unwrap();
            prop_assert!((c - theta.cos()).abs() <= 1e-9);
            let t = mixture_targets_constz(&frame, theta, pri).unwrap();
            prop_assert!((t.m0.norm() - t.m1.norm()).abs() <= 1e-12);
            prop_assert_eq!(t.m0.z, nz);
            prop_assert_eq!(t.m1.z, nz);
        }

        #[test]
        fn reduces_to_xz_at_zero_height((pri, theta, dir, _nz) in instance()) {
            let rn = in_plane_norm(pri, theta, 0.0);
            prop_assume!(rn > 1e-3);
            let n_xz = BlochVec::new(rn * dir.cos(), 0.0, rn * dir.sin());
            let frame = ConstZFrame::from_bloch(&relabel(n_xz)).unwrap();
            for case in [Case::A, Case::B] {
                let xz = decompose(&n_xz, theta, pri, case).unwrap();
                let cz = decompose_constz(&frame, theta, pri, case).unwrap();
                prop_assert!(relabel(xz.n0).max_abs_diff(&cz.n0) <= 1e-12);
                prop_assert!(relabel(xz.n1).max_abs_diff(&cz.n1) <= 1e-12);
            }
            let xz = mixture_targets(&n_xz, theta, pri).unwrap();
            let cz = mixture_targets_constz(&frame, theta, pri).unwrap();
            prop_assert!(relabel(xz.m0).max_abs_diff(&cz.m0) <= 1e-12 * (1.0 / rn).max(1.0));
            prop_assert!(relabel(xz.m1).max_abs_diff(&cz.m1) <= 1e-12 * (1.0 / rn).max(1.0));
            let p_xz = perp_in_plane(&n_xz, PlaneTag::XZ).unwrap();
            let p_cz = perp_in_plane(&frame.bloch(), PlaneTag::ConstZ(0.0)).unwrap();
            prop_assert!(relabel(p_xz).max_abs_diff(&p_cz) <= 1e-12);
        }

        #[test]
        fn perpendicular_axis_is_optimal_for_mixtures((pri, theta, dir, nz) in instance()) {
            let rn = in_plane_norm(pri, theta, nz);
            prop_assume!(rn > 1e-3);
            let frame = ConstZFrame::new(rn * dir.cos(), rn * dir.sin(), nz).unwrap();
            let t = mixture_targets_constz(&frame, theta, pri).unwrap();
            let s = perp_in_plane(&frame.bloch(), frame.plane()).unwrap();
            let achieved = 0.5 + s.dot(&(t.m0 - t.m1)) / 4.0;
            prop_assert!((achieved - success_equal_priors(&t.m0, &t.m1)).abs() <= 1e-12);
        }
    }
}
