//! Jones matrices for the polarization optics that realize the protocol's local
//! rotations. Conventions: |0> is horizontal, |1> is vertical, plate angles are
//! fast-axis angles from horizontal in radians, and a stack written
//! [first, second, ...] acts as  last * ... * second * first  on a ket.

use crate::error::{Error, Result};
use crate::qmat::{CMatrix, TargetPhase, UnitaryOp, c, cr};

/// Half-wave plate at fast-axis angle theta:
/// [[cos 2theta, sin 2theta], [sin 2theta, -cos 2theta]].
pub fn jones_hwp(theta: f64) -> UnitaryOp {
    let (s, co) = (2.0 * theta).sin_cos();
    UnitaryOp::new(CMatrix::from_row_slice(
        2,
        2,
        &[cr(co), cr(s), cr(s), cr(-co)],
    ))
    .expect("half-wave Jones matrix is unitary for every angle")
}

/// Quarter-wave plate at fast-axis angle theta: R(theta) diag(1, i) R(-theta).
pub fn jones_qwp(theta: f64) -> UnitaryOp {
    let (s, co) = theta.sin_cos();
    let (s2, c2) = (s * s, co * co);
    let sc = s * co;
    let m = CMatrix::from_row_slice(2, 2, &[c(c2, s2), c(sc, -sc), c(sc, -sc), c(s2, c2)]);
    UnitaryOp::new(m).expect("quarter-wave Jones matrix is unitary for every angle")
}

/// Product of a stack applied in listed order: result = ops[n-1] * ... * ops[0].
pub fn compose(ops: &[UnitaryOp]) -> Result<UnitaryOp> {
    let first = ops.first().ok_or(Error::EmptyComposition)?;
    let mut acc = first.matrix().clone();
    for op in &ops[1..] {
        if op.dim() != acc.nrows() {
            return Err(Error::Dimension {
                got: op.dim(),
                expected: "matching operator size",
            });
        }
        acc = op.matrix() * acc;
    }
    UnitaryOp::new(acc)
}

/// True when a = e^{i alpha} b for some real alpha. The phase is read off the
/// largest entry of b, so the comparison is well conditioned whenever b is not
/// numerically zero.
pub fn equal_up_to_global_phase(a: &UnitaryOp, b: &UnitaryOp, tol: f64) -> bool {
    phase_aligned_distance(a, b).is_some_and(|d| d <= tol)
}

/// Largest entry deviation between a and b after rotating b by the global
/// phase read off at b's largest entry. None when the operators cannot be
/// compared at all (dimension mismatch, or a vanishes where b peaks).
pub fn phase_aligned_distance(a: &UnitaryOp, b: &UnitaryOp) -> Option<f64> {
    if a.dim() != b.dim() {
        return None;
    }
    let (am, bm) = (a.matrix(), b.matrix());
    let mut best = (0usize, 0usize);
    let mut best_norm = -1.0f64;
    for i in 0..bm.nrows() {
        for j in 0..bm.ncols() {
            let n = bm[(i, j)].norm();
            if n > best_norm {
                best_norm = n;
                best = (i, j);
            }
        }
    }
    let ratio = am[best] / bm[best];
    let n = ratio.norm();
    if n < 1e-12 {
        return None;
    }
    let phase = ratio / n;
    Some(
        (am - bm.map(|z| z * phase))
            .iter()
            .fold(0.0f64, |acc, z| acc.max(z.norm())),
    )
}

/// Sandwich QWP(45deg) HWP(h) QWP(45deg) with h = (theta + pi)/4, which equals
/// diag(1, e^{i theta}) up to a global phase. Theta is wrapped into [0, 2pi)
/// first so the middle plate angle lands in the mountable range [pi/4, 3pi/4).
pub fn qhq_phase_shifter(theta: f64) -> UnitaryOp {
    let wrapped = TargetPhase::from_radians(theta).radians();
    let q = jones_qwp(std::f64::consts::FRAC_PI_4);
    let h = jones_hwp((wrapped + std::f64::consts::PI) / 4.0);
    compose(&[q.clone(), h, q]).expect("three 2x2 plates always compose")
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PlateKind {
    Half,
    Quarter,
}

/// One physical plate: which retarder to mount and its fast-axis angle,
/// normalized into [0, pi) since a plate is pi-periodic in its axis.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WaveplateSetting {
    pub kind: PlateKind,
    pub angle: f64,
}

impl WaveplateSetting {
    pub fn new(kind: PlateKind, angle: f64) -> Self {
        WaveplateSetting {
            kind,
            angle: angle.rem_euclid(std::f64::consts::PI),
        }
    }

    pub fn jones(&self) -> UnitaryOp {
        match self.kind {
            PlateKind::Half => jones_hwp(self.angle),
            PlateKind::Quarter => jones_qwp(self.angle),
        }
    }

    pub fn angle_degrees(&self) -> f64 {
        self.angle.to_degrees()
    }
}

/// Mount list for the phase shifter at a given induced phase theta.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QhqSetting {
    pub theta: f64,
}

impl QhqSetting {
    pub fn new(theta: f64) -> Self {
        QhqSetting {
            theta: TargetPhase::from_radians(theta).radians(),
        }
    }

    /// Plates in application order.
    pub fn plate_settings(&self) -> [WaveplateSetting; 3] {
        let q = WaveplateSetting::new(PlateKind::Quarter, std::f64::consts::FRAC_PI_4);
        let h = WaveplateSetting::new(PlateKind::Half, (self.theta + std::f64::consts::PI) / 4.0);
        [q, h, q]
    }

    pub fn jones(&self) -> UnitaryOp {
        qhq_phase_shifter(self.theta)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qmat::{hadamard, identity, pauli_x, pauli_z};
    use approx::assert_relative_eq;
    use num_complex::Complex64;

    fn diag_phase(theta: f64) -> UnitaryOp {
        UnitaryOp::new(CMatrix::from_row_slice(
            2,
            2,
            &[cr(1.0), cr(0.0), cr(0.0), Complex64::from_polar(1.0, theta)],
        ))
        .unwrap()
    }

    #[test]
    fn hwp_at_zero_is_pauli_z_and_at_45_is_pauli_x() {
        assert_eq!(jones_hwp(0.0).matrix(), &pauli_z());
        let x = jones_hwp(std::f64::consts::FRAC_PI_4);
        assert!((x.matrix() - pauli_x()).norm() < 1e-15);
    }

    #[test]
    fn qwp_at_zero_is_diagonal_retarder() {
        let q = jones_qwp(0.0);
        assert_eq!(q.matrix()[(0, 0)], cr(1.0));
        assert_eq!(q.matrix()[(1, 1)], c(0.0, 1.0));
        assert_eq!(q.matrix()[(0, 1)], cr(0.0));
    }

    #[test]
    fn qwp_at_45_has_uniform_magnitudes() {
        let q = jones_qwp(std::f64::consts::FRAC_PI_4);
        for i in 0..2 {
            for j in 0..2 {
                assert_relative_eq!(
                    q.matrix()[(i, j)].norm(),
                    std::f64::consts::FRAC_1_SQRT_2,
                    epsilon = 1e-15
                );
            }
        }
    }

    #[test]
    fn compose_applies_left_to_right() {
        // Z then X is XZ = [[0,-1],[1,0]]
        let zx = compose(&[jones_hwp(0.0), jones_hwp(std::f64::consts::FRAC_PI_4)]).unwrap();
        let expect = &pauli_x() * &pauli_z();
        assert!((zx.matrix() - expect).norm() < 1e-15);
        assert!(matches!(compose(&[]), Err(Error::EmptyComposition)));
    }

    #[test]
    fn qhq_matches_diagonal_phase_for_a_sweep_of_angles() {
        for deg in [
            0.0f64, 10.0, 45.0, 90.0, 135.0, 180.0, 222.0, 270.0, 315.0, 359.0, -77.0,
        ] {
            let theta = deg.to_radians();
            let got = qhq_phase_shifter(theta);
            let want = diag_phase(theta);
            assert!(
                equal_up_to_global_phase(&got, &want, 1e-10),
                "phase shifter off at {deg} degrees"
            );
        }
    }

    #[test]
    fn qhq_phases_add() {
        let a = 0.9f64;
        let b = 4.4f64;
        let product = compose(&[qhq_phase_shifter(a), qhq_phase_shifter(b)]).unwrap();
        assert!(equal_up_to_global_phase(
            &product,
            &qhq_phase_shifter(a + b),
            1e-10
        ));
    }

    #[test]
    fn qhq_at_zero_with_hwp_builds_hadamard() {
        let stack = compose(&[
            qhq_phase_shifter(0.0),
            jones_hwp(std::f64::consts::FRAC_PI_8),
        ])
        .unwrap();
        assert!(equal_up_to_global_phase(&stack, &hadamard(), 1e-10));
    }

    #[test]
    fn qhq_middle_plate_angle_stays_mountable() {
        for deg in [0.0f64, 90.0, 180.0, 270.0, 359.9] {
            let setting = QhqSetting::new(deg.to_radians());
            let [q1, h, q2] = setting.plate_settings();
            assert_relative_eq!(q1.angle_degrees(), 45.0, epsilon = 1e-12);
            assert_relative_eq!(q2.angle_degrees(), 45.0, epsilon = 1e-12);
            assert!(h.angle >= std::f64::consts::FRAC_PI_4 - 1e-12);
            assert!(h.angle < 3.0 * std::f64::consts::FRAC_PI_4);
            let rebuilt = compose(&[q1.jones(), h.jones(), q2.jones()]).unwrap();
            assert!(equal_up_to_global_phase(&rebuilt, &setting.jones(), 1e-12));
        }
    }

    #[test]
    fn global_phase_comparison_is_strict_about_structure() {
        let h = hadamard();
        let spun =
            UnitaryOp::new(h.matrix().map(|z| z * Complex64::from_polar(1.0, 0.83))).unwrap();
        assert!(equal_up_to_global_phase(&h, &spun, 1e-12));
        assert!(!equal_up_to_global_phase(
            &h,
            &UnitaryOp::identity(2).unwrap(),
            1e-6
        ));
        assert!(!equal_up_to_global_phase(
            &h,
            &UnitaryOp::identity(4).unwrap(),
            1e-6
        ));
    }

    #[test]
    fn plate_angles_normalize_by_half_turn() {
        let w = WaveplateSetting::new(PlateKind::Half, std::f64::consts::PI + 0.3);
        assert_relative_eq!(w.angle, 0.3, epsilon = 1e-12);
        let i2 = identity(2);
        let full = compose(&[jones_hwp(0.2), jones_hwp(0.2)]).unwrap();
        assert!((full.matrix() - i2).norm() < 1e-15);
    }
}
