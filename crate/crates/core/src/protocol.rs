//! The preparation protocol itself. Alice rotates her half of a shared pair by
//! U^dag, measures in the computational basis, and sends the bit; Bob applies a
//! pi rotation about z when the bit selects the flipped branch. The module
//! exposes the step-by-step (operational) simulation and the one-shot closed
//! form over the shared-state entries, which must agree to rounding.

use crate::error::{Error, Result};
use crate::optics::{compose, jones_hwp, qhq_phase_shifter};
use crate::qmat::{
    CMatrix, DensityOperator, TargetPhase, UnitaryOp, cr, identity, pauli_z, tensor,
};

/// Branches lighter than this are reported as flagged placeholders. Heavier
/// branches are renormalized by their own trace, so the only error left in a
/// kept branch is rounding amplified by at most 1/probability.
pub const ZERO_PROB_TOL: f64 = 1e-12;

/// Singlet pair (|01> - |10>)/sqrt(2) as a density operator.
pub fn epr_psi_minus() -> DensityOperator {
    let mut m = CMatrix::zeros(4, 4);
    m[(1, 1)] = cr(0.5);
    m[(2, 2)] = cr(0.5);
    m[(1, 2)] = cr(-0.5);
    m[(2, 1)] = cr(-0.5);
    DensityOperator::new(m).expect("singlet projector is a valid state")
}

/// Rotation taking the poles to the equatorial pair at phase phi:
/// columns (|0> + e^{i phi}|1>)/sqrt(2) and (|0> - e^{i phi}|1>)/sqrt(2).
pub fn target_rotation(phi: TargetPhase) -> UnitaryOp {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let e = phi.factor() * s;
    UnitaryOp::new(CMatrix::from_row_slice(2, 2, &[cr(s), cr(s), e, -e]))
        .expect("target rotation is unitary for every phase")
}

/// Everything Alice and Bob bring to one run: her rotation, his correction, and
/// the bit value that triggers it. Kept as data so imperfect or deliberately
/// wrong setups can be simulated.
#[derive(Clone, Debug)]
pub struct RspChannelSpec {
    pub u_dagger: UnitaryOp,
    pub correction: UnitaryOp,
    pub correction_on: u8,
}

impl RspChannelSpec {
    pub fn new(u_dagger: UnitaryOp, correction: UnitaryOp, correction_on: u8) -> Result<Self> {
        if u_dagger.dim() != 2 || correction.dim() != 2 {
            return Err(Error::Dimension {
                got: 4,
                expected: "2x2 local operators",
            });
        }
        if correction_on > 1 {
            return Err(Error::BasisIndex(correction_on));
        }
        Ok(RspChannelSpec {
            u_dagger,
            correction,
            correction_on,
        })
    }

    /// Exact rotation, exact pi correction on the bit-0 branch.
    pub fn ideal(phi: TargetPhase) -> Self {
        RspChannelSpec {
            u_dagger: target_rotation(phi).dagger(),
            correction: UnitaryOp::new(pauli_z()).expect("pauli z is unitary"),
            correction_on: 0,
        }
    }

    /// Same protocol realized with waveplates: Alice's rotation is a phase
    /// shifter at -phi followed by a half-wave plate at 22.5 degrees, Bob's
    /// correction a half-wave plate at 0. Both equal the ideal operators up to
    /// global phases, which conjugation cancels.
    pub fn with_optics(phi: TargetPhase) -> Self {
        let u_dagger = compose(&[
            qhq_phase_shifter(-phi.radians()),
            jones_hwp(std::f64::consts::FRAC_PI_8),
        ])
        .expect("two-plate stack composes");
        RspChannelSpec {
            u_dagger,
            correction: jones_hwp(0.0),
            correction_on: 0,
        }
    }
}

/// One branch of Alice's measurement. `bob_state` is Bob's conditional state
/// before any correction. A placeholder branch carries probability 0 and the
/// maximally mixed state so deterministic inputs stay representable.
#[derive(Clone, Debug)]
pub struct RspOutcome {
    pub alice_bit: u8,
    pub probability: f64,
    pub bob_state: DensityOperator,
    pub placeholder: bool,
}

/* Bob's 2x2 block of a 4x4 operator for Alice outcome a, re-Hermitized so the
two matmul passes cannot leave an asymmetric remainder. */
fn bob_block(sigma: &CMatrix, a: usize) -> CMatrix {
    CMatrix::from_fn(2, 2, |b, bp| {
        0.5 * (sigma[(2 * a + b, 2 * a + bp)] + sigma[(2 * a + bp, 2 * a + b)].conj())
    })
}

/// Apply Alice's rotation and measure her qubit in the computational basis.
/// Returns the bit-0 and bit-1 branches in order.
pub fn alice_measure(rho_ab: &DensityOperator, spec: &RspChannelSpec) -> Result<[RspOutcome; 2]> {
    if rho_ab.dim() != 4 {
        return Err(Error::Dimension {
            got: rho_ab.dim(),
            expected: "4",
        });
    }
    let a_op = tensor(spec.u_dagger.matrix(), &identity(2))?;
    let sigma = &a_op * rho_ab.matrix() * a_op.adjoint();
    let branch = |bit: usize| -> Result<RspOutcome> {
        let block = bob_block(&sigma, bit);
        let p = (block[(0, 0)] + block[(1, 1)]).re;
        if p <= ZERO_PROB_TOL {
            Ok(RspOutcome {
                alice_bit: bit as u8,
                probability: 0.0,
                bob_state: DensityOperator::maximally_mixed(2)?,
                placeholder: true,
            })
        } else {
            Ok(RspOutcome {
                alice_bit: bit as u8,
                probability: p,
                bob_state: DensityOperator::new(block.scale(1.0 / p))?,
                placeholder: false,
            })
        }
    };
    Ok([branch(0)?, branch(1)?])
}

/// Bob's side of the classical message: conjugate by the correction when the
/// bit matches the rule, pass through otherwise.
pub fn bob_correct(outcome: &RspOutcome, spec: &RspChannelSpec) -> Result<DensityOperator> {
    if outcome.placeholder || outcome.probability <= 0.0 {
        return Err(Error::ZeroProbabilityBranch);
    }
    if outcome.alice_bit == spec.correction_on {
        outcome.bob_state.conjugated_by(&spec.correction)
    } else {
        Ok(outcome.bob_state.clone())
    }
}

/// Bob's average prepared state: the probability-weighted mixture of his
/// corrected branches. Placeholder branches carry no weight and are skipped.
pub fn rsp_output_operational(
    rho_ab: &DensityOperator,
    spec: &RspChannelSpec,
) -> Result<DensityOperator> {
    let outcomes = alice_measure(rho_ab, spec)?;
    let mut m = CMatrix::zeros(2, 2);
    for outcome in &outcomes {
        if outcome.placeholder {
            continue;
        }
        m += bob_correct(outcome, spec)?
            .matrix()
            .scale(outcome.probability);
    }
    DensityOperator::new(m)
}

/// Same state straight from the shared-state entries, assuming the ideal
/// rotation and correction. With rows and columns indexed |00>, |01>, |10>,
/// |11>, the prepared state is
///   [[ r00 + r22,                -e^{i phi} r03 - e^{-i phi} r21 ],
///    [ -e^{-i phi} r30 - e^{i phi} r12,                r11 + r33 ]].
pub fn rsp_output_closed_form(
    rho_ab: &DensityOperator,
    phi: TargetPhase,
) -> Result<DensityOperator> {
    if rho_ab.dim() != 4 {
        return Err(Error::Dimension {
            got: rho_ab.dim(),
            expected: "4",
        });
    }
    let r = |i: usize, j: usize| rho_ab.entry(i, j);
    let e = phi.factor();
    let ec = e.conj();
    let mut m = CMatrix::zeros(2, 2);
    m[(0, 0)] = r(0, 0) + r(2, 2);
    m[(1, 1)] = r(1, 1) + r(3, 3);
    m[(0, 1)] = -e * r(0, 3) - ec * r(2, 1);
    m[(1, 0)] = -ec * r(3, 0) - e * r(1, 2);
    DensityOperator::new(m)
}

/// Mixture of 1 to 4 random pure two-qubit states, the shared-state ensemble
/// for every randomized consistency suite.
pub fn random_shared_state<R: rand::Rng + ?Sized>(rng: &mut R) -> DensityOperator {
    crate::qmat::random_density(4, rng).expect("dimension 4 is supported")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qmat::{PureKet, c, frobenius_distance, partial_trace_a};
    use approx::assert_relative_eq;
    use rand::{RngExt, SeedableRng};

    fn noisy_singlet() -> DensityOperator {
        let mut m = CMatrix::zeros(4, 4);
        m[(0, 0)] = cr(0.1);
        m[(1, 1)] = cr(0.35);
        m[(2, 2)] = cr(0.35);
        m[(3, 3)] = cr(0.2);
        m[(1, 2)] = cr(-0.35);
        m[(2, 1)] = cr(-0.35);
        DensityOperator::new(m).unwrap()
    }

    #[test]
    fn singlet_entries_and_marginal() {
        let rho = epr_psi_minus();
        assert_eq!(rho.entry(1, 2), cr(-0.5));
        assert_eq!(rho.entry(1, 1), cr(0.5));
        let b = partial_trace_a(&rho).unwrap();
        assert_relative_eq!(b.entry(0, 0).re, 0.5, epsilon = 1e-15);
        assert_eq!(b.entry(0, 1), cr(0.0));
    }

    #[test]
    fn ideal_singlet_run_at_zero_phase_yields_plus() {
        let spec = RspChannelSpec::ideal(TargetPhase::from_radians(0.0));
        let outcomes = alice_measure(&epr_psi_minus(), &spec).unwrap();
        let minus = PureKet::new(nalgebra::DVector::from_vec(vec![
            cr(std::f64::consts::FRAC_1_SQRT_2),
            cr(-std::f64::consts::FRAC_1_SQRT_2),
        ]))
        .unwrap();
        let plus = PureKet::new(nalgebra::DVector::from_vec(vec![
            cr(std::f64::consts::FRAC_1_SQRT_2),
            cr(std::f64::consts::FRAC_1_SQRT_2),
        ]))
        .unwrap();
        assert_relative_eq!(outcomes[0].probability, 0.5, epsilon = 1e-12);
        assert_relative_eq!(outcomes[1].probability, 0.5, epsilon = 1e-12);
        assert!(
            frobenius_distance(outcomes[0].bob_state.matrix(), &minus.projector()).unwrap() < 1e-12
        );
        assert!(
            frobenius_distance(outcomes[1].bob_state.matrix(), &plus.projector()).unwrap() < 1e-12
        );

        // bit 0 gets flipped to |+> by the correction, bit 1 passes through
        let corrected = bob_correct(&outcomes[0], &spec).unwrap();
        assert!(frobenius_distance(corrected.matrix(), &plus.projector()).unwrap() < 1e-12);
        let untouched = bob_correct(&outcomes[1], &spec).unwrap();
        assert!(frobenius_distance(untouched.matrix(), &plus.projector()).unwrap() < 1e-12);

        let out = rsp_output_operational(&epr_psi_minus(), &spec).unwrap();
        assert!(frobenius_distance(out.matrix(), &plus.projector()).unwrap() < 1e-12);
    }

    #[test]
    fn deterministic_branch_is_flagged() {
        let ket00 = PureKet::basis(4, 0).unwrap();
        let rho = DensityOperator::from_pure(&ket00);
        let spec = RspChannelSpec::new(
            UnitaryOp::identity(2).unwrap(),
            UnitaryOp::new(pauli_z()).unwrap(),
            0,
        )
        .unwrap();
        let outcomes = alice_measure(&rho, &spec).unwrap();
        assert_relative_eq!(outcomes[0].probability, 1.0, epsilon = 1e-15);
        assert_eq!(outcomes[0].bob_state.entry(0, 0), cr(1.0));
        assert!(outcomes[1].placeholder);
        assert_eq!(outcomes[1].probability, 0.0);
        assert!(matches!(
            bob_correct(&outcomes[1], &spec),
            Err(Error::ZeroProbabilityBranch)
        ));
    }

    #[test]
    fn closed_form_fixture_values() {
        let plus = CMatrix::from_row_slice(2, 2, &[cr(0.5), cr(0.5), cr(0.5), cr(0.5)]);
        let out = rsp_output_closed_form(&epr_psi_minus(), TargetPhase::from_radians(0.0)).unwrap();
        assert!(frobenius_distance(out.matrix(), &plus).unwrap() < 1e-15);

        for deg in [0.0, 45.0, 190.0] {
            let phi = TargetPhase::from_degrees(deg);
            let out = rsp_output_closed_form(&noisy_singlet(), phi).unwrap();
            assert_relative_eq!(out.entry(0, 0).re, 0.45, epsilon = 1e-15);
            assert_relative_eq!(out.entry(1, 1).re, 0.55, epsilon = 1e-15);
            let expect = phi.factor().conj() * 0.35;
            assert!((out.entry(0, 1) - expect).norm() < 1e-15);
        }

        let ket00 = PureKet::basis(4, 0).unwrap();
        let out = rsp_output_closed_form(
            &DensityOperator::from_pure(&ket00),
            TargetPhase::from_degrees(30.0),
        )
        .unwrap();
        assert_eq!(out.entry(0, 0), cr(1.0));
        assert_eq!(out.entry(0, 1), cr(0.0));
    }

    #[test]
    fn operational_matches_closed_form_on_fixtures_and_random_states() {
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(11);
        let mut worst = 0.0f64;
        for trial in 0..120 {
            let rho = if trial == 0 {
                epr_psi_minus()
            } else if trial == 1 {
                noisy_singlet()
            } else {
                random_shared_state(&mut rng)
            };
            let phi = TargetPhase::from_radians(rng.random::<f64>() * std::f64::consts::TAU);
            let a = rsp_output_operational(&rho, &RspChannelSpec::ideal(phi)).unwrap();
            let b = rsp_output_closed_form(&rho, phi).unwrap();
            worst = worst.max(frobenius_distance(a.matrix(), b.matrix()).unwrap());
        }
        assert!(
            worst < 1e-10,
            "largest operational/closed-form gap {worst:e}"
        );
    }

    #[test]
    fn optics_spec_runs_the_same_protocol() {
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(13);
        for _ in 0..40 {
            let rho = random_shared_state(&mut rng);
            let phi = TargetPhase::from_radians(rng.random::<f64>() * std::f64::consts::TAU);
            let exact = rsp_output_operational(&rho, &RspChannelSpec::ideal(phi)).unwrap();
            let plates = rsp_output_operational(&rho, &RspChannelSpec::with_optics(phi)).unwrap();
            assert!(frobenius_distance(exact.matrix(), plates.matrix()).unwrap() < 1e-10);
        }
    }

    #[test]
    fn maximally_mixed_input_prepares_nothing() {
        let rho = DensityOperator::maximally_mixed(4).unwrap();
        let spec = RspChannelSpec::ideal(TargetPhase::from_degrees(120.0));
        let out = rsp_output_operational(&rho, &spec).unwrap();
        assert!(frobenius_distance(out.matrix(), &identity(2).scale(0.5)).unwrap() < 1e-14);
    }

    #[test]
    fn outcome_probabilities_depend_only_on_rotated_diagonal() {
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(17);
        for _ in 0..60 {
            let rho = random_shared_state(&mut rng);
            let phi = TargetPhase::from_radians(rng.random::<f64>() * std::f64::consts::TAU);
            let spec = RspChannelSpec::ideal(phi);
            let a_op = tensor(spec.u_dagger.matrix(), &identity(2)).unwrap();
            let sigma = &a_op * rho.matrix() * a_op.adjoint();
            let mut diag = CMatrix::zeros(4, 4);
            for i in 0..4 {
                diag[(i, i)] = cr(sigma[(i, i)].re);
            }
            // rebuild a state with the same rotated diagonal and no coherences
            let u = tensor(spec.u_dagger.dagger().matrix(), &identity(2)).unwrap();
            let rebuilt = DensityOperator::new(&u * diag * u.adjoint()).unwrap();
            let p = alice_measure(&rho, &spec).unwrap();
            let q = alice_measure(&rebuilt, &spec).unwrap();
            assert_relative_eq!(p[0].probability, q[0].probability, epsilon = 1e-10);
            assert_relative_eq!(p[1].probability, q[1].probability, epsilon = 1e-10);
        }
    }

    #[test]
    fn probabilities_sum_to_one() {
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(19);
        for _ in 0..100 {
            let rho = random_shared_state(&mut rng);
            let phi = TargetPhase::from_radians(rng.random::<f64>() * std::f64::consts::TAU);
            let outcomes = alice_measure(&rho, &RspChannelSpec::ideal(phi)).unwrap();
            assert_relative_eq!(
                outcomes[0].probability + outcomes[1].probability,
                1.0,
                epsilon = 1e-10
            );
        }
    }

    #[test]
    fn wrong_correction_rule_breaks_the_preparation() {
        let phi = TargetPhase::from_radians(0.0);
        let ideal = RspChannelSpec::ideal(phi);
        let wrong =
            RspChannelSpec::new(ideal.u_dagger.clone(), ideal.correction.clone(), 1).unwrap();
        let good = rsp_output_operational(&epr_psi_minus(), &ideal).unwrap();
        let bad = rsp_output_operational(&epr_psi_minus(), &wrong).unwrap();
        let gap = frobenius_distance(good.matrix(), bad.matrix()).unwrap();
        assert!(
            gap > 0.5,
            "wrong rule should visibly corrupt the output, gap {gap}"
        );
    }

    #[test]
    fn target_rotation_columns_are_the_equatorial_pair() {
        let phi = TargetPhase::from_degrees(73.0);
        let u = target_rotation(phi);
        let s = PureKet::equatorial(phi);
        for i in 0..2 {
            assert!((u.matrix()[(i, 0)] - s.amplitudes()[i]).norm() < 1e-15);
        }
        assert!((u.matrix()[(1, 1)] + s.amplitudes()[1]).norm() < 1e-15);
        // U^dag maps the target back to |0>
        let back = u.dagger().matrix() * s.amplitudes();
        assert!((back[0] - cr(1.0)).norm() < 1e-12);
        assert!(back[1].norm() < 1e-12);
    }

    #[test]
    fn spec_validation_rejects_bad_rule_and_size() {
        let z = UnitaryOp::new(pauli_z()).unwrap();
        assert!(matches!(
            RspChannelSpec::new(z.clone(), z.clone(), 2),
            Err(Error::BasisIndex(2))
        ));
        let big = UnitaryOp::identity(4).unwrap();
        assert!(matches!(
            RspChannelSpec::new(big, z, 0),
            Err(Error::Dimension { .. })
        ));
    }

    #[test]
    fn closed_form_keeps_imaginary_coherences_straight() {
        // shared ket (|01> + i|10>)/sqrt(2), phase 0: off-diagonal must be -i/2
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let ket = PureKet::new(nalgebra::DVector::from_vec(vec![
            cr(0.0),
            cr(s),
            c(0.0, s),
            cr(0.0),
        ]))
        .unwrap();
        let rho = DensityOperator::from_pure(&ket);
        let phi = TargetPhase::from_radians(0.0);
        let closed = rsp_output_closed_form(&rho, phi).unwrap();
        assert!((closed.entry(0, 1) - c(0.0, -0.5)).norm() < 1e-15);
        let operational = rsp_output_operational(&rho, &RspChannelSpec::ideal(phi)).unwrap();
        assert!(frobenius_distance(closed.matrix(), operational.matrix()).unwrap() < 1e-12);
    }
}
