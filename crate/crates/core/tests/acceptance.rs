//! Acceptance gate: one test per criterion, each printing a single PASS line
//! with the observed deviation once its assertions hold. Run with
//! `cargo test --test acceptance -- --nocapture` to see the lines.

use std::f64::consts::{FRAC_PI_8, SQRT_2, TAU};

use num_complex::Complex64;
use rand::{Rng, RngExt, SeedableRng};
use rand_chacha::ChaCha12Rng;

use rspsim::harness::{
    ChannelChoice, ShotConfig, StateChoice, cmd_sweep_phi, cmd_table1, estimate_witness,
};
use rspsim::noise::{NoiseParams, payoff_surface, rho_p};
use rspsim::optics::{compose, jones_hwp, phase_aligned_distance, qhq_phase_shifter};
use rspsim::protocol::{
    RspChannelSpec, epr_psi_minus, random_shared_state, rsp_output_closed_form,
    rsp_output_operational, target_rotation,
};
use rspsim::qmat::{
    CMatrix, DensityOperator, TargetPhase, UnitaryOp, cr, fidelity_with_target, frobenius_distance,
    hadamard, partial_trace_a,
};
use rspsim::witness::{
    coherence_enhancement, cqb, discord_projective_grid, enhancement_avg, geometric_discord,
    payoff, payoff_avg, payoff_avg_numeric, witness,
};

fn rng(stream: u64) -> ChaCha12Rng {
    ChaCha12Rng::seed_from_u64(0xACCE_97A0 ^ stream)
}

fn random_phase<R: Rng>(r: &mut R) -> TargetPhase {
    TargetPhase::from_radians(r.random::<f64>() * TAU)
}

fn noisy() -> DensityOperator {
    rho_p(NoiseParams::new(0.1, 0.2).unwrap())
}

#[test]
fn criterion_01_payoff_equals_witness_gain() {
    let mut r = rng(1);
    let mut dev = 0.0f64;
    for _ in 0..1000 {
        let rho = random_shared_state(&mut r);
        let phi = random_phase(&mut r);
        let p = payoff(&rho, phi).unwrap();
        let dw = coherence_enhancement(&rho, phi).unwrap().value;
        dev = dev.max((p - dw).abs());
    }
    assert!(dev <= 1e-10, "max |payoff - gain| = {dev:e}");
    println!(
        "criterion 1 (payoff equals witness gain, 1000 states): PASS, max dev {dev:.3e} <= 1e-10"
    );
}

#[test]
fn criterion_02_fidelity_sits_half_above_witness() {
    let mut r = rng(2);
    let mut dev = 0.0f64;
    for _ in 0..1000 {
        let rho = random_shared_state(&mut r);
        let phi = random_phase(&mut r);
        let channel = target_rotation(phi);
        let prepared = rsp_output_closed_form(&rho, phi).unwrap();
        let marginal = partial_trace_a(&rho).unwrap();
        for state in [&prepared, &marginal] {
            let f = fidelity_with_target(state, phi).unwrap();
            let w = witness(state, &channel, 0).unwrap().value;
            dev = dev.max((f - (w + 0.5)).abs());
        }
    }
    assert!(dev <= 1e-10, "max |F - (W + 1/2)| = {dev:e}");
    println!(
        "criterion 2 (fidelity = witness + 1/2, both states): PASS, max dev {dev:.3e} <= 1e-10"
    );
}

#[test]
fn criterion_03_ideal_benchmark_is_flat_at_one_half() {
    let singlet = epr_psi_minus();
    let mut dev = 0.0f64;
    for k in 0..360 {
        let phi = TargetPhase::from_degrees(k as f64);
        dev = dev.max((payoff(&singlet, phi).unwrap() - 0.5).abs());
    }
    assert!(dev <= 1e-12, "max |payoff - 1/2| = {dev:e}");
    // the measured reference value must sit within 0.01 of the analytic 1/2
    let measured: f64 = 0.4946;
    assert!((measured - 0.5).abs() < 0.01);
    println!(
        "criterion 3 (singlet payoff 0.5 on 360 phases, reference 0.4946 within 0.01): PASS, max dev {dev:.3e} <= 1e-12"
    );
}

#[test]
fn criterion_04_noisy_benchmark_and_reference_columns() {
    let rho = noisy();
    let mut dev = 0.0f64;
    for k in 0..8 {
        let phi = TargetPhase::from_degrees(45.0 * k as f64);
        dev = dev.max((payoff(&rho, phi).unwrap() - 0.35).abs());
        dev = dev.max((coherence_enhancement(&rho, phi).unwrap().value - 0.35).abs());
    }
    assert!(dev <= 1e-12, "max |value - 0.35| = {dev:e}");

    // every measured value in the benchmark table within 0.02 of its analytic
    // neighbour column
    let table = cmd_table1(NoiseParams::new(0.1, 0.2).unwrap(), None).unwrap();
    let mut bench_dev = 0.0f64;
    for row in &table.rows {
        for (analytic, measured) in [(1usize, 2usize), (3, 4), (5, 6), (7, 8)] {
            let gap = (row[analytic].as_f64().unwrap() - row[measured].as_f64().unwrap()).abs();
            bench_dev = bench_dev.max(gap);
        }
    }
    assert!(bench_dev < 0.02, "reference column gap {bench_dev}");
    println!(
        "criterion 4 (noisy payoff 0.35 at 8 phases, reference within 0.02): PASS, max dev {dev:.3e} <= 1e-12, bench gap {bench_dev:.4}"
    );
}

#[test]
fn criterion_05_equator_averages_of_the_fixed_verifier() {
    let params = NoiseParams::new(0.1, 0.2).unwrap();
    let grid360 = cmd_sweep_phi(
        StateChoice::RhoP,
        params,
        360,
        ChannelChoice::Hadamard,
        0,
        None,
    )
    .unwrap();
    let avg_at = grid360
        .columns
        .iter()
        .position(|c| *c == "cqb_equator_avg")
        .unwrap();
    let avg360 = grid360.rows[0][avg_at].as_f64().unwrap();
    let continuous = 0.35 * 2.0 / std::f64::consts::PI;
    assert!(
        (avg360 - continuous).abs() <= 1e-3,
        "360-point average {avg360}"
    );

    let grid8 = cmd_sweep_phi(
        StateChoice::RhoP,
        params,
        8,
        ChannelChoice::Hadamard,
        0,
        None,
    )
    .unwrap();
    let avg8 = grid8.rows[0][avg_at].as_f64().unwrap();
    // the exact eight-point value; its four-decimal rounding is 0.2112, and the
    // quoted 0.21125 is that rounding artifact, so it is held at 1e-4 instead
    let exact8 = 0.35 * (2.0 + 2.0 * SQRT_2) / 8.0;
    assert!((avg8 - exact8).abs() <= 1e-12, "8-point average {avg8}");
    assert!(
        (avg8 - 0.21125).abs() <= 1e-4,
        "8-point average {avg8} vs quoted 0.21125"
    );
    println!(
        "criterion 5 (equator averages: 360-pt {avg360:.6} ~ 2/pi form, 8-pt {avg8:.10} = exact sum within 1e-12 and 0.21125 within 1e-4): PASS"
    );
}

#[test]
fn criterion_06_quarter_turn_targets_establish_nothing() {
    let rho = noisy();
    let marginal = partial_trace_a(&rho).unwrap();
    let channel = hadamard();
    for deg in [90.0, 270.0] {
        let phi = TargetPhase::from_degrees(deg);
        let prepared = rsp_output_closed_form(&rho, phi).unwrap();
        let w = witness(&prepared, &channel, 0).unwrap().value;
        assert!(w.abs() <= 1e-12, "witness at {deg} degrees is {w:e}");
        let verdict = cqb(&prepared, &marginal, &channel, 0).unwrap();
        assert!(verdict.delta_gt.is_none() && verdict.delta_lt.is_none());
        assert!(!verdict.established);
    }
    println!(
        "criterion 6 (90/270 degrees: both one-sided verdicts not established, |W| <= 1e-12): PASS"
    );
}

#[test]
fn criterion_07_average_formulas() {
    let mut r = rng(7);
    let mut states = vec![epr_psi_minus(), noisy()];
    for _ in 0..100 {
        states.push(random_shared_state(&mut r));
    }
    let mut dev = 0.0f64;
    for rho in &states {
        let entry = payoff_avg(rho).unwrap();
        let quad = payoff_avg_numeric(rho, 360).unwrap();
        dev = dev.max((entry - quad).abs());
        // the two averages must be the same bits, not merely close
        assert_eq!(entry.to_bits(), enhancement_avg(rho).unwrap().to_bits());
    }
    assert!(dev <= 1e-9, "entry vs quadrature dev {dev:e}");
    println!(
        "criterion 7 (entry average = 360-pt quadrature on 102 states, payoff/gain averages bit-identical): PASS, max dev {dev:.3e} <= 1e-9"
    );
}

#[test]
fn criterion_08_operational_matches_closed_form() {
    let mut r = rng(8);
    let mut dev = 0.0f64;
    for _ in 0..500 {
        let rho = random_shared_state(&mut r);
        let phi = random_phase(&mut r);
        let operational = rsp_output_operational(&rho, &RspChannelSpec::ideal(phi)).unwrap();
        let closed = rsp_output_closed_form(&rho, phi).unwrap();
        dev = dev.max(frobenius_distance(operational.matrix(), closed.matrix()).unwrap());
    }
    assert!(dev <= 1e-10, "max Frobenius distance {dev:e}");
    println!(
        "criterion 8 (operational = closed form on 500 states): PASS, max dev {dev:.3e} <= 1e-10"
    );
}

#[test]
fn criterion_09_waveplate_realization_hits_its_anchors() {
    let mut dev = 0.0f64;
    for k in 0..64 {
        let theta = TAU * k as f64 / 64.0;
        // the quarter-half-quarter stack acts as a pure phase shifter
        let shifter = qhq_phase_shifter(theta);
        let anchor = UnitaryOp::new(CMatrix::from_row_slice(
            2,
            2,
            &[cr(1.0), cr(0.0), cr(0.0), Complex64::from_polar(1.0, theta)],
        ))
        .unwrap();
        dev = dev.max(phase_aligned_distance(&shifter, &anchor).unwrap());

        // shifter at -phi plus the 22.5-degree half-wave plate equals the
        // dagger of the target rotation
        let stack = compose(&[qhq_phase_shifter(-theta), jones_hwp(FRAC_PI_8)]).unwrap();
        let adapted = target_rotation(TargetPhase::from_radians(theta)).dagger();
        dev = dev.max(phase_aligned_distance(&stack, &adapted).unwrap());
    }
    // at phase zero the full stack is the balanced split
    let split = compose(&[qhq_phase_shifter(0.0), jones_hwp(FRAC_PI_8)]).unwrap();
    dev = dev.max(phase_aligned_distance(&split, &hadamard()).unwrap());
    assert!(dev <= 1e-10, "anchor deviation {dev:e}");
    println!(
        "criterion 9 (phase-shifter stack, adapted rotation, and balanced split anchors on 64-pt grids): PASS, max dev {dev:.3e} <= 1e-10"
    );
}

#[test]
fn criterion_10_noise_surface_closed_form() {
    let grid: Vec<f64> = (0..=20).map(|i| i as f64 * 0.05).collect();
    let points = payoff_surface(&grid, &grid, TargetPhase::from_radians(0.0)).unwrap();
    let mut dev = 0.0f64;
    let mut admissible = 0;
    for pt in &points {
        if let Some(dw) = pt.delta_w {
            dev = dev.max((dw - (1.0 - pt.p1 - pt.p2) / 2.0).abs());
            admissible += 1;
        }
    }
    assert!(admissible > 200);
    assert!(dev <= 1e-12, "surface deviation {dev:e}");
    println!(
        "criterion 10 (witness gain = (1-p1-p2)/2 on the 0.05 grid, {admissible} admissible points): PASS, max dev {dev:.3e} <= 1e-12"
    );
}

#[test]
fn criterion_11_geometric_discord() {
    let d_singlet = geometric_discord(&epr_psi_minus()).unwrap();
    assert!((d_singlet - 0.5).abs() <= 1e-9);
    let d_mixed = geometric_discord(&DensityOperator::maximally_mixed(4).unwrap()).unwrap();
    assert!(d_mixed.abs() <= 1e-9);

    let mut r = rng(11);
    let mut states = Vec::new();
    for _ in 0..20 {
        states.push(random_shared_state(&mut r));
    }
    for p in [0.05, 0.1, 0.15, 0.35, 0.4] {
        states.push(rho_p(NoiseParams::new(p, p).unwrap()));
    }
    let mut dev = 0.0f64;
    for rho in &states {
        let formula = geometric_discord(rho).unwrap();
        let searched = discord_projective_grid(rho, 1.0).unwrap();
        dev = dev.max((formula - searched).abs());
    }
    assert!(dev <= 1e-3, "formula vs search dev {dev:e}");
    println!(
        "criterion 11 (discord fixtures 0.5 and 0, formula vs search on 25 states): PASS, max dev {dev:.3e} <= 1e-3"
    );
}

#[test]
fn criterion_12_statistical_estimation() {
    let rho = noisy();
    let phi = TargetPhase::from_degrees(0.0);
    let prepared = rsp_output_closed_form(&rho, phi).unwrap();
    let channel = target_rotation(phi);

    let mut hits = 0;
    for trial in 0..100u64 {
        let cfg = ShotConfig::new(100_000, trial).unwrap();
        let est = estimate_witness(&prepared, &channel, 0, Some(&cfg)).unwrap();
        if (est.value - 0.35).abs() <= 3.0 * est.std_error {
            hits += 1;
        }
    }
    assert!(
        hits >= 95,
        "only {hits}/100 trials within three standard errors"
    );

    let mut ses = Vec::new();
    for (i, shots) in [1_000u64, 10_000, 100_000].into_iter().enumerate() {
        let cfg = ShotConfig::new(shots, 7_000 + i as u64).unwrap();
        ses.push(
            estimate_witness(&prepared, &channel, 0, Some(&cfg))
                .unwrap()
                .std_error,
        );
    }
    let root10 = 10.0f64.sqrt();
    for pair in ses.windows(2) {
        let ratio = pair[0] / pair[1];
        assert!(
            ratio >= root10 / 1.5 && ratio <= root10 * 1.5,
            "decade ratio {ratio} outside band"
        );
    }
    println!(
        "criterion 12 (statistics: {hits}/100 trials within 3 SE, SE follows inverse square root within factor 1.5): PASS"
    );
}
