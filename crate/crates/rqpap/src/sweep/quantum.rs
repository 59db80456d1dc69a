use rand::seq::SliceRandom;
use rand::Rng;

use rqpap_core::qstate::{apply_effect, bell_state, named_gate, validate, Complex64, DensityMatrix, QuantumEffect, TOLERANCE};

use super::SweepReport;
use crate::gen::rng;

/// Amplitudes of the Bell states as printed: `(|00> ± |11>)/√2` and
/// `(|01> ± |10>)/√2`.
fn bell_amplitudes(i: usize) -> [f64; 4] {
    let s = 1.0 / 2f64.sqrt();
    match i {
        1 => [s, 0.0, 0.0, s],
        2 => [s, 0.0, 0.0, -s],
        3 => [0.0, s, s, 0.0],
        _ => [0.0, s, -s, 0.0],
    }
}

fn random_state(r: &mut impl Rng) -> DensityMatrix {
    let mut pure = || {
        let amps: Vec<Complex64> = (0..4).map(|_| Complex64::new(r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0))).collect();
        let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        let amps: Vec<Complex64> = amps.iter().map(|a| a / norm).collect();
        DensityMatrix::pure(&amps).expect("normalized")
    };
    let (x, y) = (pure(), pure());
    let p = r.gen_range(0.0..1.0);
    DensityMatrix::from_matrix(x.matrix().scale(p).add(&y.matrix().scale(1.0 - p))).expect("mixture")
}

fn random_effect(r: &mut impl Rng) -> QuantumEffect {
    let q = r.gen_range(0..2);
    match r.gen_range(0..4) {
        0 => {
            let g = ["hadamard", "pauli_x", "pauli_y", "pauli_z"].choose(r).unwrap();
            QuantumEffect::Unitary { matrix: named_gate(g).unwrap(), targets: vec![q] }
        }
        1 => QuantumEffect::Unitary { matrix: named_gate("cnot").unwrap(), targets: vec![q, 1 - q] },
        2 => QuantumEffect::measure_standard(if r.gen_bool(0.5) { vec![q] } else { vec![0, 1] }),
        _ => QuantumEffect::measure_hadamard(q),
    }
}

pub(super) fn run(rep: &mut SweepReport) {
    for i in 1..=4 {
        rep.instances += 1;
        let amps = bell_amplitudes(i);
        let rho = bell_state(i).expect("bell");
        let worst = (0..16)
            .map(|k| (rho.get(k / 4, k % 4) - Complex64::new(amps[k / 4] * amps[k % 4], 0.0)).norm())
            .fold(0.0, f64::max);
        if worst > 1e-12 {
            rep.failures.push(format!("bell_state({i}) deviates by {worst:e}"));
        }
    }
    let mut r = rng(rep.seed);
    let mut measurements = 0;
    for k in 0..rep.budget {
        rep.instances += 1;
        let rho = random_state(&mut r);
        let e = random_effect(&mut r);
        let out = match apply_effect(&rho, &e) {
            Ok(o) => o,
            Err(err) => {
                rep.failures.push(format!("application {k}: {err}"));
                continue;
            }
        };
        let report = validate(&out);
        if !report.passed() {
            rep.failures.push(format!("application {k}: {:?} violated by {e:?}", report.failed()));
        }
        if let QuantumEffect::NonSelectiveMeasure { .. } = e {
            measurements += 1;
            let twice = apply_effect(&out, &e).expect("same shape");
            if !twice.approx_eq(&out, TOLERANCE) {
                rep.failures.push(format!("application {k}: measurement not idempotent"));
            }
        }
    }
    rep.notes.push(format!("effect applications={} measurements={measurements}", rep.budget));
}
