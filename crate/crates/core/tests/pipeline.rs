use qudit_phase::asymptotics::{asymptotic_h, gamma_table};
use qudit_phase::completeness::completeness_report;
use qudit_phase::quasiprob::{husimi_distribution, reconstruct_state};
use qudit_phase::sampling::{ginibre_density, seeded_rng};
use qudit_phase::uncertainty::{closest_min_uncertainty_state, min_uncertainty_state};
use qudit_phase::{build_context, certainty, harper_ground_pair, DensityMatrix, QuasiDistribution};
use std::f64::consts::FRAC_PI_4;

#[test]
fn state_to_grid_to_file_to_state() {
    let d = 7;
    let ctx = build_context(d).unwrap();
    let pair = harper_ground_pair(&ctx, FRAC_PI_4).unwrap();
    let rho = ginibre_density(d, &mut seeded_rng(3, 0));
    let dist = husimi_distribution(&rho, &pair, &ctx).unwrap().with_seed(3);
    let text = dist.to_json().unwrap();
    let back = QuasiDistribution::from_json(&text).unwrap();
    assert_eq!(back, dist);
    let rho2 = reconstruct_state(&back, &pair, &ctx).unwrap();
    assert!(rho2.entries().max_abs_diff(rho.entries()) < 1e-8);
}

#[test]
fn translated_coherent_state_is_found_again() {
    let d = 6;
    let ctx = build_context(d).unwrap();
    let pair = harper_ground_pair(&ctx, FRAC_PI_4).unwrap();
    let target = min_uncertainty_state(4, 1, &pair, &ctx).unwrap().state();
    assert!((certainty(&target, &ctx).unwrap() - pair.h().powi(2)).abs() < 1e-12);
    let m = closest_min_uncertainty_state(&target, &pair, &ctx).unwrap();
    assert_eq!((m.alpha, m.beta), (4, 1));
    assert!((m.fidelity - 1.0).abs() < 1e-12);

    // the Husimi grid of |4,1> peaks at (4,1)
    let rho = DensityMatrix::from_pure(&target, &ctx);
    let dist = husimi_distribution(&rho, &pair, &ctx).unwrap();
    let best = (0..d * d).max_by(|&i, &j| dist.values[i].total_cmp(&dist.values[j])).unwrap();
    assert_eq!((best / d, best % d), (4, 1));
}

#[test]
fn parity_decides_completeness() {
    for d in 2..=12 {
        let ctx = build_context(d).unwrap();
        let pair = harper_ground_pair(&ctx, FRAC_PI_4).unwrap();
        let r = completeness_report(&pair, &ctx).unwrap();
        assert_eq!(r.complete(), d % 2 == 1, "d = {d}");
    }
}

#[test]
fn asymptotic_tables_are_consistent() {
    let ctx = build_context(9).unwrap();
    let pair = harper_ground_pair(&ctx, FRAC_PI_4).unwrap();
    let rows = gamma_table(&pair).unwrap();
    assert_eq!(rows.len(), 9);
    assert_eq!(rows.first().unwrap().a, -4);
    let norm: f64 = rows.iter().map(|r| r.gamma_asym.powi(2)).sum();
    assert!((norm - 1.0).abs() < 1e-12);
    assert!(asymptotic_h(9) < pair.h());
}
