use qudit_phase::asymptotics::mathieu_residual;
use qudit_phase::completeness::{
    analytic_zero_pattern, block_spectrum_check, coeff_table, symmetry_residual, BLOCK_DIM_CAP, ZERO_TOL,
};
use qudit_phase::harper::{harper_matrix, verify_gamma_symmetries, DEFAULT_THETA, GAP_THRESHOLD};
use qudit_phase::quasiprob::{expected_marginal, husimi_distribution, reconstruct_state, Axis};
use qudit_phase::sampling::{ginibre_density, haar_state, seeded_rng};
use qudit_phase::uncertainty::{all_min_uncertainty_states, resolution_of_identity_residual};
use qudit_phase::{
    build_context, certainty, certainty_mixed, ground_pair_power, harper_ground_pair, PhasePointKind,
};
use rayon::prelude::*;
use serde_json::json;

use crate::error::CliError;
use crate::output::{Sink, Table};
use crate::{GlobalArgs, SelftestArgs};

const TOL: f64 = 1e-10;
const HUSIMI_FLOOR: f64 = -1e-12;
const ROUND_TRIP_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Relation {
    AtMost,
    Above,
}

#[derive(Debug, Clone)]
struct Check {
    d: usize,
    name: &'static str,
    value: f64,
    relation: Relation,
    bound: f64,
}

impl Check {
    fn at_most(d: usize, name: &'static str, value: f64, bound: f64) -> Self {
        Self {
            d,
            name,
            value,
            relation: Relation::AtMost,
            bound,
        }
    }

    fn above(d: usize, name: &'static str, value: f64, bound: f64) -> Self {
        Self {
            d,
            name,
            value,
            relation: Relation::Above,
            bound,
        }
    }

    fn pass(&self) -> bool {
        match self.relation {
            Relation::AtMost => self.value <= self.bound,
            Relation::Above => self.value > self.bound,
        }
    }
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn checks_for(d: usize, seed: u64, samples: usize) -> qudit_phase::Result<Vec<Check>> {
    let ctx = build_context(d)?;
    let pair = harper_ground_pair(&ctx, DEFAULT_THETA)?;
    let h2 = pair.h() * pair.h();
    let mut out = Vec::new();

    out.push(Check::above(d, "gap", pair.gap(), GAP_THRESHOLD));
    let min_gamma = pair.gamma().iter().copied().fold(f64::INFINITY, f64::min);
    out.push(Check::above(d, "min_gamma", min_gamma, 0.0));
    out.push(Check::at_most(d, "gamma_symmetry", verify_gamma_symmetries(&pair, &ctx)?.max(), TOL));
    out.push(Check::at_most(d, "mathieu_residual", mathieu_residual(&pair, &ctx)?, TOL));
    let power = ground_pair_power(&harper_matrix(&ctx), 1.0, 1e-12)?;
    out.push(Check::at_most(d, "power_vs_dense", (power.pair.h() - pair.h()).abs(), TOL));

    let mut mus: f64 = 0.0;
    for s in all_min_uncertainty_states(&pair, &ctx)? {
        mus = mus.max((certainty(&s.state(), &ctx)? - h2).abs());
    }
    out.push(Check::at_most(d, "min_uncertainty_certainty", mus, TOL));
    out.push(Check::at_most(d, "resolution_of_identity", resolution_of_identity_residual(&pair, &ctx)?, TOL));

    let mut rng = seeded_rng(seed, d as u64);
    let mut excess = f64::NEG_INFINITY;
    for _ in 0..samples {
        excess = excess.max(certainty(&haar_state(d, &mut rng), &ctx)? - h2);
        excess = excess.max(certainty_mixed(&ginibre_density(d, &mut rng), &ctx)? - h2);
    }
    if samples > 0 {
        out.push(Check::at_most(d, "certainty_bound", excess, TOL));
    }

    let rho = ginibre_density(d, &mut rng);
    let husimi = husimi_distribution(&rho, &pair, &ctx)?;
    out.push(Check::above(d, "husimi_min", husimi.min(), HUSIMI_FLOOR - f64::EPSILON));
    out.push(Check::at_most(d, "husimi_total", (husimi.total() - 1.0).abs(), TOL));
    let mut marginal: f64 = 0.0;
    for axis in [Axis::Position, Axis::Momentum] {
        let want = expected_marginal(&rho, axis, PhasePointKind::Husimi, &pair, &ctx)?;
        marginal = marginal.max(max_diff(&husimi.marginal(axis), &want));
    }
    out.push(Check::at_most(d, "husimi_marginal", marginal, TOL));

    let table = coeff_table(&pair, &ctx)?;
    out.push(Check::at_most(d, "fourier_coeff_symmetry", symmetry_residual(&table, &ctx), TOL));
    let analytic = analytic_zero_pattern(d)
        .iter()
        .map(|&(m, n)| table.f(m as i64, n as i64).norm())
        .fold(0.0, f64::max);
    out.push(Check::at_most(d, "analytic_zeros", analytic, ZERO_TOL));
    if d % 2 == 1 {
        out.push(Check::above(d, "min_g", table.min_g(), 0.0));
        let back = reconstruct_state(&husimi, &pair, &ctx)?;
        out.push(Check::at_most(
            d,
            "reconstruction",
            back.entries().max_abs_diff(rho.entries()),
            ROUND_TRIP_TOL,
        ));
    }
    if d <= BLOCK_DIM_CAP {
        let b = block_spectrum_check(&ctx, &pair)?;
        let spectrum = b.left_spectrum_residual.max(b.right_spectrum_residual);
        out.push(Check::at_most(d, "block_spectrum", spectrum, TOL));
        out.push(Check::at_most(d, "block_eigenvector", b.eigen_residual, TOL));
    }
    Ok(out)
}

pub fn run(g: &GlobalArgs, args: &SelftestArgs) -> Result<(), CliError> {
    let per_d: Vec<Vec<Check>> = (1..=args.max_d)
        .into_par_iter()
        .map(|d| checks_for(d, g.seed, args.samples))
        .collect::<qudit_phase::Result<_>>()?;
    let checks: Vec<Check> = per_d.into_iter().flatten().collect();

    let mut table = Table::new(&["d", "check", "value", "relation", "bound", "pass"]);
    for c in &checks {
        let relation = match c.relation {
            Relation::AtMost => "<=",
            Relation::Above => ">",
        };
        table.push(vec![
            c.d.into(),
            c.name.into(),
            c.value.into(),
            relation.into(),
            c.bound.into(),
            c.pass().into(),
        ]);
    }
    let failed: Vec<String> = checks
        .iter()
        .filter(|c| !c.pass())
        .map(|c| format!("{} at d = {} ({:e})", c.name, c.d, c.value))
        .collect();

    let stem = format!("selftest_max{}", args.max_d);
    let mut sink = Sink::new(&g.output, g.format)?;
    sink.table(&stem, &table)?;
    let summary = json!({
        "checks": checks.len(),
        "failed": failed,
        "pass": failed.is_empty(),
    });
    let flags = json!({ "max_d": args.max_d, "samples": args.samples });
    sink.finish(&stem, "selftest", g, flags, summary)?;
    if !failed.is_empty() {
        return Err(CliError::Invariant(format!("{} checks failed: {}", failed.len(), failed.join("; "))));
    }
    Ok(())
}
