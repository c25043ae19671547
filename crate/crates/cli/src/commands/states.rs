use qudit_phase::harper::DEFAULT_THETA;
use qudit_phase::uncertainty::{
    all_min_uncertainty_states, ms_inequality_check, resolution_of_identity_residual, theta_generator,
    theta_min_uncertainty_state,
};
use qudit_phase::{build_context, certainty, harper_ground_pair, maximize_certainty, OptimizerConfig};
use serde_json::json;

use crate::error::CliError;
use crate::output::{Sink, Table};
use crate::{GlobalArgs, StatesArgs};

pub fn run(g: &GlobalArgs, args: &StatesArgs) -> Result<(), CliError> {
    let ctx = build_context(g.d)?;
    let pair = harper_ground_pair(&ctx, DEFAULT_THETA)?;
    let h2 = pair.h() * pair.h();

    let mut table = Table::new(&["alpha", "beta", "certainty"]);
    let mut worst: f64 = 0.0;
    for s in all_min_uncertainty_states(&pair, &ctx)? {
        let c = certainty(&s.state(), &ctx)?;
        worst = worst.max((c - h2).abs());
        table.push(vec![s.alpha.into(), s.beta.into(), c.into()]);
    }
    let resolution = resolution_of_identity_residual(&pair, &ctx)?;

    let cfg = OptimizerConfig {
        seeds: args.starts,
        iterations: args.iterations,
        seed: g.seed,
        ..OptimizerConfig::default()
    };
    let best = maximize_certainty(&ctx, &cfg)?;

    let generator = theta_generator(&ctx, g.theta)?;
    let equality_state = theta_min_uncertainty_state(0, 0, &generator, &ctx)?;
    let ms = ms_inequality_check(&equality_state, g.theta, &ctx)?;

    let stem = format!("states_d{}", g.d);
    let mut sink = Sink::new(&g.output, g.format)?;
    sink.table(&format!("{stem}_certainty"), &table)?;
    let summary = json!({
        "h": pair.h(),
        "h_squared": h2,
        "max_certainty_deviation": worst,
        "resolution_residual": resolution,
        "optimizer": {
            "value": best.value,
            "gap": h2 - best.value,
            "start": best.start,
        },
        "theta_inequality": {
            "lhs": ms.lhs,
            "h_theta": ms.h_theta,
        },
    });
    let flags = json!({ "starts": args.starts, "iterations": args.iterations });
    sink.finish(&stem, "states", g, flags, summary)?;
    Ok(())
}
