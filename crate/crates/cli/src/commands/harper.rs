use qudit_phase::harper::{verify_gamma_symmetries, DEFAULT_THETA};
use qudit_phase::{build_context, harper_ground_pair};
use serde_json::json;

use crate::error::CliError;
use crate::output::{Sink, Table};
use crate::GlobalArgs;

pub fn run(g: &GlobalArgs) -> Result<(), CliError> {
    let ctx = build_context(g.d)?;
    let pair = harper_ground_pair(&ctx, g.theta)?;
    let sym = if (g.theta - DEFAULT_THETA).abs() <= 1e-15 {
        Some(verify_gamma_symmetries(&pair, &ctx)?)
    } else {
        None
    };

    let stem = format!("harper_d{}", g.d);
    let mut sink = Sink::new(&g.output, g.format)?;
    let mut table = Table::new(&["a", "gamma"]);
    for (a, &x) in pair.gamma().iter().enumerate() {
        table.push(vec![a.into(), x.into()]);
    }
    sink.table(&format!("{stem}_gamma"), &table)?;

    let summary = json!({
        "h": pair.h(),
        "gap": pair.gap(),
        "min_gamma": pair.gamma().iter().copied().fold(f64::INFINITY, f64::min),
        "symmetry": sym,
        "symmetry_max": sym.map(|s| s.max()),
    });
    sink.finish(&stem, "harper", g, json!({}), summary)?;
    Ok(())
}
