use qudit_phase::completeness::{
    block_spectrum_check, coeff_table, completeness_report, symmetric_reduction_check, BLOCK_DIM_CAP,
};
use qudit_phase::harper::DEFAULT_THETA;
use qudit_phase::{build_context, harper_ground_pair};
use serde_json::{json, Value};

use crate::error::CliError;
use crate::output::{Sink, Table};
use crate::GlobalArgs;

pub fn run(g: &GlobalArgs) -> Result<(), CliError> {
    let d = g.d;
    let ctx = build_context(d)?;
    let pair = harper_ground_pair(&ctx, DEFAULT_THETA)?;
    let table = coeff_table(&pair, &ctx)?;
    let report = completeness_report(&pair, &ctx)?;

    let mut f = Table::new(&["m", "n", "re", "im"]);
    let mut gt = Table::new(&["m", "n", "g"]);
    for m in table.centered_range() {
        for n in table.centered_range() {
            let z = table.f(m, n);
            f.push(vec![m.into(), n.into(), z.re.into(), z.im.into()]);
            gt.push(vec![m.into(), n.into(), table.g(m, n).into()]);
        }
    }

    let blocks = if d <= BLOCK_DIM_CAP {
        serde_json::to_value(block_spectrum_check(&ctx, &pair)?)?
    } else {
        Value::Null
    };
    let reduction = if d % 2 == 1 {
        let r = symmetric_reduction_check(&pair, &ctx)?;
        json!({ "report": r, "positive": r.positive() })
    } else {
        Value::Null
    };

    let stem = format!("complete_d{d}");
    let mut sink = Sink::new(&g.output, g.format)?;
    sink.table(&format!("{stem}_f"), &f)?;
    sink.table(&format!("{stem}_g"), &gt)?;
    sink.json(
        &format!("{stem}_report"),
        &json!({
            "d": report.d,
            "parity": report.parity,
            "zero_set": report.zero_set,
            "min_abs_f": report.min_abs_f,
            "min_g": report.min_g,
        }),
    )?;
    let summary = json!({
        "zero_set_size": report.zero_set.len(),
        "analytic_zero_set_size": report.analytic_zero_set.len(),
        "zero_set_matches_analytic": report.zero_set_matches(),
        "complete": report.complete(),
        "symmetry_residual": report.symmetry_residual,
        "max_g_imag": table.max_g_imag(),
        "block_spectrum": blocks,
        "symmetric_reduction": reduction,
    });
    sink.finish(&stem, "complete", g, json!({}), summary)?;
    Ok(())
}
