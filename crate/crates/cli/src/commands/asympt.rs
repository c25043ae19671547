use qudit_phase::asymptotics::{
    balanced_sigma, continuum_expansion_check, gamma_deviation, gamma_table, h_table, mathieu_residual,
    ContinuumScheme,
};
use qudit_phase::harper::DEFAULT_THETA;
use qudit_phase::{build_context, harper_ground_pair};
use serde_json::json;

use crate::error::CliError;
use crate::output::{Format, Sink, Table};
use crate::plot::{emit_plot_script, PlotKind};
use crate::{AsymptArgs, GlobalArgs};

pub fn run(g: &GlobalArgs, args: &AsymptArgs) -> Result<(), CliError> {
    if let Some(s) = args.sigma {
        if !(s > 0.0 && s.is_finite()) {
            return Err(CliError::Usage(format!("--sigma must be positive, got {s}")));
        }
    }
    let dims: Vec<usize> = (2..=args.max_d.max(2)).collect();
    let mut h = Table::new(&["d", "h_exact", "h_asym"]);
    for row in h_table(&dims)? {
        h.push(vec![row.d.into(), row.h_exact.into(), row.h_asym.into()]);
    }

    let ctx = build_context(g.d)?;
    let pair = harper_ground_pair(&ctx, DEFAULT_THETA)?;
    let mut gamma = Table::new(&["a", "gamma_exact", "gamma_asym"]);
    for row in gamma_table(&pair)? {
        gamma.push(vec![row.a.into(), row.gamma_exact.into(), row.gamma_asym.into()]);
    }

    let cctx = build_context(args.continuum_d)?;
    let cpair = harper_ground_pair(&cctx, DEFAULT_THETA)?;
    let state = cpair.state();
    let sigma = match args.sigma {
        Some(s) => s,
        None => balanced_sigma(&state, &cctx)?,
    };
    let scheme = ContinuumScheme::new(args.continuum_d, sigma)?;
    let continuum = continuum_expansion_check(&state, &scheme, &cctx)?;

    let h_name = format!("asympt_h_max{}", args.max_d);
    let gamma_name = format!("asympt_gamma_d{}", g.d);
    let mut sink = Sink::new(&g.output, g.format)?;
    sink.table(&h_name, &h)?;
    sink.table(&gamma_name, &gamma)?;
    if args.plot {
        let (h_csv, gamma_csv) = match sink.format() {
            Format::Csv => (sink.dir().join(format!("{h_name}.csv")), sink.dir().join(format!("{gamma_name}.csv"))),
            Format::Json => (sink.csv(&h_name, &h)?, sink.csv(&gamma_name, &gamma)?),
        };
        let script = emit_plot_script(&h_csv, PlotKind::HVersusD)?;
        sink.record(&script);
        let script = emit_plot_script(&gamma_csv, PlotKind::Gamma)?;
        sink.record(&script);
    }

    let summary = json!({
        "gamma_deviation": gamma_deviation(&pair)?,
        "mathieu_residual": mathieu_residual(&pair, &ctx)?,
        "continuum": {
            "report": continuum,
            "q_residual": continuum.q_residual(),
            "p_residual": continuum.p_residual(),
            "expansions_hold": continuum.expansions_hold(),
            "sum_rule_holds": continuum.sum_rule_holds(),
            "uncertainty_holds": continuum.uncertainty_holds(),
        },
    });
    let flags = json!({
        "max_d": args.max_d,
        "sigma": args.sigma,
        "continuum_d": args.continuum_d,
        "plot": args.plot,
    });
    sink.finish(&format!("asympt_d{}", g.d), "asympt", g, flags, summary)?;
    Ok(())
}
