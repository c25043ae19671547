use std::fs;

use qudit_phase::harper::DEFAULT_THETA;
use qudit_phase::quasiprob::{
    expected_marginal, husimi_distribution, optimality_gap, phase_points, reconstruct_state, sharpness_of_family,
    sharpness_of_kernel, wigner_distribution, Axis, PHASE_POINT_DIM_CAP,
};
use qudit_phase::sampling::{ginibre_density, seeded_rng};
use qudit_phase::{build_context, harper_ground_pair, DensityMatrix, PhasePointKind, QuasiDistribution};
use serde_json::{json, Value};

use crate::error::CliError;
use crate::output::{clamp_small_negative, Format, Sink, Table};
use crate::{GlobalArgs, QuasiprobArgs, MAX_DIM};

/// Random streams drawn from `--seed`.
const STATE_STREAM: u64 = 0;
const KERNEL_STREAM: u64 = 1;

fn density_table(rho: &DensityMatrix) -> Table {
    let d = rho.dim();
    let m = rho.entries();
    let mut t = Table::new(&["row", "col", "re", "im"]);
    for i in 0..d {
        for j in 0..d {
            let z = m[(i, j)];
            t.push(vec![i.into(), j.into(), z.re.into(), z.im.into()]);
        }
    }
    t
}

fn presented(dist: &QuasiDistribution) -> QuasiDistribution {
    let mut out = dist.clone();
    if out.kind == PhasePointKind::Husimi {
        out.values.iter_mut().for_each(|x| *x = clamp_small_negative(*x));
    }
    out
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn require_odd_for(d: usize, what: &str) -> Result<(), CliError> {
    if d % 2 == 0 {
        return Err(CliError::Invariant(format!("{what} requires odd d, got d = {d}")));
    }
    Ok(())
}

pub fn run(g: &GlobalArgs, args: &QuasiprobArgs) -> Result<(), CliError> {
    if let Some(path) = &args.input {
        return run_input(g, path);
    }
    let d = g.d;
    let kind = PhasePointKind::from(args.kind);
    if kind == PhasePointKind::Wigner {
        require_odd_for(d, "the Wigner grid")?;
    }
    if args.reconstruct {
        if kind != PhasePointKind::Husimi {
            return Err(CliError::Usage("reconstruction inverts the husimi grid, use --kind husimi".into()));
        }
        require_odd_for(d, "reconstruction")?;
    }

    let ctx = build_context(d)?;
    let pair = harper_ground_pair(&ctx, DEFAULT_THETA)?;
    let rho = ginibre_density(d, &mut seeded_rng(g.seed, STATE_STREAM));
    let dist = match kind {
        PhasePointKind::Husimi => husimi_distribution(&rho, &pair, &ctx)?,
        PhasePointKind::Wigner => wigner_distribution(&rho, &ctx)?,
    }
    .with_seed(g.seed);

    let position = dist.marginal(Axis::Position);
    let momentum = dist.marginal(Axis::Momentum);
    let marginal_error = max_diff(&position, &expected_marginal(&rho, Axis::Position, kind, &pair, &ctx)?).max(
        max_diff(&momentum, &expected_marginal(&rho, Axis::Momentum, kind, &pair, &ctx)?),
    );

    let sharpness = match kind {
        PhasePointKind::Husimi => Some(sharpness_of_kernel(&DensityMatrix::from_pure(&pair.state(), &ctx), &ctx)?),
        PhasePointKind::Wigner if d <= PHASE_POINT_DIM_CAP => {
            Some(sharpness_of_family(&phase_points(kind, &pair, &ctx)?, &ctx)?)
        }
        PhasePointKind::Wigner => None,
    };
    let kernel = ginibre_density(d, &mut seeded_rng(g.seed, KERNEL_STREAM));
    let gap_gamma = optimality_gap(&DensityMatrix::from_pure(&pair.state(), &ctx), &pair, &ctx)?;
    let gap_random = optimality_gap(&kernel, &pair, &ctx)?;

    let stem = format!("quasiprob_{kind}_d{d}");
    let mut sink = Sink::new(&g.output, g.format)?;
    let shown = presented(&dist);
    match g.format {
        Format::Csv => {
            let mut grid = Table::new(&["alpha", "beta", "value"]);
            for (k, &v) in shown.values.iter().enumerate() {
                grid.push(vec![(k / d).into(), (k % d).into(), v.into()]);
            }
            sink.csv(&stem, &grid)?;
        }
        Format::Json => {
            sink.json(&stem, &shown)?;
        }
    }
    let mut marginals = Table::new(&["index", "position", "momentum"]);
    for i in 0..d {
        marginals.push(vec![i.into(), position[i].into(), momentum[i].into()]);
    }
    sink.table(&format!("{stem}_marginals"), &marginals)?;

    let mut reconstruction = Value::Null;
    if args.reconstruct {
        let back = reconstruct_state(&dist, &pair, &ctx)?;
        let err = back.entries().max_abs_diff(rho.entries());
        sink.table(&format!("{stem}_reconstructed"), &density_table(&back))?;
        reconstruction = json!({ "round_trip_error": err });
    }

    let summary = json!({
        "kind": kind,
        "min": dist.min(),
        "total": dist.total(),
        "marginal_error": marginal_error,
        "sharpness": sharpness.map(|s| json!({ "sigma": s.sigma, "tau": s.tau, "product": s.product() })),
        "h_squared": pair.h() * pair.h(),
        "optimality_gap_gamma": gap_gamma,
        "optimality_gap_random_kernel": gap_random,
        "reconstruction": reconstruction,
    });
    let flags = json!({ "kind": kind, "reconstruct": args.reconstruct, "input": Value::Null });
    sink.finish(&stem, "quasiprob", g, flags, summary)?;
    Ok(())
}

fn run_input(g: &GlobalArgs, path: &std::path::Path) -> Result<(), CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let dist = QuasiDistribution::from_json(&text)?;
    let d = dist.d;
    if d > MAX_DIM {
        return Err(CliError::Usage(format!("input dimension {d} exceeds {MAX_DIM}")));
    }
    if dist.kind != PhasePointKind::Husimi {
        return Err(CliError::Usage("reconstruction inverts a husimi grid".into()));
    }
    require_odd_for(d, "reconstruction")?;
    let ctx = build_context(d)?;
    let pair = harper_ground_pair(&ctx, DEFAULT_THETA)?;
    let rho = reconstruct_state(&dist, &pair, &ctx)?;
    let again = husimi_distribution(&rho, &pair, &ctx)?;

    let stem = format!("quasiprob_input_d{d}");
    let mut sink = Sink::new(&g.output, g.format)?;
    sink.table(&format!("{stem}_reconstructed"), &density_table(&rho))?;
    let summary = json!({
        "input_seed": dist.seed,
        "input_generator_version": dist.generator_version,
        "grid_residual": max_diff(&again.values, &dist.values),
        "hermiticity_defect": rho.entries().hermiticity_defect(),
    });
    let flags = json!({
        "kind": dist.kind,
        "reconstruct": true,
        "input": path.file_name().and_then(|n| n.to_str()),
    });
    let meta = GlobalArgs { d, ..g.clone() };
    sink.finish(&stem, "quasiprob", &meta, flags, summary)?;
    Ok(())
}
