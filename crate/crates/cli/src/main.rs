mod args;
mod output;

use std::f64::consts::PI;
use std::process::ExitCode;

use clap::Parser;
use num_complex::Complex64;
use num_traits::ToPrimitive;
use serde_json::json;

use dclab_core::bautin::classify_arc;
use dclab_core::curvegeom::BasepointPolicy;
use dclab_core::melnikov::{
    commutator_integral, m1_closed, m1_residues, m2_closed, m2_iterated, shuffle_defects, CommutatorMode,
};
use dclab_core::sweep::{component_histogram, worker_count};
use dclab_core::{flowsim, ArcGerm, CensusOptions, Center, DivisorComponent, Error};

use args::{Cli, Command};
use output::{num, Artifact};

const SHUFFLE_THRESHOLD: f64 = 1e-7;

enum Failure {
    Config(String),
    Numerical(String),
    Other(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_numerical() {
            Failure::Numerical(e.to_string())
        } else {
            match e {
                Error::ComponentMismatch { .. } | Error::Invariant(_) => Failure::Other(e.to_string()),
                _ => Failure::Config(e.to_string()),
            }
        }
    }
}

fn config<T>(msg: impl Into<String>) -> Result<T, Failure> {
    Err(Failure::Config(msg.into()))
}

fn check_tol(tol: f64) -> Result<(), Failure> {
    if tol > 0.0 && tol <= 1e-3 {
        Ok(())
    } else {
        config(format!("tolerance {tol} outside (0, 1e-3]"))
    }
}

fn center_label(c: Center) -> u8 {
    match c {
        Center::First => 1,
        Center::Second => 2,
    }
}

fn melnikov(center: Center, order: u8, grid: &args::HGrid, lambda: Option<dclab_core::Parameters>, oracle: bool, tol: f64) -> Result<Artifact, Failure> {
    check_tol(tol)?;
    let hs = grid.points();
    for &h in &hs {
        center.check_level(h)?;
        if h.abs() < 1e-4 || (h - 1.0).abs() < 1e-4 {
            return config(format!("grid point {h} within 1e-4 of a critical value"));
        }
    }
    if order == 1 && lambda.is_none() {
        return config("--lambda is required for --order 1");
    }
    let unit = if order == 1 { "H per unit lambda" } else { "H per unit lambda^2" };
    let mut cols = vec![("h", "H"), ("closed", unit)];
    if oracle {
        cols.extend([("oracle", unit), ("abs_delta", unit)]);
    }
    let mut art = Artifact::new("melnikov", ()).columns(&cols);
    let mut rows = Vec::new();
    let mut max_delta = 0.0f64;
    for &h in &hs {
        let (closed, numeric) = match (order, lambda) {
            (1, Some(l)) => (m1_closed(center, &l, h)?, if oracle { Some(m1_residues(center, &l, h)?) } else { None }),
            _ => (m2_closed(center, h)?, if oracle { Some(m2_iterated(center, h, tol)?) } else { None }),
        };
        let mut cells = vec![num(h), num(closed)];
        let mut row = json!({ "h": h, "closed": closed });
        if let Some(o) = numeric {
            let d = (closed - o).abs();
            max_delta = max_delta.max(d);
            cells.extend([num(o), num(d)]);
            row["oracle"] = json!(o);
            row["abs_delta"] = json!(d);
        }
        art.row(cells);
        rows.push(row);
    }
    art.data = json!({ "rows": rows, "max_abs_delta": if oracle { json!(max_delta) } else { json!(null) } });
    Ok(art
        .meta("center", center_label(center))
        .meta("order", order)
        .meta("lambda", lambda.map(|l| l.to_array()))
        .meta("tolerance", tol))
}

fn shuffle(h: f64, seed: u64, tol: f64) -> Result<Artifact, Failure> {
    check_tol(tol)?;
    let policy = if seed == 0 {
        BasepointPolicy::Canonical
    } else {
        BasepointPolicy::Rotated((seed as f64 * 0.618_033_988_749_895).fract() * 2.0 * PI)
    };
    let entries = shuffle_defects(h, policy, tol)?;
    let all_pass = entries.iter().all(|e| e.defect < SHUFFLE_THRESHOLD);
    let max = entries.iter().map(|e| e.defect).fold(0.0, f64::max);
    let mut art = Artifact::new("shuffle-check", ()).columns(&[
        ("a", "form"),
        ("b", "form"),
        ("loop", "cycle"),
        ("defect", "abs"),
        ("pass", "bool"),
    ]);
    let mut data = Vec::new();
    for e in &entries {
        let pass = e.defect < SHUFFLE_THRESHOLD;
        art.row(vec![e.a.clone(), e.b.clone(), format!("{:?}", e.cycle), num(e.defect), pass.to_string()]);
        data.push(json!({ "a": e.a, "b": e.b, "loop": e.cycle, "defect": e.defect, "pass": pass }));
    }
    art.data = json!(data);
    Ok(art
        .meta("h", h)
        .meta("seed", seed)
        .meta("threshold", SHUFFLE_THRESHOLD)
        .meta("all_pass", all_pass)
        .meta("max_defect", max))
}

fn commutator(lambda: dclab_core::Parameters, h: Complex64, tol: f64) -> Result<Artifact, Failure> {
    check_tol(tol)?;
    let det = commutator_integral(&lambda, h, CommutatorMode::Determinant, tol)?;
    let dir = commutator_integral(&lambda, h, CommutatorMode::Direct, tol)?;
    let mut art = Artifact::new(
        "commutator",
        json!({
            "determinant": { "re": det.re, "im": det.im },
            "direct": { "re": dir.re, "im": dir.im },
            "abs_difference": (det - dir).norm(),
        }),
    )
    .columns(&[("mode", "name"), ("re", "H per unit lambda^2"), ("im", "H per unit lambda^2")])
    .meta("lambda", lambda.to_array())
    .meta("h", json!({ "re": h.re, "im": h.im }))
    .meta("tolerance", tol);
    art.row(vec!["determinant".into(), num(det.re), num(det.im)]);
    art.row(vec!["direct".into(), num(dir.re), num(dir.im)]);
    Ok(art)
}

fn census(lambda: dclab_core::Parameters, h1: Option<(f64, f64)>, h2: Option<(f64, f64)>, grid: usize, tol: f64) -> Result<Artifact, Failure> {
    let d = CensusOptions::default();
    if grid < 2 {
        return config("--grid must be at least 2");
    }
    let opt = CensusOptions {
        h_range_first: h1.unwrap_or(d.h_range_first),
        h_range_second: h2.unwrap_or(d.h_range_second),
        grid,
        rel_tol: tol,
        ..d
    };
    let c = flowsim::limit_cycle_census(&lambda, &opt)?;
    let mut art = Artifact::new(
        "census",
        json!({
            "i": c.i,
            "j": c.j,
            "cycle_levels": { "first": c.first_levels, "second": c.second_levels },
            "diagnostics": c.diagnostics,
        }),
    )
    .columns(&[("annulus", "center"), ("h", "H")])
    .meta("lambda", lambda.to_array())
    .meta("options", opt)
    .meta(
        "scope",
        "cycles are counted on the given level ranges only, as a stand-in for large compact discs",
    );
    for h in &c.first_levels {
        art.row(vec!["1".into(), num(*h)]);
    }
    for h in &c.second_levels {
        art.row(vec!["2".into(), num(*h)]);
    }
    Ok(art)
}

fn classify(arc: &str) -> Result<Artifact, Failure> {
    let germ: ArcGerm = arc.parse()?;
    let p = classify_arc(&germ)?;
    let exact = |t: &Option<[num_rational::BigRational; 3]>| {
        t.as_ref().map(|t| t.iter().map(|c| c.to_string()).collect::<Vec<_>>())
    };
    let float = |t: &Option<[num_rational::BigRational; 3]>| {
        t.as_ref().map(|t| t.iter().map(|c| c.to_f64().unwrap_or(f64::NAN)).collect::<Vec<_>>())
    };
    let mut art = Artifact::new(
        "classify-arc",
        json!({
            "p1": float(&p.p1),
            "p2": float(&p.p2),
            "p1_exact": exact(&p.p1),
            "p2_exact": exact(&p.p2),
            "component": p.component,
        }),
    )
    .columns(&[("factor", "index"), ("c1", "projective"), ("c2", "projective"), ("c3", "projective"), ("component", "name")])
    .meta("arc", germ.to_string());
    for (k, t) in [(1, exact(&p.p1)), (2, exact(&p.p2))] {
        let mut cells = vec![k.to_string()];
        cells.extend(t.unwrap_or_else(|| vec![String::new(); 3]));
        cells.push(p.component.to_string());
        art.row(cells);
    }
    Ok(art)
}

fn sweep(samples: usize, seed: u64, only: Option<DivisorComponent>) -> Result<Artifact, Failure> {
    if samples == 0 {
        return config("--samples must be positive");
    }
    let workers = worker_count();
    let comps: Vec<DivisorComponent> = match only {
        Some(c) => vec![c],
        None => vec![DivisorComponent::E1, DivisorComponent::E2, DivisorComponent::E3],
    };
    let mut out = Vec::new();
    let mut art = Artifact::new("sweep-components", ()).columns(&[
        ("component", "name"),
        ("i", "zeros in first range"),
        ("j", "zeros in second range"),
        ("samples", "count"),
    ]);
    for c in comps {
        // each component gets its own stream so restricting to one does not change its numbers
        let stream = seed.wrapping_mul(3).wrapping_add(match c {
            DivisorComponent::E1 => 0,
            DivisorComponent::E2 => 1,
            DivisorComponent::E3 => 2,
        });
        let hist = component_histogram(c, samples, stream, workers)?;
        for e in &hist.histogram {
            art.row(vec![c.to_string(), e.i.to_string(), e.j.to_string(), e.samples.to_string()]);
        }
        out.push(hist);
    }
    art.data = serde_json::to_value(out).expect("histograms serialize");
    Ok(art
        .meta("samples", samples)
        .meta("seed", seed)
        .meta("threads", workers)
        .meta("ranges", json!({ "first": [-50.0, -1e-4], "second": [1.0001, 50.0] })))
}

fn run(cli: &Cli) -> Result<Artifact, Failure> {
    match &cli.command {
        Command::Melnikov { center, order, h_grid, lambda, oracle, tol } => {
            melnikov(*center, *order, h_grid, *lambda, *oracle, *tol)
        }
        Command::ShuffleCheck { h, seed, tol } => shuffle(*h, *seed, *tol),
        Command::Commutator { lambda, h, h_im, tol } => commutator(*lambda, Complex64::new(*h, *h_im), *tol),
        Command::Census { lambda, h1, h2, grid, tol } => census(*lambda, *h1, *h2, *grid, *tol),
        Command::ClassifyArc { arc } => classify(arc),
        Command::SweepComponents { samples, seed, component } => sweep(*samples, *seed, *component),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = run(&cli).and_then(|a| {
        a.emit(cli.common.format, cli.common.output.as_deref())
            .map_err(Failure::Other)
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(m)) => {
            eprintln!("configuration error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Numerical(m)) => {
            eprintln!("numerical failure: {m}");
            ExitCode::from(3)
        }
        Err(Failure::Other(m)) => {
            eprintln!("error: {m}");
            ExitCode::FAILURE
        }
    }
}
