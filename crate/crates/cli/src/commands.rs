//! Subcommand implementations.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::Args;
use fista_core::problem::{objective, SolverConfig, StopReason, TraceStride};
use fista_core::solvers::run;
use fista_core::spectral::{
    envelope_log_sweep, k_eq, optimal_d_fit, ratio_approx, tridiag_spectrum, SpectralModel,
};

use crate::formats::{self, parse_config};
use crate::instances::{parse_x0, InstanceOpts};
use crate::presets::VariantPreset;
use crate::CliError;

fn read_config(
    path: &Option<PathBuf>,
) -> Result<std::collections::BTreeMap<String, String>, CliError> {
    match path {
        None => Ok(Default::default()),
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .map_err(|e| CliError::usage(format!("reading {p:?}: {e}")))?;
            parse_config(&text)
        }
    }
}

fn fill<T: std::str::FromStr>(
    slot: &mut Option<T>,
    map: &std::collections::BTreeMap<String, String>,
    key: &str,
) -> Result<(), CliError> {
    if slot.is_none() {
        if let Some(v) = map.get(key) {
            *slot = Some(
                v.parse()
                    .map_err(|_| CliError::usage(format!("config {key}: bad value {v:?}")))?,
            );
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// solve
// ---------------------------------------------------------------------------

#[derive(Args, Debug)]
pub struct SolveOpts {
    #[command(flatten)]
    pub instance: InstanceOpts,
    /// Solver preset; may be repeated to run a benchmark matrix
    #[arg(long)]
    pub variant: Vec<String>,
    /// Step size as a multiple of 1/L (presets may override)
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Initial t₀ of the recursion
    #[arg(long)]
    pub t0: Option<f64>,
    #[arg(long)]
    pub max_iters: Option<usize>,
    /// Stop when ‖x_k − x_{k−1}‖ drops to this value
    #[arg(long)]
    pub tol: Option<f64>,
    /// Trace stride: `auto` or a positive integer
    #[arg(long)]
    pub stride: Option<String>,
    /// Starting point: zero | ones | const:V | unit:SEED
    #[arg(long)]
    pub x0: Option<String>,
    /// Reference solution file; adds the dist_to_ref column
    #[arg(long)]
    pub reference: Option<PathBuf>,
    /// Trace CSV path (default trace.csv; per-variant suffix for a matrix)
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Summary JSON path (default: out with .summary.json)
    #[arg(long)]
    pub summary: Option<PathBuf>,
    /// Threads for independent benchmark cells
    #[arg(long)]
    pub jobs: Option<usize>,
    /// Key=value config file (flags override file entries)
    #[arg(long)]
    pub config: Option<PathBuf>,
}

fn parse_stride(spec: Option<&str>) -> Result<TraceStride, CliError> {
    match spec {
        None | Some("auto") => Ok(TraceStride::Auto),
        Some(v) => {
            let n: u32 = v
                .parse()
                .map_err(|_| CliError::usage(format!("bad stride {v:?}")))?;
            if n == 0 {
                return Err(CliError::usage("stride must be positive"));
            }
            Ok(TraceStride::Every(n))
        }
    }
}

fn with_variant_suffix(path: &Path, tag: &str) -> PathBuf {
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("out");
    let ext = path.extension().and_then(|s| s.to_str()).unwrap_or("csv");
    path.with_file_name(format!("{stem}-{tag}.{ext}"))
}

pub fn cmd_solve(mut opts: SolveOpts) -> Result<(), CliError> {
    let config = read_config(&opts.config)?;
    opts.instance.merge_config(&config)?;
    if opts.variant.is_empty() {
        if let Some(v) = config.get("variant") {
            opts.variant = v.split(',').map(|s| s.trim().to_string()).collect();
        }
    }
    fill(&mut opts.gamma, &config, "gamma")?;
    fill(&mut opts.t0, &config, "t0")?;
    fill(&mut opts.max_iters, &config, "max-iters")?;
    fill(&mut opts.tol, &config, "tol")?;
    fill(&mut opts.stride, &config, "stride")?;
    fill(&mut opts.x0, &config, "x0")?;
    if opts.reference.is_none() {
        if let Some(v) = config.get("reference") {
            opts.reference = Some(PathBuf::from(v));
        }
    }
    if opts.out.is_none() {
        if let Some(v) = config.get("out") {
            opts.out = Some(PathBuf::from(v));
        }
    }

    if opts.variant.is_empty() {
        return Err(CliError::usage("pass at least one --variant"));
    }
    let presets: Vec<VariantPreset> = opts
        .variant
        .iter()
        .map(|v| VariantPreset::parse(v).map_err(CliError::usage))
        .collect::<Result<_, _>>()?;

    let (inst, seed) = opts.instance.build()?;
    let problem = &inst.problem;
    let x0 = parse_x0(opts.x0.as_deref(), problem.dimension)?;
    let stride = parse_stride(opts.stride.as_deref())?;
    let reference = match &opts.reference {
        None => None,
        Some(path) => {
            let (x_star, _) = formats::read_reference(path)?;
            if x_star.len() != problem.dimension {
                return Err(CliError::usage(format!(
                    "reference dimension {} does not match problem dimension {}",
                    x_star.len(),
                    problem.dimension
                )));
            }
            Some(x_star)
        }
    };

    let out_base = opts
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from("trace.csv"));
    let multi = presets.len() > 1;
    let cells: Vec<(usize, &VariantPreset)> = presets.iter().enumerate().collect();
    let jobs = opts.jobs.unwrap_or(1).max(1);

    // (csv text, summary json, run hit a numerical fault)
    type CellOutput = (String, String, bool);
    let run_cell = |preset: &VariantPreset| -> Result<CellOutput, CliError> {
        let gamma_factor = preset.gamma_factor().or(opts.gamma).unwrap_or(1.0);
        let gamma = gamma_factor / problem.lipschitz;
        let (rule, policy) = preset
            .build(gamma, opts.t0.unwrap_or(1.0))
            .map_err(CliError::usage)?;
        let mut cfg = SolverConfig::new(x0.clone())
            .with_max_iters(opts.max_iters.unwrap_or(10_000))
            .with_tol(opts.tol.unwrap_or(0.0))
            .with_gamma(gamma)
            .with_stride(stride);
        if let Some(r) = &reference {
            cfg = cfg.with_reference(r.clone());
        }
        let started = Instant::now();
        let trace = run(problem, rule, policy, &cfg).map_err(|e| CliError::usage(e.to_string()))?;
        let wall = started.elapsed().as_secs_f64();
        let final_obj = objective(problem, &trace.final_point)
            .map_err(|e| CliError::numerical(e.to_string()))?;
        let csv = formats::trace_csv(&trace, reference.is_some());
        let json = formats::summary_json(&trace, final_obj, seed, &preset.tag());
        eprintln!(
            "# {}: {} iterations, stop={}, wall_time_seconds={wall:.3}",
            preset.tag(),
            trace.iterations,
            trace.stop_reason.as_str()
        );
        Ok((csv, json, trace.stop_reason == StopReason::NumericalFault))
    };

    let mut results: Vec<Option<Result<CellOutput, CliError>>> =
        (0..cells.len()).map(|_| None).collect();
    if jobs == 1 || cells.len() == 1 {
        for (i, preset) in &cells {
            results[*i] = Some(run_cell(preset));
        }
    } else {
        std::thread::scope(|scope| {
            let mut handles = Vec::new();
            for chunk in cells.chunks(cells.len().div_ceil(jobs)) {
                handles.push(scope.spawn(move || {
                    chunk
                        .iter()
                        .map(|(i, preset)| (*i, run_cell(preset)))
                        .collect::<Vec<_>>()
                }));
            }
            for h in handles {
                for (i, r) in h.join().expect("benchmark cell panicked") {
                    results[i] = Some(r);
                }
            }
        });
    }

    let mut any_fault = false;
    for ((i, preset), result) in cells.iter().zip(results) {
        let (csv, json, fault) = result.expect("cell scheduled")?;
        any_fault |= fault;
        let csv_path = if multi {
            with_variant_suffix(&out_base, &preset.tag())
        } else {
            out_base.clone()
        };
        let json_path = match (&opts.summary, multi) {
            (Some(p), false) => p.clone(),
            (Some(p), true) => with_variant_suffix(p, &preset.tag()),
            (None, _) => csv_path.with_extension("summary.json"),
        };
        std::fs::write(&csv_path, csv)
            .map_err(|e| CliError::usage(format!("writing {csv_path:?}: {e}")))?;
        std::fs::write(&json_path, json)
            .map_err(|e| CliError::usage(format!("writing {json_path:?}: {e}")))?;
        let _ = i;
    }
    if any_fault {
        return Err(CliError::numerical(
            "run aborted on a non-finite iterate; partial trace retained",
        ));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// spectral
// ---------------------------------------------------------------------------

#[derive(Args, Debug)]
pub struct SpectralOpts {
    /// Tridiagonal model size
    #[arg(long)]
    pub n: Option<usize>,
    /// Explicit eigenvalue file (one positive eigenvalue of AᵀA per line)
    #[arg(long, conflicts_with = "n")]
    pub eigs: Option<PathBuf>,
    /// Momentum offsets d, comma separated
    #[arg(long, default_value = "2,20")]
    pub d: String,
    /// Envelope horizon
    #[arg(long, default_value_t = 1_000_000)]
    pub k_max: usize,
    /// CSV row stride (default: k_max/1000, at least 1)
    #[arg(long)]
    pub stride: Option<usize>,
    /// Optional log10 targets for the fitted optimal-d law, comma separated
    #[arg(long, allow_hyphen_values = true)]
    pub dstar_tols: Option<String>,
    /// Shift applied to the fitted law (residual-based targets)
    #[arg(long, default_value_t = 0.0)]
    pub dstar_shift: f64,
    #[arg(long, default_value = "spectral.csv")]
    pub out: PathBuf,
    /// Summary JSON path (default: out with .summary.json)
    #[arg(long)]
    pub summary: Option<PathBuf>,
}

pub fn cmd_spectral(opts: SpectralOpts) -> Result<(), CliError> {
    let model: SpectralModel = match (&opts.eigs, opts.n) {
        (Some(path), _) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::usage(format!("reading {path:?}: {e}")))?;
            let eigs: Result<Vec<f64>, _> = text
                .lines()
                .map(str::trim)
                .filter(|l| !l.is_empty() && !l.starts_with('#'))
                .map(str::parse::<f64>)
                .collect();
            let eigs = eigs.map_err(|_| CliError::usage("bad eigenvalue line"))?;
            SpectralModel::from_eigenvalues(eigs).map_err(|e| CliError::usage(e.to_string()))?
        }
        (None, n) => tridiag_spectrum(n.unwrap_or(201)),
    };
    let ds: Vec<f64> = opts
        .d
        .split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| CliError::usage(format!("bad d {s:?}")))
        })
        .collect::<Result<_, _>>()?;
    for d in &ds {
        if *d < 2.0 {
            return Err(CliError::usage(format!("d = {d} rejected: need d >= 2")));
        }
    }
    if opts.k_max < 1 {
        return Err(CliError::usage("k-max must be >= 1"));
    }

    let sweeps: Vec<Vec<f64>> = ds
        .iter()
        .map(|&d| envelope_log_sweep(d, opts.k_max, &model))
        .collect();

    let stride = opts.stride.unwrap_or((opts.k_max / 1000).max(1)).max(1);
    let mut csv = String::from("k");
    for d in &ds {
        let _ = write!(csv, ",lnE_{d},E_{d}");
    }
    if ds.len() == 2 {
        csv.push_str(",ratio");
    }
    csv.push('\n');
    let mut k = 1usize;
    loop {
        let _ = write!(csv, "{k}");
        for sweep in &sweeps {
            let ln_e = sweep[k - 1];
            let _ = write!(csv, ",{:e},{:e}", ln_e, ln_e.exp());
        }
        if ds.len() == 2 {
            let _ = write!(csv, ",{:e}", (sweeps[0][k - 1] - sweeps[1][k - 1]).exp());
        }
        csv.push('\n');
        if k == opts.k_max {
            break;
        }
        k = (k + stride).min(opts.k_max);
    }
    std::fs::write(&opts.out, csv)
        .map_err(|e| CliError::usage(format!("writing {:?}: {e}", opts.out)))?;

    let mut json = String::from("{\n");
    let _ = writeln!(json, "  \"L\": {:e},", model.lipschitz);
    let _ = writeln!(json, "  \"alpha\": {:e},", model.alpha);
    let _ = writeln!(json, "  \"C\": {:e},", model.cond);
    let _ = writeln!(json, "  \"a_star\": {:e},", model.a_star);
    let _ = writeln!(json, "  \"rho_star\": {:e},", model.rho_star);
    let keqs: Vec<String> = ds
        .iter()
        .map(|&d| {
            let v = k_eq(d, model.a_star).map_err(|e| CliError::usage(e.to_string()))?;
            Ok(format!("\"{d}\": {v}"))
        })
        .collect::<Result<_, CliError>>()?;
    let _ = writeln!(json, "  \"k_eq\": {{ {} }},", keqs.join(", "));
    let ra = ratio_approx(model.cond, opts.k_max as u64, 20.0)
        .map_err(|e| CliError::usage(e.to_string()))?;
    let _ = writeln!(json, "  \"ratio_approx\": {:e},", ra.value);
    let _ = writeln!(
        json,
        "  \"ratio_approx_below_validity\": {},",
        ra.below_validity
    );
    if let Some(tols) = &opts.dstar_tols {
        let mut entries = Vec::new();
        for t in tols.split(',') {
            let tol: f64 = t
                .trim()
                .parse()
                .map_err(|_| CliError::usage(format!("bad tol {t:?}")))?;
            let dstar =
                optimal_d_fit(tol, opts.dstar_shift).map_err(|e| CliError::usage(e.to_string()))?;
            entries.push(format!("{{ \"tol\": {tol:e}, \"d_star\": {dstar:e} }}"));
        }
        let _ = writeln!(json, "  \"d_star\": [{}],", entries.join(", "));
    }
    let envelope_at_kmax: Vec<String> = ds
        .iter()
        .zip(&sweeps)
        .map(|(d, sweep)| format!("\"{d}\": {:e}", sweep[opts.k_max - 1]))
        .collect();
    let _ = writeln!(
        json,
        "  \"lnE_at_k_max\": {{ {} }}",
        envelope_at_kmax.join(", ")
    );
    json.push_str("}\n");
    let json_path = opts
        .summary
        .unwrap_or_else(|| opts.out.with_extension("summary.json"));
    std::fs::write(&json_path, json)
        .map_err(|e| CliError::usage(format!("writing {json_path:?}: {e}")))?;
    Ok(())
}

// ---------------------------------------------------------------------------
// reference
// ---------------------------------------------------------------------------

#[derive(Args, Debug)]
pub struct ReferenceOpts {
    #[command(flatten)]
    pub instance: InstanceOpts,
    /// Residual target for the high-accuracy run
    #[arg(long, default_value_t = 1e-13)]
    pub tol: f64,
    #[arg(long, default_value_t = 2_000_000)]
    pub max_iters: usize,
    /// Step size multiple of 1/L for the greedy reference run
    #[arg(long, default_value_t = 1.3)]
    pub gamma: f64,
    /// Starting point: zero | ones | const:V | unit:SEED
    #[arg(long)]
    pub x0: Option<String>,
    #[arg(long, default_value = "reference.txt")]
    pub out: PathBuf,
    #[arg(long)]
    pub config: Option<PathBuf>,
}

pub fn cmd_reference(mut opts: ReferenceOpts) -> Result<(), CliError> {
    let config = read_config(&opts.config)?;
    opts.instance.merge_config(&config)?;
    let (inst, _seed) = opts.instance.build()?;
    let problem = &inst.problem;
    let x0 = parse_x0(opts.x0.as_deref(), problem.dimension)?;
    let preset = VariantPreset::Greedy {
        gamma_factor: opts.gamma,
        s: 1.0,
        xi: 0.96,
    };
    let gamma = opts.gamma / problem.lipschitz;
    let (rule, policy) = preset.build(gamma, 1.0).map_err(CliError::usage)?;
    let cfg = SolverConfig::new(x0)
        .with_max_iters(opts.max_iters)
        .with_tol(opts.tol)
        .with_gamma(gamma)
        .with_stride(TraceStride::Every(u32::MAX));
    let trace = run(problem, rule, policy, &cfg).map_err(|e| CliError::usage(e.to_string()))?;
    if trace.stop_reason != StopReason::Converged {
        return Err(CliError::numerical(format!(
            "reference run did not reach tol {} within {} iterations (residual {})",
            opts.tol, opts.max_iters, trace.final_residual
        )));
    }
    formats::write_reference(&opts.out, &trace.final_point, trace.final_residual)?;
    eprintln!(
        "# reference: {} iterations, residual {}",
        trace.iterations, trace.final_residual
    );
    Ok(())
}

// ---------------------------------------------------------------------------
// instance
// ---------------------------------------------------------------------------

#[derive(Args, Debug)]
pub struct InstanceCmdOpts {
    #[command(flatten)]
    pub instance: InstanceOpts,
    #[arg(long, default_value = "instance.fpi")]
    pub out: PathBuf,
    #[arg(long)]
    pub config: Option<PathBuf>,
}

pub fn cmd_instance(mut opts: InstanceCmdOpts) -> Result<(), CliError> {
    let config = read_config(&opts.config)?;
    opts.instance.merge_config(&config)?;
    let (inst, seed) = opts.instance.build()?;
    formats::write_instance(&opts.out, &inst, seed)?;
    eprintln!(
        "# instance: dimension {}, L {}",
        inst.problem.dimension, inst.problem.lipschitz
    );
    Ok(())
}
