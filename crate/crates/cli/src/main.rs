mod args;

use std::fs::File;
use std::io::{BufWriter, Write};
use std::process::ExitCode;

use clap::Parser;
use serde_json::json;

use wavepath::collocation::{reconstruct_flow, solve_backward, solve_forward};
use wavepath::depth::{h_delta, pf_radial_adaptive};
use wavepath::diagnostics::{benchmark, cost_model, stability_sweep, write_bench_csv, BenchConfig};
use wavepath::grid::{build_field, log_radii, periodic_angles};
use wavepath::io::{fmt17, plan_json, read_profile_spec, write_results, Format, ResultRecord};
use wavepath::path::{export_seed, import_seed, pf_angular, pf_radial, SeedRecord};
use wavepath::shear::builtin_profile;
use wavepath::spectral::{series_convergence, ConvergenceConfig};
use wavepath::{CollocationOperator, EigenSolution, Error, PathOptions, PolarField, ReducedProfile, ShearProfile};

use args::{Cli, Command, OutFormat, ProfileArgs, Toggle};

const EXIT_USAGE: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;

type Out = Box<dyn Write>;

fn usage(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::InvalidArgument(_) | Error::Schema { .. } | Error::OutOfRange { .. } | Error::Io(_) | Error::Json(_) => {
            EXIT_USAGE
        }
        Error::InvalidSeed(_) => EXIT_USAGE,
        _ => EXIT_NUMERICAL,
    }
}

fn diagnostic(e: &Error) -> serde_json::Value {
    let mut v = json!({ "error": e.to_string(), "exit_code": exit_code(e) });
    match e {
        Error::ContinuationBreakdown { t, partial, .. } => {
            v["t"] = json!(t);
            v["partial"] = json!(partial);
        }
        Error::PartialField { failed } => v["failed_angles"] = json!(failed),
        Error::StaleSeed { residual, limit } => {
            v["residual"] = json!(residual);
            v["limit"] = json!(limit);
        }
        _ => {}
    }
    v
}

fn load_profile(p: &ProfileArgs) -> Result<ShearProfile, Error> {
    let mut params = Vec::new();
    for s in &p.params {
        let (k, v) = s.split_once('=').ok_or_else(|| usage(format!("--param expects NAME=VALUE, got '{s}'")))?;
        let v: f64 = v.trim().parse().map_err(|_| usage(format!("--param {k}: '{v}' is not a number")))?;
        params.push((k.trim().to_string(), v));
    }
    let mut profile = match &p.profile_file {
        Some(path) => {
            let mut spec = read_profile_spec(path)?;
            spec.params.extend(params);
            spec.to_profile()?
        }
        None => {
            let refs: Vec<(&str, f64)> = params.iter().map(|(k, v)| (k.as_str(), *v)).collect();
            builtin_profile(&p.profile, &refs)?
        }
    };
    if let Some(f2) = p.f2 {
        if !(f2 > 0.0 && f2.is_finite()) {
            return Err(usage(format!("--F2 must be positive, got {f2}")));
        }
        profile.froude2 = f2;
    }
    Ok(profile)
}

fn out_format(f: OutFormat) -> Format {
    match f {
        OutFormat::Csv => Format::Csv,
        OutFormat::Json => Format::Json,
    }
}

fn spaced(lo: f64, hi: f64, n: usize, log: bool) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    if log {
        return log_radii(lo, hi, n);
    }
    (0..n)
        .map(|i| if i == n - 1 { hi } else { lo + (hi - lo) * i as f64 / (n - 1) as f64 })
        .collect()
}

fn use_log(t: Toggle, lo: f64, hi: f64) -> bool {
    match t {
        Toggle::On => true,
        Toggle::Off => false,
        Toggle::Auto => hi / lo > 100.0,
    }
}

fn check_range(lo: f64, hi: f64) -> Result<(), Error> {
    if !(lo > 0.0 && lo <= hi && hi.is_finite()) {
        return Err(usage(format!("need 0 < k-min <= k-max, got [{lo}, {hi}]")));
    }
    Ok(())
}

fn real_w(sol: &EigenSolution) -> Option<Vec<f64>> {
    sol.real_w()
}

/// Plain CSV table with 17-digit numbers, or a JSON array of objects.
fn write_table(out: &mut Out, format: Format, header: &[&str], rows: &[Vec<f64>]) -> Result<(), Error> {
    match format {
        Format::Csv => {
            writeln!(out, "{}", header.join(","))?;
            for r in rows {
                let cells: Vec<String> = r.iter().map(|&x| fmt17(x)).collect();
                writeln!(out, "{}", cells.join(","))?;
            }
        }
        Format::Json => {
            let objs: Vec<serde_json::Value> = rows
                .iter()
                .map(|r| serde_json::Value::Object(header.iter().map(|h| h.to_string()).zip(r.iter().map(|&x| json!(x))).collect()))
                .collect();
            serde_json::to_writer_pretty(&mut *out, &objs)?;
            writeln!(out)?;
        }
    }
    Ok(())
}

fn run(cli: Cli) -> Result<String, Error> {
    if cli.jobs > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cli.jobs)
            .build_global()
            .map_err(|e| usage(format!("--jobs: {e}")))?;
    }
    let mut out: Out = match &cli.output {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(std::io::stdout().lock())),
    };
    let format = out_format(cli.format);
    let summary = match cli.command {
        Command::SolveForward { profile, grid, k, theta, eigvec, export_seed: seed_path } => {
            let reduced = load_profile(&profile)?.project(theta);
            let op = CollocationOperator::new(grid.n_z, grid.depth)?;
            let mut recs = Vec::with_capacity(k.len());
            let mut warnings = 0;
            for (i, &ki) in k.iter().enumerate() {
                let sol = solve_forward(&reduced, &op, ki)?;
                warnings += sol.warnings.len();
                if i == 0 {
                    if let Some(p) = &seed_path {
                        export_seed(&sol, &op, &reduced)?.write(p)?;
                    }
                }
                let mut r = ResultRecord::new(ki, sol.c);
                if eigvec {
                    r.w = real_w(&sol);
                }
                recs.push(r);
            }
            write_results(&mut out, &recs, format)?;
            format!("solve-forward: {} wavenumbers, N_z = {}, {} warnings", k.len(), grid.n_z, warnings)
        }
        Command::SolveBackward { profile, grid, c, theta, eigvec } => {
            let reduced = load_profile(&profile)?.project(theta);
            let op = CollocationOperator::new(grid.n_z, grid.depth)?;
            let mut recs = Vec::with_capacity(c.len());
            for &ci in &c {
                let sol = solve_backward(&reduced, &op, ci)?;
                let mut r = ResultRecord::new(sol.k, ci);
                if eigvec {
                    r.w = real_w(&sol);
                }
                recs.push(r);
            }
            write_results(&mut out, &recs, format)?;
            format!("solve-backward: {} phase velocities, N_z = {}", c.len(), grid.n_z)
        }
        Command::Path { profile, grid, tol, k_min, k_max, k_seed, theta, query, log_spacing, log_k, seed } => {
            check_range(k_min, k_max)?;
            let reduced = load_profile(&profile)?.project(theta);
            let op = CollocationOperator::new(grid.n_z, grid.depth)?;
            let opts = PathOptions::new(tol.tol).log_param(use_log(log_k, k_min, k_max));
            let seed_sol = match &seed {
                Some(p) => Some(import_seed(&SeedRecord::read(p)?, &op, &reduced)?),
                None => None,
            };
            let k_seed = k_seed.or(seed_sol.as_ref().map(|s| s.k)).unwrap_or((k_min * k_max).sqrt());
            let path = pf_radial(&reduced, &op, (k_min, k_max), k_seed, &opts, seed_sol.as_ref())?;
            let recs = path_records(&path, query, k_min, k_max, log_spacing)?;
            write_results(&mut out, &recs, format)?;
            format!(
                "path: {} control points, {} rejected steps, {} rows",
                path.len(),
                path.rejected_steps,
                recs.len()
            )
        }
        Command::PathAngular { profile, grid, tol, k0, theta_min, theta_max, query } => {
            let prof = load_profile(&profile)?;
            let op = CollocationOperator::new(grid.n_z, grid.depth)?;
            let opts = PathOptions::new(tol.tol);
            let path = pf_angular(&prof, &op, k0, (theta_min, theta_max), theta_min, &opts, None)?;
            let thetas = match query {
                Some(n) => spaced(theta_min, theta_max, n, false),
                None => path.t.clone(),
            };
            let recs = thetas
                .iter()
                .map(|&t| Ok(ResultRecord { k: k0, c: path.dense_eval(t)?, theta: Some(t), w: None }))
                .collect::<Result<Vec<_>, Error>>()?;
            write_results(&mut out, &recs, format)?;
            format!("path-angular: {} control points, {} rows", path.len(), recs.len())
        }
        Command::GridBuild { profile, grid, tol, k_min, k_max, nk, ntheta, k0, field } => {
            check_range(k_min, k_max)?;
            if nk < 2 || ntheta < 1 {
                return Err(usage("need --nk >= 2 and --ntheta >= 1"));
            }
            let prof = load_profile(&profile)?;
            let op = CollocationOperator::new(grid.n_z, grid.depth)?;
            let opts = PathOptions::new(tol.tol).log_param(k_max / k_min > 100.0);
            let k0 = k0.unwrap_or((k_min * k_max).sqrt());
            let f = build_field(&prof, &op, &log_radii(k_min, k_max, nk), &periodic_angles(ntheta), k0, true, &opts)?;
            f.save(&field)?;
            format!("grid-build: {nk} radii x {ntheta} angles written to {}", field.display())
        }
        Command::GridQuery { field, k, theta } => {
            if k.len() != theta.len() {
                return Err(usage(format!("--k has {} values but --theta has {}", k.len(), theta.len())));
            }
            let f = PolarField::load(&field)?;
            let op = f.operator()?;
            let recs = k
                .iter()
                .zip(&theta)
                .map(|(&kq, &tq)| Ok(ResultRecord { k: kq, c: f.query_with(&op, kq, tq)?, theta: Some(tq), w: None }))
                .collect::<Result<Vec<_>, Error>>()?;
            write_results(&mut out, &recs, format)?;
            format!("grid-query: {} queries", recs.len())
        }
        Command::AdaptivePath { profile, n_z, tol, depth, k_min, k_max, theta, query, log_k, plan_out } => {
            check_range(k_min, k_max)?;
            let reduced = load_profile(&profile)?.project(theta);
            let opts = PathOptions::new(tol.tol).log_param(use_log(log_k, k_min, k_max));
            let ap = pf_radial_adaptive(&reduced, n_z, (k_min, k_max), &opts, depth.delta, depth.c_min, depth.c_max)?;
            if let Some(p) = &plan_out {
                std::fs::write(p, plan_json(&ap.plan)?)?;
            }
            let ks = match query {
                Some(n) => spaced(k_min, k_max, n, k_max / k_min > 100.0),
                None => {
                    let mut ks: Vec<f64> = ap.paths.iter().flatten().flat_map(|p| p.t.iter().copied()).collect();
                    ks.sort_by(f64::total_cmp);
                    ks.dedup();
                    ks
                }
            };
            let recs = ks.iter().map(|&k| Ok(ResultRecord::new(k, ap.eval(k)?))).collect::<Result<Vec<_>, Error>>()?;
            write_results(&mut out, &recs, format)?;
            format!("adaptive-path: {} subintervals, {} rows", ap.paths.iter().flatten().count(), recs.len())
        }
        Command::Convergence { profile, grid, k, theta, delta } => {
            let reduced = load_profile(&profile)?.project(theta);
            let h = delta.map_or(grid.depth, |d| h_delta(k, d).min(grid.depth));
            let op = CollocationOperator::new(grid.n_z, h)?;
            let sol = solve_forward(&reduced, &op, k)?;
            let mut w = real_w(&sol).ok_or_else(|| Error::Solver("eigenvector is not real".into()))?;
            w.push(0.0);
            let coeffs = op.chebyshev_coefficients(&w)?;
            let verdict = series_convergence(&coeffs, &ConvergenceConfig::default());
            let rows: Vec<Vec<f64>> = coeffs.iter().enumerate().map(|(i, &a)| vec![i as f64, a]).collect();
            write_table(&mut out, format, &["n", "coefficient"], &rows)?;
            format!(
                "convergence: k = {k}, depth = {h}, converged = {}, required_N = {}",
                verdict.converged,
                verdict.required_n.map_or("none".into(), |n| n.to_string())
            )
        }
        Command::Stability { profile, grid, k_min, k_max, nk, theta } => {
            check_range(k_min, k_max)?;
            let reduced = load_profile(&profile)?.project(theta);
            let op = CollocationOperator::new(grid.n_z, grid.depth)?;
            let report = stability_sweep(&reduced, &op, &spaced(k_min, k_max, nk.max(1), true))?;
            match format {
                Format::Json => {
                    serde_json::to_writer_pretty(&mut out, &report)?;
                    writeln!(out)?;
                }
                Format::Csv => {
                    let rows: Vec<Vec<f64>> = report
                        .points
                        .iter()
                        .map(|p| vec![p.k, p.c, p.eta_l, p.eta_q, p.kappa_l, p.kappa_q])
                        .collect();
                    write_table(&mut out, format, &["k", "c", "eta_L", "eta_Q", "kappa_L", "kappa_Q"], &rows)?;
                }
            }
            format!(
                "stability: median eta_L = {:e}, eta_Q = {:e}; median kappa_L = {:e}, kappa_Q = {:e}",
                report.eta_l.median, report.eta_q.median, report.kappa_l.median, report.kappa_q.median
            )
        }
        Command::Bench { profile, k_min, k_max, nq, targets, reps, theta } => {
            check_range(k_min, k_max)?;
            let reduced: ReducedProfile = load_profile(&profile)?.project(theta);
            let mut cfg = BenchConfig::new(reduced, (k_min, k_max));
            cfg.n_q = nq;
            cfg.targets = targets.clone();
            cfg.reps = reps;
            let rows = benchmark(&cfg)?;
            match format {
                Format::Csv => write_bench_csv(&rows, &mut out)?,
                Format::Json => {
                    serde_json::to_writer_pretty(&mut out, &rows)?;
                    writeln!(out)?;
                }
            }
            let mut parts = Vec::new();
            for t in targets {
                if let Ok(m) = cost_model(&rows, t) {
                    parts.push(format!(
                        "target {t:e}: break-even N_q = {}",
                        m.break_even.map_or("none".into(), |b| format!("{b:.1}"))
                    ));
                }
            }
            format!("bench: {} rows; {}", rows.len(), parts.join("; "))
        }
        Command::FlowField { profile, grid, k, theta } => {
            let prof = load_profile(&profile)?;
            let op = CollocationOperator::new(grid.n_z, grid.depth)?;
            let sol = solve_forward(&prof.project(theta), &op, k)?;
            let flow = reconstruct_flow(&prof, k * theta.cos(), k * theta.sin(), &sol, &op)?;
            let rows: Vec<Vec<f64>> = (0..flow.z.len())
                .map(|i| {
                    vec![
                        flow.z[i],
                        flow.u[i].re,
                        flow.u[i].im,
                        flow.v[i].re,
                        flow.v[i].im,
                        flow.w[i].re,
                        flow.w[i].im,
                        flow.p[i].re,
                        flow.p[i].im,
                    ]
                })
                .collect();
            let header = ["z", "u_re", "u_im", "v_re", "v_im", "w_re", "w_im", "p_re", "p_im"];
            write_table(&mut out, format, &header, &rows)?;
            format!("flow-field: k = {k}, theta = {theta}, c = {}", fmt17(sol.c))
        }
    };
    out.flush()?;
    Ok(summary)
}

fn path_records(
    path: &wavepath::PathSolution,
    query: Option<usize>,
    lo: f64,
    hi: f64,
    log: bool,
) -> Result<Vec<ResultRecord<f64>>, Error> {
    match query {
        Some(n) => spaced(lo, hi, n, log)
            .into_iter()
            .map(|k| Ok(ResultRecord::new(k, path.dense_eval(k)?)))
            .collect(),
        None => Ok((0..path.len()).map(|j| ResultRecord::new(path.t[j], path.c(j))).collect()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(summary) => {
            eprintln!("{summary}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("wavepath: {e}");
            eprintln!("{}", diagnostic(&e));
            ExitCode::from(exit_code(&e))
        }
    }
}
