//! Command-line front end: phase-plane reduction, periods, closure
//! sweeps, and amplitude-period curves, as CSV/JSON reports.
//!
//! Exit codes: 0 success, 2 parse error, 3 no oscillation, 4 numerical
//! failure, 5 oracle disagreement beyond --max-rel-diff.

use clap::{Args, Parser, Subcommand};
use phaseplane::period::QuadPoint;
use phaseplane::reduction::{BranchProfile, Sign};
use phaseplane::{catalog, oracle, period, reduction, Error, OscillatorSystem, PeriodMethod};
use serde::Serialize;
use std::io::Write;
use std::process::ExitCode;
use std::time::Instant;

#[derive(Parser)]
#[command(name = "phaseplane", version, about = "Oscillator phase-plane toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate both phase-plane branches and tabulate u and phi.
    Reduce(ReduceArgs),
    /// Compute the period at one amplitude.
    Period(PeriodArgs),
    /// Closure-defect sweep over amplitudes, optionally root-finding a
    /// limit cycle.
    Closure(ClosureArgs),
    /// Amplitude-period curve over a range of amplitudes.
    Sweep(SweepArgs),
}

#[derive(Args)]
struct SystemArgs {
    /// Right-hand side f(x, v) as an expression.
    #[arg(long, conflicts_with = "catalog", allow_hyphen_values = true)]
    system: Option<String>,
    /// Named catalog oscillator.
    #[arg(long)]
    catalog: Option<String>,
    /// Van der Pol coupling (catalog `vanderpol`).
    #[arg(long)]
    mu: Option<f64>,
    /// Velocity exponent (catalog `mickens`).
    #[arg(long)]
    s: Option<f64>,
    /// Cubic stiffness (catalog `duffing`).
    #[arg(long)]
    eps: Option<f64>,
    /// Damping coefficient (catalog `damped-linear`).
    #[arg(long)]
    c: Option<f64>,
}

impl SystemArgs {
    fn build(&self) -> Result<OscillatorSystem, Error> {
        match (&self.system, &self.catalog) {
            (Some(expr), None) => OscillatorSystem::parse(expr),
            (None, Some(name)) => {
                let mut overrides = Vec::new();
                for (key, value) in [
                    ("mu", self.mu),
                    ("s", self.s),
                    ("eps", self.eps),
                    ("c", self.c),
                ] {
                    if let Some(v) = value {
                        overrides.push((key.to_string(), v));
                    }
                }
                catalog::get(name, &overrides)
            }
            _ => Err(Error::EmptyInput),
        }
    }
}

#[derive(Args)]
struct OutputArgs {
    /// Write to this path instead of stdout.
    #[arg(long)]
    out: Option<std::path::PathBuf>,
    /// Output format.
    #[arg(long, default_value = "csv")]
    format: Format,
    /// Emit a run report (command echo, system, tolerances, wall time)
    /// to stderr.
    #[arg(long)]
    verbose: bool,
}

#[derive(Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Args)]
struct ReduceArgs {
    #[command(flatten)]
    sys: SystemArgs,
    #[arg(long)]
    amplitude: f64,
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args)]
struct PeriodArgs {
    #[command(flatten)]
    sys: SystemArgs,
    #[arg(long)]
    amplitude: f64,
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    /// Period quadrature: the symmetric single-branch formula or the
    /// general two-branch one.
    #[arg(long, default_value = "symmetric")]
    method: MethodArg,
    /// Also measure the period by time-domain simulation and report the
    /// relative difference.
    #[arg(long)]
    compare_oracle: bool,
    /// Exit with status 5 when the oracle relative difference exceeds
    /// this bound.
    #[arg(long)]
    max_rel_diff: Option<f64>,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
enum MethodArg {
    Symmetric,
    #[value(name = "two-branch")]
    TwoBranch,
}

#[derive(Args)]
struct ClosureArgs {
    #[command(flatten)]
    sys: SystemArgs,
    /// Amplitude range lo:hi:n (inclusive endpoints, n points).
    #[arg(long)]
    amplitudes: String,
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    /// Root-find the limit-cycle amplitude on the first sign change of
    /// the defect and append a JSON summary.
    #[arg(long)]
    find_root: bool,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    sys: SystemArgs,
    /// Amplitude range lo:hi:n (inclusive endpoints, n points).
    #[arg(long)]
    amplitudes: String,
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    #[arg(long, default_value = "symmetric")]
    method: MethodArg,
    #[arg(long)]
    compare_oracle: bool,
    #[arg(long)]
    max_rel_diff: Option<f64>,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Serialize)]
struct RunReport {
    command: Vec<String>,
    system: String,
    tolerance: f64,
    wall_time_s: f64,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let started = Instant::now();
    let result = match &cli.command {
        Command::Reduce(args) => cmd_reduce(args, started),
        Command::Period(args) => cmd_period(args, started),
        Command::Closure(args) => cmd_closure(args, started),
        Command::Sweep(args) => cmd_sweep(args, started),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}

fn exit_code_for(e: &Error) -> u8 {
    match e {
        Error::Syntax { .. }
        | Error::UnknownIdentifier { .. }
        | Error::EmptyInput
        | Error::UnknownCatalogEntry { .. }
        | Error::InvalidParameter { .. } => 2,
        Error::NoOscillation { .. } => 3,
        _ => 4,
    }
}

/// 17 significant digits, enough to reproduce the f64 bit pattern.
fn fmt_num(v: f64) -> String {
    format!("{v:.16e}")
}

fn emit(out: &OutputArgs, data: &str) -> Result<(), Error> {
    let io_err = |e: std::io::Error| Error::Domain {
        node: "output".into(),
        message: e.to_string(),
    };
    match &out.out {
        Some(path) => std::fs::write(path, data).map_err(io_err),
        None => std::io::stdout()
            .write_all(data.as_bytes())
            .map_err(io_err),
    }
}

fn report(out: &OutputArgs, system: &OscillatorSystem, tol: f64, started: Instant) {
    if out.verbose {
        let report = RunReport {
            command: std::env::args().collect(),
            system: system.descriptor().to_string(),
            tolerance: tol,
            wall_time_s: started.elapsed().as_secs_f64(),
        };
        eprintln!("{}", serde_json::to_string(&report).unwrap());
    }
}

/// Parse an inclusive range "lo:hi:n".
fn parse_range(spec: &str) -> Result<Vec<f64>, Error> {
    let bad = |msg: &str| Error::Syntax {
        offset: 0,
        message: format!("amplitude range `{spec}`: {msg}"),
    };
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() != 3 {
        return Err(bad("expected lo:hi:n"));
    }
    let lo: f64 = parts[0].parse().map_err(|_| bad("bad lo"))?;
    let hi: f64 = parts[1].parse().map_err(|_| bad("bad hi"))?;
    let n: usize = parts[2].parse().map_err(|_| bad("bad n"))?;
    if n == 0 {
        return Err(bad("n must be positive"));
    }
    if n == 1 {
        return Ok(vec![lo]);
    }
    Ok((0..n)
        .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
        .collect())
}

fn clamp_to_span(profile: &BranchProfile, x: f64) -> f64 {
    let (a, b) = profile.x_span();
    let (lo, hi) = if a < b { (a, b) } else { (b, a) };
    x.clamp(lo, hi)
}

fn cmd_reduce(args: &ReduceArgs, started: Instant) -> Result<ExitCode, Error> {
    let sys = args.sys.build()?;
    let report_closure = reduction::closure_defect(&sys, args.amplitude, args.tol)?;
    let (lower, upper) = {
        let [first, second] = &report_closure.branches;
        if first.spec.velocity_sign == Sign::Minus {
            (first, second)
        } else {
            (second, first)
        }
    };
    let x_l = report_closure.lower_turning.min(report_closure.return_point.min(args.amplitude));
    let x_r = report_closure.return_point.max(args.amplitude).max(x_l);

    let mut rows = Vec::with_capacity(1001);
    for i in 0..1001 {
        let x = x_l + (x_r - x_l) * i as f64 / 1000.0;
        let u_lo = lower.u_at(clamp_to_span(lower, x))?;
        let u_up = upper.u_at(clamp_to_span(upper, x))?;
        rows.push((x, u_lo, u_up, -u_lo.sqrt(), u_up.sqrt()));
    }

    let data = match args.out.format {
        Format::Csv => {
            let mut s = String::from("x,u_lower,u_upper,phi_lower,phi_upper\n");
            for (x, ul, uu, pl, pu) in &rows {
                s.push_str(&format!(
                    "{},{},{},{},{}\n",
                    fmt_num(*x),
                    fmt_num(*ul),
                    fmt_num(*uu),
                    fmt_num(*pl),
                    fmt_num(*pu)
                ));
            }
            s
        }
        Format::Json => {
            let objs: Vec<_> = rows
                .iter()
                .map(|(x, ul, uu, pl, pu)| {
                    serde_json::json!({
                        "x": x, "u_lower": ul, "u_upper": uu,
                        "phi_lower": pl, "phi_upper": pu,
                    })
                })
                .collect();
            format!("{}\n", serde_json::to_string_pretty(&objs).unwrap())
        }
    };
    emit(&args.out, &data)?;
    report(&args.out, &sys, args.tol, started);
    Ok(ExitCode::SUCCESS)
}

struct PeriodRow {
    t: f64,
    omega: f64,
    err: f64,
    method: PeriodMethod,
    oracle_t: Option<f64>,
    rel_diff: Option<f64>,
}

fn compute_period(
    sys: &OscillatorSystem,
    amplitude: f64,
    tol: f64,
    method: MethodArg,
    compare_oracle: bool,
) -> Result<PeriodRow, Error> {
    // The quadrature's inter-level delta under-reports the true error
    // by a small factor; aim two decades below the requested tolerance.
    let quad_tol = (0.01 * tol).max(1e-13);
    let estimate = match method {
        MethodArg::Symmetric => {
            let spec = departing_spec(amplitude);
            let profile = reduction::integrate_branch(sys, &spec, tol.min(1e-12), None)?;
            let phi = |p: &QuadPoint| Ok(profile.u_from_start(p.from_hi)?.sqrt());
            period::period_symmetric(phi, amplitude, quad_tol)?
        }
        MethodArg::TwoBranch => {
            let closure = reduction::closure_defect(sys, amplitude, tol.min(1e-12))?;
            period::period_two_branch(&closure, quad_tol)?
        }
    };
    let (oracle_t, rel_diff) = if compare_oracle {
        let t_end = 1.25 * estimate.t + 1.0;
        let trace = oracle::simulate(sys, amplitude, 0.0, t_end, tol.min(1e-10))?;
        let (t_oracle, _) = oracle::measure_period(&trace)?;
        (
            Some(t_oracle),
            Some((estimate.t - t_oracle).abs() / t_oracle.abs()),
        )
    } else {
        (None, None)
    };
    Ok(PeriodRow {
        t: estimate.t,
        omega: estimate.omega(),
        err: estimate.err,
        method: estimate.method,
        oracle_t,
        rel_diff,
    })
}

fn departing_spec(amplitude: f64) -> reduction::BranchSpec {
    reduction::BranchSpec {
        start: amplitude,
        direction: Sign::Minus,
        velocity_sign: Sign::Minus,
    }
}

fn period_json(row: &PeriodRow) -> serde_json::Value {
    let mut obj = serde_json::json!({
        "T": row.t,
        "omega": row.omega,
        "err": row.err,
        "method": row.method.as_str(),
    });
    if let (Some(t), Some(d)) = (row.oracle_t, row.rel_diff) {
        obj["oracle_T"] = serde_json::json!(t);
        obj["rel_diff"] = serde_json::json!(d);
    }
    obj
}

fn cmd_period(args: &PeriodArgs, started: Instant) -> Result<ExitCode, Error> {
    let sys = args.sys.build()?;
    let row = compute_period(
        &sys,
        args.amplitude,
        args.tol,
        args.method,
        args.compare_oracle,
    )?;
    let data = format!(
        "{}\n",
        serde_json::to_string_pretty(&period_json(&row)).unwrap()
    );
    emit(&args.out, &data)?;
    report(&args.out, &sys, args.tol, started);
    if let (Some(max), Some(diff)) = (args.max_rel_diff, row.rel_diff) {
        if diff > max {
            eprintln!("oracle disagreement: rel_diff {diff:e} exceeds {max:e}");
            return Ok(ExitCode::from(5));
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_closure(args: &ClosureArgs, started: Instant) -> Result<ExitCode, Error> {
    let sys = args.sys.build()?;
    let amplitudes = parse_range(&args.amplitudes)?;
    struct Row {
        a: f64,
        x_l: f64,
        x_r: f64,
        defect: f64,
        verdict: &'static str,
    }
    let mut rows = Vec::new();
    for &a in &amplitudes {
        match reduction::closure_defect(&sys, a, args.tol) {
            Ok(rep) => rows.push(Row {
                a,
                x_l: rep.lower_turning,
                x_r: rep.return_point,
                defect: rep.defect,
                verdict: rep.verdict.as_str(),
            }),
            Err(Error::NoOscillation { .. }) => rows.push(Row {
                a,
                x_l: f64::NAN,
                x_r: f64::NAN,
                defect: f64::NAN,
                verdict: reduction::Verdict::NoOscillation.as_str(),
            }),
            Err(e) => return Err(e),
        }
    }

    let mut data = match args.out.format {
        Format::Csv => {
            let mut s = String::from("A,x_L,x_R,defect,verdict\n");
            for r in &rows {
                s.push_str(&format!(
                    "{},{},{},{},{}\n",
                    fmt_num(r.a),
                    fmt_num(r.x_l),
                    fmt_num(r.x_r),
                    fmt_num(r.defect),
                    r.verdict
                ));
            }
            s
        }
        Format::Json => {
            let objs: Vec<_> = rows
                .iter()
                .map(|r| {
                    serde_json::json!({
                        "A": r.a, "x_L": r.x_l, "x_R": r.x_r,
                        "defect": r.defect, "verdict": r.verdict,
                    })
                })
                .collect();
            format!("{}\n", serde_json::to_string_pretty(&objs).unwrap())
        }
    };

    if args.find_root {
        let bracket = rows
            .windows(2)
            .find(|w| {
                w[0].defect.is_finite()
                    && w[1].defect.is_finite()
                    && w[0].defect.signum() != w[1].defect.signum()
            })
            .map(|w| (w[0].a, w[1].a))
            .ok_or(Error::NoSignChange {
                lo: amplitudes[0],
                hi: *amplitudes.last().unwrap(),
            })?;
        let root = reduction::find_limit_cycle_amplitude(&sys, bracket.0, bracket.1, 1e-8)?;
        let at_root = reduction::closure_defect(&sys, root, args.tol.min(1e-10))?;
        let summary = serde_json::json!({
            "amplitude_root": root,
            "defect_at_root": at_root.defect,
            "bracket": [bracket.0, bracket.1],
        });
        data.push_str(&format!("{}\n", serde_json::to_string(&summary).unwrap()));
    }

    emit(&args.out, &data)?;
    report(&args.out, &sys, args.tol, started);
    Ok(ExitCode::SUCCESS)
}

fn cmd_sweep(args: &SweepArgs, started: Instant) -> Result<ExitCode, Error> {
    let sys = args.sys.build()?;
    let amplitudes = parse_range(&args.amplitudes)?;
    let mut rows = Vec::new();
    for &a in &amplitudes {
        rows.push(compute_period(
            &sys,
            a,
            args.tol,
            args.method,
            args.compare_oracle,
        )?);
    }

    let with_oracle = args.compare_oracle;
    let data = match args.out.format {
        Format::Csv => {
            let mut s = String::from(if with_oracle {
                "A,T,omega,err,oracle_T,rel_diff\n"
            } else {
                "A,T,omega,err\n"
            });
            for (a, r) in amplitudes.iter().zip(&rows) {
                if with_oracle {
                    s.push_str(&format!(
                        "{},{},{},{},{},{}\n",
                        fmt_num(*a),
                        fmt_num(r.t),
                        fmt_num(r.omega),
                        fmt_num(r.err),
                        fmt_num(r.oracle_t.unwrap()),
                        fmt_num(r.rel_diff.unwrap())
                    ));
                } else {
                    s.push_str(&format!(
                        "{},{},{},{}\n",
                        fmt_num(*a),
                        fmt_num(r.t),
                        fmt_num(r.omega),
                        fmt_num(r.err)
                    ));
                }
            }
            s
        }
        Format::Json => {
            let objs: Vec<_> = amplitudes
                .iter()
                .zip(&rows)
                .map(|(a, r)| {
                    let mut obj = period_json(r);
                    obj["A"] = serde_json::json!(a);
                    obj
                })
                .collect();
            format!("{}\n", serde_json::to_string_pretty(&objs).unwrap())
        }
    };
    emit(&args.out, &data)?;
    report(&args.out, &sys, args.tol, started);

    if let Some(max) = args.max_rel_diff {
        for r in &rows {
            if let Some(diff) = r.rel_diff {
                if diff > max {
                    eprintln!("oracle disagreement: rel_diff {diff:e} exceeds {max:e}");
                    return Ok(ExitCode::from(5));
                }
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}
