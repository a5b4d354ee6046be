// SPDX-License-Identifier: Apache-2.0 OR MIT

//! The `bsf` command-line front end.
//!
//! Exit codes: 0 on success, 2 for argument or configuration errors, 3 when
//! a payload fails. Model disagreement never changes the exit code.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use bsf_core::cost::{scalability_bound, sweep_points};
use bsf_core::sim::{measured_speedup, simulate_iteration, simulate_run};
use bsf_core::{BsfParams, BsfProgram, ClusterConfig, OptimalWorkers, ScalabilityReport, ScheduleMode};
use clap::{Args, Parser, Subcommand};
use serde::Deserialize;
use serde_json::{json, Value};

use crate::calibrate::{calibrate, CalibrationResult, CommCostSpec, DEFAULT_REPETITIONS};
use crate::formats;
use crate::payloads::{
    diagonally_dominant_system, random_least_squares, GradientDescentProgram, JacobiProgram, SyntheticProgram,
};
use crate::runtime::{run_bsf, RunConfig};
use crate::validate::{validate, ValidateError, ValidateOptions, ValidationReport};

pub const EXIT_OK: u8 = 0;
pub const EXIT_USAGE: u8 = 2;
pub const EXIT_PAYLOAD: u8 = 3;

#[derive(Debug, Parser)]
#[command(name = "bsf", version, about = "Bulk Synchronous Farm cost model, simulator and runtime")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Report the scalability bound; with --K, also the predicted curve.
    Predict(Options),
    /// Tabulate T_K, speedup and efficiency over a K range.
    Sweep(Options),
    /// Simulate iterations on a virtual cluster.
    Simulate(Options),
    /// Measure cost parameters of a payload.
    Calibrate(Options),
    /// Calibrate, predict, simulate and run a payload side by side.
    Validate(Options),
}

#[derive(Debug, Default, Clone, Args, Deserialize)]
#[serde(default, deny_unknown_fields)]
#[command(allow_negative_numbers = true)]
struct Options {
    /// Per-message latency L.
    #[arg(long = "L")]
    #[serde(rename = "L")]
    latency: Option<f64>,
    /// Master time to send one order (t_s).
    #[arg(long)]
    ts: Option<f64>,
    /// Single-worker compute time (t_w).
    #[arg(long)]
    tw: Option<f64>,
    /// Master time to receive all results (t_r).
    #[arg(long)]
    tr: Option<f64>,
    /// Master time to evaluate results (t_p).
    #[arg(long)]
    tp: Option<f64>,
    /// Worker counts: `10`, `1,2,4` or an inclusive range `a:b[:step]`.
    #[arg(long = "K")]
    #[serde(rename = "K", deserialize_with = "k_from_json")]
    k: Option<String>,
    /// paper_faithful (default) or pipelined.
    #[arg(long)]
    mode: Option<String>,
    /// table, csv or json.
    #[arg(long)]
    format: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    repetitions: Option<usize>,
    /// Iterations to simulate, or synthetic payload iterations.
    #[arg(long)]
    iterations: Option<usize>,
    /// JSON file with default values for any of these options.
    #[arg(long)]
    #[serde(skip)]
    config: Option<PathBuf>,

    /// jacobi, gd or synthetic.
    #[arg(long)]
    payload: Option<String>,
    /// Dense text problem file for jacobi or gd.
    #[arg(long)]
    problem: Option<PathBuf>,
    /// Generated problem size.
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long = "compute-ms")]
    compute_ms: Option<f64>,
    #[arg(long = "order-bytes")]
    order_bytes: Option<usize>,
    #[arg(long = "result-bytes")]
    result_bytes: Option<usize>,
    /// Modeled message latency used by calibration.
    #[arg(long = "latency")]
    #[serde(rename = "latency")]
    comm_latency: Option<f64>,
    /// Modeled transfer cost per byte used by calibration.
    #[arg(long = "per-byte")]
    per_byte: Option<f64>,
    /// Also write the per-phase timing log of a run at the largest K.
    #[arg(long)]
    timings: Option<PathBuf>,
}

fn k_from_json<'de, D: serde::Deserializer<'de>>(d: D) -> Result<Option<String>, D::Error> {
    let v = Option::<Value>::deserialize(d)?;
    Ok(match v {
        None | Some(Value::Null) => None,
        Some(Value::String(s)) => Some(s),
        Some(Value::Number(n)) => Some(n.to_string()),
        Some(Value::Array(items)) => Some(
            items
                .iter()
                .map(|i| i.to_string())
                .collect::<Vec<_>>()
                .join(","),
        ),
        Some(other) => return Err(serde::de::Error::custom(format!("invalid K value {other}"))),
    })
}

macro_rules! merge_fields {
    ($flags:expr, $file:expr, $($field:ident),*) => {
        Options { $($field: $flags.$field.or($file.$field),)* }
    };
}

impl Options {
    fn merged_with(self, file: Options) -> Options {
        merge_fields!(
            self, file, latency, ts, tw, tr, tp, k, mode, format, out, seed, repetitions, iterations, config,
            payload, problem, n, tol, compute_ms, order_bytes, result_bytes, comm_latency, per_byte, timings
        )
    }

    fn has_model_params(&self) -> bool {
        [self.latency, self.ts, self.tw, self.tr, self.tp].iter().any(Option::is_some)
    }
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Payload(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Payload(_) => EXIT_PAYLOAD,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Payload(m) => m,
        }
    }
}

fn usage(msg: impl std::fmt::Display) -> CliError {
    CliError::Usage(msg.to_string())
}

type CliResult<T> = Result<T, CliError>;

type Handler = fn(&Options, &mut dyn Write) -> CliResult<()>;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Format {
    Table,
    Csv,
    Json,
}

fn parse_format(s: Option<&str>, default: Format) -> CliResult<Format> {
    match s {
        None => Ok(default),
        Some("table") => Ok(Format::Table),
        Some("csv") => Ok(Format::Csv),
        Some("json") => Ok(Format::Json),
        Some(other) => Err(usage(format!("unknown format {other:?}; expected table, csv or json"))),
    }
}

fn parse_mode(s: Option<&str>) -> CliResult<ScheduleMode> {
    s.map_or(Ok(ScheduleMode::PaperFaithful), |m| {
        m.parse()
            .map_err(|_| usage(format!("unknown mode {m:?}; expected paper_faithful or pipelined")))
    })
}

/// Parses `10`, `1,2,4`, `a:b` or `a:b:step` into worker counts.
pub fn parse_k_spec(spec: &str) -> Result<Vec<u64>, String> {
    let num = |s: &str| -> Result<u64, String> {
        let k: u64 = s.trim().parse().map_err(|_| format!("invalid worker count {s:?}"))?;
        if k == 0 {
            return Err("worker counts must be at least 1".into());
        }
        Ok(k)
    };
    if spec.contains(':') {
        let parts: Vec<&str> = spec.split(':').collect();
        let (a, b, step) = match parts.as_slice() {
            [a, b] => (num(a)?, num(b)?, 1),
            [a, b, s] => (num(a)?, num(b)?, num(s)?),
            _ => return Err(format!("invalid range {spec:?}")),
        };
        if a > b {
            return Err(format!("empty range {spec:?}"));
        }
        Ok((a..=b).step_by(step as usize).collect())
    } else {
        spec.split(',').map(num).collect()
    }
}

fn model_params(o: &Options) -> CliResult<BsfParams> {
    if o.payload.is_some() {
        return Err(usage("give either model parameters or --payload, not both"));
    }
    let tw = o
        .tw
        .ok_or_else(|| usage("missing --tw (model parameters --L --ts --tw --tr --tp)"))?;
    BsfParams::new(
        o.latency.unwrap_or(0.0),
        o.ts.unwrap_or(0.0),
        tw,
        o.tr.unwrap_or(0.0),
        o.tp.unwrap_or(0.0),
    )
    .validated()
    .map_err(usage)
}

fn workers(o: &Options) -> CliResult<Option<Vec<u64>>> {
    o.k.as_deref().map(parse_k_spec).transpose().map_err(usage)
}

fn emit(text: &str, path: Option<&Path>, stdout: &mut dyn Write) -> CliResult<()> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| usage(format!("cannot write {}: {e}", p.display()))),
        None => stdout
            .write_all(text.as_bytes())
            .map_err(|e| usage(format!("cannot write output: {e}"))),
    }
}

fn num_or_unbounded(v: f64) -> Value {
    if v.is_finite() {
        json!(v)
    } else {
        json!("unbounded")
    }
}

fn report_note(p: &BsfParams, r: &ScalabilityReport) -> Option<&'static str> {
    if p.work == 0.0 {
        Some("t_w = 0: there is no work to distribute, so one worker is optimal")
    } else if r.k_opt == OptimalWorkers::Unbounded {
        Some("2L + t_s = 0: communication is free and speedup grows without bound")
    } else if r.k_star < 1.0 {
        Some("K_star < 1: communication outweighs the work, so one worker is optimal")
    } else {
        None
    }
}

fn report_json(p: &BsfParams, r: &ScalabilityReport) -> Value {
    json!({
        "k_star": num_or_unbounded(r.k_star),
        "k_opt": match r.k_opt {
            OptimalWorkers::Finite(k) => json!(k),
            OptimalWorkers::Unbounded => json!("unbounded"),
        },
        "a_max": num_or_unbounded(r.a_max),
        "e_at_opt": r.e_at_opt,
        "note": report_note(p, r),
    })
}

fn report_table(p: &BsfParams, r: &ScalabilityReport) -> String {
    let fmt = |v: f64| if v.is_finite() { v.to_string() } else { "unbounded".into() };
    let k_opt = match r.k_opt {
        OptimalWorkers::Finite(k) => k.to_string(),
        OptimalWorkers::Unbounded => "unbounded".into(),
    };
    let mut s = format!(
        "K_star    {}\nK_opt     {}\na_max     {}\ne_at_opt  {}\n",
        fmt(r.k_star),
        k_opt,
        fmt(r.a_max),
        r.e_at_opt
    );
    if let Some(note) = report_note(p, r) {
        let _ = writeln!(s, "note: {note}");
    }
    s
}

fn sweep_table(rows: &[bsf_core::SweepRow]) -> String {
    let mut s = format!("{:>8} {:>22} {:>22} {:>22} {:>22}\n", "K", "T_K", "speedup", "e_exact", "e_approx");
    for r in rows {
        let approx = r.efficiency_approx.map_or_else(|| "-".to_string(), |v| v.to_string());
        let _ = writeln!(
            s,
            "{:>8} {:>22} {:>22} {:>22} {:>22}",
            r.k, r.time, r.speedup, r.efficiency_exact, approx
        );
    }
    s
}

fn render_sweep(rows: &[bsf_core::SweepRow], format: Format) -> CliResult<String> {
    Ok(match format {
        Format::Csv => formats::sweep_csv(rows),
        Format::Table => sweep_table(rows),
        Format::Json => serde_json::to_string_pretty(rows).map_err(usage)? + "\n",
    })
}

fn cmd_predict(o: &Options, stdout: &mut dyn Write) -> CliResult<()> {
    let p = model_params(o)?;
    let report = scalability_bound(&p).map_err(usage)?;
    let format = parse_format(o.format.as_deref(), Format::Table)?;
    let rows = workers(o)?
        .map(|ks| sweep_points(&p, &ks))
        .transpose()
        .map_err(usage)?;
    match format {
        Format::Json => {
            let mut v = report_json(&p, &report);
            if let Some(rows) = &rows {
                if o.out.is_none() {
                    v["sweep"] = serde_json::to_value(rows).map_err(usage)?;
                }
            }
            emit(&(serde_json::to_string_pretty(&v).map_err(usage)? + "\n"), None, stdout)?;
        }
        _ => emit(&report_table(&p, &report), None, stdout)?,
    }
    if let Some(rows) = rows {
        match &o.out {
            Some(path) => {
                let curve_format = if format == Format::Table { Format::Csv } else { format };
                emit(&render_sweep(&rows, curve_format)?, Some(path), stdout)?;
            }
            None if format != Format::Json => emit(&render_sweep(&rows, format)?, None, stdout)?,
            None => {}
        }
    }
    Ok(())
}

fn cmd_sweep(o: &Options, stdout: &mut dyn Write) -> CliResult<()> {
    let p = model_params(o)?;
    let ks = workers(o)?.ok_or_else(|| usage("sweep needs --K, e.g. --K 1:100"))?;
    let rows = sweep_points(&p, &ks).map_err(usage)?;
    let format = parse_format(o.format.as_deref(), Format::Csv)?;
    emit(&render_sweep(&rows, format)?, o.out.as_deref(), stdout)
}

fn cmd_simulate(o: &Options, stdout: &mut dyn Write) -> CliResult<()> {
    let p = model_params(o)?;
    let mode = parse_mode(o.mode.as_deref())?;
    let ks = workers(o)?.unwrap_or_else(|| vec![1]);
    let format = parse_format(o.format.as_deref(), Format::Csv)?;
    let curve = measured_speedup(&p, mode, &ks).map_err(usage)?;

    if let [point] = curve.as_slice() {
        let cfg = ClusterConfig::uniform(&p, point.k as usize, mode);
        let timeline = simulate_iteration(&cfg).map_err(usage)?;
        let mut summary = format!(
            "K={} mode={} T_measured={} speedup={}",
            point.k, mode, point.t_measured, point.speedup
        );
        if let Some(n) = o.iterations {
            let run = simulate_run(&cfg, n).map_err(usage)?;
            let _ = write!(summary, " iterations={} total_time={}", run.iteration_count, run.total_time);
        }
        summary.push('\n');
        emit(&summary, None, stdout)?;
        if let Some(path) = &o.out {
            let text = match format {
                Format::Json => formats::timeline_json(&timeline).map_err(usage)? + "\n",
                _ => formats::timeline_csv(&timeline),
            };
            emit(&text, Some(path), stdout)?;
        }
        return Ok(());
    }

    let best = curve
        .iter()
        .copied()
        .fold(curve[0], |best, pt| if pt.speedup > best.speedup { pt } else { best });
    let text = match format {
        Format::Json => serde_json::to_string_pretty(&curve).map_err(usage)? + "\n",
        Format::Csv => formats::curve_csv(&curve),
        Format::Table => {
            let mut s = format!("{:>8} {:>22} {:>22}\n", "K", "T_measured", "speedup");
            for pt in &curve {
                let _ = writeln!(s, "{:>8} {:>22} {:>22}", pt.k, pt.t_measured, pt.speedup);
            }
            s
        }
    };
    emit(&text, o.out.as_deref(), stdout)?;
    if o.out.is_some() || format == Format::Table {
        emit(
            &format!("mode={} peak K={} speedup={}\n", mode, best.k, best.speedup),
            None,
            stdout,
        )?;
    }
    Ok(())
}

enum Payload {
    Jacobi(JacobiProgram),
    Gd(GradientDescentProgram),
    Synthetic(SyntheticProgram),
}

impl Payload {
    fn name(&self) -> &'static str {
        match self {
            Payload::Jacobi(_) => "jacobi",
            Payload::Gd(_) => "gd",
            Payload::Synthetic(_) => "synthetic",
        }
    }
}

fn read_problem(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|e| usage(format!("cannot read {}: {e}", path.display())))
}

fn build_payload(o: &Options) -> CliResult<Payload> {
    if o.has_model_params() {
        return Err(usage(
            "give either model parameters or --payload, not both (use --latency/--per-byte for message costs)",
        ));
    }
    let name = o.payload.as_deref().ok_or_else(|| usage("missing --payload (jacobi, gd or synthetic)"))?;
    let seed = o.seed.unwrap_or(0);
    let payload_err = |e: crate::payloads::PayloadError| CliError::Payload(e.to_string());
    match name {
        "jacobi" => {
            let sys = match &o.problem {
                Some(path) => formats::read_linear_system(&read_problem(path)?).map_err(usage)?,
                None => diagonally_dominant_system(o.n.unwrap_or(64), seed),
            };
            Ok(Payload::Jacobi(
                JacobiProgram::new(sys, o.tol.unwrap_or(1e-10)).map_err(payload_err)?,
            ))
        }
        "gd" => {
            let problem = match &o.problem {
                Some(path) => formats::read_least_squares(&read_problem(path)?).map_err(usage)?,
                None => {
                    let n = o.n.unwrap_or(32);
                    random_least_squares(4 * n, n, seed)
                }
            };
            Ok(Payload::Gd(
                GradientDescentProgram::new(problem, o.tol.unwrap_or(1e-8)).map_err(payload_err)?,
            ))
        }
        "synthetic" => Ok(Payload::Synthetic(
            SyntheticProgram::new(
                o.compute_ms.unwrap_or(50.0),
                o.order_bytes.unwrap_or(1024),
                o.result_bytes.unwrap_or(1024),
                o.iterations.unwrap_or(5),
            )
            .map_err(usage)?,
        )),
        other => Err(usage(format!("unknown payload {other:?}; expected jacobi, gd or synthetic"))),
    }
}

fn comm_spec(o: &Options) -> CliResult<CommCostSpec> {
    let c = CommCostSpec::new(o.comm_latency.unwrap_or(0.0), o.per_byte.unwrap_or(0.0));
    if !(c.latency.is_finite() && c.latency >= 0.0 && c.per_byte.is_finite() && c.per_byte >= 0.0) {
        return Err(usage("--latency and --per-byte must be finite and nonnegative"));
    }
    Ok(c)
}

fn repetitions(o: &Options) -> CliResult<usize> {
    match o.repetitions.unwrap_or(DEFAULT_REPETITIONS) {
        0 => Err(usage("--repetitions must be at least 1")),
        r => Ok(r),
    }
}

fn calibrate_any<P>(program: &P, reps: usize, comm: CommCostSpec) -> CliResult<CalibrationResult>
where
    P: BsfProgram,
    P::State: Clone,
    P::Partial: Clone,
    P::Error: std::fmt::Display,
{
    calibrate(program, reps, comm).map_err(|e| match e {
        crate::calibrate::CalibrateError::Config(m) => usage(m),
        other => CliError::Payload(other.to_string()),
    })
}

fn cmd_calibrate(o: &Options, stdout: &mut dyn Write) -> CliResult<()> {
    let payload = build_payload(o)?;
    let reps = repetitions(o)?;
    let comm = comm_spec(o)?;
    let cal = match &payload {
        Payload::Jacobi(p) => calibrate_any(p, reps, comm)?,
        Payload::Gd(p) => calibrate_any(p, reps, comm)?,
        Payload::Synthetic(p) => calibrate_any(p, reps, comm)?,
    };
    let format = parse_format(o.format.as_deref(), Format::Table)?;
    let text = match format {
        Format::Json => serde_json::to_string_pretty(&cal).map_err(usage)? + "\n",
        Format::Csv => {
            let p = cal.params;
            format!("L,ts,tw,tr,tp\n{},{},{},{},{}\n", p.latency, p.send, p.work, p.receive, p.process)
        }
        Format::Table => {
            let p = cal.params;
            let mut s = format!(
                "payload      {}\nrepetitions  {}\nL            {}\nt_s          {}\nt_w          {}\nt_r          {}\nt_p          {}\norder_bytes  {}\nresult_bytes {}\n",
                payload.name(), cal.repetitions, p.latency, p.send, p.work, p.receive, p.process,
                cal.order_bytes, cal.result_bytes
            );
            for flag in &cal.flags {
                let crate::calibrate::CalibrationFlag::BelowClockResolution { parameter, median, resolution } = flag;
                let _ = writeln!(s, "flag: {parameter} median {median} is near the clock resolution {resolution}");
            }
            s
        }
    };
    emit(&text, o.out.as_deref(), stdout)
}

fn validate_any<P>(name: &str, program: &P, opts: &ValidateOptions, timings: Option<&Path>) -> CliResult<ValidationReport>
where
    P: BsfProgram + Sync,
    P::State: Clone,
    P::Order: Send + Sync,
    P::Partial: Clone + Send,
    P::Error: Send + std::fmt::Display,
{
    let report = validate(name, program, opts).map_err(|e| match e {
        ValidateError::Config(m) => usage(m),
        ValidateError::Model(m) => usage(m),
        other => CliError::Payload(other.to_string()),
    })?;
    if let Some(path) = timings {
        let k = opts.ks.iter().copied().max().unwrap_or(1);
        let mut cfg = RunConfig::new(k).max_iterations(opts.max_iterations).execution(opts.execution);
        if opts.emulate_comm {
            cfg = cfg.emulate_comm(opts.comm);
        }
        let out = run_bsf(program, &cfg).map_err(|e| CliError::Payload(e.to_string()))?;
        std::fs::write(path, formats::timing_csv(&out.timings))
            .map_err(|e| usage(format!("cannot write {}: {e}", path.display())))?;
    }
    Ok(report)
}

fn cmd_validate(o: &Options, stdout: &mut dyn Write) -> CliResult<()> {
    let payload = build_payload(o)?;
    let ks: Vec<usize> = workers(o)?
        .unwrap_or_else(|| vec![1, 2, 4])
        .into_iter()
        .map(|k| k as usize)
        .collect();
    let mut opts = ValidateOptions::new(ks);
    opts.repetitions = repetitions(o)?;
    opts.comm = comm_spec(o)?;
    opts.mode = parse_mode(o.mode.as_deref())?;
    let timings = o.timings.as_deref();
    let report = match &payload {
        Payload::Jacobi(p) => validate_any(payload.name(), p, &opts, timings)?,
        Payload::Gd(p) => validate_any(payload.name(), p, &opts, timings)?,
        Payload::Synthetic(p) => validate_any(payload.name(), p, &opts, timings)?,
    };
    let format = parse_format(o.format.as_deref(), Format::Table)?;
    let json = serde_json::to_string_pretty(&report).map_err(usage)? + "\n";
    if let Some(path) = &o.out {
        emit(&json, Some(path), stdout)?;
    }
    let text = match format {
        Format::Json => json,
        Format::Csv => {
            let mut s = String::from("K,T_predicted,T_simulated,T_measured,speedup_predicted,speedup_measured,rel_err_simulated,rel_err_measured\n");
            for r in &report.rows {
                let measured = r.speedup_measured.map(|v| v.to_string()).unwrap_or_default();
                let _ = writeln!(
                    s,
                    "{},{},{},{},{},{},{},{}",
                    r.k, r.t_predicted, r.t_simulated, r.t_measured, r.speedup_predicted, measured,
                    r.rel_err_simulated, r.rel_err_measured
                );
            }
            s
        }
        Format::Table => {
            let p = report.params;
            let mut s = format!(
                "payload {}  mode {}  L={} t_s={} t_w={} t_r={} t_p={}\n",
                report.payload, report.mode, p.latency, p.send, p.work, p.receive, p.process
            );
            let _ = writeln!(
                s,
                "{:>5} {:>14} {:>14} {:>14} {:>10} {:>10} {:>10} {:>10}",
                "K", "T_predicted", "T_simulated", "T_measured", "a_pred", "a_meas", "err_sim", "err_meas"
            );
            for r in &report.rows {
                let a_meas = r.speedup_measured.map_or_else(|| "-".into(), |v| format!("{v:.4}"));
                let _ = writeln!(
                    s,
                    "{:>5} {:>14.6e} {:>14.6e} {:>14.6e} {:>10.4} {:>10} {:>10.2e} {:>10.2e}",
                    r.k, r.t_predicted, r.t_simulated, r.t_measured, r.speedup_predicted, a_meas,
                    r.rel_err_simulated, r.rel_err_measured
                );
            }
            let k_opt = match report.k_opt_predicted {
                OptimalWorkers::Finite(k) => k.to_string(),
                OptimalWorkers::Unbounded => "unbounded".into(),
            };
            let _ = writeln!(s, "predicted K_opt {}  best measured K {}", k_opt, report.k_best_measured);
            s
        }
    };
    emit(&text, None, stdout)
}

fn load_config(path: &Path) -> CliResult<Options> {
    let text = std::fs::read_to_string(path).map_err(|e| usage(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| usage(format!("invalid config {}: {e}", path.display())))
}

/// Runs the CLI with `args` (including the program name) and returns the
/// process exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let sink: &mut dyn Write = if e.use_stderr() { stderr } else { stdout };
            let _ = write!(sink, "{}", e.render());
            return code;
        }
    };
    let (cmd, flags): (Handler, Options) = match cli.command {
        Command::Predict(o) => (cmd_predict, o),
        Command::Sweep(o) => (cmd_sweep, o),
        Command::Simulate(o) => (cmd_simulate, o),
        Command::Calibrate(o) => (cmd_calibrate, o),
        Command::Validate(o) => (cmd_validate, o),
    };
    let result = match flags.config.clone() {
        Some(path) => load_config(&path).map(|file| flags.merged_with(file)),
        None => Ok(flags),
    }
    .and_then(|opts| cmd(&opts, stdout));
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(stderr, "error: {}", e.message());
            e.code()
        }
    }
}
