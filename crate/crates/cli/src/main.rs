//! `tcray`: exact and numerical reports for test configurations.
//!
//! Exit codes: 0 success, 2 validation error, 3 numeric-diagnostic failure.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context as _};
use clap::{Parser, Subcommand};
use serde_json::{json, Map, Value};

use tcray::asymptotics::{AsymptoticReport, SlopeLimit, HARD_CAP};
use tcray::exact::TermOrder;
use tcray::numeric::{build_level, n2_integral, McOptions, NumericError};
use tcray::ray::{chow_weight_numeric, default_points, envelope, geometric_t_grid, ma_mass, sup_osc_report, write_csv, RayGrid};
use tcray::scalar::Real;
use tcray::spectra::operator_norm_check;
use tcray::{chow_weight_algebraic, fit_asymptotics, futaki_f, graded_slice, Level, LoadedConfiguration, Rational};

/// Largest degree accepted by the numeric commands.
const NUMERIC_CAP: u32 = 32;
const DEFAULT_SEED: u64 = 7;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Command {
    FlatLimit,
    Spectrum,
    Futaki,
    Chow,
    N2,
    Ray,
    Mass,
    Envelope,
    Report,
}

#[derive(Parser, Debug)]
struct Args {
    config: PathBuf,
    /// Degrees, as a list with ranges: `4,8,16` or `2-12`.
    #[arg(long)]
    k: Option<String>,
    /// Largest degree for the operator-norm check.
    #[arg(long, default_value_t = 30)]
    kmax: u32,
    /// Chow levels, same syntax as `--k`.
    #[arg(long)]
    r: Option<String>,
    /// Time grid `min:max:steps`, geometric, both ends negative.
    #[arg(long = "t-grid", default_value = "-40:-0.1:25", allow_hyphen_values = true)]
    t_grid: String,
    #[arg(long, default_value_t = 100_000)]
    samples: usize,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory; reports go to stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Probe time for the numeric Chow weight.
    #[arg(long = "t-probe", default_value_t = -15.0, allow_hyphen_values = true)]
    t_probe: f64,
    /// Also estimate Chow weights numerically (needs a fiber).
    #[arg(long)]
    numeric: bool,
    /// Monte Carlo agreement budget in standard errors.
    #[arg(long = "tol-mc", default_value_t = 5.0)]
    tol_mc: f64,
    /// Envelope boundary-continuity budget.
    #[arg(long = "tol-boundary", default_value_t = 0.05)]
    tol_boundary: f64,
}

#[derive(Parser, Debug)]
#[command(name = "tcray", version, about = "Invariants of test configurations and their Bergman rays")]
struct Invocation {
    #[command(subcommand)]
    command: CommandWithArgs,
}

#[derive(Subcommand, Debug)]
enum CommandWithArgs {
    /// Initial ideal and dimension of the central fiber.
    FlatLimit(Args),
    /// Weight spectra of the graded pieces.
    Spectrum(Args),
    /// Hilbert and weight polynomials, F_0, F_1, N_2^2 and slope limits.
    Futaki(Args),
    /// Chow weights of the level-r embeddings.
    Chow(Args),
    /// Monte Carlo cross-check of N_2^2 on the central-fiber cycle.
    N2(Args),
    /// Bergman ray potentials on a (k, t, point) grid, as CSV.
    Ray(Args),
    /// Monge-Ampère mass budget per level.
    Mass(Args),
    /// Shifted upper envelope of the rays.
    Envelope(Args),
    /// Every exact section, plus the numeric ones the input supports.
    Report(Args),
}

enum Failure {
    Validation(anyhow::Error),
    Numeric(anyhow::Error),
}

impl From<NumericError> for Failure {
    fn from(e: NumericError) -> Self {
        Failure::Numeric(e.into())
    }
}

type Outcome<T> = Result<T, Failure>;

fn invalid(msg: impl Into<String>) -> Failure {
    Failure::Validation(anyhow!(msg.into()))
}

fn main() -> ExitCode {
    let inv = Invocation::parse();
    let (command, args) = match inv.command {
        CommandWithArgs::FlatLimit(a) => (Command::FlatLimit, a),
        CommandWithArgs::Spectrum(a) => (Command::Spectrum, a),
        CommandWithArgs::Futaki(a) => (Command::Futaki, a),
        CommandWithArgs::Chow(a) => (Command::Chow, a),
        CommandWithArgs::N2(a) => (Command::N2, a),
        CommandWithArgs::Ray(a) => (Command::Ray, a),
        CommandWithArgs::Mass(a) => (Command::Mass, a),
        CommandWithArgs::Envelope(a) => (Command::Envelope, a),
        CommandWithArgs::Report(a) => (Command::Report, a),
    };
    match run(command, &args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Validation(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
        Err(Failure::Numeric(e)) => {
            eprintln!("numeric diagnostic failed: {e:#}");
            ExitCode::from(3)
        }
    }
}

fn run(command: Command, args: &Args) -> Outcome<()> {
    let loaded = LoadedConfiguration::from_path(&args.config).map_err(|e| Failure::Validation(e.into()))?;
    let numeric = matches!(command, Command::N2 | Command::Ray | Command::Mass | Command::Envelope)
        || (command == Command::Chow && args.numeric)
        || (command == Command::Report && (!loaded.fiber.is_empty() || !loaded.cycle.is_empty()));
    let seed = args.seed.unwrap_or(DEFAULT_SEED);
    if numeric {
        eprintln!("seed = {seed}");
        if args.samples < 16 {
            return Err(invalid("--samples must be at least 16"));
        }
    }
    let ctx = RunContext { loaded: &loaded, args, seed };
    let mut report = Map::new();
    report.insert("schema".into(), json!(1));
    report.insert("command".into(), json!(command_name(command)));
    report.insert("name".into(), json!(loaded.configuration.name()));
    if numeric {
        report.insert("seed".into(), json!(seed));
        report.insert("samples".into(), json!(args.samples));
    }
    let mut csv: Option<Vec<u8>> = None;
    match command {
        Command::FlatLimit => {
            report.insert("flat_limit".into(), flat_limit(&ctx));
        }
        Command::Spectrum => {
            report.insert("spectrum".into(), spectrum(&ctx)?);
        }
        Command::Futaki => {
            report.insert("futaki".into(), futaki(&ctx)?);
        }
        Command::Chow => {
            report.insert("chow".into(), chow(&ctx)?);
        }
        Command::N2 => {
            report.insert("n2".into(), n2(&ctx)?);
        }
        Command::Mass => {
            report.insert("mass".into(), mass(&ctx)?);
        }
        Command::Ray | Command::Envelope => {
            let (summary, grid) = rays(&ctx, command == Command::Envelope)?;
            report.insert(command_name(command).into(), summary);
            let mut buf = Vec::new();
            write_csv(&grid, &mut buf).map_err(|e| Failure::Numeric(e.into()))?;
            csv = Some(buf);
        }
        Command::Report => {
            report.insert("flat_limit".into(), flat_limit(&ctx));
            report.insert("spectrum".into(), spectrum(&ctx)?);
            report.insert("futaki".into(), futaki(&ctx)?);
            report.insert("chow".into(), chow(&ctx)?);
            if !loaded.cycle.is_empty() {
                report.insert("n2".into(), n2(&ctx)?);
            }
            if !loaded.fiber.is_empty() {
                report.insert("mass".into(), mass(&ctx)?);
                let (summary, grid) = rays(&ctx, true)?;
                report.insert("envelope".into(), summary);
                let mut buf = Vec::new();
                write_csv(&grid, &mut buf).map_err(|e| Failure::Numeric(e.into()))?;
                csv = Some(buf);
            }
        }
    }
    let text = serde_json::to_string_pretty(&Value::Object(report)).expect("report is valid JSON") + "\n";
    emit(command, args.out.as_deref(), &text, csv.as_deref()).map_err(Failure::Validation)?;
    diagnostics(&text)
}

/// Writes `<command>.json` (and `<command>.csv`) under `out`, or to stdout.
fn emit(command: Command, out: Option<&Path>, json: &str, csv: Option<&[u8]>) -> anyhow::Result<()> {
    let name = command_name(command);
    match out {
        Some(dir) => {
            fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
            fs::write(dir.join(format!("{name}.json")), json)?;
            if let Some(csv) = csv {
                fs::write(dir.join(format!("{name}.csv")), csv)?;
            }
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            match (command, csv) {
                // the grid is the product; the summary goes to stderr
                (Command::Ray, Some(csv)) => {
                    stdout.write_all(csv)?;
                    eprint!("{json}");
                }
                _ => stdout.write_all(json.as_bytes())?,
            }
        }
    }
    Ok(())
}

/// Failing numeric diagnostics are reported after the files are written.
fn diagnostics(text: &str) -> Outcome<()> {
    let v: Value = serde_json::from_str(text).expect("own output parses");
    let mut problems = Vec::new();
    if let Some(levels) = v.get("mass").and_then(Value::as_array) {
        for l in levels {
            if l["mass_nonnegative"] == json!(false) {
                problems.push(format!("negative Monge-Ampère mass at k = {}", l["k"]));
            }
        }
    }
    if let Some(env) = v.get("envelope") {
        if env["monotone_boundary"] == json!(false) {
            problems.push("φ(0;k) + c_k is not strictly decreasing".into());
        }
        if env["boundary_continuous"] == json!(false) {
            problems.push(format!("envelope boundary gap {} exceeds the budget", env["boundary_gap"]));
        }
    }
    if let Some(n2) = v.get("n2") {
        if n2["agrees"] == json!(false) {
            problems.push("Monte Carlo N_2^2 disagrees with the spectral value".into());
        }
    }
    if problems.is_empty() {
        Ok(())
    } else {
        Err(Failure::Numeric(anyhow!(problems.join("; "))))
    }
}

fn command_name(c: Command) -> &'static str {
    match c {
        Command::FlatLimit => "flat-limit",
        Command::Spectrum => "spectrum",
        Command::Futaki => "futaki",
        Command::Chow => "chow",
        Command::N2 => "n2",
        Command::Ray => "ray",
        Command::Mass => "mass",
        Command::Envelope => "envelope",
        Command::Report => "report",
    }
}

struct RunContext<'a> {
    loaded: &'a LoadedConfiguration,
    args: &'a Args,
    seed: u64,
}

impl RunContext<'_> {
    fn asymptotics(&self) -> Outcome<AsymptoticReport> {
        fit_asymptotics(&self.loaded.configuration, 1).map_err(|e| Failure::Validation(e.into()))
    }

    fn opts(&self, salt: u64) -> McOptions {
        McOptions::new(self.args.samples, self.seed.wrapping_add(salt))
    }

    fn degrees(&self, default: &str, cap: u32) -> Outcome<Vec<u32>> {
        parse_degrees(self.args.k.as_deref().unwrap_or(default), cap)
    }

    fn levels(&self, ks: &[u32]) -> Outcome<Vec<Level>> {
        if self.loaded.fiber.is_empty() {
            return Err(invalid("this command needs a \"fiber\" parametrization in the input"));
        }
        let t = &self.loaded.configuration;
        ks.iter().map(|k| Ok(build_level(t, &self.loaded.fiber, *k, &self.opts(*k as u64))?)).collect()
    }
}

fn parse_degrees(spec: &str, cap: u32) -> Outcome<Vec<u32>> {
    let mut out = Vec::new();
    for part in spec.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let bad = || invalid(format!("cannot read degree list entry '{part}'"));
        let (lo, hi) = match part.split_once('-') {
            Some((a, b)) => (a.parse::<u32>().map_err(|_| bad())?, b.parse::<u32>().map_err(|_| bad())?),
            None => {
                let v = part.parse::<u32>().map_err(|_| bad())?;
                (v, v)
            }
        };
        if lo == 0 || lo > hi || hi > cap {
            return Err(invalid(format!("degrees must satisfy 1 <= k <= {cap}, got '{part}'")));
        }
        out.extend(lo..=hi);
    }
    out.sort_unstable();
    out.dedup();
    if out.is_empty() {
        return Err(invalid("empty degree list"));
    }
    Ok(out)
}

fn parse_t_grid(spec: &str) -> Outcome<Vec<f64>> {
    let parts: Vec<&str> = spec.split(':').collect();
    let bad = || invalid(format!("--t-grid expects min:max:steps with min < max < 0, got '{spec}'"));
    if parts.len() != 3 {
        return Err(bad());
    }
    let lo: f64 = parts[0].parse().map_err(|_| bad())?;
    let hi: f64 = parts[1].parse().map_err(|_| bad())?;
    let steps: usize = parts[2].parse().map_err(|_| bad())?;
    if !(lo < hi && hi < 0.0) || steps == 0 || steps > 10_000 {
        return Err(bad());
    }
    Ok(geometric_t_grid(lo, hi, steps))
}

fn rat(r: &Rational) -> Value {
    Value::String(r.to_string())
}

fn slope(s: &SlopeLimit) -> Value {
    match s {
        SlopeLimit::Exact(r) => json!({"exact": rat(r)}),
        SlopeLimit::Empirical(v) => json!({"empirical": v}),
    }
}

fn flat_limit(ctx: &RunContext) -> Value {
    let t = &ctx.loaded.configuration;
    let vars = t.variables().to_vec();
    let order = TermOrder::grevlex(vars.len());
    let init = t.initial_ideal();
    json!({
        "variables": vars,
        "weights": t.eta().as_slice(),
        "initial_ideal": init.generators().iter().map(|g| g.to_text(&vars, &order)).collect::<Vec<_>>(),
        "groebner_basis": init.source_basis().elements().iter().map(|g| g.to_text(&vars, &order)).collect::<Vec<_>>(),
        "ambient_dim": t.ambient_dim(),
        "dimension": t.dimension(),
    })
}

fn spectrum(ctx: &RunContext) -> Outcome<Value> {
    let t = &ctx.loaded.configuration;
    let ks = ctx.degrees("1-5", HARD_CAP)?;
    if ctx.args.kmax == 0 || ctx.args.kmax > HARD_CAP {
        return Err(invalid(format!("--kmax must lie in 1..={HARD_CAP}")));
    }
    let r = ctx.asymptotics()?;
    let slices: Vec<Value> = ks
        .iter()
        .map(|k| {
            let s = graded_slice(t, *k);
            json!({
                "k": k,
                "d_k": s.d_k,
                "w_k": s.w_k.to_string(),
                "b_spectrum": s.b_spectrum,
                "a_spectrum": s.a_spectrum.iter().map(rat).collect::<Vec<_>>(),
                "tr_a_sq": rat(&s.tr_a_sq),
                "lambda_min": rat(&s.lambda_min),
                "lambda_next": s.lambda_next.as_ref().map(rat),
            })
        })
        .collect();
    let check = operator_norm_check(t, &r.f0, ctx.args.kmax);
    Ok(json!({
        "slices": slices,
        "operator_norm": {"kmax": ctx.args.kmax, "max_lambda_over_k": rat(&check.c_star), "budget": rat(&check.budget), "pass": check.pass},
    }))
}

fn futaki(ctx: &RunContext) -> Outcome<Value> {
    let t = &ctx.loaded.configuration;
    let r = ctx.asymptotics()?;
    let ks = ctx.degrees("1-5", HARD_CAP)?;
    Ok(json!({
        "n": r.n,
        "hilbert_polynomial": r.hilbert_poly.to_string(),
        "weight_polynomial": r.weight_poly.to_string(),
        "stability_window": [r.stability_window.0, r.stability_window.1],
        "validated_through": r.validated_through,
        "F_0": rat(&r.f0),
        "F_1": rat(&r.f1),
        "N_2^2": rat(&r.n2_sq),
        "Lambda": slope(&r.lambda),
        "Gamma": r.gamma.as_ref().map(slope),
        "trivial_action": r.trivial_action,
        "f": ks.iter().map(|k| json!({"k": k, "f": rat(&futaki_f(t, &r, *k))})).collect::<Vec<_>>(),
    }))
}

fn chow(ctx: &RunContext) -> Outcome<Value> {
    let t = &ctx.loaded.configuration;
    let r = ctx.asymptotics()?;
    let rs = parse_degrees(ctx.args.r.as_deref().unwrap_or("1-10"), HARD_CAP)?;
    let levels = if ctx.args.numeric {
        if rs.iter().any(|r| *r > NUMERIC_CAP) {
            return Err(invalid(format!("numeric Chow weights need r <= {NUMERIC_CAP}")));
        }
        Some(ctx.levels(&rs)?)
    } else {
        None
    };
    let mut out = Vec::new();
    for (i, level) in rs.iter().enumerate() {
        let c = chow_weight_algebraic(t, &r, *level);
        let mut entry = json!({
            "r": level,
            "mu": rat(&c.mu),
            "c": rat(&c.c_x_omega),
            "residual": rat(&c.futaki_residual),
            "tilde_w": c.tilde_w.to_string(),
        });
        if let Some(levels) = &levels {
            let num = chow_weight_numeric(&ctx.loaded.fiber, &levels[i], ctx.args.t_probe, &ctx.opts(1000 + *level as u64))?;
            entry["numeric"] = json!({
                "t_probe": ctx.args.t_probe,
                "mu": num.mu,
                "stderr": num.stderr,
                "mu_half": num.mu_half,
                "stderr_half": num.stderr_half,
                "convex": num.convex,
            });
        }
        out.push(entry);
    }
    Ok(Value::Array(out))
}

fn n2(ctx: &RunContext) -> Outcome<Value> {
    let loaded = ctx.loaded;
    if loaded.cycle.is_empty() {
        return Err(invalid("this command needs a \"cycle\" in the input"));
    }
    let r = ctx.asymptotics()?;
    // the variance is shift invariant, so raw weights serve as Hamiltonian values
    let eta: Vec<f64> = loaded.configuration.eta().as_slice().iter().map(|v| *v as f64).collect();
    let e = n2_integral(&loaded.cycle, &eta, &ctx.opts(0))?;
    let exact = <f64 as Real>::rational(&r.n2_sq);
    let agrees = (e.value - exact).abs() <= ctx.args.tol_mc * e.stderr + 1e-12;
    Ok(json!({
        "N_2^2": rat(&r.n2_sq),
        "monte_carlo": e.value,
        "stderr": e.stderr,
        "h_mean": e.h_hat,
        "volume": e.volume,
        "agrees": agrees,
    }))
}

fn mass(ctx: &RunContext) -> Outcome<Value> {
    let t = &ctx.loaded.configuration;
    let r = ctx.asymptotics()?;
    let ks = ctx.degrees("2-12", NUMERIC_CAP)?;
    let levels = ctx.levels(&ks)?;
    let mut out = Vec::new();
    for level in &levels {
        let e = ma_mass(t, &r, &ctx.loaded.fiber, level, &ctx.opts(2000 + level.k as u64), Some(ctx.args.t_probe))?;
        out.push(json!({
            "k": e.k,
            "edot_zero": e.edot_zero,
            "edot_zero_stderr": e.edot_zero_stderr,
            "edot_minus_infinity": rat(&e.edot_minus_inf),
            "mass": e.mass,
            "mass_stderr": e.mass_stderr,
            "k_times_mass": e.mass_times_k,
            "mass_nonnegative": e.mass >= -ctx.args.tol_mc * e.mass_stderr,
            "edot_probe": e.edot_probe.map(|(t, v, se)| json!({"t": t, "edot": v, "stderr": se})),
            "mass_probe": e.mass_probe,
        }));
    }
    Ok(Value::Array(out))
}

fn rays(ctx: &RunContext, with_envelope: bool) -> Outcome<(Value, RayGrid<f64>)> {
    let ks = ctx.degrees("4,8,16", NUMERIC_CAP)?;
    let t_grid = parse_t_grid(&ctx.args.t_grid)?;
    let levels = ctx.levels(&ks)?;
    let points: Vec<_> = ctx.loaded.fiber.iter().flat_map(default_points::<f64>).collect();
    let grid = envelope(&levels, &t_grid, &points)?;
    let per_level: Vec<Value> = levels
        .iter()
        .enumerate()
        .map(|(ki, level)| {
            let rows: Vec<Value> = sup_osc_report(&grid, level, ki)
                .iter()
                .map(|s| json!({"t": s.t, "sup": s.sup, "inf": s.inf, "osc": s.osc, "sup_over_2abs_t": s.sup_over_2abs_t, "lower_bound": s.lower_bound, "upper_bound": s.upper_bound}))
                .collect();
            json!({"k": level.k, "lambda_min": rat(&level.lambdas_exact.iter().min().cloned().unwrap_or_default()), "sup_osc": rows})
        })
        .collect();
    let mut summary = json!({
        "k_set": grid.k_set,
        "t_grid": grid.t_grid,
        "points": grid.points.iter().map(|z| z.iter().map(|c| [c.re, c.im]).collect::<Vec<_>>()).collect::<Vec<_>>(),
        "levels": per_level,
    });
    if with_envelope {
        summary["c_k"] = json!(grid.c_k);
        summary["eps_k"] = json!(grid.eps_k);
        summary["monotone_boundary"] = json!(grid.monotone_boundary);
        summary["boundary_t"] = json!(grid.boundary_t);
        summary["boundary_gap"] = json!(grid.boundary_gap);
        summary["boundary_continuous"] = json!(grid.boundary_gap <= ctx.args.tol_boundary);
        summary["attaining_k"] = json!(grid.attaining.iter().map(|row| row.iter().map(|i| grid.k_set[*i]).collect::<Vec<_>>()).collect::<Vec<_>>());
    }
    Ok((summary, grid))
}
