//! Command-line surface for the walk simulator and its verification
//! suites. Commands emit deterministic CSV or JSON so runs can be
//! diffed byte for byte, read a plain `key=value` config file with
//! explicit flags taking precedence, and fold every report into a
//! single exit code scripts can branch on.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::io::{self, Write as _};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use serde::Serialize;
use serde_json::{json, Value};

use cmv_walk::dynamics::{evolve, site_distribution, SiteDistribution};
use cmv_walk::lattice::{Spin, WalkerState};
use cmv_walk::model::{build_step, WalkParams};
use cmv_walk::sympoly::{verify_collapse, xi_region, CollapseReport};
use cmv_walk::verify::{
    check_linear_bound, check_main_theorem, check_subsequence_bound, conjecture_probe,
    interpolation_threshold, norm_suite, BoundReport, FieldKind, ProbeRow, DEFAULT_SEED,
};
use cmv_walk::WalkError;

/// Everything checked held.
pub const EXIT_OK: i32 = 0;
/// At least one verified claim failed its bound.
pub const EXIT_VIOLATION: i32 = 1;
/// Bad flags, config, or input data.
pub const EXIT_USAGE: i32 = 2;
/// A norm estimate did not converge, so verdicts are not trustworthy.
pub const EXIT_NONCONVERGED: i32 = 3;

/// Environment variable naming the directory that relative `--output`
/// paths are resolved against.
pub const OUTPUT_DIR_ENV: &str = "CMV_WALK_OUT";

/// Steps beyond this are refused by `verify-bounds`; the windowed norm
/// behind each report grows quadratically with the step count.
const MAX_THEOREM_STEPS: usize = 400;

#[derive(Debug, Parser)]
#[command(name = "cmv-walk", version, about = "Split-step walk simulation and bound verification")]
pub struct Cli {
    /// Plain key=value config file; explicit flags win over file values.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evolve an initial state and emit the site distribution.
    Simulate(SimulateArgs),
    /// Certify scalar collapse of every low-order symmetric polynomial.
    VerifySympoly(VerifySympolyArgs),
    /// Run the velocity-bound suites for one parameter point.
    VerifyBounds(VerifyBoundsArgs),
    /// Check the commutator-norm identities and the one-period bound.
    Norms(NormsArgs),
    /// Measure velocities against the conjectured t^n scaling.
    ConjectureProbe(ConjectureProbeArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum OutputFormat {
    Csv,
    Json,
}

impl FromStr for OutputFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "csv" => Ok(Self::Csv),
            "json" => Ok(Self::Json),
            other => Err(format!("unknown format `{other}`, expected csv or json")),
        }
    }
}

#[derive(Debug, Default, Args)]
pub struct SimulateArgs {
    /// Transmission parameter in [0, 1].
    #[arg(long)]
    pub t: Option<f64>,

    /// Field period: number of distinct diagonal phases.
    #[arg(long)]
    pub period: Option<usize>,

    /// Exponent of the primitive root of unity, coprime to the period.
    #[arg(long = "root-k", value_name = "K")]
    pub root_k: Option<usize>,

    /// Number of walk steps.
    #[arg(long)]
    pub steps: Option<usize>,

    /// Initial state as semicolon-separated `site,spin,re,im`
    /// components; must be normalized. Defaults to spin-up at the
    /// origin.
    #[arg(long)]
    pub initial: Option<String>,

    /// Output format.
    #[arg(long, value_enum)]
    pub format: Option<OutputFormat>,

    /// Output file; stdout when omitted. A relative path lands in
    /// $CMV_WALK_OUT when that is set.
    #[arg(long)]
    pub output: Option<PathBuf>,

    /// Seed recorded in the JSON metadata.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Default, Args)]
pub struct VerifySympolyArgs {
    /// Field period: number of factors in each polynomial.
    #[arg(long)]
    pub period: Option<usize>,

    /// Exponent of the primitive root of unity, coprime to the period.
    #[arg(long = "root-k", value_name = "K")]
    pub root_k: Option<usize>,

    /// Residual tolerance for the scalar-collapse checks.
    #[arg(long)]
    pub tol: Option<f64>,

    /// Output file for the JSON report lines; stdout when omitted.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Default, Args)]
pub struct VerifyBoundsArgs {
    /// Transmission parameter in [0, 1].
    #[arg(long)]
    pub t: Option<f64>,

    /// Field period.
    #[arg(long)]
    pub period: Option<usize>,

    /// Largest multiple of the period checked by the subsequence suite.
    #[arg(long = "k-max", value_name = "K")]
    pub k_max: Option<usize>,

    /// Steps for the linear velocity bound.
    #[arg(long)]
    pub steps: Option<usize>,

    /// Number of seeded aperiodic fields to run the linear bound over.
    #[arg(long = "random-fields", value_name = "COUNT")]
    pub random_fields: Option<usize>,

    /// Base seed for the aperiodic fields.
    #[arg(long)]
    pub seed: Option<u64>,

    /// Output file for the JSON report lines; stdout when omitted.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Default, Args)]
pub struct NormsArgs {
    /// Transmission parameter in [0, 1].
    #[arg(long)]
    pub t: Option<f64>,

    /// Field period.
    #[arg(long)]
    pub period: Option<usize>,

    /// Exponent of the primitive root of unity, coprime to the period.
    #[arg(long = "root-k", value_name = "K")]
    pub root_k: Option<usize>,

    /// First window radius in sites for the norm estimates; clamped up
    /// to each operator's minimum.
    #[arg(long = "window-radius", value_name = "SITES")]
    pub window_radius: Option<i64>,

    /// Output file for the JSON report lines; stdout when omitted.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Default, Args)]
pub struct ConjectureProbeArgs {
    /// Comma-separated transmission values.
    #[arg(long = "t-grid", value_name = "LIST")]
    pub t_grid: Option<String>,

    /// Comma-separated field periods.
    #[arg(long = "n-grid", value_name = "LIST")]
    pub n_grid: Option<String>,

    /// Number of walk steps per grid point.
    #[arg(long)]
    pub steps: Option<usize>,

    /// Output format.
    #[arg(long, value_enum)]
    pub format: Option<OutputFormat>,

    /// Output file; stdout when omitted.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

/// Keys a config file may set; each mirrors the long flag of the same
/// name. Unknown keys are rejected so typos surface instead of being
/// silently ignored.
const KNOWN_KEYS: &[&str] = &[
    "t",
    "period",
    "root-k",
    "steps",
    "initial",
    "format",
    "output",
    "seed",
    "tol",
    "k-max",
    "random-fields",
    "window-radius",
    "t-grid",
    "n-grid",
];

/// Parsed `key=value` config file. Values stay raw strings until a
/// command resolves them, so one file can serve several commands.
#[derive(Debug, Default)]
pub struct FileConfig {
    values: BTreeMap<String, String>,
}

impl FileConfig {
    pub fn parse(text: &str) -> anyhow::Result<Self> {
        let mut values = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| anyhow!("config line {}: expected key=value, got `{raw}`", idx + 1))?;
            let key = key.trim();
            if !KNOWN_KEYS.contains(&key) {
                bail!("config line {}: unknown key `{key}`", idx + 1);
            }
            values.insert(key.to_string(), value.trim().to_string());
        }
        Ok(Self { values })
    }

    pub fn load(path: Option<&Path>) -> anyhow::Result<Self> {
        match path {
            Some(p) => {
                let text = fs::read_to_string(p)
                    .with_context(|| format!("reading config file {}", p.display()))?;
                Self::parse(&text)
            }
            None => Ok(Self::default()),
        }
    }

    fn get<T: FromStr>(&self, key: &str) -> anyhow::Result<Option<T>>
    where
        T::Err: fmt::Display,
    {
        match self.values.get(key) {
            Some(raw) => raw
                .parse()
                .map(Some)
                .map_err(|e| anyhow!("config key `{key}` = `{raw}`: {e}")),
            None => Ok(None),
        }
    }
}

/// Flag value if present, else the config-file value, else nothing.
fn pick<T: FromStr>(flag: Option<T>, file: &FileConfig, key: &str) -> anyhow::Result<Option<T>>
where
    T::Err: fmt::Display,
{
    match flag {
        Some(v) => Ok(Some(v)),
        None => file.get(key),
    }
}

fn require<T>(value: Option<T>, key: &str) -> anyhow::Result<T> {
    value.ok_or_else(|| anyhow!("missing required parameter `--{key}` (flag or config file)"))
}

fn parse_f64_list(raw: &str) -> anyhow::Result<Vec<f64>> {
    raw.split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|e| anyhow!("grid entry `{s}`: {e}"))
        })
        .collect()
}

fn parse_usize_list(raw: &str) -> anyhow::Result<Vec<usize>> {
    raw.split(',')
        .map(|s| {
            s.trim()
                .parse::<usize>()
                .map_err(|e| anyhow!("grid entry `{s}`: {e}"))
        })
        .collect()
}

/// Parse `site,spin,re,im` components separated by semicolons into a
/// normalized state.
pub fn parse_initial(input: &str) -> anyhow::Result<WalkerState> {
    let mut parts = Vec::new();
    for component in input.split(';') {
        let fields: Vec<&str> = component.split(',').map(str::trim).collect();
        if fields.len() != 4 {
            bail!("initial component `{component}`: expected site,spin,re,im");
        }
        let site: i64 = fields[0]
            .parse()
            .map_err(|e| anyhow!("initial site `{}`: {e}", fields[0]))?;
        let spin = match fields[1] {
            "up" => Spin::Up,
            "down" => Spin::Down,
            other => bail!("initial spin `{other}`: expected up or down"),
        };
        let re: f64 = fields[2]
            .parse()
            .map_err(|e| anyhow!("initial amplitude `{}`: {e}", fields[2]))?;
        let im: f64 = fields[3]
            .parse()
            .map_err(|e| anyhow!("initial amplitude `{}`: {e}", fields[3]))?;
        parts.push((site, spin, Complex64::new(re, im)));
    }
    let state = WalkerState::superpose(&parts, false)?;
    let norm = state.norm();
    if (norm - 1.0).abs() > 1e-10 {
        bail!("initial state norm is {norm}, expected 1 within 1e-10");
    }
    Ok(state)
}

/// Metadata block attached to JSON distribution output.
#[derive(Debug, Clone, Copy)]
pub struct RunMeta {
    pub t: f64,
    pub n: usize,
    pub k: usize,
    pub steps: usize,
    pub seed: Option<u64>,
}

/// Floats are serialized with 17 significant digits so every double
/// round-trips exactly and output is byte-stable across runs.
fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

struct SciFormatter;

impl serde_json::ser::Formatter for SciFormatter {
    fn write_f64<W>(&mut self, writer: &mut W, value: f64) -> io::Result<()>
    where
        W: ?Sized + io::Write,
    {
        write!(writer, "{value:.16e}")
    }
}

/// Compact single-line JSON with round-trip float formatting and keys
/// in sorted order.
pub fn to_json_string(value: &Value) -> String {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, SciFormatter);
    value
        .serialize(&mut ser)
        .expect("in-memory JSON serialization cannot fail");
    String::from_utf8(buf).expect("serializer emits UTF-8")
}

/// `site,prob_up,prob_down,prob_total` rows in site order, LF endings.
pub fn distribution_csv(dist: &SiteDistribution) -> String {
    let mut out = String::from("site,prob_up,prob_down,prob_total\n");
    for (site, p) in dist.iter() {
        out.push_str(&format!(
            "{site},{},{},{}\n",
            format_float(p.up),
            format_float(p.down),
            format_float(p.total())
        ));
    }
    out
}

/// One-line JSON document with a `sites` array and a `meta` block.
pub fn distribution_json(dist: &SiteDistribution, meta: &RunMeta) -> String {
    let sites: Vec<Value> = dist
        .iter()
        .map(|(site, p)| {
            json!({
                "site": site,
                "prob_up": p.up,
                "prob_down": p.down,
                "prob_total": p.total(),
            })
        })
        .collect();
    let doc = json!({
        "meta": {
            "t": meta.t,
            "n": meta.n,
            "k": meta.k,
            "N": meta.steps,
            "seed": meta.seed,
        },
        "sites": sites,
    });
    let mut line = to_json_string(&doc);
    line.push('\n');
    line
}

fn report_value(r: &BoundReport) -> Value {
    json!({
        "claim": &r.claim,
        "params": &r.params,
        "computed": r.computed,
        "bound": r.bound,
        "margin": r.margin,
        "pass": r.pass,
        "window_radii": r.window_radii.map(|(a, b)| vec![a, b]),
        "seed": r.seed,
    })
}

/// One JSON object per line, one line per report.
pub fn reports_jsonl(reports: &[BoundReport]) -> String {
    let mut out = String::new();
    for r in reports {
        out.push_str(&to_json_string(&report_value(r)));
        out.push('\n');
    }
    out
}

/// `t,n,steps,velocity,reference,ratio,peak` rows, LF endings.
pub fn probe_csv(rows: &[ProbeRow]) -> String {
    let mut out = String::from("t,n,steps,velocity,reference,ratio,peak\n");
    for row in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            format_float(row.t),
            row.n,
            row.steps,
            format_float(row.velocity),
            format_float(row.reference),
            format_float(row.ratio),
            row.peak
        ));
    }
    out
}

/// One JSON object per grid point, one line each.
pub fn probe_jsonl(rows: &[ProbeRow]) -> String {
    let mut out = String::new();
    for row in rows {
        let value = json!({
            "t": row.t,
            "n": row.n,
            "steps": row.steps,
            "velocity": row.velocity,
            "reference": row.reference,
            "ratio": row.ratio,
            "peak": row.peak,
        });
        out.push_str(&to_json_string(&value));
        out.push('\n');
    }
    out
}

/// Map a collapse certificate onto the common report shape: the worst
/// residual against a zero bound, with the run parameters attached.
pub fn collapse_report_line(c: &CollapseReport) -> BoundReport {
    let computed = c.max_offdiag.max(c.max_diag_dev);
    let mut params = BTreeMap::new();
    params.insert("n".to_string(), c.n as f64);
    params.insert("k".to_string(), c.k as f64);
    params.insert("l".to_string(), c.l as f64);
    params.insert("m".to_string(), c.m as f64);
    params.insert("gamma_re".to_string(), c.gamma.re);
    params.insert("gamma_im".to_string(), c.gamma.im);
    params.insert("term_count".to_string(), c.term_count as f64);
    params.insert("in_xi".to_string(), f64::from(u8::from(c.in_xi)));
    params.insert(
        "gamma_zero_expected".to_string(),
        f64::from(u8::from(c.gamma_zero_expected)),
    );
    BoundReport {
        claim: "scalar-collapse".to_string(),
        params,
        computed,
        bound: 0.0,
        margin: -computed,
        pass: c.pass,
        window_radii: None,
        seed: None,
    }
}

/// Fold reports into an exit code. Non-convergence outranks a violation
/// because a verdict from an unconverged estimate is not evidence.
pub fn exit_code(reports: &[BoundReport]) -> i32 {
    if reports.iter().any(BoundReport::non_converged) {
        EXIT_NONCONVERGED
    } else if reports.iter().any(|r| !r.pass) {
        EXIT_VIOLATION
    } else {
        EXIT_OK
    }
}

/// Resolve a relative output path against $CMV_WALK_OUT when set.
pub fn resolve_output_path(path: &Path) -> PathBuf {
    if path.is_relative() {
        if let Ok(dir) = std::env::var(OUTPUT_DIR_ENV) {
            if !dir.is_empty() {
                return PathBuf::from(dir).join(path);
            }
        }
    }
    path.to_path_buf()
}

fn write_output(path: Option<&Path>, content: &str) -> anyhow::Result<()> {
    match path {
        Some(p) => {
            let full = resolve_output_path(p);
            fs::write(&full, content).with_context(|| format!("writing {}", full.display()))
        }
        None => io::stdout()
            .write_all(content.as_bytes())
            .context("writing to stdout"),
    }
}

fn run_simulate(args: SimulateArgs, file: &FileConfig) -> anyhow::Result<i32> {
    let t = require(pick(args.t, file, "t")?, "t")?;
    let n = pick(args.period, file, "period")?.unwrap_or(1);
    let k = pick(args.root_k, file, "root-k")?.unwrap_or(1);
    let steps = pick(args.steps, file, "steps")?.unwrap_or(100);
    let seed = pick(args.seed, file, "seed")?;
    let format = pick(args.format, file, "format")?.unwrap_or(OutputFormat::Csv);
    let output = pick(args.output, file, "output")?;

    let initial = match pick(args.initial, file, "initial")? {
        Some(spec) => parse_initial(&spec)?,
        None => WalkerState::delta(0, Spin::Up, Complex64::new(1.0, 0.0))?,
    };
    let params = WalkParams::new(t, n, k)?;
    let step = build_step(&params)?;
    let final_state = evolve(&initial, &step, steps);
    let dist = site_distribution(&final_state)?;

    let meta = RunMeta { t, n, k, steps, seed };
    let text = match format {
        OutputFormat::Csv => distribution_csv(&dist),
        OutputFormat::Json => distribution_json(&dist, &meta),
    };
    write_output(output.as_deref(), &text)?;
    Ok(EXIT_OK)
}

fn run_verify_sympoly(args: VerifySympolyArgs, file: &FileConfig) -> anyhow::Result<i32> {
    let n = require(pick(args.period, file, "period")?, "period")?;
    let k = pick(args.root_k, file, "root-k")?.unwrap_or(1);
    let tol = pick(args.tol, file, "tol")?.unwrap_or(1e-10);
    let output = pick(args.output, file, "output")?;

    // The polynomials depend only on the root of unity, not on the
    // transmission, so any valid interior value works here.
    let params = WalkParams::new(0.5, n, k)?;
    let mut reports = Vec::new();
    for (l, m) in xi_region(n) {
        reports.push(collapse_report_line(&verify_collapse(&params, l, m, tol)?));
    }
    write_output(output.as_deref(), &reports_jsonl(&reports))?;
    Ok(exit_code(&reports))
}

fn run_verify_bounds(args: VerifyBoundsArgs, file: &FileConfig) -> anyhow::Result<i32> {
    let t = require(pick(args.t, file, "t")?, "t")?;
    let n = require(pick(args.period, file, "period")?, "period")?;
    let k_max = pick(args.k_max, file, "k-max")?.unwrap_or(3);
    let steps = pick(args.steps, file, "steps")?.unwrap_or(6);
    let random_fields = pick(args.random_fields, file, "random-fields")?.unwrap_or(0);
    let seed = pick(args.seed, file, "seed")?.unwrap_or(DEFAULT_SEED);
    let output = pick(args.output, file, "output")?;

    let mut reports = vec![check_linear_bound(
        t,
        &FieldKind::Periodic { n, k: 1 },
        steps,
    )?];
    for j in 0..random_fields {
        reports.push(check_linear_bound(
            t,
            &FieldKind::Random { seed: seed + j as u64 },
            steps,
        )?);
    }
    reports.extend(check_subsequence_bound(t, n, k_max)?);

    let threshold = interpolation_threshold(t, n);
    if threshold.is_finite() {
        let lo = threshold.floor() as usize + 1;
        let hi = lo + 9;
        if hi > MAX_THEOREM_STEPS {
            bail!(
                "interpolation threshold {threshold:.1} puts the checked steps past \
                 {MAX_THEOREM_STEPS}; pick t, period with a smaller threshold"
            );
        }
        reports.extend(check_main_theorem(t, n, lo, hi)?);
    }

    write_output(output.as_deref(), &reports_jsonl(&reports))?;
    Ok(exit_code(&reports))
}

fn run_norms(args: NormsArgs, file: &FileConfig) -> anyhow::Result<i32> {
    let t = require(pick(args.t, file, "t")?, "t")?;
    let n = pick(args.period, file, "period")?.unwrap_or(1);
    let k = pick(args.root_k, file, "root-k")?.unwrap_or(1);
    let radius = pick(args.window_radius, file, "window-radius")?;
    let output = pick(args.output, file, "output")?;

    let reports = norm_suite(t, n, k, radius)?;
    write_output(output.as_deref(), &reports_jsonl(&reports))?;
    Ok(exit_code(&reports))
}

fn run_conjecture_probe(args: ConjectureProbeArgs, file: &FileConfig) -> anyhow::Result<i32> {
    let t_grid = match pick(args.t_grid, file, "t-grid")? {
        Some(raw) => parse_f64_list(&raw)?,
        None => vec![0.2, 0.5, 0.8],
    };
    let n_grid = match pick(args.n_grid, file, "n-grid")? {
        Some(raw) => parse_usize_list(&raw)?,
        None => vec![1, 5, 10],
    };
    let steps = pick(args.steps, file, "steps")?.unwrap_or(100);
    let format = pick(args.format, file, "format")?.unwrap_or(OutputFormat::Csv);
    let output = pick(args.output, file, "output")?;

    let rows = conjecture_probe(&t_grid, &n_grid, steps)?;
    let text = match format {
        OutputFormat::Csv => probe_csv(&rows),
        OutputFormat::Json => probe_jsonl(&rows),
    };
    write_output(output.as_deref(), &text)?;
    Ok(EXIT_OK)
}

/// Dispatch a parsed command line. Errors bubble up for `execute` to
/// translate into an exit code.
pub fn run(cli: Cli) -> anyhow::Result<i32> {
    let file = FileConfig::load(cli.config.as_deref())?;
    match cli.command {
        Command::Simulate(args) => run_simulate(args, &file),
        Command::VerifySympoly(args) => run_verify_sympoly(args, &file),
        Command::VerifyBounds(args) => run_verify_bounds(args, &file),
        Command::Norms(args) => run_norms(args, &file),
        Command::ConjectureProbe(args) => run_conjecture_probe(args, &file),
    }
}

fn error_code(err: &anyhow::Error) -> i32 {
    match err.downcast_ref::<WalkError>() {
        // Two independent constructions disagreeing is a numerical
        // failure, not a usage problem.
        Some(WalkError::ConstructionMismatch { .. }) => EXIT_NONCONVERGED,
        _ => EXIT_USAGE,
    }
}

/// Run a parsed command line and reduce the outcome to an exit code,
/// printing any error to stderr.
pub fn execute(cli: Cli) -> i32 {
    match run(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            error_code(&err)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_format_is_seventeen_significant_digits() {
        assert_eq!(format_float(0.5), "5.0000000000000000e-1");
        assert_eq!(format_float(0.0), "0.0000000000000000e0");
        let tricky = 0.1 + 0.2;
        let round_tripped: f64 = format_float(tricky).parse().unwrap();
        assert_eq!(round_tripped.to_bits(), tricky.to_bits());
    }

    #[test]
    fn json_floats_round_trip() {
        let value = json!({ "x": 1.0 / 3.0, "y": 1e-300 });
        let text = to_json_string(&value);
        let back: Value = serde_json::from_str(&text).unwrap();
        assert_eq!(back["x"].as_f64().unwrap().to_bits(), (1.0f64 / 3.0).to_bits());
        assert_eq!(back["y"].as_f64().unwrap().to_bits(), 1e-300f64.to_bits());
    }

    #[test]
    fn config_file_parses_and_flags_win() {
        let file = FileConfig::parse("# comment\nt = 0.25\nperiod=3\n\nsteps = 7\n").unwrap();
        assert_eq!(pick(None::<f64>, &file, "t").unwrap(), Some(0.25));
        assert_eq!(pick(Some(0.5), &file, "t").unwrap(), Some(0.5));
        assert_eq!(pick(None::<usize>, &file, "period").unwrap(), Some(3));
        assert_eq!(pick(None::<usize>, &file, "root-k").unwrap(), None);
    }

    #[test]
    fn config_file_rejects_unknown_keys_and_bad_lines() {
        assert!(FileConfig::parse("speling = 1\n").is_err());
        assert!(FileConfig::parse("just words\n").is_err());
        let file = FileConfig::parse("t = not-a-number\n").unwrap();
        assert!(pick(None::<f64>, &file, "t").is_err());
    }

    #[test]
    fn initial_state_parsing() {
        let state = parse_initial("0,up,1,0").unwrap();
        assert_eq!(state.support_len(), 1);
        let s = 0.5f64.sqrt();
        let spec = format!("0,up,{s},0;2,down,0,{s}");
        let state = parse_initial(&spec).unwrap();
        assert_eq!(state.support_len(), 2);
        assert!((state.norm() - 1.0).abs() < 1e-12);

        assert!(parse_initial("0,up,1").is_err());
        assert!(parse_initial("0,sideways,1,0").is_err());
        assert!(parse_initial("0,up,0.5,0").is_err());
    }

    #[test]
    fn exit_code_precedence() {
        let pass = BoundReport::check("a", BTreeMap::new(), 0.0, 1.0, 0.0);
        let fail = BoundReport::check("b", BTreeMap::new(), 2.0, 1.0, 0.0);
        let mut stuck = BoundReport::check("c", BTreeMap::new(), 0.0, 1.0, 0.0);
        stuck.params.insert("converged".to_string(), 0.0);
        stuck.params.insert("rel_change".to_string(), 1e-3);

        assert_eq!(exit_code(&[pass.clone()]), EXIT_OK);
        assert_eq!(exit_code(&[pass.clone(), fail.clone()]), EXIT_VIOLATION);
        assert_eq!(exit_code(&[fail, stuck, pass]), EXIT_NONCONVERGED);
    }

    #[test]
    fn report_lines_carry_all_fields() {
        let mut report = BoundReport::check(
            "sample",
            cmv_walk::verify::params_map(&[("t", 0.5)]),
            0.25,
            1.0,
            0.0,
        )
        .with_radii((10, 14));
        report = report.with_seed(7);
        let line = reports_jsonl(&[report]);
        let value: Value = serde_json::from_str(line.trim()).unwrap();
        assert_eq!(value["claim"], "sample");
        assert_eq!(value["pass"], true);
        assert_eq!(value["window_radii"][1], 14);
        assert_eq!(value["seed"], 7);
        assert_eq!(value["params"]["t"].as_f64().unwrap(), 0.5);
        assert!((value["margin"].as_f64().unwrap() - 0.75).abs() < 1e-15);
    }
}
