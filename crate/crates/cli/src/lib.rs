//! Command-line front end for the `ksphere` engines.
//!
//! [`run_with`] does all the work and returns the captured output, so the
//! binary is a thin wrapper and tests can drive commands in-process.

use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use ksphere::atlas::{self, AtlasError, Format, Mode, VerifyFailure};
use ksphere::charclass;
use ksphere::reducer::{reduce_with, ReduceError};
use ksphere::rep::{char_name, ParseError, RepMultiset};
use ksphere::twist::{self, Twist, TwistError};
use ksphere::{parse_rep, KResult, Oracle, OracleError, ReduceOptions, Trace};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DISAGREE: i32 = 2;

/// Environment variable that turns on per-move oracle checkpoints.
pub const DEBUG_CHI_VAR: &str = "KSPHERE_DEBUG_CHI";

#[derive(Debug, Parser)]
#[command(
    name = "ksphere",
    version,
    about = "Equivariant K-theory of representation spheres over (Z/2)^n"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compute the K-groups of one representation sphere.
    Compute(ComputeArgs),
    /// Tabulate every (or a sample of) character set at rank n.
    Atlas(AtlasArgs),
    /// Cross-check both engines and replay every reducer trace.
    Verify(VerifyArgs),
    /// Print Stiefel-Whitney data and the Spin^c verdict.
    Sw(SwArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Method {
    Oracle,
    Reduce,
    Both,
}

impl Method {
    fn name(self) -> &'static str {
        match self {
            Method::Oracle => "oracle",
            Method::Reduce => "reduce",
            Method::Both => "both",
        }
    }
}

#[derive(Debug, Args)]
pub struct ComputeArgs {
    #[arg(short = 'n', long = "rank")]
    pub n: usize,
    /// Representation, e.g. "a+b+ab" or "1+2ab".
    #[arg(short = 'V', long = "rep", allow_hyphen_values = true)]
    pub rep: String,
    /// Twisting class as pairs, e.g. "1-2,2-3".
    #[arg(long)]
    pub twist: Option<String>,
    #[arg(long, value_enum, default_value_t = Method::Both)]
    pub method: Method,
    #[arg(long)]
    pub json: bool,
    /// Also print the reducer's move trace.
    #[arg(long)]
    pub trace: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AtlasMode {
    Exhaustive,
    Sample,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TableFormat {
    Csv,
    Json,
}

#[derive(Debug, Args)]
pub struct AtlasArgs {
    #[arg(short = 'n', long = "rank")]
    pub n: usize,
    #[arg(long, value_enum)]
    pub mode: AtlasMode,
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = TableFormat::Csv)]
    pub format: TableFormat,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(short = 'n', long = "rank")]
    pub n: usize,
    #[arg(long, conflicts_with = "samples")]
    pub exhaustive: bool,
    #[arg(long, required_unless_present = "exhaustive")]
    pub samples: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct SwArgs {
    #[arg(short = 'n', long = "rank")]
    pub n: usize,
    #[arg(short = 'V', long = "rep", allow_hyphen_values = true)]
    pub rep: String,
}

/// Knobs read from the environment by the binary.
#[derive(Debug, Clone, Copy, Default)]
pub struct Settings {
    pub debug_chi: bool,
}

impl Settings {
    pub fn from_env() -> Self {
        Settings {
            debug_chi: std::env::var(DEBUG_CHI_VAR).is_ok_and(|v| v == "1"),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

impl Outcome {
    fn ok(stdout: String) -> Self {
        Outcome {
            code: EXIT_OK,
            stdout,
            stderr: String::new(),
        }
    }

    fn fail(code: i32, stderr: String) -> Self {
        Outcome {
            code,
            stdout: String::new(),
            stderr,
        }
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run_with<I, S>(args: I, settings: Settings) -> Outcome
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                Outcome::fail(EXIT_USAGE, text)
            } else {
                Outcome::ok(text)
            };
        }
    };
    run(cli.command, settings)
}

pub fn run(command: Command, settings: Settings) -> Outcome {
    match command {
        Command::Compute(args) => compute(&args, settings),
        Command::Atlas(args) => atlas_cmd(&args),
        Command::Verify(args) => verify(&args),
        Command::Sw(args) => sw(&args),
    }
}

fn parse_or_report(expr: &str, n: usize) -> Result<RepMultiset, Outcome> {
    parse_rep(expr, n).map_err(|e| {
        let mut msg = format!("error: {e}\n");
        if let Some(pos) = parse_position(&e) {
            let _ = writeln!(msg, "  {expr}\n  {}^", " ".repeat(pos));
        }
        Outcome::fail(EXIT_USAGE, msg)
    })
}

fn parse_position(e: &ParseError) -> Option<usize> {
    match *e {
        ParseError::UnknownLetter { pos, .. }
        | ParseError::EmptyTerm { pos }
        | ParseError::Unexpected { pos, .. }
        | ParseError::BareMultiplicity { pos }
        | ParseError::MultiplicityOverflow { pos } => Some(pos),
        ParseError::Gf2(_) => None,
    }
}

fn oracle_code(e: &OracleError) -> i32 {
    match e {
        // A non-power-of-two chi contradicts the rank form under test.
        OracleError::NonPowerOfTwo(_) => EXIT_DISAGREE,
        _ => EXIT_USAGE,
    }
}

fn reduce_code(e: &ReduceError) -> i32 {
    match e {
        ReduceError::Oracle(o) => oracle_code(o),
        _ => EXIT_DISAGREE,
    }
}

fn compute(args: &ComputeArgs, settings: Settings) -> Outcome {
    if args.trace && args.method == Method::Oracle {
        return Outcome::fail(EXIT_USAGE, "error: --trace needs --method reduce or both\n".into());
    }
    let v = match parse_or_report(&args.rep, args.n) {
        Ok(v) => v,
        Err(out) => return out,
    };
    let tau = match &args.twist {
        None => None,
        Some(s) => match Twist::parse(s, args.n) {
            Ok(t) => Some(t),
            Err(e) => return Outcome::fail(EXIT_USAGE, format!("error: {e}\n")),
        },
    };
    let target = match &tau {
        None => v.clone(),
        Some(t) => match twist::shift_rep(&v, t) {
            Ok(r) => r,
            Err(e) => return Outcome::fail(EXIT_USAGE, format!("error: {e}\n")),
        },
    };

    let mut oracle = Oracle::new();
    let by_oracle = if args.method == Method::Reduce {
        None
    } else {
        match oracle.k_groups(&target) {
            Ok(k) => Some(k),
            Err(e) => return Outcome::fail(oracle_code(&e), format!("error: oracle: {e}\n")),
        }
    };
    let by_reducer: Option<(KResult, Trace)> = if args.method == Method::Oracle {
        None
    } else {
        let opts = ReduceOptions {
            checkpoints: settings.debug_chi,
        };
        match reduce_with(&target, opts, &mut oracle) {
            Ok(r) => Some(r),
            Err(e) => return Outcome::fail(reduce_code(&e), format!("error: reducer: {e}\n")),
        }
    };

    if let (Some(a), Some((b, _))) = (by_oracle, &by_reducer) {
        if a != *b {
            let mut report = String::from("engine disagreement\n");
            let _ = writeln!(report, "  n = {}, V = {}", args.n, v);
            if let Some(t) = &tau {
                let _ = writeln!(report, "  twist = {t}");
            }
            let _ = writeln!(report, "  oracle:  {a}");
            let _ = writeln!(report, "  reducer: {b}");
            return Outcome {
                code: EXIT_DISAGREE,
                stdout: report,
                stderr: String::new(),
            };
        }
    }
    let result = by_oracle
        .or(by_reducer.as_ref().map(|(k, _)| *k))
        .expect("some engine ran");
    let trace = by_reducer.filter(|_| args.trace).map(|(_, t)| t);

    let stdout = if args.json {
        let mut obj = json!({
            "n": args.n,
            "rep": v.to_string(),
            "twist": tau.as_ref().map(|t| t.to_string()),
            "chi": result.chi(),
            "m": result.m,
            "epsilon": result.epsilon,
            "method": args.method.name(),
        });
        if let Some(t) = &trace {
            obj["trace"] = serde_json::to_value(t).expect("traces serialize");
        }
        format!(
            "{}\n",
            serde_json::to_string_pretty(&obj).expect("json values serialize")
        )
    } else {
        let mut s = String::new();
        let _ = writeln!(s, "n = {}, V = {}", args.n, display_rep(&v));
        if let Some(t) = &tau {
            let _ = writeln!(s, "twist = {t}");
        }
        let _ = writeln!(s, "chi = {}", result.chi());
        let _ = writeln!(s, "{result}");
        if args.method == Method::Both {
            s.push_str("engines agree\n");
        }
        if let Some(t) = &trace {
            s.push_str(&t.to_text());
        }
        s
    };
    Outcome::ok(stdout)
}

fn display_rep(v: &RepMultiset) -> String {
    let s = v.to_string();
    if s.is_empty() {
        "0".into()
    } else {
        s
    }
}

fn atlas_error(e: AtlasError) -> Outcome {
    let code = match &e {
        AtlasError::EngineDisagreement { .. } => EXIT_DISAGREE,
        AtlasError::Oracle(o) => oracle_code(o),
        AtlasError::Reduce(r) => reduce_code(r),
        AtlasError::SizeGuard { .. } | AtlasError::Io(_) => EXIT_USAGE,
    };
    Outcome::fail(code, format!("error: {e}\n"))
}

fn atlas_cmd(args: &AtlasArgs) -> Outcome {
    let mode = match (args.mode, args.samples) {
        (AtlasMode::Exhaustive, None) => Mode::Exhaustive,
        (AtlasMode::Exhaustive, Some(_)) => {
            return Outcome::fail(EXIT_USAGE, "error: --samples only applies to --mode sample\n".into())
        }
        (AtlasMode::Sample, Some(count)) => Mode::Sample { count, seed: args.seed },
        (AtlasMode::Sample, None) => return Outcome::fail(EXIT_USAGE, "error: --mode sample needs --samples\n".into()),
    };
    let format = match args.format {
        TableFormat::Csv => Format::Csv,
        TableFormat::Json => Format::Json,
    };
    let rows = match atlas::enumerate(args.n, mode) {
        Ok(rows) => rows,
        Err(e) => return atlas_error(e),
    };
    match &args.out {
        None => Outcome::ok(atlas::render_table(&rows, format)),
        Some(path) => match atlas::write_table(&rows, format, path) {
            Ok(()) => Outcome::ok(format!("wrote {} rows to {}\n", rows.len(), path.display())),
            Err(e) => atlas_error(e),
        },
    }
}

fn chars_expr(chars: &[ksphere::F2Vec]) -> String {
    if chars.is_empty() {
        return "0".into();
    }
    chars.iter().map(|&c| char_name(c)).collect::<Vec<_>>().join("+")
}

fn describe_failure(f: &VerifyFailure) -> String {
    let show = |r: &Result<KResult, String>| match r {
        Ok(k) => k.to_string(),
        Err(e) => format!("error: {e}"),
    };
    let mut s = String::new();
    let _ = writeln!(s, "  V = {}", chars_expr(&f.chars));
    let _ = writeln!(s, "  oracle:  {}", show(&f.oracle));
    let _ = writeln!(s, "  reducer: {}", show(&f.reducer));
    if let Some(r) = &f.replay {
        let _ = writeln!(s, "  replay:  {r}");
    }
    s
}

fn verify(args: &VerifyArgs) -> Outcome {
    let mut out = String::new();
    let sets = if args.exhaustive {
        match atlas::all_sets(args.n) {
            Ok(s) => s,
            Err(e) => return atlas_error(e),
        }
    } else {
        if args.n > atlas::MAX_SAMPLED_RANK {
            return atlas_error(AtlasError::SizeGuard {
                n: args.n,
                limit: atlas::MAX_SAMPLED_RANK,
                what: "sampling",
            });
        }
        let count = args.samples.expect("clap requires --samples without --exhaustive");
        let _ = writeln!(out, "seed = {}", args.seed);
        atlas::sample_sets(args.n, count, args.seed)
    };
    let total = sets.len();
    let failures = atlas::verify_sets(args.n, sets);

    if args.n == 3 {
        let mut oracle = Oracle::new();
        match atlas::published_case_report(&mut oracle) {
            Ok(report) => {
                for case in report {
                    let flags = if case.flags.is_empty() {
                        String::new()
                    } else {
                        format!(" [{}]", case.flags.join(";"))
                    };
                    let _ = writeln!(
                        out,
                        "{}: {}  published (m={}, eps={}), computed {}{}",
                        case.name, case.expr, case.published.m, case.published.epsilon, case.oracle, flags
                    );
                }
            }
            Err(e) => return atlas_error(e),
        }
    }

    if failures.is_empty() {
        let _ = writeln!(
            out,
            "verified {total} sets at n = {}: engines agree, all traces replay",
            args.n
        );
        return Outcome::ok(out);
    }
    let _ = writeln!(out, "{} of {total} sets failed at n = {}", failures.len(), args.n);
    let first = &failures[0];
    let mut oracle = Oracle::new();
    let minimal = atlas::shrink(&first.chars, |c| atlas::verify_set(args.n, c, &mut oracle).is_some());
    let _ = writeln!(out, "first failure:");
    out.push_str(&describe_failure(first));
    if let Some(m) = atlas::verify_set(args.n, &minimal, &mut oracle) {
        let _ = writeln!(out, "minimized:");
        out.push_str(&describe_failure(&m));
    }
    Outcome {
        code: EXIT_DISAGREE,
        stdout: out,
        stderr: String::new(),
    }
}

fn sw(args: &SwArgs) -> Outcome {
    let v = match parse_or_report(&args.rep, args.n) {
        Ok(v) => v,
        Err(out) => return out,
    };
    let total = charclass::sw_total(&v);
    let mut s = String::new();
    let _ = writeln!(s, "w1 = {}", total.homogeneous(1));
    let _ = writeln!(s, "w2 = {}", total.homogeneous(2));
    let _ = writeln!(s, "beta w2 = {}", charclass::bockstein_w2(&v));
    let verdict = if charclass::is_spinc(&v) {
        "Spin^c: yes".to_string()
    } else {
        match twist::twist_of_bundle(&v) {
            Err(TwistError::NotOrientable(_)) => "Spin^c: no (not orientable)".to_string(),
            Ok(t) => format!("Spin^c: no (twist {t})"),
            Err(e) => format!("Spin^c: no ({e})"),
        }
    };
    s.push_str(&verdict);
    s.push('\n');
    Outcome::ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(args: &[&str]) -> Outcome {
        let mut all = vec!["ksphere"];
        all.extend_from_slice(args);
        run_with(all, Settings::default())
    }

    #[test]
    fn hard_case() {
        let out = run(&["compute", "-n", "2", "-V", "a+b+ab", "--method", "both"]);
        assert_eq!(out.code, 0, "{out:?}");
        assert!(out.stdout.contains("K^0 = 0, K^1 = Z^1 (m=0, eps=1)"));
        assert!(out.stdout.contains("engines agree"));
    }

    #[test]
    fn rank_three_example() {
        let out = run(&["compute", "-n", "3", "-V", "a+b+c+ab+ac+bc"]);
        assert!(out.stdout.contains("(m=2, eps=1)"), "{out:?}");
    }

    #[test]
    fn twisted_empty() {
        let out = run(&["compute", "-n", "2", "-V", "", "--twist", "1-2", "--json"]);
        assert_eq!(out.code, 0, "{out:?}");
        let v: serde_json::Value = serde_json::from_str(&out.stdout).unwrap();
        assert_eq!(v["m"], 0);
        assert_eq!(v["epsilon"], 0);
        assert_eq!(v["chi"], 1);
        assert_eq!(v["twist"], "1-2");
    }

    #[test]
    fn json_round_trips() {
        let first = run(&["compute", "-n", "3", "-V", "ba + 1 + 2c + a", "--json", "--trace"]);
        let v: serde_json::Value = serde_json::from_str(&first.stdout).unwrap();
        let rep = v["rep"].as_str().unwrap().to_string();
        let second = run(&["compute", "-n", "3", "-V", &rep, "--json", "--trace"]);
        assert_eq!(first, second);
        assert!(v["trace"].is_object());
    }

    #[test]
    fn usage_errors() {
        assert_eq!(run(&["compute", "-n", "2", "-V", "a+c"]).code, 1);
        assert_eq!(
            run(&["compute", "-n", "2", "-V", "a", "--method", "oracle", "--trace"]).code,
            1
        );
        assert_eq!(run(&["compute", "-n", "2", "-V", "a", "--twist", "2-1"]).code, 1);
        assert_eq!(run(&["atlas", "-n", "5", "--mode", "exhaustive"]).code, 1);
        assert_eq!(run(&["atlas", "-n", "3", "--mode", "sample"]).code, 1);
        assert_eq!(run(&["verify", "-n", "2"]).code, 1);
        assert_eq!(run(&["frobnicate"]).code, 1);
        assert_eq!(run(&["--help"]).code, 0);
    }

    #[test]
    fn parse_error_points_at_position() {
        let out = run(&["compute", "-n", "2", "-V", "a+c"]);
        assert!(out.stderr.contains("position 2"), "{out:?}");
        assert!(out.stderr.contains("    ^"), "{out:?}");
    }

    #[test]
    fn verify_small() {
        let out = run(&["verify", "-n", "3", "--exhaustive"]);
        assert_eq!(out.code, 0, "{out:?}");
        assert!(out.stdout.contains("verified 128 sets"));
        assert!(out.stdout.contains("ee1"));
        assert!(out.stdout.contains("paper_discrepancy"));
        let out = run(&["verify", "-n", "4", "--samples", "50", "--seed", "9"]);
        assert!(out.stdout.starts_with("seed = 9"), "{out:?}");
    }

    #[test]
    fn sw_verdicts() {
        let out = run(&["sw", "-n", "2", "-V", "1+a+b+ab"]);
        assert!(out.stdout.contains("beta w2 = b(x1x2)"), "{out:?}");
        assert!(out.stdout.contains("Spin^c: no (twist 1-2)"));
        let out = run(&["sw", "-n", "2", "-V", "a"]);
        assert!(out.stdout.contains("not orientable"));
        let out = run(&["sw", "-n", "3", "-V", "1+a+b+c+ab+ac+bc+abc"]);
        assert!(out.stdout.contains("Spin^c: yes"), "{out:?}");
    }

    #[test]
    fn atlas_to_stdout() {
        let out = run(&["atlas", "-n", "2", "--mode", "exhaustive"]);
        assert_eq!(out.code, 0);
        assert_eq!(out.stdout.lines().count(), 9);
    }

    #[test]
    fn atlas_to_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("atlas.json");
        let out = run(&[
            "atlas",
            "-n",
            "2",
            "--mode",
            "exhaustive",
            "--format",
            "json",
            "--out",
            path.to_str().unwrap(),
        ]);
        assert_eq!(out.stdout, format!("wrote 8 rows to {}\n", path.display()));
        let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
        assert_eq!(v.as_array().unwrap().len(), 8);
    }
}
