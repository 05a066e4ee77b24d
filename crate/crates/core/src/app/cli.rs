//! Command-line driver. Several checks may be named in one invocation; each
//! check name starts a new group of its own flags.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

use super::checks::{default_data_dir, run_check, Check, Settings, CHECK_NAMES};
use super::newform_file::write_newform;
use super::report::{Report, ReportSink};
use crate::error::Error;
use crate::modforms::{level2_weight16_newform, level2_weight8_newform};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Parser, Debug)]
#[command(name = "mverify", version, about = "Verification checks for modular-form identities and non-vanishing certificates")]
struct Invocation {
    #[command(flatten)]
    globals: Globals,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Default, Clone)]
struct Globals {
    /// Override the check's main truncation (q-order, Dirichlet terms or trace bound)
    #[arg(long, global = true)]
    order: Option<usize>,
    /// Override the check's tolerance
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Write JSON Lines reports to this path (`-` for stdout)
    #[arg(long, global = true)]
    json: Option<PathBuf>,
    /// Run the requested checks concurrently
    #[arg(long, global = true)]
    parallel: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// θ_E8 = E4 exactly
    #[command(name = "theta-e8")]
    ThetaE8,
    /// det(V) = 1, V even, θ_V = θ_E8
    #[command(name = "theta-v")]
    ThetaV,
    /// θ_{E8⊕E8} = θ_{D16+} = E8
    #[command(name = "theta-16")]
    Theta16,
    /// Degree-2 theta tables of E8⊕E8 and D16+ agree
    #[command(name = "deg2-genus")]
    Deg2Genus,
    /// Γ0(N) weight-8 Eisenstein series: q-expansion against the lattice sum
    #[command(name = "eisenstein-n")]
    EisensteinN {
        #[arg(long = "N", default_value_t = 2)]
        level: u64,
    },
    /// Unfolded integral against the closed form at level one, weights 2k and 2k+8
    #[command(name = "unfold-level1")]
    UnfoldLevel1 {
        #[arg(long, default_value_t = 6)]
        k: u32,
    },
    /// Unfolded integral against the closed form on Γ0(N) from fixture files
    #[command(name = "unfold-gamma0")]
    UnfoldGamma0 {
        #[arg(long = "N", default_value_t = 2)]
        level: u64,
    },
    /// Certified non-vanishing of L(s, Δ ⊗ g20)
    #[command(name = "nonvanishing")]
    Nonvanishing {
        #[arg(long, default_value_t = 4.0)]
        s: f64,
    },
    /// Rankin convolution of a Saito–Kurokawa lift with itself
    #[command(name = "sk-rankin")]
    SkRankin {
        #[arg(long, default_value_t = 10)]
        weight: u32,
        #[arg(long, default_value_t = 16.0)]
        s: f64,
        #[arg(long = "det-bound", default_value_t = 100)]
        det_bound: i64,
    },
    /// Regenerate the level-2 newform fixtures
    #[command(name = "gen-fixtures")]
    GenFixtures {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 2000)]
        rows: usize,
    },
}

impl Command {
    fn into_check(self) -> Option<Check> {
        Some(match self {
            Command::ThetaE8 => Check::ThetaE8,
            Command::ThetaV => Check::ThetaV,
            Command::Theta16 => Check::Theta16,
            Command::Deg2Genus => Check::Deg2Genus,
            Command::EisensteinN { level } => Check::EisensteinN { level },
            Command::UnfoldLevel1 { k } => Check::UnfoldLevel1 { k },
            Command::UnfoldGamma0 { level } => Check::UnfoldGamma0 { level },
            Command::Nonvanishing { s } => Check::Nonvanishing { s },
            Command::SkRankin { weight, s, det_bound } => Check::SkRankin { weight, s, det_bound },
            Command::GenFixtures { .. } => return None,
        })
    }
}

const GEN_FIXTURES: &str = "gen-fixtures";

/// Splits `args` (without the program name) at every command name; leading
/// global flags are repeated in front of each group.
fn split_groups(args: &[OsString]) -> Vec<Vec<OsString>> {
    let is_command = |a: &OsString| {
        a.to_str().is_some_and(|s| CHECK_NAMES.contains(&s) || s == GEN_FIXTURES)
    };
    let first = args.iter().position(is_command).unwrap_or(args.len());
    let prefix = &args[..first];
    let mut groups: Vec<Vec<OsString>> = Vec::new();
    for a in &args[first..] {
        if is_command(a) {
            groups.push(prefix.to_vec());
        }
        groups.last_mut().expect("first token is a command").push(a.clone());
    }
    if groups.is_empty() {
        groups.push(prefix.to_vec());
    }
    groups
}

fn merge(into: &mut Globals, g: Globals) {
    into.order = g.order.or(into.order);
    into.tol = g.tol.or(into.tol);
    into.json = g.json.or(into.json.take());
    into.parallel |= g.parallel;
}

/// Data and usage problems exit with 2; everything else is a failed check.
fn is_data_error(e: &Error) -> bool {
    matches!(e, Error::Io(_) | Error::Parse { .. } | Error::InvalidInput(_) | Error::Unsupported(_))
}

/// Runs the CLI on `args` (program name first) and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString>,
{
    let mut args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let bin = if args.is_empty() { OsString::from("mverify") } else { args.remove(0) };

    let mut globals = Globals::default();
    let mut commands = Vec::new();
    for group in split_groups(&args) {
        let argv = std::iter::once(bin.clone()).chain(group);
        match Invocation::try_parse_from(argv) {
            Ok(inv) => {
                merge(&mut globals, inv.globals);
                commands.push(inv.command);
            }
            Err(e) => {
                let _ = e.print();
                return if e.use_stderr() { EXIT_USAGE } else { EXIT_PASS };
            }
        }
    }

    if commands.iter().any(|c| matches!(c, Command::GenFixtures { .. })) {
        if commands.len() != 1 {
            eprintln!("error: gen-fixtures cannot be combined with checks");
            return EXIT_USAGE;
        }
        let Some(Command::GenFixtures { out, rows }) = commands.pop() else { unreachable!() };
        return match gen_fixtures(&out, rows) {
            Ok(paths) => {
                for p in paths {
                    println!("wrote {}", p.display());
                }
                EXIT_PASS
            }
            Err(e) => {
                eprintln!("error: {e}");
                EXIT_USAGE
            }
        };
    }

    let checks: Vec<Check> = commands.into_iter().filter_map(Command::into_check).collect();
    let settings = Settings { order: globals.order, tol: globals.tol, data_dir: default_data_dir() };
    let run_one = |c: &Check| (c.clone(), run_check(c, &settings));
    let results: Vec<_> =
        if globals.parallel { checks.par_iter().map(run_one).collect() } else { checks.iter().map(run_one).collect() };

    let mut sink = match globals.json.as_ref().filter(|p| p.as_os_str() != "-") {
        Some(path) => match ReportSink::create(path) {
            Ok(s) => Some(s),
            Err(e) => {
                eprintln!("error: cannot write reports to {}: {e}", path.display());
                return EXIT_USAGE;
            }
        },
        None => None,
    };
    let json_stdout = globals.json.as_ref().is_some_and(|p| p.as_os_str() == "-");

    let mut code = EXIT_PASS;
    for (check, result) in results {
        let report = match result {
            Ok(r) => {
                if !r.pass {
                    code = code.max(EXIT_FAIL);
                }
                r
            }
            Err(e) => {
                code = code.max(if is_data_error(&e) { EXIT_USAGE } else { EXIT_FAIL });
                eprintln!("error in {}: {e}", check.name());
                Report {
                    check_name: check.name().to_string(),
                    inputs: serde_json::Value::Null,
                    value: format!("error: {e}"),
                    error_bound: None,
                    pass: false,
                    runtime_ms: 0,
                    notes: None,
                }
            }
        };
        if json_stdout {
            println!("{}", serde_json::to_string(&report).expect("reports serialize"));
        } else {
            println!("{}", report.summary());
        }
        if let Some(sink) = sink.as_mut() {
            if let Err(e) = sink.append(&report) {
                eprintln!("error: writing report: {e}");
                code = EXIT_USAGE;
            }
        }
    }
    let _ = std::io::stdout().flush();
    code
}

/// Writes the level-2 weight-8 and weight-16 newforms with `rows` coefficients.
pub fn gen_fixtures(out: &std::path::Path, rows: usize) -> crate::Result<Vec<PathBuf>> {
    std::fs::create_dir_all(out)?;
    let mut paths = Vec::new();
    for f in [level2_weight8_newform(rows)?, level2_weight16_newform(rows)?] {
        let path = out.join(format!("{}.tsv", f.label()));
        write_newform(&f, &path)?;
        paths.push(path);
    }
    Ok(paths)
}
