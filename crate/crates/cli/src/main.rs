use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use ergolab::dynamics::{ComponentId, Point, SystemSpec};
use ergolab::gallery::{self, ExampleParams, GALLERY_NAMES};
use ergolab::measure::{convergence_curve, write_curve_csv, Observable, TestFamily};
use ergolab::suite::{diagram_consistency, run_suite, uniformity_certificate, CheckConfig, PropertyVerdict};
use ergolab::verdict::{Condition, Status};
use serde::Serialize;
use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

const EXIT_MATCH: u8 = 0;
const EXIT_MISMATCH: u8 = 1;
const EXIT_INCONCLUSIVE: u8 = 2;
const EXIT_INPUT: u8 = 3;

#[derive(Parser)]
#[command(name = "ergolab", version, about = "Property checks for pointwise-ergodic circle systems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Gallery systems and their expected verdicts.
    List,
    /// Birkhoff-average curve (or raw orbit) as CSV.
    Simulate {
        #[command(flatten)]
        run: RunArgs,
        /// starting point, e.g. `circle(1)@0.25`, `integer-line@-3`
        #[arg(long)]
        point: Option<String>,
        #[arg(long, default_value_t = 1000)]
        n: usize,
        /// `x`, `y`, or `f<j>` for the j-th test function
        #[arg(long, default_value = "x")]
        observable: String,
        /// emit orbit points instead of the averaging curve
        #[arg(long)]
        orbit: bool,
    },
    /// Run the property suite; exit 0 iff the verdicts match the system's
    /// expectations and the implication diagram is consistent.
    Check {
        #[command(flatten)]
        run: RunArgs,
    },
    /// Build and validate a uniformity certificate.
    Certificate {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long, default_value_t = 0.05)]
        epsilon: f64,
    },
    /// Implication-diagram consistency of a saved verdict (or of a fresh run).
    Diagram {
        #[command(flatten)]
        run: RunArgs,
        /// verdict JSON written by `check`
        #[arg(long)]
        verdict: Option<PathBuf>,
    },
}

#[derive(Args, Clone, Debug, Default)]
struct RunArgs {
    /// gallery system name
    #[arg(long)]
    system: Option<String>,
    /// system spec JSON file (instead of --system)
    #[arg(long, conflicts_with = "system")]
    spec: Option<PathBuf>,
    /// check config JSON file
    #[arg(long)]
    config: Option<PathBuf>,
    /// output directory; stdout when absent
    #[arg(long)]
    out: Option<PathBuf>,
    /// sampling seed; overrides the config
    #[arg(long)]
    seed: Option<u64>,
    /// rotation number for the `rotation` system
    #[arg(long)]
    alpha: Option<f64>,
}

/// Everything needed to reproduce one invocation.
#[derive(Serialize)]
#[serde(rename_all = "kebab-case")]
struct RunManifest {
    command: String,
    system: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    spec_file: Option<String>,
    config_hash: String,
    config: CheckConfig,
    outputs: Vec<String>,
}

/// Failure that maps to the input-error exit code.
#[derive(Debug)]
struct InputError(anyhow::Error);

impl std::fmt::Display for InputError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{:#}", self.0)
    }
}

impl std::error::Error for InputError {}

fn input<T>(r: Result<T>) -> Result<T> {
    r.map_err(|e| InputError(e).into())
}

struct Loaded {
    system: SystemSpec,
    config: CheckConfig,
}

fn load(run: &RunArgs) -> Result<Loaded> {
    input((|| {
        let system = match (&run.system, &run.spec) {
            (Some(name), None) => gallery::by_name(name, &ExampleParams::default(), run.alpha)?,
            (None, Some(path)) => {
                let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
                SystemSpec::from_json(&text).with_context(|| format!("in {}", path.display()))?
            }
            _ => bail!("exactly one of --system or --spec is required"),
        };
        let mut config = match &run.config {
            Some(path) => {
                let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
                CheckConfig::from_json(&text).with_context(|| format!("in {}", path.display()))?
            }
            None => CheckConfig::default(),
        };
        if let Some(seed) = run.seed {
            config.seed = seed;
        }
        config.validate()?;
        Ok(Loaded { system, config })
    })())
}

/// Writes `name` under `--out`, or to stdout.
struct Sink<'a> {
    out: Option<&'a Path>,
    written: Vec<String>,
}

impl<'a> Sink<'a> {
    fn new(out: Option<&'a Path>) -> Result<Self> {
        if let Some(dir) = out {
            input(fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display())))?;
        }
        Ok(Sink { out, written: Vec::new() })
    }

    fn emit(&mut self, name: &str, bytes: &[u8]) -> Result<()> {
        match self.out {
            Some(dir) => {
                let path = dir.join(name);
                fs::write(&path, bytes).with_context(|| format!("writing {}", path.display()))?;
                self.written.push(name.to_string());
            }
            None => std::io::stdout().write_all(bytes)?,
        }
        Ok(())
    }

    fn finish(self, command: &str, run: &RunArgs, loaded: &Loaded) -> Result<()> {
        if let Some(dir) = self.out {
            let manifest = RunManifest {
                command: command.to_string(),
                system: loaded.system.name.clone(),
                spec_file: run.spec.as_ref().map(|p| p.display().to_string()),
                config_hash: loaded.config.hash(),
                config: loaded.config.clone(),
                outputs: self.written,
            };
            let text = serde_json::to_string_pretty(&manifest)? + "\n";
            fs::write(dir.join("manifest.json"), text)?;
        }
        Ok(())
    }
}

fn expected_line(expected: &BTreeMap<Condition, Status>) -> String {
    expected
        .iter()
        .map(|(c, s)| format!("{c}={}", serde_json::to_value(s).unwrap().as_str().unwrap()))
        .collect::<Vec<_>>()
        .join(" ")
}

fn cmd_list() -> Result<u8> {
    let mut names = GALLERY_NAMES.to_vec();
    names.sort_unstable();
    let params = ExampleParams::default();
    let mut out = String::new();
    for name in names {
        let sys = gallery::by_name(name, &params, None)?;
        let kind = if name == "rotation" {
            "parameterized by --alpha (default golden mean)".to_string()
        } else {
            format!("{} components", sys.components.len())
        };
        out.push_str(&format!("{name:<9} {kind}; expected: {}\n", expected_line(&sys.expected())));
    }
    print!("{out}");
    Ok(EXIT_MATCH)
}

fn default_point(system: &SystemSpec) -> Result<Point> {
    let c = system.component_ids().next().ok_or_else(|| anyhow!("system has no components"))?;
    Ok(match c {
        ComponentId::IntegerLine => Point::integer(0),
        ComponentId::PlusInfinity => Point::plus_infinity(),
        ComponentId::MinusInfinity => Point::minus_infinity(),
        c => Point::on(c, 0.0),
    })
}

fn parse_observable(s: &str) -> Result<Observable> {
    match s {
        "x" => Ok(Observable::first_coordinate()),
        "y" => Ok(Observable::second_coordinate()),
        _ => {
            let fam = TestFamily::standard();
            let j: usize = s
                .strip_prefix('f')
                .and_then(|j| j.parse().ok())
                .filter(|&j| j < fam.len())
                .ok_or_else(|| anyhow!("observable must be x, y or f0..f{}", fam.len() - 1))?;
            Ok(fam.observables[j])
        }
    }
}

fn cmd_simulate(run: &RunArgs, point: Option<&str>, n: usize, observable: &str, orbit: bool) -> Result<u8> {
    let loaded = load(run)?;
    let sys = &loaded.system;
    let (x, f) = input((|| {
        let x = match point {
            Some(p) => p.parse::<Point>()?,
            None => default_point(sys)?,
        };
        sys.check_point(&x)?;
        if n == 0 {
            bail!("--n must be at least 1");
        }
        Ok((x, parse_observable(observable)?))
    })())?;
    let mut buf = Vec::new();
    let file = if orbit {
        writeln!(buf, "i,point,x,y")?;
        let mut w = sys.walker(&x)?;
        for i in 0..n {
            let p = w.position();
            writeln!(buf, "{i},{},{:e},{:e}", w.current(), p[0], p[1])?;
            w.advance();
        }
        format!("{}.orbit.csv", sys.name)
    } else {
        let rows = convergence_curve(sys, &f, &x, n)?;
        write_curve_csv(&mut buf, &sys.name, &x.to_string(), observable_index(observable), &rows, true)?;
        format!("{}.curve.csv", sys.name)
    };
    let mut sink = Sink::new(run.out.as_deref())?;
    sink.emit(&file, &buf)?;
    sink.finish("simulate", run, &loaded)?;
    Ok(EXIT_MATCH)
}

/// Column value for the curve CSV: raw coordinates are reported as
/// indices past the end of the test family.
fn observable_index(s: &str) -> usize {
    let len = TestFamily::standard().len();
    match s {
        "x" => len,
        "y" => len + 1,
        _ => s[1..].parse().unwrap_or(0),
    }
}

fn verdict_outcome(v: &PropertyVerdict, expected: &BTreeMap<Condition, Status>) -> u8 {
    let mismatches = v.mismatches(expected);
    let definite = mismatches.iter().any(|(_, _, found)| *found != Status::Inconclusive);
    for (c, want, got) in &mismatches {
        eprintln!("{}: expected {c}={}, found {}", v.system, want.symbol(), got.symbol());
    }
    for rule in &v.diagram.violations {
        eprintln!("{}: diagram violation {rule}", v.system);
    }
    if definite || !v.diagram.consistent {
        EXIT_MISMATCH
    } else if !mismatches.is_empty() || v.any_inconclusive() {
        EXIT_INCONCLUSIVE
    } else {
        EXIT_MATCH
    }
}

fn cmd_check(run: &RunArgs) -> Result<u8> {
    let loaded = load(run)?;
    let verdict = run_suite(&loaded.system, &loaded.config)?;
    let mut sink = Sink::new(run.out.as_deref())?;
    sink.emit(&format!("{}.verdict.json", loaded.system.name), (verdict.to_json() + "\n").as_bytes())?;
    sink.finish("check", run, &loaded)?;
    Ok(verdict_outcome(&verdict, &loaded.system.expected()))
}

fn cmd_certificate(run: &RunArgs, epsilon: f64) -> Result<u8> {
    let loaded = load(run)?;
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(InputError(anyhow!("--epsilon must be positive")).into());
    }
    let cert = uniformity_certificate(&loaded.system, epsilon, &loaded.config)?;
    let mut sink = Sink::new(run.out.as_deref())?;
    let text = serde_json::to_string_pretty(&cert)? + "\n";
    sink.emit(&format!("{}.certificate.json", loaded.system.name), text.as_bytes())?;
    sink.finish("certificate", run, &loaded)?;
    if let Some(why) = &cert.failure {
        eprintln!("{}: certificate failed: {why}", cert.system);
    }
    Ok(if cert.valid { EXIT_MATCH } else { EXIT_MISMATCH })
}

fn cmd_diagram(run: &RunArgs, verdict: Option<&Path>) -> Result<u8> {
    let statuses = match verdict {
        Some(path) => input((|| {
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            let v: PropertyVerdict =
                serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
            Ok(v.statuses())
        })())?,
        None => {
            let loaded = load(run)?;
            run_suite(&loaded.system, &loaded.config)?.statuses()
        }
    };
    let report = diagram_consistency(&statuses);
    let text = serde_json::to_string_pretty(&report)? + "\n";
    let mut sink = Sink::new(run.out.as_deref())?;
    sink.emit("diagram.json", text.as_bytes())?;
    Ok(if report.consistent { EXIT_MATCH } else { EXIT_MISMATCH })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_INPUT } else { EXIT_MATCH });
        }
    };
    let result = match &cli.command {
        Command::List => cmd_list(),
        Command::Simulate { run, point, n, observable, orbit } => {
            cmd_simulate(run, point.as_deref(), *n, observable, *orbit)
        }
        Command::Check { run } => cmd_check(run),
        Command::Certificate { run, epsilon } => cmd_certificate(run, *epsilon),
        Command::Diagram { run, verdict } => cmd_diagram(run, verdict.as_deref()),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<InputError>().is_some() {
                ExitCode::from(EXIT_INPUT)
            } else {
                ExitCode::from(EXIT_MISMATCH)
            }
        }
    }
}
