//! `dfemlab`: single runs from JSON configs and the benchmark suites.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use dfemlab::assembly::{Enrichment, Method};
use dfemlab::cases::{self, RunRecord, Scale};
use dfemlab::config::{self, RunConfig};
use dfemlab::Error;

#[derive(Parser)]
#[command(name = "dfemlab", version, about = "Double-interpolation FEM lab for 2D elasticity and fracture")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one JSON configuration.
    Run {
        config: PathBuf,
        /// Output directory; overrides the config's `output`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a benchmark suite and write its tables.
    Bench {
        #[arg(value_enum)]
        suite: Suite,
        /// Comma-separated subset of fem, dfem, xfem, xdfem.
        #[arg(long, value_delimiter = ',')]
        methods: Vec<String>,
        /// topological, fixed, fixed:<radius> or both.
        #[arg(long, default_value = "topological")]
        enrichment: String,
        #[arg(long, default_value = "desk")]
        scale: String,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Number of inclined-crack angles between 0 and pi/2.
        #[arg(long, default_value_t = 7)]
        angles: usize,
        /// Structured meshes only for the edge crack.
        #[arg(long)]
        structured_only: bool,
        /// Three-hole cases to grow.
        #[arg(long, value_delimiter = ',', default_value = "1,2,3")]
        cases: Vec<usize>,
        /// Record wall-clock times; rows are then no longer reproducible.
        #[arg(long)]
        timings: bool,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Suite {
    Bar1d,
    PlateHole,
    Timoshenko,
    Griffith,
    Inclined,
    ThreeHole,
}

impl Suite {
    fn name(self) -> &'static str {
        match self {
            Suite::Bar1d => "bar1d",
            Suite::PlateHole => "plate_hole",
            Suite::Timoshenko => "timoshenko",
            Suite::Griffith => "griffith",
            Suite::Inclined => "inclined",
            Suite::ThreeHole => "three_hole",
        }
    }

    fn default_methods(self) -> &'static [Method] {
        match self {
            Suite::Bar1d | Suite::PlateHole | Suite::Timoshenko => &[Method::Fem, Method::Dfem],
            Suite::Griffith | Suite::Inclined => &[Method::Xfem, Method::Xdfem],
            Suite::ThreeHole => &[Method::Xdfem],
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = configure_threads() {
        return report(&e);
    }
    let result = match cli.command {
        Command::Run { config, out } => run(&config, out),
        Command::Bench { suite, methods, enrichment, scale, out, angles, structured_only, cases, timings } => {
            let opts = BenchOptions { methods, enrichment, scale, out, angles, structured_only, cases, timings };
            bench(suite, &opts)
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => report(&e),
    }
}

/// One JSON line on stderr; the exit code is always 1.
fn report(e: &Error) -> ExitCode {
    #[derive(Serialize)]
    struct Line<'a> {
        error: &'a str,
        message: String,
    }
    let line = Line { error: e.kind(), message: e.to_string() };
    eprintln!("{}", serde_json::to_string(&line).unwrap_or_else(|_| format!("{{\"error\":\"{}\"}}", e.kind())));
    ExitCode::FAILURE
}

fn configure_threads() -> Result<(), Error> {
    let Ok(v) = std::env::var("DFEMLAB_THREADS") else { return Ok(()) };
    let n: usize = v
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Error::Config(format!("DFEMLAB_THREADS must be a positive integer, got '{v}'")))?;
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| Error::Config(e.to_string()))
}

fn run(path: &Path, out: Option<PathBuf>) -> Result<(), Error> {
    let cfg = RunConfig::load(path)?;
    let base = path.parent().unwrap_or(Path::new("."));
    let dir = out.or_else(|| cfg.output.as_ref().map(|o| base.join(o))).unwrap_or_else(|| PathBuf::from("."));
    let output = config::run(&cfg, base)?;
    fs::create_dir_all(&dir)?;
    write_rows(&dir.join("results.csv"), std::slice::from_ref(&output.record))?;
    fs::write(dir.join("fields.vtk"), &output.vtk)?;
    if let Some(h) = &output.history {
        fs::write(dir.join("crack_history.csv"), h.to_csv())?;
    }
    Ok(())
}

struct BenchOptions {
    methods: Vec<String>,
    enrichment: String,
    scale: String,
    out: PathBuf,
    angles: usize,
    structured_only: bool,
    cases: Vec<usize>,
    timings: bool,
}

fn parse_enrichments(s: &str) -> Result<Vec<Enrichment>, Error> {
    let fixed = Enrichment::Fixed { radius: cases::FIXED_AREA_RADIUS };
    match s {
        "topological" => Ok(vec![Enrichment::Topological]),
        "fixed" => Ok(vec![fixed]),
        "both" => Ok(vec![Enrichment::Topological, fixed]),
        _ => match s.strip_prefix("fixed:").map(str::parse::<f64>) {
            Some(Ok(radius)) if radius > 0.0 => Ok(vec![Enrichment::Fixed { radius }]),
            _ => Err(Error::Config(format!("unknown enrichment '{s}'"))),
        },
    }
}

fn bench(suite: Suite, o: &BenchOptions) -> Result<(), Error> {
    let scale: Scale = o.scale.parse()?;
    let methods: Vec<Method> = if o.methods.is_empty() {
        suite.default_methods().to_vec()
    } else {
        o.methods.iter().map(|m| m.parse()).collect::<Result<_, _>>()?
    };
    fs::create_dir_all(&o.out)?;
    let name = suite.name();
    let rows = match suite {
        Suite::Bar1d => {
            // the bar study always reports both interpolations
            cases::bar_study(&[4, 8, 16, 32])?
        }
        Suite::PlateHole => cases::plate_hole_study(scale, &methods, o.timings)?,
        Suite::Timoshenko => cases::timoshenko_study(scale, &methods, o.timings)?,
        Suite::Griffith => {
            let enrichments = parse_enrichments(&o.enrichment)?;
            cases::griffith_study(scale, &methods, &enrichments, !o.structured_only, o.timings)?
        }
        Suite::Inclined => {
            let rows = cases::inclined_study(&cases::inclined_angles(o.angles), &methods, o.timings)?;
            write_inclined_table(&o.out.join("inclined_table.csv"), &rows)?;
            rows
        }
        Suite::ThreeHole => return three_hole(scale, &methods, &o.cases, &o.out),
    };
    write_rows(&o.out.join(format!("{name}.csv")), &rows)?;
    if !matches!(suite, Suite::Inclined) {
        let slopes = cases::slopes(&rows)?;
        write_rows(&o.out.join(format!("{name}_slopes.csv")), &slopes)?;
    }
    Ok(())
}

fn three_hole(scale: Scale, methods: &[Method], which: &[usize], out: &Path) -> Result<(), Error> {
    for &m in methods {
        for &c in which {
            let setup = cases::GrowthSetup::case(c, scale, m)?;
            let history = cases::holed_beam_growth(&setup)?;
            fs::write(out.join(format!("crack_history_case{c}_{}.csv", m.name())), history.to_csv())?;
        }
    }
    Ok(())
}

fn write_rows<T: Serialize>(path: &Path, rows: &[T]) -> Result<(), Error> {
    let mut w = csv::Writer::from_path(path).map_err(csv_error)?;
    for r in rows {
        w.serialize(r).map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}

/// Angle in degrees followed by K_I, K_II per method.
fn write_inclined_table(path: &Path, rows: &[RunRecord]) -> Result<(), Error> {
    let mut methods: Vec<&str> = Vec::new();
    for r in rows {
        if !methods.contains(&r.method.as_str()) {
            methods.push(&r.method);
        }
    }
    let mut w = csv::Writer::from_path(path).map_err(csv_error)?;
    let mut header = vec!["beta_deg".to_string()];
    for m in &methods {
        header.push(format!("K_I_{m}"));
        header.push(format!("K_II_{m}"));
    }
    w.write_record(&header).map_err(csv_error)?;
    let betas: Vec<f64> = rows.iter().filter(|r| r.method == methods[0]).map(|r| r.h).collect();
    for b in betas {
        let mut rec = vec![format!("{:.2}", b.to_degrees())];
        for m in &methods {
            let r = rows.iter().find(|r| r.method == *m && r.h == b);
            let k = |v: Option<f64>| v.map_or(String::new(), |v| format!("{v:.4}"));
            rec.push(r.map_or(String::new(), |r| k(r.k1)));
            rec.push(r.map_or(String::new(), |r| k(r.k2)));
        }
        w.write_record(&rec).map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}

fn csv_error(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}
