//! The `hopskip` command line.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::dse::{dse_hs, dse_ps, dse_xs, period_bounds, Strategy, DEFAULT_GROUP_CAP};
use crate::energy::actor_energy;
use crate::error::Error;
use crate::graph::{repetition_vector, unroll, DecisionVector, MarkedGraph, DEFAULT_INSTANCE_CAP};
use crate::io::annotate::RNG_ALGORITHM;
use crate::io::results::{PointRecord, StatsRecord, DECIMAL_DIGITS};
use crate::io::{
    gantt_csv, generate_random, load_sdf3_file, points_csv, read_front_file, write_report, write_sdf3, Annotations,
    GeneratorParams, Report, ScheduleFile,
};
use crate::metrics::compare_fronts;
use crate::rational::Rational;
use crate::timing::{verify_schedule, TimingModel};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INFEASIBLE: i32 = 2;
pub const EXIT_USAGE: i32 = 64;
pub const EXIT_DATA: i32 = 65;
pub const EXIT_INTERNAL: i32 = 70;

#[derive(Debug, Parser)]
#[command(
    name = "hopskip",
    version,
    about = "Energy/throughput exploration of self-powering dataflow graphs"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Minimum period, schedule and energy for one configuration.
    Analyze(AnalyzeArgs),
    /// Explore the period/energy trade-off.
    Explore(ExploreArgs),
    /// Generate a random annotated SDF graph.
    Gen(GenArgs),
    /// Check a schedule file against a graph.
    Verify(VerifyArgs),
    /// Hypervolume ratio of a front against a reference front.
    Hv(HvArgs),
}

#[derive(Debug, Args)]
pub struct GraphArgs {
    /// SDF3 XML file.
    pub graph: PathBuf,
    /// Annotation sidecar; defaults to `<graph>.annotations.json` if present.
    #[arg(long)]
    pub annotations: Option<PathBuf>,
    /// Upper bound on unrolled actor instances.
    #[arg(long, default_value_t = DEFAULT_INSTANCE_CAP)]
    pub cap: u64,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    #[command(flatten)]
    pub input: GraphArgs,
    /// Decision bits, one per SDF actor (1 = self-powered); default all 0.
    #[arg(long)]
    pub x: Option<DecisionVector>,
    /// Schedule at this period instead of the minimum.
    #[arg(long)]
    pub period: Option<Rational>,
    /// Directory for schedule.json and gantt.csv.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ExploreArgs {
    /// SDF3 XML file; omit to explore a generated graph (see --seed).
    pub graph: Option<PathBuf>,
    #[arg(long)]
    pub annotations: Option<PathBuf>,
    /// Generate the input with this seed instead of reading a file.
    #[arg(long, conflicts_with = "graph")]
    pub seed: Option<u64>,
    #[arg(long, default_value = "hs")]
    pub strategy: Strategy,
    /// Skip decrement for hs.
    #[arg(long, default_value = "1/10")]
    pub epsilon: Rational,
    #[arg(long, default_value_t = DEFAULT_INSTANCE_CAP)]
    pub cap: u64,
    /// Largest number of decision groups xs accepts.
    #[arg(long, default_value_t = DEFAULT_GROUP_CAP)]
    pub group_cap: usize,
    /// Worker threads for xs and ps; defaults to the number of CPUs.
    #[arg(long)]
    pub workers: Option<usize>,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    /// Front (points CSV or report JSON) to compute the hypervolume ratio
    /// against.
    #[arg(long)]
    pub reference_front: Option<PathBuf>,
    /// Include wall-clock time in report.json.
    #[arg(long)]
    pub timing: bool,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    /// Base name of the emitted files.
    #[arg(long, default_value = "random")]
    pub name: String,
    #[arg(long, default_value_t = 15)]
    pub actors: usize,
    #[arg(long, default_value_t = 250)]
    pub repetition_sum: u64,
    #[arg(long, default_value_t = 1)]
    pub rate_min: u64,
    #[arg(long, default_value_t = 20)]
    pub rate_max: u64,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub input: GraphArgs,
    /// Schedule JSON as written by `analyze --out`.
    pub schedule: PathBuf,
}

#[derive(Debug, Args)]
pub struct HvArgs {
    /// Front to score (points CSV or report JSON).
    pub front: PathBuf,
    /// Reference front.
    pub reference: PathBuf,
}

/// A failure with its exit code.
#[derive(Debug)]
struct Failure {
    code: i32,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::Infeasible { .. } | Error::Deadlock { .. } | Error::PeriodTooShort { .. } => EXIT_INFEASIBLE,
            Error::NonPositivePeriod(_) => EXIT_USAGE,
            Error::ArithmeticOverflow(_) | Error::DivisionByZero => EXIT_INTERNAL,
            _ => EXIT_DATA,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn usage(message: impl Into<String>) -> Failure {
    Failure {
        code: EXIT_USAGE,
        message: message.into(),
    }
}

fn io_failure(path: &Path, e: std::io::Error) -> Failure {
    Failure {
        code: EXIT_DATA,
        message: format!("{}: {e}", path.display()),
    }
}

fn write_file(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text).map_err(|e| Failure {
        code: EXIT_INTERNAL,
        message: format!("cannot write {}: {e}", path.display()),
    })
}

fn create_dir(dir: &Path) -> Result<(), Failure> {
    fs::create_dir_all(dir).map_err(|e| Failure {
        code: EXIT_INTERNAL,
        message: format!("cannot create {}: {e}", dir.display()),
    })
}

/// `23 (exact 23/1)` or `3.5 (exact 7/2)`.
fn show(v: &Rational) -> String {
    format!("{} (exact {})", v.to_decimal(DECIMAL_DIGITS), v.to_fraction_string())
}

fn load(path: &Path, annotations: Option<&Path>, cap: u64) -> Result<(String, MarkedGraph), Failure> {
    let (name, sdf) = load_sdf3_file(path, annotations).map_err(|e| match e {
        Error::Io(io) => io_failure(path, io),
        other => other.into(),
    })?;
    Ok((name, unroll(&sdf, cap)?.graph))
}

fn analyze(args: &AnalyzeArgs, out: &mut dyn Write) -> Result<(), Failure> {
    let (name, g) = load(&args.input.graph, args.input.annotations.as_deref(), args.input.cap)?;
    let x = args.x.clone().unwrap_or_else(|| DecisionVector::zeros(g.groups()));
    g.check_decisions(&x)?;
    let model = TimingModel::new(&g)?;
    let p_min = model.min_period(&x)?;
    let period = match &args.period {
        Some(p) if !p.is_positive() => return Err(usage(format!("--period must be positive, got {p}"))),
        Some(p) => p.clone(),
        None => p_min.clone(),
    };
    let schedule = model.schedule(&x, &period)?;
    let mut text = format!("graph {name}: {} actors, {} decision groups\n", g.len(), g.groups());
    text += &format!("x = {x}\n");
    text += &format!("P = {}\n", show(&p_min));
    if args.period.is_some() {
        text += &format!("scheduled at P = {}\n", show(&period));
    }
    text += "actor\tmode\ttau\tenergy\n";
    let mut total = Rational::zero();
    for (a, tau) in g.actors().iter().zip(&schedule.starts) {
        let sp = x.get(a.group);
        let e = actor_energy(a, sp, &period)?;
        text += &format!(
            "{}\t{}\t{}\t{}\n",
            a.name,
            if sp { "sp" } else { "aa" },
            tau.to_decimal(DECIMAL_DIGITS),
            e.to_decimal(DECIMAL_DIGITS)
        );
        total += e;
    }
    text += &format!("E = {}\n", show(&total));
    if let Some(dir) = &args.out {
        create_dir(dir)?;
        write_file(
            &dir.join("schedule.json"),
            &ScheduleFile::new(x.clone(), schedule.clone()).to_json(),
        )?;
        write_file(&dir.join("gantt.csv"), &gantt_csv(&g, &x, &schedule)?)?;
    }
    emit(out, &text)
}

fn emit(out: &mut dyn Write, text: &str) -> Result<(), Failure> {
    out.write_all(text.as_bytes()).map_err(|e| Failure {
        code: EXIT_INTERNAL,
        message: format!("cannot write output: {e}"),
    })
}

fn explore(args: &ExploreArgs, out: &mut dyn Write) -> Result<(), Failure> {
    if args.strategy == Strategy::Hs && !args.epsilon.is_positive() {
        return Err(usage(format!("--epsilon must be positive, got {}", args.epsilon)));
    }
    let (name, g) = match (&args.graph, args.seed) {
        (Some(path), None) => load(path, args.annotations.as_deref(), args.cap)?,
        (None, Some(seed)) => {
            let sdf = generate_random(&GeneratorParams {
                seed,
                ..Default::default()
            })?;
            (format!("random-{seed}"), unroll(&sdf, args.cap)?.graph)
        }
        _ => return Err(usage("give exactly one of a graph file or --seed")),
    };
    let run = match args.strategy {
        Strategy::Xs => dse_xs(&g, args.group_cap, args.workers)?,
        Strategy::Ps => dse_ps(&g, args.workers)?,
        Strategy::Hs => dse_hs(&g, &args.epsilon)?,
    };
    let (period_min, period_max) = period_bounds(&g)?;
    let front = run.front();
    let mut degenerate = false;
    let ratio = match &args.reference_front {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| io_failure(path, e))?;
            // a reference with no volume leaves the ratio undefined; the
            // exploration itself is still reported
            match compare_fronts(&front, &read_front_file(&text)?) {
                Ok(r) => Some(r),
                Err(Error::Degenerate) => {
                    degenerate = true;
                    None
                }
                Err(e) => return Err(e.into()),
            }
        }
        None => None,
    };
    let report = Report {
        schema: crate::io::annotate::SCHEMA_VERSION,
        graph: name.clone(),
        actors: g.len(),
        groups: g.groups(),
        strategy: args.strategy.as_str().to_string(),
        epsilon: (args.strategy == Strategy::Hs).then(|| args.epsilon.clone()),
        period_min,
        period_max,
        stats: StatsRecord::new(&run.stats, args.timing),
        points: run.points.iter().map(PointRecord::from).collect(),
        front: front.iter().map(PointRecord::from).collect(),
        hypervolume_ratio_decimal: ratio.as_ref().map(|r| r.to_decimal(DECIMAL_DIGITS)),
        hypervolume_ratio: ratio.clone(),
    };
    create_dir(&args.out)?;
    write_file(&args.out.join("points.csv"), &points_csv(&run.points))?;
    write_file(&args.out.join("front.csv"), &points_csv(front.iter()))?;
    write_file(&args.out.join("report.json"), &write_report(&report))?;

    let mut text = format!(
        "graph {name}: {} actors, {} decision groups\nstrategy {}: {} points, {} on the front, {} LP and {} MILP calls\n",
        g.len(),
        g.groups(),
        args.strategy.as_str(),
        run.points.len(),
        front.len(),
        run.stats.lp_calls,
        run.stats.milp_calls
    );
    for p in front.iter() {
        text += &format!(
            "  P = {}\tE = {}\tx = {}\n",
            p.period.to_decimal(DECIMAL_DIGITS),
            p.energy.to_decimal(DECIMAL_DIGITS),
            p.x
        );
    }
    if let Some(r) = &ratio {
        text += &format!("HV = {}\n", show(r));
    } else if degenerate {
        text += "HV undefined: the reference front spans no volume\n";
    }
    emit(out, &text)
}

fn generate(args: &GenArgs, out: &mut dyn Write) -> Result<(), Failure> {
    if args.rate_min < 1 || args.rate_min > args.rate_max {
        return Err(usage(format!(
            "rate range [{}, {}] must be non-empty and start at 1 or more",
            args.rate_min, args.rate_max
        )));
    }
    if args.actors == 0 {
        return Err(usage("--actors must be positive"));
    }
    let params = GeneratorParams {
        actors: args.actors,
        repetition_sum: args.repetition_sum,
        rate_range: (args.rate_min, args.rate_max),
        seed: args.seed,
        ..Default::default()
    };
    let sdf = generate_random(&params)?;
    let q = repetition_vector(&sdf)?;
    let mut ann = Annotations::from_graph(&sdf);
    ann.metadata.insert("rng".into(), RNG_ALGORITHM.into());
    ann.metadata.insert("seed".into(), args.seed.into());
    ann.metadata.insert("repetition_vector".into(), q.clone().into());
    ann.metadata
        .insert("repetition_sum".into(), q.iter().sum::<u64>().into());
    ann.metadata.insert(
        "generator".into(),
        serde_json::to_value(&params).expect("parameters serialize"),
    );
    create_dir(&args.out)?;
    let xml = args.out.join(format!("{}.xml", args.name));
    let side = args.out.join(format!("{}.annotations.json", args.name));
    write_file(&xml, &write_sdf3(&args.name, &sdf))?;
    write_file(&side, &ann.to_json())?;
    emit(
        out,
        &format!(
            "wrote {} and {} ({} actors, repetition sum {})\n",
            xml.display(),
            side.display(),
            sdf.actors().len(),
            q.iter().sum::<u64>()
        ),
    )
}

fn verify(args: &VerifyArgs, out: &mut dyn Write) -> Result<(), Failure> {
    let (_, g) = load(&args.input.graph, args.input.annotations.as_deref(), args.input.cap)?;
    let text = fs::read_to_string(&args.schedule).map_err(|e| io_failure(&args.schedule, e))?;
    let file = ScheduleFile::from_json(&text)?;
    let violations = verify_schedule(&g, &file.x, &file.schedule)?;
    if violations.is_empty() {
        return emit(
            out,
            &format!("ok: schedule valid at P = {}\n", show(&file.schedule.period)),
        );
    }
    let mut message = format!("{} violated constraints:", violations.len());
    for v in &violations {
        message += &format!("\n  {v}");
    }
    Err(Failure {
        code: EXIT_INFEASIBLE,
        message,
    })
}

fn hv(args: &HvArgs, out: &mut dyn Write) -> Result<(), Failure> {
    let read = |p: &Path| -> Result<_, Failure> {
        let text = fs::read_to_string(p).map_err(|e| io_failure(p, e))?;
        Ok(read_front_file(&text)?)
    };
    let ratio = compare_fronts(&read(&args.front)?, &read(&args.reference)?)?;
    emit(out, &format!("HV = {}\n", show(&ratio)))
}

/// Runs the command line and returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if code == EXIT_OK {
                out.write_all(text.as_bytes())
            } else {
                err.write_all(text.as_bytes())
            };
            return code;
        }
    };
    let result = match &cli.command {
        Command::Analyze(a) => analyze(a, out),
        Command::Explore(a) => explore(a, out),
        Command::Gen(a) => generate(a, out),
        Command::Verify(a) => verify(a, out),
        Command::Hv(a) => hv(a, out),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}
