use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use ptmatch::engine::{self, instantiate, EngineError, EngineOptions};
use ptmatch::polyhedron::Bound;
use ptmatch::io::{self, IoError, PlotBox};
use ptmatch::model::{ParamValuation, Pta, TimedWord};
use ptmatch::oracle::brute_force_match_set;
use ptmatch::rational::to_display_string;
use ptmatch::transform::{SymbolicOptions, TransformError};
use ptmatch::{gen, Direction};

#[derive(Parser)]
#[command(name = "ptmatch", version, about = "Parametric timed pattern matching on timed event logs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute the match set of a pattern on a timed word.
    Match(MatchArgs),
    /// Minimize or maximize one parameter over the match set.
    Opt(OptArgs),
    /// Brute-force match set at a fixed valuation, optionally checked against a stored result.
    Oracle(OracleArgs),
    /// Generate a benchmark word.
    Gen(GenArgs),
    /// Export a 2-D projection of a stored result as CSV.
    Project(ProjectArgs),
    /// Run match or opt over every `.tw` file of a directory.
    Bench(BenchArgs),
}

#[derive(Args)]
struct Inputs {
    /// Pattern file (`.pat.json`).
    #[arg(long)]
    pattern: PathBuf,
    /// Timed word file (`.tw`).
    #[arg(long)]
    word: PathBuf,
}

#[derive(Args, Clone, Copy)]
struct Tuning {
    /// Drop accepting zones already covered by the result.
    #[arg(long)]
    subsumption: bool,
    /// Reuse a pattern clock instead of adding a fresh one.
    #[arg(long)]
    reuse_clock: bool,
    /// Abort after this many symbolic states.
    #[arg(long)]
    state_limit: Option<usize>,
}

impl Tuning {
    fn options(self) -> EngineOptions {
        EngineOptions {
            subsumption: self.subsumption,
            state_limit: self.state_limit,
            symbolic: SymbolicOptions {
                reuse_clock: self.reuse_clock,
            },
        }
    }
}

#[derive(Args)]
struct MatchArgs {
    #[command(flatten)]
    inputs: Inputs,
    /// Fix every parameter, e.g. `p1=1,p2=0.5`.
    #[arg(long)]
    valuation: Option<String>,
    #[command(flatten)]
    tuning: Tuning,
    /// Result file (`.match.json`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also print the disjuncts.
    #[arg(long)]
    show: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum Dir {
    Min,
    Max,
}

impl From<Dir> for Direction {
    fn from(d: Dir) -> Direction {
        match d {
            Dir::Min => Direction::Min,
            Dir::Max => Direction::Max,
        }
    }
}

#[derive(Args)]
struct OptArgs {
    #[command(flatten)]
    inputs: Inputs,
    #[arg(long)]
    param: String,
    #[arg(long, value_enum)]
    direction: Dir,
    #[command(flatten)]
    tuning: Tuning,
}

#[derive(Args)]
struct OracleArgs {
    #[command(flatten)]
    inputs: Inputs,
    #[arg(long)]
    valuation: String,
    /// Stored parametric result to check.
    #[arg(long)]
    compare: Option<PathBuf>,
}

#[derive(Args)]
struct GenArgs {
    #[arg(value_enum)]
    kind: WordKind,
    #[arg(long)]
    events: usize,
    #[arg(long, default_value_t = 0)]
    seed: u32,
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum WordKind {
    Blowup,
    Gear,
}

#[derive(Args)]
struct ProjectArgs {
    #[arg(long)]
    input: PathBuf,
    /// Two variable names, e.g. `p1,p2`.
    #[arg(long)]
    vars: String,
    /// Plot window `x0,x1,y0,y1`.
    #[arg(long = "box")]
    window: String,
    #[arg(long)]
    out: PathBuf,
    /// Also write a gnuplot script drawing the CSV.
    #[arg(long)]
    gnuplot: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Match,
    Opt,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long)]
    pattern: PathBuf,
    #[arg(long)]
    words: PathBuf,
    #[arg(long, value_enum, default_value_t = Mode::Match)]
    mode: Mode,
    /// Parameter to optimize in `opt` mode.
    #[arg(long)]
    param: Option<String>,
    #[arg(long, value_enum, default_value_t = Dir::Min)]
    direction: Dir,
    #[command(flatten)]
    tuning: Tuning,
    /// Also write the table to this file.
    #[arg(long)]
    out: Option<PathBuf>,
}

/// A failure with its exit code.
#[derive(Debug)]
struct Failure {
    code: u8,
    msg: String,
}

impl Failure {
    fn parse(msg: impl ToString) -> Self {
        Failure { code: 2, msg: msg.to_string() }
    }
    fn ill_formed(msg: impl ToString) -> Self {
        Failure { code: 3, msg: msg.to_string() }
    }
    fn argument(msg: impl ToString) -> Self {
        Failure { code: 4, msg: msg.to_string() }
    }
}

impl From<IoError> for Failure {
    fn from(e: IoError) -> Self {
        match e {
            IoError::UnknownVar(_) | IoError::BadBox(_) => Failure::argument(e),
            _ => Failure::parse(e),
        }
    }
}

impl From<EngineError> for Failure {
    fn from(e: EngineError) -> Self {
        match e {
            EngineError::Transform(TransformError::Model(_)) => Failure::parse(e),
            EngineError::Transform(_) => Failure::ill_formed(e),
            EngineError::UnknownParam(_) | EngineError::StateLimit(_) => Failure::argument(e),
            _ => Failure { code: 1, msg: e.to_string() },
        }
    }
}

type Outcome = Result<(), Failure>;

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::parse(format!("{}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> Outcome {
    fs::write(path, text).map_err(|e| Failure { code: 1, msg: format!("{}: {e}", path.display()) })
}

struct Loaded {
    pattern: Pta,
    word: TimedWord,
    parse_seconds: f64,
}

fn load(pattern: &Path, word: &Path) -> Result<Loaded, Failure> {
    let started = Instant::now();
    let pattern = io::parse_pattern(&read(pattern)?)?;
    let word = io::parse_word(&read(word)?)?;
    Ok(Loaded {
        pattern,
        word,
        parse_seconds: started.elapsed().as_secs_f64(),
    })
}

/// Parses a valuation that must assign exactly the pattern's parameters.
fn total_valuation(text: &str, pattern: &Pta) -> Result<ParamValuation, Failure> {
    let v = io::parse_valuation(text).map_err(Failure::argument)?;
    if let Some(extra) = v.keys().find(|k| !pattern.params.contains(k)) {
        return Err(Failure::argument(format!("unknown parameter `{extra}`")));
    }
    if let Some(missing) = pattern.params.iter().find(|p| !v.contains_key(*p)) {
        return Err(Failure::argument(format!("no value for parameter `{missing}`")));
    }
    Ok(v)
}

const STATS_HEADER: &str = "states\tmatches\tparse_s\tcomp_s";

fn stats_row(states: usize, matches: usize, parse: f64, comp: f64) -> String {
    format!("{states}\t{matches}\t{parse:.3}\t{comp:.3}")
}

fn cmd_match(a: MatchArgs) -> Outcome {
    let l = load(&a.inputs.pattern, &a.inputs.word)?;
    let opts = a.tuning.options();
    let m = match &a.valuation {
        Some(text) => {
            let v = total_valuation(text, &l.pattern)?;
            engine::match_set_fixed(&l.pattern, &l.word, &v, &opts)?
        }
        None => engine::match_set(&l.pattern, &l.word, &opts)?,
    };
    if let Some(out) = &a.out {
        write(out, &io::write_result(&m))?;
    }
    println!("{STATS_HEADER}");
    println!(
        "{}",
        stats_row(m.stats.states, m.stats.matches, l.parse_seconds, m.stats.comp_seconds)
    );
    if a.show {
        print!("{}", io::result_text(&m));
    }
    Ok(())
}

fn describe_optimum(param: &str, dir: Direction, optimum: &Option<Bound>) -> String {
    match (optimum, dir) {
        (None, _) => "infeasible".to_string(),
        (Some(Bound::Unbounded), Direction::Min) => format!("{param} unbounded below"),
        (Some(Bound::Unbounded), Direction::Max) => format!("{param} unbounded above"),
        (Some(Bound::Finite { value, strict }), dir) => {
            let v = to_display_string(value);
            match (dir, strict) {
                (Direction::Min, true) => format!("{param} > {v} (infimum, not attained)"),
                (Direction::Min, false) => format!("{param} >= {v} (minimum, attained)"),
                (Direction::Max, true) => format!("{param} < {v} (supremum, not attained)"),
                (Direction::Max, false) => format!("{param} <= {v} (maximum, attained)"),
            }
        }
    }
}

fn cmd_opt(a: OptArgs) -> Outcome {
    let l = load(&a.inputs.pattern, &a.inputs.word)?;
    let dir = a.direction.into();
    let r = engine::optimize(&l.pattern, &l.word, &a.param, dir, &a.tuning.options())?;
    println!("{}", describe_optimum(&a.param, dir, &r.optimum));
    println!("states\tparse_s\tcomp_s");
    println!(
        "{}\t{:.3}\t{:.3}",
        r.stats.states, l.parse_seconds, r.stats.comp_seconds
    );
    Ok(())
}

fn cmd_oracle(a: OracleArgs) -> Outcome {
    let l = load(&a.inputs.pattern, &a.inputs.word)?;
    let v = total_valuation(&a.valuation, &l.pattern)?;
    let brute = brute_force_match_set(&l.word, &l.pattern, &v).map_err(Failure::ill_formed)?;
    let Some(path) = &a.compare else {
        if brute.is_empty() {
            println!("no match");
        }
        for d in brute.disjuncts() {
            println!("{d}");
        }
        return Ok(());
    };
    let stored = io::parse_result(&read(path)?)?;
    let at = instantiate(&stored.set, &v).map_err(Failure::argument)?;
    if at.space().names() != brute.space().names() {
        return Err(Failure::parse("stored result does not range over t, t_prime"));
    }
    let missing = brute.difference(&at).map_err(Failure::parse)?;
    let spurious = at.difference(&brute).map_err(Failure::parse)?;
    if missing.is_empty() && spurious.is_empty() {
        println!("SEMANTICALLY-EQUAL");
        return Ok(());
    }
    let mut msg = String::from("MISMATCH");
    for d in missing.disjuncts() {
        let _ = write!(msg, "\nmissing from stored result: {d}");
    }
    for d in spurious.disjuncts() {
        let _ = write!(msg, "\nnot a match: {d}");
    }
    println!("{msg}");
    Err(Failure { code: 5, msg: "result disagrees with the oracle".into() })
}

fn cmd_gen(a: GenArgs) -> Outcome {
    let w = match a.kind {
        WordKind::Blowup => {
            if a.events < 2 || !a.events.is_multiple_of(2) {
                return Err(Failure::parse("blowup words need an even number of events, at least 2"));
            }
            gen::blowup_word(a.events, a.seed)
        }
        WordKind::Gear => gen::gear_word(a.events, a.seed),
    };
    let text = io::write_word(&w);
    match &a.out {
        Some(p) => write(p, &text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn cmd_project(a: ProjectArgs) -> Outcome {
    let m = io::parse_result(&read(&a.input)?)?;
    let (x, y) = a
        .vars
        .split_once(',')
        .map(|(x, y)| (x.trim(), y.trim()))
        .ok_or_else(|| Failure::argument("--vars expects two names separated by a comma"))?;
    let window = PlotBox::parse(&a.window)?;
    let polys = io::project_2d(&m.set, x, y, &window)?;
    write(&a.out, &io::polygons_csv(&polys)?)?;
    if let Some(script) = &a.gnuplot {
        write(script, &io::gnuplot_script(&a.out.to_string_lossy(), x, y, &window))?;
    }
    println!("polygons\t{}", polys.len());
    Ok(())
}

fn bench_row(path: &Path, pattern: &Pta, a: &BenchArgs) -> Result<String, Failure> {
    let started = Instant::now();
    let word = io::parse_word(&read(path)?)?;
    let parse = started.elapsed().as_secs_f64();
    let opts = a.tuning.options();
    let (states, matches, comp, extra) = match a.mode {
        Mode::Match => {
            let m = engine::match_set(pattern, &word, &opts)?;
            (m.stats.states, m.stats.matches.to_string(), m.stats.comp_seconds, String::new())
        }
        Mode::Opt => {
            let param = a.param.as_deref().ok_or_else(|| Failure::argument("opt mode needs --param"))?;
            let dir = a.direction.into();
            let r = engine::optimize(pattern, &word, param, dir, &opts)?;
            let best = describe_optimum(param, dir, &r.optimum);
            (r.stats.states, "-".to_string(), r.stats.comp_seconds, best)
        }
    };
    let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    Ok(format!(
        "{name}\t{}\t{states}\t{matches}\t{parse:.3}\t{comp:.3}\t{extra}",
        word.len()
    ))
}

fn cmd_bench(a: BenchArgs) -> Outcome {
    let pattern = io::parse_pattern(&read(&a.pattern)?)?;
    if matches!(a.mode, Mode::Opt) && a.param.is_none() {
        return Err(Failure::argument("opt mode needs --param"));
    }
    let entries = fs::read_dir(&a.words).map_err(|e| Failure::argument(format!("{}: {e}", a.words.display())))?;
    let mut files: Vec<PathBuf> = entries
        .filter_map(Result::ok)
        .map(|e| e.path())
        .filter(|p| p.extension().is_some_and(|x| x == "tw"))
        .collect();
    files.sort();
    let mut table = String::from("word\tevents\tstates\tmatches\tparse_s\tcomp_s\toptimum\n");
    for f in &files {
        match bench_row(f, &pattern, &a) {
            Ok(row) => {
                table.push_str(&row);
                table.push('\n');
            }
            Err(e) => eprintln!("{}: {}", f.display(), e.msg),
        }
    }
    print!("{table}");
    if let Some(out) = &a.out {
        write(out, &table)?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(4),
            };
        }
    };
    let outcome = match cli.command {
        Command::Match(a) => cmd_match(a),
        Command::Opt(a) => cmd_opt(a),
        Command::Oracle(a) => cmd_oracle(a),
        Command::Gen(a) => cmd_gen(a),
        Command::Project(a) => cmd_project(a),
        Command::Bench(a) => cmd_bench(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.msg);
            ExitCode::from(f.code)
        }
    }
}
