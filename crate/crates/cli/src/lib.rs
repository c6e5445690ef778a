//! Command-line front end: argument parsing, config merging and the five subcommands.
//!
//! Every flag may also be given in a TOML file passed with `--config`. Keys live in a table
//! named after the subcommand; flags on the command line win over the file.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use ksplit_core::ksplit::{glue_driver, split_inf, SplitConfig, SplitWeights};
use ksplit_core::lemma::{default_rhos, verify_lemma, LEMMA_HEADER};
use ksplit_core::oracle::{kconstant_sweep, write_sweep_csv, FreqSet, SolverSettings, SweepSpec, SweepTarget};
use ksplit_core::random::{random_instance, trial_rng, InstanceSpec};
use ksplit_core::report::{save_csv, KeyValues};
use ksplit_core::spectral::SpectralCone;
use ksplit_core::torus::io::{self, TorusData};
use ksplit_core::torus::{Grid1D, TorusFn2D};
use ksplit_core::weights::{
    hypothesis_check, ArcFamily, Condition, HypothesisInput, HypothesisReport, TheoremId, WeightSpec,
};
use ksplit_core::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_WARNING: i32 = 2;
pub const EXIT_USAGE: i32 = 64;

#[derive(Debug, Parser)]
#[command(name = "ksplit", version, about = "Splitting experiments for weighted Hardy-type couples on the torus")]
#[command(args_override_self = true)]
pub struct Cli {
    /// TOML file with one table per subcommand.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Condition constants of a weight, optionally a theorem's hypothesis check.
    CheckWeights(CheckWeightsArgs),
    /// Constructive split of a random or loaded decomposition.
    Split(SplitArgs),
    /// Worst splitting constants along a weight family.
    Sweep(SweepArgs),
    /// The three intermediate couples between (L^1, L^inf) and their constants.
    Glue(GlueArgs),
    /// Poisson-smoothed versus boundary norms of random analytic polynomials.
    VerifyLemma(LemmaArgs),
}

#[derive(Debug, Args)]
pub struct CheckWeightsArgs {
    /// Family name (`const`, `power`, `exp-cos`); ignored when `--weight` is given.
    #[arg(long, default_value = "power")]
    pub family: String,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub center: Option<f64>,
    #[arg(long)]
    pub eps: Option<f64>,
    /// Full weight specification.
    #[arg(long)]
    pub weight: Option<String>,
    #[arg(long, default_value_t = 2.0)]
    pub p: f64,
    /// Reverse Hoelder exponent.
    #[arg(long, default_value_t = 1.0)]
    pub delta: f64,
    #[arg(long, default_value_t = 1024)]
    pub n: usize,
    /// Also check the hypotheses of a theorem on the two-variable grid.
    #[arg(long)]
    pub theorem: Option<String>,
    /// Second weight of the couple for `--theorem`.
    #[arg(long, default_value = "const")]
    pub other: String,
    /// Grid size per axis for `--theorem`.
    #[arg(long, default_value_t = 32)]
    pub n2: usize,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SplitArgs {
    /// Exponent `p`; the couple is `(L^1(w1), L^q(w2))` with `q = p / (p - 1)`.
    #[arg(long, default_value_t = 2.0)]
    pub p: f64,
    #[arg(long, default_value = "const")]
    pub w1: String,
    #[arg(long, default_value = "const")]
    pub w2: String,
    /// Factor `a(z2)` of the norms.
    #[arg(long)]
    pub a: Option<String>,
    /// Factor `b(z1)` of the `L^q` norm.
    #[arg(long)]
    pub b: Option<String>,
    #[arg(long, default_value_t = 64)]
    pub n: usize,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, default_value_t = 6)]
    pub degree: u32,
    /// TORUS file with `g`; requires `--h`, and `f = g + h`.
    #[arg(long, requires = "h")]
    pub g: Option<PathBuf>,
    #[arg(long, requires = "g")]
    pub h: Option<PathBuf>,
    #[arg(long, default_value_t = 2)]
    pub k: u32,
    #[arg(long)]
    pub skip_hypotheses: bool,
    /// Write `g'` and `h'` as TORUS files.
    #[arg(long)]
    pub dump: bool,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Subspaces {
    /// Both subspaces are `m >= 0 and k >= 0`.
    Quadrant,
    /// Both subspaces are the range of `P`.
    P,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Target {
    W1,
    W2,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long, default_value = "power")]
    pub family: String,
    /// Weight specification with a `{}` placeholder for the parameter.
    #[arg(long)]
    pub template: Option<String>,
    #[arg(long, value_delimiter = ',', required = true)]
    pub params: Vec<f64>,
    #[arg(long, default_value_t = 1.0)]
    pub r: f64,
    #[arg(long, default_value_t = 2.0)]
    pub p: f64,
    #[arg(long, default_value_t = 50)]
    pub trials: usize,
    #[arg(long, default_value_t = 32)]
    pub n: usize,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, value_enum, default_value_t = Target::W2)]
    pub target: Target,
    /// The weight that is not swept.
    #[arg(long, default_value = "const")]
    pub other: String,
    #[arg(long, value_enum, default_value_t = Subspaces::Quadrant)]
    pub subspaces: Subspaces,
    /// Also run the constructive splitting (needs `--subspaces p` and `r = 1`).
    #[arg(long)]
    pub constructive: bool,
    #[arg(long, default_value_t = 1200)]
    pub max_iter: usize,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct GlueArgs {
    #[arg(long, default_value = "const")]
    pub w1: String,
    #[arg(long, default_value = "const")]
    pub w2: String,
    #[arg(long, default_value_t = 8)]
    pub n: usize,
    #[arg(long, value_delimiter = ',', default_values_t = [0.2, 0.4, 0.6, 0.8])]
    pub thetas: Vec<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, default_value_t = 1500)]
    pub max_iter: usize,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct LemmaArgs {
    #[arg(long, default_value_t = 0.5)]
    pub r: f64,
    #[arg(long, default_value = "power:0.3")]
    pub weight: String,
    #[arg(long, default_value_t = 1024)]
    pub n: usize,
    #[arg(long, default_value_t = 50)]
    pub trials: usize,
    #[arg(long, default_value_t = 8)]
    pub degree: u32,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

/// Failure of a run, with the exit code it maps to.
#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Run(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::SpecParse { .. } | Error::UnknownTheorem(_) | Error::BadGridSize(_) => Failure::Usage(e.to_string()),
            other => Failure::Run(other),
        }
    }
}

impl Failure {
    pub fn code(&self) -> i32 {
        match self {
            Failure::Usage(_) => EXIT_USAGE,
            Failure::Run(_) => EXIT_ERROR,
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Usage(m) => write!(f, "usage error: {m}"),
            Failure::Run(e) => write!(f, "error: {e}"),
        }
    }
}

type Outcome = std::result::Result<bool, Failure>;

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

fn config_path(args: &[OsString]) -> Option<PathBuf> {
    let mut it = args.iter().skip(1);
    while let Some(a) = it.next() {
        let s = a.to_string_lossy();
        if s == "--config" {
            return it.next().map(PathBuf::from);
        }
        if let Some(rest) = s.strip_prefix("--config=") {
            return Some(PathBuf::from(rest));
        }
    }
    None
}

fn subcommand_index(args: &[OsString]) -> Option<usize> {
    const NAMES: [&str; 5] = ["check-weights", "split", "sweep", "glue", "verify-lemma"];
    args.iter().position(|a| NAMES.contains(&a.to_string_lossy().as_ref()))
}

fn toml_scalar(key: &str, v: &toml::Value) -> std::result::Result<String, Failure> {
    match v {
        toml::Value::String(s) => Ok(s.clone()),
        toml::Value::Integer(i) => Ok(i.to_string()),
        toml::Value::Float(x) => Ok(x.to_string()),
        toml::Value::Array(items) => items
            .iter()
            .map(|i| toml_scalar(key, i))
            .collect::<std::result::Result<Vec<_>, _>>()
            .map(|v| v.join(",")),
        _ => Err(usage(format!("config key `{key}` has an unsupported type"))),
    }
}

/// Inserts the config file's options for the chosen subcommand right after its name, so that
/// later command-line occurrences override them.
pub fn merge_config(args: Vec<OsString>) -> std::result::Result<Vec<OsString>, Failure> {
    let Some(path) = config_path(&args) else {
        return Ok(args);
    };
    let text = fs::read_to_string(&path).map_err(|e| usage(format!("cannot read config {}: {e}", path.display())))?;
    let table: toml::Table = text
        .parse()
        .map_err(|e| usage(format!("config {} is not valid TOML: {e}", path.display())))?;
    let Some(idx) = subcommand_index(&args) else {
        return Ok(args);
    };
    let name = args[idx].to_string_lossy().into_owned();
    let Some(section) = table.get(&name) else {
        return Ok(args);
    };
    let section = section
        .as_table()
        .ok_or_else(|| usage(format!("config entry `{name}` must be a table")))?;
    let mut injected = Vec::new();
    for (key, value) in section {
        let flag = format!("--{}", key.replace('_', "-"));
        match value {
            toml::Value::Boolean(true) => injected.push(OsString::from(flag)),
            toml::Value::Boolean(false) => {}
            other => {
                injected.push(OsString::from(flag));
                injected.push(OsString::from(toml_scalar(key, other)?));
            }
        }
    }
    let mut out = args[..=idx].to_vec();
    out.extend(injected);
    out.extend_from_slice(&args[idx + 1..]);
    Ok(out)
}

/// Caps the global thread pool with `KSPLIT_THREADS` when it is set.
pub fn configure_threads() -> std::result::Result<(), Failure> {
    let Ok(v) = std::env::var("KSPLIT_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| usage(format!("KSPLIT_THREADS must be a positive integer, got `{v}`")))?;
    // A pool that already exists (for instance inside a test harness) is kept as is.
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

/// Parses `args` (including the program name), runs the command and returns the exit code.
pub fn run_from_args(args: Vec<OsString>) -> i32 {
    let args = match merge_config(args) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("{e}");
            return e.code();
        }
    };
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    if let Err(e) = configure_threads() {
        eprintln!("{e}");
        return e.code();
    }
    match run(&cli.command) {
        Ok(true) => EXIT_OK,
        Ok(false) => EXIT_WARNING,
        Err(e) => {
            eprintln!("{e}");
            e.code()
        }
    }
}

/// Runs one command; `Ok(false)` means it finished but a hypothesis check failed.
pub fn run(cmd: &Command) -> Outcome {
    match cmd {
        Command::CheckWeights(a) => check_weights(a),
        Command::Split(a) => split(a),
        Command::Sweep(a) => sweep(a),
        Command::Glue(a) => glue(a),
        Command::VerifyLemma(a) => lemma(a),
    }
}

fn ensure_dir(dir: &Path) -> std::result::Result<(), Failure> {
    fs::create_dir_all(dir).map_err(|source| {
        Failure::Run(Error::Io {
            path: dir.to_path_buf(),
            source,
        })
    })
}

fn grid(n: usize) -> std::result::Result<Grid1D, Failure> {
    Ok(Grid1D::new(n)?)
}

fn seed(s: Option<u64>, command: &str) -> std::result::Result<u64, Failure> {
    s.ok_or_else(|| usage(format!("{command} draws random data and needs --seed")))
}

fn parse_spec(s: &str) -> std::result::Result<WeightSpec, Failure> {
    Ok(s.parse::<WeightSpec>()?)
}

fn family_spec(a: &CheckWeightsArgs) -> std::result::Result<WeightSpec, Failure> {
    if let Some(w) = &a.weight {
        return parse_spec(w);
    }
    let mut text = a.family.clone();
    match a.family.as_str() {
        "power" => {
            let alpha = a.alpha.ok_or_else(|| usage("--family power needs --alpha"))?;
            text = format!("power alpha={alpha}");
            if let Some(c) = a.center {
                text.push_str(&format!(" center={c}"));
            }
        }
        "exp-cos" => {
            let eps = a.eps.ok_or_else(|| usage("--family exp-cos needs --eps"))?;
            text = format!("exp-cos eps={eps}");
        }
        _ => {}
    }
    parse_spec(&text)
}

fn print_hypotheses(rep: &HypothesisReport) {
    for f in rep.failures() {
        eprintln!(
            "warning: hypothesis `{}` ({}) measured {:.4} above threshold {}",
            f.name, f.condition, f.constant, f.threshold
        );
    }
}

fn check_weights(a: &CheckWeightsArgs) -> Outcome {
    let spec = family_spec(a)?;
    let theorem = a.theorem.as_deref().map(str::parse::<TheoremId>).transpose()?;
    let g = grid(a.n)?;
    let w = spec.build_1d(g)?;
    let fam = ArcFamily::dyadic(a.n);
    let conditions = [
        Condition::Ap(a.p),
        Condition::A1,
        Condition::ReverseHolder(a.delta),
        Condition::BmoLog,
    ];
    let mut rows = Vec::new();
    println!("{:<16} {:>14}", "condition", "constant");
    for c in conditions {
        let value = w.condition_constant(c, &fam)?;
        println!("{:<16} {:>14.6}", c.to_string(), value);
        rows.push(vec![
            spec.to_string(),
            a.n.to_string(),
            c.to_string(),
            value.to_string(),
            fam.len().to_string(),
        ]);
    }
    ensure_dir(&a.out)?;
    save_csv(&a.out.join("weights.csv"), &["weight", "n", "condition", "constant", "arcs"], &rows)?;

    let Some(theorem) = theorem else {
        return Ok(true);
    };
    let g2 = grid(a.n2)?;
    let w1 = spec.build_2d(g2, g2)?;
    let w2 = parse_spec(&a.other)?.build_2d(g2, g2)?;
    let rep = hypothesis_check(theorem, &HypothesisInput::new(w1, w2, a.p))?;
    let mut kv = KeyValues::new();
    kv.push("weight", &spec);
    kv.push("other", &a.other);
    kv.push("n", a.n2);
    kv.push("p", a.p);
    kv.extend(rep.to_key_values(""));
    kv.save(&a.out.join("hypothesis.txt"))?;
    print_hypotheses(&rep);
    Ok(rep.all_pass())
}

fn load_2d(path: &Path) -> std::result::Result<TorusFn2D, Failure> {
    match io::load(path)? {
        TorusData::Two(f) => Ok(f),
        TorusData::One(_) => Err(usage(format!("{} holds a one-variable function", path.display()))),
    }
}

fn split(a: &SplitArgs) -> Outcome {
    if !(a.p > 1.0) || !a.p.is_finite() {
        return Err(usage(format!("--p must lie in (1, inf), got {}", a.p)));
    }
    let mut cfg = SplitConfig::new(a.p)?;
    cfg.k = a.k;
    cfg.check_hypotheses = !a.skip_hypotheses;
    cfg.validate()?;
    let q = cfg.q;

    let (f, g, h, g1, g2) = match (&a.g, &a.h) {
        (Some(gp), Some(hp)) => {
            let g = load_2d(gp)?;
            let h = load_2d(hp)?;
            if g.shape() != h.shape() {
                return Err(usage("g and h have different shapes"));
            }
            let f = &g + &h;
            let (g1, g2) = g.grids();
            (f, g, h, g1, g2)
        }
        _ => {
            let gr = grid(a.n)?;
            let w1 = parse_spec(&a.w1)?.build_2d(gr, gr)?;
            let w2 = parse_spec(&a.w2)?.build_2d(gr, gr)?;
            let spec = InstanceSpec {
                y1: SpectralCone::P.into(),
                y2: SpectralCone::P.into(),
                w1: &w1,
                w2: &w2,
                r: 1.0,
                p: q,
                degree: a.degree.min((a.n / 2 - 1) as u32),
            };
            let inst = random_instance(&mut trial_rng(seed(a.seed, "split")?, 0), gr, gr, &spec)?;
            (inst.f, inst.g, inst.h, gr, gr)
        }
    };
    let w1 = parse_spec(&a.w1)?.build_2d(g1, g2)?;
    let w2 = parse_spec(&a.w2)?.build_2d(g1, g2)?;
    let av = a.a.as_deref().map(|s| parse_spec(s)?.build_1d(g2).map_err(Failure::from)).transpose()?;
    let bv = a.b.as_deref().map(|s| parse_spec(s)?.build_1d(g1).map_err(Failure::from)).transpose()?;
    let weights = SplitWeights::reduce(&w1, &w2, av, bv, q)?;
    let rep = split_inf(&f, &g, &h, &weights, &cfg)?;

    let mut kv = KeyValues::new();
    kv.push("command", "split");
    kv.push("w1", &a.w1);
    kv.push("w2", &a.w2);
    kv.push("seed", a.seed.map(|s| s.to_string()).unwrap_or_else(|| "none".into()));
    kv.push("membership_tol", cfg.membership_tol);
    kv.extend(rep.to_key_values().0);
    ensure_dir(&a.out)?;
    kv.save(&a.out.join("split.txt"))?;
    if a.dump {
        io::save(&a.out.join("g_prime.torus"), &rep.g_prime)?;
        io::save(&a.out.join("h_prime.torus"), &rep.h_prime)?;
    }
    println!("c1: {}", rep.c1);
    println!("c2: {}", rep.c2);
    println!("leakage: {:e} / {:e}", rep.leakage_g, rep.leakage_h);
    if let Some(h) = &rep.hypothesis {
        print_hypotheses(h);
    }
    Ok(rep.hypotheses_hold())
}

fn sweep(a: &SweepArgs) -> Outcome {
    let template = match &a.template {
        Some(t) => t.clone(),
        None => match a.family.as_str() {
            "power" => "power alpha={}".to_string(),
            "exp-cos" => "exp-cos eps={}".to_string(),
            "const" => "const value={}".to_string(),
            other => return Err(usage(format!("family `{other}` needs --template"))),
        },
    };
    let mut spec = SweepSpec::new(&a.family, &template, a.params.clone(), a.r, a.p, a.trials, a.n, seed(a.seed, "sweep")?);
    spec.target = match a.target {
        Target::W1 => SweepTarget::W1,
        Target::W2 => SweepTarget::W2,
    };
    spec.other = parse_spec(&a.other)?;
    let set: FreqSet = match a.subspaces {
        Subspaces::Quadrant => SpectralCone::QUADRANT.into(),
        Subspaces::P => SpectralCone::P.into(),
    };
    spec.y1 = set;
    spec.y2 = set;
    spec.constructive = a.constructive;
    spec.settings.max_iter = a.max_iter;
    spec.weight_spec(a.params.first().copied().unwrap_or(0.0))?;
    grid(a.n)?;
    let rows = kconstant_sweep(&spec)?;
    ensure_dir(&a.out)?;
    let path = a.out.join("sweep.csv");
    let file = fs::File::create(&path).map_err(|source| Failure::Run(Error::Io { path: path.clone(), source }))?;
    write_sweep_csv(std::io::BufWriter::new(file), &rows)?;
    for r in &rows {
        println!("{} = {:<8} oracle_max = {:.6}", a.family, r.param, r.oracle_max);
    }
    Ok(true)
}

fn glue(a: &GlueArgs) -> Outcome {
    let thetas: [f64; 4] = a
        .thetas
        .as_slice()
        .try_into()
        .map_err(|_| usage(format!("--thetas needs exactly four values, got {}", a.thetas.len())))?;
    let gr = grid(a.n)?;
    let w1 = parse_spec(&a.w1)?.build_2d(gr, gr)?;
    let w2 = parse_spec(&a.w2)?.build_2d(gr, gr)?;
    let seed = seed(a.seed, "glue")?;
    let spec = InstanceSpec {
        y1: SpectralCone::QUADRANT.into(),
        y2: SpectralCone::QUADRANT.into(),
        w1: &w1,
        w2: &w2,
        r: 1.0,
        p: f64::INFINITY,
        degree: 3.min((a.n / 2 - 1) as u32),
    };
    let inst = random_instance(&mut trial_rng(seed, 0), gr, gr, &spec)?;
    let settings = SolverSettings {
        max_iter: a.max_iter,
        seed,
        ..SolverSettings::default()
    };
    let rep = glue_driver(&inst.f, &inst.g, &inst.h, &w1, &w2, thetas, settings, seed.wrapping_add(1))?;
    let mut kv = KeyValues::new();
    kv.push("command", "glue");
    kv.push("w1", &a.w1);
    kv.push("w2", &a.w2);
    kv.push("n", a.n);
    kv.push("seed", seed);
    kv.extend(rep.to_key_values().0);
    ensure_dir(&a.out)?;
    kv.save(&a.out.join("glue.txt"))?;
    for c in rep.couples.iter().chain(std::iter::once(&rep.endpoint)) {
        println!("{:<28} c1 = {:.6}  c2 = {:.6}  ({})", c.label, c.c1, c.c2, c.method);
    }
    print_hypotheses(&rep.hypothesis);
    Ok(rep.hypothesis.all_pass())
}

fn lemma(a: &LemmaArgs) -> Outcome {
    let spec = parse_spec(&a.weight)?;
    let w = spec.build_1d(grid(a.n)?)?;
    let seed = seed(a.seed, "verify-lemma")?;
    let rows = verify_lemma(&w, a.r, a.trials, a.degree, &default_rhos(), seed)?;
    let header: Vec<&str> = ["weight", "n", "r", "seed"].into_iter().chain(LEMMA_HEADER).collect();
    let records: Vec<Vec<String>> = rows
        .iter()
        .map(|row| {
            [spec.to_string(), a.n.to_string(), a.r.to_string(), seed.to_string()]
                .into_iter()
                .chain(row.record())
                .collect()
        })
        .collect();
    ensure_dir(&a.out)?;
    save_csv(&a.out.join("lemma.csv"), &header, &records)?;
    let lo = rows.iter().map(|r| r.ratio).fold(f64::INFINITY, f64::min);
    let hi = rows.iter().map(|r| r.ratio).fold(0.0, f64::max);
    println!("sup_rho smoothed / boundary over {} polynomials: [{lo:.6}, {hi:.6}]", rows.len());
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn os(args: &[&str]) -> Vec<OsString> {
        args.iter().map(OsString::from).collect()
    }

    #[test]
    fn finds_config_in_both_forms() {
        assert_eq!(config_path(&os(&["ksplit", "--config", "a.toml", "glue"])), Some("a.toml".into()));
        assert_eq!(config_path(&os(&["ksplit", "glue", "--config=b.toml"])), Some("b.toml".into()));
        assert_eq!(config_path(&os(&["ksplit", "glue"])), None);
    }

    #[test]
    fn parse_errors_map_to_usage() {
        let e: Failure = "bogus".parse::<WeightSpec>().unwrap_err().into();
        assert_eq!(e.code(), EXIT_USAGE);
        let e: Failure = "nope".parse::<TheoremId>().unwrap_err().into();
        assert_eq!(e.code(), EXIT_USAGE);
    }

    #[test]
    fn scalars_render_as_flag_values() {
        let v: toml::Value = toml::Value::Array(vec![1.into(), 0.25.into()]);
        assert_eq!(toml_scalar("params", &v).unwrap(), "1,0.25");
        assert!(toml_scalar("x", &toml::Value::Table(Default::default())).is_err());
    }
}
