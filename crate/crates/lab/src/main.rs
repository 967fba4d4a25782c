use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use num_rational::BigRational;
use serde::Serialize;
use serde_json::{json, Map, Value};

use uniconvex::convexseq::{
    construct_dirichlet_like, construct_small_alpha, dirichlet_knots, small_alpha_knots,
    ConvexSequence,
};
use uniconvex::expsum::{Direction, GridSpec};
use uniconvex::interp::{knots_from_sequence, ConvexInterpolant, Mode};
use uniconvex::rational::{count_fractions, enumerate_fractions};
use uniconvex::regress::regress;

use uniconvex_lab::checks::interpolant_invariants;
use uniconvex_lab::config::{Format, RunConfig};
use uniconvex_lab::experiments::{
    intersection_scan, norm_slope, run_experiment, ExperimentConfig, ExperimentId,
    DEFAULT_GRID_BUDGET,
};
use uniconvex_lab::grid::{
    eval_grid, level_report_from_sweep, norm_from_sweep, refine, sweep, FastPath,
};
use uniconvex_lab::io;

#[derive(Parser, Debug)]
#[command(name = "uniconvex", version, about = "Uniformly convex sequences and their exponential sums")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Global {
    /// Sequence length; a comma-separated list where a command takes several.
    #[arg(long = "N", global = true, value_delimiter = ',')]
    n: Vec<usize>,
    /// Lattice exponent; a comma-separated list where a command takes several.
    #[arg(long, global = true, value_delimiter = ',', allow_negative_numbers = true)]
    alpha: Vec<f64>,
    /// Cap on grid nodes per sweep.
    #[arg(long, global = true, default_value_t = DEFAULT_GRID_BUDGET)]
    grid_budget: u64,
    /// Lattice-membership tolerance for float hit counting.
    #[arg(long, global = true)]
    tol: Option<f64>,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Output file; standard output when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Worker threads; results do not depend on this.
    #[arg(long, global = true, env = "UNICONVEX_THREADS")]
    threads: Option<usize>,
    #[arg(long, global = true, value_enum, default_value_t = FastPath::Auto)]
    fast_path: FastPath,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build a sequence and write it as CSV, with its hit certificate.
    Construct {
        #[arg(long, value_enum, default_value_t = Method::Auto)]
        method: Method,
        /// Hit certificate path; defaults to `<out>.hits.json`.
        #[arg(long)]
        hits: Option<PathBuf>,
    },
    /// Check uniform convexity of a sequence CSV. Exits 2 on failure.
    Validate {
        input: PathBuf,
        /// Also check a hit certificate against the sequence.
        #[arg(long)]
        hits: Option<PathBuf>,
    },
    /// Build an interpolant, dump it and run the invariant suite.
    Interp {
        /// Sequence CSV; without it the construction knots for --N/--alpha are used.
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Method::Auto)]
        method: Method,
        #[arg(long, value_enum, default_value_t = ModeArg::C2)]
        mode: ModeArg,
        /// Interpolant JSON path; embedded in the report when absent.
        #[arg(long)]
        dump: Option<PathBuf>,
    },
    /// Enumerate or count reduced fractions in [lo, hi] with bounded denominator.
    Farey {
        #[arg(long)]
        lo: String,
        #[arg(long)]
        hi: String,
        #[arg(long)]
        qmax: u64,
        #[arg(long)]
        count: bool,
    },
    /// Norms and level sets for an exponential-sum spec file.
    Expsum(ExpsumArgs),
    /// Run a witness experiment for each --N.
    Experiment {
        #[arg(value_enum, ignore_case = true)]
        id: ExperimentId,
        #[arg(long, default_value_t = 4.0)]
        p: f64,
    },
    /// Exact hit counts over --N for each --alpha, with log-log slopes.
    Scan,
    /// Log-log least squares on a CSV with columns N,value.
    Regress { input: PathBuf },
}

#[derive(Args, Debug)]
struct ExpsumArgs {
    spec: PathBuf,
    #[arg(long, default_value = "t")]
    direction: Direction,
    #[arg(long, default_value_t = 4.0)]
    p: f64,
    #[arg(long, default_value_t = 1)]
    refine: usize,
    #[arg(long)]
    x_lo: Option<f64>,
    #[arg(long)]
    x_hi: Option<f64>,
    #[arg(long)]
    mx: Option<usize>,
    #[arg(long)]
    t_lo: Option<f64>,
    #[arg(long)]
    t_hi: Option<f64>,
    #[arg(long)]
    mt: Option<usize>,
    /// Also write |f| on the grid as a binary matrix.
    #[arg(long)]
    dump: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum Method {
    /// `small-alpha` for alpha ≤ 1/2, `dirichlet` above.
    Auto,
    Dirichlet,
    SmallAlpha,
}

impl Method {
    fn resolve(self, alpha: f64) -> Self {
        match self {
            Self::Auto if alpha <= 0.5 => Self::SmallAlpha,
            Self::Auto => Self::Dirichlet,
            m => m,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum ModeArg {
    C1,
    C2,
}

/// Outcome of a command that completed without an error.
enum Outcome {
    Ok,
    ValidationFailed,
}

fn main() -> ExitCode {
    // Usage errors exit 1; clap's own code 2 is reserved for validation.
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(Outcome::Ok) => ExitCode::SUCCESS,
        Ok(Outcome::ValidationFailed) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Construct { .. } => "construct",
        Command::Validate { .. } => "validate",
        Command::Interp { .. } => "interp",
        Command::Farey { .. } => "farey",
        Command::Expsum(_) => "expsum",
        Command::Experiment { .. } => "experiment",
        Command::Scan => "scan",
        Command::Regress { .. } => "regress",
    }
}

fn command_args(c: &Command) -> anyhow::Result<Map<String, Value>> {
    let v = match c {
        Command::Construct { method, hits } => json!({ "method": method, "hits": hits }),
        Command::Validate { input, hits } => json!({ "input": input, "hits": hits }),
        Command::Interp {
            input,
            method,
            mode,
            dump,
        } => json!({ "input": input, "method": method, "mode": mode, "dump": dump }),
        Command::Farey { lo, hi, qmax, count } => {
            json!({ "lo": lo, "hi": hi, "qmax": qmax, "count": count })
        }
        Command::Expsum(a) => json!({
            "spec": a.spec, "direction": a.direction.as_str(), "p": a.p, "refine": a.refine,
            "x_lo": a.x_lo, "x_hi": a.x_hi, "mx": a.mx,
            "t_lo": a.t_lo, "t_hi": a.t_hi, "mt": a.mt, "dump": a.dump,
        }),
        Command::Experiment { id, p } => json!({ "id": id, "p": p }),
        Command::Scan => json!({}),
        Command::Regress { input } => json!({ "input": input }),
    };
    match v {
        Value::Object(m) => Ok(m),
        _ => bail!("internal: command arguments are not an object"),
    }
}

fn run(cli: Cli) -> anyhow::Result<Outcome> {
    let g = &cli.global;
    if let Some(t) = g.threads {
        if t == 0 {
            bail!("--threads must be positive");
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .context("starting thread pool")?;
    }
    let config = RunConfig {
        command: command_name(&cli.command).into(),
        n: g.n.clone(),
        alpha: g.alpha.clone(),
        grid_budget: g.grid_budget,
        tol: g.tol,
        seed: g.seed,
        out: g.out.as_ref().map(|p| p.display().to_string()),
        format: g.format.unwrap_or_default(),
        fast_path: g.fast_path,
        args: command_args(&cli.command)?,
    };
    config.validate()?;
    let ctx = Ctx { g, config: &config };
    match &cli.command {
        Command::Construct { method, hits } => ctx.construct(*method, hits.as_deref()),
        Command::Validate { input, hits } => ctx.validate(input, hits.as_deref()),
        Command::Interp {
            input,
            method,
            mode,
            dump,
        } => ctx.interp(input.as_deref(), *method, *mode, dump.as_deref()),
        Command::Farey { lo, hi, qmax, count } => ctx.farey(lo, hi, *qmax, *count),
        Command::Expsum(a) => ctx.expsum(a),
        Command::Experiment { id, p } => ctx.experiment(*id, *p),
        Command::Scan => ctx.scan(),
        Command::Regress { input } => ctx.regress(input),
    }
}

struct Ctx<'a> {
    g: &'a Global,
    config: &'a RunConfig,
}

impl Ctx<'_> {
    fn single_n(&self) -> anyhow::Result<usize> {
        match self.g.n.as_slice() {
            [n] => Ok(*n),
            [] => bail!("--N is required"),
            _ => bail!("--N takes a single value for this command"),
        }
    }

    fn single_alpha(&self) -> anyhow::Result<f64> {
        match self.g.alpha.as_slice() {
            [a] => Ok(*a),
            [] => bail!("--alpha is required"),
            _ => bail!("--alpha takes a single value for this command"),
        }
    }

    fn format(&self, default: Format) -> Format {
        self.g.format.unwrap_or(default)
    }

    fn emit_bytes(&self, bytes: &[u8]) -> anyhow::Result<()> {
        match &self.g.out {
            Some(p) => io::write_atomic(p, bytes),
            None => {
                let mut out = std::io::stdout().lock();
                out.write_all(bytes)?;
                out.flush()?;
                Ok(())
            }
        }
    }

    fn emit_json<T: Serialize>(&self, result: T) -> anyhow::Result<()> {
        self.emit_bytes(io::envelope_json(self.config, result)?.as_bytes())
    }

    fn json_only(&self) -> anyhow::Result<()> {
        if self.format(Format::Json) != Format::Json {
            bail!("--format csv is not available for `{}`", self.config.command);
        }
        Ok(())
    }

    fn build(&self, method: Method) -> anyhow::Result<ConvexSequence> {
        let (n, alpha) = (self.single_n()?, self.single_alpha()?);
        Ok(match method.resolve(alpha) {
            Method::SmallAlpha => construct_small_alpha(n, alpha)?,
            _ => construct_dirichlet_like(n, alpha)?,
        })
    }

    fn construct(&self, method: Method, hits: Option<&Path>) -> anyhow::Result<Outcome> {
        let seq = self.build(method)?;
        match self.format(Format::Csv) {
            Format::Csv => {
                let mut buf = Vec::new();
                io::write_sequence_csv(&seq, &mut buf)?;
                self.emit_bytes(&buf)?;
                let hits_path = hits
                    .map(Path::to_path_buf)
                    .or_else(|| self.g.out.as_ref().map(|o| io::sibling(o, ".hits.json")));
                if let Some(hp) = hits_path {
                    let mut s = serde_json::to_string_pretty(&io::hits_json(&seq))?;
                    s.push('\n');
                    io::write_atomic(&hp, s.as_bytes())?;
                    let meta = io::envelope_json(
                        self.config,
                        json!({ "count": seq.hits().map_or(0, <[_]>::len), "meta": seq.meta() }),
                    )?;
                    io::write_atomic(&io::sibling(&hp, ".meta.json"), meta.as_bytes())?;
                }
            }
            Format::Json => {
                let values: Vec<Value> = seq
                    .values()
                    .iter()
                    .enumerate()
                    .map(|(i, &a)| json!({ "n": i + 1, "a_n": a }))
                    .collect();
                self.emit_json(json!({
                    "meta": seq.meta(),
                    "sequence": values,
                    "hits": io::hits_json(&seq),
                }))?;
            }
        }
        Ok(Outcome::Ok)
    }

    fn validate(&self, input: &Path, hits: Option<&Path>) -> anyhow::Result<Outcome> {
        self.json_only()?;
        let file = fs::File::open(input).with_context(|| format!("opening {}", input.display()))?;
        let mut seq = io::read_sequence_csv(file)?;
        let report = seq.validate()?;
        let mut hits_ok = None;
        if let Some(hp) = hits {
            let text = fs::read_to_string(hp).with_context(|| format!("reading {}", hp.display()))?;
            seq = seq.with_hits(io::read_hits_json(&text)?);
            hits_ok = Some(seq.verify_hits());
        }
        let pass = report.pass && hits_ok != Some(false);
        self.emit_json(json!({ "report": report, "hits_verified": hits_ok, "pass": pass }))?;
        Ok(if pass { Outcome::Ok } else { Outcome::ValidationFailed })
    }

    fn interp(
        &self,
        input: Option<&Path>,
        method: Method,
        mode: ModeArg,
        dump: Option<&Path>,
    ) -> anyhow::Result<Outcome> {
        self.json_only()?;
        let knots = match input {
            Some(p) => {
                let file = fs::File::open(p).with_context(|| format!("opening {}", p.display()))?;
                knots_from_sequence(&io::read_sequence_csv(file)?)?
            }
            None => {
                let (n, alpha) = (self.single_n()?, self.single_alpha()?);
                match method.resolve(alpha) {
                    Method::SmallAlpha => small_alpha_knots(n, alpha)?.0,
                    _ => dirichlet_knots(n, alpha)?.0,
                }
            }
        };
        let f = match mode {
            ModeArg::C1 => ConvexInterpolant::build_c1(&knots)?,
            ModeArg::C2 => ConvexInterpolant::build_c2(&knots)?,
        };
        debug_assert_eq!(f.mode() == Mode::C2, mode == ModeArg::C2);
        let report = interpolant_invariants(&f)?;
        let interpolant = match dump {
            Some(p) => {
                let mut s = serde_json::to_string(&f)?;
                s.push('\n');
                io::write_atomic(p, s.as_bytes())?;
                Value::String(p.display().to_string())
            }
            None => serde_json::to_value(&f)?,
        };
        let pass = report.pass;
        self.emit_json(json!({ "invariants": report, "interpolant": interpolant }))?;
        Ok(if pass { Outcome::Ok } else { Outcome::ValidationFailed })
    }

    fn farey(&self, lo: &str, hi: &str, qmax: u64, count: bool) -> anyhow::Result<Outcome> {
        let lo: BigRational = lo.parse().map_err(|e| anyhow::anyhow!("--lo {lo:?}: {e}"))?;
        let hi: BigRational = hi.parse().map_err(|e| anyhow::anyhow!("--hi {hi:?}: {e}"))?;
        if count {
            self.json_only()?;
            let c = count_fractions(&lo, &hi, qmax)?;
            return self.emit_json(json!({ "count": c })).map(|_| Outcome::Ok);
        }
        let fr = enumerate_fractions(&lo, &hi, qmax)?;
        match self.format(Format::Json) {
            Format::Csv => {
                let mut w = csv::Writer::from_writer(Vec::new());
                w.write_record(["num", "den"])?;
                for r in &fr {
                    w.write_record([r.numer().to_string(), r.denom().to_string()])?;
                }
                self.emit_bytes(&w.into_inner()?)?;
            }
            Format::Json => {
                let list: Vec<String> = fr.iter().map(ToString::to_string).collect();
                self.emit_json(json!({ "count": list.len(), "fractions": list }))?;
            }
        }
        Ok(Outcome::Ok)
    }

    fn expsum(&self, a: &ExpsumArgs) -> anyhow::Result<Outcome> {
        self.json_only()?;
        let spec = io::read_spec_file(&a.spec)?;
        let nf = spec.n() as f64;
        let mx = a.mx.unwrap_or(4 * spec.n());
        let full_t = 4 * spec.n() * spec.n();
        let mt = a
            .mt
            .unwrap_or_else(|| full_t.min(((self.g.grid_budget / mx as u64) as usize).max(1)));
        if (mx as u64).saturating_mul(mt as u64) > self.g.grid_budget {
            bail!(
                "grid of {mx} x {mt} nodes exceeds --grid-budget {}",
                self.g.grid_budget
            );
        }
        let grid = GridSpec::new(
            a.x_lo.unwrap_or(0.0),
            a.x_hi.unwrap_or(nf),
            mx,
            a.t_lo.unwrap_or(0.0),
            a.t_hi.unwrap_or(nf * nf),
            mt,
        )?;
        let mut sw = sweep(&spec, &grid, a.direction, self.g.fast_path)?;
        let levels = level_report_from_sweep(&spec, &sw);
        refine(&spec, &mut sw, a.refine, self.g.fast_path)?;
        let norm = norm_from_sweep(&sw, spec.n(), a.p, a.refine)?;
        if let Some(p) = &a.dump {
            io::write_matrix(p, &eval_grid(&spec, &grid, self.g.fast_path)?, &grid)?;
        }
        self.emit_json(json!({
            "b_l1": spec.l1_norm(),
            "b_l2": spec.l2_norm(),
            "norm": norm,
            "levels": levels,
            "max_level_statistic": levels.max_statistic(),
        }))?;
        Ok(Outcome::Ok)
    }

    fn experiment(&self, id: ExperimentId, p: f64) -> anyhow::Result<Outcome> {
        let ns = if self.g.n.is_empty() { vec![64] } else { self.g.n.clone() };
        let mut reports = Vec::with_capacity(ns.len());
        for &n in &ns {
            let cfg = ExperimentConfig {
                n,
                grid_budget: self.g.grid_budget,
                seed: self.g.seed,
                fast_path: self.g.fast_path,
                p,
            };
            let r = run_experiment(id, &cfg)?;
            eprintln!(
                "experiment {id:?} N={n}: hits={} norm={:.6e} ratio={:.4} ({} ms)",
                r.hit_count, r.norm.value, r.ratio, r.runtime_ms
            );
            reports.push(r);
        }
        let pass = reports.iter().all(|r| r.identity.pass);
        match self.format(Format::Json) {
            Format::Json => {
                let slope = (reports.len() >= 3).then(|| norm_slope(&reports)).transpose()?;
                self.emit_json(json!({ "reports": reports, "slope": slope }))?;
            }
            Format::Csv => {
                let mut w = csv::Writer::from_writer(Vec::new());
                w.write_record([
                    "N", "hit_count", "identity_pass", "max_rel_err", "norm", "b_l2", "ratio",
                    "level_statistic",
                ])?;
                for r in &reports {
                    w.write_record([
                        r.n.to_string(),
                        r.hit_count.to_string(),
                        r.identity.pass.to_string(),
                        r.identity.max_rel_err.to_string(),
                        r.norm.value.to_string(),
                        r.b_l2.to_string(),
                        r.ratio.to_string(),
                        r.level_statistic.to_string(),
                    ])?;
                }
                self.emit_bytes(&w.into_inner()?)?;
            }
        }
        Ok(if pass { Outcome::Ok } else { Outcome::ValidationFailed })
    }

    fn scan(&self) -> anyhow::Result<Outcome> {
        let ns = if self.g.n.is_empty() {
            vec![256, 1024, 4096, 16384]
        } else {
            self.g.n.clone()
        };
        let alphas = if self.g.alpha.is_empty() {
            vec![0.25, 1.0, 1.5, 2.0]
        } else {
            self.g.alpha.clone()
        };
        let res = intersection_scan(&ns, &alphas)?;
        match self.format(Format::Json) {
            Format::Json => self.emit_json(&res)?,
            Format::Csv => {
                let mut w = csv::Writer::from_writer(Vec::new());
                w.write_record(["alpha", "N", "count"])?;
                for r in &res {
                    for (n, c) in &r.counts {
                        w.write_record([r.alpha.to_string(), n.to_string(), c.to_string()])?;
                    }
                }
                self.emit_bytes(&w.into_inner()?)?;
            }
        }
        Ok(Outcome::Ok)
    }

    fn regress(&self, input: &Path) -> anyhow::Result<Outcome> {
        self.json_only()?;
        let mut rd = csv::Reader::from_path(input)
            .with_context(|| format!("opening {}", input.display()))?;
        let mut pts = Vec::new();
        for (i, rec) in rd.deserialize::<(f64, f64)>().enumerate() {
            pts.push(rec.with_context(|| format!("{} row {}", input.display(), i + 2))?);
        }
        self.emit_json(regress(&pts)?)?;
        Ok(Outcome::Ok)
    }
}
