//! `sgroth`: command-line front end for the stable-groth library.
//!
//! Every subcommand prints JSON (or the requested CSV/SVG) to stdout or to
//! `--out`. Exit status: 0 on success, 2 on rejected input, 1 when a
//! numerical procedure misses its tolerance or a check fails.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use stable_groth::asymptotics::{self, ColLimitSpec, CltOutcome, ProbeReport, RowLimitSpec};
use stable_groth::contour::{self, CirclePath};
use stable_groth::fivevertex::{self, ColorScheme};
use stable_groth::graph::{self, CoherentSpec, GraphPath, GtSpec, PhiSpec};
use stable_groth::grothendieck::{self, Backend, PrincipalValue};
use stable_groth::scalar::{parse_rational, rational_to_f64};
use stable_groth::symfunc;
use stable_groth::tasep::{self, JumpLaw};
use stable_groth::{Complex, Error, Partition, Rational};

const DEFAULT_SEED: u64 = 7;

#[derive(Parser)]
#[command(name = "sgroth", version, about = "Stable Grothendieck polynomials, coherent measures, five-vertex model and TASEP")]
struct Cli {
    /// RNG seed for every sampling step
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Cap on worker threads for probes (0 = one per grid point)
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    /// Write the main output here instead of stdout
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Schur expansions of G_λ^{(a,b)} and g_λ^{(a,b)}
    #[command(subcommand)]
    Symfunc(SymfuncCmd),
    /// G_λ^{(0,−p)}(1^N) by one or all backends
    Geval(GevalArgs),
    /// G_λ^{(0,−p)}(1^N) by contour quadrature
    Gcontour(GcontourArgs),
    /// Level measure M_n of a coherent system
    Measure(MeasureArgs),
    /// Coherency residuals between consecutive levels
    Coherency(CoherencyArgs),
    /// Sample a path of the graded graph
    SamplePath(SamplePathArgs),
    /// Geometric-jump TASEP
    #[command(subcommand)]
    Tasep(TasepCmd),
    /// Five-vertex partition functions and renders
    #[command(subcommand)]
    Fivevertex(FivevertexCmd),
    /// Large-N probes
    #[command(subcommand)]
    Asym(AsymCmd),
}

#[derive(Subcommand)]
enum SymfuncCmd {
    /// Schur coefficients through a degree bound
    Expand {
        #[arg(long)]
        lambda: Partition,
        #[arg(long, default_value = "0", allow_hyphen_values = true, value_parser = rational)]
        a: Rational,
        #[arg(long, default_value = "0", allow_hyphen_values = true, value_parser = rational)]
        b: Rational,
        #[arg(long)]
        degree: usize,
        /// Expand the dual g_λ instead of G_λ
        #[arg(long)]
        dual: bool,
    },
    /// ω(G_λ^{(a,b)}) = G_{λ'}^{(b,a)} and the same for g
    CheckInvolution {
        #[arg(long)]
        lambda: Partition,
        #[arg(long, allow_hyphen_values = true, value_parser = rational)]
        a: Rational,
        #[arg(long, allow_hyphen_values = true, value_parser = rational)]
        b: Rational,
        #[arg(long)]
        degree: usize,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum BackendArg {
    Branching,
    Jt,
    Contour,
    All,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Args)]
struct GevalArgs {
    #[arg(long)]
    lambda: Partition,
    #[arg(long = "N")]
    n: usize,
    #[arg(long, value_parser = rational)]
    p: Rational,
    #[arg(long, value_enum, default_value = "branching")]
    backend: BackendArg,
    #[arg(long, default_value_t = 1e-12)]
    tol: f64,
    /// Output format; defaults to text for one backend and JSON for several
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Run every available backend and fail on disagreement
    #[arg(long)]
    verify: bool,
}

#[derive(Args)]
struct GcontourArgs {
    #[arg(long)]
    lambda: Partition,
    #[arg(long = "N")]
    n: usize,
    #[arg(long, value_parser = rational)]
    p: Rational,
    /// Circle radius; chosen automatically when absent
    #[arg(long)]
    radius: Option<f64>,
    /// Circle centre on the real axis (default p/2)
    #[arg(long)]
    center: Option<f64>,
    /// Node count for a fixed circle (power of two)
    #[arg(long, default_value_t = 4096)]
    nodes: usize,
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    /// Compare against the exact branching value
    #[arg(long)]
    compare: bool,
}

#[derive(Args, Clone)]
struct SpecArgs {
    /// Φ(z) = (1−p̃)/(1−p̃z)
    #[arg(long, value_parser = rational)]
    phi_geom: Option<Rational>,
    /// Row speeds α_i of a system of GT type
    #[arg(long, value_delimiter = ',', value_parser = rational)]
    alpha: Vec<Rational>,
    /// Column parameters β_i of a system of GT type
    #[arg(long, value_delimiter = ',', value_parser = rational)]
    beta: Vec<Rational>,
}

impl SpecArgs {
    fn spec(&self) -> Result<CoherentSpec, CliError> {
        match (&self.phi_geom, self.alpha.is_empty() && self.beta.is_empty()) {
            (Some(pt), true) => Ok(CoherentSpec::Phi(PhiSpec::geometric(pt))),
            (None, false) => Ok(CoherentSpec::Gt(self.gt())),
            (Some(_), false) => Err(CliError::Usage("give either --phi-geom or --alpha/--beta, not both".into())),
            (None, true) => Err(CliError::Usage("a coherent system needs --phi-geom or --alpha/--beta".into())),
        }
    }

    fn gt(&self) -> GtSpec {
        GtSpec::new(self.alpha.clone(), self.beta.clone())
    }
}

#[derive(Args)]
struct MeasureArgs {
    #[command(flatten)]
    spec: SpecArgs,
    #[arg(long)]
    level: usize,
    #[arg(long, default_value = "1/2", value_parser = rational)]
    p: Rational,
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
}

#[derive(Args)]
struct CoherencyArgs {
    #[command(flatten)]
    spec: SpecArgs,
    /// Checks levels 0→1, …, (levels−1)→levels
    #[arg(long, default_value_t = 3)]
    levels: usize,
    #[arg(long, default_value = "1/2", value_parser = rational)]
    p: Rational,
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
}

#[derive(Args)]
struct SamplePathArgs {
    #[command(flatten)]
    spec: SpecArgs,
    /// Condition the path to end at λ (uniform in path weight)
    #[arg(long)]
    lambda: Option<Partition>,
    #[arg(long = "N")]
    n: usize,
    #[arg(long, default_value = "1/2", value_parser = rational)]
    p: Rational,
    /// Also render the path as a five-vertex configuration
    #[arg(long)]
    svg: Option<PathBuf>,
}

#[derive(Subcommand)]
enum TasepCmd {
    /// Monte Carlo vs exact law after n steps
    Run {
        #[arg(long)]
        n: usize,
        #[arg(long, value_parser = rational)]
        p: Rational,
        /// Rate of the first particle (default p)
        #[arg(long, value_parser = rational)]
        pt: Option<Rational>,
        /// Number of runs; accepts forms like 1e6
        #[arg(long, default_value = "10000", value_parser = count)]
        samples: usize,
        /// Dump one seeded trajectory as CSV (time, particle, position)
        #[arg(long)]
        trajectory: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum FivevertexCmd {
    /// Z_{n,λ/μ} for one row, or the block [1;n] with --block
    Z {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        lambda: Partition,
        #[arg(long, default_value = "0")]
        mu: Partition,
        #[arg(long, value_parser = rational)]
        p: Rational,
        #[arg(long)]
        block: bool,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Render a path (JSON array of partitions) as SVG
    Render {
        #[arg(long)]
        path_file: PathBuf,
    },
}

#[derive(Subcommand)]
enum AsymCmd {
    /// Row limit of G_λ(1^N)
    Rows {
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        alpha: Vec<f64>,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        x: Vec<f64>,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        z: Vec<f64>,
        #[arg(long, value_parser = rational)]
        p: Rational,
        #[arg(long, value_delimiter = ',', default_value = "50,100,200,400")]
        grid: Vec<usize>,
        /// Run the subcritical-row independence probe instead
        #[arg(long)]
        independence: bool,
        #[arg(long)]
        csv: bool,
    },
    /// Column limit of G_λ(1^N)
    Cols {
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        beta: Vec<f64>,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        y: Vec<f64>,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        z: Vec<f64>,
        #[arg(long, value_parser = rational)]
        p: Rational,
        #[arg(long, value_delimiter = ',', default_value = "50,100,200,400")]
        grid: Vec<usize>,
        #[arg(long)]
        csv: bool,
    },
    /// Limit of g_λ(χ) along λ_i = α_i N + t_i √N
    G {
        #[arg(long, value_delimiter = ',')]
        chi: Vec<f64>,
        #[arg(long, value_delimiter = ',')]
        alpha: Vec<f64>,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        t: Vec<f64>,
        #[arg(long)]
        p: f64,
        #[arg(long, value_delimiter = ',', default_value = "50,100,200,400")]
        grid: Vec<usize>,
        #[arg(long)]
        csv: bool,
    },
    /// Fluctuations of the extreme rows or columns at level n
    Clt {
        #[command(flatten)]
        spec: SpecArgs,
        #[arg(long)]
        n: usize,
        #[arg(long, value_parser = rational)]
        p: Rational,
        #[arg(long, default_value = "10000", value_parser = count)]
        samples: usize,
        /// CSV of (x, empirical, target) CDF values for one-row/one-column runs
        #[arg(long)]
        cdf_csv: Option<PathBuf>,
    },
    /// Gaussian integral against its closed form
    Gaussian {
        #[arg(long)]
        sigma: f64,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        x: Vec<f64>,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
    },
    /// p↓(t_N, λ) along sampled paths against M_1(λ)
    Boundary {
        #[command(flatten)]
        spec: SpecArgs,
        #[arg(long, value_parser = rational)]
        p: Rational,
        #[arg(long, value_delimiter = ',', default_value = "100,200,400,800")]
        grid: Vec<usize>,
        /// Level-1 shapes, separated by ';'
        #[arg(long, value_delimiter = ';', default_value = "0;1;2")]
        lambdas: Vec<Partition>,
        #[arg(long, default_value_t = 100)]
        paths: usize,
    },
}

enum CliError {
    Usage(String),
    Lib(Error),
    Failed(String),
    Io(String),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Lib(e)
    }
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Lib(e) if !e.is_numerical() => 2,
            _ => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(s) | CliError::Failed(s) | CliError::Io(s) => f.write_str(s),
            CliError::Lib(e) => write!(f, "{e}"),
        }
    }
}

type Res<T> = Result<T, CliError>;

fn rational(s: &str) -> Result<Rational, String> {
    parse_rational(s).map_err(|e| e.to_string())
}

fn count(s: &str) -> Result<usize, String> {
    if let Ok(v) = s.parse::<usize>() {
        return Ok(v);
    }
    match s.parse::<f64>() {
        Ok(v) if v >= 0.0 && v.fract() == 0.0 && v < 1e15 => Ok(v as usize),
        _ => Err(format!("`{s}` is not a count")),
    }
}

struct Output {
    out: Option<PathBuf>,
}

impl Output {
    fn text(&self, s: &str) -> Res<()> {
        match &self.out {
            Some(path) => write_file(path, s),
            None => {
                print!("{s}");
                Ok(())
            }
        }
    }

    fn json<T: Serialize>(&self, v: &T) -> Res<()> {
        let mut s = serde_json::to_string_pretty(v).map_err(|e| CliError::Io(e.to_string()))?;
        s.push('\n');
        self.text(&s)
    }
}

fn write_file(path: &Path, s: &str) -> Res<()> {
    fs::write(path, s).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn report_csv(r: &ProbeReport) -> String {
    let mut s = String::from("n,lambda,lhs,limit,rel_error\n");
    for p in &r.points {
        let _ = writeln!(s, "{},\"{}\",{:e},{:e},{:e}", p.n, p.lambda, p.lhs, p.limit, p.rel_error);
    }
    s
}

fn probe_out(o: &Output, r: &ProbeReport, csv: bool) -> Res<()> {
    if csv {
        o.text(&report_csv(r))?;
    } else {
        o.json(r)?;
    }
    if !r.monotone {
        return Err(CliError::Failed("relative errors are not monotone decreasing over the grid".into()));
    }
    Ok(())
}

fn value_json(backend: &str, v: &PrincipalValue) -> Value {
    match v {
        PrincipalValue::Exact(q) => json!({"backend": backend, "value": q.to_string(), "value_f64": rational_to_f64(q), "error": 0.0}),
        PrincipalValue::Series(s) => json!({
            "backend": backend,
            "value": s.computed_sum.to_string(),
            "value_f64": rational_to_f64(&s.computed_sum),
            "error": rational_to_f64(&s.tail_bound),
        }),
        PrincipalValue::Approx { value, error } => json!({"backend": backend, "value_f64": value, "error": error}),
    }
}

fn geval(a: &GevalArgs, o: &Output) -> Res<()> {
    let all = a.verify || a.backend == BackendArg::All;
    let list: Vec<(&str, Backend)> = match a.backend {
        _ if all => vec![("branching", Backend::Branching), ("jt_series", Backend::JtSeries), ("contour", Backend::Contour)],
        BackendArg::Branching => vec![("branching", Backend::Branching)],
        BackendArg::Jt => vec![("jt_series", Backend::JtSeries)],
        _ => vec![("contour", Backend::Contour)],
    };
    let mut values = Vec::new();
    let mut skipped = Vec::new();
    for (name, b) in list {
        match grothendieck::G_principal(&a.lambda, a.n, &a.p, b, a.tol) {
            Ok(v) => values.push((name, v)),
            // a backend that cannot treat this input is skipped in --backend all
            Err(e @ (Error::Unsupported(_) | Error::ContourViolation(_))) if all => skipped.push(json!({"backend": name, "reason": e.to_string()})),
            Err(e) => return Err(e.into()),
        }
    }
    let mut agree = true;
    for i in 0..values.len() {
        for j in i + 1..values.len() {
            let (vi, vj) = (&values[i].1, &values[j].1);
            let slack = vi.error() + vj.error() + 1e-12 * vi.to_f64().abs().max(1.0);
            if (vi.to_f64() - vj.to_f64()).abs() > slack {
                agree = false;
            }
        }
    }
    let format = a.format.unwrap_or(if all { Format::Json } else { Format::Text });
    match format {
        Format::Text => {
            let mut s = String::new();
            for (_, v) in &values {
                match v {
                    PrincipalValue::Exact(q) => writeln!(s, "{q}"),
                    _ => writeln!(s, "{:e} ± {:e}", v.to_f64(), v.error()),
                }
                .expect("write to string");
            }
            o.text(&s)?;
        }
        Format::Json => o.json(&json!({
            "lambda": a.lambda,
            "N": a.n,
            "p": a.p.to_string(),
            "values": values.iter().map(|(n, v)| value_json(n, v)).collect::<Vec<_>>(),
            "skipped": skipped,
            "agree": agree,
        }))?,
    }
    if !agree {
        return Err(CliError::Failed("backends disagree beyond their error bounds".into()));
    }
    Ok(())
}

fn gcontour(a: &GcontourArgs, o: &Output) -> Res<()> {
    let pf = rational_to_f64(&a.p);
    let (value, error, path) = match a.radius {
        None => {
            let (v, e) = contour::principal(&a.lambda, a.n, pf, a.tol)?;
            (v, e, Value::String("auto".into()))
        }
        Some(r) => {
            let c = a.center.unwrap_or(pf / 2.0);
            let path = CirclePath::new(Complex::new(c, 0.0), r, a.nodes)?;
            let ones = vec![1.0; a.n];
            let v = if a.lambda.len() <= a.lambda.first() {
                contour::G_contour_rows(&a.lambda, &ones, 0.0, pf, &path)?
            } else {
                contour::G_contour_cols(&a.lambda, &ones, -pf, a.lambda.first(), &path)?
            };
            (v.value, v.error, json!({"center": c, "radius": r, "nodes": a.nodes, "imag": v.imag}))
        }
    };
    let mut doc = json!({"lambda": a.lambda, "N": a.n, "p": a.p.to_string(), "value": value, "error": error, "path": path});
    let mut ok = true;
    if a.compare {
        let exact = rational_to_f64(&grothendieck::G_principal_branching(&a.lambda, a.n, Rational::from_integer(1.into()) - &a.p));
        let diff = (value - exact).abs();
        ok = diff <= error + 1e-12 * exact.abs().max(1.0);
        doc["branching"] = json!(exact);
        doc["abs_difference"] = json!(diff);
        doc["within_bound"] = json!(ok);
    }
    o.json(&doc)?;
    if !ok {
        return Err(CliError::Failed("quadrature misses the exact value by more than its error estimate".into()));
    }
    Ok(())
}

fn coherency(a: &CoherencyArgs, o: &Output) -> Res<()> {
    let spec = a.spec.spec()?;
    let measures = (0..=a.levels).map(|n| spec.measure(n, &a.p, a.tol)).collect::<stable_groth::Result<Vec<_>>>()?;
    let reports = measures.windows(2).map(|w| graph::coherency_residual(&w[0], &w[1], &a.p)).collect::<stable_groth::Result<Vec<_>>>()?;
    o.json(&reports)?;
    if reports.iter().any(|r| r.excess > 0.0) {
        return Err(CliError::Failed("coherency residual exceeds the omitted tail mass".into()));
    }
    Ok(())
}

fn render(path: &GraphPath) -> Res<String> {
    // the first call reports the window the path needs
    let cfg = match fivevertex::path_to_config(path, 0) {
        Ok(c) => c,
        Err(Error::WindowOverflow { need, .. }) => fivevertex::path_to_config(path, need)?,
        Err(e) => return Err(e.into()),
    };
    Ok(fivevertex::render_svg(&cfg, &ColorScheme::default()))
}

fn sample_path(a: &SamplePathArgs, seed: u64, o: &Output) -> Res<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let path = match &a.lambda {
        Some(l) => graph::sample_conditioned_path(l, a.n, &a.p, &mut rng)?,
        None => graph::forward_sample_path(&a.spec.spec()?, a.n, &a.p, &mut rng)?,
    };
    if let Some(svg) = &a.svg {
        write_file(svg, &render(&path)?)?;
    }
    o.json(&path.steps)
}

fn tasep_run(n: usize, p: &Rational, pt: Option<&Rational>, samples: usize, trajectory: Option<&PathBuf>, seed: u64, o: &Output) -> Res<()> {
    let law = JumpLaw::new(p.clone(), pt.unwrap_or(p).clone())?;
    if let Some(file) = trajectory {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let traj = tasep::trajectory(n, &law, &mut rng);
        let k = traj.last().map(|c| c.lambda.len() + 1).unwrap_or(1);
        let mut s = String::from("time,particle,position\n");
        for c in &traj {
            for (i, y) in c.positions(k).iter().enumerate() {
                let _ = writeln!(s, "{},{},{}", c.t, i + 1, y);
            }
        }
        write_file(file, &s)?;
    }
    let report = tasep::mc_vs_exact(n, &law, samples, seed)?;
    o.json(&report)?;
    if !report.all_bands_pass {
        return Err(CliError::Failed("some empirical frequency lies outside its 4σ band".into()));
    }
    Ok(())
}

fn fivevertex_z(n: usize, lambda: &Partition, mu: &Partition, p: &Rational, block: bool, format: Format, o: &Output) -> Res<()> {
    if block {
        if !mu.is_empty() {
            return Err(CliError::Usage("--block takes no --mu".into()));
        }
        let z = fivevertex::block_partition_function(n, lambda, p)?;
        match format {
            Format::Text => o.text(&format!("{}\n", z.branching))?,
            Format::Json => o.json(&json!({"n": n, "lambda": lambda, "p": p.to_string(), "branching": z.branching.to_string(), "closed_form": z.closed_form.to_string()}))?,
        }
        if z.branching != z.closed_form {
            return Err(CliError::Failed("branching sum differs from (1−p)^n p^|λ| G_λ(1^n)".into()));
        }
        return Ok(());
    }
    let z = fivevertex::row_partition_function(n, lambda, mu, p)?;
    match format {
        Format::Text => o.text(&format!("{z}\n")),
        Format::Json => o.json(&json!({"n": n, "lambda": lambda, "mu": mu, "p": p.to_string(), "z": z.to_string()})),
    }
}

fn asym(cmd: &AsymCmd, seed: u64, o: &Output) -> Res<()> {
    match cmd {
        AsymCmd::Rows { alpha, x, z, p, grid, independence, csv } => {
            let spec = RowLimitSpec::new(alpha.clone(), x.clone(), z.clone(), p.clone())?;
            if *independence {
                let r = asymptotics::row_independence_probe(&spec, grid)?;
                o.json(&r)?;
                if !r.pass {
                    return Err(CliError::Failed("independence perturbation did not settle below the drift".into()));
                }
                return Ok(());
            }
            probe_out(o, &asymptotics::row_limit_probe(&spec, grid)?, *csv)
        }
        AsymCmd::Cols { beta, y, z, p, grid, csv } => {
            let spec = ColLimitSpec::new(beta.clone(), y.clone(), z.clone(), p.clone())?;
            probe_out(o, &asymptotics::col_limit_probe(&spec, grid)?, *csv)
        }
        AsymCmd::G { chi, alpha, t, p, grid, csv } => probe_out(o, &asymptotics::g_limit_probe(chi, alpha, t, *p, grid)?, *csv),
        AsymCmd::Clt { spec, n, p, samples, cdf_csv } => {
            let exp = asymptotics::clt_experiment(&spec.gt(), *n, p, *samples, seed)?;
            if let (Some(file), CltOutcome::Exact(r)) = (cdf_csv, &exp.outcome) {
                let mut s = String::from("x,empirical,target\n");
                for (x, e, t) in &r.cdf {
                    let _ = writeln!(s, "{x:e},{e:e},{t:e}");
                }
                write_file(file, &s)?;
            }
            o.json(&exp)?;
            if let CltOutcome::Sampled(ks) = &exp.outcome {
                if !ks.pass {
                    return Err(CliError::Failed("KS test rejects the GUE marginals".into()));
                }
            }
            Ok(())
        }
        AsymCmd::Gaussian { sigma, x, tol } => {
            let r = asymptotics::gaussian_lemma_check(*sigma, x)?;
            o.json(&r)?;
            if !(r.error < *tol) {
                return Err(CliError::Failed(format!("relative error {:e} above {tol:e}", r.error)));
            }
            Ok(())
        }
        AsymCmd::Boundary { spec, p, grid, lambdas, paths } => {
            let r = asymptotics::boundary_path_probe(&spec.gt(), p, grid, lambdas, *paths, seed)?;
            o.json(&r)?;
            if !r.monotone {
                return Err(CliError::Failed("mean deviations are not decreasing over the grid".into()));
            }
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Res<()> {
    asymptotics::set_max_threads(cli.threads);
    let o = Output { out: cli.out.clone() };
    match &cli.cmd {
        Command::Symfunc(SymfuncCmd::Expand { lambda, a, b, degree, dual }) => {
            let e = if *dual {
                symfunc::dual_g_by_inversion(lambda, a, b, *degree)?
            } else {
                symfunc::grothendieck_schur(lambda, a, b, *degree)?
            };
            o.json(&json!({"partition": lambda, "a": a.to_string(), "b": b.to_string(), "dual": dual, "degree": degree, "coefficients": e}))
        }
        Command::Symfunc(SymfuncCmd::CheckInvolution { lambda, a, b, degree }) => {
            let g = symfunc::involution_check(lambda, a, b, *degree)?;
            let d = symfunc::involution_check_dual(lambda, a, b, *degree)?;
            o.json(&json!({"partition": lambda, "a": a.to_string(), "b": b.to_string(), "degree": degree, "grothendieck": g, "dual": d}))?;
            if !(g && d) {
                return Err(CliError::Failed("involution identity fails".into()));
            }
            Ok(())
        }
        Command::Geval(a) => geval(a, &o),
        Command::Gcontour(a) => gcontour(a, &o),
        Command::Measure(a) => {
            let m = a.spec.spec()?.measure(a.level, &a.p, a.tol)?;
            o.json(&m.to_json_value())
        }
        Command::Coherency(a) => coherency(a, &o),
        Command::SamplePath(a) => sample_path(a, cli.seed, &o),
        Command::Tasep(TasepCmd::Run { n, p, pt, samples, trajectory }) => tasep_run(*n, p, pt.as_ref(), *samples, trajectory.as_ref(), cli.seed, &o),
        Command::Fivevertex(FivevertexCmd::Z { n, lambda, mu, p, block, format }) => fivevertex_z(*n, lambda, mu, p, *block, *format, &o),
        Command::Fivevertex(FivevertexCmd::Render { path_file }) => {
            let raw = fs::read_to_string(path_file).map_err(|e| CliError::Io(format!("{}: {e}", path_file.display())))?;
            let steps: Vec<Partition> = serde_json::from_str(&raw).map_err(|e| CliError::Usage(format!("bad path file: {e}")))?;
            let path = GraphPath::new(steps)?;
            o.text(&render(&path)?)
        }
        Command::Asym(cmd) => asym(cmd, cli.seed, &o),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}
