use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use qkpm::config::Method;
use qkpm::io::{self, Meta, MomentsJson};
use qkpm::manifest::Manifest;
use qkpm::oracle::BoundsMethod;
use qkpm::pipeline::{self, log_log_slope};
use qkpm::{CliError, RunConfig};
use qkpm_core::estimator::{hqc_cost, CostReport};
use qkpm_core::kpm::Kernel;
use qkpm_core::random::Scheme;
use qkpm_core::statevector::{Basis, Circuit};

/// Density of states from Chebyshev moments: simulated moment circuits,
/// exact references, KPM reconstruction and thermodynamics.
#[derive(Parser, Debug)]
#[command(name = "qkpm", version)]
struct Cli {
    /// TOML run configuration; every key is optional.
    #[arg(long, short, global = true)]
    config: Option<PathBuf>,
    /// Output directory (overrides the config file).
    #[arg(long, short, global = true, env = "QKPM_OUT_DIR")]
    out: Option<PathBuf>,
    /// Worker threads, 0 for all cores.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(flatten)]
    overrides: Overrides,
    #[command(subcommand)]
    cmd: Command,
}

/// Command-line values replacing config-file keys.
#[derive(Args, Debug, Default)]
struct Overrides {
    #[arg(long, global = true)]
    l: Option<usize>,
    #[arg(long, global = true)]
    jx: Option<f64>,
    #[arg(long, global = true)]
    jy: Option<f64>,
    #[arg(long, global = true)]
    jz: Option<f64>,
    #[arg(long, global = true)]
    lambda: Option<f64>,
    #[arg(long, global = true)]
    epsilon: Option<f64>,
    /// auto, exact or coefficient-norm.
    #[arg(long, global = true)]
    bounds: Option<String>,
    /// par, seq or ric.
    #[arg(long, global = true)]
    scheme: Option<String>,
    #[arg(long, global = true)]
    layers: Option<usize>,
    /// Jump stride, 0 for the default.
    #[arg(long, global = true)]
    s: Option<usize>,
    #[arg(long, short = 'R', global = true)]
    replicas: Option<usize>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// ed, recursion, arccos, st, circuit or circuit-shots.
    #[arg(long, global = true)]
    method: Option<String>,
    /// Highest moment.
    #[arg(long, short = 'M', global = true)]
    m: Option<usize>,
    /// Arc-cosine order.
    #[arg(long, short = 'K', global = true)]
    k: Option<usize>,
    #[arg(long, global = true)]
    steps: Option<usize>,
    #[arg(long, global = true)]
    shots: Option<u64>,
    /// jackson or dirichlet.
    #[arg(long, global = true)]
    kernel: Option<String>,
    /// Expansion order for reconstruction, 0 for all moments.
    #[arg(long, global = true)]
    order: Option<usize>,
    /// Zero every moment above this index.
    #[arg(long, global = true)]
    keep: Option<usize>,
    #[arg(long, global = true)]
    grid_points: Option<usize>,
    #[arg(long, global = true)]
    beta_min: Option<f64>,
    #[arg(long, global = true)]
    beta_max: Option<f64>,
    #[arg(long, global = true)]
    beta_points: Option<usize>,
    /// Benchmark register sizes, comma separated.
    #[arg(long, global = true, value_delimiter = ',')]
    sizes: Option<Vec<usize>>,
    /// Benchmark schemes, comma separated.
    #[arg(long, global = true, value_delimiter = ',')]
    schemes: Option<Vec<String>>,
    #[arg(long, global = true)]
    states: Option<usize>,
    #[arg(long, global = true)]
    max_layers: Option<usize>,
    /// Output formats, comma separated: csv, json, circuits.
    #[arg(long, global = true, value_delimiter = ',')]
    formats: Option<Vec<String>>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Estimate Chebyshev moments with the configured method.
    Moments,
    /// KPM density of states from a moments file.
    Reconstruct {
        moments: PathBuf,
        /// Spectrum CSV to compare against (histogram, L1 and L∞).
        #[arg(long)]
        reference: Option<PathBuf>,
    },
    /// Partition function, free energy, energy and entropy from a DOS file.
    Thermo { dos: PathBuf },
    /// Half-chain entropy and fourth moment versus depth.
    EntropyBench,
    /// Stochastic-trace relative error versus depth and size.
    TraceBench,
    /// Credit cost of circuit files or of raw gate counts.
    Cost {
        circuits: Vec<PathBuf>,
        /// N_1q,N_2q,N_m instead of circuit files.
        #[arg(long, value_delimiter = ',')]
        counts: Option<Vec<u64>>,
    },
}

fn parse<T: std::str::FromStr>(s: &str) -> Result<T, CliError>
where
    T::Err: std::fmt::Display,
{
    s.parse::<T>().map_err(|e| CliError::Config(e.to_string()))
}

impl Overrides {
    fn apply(&self, c: &mut RunConfig) -> Result<(), CliError> {
        macro_rules! set {
            ($src:ident => $($dst:tt)+) => {
                if let Some(v) = &self.$src {
                    $($dst)+ = v.clone();
                }
            };
        }
        set!(l => c.model.l);
        set!(jx => c.model.jx);
        set!(jy => c.model.jy);
        set!(jz => c.model.jz);
        set!(lambda => c.model.lambda);
        set!(epsilon => c.model.epsilon);
        if let Some(b) = &self.bounds {
            c.model.bounds_method = parse::<BoundsMethod>(b)?;
        }
        if let Some(s) = &self.scheme {
            c.random.scheme = parse::<Scheme>(s)?;
        }
        set!(layers => c.random.layers);
        set!(s => c.random.s);
        set!(replicas => c.random.replicas);
        set!(seed => c.random.seed);
        if let Some(m) = &self.method {
            c.estimator.method = m.parse::<Method>()?;
        }
        set!(m => c.estimator.m);
        set!(k => c.estimator.k);
        set!(steps => c.estimator.steps);
        set!(shots => c.estimator.shots);
        if let Some(k) = &self.kernel {
            c.kpm.kernel = parse::<Kernel>(k)?;
        }
        set!(order => c.kpm.order);
        set!(keep => c.kpm.keep);
        set!(grid_points => c.kpm.grid_points);
        set!(beta_min => c.thermo.beta_min);
        set!(beta_max => c.thermo.beta_max);
        set!(beta_points => c.thermo.beta_points);
        if let Some(v) = &self.sizes {
            c.bench.entropy_sizes = v.clone();
            c.bench.trace_sizes = v.clone();
        }
        if let Some(v) = &self.schemes {
            c.bench.schemes = v.iter().map(|s| parse::<Scheme>(s)).collect::<Result<_, _>>()?;
        }
        set!(states => c.bench.states);
        set!(max_layers => c.bench.max_layers);
        set!(formats => c.output.formats);
        Ok(())
    }
}

fn load_config(cli: &Cli) -> Result<RunConfig, CliError> {
    let mut c = match &cli.config {
        Some(p) => RunConfig::from_toml(&io::read_text(p)?)?,
        None => RunConfig::default(),
    };
    cli.overrides.apply(&mut c)?;
    if let Some(o) = &cli.out {
        c.output.directory = Some(o.clone());
    }
    if let Some(t) = cli.threads {
        c.parallel.threads = t;
    }
    c.validate()?;
    Ok(c)
}

fn out_dir(c: &RunConfig) -> Result<PathBuf, CliError> {
    let d = c.output.directory.clone().unwrap_or_else(|| PathBuf::from("qkpm-out"));
    std::fs::create_dir_all(&d).map_err(|e| CliError::Io(format!("{}: {e}", d.display())))?;
    Ok(d)
}

/// Writes `config.toml`, then the manifest over `files` plus the config.
fn finish(dir: &Path, command: &str, c: &RunConfig, seeds: Vec<u64>, meta: Meta, mut files: Vec<String>) -> Result<(), CliError> {
    let text = c.to_toml();
    io::write_text(&dir.join("config.toml"), &text)?;
    files.push("config.toml".into());
    let mut m = Manifest::new(command, text, seeds);
    m.meta = meta;
    m.finish(dir, &files)?;
    Ok(())
}

fn basis_name(b: Basis) -> &'static str {
    match b {
        Basis::X => "X",
        Basis::Y => "Y",
    }
}

fn cmd_moments(c: &RunConfig) -> Result<(), CliError> {
    let dir = out_dir(c)?;
    let run = pipeline::with_threads(c.parallel.threads, || pipeline::compute_moments(c, c.output.wants("circuits")))??;
    let mut meta = run.model.meta();
    meta.insert("method".into(), format!("{:?}", c.estimator.method).to_lowercase());
    meta.insert("K".into(), c.estimator.k.to_string());
    meta.insert("steps".into(), c.estimator.steps.to_string());
    meta.insert("scheme".into(), c.random.scheme.to_string());
    meta.insert("layers".into(), c.random.layers.to_string());
    meta.insert("seed".into(), c.random.seed.to_string());
    let mut files = Vec::new();
    if c.output.wants("csv") {
        io::write_moments_csv(&dir.join("moments.csv"), &run.moments, &meta)?;
        files.push("moments.csv".into());
        let rows: Vec<Vec<String>> = run
            .costs
            .iter()
            .map(|r| {
                let p = &r.report;
                vec![
                    r.replica.to_string(),
                    r.n.to_string(),
                    basis_name(r.basis).into(),
                    p.n_1q.to_string(),
                    p.n_2q.to_string(),
                    p.n_m.to_string(),
                    p.shots.to_string(),
                    p.to_string(),
                    p.hqc().to_string(),
                ]
            })
            .collect();
        let mut cm = meta.clone();
        cm.insert("total_hqc".into(), run.costs.iter().map(|r| r.report.hqc()).sum::<f64>().to_string());
        io::write_table(
            &dir.join("costs.csv"),
            &cm,
            &["replica", "n", "basis", "n_1q", "n_2q", "n_m", "shots", "hqc_exact", "hqc"],
            &rows,
        )?;
        files.push("costs.csv".into());
        if let Some(s) = &run.model.spectrum {
            io::write_spectrum_csv(&dir.join("spectrum.csv"), s, &Some(run.model.params))?;
            files.push("spectrum.csv".into());
        }
    }
    if c.output.wants("json") {
        io::write_json(&dir.join("moments.json"), &MomentsJson::new(&run.moments, meta.clone()))?;
        files.push("moments.json".into());
    }
    if c.output.wants("circuits") {
        let sub = dir.join("circuits");
        std::fs::create_dir_all(&sub).map_err(|e| CliError::Io(e.to_string()))?;
        for (stem, circ) in &run.circuits {
            let name = format!("circuits/{stem}.txt");
            io::write_text(&dir.join(&name), &circ.to_string())?;
            files.push(name);
        }
    }
    for (n, v) in run.moments.values.iter().enumerate() {
        println!("{n:3} {v:+.6} ± {:.6}", run.moments.std_errors[n]);
    }
    finish(&dir, "moments", c, vec![c.random.seed], meta, files)
}

fn cmd_reconstruct(c: &RunConfig, moments: &Path, reference: Option<&Path>) -> Result<(), CliError> {
    let dir = out_dir(c)?;
    let (m, mut meta) = io::read_moments(moments)?;
    let (dos, rmeta) = pipeline::reconstruct(&m, &c.kpm)?;
    meta.extend(rmeta);
    let mut files = vec!["dos.csv".to_string()];
    io::write_dos_csv(&dir.join("dos.csv"), &dos, &meta)?;
    if let Some(r) = reference {
        let spec = io::read_spectrum(r)?;
        let rescaled = match (&spec.rescaled, m.rescale) {
            (_, Some(p)) => spec.eigenvalues.iter().map(|&e| p.to_rescaled(e)).collect::<Vec<_>>(),
            (Some(x), None) => x.clone(),
            (None, None) => return Err(CliError::Config("reference spectrum needs rescale parameters".into())),
        };
        let cmp = pipeline::compare_with_spectrum(&dos, &rescaled)?;
        let mut cm = Meta::new();
        cm.insert("l1".into(), cmp.l1.to_string());
        cm.insert("linf".into(), cmp.linf.to_string());
        let rows: Vec<Vec<String>> = cmp.points.iter().map(|p| vec![p.0.to_string(), p.1.to_string(), p.2.to_string()]).collect();
        io::write_table(&dir.join("compare.csv"), &cm, &["x", "kpm", "reference"], &rows)?;
        files.push("compare.csv".into());
        println!("L1 = {:.6}  Linf = {:.6}", cmp.l1, cmp.linf);
        meta.insert("compare_l1".into(), cmp.l1.to_string());
        meta.insert("compare_linf".into(), cmp.linf.to_string());
    }
    println!("order {}, integral {:.6}", dos.order, dos.integral());
    meta.insert("moments_file".into(), moments.display().to_string());
    finish(&dir, "reconstruct", c, Vec::new(), meta, files)
}

fn cmd_thermo(c: &RunConfig, dos_path: &Path) -> Result<(), CliError> {
    let dir = out_dir(c)?;
    let (dos, mut meta) = io::read_dos(dos_path)?;
    let n_qubits = meta.get("n_qubits").and_then(|v| v.parse().ok());
    let (r, p) = pipeline::thermo(&dos, n_qubits, &c.thermo)?;
    meta.insert("dos_file".into(), dos_path.display().to_string());
    meta.insert("entropy_offset_physical".into(), "L ln 2".into());
    io::write_thermo_csv(&dir.join("thermo.csv"), &r, p.as_ref(), &meta)?;
    meta.insert("energy_monotone".into(), io::energy_monotone(&r).to_string());
    for row in &r.rows {
        println!("beta {:8.4}  Z {:.6e}  E {:+.6}  S {:.6}", row.beta, row.z, row.energy, row.entropy);
    }
    finish(&dir, "thermo", c, Vec::new(), meta, vec!["thermo.csv".into()])
}

fn cmd_entropy_bench(c: &RunConfig) -> Result<(), CliError> {
    let dir = out_dir(c)?;
    let series = pipeline::with_threads(c.parallel.threads, || pipeline::entropy_bench(c))??;
    let mut header: Vec<String> =
        ["scheme", "l", "depth", "two_qubit_gates", "mean", "min", "max", "page", "rel_error", "fourth_moment"]
            .map(String::from)
            .to_vec();
    header.extend((0..c.bench.states).map(|i| format!("state_{i}")));
    let mut rows = Vec::new();
    for s in &series {
        for p in &s.points {
            let mut r = vec![
                s.scheme.to_string(),
                s.l.to_string(),
                p.depth.to_string(),
                p.two_qubit_gates.to_string(),
                p.mean_entropy.to_string(),
                p.min_entropy.to_string(),
                p.max_entropy.to_string(),
                s.page.to_string(),
                ((p.mean_entropy - s.page).abs() / s.page).to_string(),
                p.mean_fourth_moment.to_string(),
            ];
            r.extend(p.entropies.iter().map(|e| e.to_string()));
            rows.push(r);
        }
    }
    let h: Vec<&str> = header.iter().map(String::as_str).collect();
    let mut meta = Meta::new();
    meta.insert("seed".into(), c.random.seed.to_string());
    io::write_table(&dir.join("entropy_bench.csv"), &meta, &h, &rows)?;
    for s in &series {
        let last = s.points.last().expect("at least one layer");
        println!("{} L={:2}: entropy {:.4} (Page {:.4}), kappa {:.4}", s.scheme, s.l, last.mean_entropy, s.page, last.mean_fourth_moment);
    }
    finish(&dir, "entropy-bench", c, vec![c.random.seed], meta, vec!["entropy_bench.csv".into()])
}

fn cmd_trace_bench(c: &RunConfig) -> Result<(), CliError> {
    let dir = out_dir(c)?;
    let pts = pipeline::with_threads(c.parallel.threads, || pipeline::trace_bench(c))??;
    let mut header: Vec<String> = ["scheme", "l", "depth", "replicas", "mean", "min", "max"].map(String::from).to_vec();
    header.extend((0..c.bench.states).map(|i| format!("state_{i}")));
    let rows: Vec<Vec<String>> = pts
        .iter()
        .map(|p| {
            let mut r = vec![
                p.scheme.to_string(),
                p.l.to_string(),
                p.depth.to_string(),
                p.replicas.to_string(),
                p.mean().to_string(),
                p.errors.iter().copied().fold(f64::INFINITY, f64::min).to_string(),
                p.errors.iter().copied().fold(0.0, f64::max).to_string(),
            ];
            r.extend(p.errors.iter().map(|e| e.to_string()));
            r
        })
        .collect();
    let mut meta = Meta::new();
    meta.insert("seed".into(), c.random.seed.to_string());
    // Size scaling at the deepest circuit, per scheme.
    for &scheme in &c.bench.schemes {
        let deepest: Vec<_> = pts.iter().filter(|p| p.scheme == scheme && p.depth == c.bench.max_layers).collect();
        if deepest.len() >= 2 {
            let x: Vec<f64> = deepest.iter().map(|p| (p.l as f64).exp2()).collect();
            let y: Vec<f64> = deepest.iter().map(|p| p.mean()).collect();
            let slope = log_log_slope(&x, &y);
            println!("{scheme}: relative error ~ D^{slope:.3}");
            meta.insert(format!("exponent_{scheme}"), slope.to_string());
        }
    }
    let h: Vec<&str> = header.iter().map(String::as_str).collect();
    io::write_table(&dir.join("trace_bench.csv"), &meta, &h, &rows)?;
    finish(&dir, "trace-bench", c, vec![c.random.seed], meta, vec!["trace_bench.csv".into()])
}

fn cmd_cost(c: &RunConfig, circuits: &[PathBuf], counts: Option<&[u64]>) -> Result<(), CliError> {
    let dir = out_dir(c)?;
    let shots = c.estimator.shots;
    let mut rows: Vec<(String, CostReport)> = Vec::new();
    match counts {
        Some(&[n1, n2, nm]) => rows.push(("counts".into(), CostReport::new(n1, n2, nm, shots))),
        Some(_) => return Err(CliError::Config("--counts takes N_1q,N_2q,N_m".into())),
        None => {}
    }
    for p in circuits {
        let circ = Circuit::parse(&io::read_text(p)?).map_err(|e| CliError::Parse(format!("{}: {e}", p.display())))?;
        rows.push((p.display().to_string(), hqc_cost(&circ, shots)));
    }
    if rows.is_empty() {
        return Err(CliError::Config("give circuit files or --counts".into()));
    }
    let table: Vec<Vec<String>> = rows
        .iter()
        .map(|(src, r)| {
            println!("{src}: N1q={} N2q={} Nm={} shots={} HQC={}", r.n_1q, r.n_2q, r.n_m, r.shots, r);
            vec![src.clone(), r.n_1q.to_string(), r.n_2q.to_string(), r.n_m.to_string(), r.shots.to_string(), r.to_string(), r.hqc().to_string()]
        })
        .collect();
    io::write_table(&dir.join("cost.csv"), &Meta::new(), &["source", "n_1q", "n_2q", "n_m", "shots", "hqc_exact", "hqc"], &table)?;
    finish(&dir, "cost", c, Vec::new(), Meta::new(), vec!["cost.csv".into()])
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let c = load_config(cli)?;
    match &cli.cmd {
        Command::Moments => cmd_moments(&c),
        Command::Reconstruct { moments, reference } => cmd_reconstruct(&c, moments, reference.as_deref()),
        Command::Thermo { dos } => cmd_thermo(&c, dos),
        Command::EntropyBench => cmd_entropy_bench(&c),
        Command::TraceBench => cmd_trace_bench(&c),
        Command::Cost { circuits, counts } => cmd_cost(&c, circuits, counts.as_deref()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("qkpm: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
