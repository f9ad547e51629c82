use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use grothnorm::apps::{self, VerifyConfig};
use grothnorm::gram::{self, CertificateKind, OptConfig};
use grothnorm::io::{self, MatrixFile};
use grothnorm::rng::RngStream;
use grothnorm::rounding::{self, SharpnessConfig};
use grothnorm::special;
use grothnorm::{Field, SymMatrix, C64};

#[derive(Parser)]
#[command(name = "grothnorm", version, about = "Grothendieck d-norms and the inequalities between them")]
struct Cli {
    /// Master seed for every random choice.
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,
    /// Restarts per optimizer run.
    #[arg(long, global = true)]
    restarts: Option<usize>,
    /// Print JSON instead of text.
    #[arg(long, global = true)]
    json: bool,
    /// Relative slack for reported checks.
    #[arg(long, global = true, default_value_t = apps::TOL_REPORT)]
    tol: f64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum NormKind {
    #[value(name = "theta")]
    Theta,
    #[value(name = "Theta")]
    BigTheta,
    #[value(name = "gamma")]
    Gamma,
    #[value(name = "Gamma")]
    BigGamma,
    #[value(name = "G")]
    G,
}

#[derive(Clone, Copy, ValueEnum)]
enum FieldArg {
    Real,
    Complex,
}

impl From<FieldArg> for Field {
    fn from(f: FieldArg) -> Field {
        match f {
            FieldArg::Real => Field::Real,
            FieldArg::Complex => Field::Complex,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Compute one norm of the matrix in FILE.
    Compute {
        #[arg(long, value_enum)]
        norm: NormKind,
        /// Vector dimension; defaults to the smallest rank that attains the full norm.
        #[arg(long)]
        d: Option<usize>,
        /// Field to compute over; a real matrix may be read over the complexes.
        #[arg(long, value_enum)]
        field: Option<FieldArg>,
        file: PathBuf,
    },
    /// Compute all norms and check the inequalities that apply.
    Verify { file: PathBuf },
    /// Print the table of constants.
    Constants,
    /// Maximum cut of a nonnegative zero-diagonal weight matrix.
    Maxcut {
        #[arg(long, default_value_t = 64)]
        draws: usize,
        file: PathBuf,
    },
    /// Bracket the cut norm of a real rectangular matrix.
    Cutnorm { file: PathBuf },
    /// Stretch and spread of a real symmetric matrix.
    Stretch { file: PathBuf },
    /// Numerical experiments.
    Experiment {
        #[command(subcommand)]
        which: Experiment,
    },
    /// Monte-Carlo check of the Gaussian sign identities.
    Identities {
        /// Ambient dimension.
        #[arg(long, default_value_t = 3)]
        n: usize,
        #[arg(long, default_value_t = 100_000)]
        samples: usize,
        #[arg(long, value_enum, default_value = "real")]
        field: FieldArg,
        /// The inner product ⟨u, v⟩, in [−1, 1].
        #[arg(long, default_value_t = 0.5, allow_negative_numbers = true)]
        inner: f64,
    },
}

#[derive(Subcommand)]
enum Experiment {
    /// γ/θ for the normalized Gram matrix of m random unit vectors in dimension n.
    Sharpness {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        m: usize,
        #[arg(long, value_enum, default_value = "real")]
        field: FieldArg,
        /// Print one CSV row instead of a report.
        #[arg(long)]
        csv: bool,
    },
}

#[derive(Serialize)]
struct ComputeOutput {
    norm: &'static str,
    d: Option<usize>,
    field: Field,
    value: f64,
    kind: CertificateKind,
    warning: Option<String>,
}

fn emit<T: Serialize>(value: &T) -> anyhow::Result<()> {
    println!("{}", serde_json::to_string_pretty(value)?);
    Ok(())
}

fn read(path: &PathBuf) -> anyhow::Result<MatrixFile> {
    io::read_matrix(path).with_context(|| format!("reading {}", path.display()))
}

fn read_sym(path: &PathBuf) -> anyhow::Result<SymMatrix> {
    match read(path)? {
        MatrixFile::Sym(a) => Ok(a),
        MatrixFile::Rect(_) => bail!("{} holds a rectangular matrix; this command needs kind: sym", path.display()),
    }
}

fn matrix_id(path: &PathBuf) -> String {
    path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
}

fn compute(cli: &Cli, cfg: &OptConfig, norm: NormKind, d: Option<usize>, field: Option<FieldArg>, file: &PathBuf) -> anyhow::Result<()> {
    let m = read(file)?;
    let field = field.map(Field::from).unwrap_or(m.field());
    if m.field() == Field::Complex && field == Field::Real {
        bail!("a complex matrix cannot be read over the reals");
    }
    let lift = field == Field::Complex && m.field() == Field::Real;
    let name = match norm {
        NormKind::Theta => "theta",
        NormKind::BigTheta => "Theta",
        NormKind::Gamma => "gamma",
        NormKind::BigGamma => "Gamma",
        NormKind::G => "G",
    };
    let est = match (norm, &m) {
        (NormKind::G, MatrixFile::Rect(b)) => {
            let b = if lift { b.to_complex() } else { b.clone() };
            let d = d.unwrap_or_else(|| gram::convex_rank(b.rows() + b.cols(), field));
            let e = gram::g_d_rect(&b, d, cfg);
            (e.value, e.kind, Some(d), e.warning)
        }
        (_, MatrixFile::Rect(_)) => bail!("{name} is defined for symmetric matrices; use --norm G"),
        (_, MatrixFile::Sym(a)) => {
            let a = if lift { a.to_complex() } else { a.clone() };
            match norm {
                NormKind::Theta => {
                    let v = apps::theta(&a, cfg);
                    (v.value, v.kind, None, None)
                }
                NormKind::BigTheta => {
                    let v = apps::big_theta(&a, cfg);
                    (v.value, v.kind, None, None)
                }
                NormKind::G => {
                    let d = d.unwrap_or_else(|| gram::convex_rank(2 * a.n(), field));
                    let e = gram::g_d_sym(&a, d, cfg);
                    (e.value, e.kind, Some(d), e.warning)
                }
                NormKind::Gamma | NormKind::BigGamma => {
                    let d = d.unwrap_or_else(|| gram::convex_rank(a.n(), field));
                    let e = if matches!(norm, NormKind::Gamma) {
                        gram::gamma_d(&a, d, cfg)
                    } else {
                        gram::big_gamma_d(&a, d, cfg)
                    };
                    (e.value, e.kind, Some(d), e.warning)
                }
            }
        }
    };
    if est.2 == Some(0) {
        bail!("d must be positive");
    }
    let out = ComputeOutput { norm: name, d: est.2, field, value: est.0, kind: est.1, warning: est.3 };
    if cli.json {
        emit(&out)?;
    } else {
        println!("{} = {:.12}  ({})", out.norm, out.value, serde_json::to_value(out.kind)?.as_str().unwrap_or(""));
        if let Some(w) = &out.warning {
            println!("warning: {w}");
        }
    }
    Ok(())
}

fn print_constants(json: bool) -> anyhow::Result<()> {
    let t = special::constants();
    if json {
        return emit(t);
    }
    let rows = [
        ("k_gamma_bound_real  (sinh(pi/2))", t.k_gamma_bound_real),
        ("k_gamma_bound_real_improved", t.k_gamma_bound_real_improved),
        ("k_gamma_bound_complex  (8/pi - 1)", t.k_gamma_bound_complex),
        ("psd_real  (pi/2)", t.psd_real),
        ("psd_complex  (4/pi)", t.psd_complex),
        ("alpha_gw_real", t.alpha_gw_real),
        ("alpha_gw_complex", t.alpha_gw_complex),
        ("a0_real  (2/pi)", t.a0_real),
        ("a0_complex  (pi/4)", t.a0_complex),
        ("sdd_real", t.sdd_real),
        ("sdd_complex", t.sdd_complex),
        ("krivine_g12  (sqrt 2)", t.krivine_g12),
    ];
    for (name, v) in rows {
        println!("{name:<36} {v:.15}");
    }
    println!("{:<36} [{}, {}]  (bounds)", "k_g_real", t.k_g_real.lower, t.k_g_real.upper);
    println!("{:<36} [{}, {}]  (bounds)", "k_g_complex", t.k_g_complex.lower, t.k_g_complex.upper);
    Ok(())
}

/// Runs the command; `Ok(false)` means a verification failed.
fn run(cli: &Cli) -> anyhow::Result<bool> {
    if !(cli.tol >= 0.0) {
        bail!("--tol must be nonnegative");
    }
    let mut cfg = OptConfig::default().with_seed(cli.seed);
    if let Some(r) = cli.restarts {
        if r == 0 {
            bail!("--restarts must be positive");
        }
        cfg.restarts = r;
    }
    match &cli.command {
        Command::Compute { norm, d, field, file } => compute(cli, &cfg, *norm, *d, *field, file).map(|_| true),
        Command::Verify { file } => {
            let a = read_sym(file)?;
            let report = apps::verify_sgi(&a, &matrix_id(file), &VerifyConfig { opt: cfg, tol: cli.tol });
            if cli.json {
                emit(&report)?;
            } else {
                let labels: Vec<String> = report.cone_labels.iter().map(|l| format!("{l:?}")).collect();
                println!("{} ({} {}x{}), cones: {}", report.matrix_id, report.field, report.n, report.n, labels.join(", "));
                let n = &report.norms;
                for (name, v) in [("theta", n.theta), ("Theta", n.big_theta), ("gamma", n.gamma), ("Gamma", n.big_gamma), ("G", n.g)] {
                    println!("  {name:<6} {:.10}  {}", v.value, serde_json::to_value(v.kind)?.as_str().unwrap_or(""));
                }
                for c in &report.checks {
                    let status = if c.pass { "pass" } else { "FAIL" };
                    let note = if c.exact { "" } else { "  (heuristic)" };
                    println!("  [{status}] {:<26} lhs {:.10}  rhs {:.10}  c {:.6} ({}){note}", c.name, c.lhs, c.rhs, c.constant, c.constant_name);
                }
                for w in &report.warnings {
                    println!("  warning: {w}");
                }
            }
            Ok(report.passed())
        }
        Command::Constants => print_constants(cli.json).map(|_| true),
        Command::Maxcut { draws, file } => {
            let a = read_sym(file)?;
            let r = apps::maxcut(&a, *draws, &cfg)?;
            if cli.json {
                emit(&r)?;
            } else {
                match r.exact {
                    Some(v) => println!("maxcut (exact)     {v:.10}"),
                    None => println!("maxcut (exact)     not computed, n = {} > 24", r.n),
                }
                println!("relaxation         {:.10}", r.sdp_value);
                println!("rounded cut        {:.10}  (best of {} draws)", r.rounded_value, r.rounding_draws);
                let side: String = r.rounded_cut.iter().map(|&s| if s { '1' } else { '0' }).collect();
                println!("rounded partition  {side}");
            }
            Ok(true)
        }
        Command::Cutnorm { file } => {
            let b = match read(file)? {
                MatrixFile::Rect(b) => b,
                MatrixFile::Sym(a) => grothnorm::RectMatrix::from_entries(a.n(), a.n(), a.field(), a.entries())?,
            };
            let r = apps::cutnorm_bracket(&b, &cfg)?;
            if cli.json {
                emit(&r)?;
            } else {
                println!("bracket  [{:.10}, {:.10}]", r.lower, r.upper);
                if let Some([lo, hi]) = r.theta_bracket {
                    println!("theta bracket  [{lo:.10}, {hi:.10}]");
                }
                if let Some(v) = r.exact {
                    println!("exact    {v:.10}");
                }
            }
            Ok(true)
        }
        Command::Stretch { file } => {
            let a = read_sym(file)?;
            let r = apps::stretch_spread(&a, &cfg, cli.tol)?;
            if cli.json {
                emit(&r)?;
            } else {
                println!("stretch  {:.10}", r.stretch);
                println!("spread   {:.10}", r.spread);
                match r.ratio {
                    Some(q) => println!("ratio    {q:.10}"),
                    None => println!("ratio    undefined (stretch is 0)"),
                }
                println!("bounds   {}", if r.bounds_hold { "hold" } else { "VIOLATED" });
            }
            Ok(r.bounds_hold)
        }
        Command::Experiment { which: Experiment::Sharpness { n, m, field, csv } } => {
            let mut scfg = SharpnessConfig::default();
            if let Some(r) = cli.restarts {
                scfg.restarts = r;
            }
            let r = rounding::sharpness_experiment(*n, *m, (*field).into(), RngStream::new(cli.seed, 0), &scfg)?;
            if cli.json {
                emit(&r)?;
            } else if *csv {
                println!("n,m,field,gamma_lower,theta_estimate,ratio_estimate,finite_n_bound,mc_std");
                println!(
                    "{},{},{},{},{},{},{},{}",
                    r.n, r.m, r.field, r.gamma_lower, r.theta_estimate, r.ratio_estimate, r.finite_n_bound, r.mc_std
                );
            } else {
                println!("n = {}, m = {}, field = {}", r.n, r.m, r.field);
                println!("gamma_lower     {:.8}  (std {:.2e})", r.gamma_lower, r.mc_std);
                println!("theta_estimate  {:.8}{}", r.theta_estimate, if r.theta_exact { "  (exact)" } else { "" });
                println!("ratio_estimate  {:.6}", r.ratio_estimate);
                println!("finite-n bound  {:.6}", r.finite_n_bound);
                println!("note: {}", r.note);
            }
            Ok(true)
        }
        Command::Identities { n, samples, field, inner } => {
            let field = Field::from(*field);
            if *n < 2 || !(inner.abs() <= 1.0) {
                bail!("need n >= 2 and |inner| <= 1");
            }
            let mut u = vec![C64::new(0.0, 0.0); *n];
            let mut v = u.clone();
            u[0] = C64::new(1.0, 0.0);
            v[0] = C64::new(*inner, 0.0);
            v[1] = C64::new((1.0 - inner * inner).sqrt(), 0.0);
            let r = rounding::mc_identities(&u, &v, field, *samples, RngStream::new(cli.seed, 0))?;
            if cli.json {
                emit(&r)?;
            } else {
                println!("field {}, n = {}, <u,v> = {}, N = {samples}", r.field, r.dim, inner);
                for c in &r.checks {
                    println!(
                        "  {:<13} estimate {:+.6}{:+.6}i  expected {:+.6}{:+.6}i  z {:.2}",
                        c.name, c.estimate.mean.re, c.estimate.mean.im, c.expected.re, c.expected.im, c.z_score
                    );
                }
            }
            Ok(r.all_within(4.0))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
