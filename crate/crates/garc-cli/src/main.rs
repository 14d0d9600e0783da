//! Command-line front end for the garc toolkit: construct and verify
//! generalised (dual) arc families over GF(q), dualize and repair them,
//! and run the two subspace secret-sharing schemes with exact and
//! simulated attack probabilities.
//!
//! Every randomized subcommand takes an explicit seed; identical flag
//! sets produce byte-identical outputs. Exit codes: 0 success, 1 a
//! verification, extension or reconstruction failure, 2 usage or input
//! errors, 3 internal inconsistencies.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Parser, Subcommand, ValueEnum};

use garc::arcs::{
    dualize, extend_deficient, nucleus_of_family, verify, verify_t_d1_hypotheses, DualArcFamily,
    VerifyMode,
};
use garc::gf::Field;
use garc::linalg::Subspace;
use garc::sharing::{
    deal, reconstruct, simulate_attack, twisted_cubic_secret, PublicInfo, SchemeParams,
    SchemeVariant, ShareFile,
};
use garc::veronese::{NucleusOutcome, VeroneseContext};
use garc::Error;

#[derive(Parser)]
#[command(
    name = "garc",
    version,
    about = "Generalised (dual) arcs in PG(n, q): construction, verification, extension and subspace secret sharing"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mode {
    Exhaustive,
    Sampled,
}

#[derive(Subcommand)]
enum Command {
    /// Build the degree-d Veronesean dual arc family over GF(q)
    Construct {
        /// Field order, a prime power
        #[arg(long)]
        q: u64,
        /// Projective dimension of the source space PG(n, q)
        #[arg(long)]
        n: usize,
        /// Degree of the embedding
        #[arg(long)]
        d: usize,
        /// Output family file
        #[arg(long)]
        out: PathBuf,
    },
    /// Check the intersection axioms and regularity of a family file
    Verify {
        #[arg(long = "in")]
        input: PathBuf,
        /// Exhaustive subset checking, or random subsets per level
        #[arg(long, value_enum, default_value_t = Mode::Exhaustive)]
        mode: Mode,
        /// Sampled mode: subsets drawn per intersection level
        #[arg(long, default_value_t = 64)]
        per_level: usize,
        /// Sampled mode RNG seed (mandatory there; no implicit entropy)
        #[arg(long, required_if_eq("mode", "sampled"))]
        seed: Option<u64>,
        /// Also check the order-1 extension hypotheses at this deficiency
        #[arg(long)]
        delta: Option<usize>,
    },
    /// Swap a family with its dual (elements become their perps)
    Dualize {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Recover the missing elements of a deficient order-1 dual family
    Extend {
        #[arg(long = "in")]
        input: PathBuf,
        /// Number of missing elements
        #[arg(long)]
        delta: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Compute the nucleus of a full order-1 dual family
    Nucleus {
        #[arg(long = "in")]
        input: PathBuf,
        /// Write the nucleus subspace here as well
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Deal shares of a fresh secret over an arc family
    Deal {
        /// Scheme variant: 1 secret hyperplane, 2 secret subspace
        #[arg(long)]
        scheme: u8,
        /// Arc family file (dualize a constructed family first)
        #[arg(long = "in")]
        input: PathBuf,
        /// Dealer RNG seed
        #[arg(long)]
        seed: u64,
        /// Directory receiving share_<id>.txt and public.txt
        #[arg(long)]
        out_dir: PathBuf,
        /// Also write secret.txt (the dealt secret subspace)
        #[arg(long)]
        emit_secret: bool,
    },
    /// Recover the secret from at least k share files
    Reconstruct {
        /// Public parameter file written by deal
        #[arg(long)]
        public: PathBuf,
        /// Share files, repeat the flag per file
        #[arg(long = "share", required = true)]
        shares: Vec<PathBuf>,
    },
    /// Re-deal with a fixed seed and estimate attack probabilities
    Simulate {
        /// Scheme variant: 1 secret hyperplane, 2 secret subspace
        #[arg(long)]
        scheme: u8,
        /// Arc family file
        #[arg(long = "in")]
        input: PathBuf,
        /// Seed the dealer is re-run with
        #[arg(long)]
        deal_seed: u64,
        /// Monte Carlo trials per coalition size
        #[arg(long)]
        trials: u64,
        /// Simulation RNG seed
        #[arg(long)]
        seed: u64,
    },
    /// Walk through the twisted-cubic secret hidden in a dual arc plane
    CubicDemo {
        /// Field order, a prime power
        #[arg(long)]
        q: u64,
        /// Monte Carlo trials per leak entry
        #[arg(long, requires = "seed")]
        trials: Option<u64>,
        /// Simulation RNG seed, required with --trials
        #[arg(long, requires = "trials")]
        seed: Option<u64>,
    },
}

/// Terminal failure: message for stderr plus the process exit code.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Failure {
        Failure {
            code: 2,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Failure {
        let code = match &e {
            Error::InvalidFamily(_)
            | Error::HypothesesNotMet(_)
            | Error::ExtensionFailed { .. }
            | Error::NotEnoughShares { .. }
            | Error::ReconstructionFailed(_) => 1,
            Error::Internal(_)
            | Error::CoverageViolation { .. }
            | Error::UnclassifiablePairSpan { .. } => 3,
            _ => 2,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => code,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn run(command: Command) -> Result<ExitCode, Failure> {
    match command {
        Command::Construct { q, n, d, out } => cmd_construct(q, n, d, &out),
        Command::Verify {
            input,
            mode,
            per_level,
            seed,
            delta,
        } => cmd_verify(&input, mode, per_level, seed, delta),
        Command::Dualize { input, out } => cmd_dualize(&input, &out),
        Command::Extend { input, delta, out } => cmd_extend(&input, delta, &out),
        Command::Nucleus { input, out } => cmd_nucleus(&input, out.as_deref()),
        Command::Deal {
            scheme,
            input,
            seed,
            out_dir,
            emit_secret,
        } => cmd_deal(scheme, &input, seed, &out_dir, emit_secret),
        Command::Reconstruct { public, shares } => cmd_reconstruct(&public, &shares),
        Command::Simulate {
            scheme,
            input,
            deal_seed,
            trials,
            seed,
        } => cmd_simulate(scheme, &input, deal_seed, trials, seed),
        Command::CubicDemo { q, trials, seed } => cmd_cubic_demo(q, trials, seed),
    }
}

fn read_to_string(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path)
        .map_err(|e| Failure::usage(format!("cannot read {}: {e}", path.display())))
}

fn write_file(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text)
        .map_err(|e| Failure::usage(format!("cannot write {}: {e}", path.display())))
}

fn read_family(path: &Path) -> Result<DualArcFamily, Failure> {
    Ok(DualArcFamily::from_text(&read_to_string(path)?)?)
}

/// Factor a prime power q = p^e; anything else is a usage error.
fn parse_field(q: u64) -> Result<Arc<Field>, Failure> {
    if q < 2 {
        return Err(Failure::usage(format!("q must be at least 2, got {q}")));
    }
    let mut p = q;
    let mut c = 2;
    while c * c <= q {
        if q % c == 0 {
            p = c;
            break;
        }
        c += 1;
    }
    let mut e = 0;
    let mut rest = q;
    while rest % p == 0 {
        rest /= p;
        e += 1;
    }
    if rest != 1 {
        return Err(Failure::usage(format!("q = {q} is not a prime power")));
    }
    Ok(Field::new(p, e)?)
}

fn join<T: ToString>(items: &[T]) -> String {
    items
        .iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join(" ")
}

fn cmd_construct(q: u64, n: usize, d: usize, out: &Path) -> Result<ExitCode, Failure> {
    let field = parse_field(q)?;
    if n == 0 {
        if d == 0 {
            return Err(Failure::usage("d must be at least 1"));
        }
        // PG(0, q) has a single point and the embedded family degenerates
        // to that point; the library type cannot hold an ambient dimension
        // of 0, so the file is written directly.
        eprintln!("warning: n=0 yields the degenerate single-point family");
        let sub = Subspace::full(&field, 0);
        let params = vec![0isize; d + 2];
        let text = format!(
            "{} 0 {} 1 dual {}\n{}",
            field.order(),
            d,
            join(&params),
            sub.to_text()
        );
        write_file(out, &text)?;
        println!("parameters: {}", join(&params));
        println!("elements: 1");
        return Ok(ExitCode::SUCCESS);
    }
    let ctx = VeroneseContext::new(&field, n, d)?;
    let family = ctx.build_dual_arc()?;
    write_file(out, &family.to_text())?;
    println!("parameters: {}", join(family.params()));
    println!("elements: {}", family.len());
    Ok(ExitCode::SUCCESS)
}

fn cmd_verify(
    input: &Path,
    mode: Mode,
    per_level: usize,
    seed: Option<u64>,
    delta: Option<usize>,
) -> Result<ExitCode, Failure> {
    let family = read_family(input)?;
    let vmode = match mode {
        Mode::Exhaustive => VerifyMode::Exhaustive,
        Mode::Sampled => VerifyMode::Sampled {
            per_level,
            seed: seed.expect("clap requires --seed in sampled mode"),
        },
    };
    let report = verify(&family, vmode);
    print!("{}", report.to_kv());
    if !report.failures.is_empty() {
        eprint!("{report}");
    }
    let mut ok = report.axioms_hold;
    if let Some(delta) = delta {
        let hyp = verify_t_d1_hypotheses(&family, delta)?;
        print!("{}", hyp.to_kv());
        ok &= hyp.all_hold();
    }
    Ok(if ok { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn cmd_dualize(input: &Path, out: &Path) -> Result<ExitCode, Failure> {
    let family = read_family(input)?;
    let dual = dualize(&family);
    write_file(out, &dual.to_text())?;
    println!("kind: {}", dual.kind());
    println!("parameters: {}", join(dual.params()));
    println!("elements: {}", dual.len());
    Ok(ExitCode::SUCCESS)
}

fn cmd_extend(input: &Path, delta: usize, out: &Path) -> Result<ExitCode, Failure> {
    let family = read_family(input)?;
    let repaired = extend_deficient(&family, delta)?;
    write_file(out, &repaired.to_text())?;
    println!("elements: {}", repaired.len());
    Ok(ExitCode::SUCCESS)
}

fn cmd_nucleus(input: &Path, out: Option<&Path>) -> Result<ExitCode, Failure> {
    let family = read_family(input)?;
    match nucleus_of_family(&family)? {
        NucleusOutcome::Nucleus(nucleus) => {
            println!("nucleus dimension: {}", nucleus.dim());
            print!("{}", nucleus.to_text());
            if let Some(out) = out {
                write_file(out, &nucleus.to_text())?;
            }
            Ok(ExitCode::SUCCESS)
        }
        NucleusOutcome::NotExtendable { span_dim } => {
            println!("not extendable: the contact points span dimension {span_dim}");
            Ok(ExitCode::from(1))
        }
    }
}

fn cmd_deal(
    scheme: u8,
    input: &Path,
    seed: u64,
    out_dir: &Path,
    emit_secret: bool,
) -> Result<ExitCode, Failure> {
    let family = read_family(input)?;
    let variant = SchemeVariant::from_number(scheme)?;
    let params = SchemeParams::from_arc(variant, &family)?;
    let bundle = deal(&params, &family, seed)?;
    fs::create_dir_all(out_dir)
        .map_err(|e| Failure::usage(format!("cannot create {}: {e}", out_dir.display())))?;
    println!("scheme: {}", variant.number());
    println!("k: {}", params.k());
    println!("participants: {}", params.participant_count());
    for (id, _) in bundle.shares() {
        let file = bundle
            .share_file(*id)
            .expect("dealt participant ids have share files");
        let path = out_dir.join(format!("share_{id}.txt"));
        write_file(&path, &file.to_text())?;
        println!("wrote: {}", path.display());
    }
    let public_path = out_dir.join("public.txt");
    write_file(&public_path, &bundle.public_info().to_text())?;
    println!("wrote: {}", public_path.display());
    if emit_secret {
        let secret_path = out_dir.join("secret.txt");
        write_file(&secret_path, &bundle.secret().to_text())?;
        println!("wrote: {}", secret_path.display());
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_reconstruct(public: &Path, share_paths: &[PathBuf]) -> Result<ExitCode, Failure> {
    let info = PublicInfo::from_text(&read_to_string(public)?)?;
    let mut shares = Vec::new();
    for path in share_paths {
        let file = ShareFile::from_text(&read_to_string(path)?)?;
        if file.variant != info.variant || file.n != info.n || file.k != info.k {
            return Err(Failure::usage(format!(
                "share file {} belongs to a different scheme instance",
                path.display()
            )));
        }
        shares.push(file.share);
    }
    let secret = reconstruct(&info, &shares)?;
    print!("{}", secret.to_text());
    Ok(ExitCode::SUCCESS)
}

fn cmd_simulate(
    scheme: u8,
    input: &Path,
    deal_seed: u64,
    trials: u64,
    seed: u64,
) -> Result<ExitCode, Failure> {
    let family = read_family(input)?;
    let variant = SchemeVariant::from_number(scheme)?;
    let params = SchemeParams::from_arc(variant, &family)?;
    let bundle = deal(&params, &family, deal_seed)?;
    let mut all_ok = true;
    for i in 0..params.k() {
        let est = simulate_attack(&bundle, i, trials, seed)?;
        println!("{est}");
        all_ok &= est.within_tolerance;
    }
    Ok(if all_ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

fn cmd_cubic_demo(q: u64, trials: Option<u64>, seed: Option<u64>) -> Result<ExitCode, Failure> {
    let field = parse_field(q)?;
    let ctx = VeroneseContext::new(&field, 2, 2)?;
    let demo = twisted_cubic_secret(&ctx)?;
    println!("cubic points: {}", demo.cubic_points.len());
    for p in &demo.cubic_points {
        println!("cubic point: {}", join(p));
    }
    println!("secret plane dimension: {}", demo.secret_plane.dim());
    println!("public space dimension: {}", demo.public_space.dim());
    println!("shares: {}", demo.shares.len());
    for (i, p) in demo.leak.iter().enumerate() {
        println!("i={i} leak={p}");
    }
    let mut all_ok = true;
    if let Some(trials) = trials {
        let seed = seed.expect("clap ties --seed to --trials");
        for i in 0..demo.leak.len() {
            let est = demo.simulate(i, trials, seed)?;
            println!("{est}");
            all_ok &= est.within_tolerance;
        }
    }
    Ok(if all_ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}
