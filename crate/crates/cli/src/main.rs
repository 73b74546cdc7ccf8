use std::fs::File;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use spir_core::grs::{check_mds, schur_product_dim};
use spir_core::metrics::{capacity, secrecy_lower_bound, RateReport};
use spir_core::privacy::{
    entropy_symmetry_check, verify_database_privacy, verify_user_privacy, AuditConfig, AuditMode, Mutant,
    PrivacyReport, CEILING_ENV,
};
use spir_core::scheme::{ParamsSpec, SelectionCase};
use spir_core::sim::{decode_message, run_seeded_session, seeded_database, Endpoint, Kind, Loopback};
use spir_core::{Error, Fe, SchemeParams};

#[derive(Parser)]
#[command(name = "spir", version, about = "Symmetric PIR over MDS-coded storage with T colluding servers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one retrieval session and report what crossed the wire.
    Retrieve(RetrieveArgs),
    /// Run a privacy or code-structure audit.
    Audit(AuditArgs),
    /// Tabulate capacity and secrecy rate against measured sessions.
    Sweep(SweepArgs),
}

#[derive(Args, Clone)]
struct Scheme {
    /// Number of servers.
    #[arg(long)]
    n: usize,
    /// Storage code dimension.
    #[arg(long)]
    m: usize,
    /// Number of colluding servers.
    #[arg(long)]
    t: usize,
    /// Number of files.
    #[arg(long = "k-files", default_value_t = 2)]
    k_files: usize,
    /// Field modulus; 0 picks the smallest prime above N.
    #[arg(long, default_value_t = 0)]
    q: u32,
    /// Evaluation points λ, comma-separated.
    #[arg(long, value_delimiter = ',')]
    points: Option<Vec<u64>>,
    /// Storage multipliers Φ, comma-separated.
    #[arg(long, value_delimiter = ',')]
    phi: Option<Vec<u64>>,
    /// Query multipliers Ψ, comma-separated.
    #[arg(long, value_delimiter = ',')]
    psi: Option<Vec<u64>>,
    /// Permit a single file.
    #[arg(long)]
    single_file: bool,
}

impl Scheme {
    fn build(&self) -> Result<SchemeParams, Error> {
        let spec = ParamsSpec {
            n: self.n,
            m: self.m,
            t: self.t,
            files: self.k_files,
            modulus: self.q,
            points: self.points.clone(),
            phi: self.phi.clone(),
            psi: self.psi.clone(),
            allow_single_file: self.single_file,
        };
        spec.build()
    }
}

#[derive(Args)]
struct RetrieveArgs {
    #[command(flatten)]
    scheme: Scheme,
    /// Desired file, 1-based.
    #[arg(long, default_value_t = 1)]
    want: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write the session transcript here.
    #[arg(long)]
    transcript: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    User,
    Db,
    Entropy,
    Codes,
}

#[derive(Clone, Copy, ValueEnum)]
enum MutantArg {
    NoMask,
    NoRandomization,
    ShortMask,
}

impl From<MutantArg> for Mutant {
    fn from(m: MutantArg) -> Self {
        match m {
            MutantArg::NoMask => Mutant::NoMask,
            MutantArg::NoRandomization => Mutant::NoRandomization,
            MutantArg::ShortMask => Mutant::ShortMask,
        }
    }
}

#[derive(Args)]
struct AuditArgs {
    #[arg(long, value_enum)]
    mode: Mode,
    #[command(flatten)]
    scheme: Scheme,
    /// Prove user privacy from the query code instead of enumerating.
    #[arg(long)]
    structural: bool,
    #[arg(long, value_enum)]
    mutant: Option<MutantArg>,
    /// Node-set size for the entropy check; defaults to M+T−1.
    #[arg(long)]
    set_size: Option<usize>,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long, default_value_t = 2)]
    n_min: usize,
    #[arg(long, default_value_t = 8)]
    n_max: usize,
    #[arg(long = "k-files", default_value_t = 2)]
    k_files: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// CSV destination; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

enum Failure {
    Invalid(String),
    AuditFailed,
    Ceiling(String),
    Runtime(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::TooFewServers { .. }
            | Error::NotPrime(_)
            | Error::ModulusTooSmall { .. }
            | Error::InvalidParams(_)
            | Error::InvalidPoints
            | Error::ZeroMultiplier
            | Error::DimensionMismatch(_) => Failure::Invalid(e.to_string()),
            Error::EnumerationTooLarge { events, ceiling } => Failure::Ceiling(format!(
                "enumeration needs {events} elementary events, above the ceiling of {ceiling} (raise it with {CEILING_ENV})"
            )),
            other => Failure::Runtime(other.to_string()),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Runtime(e.to_string())
    }
}

fn fmt_symbols(v: &[Fe]) -> String {
    let vals: Vec<String> = v.iter().map(Fe::to_string).collect();
    format!("[{}]", vals.join(", "))
}

fn retrieve(args: RetrieveArgs) -> Result<(), Failure> {
    let p = args.scheme.build()?;
    if args.want == 0 || args.want > p.files() {
        return Err(Failure::Invalid(format!("--want must be in 1..={}", p.files())));
    }
    let want = args.want - 1;
    let t = run_seeded_session(&p, want, args.seed, &mut Loopback::new())?;
    let mut out = io::stdout().lock();
    writeln!(out, "session {p}, file {} of {}, seed {}", args.want, p.files(), args.seed)?;
    let case = match p.selection_case() {
        SelectionCase::Shifted => "shifted",
        SelectionCase::Blocked => "blocked",
    };
    writeln!(
        out,
        "layout: {} rounds, {} symbols per round, queries of {} symbols, {} masked unknowns per round ({case} selection)",
        p.rounds(),
        p.block_len(),
        p.query_len(),
        p.mask_len()
    )?;
    for r in 0..p.rounds() {
        let mut answers = vec![String::from("?"); p.servers()];
        let mut sent = 0;
        for m in t.messages() {
            let msg = decode_message(m.frame()).map_err(Failure::from)?;
            if msg.round as usize != r + 1 {
                continue;
            }
            match (msg.kind, m.to(), m.from()) {
                (Kind::Query, Endpoint::Server(_), _) => sent += msg.payload.len(),
                (Kind::Answer, Endpoint::User, Endpoint::Server(n)) => answers[n] = msg.payload[0].to_string(),
                _ => {}
            }
        }
        writeln!(out, "round {}: {sent} query symbols out, answers [{}]", r + 1, answers.join(", "))?;
    }
    let decoded = t.decoded().expect("session decoded");
    writeln!(out, "decoded file {}: {}", args.want, fmt_symbols(decoded))?;
    let stored = seeded_database(&p, args.seed).file(&p, want);
    if decoded != stored {
        return Err(Failure::Runtime(format!("decoded file differs from stored {}", fmt_symbols(&stored))));
    }
    writeln!(out, "matches stored file: yes")?;
    let c = t.counters();
    writeln!(
        out,
        "traffic: {} messages, {} bytes to servers, {} bytes to user, {} symbols downloaded",
        c.messages, c.bytes_to_servers, c.bytes_to_user, c.symbols_downloaded
    )?;
    let report = RateReport::from_transcript(&p, &t)?;
    writeln!(out, "rate: {} (capacity {})", report.achieved_rate, report.capacity)?;
    writeln!(out, "secrecy rate: {} (lower bound {})", report.achieved_secrecy, report.secrecy_bound)?;
    if let Some(path) = args.transcript {
        t.write_to(File::create(&path)?)?;
        writeln!(out, "transcript written to {}", path.display())?;
    }
    Ok(())
}

fn print_report(report: &PrivacyReport) -> Result<(), Failure> {
    print!("{report}");
    if report.passed() {
        Ok(())
    } else {
        Err(Failure::AuditFailed)
    }
}

fn audit(args: AuditArgs) -> Result<(), Failure> {
    let p = args.scheme.build()?;
    let config = AuditConfig::from_env();
    let mutant = args.mutant.map(Mutant::from).unwrap_or_default();
    println!("audit of {p}");
    match args.mode {
        Mode::User => {
            let mode = if args.structural { AuditMode::Structural } else { AuditMode::Exhaustive };
            print_report(&verify_user_privacy(&p, mode, mutant, &config)?)
        }
        Mode::Db => print_report(&verify_database_privacy(&p, mutant, &config)?),
        Mode::Entropy => {
            if args.mutant.is_some() {
                return Err(Failure::Invalid("the entropy check takes no mutant".into()));
            }
            let size = args.set_size.unwrap_or(p.mask_len().min(p.servers()));
            print_report(&entropy_symmetry_check(&p, size, &config)?)
        }
        Mode::Codes => {
            if args.mutant.is_some() {
                return Err(Failure::Invalid("the code audit takes no mutant".into()));
            }
            let gs = p.storage_code().generator();
            let gq = p.query_code().generator();
            let (s_ok, q_ok) = (check_mds(gs), check_mds(gq));
            let dim = schur_product_dim(gs, gq)?;
            let expect = p.mask_len().min(p.servers());
            println!("storage code MDS (every {0}×{0} submatrix invertible): {s_ok}", p.storage_dim());
            println!("query code MDS (every {0}×{0} submatrix invertible): {q_ok}", p.collusion());
            println!("Schur product dimension: {dim} (expected {expect})");
            if s_ok && q_ok && dim == expect {
                println!("verdict: PASS");
                Ok(())
            } else {
                println!("verdict: FAIL");
                Err(Failure::AuditFailed)
            }
        }
    }
}

fn sweep_row(n: usize, m: usize, t: usize, files: usize, seed: u64) -> Vec<String> {
    let bound = secrecy_lower_bound(n, m, t).map(|r| r.to_string()).unwrap_or_default();
    let mut row = vec![n.to_string(), m.to_string(), t.to_string(), files.to_string()];
    let p = match SchemeParams::new(n, m, t, files, 0) {
        Ok(p) => p,
        Err(_) => {
            row.extend(["".into(), capacity(n, m, t).to_string(), "".into(), bound, "".into(), "false".into()]);
            return row;
        }
    };
    row.push(p.field().modulus().to_string());
    let mut report = None;
    let mut ok = true;
    for want in 0..files {
        match run_seeded_session(&p, want, seed, &mut Loopback::new()) {
            Ok(tr) => {
                ok &= tr.decoded() == Some(&seeded_database(&p, seed).file(&p, want)[..]);
                report = RateReport::from_transcript(&p, &tr).ok().or(report);
            }
            Err(_) => ok = false,
        }
    }
    match report {
        Some(r) => row.extend([
            r.capacity.to_string(),
            r.achieved_rate.to_string(),
            r.secrecy_bound.to_string(),
            r.achieved_secrecy.to_string(),
        ]),
        None => row.extend([capacity(n, m, t).to_string(), "".into(), bound, "".into()]),
    }
    row.push((ok && report.is_some()).to_string());
    row
}

fn sweep(args: SweepArgs) -> Result<(), Failure> {
    if args.k_files < 2 {
        return Err(Failure::Invalid("K must be at least 2".into()));
    }
    let sink: Box<dyn Write> = match &args.out {
        Some(path) => Box::new(File::create(path)?),
        None => Box::new(io::stdout().lock()),
    };
    let mut w = csv::Writer::from_writer(sink);
    let csv_err = |e: csv::Error| Failure::Runtime(e.to_string());
    w.write_record([
        "N",
        "M",
        "T",
        "K",
        "q",
        "capacity",
        "achieved_rate",
        "secrecy_bound",
        "achieved_secrecy",
        "decode_ok",
    ])
    .map_err(csv_err)?;
    let mut rows = 0;
    for n in args.n_min.max(2)..=args.n_max {
        for m in 1..n {
            for t in 1..=n - m {
                w.write_record(sweep_row(n, m, t, args.k_files, args.seed)).map_err(csv_err)?;
                rows += 1;
            }
        }
    }
    w.flush()?;
    if let Some(path) = &args.out {
        eprintln!("wrote {rows} rows to {}", path.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Retrieve(a) => retrieve(a),
        Command::Audit(a) => audit(a),
        Command::Sweep(a) => sweep(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::AuditFailed) => ExitCode::from(1),
        Err(Failure::Invalid(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Ceiling(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
