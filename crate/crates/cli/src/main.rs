use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use btdm_core::codec::{build_symbol, demap_symbol, CodecParams, DEFAULT_F};
use btdm_core::harness::{self, ExperimentConfig};
use btdm_core::{Bits, CMatrix, Complex64, Error};
use clap::{Parser, Subcommand};

/// Tensor block-term modulation simulator.
#[derive(Parser)]
#[command(name = "btdm", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a Monte-Carlo sweep and write one CSV row per cell.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        /// Overrides the configured seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Output CSV; defaults to the configured path, then stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Print uniqueness bounds, degrees of freedom and bit budgets.
    CheckParams {
        #[arg(long)]
        config: PathBuf,
    },
    /// Map bits to a constellation symbol, printed as CSV (re,im per column).
    Encode {
        #[arg(long)]
        t: usize,
        #[arg(long)]
        l: usize,
        /// Left-aligned hex payload.
        #[arg(long)]
        bits: String,
        /// Payload length in bits; defaults to four per hex digit.
        #[arg(long)]
        ell: Option<usize>,
        #[arg(long, default_value_t = DEFAULT_F)]
        f: f64,
    },
    /// Demap a symbol estimate read from CSV back to hex.
    Decode {
        #[arg(long)]
        t: usize,
        #[arg(long)]
        l: usize,
        #[arg(long)]
        matrix: PathBuf,
        /// Payload length in bits.
        #[arg(long)]
        ell: usize,
        #[arg(long, default_value_t = DEFAULT_F)]
        f: f64,
    },
    /// Time the demodulator for every configured user count.
    Bench {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value_t = 5)]
        fits: usize,
    },
}

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::SolverFailure(_) => 3,
        Error::Config(_) | Error::InvalidArgument(_) | Error::PayloadTooSmall { .. } => 2,
        _ => 1,
    }
}

fn io_err(e: io::Error) -> Error {
    Error::Config(e.to_string())
}

fn simulate(
    config: PathBuf,
    seed: Option<u64>,
    out: Option<PathBuf>,
    trials: Option<usize>,
    threads: Option<usize>,
) -> Result<(), Error> {
    let mut cfg = ExperimentConfig::load(&config)?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    if let Some(t) = trials {
        cfg.trials = t;
    }
    if threads.is_some() {
        cfg.threads = threads;
    }
    let rows = harness::run_monte_carlo(&cfg)?;
    match out.or(cfg.out.as_ref().map(PathBuf::from)) {
        Some(path) => harness::write_csv(&rows, BufWriter::new(File::create(&path).map_err(io_err)?)),
        None => harness::write_csv(&rows, io::stdout().lock()),
    }
}

fn encode(t: usize, l: usize, hex: &str, ell: Option<usize>, f: f64) -> Result<(), Error> {
    let hex = hex.trim().trim_start_matches("0x");
    let ell = ell.unwrap_or(4 * hex.len());
    let params = CodecParams::new(t, l, ell, f)?;
    let symbol = build_symbol(&Bits::from_hex(hex, ell)?, &params)?;
    let mut out = io::stdout().lock();
    for row in symbol.matrix().row_iter() {
        let cells: Vec<String> = row.iter().flat_map(|z| [z.re.to_string(), z.im.to_string()]).collect();
        writeln!(out, "{}", cells.join(",")).map_err(io_err)?;
    }
    Ok(())
}

fn read_matrix(path: &PathBuf, t: usize, l: usize) -> Result<CMatrix, Error> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| Error::Config(e.to_string()))?;
    let mut m = CMatrix::zeros(t, l);
    let mut rows = 0;
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::Config(e.to_string()))?;
        if i >= t || record.len() != 2 * l {
            return Err(Error::Config(format!("expected {t} rows of {} numbers", 2 * l)));
        }
        let v: Vec<f64> = record
            .iter()
            .map(|s| s.parse::<f64>().map_err(|e| Error::Config(format!("{s:?}: {e}"))))
            .collect::<Result<_, _>>()?;
        for c in 0..l {
            m[(i, c)] = Complex64::new(v[2 * c], v[2 * c + 1]);
        }
        rows += 1;
    }
    if rows != t {
        return Err(Error::Config(format!("expected {t} rows, found {rows}")));
    }
    Ok(m)
}

fn decode(t: usize, l: usize, matrix: PathBuf, ell: usize, f: f64) -> Result<(), Error> {
    let params = CodecParams::new(t, l, ell, f)?;
    let estimate = read_matrix(&matrix, t, l)?;
    let demapped = demap_symbol(&estimate, &params)?;
    println!("{}", demapped.bits.to_hex());
    eprintln!("confidence {:.3e}", demapped.confidence);
    Ok(())
}

fn bench(config: PathBuf, fits: usize) -> Result<(), Error> {
    let cfg = ExperimentConfig::load(&config)?;
    println!("K,T1,T2,N,fits,mean_ms,mean_iterations");
    for row in harness::bench(&cfg, fits)? {
        let (t1, t2, n) = row.dims;
        println!("{},{t1},{t2},{n},{},{:.3},{:.1}", row.k, row.fits, row.mean_ms, row.mean_iterations);
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate { config, seed, out, trials, threads } => simulate(config, seed, out, trials, threads),
        Command::CheckParams { config } => {
            ExperimentConfig::load(&config).and_then(|c| harness::check_params(&c)).map(|r| println!("{r}"))
        }
        Command::Encode { t, l, bits, ell, f } => encode(t, l, &bits, ell, f),
        Command::Decode { t, l, matrix, ell, f } => decode(t, l, matrix, ell, f),
        Command::Bench { config, fits } => bench(config, fits),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
