use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use num_rational::Ratio;
use serde::Serialize;

use charsum::characters::{build_character_group, Parity};
use charsum::examples::{example1, example2, example3, example4, sweep, EXAMPLE4_TOLERANCE};
use charsum::fourier_engine::{verify_theorem, SeriesOptions};
use charsum::parse::{parse_function, parse_unit_interval, BuiltinFunction};
use charsum::report::{to_json, to_pretty, write_csv, VerificationReport};

#[derive(Parser)]
#[command(name = "charsum")]
#[command(about = "Evaluate and verify Dirichlet character sums through Fourier series")]
#[command(version)]
struct Cli {
    #[command(subcommand)]
    command: Commands,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Pretty,
}

#[derive(Subcommand)]
enum Commands {
    /// List every character modulo q
    Characters {
        #[arg(short = 'q', long = "modulus")]
        modulus: u64,

        #[arg(long, value_enum, default_value = "pretty")]
        format: Format,

        #[arg(long)]
        output: Option<PathBuf>,
    },

    /// Compare the direct sum with the Fourier series for every primitive character mod q
    VerifyTheorem {
        #[arg(short = 'q', long = "modulus")]
        modulus: u64,

        /// One of t2, t, exp, log, step:<y>
        #[arg(long, value_parser = parse_function)]
        function: BuiltinFunction,

        /// Target accuracy for the series
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,

        #[arg(long, default_value_t = 1_000_000)]
        terms_cap: u64,

        #[arg(long, value_enum, default_value = "pretty")]
        format: Format,

        #[arg(long)]
        output: Option<PathBuf>,
    },

    /// Check one of the four worked identities for the real character of discriminant d
    Example {
        #[arg(value_parser = clap::value_parser!(u8).range(1..=4))]
        id: u8,

        #[arg(short = 'd', long = "discriminant", allow_negative_numbers = true)]
        discriminant: i64,

        /// Point in (0, 1) for identity 4, as a fraction or decimal
        #[arg(long, value_parser = parse_unit_interval)]
        y: Option<Ratio<i64>>,

        /// Defaults to 1e-8, or 5e-4 for the averaged series of identity 4
        #[arg(long)]
        tol: Option<f64>,

        /// Averaging window start N for identity 4
        #[arg(long, default_value_t = 10_000)]
        terms: u64,

        #[arg(long, value_enum, default_value = "pretty")]
        format: Format,

        #[arg(long)]
        output: Option<PathBuf>,
    },

    /// Run every applicable check for fundamental discriminants with from <= |d| <= to
    Sweep {
        #[arg(long, default_value_t = 3)]
        from: u64,

        #[arg(long)]
        to: u64,

        #[arg(long, default_value_t = 1e-8)]
        tol: f64,

        #[arg(long, value_enum, default_value = "csv")]
        format: Format,

        #[arg(long)]
        output: Option<PathBuf>,
    },
}

#[derive(Serialize)]
struct CharacterRow {
    label: String,
    modulus: u64,
    index: u64,
    conductor: u64,
    parity: Parity,
    is_real: bool,
    is_primitive: bool,
    is_principal: bool,
}

fn command_echo() -> String {
    let args: Vec<String> = std::env::args().skip(1).collect();
    std::iter::once("charsum".to_string())
        .chain(args)
        .collect::<Vec<_>>()
        .join(" ")
}

fn open_output(path: Option<&Path>) -> Result<Box<dyn Write>, String> {
    match path {
        Some(p) => File::create(p)
            .map(|f| Box::new(BufWriter::new(f)) as Box<dyn Write>)
            .map_err(|e| format!("cannot write {}: {e}", p.display())),
        None => Ok(Box::new(io::stdout().lock())),
    }
}

fn emit(
    reports: &mut [VerificationReport],
    format: Format,
    output: Option<&Path>,
) -> Result<(), String> {
    let echo = command_echo();
    for r in reports.iter_mut() {
        r.command = echo.clone();
    }
    let mut out = open_output(output)?;
    let written = match format {
        Format::Json => to_json(reports)
            .map_err(|e| e.to_string())
            .and_then(|s| writeln!(out, "{s}").map_err(|e| e.to_string())),
        Format::Csv => write_csv(&mut out, reports).map_err(|e| e.to_string()),
        Format::Pretty => write!(out, "{}", to_pretty(reports)).map_err(|e| e.to_string()),
    };
    written.and_then(|()| out.flush().map_err(|e| e.to_string()))
}

fn characters(q: u64, format: Format, output: Option<&Path>) -> Result<bool, String> {
    let group = build_character_group(q).map_err(|e| e.to_string())?;
    let rows: Vec<CharacterRow> = group
        .characters()
        .map(|chi| CharacterRow {
            label: chi.label().to_string(),
            modulus: q,
            index: chi.label().index,
            conductor: chi.conductor(),
            parity: chi.parity(),
            is_real: chi.is_real(),
            is_primitive: chi.is_primitive(),
            is_principal: chi.is_principal(),
        })
        .collect();
    let mut out = open_output(output)?;
    let io_err = |e: io::Error| e.to_string();
    match format {
        Format::Json => {
            let s = serde_json::to_string_pretty(&rows).map_err(|e| e.to_string())?;
            writeln!(out, "{s}").map_err(io_err)?;
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(&mut out);
            for r in &rows {
                w.serialize(r).map_err(|e| e.to_string())?;
            }
            w.flush().map_err(io_err)?;
        }
        Format::Pretty => {
            writeln!(
                out,
                "{:<12} {:>9} {:<6} {:<5} {:<9} {:<9}",
                "label", "conductor", "parity", "real", "primitive", "principal"
            )
            .map_err(io_err)?;
            for r in &rows {
                writeln!(
                    out,
                    "{:<12} {:>9} {:<6} {:<5} {:<9} {:<9}",
                    r.label, r.conductor, r.parity, r.is_real, r.is_primitive, r.is_principal
                )
                .map_err(io_err)?;
            }
        }
    }
    out.flush().map_err(io_err)?;
    Ok(true)
}

fn verify(
    q: u64,
    function: BuiltinFunction,
    tol: f64,
    terms_cap: u64,
    format: Format,
    output: Option<&Path>,
) -> Result<bool, String> {
    let group = build_character_group(q).map_err(|e| e.to_string())?;
    let chars: Vec<_> = if q >= 3 {
        group.primitive_characters().collect()
    } else {
        Vec::new()
    };
    if chars.is_empty() {
        eprintln!("no primitive characters modulo {q}; nothing to verify");
    }
    let f = function.to_spec().map_err(|e| e.to_string())?;
    let opts = SeriesOptions {
        target_accuracy: tol,
        terms_cap,
        ..SeriesOptions::default()
    };
    let mut reports = Vec::with_capacity(chars.len());
    for chi in &chars {
        let mut r = verify_theorem(chi, &f, &opts).map_err(|e| e.to_string())?;
        if r.tail_bound > tol {
            r.notes += &format!("; tail bound {:.3e} exceeds target {tol:.1e}", r.tail_bound);
        }
        reports.push(r);
    }
    emit(&mut reports, format, output)?;
    Ok(reports.iter().all(|r| r.pass))
}

fn example(
    id: u8,
    d: i64,
    y: Option<Ratio<i64>>,
    tol: Option<f64>,
    terms: u64,
    format: Format,
    output: Option<&Path>,
) -> Result<bool, String> {
    let started = Instant::now();
    let check = match id {
        1 => example1(d, tol.unwrap_or(1e-8)),
        2 => example2(d, tol.unwrap_or(1e-8)),
        3 => example3(d, tol.unwrap_or(1e-8)),
        _ => {
            let y = y.ok_or("example 4 needs --y")?;
            example4(d, y, terms, tol.unwrap_or(EXAMPLE4_TOLERANCE))
        }
    }
    .map_err(|e| e.to_string())?;
    let mut report = check.to_report();
    report.wall_time_ms = started.elapsed().as_secs_f64() * 1e3;
    emit(std::slice::from_mut(&mut report), format, output)?;
    Ok(report.pass)
}

fn run_sweep(
    from: u64,
    to: u64,
    tol: f64,
    format: Format,
    output: Option<&Path>,
) -> Result<bool, String> {
    // Fail on an unwritable path before spending time on the sweep.
    if let Some(p) = output {
        File::create(p).map_err(|e| format!("cannot write {}: {e}", p.display()))?;
    }
    let outcome = sweep(from, to, tol).map_err(|e| e.to_string())?;
    if let Some((lo, hi)) = outcome.remainder_spread() {
        eprintln!(
            "R(chi)/sqrt(q) over {} positive discriminants: min {lo:.12}, max {hi:.12}",
            outcome.remainders.len()
        );
    }
    let pass = outcome.all_pass();
    let mut reports = outcome.reports;
    emit(&mut reports, format, output)?;
    Ok(pass)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Commands::Characters {
            modulus,
            format,
            output,
        } => characters(modulus, format, output.as_deref()),
        Commands::VerifyTheorem {
            modulus,
            function,
            tol,
            terms_cap,
            format,
            output,
        } => verify(modulus, function, tol, terms_cap, format, output.as_deref()),
        Commands::Example {
            id,
            discriminant,
            y,
            tol,
            terms,
            format,
            output,
        } => example(id, discriminant, y, tol, terms, format, output.as_deref()),
        Commands::Sweep {
            from,
            to,
            tol,
            format,
            output,
        } => run_sweep(from, to, tol, format, output.as_deref()),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
