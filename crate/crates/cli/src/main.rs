use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::Context;
use clap::{Args, CommandFactory, Parser, Subcommand, ValueEnum};
use padic_partitions::digits::d_series;
use padic_partitions::explorer::{
    kernel_probe, run_campaign, valuation_sequence_with, CampaignConfig, Precision,
};
use padic_partitions::report::{CheckReport, Exportable, Format};
use padic_partitions::ring::RingSpec;
use padic_partitions::series::{expand_colored_partitions, PartitionParams, TruncatedSeries};
use padic_partitions::verifiers::{classify_exponent, Verifier};
use padic_partitions::Error;

/// Colored m-ary partition numbers and their p-adic valuations.
#[derive(Debug, Parser)]
#[command(name = "padic-partitions", version)]
struct Cli {
    #[arg(long, global = true, value_enum, default_value_t = OutputFormat::Text)]
    format: OutputFormat,
    /// Write output to this file instead of stdout; for `scan`, the output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Base directory for relative `--out` paths and for `scan` output.
    #[arg(long, global = true, env = "PADIC_PARTITIONS_OUT_DIR")]
    out_dir: Option<PathBuf>,
    /// Timing and precision details on stderr.
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OutputFormat {
    Text,
    Csv,
    Json,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Coefficients of F_m(x)^k up to x^n_max.
    Expand {
        #[arg(long)]
        m: u64,
        #[arg(long)]
        k: u64,
        #[arg(long)]
        n_max: usize,
        /// Reduce modulo a prime power, written p^B.
        #[arg(long = "mod", value_parser = parse_modulus)]
        modulus: Option<RingSpec>,
    },
    /// D_{p,r}(n) for n <= n_max.
    Dseq {
        #[arg(long)]
        p: u64,
        #[arg(long)]
        r: u64,
        #[arg(long)]
        n_max: usize,
    },
    /// nu_p(A_{p,k}(n)) for n <= n_max.
    Nu {
        #[arg(long)]
        p: u64,
        #[arg(long)]
        k: u64,
        #[arg(long)]
        n_max: u64,
        #[arg(long, default_value_t = 2)]
        b_init: u32,
        #[arg(long, default_value_t = Precision::DEFAULT_CAP)]
        b_cap: u32,
    },
    /// Check an identity over a range of n; exit 1 on a counterexample.
    Verify {
        #[command(subcommand)]
        check: Check,
    },
    /// Whether k = (p-1)(u p^s - 1), plus the eventual-constancy conditions.
    Classify {
        #[arg(long)]
        p: u64,
        #[arg(long)]
        k: u64,
    },
    /// Run a scan campaign described by a JSON config.
    Scan {
        #[arg(long)]
        config: PathBuf,
    },
    /// Distinct kernel-subsequence prefixes of nu_p(A_{p,k}(n)).
    Kernel {
        #[arg(long)]
        p: u64,
        #[arg(long)]
        k: u64,
        #[arg(long)]
        base: u64,
        #[arg(long)]
        depth: u32,
        #[arg(long)]
        prefix: usize,
        #[arg(long)]
        n_max: u64,
    },
}

#[derive(Debug, Args)]
struct CheckOptions {
    #[arg(long)]
    n_max: u64,
    /// Counterexamples kept in the report.
    #[arg(long, default_value_t = padic_partitions::report::DEFAULT_COUNTEREXAMPLE_LIMIT)]
    limit: usize,
    #[arg(long, default_value_t = Precision::DEFAULT_CAP)]
    b_cap: u32,
}

#[derive(Debug, Subcommand)]
enum Check {
    Lemma1 {
        #[arg(long)]
        p: u64,
        #[arg(long)]
        r: u64,
        #[command(flatten)]
        opts: CheckOptions,
    },
    Lemma2 {
        #[arg(long)]
        p: u64,
        #[arg(long)]
        k: u64,
        #[command(flatten)]
        opts: CheckOptions,
    },
    Lemma3 {
        #[arg(long)]
        p: u64,
        #[arg(long)]
        u: u64,
        #[command(flatten)]
        opts: CheckOptions,
    },
    Thm1 {
        #[arg(long)]
        p: u64,
        #[arg(long)]
        u: u64,
        #[arg(long)]
        s: u32,
        #[command(flatten)]
        opts: CheckOptions,
    },
    #[command(name = "thm1-cong")]
    Thm1Cong {
        #[arg(long)]
        p: u64,
        #[arg(long)]
        u: u64,
        #[arg(long)]
        s: u32,
        #[command(flatten)]
        opts: CheckOptions,
    },
    Thm2 {
        #[arg(long)]
        p: u64,
        #[arg(long)]
        k: u64,
        #[arg(long)]
        r: u64,
        #[command(flatten)]
        opts: CheckOptions,
    },
}

fn parse_modulus(text: &str) -> Result<RingSpec, String> {
    let (p, b) = text.split_once('^').unwrap_or((text, "1"));
    let p: u64 = p.trim().parse().map_err(|_| format!("bad prime in {text:?}"))?;
    let b: u32 = b.trim().parse().map_err(|_| format!("bad exponent in {text:?}"))?;
    RingSpec::mod_prime_power(p, b).map_err(|e| e.to_string())
}

/// What a subcommand produced.
enum Output {
    Report(CheckReport),
    Data(Box<dyn Exportable>, String),
}

fn series_text(series: &TruncatedSeries) -> String {
    let values: Vec<String> = series.coeffs().iter().map(ToString::to_string).collect();
    values.join(",") + "\n"
}

fn report_text(report: &CheckReport) -> String {
    let mut text = report.summary_line() + "\n";
    for c in &report.counterexamples {
        text += &format!("  n={}: {}\n", c.n, c.details);
    }
    text
}

fn run_check(check: Check) -> padic_partitions::Result<CheckReport> {
    let verifier = |o: &CheckOptions| Verifier {
        counterexample_limit: o.limit,
        precision_cap: o.b_cap,
    };
    match check {
        Check::Lemma1 { p, r, opts } => verifier(&opts).lemma1(p, r, opts.n_max),
        Check::Lemma2 { p, k, opts } => verifier(&opts).lemma2(p, k, opts.n_max),
        Check::Lemma3 { p, u, opts } => verifier(&opts).lemma3(p, u, opts.n_max),
        Check::Thm1 { p, u, s, opts } => verifier(&opts).thm1(p, u, s, opts.n_max),
        Check::Thm1Cong { p, u, s, opts } => verifier(&opts).thm1_congruence(p, u, s, opts.n_max),
        Check::Thm2 { p, k, r, opts } => verifier(&opts).thm2(p, k, r, opts.n_max),
    }
}

fn resolve(out_dir: Option<&Path>, path: PathBuf) -> PathBuf {
    match out_dir {
        Some(dir) if path.is_relative() => dir.join(path),
        _ => path,
    }
}

fn execute(command: Command, out_dir: Option<&Path>, explicit_out: Option<PathBuf>) -> anyhow::Result<Output> {
    Ok(match command {
        Command::Expand { m, k, n_max, modulus } => {
            let ring = modulus.unwrap_or(RingSpec::Exact);
            let series = expand_colored_partitions(PartitionParams::new(m, k)?, n_max, &ring);
            let text = series_text(&series);
            Output::Data(Box::new(series), text)
        }
        Command::Dseq { p, r, n_max } => {
            let series = d_series(p, r, n_max)?;
            let text = series_text(&series);
            Output::Data(Box::new(series), text)
        }
        Command::Nu { p, k, n_max, b_init, b_cap } => {
            if b_init == 0 || b_init > b_cap {
                return Err(Error::ParameterOutOfRange("need 1 <= b-init <= b-cap".into()).into());
            }
            let seq = valuation_sequence_with(p, k, n_max, Precision::new(b_init).with_cap(b_cap))?;
            let values: Vec<String> = seq.records.iter().map(|r| r.nu.to_string()).collect();
            let text = values.join(",") + "\n";
            Output::Data(Box::new(seq), text)
        }
        Command::Verify { check } => Output::Report(run_check(check)?),
        Command::Classify { p, k } => {
            let class = classify_exponent(p, k)?;
            let text = class.describe() + "\n";
            Output::Data(Box::new(class), text)
        }
        Command::Scan { config } => {
            let config = CampaignConfig::load(&config)?;
            let dir = match explicit_out {
                Some(path) => resolve(out_dir, path),
                None => out_dir.map(Path::to_path_buf).unwrap_or_else(|| PathBuf::from("scan_out")),
            };
            let summary = run_campaign(&config, &dir)?;
            let mut text = String::new();
            for e in &summary.entries {
                let form = e.summary.special_form.map(|(u, s)| format!(" u={u} s={s}")).unwrap_or_default();
                let bound = if e.summary.max_is_lower_bound { ">=" } else { "" };
                text += &format!(
                    "p={} k={}{form}: max nu {bound}{} at n={}, blocks constant: {}\n",
                    e.summary.p, e.summary.k, e.summary.max_nu, e.summary.argmax, e.block_constant
                );
            }
            text += &format!("wrote {} scans and summary.json to {}\n", summary.entries.len(), dir.display());
            Output::Data(Box::new(summary), text)
        }
        Command::Kernel { p, k, base, depth, prefix, n_max } => {
            let report = kernel_probe(p, k, base, depth, prefix, n_max)?;
            let by_depth: Vec<String> = report.distinct_by_depth.iter().map(ToString::to_string).collect();
            let text = format!(
                "distinct prefixes: {} (by depth: {}){}\n",
                report.distinct_count,
                by_depth.join(", "),
                if report.saturated { ", some prefixes truncated" } else { "" }
            );
            Output::Data(Box::new(report), text)
        }
    })
}

fn emit(output: &Output, format: OutputFormat, destination: Option<&Path>) -> anyhow::Result<()> {
    let text = match (output, format) {
        (Output::Report(r), OutputFormat::Text) => report_text(r),
        (Output::Data(_, text), OutputFormat::Text) => text.clone(),
        (Output::Report(r), OutputFormat::Csv) => r.render(Format::Csv)?,
        (Output::Report(r), OutputFormat::Json) => r.render(Format::Json)?,
        (Output::Data(d, _), OutputFormat::Csv) => d.render(Format::Csv)?,
        (Output::Data(d, _), OutputFormat::Json) => d.render(Format::Json)?,
    };
    match destination {
        Some(path) => {
            if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
                std::fs::create_dir_all(parent).with_context(|| format!("creating {}", parent.display()))?;
            }
            std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// Library errors about inputs are usage errors.
fn is_usage_error(err: &anyhow::Error) -> bool {
    !matches!(
        err.downcast_ref::<Error>(),
        Some(Error::Io { .. } | Error::Json(_) | Error::Csv(_)) | None
    )
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(2) } else { ExitCode::SUCCESS };
        }
    };
    let started = Instant::now();
    let is_scan = matches!(cli.command, Command::Scan { .. });
    let out_dir = cli.out_dir.clone();
    let destination = if is_scan { None } else { cli.out.clone().map(|p| resolve(out_dir.as_deref(), p)) };
    let result = execute(cli.command, out_dir.as_deref(), cli.out).and_then(|output| {
        emit(&output, cli.format, destination.as_deref())?;
        Ok(output)
    });
    if cli.verbose > 0 {
        eprintln!("finished in {:.2}s", started.elapsed().as_secs_f64());
    }
    if let Ok(Output::Report(report)) = &result {
        if cli.verbose > 0 && !report.passed {
            eprintln!("{} counterexample(s)", report.failure_count);
        }
    }
    if let Err(err) = &result {
        eprintln!("error: {err:#}");
        if is_usage_error(err) {
            eprintln!("{}", Cli::command().render_usage());
        }
    }
    ExitCode::from(exit_code(&result))
}

/// 0 on success, 1 when a check found a counterexample, 2 on errors.
fn exit_code(result: &anyhow::Result<Output>) -> u8 {
    match result {
        Ok(Output::Report(report)) if !report.passed => 1,
        Ok(_) => 0,
        Err(_) => 2,
    }
}
