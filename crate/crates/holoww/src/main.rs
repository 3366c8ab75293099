use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use holoww::harness::config::ExperimentConfig;
use holoww::harness::experiments as ex;
use holoww::harness::io::{ensure_dir, write_json};
use holoww::harness::oracle::{run_oracles, Faults};
use holoww::harness::{exit_code, EXIT_CHECK_FAILED, EXIT_OK};
use holoww::par;
use holoww::Result;

#[derive(Parser)]
#[command(name = "holoww", version, about = "Deep-water gravity waves in holomorphic coordinates")]
struct Cli {
    /// flat key = value config file
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// output directory
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// worker threads for parallel sections
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// continue a run from this checkpoint
    #[arg(long, global = true)]
    resume: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// step the flow to t_max writing diagnostics and checkpoints
    Run,
    /// normal-form scaling exponents over eps_list
    Sweep,
    /// packet-tested amplitude gamma, ODE residual sigma, profile Psi
    PacketTest,
    /// normal form cancellation report
    NfCheck,
    /// compare the run against the asymptotic formula
    Asymptotics,
    /// brute-force oracle suite (N = 32)
    Oracle {
        /// corrupt the Hilbert sign to check that the suite can fail
        #[arg(long)]
        inject_fault: bool,
    },
}

fn load(path: &Option<PathBuf>) -> Result<ExperimentConfig> {
    match path {
        Some(p) => ExperimentConfig::load(p),
        None => Ok(ExperimentConfig::default()),
    }
}

fn report(out: &Path, name: &str) {
    eprintln!("wrote {}", out.join(name).display());
}

fn dispatch(cli: &Cli) -> Result<i32> {
    let out = &cli.out;
    match &cli.cmd {
        Cmd::Oracle { inject_fault } => {
            let r = run_oracles(32, 7, Faults { flip_hilbert_sign: *inject_fault });
            ensure_dir(out)?;
            write_json(&out.join("oracle.json"), &r)?;
            for c in &r.checks {
                println!("{} {:<48} err={:.3e}", if c.pass { "ok  " } else { "FAIL" }, c.name, c.error);
            }
            println!("elapsed {:.3}s", r.elapsed_s);
            Ok(if r.pass { EXIT_OK } else { EXIT_CHECK_FAILED })
        }
        Cmd::Run => {
            let cfg = load(&cli.config)?;
            let s = ex::cmd_run(&cfg, out, cli.resume.as_deref())?;
            println!("t = {} rows = {} energy drift = {:.3e}", s.final_time, s.rows, s.energy_drift);
            report(out, ex::DIAG_FILE);
            Ok(EXIT_OK)
        }
        Cmd::Sweep => {
            let cfg = load(&cli.config)?;
            let r = ex::cmd_sweep(&cfg, out)?;
            println!("{}", serde_json::to_string_pretty(&r.exponents).unwrap());
            report(out, "sweep.json");
            Ok(EXIT_OK)
        }
        Cmd::NfCheck => {
            let cfg = load(&cli.config)?;
            let r = ex::cmd_nf_check(&cfg, out)?;
            println!("{}", serde_json::to_string_pretty(&r.sweep.exponents).unwrap());
            report(out, "nf_check.json");
            Ok(if r.pass { EXIT_OK } else { EXIT_CHECK_FAILED })
        }
        Cmd::PacketTest => {
            let cfg = load(&cli.config)?;
            let r = ex::cmd_packet_test(&cfg, out)?;
            println!("{}", serde_json::to_string_pretty(&r).unwrap());
            report(out, "summary.json");
            Ok(EXIT_OK)
        }
        Cmd::Asymptotics => {
            let cfg = load(&cli.config)?;
            let r = ex::cmd_asymptotics(&cfg, out)?;
            println!("error slope {:?} pactest slope {:?}", r.error_slope, r.pactest_slope);
            report(out, "asymptotics.json");
            Ok(if r.pass { EXIT_OK } else { EXIT_CHECK_FAILED })
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(k) = cli.threads {
        par::configure_threads(k.max(1));
    }
    let code = match dispatch(&cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    };
    ExitCode::from(code as u8)
}
