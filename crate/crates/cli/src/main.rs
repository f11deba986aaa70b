//! Command-line front end: scenario runs, parameter sweeps, the brute-force
//! oracle comparison, config validation and SVG plot emission.

mod plots;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use isac_core::alloc::Framework;
use isac_core::config::ScenarioConfig;
use isac_core::harness::{oracle_compare, run_experiment, write_kpis_csv, write_manifest};
use isac_core::sense::CsiMode;
use isac_core::SimError;

#[derive(Parser)]
#[command(name = "isac-sim", version, about = "Sensing-assisted LEO downlink allocation simulator")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum FrameworkArg {
    Jmra,
    Dmrab,
}

impl From<FrameworkArg> for Framework {
    fn from(v: FrameworkArg) -> Self {
        match v {
            FrameworkArg::Jmra => Framework::Jmra,
            FrameworkArg::Dmrab => Framework::Dmrab,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum CsiArg {
    Perfect,
    Sensed,
    None,
}

impl From<CsiArg> for CsiMode {
    fn from(v: CsiArg) -> Self {
        match v {
            CsiArg::Perfect => CsiMode::Perfect,
            CsiArg::Sensed => CsiMode::Sensed,
            CsiArg::None => CsiMode::None,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum SweepParam {
    #[value(name = "pilot_len", alias = "pilot-len")]
    PilotLen,
    #[value(name = "t_f", alias = "t-f")]
    TF,
    #[value(name = "t_ho", alias = "t-ho")]
    THo,
}

#[derive(Parser)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    frames: Option<u64>,
    #[arg(long)]
    framework: Option<FrameworkArg>,
    #[arg(long)]
    csi: Option<CsiArg>,
    #[arg(long)]
    pilot_len: Option<u32>,
}

#[derive(Parser)]
struct SweepArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, value_enum)]
    param: SweepParam,
    #[arg(long, value_delimiter = ',', required = true)]
    values: Vec<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    frames: Option<u64>,
    #[arg(long)]
    framework: Option<FrameworkArg>,
    #[arg(long)]
    csi: Option<CsiArg>,
}

#[derive(Parser)]
struct PlotArgs {
    /// KPI CSV (single run or concatenated sweep rows).
    #[arg(long)]
    csv: PathBuf,
    /// Optional sweep summary CSV (for parameter-axis plots).
    #[arg(long)]
    summary: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run one scenario and write kpis.csv + manifest.json.
    Run(RunArgs),
    /// Run the scenario across a parameter grid.
    Sweep(SweepArgs),
    /// Compare the joint solver against the brute-force optimum at frame 0.
    Oracle {
        #[arg(long)]
        config: PathBuf,
        /// Enumeration candidate cap.
        #[arg(long, default_value_t = 10_000_000)]
        cap: u64,
    },
    /// Validate a scenario config and report derived quantities.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
    /// Emit standalone SVG plots from KPI CSV output.
    Plot(PlotArgs),
}

fn apply_overrides(
    cfg: &mut ScenarioConfig,
    seed: Option<u64>,
    frames: Option<u64>,
    framework: Option<FrameworkArg>,
    csi: Option<CsiArg>,
    pilot_len: Option<u32>,
) {
    if let Some(s) = seed {
        cfg.run.seed = s;
    }
    if let Some(k) = frames {
        cfg.run.frames = k;
    }
    if let Some(f) = framework {
        cfg.run.framework = f.into();
    }
    if let Some(c) = csi {
        cfg.run.csi = c.into();
    }
    if let Some(l) = pilot_len {
        cfg.sensing.pilot_len = l;
    }
}

fn run_one(cfg: &ScenarioConfig, out: &Path) -> Result<(), SimError> {
    std::fs::create_dir_all(out)?;
    let result = run_experiment(cfg)?;
    write_kpis_csv(std::fs::File::create(out.join("kpis.csv"))?, &result.records)?;
    write_manifest(std::fs::File::create(out.join("manifest.json"))?, &result.manifest)?;
    let s = &result.manifest.summary;
    println!(
        "{}: {} frames, mean throughput {:.3} kbit/s per user, Jain {:.3}, {} solver failures",
        cfg.name,
        result.records.len(),
        s.mean_per_user_throughput_bps / 1e3,
        s.mean_jain,
        s.solver_failures
    );
    if !result.manifest.ra_deadline.within_budget {
        println!(
            "warning: max solver time {:.3} s exceeds the {:.3} s allocation budget",
            result.manifest.ra_deadline.max_solver_s, result.manifest.ra_deadline.budget_s
        );
    }
    Ok(())
}

fn sweep(args: &SweepArgs) -> Result<(), SimError> {
    let base = ScenarioConfig::load(&args.config)?;
    std::fs::create_dir_all(&args.out)?;
    let mut combined = String::from(isac_core::harness::KPI_HEADER);
    combined.push('\n');
    let mut summary = String::from(
        "param,value,framework,csi,mean_throughput_bps,mean_jain,mean_nmse_gamma_dry,mean_nmse_att_dry,handovers_per_s\n",
    );
    let param_name = match args.param {
        SweepParam::PilotLen => "pilot_len",
        SweepParam::TF => "t_f",
        SweepParam::THo => "t_ho",
    };
    for &value in &args.values {
        let mut cfg = base.clone();
        apply_overrides(&mut cfg, args.seed, args.frames, args.framework, args.csi, None);
        match args.param {
            SweepParam::PilotLen => {
                let l = value as u32;
                if l as f64 != value || !l.is_power_of_two() {
                    return Err(SimError::Config(format!(
                        "pilot_len sweep values must be powers of two, got {value}"
                    )));
                }
                cfg.sensing.pilot_len = l;
            }
            SweepParam::TF => cfg.frame.t_frame_s = value,
            SweepParam::THo => cfg.frame.t_ho_s = value,
        }
        let dir = args.out.join(format!("{param_name}_{value}"));
        std::fs::create_dir_all(&dir)?;
        let result = run_experiment(&cfg)?;
        write_kpis_csv(std::fs::File::create(dir.join("kpis.csv"))?, &result.records)?;
        write_manifest(std::fs::File::create(dir.join("manifest.json"))?, &result.manifest)?;
        let mut rows = Vec::new();
        write_kpis_csv(&mut rows, &result.records)?;
        let text = String::from_utf8(rows).expect("csv is utf-8");
        for line in text.lines().skip(1) {
            combined.push_str(line);
            combined.push('\n');
        }
        let s = &result.manifest.summary;
        summary.push_str(&format!(
            "{param_name},{value},{},{},{:.6},{:.6},{:.6e},{:.6e},{:.6}\n",
            s.framework, s.csi, s.mean_throughput_bps, s.mean_jain, s.nmse_gamma_dry, s.nmse_att_dry, s.handovers_per_s
        ));
        println!("{param_name}={value}: mean throughput {:.3} kbit/s", s.mean_throughput_bps / 1e3);
    }
    std::fs::write(args.out.join("sweep.csv"), combined)?;
    std::fs::write(args.out.join("summary.csv"), summary)?;
    Ok(())
}

fn real_main() -> Result<(), SimError> {
    let cli = Cli::parse();
    match cli.cmd {
        Cmd::Run(args) => {
            let mut cfg = ScenarioConfig::load(&args.config)?;
            apply_overrides(
                &mut cfg,
                args.seed,
                args.frames,
                args.framework,
                args.csi,
                args.pilot_len,
            );
            run_one(&cfg, &args.out)
        }
        Cmd::Sweep(args) => sweep(&args),
        Cmd::Oracle { config, cap } => {
            let cfg = ScenarioConfig::load(&config)?;
            let report = oracle_compare(&cfg, cap)?;
            println!("{}", serde_json::to_string_pretty(&report).expect("report serializes"));
            Ok(())
        }
        Cmd::Validate { config } => {
            let cfg = ScenarioConfig::load(&config)?;
            let warnings = cfg.validate()?;
            let budget = cfg.frame_budget()?;
            println!("config ok: {}", cfg.name);
            println!("  digest: {}", cfg.digest());
            println!(
                "  satellites: {}",
                cfg.shells.iter().map(|s| s.satellite_total()).sum::<u32>()
            );
            println!(
                "  grid: {} x {} cells",
                cfg.ground.region.rows(),
                cfg.ground.region.cols()
            );
            println!(
                "  frame: N_T={} N_S={} N_C={} allocation budget {:.3} s",
                budget.n_total,
                budget.n_sensing,
                budget.n_comm,
                budget.ra_budget_s()
            );
            for w in warnings {
                println!("  warning: {w}");
            }
            Ok(())
        }
        Cmd::Plot(args) => plots::emit(&args.csv, args.summary.as_deref(), &args.out),
    }
}

fn main() -> ExitCode {
    match real_main() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
