use std::fs::File;
use std::io::BufWriter;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};

use greencomp::energy::SharingPolicy;
use greencomp::engine::{run_monte_carlo, sinr_samples};
use greencomp::output::{emit_hourly_detail, emit_sinr_cdf, emit_timeseries, emit_totals, fmt_sig, write_text};
use greencomp::plot::{plot_sinr_cdf, plot_sweep, plot_timeseries};
use greencomp::sweep::{run_sweep, Scenario, SweepSpec};
use greencomp::{CompMode, Error, Result, ScenarioConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SharingArg {
    On,
    Off,
    Both,
}

/// Solar-powered CoMP downlink simulator with inter-BS energy sharing.
#[derive(Debug, Parser)]
#[command(name = "greencomp", version)]
struct Args {
    /// Scenario file of `key = value` lines; defaults apply to missing keys.
    #[arg(long)]
    config: Option<PathBuf>,

    /// Sweep an energy axis, e.g. `STORAGE_CAPACITY=500,1000,2000`.
    #[arg(long, value_name = "AXIS=v1,v2,...")]
    sweep: Option<String>,

    /// Comma-separated CoMP modes (noncomp, dps, jt).
    #[arg(long, value_delimiter = ',')]
    modes: Option<Vec<CompMode>>,

    /// Sharing on, off, or both. Defaults to the config for single runs and
    /// to both for sweeps.
    #[arg(long, value_enum)]
    sharing: Option<SharingArg>,

    #[arg(long)]
    iterations: Option<usize>,

    #[arg(long)]
    seed: Option<u64>,

    #[arg(long)]
    days: Option<usize>,

    #[arg(long, default_value = "out")]
    out: PathBuf,

    #[arg(long)]
    no_plots: bool,

    /// Network snapshots at full load behind the SINR CDF; 0 skips it.
    #[arg(long, default_value_t = 100)]
    cdf_drops: usize,

    /// Collect CDF samples from UEs of the centre cell only.
    #[arg(long)]
    cdf_center_only: bool,

    /// Worker threads (defaults to one per core).
    #[arg(long)]
    threads: Option<usize>,
}

fn main() -> ExitCode {
    let args = Args::parse();
    match run(&args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_input_error() { 2 } else { 1 })
        }
    }
}

fn run(args: &Args) -> Result<()> {
    if let Some(n) = args.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::Validation {
                key: "threads".into(),
                reason: e.to_string(),
            })?;
    }

    let mut config = match &args.config {
        Some(p) => ScenarioConfig::load(p)?,
        None => ScenarioConfig::default(),
    };
    if let Some(n) = args.iterations {
        config.iterations = n;
    }
    if let Some(s) = args.seed {
        config.master_seed = s;
    }
    if let Some(d) = args.days {
        config.horizon_days = d;
    }
    config.validate().map_err(as_validation)?;

    let echoed = config.to_config_string();
    println!("# effective configuration");
    print!("{echoed}");
    std::fs::create_dir_all(&args.out).map_err(|e| Error::io(&args.out, e))?;
    write_text(&args.out.join("config_used.txt"), &echoed)?;

    let sweep = args.sweep.is_some();
    let modes = args.modes.clone().unwrap_or_else(|| {
        if sweep {
            CompMode::ALL.to_vec()
        } else {
            vec![config.comp_mode]
        }
    });
    let sharing = match args.sharing {
        Some(SharingArg::On) => vec![true],
        Some(SharingArg::Off) => vec![false],
        Some(SharingArg::Both) => vec![false, true],
        None if sweep => vec![false, true],
        None => vec![config.sharing.enabled],
    };
    let scenarios: Vec<Scenario> = modes
        .iter()
        .flat_map(|&mode| sharing.iter().map(move |&s| Scenario { mode, sharing: s }))
        .collect();

    match &args.sweep {
        Some(text) => run_sweep_cmd(args, &config, text, scenarios),
        None => run_single(args, &config, &scenarios, &modes),
    }
}

fn as_validation(e: Error) -> Error {
    match e {
        Error::InvalidParameter { field, reason } => Error::Validation {
            key: field.to_string(),
            reason,
        },
        other => other,
    }
}

fn run_sweep_cmd(args: &Args, config: &ScenarioConfig, text: &str, scenarios: Vec<Scenario>) -> Result<()> {
    let spec = SweepSpec::parse(text, scenarios).map_err(as_validation)?;
    let path = args
        .out
        .join(format!("sweep_{}.csv", spec.axis.as_str().to_ascii_lowercase()));
    let file = File::create(&path).map_err(|e| Error::io(&path, e))?;
    let mut w = BufWriter::new(file);
    eprintln!(
        "sweeping {} over {} runs -> {}",
        spec.axis,
        spec.run_count(),
        path.display()
    );
    let points = run_sweep(config, &spec, &mut w)?;
    drop(w);
    for p in &points {
        eprintln!(
            "{} {} {}: grid {} Wh, EE {} bit/J",
            spec.axis,
            fmt_sig(p.axis_value),
            p.scenario.label(),
            fmt_sig(p.totals.grid_wh.mean),
            fmt_sig(p.totals.ee_bits_per_j.mean)
        );
    }
    if !args.no_plots {
        plot_sweep(&points, spec.axis, &args.out)?;
    }
    Ok(())
}

fn run_single(args: &Args, config: &ScenarioConfig, scenarios: &[Scenario], modes: &[CompMode]) -> Result<()> {
    for sc in scenarios {
        let cfg = ScenarioConfig {
            comp_mode: sc.mode,
            sharing: SharingPolicy {
                enabled: sc.sharing,
                ..config.sharing
            },
            ..config.clone()
        };
        let dir = args.out.join(sc.label());
        eprintln!(
            "running {} ({} iterations x {} days)",
            sc.label(),
            cfg.iterations,
            cfg.horizon_days
        );
        let result = run_monte_carlo(&cfg)?;
        emit_timeseries(&result, &dir.join("timeseries.csv"))?;
        emit_hourly_detail(&result, &dir.join("hourly_detail.csv"))?;
        emit_totals(&result, &dir.join("totals.csv"))?;
        let t = &result.totals;
        eprintln!(
            "  grid {} Wh, savings {}% (vs conventional {}%), EE {} bit/J, {} hours with undefined EE",
            fmt_sig(t.grid_wh.mean),
            fmt_sig(t.savings_solar_pct.mean),
            fmt_sig(t.savings_conv_pct.mean),
            fmt_sig(t.ee_bits_per_j.mean),
            t.undefined_ee_hours
        );
        if !args.no_plots {
            plot_timeseries(&result, &dir)?;
        }
    }

    if args.cdf_drops > 0 {
        let samples = modes
            .iter()
            .map(|&m| Ok((m, sinr_samples(config, m, 1.0, args.cdf_drops, args.cdf_center_only)?)))
            .collect::<Result<Vec<_>>>()?;
        emit_sinr_cdf(&samples, &args.out.join("sinr_cdf.csv"))?;
        if !args.no_plots {
            plot_sinr_cdf(&samples, &args.out.join("sinr_cdf.svg"))?;
        }
    }
    Ok(())
}
