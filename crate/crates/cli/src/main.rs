//! `dtr`: ingest GHCN-daily stations and produce the AVG/DTR tables and
//! figure data.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use log::{error, info, warn};

use dtr_core::config::{RunConfig, Station};
use dtr_core::fetch::{FetchMode, Fetcher, Source};
use dtr_core::ghcn::{ingest_records, parse_dly};
use dtr_core::linreg::{wald_test, Bandwidth, ModelFit};
use dtr_core::models::{
    batch_report, detrend, fit_evolving_seasonal, fit_fixed_seasonal, fit_joint, fit_trend,
    FitOptions, PatternAnchor, DAYS_PER_DECADE,
};
use dtr_core::report::{table_csv, table_text, FigureBundle};
use dtr_core::series::{build_series, month_dummies, TemperatureSeries, Variable};
use dtr_core::Exec;

mod manifest;

#[derive(Parser, Debug)]
#[command(name = "dtr", version, about = "Trend and seasonality of daily temperature level (AVG) and range (DTR)")]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct GlobalArgs {
    /// Run configuration; defaults to the built-in CME city map.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Restrict to these airport codes (repeatable).
    #[arg(long, global = true)]
    station: Vec<String>,
    /// HAC lag truncation: "auto" or a nonnegative integer.
    #[arg(long, global = true)]
    hac_bandwidth: Option<Bandwidth>,
    /// Treat values with NOAA quality flags as missing.
    #[arg(long, global = true)]
    strict_qc: bool,
    /// Output directory (overrides the config).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Run every batch loop on one thread.
    #[arg(long, global = true)]
    sequential: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Fetch (or read from cache), parse, repair and write per-station series CSVs.
    Ingest {
        /// Never touch the network.
        #[arg(long, conflicts_with = "refresh")]
        offline: bool,
        /// Re-download even when cached.
        #[arg(long)]
        refresh: bool,
        /// Longest run of missing days to bridge (overrides the config).
        #[arg(long)]
        max_gap: Option<usize>,
    },
    /// Emit the per-station tables with their median row.
    Tables {
        #[arg(long, value_enum, default_value_t = VariableArg::Both)]
        variable: VariableArg,
    },
    /// Emit figure data (densities, trends, seasonal patterns) for stations.
    Figures,
    /// Fit one model for one station and print its coefficients.
    Fit {
        #[arg(long, value_enum, default_value_t = VariableArg::Avg)]
        variable: VariableArg,
        #[arg(long, value_enum, default_value_t = ModelArg::Joint)]
        model: ModelArg,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum, PartialEq, Eq)]
enum VariableArg {
    Avg,
    Dtr,
    Both,
}

impl VariableArg {
    fn variables(self) -> Vec<Variable> {
        match self {
            VariableArg::Avg => vec![Variable::Avg],
            VariableArg::Dtr => vec![Variable::Dtr],
            VariableArg::Both => Variable::BOTH.to_vec(),
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ModelArg {
    Trend,
    Fixed,
    Evolving,
    Joint,
}

struct RunContext {
    cfg: RunConfig,
    opts: FitOptions,
    exec: Exec,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            error!("{e:#}");
            ExitCode::FAILURE
        }
    }
}

fn load_context(g: &GlobalArgs) -> Result<RunContext> {
    let mut cfg = match &g.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::shipped(),
    };
    cfg.apply_env();
    if let Some(bw) = g.hac_bandwidth {
        cfg.hac_bandwidth = bw;
    }
    if g.strict_qc {
        cfg.strict_qc = true;
    }
    if let Some(out) = &g.out {
        cfg.output_dir = out.clone();
    }
    let exec = if g.sequential {
        Exec::Sequential
    } else {
        Exec::default()
    };
    Ok(RunContext {
        opts: FitOptions {
            bandwidth: cfg.hac_bandwidth,
            exec,
        },
        cfg,
        exec,
    })
}

/// Returns Ok(false) when some unit of work failed.
fn run(cli: Cli) -> Result<bool> {
    let mut ctx = load_context(&cli.global)?;
    let stations: Vec<Station> = ctx
        .cfg
        .select(&cli.global.station)?
        .into_iter()
        .cloned()
        .collect();
    fs::create_dir_all(&ctx.cfg.output_dir)
        .with_context(|| format!("creating {}", ctx.cfg.output_dir.display()))?;

    match cli.command {
        Command::Ingest {
            offline,
            refresh,
            max_gap,
        } => {
            if let Some(g) = max_gap {
                ctx.cfg.max_gap = g;
            }
            let mode = if offline {
                FetchMode::Offline
            } else if refresh {
                FetchMode::Refresh
            } else {
                FetchMode::CacheFirst
            };
            cmd_ingest(&ctx, &stations, mode)
        }
        Command::Tables { variable } => cmd_tables(&ctx, &stations, variable),
        Command::Figures => cmd_figures(&ctx, &stations),
        Command::Fit { variable, model } => {
            let [station] = stations.as_slice() else {
                bail!("fit needs exactly one --station");
            };
            let var = match variable {
                VariableArg::Both => bail!("fit takes --variable avg or dtr"),
                VariableArg::Avg => Variable::Avg,
                VariableArg::Dtr => Variable::Dtr,
            };
            cmd_fit(&ctx, station, var, model)?;
            Ok(true)
        }
    }
}

fn series_path(out: &Path, code: &str) -> PathBuf {
    out.join("series").join(format!("{}.csv", code.to_ascii_lowercase()))
}

fn cmd_ingest(ctx: &RunContext, stations: &[Station], mode: FetchMode) -> Result<bool> {
    let cfg = &ctx.cfg;
    let fetcher = Fetcher::new(cfg.endpoint.clone(), cfg.cache_dir.clone()).with_mode(mode);
    let series_dir = cfg.output_dir.join("series");
    fs::create_dir_all(&series_dir)?;

    let entries = ctx.exec.map(stations, |st| {
        let mut entry = manifest::StationEntry::new(st);
        match ingest_one(cfg, &fetcher, st, &mut entry) {
            Ok(()) => info!("{}: {} rows", st.code, entry.rows),
            Err(e) => {
                error!("{}: {e:#}", st.code);
                entry.status = "failed".into();
                entry.message = Some(format!("{e:#}"));
            }
        }
        entry
    });

    let ok = entries.iter().all(|e| e.status == "ok");
    manifest::write(&cfg.output_dir.join("manifest.json"), cfg, &entries)?;
    Ok(ok)
}

fn ingest_one(
    cfg: &RunConfig,
    fetcher: &Fetcher,
    st: &Station,
    entry: &mut manifest::StationEntry,
) -> Result<()> {
    let fetched = fetcher.fetch_station(&st.ghcn_id)?;
    entry.source = Some(match fetched.source {
        Source::Cache => "cache".into(),
        Source::Network => "network".into(),
    });
    if let Some(w) = &fetched.integrity_warning {
        warn!("{}: {w}", st.code);
        entry.integrity_warning = Some(w.clone());
    }
    entry.sha256 = Some(dtr_core::fetch::sha256_hex(&fetched.bytes));
    let records = parse_dly(&fetched.bytes)?;
    let ingested = ingest_records(&records, cfg.window, cfg.ingest_options())?;
    entry.interpolated = ingested
        .interpolated
        .iter()
        .map(|(d, e)| format!("{} {}", e.code(), d))
        .collect();
    entry.inversions = ingested.inversions.iter().map(|d| d.to_string()).collect();
    entry.qc_rejected = ingested.qc_rejected;
    let series = build_series(&ingested.observations, Some(cfg.window))?;
    let mut buf = Vec::new();
    series.write_csv(&mut buf)?;
    let path = series_path(&cfg.output_dir, &st.code);
    dtr_core::fetch::write_atomic(&path, &buf)
        .with_context(|| format!("writing {}", path.display()))?;
    entry.rows = series.len();
    entry.status = "ok".into();
    Ok(())
}

fn load_series(cfg: &RunConfig, code: &str) -> Result<TemperatureSeries> {
    let path = series_path(&cfg.output_dir, code);
    let file = fs::File::open(&path).with_context(|| {
        format!(
            "no series for {code} at {}; run `dtr ingest --station {code}` first",
            path.display()
        )
    })?;
    Ok(TemperatureSeries::read_csv(file)?)
}

fn cmd_tables(ctx: &RunContext, stations: &[Station], variable: VariableArg) -> Result<bool> {
    let cfg = &ctx.cfg;
    let mut ok = true;
    let mut loaded = Vec::new();
    for st in stations {
        match load_series(cfg, &st.code) {
            Ok(s) => loaded.push((st.code.clone(), s)),
            Err(e) => {
                error!("{e:#}");
                ok = false;
            }
        }
    }
    if loaded.is_empty() {
        bail!("no station series available");
    }
    let dir = cfg.output_dir.join("tables");
    fs::create_dir_all(&dir)?;
    for var in variable.variables() {
        let report = batch_report(&loaded, var, ctx.opts);
        for (code, e) in report.failures() {
            error!("{code} {var}: {e}");
            ok = false;
        }
        if let Err(e) = &report.median {
            error!("{var} median: {e}");
            ok = false;
        }
        let stem = format!("table_{}", var.label().to_ascii_lowercase());
        let text = table_text(&report);
        dtr_core::fetch::write_atomic(&dir.join(format!("{stem}.csv")), table_csv(&report).as_bytes())?;
        dtr_core::fetch::write_atomic(&dir.join(format!("{stem}.txt")), text.as_bytes())?;
        print!("{text}");
    }
    Ok(ok)
}

fn cmd_figures(ctx: &RunContext, stations: &[Station]) -> Result<bool> {
    let cfg = &ctx.cfg;
    let mut ok = true;
    for st in stations {
        let result = load_series(cfg, &st.code).and_then(|s| {
            let bundle = FigureBundle::compute(&st.code, &s, ctx.opts, PatternAnchor::default())?;
            let dir = cfg.output_dir.join("figures").join(st.code.to_ascii_lowercase());
            Ok(bundle.write_to(&dir)?)
        });
        match result {
            Ok(files) => info!("{}: wrote {} figure files", st.code, files.len()),
            Err(e) => {
                error!("{}: {e:#}", st.code);
                ok = false;
            }
        }
    }
    Ok(ok)
}

fn print_fit(fit: &ModelFit) -> Result<()> {
    println!(
        "nobs = {}  R2 = {:.4}{}  HAC lags = {}",
        fit.nobs,
        fit.r_squared,
        if fit.centered { "" } else { " (uncentered)" },
        fit.bandwidth.unwrap_or(0)
    );
    println!(
        "{:<10} {:>14} {:>12} {:>10} {:>14}",
        "coef", "estimate", "HAC se", "p", "per decade"
    );
    for (i, name) in fit.names.iter().enumerate() {
        let se = fit.std_error(name).unwrap_or(f64::NAN);
        let p = wald_test(fit, &[name])?.p_value;
        let per_decade = if name.contains("TIME") {
            format!("{:14.6}", fit.beta[i] * DAYS_PER_DECADE)
        } else {
            String::new()
        };
        println!(
            "{:<10} {:>14.6e} {:>12.4e} {:>10.4} {}",
            name, fit.beta[i], se, p, per_decade
        );
    }
    Ok(())
}

fn cmd_fit(ctx: &RunContext, st: &Station, var: Variable, model: ModelArg) -> Result<()> {
    let series = load_series(&ctx.cfg, &st.code)?;
    let opts = ctx.opts;
    println!("{} {} {:?}", st.code, var, model);
    match model {
        ModelArg::Trend => {
            let t = fit_trend(&series, var, opts)?;
            println!("delta_trend = {:.4} (p = {:.4})", t.delta_trend, t.slope_p_value);
            print_fit(&t.fit)?;
        }
        ModelArg::Fixed => {
            let t = fit_trend(&series, var, opts)?;
            let (fit, _) = fit_fixed_seasonal(&detrend(&t, var), &month_dummies(&series), opts)?;
            print_fit(&fit)?;
        }
        ModelArg::Evolving => {
            let t = fit_trend(&series, var, opts)?;
            let ev = fit_evolving_seasonal(
                &detrend(&t, var),
                &month_dummies(&series),
                &series.time_index(),
                opts,
            )?;
            print_fit(&ev.fit)?;
        }
        ModelArg::Joint => {
            let j = fit_joint(&series, var, opts)?;
            let suite = dtr_core::models::hypothesis_suite(&j)?;
            println!(
                "rho = {:.4}  p(nt) = {:.4}  p(ns) = {:.4}  p(nts) = {:.4}",
                j.rho(),
                suite.no_trend.p_value,
                suite.no_seasonality.p_value,
                suite.no_trending_seasonality.p_value
            );
            print_fit(&j.fit)?;
        }
    }
    Ok(())
}
