//! `peglab`: command line front end for the peg laboratory.
//!
//! Subcommands map one-to-one onto the library's entry points; every file
//! written is deterministic for a fixed config and seed, and all failures
//! leave a single JSON object on stderr with a nonzero exit code.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde::Serialize;
use serde_json::json;

use peglab_core::{
    align, classify, downward_clip, downward_deviation, enumerate_equilibria, estimate_zone,
    fmt_f64, granger, linspace, load_price_series, load_v_series, pearson, price_deviation,
    shortfall, simulate_run, welch_ttest, write_path_csv, write_zone_csv, zone_diagram, zone_rows,
    ConfigError, Design, DynamicsError, EnumeratedEquilibrium, IoError, ModelError, RunOptions,
    ScenarioConfig, Series, Shock, SimOptions, SolveError, StatsError, Target, Thresholds,
    UpdateOrder,
};

#[derive(Parser)]
#[command(name = "peglab", version, about = "Stablecoin peg laboratory")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Classify fundamentals into peg-stability zones
    Classify {
        #[arg(long)]
        config: PathBuf,
        /// Classify this single theta and print JSON instead of writing files
        #[arg(long)]
        theta: Option<f64>,
        /// Grid size override for the diagram
        #[arg(long)]
        grid: Option<usize>,
        #[arg(long, default_value = "out")]
        out_dir: PathBuf,
    },
    /// Zone diagrams for all five designs built from one base config
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        grid: Option<usize>,
        #[arg(long, default_value = "out")]
        out_dir: PathBuf,
    },
    /// Estimate zones from best-response play and compare against the
    /// classification, at one theta or over a whole grid
    Dynamics {
        #[arg(long)]
        config: PathBuf,
        /// Single theta: also enumerates the equilibria there
        #[arg(long)]
        theta: Option<f64>,
        /// Number of agents (defaults to the config's dynamics.n)
        #[arg(long)]
        n: Option<usize>,
        /// Grid size for the sweep when --theta is absent
        #[arg(long)]
        grid: Option<usize>,
        /// Fail when any agent estimate disagrees with the classification
        #[arg(long)]
        check: bool,
        #[arg(long, default_value = "out")]
        out_dir: PathBuf,
    },
    /// Simulate a multi-step run, optionally with a redemption shock
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        theta: f64,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long, default_value_t = 10)]
        steps: usize,
        /// Step at which the shock hits (requires --shock-fraction)
        #[arg(long)]
        shock_step: Option<usize>,
        /// Fraction of every holding force-redeemed at the shock step
        #[arg(long)]
        shock_fraction: Option<f64>,
        /// Visit agents in a seeded random order instead of round robin
        #[arg(long)]
        shuffled: bool,
        /// Seed for --shuffled (defaults to the config's dynamics.seed)
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value = "out")]
        out_dir: PathBuf,
    },
    /// Score price series against their pegs and test links to
    /// redemption-value series
    Analyze {
        /// `date,price` CSV, or a directory of them (coin name = file stem)
        #[arg(long)]
        prices: PathBuf,
        /// `date,v` CSV or directory; enables correlation and causality tests
        #[arg(long)]
        v: Option<PathBuf>,
        /// Fallback peg band `lo,hi` (default: point target at 1)
        #[arg(long)]
        band: Option<String>,
        /// Per-coin band manifest: CSV with a `name,lo,hi` header
        #[arg(long)]
        bands: Option<PathBuf>,
        /// Lag order for the causality test
        #[arg(long, default_value_t = 1)]
        lag: usize,
        #[arg(long, default_value = "out")]
        out_dir: PathBuf,
    },
}

// ---------------------------------------------------------------------------
// Failure reporting
// ---------------------------------------------------------------------------

#[derive(Debug, Serialize)]
struct Failure {
    error: &'static str,
    details: Vec<String>,
}

impl Failure {
    fn new(error: &'static str, detail: impl Into<String>) -> Failure {
        Failure { error, details: vec![detail.into()] }
    }
}

impl From<Vec<ConfigError>> for Failure {
    fn from(errs: Vec<ConfigError>) -> Failure {
        Failure { error: "config", details: errs.iter().map(ToString::to_string).collect() }
    }
}

impl From<IoError> for Failure {
    fn from(e: IoError) -> Failure {
        Failure::new("io", e.to_string())
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Failure {
        Failure::new("io", e.to_string())
    }
}

impl From<SolveError> for Failure {
    fn from(e: SolveError) -> Failure {
        Failure::new("solve", e.to_string())
    }
}

impl From<DynamicsError> for Failure {
    fn from(e: DynamicsError) -> Failure {
        Failure::new("dynamics", e.to_string())
    }
}

impl From<ModelError> for Failure {
    fn from(e: ModelError) -> Failure {
        Failure::new("model", e.to_string())
    }
}

impl From<StatsError> for Failure {
    fn from(e: StatsError) -> Failure {
        Failure::new("stats", e.to_string())
    }
}

fn main() {
    let cli = Cli::parse();
    if let Err(failure) = run(cli) {
        eprintln!("{}", serde_json::to_string(&failure).expect("failure serializes"));
        std::process::exit(1);
    }
}

// ---------------------------------------------------------------------------
// Command bodies
// ---------------------------------------------------------------------------

fn create(out_dir: &Path, name: &str) -> Result<(BufWriter<File>, PathBuf), Failure> {
    fs::create_dir_all(out_dir)?;
    let path = out_dir.join(name);
    Ok((BufWriter::new(File::create(&path)?), path))
}

fn check_theta_range(theta: f64, econ: &peglab_core::Economy) -> Result<(), Failure> {
    if !(econ.theta_min()..=econ.theta_max()).contains(&theta) {
        return Err(Failure::new(
            "args",
            format!(
                "theta {theta} lies outside the configured range [{}, {}]",
                econ.theta_min(),
                econ.theta_max()
            ),
        ));
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.cmd {
        Cmd::Classify { config, theta, grid, out_dir } => {
            let cfg = ScenarioConfig::from_file(&config)?;
            let (spec, econ) = cfg.build()?;
            match theta {
                Some(theta) => {
                    check_theta_range(theta, &econ)?;
                    let th = Thresholds::compute(&spec, &econ)?;
                    let zone = classify(&spec, &econ, theta, &th);
                    println!(
                        "{}",
                        json!({
                            "design": spec.design().label(),
                            "theta": theta,
                            "zone": zone.label(),
                            "thresholds": th,
                        })
                    );
                }
                None => {
                    let report = zone_diagram(&spec, &econ, grid.unwrap_or(cfg.grid_points))?;
                    let (mut w, path) = create(&out_dir, "zones.csv")?;
                    write_zone_csv(&mut w, &zone_rows(std::slice::from_ref(&report)))?;
                    w.flush()?;
                    println!("wrote {}", path.display());
                }
            }
            Ok(())
        }
        Cmd::Sweep { config, grid, out_dir } => {
            let base = ScenarioConfig::from_file(&config)?;
            let mut reports = Vec::new();
            let mut thresholds = std::collections::BTreeMap::new();
            for design in Design::ALL {
                let cfg = base.for_design(design);
                let (spec, econ) = cfg.build()?;
                let report = zone_diagram(&spec, &econ, grid.unwrap_or(base.grid_points))?;
                thresholds.insert(design.label(), report.thresholds);
                reports.push(report);
            }
            let (mut w, zones_path) = create(&out_dir, "zones.csv")?;
            write_zone_csv(&mut w, &zone_rows(&reports))?;
            w.flush()?;
            let (mut w, th_path) = create(&out_dir, "thresholds.json")?;
            serde_json::to_writer_pretty(&mut w, &thresholds)
                .map_err(|e| Failure::new("io", e.to_string()))?;
            w.write_all(b"\n")?;
            w.flush()?;
            println!("wrote {}", zones_path.display());
            println!("wrote {}", th_path.display());
            Ok(())
        }
        Cmd::Dynamics { config, theta, n, grid, check, out_dir } => {
            let cfg = ScenarioConfig::from_file(&config)?;
            let (spec, econ) = cfg.build()?;
            let n = n.unwrap_or(cfg.dynamics.n_agents);
            let opts = RunOptions { max_passes: cfg.dynamics.max_iter, ..Default::default() };
            let thresholds = Thresholds::compute(&spec, &econ)?;

            if let Some(theta) = theta {
                check_theta_range(theta, &econ)?;
                let equilibria = enumerate_equilibria(&spec, &econ, theta, n)?;
                let estimated = estimate_zone(&spec, &econ, theta, n, opts)?;
                let classified = classify(&spec, &econ, theta, &thresholds);

                #[derive(Serialize)]
                struct DynamicsReport<'a> {
                    design: &'a str,
                    theta: f64,
                    n: usize,
                    classified: &'a str,
                    estimated: &'a str,
                    agreement: bool,
                    equilibria: &'a [EnumeratedEquilibrium],
                }
                let report = DynamicsReport {
                    design: spec.design().label(),
                    theta,
                    n,
                    classified: classified.label(),
                    estimated: estimated.label(),
                    agreement: classified == estimated,
                    equilibria: &equilibria,
                };
                let (mut w, path) = create(&out_dir, "dynamics.json")?;
                serde_json::to_writer_pretty(&mut w, &report)
                    .map_err(|e| Failure::new("io", e.to_string()))?;
                w.write_all(b"\n")?;
                w.flush()?;
                println!("wrote {}", path.display());
                if check && !report.agreement {
                    return Err(Failure::new(
                        "check",
                        format!(
                            "at theta {theta} the {n}-agent estimate {} disagrees with the \
                             classification {}",
                            estimated.label(),
                            classified.label()
                        ),
                    ));
                }
                return Ok(());
            }

            let points = grid.unwrap_or(cfg.grid_points);
            if points < 2 {
                return Err(Failure::new("args", "--grid must be at least 2"));
            }
            #[derive(Serialize)]
            struct SweepPoint<'a> {
                theta: f64,
                classified: &'a str,
                estimated: &'a str,
                agreement: bool,
            }
            let mut rows = Vec::new();
            let mut agreements = 0usize;
            for theta in linspace(econ.theta_min(), econ.theta_max(), points) {
                let classified = classify(&spec, &econ, theta, &thresholds);
                let estimated = estimate_zone(&spec, &econ, theta, n, opts)?;
                agreements += usize::from(classified == estimated);
                rows.push(SweepPoint {
                    theta,
                    classified: classified.label(),
                    estimated: estimated.label(),
                    agreement: classified == estimated,
                });
            }
            #[derive(Serialize)]
            struct SweepReport<'a> {
                design: &'a str,
                n: usize,
                agreements: usize,
                total: usize,
                points: Vec<SweepPoint<'a>>,
            }
            let report = SweepReport {
                design: spec.design().label(),
                n,
                agreements,
                total: rows.len(),
                points: rows,
            };
            let (mut w, path) = create(&out_dir, "dynamics.json")?;
            serde_json::to_writer_pretty(&mut w, &report)
                .map_err(|e| Failure::new("io", e.to_string()))?;
            w.write_all(b"\n")?;
            w.flush()?;
            println!("agreement {agreements}/{}", report.total);
            println!("wrote {}", path.display());
            if check && agreements != report.total {
                let miss = report.points.iter().find(|p| !p.agreement).expect("one must differ");
                return Err(Failure::new(
                    "check",
                    format!(
                        "at theta {} the {n}-agent estimate {} disagrees with the \
                         classification {}",
                        miss.theta, miss.estimated, miss.classified
                    ),
                ));
            }
            Ok(())
        }
        Cmd::Simulate {
            config,
            theta,
            n,
            steps,
            shock_step,
            shock_fraction,
            shuffled,
            seed,
            out_dir,
        } => {
            let cfg = ScenarioConfig::from_file(&config)?;
            let (spec, econ) = cfg.build()?;
            check_theta_range(theta, &econ)?;
            let shock = match (shock_step, shock_fraction) {
                (Some(step), Some(redeemed_fraction)) => Some(Shock { step, redeemed_fraction }),
                (None, None) => None,
                _ => {
                    return Err(Failure::new(
                        "args",
                        "--shock-step and --shock-fraction must be given together",
                    ));
                }
            };
            let order = if shuffled {
                UpdateOrder::Shuffled { seed: seed.unwrap_or(cfg.dynamics.seed) }
            } else {
                UpdateOrder::RoundRobin
            };
            let outcome = simulate_run(
                &spec,
                &econ,
                &vec![theta; steps],
                n.unwrap_or(cfg.dynamics.n_agents),
                SimOptions { shock, order },
            )?;
            let (mut w, path) = create(&out_dir, "path.csv")?;
            write_path_csv(&mut w, &outcome.path)?;
            w.flush()?;
            println!("wrote {}", path.display());
            Ok(())
        }
        Cmd::Analyze { prices, v, band, bands, lag, out_dir } => {
            analyze(&prices, v.as_deref(), band.as_deref(), bands.as_deref(), lag, &out_dir)
        }
    }
}

// ---------------------------------------------------------------------------
// analyze: deviation ranking + correlation/causality tables
// ---------------------------------------------------------------------------

/// Loads one coin per file. A directory yields every `.csv` inside, sorted by
/// file name; the coin name is the file stem.
fn collect_series(
    path: &Path,
    load: &dyn Fn(&Path) -> Result<Series, IoError>,
) -> Result<Vec<(String, Series)>, Failure> {
    let mut files = Vec::new();
    if path.is_dir() {
        for entry in fs::read_dir(path)? {
            let p = entry?.path();
            if p.extension().is_some_and(|e| e == "csv") {
                files.push(p);
            }
        }
        files.sort();
        if files.is_empty() {
            return Err(Failure::new("args", format!("{}: no .csv files", path.display())));
        }
    } else {
        files.push(path.to_path_buf());
    }
    let mut out = Vec::new();
    for p in files {
        let name =
            p.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
        out.push((name, load(&p)?));
    }
    Ok(out)
}

fn parse_band(text: &str) -> Result<Target, Failure> {
    let (lo, hi) =
        text.split_once(',').ok_or_else(|| Failure::new("args", "--band expects `lo,hi`"))?;
    let parse = |s: &str| {
        s.trim()
            .parse::<f64>()
            .map_err(|_| Failure::new("args", format!("--band: `{s}` is not a number")))
    };
    let target = Target::Band { lo: parse(lo)?, hi: parse(hi)? };
    target.validate()?;
    Ok(target)
}

/// Reads a `name,lo,hi` manifest assigning a peg band to individual coins.
fn load_band_manifest(path: &Path) -> Result<std::collections::BTreeMap<String, Target>, Failure> {
    let text = fs::read_to_string(path)?;
    let mut lines = text.lines();
    if lines.next().map(str::trim) != Some("name,lo,hi") {
        return Err(Failure::new(
            "args",
            format!("{}: expected a `name,lo,hi` header", path.display()),
        ));
    }
    let mut map = std::collections::BTreeMap::new();
    for (idx, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let bad = || {
            Failure::new(
                "args",
                format!("{} row {}: expected `name,lo,hi`", path.display(), idx + 2),
            )
        };
        let mut fields = line.split(',');
        let name = fields.next().ok_or_else(bad)?.trim();
        let lo: f64 = fields.next().ok_or_else(bad)?.trim().parse().map_err(|_| bad())?;
        let hi: f64 = fields.next().ok_or_else(bad)?.trim().parse().map_err(|_| bad())?;
        if name.is_empty() || fields.next().is_some() {
            return Err(bad());
        }
        let target = Target::Band { lo, hi };
        target.validate()?;
        map.insert(name.to_string(), target);
    }
    Ok(map)
}

fn analyze(
    prices: &Path,
    v: Option<&Path>,
    band: Option<&str>,
    bands: Option<&Path>,
    lag: usize,
    out_dir: &Path,
) -> Result<(), Failure> {
    let price_coins = collect_series(prices, &|p| load_price_series(p))?;
    let v_coins = match v {
        Some(path) => collect_series(path, &|p| load_v_series(p))?,
        None => Vec::new(),
    };
    let fallback = match band {
        Some(text) => parse_band(text)?,
        None => Target::Point { target: 1.0 },
    };
    let overrides = match bands {
        Some(path) => load_band_manifest(path)?,
        None => std::collections::BTreeMap::new(),
    };
    let target_for = |name: &str| overrides.get(name).copied().unwrap_or(fallback);

    // Peg-deviation table, ranked tightest first.
    let mut rows = Vec::new();
    for (name, series) in &price_coins {
        let target = target_for(name);
        rows.push((
            name.as_str(),
            price_deviation(series.values(), &target)?,
            downward_deviation(series.values(), &target)?,
        ));
    }
    rows.sort_by(|a, b| a.1.total_cmp(&b.1).then_with(|| a.0.cmp(b.0)));
    let (mut w, path) = create(out_dir, "analysis_dev.csv")?;
    writeln!(w, "name,deviation,downward_deviation,rank")?;
    for (rank, (name, dev, down)) in rows.iter().enumerate() {
        writeln!(w, "{name},{},{},{}", fmt_f64(*dev), fmt_f64(*down), rank + 1)?;
    }
    w.flush()?;
    println!("wrote {}", path.display());

    // Coins carrying both a price and a redemption-value series. Two single
    // files pair up directly; otherwise series match by coin name.
    let mut paired: Vec<(&str, &Series, &Series)> = Vec::new();
    if prices.is_file() && v.is_some_and(Path::is_file) {
        paired.push((price_coins[0].0.as_str(), &price_coins[0].1, &v_coins[0].1));
    } else {
        for (name, series) in &price_coins {
            if let Some((_, vs)) = v_coins.iter().find(|(n, _)| n == name) {
                paired.push((name.as_str(), series, vs));
            }
        }
    }

    if !v_coins.is_empty() {
        // Per-coin correlation and causality, both series clipped at face
        // value first so only the downward co-movement counts.
        let (mut w, path) = create(out_dir, "analysis_corr.csv")?;
        writeln!(w, "name,rho,rho_p,F,F_p")?;
        for (name, price, vs) in &paired {
            let result = align(price, vs).and_then(|joined| {
                let p_clip = downward_clip(&joined.a, 1.0);
                let v_clip = downward_clip(&joined.b, 1.0);
                let corr = pearson(&p_clip, &v_clip)?;
                let led = granger(&v_clip, &p_clip, lag)?; // does v drive the price?
                Ok((corr, led))
            });
            match result {
                Ok((corr, led)) => writeln!(
                    w,
                    "{name},{},{},{},{}",
                    fmt_f64(corr.r),
                    fmt_f64(corr.p),
                    fmt_f64(led.f),
                    fmt_f64(led.p)
                )?,
                Err(e) => println!("analysis_corr: skipping {name}: {e}"),
            }
        }
        w.flush()?;
        println!("wrote {}", path.display());

        // One point per coin: downward deviation of v against face value vs.
        // the same for the price against its peg.
        let (mut w, path) = create(out_dir, "analysis_scatter.csv")?;
        writeln!(w, "name,downward_v,downward_price")?;
        let face = Target::Point { target: 1.0 };
        let mut downs: Vec<(f64, f64)> = Vec::new();
        for (name, price, vs) in &paired {
            let dv = downward_deviation(vs.values(), &face)?;
            let dp = downward_deviation(price.values(), &target_for(name))?;
            writeln!(w, "{name},{},{}", fmt_f64(dv), fmt_f64(dp))?;
            downs.push((dv, dp));
        }
        w.flush()?;
        println!("wrote {}", path.display());
        if downs.len() >= 3 {
            let xs: Vec<f64> = downs.iter().map(|d| d.0).collect();
            let ys: Vec<f64> = downs.iter().map(|d| d.1).collect();
            match pearson(&xs, &ys) {
                Ok(r) => {
                    println!("aggregate downward correlation: rho={:.4}, p={:.4}", r.r, r.p)
                }
                Err(e) => println!("aggregate downward correlation unavailable: {e}"),
            }
        }
    }

    // Pairwise ranking t-tests on the per-day squared deviation terms.
    if price_coins.len() >= 2 {
        let mut samples: Vec<(&str, Vec<f64>, Vec<f64>)> = price_coins
            .iter()
            .map(|(name, series)| {
                let target = target_for(name);
                let sq = series
                    .values()
                    .iter()
                    .map(|p| {
                        let d = target.deviation(*p);
                        d * d
                    })
                    .collect();
                let sq_down = series
                    .values()
                    .iter()
                    .map(|p| {
                        let d = shortfall(*p, &target);
                        d * d
                    })
                    .collect();
                (name.as_str(), sq, sq_down)
            })
            .collect();
        samples.sort_by(|a, b| a.0.cmp(b.0));
        let (mut w, path) = create(out_dir, "analysis_ttests.csv")?;
        writeln!(w, "metric,name_a,name_b,t,df,p")?;
        for metric in ["deviation", "downward"] {
            for i in 0..samples.len() {
                for j in (i + 1)..samples.len() {
                    let (a, b) = (&samples[i], &samples[j]);
                    let (xa, xb) =
                        if metric == "deviation" { (&a.1, &b.1) } else { (&a.2, &b.2) };
                    match welch_ttest(xa, xb) {
                        Ok(tt) => writeln!(
                            w,
                            "{metric},{},{},{},{},{}",
                            a.0,
                            b.0,
                            fmt_f64(tt.t),
                            fmt_f64(tt.df),
                            fmt_f64(tt.p)
                        )?,
                        Err(e) => {
                            println!("analysis_ttests: skipping {metric} {} vs {}: {e}", a.0, b.0)
                        }
                    }
                }
            }
        }
        w.flush()?;
        println!("wrote {}", path.display());
    }
    Ok(())
}
