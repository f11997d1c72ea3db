//! Command-line front end: `analytic`, `simulate`, `sweep`, `verify`, `figure`.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};

use raoi::analytic::{self, AnalyticQuery, AreaMethod, EvalOptions};
use raoi::bench::{self, config::parse_config, Preset, SweepSpec, Tolerance};
use raoi::sim::{self, DEFAULT_BATCHES};
use raoi::{eventlog, Discipline, Error, Metric, Result, ServiceFamily, ServiceModel, SimConfig};

const DEFAULT_SEED: u64 = 1;

#[derive(Parser)]
#[command(
    name = "raoi",
    version,
    about = "Relative age of information: closed forms, simulation and sweeps"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    opts: Opts,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate a cataloged closed form.
    Analytic,
    /// Simulate one queue (or re-estimate a recorded log) and print the moments.
    Simulate,
    /// Pair analytic and simulated values over a lambda grid and write CSV.
    Sweep,
    /// Check analytic values against simulation; exit 1 on authoritative discrepancies.
    Verify,
    /// Regenerate the data of a figure preset.
    Figure {
        /// fig6 | fig7 | fig8 | fig9
        preset: String,
    },
}

/// Every option also has a `key=value` twin in `--config` files; flags win.
#[derive(Args, Default)]
struct Opts {
    /// fcfs | prmp | blocking | replace (comma list for sweep/verify)
    #[arg(long, global = true)]
    discipline: Option<String>,
    /// exp | det (comma list for sweep/verify)
    #[arg(long, global = true)]
    service: Option<String>,
    /// Arrival rate; sweeps take a comma list or `log:LOW:HIGH:N`
    #[arg(long, global = true, allow_hyphen_values = true)]
    lambda: Option<String>,
    /// Service rate (default 1)
    #[arg(long, global = true, allow_hyphen_values = true)]
    mu: Option<String>,
    /// gamma | deltaR (comma list for sweep/verify)
    #[arg(long, global = true)]
    metric: Option<String>,
    /// Moment order 1 or 2 (comma list for sweep/verify)
    #[arg(long, global = true)]
    k: Option<String>,
    /// Packets per simulation (sweeps: 0 = analytic only)
    #[arg(long, global = true)]
    packets: Option<String>,
    #[arg(long, global = true)]
    seed: Option<String>,
    /// Arrivals discarded before estimation
    #[arg(long, global = true)]
    warmup: Option<String>,
    /// Output directory for CSV and SVG files
    #[arg(long, global = true)]
    out: Option<String>,
    /// Also render an SVG chart next to the CSV
    #[arg(long, global = true)]
    svg: bool,
    #[arg(long = "rel-tol", global = true)]
    rel_tol: Option<String>,
    #[arg(long = "z-max", global = true)]
    z_max: Option<String>,
    /// Write the simulated packet log to this file
    #[arg(long = "dump-trace", global = true)]
    dump_trace: Option<String>,
    /// Estimate moments from a recorded packet log instead of simulating
    #[arg(long = "from-trace", global = true)]
    from_trace: Option<String>,
    /// key=value file supplying defaults for any flag
    #[arg(long, global = true)]
    config: Option<String>,
    /// E[Delta_R^2] for replace second moments instead of a simulation estimate
    #[arg(long = "delta-r2", global = true)]
    delta_r2: Option<String>,
    /// printed | quadrature for the conditional-area terms
    #[arg(long = "area-method", global = true)]
    area_method: Option<String>,
}

const CONFIG_KEYS: [&str; 17] = [
    "discipline",
    "service",
    "lambda",
    "mu",
    "metric",
    "k",
    "packets",
    "seed",
    "warmup",
    "out",
    "svg",
    "rel-tol",
    "z-max",
    "dump-trace",
    "from-trace",
    "delta-r2",
    "area-method",
];

/// Flags merged over the config file.
struct Settings {
    values: BTreeMap<&'static str, String>,
}

impl Settings {
    fn resolve(opts: &Opts) -> Result<Settings> {
        let mut values = BTreeMap::new();
        if let Some(path) = &opts.config {
            let text = fs::read_to_string(path).map_err(|e| Error::Io {
                path: path.into(),
                source: e,
            })?;
            for (key, value) in parse_config(&text)? {
                let known = CONFIG_KEYS
                    .iter()
                    .find(|k| **k == key)
                    .ok_or_else(|| Error::Parse(format!("unknown config key `{key}` in {path}")))?;
                values.insert(*known, value);
            }
        }
        let flags = [
            ("discipline", &opts.discipline),
            ("service", &opts.service),
            ("lambda", &opts.lambda),
            ("mu", &opts.mu),
            ("metric", &opts.metric),
            ("k", &opts.k),
            ("packets", &opts.packets),
            ("seed", &opts.seed),
            ("warmup", &opts.warmup),
            ("out", &opts.out),
            ("rel-tol", &opts.rel_tol),
            ("z-max", &opts.z_max),
            ("dump-trace", &opts.dump_trace),
            ("from-trace", &opts.from_trace),
            ("delta-r2", &opts.delta_r2),
            ("area-method", &opts.area_method),
        ];
        for (key, value) in flags {
            if let Some(v) = value {
                values.insert(key, v.clone());
            }
        }
        if opts.svg {
            values.insert("svg", "true".into());
        }
        Ok(Settings { values })
    }

    fn raw(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        self.raw(key)
            .map(|v| {
                v.trim()
                    .parse::<T>()
                    .map_err(|e| Error::Parse(format!("--{key} `{v}`: {e}")))
            })
            .transpose()
    }

    fn require<T: FromStr>(&self, key: &str) -> Result<T>
    where
        T::Err: std::fmt::Display,
    {
        self.get(key)?
            .ok_or_else(|| Error::MissingInput(format!("--{key} is required")))
    }

    fn list<T: FromStr>(&self, key: &str) -> Result<Option<Vec<T>>>
    where
        T::Err: std::fmt::Display,
    {
        self.raw(key)
            .map(|v| {
                v.split(',')
                    .map(str::trim)
                    .filter(|s| !s.is_empty())
                    .map(|s| s.parse::<T>().map_err(|e| Error::Parse(format!("--{key} `{s}`: {e}"))))
                    .collect()
            })
            .transpose()
    }

    fn svg(&self) -> bool {
        matches!(self.raw("svg"), Some("true" | "1" | "yes"))
    }

    fn mu(&self) -> Result<f64> {
        Ok(self.get("mu")?.unwrap_or(1.0))
    }

    fn seed(&self) -> Result<u64> {
        Ok(self.get("seed")?.unwrap_or(DEFAULT_SEED))
    }

    fn packets(&self) -> Result<usize> {
        Ok(self.get("packets")?.unwrap_or(bench::sweep::DEFAULT_PACKETS))
    }

    fn out_dir(&self) -> PathBuf {
        PathBuf::from(self.raw("out").unwrap_or("."))
    }

    fn tolerance(&self) -> Result<Tolerance> {
        let d = Tolerance::default();
        Ok(Tolerance {
            rel_tol: self.get("rel-tol")?.unwrap_or(d.rel_tol),
            z_max: self.get("z-max")?.unwrap_or(d.z_max),
        })
    }

    fn service(&self) -> Result<ServiceModel> {
        ServiceModel::new(self.require::<ServiceFamily>("service")?, self.mu()?)
    }

    /// Grid from `--lambda`: a comma list or `log:LOW:HIGH:N`.
    fn lambdas(&self) -> Result<Option<(Vec<f64>, String)>> {
        let Some(raw) = self.raw("lambda") else { return Ok(None) };
        if let Some(rest) = raw.trim().strip_prefix("log:") {
            let parts: Vec<&str> = rest.split(':').collect();
            let [lo, hi, n] = parts[..] else {
                return Err(Error::Parse(format!("--lambda `{raw}`: expected log:LOW:HIGH:N")));
            };
            let parse = |s: &str| {
                s.parse::<f64>()
                    .map_err(|e| Error::Parse(format!("--lambda `{raw}`: {e}")))
            };
            let (lo, hi) = (parse(lo)?, parse(hi)?);
            let n: usize = n.parse().map_err(|e| Error::Parse(format!("--lambda `{raw}`: {e}")))?;
            return Ok(Some((
                bench::log_grid(lo, hi, n),
                format!("log-spaced lambda grid {lo}..{hi}, {n} points"),
            )));
        }
        let values = self.list::<f64>("lambda")?.unwrap_or_default();
        Ok(Some((values, format!("lambda list {raw}"))))
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_invalid_query() { 2 } else { 1 })
        }
    }
}

fn run(cli: Cli) -> Result<u8> {
    let settings = Settings::resolve(&cli.opts)?;
    match cli.command {
        Command::Analytic => cmd_analytic(&settings),
        Command::Simulate => cmd_simulate(&settings),
        Command::Sweep => cmd_sweep(&settings),
        Command::Verify => cmd_verify(&settings),
        Command::Figure { preset } => cmd_figure(&settings, preset.parse()?),
    }
}

fn cmd_analytic(s: &Settings) -> Result<u8> {
    let query = AnalyticQuery::new(
        s.require("discipline")?,
        s.service()?,
        s.require("lambda")?,
        s.get("metric")?.unwrap_or(Metric::Gamma),
        s.get("k")?.unwrap_or(1),
    );
    let chosen: Option<AreaMethod> = s.get("area-method")?;
    let mut options = EvalOptions {
        area_method: chosen,
        delta_r2: None,
    };
    if analytic::needs_delta_r2(&query) {
        options.delta_r2 = Some(match s.get::<f64>("delta-r2")? {
            Some(v) => (v, "--delta-r2".to_string()),
            None => {
                let config = SimConfig::new(query.discipline, query.service, query.lambda, s.packets()?, s.seed()?);
                let config = with_warmup(config, s)?;
                let out = sim::run(&config)?;
                let est = out.moment(Metric::DeltaR, 2).expect("always estimated");
                (
                    est.value,
                    format!(
                        "simulation (packets={}, seed={}, stderr={})",
                        config.n_packets, config.seed, est.std_error
                    ),
                )
            }
        });
    }
    let result = analytic::evaluate(&query, &options)?;
    println!("value: {}", result.value);
    println!("formula_id: {}", result.formula_id);
    println!(
        "query: discipline={} service={} lambda={} mu={} metric={} k={}",
        query.discipline,
        query.service.family(),
        query.lambda,
        query.mu(),
        query.metric,
        query.k
    );
    for input in &result.external_inputs {
        println!("external_input: {} = {} ({})", input.name, input.value, input.source);
    }
    if chosen.is_none() {
        for method in analytic::area_variants(&query) {
            if Some(method) == options.area_method.or(Some(AreaMethod::Quadrature)) {
                continue;
            }
            let alt = analytic::evaluate(
                &query,
                &EvalOptions {
                    area_method: Some(method),
                    ..options.clone()
                },
            )?;
            println!("alternative: {} = {}", alt.formula_id, alt.value);
        }
    }
    Ok(0)
}

fn with_warmup(config: SimConfig, s: &Settings) -> Result<SimConfig> {
    Ok(match s.get::<usize>("warmup")? {
        Some(w) => config.with_warmup(w),
        None => config,
    })
}

fn cmd_simulate(s: &Settings) -> Result<u8> {
    let moments = if let Some(path) = s.raw("from-trace") {
        let log = eventlog::load(Path::new(path))?;
        let warmup = s.get("warmup")?.unwrap_or(0);
        let (window, moments) = sim::moments_from_log(&log.records, log.horizon, warmup, DEFAULT_BATCHES)?;
        println!(
            "trace={path} packets={} warmup={warmup} window=[{}, {}]",
            log.records.len(),
            window.start,
            window.end
        );
        moments
    } else {
        let discipline: Discipline = s.require("discipline")?;
        let config = SimConfig::new(discipline, s.service()?, s.require("lambda")?, s.packets()?, s.seed()?);
        let config = with_warmup(config, s)?;
        let out = sim::run(&config)?;
        println!(
            "discipline={} service={} lambda={} mu={} packets={} seed={} warmup={}",
            discipline,
            config.service.family(),
            config.lambda,
            config.service.rate(),
            config.n_packets,
            config.seed,
            config.warmup
        );
        if let Some(path) = s.raw("dump-trace") {
            eventlog::save(Path::new(path), &out.records, Some(out.trace.horizon()))?;
            log::info!("packet log written to {path}");
        }
        out.moments
    };
    for m in &moments {
        let name = if m.k == 1 {
            format!("E[{}]", m.metric)
        } else {
            format!("E[{}^{}]", m.metric, m.k)
        };
        println!("{name} = {} +/- {}", m.value, m.std_error);
    }
    Ok(0)
}

/// Applies list-valued flags on top of a base spec.
fn apply_overrides(mut spec: SweepSpec, s: &Settings) -> Result<SweepSpec> {
    if let Some((lambdas, note)) = s.lambdas()? {
        spec.lambdas = lambdas;
        spec.grid_note = note;
    }
    spec.mu = s.mu()?;
    if let Some(d) = s.list("discipline")? {
        spec.disciplines = d;
    }
    if let Some(f) = s.list("service")? {
        spec.families = f;
    }
    let metrics: Option<Vec<Metric>> = s.list("metric")?;
    let orders: Option<Vec<u32>> = s.list("k")?;
    if metrics.is_some() || orders.is_some() {
        let metrics = metrics.unwrap_or_else(|| dedup(spec.quantities.iter().map(|q| q.0)));
        let orders = orders.unwrap_or_else(|| dedup(spec.quantities.iter().map(|q| q.1)));
        spec.quantities = metrics
            .iter()
            .flat_map(|m| orders.iter().map(move |k| (*m, *k)))
            .collect();
    }
    if let Some(p) = s.get("packets")? {
        spec.n_packets = p;
    }
    if let Some(seed) = s.get("seed")? {
        spec.base_seed = seed;
    }
    spec.warmup = s.get("warmup")?;
    spec.delta_r2 = s.get("delta-r2")?;
    Ok(spec)
}

fn dedup<T: PartialEq>(items: impl Iterator<Item = T>) -> Vec<T> {
    let mut out = Vec::new();
    for item in items {
        if !out.contains(&item) {
            out.push(item);
        }
    }
    out
}

fn write_outputs(s: &Settings, name: &str, title: &str, spec: &SweepSpec, rows: &[bench::Row]) -> Result<()> {
    let dir = s.out_dir();
    fs::create_dir_all(&dir).map_err(|e| Error::Io {
        path: dir.clone(),
        source: e,
    })?;
    let csv_path = dir.join(format!("{name}.csv"));
    let file = fs::File::create(&csv_path).map_err(|e| Error::Io {
        path: csv_path.clone(),
        source: e,
    })?;
    bench::write_rows(std::io::BufWriter::new(file), &spec.header_comments(), rows)?;
    println!("wrote {}", csv_path.display());
    if s.svg() {
        let svg_path = dir.join(format!("{name}.svg"));
        fs::write(&svg_path, bench::render_svg(title, rows)).map_err(|e| Error::Io {
            path: svg_path.clone(),
            source: e,
        })?;
        println!("wrote {}", svg_path.display());
    }
    Ok(())
}

fn cmd_sweep(s: &Settings) -> Result<u8> {
    let spec = apply_overrides(SweepSpec::new(), s)?;
    let rows = bench::run_sweep(&spec, &s.tolerance()?)?;
    write_outputs(s, "sweep", "lambda sweep", &spec, &rows)?;
    println!("{} rows", rows.len());
    Ok(0)
}

fn cmd_verify(s: &Settings) -> Result<u8> {
    let base = bench::default_suite(s.packets()?, s.seed()?);
    let spec = apply_overrides(base, s)?;
    if spec.n_packets == 0 {
        return Err(Error::Domain("verification needs --packets > 0".into()));
    }
    let report = bench::verify(&spec, s.tolerance()?)?;
    print!("{}", report.render_text());
    write_outputs(s, "verify", "verification", &spec, &report.rows)?;
    Ok(report.exit_code() as u8)
}

fn cmd_figure(s: &Settings, preset: Preset) -> Result<u8> {
    let spec = preset.spec(s.packets()?, s.seed()?);
    let rows = bench::run_sweep(&spec, &s.tolerance()?)?;
    write_outputs(s, preset.name(), preset.title(), &spec, &rows)?;
    Ok(0)
}
