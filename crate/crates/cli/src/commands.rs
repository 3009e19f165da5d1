use std::fmt;
use std::fs;
use std::path::Path;
use std::time::Instant;

use swarmtraj::primitive::{average_cost, solve_min_time, PrimitiveOptions};
use swarmtraj::sim::io;
use swarmtraj::sim::{
    aggregate, generate_in_box, generate_scenario, metrics, run as simulate, Aggregate, Mode, PlantModel,
    Preset, RobotModel, RunConfig, Scenario, TimingStats, DEFAULT_PROPORTIONS,
};
use swarmtraj::{Error, State3};

use crate::{ConfigArgs, GenerateArgs, PrimitiveArgs, RunArgs, ScenarioArgs, SweepArgs};

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Failure(String),
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Failure(_) => 1,
            CliError::Usage(_) => 2,
            CliError::Internal(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Failure(m) | CliError::Internal(m) => f.write_str(m),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidParameter(_) | Error::Parse(_) => CliError::Usage(e.to_string()),
            Error::PackingFailure { .. } => CliError::Failure(e.to_string()),
            _ => CliError::Internal(e.to_string()),
        }
    }
}

type CliResult<T> = Result<T, CliError>;

/// `println!` that tolerates a closed stdout (e.g. output piped into `head`).
macro_rules! say {
    ($($arg:tt)*) => {{
        use std::io::Write as _;
        let _ = writeln!(std::io::stdout().lock(), $($arg)*);
    }};
}

pub fn parse_triple(s: &str) -> Result<[f64; 3], String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != 3 {
        return Err(format!("expected X,Y,Z, got `{s}`"));
    }
    let mut out = [0.0; 3];
    for (o, p) in out.iter_mut().zip(parts) {
        *o = p.parse().map_err(|_| format!("`{p}` is not a number"))?;
    }
    Ok(out)
}

fn ensure_dir(dir: &Path) -> CliResult<()> {
    fs::create_dir_all(dir).map_err(|e| CliError::Internal(format!("{}: {e}", dir.display())))
}

fn models(names: &[String]) -> CliResult<Vec<RobotModel>> {
    names
        .iter()
        .map(|n| n.parse::<RobotModel>().map_err(CliError::from))
        .collect()
}

pub fn build_scenario(g: &GenerateArgs) -> CliResult<Scenario> {
    let mix = models(&g.model)?;
    if let Some(name) = &g.preset {
        let preset: Preset = name.parse()?;
        if !mix.is_empty() || g.box_extents.is_some() {
            return Err(CliError::Usage("--model and --box cannot be combined with --preset".into()));
        }
        return Ok(preset.build(g.robots, g.occupancy, g.seed)?);
    }
    let n = g.robots.unwrap_or(8);
    let mix = if mix.is_empty() { vec![RobotModel::Firefly] } else { mix };
    let scenario = match (g.occupancy, g.box_extents) {
        (Some(occ), proportions) => {
            generate_scenario(n, occ, proportions.unwrap_or(DEFAULT_PROPORTIONS), g.seed, &mix)?
        }
        (None, Some(extents)) => generate_in_box(n, extents, g.seed, &mix, "box")?,
        (None, None) => generate_scenario(n, 0.2, DEFAULT_PROPORTIONS, g.seed, &mix)?,
    };
    Ok(scenario)
}

pub fn build_config(c: &ConfigArgs) -> CliResult<RunConfig> {
    let mut cfg = match &c.config {
        Some(path) => io::read_config(path)?,
        None => RunConfig::default(),
    };
    if let Some(path) = &c.weights {
        cfg.weights = io::read_weights(path)?;
    }
    if let Some(m) = &c.mode {
        cfg.mode = m.parse()?;
    }
    let set = |slot: &mut f64, v: Option<f64>| {
        if let Some(v) = v {
            *slot = v;
        }
    };
    set(&mut cfg.replan_hz, c.replan_hz);
    set(&mut cfg.sim_hz, c.sim_hz);
    set(&mut cfg.time_budget, c.time_budget);
    set(&mut cfg.goal_tol, c.goal_tol);
    set(&mut cfg.weights.q_dynm, c.q_dynm);
    set(&mut cfg.weights.q_obs, c.q_obs);
    set(&mut cfg.weights.q_lim, c.q_lim);
    set(&mut cfg.weights.k_t, c.k_t);
    set(&mut cfg.weights.k_p, c.k_p);
    set(&mut cfg.planner.horizon, c.horizon);
    set(&mut cfg.planner.tolerance, c.tolerance);
    match c.plant.as_deref() {
        None => {}
        Some("perfect") => cfg.plant = PlantModel::Perfect,
        Some("lag") => {
            if !matches!(cfg.plant, PlantModel::Lag { .. }) {
                cfg.plant = PlantModel::default_lag();
            }
        }
        Some(other) => return Err(CliError::Usage(format!("unknown plant `{other}` (expected perfect or lag)"))),
    }
    if c.lag_rate.is_some() || c.noise.is_some() {
        let PlantModel::Lag { mut rate, mut noise } = cfg.plant else {
            return Err(CliError::Usage("--lag-rate and --noise require --plant lag".into()));
        };
        set(&mut rate, c.lag_rate);
        set(&mut noise, c.noise);
        cfg.plant = PlantModel::Lag { rate, noise };
    }
    cfg.validate()?;
    Ok(cfg)
}

pub fn scenario(args: ScenarioArgs) -> CliResult<u8> {
    let s = build_scenario(&args.generate)?;
    match &args.out {
        Some(dir) => {
            ensure_dir(dir)?;
            let path = dir.join("scenario.toml");
            io::write_scenario(&path, &s)?;
            say!(
                "wrote {} ({} robots, occupancy {:.4}, box {:?})",
                path.display(),
                s.len(),
                s.computed_occupancy(),
                s.box_extents
            );
        }
        None => say!("{}", io::to_toml(&s)?.trim_end()),
    }
    Ok(0)
}

pub fn run(args: RunArgs) -> CliResult<u8> {
    let scenario = match &args.scenario {
        Some(path) => io::read_scenario(path)?,
        None => build_scenario(&args.generate)?,
    };
    let mut cfg = build_config(&args.config)?;
    cfg.seed = args.generate.seed;
    cfg.record_trajectories = args.out.is_some();
    let report = simulate(&scenario, &cfg)?;
    let m = metrics(&report);
    if let Some(dir) = &args.out {
        ensure_dir(dir)?;
        io::write_trajectories_file(&dir.join("trajectories.csv"), &report)?;
        io::write_metrics(&dir.join("metrics.toml"), &m)?;
        io::write_timing(&dir.join("timing.toml"), &m.timing)?;
        #[derive(serde::Serialize)]
        struct Events<'a> {
            event: &'a [swarmtraj::sim::Event],
        }
        fs::write(dir.join("events.toml"), io::to_toml(&Events { event: &report.events })?)
            .map_err(|e| CliError::Internal(e.to_string()))?;
    }
    say!(
        "{} mode={} robots={} success={} reached={}/{} collisions={} deadlocks={} min_separation={:.4} makespan={:.2} termination={:?}",
        m.scenario,
        m.mode,
        m.robots,
        m.success,
        m.reached_goal,
        m.robots,
        m.collisions,
        m.deadlocks,
        m.min_separation,
        m.makespan,
        m.termination
    );
    print_timing("optimization", &m.timing.optimization);
    print_timing("total", &m.timing.total);
    Ok(if m.success { 0 } else { 1 })
}

fn print_timing(label: &str, t: &TimingStats) {
    if t.count > 0 {
        say!(
            "  {label:<13} mean {:>10.1} µs  std {:>10.1}  min {:>10.1}  max {:>10.1}  (n={})",
            t.mean, t.std, t.min, t.max, t.count
        );
    }
}

pub fn sweep(args: SweepArgs) -> CliResult<u8> {
    let preset: Preset = args.preset.parse()?;
    let modes: Vec<Mode> = args.modes.iter().map(|m| m.parse()).collect::<Result<_, _>>()?;
    if args.seeds == 0 || args.robots.is_empty() {
        return Err(CliError::Usage("need at least one seed and one robot count".into()));
    }
    let base = build_config(&args.config)?;
    let occupancies: Vec<Option<f64>> = if args.occupancy.is_empty() {
        vec![None]
    } else {
        args.occupancy.iter().map(|&o| Some(o)).collect()
    };
    let mut rows: Vec<(String, Aggregate)> = Vec::new();
    say!(
        "{:<34} {:>5} {:>8} {:>9} {:>10} {:>10} {:>9} {:>12}",
        "configuration", "runs", "success", "fraction", "collisions", "deadlocks", "min_sep", "opt_mean_us"
    );
    for &mode in &modes {
        for &occ in &occupancies {
            for &n in &args.robots {
                let mut runs = Vec::with_capacity(args.seeds as usize);
                for seed in args.seed..args.seed + args.seeds {
                    let s = preset.build(Some(n), occ, seed)?;
                    let cfg = RunConfig {
                        mode,
                        seed,
                        record_trajectories: false,
                        ..base.clone()
                    };
                    runs.push(metrics(&simulate(&s, &cfg)?));
                }
                let agg = aggregate(&runs);
                let label = match occ {
                    Some(o) => format!("{} {mode} n={n} occ={o}", args.preset),
                    None => format!("{} {mode} n={n}", args.preset),
                };
                say!(
                    "{:<34} {:>5} {:>8.3} {:>9.3} {:>10.2} {:>10.2} {:>9.4} {:>12.1}",
                    label,
                    agg.runs,
                    agg.success_rate,
                    agg.mean_success_fraction,
                    agg.mean_collisions,
                    agg.mean_deadlocks,
                    agg.min_separation,
                    agg.timing.optimization.mean
                );
                rows.push((label, agg));
            }
        }
    }
    if let Some(dir) = &args.out {
        ensure_dir(dir)?;
        fs::write(dir.join("sweep.toml"), io::aggregate_table(&rows)?)
            .map_err(|e| CliError::Internal(e.to_string()))?;
    }
    Ok(0)
}

pub fn primitive(args: PrimitiveArgs) -> CliResult<u8> {
    let mut opts = PrimitiveOptions::<f64>::default();
    if let Some(t) = args.t_min {
        opts.t_min = t;
    }
    if let Some(t) = args.t_max {
        opts.t_max = t;
    }
    opts.validate()?;
    let x0 = State3::new(args.from, args.vel, args.acc);
    if !x0.is_finite() || !args.to.iter().all(|x| x.is_finite()) {
        return Err(CliError::Usage("boundary values must be finite".into()));
    }
    let sol = solve_min_time(&x0, &args.to, &opts);
    let traj = sol.trajectory;
    say!("duration = {}", traj.duration);
    say!("from_root = {}", sol.from_root);
    say!("average_cost = {}", average_cost(&traj)?);
    for (axis, c) in ["x", "y", "z"].iter().zip(&traj.coeffs) {
        say!("coeffs_{axis} = {c:?}");
    }
    if let Some(n) = args.bench {
        let mut stats = TimingStats::default();
        for _ in 0..n.max(1) {
            let t = Instant::now();
            std::hint::black_box(solve_min_time(std::hint::black_box(&x0), &args.to, &opts));
            stats.push(t.elapsed().as_secs_f64() * 1e6);
        }
        say!(
            "bench n={} mean={:.2}us std={:.2}us min={:.2}us max={:.2}us",
            stats.count, stats.mean, stats.std, stats.min, stats.max
        );
    }
    Ok(0)
}
