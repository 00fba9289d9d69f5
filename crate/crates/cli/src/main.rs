use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use ringwalk::analysis::{self, HitOutcome, HittingResult, Regime};
use ringwalk::classical::{self, WalkState};
use ringwalk::config::{Format, RegimeChoice, RunConfig};
use ringwalk::coupler::{self, BendLossTable, CouplerSpec};
use ringwalk::export::{self, Cell, Table};
use ringwalk::quantum;
use ringwalk::{build_chain, classical_transfer_matrix, quantum_transfer_matrix, Complex64, Error};
use serde_json::{json, Value};

#[derive(Parser, Debug)]
#[command(name = "ringwalk", version, about = "Classical and quantum walks on coupled ring resonators")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    #[command(flatten)]
    overrides: Overrides,
}

#[derive(Subcommand, Debug, Clone, Copy, PartialEq, Eq)]
enum Command {
    /// Steady-state Drop/Thru probabilities, closed form against iteration
    Steady,
    /// Step-by-step trajectory up to n_max
    Evolve,
    /// Two-axis steady-state sweep from [sweep]
    Sweep,
    /// Cumulative Drop probability over steps and [axis]
    Timegrid,
    /// Goal-hitting time, at one point or over [axis]
    Hit,
    /// Phase-averaged single-ring Drop probability
    PhaseAvg,
    /// Coupler beat length, effective length and coupling tables
    Coupler,
    /// Transition matrices of the chain
    Matrix,
}

#[derive(Args, Debug)]
struct Overrides {
    /// TOML run configuration
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output file; stdout when absent
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[arg(long, global = true, value_parser = ["csv", "json"])]
    format: Option<String>,

    /// Worker threads for sweeps
    #[arg(long, global = true, env = "RINGWALK_THREADS")]
    threads: Option<usize>,

    /// Goal probability for hitting times
    #[arg(long, global = true)]
    pg: Option<f64>,

    #[arg(long, global = true)]
    nmax: Option<usize>,

    #[arg(long, global = true)]
    tol: Option<f64>,

    /// Phase samples for averaging
    #[arg(long, global = true)]
    samples: Option<usize>,

    #[arg(long, global = true, value_parser = ["classical", "quantum", "both"])]
    regime: Option<String>,

    /// Write grids as a gnuplot nonuniform matrix
    #[arg(long, global = true)]
    gnuplot: bool,
}

struct Failure {
    code: u8,
    error: Error,
}

impl From<Error> for Failure {
    fn from(error: Error) -> Self {
        let code = match &error {
            Error::Config(_) => 2,
            Error::NonConvergence { .. } => 4,
            Error::Io(_) => 1,
            _ => 3,
        };
        Failure { code, error }
    }
}

type Run<T> = Result<T, Failure>;

fn apply_overrides(cfg: &mut RunConfig, o: &Overrides) -> Run<()> {
    if let Some(out) = &o.out {
        cfg.output.path = Some(out.display().to_string());
    }
    if let Some(f) = &o.format {
        cfg.output.format = f.parse::<Format>()?;
    }
    if o.gnuplot {
        cfg.output.gnuplot = true;
    }
    if let Some(t) = o.threads {
        cfg.options.threads = Some(t);
    }
    if let Some(p) = o.pg {
        cfg.options.p_g = p;
    }
    if let Some(n) = o.nmax {
        cfg.options.n_max = n;
    }
    if let Some(t) = o.tol {
        cfg.options.tol = t;
    }
    if let Some(s) = o.samples {
        cfg.options.samples = s;
    }
    if let Some(r) = &o.regime {
        cfg.options.regime = match r.as_str() {
            "classical" => RegimeChoice::Classical,
            "quantum" => RegimeChoice::Quantum,
            _ => RegimeChoice::Both,
        };
    }
    Ok(())
}

/// Rendered output in the configured format.
enum Artifact {
    Table { table: Table, notes: Vec<(String, Value)> },
    Grids(Vec<analysis::SweepGrid>),
    Matrices(Vec<(String, Table)>),
}

fn render(cfg: &RunConfig, artifact: &Artifact) -> Run<String> {
    let header = cfg.to_toml()?;
    let out = match (cfg.output.format, artifact) {
        (Format::Csv, Artifact::Table { table, notes }) => {
            let mut head = header;
            for (k, v) in notes {
                head.push_str(&format!("{k}: {v}\n"));
            }
            table.to_csv(&head)?
        }
        (Format::Json, Artifact::Table { table, notes }) => {
            let mut data = serde_json::Map::new();
            data.insert("rows".into(), table.to_json());
            for (k, v) in notes {
                data.insert(k.clone(), v.clone());
            }
            export::json_document(cfg, "result", Value::Object(data))?
        }
        (Format::Csv, Artifact::Grids(grids)) if cfg.output.gnuplot => export::grids_gnuplot(grids, &header)?,
        (Format::Csv, Artifact::Grids(grids)) => export::grids_csv(grids, &header)?,
        (Format::Json, Artifact::Grids(grids)) => export::json_document(cfg, "grids", export::grids_json(grids)?)?,
        (Format::Csv, Artifact::Matrices(blocks)) => {
            let mut out = export::comment_block(&header);
            for (i, (name, table)) in blocks.iter().enumerate() {
                if i > 0 {
                    out.push('\n');
                }
                out.push_str(&table.to_csv(&format!("{name}\n"))?);
            }
            out
        }
        (Format::Json, Artifact::Matrices(blocks)) => {
            let data = blocks.iter().map(|(name, t)| (name.clone(), t.to_json())).collect();
            export::json_document(cfg, "matrices", Value::Object(data))?
        }
    };
    Ok(out)
}

fn steady(cfg: &RunConfig) -> Run<Artifact> {
    let spec = cfg.spec()?;
    let mut table = Table::new([
        "regime",
        "method",
        "p_drop",
        "p_thru",
        "iter_drop",
        "iter_thru",
        "abs_diff_drop",
        "abs_diff_thru",
    ]);
    for regime in cfg.options.regime.regimes() {
        let iterated = analysis::iterated_ports(&spec, regime, cfg.options.tol)?;
        let row = match analysis::closed_form_ports(&spec, regime) {
            Some(c) => vec![
                Cell::from(regime.to_string()),
                Cell::from("closed_form"),
                Cell::from(c.drop),
                Cell::from(c.thru),
                Cell::from(iterated.drop),
                Cell::from(iterated.thru),
                Cell::from((c.drop - iterated.drop).abs()),
                Cell::from((c.thru - iterated.thru).abs()),
            ],
            None => vec![
                Cell::from(regime.to_string()),
                Cell::from("iterated"),
                Cell::from(iterated.drop),
                Cell::from(iterated.thru),
                Cell::from(iterated.drop),
                Cell::from(iterated.thru),
                Cell::Empty,
                Cell::Empty,
            ],
        };
        table.push(row)?;
    }
    Ok(Artifact::Table { table, notes: Vec::new() })
}

fn evolve(cfg: &RunConfig) -> Run<Artifact> {
    let spec = cfg.spec()?;
    let graph = build_chain(&spec)?;
    let n = cfg.options.n_max;
    let regimes = cfg.options.regime.regimes();
    let dt = spec.step_duration();
    let labels: Vec<String> = (0..graph.dim()).map(|i| graph.label(i)).collect();

    let mut columns = vec!["step".to_string()];
    if dt.is_some() {
        columns.push("time_s".into());
    }
    let classical = if regimes.contains(&Regime::Classical) {
        let t = classical_transfer_matrix(&graph);
        columns.extend(["pcd", "pct", "mass"].map(String::from));
        columns.extend(labels.iter().map(|l| format!("p_{l}")));
        Some((classical::evolve(&t, &WalkState::localized(t.dim(), 0), n)?, t))
    } else {
        None
    };
    let quantum = if regimes.contains(&Regime::Quantum) {
        let t = quantum_transfer_matrix(&graph);
        columns.extend(["pqd", "pqt", "norm"].map(String::from));
        for l in &labels {
            columns.push(format!("a_{l}_re"));
            columns.push(format!("a_{l}_im"));
        }
        Some(quantum::evolve_amplitudes(&t, &WalkState::<Complex64>::localized(t.dim(), 0), n)?)
    } else {
        None
    };

    let mut table = Table { columns, rows: Vec::new() };
    for m in 0..=n {
        let mut row = vec![Cell::from(m)];
        if let Some(dt) = dt {
            row.push(Cell::from(m as f64 * dt));
        }
        if let Some((states, t)) = &classical {
            let v = &states[m].values;
            row.extend([v[t.drop_index()], v[t.thru_index()], states[m].mass()].map(Cell::from));
            row.extend(v.iter().map(|&p| Cell::from(p)));
        }
        if let Some(traj) = &quantum {
            row.extend([traj.p_drop(m), traj.p_thru(m), traj.time_resolved_norm_sqr(m)].map(Cell::from));
            for a in &traj.states[m].values {
                row.push(Cell::from(a.re));
                row.push(Cell::from(a.im));
            }
        }
        table.push(row)?;
    }
    Ok(Artifact::Table { table, notes: Vec::new() })
}

fn sweep(cfg: &RunConfig) -> Run<Artifact> {
    let spec = cfg.spec()?;
    let s = cfg
        .sweep
        .as_ref()
        .ok_or_else(|| Error::InvalidArgument("sweep needs a [sweep] section".into()))?;
    let grid = analysis::sweep2d(&spec, &s.axis1, &s.axis2, s.metric, s.scenario)?;
    Ok(Artifact::Grids(vec![grid]))
}

fn need_axis(cfg: &RunConfig, command: &str) -> Run<analysis::Axis> {
    cfg.axis
        .clone()
        .ok_or_else(|| Error::InvalidArgument(format!("{command} needs an [axis] section")).into())
}

fn timegrid(cfg: &RunConfig) -> Run<Artifact> {
    let spec = cfg.spec()?;
    cfg.check_time_steps()?;
    let axis = need_axis(cfg, "timegrid")?;
    let grids = cfg
        .options
        .regime
        .regimes()
        .into_iter()
        .map(|r| analysis::time_grid(&spec, &axis, cfg.options.n_max, r))
        .collect::<ringwalk::Result<Vec<_>>>()?;
    Ok(Artifact::Grids(grids))
}

fn hit_row(value: Option<f64>, regime: Regime, r: &HittingResult) -> Vec<Cell> {
    let (status, steps, steady) = match r.outcome {
        HitOutcome::Reached { steps } => ("reached", Some(steps), None),
        HitOutcome::Unreachable { steady } => ("unreachable", None, Some(steady)),
        HitOutcome::NotWithin { .. } => ("not_within_n_max", None, None),
    };
    let mut row = Vec::new();
    if let Some(v) = value {
        row.push(Cell::from(v));
    }
    row.extend([
        Cell::from(regime.to_string()),
        Cell::from(r.threshold),
        Cell::from(status),
        Cell::from(steps),
        Cell::from(r.seconds),
        Cell::from(steady),
    ]);
    row
}

fn hit(cfg: &RunConfig) -> Run<Artifact> {
    let spec = cfg.spec()?;
    let (p_g, n_max) = (cfg.options.p_g, cfg.options.n_max);
    let mut columns: Vec<String> = Vec::new();
    if let Some(axis) = &cfg.axis {
        columns.push(axis.param.to_string());
    }
    columns.extend(["regime", "p_g", "status", "steps", "seconds", "steady"].map(String::from));
    let mut table = Table { columns, rows: Vec::new() };
    for regime in cfg.options.regime.regimes() {
        match &cfg.axis {
            Some(axis) => {
                for (v, r) in analysis::hitting_table(&spec, axis, regime, p_g, n_max)? {
                    table.push(hit_row(Some(v), regime, &r))?;
                }
            }
            None => {
                let r = analysis::hitting_time(&spec, regime, p_g, n_max)?;
                table.push(hit_row(None, regime, &r))?;
            }
        }
    }
    Ok(Artifact::Table { table, notes: Vec::new() })
}

fn phase_avg(cfg: &RunConfig) -> Run<Artifact> {
    let spec = cfg.spec()?;
    if spec.num_rings() != 1 {
        return Err(Error::Unsupported("phase-avg covers single-ring chains".into()).into());
    }
    let (k1, k2, alpha) = (spec.couplings[0], spec.couplings[1], spec.losses[0]);
    let samples = cfg.options.samples;
    let average = analysis::phase_average(k1, k2, alpha, samples)?;
    let classical = classical::closed_form_single(k1, k2, alpha).drop;
    let mut table = Table::new(["k1", "k2", "alpha", "samples", "average", "classical", "abs_diff"]);
    table.push(vec![
        Cell::from(k1),
        Cell::from(k2),
        Cell::from(alpha),
        Cell::from(samples),
        Cell::from(average),
        Cell::from(classical),
        Cell::from((average - classical).abs()),
    ])?;
    Ok(Artifact::Table { table, notes: Vec::new() })
}

fn coupler_row(spec: &CouplerSpec) -> Run<Vec<Cell>> {
    let lb = spec.beat_length()?;
    let le = spec.effective_length()?;
    Ok([
        spec.gap,
        spec.n_eff1,
        spec.n_eff2,
        spec.straight_length,
        lb,
        le,
        coupler::coupling_coefficient(le, lb),
    ]
    .map(Cell::from)
    .to_vec())
}

fn coupler_cmd(cfg: &RunConfig, base_dir: &Path) -> Run<Artifact> {
    let section = cfg
        .coupler
        .as_ref()
        .ok_or_else(|| Error::InvalidArgument("coupler needs a [coupler] section".into()))?;
    let base = section.spec();
    let mut table = Table::new([
        "gap",
        "n_eff1",
        "n_eff2",
        "straight_length",
        "beat_length",
        "effective_length",
        "kappa2",
    ]);
    let lengths = section.straight_lengths.map(|r| r.values()).unwrap_or_else(|| vec![base.straight_length]);
    if section.gaps.is_empty() {
        for &ls in &lengths {
            table.push(coupler_row(&CouplerSpec { straight_length: ls, ..base.clone() })?)?;
        }
    } else {
        for g in &section.gaps {
            for &ls in &lengths {
                let spec = CouplerSpec { gap: g.gap, n_eff1: g.n_eff1, n_eff2: g.n_eff2, straight_length: ls, ..base.clone() };
                table.push(coupler_row(&spec)?)?;
            }
        }
    }
    let mut notes = Vec::new();
    if let Some(b) = &section.bend_loss {
        let table = BendLossTable::from_path(base_dir.join(&b.csv))?;
        let r = coupler::min_radius_for_loss(&table, b.min_transmission)?;
        notes.push(("min_bend_radius".to_string(), json!(r)));
    }
    Ok(Artifact::Table { table, notes })
}

fn matrix(cfg: &RunConfig) -> Run<Artifact> {
    let graph = build_chain(&cfg.spec()?)?;
    let mut blocks = Vec::new();
    for regime in cfg.options.regime.regimes() {
        let table = match regime {
            Regime::Classical => export::matrix_table(&classical_transfer_matrix(&graph)),
            Regime::Quantum => export::matrix_table(&quantum_transfer_matrix(&graph)),
        };
        blocks.push((regime.to_string(), table));
    }
    Ok(Artifact::Matrices(blocks))
}

fn run(cli: &Cli) -> Run<()> {
    let path = cli
        .overrides
        .config
        .as_ref()
        .ok_or_else(|| Error::Config("--config <path> is required".into()))?;
    let mut cfg = RunConfig::from_path(path)?;
    apply_overrides(&mut cfg, &cli.overrides)?;
    cfg.validate()?;
    if let Some(n) = cfg.options.threads {
        // Fails only if a pool already exists, which keeps the same semantics.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let base_dir = path.parent().unwrap_or(Path::new("."));
    let artifact = match cli.command {
        Command::Steady => steady(&cfg)?,
        Command::Evolve => evolve(&cfg)?,
        Command::Sweep => sweep(&cfg)?,
        Command::Timegrid => timegrid(&cfg)?,
        Command::Hit => hit(&cfg)?,
        Command::PhaseAvg => phase_avg(&cfg)?,
        Command::Coupler => coupler_cmd(&cfg, base_dir)?,
        Command::Matrix => matrix(&cfg)?,
    };
    let text = render(&cfg, &artifact)?;
    match &cfg.output.path {
        Some(p) => std::fs::write(p, text).map_err(Error::from)?,
        None => {
            // A closed pipe (e.g. `| head`) is not an error for us.
            let mut out = std::io::stdout().lock();
            match out.write_all(text.as_bytes()).and_then(|()| out.flush()) {
                Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => return Err(Error::from(e).into()),
                _ => {}
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            let report = json!({
                "error": f.error.kind(),
                "message": f.error.to_string(),
                "exit_code": f.code,
            });
            eprintln!("{report}");
            ExitCode::from(f.code)
        }
    }
}
