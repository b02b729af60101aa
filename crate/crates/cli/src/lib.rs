//! Library surface backing the `gsemm` binary: configuration parsing,
//! file formats, and the subcommand implementations. Kept as a library so
//! integration tests can exercise the formats directly.

pub mod config;
pub mod io;

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use ndarray::Array2;

use gsemm_core::{
    build_episode_graph, capacity_search, energy_total, find_instantaneous_fixed_point,
    generate_memories, init_from_cue, overlaps, simulate, train_online, CapacityOptions,
    CapacityResult, Error as CoreError, ModelSpec, RetrievalCriterion, SimOptions, SynapseState,
    Trajectory, Variant,
};

use config::Config;

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Numerical(String),
}

impl CliError {
    fn config(msg: String) -> Self {
        CliError::Config(msg)
    }

    fn from_core_config(e: CoreError) -> Self {
        CliError::Config(e.to_string())
    }

    fn from_core(e: CoreError) -> Self {
        match e {
            CoreError::InvalidArgument(_) => CliError::Config(e.to_string()),
            _ => CliError::Numerical(e.to_string()),
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 1,
            CliError::Numerical(_) => 2,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::Config(m) | CliError::Numerical(m) => m,
        }
    }
}

#[derive(Parser)]
#[command(
    name = "gsemm",
    about = "Sequential episodic memory simulations: retrieval, energy surfaces, capacity, learning",
    version
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand)]
pub enum Command {
    /// Run a cued simulation and write the overlap/energy trace as CSV.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Like `simulate`, plus instantaneous fixed-point tracking along the
    /// trajectory.
    EnergyTrace {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Output CSV for the frozen-delay fixed-point sweep.
        #[arg(long)]
        fixed_points: PathBuf,
    },
    /// Sweep episode lengths and report the smallest feature layer that
    /// retrieves the full episode.
    Capacity {
        /// Model variant: lisem or dsem.
        #[arg(long)]
        variant: String,
        /// Episode length or inclusive range, e.g. 3 or 3..10.
        #[arg(long)]
        k: String,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// JSON summary output.
        #[arg(long)]
        out: PathBuf,
        /// Optional CSV table output.
        #[arg(long)]
        table: Option<PathBuf>,
        #[arg(long, default_value_t = 500)]
        max_nf: usize,
        /// Simulation budget per episode length, in time units per memory.
        #[arg(long, default_value_t = 100.0)]
        max_time_per_k: f64,
    },
    /// Train synapses online on a cyclic episode and serialize them.
    Learn {
        #[arg(long)]
        config: PathBuf,
        /// Output file for the learned matrices (two blocks: xi, phi).
        #[arg(long)]
        out: PathBuf,
        /// Directory for per-epoch metrics and sampled snapshots.
        #[arg(long)]
        snapshots: PathBuf,
    },
    /// Frozen-delay fixed-point sweep along a simulated trajectory.
    FixedPoints {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}


struct Setup {
    spec: ModelSpec,
    syn: SynapseState,
    memories: Array2<f64>,
}

fn load_setup(path: &Path) -> Result<(Config, Setup), CliError> {
    let cfg = Config::load(path)?;
    let spec = cfg.model_spec()?;
    let memories = generate_memories(spec.n_f, spec.n_h, cfg.memories.seed)
        .map_err(CliError::from_core_config)?;
    let graph = build_episode_graph(&cfg.memories.cycles).map_err(CliError::from_core_config)?;
    let syn = SynapseState::preloaded(&memories, &graph, spec.alpha_s)
        .map_err(CliError::from_core_config)?;
    Ok((cfg, Setup { spec, syn, memories }))
}

fn run_cued_simulation(
    cfg: &Config,
    setup: &Setup,
    record_states: bool,
) -> Result<Trajectory, CliError> {
    let sim = &cfg.simulate;
    if sim.cue_memory >= setup.memories.ncols() {
        return Err(CliError::config(format!(
            "cue_memory {} out of range (have {} memories)",
            sim.cue_memory,
            setup.memories.ncols()
        )));
    }
    let cue = setup.memories.column(sim.cue_memory).to_owned();
    let init = init_from_cue(&cue, sim.noise_fraction, sim.noise_seed, &setup.spec, &setup.syn)
        .map_err(CliError::from_core_config)?;
    simulate(
        &setup.spec,
        &setup.syn,
        &init,
        &SimOptions {
            duration: sim.duration,
            dt: sim.dt,
            record_every: sim.record_every,
            record_energy: sim.energy,
            record_states,
            frozen_delay: false,
        },
    )
    .map_err(CliError::from_core)
}

fn sweep_fixed_points(
    cfg: &Config,
    setup: &Setup,
    traj: &Trajectory,
    out: &Path,
) -> Result<(), CliError> {
    use std::fmt::Write as _;
    let fp_cfg = &cfg.fixed_points;
    let k = setup.syn.n_h();
    let mut text = String::from("time,iterations,residual");
    for i in 1..=k {
        let _ = write!(text, ",fp_m_{i}");
    }
    text.push_str(",fp_E_total\n");
    for (idx, state) in traj.states.iter().enumerate().step_by(fp_cfg.sweep_every) {
        let fp = find_instantaneous_fixed_point(
            state,
            &setup.syn,
            &setup.spec,
            &state.v_d,
            fp_cfg.step,
            fp_cfg.tol,
            fp_cfg.max_iters,
        )
        .map_err(CliError::from_core)?;
        let m = overlaps(&fp.state.v_f, &setup.syn.xi, &setup.spec).map_err(CliError::from_core)?;
        let e = energy_total(&fp.state, &setup.syn, &setup.spec).map_err(CliError::from_core)?;
        let _ = write!(text, "{},{},{:e}", traj.times[idx], fp.iterations, fp.residual);
        for v in m.iter() {
            let _ = write!(text, ",{v}");
        }
        let _ = writeln!(text, ",{e}");
    }
    io::write_file(out, text.as_bytes())
}

fn parse_k_range(s: &str) -> Result<Vec<usize>, CliError> {
    if let Some((a, b)) = s.split_once("..") {
        let a: usize = a
            .parse()
            .map_err(|e| CliError::config(format!("bad k range '{s}': {e}")))?;
        let b: usize = b
            .parse()
            .map_err(|e| CliError::config(format!("bad k range '{s}': {e}")))?;
        if a > b {
            return Err(CliError::config(format!("bad k range '{s}'")));
        }
        Ok((a..=b).collect())
    } else {
        let k: usize = s
            .parse()
            .map_err(|e| CliError::config(format!("bad k '{s}': {e}")))?;
        Ok(vec![k])
    }
}

pub fn run(command: Command) -> Result<(), CliError> {
    match command {
        Command::Simulate { config, out } => {
            let (cfg, setup) = load_setup(&config)?;
            let traj = run_cued_simulation(&cfg, &setup, false)?;
            io::write_trajectory_csv(&out, &traj)?;
            let seq = gsemm_core::extract_sequence(&traj, &cfg.retrieval_criterion())
                .map_err(CliError::from_core)?;
            let printable: Vec<usize> = seq.iter().map(|&i| i + 1).collect();
            println!(
                "wrote {} snapshots to {}; retrieved memory sequence {:?}",
                traj.len(),
                out.display(),
                printable
            );
            Ok(())
        }
        Command::EnergyTrace {
            config,
            out,
            fixed_points,
        } => {
            let (mut cfg, setup) = load_setup(&config)?;
            cfg.simulate.energy = true;
            let traj = run_cued_simulation(&cfg, &setup, true)?;
            io::write_trajectory_csv(&out, &traj)?;
            sweep_fixed_points(&cfg, &setup, &traj, &fixed_points)?;
            println!(
                "wrote {} snapshots to {} and fixed points to {}",
                traj.len(),
                out.display(),
                fixed_points.display()
            );
            Ok(())
        }
        Command::Capacity {
            variant,
            k,
            trials,
            seed,
            out,
            table,
            max_nf,
            max_time_per_k,
        } => {
            let variant = match variant.as_str() {
                "lisem" => Variant::Lisem,
                "dsem" => Variant::Dsem,
                other => {
                    return Err(CliError::config(format!(
                        "capacity variant must be lisem or dsem, got '{other}'"
                    )))
                }
            };
            let ks = parse_k_range(&k)?;
            let mut results: Vec<CapacityResult> = Vec::new();
            for k in ks {
                let crit = RetrievalCriterion {
                    max_time: max_time_per_k * k as f64,
                    ..Default::default()
                };
                let opts = CapacityOptions {
                    n_f_max: max_nf,
                    ..Default::default()
                };
                let r = capacity_search(variant, k, trials, &crit, &opts, seed)
                    .map_err(CliError::from_core)?;
                println!(
                    "k={k}: mean min n_f {:?} (std {:?}, {} saturated)",
                    r.mean_min_nf, r.std_min_nf, r.saturated_count
                );
                results.push(r);
            }
            let json = serde_json::to_string_pretty(&io::capacity_json(&results))
                .expect("capacity summary serializes");
            io::write_file(&out, json.as_bytes())?;
            if let Some(table) = table {
                io::write_capacity_table(&table, &results)?;
            }
            Ok(())
        }
        Command::Learn {
            config,
            out,
            snapshots,
        } => {
            let cfg = Config::load(&config)?;
            let spec = cfg.model_spec()?;
            let (learn_cfg, section) = cfg.learning_config()?;
            let memories = generate_memories(spec.n_f, section.n_memories, cfg.memories.seed)
                .map_err(CliError::from_core_config)?;
            let episode: Vec<_> = (0..section.n_memories)
                .map(|j| memories.column(j).to_owned())
                .collect();
            let (syn, snaps) = train_online(&episode, &spec, &learn_cfg, section.init_seed)
                .map_err(CliError::from_core)?;
            io::write_matrices(&out, &[&syn.xi, &syn.phi])?;

            let mut metrics = String::from("epoch,e_target,e_current\n");
            for s in &snaps {
                use std::fmt::Write as _;
                let _ = writeln!(metrics, "{},{},{}", s.epoch, s.e_target, s.e_current);
            }
            io::write_file(&snapshots.join("metrics.csv"), metrics.as_bytes())?;
            for s in &snaps {
                if s.epoch % section.snapshot_every == 0 || s.epoch + 1 == snaps.len() {
                    io::write_matrices(
                        &snapshots.join(format!("epoch_{:04}.mat", s.epoch)),
                        &[&s.xi, &s.phi],
                    )?;
                }
            }
            println!(
                "trained {} epochs; synapses in {}, snapshots in {}",
                snaps.len(),
                out.display(),
                snapshots.display()
            );
            Ok(())
        }
        Command::FixedPoints { config, out } => {
            let (cfg, setup) = load_setup(&config)?;
            let traj = run_cued_simulation(&cfg, &setup, true)?;
            sweep_fixed_points(&cfg, &setup, &traj, &out)?;
            println!("wrote fixed-point sweep to {}", out.display());
            Ok(())
        }
    }
}
