//! Command-line front end: every workflow as a reproducible, seeded command
//! emitting JSON/CSV artifacts plus a run manifest.
//!
//! Conventions: radians and Hz internally; flags take explicit MHz/ns/GHz
//! suffixes. Exit code 0 on success, 1 on a domain error, 2 on usage errors.

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use sha2::{Digest, Sha256};
use std::f64::consts::{PI, TAU};
use std::path::{Path, PathBuf};

use xykit::bench::{
    run_irb, Entangler, InterleavedUnit, IrbConfig, NoiseModel, ThetaChoice,
};
use xykit::calib::{
    phi0_scan_points, run_full_calibration, second_pulse_scan_points, CalibrationScenario,
    PulseBackend,
};
use xykit::decomp::{
    bind_half_pulse, decompose_ccphase, decompose_cphase, decompose_xy, verify as verify_program,
    PulseProgram,
};
use xykit::frames::{ramsey_delays, simulate_frame_ramsey, FrameSet};
use xykit::pulsesim::{chevron, reference_profile, DeviceProfile, TunableTransmon};
use xykit::qaoa::{
    build_qaoa_circuit, landscape, route, verify_compiled, DeviceTopology, GateSet, Landscape,
    LandscapeMode, QaoaAngles, WeightedGraph,
};
use xykit::rng::Streams;

#[derive(Parser)]
#[command(name = "xykit", version, about = "Parametric XY-gate simulator and compiler toolkit")]
struct Cli {
    /// Master seed; generated and recorded in the manifest when omitted.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Worker threads for sweeps (output is independent of this).
    #[arg(long, global = true)]
    jobs: Option<usize>,

    /// Output directory for artifacts.
    #[arg(long, global = true, default_value = "xykit-out")]
    out_dir: PathBuf,

    /// Device profile JSON (defaults to $XYKIT_PROFILE, then the built-in
    /// reference device).
    #[arg(long, global = true)]
    profile: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Population-transfer map over modulation frequency and duration.
    Chevron(ChevronArgs),
    /// Frame-tracking Ramsey experiment; fits the precession frequency.
    Ramsey(RamseyArgs),
    /// Compile a gate into calibrated pulses plus frame updates.
    Decompose(DecomposeArgs),
    /// Reconstruct a pulse program and report its distance to the target.
    Verify(VerifyArgs),
    /// Run the simulated phase-calibration chain against hidden offsets.
    CalibrateSim(CalibrateArgs),
    /// Interleaved randomized benchmarking of iSWAP pulse compositions.
    Irb(IrbArgs),
    /// MaxCut QAOA tools.
    #[command(subcommand)]
    Qaoa(QaoaCommand),
    /// Gate counts for a compiled QAOA circuit (alias of `qaoa counts`).
    Counts(CountsArgs),
}

#[derive(Subcommand)]
enum QaoaCommand {
    /// Expected-cut landscape over (γ, β) grids.
    Landscape(LandscapeArgs),
    /// Two-qubit gate counts after routing to the line.
    Counts(CountsArgs),
}

#[derive(Args)]
struct ChevronArgs {
    #[arg(long, default_value_t = 320.0)]
    f_p_min_mhz: f64,
    #[arg(long, default_value_t = 355.0)]
    f_p_max_mhz: f64,
    #[arg(long, default_value_t = 15)]
    f_p_points: usize,
    #[arg(long, default_value_t = 40.0)]
    dur_min_ns: f64,
    #[arg(long, default_value_t = 800.0)]
    dur_max_ns: f64,
    #[arg(long, default_value_t = 20)]
    dur_points: usize,
}

#[derive(Args)]
struct RamseyArgs {
    /// Flux-pulse channel frame frequency.
    #[arg(long)]
    frame_freq_mhz: f64,
    #[arg(long, default_value_t = 80)]
    points: usize,
    /// Delay span in periods of the expected oscillation.
    #[arg(long, default_value_t = 4.0)]
    periods: f64,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum DecompTarget {
    Xy,
    Cphase,
    Ccphase,
}

#[derive(Args)]
struct DecomposeArgs {
    #[arg(long)]
    theta: f64,
    #[arg(long, default_value_t = 0.0)]
    beta: f64,
    #[arg(long, value_enum, default_value_t = DecompTarget::Xy)]
    target: DecompTarget,
    /// Reconstruct the program and print the distance to the target.
    #[arg(long)]
    check: bool,
}

#[derive(Args)]
struct VerifyArgs {
    /// Pulse-program JSON file.
    #[arg(long)]
    program: PathBuf,
    /// Fail (exit 1) if the reconstruction distance exceeds this.
    #[arg(long)]
    tol: Option<f64>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum CalibBackend {
    Ideal,
    Pulsesim,
}

#[derive(Args)]
struct CalibrateArgs {
    #[arg(long, value_enum, default_value_t = CalibBackend::Ideal)]
    backend: CalibBackend,
    /// Shots per measured setting; omit for noiseless expectation values.
    #[arg(long)]
    shots: Option<u64>,
    /// Hidden drive-phase offset; drawn from the seed when omitted.
    #[arg(long)]
    hidden_phi0: Option<f64>,
    #[arg(long, default_value_t = 0.0)]
    hidden_rz0: f64,
    #[arg(long, default_value_t = 0.0)]
    hidden_rz1: f64,
    #[arg(long, default_value_t = 32)]
    phi0_points: usize,
}

#[derive(Args)]
struct IrbArgs {
    /// Pulses per interleaved iSWAP (1, 2, or 3).
    #[arg(long, default_value_t = 1)]
    n_pulses: usize,
    /// Fixed θ for multi-pulse compositions; random per circuit if omitted.
    #[arg(long)]
    theta: Option<f64>,
    #[arg(long, value_delimiter = ',', default_value = "2,4,8,16,32,64")]
    lengths: Vec<usize>,
    #[arg(long, default_value_t = 32)]
    randomizations: usize,
    #[arg(long, default_value_t = 500)]
    shots: u64,
    /// Per-qubit T1 under modulation (µs).
    #[arg(long, value_delimiter = ',', default_value = "24,26")]
    t1_us: Vec<f64>,
    /// Per-qubit T2* under modulation (µs).
    #[arg(long, value_delimiter = ',', default_value = "13,14")]
    t2_us: Vec<f64>,
    /// Depolarizing strength applied once per Clifford.
    #[arg(long, default_value_t = 0.0)]
    depol_clifford: f64,
    /// Extra depolarizing strength on the interleaved unit.
    #[arg(long, default_value_t = 0.0)]
    depol_unit: f64,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum GraphChoice {
    Ring4,
    Complete4,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum GateSetChoice {
    Cz,
    CzXy,
}

impl From<GateSetChoice> for GateSet {
    fn from(g: GateSetChoice) -> Self {
        match g {
            GateSetChoice::Cz => GateSet::CzOnly,
            GateSetChoice::CzXy => GateSet::CzAndXy,
        }
    }
}

#[derive(Args)]
struct LandscapeArgs {
    #[arg(long, value_enum, default_value_t = GraphChoice::Ring4)]
    graph: GraphChoice,
    /// Draw edge weights uniformly from [0, 1) with the run seed.
    #[arg(long)]
    random_weights: bool,
    #[arg(long, default_value_t = 0.0)]
    gamma_min: f64,
    #[arg(long, default_value_t = std::f64::consts::TAU)]
    gamma_max: f64,
    #[arg(long, default_value_t = 24)]
    gamma_points: usize,
    #[arg(long, default_value_t = 0.0)]
    beta_min: f64,
    #[arg(long, default_value_t = std::f64::consts::PI)]
    beta_max: f64,
    #[arg(long, default_value_t = 24)]
    beta_points: usize,
    /// Shots per angle pair; omit for exact expectation values.
    #[arg(long)]
    shots: Option<u64>,
    #[arg(long, value_enum, default_value_t = GateSetChoice::Cz)]
    gateset: GateSetChoice,
}

#[derive(Args)]
struct CountsArgs {
    #[arg(long, value_enum)]
    graph: GraphChoice,
    #[arg(long, value_enum)]
    gateset: GateSetChoice,
    /// Angles only affect gadget phases, not counts; fixed here for the
    /// verification pass.
    #[arg(long, default_value_t = 0.83)]
    gamma: f64,
    #[arg(long, default_value_t = 0.44)]
    beta_mix: f64,
}

#[derive(Serialize)]
struct RunManifest {
    command: String,
    args: serde_json::Value,
    master_seed: u64,
    profile_hash: String,
    tool_version: String,
    outputs: Vec<String>,
    timestamp_utc: String,
}

struct Ctx {
    seed: u64,
    out_dir: PathBuf,
    profile: DeviceProfile,
    profile_hash: String,
    outputs: Vec<String>,
}

impl Ctx {
    fn write_manifest(&self, command: &str, args: serde_json::Value) -> Result<()> {
        let manifest = RunManifest {
            command: command.to_string(),
            args,
            master_seed: self.seed,
            profile_hash: self.profile_hash.clone(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            outputs: self.outputs.clone(),
            timestamp_utc: unix_timestamp(),
        };
        let path = self.out_dir.join("manifest.json");
        std::fs::write(&path, serde_json::to_string_pretty(&manifest)?)?;
        Ok(())
    }

    fn path(&mut self, name: &str) -> PathBuf {
        self.outputs.push(name.to_string());
        self.out_dir.join(name)
    }

    fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let path = self.path(name);
        std::fs::write(&path, serde_json::to_string_pretty(value)?)
            .with_context(|| format!("writing {}", path.display()))?;
        Ok(())
    }

    fn write_csv(&mut self, name: &str, header: &[&str], rows: &[Vec<f64>]) -> Result<()> {
        let path = self.path(name);
        let mut w = csv::Writer::from_path(&path)
            .with_context(|| format!("writing {}", path.display()))?;
        w.write_record(header)?;
        for row in rows {
            w.write_record(row.iter().map(|v| format!("{v}")))?;
        }
        w.flush()?;
        Ok(())
    }
}

fn unix_timestamp() -> String {
    let secs = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    format!("{secs}")
}

fn load_profile(path: Option<&Path>) -> Result<DeviceProfile> {
    let from_env = std::env::var_os("XYKIT_PROFILE").map(PathBuf::from);
    let chosen = path.map(Path::to_path_buf).or(from_env);
    match chosen {
        None => Ok(reference_profile().clone()),
        Some(p) => {
            let text = std::fs::read_to_string(&p)
                .with_context(|| format!("unreadable profile {}", p.display()))?;
            let profile: DeviceProfile =
                serde_json::from_str(&text).with_context(|| "malformed device profile")?;
            profile.to_pair().map_err(|e| anyhow::anyhow!("invalid profile: {e}"))?;
            Ok(profile)
        }
    }
}

fn profile_hash(profile: &DeviceProfile) -> String {
    let canonical = serde_json::to_string(profile).expect("profile serializes");
    hex::encode(Sha256::digest(canonical.as_bytes()))
}

fn main() {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => {}
        Err(e) => {
            eprintln!("error: {e:#}");
            std::process::exit(1);
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    if let Some(jobs) = cli.jobs {
        rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global().ok();
    }
    let seed = cli.seed.unwrap_or_else(|| {
        use rand::RngCore;
        rand::rngs::OsRng.next_u64()
    });
    std::fs::create_dir_all(&cli.out_dir)
        .with_context(|| format!("creating {}", cli.out_dir.display()))?;
    let profile = load_profile(cli.profile.as_deref())?;
    let hash = profile_hash(&profile);
    let mut ctx = Ctx {
        seed,
        out_dir: cli.out_dir.clone(),
        profile,
        profile_hash: hash,
        outputs: Vec::new(),
    };
    match cli.command {
        Command::Chevron(a) => cmd_chevron(&mut ctx, a),
        Command::Ramsey(a) => cmd_ramsey(&mut ctx, a),
        Command::Decompose(a) => cmd_decompose(&mut ctx, a),
        Command::Verify(a) => cmd_verify(&mut ctx, a),
        Command::CalibrateSim(a) => cmd_calibrate(&mut ctx, a),
        Command::Irb(a) => cmd_irb(&mut ctx, a),
        Command::Qaoa(QaoaCommand::Landscape(a)) => cmd_landscape(&mut ctx, a),
        Command::Qaoa(QaoaCommand::Counts(a)) | Command::Counts(a) => cmd_counts(&mut ctx, a),
    }
}

fn cmd_chevron(ctx: &mut Ctx, a: ChevronArgs) -> Result<()> {
    if a.f_p_points < 2 || a.dur_points < 2 {
        bail!("grids need at least two points (--f-p-points / --dur-points)");
    }
    let pair = ctx.profile.to_pair().map_err(anyhow::Error::new)?;
    let pulse = ctx
        .profile
        .default_pulse(0.0, 160e-9)
        .map_err(anyhow::Error::new)?;
    let fps: Vec<f64> = (0..a.f_p_points)
        .map(|i| {
            1e6 * (a.f_p_min_mhz
                + (a.f_p_max_mhz - a.f_p_min_mhz) * i as f64 / (a.f_p_points - 1) as f64)
        })
        .collect();
    let durs: Vec<f64> = (0..a.dur_points)
        .map(|i| {
            1e-9 * (a.dur_min_ns
                + (a.dur_max_ns - a.dur_min_ns) * i as f64 / (a.dur_points - 1) as f64)
        })
        .collect();
    let map = chevron(&pair, &pulse, &fps, &durs).map_err(anyhow::Error::new)?;
    let mut rows = Vec::new();
    for (i, &fp) in map.f_p_hz.iter().enumerate() {
        for (j, &d) in map.duration_s.iter().enumerate() {
            rows.push(vec![fp, d, map.transfer[i][j]]);
        }
    }
    ctx.write_csv("chevron.csv", &["f_p_hz", "duration_s", "p_transfer"], &rows)?;
    ctx.write_json(
        "chevron.json",
        &serde_json::json!({
            "f_p_hz": map.f_p_hz,
            "duration_s": map.duration_s,
            "profile_hash": ctx.profile_hash,
            "seed": ctx.seed,
        }),
    )?;
    ctx.write_manifest(
        "chevron",
        serde_json::json!({
            "f_p_min_mhz": a.f_p_min_mhz, "f_p_max_mhz": a.f_p_max_mhz,
            "f_p_points": a.f_p_points, "dur_min_ns": a.dur_min_ns,
            "dur_max_ns": a.dur_max_ns, "dur_points": a.dur_points,
        }),
    )?;
    println!("chevron: {} x {} grid written", a.f_p_points, a.dur_points);
    Ok(())
}

fn cmd_ramsey(ctx: &mut Ctx, a: RamseyArgs) -> Result<()> {
    let pair = ctx.profile.to_pair().map_err(anyhow::Error::new)?;
    let f1 = pair.transmon.frequency_hz(pair.transmon.phi_dc);
    let f0 = ctx.profile.omega_f01_hz;
    let fs = FrameSet::new(f0, f1);
    let f_f = a.frame_freq_mhz * 1e6;
    let expected = (fs.difference_frequency_hz() - 2.0 * f_f).abs();
    let delays = ramsey_delays(expected.max(fs.difference_frequency_hz()), a.periods, a.points);
    let result = simulate_frame_ramsey(&fs, f_f, &delays, None).map_err(anyhow::Error::new)?;
    let rows: Vec<Vec<f64>> = result.points.iter().map(|&(d, p)| vec![d, p]).collect();
    ctx.write_csv("ramsey.csv", &["delay_s", "p1"], &rows)?;
    ctx.write_json(
        "ramsey.json",
        &serde_json::json!({
            "f_f_hz": result.f_f_hz,
            "fitted_frequency_hz": result.fitted_frequency_hz,
            "fit_stderr_hz": result.fit_stderr_hz,
        }),
    )?;
    ctx.write_manifest(
        "ramsey",
        serde_json::json!({"frame_freq_mhz": a.frame_freq_mhz, "points": a.points, "periods": a.periods}),
    )?;
    println!(
        "ramsey: frame {} MHz -> fitted {:.6} MHz (expected {:.6} MHz)",
        a.frame_freq_mhz,
        result.fitted_frequency_hz / 1e6,
        expected / 1e6
    );
    Ok(())
}

fn cmd_decompose(ctx: &mut Ctx, a: DecomposeArgs) -> Result<()> {
    let program: PulseProgram = match a.target {
        DecompTarget::Xy => decompose_xy(a.theta, a.beta),
        DecompTarget::Cphase => decompose_cphase(a.theta),
        DecompTarget::Ccphase => decompose_ccphase(a.theta),
    };
    let json = serde_json::to_string_pretty(&program)?;
    println!("{json}");
    let path = ctx.path("program.json");
    std::fs::write(&path, &json)?;
    let mut args = serde_json::json!({
        "theta": a.theta, "beta": a.beta, "check": a.check,
    });
    if a.check {
        let d = verify_program(&program).map_err(anyhow::Error::new)?;
        println!("reconstruction distance: {d:.3e}");
        args["reconstruction_distance"] = serde_json::json!(d);
    }
    ctx.write_manifest("decompose", args)?;
    Ok(())
}

fn cmd_verify(ctx: &mut Ctx, a: VerifyArgs) -> Result<()> {
    let text = std::fs::read_to_string(&a.program)
        .with_context(|| format!("unreadable program {}", a.program.display()))?;
    let program: PulseProgram =
        serde_json::from_str(&text).with_context(|| "malformed pulse program")?;
    let d = verify_program(&program).map_err(anyhow::Error::new)?;
    println!("{}", serde_json::json!({"distance": d}));
    ctx.write_manifest(
        "verify",
        serde_json::json!({"program": a.program.display().to_string(), "distance": d}),
    )?;
    if let Some(tol) = a.tol {
        if d > tol {
            bail!("distance {d:.3e} exceeds tolerance {tol:.3e}");
        }
    }
    Ok(())
}

fn cmd_calibrate(ctx: &mut Ctx, a: CalibrateArgs) -> Result<()> {
    let backend = match a.backend {
        CalibBackend::Ideal => PulseBackend::Ideal,
        CalibBackend::Pulsesim => {
            let pair = ctx.profile.to_pair().map_err(anyhow::Error::new)?;
            let template = ctx
                .profile
                .default_pulse(0.0, 70e-9)
                .map_err(anyhow::Error::new)?;
            let bound = bind_half_pulse(&pair, &template).map_err(anyhow::Error::new)?;
            PulseBackend::PulseSim { pair, bound }
        }
    };
    let mut scenario = match a.hidden_phi0 {
        Some(phi0) => CalibrationScenario::new(phi0, [a.hidden_rz0, a.hidden_rz1], backend),
        None => CalibrationScenario::random(ctx.seed, backend),
    };
    if let Some(shots) = a.shots {
        scenario = scenario.with_shots(shots, ctx.seed);
    }
    let grid: Vec<f64> = (0..a.phi0_points).map(|i| PI * i as f64 / a.phi0_points as f64).collect();
    let phi0_points: Vec<Vec<f64>> =
        phi0_scan_points(&scenario, &grid).iter().map(|&(x, y)| vec![x, y]).collect();
    let result = run_full_calibration(&scenario, a.phi0_points).map_err(anyhow::Error::new)?;
    let second_points: Vec<Vec<f64>> =
        second_pulse_scan_points(&scenario, result.phi0_estimate, 32)
            .iter()
            .map(|&(x, y)| vec![x, y])
            .collect();
    ctx.write_csv("phi0_scan.csv", &["phi_p", "zi_minus_iz"], &phi0_points)?;
    ctx.write_csv("second_pulse_scan.csv", &["phi2", "p01"], &second_points)?;
    ctx.write_json("calibration.json", &result)?;
    ctx.write_manifest(
        "calibrate-sim",
        serde_json::json!({
            "backend": match a.backend { CalibBackend::Ideal => "ideal", CalibBackend::Pulsesim => "pulsesim" },
            "shots": a.shots, "phi0_points": a.phi0_points,
        }),
    )?;
    println!(
        "calibration: phi0 = {:.6}, second pulse = {:.6}, final rz = ({:.6}, {:.6}), residual = {:.3e}",
        result.phi0_estimate,
        result.second_pulse_phase,
        result.final_rz_pair[0],
        result.final_rz_pair[1],
        result.residual
    );
    Ok(())
}

fn cmd_irb(ctx: &mut Ctx, a: IrbArgs) -> Result<()> {
    if a.t1_us.len() != 2 || a.t2_us.len() != 2 {
        bail!("--t1-us and --t2-us take two comma-separated values");
    }
    let mut model = NoiseModel::new(
        [a.t1_us[0] * 1e-6, a.t1_us[1] * 1e-6],
        [a.t2_us[0] * 1e-6, a.t2_us[1] * 1e-6],
    )
    .map_err(anyhow::Error::new)?;
    if a.depol_clifford > 0.0 {
        model = model
            .with_depolarizing_per_clifford(a.depol_clifford)
            .map_err(anyhow::Error::new)?;
    }
    let theta = match a.theta {
        Some(t) => ThetaChoice::Fixed(t),
        None => ThetaChoice::RandomPerCircuit,
    };
    let duration =
        if a.n_pulses == 1 { model.duration_iswap_s } else { model.duration_xy_half_s };
    let unit = InterleavedUnit::multi_pulse_iswap(a.n_pulses, theta, duration)
        .map_err(anyhow::Error::new)?
        .with_extra_depolarizing(a.depol_unit);
    let cfg = IrbConfig {
        lengths: a.lengths.clone(),
        randomizations: a.randomizations,
        shots: a.shots,
        entangler: Entangler::Iswap,
    };
    let streams = Streams::new(ctx.seed);
    let result = run_irb(&unit, &model, &cfg, &streams).map_err(anyhow::Error::new)?;
    let rows: Vec<Vec<f64>> = result
        .survivals
        .iter()
        .map(|s| {
            vec![
                if s.interleaved { 1.0 } else { 0.0 },
                s.length as f64,
                s.randomization as f64,
                s.survival,
            ]
        })
        .collect();
    ctx.write_csv("irb_survival.csv", &["interleaved", "length", "randomization", "survival"], &rows)?;
    ctx.write_json(
        "irb.json",
        &serde_json::json!({
            "reference": result.reference,
            "interleaved": result.interleaved,
            "r": result.r,
            "fidelity": result.fidelity,
            "n_pulses": result.n_pulses,
            "seed": result.seed,
            "lengths": result.lengths,
            "randomizations": result.randomizations,
            "shots": result.shots,
        }),
    )?;
    ctx.write_manifest(
        "irb",
        serde_json::json!({
            "n_pulses": a.n_pulses, "lengths": a.lengths,
            "randomizations": a.randomizations, "shots": a.shots,
            "t1_us": a.t1_us, "t2_us": a.t2_us,
            "depol_clifford": a.depol_clifford, "depol_unit": a.depol_unit,
        }),
    )?;
    println!(
        "irb: p = {:.6}, p_il = {:.6}, fidelity = {:.4}%",
        result.reference.rate,
        result.interleaved.rate,
        100.0 * result.fidelity
    );
    Ok(())
}

fn build_graph(choice: GraphChoice, random_weights: bool, seed: u64) -> WeightedGraph {
    let g = match choice {
        GraphChoice::Ring4 => WeightedGraph::ring4(),
        GraphChoice::Complete4 => WeightedGraph::complete4(),
    };
    if random_weights {
        g.with_random_weights(&Streams::new(seed))
    } else {
        g
    }
}

fn cmd_landscape(ctx: &mut Ctx, a: LandscapeArgs) -> Result<()> {
    let graph = build_graph(a.graph, a.random_weights, ctx.seed);
    let gammas: Vec<f64> = (0..a.gamma_points)
        .map(|i| a.gamma_min + (a.gamma_max - a.gamma_min) * i as f64 / (a.gamma_points - 1).max(1) as f64)
        .collect();
    let betas: Vec<f64> = (0..a.beta_points)
        .map(|i| a.beta_min + (a.beta_max - a.beta_min) * i as f64 / (a.beta_points - 1).max(1) as f64)
        .collect();
    let mode = match a.shots {
        None => LandscapeMode::Exact,
        Some(s) => LandscapeMode::Shots(s),
    };
    let streams = Streams::new(ctx.seed);
    let l: Landscape = landscape(&graph, &gammas, &betas, mode, &streams).map_err(anyhow::Error::new)?;
    let mut rows = Vec::new();
    for (i, &g) in l.gammas.iter().enumerate() {
        for (j, &b) in l.betas.iter().enumerate() {
            rows.push(vec![g, b, l.values[i][j]]);
        }
    }
    ctx.write_csv("landscape.csv", &["gamma", "beta_mix", "expected_cut"], &rows)?;

    // gate counts for the same graph, both gate sets, recorded as metadata
    let angles = QaoaAngles { gamma: gammas[0], beta_mix: betas[0] };
    let circuit = build_qaoa_circuit(&graph, angles, 1).map_err(anyhow::Error::new)?;
    let topo = DeviceTopology::line(4).map_err(anyhow::Error::new)?;
    let compiled = route(&circuit, &topo, a.gateset.into()).map_err(anyhow::Error::new)?;
    ctx.write_json(
        "landscape.json",
        &serde_json::json!({
            "graph": graph,
            "seed": ctx.seed,
            "gateset": match a.gateset { GateSetChoice::Cz => "cz", GateSetChoice::CzXy => "cz_xy" },
            "counts": compiled.counts,
            "shots": a.shots,
        }),
    )?;
    ctx.write_manifest(
        "qaoa-landscape",
        serde_json::json!({
            "graph": match a.graph { GraphChoice::Ring4 => "ring4", GraphChoice::Complete4 => "complete4" },
            "random_weights": a.random_weights,
            "gamma_points": a.gamma_points, "beta_points": a.beta_points,
            "shots": a.shots,
        }),
    )?;
    println!("landscape: {} x {} grid written", a.gamma_points, a.beta_points);
    Ok(())
}

fn cmd_counts(ctx: &mut Ctx, a: CountsArgs) -> Result<()> {
    let graph = build_graph(a.graph, false, ctx.seed);
    let angles = QaoaAngles { gamma: a.gamma, beta_mix: a.beta_mix };
    let circuit = build_qaoa_circuit(&graph, angles, 1).map_err(anyhow::Error::new)?;
    let topo = DeviceTopology::line(4).map_err(anyhow::Error::new)?;
    let compiled = route(&circuit, &topo, a.gateset.into()).map_err(anyhow::Error::new)?;
    let d = verify_compiled(&compiled, &graph, angles).map_err(anyhow::Error::new)?;
    let mut counts: Vec<(&String, &usize)> = compiled.counts.iter().collect();
    counts.sort();
    let obj: serde_json::Map<String, serde_json::Value> = counts
        .into_iter()
        .filter(|(_, &v)| v > 0)
        .map(|(k, &v)| (k.clone(), serde_json::json!(v)))
        .collect();
    println!("{}", serde_json::Value::Object(obj.clone()));
    ctx.write_json("counts.json", &serde_json::json!({"counts": obj, "verification_distance": d}))?;
    ctx.write_manifest(
        "counts",
        serde_json::json!({
            "graph": match a.graph { GraphChoice::Ring4 => "ring4", GraphChoice::Complete4 => "complete4" },
            "gateset": match a.gateset { GateSetChoice::Cz => "cz", GateSetChoice::CzXy => "cz_xy" },
        }),
    )?;
    Ok(())
}

// keep the reference transmon constructor linked for profile tooling
#[allow(dead_code)]
fn _reference_curve() -> TunableTransmon {
    TunableTransmon::from_flux_curve(4.759e9, 0.767e9).expect("reference curve")
}

#[allow(dead_code)]
fn _unused_consts() {
    let _ = TAU;
}
