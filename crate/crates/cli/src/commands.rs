use std::path::{Path, PathBuf};
use std::time::Instant;

use gks_rom::io::{decode_basis, decode_snapshots, decode_trajectory, encode_basis, encode_snapshots, encode_trajectory};
use gks_rom::metrics::{power_spectrum, prediction_time, reference_trajectory, relative_error_series, rom_prediction_time};
use gks_rom::rom::{compute_pod_basis, cumulative_ratios, integrate_rom_partial, PodBasis, ReducedModel, RomMode};
use gks_rom::snapshots::trajectory_seed;
use gks_rom::{run_campaign, Clock, Execution, GksParams, Grid, Trajectory, TrainingPlan};
use nalgebra::DMatrix;

use crate::config::{ExperimentConfig, PlanConfig, RomVariantMode};
use crate::error::CliError;
use crate::output::{num, write_bytes, Csv, RunManifest};
use crate::RunMode;

pub struct Context {
    pub config: ExperimentConfig,
    pub out_dir: PathBuf,
    pub execution: Execution,
}

impl Context {
    fn path(&self, name: &str) -> PathBuf {
        self.out_dir.join(name)
    }

    fn manifest(&self, command: &str) -> RunManifest {
        RunManifest::new(command, self.config.hash(), self.config.to_toml())
    }

    fn csv(&self, command: &str, columns: &[&str]) -> Csv {
        Csv::new(&self.config.hash(), command, columns)
    }

    /// Writes the effective config next to the manifest so the run can be
    /// repeated with `--config <dir>/<command>.config.toml`.
    fn finish(&self, manifest: &RunManifest) -> Result<(), CliError> {
        let command = &manifest.command;
        write_bytes(&self.path(&format!("{command}.config.toml")), manifest.config.as_bytes())?;
        manifest.write(&self.path(&format!("{command}.manifest.json")))
    }
}

fn read(path: &Path) -> Result<Vec<u8>, CliError> {
    std::fs::read(path).map_err(|e| CliError::Io(format!("reading {}: {e}", path.display())))
}

fn load_trajectory(path: &Path) -> Result<Trajectory, CliError> {
    decode_trajectory(&read(path)?).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn plan_seeds(plan: &TrainingPlan) -> Vec<u64> {
    let per_gamma = plan.strategy.trajectories_per_gamma();
    (0..plan.strategy.gammas().len())
        .flat_map(|k| (0..per_gamma).map(move |w| trajectory_seed(plan.base_seed, k, w)))
        .collect()
}

/// Seeds of test initial conditions; the parameter index is offset past
/// anything a training plan uses so the streams never overlap.
fn study_seed(base_seed: u64, ic_modes: usize, i: usize) -> u64 {
    trajectory_seed(base_seed, (1 << 20) + ic_modes, i)
}

fn seconds(start: Instant) -> f64 {
    start.elapsed().as_secs_f64()
}

pub fn simulate(ctx: &Context, output: Option<PathBuf>) -> Result<(), CliError> {
    let params = ctx.config.params()?;
    let clock = ctx.config.clock()?;
    let ic = ctx.config.initial_condition()?;
    let mut manifest = ctx.manifest("simulate");
    manifest.seeds.extend(ic.seed);

    let start = Instant::now();
    let traj = gks_rom::simulate(&params, &ic, &clock)?;
    manifest.timings_seconds.insert("simulate".into(), seconds(start));

    let path = output.unwrap_or_else(|| ctx.path("trajectory.gkst"));
    write_bytes(&path, &encode_trajectory(&traj)?)?;
    manifest.output(&path)?;
    manifest.result("snapshots", traj.len());
    manifest.result("gamma", params.gamma);
    ctx.finish(&manifest)?;
    println!("wrote {} snapshots to {}", traj.len(), path.display());
    Ok(())
}

pub fn campaign(ctx: &Context) -> Result<(), CliError> {
    let plan = ctx.config.plan.training_plan(&ctx.config.solver, "plan")?;
    let grid = ctx.config.grid()?;
    let mut manifest = ctx.manifest("campaign");
    manifest.seeds = plan_seeds(&plan);

    let start = Instant::now();
    let (u, f) = run_campaign(&plan, grid, ctx.execution)?;
    manifest.timings_seconds.insert("campaign".into(), seconds(start));

    let phi = ctx.path("phi.gkss");
    let psi = ctx.path("psi.gkss");
    write_bytes(&phi, &encode_snapshots(&u)?)?;
    write_bytes(&psi, &encode_snapshots(&f)?)?;
    manifest.output(&phi)?;
    manifest.output(&psi)?;
    manifest.result("columns", u.num_cols());
    manifest.result("trajectories", plan.num_trajectories());
    ctx.finish(&manifest)?;
    println!(
        "wrote {} columns from {} trajectories to {} and {}",
        u.num_cols(),
        plan.num_trajectories(),
        phi.display(),
        psi.display()
    );
    Ok(())
}

pub fn build_rom(ctx: &Context, snapshots: PathBuf, forcing: Option<PathBuf>) -> Result<(), CliError> {
    let mut manifest = ctx.manifest("build-rom");
    let u = decode_snapshots(&read(&snapshots)?)?;
    manifest.input(&snapshots)?;
    let f = match (&forcing, ctx.config.rom.deim) {
        (Some(path), true) => {
            manifest.input(path)?;
            Some(decode_snapshots(&read(path)?)?)
        }
        (None, true) => {
            return Err(CliError::Validation(
                "rom.deim: DEIM needs --forcing snapshots (or pass --no-deim)".into(),
            ))
        }
        (_, false) => None,
    };

    let start = Instant::now();
    let model = ReducedModel::build(&u, f.as_ref(), ctx.config.rank_rule(), ctx.config.deim_size(), ctx.execution)?;
    manifest.timings_seconds.insert("build".into(), seconds(start));

    let basis_path = ctx.path("basis.gksb");
    write_bytes(&basis_path, &encode_basis(&model)?)?;
    manifest.output(&basis_path)?;

    let sigma = &model.basis.singular_values;
    let ratios = cumulative_ratios(sigma)?;
    let mut csv = ctx.csv("build-rom", &["i", "sigma_i", "C_i"]);
    for (i, (s, c)) in sigma.iter().zip(&ratios).enumerate() {
        csv.row([(i + 1).to_string(), num(*s), num(*c)]);
    }
    let rank_path = ctx.path("rank.csv");
    csv.write(&rank_path)?;
    manifest.output(&rank_path)?;

    let n = model.deim.as_ref().map_or(0, |d| d.size());
    manifest.result("rank", model.rank());
    manifest.result("rule_satisfied", model.basis.rule_satisfied);
    manifest.result("deim_size", n);
    ctx.finish(&manifest)?;
    if !model.basis.rule_satisfied {
        eprintln!("warning: threshold not reached; kept the whole spectrum");
    }
    println!("rank r = {} (threshold {}), DEIM n = {n}", model.rank(), ctx.config.rom.threshold);
    Ok(())
}

pub fn rank_sweep(ctx: &Context, lengths: &[f64]) -> Result<(), CliError> {
    let base = &ctx.config.equation;
    let mut manifest = ctx.manifest("build-rom");
    let mut csv = ctx.csv("build-rom", &["L", "M", "r"]);
    for &length in lengths {
        let m = (base.points as f64 * length / base.length).round() as usize;
        let grid = Grid::new(m, length).map_err(|e| CliError::Validation(format!("--sweep-lengths: {e}")))?;
        let plan = ctx.config.plan.training_plan(&ctx.config.solver, "plan")?;
        let start = Instant::now();
        let (u, _) = run_campaign(&plan, grid, ctx.execution)?;
        let basis = compute_pod_basis(&u.data, ctx.config.rank_rule(), ctx.execution)?;
        manifest.timings_seconds.insert(format!("L={length}"), seconds(start));
        csv.row([num(length), m.to_string(), basis.rank().to_string()]);
        println!("L = {length}: M = {m}, r = {}", basis.rank());
    }
    manifest.seeds = plan_seeds(&ctx.config.plan.training_plan(&ctx.config.solver, "plan")?);
    let path = ctx.path("rank_sweep.csv");
    csv.write(&path)?;
    manifest.output(&path)?;
    ctx.finish(&manifest)
}

pub fn run_rom(ctx: &Context, basis: Option<PathBuf>, mode: RunMode, output: Option<PathBuf>) -> Result<(), CliError> {
    let params = ctx.config.params()?;
    let clock = ctx.config.clock()?;
    let ic = ctx.config.initial_condition()?;
    let mut manifest = ctx.manifest("run-rom");
    manifest.seeds.extend(ic.seed);

    let model = match (mode, basis) {
        (RunMode::FullRank, _) => {
            let m = params.grid.num_points();
            ReducedModel { basis: PodBasis::from_orthonormal(DMatrix::identity(m, m))?, deim: None }
        }
        (_, Some(path)) => {
            manifest.input(&path)?;
            decode_basis(&read(&path)?)?
        }
        (_, None) => return Err(CliError::Validation("--basis is required unless --mode full-rank".into())),
    };
    let rom_mode = if mode == RunMode::Deim { RomMode::Deim } else { RomMode::Galerkin };
    let system = model.assemble(&params, rom_mode)?;

    let start = Instant::now();
    let (mut rom, failure) = integrate_rom_partial(&system, &model.basis, &ic.evaluate(&params.grid), &clock)?;
    manifest.timings_seconds.insert("integrate".into(), seconds(start));
    rom.lifted.ic = Some(ic);

    let path = output.unwrap_or_else(|| ctx.path("rom_trajectory.gkst"));
    write_bytes(&path, &encode_trajectory(&rom.lifted)?)?;
    manifest.output(&path)?;
    let mode_name = match mode {
        RunMode::Galerkin => "galerkin",
        RunMode::Deim => "deim",
        RunMode::FullRank => "full-rank",
    };
    manifest.result("mode", mode_name);
    manifest.result("rank", model.rank());
    manifest.result("snapshots", rom.lifted.len());
    if let Some(time) = failure {
        manifest.result("failure_time", time);
    }
    ctx.finish(&manifest)?;
    match failure {
        Some(time) => Err(CliError::Numerical(format!(
            "reduced model diverged at t = {time}; {} completed snapshots written to {}",
            rom.lifted.len(),
            path.display()
        ))),
        None => {
            println!("wrote {} {mode_name} snapshots (r = {}) to {}", rom.lifted.len(), model.rank(), path.display());
            Ok(())
        }
    }
}

pub fn compare(ctx: &Context, rom_path: &Path, fom_path: &Path, output: Option<PathBuf>) -> Result<(), CliError> {
    let mut manifest = ctx.manifest("compare");
    let rom = load_trajectory(rom_path)?;
    let mut fom = load_trajectory(fom_path)?;
    manifest.input(rom_path)?;
    manifest.input(fom_path)?;
    // a diverged reduced run stops early; compare its completed prefix
    let truncated = rom.len() < fom.len() && rom.record_every == fom.record_every;
    if truncated {
        fom.data.truncate(rom.data.len());
    }
    let series = relative_error_series(&rom, &fom)?;
    let mut pt = prediction_time(&series, ctx.config.metrics.tolerance)?;
    pt.survived &= !truncated;

    let mut csv = ctx.csv("compare", &["t", "rel_l2"]);
    for (t, e) in series.times.iter().zip(&series.rel_l2) {
        csv.row([num(*t), num(*e)]);
    }
    let path = output.unwrap_or_else(|| ctx.path("error.csv"));
    csv.write(&path)?;
    manifest.output(&path)?;
    manifest.result("prediction_time", pt.time);
    manifest.result("survived", pt.survived);
    manifest.result("tolerance", ctx.config.metrics.tolerance);
    ctx.finish(&manifest)?;
    println!("prediction time {} (survived: {})", pt.time, pt.survived);
    Ok(())
}

pub fn spectra(ctx: &Context, trajectory: &Path, window: Option<(f64, f64)>, output: Option<PathBuf>) -> Result<(), CliError> {
    let mut manifest = ctx.manifest("spectra");
    let traj = load_trajectory(trajectory)?;
    manifest.input(trajectory)?;
    let window = window.unwrap_or((0.0, traj.len() as f64 * traj.record_every));
    let spectrum = power_spectrum(&traj, window)?;

    let mut csv = ctx.csv("spectra", &["k", "E_k"]);
    for (k, e) in spectrum.wavenumbers.iter().zip(&spectrum.energy) {
        csv.row([k.to_string(), num(*e)]);
    }
    let path = output.unwrap_or_else(|| ctx.path("spectrum.csv"));
    csv.write(&path)?;
    manifest.output(&path)?;
    manifest.result("window", vec![window.0, window.1]);
    manifest.result("samples", spectrum.samples);
    ctx.finish(&manifest)?;
    println!("averaged {} snapshots over [{}, {}]", spectrum.samples, window.0, window.1);
    Ok(())
}

fn build_model(ctx: &Context, plan: &PlanConfig, path: &str) -> Result<(ReducedModel, Vec<u64>), CliError> {
    let plan = plan.training_plan(&ctx.config.solver, path)?;
    let (u, f) = run_campaign(&plan, ctx.config.grid()?, ctx.execution)?;
    let deim_size = ctx.config.deim_size();
    let model = ReducedModel::build(&u, Some(&f), ctx.config.rank_rule(), deim_size, ctx.execution)?;
    Ok((model, plan_seeds(&plan)))
}

pub fn predtime_study(ctx: &Context) -> Result<(), CliError> {
    let metrics = &ctx.config.metrics;
    let mut manifest = ctx.manifest("predtime-study");
    let grid = ctx.config.grid()?;
    let clock = Clock::new(metrics.horizon, ctx.config.solver.dt, ctx.config.solver.record_every)
        .map_err(|e| CliError::Validation(format!("metrics.horizon: {e}")))?;

    let mut models = Vec::with_capacity(metrics.roms.len());
    for (i, spec) in metrics.roms.iter().enumerate() {
        let start = Instant::now();
        let model = match (&spec.basis, &spec.plan) {
            (Some(path), _) => {
                manifest.input(path)?;
                decode_basis(&read(path)?)?
            }
            (None, Some(plan)) => {
                let (model, seeds) = build_model(ctx, plan, &format!("metrics.roms[{i}].plan"))?;
                manifest.seeds.extend(seeds);
                model
            }
            (None, None) => unreachable!("validated"),
        };
        manifest.timings_seconds.insert(format!("build {}", spec.id), seconds(start));
        manifest.result(&format!("rank {}", spec.id), model.rank());
        eprintln!("{}: r = {}", spec.id, model.rank());
        models.push(model);
    }

    let mut summary = ctx.csv("predtime-study", &["rom_id", "gamma", "J", "averaged_T_rom"]);
    let mut detail = ctx.csv("predtime-study", &["rom_id", "gamma", "J", "seed", "T_rom", "survived"]);
    let start = Instant::now();
    for &gamma in &metrics.gammas {
        let params = GksParams::new(gamma, grid)?;
        for &modes in &metrics.ic_modes {
            let seeds: Vec<u64> = (0..metrics.num_ics).map(|i| study_seed(ctx.config.plan.base_seed, modes, i)).collect();
            manifest.seeds.extend(&seeds);
            let references = ctx
                .execution
                .try_map(seeds.clone(), |seed| reference_trajectory(&params, modes, seed, &clock))?;
            for (spec, model) in metrics.roms.iter().zip(&models) {
                let mode = match spec.mode {
                    RomVariantMode::Galerkin => RomMode::Galerkin,
                    RomVariantMode::Deim => RomMode::Deim,
                };
                let outcomes = ctx.execution.try_map(references.iter().collect(), |fom| {
                    rom_prediction_time(model, mode, fom, clock.dt, metrics.tolerance)
                })?;
                let mean = outcomes.iter().map(|p| p.time).sum::<f64>() / outcomes.len() as f64;
                for (seed, p) in seeds.iter().zip(&outcomes) {
                    detail.row([spec.id.clone(), num(gamma), modes.to_string(), seed.to_string(), num(p.time), p.survived.to_string()]);
                }
                summary.row([spec.id.clone(), num(gamma), modes.to_string(), num(mean)]);
                println!("{} gamma={gamma} J={modes}: mean T_rom = {mean:.2}", spec.id);
            }
        }
    }
    manifest.timings_seconds.insert("evaluate".into(), seconds(start));

    let summary_path = ctx.path("predtime.csv");
    let detail_path = ctx.path("predtime_detail.csv");
    summary.write(&summary_path)?;
    detail.write(&detail_path)?;
    manifest.output(&summary_path)?;
    manifest.output(&detail_path)?;
    ctx.finish(&manifest)
}
