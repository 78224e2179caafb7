use gks_rom::io::{decode_basis, encode_basis};
use gks_rom::metrics::rom_prediction_time;
use gks_rom::rom::{integrate_rom, DeimOperator, DeimSize, RankRule, ReducedModel, RomMode};
use gks_rom::snapshots::trajectory_seed;
use gks_rom::{
    run_campaign, sample_initial_condition, simulate, Clock, Execution, GksParams, Grid, Strategy, TrainingPlan,
};
use nalgebra::DMatrix;

fn grid() -> Grid {
    Grid::new(48, 22.0).unwrap()
}

fn small_model(threshold: f64, seed: u64) -> ReducedModel {
    let plan = TrainingPlan::new(Strategy::SingleTrajectory { gamma: 0.0 })
        .with_total_snapshots(300)
        .with_seed(seed);
    let (u, f) = run_campaign(&plan, grid(), Execution::Sequential).unwrap();
    ReducedModel::build(&u, Some(&f), RankRule::CumulativeSigma { threshold }, DeimSize::MatchRank, Execution::Sequential)
        .unwrap()
}

fn max_rel_gap(a: &[f64], b: &[f64], m: usize) -> f64 {
    a.chunks(m)
        .zip(b.chunks(m))
        .map(|(x, y)| {
            let d: f64 = x.iter().zip(y).map(|(p, q)| (p - q).powi(2)).sum();
            let n: f64 = y.iter().map(|q| q * q).sum();
            (d / n).sqrt()
        })
        .fold(0.0, f64::max)
}

#[test]
fn complete_deim_basis_reduces_to_galerkin() {
    let mut model = small_model(1e-2, 1);
    let m = grid().num_points();
    // n = M interpolation reproduces f exactly, hence the Galerkin term
    model.deim = Some(DeimOperator::new(DMatrix::identity(m, m)).unwrap());
    let params = GksParams::new(0.3, grid()).unwrap();
    let clock = Clock::new(10.0, 1e-3, 0.5).unwrap();
    let u0 = sample_initial_condition(8, 77).unwrap().evaluate(&grid());
    let galerkin = integrate_rom(&model.assemble(&params, RomMode::Galerkin).unwrap(), &model.basis, &u0, &clock).unwrap();
    let deim = integrate_rom(&model.assemble(&params, RomMode::Deim).unwrap(), &model.basis, &u0, &clock).unwrap();
    assert!(max_rel_gap(&deim.lifted.data, &galerkin.lifted.data, m) <= 1e-10);
}

#[test]
fn model_reproduces_its_own_training_trajectory() {
    let model = small_model(1e-5, 4);
    let ic = sample_initial_condition(8, trajectory_seed(4, 0, 0)).unwrap();
    let params = GksParams::new(0.0, grid()).unwrap();
    let horizon = 40.0;
    let fom = simulate(&params, &ic, &Clock::with_defaults(horizon).unwrap()).unwrap();
    let pt = rom_prediction_time(&model, RomMode::Galerkin, &fom, 1e-3, 0.1).unwrap();
    assert_eq!(pt.time, horizon);
    assert!(pt.survived);
}

#[test]
fn stored_model_integrates_identically() {
    let model = small_model(1e-2, 2);
    let restored = decode_basis(&encode_basis(&model).unwrap()).unwrap();
    assert_eq!(restored.deim.as_ref().unwrap().indices(), model.deim.as_ref().unwrap().indices());
    let params = GksParams::new(0.5, grid()).unwrap();
    let clock = Clock::new(5.0, 1e-3, 0.5).unwrap();
    let u0 = sample_initial_condition(8, 5).unwrap().evaluate(&grid());
    for mode in [RomMode::Galerkin, RomMode::Deim] {
        let a = integrate_rom(&model.assemble(&params, mode).unwrap(), &model.basis, &u0, &clock).unwrap();
        let b = integrate_rom(&restored.assemble(&params, mode).unwrap(), &restored.basis, &u0, &clock).unwrap();
        assert_eq!(a.lifted.data, b.lifted.data);
    }
}

#[test]
fn spectral_deim_size_follows_the_forcing_spectrum() {
    let plan = TrainingPlan::new(Strategy::SingleTrajectory { gamma: 0.0 })
        .with_total_snapshots(300)
        .with_seed(4);
    let (u, f) = run_campaign(&plan, grid(), Execution::Sequential).unwrap();
    let rule = RankRule::CumulativeSigma { threshold: 1e-2 };
    let model = ReducedModel::build(&u, Some(&f), rule, DeimSize::Threshold, Execution::Sequential).unwrap();
    let spectrum = gks_rom::rom::compute_svd_spectrum(&f.data, Execution::Sequential).unwrap();
    let expected = gks_rom::rom::select_rank(&spectrum.singular_values, rule).unwrap().rank;
    assert_eq!(model.deim.as_ref().unwrap().size(), expected);
    // the quadratic term carries more spectral content than the state
    assert!(expected > model.rank());
}
