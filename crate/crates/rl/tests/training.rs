use rovergym_core::{make, EnvOptions, EnvRegistry};
use rovergym_rl::curve::CSV_HEADER;
use rovergym_rl::{
    evaluate_checkpoint, evaluate_random, train, train_env, train_with, Algo, Checkpoint, LearningCurve, RlError,
    TrainConfig,
};

fn quick(algo: Algo, steps: u64, seed: u64) -> TrainConfig {
    let mut cfg = TrainConfig {
        algo,
        total_timesteps: steps,
        seed,
        curve_interval: 256,
        ..TrainConfig::default()
    };
    cfg.ppo.horizon = 256;
    cfg.ppo.minibatch = 64;
    cfg.ppo.epochs = 2;
    cfg.ppo.hidden = vec![16, 16];
    cfg.td3.hidden = vec![16, 16];
    cfg.td3.batch = 32;
    cfg.td3.learning_starts = 200;
    cfg
}

#[test]
fn zero_timesteps_gives_empty_curve_and_usable_checkpoint() {
    for algo in [Algo::Ppo, Algo::Td3] {
        let out = train_env("drive_to_target-v0", &EnvOptions::default(), &quick(algo, 0, 1)).unwrap();
        assert!(out.curve.is_empty());
        assert_eq!(out.steps, 0);
        assert_eq!(out.episodes, 0);
        assert_eq!(out.curve.to_csv().trim(), CSV_HEADER);
        let ck = &out.checkpoint;
        assert_eq!(ck.algo, algo);
        assert!(ck.params.iter().all(|p| p.is_finite()));
        assert_eq!(Checkpoint::from_json(&ck.to_json()).unwrap(), *ck);
        let eval = evaluate_checkpoint(ck, "drive_to_target-v0", &EnvOptions::default(), 2, 3).unwrap();
        assert_eq!(eval.episodes, 2);
    }
}

#[test]
fn fixed_seed_is_bit_identical() {
    for algo in [Algo::Ppo, Algo::Td3] {
        let cfg = quick(algo, 1500, 42);
        let a = train_env("drive_to_target-v0", &EnvOptions::default(), &cfg).unwrap();
        let b = train_env("drive_to_target-v0", &EnvOptions::default(), &cfg).unwrap();
        assert!(!a.curve.is_empty(), "{algo:?}");
        assert_eq!(a.curve.to_csv(), b.curve.to_csv());
        let bits = |c: &Checkpoint| c.params.iter().map(|p| p.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(&a.checkpoint), bits(&b.checkpoint));
        let c = train_env("drive_to_target-v0", &EnvOptions::default(), &quick(algo, 1500, 43)).unwrap();
        assert_ne!(bits(&a.checkpoint), bits(&c.checkpoint));
    }
}

#[test]
fn one_code_path_trains_every_registered_env() {
    let registry = EnvRegistry::with_defaults();
    let ids: Vec<_> = registry.ids().collect();
    assert!(ids.len() >= 3);
    for id in ids {
        for algo in [Algo::Ppo, Algo::Td3] {
            let mut env = registry.make(id, 0).unwrap();
            let out = train(env.as_mut(), &quick(algo, 300, 7)).unwrap_or_else(|e| panic!("{id} {algo:?}: {e}"));
            assert_eq!(out.steps, 300);
            assert_eq!(out.checkpoint.env_id, id);
            assert_eq!(out.checkpoint.observation_dim, env.observation_space().dim());
            assert_eq!(out.checkpoint.action_dim(), env.action_space().dim());
        }
    }
}

#[test]
fn curve_rows_follow_interval_and_round_trip() {
    let mut seen = Vec::new();
    let mut env = make("drive_to_target-v0", 0).unwrap();
    let out = train_with(env.as_mut(), &quick(Algo::Ppo, 2048, 3), &mut |row| seen.push(row)).unwrap();
    assert_eq!(out.curve.rows(), seen.as_slice());
    // 200-step episodes, so every row from the first one on is present
    let steps: Vec<u64> = out.curve.rows().iter().map(|r| r.step).collect();
    assert_eq!(steps, (1..=8).map(|k| k * 256).collect::<Vec<_>>());
    assert!(out.curve.rows().iter().all(|r| r.value.is_finite()));
    let parsed = LearningCurve::from_csv(&out.curve.to_csv()).unwrap();
    assert_eq!(parsed, out.curve);
    let mean = out.recent_returns.iter().sum::<f64>() / out.recent_returns.len() as f64;
    assert!((out.curve.last().unwrap().value - mean).abs() < 1e-12);
}

#[test]
fn invalid_config_is_rejected() {
    let mut cfg = quick(Algo::Ppo, 10, 0);
    cfg.gamma = 1.5;
    let err = train_env("drive_to_target-v0", &EnvOptions::default(), &cfg).unwrap_err();
    assert!(matches!(err, RlError::InvalidConfig(_)));
    let mut cfg = quick(Algo::Td3, 10, 0);
    cfg.curve_interval = 0;
    assert!(matches!(
        train_env("drive_to_target-v0", &EnvOptions::default(), &cfg),
        Err(RlError::InvalidConfig(_))
    ));
}

#[test]
fn unknown_env_propagates() {
    let err = train_env("nope-v0", &EnvOptions::default(), &quick(Algo::Ppo, 10, 0)).unwrap_err();
    assert!(matches!(err, RlError::Env(_)));
}

#[test]
fn evaluation_errors_and_determinism() {
    let opts = EnvOptions::default();
    assert!(matches!(
        evaluate_random("lsd_force_lidar-v0", &opts, 0, 0),
        Err(RlError::EmptyEvaluation)
    ));
    let out = train_env("drive_to_target-v0", &opts, &quick(Algo::Td3, 0, 0)).unwrap();
    assert!(matches!(
        evaluate_checkpoint(&out.checkpoint, "drive_to_target-v0", &opts, 0, 0),
        Err(RlError::EmptyEvaluation)
    ));
    assert!(matches!(
        evaluate_checkpoint(&out.checkpoint, "lsd_force_lidar-v0", &opts, 1, 0),
        Err(RlError::ShapeMismatch(_))
    ));
    let a = evaluate_checkpoint(&out.checkpoint, "drive_to_target-v0", &opts, 3, 11).unwrap();
    let b = evaluate_checkpoint(&out.checkpoint, "drive_to_target-v0", &opts, 3, 11).unwrap();
    assert_eq!(a, b);
    let r1 = evaluate_random("lsd_force_lidar-v0", &opts, 5, 2).unwrap();
    let r2 = evaluate_random("lsd_force_lidar-v0", &opts, 5, 2).unwrap();
    assert_eq!(r1, r2);
    assert_eq!(r1.terminations.values().sum::<usize>(), 5);
    assert!((r1.success_rate - r1.successes as f64 / 5.0).abs() < 1e-15);
}
