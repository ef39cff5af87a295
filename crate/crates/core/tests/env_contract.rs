use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rovergym_core::env::TERMINATION_KEY;
use rovergym_core::{make, Action, Env, EnvError, EnvRegistry, RenderFrame, StepResult};

fn ids() -> Vec<&'static str> {
    EnvRegistry::with_defaults().ids().collect()
}

/// Uniform actions over a box twice the size of the action space.
fn wide_action(env: &dyn Env, rng: &mut ChaCha8Rng) -> Action {
    let space = env.action_space();
    Action(
        space
            .low()
            .iter()
            .zip(space.high())
            .map(|(lo, hi)| {
                let mid = 0.5 * (lo + hi);
                let half = hi - lo;
                rng.random_range(mid - half..=mid + half)
            })
            .collect(),
    )
}

fn rollout(id: &str, seed: u64, steps: usize) -> Vec<StepResult> {
    let mut env = make(id, seed).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    env.reset();
    let mut out = Vec::with_capacity(steps);
    while out.len() < steps {
        let a = wide_action(env.as_ref(), &mut rng);
        let r = env.step(&a).unwrap();
        let done = r.done;
        out.push(r);
        if done {
            env.reset();
        }
    }
    out
}

fn bits(results: &[StepResult]) -> Vec<(Vec<u64>, u64, bool)> {
    results
        .iter()
        .map(|r| {
            (
                r.observation.iter().map(|v| v.to_bits()).collect(),
                r.reward.to_bits(),
                r.done,
            )
        })
        .collect()
}

#[test]
fn thousand_step_trajectories_are_bit_identical() {
    for id in ids() {
        let a = rollout(id, 7, 1000);
        let b = rollout(id, 7, 1000);
        assert_eq!(bits(&a), bits(&b), "{id}");
        assert_eq!(a, b);
    }
}

#[test]
fn lifecycle_state_machine() {
    for id in ids() {
        let mut env = make(id, 1).unwrap();
        let zero = Action(vec![0.0; env.action_space().dim()]);
        assert!(matches!(env.step(&zero), Err(EnvError::NotReset)), "{id}");
        assert!(matches!(env.get_observation(), Err(EnvError::NotReset)));
        assert!(matches!(env.render(), Err(EnvError::NotReset)));

        env.reset();
        let mut last = env.step(&zero).unwrap();
        while !last.done {
            last = env.step(&zero).unwrap();
        }
        assert!(matches!(env.step(&zero), Err(EnvError::SteppedAfterDone)));
        // observation and frame remain readable once finished
        assert_eq!(env.get_observation().unwrap(), last.observation);
        assert!(env.render().unwrap().done);

        let fresh = env.reset();
        assert!(env.observation_space().contains(&fresh));
        assert!(env.step(&zero).is_ok());
    }
}

#[test]
fn done_always_carries_a_termination_cause() {
    for id in ids() {
        for r in rollout(id, 3, 3000) {
            assert!(r.reward.is_finite());
            match r.info.get(TERMINATION_KEY) {
                Some(t) => {
                    assert!(r.done);
                    assert!(["success", "flipped", "timeout"].contains(&t.as_str()));
                }
                None => assert!(!r.done),
            }
        }
    }
}

#[test]
fn non_finite_and_misshapen_actions_rejected() {
    for id in ids() {
        let mut env = make(id, 1).unwrap();
        env.reset();
        let dim = env.action_space().dim();
        for bad in [f64::NAN, f64::INFINITY, f64::NEG_INFINITY] {
            let mut a = vec![0.0; dim];
            a[dim - 1] = bad;
            assert!(matches!(env.step(&Action(a)), Err(EnvError::NonFiniteAction { .. })));
        }
        assert!(matches!(
            env.step(&Action(vec![0.0; dim + 1])),
            Err(EnvError::ActionDim { .. })
        ));
        // rejected actions do not advance the episode
        assert_eq!(env.episode_log().len(), 0);
    }
}

#[test]
fn get_observation_is_pure_and_consistent() {
    for id in ids() {
        let mut env = make(id, 5).unwrap();
        let obs = env.reset();
        assert_eq!(env.get_observation().unwrap(), obs);
        assert_eq!(env.get_observation().unwrap(), env.get_observation().unwrap());
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..50 {
            let r = env.step(&wide_action(env.as_ref(), &mut rng)).unwrap();
            let a = env.get_observation().unwrap();
            let b = env.get_observation().unwrap();
            assert_eq!(a, b);
            assert_eq!(a, r.observation);
            if r.done {
                break;
            }
        }
    }
}

#[test]
fn reset_is_reproducible_per_seed() {
    for id in ids() {
        let mut a = make(id, 11).unwrap();
        let mut b = make(id, 11).unwrap();
        for _ in 0..5 {
            assert_eq!(a.reset(), b.reset(), "{id}");
        }
    }
}

#[test]
fn render_frames_round_trip() {
    for id in ids() {
        let mut env = make(id, 2).unwrap();
        env.reset();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..20 {
            env.step(&wide_action(env.as_ref(), &mut rng)).unwrap();
        }
        let frame = env.render().unwrap();
        assert_eq!(frame.tick, 20);
        let back = RenderFrame::from_json(&frame.to_json()).unwrap();
        assert_eq!(back, frame);
    }
}

#[test]
fn zero_action_on_flat_ground_is_a_fixed_point() {
    for id in ids() {
        let mut env = make(id, 4).unwrap();
        env.reset();
        let before = env.render().unwrap().pose;
        let r = env.step(&Action(vec![0.0; env.action_space().dim()])).unwrap();
        assert_eq!(env.render().unwrap().pose, before, "{id}");
        // the drive task charges a per-tick time penalty
        if id != "drive_to_target-v0" {
            assert_eq!(r.reward, 0.0, "{id}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn actions_clipped_and_observations_bounded(
        env_index in 0usize..3,
        seed in any::<u64>(),
        raw in prop::collection::vec(prop::collection::vec(-100.0..100.0f64, 773), 1..60),
    ) {
        let id = ids()[env_index];
        let mut env = make(id, seed).unwrap();
        let first = env.reset();
        prop_assert!(env.observation_space().contains(&first));
        let dim = env.action_space().dim();
        for row in raw {
            let r = env.step(&Action(row[..dim].to_vec())).unwrap();
            prop_assert!(env.observation_space().contains(&r.observation));
            let logged = &env.episode_log().records.last().unwrap().action;
            prop_assert!(env.action_space().contains(logged));
            if r.done {
                break;
            }
        }
    }
}
