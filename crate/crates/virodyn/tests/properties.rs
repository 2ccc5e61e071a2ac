//! Cross-module invariants: orthant preservation, the virus-free subsystem,
//! Lyapunov robustness, and artifact determinism.

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use virodyn::test_support::random_params;
use virodyn::{
    coexistence_roots, integrate, lle, rhs, CoexistenceRoots, IntegratorConfig, LleConfig, Params,
    State,
};

fn params_from_seed(seed: u64) -> Params {
    random_params(&mut ChaCha8Rng::seed_from_u64(seed))
}

proptest! {
    // On every face of the orthant the flow points inward or along the face.
    #[test]
    fn flow_never_leaves_a_face(
        seed in any::<u64>(),
        comps in prop::array::uniform7(0.0_f64..1.5),
        face in 0usize..7,
    ) {
        let p = params_from_seed(seed);
        let mut a = comps;
        a[face] = 0.0;
        let d = rhs(&p, &State::from_array(a));
        prop_assert!(d[face] >= 0.0, "face {face} flows outward: {}", d[face]);
    }

    // Real coexistence roots actually solve the quadratic and come ordered.
    #[test]
    fn coexistence_roots_solve_the_quadratic(seed in any::<u64>()) {
        let p = params_from_seed(seed);
        let dc = virodyn::derived_constants(&p);
        let residual = |x: f64| dc.phi2 * x * x + dc.phi1 * x + dc.phi0;
        let scale = dc.phi2.abs().max(dc.phi1.abs()).max(dc.phi0.abs()).max(1.0);
        match coexistence_roots(&p).unwrap() {
            CoexistenceRoots::Pair { plus, minus } => {
                prop_assert!(plus > minus);
                prop_assert!(residual(plus).abs() < 1e-9 * scale);
                prop_assert!(residual(minus).abs() < 1e-9 * scale);
            }
            CoexistenceRoots::Single(r) | CoexistenceRoots::Double(r) => {
                prop_assert!(residual(r).abs() < 1e-6 * scale);
            }
            CoexistenceRoots::None => {
                prop_assert!(virodyn::coexistence_discriminant(&p) < 0.0);
            }
        }
    }

    // The key=value serialization is lossless.
    #[test]
    fn parameter_file_round_trip(seed in any::<u64>()) {
        let p = params_from_seed(seed);
        let q = Params::from_key_values(&p.to_key_values()).unwrap();
        prop_assert_eq!(p, q);
    }
}

#[test]
fn trajectories_stay_in_the_orthant_for_long_horizons() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let cfg = IntegratorConfig {
        t_end: 1000.0,
        ..Default::default()
    };
    for _ in 0..3 {
        let p = random_params(&mut rng);
        let s0 = State::new(1.0, 0.8, 0.0, 0.0, 0.0, 0.4, 0.6);
        let traj = integrate(&p, &s0, &cfg).unwrap();
        let worst = traj
            .states
            .iter()
            .map(State::min_component)
            .fold(f64::INFINITY, f64::min);
        assert!(worst >= -1e-9, "orthant violated by {worst:e} at {p:?}");
    }
}

/// With no virions and no infected cells, the infection components stay
/// exactly zero and the cell pair follows the planar competition system.
#[test]
fn virus_free_dynamics_reduce_to_two_species_competition() {
    let p = Params::baseline(0.9, 1.7);
    let s0 = State::new(0.3, 0.4, 0.0, 0.0, 0.0, 0.0, 0.0);
    let cfg = IntegratorConfig {
        t_end: 50.0,
        sample_dt: 0.5,
        ..Default::default()
    };
    let traj = integrate(&p, &s0, &cfg).unwrap();
    for s in &traj.states {
        assert_eq!(s.ys1, 0.0);
        assert_eq!(s.y1, 0.0);
        assert_eq!(s.y2, 0.0);
        assert_eq!(s.zs, 0.0);
        assert_eq!(s.z, 0.0);
    }

    // independent fixed-step RK4 on the planar system as the oracle
    let f = |x: [f64; 2]| {
        [
            x[0] * (1.0 - x[0] - x[1]),
            x[1] * (p.beta1 - p.beta2 * (x[0] + x[1])),
        ]
    };
    let mut x = [0.3, 0.4];
    let h = 1e-3;
    let steps = (50.0 / h) as usize;
    for _ in 0..steps {
        let k1 = f(x);
        let k2 = f([x[0] + 0.5 * h * k1[0], x[1] + 0.5 * h * k1[1]]);
        let k3 = f([x[0] + 0.5 * h * k2[0], x[1] + 0.5 * h * k2[1]]);
        let k4 = f([x[0] + h * k3[0], x[1] + h * k3[1]]);
        x[0] += h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]);
        x[1] += h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]);
    }
    let end = traj.final_state();
    assert!((end.x1 - x[0]).abs() < 1e-7, "{} vs {}", end.x1, x[0]);
    assert!((end.x2 - x[1]).abs() < 1e-7, "{} vs {}", end.x2, x[1]);
}

fn reference_ic() -> State {
    State::new(1.0, 0.75, 0.0, 0.0, 0.0, 0.5, 0.5)
}

/// Doubling the renormalization interval moves the exponent by < 5e-3 in
/// all three reference regimes.
#[test]
fn lle_renormalization_invariance() {
    for (alpha, alpha_s) in [(0.5, 2.0), (0.5, 0.7), (0.2, 0.2)] {
        let p = Params::baseline(alpha, alpha_s);
        let base = LleConfig::default();
        let doubled = LleConfig {
            renorm_interval: 2.0,
            ..base
        };
        let a = lle(&p, &reference_ic(), &base).unwrap().lle;
        let b = lle(&p, &reference_ic(), &doubled).unwrap().lle;
        assert!(
            (a - b).abs() < 5e-3,
            "renorm sensitivity at ({alpha}, {alpha_s}): {a} vs {b}"
        );
    }
}

/// Two random initial tangent directions align onto the leading direction.
#[test]
fn lle_initial_tangent_invariance() {
    let p = Params::baseline(0.5, 2.0);
    let a = lle(
        &p,
        &reference_ic(),
        &LleConfig {
            tangent_seed: 1,
            ..Default::default()
        },
    )
    .unwrap()
    .lle;
    let b = lle(
        &p,
        &reference_ic(),
        &LleConfig {
            tangent_seed: 2,
            ..Default::default()
        },
    )
    .unwrap()
    .lle;
    assert!((a - b).abs() < 2e-3, "tangent sensitivity: {a} vs {b}");
}

/// The exponent predicts the observed finite-separation time to a factor
/// of three: `t* = ln(0.1 / ‖δ0‖) / λ`.
#[test]
fn lle_predicts_the_divergence_horizon() {
    let p = Params::baseline(0.5, 2.0);
    let exponent = lle(&p, &reference_ic(), &LleConfig::default()).unwrap().lle;
    assert!(exponent > 0.0);

    let cfg = IntegratorConfig {
        t_end: 4000.0,
        sample_dt: 1.0,
        ..Default::default()
    };
    let a = integrate(&p, &reference_ic(), &cfg).unwrap();
    let b = integrate(
        &p,
        &State::new(1.0, 0.75, 0.0, 0.0, 0.0, 0.5001, 0.5001),
        &cfg,
    )
    .unwrap();
    let observed = a
        .times
        .iter()
        .enumerate()
        .find(|(i, _)| a.states[*i].distance(&b.states[*i]) > 0.1)
        .map(|(_, t)| *t)
        .expect("trajectories must separate");

    let delta0 = 1e-4_f64 * 2.0_f64.sqrt();
    let predicted = (0.1_f64 / delta0).ln() / exponent;
    let ratio = (predicted / observed).max(observed / predicted);
    assert!(
        ratio < 3.0,
        "predicted {predicted:.0} vs observed {observed:.0} (ratio {ratio:.2})"
    );
}

/// Identical map inputs produce byte-identical CSV regardless of the
/// worker count.
#[test]
fn map_artifacts_are_deterministic_across_worker_counts() {
    let p = Params::baseline(1.0, 1.0);
    let grid = virodyn::Grid2D {
        alpha: virodyn::AxisGrid {
            from: 0.1,
            to: 0.4,
            count: 3,
        },
        alpha_s: virodyn::AxisGrid {
            from: 0.1,
            to: 0.4,
            count: 3,
        },
    };
    let cfg = virodyn::BasinConfig {
        n: 2,
        integrator: IntegratorConfig {
            t_end: 600.0,
            ..Default::default()
        },
        lle: LleConfig {
            transient: 200.0,
            accumulation: 1000.0,
            ..Default::default()
        },
    };
    let run = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap();
        pool.install(|| {
            let map = virodyn::stability_map(&p, &grid, &cfg).unwrap();
            virodyn::csv::stability_map_csv(&p, &map).to_string()
        })
    };
    let single = run(1);
    let parallel = run(4);
    assert_eq!(single, parallel);
    assert!(single.contains("v1"));
}
