use foragefront::bfa::{
    cell_to_cell_signal, chemotaxis_move, run_bfa, run_bfa_observed, step_sizes,
    tumble_direction, Bacterium, BfaConfig, BfaRng, BoundaryRule, RunObserver, Sphere, Swarm,
};
use foragefront::scalar::Interval;
use proptest::prelude::*;
use rand::SeedableRng;

struct SizeLog {
    sizes: Vec<usize>,
}

impl RunObserver<f64> for SizeLog {
    fn after_chemotaxis(&mut self, s: &Swarm<f64>) {
        self.sizes.push(s.len());
    }
    fn after_reproduction(&mut self, s: &Swarm<f64>) {
        self.sizes.push(s.len());
    }
    fn after_dispersal(&mut self, s: &Swarm<f64>) {
        self.sizes.push(s.len());
    }
}

fn quick(seed: u64) -> BfaConfig {
    BfaConfig {
        n_total: 4,
        n_chemotactic: 2,
        seed,
        ..BfaConfig::default()
    }
}

#[test]
fn population_survives_hundred_cycles() {
    let f = Sphere::new(4, 5.0);
    let cfg = quick(3);
    assert_eq!(cfg.n_total * cfg.n_elimination * cfg.n_reproduction, 100);
    let mut log = SizeLog { sizes: Vec::new() };
    run_bfa_observed(&f, &cfg, &mut log).unwrap();
    assert_eq!(log.sizes.len(), 100 * 2 + 20);
    assert!(log.sizes.iter().all(|&n| n == 26));
}

#[test]
fn trace_is_monotone_and_ends_at_best() {
    let f = Sphere::new(4, 5.0);
    let out = run_bfa(&f, &quick(9)).unwrap();
    let pts = &out.trace.points;
    assert!(pts.windows(2).all(|w| w[0].best_fitness <= w[1].best_fitness));
    assert!(pts.windows(2).all(|w| w[0].evaluations <= w[1].evaluations));
    assert_eq!(pts.last().unwrap().best_fitness, out.best_fitness);
    assert_eq!(out.trace.evaluations, pts.last().unwrap().evaluations);
}

#[test]
fn same_seed_same_trace() {
    let f = Sphere::new(4, 5.0);
    let a = run_bfa(&f, &quick(21)).unwrap();
    let b = run_bfa(&f, &quick(21)).unwrap();
    assert_eq!(a.trace.to_csv(), b.trace.to_csv());
    assert_eq!(a.best_position, b.best_position);
    let c = run_bfa(&f, &quick(22)).unwrap();
    assert_ne!(a.trace.to_csv(), c.trace.to_csv());
}

#[test]
fn self_signal_vanishes_with_default_constants() {
    let cfg = BfaConfig::default();
    let swarm = Swarm {
        bacteria: vec![Bacterium {
            position: vec![1.0, -2.0, 0.5],
            last_fitness: 0.0,
            health: 0.0,
        }],
    };
    let s: f64 = cell_to_cell_signal(&[1.0, -2.0, 0.5], &swarm, &cfg);
    assert!(s.abs() < 1e-15, "{s}");
}

#[test]
fn two_bacteria_signal() {
    let cfg = BfaConfig::default();
    let b = |p: Vec<f64>| Bacterium {
        position: p,
        last_fitness: 0.0,
        health: 0.0,
    };
    let swarm = Swarm {
        bacteria: vec![b(vec![0.0, 0.0]), b(vec![1.0, 0.0])],
    };
    let s = cell_to_cell_signal(&[0.0, 0.0], &swarm, &cfg)
        + cell_to_cell_signal(&[1.0, 0.0], &swarm, &cfg);
    assert!((s - (-0.163_737_070_629_643_88)).abs() < 1e-15, "{s}");
}

proptest! {
    #[test]
    fn tumbles_have_unit_length(seed in any::<u64>(), dim in 1usize..12) {
        let mut rng = BfaRng::seed_from_u64(seed);
        let d: Vec<f64> = tumble_direction(dim, &mut rng);
        let norm = d.iter().map(|x| x * x).sum::<f64>().sqrt();
        prop_assert!((norm - 1.0).abs() < 1e-12);
    }

    #[test]
    fn interior_moves_have_exact_step_length(seed in any::<u64>(), frac in 1e-4f64..0.05) {
        let bounds = vec![Interval::new(-5.0, 5.0); 4];
        let steps = step_sizes(&bounds, frac);
        let mut rng = BfaRng::seed_from_u64(seed);
        let dir: Vec<f64> = tumble_direction(4, &mut rng);
        let start = vec![0.0; 4];
        let moved = chemotaxis_move(&start, &dir, &steps, &bounds, BoundaryRule::Clamp);
        for k in 0..4 {
            prop_assert!((moved[k] - steps[k] * dir[k]).abs() < 1e-15);
        }
        let len = moved.iter().map(|x| x * x).sum::<f64>().sqrt();
        prop_assert!((len - 10.0 * frac).abs() < 1e-12);
    }

    #[test]
    fn moves_stay_in_bounds(seed in any::<u64>(), x in -5f64..5.0, reflect in any::<bool>()) {
        let bounds = vec![Interval::new(-5.0, 5.0); 3];
        let steps = step_sizes(&bounds, 0.9);
        let mut rng = BfaRng::seed_from_u64(seed);
        let dir: Vec<f64> = tumble_direction(3, &mut rng);
        let rule = if reflect { BoundaryRule::Reflect } else { BoundaryRule::Clamp };
        let moved = chemotaxis_move(&[x, -x, x / 2.0], &dir, &steps, &bounds, rule);
        prop_assert!(moved.iter().all(|v| (-5.0..=5.0).contains(v)));
    }
}
