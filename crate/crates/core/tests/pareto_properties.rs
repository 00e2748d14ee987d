use foragefront::irrigation::{DesignVector, NoiseVector, ObjectiveTriple, WeightVector};
use foragefront::pareto::{
    diversity_metric, frontier_diversity, frontier_metrics, nondominated_indices,
    rank_solutions, reference_sigma_lines, sigma_components, weight_grid, SigmaNorm,
    SigmaVector, SolutionPoint, DIVERSITY_GUARD,
};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn brute_nondominated(objs: &[Vec<f64>]) -> Vec<usize> {
    let mut keep = Vec::new();
    'outer: for i in 0..objs.len() {
        for j in 0..objs.len() {
            if i == j {
                continue;
            }
            let ge = (0..objs[i].len()).all(|k| objs[j][k] >= objs[i][k]);
            let gt = (0..objs[i].len()).any(|k| objs[j][k] > objs[i][k]);
            if ge && gt {
                continue 'outer;
            }
        }
        keep.push(i);
    }
    keep
}

fn point(w: WeightVector<f64>, f: [f64; 3], agg: f64) -> SolutionPoint<f64> {
    SolutionPoint {
        weights: w,
        design: DesignVector {
            x_a: 1.0,
            x_b: 480.0,
            x_c: 600.0,
            x_d: 0.1,
        },
        noise: NoiseVector {
            z_a: 298.0,
            z_b: 900.0,
        },
        objectives: ObjectiveTriple::new(f[0], f[1], f[2]),
        aggregate_f: agg,
        seed: 0,
    }
}

#[test]
fn filter_matches_brute_force_on_random_instances() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for _ in 0..100 {
        // Coarse integer coordinates force plenty of ties and duplicates.
        let objs: Vec<Vec<f64>> = (0..50)
            .map(|_| (0..3).map(|_| f64::from(rng.random_range(0..8u8))).collect())
            .collect();
        assert_eq!(nondominated_indices(&objs), brute_nondominated(&objs));
    }
}

#[test]
fn sigma_scale_invariance_fixed_factors() {
    for f in [[3.0f64, 4.0, 12.0], [20.6787, 17.1771, 148004.0], [0.0, 1.0, 2.0]] {
        let base = sigma_components(&f, SigmaNorm::Squared).unwrap();
        for c in [0.5, 2.0, 10.0] {
            let s = sigma_components(&f.map(|x| x * c), SigmaNorm::Squared).unwrap();
            for (a, b) in s.components.iter().zip(&base.components) {
                assert!((a - b).abs() < 1e-12);
            }
            assert!((s.magnitude - base.magnitude).abs() < 1e-12);
        }
    }
}

fn brute_diversity(sol: &[SigmaVector<f64>], refs: &[SigmaVector<f64>]) -> f64 {
    let mut total = 0.0;
    for s in sol {
        let mut best = f64::INFINITY;
        for r in refs {
            let mut d2 = 0.0;
            for k in 0..s.components.len() {
                d2 += (s.components[k] - r.components[k]).powi(2);
            }
            best = best.min(d2.sqrt());
        }
        total += best;
    }
    1.0 / (total / sol.len() as f64 + 1e-12)
}

#[test]
fn diversity_matches_exhaustive_oracle() {
    let refs = reference_sigma_lines::<f64>(3, 15, SigmaNorm::Squared).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for _ in 0..20 {
        let sols: Vec<SigmaVector<f64>> = (0..10)
            .map(|_| {
                let f: Vec<f64> = (0..3).map(|_| rng.random_range(0.01..1.0)).collect();
                sigma_components(&f, SigmaNorm::Squared).unwrap()
            })
            .collect();
        let got = diversity_metric(&sols, &refs);
        let want = brute_diversity(&sols, &refs);
        assert!(((got - want) / want).abs() < 1e-12, "{got} {want}");
    }
    assert_eq!(diversity_metric(&refs, &refs), 1.0 / DIVERSITY_GUARD);
}

#[test]
fn frontier_metrics_ignore_row_order() {
    let grid = weight_grid::<f64>(0.1, 0.1).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut pts: Vec<SolutionPoint<f64>> = grid
        .iter()
        .map(|&w| {
            let f = [
                rng.random_range(19.0..22.0),
                rng.random_range(16.0..19.0),
                rng.random_range(1.4e5..1.6e5),
            ];
            point(w, f, rng.random_range(1e4..1.2e5))
        })
        .collect();
    let a = frontier_metrics(&pts, None, SigmaNorm::Squared).unwrap();
    for _ in 0..5 {
        pts.shuffle(&mut rng);
        let b = frontier_metrics(&pts, None, SigmaNorm::Squared).unwrap();
        assert!((a.diversity - b.diversity).abs() <= 1e-12 * a.diversity);
        assert!((a.dominance_mean_f - b.dominance_mean_f).abs() <= 1e-9 * a.dominance_mean_f);
    }
}

#[test]
fn one_point_frontier_has_a_diversity() {
    let w = WeightVector::new(0.1, 0.1, 0.8).unwrap();
    let d = frontier_diversity(&[point(w, [1.0, 2.0, 3.0], 2.7)], SigmaNorm::Squared).unwrap();
    assert!(d.is_finite() && d > 0.0);
}

fn objective_set(max: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
    prop::collection::vec(prop::collection::vec(-5i8..5, 3), 1..max)
        .prop_map(|v| v.into_iter().map(|r| r.into_iter().map(f64::from).collect()).collect())
}

proptest! {
    #[test]
    fn filter_is_an_antichain_subset(objs in objective_set(200)) {
        let keep = nondominated_indices(&objs);
        prop_assert_eq!(&keep, &brute_nondominated(&objs));
        prop_assert!(!keep.is_empty());
        prop_assert!(keep.windows(2).all(|w| w[0] < w[1]));
        for &i in &keep {
            for &j in &keep {
                let dom = (0..3).all(|k| objs[i][k] >= objs[j][k])
                    && (0..3).any(|k| objs[i][k] > objs[j][k]);
                prop_assert!(!dom);
            }
        }
    }

    #[test]
    fn sigma_ignores_positive_scaling(
        f in prop::collection::vec(0.01f64..1e4, 2..6),
        c in 1e-3f64..1e3,
    ) {
        let a = sigma_components(&f, SigmaNorm::Squared).unwrap();
        let scaled: Vec<f64> = f.iter().map(|x| x * c).collect();
        let b = sigma_components(&scaled, SigmaNorm::Squared).unwrap();
        for (x, y) in a.components.iter().zip(&b.components) {
            prop_assert!((x - y).abs() < 1e-12);
        }
        prop_assert!((a.magnitude - b.magnitude).abs() < 1e-12);
    }

    #[test]
    fn ranking_invariants(fs in prop::collection::vec(-1e5f64..1e5, 1..36), seed in any::<u64>()) {
        let grid = weight_grid::<f64>(0.1, 0.1).unwrap();
        let pts: Vec<_> = fs.iter().zip(&grid).map(|(&f, &w)| point(w, [f, f, f], f)).collect();
        let r = rank_solutions(&pts).unwrap();
        let max = fs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let min = fs.iter().cloned().fold(f64::INFINITY, f64::min);
        prop_assert_eq!(r.best.aggregate_f, max);
        prop_assert_eq!(r.worst.aggregate_f, min);
        prop_assert!(r.worst.aggregate_f <= r.median.aggregate_f && r.median.aggregate_f <= r.best.aggregate_f);
        let mut shuffled = pts.clone();
        shuffled.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        prop_assert_eq!(rank_solutions(&shuffled).unwrap(), r);
    }
}
