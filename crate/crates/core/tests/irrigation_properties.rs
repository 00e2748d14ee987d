use foragefront::irrigation::{
    aggregate, eval_objectives, feasible, DesignVector, NoiseVector, ObjectiveTriple,
    ProblemSpec, VariableMode, WeightVector,
};
use proptest::prelude::*;

/// (weights, f1, f2, f3, F) read from the three ranking tables.
const TABLE_ROWS: [([f64; 3], [f64; 3], f64); 9] = [
    ([0.1, 0.1, 0.8], [20.6787, 17.1771, 148004.0], 118407.0),
    ([0.3, 0.4, 0.3], [20.6666, 17.1173, 147917.0], 44388.1),
    ([0.6, 0.3, 0.1], [20.6466, 17.0407, 147774.0], 14794.9),
    ([0.1, 0.1, 0.8], [20.9103, 17.7455, 149696.0], 119761.0),
    ([0.1, 0.6, 0.3], [20.9103, 17.7506, 149696.0], 44921.7),
    ([0.1, 0.8, 0.1], [20.8872, 17.6432, 149531.0], 14969.3),
    ([0.1, 0.1, 0.8], [21.034, 18.0657, 150600.0], 120484.0),
    ([0.2, 0.5, 0.3], [21.0524, 18.1411, 150731.0], 45232.6),
    ([0.5, 0.4, 0.1], [21.0335, 18.0577, 150596.0], 15077.3),
];

#[test]
fn ranking_table_rows_aggregate() {
    for (w, f, big_f) in TABLE_ROWS {
        let w = WeightVector::new(w[0], w[1], w[2]).unwrap();
        let o = ObjectiveTriple::new(f[0], f[1], f[2]);
        let got = aggregate(&o, &w);
        assert!((got - big_f).abs() <= 0.5, "{w:?}: {got} vs {big_f}");
    }
}

#[test]
fn printed_weight_typo_fails_the_identity() {
    let o = ObjectiveTriple::new(20.9103, 17.7506, 149696.0);
    let raw: f64 = 0.1 * o.f1 + 9.6 * o.f2 + 0.3 * o.f3;
    assert!((raw - 44921.7).abs() > 0.5);
}

#[test]
fn reported_variations() {
    assert!((20.1267f64 - 19.7596 - 0.3671).abs() < 1e-9);
    assert_eq!(144113 - 141434, 2679);
    let eff: f64 = 17.9509 - 16.7487;
    assert!((eff - 1.2022).abs() < 1e-9);
    assert!((eff - 1.022).abs() > 0.1);
}

fn objectives() -> impl Strategy<Value = ObjectiveTriple<f64>> {
    (-1e6f64..1e6, -1e3f64..1e3, -1e9f64..1e9).prop_map(|(a, b, c)| ObjectiveTriple::new(a, b, c))
}

fn weights() -> impl Strategy<Value = WeightVector<f64>> {
    (0u32..=100, 0u32..=100).prop_map(|(a, b)| {
        let a = f64::from(a.min(100)) / 100.0;
        let b = f64::from(b) / 100.0 * (1.0 - a);
        WeightVector::new(a, b, (1.0 - a - b).max(0.0)).unwrap()
    })
}

fn design_point() -> impl Strategy<Value = (DesignVector<f64>, NoiseVector<f64>)> {
    (0.3f64..=3.0, 450f64..=520.0, 520f64..=800.0, 0.01f64..=0.2, 293f64..=303.0, 800f64..=1000.0)
        .prop_map(|(x_a, x_b, x_c, x_d, z_a, z_b)| {
            (DesignVector { x_a, x_b, x_c, x_d }, NoiseVector { z_a, z_b })
        })
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * a.abs().max(b.abs()).max(1.0)
}

proptest! {
    #[test]
    fn aggregate_is_linear(o1 in objectives(), o2 in objectives(), w in weights()) {
        let lhs = aggregate(&o1, &w) + aggregate(&o2, &w);
        let rhs = aggregate(&(o1 + o2), &w);
        prop_assert!(close(lhs, rhs), "{lhs} {rhs}");
    }

    #[test]
    fn common_scaling_keeps_the_argmax(
        cands in prop::collection::vec(objectives(), 100),
        w in weights(),
        c in 1e-3f64..1e3,
    ) {
        let scores: Vec<f64> = cands.iter().map(|o| aggregate(o, &w)).collect();
        let scaled: Vec<f64> = cands.iter().map(|&o| aggregate(&(o * c), &w)).collect();
        for (s, t) in scores.iter().zip(&scaled) {
            prop_assert!(close(s * c, *t));
        }
        let argmax = |v: &[f64]| {
            v.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).unwrap().0
        };
        let (i, j) = (argmax(&scores), argmax(&scaled));
        prop_assert!(i == j || close(scores[i], scores[j]));
    }

    #[test]
    fn evaluation_is_pure((d, z) in design_point(), raw in any::<bool>()) {
        let spec = ProblemSpec {
            mode: if raw { VariableMode::Raw } else { VariableMode::Coded },
            ..ProblemSpec::default()
        };
        prop_assert!(feasible(&d, &z, &spec));
        let a = eval_objectives(&d, &z, &spec).unwrap();
        let b = eval_objectives(&d, &z, &spec).unwrap();
        prop_assert_eq!(a.to_array().map(f64::to_bits), b.to_array().map(f64::to_bits));
        prop_assert!(a.is_finite());
    }

    #[test]
    fn f32_matches_f64_in_coded_mode((d, z) in design_point()) {
        let o64 = eval_objectives(&d, &z, &ProblemSpec::default()).unwrap();
        let d32 = DesignVector { x_a: d.x_a as f32, x_b: d.x_b as f32, x_c: d.x_c as f32, x_d: d.x_d as f32 };
        let z32 = NoiseVector { z_a: z.z_a as f32, z_b: z.z_b as f32 };
        let o32 = eval_objectives(&d32, &z32, &ProblemSpec::<f32>::default()).unwrap();
        prop_assert!((f64::from(o32.f2) - o64.f2).abs() < 1e-3);
        prop_assert!(((f64::from(o32.f3) - o64.f3) / o64.f3.abs().max(1.0)).abs() < 1e-3);
    }
}
