use foragefront::climate::{annual_extrema, parse_climate_csv, Factor};
use foragefront::fuzzy::{
    alpha_plane_cut, build_type2_model, fit_scurve, fou_bounds, scurve_grade, scurve_invert,
    type_reduce, FootprintOfUncertainty, ScurveShape, DEFAULT_FOU_GRID, DEFAULT_PLANES,
};
use foragefront::scalar::Interval;
use proptest::prelude::*;

const FIXTURE: &str = include_str!("../data/climate_santa_rosa_2014.csv");

fn models() -> Vec<foragefront::Type2FuzzyVariable> {
    let t = parse_climate_csv::<f64>(FIXTURE).unwrap();
    Factor::ALL
        .iter()
        .map(|&f| build_type2_model(&t, f, ScurveShape::default()).unwrap())
        .collect()
}

#[test]
fn annual_extrema_match_fixture() {
    let t = parse_climate_csv::<f64>(FIXTURE).unwrap();
    assert_eq!(annual_extrema(&t, Factor::Temperature), Interval::new(265.2, 309.1));
    assert_eq!(annual_extrema(&t, Factor::Insolation), Interval::new(14.0, 336.0));
}

#[test]
fn fou_contains_every_monthly_curve() {
    for model in models() {
        let fou = FootprintOfUncertainty::sample(&model, DEFAULT_FOU_GRID);
        assert_eq!(fou.grid.len(), DEFAULT_FOU_GRID);
        for (k, &x) in fou.grid.iter().enumerate() {
            assert!(fou.lower[k] <= fou.upper[k]);
            for month in 1..=12 {
                let g = scurve_grade(x, model.primary(month).unwrap()).value();
                assert!(fou.lower[k] <= g && g <= fou.upper[k]);
            }
            let (lo, hi) = fou_bounds(&model, x);
            assert_eq!((lo.value(), hi.value()), (fou.lower[k], fou.upper[k]));
        }
    }
}

#[test]
fn alpha_planes_nest() {
    for model in models() {
        let planes = type_reduce(&model, DEFAULT_PLANES).unwrap();
        assert_eq!(planes.len(), 11);
        for pair in planes.windows(2) {
            assert!(pair[0].level < pair[1].level);
            assert!(pair[0].interval.contains_interval(&pair[1].interval));
        }
        assert_eq!(planes[0].interval, model.annual_domain());
    }
}

fn curve() -> impl Strategy<Value = (f64, f64)> {
    (-1e3f64..1e3, 1e-2f64..1e3).prop_map(|(lo, w)| (lo, lo + w))
}

proptest! {
    #[test]
    fn grade_is_nonincreasing_and_bounded((lo, hi) in curve(), a in 0f64..1.0, b in 0f64..1.0) {
        let p = fit_scurve(lo, hi, ScurveShape::default()).unwrap();
        let span = hi - lo;
        let (x1, x2) = (lo - 0.2 * span + a * 1.4 * span, lo - 0.2 * span + b * 1.4 * span);
        let (g1, g2) = (scurve_grade(x1, &p).value(), scurve_grade(x2, &p).value());
        prop_assert!((0.0..=1.0).contains(&g1) && (0.0..=1.0).contains(&g2));
        if x1 <= x2 {
            prop_assert!(g1 >= g2);
        } else {
            prop_assert!(g2 >= g1);
        }
    }

    #[test]
    fn inverse_round_trips((lo, hi) in curve(), t in 0f64..1.0) {
        let p = fit_scurve(lo, hi, ScurveShape::default()).unwrap();
        let (smooth_lo, smooth_hi) = p.smooth_range();
        let g = smooth_lo + (smooth_hi - smooth_lo) * (0.001 + 0.998 * t);
        let x = scurve_invert(g, &p).unwrap();
        let back = scurve_grade(x, &p).value();
        prop_assert!(((back - g) / g).abs() <= 1e-9, "g={g} back={back}");
    }

    #[test]
    fn alpha_cuts_nest_for_any_levels(a in 0f64..=1.0, b in 0f64..=1.0) {
        for model in models() {
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            let outer = alpha_plane_cut(&model, lo).unwrap().interval;
            let inner = alpha_plane_cut(&model, hi).unwrap().interval;
            prop_assert!(outer.contains_interval(&inner));
        }
    }

    #[test]
    fn f32_models_track_f64(x in 265.0f32..310.0) {
        let t32 = parse_climate_csv::<f32>(FIXTURE).unwrap();
        let m32 = build_type2_model(&t32, Factor::Temperature, ScurveShape::default()).unwrap();
        let m64 = &models()[0];
        let g32 = scurve_grade(x, m32.annual_secondary()).value();
        let g64 = scurve_grade(f64::from(x), m64.annual_secondary()).value();
        prop_assert!((f64::from(g32) - g64).abs() < 1e-4);
    }
}
