use gic_bounds::cli::sig12;
use gic_bounds::optimize::{grid_minimize, grid_then_refine, RefineOptions, SearchBox};
use gic_bounds::{inner, outer, sumcap};
use gic_bounds::{Channel, MixedCondition, RegimeLabel};
use proptest::prelude::*;

fn half_log2(x: f64) -> f64 {
    0.5 * x.log2()
}

fn power() -> impl Strategy<Value = f64> {
    (-2.0_f64..3.0).prop_map(|e| 10f64.powf(e))
}

fn weak_gain() -> impl Strategy<Value = f64> {
    0.001_f64..0.999
}

fn weak_channel() -> impl Strategy<Value = Channel> {
    (weak_gain(), weak_gain(), power(), power()).prop_map(|(a, b, p1, p2)| Channel::new(a, b, p1, p2).unwrap())
}

/// Channels in the noisy-interference regime, drawn through the power triangle.
fn noisy_channel() -> impl Strategy<Value = Channel> {
    (0.001_f64..0.24, 0.001_f64..0.24, 0.001_f64..1.0, 0.0_f64..1.0).prop_filter_map(
        "needs room in the triangle",
        |(a, b, s, t)| {
            let room = 1.0 - a.sqrt() - b.sqrt();
            if room <= 1e-3 {
                return None;
            }
            let p1 = s * t * room / (b * a.sqrt());
            let p2 = s * (1.0 - t) * room / (a * b.sqrt());
            let ch = Channel::new(a, b, p1.max(1e-3), p2.max(1e-3)).ok()?;
            ch.is_noisy_interference().then_some(ch)
        },
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn noisy_implies_small_gains(ch in weak_channel()) {
        if ch.is_noisy_interference() {
            prop_assert!(ch.a().sqrt() + ch.b().sqrt() <= 1.0);
        }
    }

    #[test]
    fn noisy_matches_power_triangle(a in 0.001_f64..0.25, b in 0.001_f64..0.25, p1 in power(), p2 in power()) {
        let ch = Channel::new(a, b, p1, p2).unwrap();
        let lhs = b * a.sqrt() * p1 + a * b.sqrt() * p2;
        let rhs = 1.0 - a.sqrt() - b.sqrt();
        // skip points too close to the boundary to decide in floating point
        prop_assume!((lhs - rhs).abs() > 1e-9);
        prop_assert_eq!(ch.is_noisy_interference(), lhs <= rhs);
    }

    #[test]
    fn very_strong_is_row_one(a in 1.0_f64..1e4, b in 1.0_f64..1e4, p1 in power(), p2 in power()) {
        let ch = Channel::new(a, b, p1, p2).unwrap();
        if ch.is_very_strong() {
            prop_assert_eq!(ch.classify().label, RegimeLabel::I);
        }
    }

    #[test]
    fn every_channel_gets_a_label(a in 0.0_f64..5.0, b in 0.0_f64..5.0, p1 in power(), p2 in power()) {
        let ch = Channel::new(a, b, p1, p2).unwrap();
        let r = ch.classify();
        prop_assert_eq!(r.noisy, ch.is_noisy_interference());
        if r.label == RegimeLabel::VI {
            prop_assert!(r.noisy);
        }
    }

    #[test]
    fn parametric_z_bound_identity(ch in weak_channel(), frac in 0.0_f64..=1.0) {
        let (alpha, v) = outer::kramer_parametric(&ch, frac * ch.p2()).unwrap();
        let (lo, hi) = outer::eta2_range(&ch);
        prop_assert!(alpha >= lo - 1e-12 && alpha <= hi + 1e-12);
        let c3 = outer::constraint3_bound(&ch, alpha).unwrap().value;
        prop_assert!((c3 - v).abs() <= 1e-10, "c3={} parametric={}", c3, v);
    }

    #[test]
    fn mixed_decodability_matches_condition(a in 1.001_f64..20.0, b in 0.001_f64..0.999, p1 in power(), p2 in power()) {
        let ch = Channel::new(a, b, p1, p2).unwrap();
        let holds = (1.0 - a * b) * p1 <= a - 1.0;
        prop_assert_eq!(ch.mixed_condition() == MixedCondition::User1Strong, holds);
        // user 2's rate against user 1's noise at receiver 1 versus its own receiver
        let decodable = p2 / (1.0 + b * p1) <= a * p2 / (1.0 + p1) * (1.0 + 1e-12);
        prop_assume!(((1.0 - a * b) * p1 - (a - 1.0)).abs() > 1e-9);
        prop_assert_eq!(decodable, holds);
        prop_assert_eq!(inner::mixed_achievable(&ch).is_ok(), holds);
    }

    #[test]
    fn mixed_converse_identity(a in 1.001_f64..20.0, b in 0.001_f64..0.999, p1 in power(), p2 in power()) {
        let ch = Channel::new(a, b, p1, p2).unwrap();
        prop_assume!(ch.mixed_condition() == MixedCondition::User1Strong);
        let cap = sumcap::mixed_sum_capacity(&ch).unwrap();
        let converse = half_log2(1.0 + p1) + half_log2(1.0 + b * p1 + p2) - half_log2(1.0 + b * p1);
        prop_assert!((cap - converse).abs() <= 1e-12 * cap.max(1.0));
        let sw = sumcap::mixed_sum_capacity(&Channel::new(b, a, p2, p1).unwrap()).unwrap();
        prop_assert!((cap - sw).abs() <= 1e-12 * cap.max(1.0));
    }

    #[test]
    fn row_two_four_duality(a in 0.01_f64..1.0, extra in 0.0_f64..10.0, p1 in power(), p2 in power()) {
        let b = 1.0 / a + extra;
        let ch = Channel::new(a, b, p1, p2).unwrap();
        let sw = Channel::new(b, a, p2, p1).unwrap();
        prop_assert_eq!(ch.classify().label, RegimeLabel::II);
        prop_assert_eq!(sw.classify().label, RegimeLabel::IV);
        let (x, y) = (sumcap::table1_sum_capacity(&ch), sumcap::table1_sum_capacity(&sw));
        prop_assert_eq!(x.status, y.status);
        prop_assert!((x.value - y.value).abs() <= 1e-12 * x.value.max(1.0));
    }

    #[test]
    fn closed_form_genie_attains_tin(ch in noisy_channel()) {
        let g = sumcap::closed_form_genie(&ch).unwrap();
        prop_assert!(outer::in_sigma_set(&ch, 1.0, &g));
        let v = outer::constraint1_objective(&ch, 1.0, &g).unwrap();
        let tin = sumcap::noisy_sum_capacity(&ch).unwrap();
        prop_assert!((v - tin).abs() <= 1e-9, "objective {} vs TIN {}", v, tin);
    }

    #[test]
    fn tin_points_are_dominated_by_etw(ch in weak_channel(), q1 in 0.0_f64..=1.0, q2 in 0.0_f64..=1.0) {
        let r = inner::tin_rates(&ch, q1 * ch.p1(), q2 * ch.p2()).unwrap();
        let etw = outer::etw_sum_bound(&ch).unwrap().value;
        prop_assert!(r.sum() <= etw + 1e-9);
    }

    #[test]
    fn sig12_relative_error(x in -1e12_f64..1e12) {
        let y = sig12(x);
        prop_assert!((x - y).abs() <= 5e-12 * x.abs());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn genie_bound_sandwich(ch in weak_channel()) {
        let c1 = outer::constraint1_bound(&ch, 1.0).unwrap().value;
        let etw = outer::etw_sum_bound(&ch).unwrap().value;
        prop_assert!(inner::best_inner_sum(&ch) <= c1 + 1e-6);
        prop_assert!(c1 <= etw + 1e-6);
    }

    #[test]
    fn weighted_genie_bound_is_valid(ch in weak_channel(), mu in 0.1_f64..10.0, q1 in 0.0_f64..=1.0, q2 in 0.0_f64..=1.0) {
        let c = outer::constraint1_bound(&ch, mu).unwrap().value;
        let r = inner::tin_rates(&ch, q1 * ch.p1(), q2 * ch.p2()).unwrap();
        prop_assert!(r.r1 + mu * r.r2 <= c + 1e-6);
    }

    #[test]
    fn refine_never_worse_than_its_grid(cx in -1.0_f64..2.0, cy in -1.0_f64..2.0, s in 0.1_f64..10.0) {
        let f = move |x: &[f64]| s * (x[0] - cx).powi(2) + (x[1] - cy).powi(2) + (x[0] * x[1]).sin();
        let bx = SearchBox::new(vec![0.0, 0.0], vec![1.0, 1.0]).unwrap();
        let coarse = grid_minimize(f, &bx, 17).unwrap();
        let refined = grid_then_refine(f, &bx, RefineOptions::default()).unwrap();
        prop_assert!(refined.value <= coarse.value);
        prop_assert!(bx.contains(&refined.point));
    }
}
