use chrono::{Days, NaiveDate};
use funding_core::backtest::{efficiency, ewma_forecasts, paired_t_test};
use funding_core::curves::{parse_history_csv, write_history_csv};
use funding_core::measures::{constant_provider, ewma_gradient_series, ewma_provider, q_provider, refine_gradient};
use funding_core::optimize::{cost_profile, evpi_roll_on, select_optimum};
use funding_core::synthetic::random_history;
use funding_core::*;
use proptest::prelude::*;

const M: f64 = 1.0 / 12.0;

fn d0() -> NaiveDate {
    NaiveDate::from_ymd_opt(2002, 1, 7).unwrap()
}

fn arb_setup() -> impl Strategy<Value = FundingSetup> {
    (0.25f64..2.0, 2.0f64..30.0, 0.05f64..=1.0).prop_map(|(h, k, phi)| FundingSetup::new(h, h / k, phi).unwrap())
}

fn arb_alpha(s: FundingSetup) -> impl Strategy<Value = (FundingSetup, f64)> {
    (s.buffer * 1.0001..s.horizon * 1.5).prop_map(move |a| (s, a))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn schedule_covers_the_horizon_with_buffer_overlaps((s, alpha) in arb_setup().prop_flat_map(arb_alpha)) {
        let sched = build_schedule(&s, alpha).unwrap();
        prop_assert_eq!(sched.events.len(), sched.n_rolls as usize + 1);
        let last = sched.events.last().unwrap();
        prop_assert!((last.maturity() - s.horizon).abs() < 1e-9);
        for w in sched.events.windows(2) {
            // each roll starts when the live funding has exactly Δ left
            prop_assert!((w[0].maturity() - w[1].start - s.buffer).abs() < 1e-9);
            prop_assert_eq!(w[1].sale_tenor, Some(s.buffer));
        }
        prop_assert!(sched.events.iter().all(|e| e.purchase_tenor > 0.0 && e.purchase_tenor <= alpha));
    }

    #[test]
    fn roll_count_is_non_increasing_in_alpha(h_n in 1.5f64..40.0, a in 1.001f64..40.0, b in 1.001f64..40.0) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        prop_assert!(n_rolls(h_n, lo).unwrap() >= n_rolls(h_n, hi).unwrap());
        prop_assert!(gross_excess(h_n, lo).unwrap() >= gross_excess(h_n, hi).unwrap());
    }

    #[test]
    fn flat_curve_without_spread_costs_the_rate((s, alpha) in arb_setup().prop_flat_map(arb_alpha), r in -0.02f64..0.15) {
        let s = s.with_bid_ask(1.0).unwrap();
        let lin = LinearCurve::new(r, 0.0).unwrap();
        prop_assert!((cav(&q_provider(&lin), &s, alpha).unwrap().cav - r).abs() < 1e-12);
        prop_assert!((cav(&constant_provider(&lin), &s, alpha).unwrap().cav - r).abs() < 1e-12);
    }

    #[test]
    fn q_without_spread_costs_the_horizon_yield(
        (s, alpha) in arb_setup().prop_flat_map(arb_alpha),
        a in -0.02f64..0.12,
        b in -0.1f64..0.1,
    ) {
        let s = s.with_bid_ask(1.0).unwrap();
        let lin = LinearCurve::new(a, b).unwrap();
        let c = cav(&q_provider(&lin), &s, alpha).unwrap().cav;
        prop_assert!((c - (a + b * s.horizon)).abs() < 1e-12);
    }

    #[test]
    fn forward_closed_form_matches_q_provider(
        (s, alpha) in arb_setup().prop_flat_map(arb_alpha),
        a in -0.02f64..0.12,
        b in -0.1f64..0.1,
    ) {
        let lin = LinearCurve::new(a, b).unwrap();
        let closed = cav_linear(&lin, &s, alpha, LinearShape::Forward).unwrap().cav;
        let generic = cav(&q_provider(&lin), &s, alpha).unwrap().cav;
        prop_assert!((closed - generic).abs() < 1e-10);
    }

    #[test]
    fn cost_is_non_increasing_in_recovery(
        (s, alpha) in arb_setup().prop_flat_map(arb_alpha),
        a in 0.0f64..0.12,
        b in 0.0f64..0.1,
        phi2 in 0.05f64..=1.0,
    ) {
        // positive rates: recovering more of the sold buffer never costs more
        let lin = LinearCurve::new(a, b).unwrap();
        let (lo, hi) = if s.bid_ask <= phi2 { (s.bid_ask, phi2) } else { (phi2, s.bid_ask) };
        let c_lo = cav(&constant_provider(&lin), &s.with_bid_ask(lo).unwrap(), alpha).unwrap().cav;
        let c_hi = cav(&constant_provider(&lin), &s.with_bid_ask(hi).unwrap(), alpha).unwrap().cav;
        prop_assert!(c_hi <= c_lo + 1e-15);
    }

    #[test]
    fn optimum_is_the_largest_minimizer(a in -0.01f64..0.1, b in -0.1f64..0.1, phi in 0.05f64..=1.0, step in 1u32..30) {
        let s = FundingSetup::new(1.0, M, phi).unwrap();
        let grid = alpha_grid(&s, step).unwrap();
        let lin = LinearCurve::new(a, b).unwrap();
        let profile = cost_profile(&constant_provider(&lin), &s, &grid, Exec::Sequential).unwrap();
        let best = select_optimum(&profile).unwrap();
        let min = profile.iter().map(|c| c.cav).fold(f64::INFINITY, f64::min);
        prop_assert!(best.cost <= min + 1e-12);
        prop_assert!(best.tie_set.contains(&best.alpha_star));
        prop_assert!(profile.iter().filter(|c| c.alpha > best.alpha_star).all(|c| c.cav > min + 1e-12));
    }

    #[test]
    fn refinement_shrinks_and_keeps_sign(
        g in -0.01f64..0.01,
        theta in 0.0f64..0.005,
        omega in 0.0f64..=1.0,
        short in -0.01f64..0.1,
    ) {
        let p = PredictorParams::new(0.25, theta, omega).unwrap();
        let f = refine_gradient(g, &p, short, 365.0);
        prop_assert!(f.gradient_effective.abs() <= omega * g.abs() + 1e-18);
        prop_assert!(f.gradient_effective * g >= 0.0);
        if g.abs() < theta {
            prop_assert_eq!(f.gradient_effective, 0.0);
        }
        if f.gradient_effective < 0.0 {
            // projected short rate never goes below zero at the horizon
            prop_assert!(short + 365.0 * f.gradient_effective >= -1e-15);
        }
    }

    #[test]
    fn ewma_of_a_constant_drift_is_that_drift(step in 1u64..15, per_day in -1e-4f64..1e-4, lambda in 0.0f64..2.0, n in 2usize..60) {
        let rates: Vec<(NaiveDate, f64)> = (0..n)
            .map(|k| (d0() + Days::new(step * k as u64), 0.03 + per_day * (step * k as u64) as f64))
            .collect();
        let series = ewma_gradient_series(&rates, lambda);
        prop_assert!(series[0].is_none());
        for g in series.iter().skip(1) {
            prop_assert!((g.unwrap() - per_day).abs() < 1e-15);
        }
    }

    #[test]
    fn ewma_shift_moves_cost_with_the_drift(g in 1e-6f64..1e-4, a in 0.01f64..0.08, b in -0.02f64..0.03) {
        // an upward drift raises every funding cost that contains a roll
        let s = FundingSetup::standard();
        let lin = LinearCurve::new(a, b).unwrap();
        let none = ShiftForecast::none(a);
        let up = ShiftForecast { gradient_raw: g, gradient_effective: g, short_rate_now: a };
        let alpha = 3.0 * M;
        let c0 = cav(&ewma_provider(&lin, none), &s, alpha).unwrap().cav;
        let c1 = cav(&ewma_provider(&lin, up), &s, alpha).unwrap().cav;
        let c_const = cav(&constant_provider(&lin), &s, alpha).unwrap().cav;
        prop_assert!(c1 > c0);
        prop_assert_eq!(c0, c_const);
    }

    #[test]
    fn t_statistic_sign_and_range(xs in prop::collection::vec(-5.0f64..5.0, 2..40)) {
        match paired_t_test(&xs) {
            Ok(t) => {
                let mean = xs.iter().sum::<f64>() / xs.len() as f64;
                prop_assert!(t.p_value > 0.0 && t.p_value <= 1.0);
                prop_assert_eq!(t.df, xs.len() as u64 - 1);
                prop_assert!(t.t_stat * mean >= 0.0);
            }
            Err(e) => prop_assert!(matches!(e, FundingError::DegenerateSample(_))),
        }
    }

    #[test]
    fn efficiency_is_the_ratio(num in -50.0f64..50.0, den in -50.0f64..50.0) {
        match efficiency(num, den) {
            Some(e) => {
                prop_assert!(den > 0.0);
                prop_assert!((e - 100.0 * num / den).abs() < 1e-9);
            }
            None => prop_assert!(den <= 0.0),
        }
    }

    #[test]
    fn csv_round_trip_is_lossless(seed in 0u64..10_000, n in 1usize..40, level in -0.01f64..0.1) {
        let h = random_history(seed, d0(), 7, n, level);
        let mut buf = Vec::new();
        write_history_csv(&mut buf, &h).unwrap();
        let back = parse_history_csv(buf.as_slice(), "memory").unwrap();
        prop_assert_eq!(back.len(), h.len());
        for (x, y) in back.entries().iter().zip(h.entries()) {
            prop_assert_eq!(x.as_of(), y.as_of());
            prop_assert_eq!(x.tenors(), y.tenors());
            for (p, q) in x.rates().iter().zip(y.rates()) {
                prop_assert!((p - q).abs() <= 0.5e-10 + 1e-16);
            }
        }
        let mut again = Vec::new();
        write_history_csv(&mut again, &back).unwrap();
        prop_assert_eq!(buf, again);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn evpi_never_loses_to_any_roll(seed in 0u64..5_000, level in 0.0f64..0.08, k in 0usize..20) {
        let h = random_history(seed, d0(), 7, 80, level);
        let s = FundingSetup::standard();
        let grid = alpha_grid(&s, 3).unwrap();
        let start = h.entries()[k].as_of();
        let best = evpi_roll_on(&h, &s, start, &grid, Exec::Sequential).unwrap();
        for &alpha in &grid {
            prop_assert!(best.cost <= realized_cost(&h, &s, alpha, start).unwrap().cav);
        }
    }

    #[test]
    fn parallel_and_sequential_sweeps_agree(seed in 0u64..5_000) {
        let h = random_history(seed, d0(), 7, 90, 0.04);
        let s = FundingSetup::standard();
        let params = PredictorParams::new(0.2, 0.0, 0.5).unwrap();
        let w = DateRange::new(h.first_date(), h.first_date() + Days::new(120)).unwrap();
        let seq = BacktestOptions { grid_step_days: 5, exec: Exec::Sequential, ..Default::default() };
        let par = BacktestOptions { exec: Exec::Parallel, ..seq };
        prop_assert_eq!(run_backtest(&h, &s, &params, &w, &seq).unwrap(), run_backtest(&h, &s, &params, &w, &par).unwrap());
    }

    #[test]
    fn forecasts_ignore_the_future(seed in 0u64..5_000, cut in 2usize..60) {
        let h = random_history(seed, d0(), 7, 60, 0.03);
        let p = PredictorParams::new(0.3, 0.0, 0.4).unwrap();
        let full = ewma_forecasts(&h, &p, 365.0);
        let short = ewma_forecasts(&h.truncated(h.entries()[cut - 1].as_of()).unwrap(), &p, 365.0);
        prop_assert_eq!(&full[..cut], &short[..]);
    }
}
