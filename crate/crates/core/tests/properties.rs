use manprasim_core::department::FootfallTable;
use manprasim_core::engine::MINUTES_PER_DAY;
use manprasim_core::stochastics::TriangularDist;
use manprasim_core::{simulate, DepartmentConfig, PoolMix, Staffing};
use proptest::prelude::*;

fn staffing() -> impl Strategy<Value = Staffing> {
    (0u32..4, 0u32..3, 0u32..4, 0u32..2).prop_map(|(n, e, c, m)| Staffing {
        normal_sellers: n,
        expert_sellers: e,
        cashiers: c,
        managers: m,
    })
}

fn mix() -> impl Strategy<Value = PoolMix> {
    prop::array::uniform5(0u32..40).prop_filter("non-empty pool", |m| m.iter().sum::<u32>() > 0).prop_map(PoolMix)
}

fn tri() -> impl Strategy<Value = TriangularDist> {
    (0.0f64..10.0, 0.0f64..1.0, 0.1f64..30.0).prop_map(|(a, t, w)| {
        TriangularDist::new(a, a + t * w, a + w).unwrap()
    })
}

prop_compose! {
    fn department()(
        peak in 0.0f64..120.0,
        staffing in staffing(),
        browse in tri(),
        help in tri(),
        pay in tri(),
        patience in tri(),
        egress in 0.0f64..30.0,
        ww in any::<bool>(),
    ) -> DepartmentConfig {
        let mut cfg = if ww { DepartmentConfig::ww() } else { DepartmentConfig::atv() };
        cfg.footfall = FootfallTable::synthetic(peak, &cfg.opening_hours);
        cfg.distributions.browse = browse;
        cfg.distributions.normal_help = help;
        cfg.distributions.expert_help = help;
        cfg.distributions.pay_service = pay;
        cfg.distributions.refund_service = pay;
        cfg.distributions.patience = patience;
        cfg.egress_minutes = egress;
        cfg.with_staffing(staffing)
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn counters_stay_consistent(
        cfg in department(),
        mix in mix(),
        days in 1.0f64..9.0,
        seed in any::<u64>(),
    ) {
        let report = simulate(&cfg, &mix, days * MINUTES_PER_DAY, seed, 0, ()).unwrap();
        let m = report.metrics;
        prop_assert_eq!(m.exit_counts.iter().sum::<u64>(), m.visits);
        prop_assert_eq!(m.per_visit_histogram.total(), m.visits);
        prop_assert!(m.active_customers <= u64::from(mix.0.iter().sum::<u32>()));
        prop_assert!(m.active_customers <= m.visits);
        prop_assert!(m.transactions + m.refunds <= m.exit_counts[0]);
        for u in m.staff_utilization {
            prop_assert!((0.0..=1.0).contains(&u));
        }
        if cfg.staffing.cashiers == 0 {
            prop_assert_eq!(m.transactions, 0);
        }
        prop_assert!(report.max_egress_latency <= cfg.egress_minutes + 1e-9);
        let c = report.calendar;
        prop_assert_eq!(c.scheduled, c.processed + c.cancelled + report.pending_at_end);
    }

    #[test]
    fn replications_are_reproducible(cfg in department(), mix in mix(), seed in any::<u64>(), rep in 0u64..50) {
        let a = simulate(&cfg, &mix, 2.0 * MINUTES_PER_DAY, seed, rep, ()).unwrap();
        let b = simulate(&cfg, &mix, 2.0 * MINUTES_PER_DAY, seed, rep, ()).unwrap();
        prop_assert_eq!(a, b);
    }
}
