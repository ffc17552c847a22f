//! Sampling fidelity of the input models at 10^6 draws, and branch
//! frequencies of the stereotype behaviours at 10^5 trials.

use manprasim_core::agents::{on_browse_end, on_enter, on_help_end, sample_patience, Action, Behaviour, HelpKind};
use manprasim_core::engine::{fork_stream, RngStream, StreamId};
use manprasim_core::stochastics::{
    decide, sample_interarrival, sample_triangular, EventProbability, TriangularDist,
};
use manprasim_core::{DepartmentConfig, Stereotype};

const N: usize = 1_000_000;

fn rng(stream: StreamId) -> RngStream {
    fork_stream(20_240_601, 0, stream)
}

// closed-form moments, written out here rather than taken from the crate
fn tri_mean(a: f64, c: f64, b: f64) -> f64 {
    (a + c + b) / 3.0
}

fn tri_var(a: f64, c: f64, b: f64) -> f64 {
    (a * a + b * b + c * c - a * b - a * c - b * c) / 18.0
}

#[test]
fn triangular_means_within_three_standard_errors() {
    let cases = [
        (1.0, 7.0, 15.0),
        (3.0, 15.0, 30.0),
        (5.0, 12.0, 20.0),
        (1.0, 4.0, 10.0),
        (2.0, 8.0, 15.0),
        (0.0, 0.0, 1.0),
        (2.0, 9.0, 9.0),
    ];
    let mut r = rng(StreamId::Durations);
    for (a, c, b) in cases {
        let d = TriangularDist::new(a, c, b).unwrap();
        let mut sum = 0.0;
        for _ in 0..N {
            let x = sample_triangular(&d, &mut r);
            assert!((a..=b).contains(&x), "sample {x} outside [{a}, {b}]");
            sum += x;
        }
        let mean = sum / N as f64;
        let se = (tri_var(a, c, b) / N as f64).sqrt();
        let want = tri_mean(a, c, b);
        assert!(
            (mean - want).abs() < 3.0 * se,
            "({a},{c},{b}): mean {mean} vs {want}, se {se}"
        );
    }
}

#[test]
fn triangular_cdf_at_mode() {
    // F(c) = (c - a) / (b - a) for the help time (3, 15, 30)
    let d = TriangularDist::new(3.0, 15.0, 30.0).unwrap();
    let mut r = rng(StreamId::Durations);
    let below = (0..N).filter(|_| sample_triangular(&d, &mut r) <= 15.0).count();
    let share = below as f64 / N as f64;
    assert!((share - 12.0 / 27.0).abs() < 0.01, "share below mode {share}");
    assert!((share - 0.444).abs() < 0.01);
}

#[test]
fn exponential_gaps_match_footfall() {
    let mut r = rng(StreamId::Arrivals);
    for footfall in [60.0, 30.0, 7.5] {
        let want = 60.0 / footfall;
        let mut sum = 0.0;
        for _ in 0..N {
            let g = sample_interarrival(footfall, &mut r).unwrap();
            assert!(g > 0.0 && g.is_finite());
            sum += g;
        }
        let mean = sum / N as f64;
        // exponential: sd equals the mean
        let se = want / (N as f64).sqrt();
        assert!(
            (mean - want).abs() < 3.0 * se,
            "footfall {footfall}: mean gap {mean} vs {want}"
        );
    }
}

#[test]
fn no_gaps_without_footfall() {
    let mut r = rng(StreamId::Arrivals);
    assert_eq!(sample_interarrival(0.0, &mut r), None);
    assert_eq!(sample_interarrival(-3.0, &mut r), None);
}

#[test]
fn decide_frequencies() {
    let mut r = rng(StreamId::Decisions);
    for p in [0.37, 0.56, 0.38, 0.05] {
        let ep = EventProbability::new(p).unwrap();
        let hits = (0..N).filter(|_| decide(ep, &mut r)).count();
        let f = hits as f64 / N as f64;
        assert!((f - p).abs() < 0.002, "p={p}: observed {f}");
    }
    assert!((0..1000).all(|_| !decide(EventProbability::ZERO, &mut r)));
    assert!((0..1000).all(|_| decide(EventProbability::ONE, &mut r)));
}

const TRIALS: usize = 100_000;

fn behaviour(stereotype: Stereotype) -> Behaviour {
    Behaviour::for_stereotype(&DepartmentConfig::atv(), stereotype)
}

fn shares<F: FnMut() -> bool>(mut f: F) -> f64 {
    (0..TRIALS).filter(|_| f()).count() as f64 / TRIALS as f64
}

#[test]
fn moderate_help_seeking_matches_base_rate() {
    // shopping enthusiasts ask for help at the moderate (unadjusted) level
    let b = behaviour(Stereotype::ShoppingEnthusiast);
    let mut d = rng(StreamId::Decisions);
    let f = shares(|| matches!(on_browse_end(&b, &mut d), Action::SeekHelp(_)));
    assert!((f - 0.38).abs() < 0.005, "help share {f}");
}

#[test]
fn moderate_buy_after_help_matches_base_rate() {
    let b = behaviour(Stereotype::ServiceSeeker);
    let mut d = rng(StreamId::Decisions);
    let f = shares(|| on_help_end(&b, &mut d) == Action::QueueToPay);
    assert!((f - 0.56).abs() < 0.005, "buy after help {f}");
}

#[test]
fn internet_shopper_buys_at_low_level() {
    // low level halves the base: 0.56 / 2
    let b = behaviour(Stereotype::InternetShopper);
    let mut d = rng(StreamId::Decisions);
    let f = shares(|| on_help_end(&b, &mut d) == Action::QueueToPay);
    assert!((f - 0.28).abs() < 0.005, "internet shopper buy after help {f}");
}

#[test]
fn expert_share_among_help_seekers() {
    let b = behaviour(Stereotype::ServiceSeeker);
    let mut d = rng(StreamId::Decisions);
    let (mut help, mut expert) = (0usize, 0usize);
    for _ in 0..TRIALS {
        match on_browse_end(&b, &mut d) {
            Action::SeekHelp(HelpKind::Expert) => {
                help += 1;
                expert += 1;
            }
            Action::SeekHelp(HelpKind::Normal) => help += 1,
            _ => {}
        }
    }
    let f = expert as f64 / help as f64;
    assert!((f - 0.30).abs() < 0.01, "expert share {f}");
}

#[test]
fn refund_frequency_follows_adjusted_probability() {
    let mut d = rng(StreamId::Decisions);
    let mut t = rng(StreamId::Durations);
    for s in Stereotype::ALL {
        let b = behaviour(s);
        let p = b.need_refund.value();
        let f = shares(|| on_enter(&b, &mut d, &mut t) == Action::SeekRefund);
        // binomial 4-sigma band
        let tol = 4.0 * (p * (1.0 - p) / TRIALS as f64).sqrt() + 1e-9;
        assert!((f - p).abs() < tol, "{s}: refund share {f} vs {p}");
    }
    let hi = behaviour(Stereotype::DisinterestedShopper).need_refund.value();
    let lo = behaviour(Stereotype::ShoppingEnthusiast).need_refund.value();
    assert!(hi > lo);
}

#[test]
fn patient_stereotypes_wait_longer() {
    let mut t = rng(StreamId::Durations);
    let mean = |s: Stereotype, t: &mut RngStream| {
        let b = behaviour(s);
        (0..TRIALS).map(|_| sample_patience(&b, t)).sum::<f64>() / TRIALS as f64
    };
    let high = mean(Stereotype::ServiceSeeker, &mut t);
    let moderate = mean(Stereotype::ShoppingEnthusiast, &mut t);
    let low = mean(Stereotype::SolutionDemander, &mut t);
    assert!(high > moderate && moderate > low, "{high} {moderate} {low}");
    // moderate keeps the base (5, 12, 20)
    assert!((moderate - tri_mean(5.0, 12.0, 20.0)).abs() < 0.05);
    // high moves the mode to 16, low to 8.5
    assert!((high - tri_mean(5.0, 16.0, 20.0)).abs() < 0.05);
    assert!((low - tri_mean(5.0, 8.5, 20.0)).abs() < 0.05);
}

#[test]
fn buy_propensity_orders_by_level() {
    let mut d = rng(StreamId::Decisions);
    let buy = |s: Stereotype, d: &mut RngStream| {
        let b = behaviour(s);
        (0..TRIALS).filter(|_| on_help_end(&b, d) == Action::QueueToPay).count()
    };
    let high = buy(Stereotype::SolutionDemander, &mut d);
    let moderate = buy(Stereotype::ServiceSeeker, &mut d);
    let low = buy(Stereotype::DisinterestedShopper, &mut d);
    assert!(high > moderate && moderate > low);
}
