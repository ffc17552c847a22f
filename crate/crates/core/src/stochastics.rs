//! Input modelling: triangular durations, exponential inter-arrival gaps,
//! Bernoulli decisions and the likelihood-level adjustments applied per
//! customer stereotype.

use core::fmt;

use crate::engine::{Minutes, RngStream, MINUTES_PER_HOUR};

#[derive(Debug, Clone, PartialEq)]
pub enum ParamError {
    Triangular { min: f64, mode: f64, max: f64 },
    Probability(f64),
}

impl fmt::Display for ParamError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParamError::Triangular { min, mode, max } => write!(
                f,
                "triangular distribution requires 0 <= min <= mode <= max, got ({min}, {mode}, {max})"
            ),
            ParamError::Probability(p) => write!(f, "probability must lie in [0, 1], got {p}"),
        }
    }
}

/// Triangular distribution over minutes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TriangularDist {
    min: Minutes,
    mode: Minutes,
    max: Minutes,
}

impl TriangularDist {
    pub fn new(min: Minutes, mode: Minutes, max: Minutes) -> Result<Self, ParamError> {
        let finite = min.is_finite() && mode.is_finite() && max.is_finite();
        if !finite || min < 0.0 || min > mode || mode > max {
            return Err(ParamError::Triangular { min, mode, max });
        }
        Ok(Self { min, mode, max })
    }

    pub fn min(&self) -> Minutes {
        self.min
    }

    pub fn mode(&self) -> Minutes {
        self.mode
    }

    pub fn max(&self) -> Minutes {
        self.max
    }

    pub fn mean(&self) -> Minutes {
        (self.min + self.mode + self.max) / 3.0
    }

    pub fn variance(&self) -> f64 {
        let (a, c, b) = (self.min, self.mode, self.max);
        (a * a + b * b + c * c - a * b - a * c - b * c) / 18.0
    }

    pub fn cdf(&self, x: Minutes) -> f64 {
        let (a, c, b) = (self.min, self.mode, self.max);
        if x < a {
            0.0
        } else if x >= b {
            1.0
        } else if x <= c {
            (x - a) * (x - a) / ((b - a) * (c - a))
        } else {
            1.0 - (b - x) * (b - x) / ((b - a) * (b - c))
        }
    }

    /// Inverse CDF evaluated at `u` in `[0, 1)`.
    pub fn quantile(&self, u: f64) -> Minutes {
        let (a, c, b) = (self.min, self.mode, self.max);
        let width = b - a;
        if width == 0.0 {
            return a;
        }
        let split = (c - a) / width;
        let x = if u < split {
            a + libm::sqrt(u * width * (c - a))
        } else {
            b - libm::sqrt((1.0 - u) * width * (b - c))
        };
        x.clamp(a, b)
    }
}

/// One uniform draw per sample.
pub fn sample_triangular(dist: &TriangularDist, rng: &mut RngStream) -> Minutes {
    dist.quantile(rng.uniform())
}

/// Exponential gap with mean `60 / hourly_footfall` minutes. Returns `None`
/// when the footfall is not positive (no arrivals that hour).
pub fn sample_interarrival(hourly_footfall: f64, rng: &mut RngStream) -> Option<Minutes> {
    if hourly_footfall.is_nan() || hourly_footfall <= 0.0 {
        return None;
    }
    let mean = MINUTES_PER_HOUR / hourly_footfall;
    // 1 - u lies in (0, 1], so the log is finite.
    Some(-libm::log(1.0 - rng.uniform()) * mean)
}

#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct EventProbability(f64);

impl EventProbability {
    pub const ZERO: EventProbability = EventProbability(0.0);
    pub const ONE: EventProbability = EventProbability(1.0);

    pub fn new(p: f64) -> Result<Self, ParamError> {
        if (0.0..=1.0).contains(&p) {
            Ok(Self(p))
        } else {
            Err(ParamError::Probability(p))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

pub fn decide(p: EventProbability, rng: &mut RngStream) -> bool {
    rng.uniform() < p.0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum LikelihoodLevel {
    Low,
    Moderate,
    High,
}

impl LikelihoodLevel {
    pub const ALL: [LikelihoodLevel; 3] = [
        LikelihoodLevel::Low,
        LikelihoodLevel::Moderate,
        LikelihoodLevel::High,
    ];

    pub fn name(self) -> &'static str {
        match self {
            LikelihoodLevel::Low => "low",
            LikelihoodLevel::Moderate => "moderate",
            LikelihoodLevel::High => "high",
        }
    }
}

/// How a moderate base probability is turned into low/high variants.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum AdjustRule {
    /// low: p/2, high: p + (1-p)/2.
    #[default]
    Midpoint,
    /// low: p/2, high: min(2p, 1). Keeps rare events rare for high-likelihood
    /// customers.
    Ratio,
}

impl AdjustRule {
    pub fn name(self) -> &'static str {
        match self {
            AdjustRule::Midpoint => "midpoint",
            AdjustRule::Ratio => "ratio",
        }
    }

    pub fn apply(self, base: EventProbability, level: LikelihoodLevel) -> EventProbability {
        let p = base.0;
        let adjusted = match (self, level) {
            (_, LikelihoodLevel::Moderate) => p,
            (_, LikelihoodLevel::Low) => p / 2.0,
            (AdjustRule::Midpoint, LikelihoodLevel::High) => p + (1.0 - p) / 2.0,
            (AdjustRule::Ratio, LikelihoodLevel::High) => (2.0 * p).min(1.0),
        };
        EventProbability(adjusted.clamp(0.0, 1.0))
    }
}

/// Default adjustment: moderate unchanged, low halves, high moves halfway to one.
pub fn adjust_probability(base: EventProbability, level: LikelihoodLevel) -> EventProbability {
    AdjustRule::Midpoint.apply(base, level)
}

/// Shift the mode of a duration toward `max` (high willingness) or `min`
/// (low willingness) by half the distance. Bounds are unchanged.
pub fn adjust_triangular(base: &TriangularDist, level: LikelihoodLevel) -> TriangularDist {
    let mode = match level {
        LikelihoodLevel::Moderate => base.mode,
        LikelihoodLevel::High => (base.mode + base.max) / 2.0,
        LikelihoodLevel::Low => (base.min + base.mode) / 2.0,
    };
    TriangularDist { mode, ..*base }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{fork_stream, StreamId};

    fn p(v: f64) -> EventProbability {
        EventProbability::new(v).unwrap()
    }

    fn tri(a: f64, c: f64, b: f64) -> TriangularDist {
        TriangularDist::new(a, c, b).unwrap()
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(TriangularDist::new(3.0, 31.0, 30.0).is_err());
        assert!(TriangularDist::new(-1.0, 0.0, 1.0).is_err());
        assert!(TriangularDist::new(2.0, 1.0, 3.0).is_err());
        assert!(EventProbability::new(1.01).is_err());
        assert!(EventProbability::new(f64::NAN).is_err());
    }

    #[test]
    fn degenerate_triangular_is_constant() {
        let d = tri(5.0, 5.0, 5.0);
        let mut rng = fork_stream(1, 0, StreamId::Durations);
        for _ in 0..1000 {
            assert_eq!(sample_triangular(&d, &mut rng), 5.0);
        }
    }

    #[test]
    fn quantile_inverts_cdf() {
        let d = tri(3.0, 15.0, 30.0);
        for i in 0..=100 {
            let u = i as f64 / 100.0 * 0.999_999;
            let x = d.quantile(u);
            assert!((d.cdf(x) - u).abs() < 1e-9, "u={u} x={x}");
        }
        assert!((d.cdf(15.0) - 12.0 / 27.0).abs() < 1e-12);
    }

    #[test]
    fn probability_adjustment_examples() {
        use LikelihoodLevel::*;
        assert_eq!(adjust_probability(p(0.38), Moderate).value(), 0.38);
        assert!((adjust_probability(p(0.38), Low).value() - 0.19).abs() < 1e-12);
        assert!((adjust_probability(p(0.38), High).value() - 0.69).abs() < 1e-12);
        assert!((adjust_probability(p(0.56), Low).value() - 0.28).abs() < 1e-12);
        assert!((AdjustRule::Ratio.apply(p(0.05), High).value() - 0.10).abs() < 1e-12);
        assert_eq!(AdjustRule::Ratio.apply(p(0.7), High).value(), 1.0);
    }

    #[test]
    fn triangular_adjustment_examples() {
        use LikelihoodLevel::*;
        let base = tri(5.0, 12.0, 20.0);
        assert_eq!(adjust_triangular(&base, Moderate), base);
        assert_eq!(adjust_triangular(&base, High), tri(5.0, 16.0, 20.0));
        assert_eq!(adjust_triangular(&base, Low), tri(5.0, 8.5, 20.0));
    }

    #[test]
    fn decide_extremes() {
        let mut rng = fork_stream(3, 0, StreamId::Decisions);
        for _ in 0..10_000 {
            assert!(!decide(EventProbability::ZERO, &mut rng));
            assert!(decide(EventProbability::ONE, &mut rng));
        }
    }

    #[test]
    fn interarrival_zero_footfall_has_no_gap() {
        let mut rng = fork_stream(3, 0, StreamId::Arrivals);
        assert_eq!(sample_interarrival(0.0, &mut rng), None);
        assert_eq!(sample_interarrival(-5.0, &mut rng), None);
        let tiny = sample_interarrival(1e12, &mut rng).unwrap();
        assert!(tiny < 1e-6);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn arb_tri() -> impl Strategy<Value = TriangularDist> {
            (0.0..50.0f64, 0.0..1.0f64, 0.0..50.0f64)
                .prop_map(|(a, frac, w)| tri(a, a + frac * w, a + w))
        }

        proptest! {
            #[test]
            fn samples_stay_in_bounds(d in arb_tri(), seed in any::<u64>()) {
                let mut rng = fork_stream(seed, 0, StreamId::Durations);
                for _ in 0..64 {
                    let x = sample_triangular(&d, &mut rng);
                    prop_assert!(x >= d.min() && x <= d.max());
                }
            }

            #[test]
            fn adjusted_triangular_is_valid(d in arb_tri()) {
                for level in LikelihoodLevel::ALL {
                    let a = adjust_triangular(&d, level);
                    prop_assert!(TriangularDist::new(a.min(), a.mode(), a.max()).is_ok());
                }
                let lo = adjust_triangular(&d, LikelihoodLevel::Low).mean();
                let hi = adjust_triangular(&d, LikelihoodLevel::High).mean();
                prop_assert!(lo <= d.mean() && d.mean() <= hi);
            }

            #[test]
            fn probability_adjustment_is_monotone_and_bounded(v in 0.0..=1.0f64) {
                for rule in [AdjustRule::Midpoint, AdjustRule::Ratio] {
                    let [lo, mid, hi] = LikelihoodLevel::ALL.map(|l| rule.apply(p(v), l).value());
                    prop_assert!(lo <= mid && mid <= hi);
                    prop_assert!((0.0..=1.0).contains(&lo) && (0.0..=1.0).contains(&hi));
                }
            }
        }
    }
}
