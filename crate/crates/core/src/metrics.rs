//! Per-replication counters, both satisfaction indices and the
//! mean/SD summaries reported across replications.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::agents::{ExitCategory, StaffRole, VisitOutcome};
use crate::department::Staffing;
use crate::engine::Minutes;
use crate::population::CustomerPool;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SatisfactionClass {
    Satisfied,
    Neutral,
    Dissatisfied,
}

impl SatisfactionClass {
    pub const ALL: [SatisfactionClass; 3] = [
        SatisfactionClass::Satisfied,
        SatisfactionClass::Neutral,
        SatisfactionClass::Dissatisfied,
    ];

    pub fn of(score: i64) -> Self {
        match score {
            s if s > 0 => SatisfactionClass::Satisfied,
            0 => SatisfactionClass::Neutral,
            _ => SatisfactionClass::Dissatisfied,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            SatisfactionClass::Satisfied => "satisfied",
            SatisfactionClass::Neutral => "neutral",
            SatisfactionClass::Dissatisfied => "dissatisfied",
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SatisfactionHistogram {
    pub satisfied: u64,
    pub neutral: u64,
    pub dissatisfied: u64,
}

impl SatisfactionHistogram {
    pub fn add(&mut self, class: SatisfactionClass) {
        match class {
            SatisfactionClass::Satisfied => self.satisfied += 1,
            SatisfactionClass::Neutral => self.neutral += 1,
            SatisfactionClass::Dissatisfied => self.dissatisfied += 1,
        }
    }

    pub fn get(&self, class: SatisfactionClass) -> u64 {
        match class {
            SatisfactionClass::Satisfied => self.satisfied,
            SatisfactionClass::Neutral => self.neutral,
            SatisfactionClass::Dissatisfied => self.dissatisfied,
        }
    }

    pub fn total(&self) -> u64 {
        self.satisfied + self.neutral + self.dissatisfied
    }

    /// Share of `class` in the histogram, 0 when empty.
    pub fn share(&self, class: SatisfactionClass) -> f64 {
        match self.total() {
            0 => 0.0,
            n => self.get(class) as f64 / n as f64,
        }
    }
}

pub fn classify_visit(outcome: &VisitOutcome) -> (ExitCategory, SatisfactionClass) {
    (
        outcome.exit_category,
        SatisfactionClass::of(i64::from(outcome.per_visit_score)),
    )
}

/// Running counters accumulated by the event loop.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Tally {
    pub visits: u64,
    pub transactions: u64,
    pub refunds: u64,
    pub exit_counts: [u64; 5],
    pub per_visit: SatisfactionHistogram,
    pub score_sum: i64,
    pub busy_minutes: [Minutes; 4],
    /// Minutes each rostered staff member was on duty (open to end of egress).
    pub duty_minutes: Minutes,
    pub starved_arrivals: u64,
}

impl Tally {
    pub fn record_visit(&mut self, outcome: &VisitOutcome) {
        let (category, class) = classify_visit(outcome);
        self.visits += 1;
        self.exit_counts[category.index()] += 1;
        self.per_visit.add(class);
        self.score_sum += i64::from(outcome.per_visit_score);
        self.transactions += u64::from(outcome.transactions_made);
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct MetricsRecord {
    pub visits: u64,
    pub transactions: u64,
    pub refunds: u64,
    /// Distinct customers whose cumulative index is positive at run end.
    pub satisfied_customers: u64,
    /// Visits that ended with a positive per-visit score.
    pub satisfied_visit_ends: u64,
    /// Sum of all customers' cumulative indices.
    pub overall_satisfaction_level: i64,
    pub exit_counts: [u64; 5],
    pub per_visit_histogram: SatisfactionHistogram,
    /// Over customers with at least one visit.
    pub cumulative_histogram: SatisfactionHistogram,
    pub active_customers: u64,
    pub staff_utilization: [f64; 4],
    pub starved_arrivals: u64,
}

impl MetricsRecord {
    pub fn exit(&self, category: ExitCategory) -> u64 {
        self.exit_counts[category.index()]
    }

    pub fn utilization(&self, role: StaffRole) -> f64 {
        self.staff_utilization[role.index()]
    }

    pub fn mean_visits_per_active(&self) -> f64 {
        if self.active_customers == 0 {
            0.0
        } else {
            self.visits as f64 / self.active_customers as f64
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct InvariantViolation(pub String);

impl fmt::Display for InvariantViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invariant violated: {}", self.0)
    }
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), InvariantViolation> {
    if cond {
        Ok(())
    } else {
        Err(InvariantViolation(msg()))
    }
}

/// Build the replication record from the run tally and the final pool, and
/// cross-check every counter identity.
pub fn finalize(
    tally: &Tally,
    pool: &CustomerPool,
    roster: &Staffing,
) -> Result<MetricsRecord, InvariantViolation> {
    let mut cumulative = SatisfactionHistogram::default();
    let mut overall = 0i64;
    let mut pool_visits = 0u64;
    let mut history_sum = 0i64;
    for c in pool.members() {
        let h = &c.history;
        ensure(h.visits as usize == h.per_visit_scores.len(), || {
            format!("customer {} visit count disagrees with its score list", c.id)
        })?;
        let sum: i64 = h.per_visit_scores.iter().map(|&s| i64::from(s)).sum();
        ensure(sum == h.cumulative_score, || {
            format!("customer {} cumulative score is not the sum of its visits", c.id)
        })?;
        overall += h.cumulative_score;
        pool_visits += u64::from(h.visits);
        history_sum += sum;
        if h.visits > 0 {
            cumulative.add(SatisfactionClass::of(h.cumulative_score));
        }
    }

    let exits: u64 = tally.exit_counts.iter().sum();
    ensure(exits == tally.visits, || {
        format!("exit categories sum to {exits}, expected {} visits", tally.visits)
    })?;
    ensure(tally.per_visit.total() == tally.visits, || {
        "per-visit histogram does not sum to visits".into()
    })?;
    ensure(pool_visits == tally.visits, || {
        format!("pool histories hold {pool_visits} visits, tally has {}", tally.visits)
    })?;
    ensure(history_sum == tally.score_sum, || {
        "sum of visit scores differs between pool and tally".into()
    })?;
    ensure(
        tally.transactions + tally.refunds <= tally.exit_counts[ExitCategory::LeavingHappy.index()],
        || "more completed payments and refunds than happy exits".into(),
    )?;

    let mut utilization = [0.0; 4];
    for role in StaffRole::ALL {
        let capacity = f64::from(roster.count(role)) * tally.duty_minutes;
        let u = if capacity > 0.0 {
            tally.busy_minutes[role.index()] / capacity
        } else {
            0.0
        };
        ensure((0.0..=1.0 + 1e-9).contains(&u), || {
            format!("{} utilisation {u} outside [0, 1]", role.name())
        })?;
        utilization[role.index()] = u.min(1.0);
    }

    Ok(MetricsRecord {
        visits: tally.visits,
        transactions: tally.transactions,
        refunds: tally.refunds,
        satisfied_customers: cumulative.satisfied,
        satisfied_visit_ends: tally.per_visit.satisfied,
        overall_satisfaction_level: overall,
        exit_counts: tally.exit_counts,
        per_visit_histogram: tally.per_visit,
        cumulative_histogram: cumulative,
        active_customers: cumulative.total(),
        staff_utilization: utilization,
        starved_arrivals: tally.starved_arrivals,
    })
}

/// A scalar reported per replication and summarised across replications.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Metric {
    Visits,
    Transactions,
    Refunds,
    SatisfiedCustomers,
    SatisfiedVisitEnds,
    OverallSatisfaction,
    Exit(ExitCategory),
    PerVisit(SatisfactionClass),
    Cumulative(SatisfactionClass),
    ActiveCustomers,
    Utilization(StaffRole),
    StarvedArrivals,
}

impl Metric {
    pub fn all() -> Vec<Metric> {
        let mut all = alloc::vec![
            Metric::Visits,
            Metric::Transactions,
            Metric::Refunds,
            Metric::SatisfiedCustomers,
            Metric::SatisfiedVisitEnds,
            Metric::OverallSatisfaction,
        ];
        all.extend(ExitCategory::ALL.map(Metric::Exit));
        all.extend(SatisfactionClass::ALL.map(Metric::PerVisit));
        all.extend(SatisfactionClass::ALL.map(Metric::Cumulative));
        all.push(Metric::ActiveCustomers);
        all.extend(StaffRole::ALL.map(Metric::Utilization));
        all.push(Metric::StarvedArrivals);
        all
    }

    pub fn name(self) -> String {
        match self {
            Metric::Visits => "visits".into(),
            Metric::Transactions => "transactions".into(),
            Metric::Refunds => "refunds".into(),
            Metric::SatisfiedCustomers => "satisfied_customers".into(),
            Metric::SatisfiedVisitEnds => "satisfied_visit_ends".into(),
            Metric::OverallSatisfaction => "overall_satisfaction_level".into(),
            Metric::Exit(c) => c.name().into(),
            Metric::PerVisit(c) => format!("per_visit_{}", c.name()),
            Metric::Cumulative(c) => format!("cumulative_{}", c.name()),
            Metric::ActiveCustomers => "active_customers".into(),
            Metric::Utilization(r) => format!("utilization_{}", r.name()),
            Metric::StarvedArrivals => "starved_arrivals".into(),
        }
    }

    pub fn from_name(name: &str) -> Option<Metric> {
        Metric::all().into_iter().find(|m| m.name() == name)
    }

    pub fn value(self, r: &MetricsRecord) -> f64 {
        match self {
            Metric::Visits => r.visits as f64,
            Metric::Transactions => r.transactions as f64,
            Metric::Refunds => r.refunds as f64,
            Metric::SatisfiedCustomers => r.satisfied_customers as f64,
            Metric::SatisfiedVisitEnds => r.satisfied_visit_ends as f64,
            Metric::OverallSatisfaction => r.overall_satisfaction_level as f64,
            Metric::Exit(c) => r.exit(c) as f64,
            Metric::PerVisit(c) => r.per_visit_histogram.get(c) as f64,
            Metric::Cumulative(c) => r.cumulative_histogram.get(c) as f64,
            Metric::ActiveCustomers => r.active_customers as f64,
            Metric::Utilization(role) => r.utilization(role),
            Metric::StarvedArrivals => r.starved_arrivals as f64,
        }
    }
}

/// Sample mean and n-1 standard deviation. SD is `None` below two samples.
pub fn mean_sd(xs: &[f64]) -> (f64, Option<f64>) {
    if xs.is_empty() {
        return (0.0, None);
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, None);
    }
    let ss: f64 = xs.iter().map(|x| (x - mean) * (x - mean)).sum();
    (mean, Some(libm::sqrt(ss / (n - 1.0))))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub scenario: String,
    pub metric: Metric,
    pub n: usize,
    pub mean: f64,
    pub sd: Option<f64>,
}

impl SummaryRow {
    /// Standard error of the mean, when defined.
    pub fn se(&self) -> Option<f64> {
        self.sd.map(|sd| sd / libm::sqrt(self.n as f64))
    }
}

pub fn summarize_metric(scenario: &str, metric: Metric, samples: &[MetricsRecord]) -> SummaryRow {
    let values: Vec<f64> = samples.iter().map(|r| metric.value(r)).collect();
    let (mean, sd) = mean_sd(&values);
    SummaryRow {
        scenario: scenario.into(),
        metric,
        n: samples.len(),
        mean,
        sd,
    }
}

/// Mean and SD of every [`Metric`] over the replications of one scenario.
pub fn summarize(scenario: &str, samples: &[MetricsRecord]) -> Vec<SummaryRow> {
    Metric::all()
        .into_iter()
        .map(|m| summarize_metric(scenario, m, samples))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mean_sd_hand_values() {
        let (m, sd) = mean_sd(&[2.0, 4.0, 6.0]);
        assert_eq!(m, 4.0);
        assert!((sd.unwrap() - 2.0).abs() < 1e-12);
        assert_eq!(mean_sd(&[3.0, 3.0, 3.0]).1, Some(0.0));
        assert_eq!(mean_sd(&[3.0]), (3.0, None));
    }

    #[test]
    fn classify_examples() {
        let v = |cat, score| VisitOutcome {
            exit_category: cat,
            per_visit_score: score,
            transactions_made: 0,
        };
        assert_eq!(
            classify_visit(&v(ExitCategory::LeavingHappy, 2)),
            (ExitCategory::LeavingHappy, SatisfactionClass::Satisfied)
        );
        assert_eq!(
            classify_visit(&v(ExitCategory::LeftWithoutFindingAnything, 0)).1,
            SatisfactionClass::Neutral
        );
        assert_eq!(
            classify_visit(&v(ExitCategory::LeftBeforePaying, -1)),
            (ExitCategory::LeftBeforePaying, SatisfactionClass::Dissatisfied)
        );
    }

    #[test]
    fn metric_names_are_unique() {
        let names: Vec<String> = Metric::all().into_iter().map(Metric::name).collect();
        let mut sorted = names.clone();
        sorted.sort();
        sorted.dedup();
        assert_eq!(sorted.len(), names.len());
    }

    #[test]
    fn summary_of_identical_records_has_zero_sd() {
        let r = MetricsRecord {
            transactions: 5,
            ..MetricsRecord::default()
        };
        let row = summarize_metric("s", Metric::Transactions, &[r, r, r]);
        assert_eq!((row.mean, row.sd), (5.0, Some(0.0)));
        assert_eq!(summarize_metric("s", Metric::Transactions, &[r]).sd, None);
    }
}
