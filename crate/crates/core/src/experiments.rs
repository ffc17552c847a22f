//! Scenarios, replication runs, the two validation experiments and the
//! directional hypothesis battery evaluated over their summaries.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::agents::ExitCategory;
use crate::department::{staffing_sweep, ConfigError, DepartmentConfig, Staffing};
use crate::engine::{Minutes, MINUTES_PER_WEEK};
use crate::metrics::{mean_sd, Metric, MetricsRecord, SatisfactionClass};
use crate::population::{MixConfig, PoolMix};
use crate::simulation::{simulate, Observer, RunReport, SimError};

pub const DEFAULT_WEEKS: f64 = 10.0;
pub const DEFAULT_REPLICATIONS: u32 = 20;
pub const FAST_WEEKS: f64 = 2.0;
pub const FAST_REPLICATIONS: u32 = 5;
pub const STAFF_TOTAL: u32 = 10;
pub const EXP1_CASHIERS: core::ops::RangeInclusive<u32> = 1..=7;
/// Cashiers rostered for every customer-type configuration.
pub const EXP2_CASHIERS: u32 = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Experiment {
    CashierSweep,
    CustomerTypes,
    Custom,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::CashierSweep => "exp1",
            Experiment::CustomerTypes => "exp2",
            Experiment::Custom => "custom",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub id: String,
    pub experiment: Experiment,
    /// Department profile with the staffing override already applied.
    pub department: DepartmentConfig,
    pub mix: PoolMix,
    pub mix_label: String,
    pub weeks: f64,
    pub replications: u32,
    pub master_seed: u64,
}

impl Scenario {
    pub fn new(
        experiment: Experiment,
        department: DepartmentConfig,
        mix: PoolMix,
        mix_label: &str,
        weeks: f64,
        replications: u32,
        master_seed: u64,
    ) -> Self {
        let id = format!(
            "{}/{}/c{}/{}",
            experiment.name(),
            department.name,
            department.staffing.cashiers,
            mix_label
        );
        Self {
            id,
            experiment,
            department,
            mix,
            mix_label: mix_label.to_string(),
            weeks,
            replications,
            master_seed,
        }
    }

    pub fn cashiers(&self) -> u32 {
        self.department.staffing.cashiers
    }

    pub fn lifespan(&self) -> Minutes {
        self.weeks * MINUTES_PER_WEEK
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(self.weeks > 0.0 && self.weeks.is_finite()) {
            return Err(ConfigError::new("weeks", "lifespan must be positive"));
        }
        if self.replications < 1 {
            return Err(ConfigError::new("replications", "at least one replication is required"));
        }
        if self.mix.total() == 0 {
            return Err(ConfigError::new("mix", "pool must not be empty"));
        }
        self.department.validate()
    }
}

/// One replication; streams derive only from `(master_seed, replication)`.
pub fn run_replication(scenario: &Scenario, replication: u32) -> Result<MetricsRecord, SimError> {
    run_replication_with(scenario, replication, ()).map(|r| r.metrics)
}

pub fn run_replication_with<O: Observer>(
    scenario: &Scenario,
    replication: u32,
    observer: O,
) -> Result<RunReport, SimError> {
    scenario.validate()?;
    simulate(
        &scenario.department,
        &scenario.mix,
        scenario.lifespan(),
        scenario.master_seed,
        u64::from(replication),
        observer,
    )
}

/// All replications of a scenario, in index order.
pub fn run_scenario(scenario: &Scenario) -> Result<ScenarioResult, SimError> {
    let records = (0..scenario.replications)
        .map(|rep| run_replication(scenario, rep))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(ScenarioResult {
        scenario: scenario.clone(),
        records,
    })
}

/// Cashier sweep over a fixed staff of ten with an even customer mix.
pub fn experiment_1(
    departments: &[DepartmentConfig],
    weeks: f64,
    replications: u32,
    master_seed: u64,
) -> Result<Vec<Scenario>, ConfigError> {
    let mut out = Vec::new();
    for dept in departments {
        for cashiers in EXP1_CASHIERS {
            let staffing = staffing_sweep(STAFF_TOTAL, cashiers, dept.expert_fraction)?;
            out.push(Scenario::new(
                Experiment::CashierSweep,
                dept.clone().with_staffing(staffing),
                MixConfig::F.mix(),
                MixConfig::F.label(),
                weeks,
                replications,
                master_seed,
            ));
        }
    }
    Ok(out)
}

/// The seven customer-type configurations per department. Configuration
/// (g) uses the department's own manager-reported split.
pub fn experiment_2(
    departments: &[DepartmentConfig],
    weeks: f64,
    replications: u32,
    master_seed: u64,
) -> Result<Vec<Scenario>, ConfigError> {
    let mut out = Vec::new();
    for dept in departments {
        let staffing = staffing_sweep(STAFF_TOTAL, EXP2_CASHIERS, dept.expert_fraction)?;
        let g = if dept.name == "WW" {
            MixConfig::GWomenswear
        } else {
            MixConfig::GAudioTv
        };
        for config in [
            MixConfig::A,
            MixConfig::B,
            MixConfig::C,
            MixConfig::D,
            MixConfig::E,
            MixConfig::F,
            g,
        ] {
            out.push(Scenario::new(
                Experiment::CustomerTypes,
                dept.clone().with_staffing(staffing),
                config.mix(),
                config.label(),
                weeks,
                replications,
                master_seed,
            ));
        }
    }
    Ok(out)
}

/// Custom single-department scenario with an explicit staffing.
pub fn custom_scenario(
    department: &DepartmentConfig,
    staffing: Option<Staffing>,
    mix: PoolMix,
    mix_label: &str,
    weeks: f64,
    replications: u32,
    master_seed: u64,
) -> Scenario {
    let mut dept = department.clone();
    if let Some(s) = staffing {
        dept.staffing = s;
    }
    Scenario::new(Experiment::Custom, dept, mix, mix_label, weeks, replications, master_seed)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioResult {
    pub scenario: Scenario,
    pub records: Vec<MetricsRecord>,
}

impl ScenarioResult {
    pub fn values(&self, metric: Metric) -> Vec<f64> {
        self.records.iter().map(|r| metric.value(r)).collect()
    }

    pub fn stat(&self, metric: Metric) -> Stat {
        Stat::of(&self.values(metric))
    }

    pub fn dept(&self) -> &str {
        &self.scenario.department.name
    }
}

/// Mean and standard error over replications.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stat {
    pub mean: f64,
    pub se: f64,
    pub n: usize,
}

impl Stat {
    pub fn of(values: &[f64]) -> Self {
        let (mean, sd) = mean_sd(values);
        let n = values.len();
        let se = sd.map_or(0.0, |sd| sd / libm::sqrt(n as f64));
        Self { mean, se, n }
    }

    /// Standard error of the difference of two independent means.
    pub fn pooled_se(&self, other: &Stat) -> f64 {
        libm::sqrt(self.se * self.se + other.se * other.se)
    }
}

/// Mean-ordering test: the smallest mean of `high` must exceed the largest
/// mean of `low` by more than `SE_MARGIN` pooled standard errors.
pub const SE_MARGIN: f64 = 2.0;

#[derive(Debug, Clone, PartialEq)]
pub struct HypothesisCheck {
    pub id: String,
    pub description: String,
    pub passed: bool,
    pub observed: String,
}

/// Compare two groups of labelled stats.
pub fn ordered_above(high: &[(String, Stat)], low: &[(String, Stat)]) -> (bool, String) {
    let (Some(h), Some(l)) = (
        high.iter().min_by(|a, b| a.1.mean.total_cmp(&b.1.mean)),
        low.iter().max_by(|a, b| a.1.mean.total_cmp(&b.1.mean)),
    ) else {
        return (false, "missing scenarios".to_string());
    };
    let gap = h.1.mean - l.1.mean;
    let margin = SE_MARGIN * h.1.pooled_se(&l.1);
    let pass = gap > margin;
    (
        pass,
        format!(
            "min high {}={:.2} vs max low {}={:.2}; gap {:.2}, required > {:.2}",
            h.0, h.1.mean, l.0, l.1.mean, gap, margin
        ),
    )
}

/// Inverted-U over an ordered sweep: the peak lies at one of `peak_at`
/// and both endpoints sit more than `SE_MARGIN` pooled SEs below it.
pub fn inverted_u(
    points: &[(u32, Stat)],
    peak_at: &[u32],
) -> (bool, String) {
    let (Some(first), Some(last)) = (points.first(), points.last()) else {
        return (false, "empty sweep".to_string());
    };
    let peak = points
        .iter()
        .max_by(|a, b| a.1.mean.total_cmp(&b.1.mean))
        .expect("non-empty");
    let margin_lo = SE_MARGIN * peak.1.pooled_se(&first.1);
    let margin_hi = SE_MARGIN * peak.1.pooled_se(&last.1);
    let pass = peak_at.contains(&peak.0)
        && peak.1.mean - first.1.mean > margin_lo
        && peak.1.mean - last.1.mean > margin_hi;
    let series: Vec<String> = points.iter().map(|(k, s)| format!("{k}:{:.2}", s.mean)).collect();
    (pass, format!("peak at {} ({:.2}); series {}", peak.0, peak.1.mean, series.join(" ")))
}

fn find<'r>(
    results: &'r [ScenarioResult],
    experiment: Experiment,
    dept: &str,
    pick: impl Fn(&Scenario) -> bool,
) -> Option<&'r ScenarioResult> {
    results
        .iter()
        .find(|r| r.scenario.experiment == experiment && r.dept() == dept && pick(&r.scenario))
}

fn mix_stats(
    results: &[ScenarioResult],
    dept: &str,
    labels: &[&str],
    metric: Metric,
) -> Vec<(String, Stat)> {
    labels
        .iter()
        .filter_map(|&l| {
            find(results, Experiment::CustomerTypes, dept, |s| s.mix_label == l)
                .map(|r| (format!("{dept}({l})"), r.stat(metric)))
        })
        .collect()
}

const ALL_MIXES: [&str; 7] = ["a", "b", "c", "d", "e", "f", "g"];

fn others(picked: &[&str]) -> Vec<&'static str> {
    ALL_MIXES.iter().copied().filter(|l| !picked.contains(l)).collect()
}

fn check(id: &str, description: String, outcome: (bool, String)) -> HypothesisCheck {
    HypothesisCheck {
        id: id.to_string(),
        description,
        passed: outcome.0,
        observed: outcome.1,
    }
}

fn departments_of(results: &[ScenarioResult], experiment: Experiment) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    for r in results.iter().filter(|r| r.scenario.experiment == experiment) {
        if !out.iter().any(|d| d == r.dept()) {
            out.push(r.dept().to_string());
        }
    }
    out
}

/// Directional checks over the cashier sweep.
pub fn check_experiment_1(results: &[ScenarioResult]) -> Vec<HypothesisCheck> {
    let mut out = Vec::new();
    for dept in departments_of(results, Experiment::CashierSweep) {
        let sweep = |metric: Metric| -> Vec<(u32, Stat)> {
            EXP1_CASHIERS
                .filter_map(|c| {
                    find(results, Experiment::CashierSweep, &dept, |s| s.cashiers() == c)
                        .map(|r| (c, r.stat(metric)))
                })
                .collect()
        };
        for metric in [
            Metric::Transactions,
            Metric::SatisfiedCustomers,
            Metric::OverallSatisfaction,
        ] {
            out.push(check(
                &format!("exp1-{}-{}-inverted-u", dept, metric.name()),
                format!("{dept}: {} peaks at 3, 4 or 5 cashiers", metric.name()),
                inverted_u(&sweep(metric), &[3, 4, 5]),
            ));
        }
        let tx = sweep(Metric::Transactions);
        let at = |c: u32| tx.iter().find(|(k, _)| *k == c).map(|(k, s)| (format!("c{k}"), *s));
        if let (Some(one), Some(three)) = (at(1), at(3)) {
            out.push(check(
                &format!("exp1-{dept}-transactions-1-below-3"),
                format!("{dept}: transactions with 1 cashier below 3 cashiers"),
                ordered_above(&[three], &[one]),
            ));
        }
        if dept == "A&TV" {
            let overall = sweep(Metric::OverallSatisfaction);
            if let (Some(seven), Some(peak)) = (
                overall.iter().find(|(k, _)| *k == 7),
                overall.iter().max_by(|a, b| a.1.mean.total_cmp(&b.1.mean)),
            ) {
                out.push(check(
                    "exp1-A&TV-overall-satisfaction-7-below-peak",
                    "A&TV: overall satisfaction at 7 cashiers below its peak".to_string(),
                    ordered_above(
                        &[(format!("c{}", peak.0), peak.1)],
                        &[("c7".to_string(), seven.1)],
                    ),
                ));
            }
        }
    }
    out
}

/// Directional checks over the customer-type configurations.
pub fn check_experiment_2(results: &[ScenarioResult]) -> Vec<HypothesisCheck> {
    let before_normal = Metric::Exit(ExitCategory::LeftBeforeNormalHelp);
    let before_paying = Metric::Exit(ExitCategory::LeftBeforePaying);
    let without = Metric::Exit(ExitCategory::LeftWithoutFindingAnything);
    let happy = Metric::Exit(ExitCategory::LeavingHappy);
    let depts = departments_of(results, Experiment::CustomerTypes);
    let mut out = Vec::new();
    for dept in &depts {
        let d = dept.as_str();
        out.push(check(
            &format!("exp2-{d}-normal-help-top-c-e"),
            format!("{d}: (c) and (e) have the most departures before normal help"),
            ordered_above(
                &mix_stats(results, d, &["c", "e"], before_normal),
                &mix_stats(results, d, &others(&["c", "e"]), before_normal),
            ),
        ));
        out.push(check(
            &format!("exp2-{d}-normal-help-bottom-b-d"),
            format!("{d}: (b) and (d) have the fewest departures before normal help"),
            ordered_above(
                &mix_stats(results, d, &others(&["b", "d"]), before_normal),
                &mix_stats(results, d, &["b", "d"], before_normal),
            ),
        ));
        out.push(check(
            &format!("exp2-{d}-paying-a-b-over-d-e"),
            format!("{d}: (a) and (b) lose more customers waiting to pay than (d) and (e)"),
            ordered_above(
                &mix_stats(results, d, &["a", "b"], before_paying),
                &mix_stats(results, d, &["d", "e"], before_paying),
            ),
        ));
        out.push(check(
            &format!("exp2-{d}-without-top-d-e"),
            format!("{d}: (d) and (e) have the most customers leaving without finding anything"),
            ordered_above(
                &mix_stats(results, d, &["d", "e"], without),
                &mix_stats(results, d, &others(&["d", "e"]), without),
            ),
        ));
    }
    if depts.iter().any(|d| d == "WW") && depts.iter().any(|d| d == "A&TV") {
        for l in ["a", "f", "g"] {
            out.push(check(
                &format!("exp2-happy-ww-over-atv-{l}"),
                format!("({l}): more customers leave happy in WW than in A&TV"),
                ordered_above(
                    &mix_stats(results, "WW", &[l], happy),
                    &mix_stats(results, "A&TV", &[l], happy),
                ),
            ));
        }
        for l in ["c", "e"] {
            out.push(check(
                &format!("exp2-normal-help-atv-over-ww-{l}"),
                format!("({l}): more departures before normal help in A&TV than in WW"),
                ordered_above(
                    &mix_stats(results, "A&TV", &[l], before_normal),
                    &mix_stats(results, "WW", &[l], before_normal),
                ),
            ));
        }
    }
    out
}

/// Cumulative index has a smaller neutral share than the per-visit index
/// wherever active customers average at least two visits.
pub fn check_polarisation(results: &[ScenarioResult]) -> Vec<HypothesisCheck> {
    let mut out = Vec::new();
    for r in results {
        let visits = r.stat(Metric::Visits).mean;
        let active = r.stat(Metric::ActiveCustomers).mean;
        if active <= 0.0 || visits / active < 2.0 {
            continue;
        }
        let share = |f: fn(&MetricsRecord) -> f64| -> f64 {
            r.records.iter().map(f).sum::<f64>() / r.records.len() as f64
        };
        let cumulative =
            share(|m| m.cumulative_histogram.share(SatisfactionClass::Neutral));
        let per_visit = share(|m| m.per_visit_histogram.share(SatisfactionClass::Neutral));
        out.push(HypothesisCheck {
            id: format!("polarisation-{}", r.scenario.id),
            description: format!("{}: history-based index less neutral than per-visit", r.scenario.id),
            passed: cumulative < per_visit,
            observed: format!(
                "neutral share cumulative {:.4} vs per-visit {:.4} ({:.2} visits per active customer)",
                cumulative,
                per_visit,
                visits / active
            ),
        });
    }
    out
}

/// Every encoded check over whatever experiments are present.
pub fn check_hypotheses(results: &[ScenarioResult]) -> Vec<HypothesisCheck> {
    let mut out = check_experiment_1(results);
    out.extend(check_experiment_2(results));
    out.extend(check_polarisation(results));
    out
}
