//! CSV tables. Per-replication values keep full precision; summaries are
//! rounded to two decimals.

use std::io::Write;

use manprasim_core::experiments::HypothesisCheck;
use manprasim_core::metrics::{summarize, Metric, SatisfactionClass};
use manprasim_core::population::CustomerPool;
use manprasim_core::{ScenarioResult, SummaryRow, TransitionRecord};

fn writer() -> csv::Writer<Vec<u8>> {
    csv::Writer::from_writer(Vec::new())
}

fn finish(w: csv::Writer<Vec<u8>>) -> Vec<u8> {
    w.into_inner().expect("in-memory csv")
}

pub const SCENARIO_COLUMNS: [&str; 6] = [
    "scenario",
    "experiment",
    "department",
    "cashiers",
    "mix",
    "replication",
];

pub fn replications_header() -> Vec<String> {
    SCENARIO_COLUMNS
        .iter()
        .map(|s| s.to_string())
        .chain(Metric::all().into_iter().map(Metric::name))
        .collect()
}

/// One row per replication with every metric.
pub fn replications_csv(results: &[ScenarioResult]) -> Vec<u8> {
    let mut w = writer();
    w.write_record(replications_header()).expect("in-memory csv");
    let metrics = Metric::all();
    for r in results {
        let s = &r.scenario;
        for (rep, record) in r.records.iter().enumerate() {
            let mut row = vec![
                s.id.clone(),
                s.experiment.name().to_string(),
                s.department.name.clone(),
                s.cashiers().to_string(),
                s.mix_label.clone(),
                rep.to_string(),
            ];
            row.extend(metrics.iter().map(|m| m.value(record).to_string()));
            w.write_record(row).expect("in-memory csv");
        }
    }
    finish(w)
}

pub fn summary_rows(results: &[ScenarioResult]) -> Vec<SummaryRow> {
    results
        .iter()
        .flat_map(|r| summarize(&r.scenario.id, &r.records))
        .collect()
}

pub fn summary_csv(rows: &[SummaryRow]) -> Vec<u8> {
    let mut w = writer();
    w.write_record(["scenario", "metric", "n", "mean", "sd"])
        .expect("in-memory csv");
    for row in rows {
        w.write_record([
            row.scenario.clone(),
            row.metric.name(),
            row.n.to_string(),
            format!("{:.2}", row.mean),
            row.sd.map(|sd| format!("{sd:.2}")).unwrap_or_default(),
        ])
        .expect("in-memory csv");
    }
    finish(w)
}

/// Parse a summary CSV back into rows; rows with unknown metric names are
/// skipped.
pub fn read_summary_csv(bytes: &[u8]) -> Result<Vec<SummaryRow>, csv::Error> {
    let mut r = csv::Reader::from_reader(bytes);
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let parse = |i: usize| rec.get(i).and_then(|v| v.parse::<f64>().ok());
        let Some(metric) = rec.get(1).and_then(Metric::from_name) else {
            continue;
        };
        rows.push(SummaryRow {
            scenario: rec.get(0).unwrap_or_default().to_string(),
            metric,
            n: rec.get(2).and_then(|v| v.parse().ok()).unwrap_or(0),
            mean: parse(3).unwrap_or(0.0),
            sd: parse(4),
        });
    }
    Ok(rows)
}

pub fn hypotheses_csv(checks: &[HypothesisCheck]) -> Vec<u8> {
    let mut w = writer();
    w.write_record(["id", "result", "description", "observed"])
        .expect("in-memory csv");
    for c in checks {
        w.write_record([
            c.id.as_str(),
            if c.passed { "pass" } else { "fail" },
            c.description.as_str(),
            c.observed.as_str(),
        ])
        .expect("in-memory csv");
    }
    finish(w)
}

pub fn hypotheses_txt(checks: &[HypothesisCheck]) -> Vec<u8> {
    let mut out = Vec::new();
    if checks.is_empty() {
        writeln!(out, "no hypothesis checks apply to this scenario set").unwrap();
        return out;
    }
    let passed = checks.iter().filter(|c| c.passed).count();
    writeln!(out, "{passed}/{} checks passed", checks.len()).unwrap();
    for c in checks {
        let tag = if c.passed { "PASS" } else { "FAIL" };
        writeln!(out, "{tag} {}: {}", c.id, c.description).unwrap();
        writeln!(out, "     {}", c.observed).unwrap();
    }
    out
}

pub const VISIT_LOG_HEADER: [&str; 10] = [
    "scenario",
    "replication",
    "customer",
    "stereotype",
    "time",
    "from",
    "to",
    "weight",
    "trigger",
    "staff",
];

pub fn visit_log_row(scenario: &str, replication: usize, t: &TransitionRecord) -> [String; 10] {
    [
        scenario.to_string(),
        replication.to_string(),
        t.customer.to_string(),
        t.stereotype.name().to_string(),
        t.time.to_string(),
        t.from.name().to_string(),
        t.to.name().to_string(),
        t.weight.to_string(),
        t.trigger.name().to_string(),
        t.staff.map(|s| s.to_string()).unwrap_or_default(),
    ]
}

pub const POOL_HEADER: [&str; 6] = [
    "scenario",
    "customer",
    "stereotype",
    "visits",
    "cumulative_score",
    "class",
];

/// Final histories of one pool; customers who never visited are
/// `inactive`.
pub fn write_pool_rows<W: Write>(
    w: &mut csv::Writer<W>,
    scenario: &str,
    pool: &CustomerPool,
) -> csv::Result<()> {
    for c in pool.members() {
        let class = if c.history.visits == 0 {
            "inactive"
        } else {
            SatisfactionClass::of(c.history.cumulative_score).name()
        };
        w.write_record([
            scenario,
            &c.id.to_string(),
            c.stereotype.name(),
            &c.history.visits.to_string(),
            &c.history.cumulative_score.to_string(),
            class,
        ])?;
    }
    Ok(())
}
