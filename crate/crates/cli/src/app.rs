//! The `run` command: plan, simulate, write every output from this thread.

use std::fs;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use log::{info, warn};
use manprasim_core::experiments::{check_hypotheses, HypothesisCheck, FAST_REPLICATIONS, FAST_WEEKS};
use manprasim_core::ScenarioResult;

use crate::charts::emit_charts;
use crate::error::CliError;
use crate::manifest::{RunManifest, MANIFEST};
use crate::output::{
    hypotheses_csv, hypotheses_txt, replications_csv, summary_csv, summary_rows, visit_log_row,
    write_pool_rows, POOL_HEADER, VISIT_LOG_HEADER,
};
use crate::runner::run_plan;
use crate::scenario::{plan, Overrides, Plan};

pub const REPLICATIONS_CSV: &str = "replications.csv";
pub const SUMMARY_CSV: &str = "summary.csv";
pub const HYPOTHESES_CSV: &str = "hypotheses.csv";
pub const HYPOTHESES_TXT: &str = "hypotheses.txt";
pub const VISIT_LOG_CSV: &str = "visit_log.csv";
pub const POOL_CSV: &str = "pool_summary.csv";

#[derive(Debug, Clone, PartialEq)]
pub struct RunOptions {
    pub scenario: String,
    pub configs: Vec<PathBuf>,
    pub replications: Option<u32>,
    pub weeks: Option<f64>,
    pub seed: Option<u64>,
    pub fallback_seed: Option<u64>,
    pub fast: bool,
    pub out: PathBuf,
    pub emit_visit_log: bool,
}

impl RunOptions {
    pub fn new(scenario: &str, out: impl Into<PathBuf>) -> Self {
        Self {
            scenario: scenario.to_string(),
            configs: Vec::new(),
            replications: None,
            weeks: None,
            seed: None,
            fallback_seed: None,
            fast: false,
            out: out.into(),
            emit_visit_log: false,
        }
    }

    pub fn overrides(&self) -> Overrides {
        let (weeks, reps) = if self.fast {
            (Some(self.weeks.unwrap_or(FAST_WEEKS)), Some(self.replications.unwrap_or(FAST_REPLICATIONS)))
        } else {
            (self.weeks, self.replications)
        };
        Overrides {
            weeks,
            replications: reps,
            seed: self.seed,
            fallback_seed: self.fallback_seed,
        }
    }

    pub fn plan(&self) -> Result<Plan, CliError> {
        plan(&self.scenario, &self.configs, &self.overrides())
    }
}

pub struct RunOutcome {
    pub plan: Plan,
    pub results: Vec<ScenarioResult>,
    pub checks: Vec<HypothesisCheck>,
    pub files: Vec<String>,
}

fn write(dir: &Path, name: &str, bytes: &[u8], files: &mut Vec<String>) -> Result<(), CliError> {
    let path = dir.join(name);
    fs::write(&path, bytes).map_err(|e| CliError::io(format!("writing {}", path.display()), e))?;
    files.push(name.to_string());
    Ok(())
}

fn csv_file(dir: &Path, name: &str) -> Result<csv::Writer<BufWriter<fs::File>>, CliError> {
    let path = dir.join(name);
    let f = fs::File::create(&path).map_err(|e| CliError::io(format!("creating {}", path.display()), e))?;
    Ok(csv::Writer::from_writer(BufWriter::new(f)))
}

fn csv_io(name: &str) -> impl Fn(csv::Error) -> CliError + '_ {
    move |e| CliError::io(format!("writing {name}"), std::io::Error::other(e))
}

pub fn run(opts: &RunOptions) -> Result<RunOutcome, CliError> {
    let plan = opts.plan()?;
    let out = &opts.out;
    fs::create_dir_all(out).map_err(|e| CliError::io(format!("creating {}", out.display()), e))?;
    info!(
        "{}: {} scenarios, seed {} ({})",
        plan.name,
        plan.scenarios.len(),
        plan.seed,
        plan.seed_source
    );

    let mut files = Vec::new();
    let mut pool_w = csv_file(out, POOL_CSV)?;
    pool_w.write_record(POOL_HEADER).map_err(csv_io(POOL_CSV))?;
    let mut log_w = if opts.emit_visit_log {
        let mut w = csv_file(out, VISIT_LOG_CSV)?;
        w.write_record(VISIT_LOG_HEADER).map_err(csv_io(VISIT_LOG_CSV))?;
        Some(w)
    } else {
        None
    };

    let results = run_plan(&plan.scenarios, opts.emit_visit_log, |run| {
        let id = &run.result.scenario.id;
        info!("finished {id}");
        write_pool_rows(&mut pool_w, id, &run.first_pool).map_err(csv_io(POOL_CSV))?;
        if let Some(w) = log_w.as_mut() {
            for (rep, log) in run.logs.iter().enumerate() {
                for t in log {
                    w.write_record(visit_log_row(id, rep, t)).map_err(csv_io(VISIT_LOG_CSV))?;
                }
            }
        }
        Ok(())
    })?;
    pool_w.flush().map_err(|e| CliError::io(format!("writing {POOL_CSV}"), e))?;
    files.push(POOL_CSV.to_string());
    if let Some(mut w) = log_w {
        w.flush().map_err(|e| CliError::io(format!("writing {VISIT_LOG_CSV}"), e))?;
        files.push(VISIT_LOG_CSV.to_string());
    }

    for r in &results {
        let starved: u64 = r.records.iter().map(|m| m.starved_arrivals).sum();
        if starved > 0 {
            warn!("{}: {starved} arrivals dropped because the whole pool was inside", r.scenario.id);
        }
    }
    write(out, REPLICATIONS_CSV, &replications_csv(&results), &mut files)?;
    let rows = summary_rows(&results);
    write(out, SUMMARY_CSV, &summary_csv(&rows), &mut files)?;
    let checks = check_hypotheses(&results);
    write(out, HYPOTHESES_CSV, &hypotheses_csv(&checks), &mut files)?;
    write(out, HYPOTHESES_TXT, &hypotheses_txt(&checks), &mut files)?;
    let charts = emit_charts(&rows);
    if charts.is_empty() {
        warn!("summary holds no cashier-sweep or customer-type results; no charts written");
    }
    for (name, svg) in &charts {
        write(out, name, svg.as_bytes(), &mut files)?;
    }
    let failed = checks.iter().filter(|c| !c.passed).count();
    if failed > 0 {
        warn!("{failed} of {} hypothesis checks failed", checks.len());
    }

    let mut manifest = RunManifest::new(&plan, opts.fast, opts.emit_visit_log, out);
    manifest.add_files(out, &files)?;
    write(out, MANIFEST, manifest.to_json().as_bytes(), &mut Vec::new())?;
    Ok(RunOutcome {
        plan,
        results,
        checks,
        files,
    })
}
