//! Parallel execution of scenario replications. Workers only simulate;
//! results come back in (scenario, replication) order for the caller to
//! write.

use manprasim_core::population::CustomerPool;
use manprasim_core::simulation::Simulation;
use manprasim_core::{MetricsRecord, Observer, Scenario, ScenarioResult, SimError, TransitionRecord};
use rayon::prelude::*;

use crate::error::CliError;

#[derive(Default)]
struct Recorder {
    enabled: bool,
    log: Vec<TransitionRecord>,
}

impl Observer for Recorder {
    fn on_transition(&mut self, record: &TransitionRecord) {
        if self.enabled {
            self.log.push(*record);
        }
    }
}

pub struct ReplicationOutput {
    pub metrics: MetricsRecord,
    /// Final pool, kept for replication 0 only.
    pub pool: Option<CustomerPool>,
    pub log: Vec<TransitionRecord>,
}

pub fn run_one(
    scenario: &Scenario,
    replication: u32,
    keep_log: bool,
) -> Result<ReplicationOutput, SimError> {
    scenario.validate()?;
    let mut recorder = Recorder {
        enabled: keep_log,
        log: Vec::new(),
    };
    let sim = Simulation::new(
        &scenario.department,
        &scenario.mix,
        scenario.lifespan(),
        scenario.master_seed,
        u64::from(replication),
        &mut recorder,
    )?;
    let (report, pool) = sim.run_with_pool()?;
    Ok(ReplicationOutput {
        metrics: report.metrics,
        pool: (replication == 0).then_some(pool),
        log: recorder.log,
    })
}

/// Everything kept from one scenario: all records, the final pool of
/// replication 0, and one transition log per replication (empty unless
/// requested).
pub struct ScenarioRun {
    pub result: ScenarioResult,
    pub first_pool: CustomerPool,
    pub logs: Vec<Vec<TransitionRecord>>,
}

fn collect(scenario: &Scenario, outputs: Vec<ReplicationOutput>) -> ScenarioRun {
    let mut records = Vec::with_capacity(outputs.len());
    let mut logs = Vec::new();
    let mut first_pool = None;
    for (rep, out) in outputs.into_iter().enumerate() {
        records.push(out.metrics);
        logs.push(out.log);
        if rep == 0 {
            first_pool = out.pool;
        }
    }
    ScenarioRun {
        result: ScenarioResult {
            scenario: scenario.clone(),
            records,
        },
        first_pool: first_pool.expect("scenarios have at least one replication"),
        logs,
    }
}

/// Run every scenario. `on_done` is called on the calling thread once per
/// scenario, in plan order. With `keep_log` scenarios run one at a time so
/// only one scenario's transition logs are held in memory.
pub fn run_plan<F>(
    scenarios: &[Scenario],
    keep_log: bool,
    mut on_done: F,
) -> Result<Vec<ScenarioResult>, CliError>
where
    F: FnMut(&ScenarioRun) -> Result<(), CliError>,
{
    let mut results = Vec::with_capacity(scenarios.len());
    if keep_log {
        for s in scenarios {
            let outputs = (0..s.replications)
                .into_par_iter()
                .map(|rep| run_one(s, rep, true))
                .collect::<Result<Vec<_>, _>>()?;
            let run = collect(s, outputs);
            on_done(&run)?;
            results.push(run.result);
        }
        return Ok(results);
    }
    let jobs: Vec<(usize, u32)> = scenarios
        .iter()
        .enumerate()
        .flat_map(|(i, s)| (0..s.replications).map(move |r| (i, r)))
        .collect();
    let mut outputs = jobs
        .par_iter()
        .map(|&(i, rep)| run_one(&scenarios[i], rep, false))
        .collect::<Result<Vec<_>, _>>()?
        .into_iter();
    for s in scenarios {
        let chunk: Vec<_> = outputs.by_ref().take(s.replications as usize).collect();
        let run = collect(s, chunk);
        on_done(&run)?;
        results.push(run.result);
    }
    Ok(results)
}
