use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use manprasim::app::{run, RunOptions};
use manprasim::charts::emit_charts;
use manprasim::config::{footfall_csv, read_footfall_csv};
use manprasim::manifest::{verify, RunManifest};
use manprasim::output::{read_summary_csv, summary_csv, summary_rows};
use manprasim::{load_department, parse_department, to_toml, CliError, ConfigLoadError};
use manprasim_core::stochastics::TriangularDist;
use manprasim_core::{DepartmentConfig, SimError};

fn configs_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_manprasim"));
    c.env_remove("MANPRASIM_SEED").env("RUST_LOG", "warn");
    c
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn atv_text() -> String {
    to_toml(&DepartmentConfig::atv())
}

fn parse(text: &str) -> Result<DepartmentConfig, ConfigLoadError> {
    parse_department(text, "test.toml", Path::new("."))
}

#[test]
fn shipped_atv_config_matches_defaults() {
    let c = load_department(&configs_dir().join("atv.toml")).unwrap();
    assert_eq!(c.distributions.browse, TriangularDist::new(1.0, 7.0, 15.0).unwrap());
    assert_eq!(c, DepartmentConfig::atv());
}

#[test]
fn shipped_ww_config_matches_defaults() {
    let c = load_department(&configs_dir().join("ww.toml")).unwrap();
    assert_eq!(c, DepartmentConfig::ww());
}

#[test]
fn serialised_defaults_round_trip() {
    for c in [DepartmentConfig::atv(), DepartmentConfig::ww()] {
        assert_eq!(parse(&to_toml(&c)).unwrap(), c);
    }
}

#[test]
fn mode_above_max_names_the_field() {
    let text = atv_text().replacen(
        "[distributions.normal_help]\nmin = 3.0\nmode = 15.0",
        "[distributions.normal_help]\nmin = 3.0\nmode = 31.0",
        1,
    );
    assert!(text.contains("mode = 31.0"));
    let err = parse(&text).unwrap_err();
    assert_eq!(err.field(), Some("distributions.normal_help"));
    let msg = err.to_string();
    assert!(msg.contains("distributions.normal_help"), "{msg}");
    let line = text.lines().position(|l| l == "[distributions.normal_help]").unwrap() + 1;
    assert!(msg.starts_with(&format!("test.toml:{line}:")), "{msg}");
}

#[test]
fn unknown_keys_are_rejected_with_position() {
    let text = atv_text().replacen("[probabilities]\n", "[probabilities]\nbuy_on_impulse = 0.2\n", 1);
    let err = parse(&text).unwrap_err();
    let line = text.lines().position(|l| l.starts_with("buy_on_impulse")).unwrap() + 1;
    match &err {
        ConfigLoadError::Parse { line: l, message, .. } => {
            assert_eq!(*l, line);
            assert!(message.contains("buy_on_impulse"), "{message}");
        }
        other => panic!("expected a parse error, got {other}"),
    }
}

#[test]
fn syntax_errors_report_line_and_column() {
    let err = parse("name = \"x\"\nexpert_share = = 0.3\n").unwrap_err();
    assert!(matches!(err, ConfigLoadError::Parse { line: 2, .. }), "{err}");
}

#[test]
fn probability_out_of_range_rejected() {
    let text = atv_text().replacen("need_help = 0.38", "need_help = 1.38", 1);
    let err = parse(&text).unwrap_err();
    assert_eq!(err.field(), Some("probabilities.need_help"));
}

#[test]
fn footfall_outside_opening_hours_rejected() {
    let text = atv_text().replacen("monday = [0.0, 0.0, 0.0, 0.0,", "monday = [0.0, 0.0, 0.0, 4.0,", 1);
    let err = parse(&text).unwrap_err();
    assert_eq!(err.field(), Some("footfall.monday[3]"));
}

#[test]
fn short_footfall_row_rejected() {
    let text = atv_text().replacen("sunday = [0.0, ", "sunday = [", 1);
    let err = parse(&text).unwrap_err();
    assert_eq!(err.field(), Some("footfall.sunday"));
}

#[test]
fn bad_opening_hours_rejected() {
    let text = atv_text().replacen("wednesday = \"09:00-18:00\"", "wednesday = \"18:00-09:00\"", 1);
    assert_eq!(parse(&text).unwrap_err().field(), Some("opening_hours.wednesday"));
    let text = atv_text().replacen("wednesday = \"09:00-18:00\"", "wednesday = \"nine to six\"", 1);
    assert_eq!(parse(&text).unwrap_err().field(), Some("opening_hours.wednesday"));
}

#[test]
fn footfall_csv_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let table = DepartmentConfig::ww().footfall;
    let path = dir.path().join("f.csv");
    fs::write(&path, footfall_csv(&table)).unwrap();
    assert_eq!(read_footfall_csv(&path).unwrap(), table);
}

#[test]
fn footfall_csv_errors() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("f.csv");
    fs::write(&path, "weekday,hour,footfall\nmonday,9,10\nmonday,9,12\n").unwrap();
    let e = read_footfall_csv(&path).unwrap_err();
    assert!(e.message.contains("duplicate"), "{e:?}");
    fs::write(&path, "weekday,hour,footfall\nfunday,9,10\n").unwrap();
    assert!(read_footfall_csv(&path).unwrap_err().message.contains("weekday"));
    fs::write(&path, "weekday,hour,footfall\nmonday,24,10\n").unwrap();
    assert!(read_footfall_csv(&path).is_err());
}

fn write_scenario(dir: &Path, body: &str) -> PathBuf {
    let p = dir.join("scenario.toml");
    fs::write(&p, body).unwrap();
    p
}

#[test]
fn mix_must_sum_to_pool_size() {
    let dir = tempfile::tempdir().unwrap();
    let p = write_scenario(
        dir.path(),
        "departments = [\"atv\"]\nmixes = [{ label = \"short\", counts = [2000, 2000, 2000, 2000, 1999] }]\n",
    );
    let o = bin()
        .args(["validate", "--scenario"])
        .arg(&p)
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("mix must sum to pool size"), "{}", stderr(&o));
}

#[test]
fn scenario_file_unknown_key_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let p = write_scenario(dir.path(), "departments = [\"atv\"]\nmixes = [\"f\"]\nweek = 3\n");
    let o = bin().args(["validate", "--scenario"]).arg(&p).output().unwrap();
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("scenario.toml:3"), "{}", stderr(&o));
}

#[test]
fn missing_config_exit_code_differs_from_invariant_failure() {
    let o = bin()
        .args(["validate", "--scenario", "exp1", "--config", "/nonexistent/dept.toml"])
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
    let invariant = CliError::Sim(SimError::Invariant(manprasim_core::metrics::InvariantViolation(
        "x".into(),
    )));
    assert_eq!(invariant.exit_code(), 3);
    assert_ne!(o.status.code(), Some(invariant.exit_code()));
}

#[test]
fn unwritable_output_is_an_io_error() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("not-a-dir");
    fs::write(&file, "x").unwrap();
    let o = bin()
        .args(["run", "--scenario", "exp1", "--weeks", "0.1", "--replications", "1", "--out"])
        .arg(&file)
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(4), "{}", stderr(&o));
}

#[test]
fn exp1_twice_gives_identical_csvs() {
    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    for d in &dirs {
        let o = bin()
            .args(["run", "--scenario", "exp1", "--seed", "42", "--fast", "--out"])
            .arg(d.path())
            .output()
            .unwrap();
        assert!(o.status.success(), "{}", stderr(&o));
    }
    for name in ["replications.csv", "summary.csv", "hypotheses.csv", "pool_summary.csv"] {
        let a = fs::read(dirs[0].path().join(name)).unwrap();
        let b = fs::read(dirs[1].path().join(name)).unwrap();
        assert_eq!(a, b, "{name} differs");
    }
    for chart in ["exp1_transactions.svg", "exp1_satisfied_customers.svg", "exp1_overall_satisfaction_level.svg"] {
        assert_eq!(
            fs::read(dirs[0].path().join(chart)).unwrap(),
            fs::read(dirs[1].path().join(chart)).unwrap()
        );
    }
}

#[test]
fn exp2_fast_emits_fourteen_summaries() {
    let dir = tempfile::tempdir().unwrap();
    let o = bin()
        .args(["run", "--scenario", "exp2", "--fast", "--out"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", stderr(&o));
    let rows = read_summary_csv(&fs::read(dir.path().join("summary.csv")).unwrap()).unwrap();
    let mut ids: Vec<_> = rows.iter().map(|r| r.scenario.clone()).collect();
    ids.dedup();
    assert_eq!(ids.len(), 14);
    let mut charts: Vec<_> = fs::read_dir(dir.path())
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .filter(|n| n.ends_with(".svg"))
        .collect();
    charts.sort();
    assert_eq!(charts, ["exp2_satisfaction_history.svg", "exp2_satisfaction_per_visit.svg"]);
}

fn tiny(out: &Path) -> RunOptions {
    let mut o = RunOptions::new("exp1", out);
    o.weeks = Some(0.3);
    o.replications = Some(2);
    o
}

#[test]
fn manifest_lists_checksums_and_seed() {
    let dir = tempfile::tempdir().unwrap();
    let mut opts = tiny(dir.path());
    opts.seed = Some(9);
    let outcome = run(&opts).unwrap();
    let m: RunManifest =
        serde_json::from_str(&fs::read_to_string(dir.path().join("manifest.json")).unwrap()).unwrap();
    assert_eq!(m.master_seed, 9);
    assert_eq!(m.seed_source, "flag");
    assert_eq!(m.scenarios.len(), outcome.plan.scenarios.len());
    assert_eq!(m.departments.len(), 2);
    let names: Vec<_> = m.files.iter().map(|f| f.name.as_str()).collect();
    assert!(names.contains(&"replications.csv") && names.contains(&"summary.csv"));
    assert!(verify(dir.path()).unwrap().is_empty());
    let text = fs::read_to_string(dir.path().join("manifest.json")).unwrap();
    assert!(!text.contains("time"), "manifest must not carry timestamps");
    // embedded configs reload to the same departments
    for d in &m.departments {
        let c = parse(&d.config).unwrap();
        assert!(outcome.plan.departments.contains(&c));
    }
    fs::write(dir.path().join("summary.csv"), "tampered").unwrap();
    assert_eq!(verify(dir.path()).unwrap(), ["summary.csv"]);
    let o = bin().arg("verify").arg(dir.path()).output().unwrap();
    assert_eq!(o.status.code(), Some(4));
}

#[test]
fn identical_options_give_identical_manifests() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    run(&tiny(a.path())).unwrap();
    run(&tiny(b.path())).unwrap();
    let strip = |p: &Path| {
        let mut m: RunManifest =
            serde_json::from_str(&fs::read_to_string(p.join("manifest.json")).unwrap()).unwrap();
        m.output_dir.clear();
        m
    };
    assert_eq!(strip(a.path()), strip(b.path()));
}

#[test]
fn environment_seed_is_a_fallback() {
    let dir = tempfile::tempdir().unwrap();
    let o = bin()
        .env("MANPRASIM_SEED", "77")
        .args(["run", "--scenario", "exp1", "--weeks", "0.2", "--replications", "1", "--out"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", stderr(&o));
    let m: RunManifest =
        serde_json::from_str(&fs::read_to_string(dir.path().join("manifest.json")).unwrap()).unwrap();
    assert_eq!((m.master_seed, m.seed_source.as_str()), (77, "env"));

    let o = bin()
        .env("MANPRASIM_SEED", "77")
        .args(["run", "--scenario", "exp1", "--weeks", "0.2", "--replications", "1", "--seed", "5", "--out"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(o.status.success());
    let m: RunManifest =
        serde_json::from_str(&fs::read_to_string(dir.path().join("manifest.json")).unwrap()).unwrap();
    assert_eq!((m.master_seed, m.seed_source.as_str()), (5, "flag"));

    let o = bin()
        .env("MANPRASIM_SEED", "seventy")
        .args(["validate", "--scenario", "exp1"])
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn custom_scenario_runs_without_charts() {
    let dir = tempfile::tempdir().unwrap();
    let atv = configs_dir().join("atv.toml");
    let p = write_scenario(
        dir.path(),
        &format!(
            "departments = [{:?}, \"ww\"]\ncashiers = [2, 5]\nweeks = 0.3\nreplications = 2\nseed = 3\n\
             mixes = [\"d\", {{ label = \"mostly-e\", counts = [500, 500, 500, 500, 8000] }}]\n",
            atv.display().to_string()
        ),
    );
    let out = dir.path().join("out");
    let o = bin()
        .args(["run", "--scenario"])
        .arg(&p)
        .arg("--out")
        .arg(&out)
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stderr(&o).contains("no charts"), "{}", stderr(&o));
    let rows = read_summary_csv(&fs::read(out.join("summary.csv")).unwrap()).unwrap();
    let mut ids: Vec<_> = rows.iter().map(|r| r.scenario.clone()).collect();
    ids.dedup();
    assert_eq!(
        ids,
        [
            "custom/A&TV/c2/d",
            "custom/A&TV/c2/mostly-e",
            "custom/A&TV/c5/d",
            "custom/A&TV/c5/mostly-e",
            "custom/WW/c2/d",
            "custom/WW/c2/mostly-e",
            "custom/WW/c5/d",
            "custom/WW/c5/mostly-e",
        ]
    );
    assert!(!fs::read_dir(&out).unwrap().any(|e| e.unwrap().path().extension().is_some_and(|x| x == "svg")));
    let hyp = fs::read_to_string(out.join("hypotheses.txt")).unwrap();
    assert!(hyp.contains("no hypothesis checks"));
    let m: RunManifest = serde_json::from_str(&fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(m.seed_source, "scenario");
}

#[test]
fn visit_log_matches_replication_counts() {
    let dir = tempfile::tempdir().unwrap();
    let p = write_scenario(dir.path(), "departments = [\"atv\"]\nweeks = 0.15\nreplications = 2\nmixes = [\"f\"]\n");
    let mut opts = RunOptions::new(p.to_str().unwrap(), dir.path().join("out"));
    opts.emit_visit_log = true;
    let outcome = run(&opts).unwrap();
    let mut r = csv::Reader::from_path(dir.path().join("out/visit_log.csv")).unwrap();
    let headers = r.headers().unwrap().clone();
    assert_eq!(
        headers.iter().collect::<Vec<_>>(),
        ["scenario", "replication", "customer", "stereotype", "time", "from", "to", "weight", "trigger", "staff"]
    );
    let mut arrivals = [0u64; 2];
    for rec in r.records() {
        let rec = rec.unwrap();
        if &rec[8] == "arrival" {
            arrivals[rec[1].parse::<usize>().unwrap()] += 1;
        }
    }
    let visits: Vec<u64> = outcome.results[0].records.iter().map(|m| m.visits).collect();
    assert_eq!(arrivals.to_vec(), visits);

    let mut pool = csv::Reader::from_path(dir.path().join("out/pool_summary.csv")).unwrap();
    let rows: Vec<_> = pool.records().map(|r| r.unwrap()).collect();
    assert_eq!(rows.len(), 10_000);
    let total: u64 = rows.iter().map(|r| r[3].parse::<u64>().unwrap()).sum();
    assert_eq!(total, visits[0]);
}

#[test]
fn charts_follow_the_summary() {
    assert!(emit_charts(&[]).is_empty());
    let dir = tempfile::tempdir().unwrap();
    let outcome = run(&tiny(dir.path())).unwrap();
    let rows = summary_rows(&outcome.results);
    let charts = emit_charts(&rows);
    let names: Vec<_> = charts.iter().map(|c| c.0.as_str()).collect();
    assert_eq!(
        names,
        ["exp1_transactions.svg", "exp1_satisfied_customers.svg", "exp1_overall_satisfaction_level.svg"]
    );
    for (_, svg) in &charts {
        assert!(svg.starts_with("<svg") && svg.ends_with("</svg>\n"));
        assert!(svg.contains("<!-- data\ndepartment,cashiers,mean\n"));
        assert_eq!(svg.matches("<polyline").count(), 2);
    }
    // charts re-drawn from the written summary are byte-identical
    let reread = read_summary_csv(&summary_csv(&rows)).unwrap();
    let again = emit_charts(&reread);
    let rounded: Vec<_> = rows
        .iter()
        .map(|r| {
            let mut r = r.clone();
            r.mean = format!("{:.2}", r.mean).parse().unwrap();
            r
        })
        .collect();
    assert_eq!(again, emit_charts(&rounded));
}

#[test]
fn defaults_command_prints_loadable_toml() {
    let o = bin().args(["defaults", "ww"]).output().unwrap();
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    assert_eq!(parse(&text).unwrap(), DepartmentConfig::ww());
    assert_eq!(bin().args(["defaults", "shoes"]).output().unwrap().status.code(), Some(2));
}
