//! Static SVG charts built from summary rows: metric-vs-cashiers line
//! charts for the cashier sweep and 100% stacked satisfaction bars for the
//! customer-type experiment. Each file embeds its data table in a comment.

use std::collections::BTreeMap;
use std::fmt::Write;

use manprasim_core::metrics::{Metric, SatisfactionClass};
use manprasim_core::SummaryRow;

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 440.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 150.0;
const TOP: f64 = 50.0;
const BOTTOM: f64 = 70.0;
const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];
const CLASS_COLOURS: [&str; 3] = ["#4daf4a", "#bdbdbd", "#e41a1c"];

/// Parsed `experiment/department/cN/mix` scenario id.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct ScenarioKey {
    pub experiment: String,
    pub department: String,
    pub cashiers: u32,
    pub mix: String,
}

impl ScenarioKey {
    pub fn parse(id: &str) -> Option<Self> {
        let mut parts = id.split('/');
        let experiment = parts.next()?.to_string();
        let department = parts.next()?.to_string();
        let cashiers = parts.next()?.strip_prefix('c')?.parse().ok()?;
        let mix = parts.next()?.to_string();
        parts.next().is_none().then_some(Self {
            experiment,
            department,
            cashiers,
            mix,
        })
    }
}

fn esc(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Comments may not contain `--`.
fn comment_safe(s: &str) -> String {
    s.replace("--", "- -")
}

fn nice_ceiling(x: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    let exp = x.log10().floor();
    let base = 10f64.powf(exp);
    for m in [1.0, 2.0, 2.5, 5.0, 10.0] {
        if m * base >= x {
            return m * base;
        }
    }
    10.0 * base
}

fn header(out: &mut String, title: &str, data: &str) {
    writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    )
    .unwrap();
    writeln!(out, "<!-- data\n{}-->", comment_safe(data)).unwrap();
    writeln!(out, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#).unwrap();
    writeln!(
        out,
        r#"<text x="{}" y="28" text-anchor="middle" font-size="16">{}</text>"#,
        WIDTH / 2.0,
        esc(title)
    )
    .unwrap();
}

/// Line chart of one metric's mean against cashier count, one line per
/// department.
pub fn line_chart(title: &str, y_label: &str, series: &BTreeMap<String, Vec<(u32, f64)>>) -> String {
    let mut data = String::from("department,cashiers,mean\n");
    for (dept, pts) in series {
        for (x, y) in pts {
            writeln!(data, "{dept},{x},{y:.2}").unwrap();
        }
    }
    let mut out = String::new();
    header(&mut out, title, &data);

    let xs: Vec<u32> = series.values().flatten().map(|p| p.0).collect();
    let (x_min, x_max) = (
        xs.iter().copied().min().unwrap_or(1),
        xs.iter().copied().max().unwrap_or(1),
    );
    let y_lo = series.values().flatten().map(|p| p.1).fold(0.0, f64::min);
    let y_hi = nice_ceiling(series.values().flatten().map(|p| p.1).fold(0.0, f64::max));
    let y_lo = if y_lo < 0.0 { -nice_ceiling(-y_lo) } else { 0.0 };
    let plot_w = WIDTH - LEFT - RIGHT;
    let plot_h = HEIGHT - TOP - BOTTOM;
    let px = |x: u32| {
        let span = f64::from((x_max - x_min).max(1));
        LEFT + f64::from(x - x_min) / span * plot_w
    };
    let py = |y: f64| TOP + (y_hi - y) / (y_hi - y_lo) * plot_h;

    // axes and grid
    for i in 0..=5 {
        let v = y_lo + (y_hi - y_lo) * f64::from(i) / 5.0;
        let y = py(v);
        writeln!(
            out,
            r##"<line x1="{LEFT}" y1="{y:.1}" x2="{:.1}" y2="{y:.1}" stroke="#e0e0e0"/>"##,
            LEFT + plot_w
        )
        .unwrap();
        writeln!(
            out,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{v:.0}</text>"#,
            LEFT - 6.0,
            y + 4.0
        )
        .unwrap();
    }
    for x in x_min..=x_max {
        writeln!(
            out,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{x}</text>"#,
            px(x),
            TOP + plot_h + 18.0
        )
        .unwrap();
    }
    writeln!(
        out,
        r##"<rect x="{LEFT}" y="{TOP}" width="{plot_w}" height="{plot_h}" fill="none" stroke="#333"/>"##
    )
    .unwrap();
    writeln!(
        out,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">cashiers</text>"#,
        LEFT + plot_w / 2.0,
        HEIGHT - 24.0
    )
    .unwrap();
    writeln!(
        out,
        r#"<text x="18" y="{:.1}" text-anchor="middle" transform="rotate(-90 18 {:.1})">{}</text>"#,
        TOP + plot_h / 2.0,
        TOP + plot_h / 2.0,
        esc(y_label)
    )
    .unwrap();

    for (i, (dept, pts)) in series.iter().enumerate() {
        let colour = PALETTE[i % PALETTE.len()];
        let path: Vec<String> = pts
            .iter()
            .map(|&(x, y)| format!("{:.1},{:.1}", px(x), py(y)))
            .collect();
        writeln!(
            out,
            r#"<polyline points="{}" fill="none" stroke="{colour}" stroke-width="2"/>"#,
            path.join(" ")
        )
        .unwrap();
        for &(x, y) in pts {
            writeln!(
                out,
                r#"<circle cx="{:.1}" cy="{:.1}" r="3.5" fill="{colour}"/>"#,
                px(x),
                py(y)
            )
            .unwrap();
        }
        let ly = TOP + 10.0 + 20.0 * i as f64;
        let lx = LEFT + plot_w + 16.0;
        writeln!(
            out,
            r#"<line x1="{lx:.1}" y1="{ly:.1}" x2="{:.1}" y2="{ly:.1}" stroke="{colour}" stroke-width="2"/>"#,
            lx + 20.0
        )
        .unwrap();
        writeln!(
            out,
            r#"<text x="{:.1}" y="{:.1}">{}</text>"#,
            lx + 26.0,
            ly + 4.0,
            esc(dept)
        )
        .unwrap();
    }
    out.push_str("</svg>\n");
    out
}

/// 100% stacked bars of satisfied / neutral / dissatisfied shares.
pub fn stacked_bars(title: &str, bars: &[(String, [f64; 3])]) -> String {
    let mut data = String::from("bar,satisfied,neutral,dissatisfied\n");
    for (label, v) in bars {
        writeln!(data, "{label},{:.2},{:.2},{:.2}", v[0], v[1], v[2]).unwrap();
    }
    let mut out = String::new();
    header(&mut out, title, &data);
    let plot_w = WIDTH - LEFT - RIGHT;
    let plot_h = HEIGHT - TOP - BOTTOM;
    for i in 0..=4 {
        let share = f64::from(i) * 25.0;
        let y = TOP + plot_h * (1.0 - share / 100.0);
        writeln!(
            out,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{share:.0}%</text>"#,
            LEFT - 6.0,
            y + 4.0
        )
        .unwrap();
    }
    let slot = plot_w / bars.len().max(1) as f64;
    let bar_w = slot * 0.7;
    for (i, (label, values)) in bars.iter().enumerate() {
        let total: f64 = values.iter().sum();
        let x = LEFT + slot * i as f64 + (slot - bar_w) / 2.0;
        let mut y = TOP + plot_h;
        for (k, v) in values.iter().enumerate() {
            let share = if total > 0.0 { v / total } else { 0.0 };
            let h = share * plot_h;
            y -= h;
            writeln!(
                out,
                r#"<rect x="{x:.1}" y="{y:.1}" width="{bar_w:.1}" height="{h:.1}" fill="{}"><title>{} {}: {:.1}%</title></rect>"#,
                CLASS_COLOURS[k],
                esc(label),
                SatisfactionClass::ALL[k].name(),
                share * 100.0
            )
            .unwrap();
        }
        let cx = x + bar_w / 2.0;
        let cy = TOP + plot_h + 14.0;
        writeln!(
            out,
            r#"<text x="{cx:.1}" y="{cy:.1}" text-anchor="end" font-size="10" transform="rotate(-45 {cx:.1} {cy:.1})">{}</text>"#,
            esc(label)
        )
        .unwrap();
    }
    writeln!(
        out,
        r##"<rect x="{LEFT}" y="{TOP}" width="{plot_w}" height="{plot_h}" fill="none" stroke="#333"/>"##
    )
    .unwrap();
    for (k, class) in SatisfactionClass::ALL.iter().enumerate() {
        let lx = LEFT + plot_w + 16.0;
        let ly = TOP + 10.0 + 20.0 * k as f64;
        writeln!(
            out,
            r#"<rect x="{lx:.1}" y="{:.1}" width="14" height="14" fill="{}"/>"#,
            ly - 10.0,
            CLASS_COLOURS[k]
        )
        .unwrap();
        writeln!(out, r#"<text x="{:.1}" y="{ly:.1}">{}</text>"#, lx + 20.0, class.name()).unwrap();
    }
    out.push_str("</svg>\n");
    out
}

pub const EXP1_METRICS: [Metric; 3] = [
    Metric::Transactions,
    Metric::SatisfiedCustomers,
    Metric::OverallSatisfaction,
];

/// All charts the summary supports, as `(file name, svg)`. An empty result
/// means nothing could be plotted.
pub fn emit_charts(rows: &[SummaryRow]) -> Vec<(String, String)> {
    let mut means: BTreeMap<(ScenarioKey, String), f64> = BTreeMap::new();
    for row in rows {
        if let Some(key) = ScenarioKey::parse(&row.scenario) {
            means.insert((key, row.metric.name()), row.mean);
        }
    }
    let mut charts = Vec::new();

    for metric in EXP1_METRICS {
        let name = metric.name();
        let mut series: BTreeMap<String, Vec<(u32, f64)>> = BTreeMap::new();
        for ((key, m), &v) in &means {
            if key.experiment == "exp1" && *m == name {
                series.entry(key.department.clone()).or_default().push((key.cashiers, v));
            }
        }
        if series.is_empty() {
            continue;
        }
        for pts in series.values_mut() {
            pts.sort_by_key(|p| p.0);
        }
        let title = format!("Cashier sweep: {}", name.replace('_', " "));
        charts.push((format!("exp1_{name}.svg"), line_chart(&title, &name.replace('_', " "), &series)));
    }

    let families = [
        ("history", "cumulative", "Customer satisfaction, history-based"),
        ("per_visit", "per_visit", "Customer satisfaction, per visit"),
    ];
    for (file, prefix, title) in families {
        let mut bars: BTreeMap<(String, String), [f64; 3]> = BTreeMap::new();
        for ((key, m), &v) in &means {
            if key.experiment != "exp2" {
                continue;
            }
            for (k, class) in SatisfactionClass::ALL.iter().enumerate() {
                if *m == format!("{prefix}_{}", class.name()) {
                    bars.entry((key.department.clone(), key.mix.clone())).or_default()[k] = v;
                }
            }
        }
        if bars.is_empty() {
            continue;
        }
        let bars: Vec<(String, [f64; 3])> = bars
            .into_iter()
            .map(|((d, mix), v)| (format!("{d} ({mix})"), v))
            .collect();
        charts.push((format!("exp2_satisfaction_{file}.svg"), stacked_bars(title, &bars)));
    }
    charts
}
