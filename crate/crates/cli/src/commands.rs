use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::ops::Range;
use std::path::{Path, PathBuf};

use asmc_core::metrics::{MetricsSummary, TraceColumns};
use asmc_core::sim::{run, ControllerKind, SimConfig, Trace};
use asmc_core::trace_io::{read_csv, write_csv};
use asmc_core::TraceIoError;
use log::info;
use rayon::prelude::*;

use crate::scenario::ScenarioFile;
use crate::svg::{render, Panel, Series};
use crate::CliError;

#[derive(Debug, Clone)]
pub struct RunOptions {
    pub scenario: PathBuf,
    pub seed: Option<u64>,
    pub out: PathBuf,
    pub controller: Option<ControllerKind>,
    pub decimation: Option<usize>,
    pub plot: bool,
    pub key_values: bool,
}

/// Loads a scenario and applies command-line overrides.
pub fn load_config(
    path: &Path,
    seed: Option<u64>,
    controller: Option<ControllerKind>,
    decimation: Option<usize>,
) -> Result<SimConfig, CliError> {
    let (mut cfg, _) = ScenarioFile::load(path)?.resolve()?;
    if let Some(seed) = seed {
        cfg.vibration.seed = seed;
    }
    if let Some(c) = controller {
        cfg.controller = c;
    }
    if let Some(k) = decimation {
        cfg.log_decimation = k;
    }
    cfg.validate()?;
    Ok(cfg)
}

/// Summary text as written to `summary.txt`: the trace comment line
/// followed by the metrics table.
pub fn summary_text(comment: &str, summary: &MetricsSummary) -> String {
    format!("{comment}\n{summary}")
}

fn summarize(columns: &TraceColumns) -> Result<MetricsSummary, CliError> {
    MetricsSummary::from_columns(columns).map_err(|e| CliError::Config(format!("metrics: {e}")))
}

fn trace_error(e: TraceIoError) -> CliError {
    match e {
        TraceIoError::Io(e) => CliError::Io(e.to_string()),
        other => CliError::Config(other.to_string()),
    }
}

pub fn cmd_run(opts: &RunOptions) -> Result<MetricsSummary, CliError> {
    let cfg = load_config(&opts.scenario, opts.seed, opts.controller, opts.decimation)?;
    info!(
        "running {:?} for {} s at h = {} s (seed {})",
        cfg.controller,
        cfg.duration,
        cfg.step,
        cfg.seed()
    );
    let trace = run(&cfg)?;
    fs::create_dir_all(&opts.out)?;

    let mut w = BufWriter::new(File::create(opts.out.join("trace.csv"))?);
    write_csv(&trace, &mut w).map_err(trace_error)?;
    w.flush()?;

    let summary = summarize(&TraceColumns::from_trace(&trace))?;
    let comment = trace.header.comment_line();
    fs::write(opts.out.join("summary.txt"), summary_text(&comment, &summary))?;
    if opts.key_values {
        fs::write(opts.out.join("summary.kv"), format!("{comment}\n{}", summary.to_key_values()))?;
    }
    if opts.plot {
        write_plots(&trace, &opts.out)?;
    }
    Ok(summary)
}

/// Recomputes the summary from a trace file and returns the text to print.
pub fn cmd_metrics(path: &Path, key_values: bool) -> Result<String, CliError> {
    let file = File::open(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let parsed = read_csv(file).map_err(trace_error)?;
    let summary = summarize(&parsed.columns)?;
    let comment = parsed.comment.unwrap_or_else(|| "# (no header comment)".into());
    Ok(if key_values {
        format!("{comment}\n{}", summary.to_key_values())
    } else {
        summary_text(&comment, &summary)
    })
}

/// Parses `N..M` (half-open) or `N..=M` (inclusive); a bare `N` is one seed.
pub fn parse_seed_range(s: &str) -> Result<Range<u64>, CliError> {
    let bad = || CliError::Config(format!("--seeds: expected N..M, got `{s}`"));
    let num = |t: &str| t.trim().parse::<u64>().map_err(|_| bad());
    let range = if let Some((a, b)) = s.split_once("..=") {
        num(a)?..num(b)?.checked_add(1).ok_or_else(bad)?
    } else if let Some((a, b)) = s.split_once("..") {
        num(a)?..num(b)?
    } else {
        let n = num(s)?;
        n..n + 1
    };
    if range.is_empty() {
        return Err(CliError::Config(format!("--seeds: range `{s}` is empty")));
    }
    Ok(range)
}

/// Mean and population standard deviation.
pub fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

type MetricField = fn(&MetricsSummary) -> [f64; 2];

#[derive(Debug, Clone)]
pub struct ComparisonRow {
    pub controller: ControllerKind,
    pub metric: &'static str,
    /// `(mean, std)` per link.
    pub stats: [(f64, f64); 2],
}

pub fn compare(cfg: &SimConfig, seeds: Range<u64>) -> Result<Vec<ComparisonRow>, CliError> {
    let kinds = [ControllerKind::AdaptiveSmc, ControllerKind::PdBaseline];
    let jobs: Vec<(ControllerKind, u64)> = kinds.iter().flat_map(|k| seeds.clone().map(move |s| (*k, s))).collect();
    let results: Vec<(ControllerKind, MetricsSummary)> = jobs
        .par_iter()
        .map(|&(kind, seed)| {
            let c = SimConfig {
                controller: kind,
                ..cfg.clone().with_seed(seed)
            };
            let trace = run(&c)?;
            Ok((kind, summarize(&TraceColumns::from_trace(&trace))?))
        })
        .collect::<Result<_, CliError>>()?;

    let mut rows = Vec::new();
    for kind in kinds {
        let runs: Vec<&MetricsSummary> = results.iter().filter(|(k, _)| *k == kind).map(|(_, s)| s).collect();
        let metrics: [(&str, MetricField); 5] = [
            ("dq_max_deg", |s| s.dq_max),
            ("dq_rms_deg", |s| s.dq_rms),
            ("tau_rms_nm", |s| s.tau_rms),
            ("settling_time_s", |s| s.settling_time),
            ("max_oscillation_hz", |s| s.max_oscillation),
        ];
        for (name, get) in metrics {
            let link = |i: usize| mean_std(&runs.iter().map(|s| get(s)[i]).collect::<Vec<_>>());
            rows.push(ComparisonRow {
                controller: kind,
                metric: name,
                stats: [link(0), link(1)],
            });
        }
    }
    Ok(rows)
}

pub fn cmd_compare(path: &Path, seeds: &str, decimation: Option<usize>) -> Result<String, CliError> {
    let seeds = parse_seed_range(seeds)?;
    let cfg = load_config(path, None, None, decimation)?;
    let n = seeds.end - seeds.start;
    let rows = compare(&cfg, seeds.clone())?;

    let mut out = format!("# seeds {}..{} ({n} runs per controller)\n", seeds.start, seeds.end);
    out.push_str(&format!("{:<6} {:<20} {:>32} {:>32}\n", "ctrl", "metric", "link1 mean ± std", "link2 mean ± std"));
    for r in rows {
        let name = match r.controller {
            ControllerKind::AdaptiveSmc => "asmc",
            ControllerKind::PdBaseline => "pd",
        };
        let cell = |(m, s): (f64, f64)| format!("{m:.6} ± {s:.6}");
        out.push_str(&format!(
            "{:<6} {:<20} {:>32} {:>32}\n",
            name,
            r.metric,
            cell(r.stats[0]),
            cell(r.stats[1])
        ));
    }
    Ok(out)
}

fn write_plots(trace: &Trace, dir: &Path) -> Result<(), CliError> {
    let rec = &trace.records;
    let t: Vec<f64> = rec.iter().map(|r| r.t).collect();
    let col = |f: &dyn Fn(&asmc_core::sim::TraceRecord) -> f64| rec.iter().map(f).collect::<Vec<f64>>();

    let q = [col(&|r| r.q[0].to_degrees()), col(&|r| r.q[1].to_degrees())];
    let qd = [col(&|r| r.qd[0].to_degrees()), col(&|r| r.qd[1].to_degrees())];
    let dq = [col(&|r| r.dq[0].to_degrees()), col(&|r| r.dq[1].to_degrees())];
    let tau = [col(&|r| r.tau[0]), col(&|r| r.tau[1])];
    let tv = [col(&|r| r.tau_v[0]), col(&|r| r.tau_v[1])];
    let tl = [col(&|r| r.tau_l[0]), col(&|r| r.tau_l[1])];
    let both = [col(&|r| r.tau_v[0] + r.tau_l[0]), col(&|r| r.tau_v[1] + r.tau_l[1])];

    let tracking: Vec<Panel> = (0..2)
        .map(|i| Panel {
            title: format!("link {}: desired and actual position", i + 1),
            y_label: "angle (deg)",
            series: vec![
                Series { label: "q_d", color: "#d62728", y: &qd[i] },
                Series { label: "q", color: "#1f77b4", y: &q[i] },
            ],
        })
        .collect();
    let error: Vec<Panel> = (0..2)
        .map(|i| Panel {
            title: format!("link {}: position error", i + 1),
            y_label: "dq (deg)",
            series: vec![Series { label: "dq", color: "#1f77b4", y: &dq[i] }],
        })
        .collect();
    let torque: Vec<Panel> = (0..2)
        .map(|i| Panel {
            title: format!("joint {}: input torque", i + 1),
            y_label: "tau (Nm)",
            series: vec![Series { label: "tau", color: "#1f77b4", y: &tau[i] }],
        })
        .collect();
    let disturbance: Vec<Panel> = (0..2)
        .map(|i| Panel {
            title: format!("link {}: vibration, payload and combined disturbance", i + 1),
            y_label: "torque (Nm)",
            series: vec![
                Series { label: "tau_v", color: "#7f7f7f", y: &tv[i] },
                Series { label: "tau_l", color: "#2ca02c", y: &tl[i] },
                Series { label: "tau_v + tau_l", color: "#d62728", y: &both[i] },
            ],
        })
        .collect();

    for (name, panels) in [
        ("tracking.svg", tracking),
        ("error.svg", error),
        ("torque.svg", torque),
        ("disturbance.svg", disturbance),
    ] {
        let body = render(&t, "t (s)", &panels);
        fs::write(dir.join(name), format!("<!-- {} -->\n{body}", trace.header.comment_line().trim_start_matches("# ")))?;
    }
    Ok(())
}
