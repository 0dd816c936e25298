use std::io::Write;
use std::path::{Path, PathBuf};

use crate::bench::run::TrialReport;
use crate::bench::stats::{aggregate_traces, summarize, InstanceSummary, InstanceTrace};
use crate::error::Result;
use crate::fsutil::atomic_write;

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn write_trials_csv(reports: &[TrialReport], out: &mut dyn Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "instance",
        "trial",
        "steps",
        "final_energy",
        "relative_error",
        "cut",
        "wall_ms",
        "failed",
    ])?;
    for r in reports {
        w.write_record([
            r.instance.clone(),
            r.trial.to_string(),
            r.steps.to_string(),
            opt(r.final_energy),
            opt(r.relative_error),
            opt(r.cut),
            format!("{:.3}", r.wall_ms),
            r.failed.to_string(),
        ])?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

pub fn write_summary_csv(summaries: &[InstanceSummary], out: &mut dyn Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "instance",
        "metric",
        "trials",
        "failed",
        "mean",
        "std",
        "min",
        "max",
        "fraction_at_optimum",
    ])?;
    for s in summaries {
        let st = s.stats;
        w.write_record([
            s.instance.clone(),
            s.metric.name().to_string(),
            s.trials.to_string(),
            s.failed.to_string(),
            opt(st.map(|x| x.mean)),
            opt(st.map(|x| x.std)),
            opt(st.map(|x| x.min)),
            opt(st.map(|x| x.max)),
            opt(s.fraction_at_optimum),
        ])?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

pub fn write_trace_summary_csv(trace: &InstanceTrace, out: &mut dyn Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let with_cut = trace.rows.iter().any(|r| r.best_cut.is_some());
    let mut header = vec!["step", "best_energy_mean", "best_energy_min", "best_energy_max"];
    if with_cut {
        header.extend(["best_cut_mean", "best_cut_min", "best_cut_max"]);
    }
    w.write_record(&header)?;
    for r in &trace.rows {
        let (mean, min, max) = r.best_energy;
        let mut row = vec![r.step.to_string(), mean.to_string(), min.to_string(), max.to_string()];
        if let Some((mean, min, max)) = r.best_cut {
            row.extend([mean.to_string(), min.to_string(), max.to_string()]);
        }
        w.write_record(&row)?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

/// Replaces characters outside `[A-Za-z0-9._-]` so an instance id can be
/// used in a file name.
pub fn sanitize_id(id: &str) -> String {
    id.chars()
        .map(|c| if c.is_ascii_alphanumeric() || matches!(c, '.' | '_' | '-') { c } else { '_' })
        .collect()
}

/// Files produced by [`write_reports`].
#[derive(Debug, Clone)]
pub struct ReportFiles {
    pub trials: PathBuf,
    pub summary: PathBuf,
    pub traces: Vec<PathBuf>,
}

/// Writes `trials.csv`, `summary.csv` and one `trace_<id>.csv` per traced
/// instance into `dir`, each atomically.
pub fn write_reports(reports: &[TrialReport], dir: &Path) -> Result<ReportFiles> {
    let trials = dir.join("trials.csv");
    atomic_write(&trials, |w| write_trials_csv(reports, w))?;
    let summary = dir.join("summary.csv");
    let summaries = summarize(reports);
    atomic_write(&summary, |w| write_summary_csv(&summaries, w))?;
    let mut traces = Vec::new();
    for trace in aggregate_traces(reports) {
        let path = dir.join(format!("trace_{}.csv", sanitize_id(&trace.instance)));
        atomic_write(&path, |w| write_trace_summary_csv(&trace, w))?;
        traces.push(path);
    }
    Ok(ReportFiles {
        trials,
        summary,
        traces,
    })
}
