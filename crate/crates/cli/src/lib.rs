//! Command-line front end: configuration parsing, report generation,
//! parameter sweeps and SVG plots.

// `!(x < y)` is used on purpose so that NaN fails the check
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod report;
pub mod svg;

use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use infohopf::{simulate, Error as ModelError, HistoryKind, HistorySpec, NormalForm, State, W0Policy};
use rayon::prelude::*;
use thiserror::Error;

pub use config::{parse_config, Command, ConfigError, RunConfig};
pub use report::AnalysisReport;

#[derive(Debug, Error)]
pub enum RunError {
    #[error("cannot write {}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
    #[error("simulation failed: {0}")]
    Simulation(ModelError),
}

/// Successful runs; a diverged simulation still writes its report.
#[derive(Debug, Clone, PartialEq)]
pub enum RunStatus {
    Completed,
    Diverged { time: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    pub status: RunStatus,
    pub files: Vec<PathBuf>,
}

struct Output<'a> {
    dir: &'a Path,
    files: Vec<PathBuf>,
}

impl Output<'_> {
    fn write_with(
        &mut self,
        name: &str,
        f: impl FnOnce(&mut BufWriter<fs::File>) -> io::Result<()>,
    ) -> Result<(), RunError> {
        let path = self.dir.join(name);
        let io_err = |source| RunError::Io {
            path: path.clone(),
            source,
        };
        let file = fs::File::create(&path).map_err(io_err)?;
        let mut w = BufWriter::new(file);
        f(&mut w).and_then(|_| w.flush()).map_err(io_err)?;
        self.files.push(path);
        Ok(())
    }

    fn write(&mut self, name: &str, text: &str) -> Result<(), RunError> {
        self.write_with(name, |w| w.write_all(text.as_bytes()))
    }
}

/// One `sweep.csv` row: `param,value,s0,chi1,chi2,direction`, empty fields
/// where a stage is unavailable.
pub fn sweep_row(config: &RunConfig, param: &str, value: f64) -> String {
    let mut p = config.params;
    p.set(param, value);
    let s0 = infohopf::s0(&p).ok().flatten().map(|c| c.s0);
    let nf = s0.and_then(|_| NormalForm::at_first_crossing(&p).ok().flatten());
    let num = |x: Option<f64>| x.map(report::csv_number).unwrap_or_default();
    format!(
        "{param},{},{},{},{},{}",
        report::csv_number(value),
        num(s0),
        num(nf.map(|n| n.chi1)),
        num(nf.map(|n| n.chi2)),
        nf.map(|n| n.direction.as_str()).unwrap_or_default()
    )
}

fn history(config: &RunConfig) -> HistorySpec<f64> {
    let (u, v) = report::history_point(config);
    HistorySpec {
        kind: HistoryKind::Constant(State::new(u, v, 0.0)),
        w0_policy: config.simulate.w0.map_or(W0Policy::Consistent, W0Policy::Explicit),
    }
}

/// Executes the configured command and writes its files into
/// `config.output_dir`, which is created if needed.
pub fn run(config: &RunConfig) -> Result<RunOutcome, RunError> {
    let dir = config.output_dir.as_path();
    fs::create_dir_all(dir).map_err(|source| RunError::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    let mut out = Output { dir, files: Vec::new() };
    let mut status = RunStatus::Completed;

    if let Command::Sweep = config.command {
        let sweep = config.sweep.as_ref().expect("sweep options validated by the config");
        let rows: Vec<String> = sweep
            .values()
            .into_par_iter()
            .map(|v| sweep_row(config, &sweep.param, v))
            .collect();
        out.write_with("sweep.csv", |w| {
            writeln!(w, "param,value,s0,chi1,chi2,direction")?;
            rows.iter().try_for_each(|r| writeln!(w, "{r}"))
        })?;
        return Ok(RunOutcome {
            status,
            files: out.files,
        });
    }

    let mut report = report::analyze(config);
    if let Command::Simulate = config.command {
        let opts = &config.simulate;
        let result = simulate(&config.params, &history(config), opts.t_end, opts.steps_per_delay);
        let traj = match result {
            Ok(traj) => Ok(traj),
            Err(ModelError::Diverged { time }) => Err(time),
            Err(e) => return Err(RunError::Simulation(e)),
        };
        report.simulation = Some(report::simulation_out(config, &traj));
        match &traj {
            Ok(traj) => {
                out.write_with("trajectory.csv", |w| traj.write_csv(w))?;
                if config.plot {
                    for (name, svg) in svg::trajectory_panels(traj) {
                        out.write(name, &svg)?;
                    }
                }
            }
            Err(time) => {
                report.diagnostics.push(format!("simulation diverged at t = {time}"));
                status = RunStatus::Diverged { time: *time };
            }
        }
    }
    out.write("report.json", &report::to_json(&report))?;
    out.write("report.csv", &report::to_csv(&report))?;
    Ok(RunOutcome {
        status,
        files: out.files,
    })
}
