//! Analysis report assembly and its JSON / flat CSV renderings.

use infohopf::integrator::fft_period;
use infohopf::stability::positive_equilibrium_stability;
use infohopf::{
    char_coeffs, cycle_metrics, equilibria, h1_holds, hopf_candidates, positive_equilibrium, s0 as first_delay,
    CycleMetrics, Equilibrium, ModelParams, NormalForm, State, Trajectory,
};
use serde::Serialize;
use serde_json::Value;

use crate::config::{Command, RunConfig};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ParamsOut {
    pub r1: f64,
    pub r2: f64,
    pub a1: f64,
    pub a2: f64,
    pub b1: f64,
    pub b2: f64,
    pub mu: f64,
    pub r: f64,
    pub s: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EquilibriumOut {
    pub label: &'static str,
    pub exists: bool,
    pub u: Option<f64>,
    pub v: Option<f64>,
    pub w: Option<f64>,
    pub stability: &'static str,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CharCoeffsOut {
    pub p2: f64,
    pub p1: f64,
    pub p0: f64,
    pub q2: f64,
    pub q1: f64,
    pub q0: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GCubicOut {
    pub m: f64,
    pub n: f64,
    pub h: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CandidateOut {
    pub z: f64,
    pub omega: f64,
    pub delays: Vec<f64>,
    pub transversality: &'static str,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NormalFormOut {
    pub omega_star: f64,
    pub s_star: f64,
    pub gamma1_re: f64,
    pub gamma1_im: f64,
    pub gamma2_re: f64,
    pub gamma2_im: f64,
    pub chi1: f64,
    pub chi2: f64,
    pub direction: &'static str,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulationOut {
    pub u0: f64,
    pub v0: f64,
    pub w0: Option<f64>,
    pub t_end: f64,
    pub step: f64,
    pub steps_per_delay: usize,
    pub transient_fraction: f64,
    /// Equilibrium the metrics are measured against.
    pub reference: &'static str,
    pub classification: &'static str,
    pub amplitude_u: Option<f64>,
    pub amplitude_v: Option<f64>,
    pub amplitude_w: Option<f64>,
    pub period: Option<f64>,
    pub fft_period: Option<f64>,
    pub n_periods_measured: usize,
    pub diverged_at: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnalysisReport {
    pub command: &'static str,
    pub params: ParamsOut,
    pub equilibria: Vec<EquilibriumOut>,
    pub char_coeffs: Option<CharCoeffsOut>,
    pub h1: Option<bool>,
    pub g_cubic: Option<GCubicOut>,
    pub hopf_candidates: Vec<CandidateOut>,
    pub s0: Option<f64>,
    /// Verdict for `E*` at the configured delay.
    pub stability_at_s: Option<&'static str>,
    pub normal_form: Option<NormalFormOut>,
    pub simulation: Option<SimulationOut>,
    /// Stages that could not be completed, with the reason.
    pub diagnostics: Vec<String>,
}

fn finite(x: f64) -> Option<f64> {
    x.is_finite().then_some(x)
}

/// Runs every analysis stage the command asks for. Missing stages become
/// nulls with a diagnostic line rather than errors.
pub fn analyze(config: &RunConfig) -> AnalysisReport {
    let p = &config.params;
    let mut diagnostics = Vec::new();
    let equilibria_out = equilibria(p)
        .into_iter()
        .map(|e| EquilibriumOut {
            label: e.label.as_str(),
            exists: e.exists,
            u: e.exists.then_some(e.point.u),
            v: e.exists.then_some(e.point.v),
            w: e.exists.then_some(e.point.w),
            stability: e.local_stability.as_str(),
        })
        .collect();

    let mut report = AnalysisReport {
        command: config.command.as_str(),
        params: ParamsOut {
            r1: p.r1,
            r2: p.r2,
            a1: p.a1,
            a2: p.a2,
            b1: p.b1,
            b2: p.b2,
            mu: p.mu,
            r: p.r,
            s: config.delay_given.then_some(p.s),
        },
        equilibria: equilibria_out,
        char_coeffs: None,
        h1: None,
        g_cubic: None,
        hopf_candidates: Vec::new(),
        s0: None,
        stability_at_s: None,
        normal_form: None,
        simulation: None,
        diagnostics: Vec::new(),
    };

    match positive_equilibrium(p).and_then(|e| char_coeffs(p, &e)) {
        Ok(c) => {
            report.char_coeffs = Some(CharCoeffsOut {
                p2: c.p2,
                p1: c.p1,
                p0: c.p0,
                q2: c.q2,
                q1: c.q1,
                q0: c.q0,
            });
            report.h1 = Some(h1_holds(&c));
            let g = c.g_cubic();
            report.g_cubic = Some(GCubicOut { m: g.m, n: g.n, h: g.h });
            report.hopf_candidates = hopf_candidates(&c, infohopf::stability::DEFAULT_J_MAX)
                .into_iter()
                .map(|h| CandidateOut {
                    z: h.z,
                    omega: h.omega,
                    delays: h.delays,
                    transversality: h.transversality_sign.as_str(),
                })
                .collect();
            report.s0 = first_delay(p).ok().flatten().map(|c| c.s0);
            if report.s0.is_none() {
                diagnostics.push("no Hopf candidate: G has no usable positive root".into());
            }
            if config.delay_given {
                match positive_equilibrium_stability(p) {
                    Ok(v) => report.stability_at_s = Some(v.as_str()),
                    Err(e) => diagnostics.push(format!("stability at s: {e}")),
                }
            }
        }
        Err(e) => diagnostics.push(format!("characteristic equation: {e}")),
    }

    let wants_normal_form = !matches!(config.command, Command::Critical);
    if wants_normal_form && report.s0.is_some() {
        match NormalForm::at_first_crossing(p) {
            Ok(Some(nf)) => report.normal_form = Some(normal_form_out(&nf)),
            Ok(None) => {}
            Err(e) => diagnostics.push(format!("normal form: {e}")),
        }
    }
    report.diagnostics = diagnostics;
    report
}

pub fn normal_form_out(nf: &NormalForm<f64>) -> NormalFormOut {
    NormalFormOut {
        omega_star: nf.omega_star,
        s_star: nf.s_star,
        gamma1_re: nf.gamma1.re,
        gamma1_im: nf.gamma1.im,
        gamma2_re: nf.gamma2.re,
        gamma2_im: nf.gamma2.im,
        chi1: nf.chi1,
        chi2: nf.chi2,
        direction: nf.direction.as_str(),
    }
}

/// History point used by a simulate run: the configured `(u0, v0)` or 1% off
/// `E*`, falling back to `(1, 1)` without a positive equilibrium.
pub fn history_point(config: &RunConfig) -> (f64, f64) {
    match (config.simulate.u0, config.simulate.v0) {
        (Some(u), Some(v)) => (u, v),
        _ => positive_equilibrium(&config.params)
            .map(|e| (e.point.u * 1.01, e.point.v * 0.99))
            .unwrap_or((1.0, 1.0)),
    }
}

/// Existing equilibrium the metrics are measured against: `E*` when it
/// exists, otherwise the existing equilibrium closest to the final state.
fn reference_equilibrium(params: &ModelParams<f64>, last: &State<f64>) -> Equilibrium<f64> {
    let all = equilibria(params);
    if let Some(e) = all
        .iter()
        .find(|e| e.label == infohopf::EquilibriumLabel::EStar && e.exists)
    {
        return *e;
    }
    *all.iter()
        .filter(|e| e.exists)
        .min_by(|a, b| {
            let da = (a.point - *last).max_abs();
            let db = (b.point - *last).max_abs();
            da.partial_cmp(&db).unwrap_or(std::cmp::Ordering::Equal)
        })
        .expect("E0 always exists")
}

pub fn simulation_out(config: &RunConfig, outcome: &Result<Trajectory<f64>, f64>) -> SimulationOut {
    let (u0, v0) = history_point(config);
    let opts = &config.simulate;
    let step = if config.params.s > 0.0 {
        config.params.s / opts.steps_per_delay as f64
    } else {
        1.0 / opts.steps_per_delay as f64
    };
    let mut out = SimulationOut {
        u0,
        v0,
        w0: opts.w0,
        t_end: opts.t_end,
        step,
        steps_per_delay: opts.steps_per_delay,
        transient_fraction: opts.transient_fraction,
        reference: "",
        classification: "Diverges",
        amplitude_u: None,
        amplitude_v: None,
        amplitude_w: None,
        period: None,
        fft_period: None,
        n_periods_measured: 0,
        diverged_at: None,
    };
    match outcome {
        Ok(traj) => {
            out.t_end = traj.t_end;
            let eq = reference_equilibrium(&config.params, &traj.last());
            out.reference = eq.label.as_str();
            let m: CycleMetrics<f64> =
                cycle_metrics(traj, &eq.point, opts.transient_fraction).expect("fraction validated by the config");
            out.classification = m.classification.as_str();
            out.amplitude_u = finite(m.amplitude[0]);
            out.amplitude_v = finite(m.amplitude[1]);
            out.amplitude_w = finite(m.amplitude[2]);
            out.period = m.period;
            out.fft_period = m.period.and_then(|_| fft_period(traj, opts.transient_fraction));
            out.n_periods_measured = m.n_periods_measured;
        }
        Err(time) => out.diverged_at = Some(*time),
    }
    out
}

/// Formats a number with 17 significant digits.
pub fn csv_number(x: f64) -> String {
    format!("{x:.16e}")
}

fn flatten(prefix: &str, value: &Value, rows: &mut Vec<(String, String)>) {
    let key = |k: &str| {
        if prefix.is_empty() {
            k.to_string()
        } else {
            format!("{prefix}.{k}")
        }
    };
    match value {
        Value::Object(map) => {
            for (k, v) in map {
                flatten(&key(k), v, rows);
            }
        }
        Value::Array(items) => {
            if items.is_empty() {
                rows.push((prefix.to_string(), String::new()));
            }
            for (i, v) in items.iter().enumerate() {
                flatten(&key(&i.to_string()), v, rows);
            }
        }
        Value::Null => rows.push((prefix.to_string(), String::new())),
        Value::Bool(b) => rows.push((prefix.to_string(), b.to_string())),
        Value::Number(n) => {
            let text = match (n.as_i64(), n.as_u64()) {
                (Some(i), _) => i.to_string(),
                (_, Some(u)) => u.to_string(),
                _ => csv_number(n.as_f64().expect("JSON number")),
            };
            rows.push((prefix.to_string(), text));
        }
        Value::String(s) => rows.push((prefix.to_string(), s.clone())),
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// `key,value` rows of the report flattened with dotted keys.
pub fn to_csv(report: &AnalysisReport) -> String {
    let value = serde_json::to_value(report).expect("report serializes");
    let mut rows = Vec::new();
    flatten("", &value, &mut rows);
    let mut out = String::from("key,value\n");
    for (k, v) in rows {
        out.push_str(&csv_field(&k));
        out.push(',');
        out.push_str(&csv_field(&v));
        out.push('\n');
    }
    out
}

pub fn to_json(report: &AnalysisReport) -> String {
    let mut text = serde_json::to_string_pretty(report).expect("report serializes");
    text.push('\n');
    text
}
