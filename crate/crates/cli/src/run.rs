//! Scenario runs, sweeps and their files.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use biphoton_core::biphoton::{
    coincidence_histogram, CoincidenceHistogram, HistogramSpec, HistogramWarning, Scenario,
    Simulation, TransformOptions,
};
use biphoton_core::medium::characteristic_scales;
use biphoton_core::phasematch::PhiVariant;
use biphoton_core::regimes::{report, RegimeLabel, RegimeReport};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{from_table, get_path, set_path, to_table, ScenarioConfig};
use crate::error::{CliError, Result};

/// Shortest round-trip decimal, scientific once the exponent leaves [−4, 4].
pub fn fmt_num(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let exp = x.abs().log10().floor() as i32;
    if exp.abs() > 4 {
        format!("{x:e}")
    } else {
        format!("{x}")
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub scenario: String,
    pub phi_variant: PhiVariant,
    pub conjugate_stokes: bool,
    pub grid_samples: usize,
    /// rad/s
    pub grid_span: f64,
    pub tau_step: f64,
    #[serde(flatten)]
    pub regime: RegimeReport,
    pub histogram_warnings: Vec<String>,
}

pub struct RunOutput {
    pub report: RunReport,
    pub simulation: Simulation,
    pub histogram: CoincidenceHistogram,
    pub files: Vec<PathBuf>,
}

/// Runs the pipeline without touching the filesystem.
pub fn simulate(cfg: &ScenarioConfig) -> Result<(Scenario, Simulation)> {
    let scenario = cfg.scenario()?;
    let overrides = cfg.grid_overrides()?;
    let sim = scenario.simulate(&overrides, &TransformOptions::default())?;
    Ok((scenario, sim))
}

pub fn evaluate(cfg: &ScenarioConfig) -> Result<RunOutput> {
    let (scenario, sim) = simulate(cfg)?;
    let regime = report(&scenario, &sim)?;
    let histogram = coincidence_histogram(&sim.waveform, &histogram_spec(cfg, &scenario, &sim)?)?;
    let report = RunReport {
        scenario: cfg.name.clone(),
        phi_variant: scenario.variant,
        conjugate_stokes: scenario.conjugate_stokes,
        grid_samples: sim.grid.len,
        grid_span: sim.grid.span(),
        tau_step: sim.waveform.grid.step,
        regime,
        histogram_warnings: histogram
            .warnings
            .iter()
            .map(|w| match w {
                HistogramWarning::BinTooWide { bin_width, limit } => format!(
                    "bin width {} s exceeds tau_e/10 = {} s",
                    fmt_num(*bin_width),
                    fmt_num(*limit)
                ),
            })
            .collect(),
    };
    Ok(RunOutput {
        report,
        simulation: sim,
        histogram,
        files: Vec::new(),
    })
}

fn histogram_spec(cfg: &ScenarioConfig, sc: &Scenario, sim: &Simulation) -> Result<HistogramSpec> {
    let s = characteristic_scales(&sc.medium, &sc.drive)?;
    let grid = sim.waveform.grid;
    let delay = if sc.variant == PhiVariant::Unity || !s.tau_g.is_finite() {
        0.0
    } else {
        s.tau_g
    };
    let h = &cfg.histogram;
    Ok(HistogramSpec {
        bin_width: h.bin_width.unwrap_or(s.tau_e / 20.0),
        start: h.start.unwrap_or((-2.0 * s.tau_e).max(grid.start)),
        end: h.end.unwrap_or((2.0 * delay + 10.0 * s.tau_e).min(grid.end())),
        floor: h.floor,
        coherence_time: Some(s.tau_e),
    })
}

pub fn waveform_csv(name: &str, out: &RunOutput) -> String {
    let w = &out.simulation.waveform;
    let mut s = String::with_capacity(w.grid.len * 64);
    let _ = writeln!(
        s,
        "# scenario={} phi_variant={} samples={} label={}",
        name, out.report.phi_variant, w.grid.len, out.report.regime.label
    );
    s.push_str("tau_s,re_psi,im_psi,g2\n");
    for (t, v) in w.grid.iter().zip(&w.values) {
        let _ = writeln!(
            s,
            "{},{},{},{}",
            fmt_num(t),
            fmt_num(v.re),
            fmt_num(v.im),
            fmt_num(v.norm_sqr())
        );
    }
    s
}

pub fn histogram_csv(h: &CoincidenceHistogram) -> String {
    let mut s = String::from("tau_bin_start_s,rate\n");
    for (e, r) in h.bin_edges.iter().zip(&h.counts_rate) {
        let _ = writeln!(s, "{},{}", fmt_num(*e), fmt_num(*r));
    }
    s
}

pub fn report_json(r: &RunReport) -> Result<String> {
    serde_json::to_string_pretty(r)
        .map(|mut s| {
            s.push('\n');
            s
        })
        .map_err(|e| CliError::Config(format!("cannot serialize report: {e}")))
}

fn write(path: PathBuf, body: &str) -> Result<PathBuf> {
    std::fs::write(&path, body).map_err(|e| CliError::io(&path, e))?;
    Ok(path)
}

fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))
}

/// Writes `<name>_waveform.csv`, `<name>_histogram.csv` and `<name>_regime.json`.
pub fn run_scenario(cfg: &ScenarioConfig, out_dir: &Path) -> Result<RunOutput> {
    let mut out = evaluate(cfg)?;
    ensure_dir(out_dir)?;
    let name = &cfg.name;
    out.files = vec![
        write(out_dir.join(format!("{name}_waveform.csv")), &waveform_csv(name, &out))?,
        write(out_dir.join(format!("{name}_histogram.csv")), &histogram_csv(&out.histogram))?,
        write(out_dir.join(format!("{name}_regime.json")), &report_json(&out.report)?)?,
    ];
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    /// The swept value as written in the config.
    pub value: String,
    pub pair_rate: f64,
    pub label: RegimeLabel,
    pub correlation_width: f64,
}

pub struct SweepOutput {
    pub rows: Vec<SweepRow>,
    pub file: PathBuf,
}

fn value_text(v: &toml::Value) -> String {
    match v {
        toml::Value::String(s) => s.clone(),
        toml::Value::Float(f) => fmt_num(*f),
        other => other.to_string(),
    }
}

/// One configuration per sweep value; an empty or missing list runs the
/// base configuration once.
pub fn sweep_configs(cfg: &ScenarioConfig) -> Result<Vec<(String, ScenarioConfig)>> {
    let mut base = to_table(cfg)?;
    base.remove("sweep");
    let Some(sweep) = &cfg.sweep else {
        return Ok(vec![("base".into(), from_table(base)?)]);
    };
    let key = sweep.parameter.as_str();
    if sweep.values.is_empty() {
        let current = get_path(&base, key)
            .map(value_text)
            .ok_or_else(|| CliError::Config(format!("sweep.parameter: '{key}' is not set")))?;
        return Ok(vec![(current, from_table(base)?)]);
    }
    sweep
        .values
        .iter()
        .enumerate()
        .map(|(i, v)| {
            let mut t = base.clone();
            set_path(&mut t, key, v.clone())?;
            let c = from_table(t)
                .map_err(|e| CliError::Config(format!("sweep.values[{i}]: {e}")))?;
            Ok((value_text(v), c))
        })
        .collect()
}

/// Runs every sweep point in parallel and writes `<name>_sweep.csv` with
/// rows in input order.
pub fn run_sweep(cfg: &ScenarioConfig, out_dir: &Path) -> Result<SweepOutput> {
    let points = sweep_configs(cfg)?;
    let rows = points
        .par_iter()
        .map(|(value, c)| {
            let (scenario, sim) = simulate(c)?;
            let r = report(&scenario, &sim)?;
            Ok(SweepRow {
                value: value.clone(),
                pair_rate: r.pair_rate.temporal,
                label: r.label,
                correlation_width: r.correlation_width,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    ensure_dir(out_dir)?;
    let param = cfg
        .sweep
        .as_ref()
        .map(|s| s.parameter.as_str())
        .unwrap_or("value");
    let mut body = format!("# scenario={} parameter={param}\n", cfg.name);
    body.push_str("value,pair_rate,label,correlation_width_s\n");
    for r in &rows {
        let _ = writeln!(
            body,
            "{},{},{},{}",
            r.value,
            fmt_num(r.pair_rate),
            r.label,
            fmt_num(r.correlation_width)
        );
    }
    let file = write(out_dir.join(format!("{}_sweep.csv", cfg.name)), &body)?;
    Ok(SweepOutput { rows, file })
}
