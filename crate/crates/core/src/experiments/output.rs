//! CSV and JSON writers. Every file starts with the resolved parameters,
//! seed and artifact version.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::experiments::config::registry_version;
use crate::experiments::run::{ExperimentOutput, SweepResult};
use crate::floquet::QuasienergySpectrum;
use crate::record::{TrajectoryRecord, ARTIFACT_VERSION};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn parse(s: &str) -> Result<Format> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            _ => Err(Error::config("format", format!("unknown format `{s}`"))),
        }
    }

    fn ext(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

#[derive(Serialize)]
struct Meta<'a> {
    experiment: &'a str,
    version: &'a str,
    registry: String,
    seed: u64,
    model: crate::model::ModelKind,
    params: &'a crate::hamiltonians::PhysParams,
    t_a_us: f64,
    t_b_us: f64,
    noise: &'a crate::noise::NoisePlan,
    ensemble: u32,
}

fn meta(out: &ExperimentOutput) -> Meta<'_> {
    let s = &out.spec;
    Meta {
        experiment: &s.name,
        version: ARTIFACT_VERSION,
        registry: registry_version(),
        seed: s.noise.seed,
        model: s.model,
        params: &s.params,
        t_a_us: s.params.t_a(),
        t_b_us: s.params.t_b(),
        noise: &s.noise,
        ensemble: s.ensemble,
    }
}

fn header_lines(out: &ExperimentOutput) -> Result<String> {
    let m = meta(out);
    let p = m.params;
    let mut h = String::new();
    let mut line = |k: &str, v: String| {
        let _ = writeln!(h, "# {k} = {v}");
    };
    line("experiment", m.experiment.to_string());
    line("version", m.version.to_string());
    line("registry", m.registry.clone());
    line("seed", m.seed.to_string());
    line("model", serde_json::to_string(&m.model)?.trim_matches('"').to_string());
    line("omega_rad_per_us", p.omega.to_string());
    line("omega_ryd_rad_per_us", p.omega_ryd.to_string());
    line("u_rr_rad_per_us", p.u_rr.to_string());
    line("gamma_per_us", p.gamma.to_string());
    line("atoms", p.atom_count.to_string());
    line("cycles", p.cycles.to_string());
    line("detuning_e_rad_per_us", p.detuning_e.to_string());
    line("detuning_r_rad_per_us", p.detuning_r.to_string());
    line("phase_rad", p.phase.to_string());
    line("t_a_us", m.t_a_us.to_string());
    line("t_b_us", m.t_b_us.to_string());
    line("ensemble", m.ensemble.to_string());
    line("noise", serde_json::to_string(m.noise)?);
    for (k, v) in &out.summary {
        line(&format!("summary.{k}"), v.to_string());
    }
    Ok(h)
}

fn summary_json(out: &ExperimentOutput) -> Value {
    Value::Object(out.summary.iter().map(|(k, v)| (k.clone(), json!(v))).collect())
}

pub fn trajectory_csv(out: &ExperimentOutput, rec: &TrajectoryRecord) -> Result<String> {
    let mut s = header_lines(out)?;
    let mut cols = vec!["time_us".to_string(), "cycle".into(), "fidelity".into()];
    cols.extend(rec.populations.iter().map(|(l, _)| format!("pop_{l}")));
    if rec.g2.is_some() {
        cols.push("g2".into());
    }
    s.push_str(&cols.join(","));
    s.push('\n');
    for i in 0..rec.len() {
        let mut row = vec![rec.times[i].to_string(), rec.cycles[i].to_string(), rec.fidelities[i].to_string()];
        row.extend(rec.populations.iter().map(|(_, v)| v[i].to_string()));
        if let Some(g) = &rec.g2 {
            row.push(g[i].map(|x| x.to_string()).unwrap_or_default());
        }
        s.push_str(&row.join(","));
        s.push('\n');
    }
    Ok(s)
}

pub fn sweep_csv(out: &ExperimentOutput, sweep: &SweepResult) -> Result<String> {
    let mut s = header_lines(out)?;
    let mut cols = vec!["urr_over_omega".to_string()];
    cols.extend(sweep.cycles.iter().map(|n| n.to_string()));
    s.push_str(&cols.join(","));
    s.push('\n');
    for (u, row) in sweep.urr_over_omega.iter().zip(&sweep.fidelity) {
        let mut r = vec![u.to_string()];
        r.extend(row.iter().map(|f| f.to_string()));
        s.push_str(&r.join(","));
        s.push('\n');
    }
    Ok(s)
}

pub fn spectrum_csv(out: &ExperimentOutput, spec: &QuasienergySpectrum) -> Result<String> {
    let mut s = header_lines(out)?;
    let mut cols = vec![spec.axis.clone(), "period_us".into(), "branch".into(), "quasienergy".into()];
    cols.extend(spec.labels.iter().map(|l| format!("abs_{l}")));
    s.push_str(&cols.join(","));
    s.push('\n');
    for (k, value) in spec.values.iter().enumerate() {
        for b in &spec.branches {
            let mut r = vec![
                value.to_string(),
                spec.periods[k].to_string(),
                b.name.clone(),
                b.quasienergies[k].to_string(),
            ];
            r.extend(b.compositions[k].iter().map(|z| z.norm().to_string()));
            s.push_str(&r.join(","));
            s.push('\n');
        }
    }
    Ok(s)
}

fn json_doc(out: &ExperimentOutput, key: &str, body: Value) -> Result<String> {
    let doc = json!({
        "meta": meta(out),
        "summary": summary_json(out),
        key: body,
    });
    let mut s = serde_json::to_string_pretty(&doc)?;
    s.push('\n');
    Ok(s)
}

/// Write every artifact in `out`; returns the paths written.
pub fn write_outputs(out: &ExperimentOutput, dir: &Path, format: Format) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let name = &out.spec.name;
    let mut files: Vec<(String, String)> = Vec::new();
    for (suffix, rec) in &out.trajectories {
        let stem = if suffix.is_empty() { name.clone() } else { format!("{name}_{suffix}") };
        let body = match format {
            Format::Csv => trajectory_csv(out, rec)?,
            Format::Json => json_doc(out, "trajectory", serde_json::to_value(rec)?)?,
        };
        files.push((stem, body));
    }
    if let Some(sw) = &out.sweep {
        let body = match format {
            Format::Csv => sweep_csv(out, sw)?,
            Format::Json => json_doc(out, "sweep", serde_json::to_value(sw)?)?,
        };
        files.push((format!("{name}_sweep"), body));
    }
    if let Some(sp) = &out.spectrum {
        let body = match format {
            Format::Csv => spectrum_csv(out, sp)?,
            Format::Json => json_doc(out, "spectrum", serde_json::to_value(sp)?)?,
        };
        files.push((format!("{name}_spectrum"), body));
    }
    let mut paths = Vec::new();
    for (stem, body) in files {
        let path = dir.join(format!("{stem}.{}", format.ext()));
        std::fs::write(&path, body)?;
        paths.push(path);
    }
    Ok(paths)
}
