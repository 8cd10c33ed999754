use std::fs;

use floquet_rydberg::error::Error;
use floquet_rydberg::experiments::output::trajectory_csv;
use floquet_rydberg::experiments::*;
use floquet_rydberg::hamiltonians::PhysParams;

const MINIMAL: &str = "omega_mhz = 1\nomega_ryd_mhz = 5\nurr_over_omega_ryd = 45\natoms = 2\ncycles = 20\n";

fn config_key(e: Error) -> String {
    match e {
        Error::Config { key, msg } => format!("{key}: {msg}"),
        other => panic!("expected a config error, got {other}"),
    }
}

#[test]
fn minimal_config_gives_reference_params() {
    let spec = parse_config(MINIMAL, None).unwrap();
    let r = PhysParams::reference();
    assert!((spec.params.omega - r.omega).abs() < 1e-12);
    assert!((spec.params.omega_ryd - r.omega_ryd).abs() < 1e-12);
    assert!((spec.params.u_rr - r.u_rr).abs() < 1e-9);
    assert_eq!(spec.params.atom_count, 2);
    assert_eq!(spec.params.cycles, 20);
    assert_eq!(spec.name, "custom");
}

#[test]
fn config_errors() {
    assert!(config_key(parse_config("", None).unwrap_err()).contains("required"));
    let msg = config_key(parse_config(&format!("{MINIMAL}bogus = 1\n"), None).unwrap_err());
    assert!(msg.starts_with("bogus"));
    let msg = config_key(parse_config(&format!("{MINIMAL}atoms = 3\n"), None).unwrap_err());
    assert!(msg.contains("atoms"), "{msg}");
    let msg = config_key(parse_config(&format!("{MINIMAL}urr_over_omega = 45\n"), None).unwrap_err());
    assert!(msg.contains("urr_over_omega"), "{msg}");
    let msg = config_key(parse_config(&MINIMAL.replace("omega_mhz = 1", "omega_khz = 1000"), None).unwrap_err());
    assert!(msg.contains("omega_khz") && msg.contains("omega_mhz"), "{msg}");
    let msg = config_key(parse_config(&MINIMAL.replace("atoms = 2", "atoms = \"two\""), None).unwrap_err());
    assert!(msg.starts_with("atoms"));
    assert!(parse_config(&format!("{MINIMAL}mode = \"sideways\"\n"), None).is_err());
    assert!(parse_config(&format!("{MINIMAL}experiment = \"nope\"\n"), None).is_err());
    assert!(parse_config(&MINIMAL.replace("omega_mhz = 1", "omega_mhz = 0"), None).is_err());
    let e = parse_config(&format!("{MINIMAL}experiment = \"fig2d\"\n"), Some("fig3")).unwrap_err();
    assert!(e.is_config());
}

#[test]
fn registry_entries_parse() {
    let names = registry_names();
    for want in ["fig2d", "fig3", "fig4a", "fig6", "custom"] {
        assert!(names.iter().any(|n| n == want), "{want}");
    }
    for n in names.iter().filter(|n| *n != "custom") {
        registry_spec(n).unwrap_or_else(|e| panic!("{n}: {e}"));
    }
    assert!(matches!(registry_spec("fig99"), Err(Error::UnknownExperiment(_))));
    let overlay = parse_config("experiment = \"fig2d\"\ncycles = 30\n", None).unwrap();
    assert_eq!(overlay.params.cycles, 30);
    assert_eq!(overlay.populations, registry_spec("fig2d").unwrap().populations);
}

#[test]
fn load_from_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("c.toml");
    fs::write(&path, MINIMAL).unwrap();
    assert_eq!(load_config(&path, None).unwrap(), parse_config(MINIMAL, None).unwrap());
    assert!(load_config(&dir.path().join("missing.toml"), None).is_err());
}

#[test]
fn zero_cycles_trivial_trajectory() {
    let spec = parse_config("omega_mhz = 1\nomega_ryd_mhz = 5\nurr_over_omega = 45\natoms = 3\ncycles = 0\n", None).unwrap();
    let out = run_experiment(&spec, 1).unwrap();
    let rec = &out.trajectories[0].1;
    assert_eq!(rec.len(), 1);
    assert_eq!(rec.fidelities, [0.0]);
    let dir = tempfile::tempdir().unwrap();
    let files = write_outputs(&out, dir.path(), Format::Csv).unwrap();
    let text = fs::read_to_string(&files[0]).unwrap();
    let rows: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows.len(), 2);
}

#[test]
fn csv_header_carries_meta() {
    let spec = registry_spec("fig2d").unwrap();
    let out = run_experiment(&spec, 1).unwrap();
    let csv = trajectory_csv(&out, &out.trajectories[0].1).unwrap();
    for key in ["# experiment = fig2d", "# version = ", "# seed = ", "# t_a_us = ", "# t_b_us = ", "# omega_rad_per_us = "] {
        assert!(csv.contains(key), "{key}");
    }
    let header = csv.lines().find(|l| !l.starts_with('#')).unwrap();
    assert!(header.starts_with("time_us,cycle,fidelity,pop_gg"));
    let last = csv.lines().last().unwrap();
    let f: f64 = last.split(',').nth(2).unwrap().parse().unwrap();
    assert!(f > 0.99);

    let json = write_outputs(&out, tempfile::tempdir().unwrap().path(), Format::Json).unwrap();
    assert_eq!(json.len(), 1);
}

fn run_to_bytes(spec: &ExperimentSpec, workers: usize) -> Vec<(String, Vec<u8>)> {
    let dir = tempfile::tempdir().unwrap();
    let out = run_experiment(spec, workers).unwrap();
    let mut files = Vec::new();
    for fmt in [Format::Csv, Format::Json] {
        for p in write_outputs(&out, dir.path(), fmt).unwrap() {
            files.push((p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap()));
        }
    }
    files
}

#[test]
fn reruns_and_worker_counts_identical() {
    let noisy = parse_config(
        "mode = \"master\"\nomega_mhz = 1\nomega_ryd_mhz = 5\nurr_over_omega = 45\natoms = 2\ncycles = 4\n\
         gamma_khz = 1\nseed = 11\nensemble = 3\nurr_disorder_low_mhz = 0\nurr_disorder_high_mhz = 200\nrabi_eps_max = 0.01\n",
        None,
    )
    .unwrap();
    let a = run_to_bytes(&noisy, 1);
    assert_eq!(a, run_to_bytes(&noisy, 1));
    assert_eq!(a, run_to_bytes(&noisy, 2));

    let sweep = parse_config(
        "mode = \"none\"\nomega_mhz = 1\nomega_ryd_mhz = 5\nurr_over_omega = 45\natoms = 2\ncycles = 20\n\
         sweep_urr_min = 0.5\nsweep_urr_max = 2\nsweep_urr_points = 4\nsweep_cycles_min = 5\nsweep_cycles_max = 8\n",
        None,
    )
    .unwrap();
    let a = run_to_bytes(&sweep, 1);
    assert_eq!(a, run_to_bytes(&sweep, 3));
}

#[test]
fn sweep_points_match_single_runs() {
    let spec = parse_config(
        "mode = \"none\"\nomega_mhz = 1\nomega_ryd_mhz = 5\nurr_over_omega = 45\natoms = 2\ncycles = 20\n\
         sweep_urr_min = 1.0\nsweep_urr_max = 1.0\nsweep_urr_points = 1\nsweep_cycles_min = 10\nsweep_cycles_max = 11\n",
        None,
    )
    .unwrap();
    let sw = run_sweep(&spec, spec.sweep.as_ref().unwrap(), 2).unwrap();
    assert_eq!(sw.fidelity.len(), 1);
    assert_eq!(sw.fidelity[0].len(), 2);
    for (j, n) in [10u32, 11].into_iter().enumerate() {
        let single = parse_config(
            &format!("omega_mhz = 1\nomega_ryd_mhz = 5\nurr_over_omega = 1.0\natoms = 2\ncycles = {n}\n"),
            None,
        )
        .unwrap();
        let f = run_experiment(&single, 1).unwrap().summary[0].1;
        assert!((sw.fidelity[0][j] - f).abs() < 1e-12);
    }
    let empty = SweepGrid { urr_over_omega: vec![], cycles: vec![5] };
    assert!(matches!(run_sweep(&spec, &empty, 1), Err(Error::EmptyGrid)));
}
