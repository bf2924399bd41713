use std::process::{Command, Output};

use rabi_spectra::spectrum::{full_spectrum, SpectrumConfig};
use rabi_spectra::{Parity, RabiParams};

fn rabi(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rabi")).args(args).env_remove("RABI_PRECISION_BITS").output().unwrap()
}

fn stdout(o: &Output) -> String {
    assert!(o.status.success(), "stderr: {}", String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn column(csv_text: &str, name: &str) -> Vec<String> {
    let mut r = csv::Reader::from_reader(csv_text.as_bytes());
    let idx = r.headers().unwrap().iter().position(|h| h == name).unwrap();
    r.records().map(|rec| rec.unwrap()[idx].to_string()).collect()
}

const SPECTRUM: [&str; 7] = ["rabi-spectrum", "--g", "1", "--delta", "0.4", "--xmax", "6"];

#[test]
fn spectrum_csv_schema() {
    let out = stdout(&rabi(&SPECTRUM));
    assert_eq!(out.lines().next().unwrap(), "x,E,parity,class,degeneracy,residual,method");
    let energies = column(&out, "E");
    assert_eq!(energies.len(), 13);
    // 17 significant digits
    assert!(energies.iter().all(|e| e.split('e').next().unwrap().trim_start_matches('-').len() == 18));
}

#[test]
fn json_round_trips_bit_for_bit() {
    let mut args = SPECTRUM.to_vec();
    args.extend(["--format", "json"]);
    let json: serde_json::Value = serde_json::from_str(&stdout(&rabi(&args))).unwrap();
    let rows = json.as_array().unwrap();
    let p = RabiParams::new(1.0, 0.4, Parity::Even).unwrap();
    let lib = full_spectrum(&p, 6.0, &SpectrumConfig::default()).unwrap();
    assert_eq!(rows.len(), lib.lines.len());
    for (row, line) in rows.iter().zip(&lib.lines) {
        assert_eq!(row["E"].as_f64().unwrap().to_bits(), line.energy.to_bits());
        assert_eq!(row["x"].as_f64().unwrap().to_bits(), line.x.to_bits());
        assert_eq!(row["parity"], line.sector.as_str());
    }
    // and the CSV carries the same bits
    let csv_e: Vec<f64> = column(&stdout(&rabi(&SPECTRUM)), "E").iter().map(|s| s.parse().unwrap()).collect();
    for (a, line) in csv_e.iter().zip(&lib.lines) {
        assert_eq!(a.to_bits(), line.energy.to_bits());
    }
}

#[test]
fn repeated_runs_write_identical_files() {
    let dir = tempfile::tempdir().unwrap();
    for cmd in [
        &SPECTRUM[..],
        &["census", "--g", "0.5:0.5:1", "--delta", "0.4:0.4:0.8", "--xmax", "5"][..],
        &["dicke3-sweep", "--g", "0.2:0.2:0.6", "--delta", "0.7", "--levels", "3"][..],
    ] {
        let mut files = Vec::new();
        for k in 0..2 {
            let path = dir.path().join(format!("{}-{k}.json", cmd[0]));
            let mut args = cmd.to_vec();
            let p = path.to_str().unwrap().to_string();
            args.extend(["--format", "json", "--output", &p]);
            stdout(&rabi(&args));
            files.push(std::fs::read(&path).unwrap());
        }
        assert!(!files[0].is_empty());
        assert_eq!(files[0], files[1], "{} output differs between runs", cmd[0]);
    }
}

#[test]
fn omega_rescales_energies() {
    let unit: Vec<f64> = column(&stdout(&rabi(&SPECTRUM)), "E").iter().map(|s| s.parse().unwrap()).collect();
    let scaled = rabi(&["rabi-spectrum", "--g", "2", "--delta", "0.8", "--omega", "2", "--xmax", "6"]);
    let scaled: Vec<f64> = column(&stdout(&scaled), "E").iter().map(|s| s.parse().unwrap()).collect();
    assert_eq!(unit.len(), scaled.len());
    for (a, b) in unit.iter().zip(&scaled) {
        assert!((2.0 * a - b).abs() < 1e-12, "{a} vs {b}");
    }
}

#[test]
fn trace_sign_changes_match_spectrum() {
    let trace = stdout(&rabi(&["gfunction-trace", "--g", "1", "--delta", "0.4", "--xmin", "0", "--xmax", "6", "--samples", "1200"]));
    let spectrum = stdout(&rabi(&SPECTRUM));
    let xs: Vec<f64> = column(&spectrum, "x").iter().map(|s| s.parse().unwrap()).collect();
    let parities = column(&spectrum, "parity");
    for (col, parity) in [("G_plus", "even"), ("G_minus", "odd")] {
        let values: Vec<Option<f64>> = column(&trace, col).iter().map(|s| s.parse().ok()).collect();
        // sign changes away from the poles (which are left empty)
        let changes = values
            .windows(2)
            .filter(|w| matches!(w, [Some(a), Some(b)] if a * b < 0.0))
            .count();
        // roots within one sample of a pole have no finite neighbour there
        let h = 6.0 / 1200.0;
        let expected = xs
            .iter()
            .zip(&parities)
            .filter(|(x, p)| (**x - x.round()).abs() > h && **x > 0.0 && p.as_str() == parity)
            .count();
        assert_eq!(changes, expected, "{col}");
    }
}

#[test]
fn verify_reports_and_fails_on_tight_tolerance() {
    let ok = stdout(&rabi(&["verify", "--g", "1", "--delta", "0.4"]));
    assert_eq!(column(&ok, "status"), vec!["pass"; 3]);
    let tight = rabi(&["verify", "--g", "1", "--delta", "0.4", "--tol", "1e-30"]);
    assert_eq!(tight.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&tight.stdout).contains("fail"));
}

#[test]
fn invalid_configuration_exits_with_two() {
    for args in [
        &["rabi-spectrum", "--g", "1", "--delta", "0.4", "--xmax", "-1"][..],
        &["rabi-spectrum", "--g", "1", "--delta", "0.4"][..],
        &["census", "--g", "1:0:2", "--delta", "0.5", "--xmax", "3"][..],
        &["rabi-spectrum", "--g", "1", "--delta", "0.4", "--xmax", "3", "--omega", "0"][..],
        &["census", "--g", "1", "--delta", "0", "--xmax", "3"][..],
    ] {
        let o = rabi(args);
        assert_eq!(o.status.code(), Some(2), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    }
}

#[test]
fn precision_from_environment() {
    let run = |bits: &str| {
        Command::new(env!("CARGO_BIN_EXE_rabi")).args(SPECTRUM).env("RABI_PRECISION_BITS", bits).output().unwrap()
    };
    assert_eq!(run("12").status.code(), Some(2));
    assert_eq!(run("many").status.code(), Some(2));
    let hi: Vec<f64> = column(&stdout(&run("128")), "E").iter().map(|s| s.parse().unwrap()).collect();
    let lo: Vec<f64> = column(&stdout(&rabi(&SPECTRUM)), "E").iter().map(|s| s.parse().unwrap()).collect();
    assert_eq!(hi.len(), lo.len());
    for (a, b) in hi.iter().zip(&lo) {
        assert!((a - b).abs() < 1e-11, "{a} vs {b}");
    }
}
