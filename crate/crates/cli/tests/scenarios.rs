//! Every bundled scenario runs and matches its committed expected output.
//! Set `PLURINORM_BLESS=1` to rewrite the expected files.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command as Process;

use plurinorm_cli::{run, Command, Overrides, Status};

const CASES: &[(&str, &[Command])] = &[
    ("blowup_chain", &[Command::Lct, Command::Indicatrix]),
    ("bounds_general", &[Command::Bounds]),
    ("bounds_surface", &[Command::Bounds]),
    ("cover_n1", &[Command::PsiSweep, Command::Fit, Command::Lct, Command::Pseudonorm]),
    ("cusp", &[Command::Lct, Command::Indicatrix]),
    ("double_lines", &[Command::Lct, Command::Indicatrix]),
    ("psi_n1", &[Command::PsiSweep, Command::Fit, Command::Lct]),
    ("psi_n1_case1", &[Command::PsiSweep, Command::Fit]),
    ("semigroup", &[Command::Semigroup]),
    ("suite", &[Command::Suite]),
    ("two_lines", &[Command::Lct, Command::Indicatrix]),
];

fn scenarios() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios")
}

fn check_expected(path: &Path, actual: &str) {
    if std::env::var_os("PLURINORM_BLESS").is_some() {
        fs::write(path, actual).unwrap();
        return;
    }
    let expected = fs::read_to_string(path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    assert!(expected == actual, "{} differs from the current output:\n{actual}", path.display());
}

#[test]
fn bundled_scenarios_match_expected_outputs() {
    let dir = scenarios();
    let mut covered = Vec::new();
    for (stem, commands) in CASES {
        let text = fs::read_to_string(dir.join(format!("{stem}.toml"))).unwrap();
        for &command in *commands {
            let report = run(command, &text, &Overrides::default()).unwrap();
            assert_eq!(report.status, Status::Ok, "{stem} {}", command.as_str());
            let expected = |ext: &str| dir.join("expected").join(format!("{stem}.{}.{ext}", command.as_str()));
            check_expected(&expected("json"), &report.json);
            check_expected(&expected("csv"), &report.csv);
        }
        covered.push(stem.to_string());
    }
    // every top-level scenario is listed above
    let mut on_disk: Vec<String> = fs::read_dir(&dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "toml"))
        .map(|p| p.file_stem().unwrap().to_string_lossy().into_owned())
        .collect();
    on_disk.sort();
    assert_eq!(on_disk, covered);
}

#[test]
fn repeated_runs_are_byte_identical() {
    let dir = scenarios();
    for (stem, command) in [("psi_n1", Command::PsiSweep), ("cover_n1", Command::Pseudonorm), ("suite", Command::Suite)] {
        let text = fs::read_to_string(dir.join(format!("{stem}.toml"))).unwrap();
        let a = run(command, &text, &Overrides::default()).unwrap();
        let b = run(command, &text, &Overrides::default()).unwrap();
        assert_eq!(a, b, "{stem}");
    }
}

#[test]
fn thread_count_does_not_change_output() {
    for (stem, command) in [("cover_n1", "psi-sweep"), ("cover_n1", "pseudonorm")] {
        let scenario = path(&format!("{stem}.toml"));
        let outputs: Vec<String> = ["1", "4"]
            .iter()
            .map(|k| {
                let (code, stdout, _) = binary(&[command, "--scenario", &scenario, "--threads", k]);
                assert_eq!(code, 0, "{stem} {command} with {k} threads");
                stdout
            })
            .collect();
        assert_eq!(outputs[0], outputs[1], "{stem} {command}");
    }
}

#[test]
fn every_command_declares_a_schema_id() {
    let text = fs::read_to_string(scenarios().join("bounds_surface.toml")).unwrap();
    let report = run(Command::Bounds, &text, &Overrides::default()).unwrap();
    assert!(report.json.contains("\"schema\": \"plurinorm.bounds/v1\""));
    assert!(report.csv.starts_with("# plurinorm.bounds/v1\n"));
    for c in Command::ALL {
        assert_eq!(c.schema(), format!("plurinorm.{}/v1", c.as_str()));
    }
}

fn binary(args: &[&str]) -> (i32, String, String) {
    let out = Process::new(env!("CARGO_BIN_EXE_plurinorm")).args(args).output().unwrap();
    (
        out.status.code().unwrap(),
        String::from_utf8(out.stdout).unwrap(),
        String::from_utf8(out.stderr).unwrap(),
    )
}

fn path(rel: &str) -> String {
    scenarios().join(rel).to_string_lossy().into_owned()
}

#[test]
fn exit_codes() {
    let (code, stdout, _) = binary(&["semigroup", "--scenario", &path("semigroup.toml"), "--threads", "1"]);
    assert_eq!(code, 0);
    assert!(stdout.contains("\"conductor\": 75"));

    let (code, _, stderr) = binary(&["lct", "--scenario", &path("invalid/bad_term.toml")]);
    assert_eq!(code, 2);
    assert!(stderr.contains("integrand.phi[1]") && stderr.contains("line 9"), "{stderr}");
    let (code, _, stderr) = binary(&["semigroup", "--scenario", &path("invalid/unknown_key.toml")]);
    assert_eq!(code, 2);
    assert!(stderr.contains("lmit") && stderr.contains("line 4"), "{stderr}");
    let (code, _, _) = binary(&["indicatrix", "--scenario", &path("invalid/bad_stratum.toml")]);
    assert_eq!(code, 2);
    let (code, _, _) = binary(&["bounds", "--scenario", &path("cusp.toml")]);
    assert_eq!(code, 2);
    let (code, _, _) = binary(&["fit", "--scenario", &path("psi_n1.toml"), "--rel-tol", "0"]);
    assert_eq!(code, 2);
    let (code, _, _) = binary(&["fit", "--scenario", &path("missing.toml")]);
    assert_eq!(code, 2);
    let (code, _, _) = binary(&["fit", "--scenario", &path("psi_n1.toml"), "--format", "xml"]);
    assert_eq!(code, 2);

    let (code, stdout, _) = binary(&["fit", "--scenario", &path("psi_n1.toml"), "--max-depth", "2", "--format", "csv"]);
    assert_eq!(code, 3);
    assert!(stdout.starts_with("# plurinorm.fit/v1"));

    let (code, stdout, _) = binary(&["lct", "--scenario", &path("violations/failing_audit.toml")]);
    assert_eq!(code, 4);
    assert!(stdout.contains("\"holds\": false"));
}

#[test]
fn out_directory_gets_both_formats() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_string_lossy().into_owned();
    let (code, _, _) = binary(&["indicatrix", "--scenario", &path("cusp.toml"), "--out", &out]);
    assert_eq!(code, 0);
    let json = fs::read_to_string(dir.path().join("cusp.indicatrix.json")).unwrap();
    let csv = fs::read_to_string(dir.path().join("cusp.indicatrix.csv")).unwrap();
    assert_eq!(json, fs::read_to_string(path("expected/cusp.indicatrix.json")).unwrap());
    assert_eq!(csv, fs::read_to_string(path("expected/cusp.indicatrix.csv")).unwrap());

    let (code, stdout, _) = binary(&["indicatrix", "--scenario", &path("cusp.toml"), "--format", "csv"]);
    assert_eq!(code, 0);
    assert_eq!(stdout, csv);
}

#[test]
fn sweep_csv_reads_back() {
    let text = fs::read_to_string(path("expected/psi_n1.psi-sweep.csv")).unwrap();
    let samples = plurinorm::asymptotics::PsiSamples::read_csv(text.as_bytes()).unwrap();
    assert_eq!(samples.len(), 8);
    let fit = plurinorm::asymptotics::fit_expansion(&samples, &[0, 1]).unwrap();
    assert!((fit.alpha_hat - 0.65).abs() < 0.013);
}
