//! Replays the checked-in fuzz seeds through the fuzzed entry points, so the
//! seeds stay meaningful when the formats change.

use std::fs;
use std::path::{Path, PathBuf};

use plurinorm::asymptotics::PsiSamples;
use plurinorm::rational::ExtRational;
use plurinorm::scenario::parse_scenario;

fn seeds(target: &str) -> Vec<PathBuf> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fuzz/corpus").join(target);
    let mut files: Vec<PathBuf> = fs::read_dir(&dir)
        .unwrap_or_else(|e| panic!("{}: {e}", dir.display()))
        .map(|e| e.unwrap().path())
        .collect();
    files.sort();
    assert!(!files.is_empty(), "no seeds for {target}");
    files
}

#[test]
fn scenario_seeds() {
    let mut accepted = 0;
    for path in seeds("parse_scenario") {
        let text = fs::read_to_string(&path).unwrap();
        let name = path.file_name().unwrap().to_string_lossy().into_owned();
        let ok = parse_scenario(&text).is_ok();
        // seeds copied from the invalid scenarios must stay invalid
        assert_eq!(ok, !name.starts_with("invalid_"), "{name}");
        accepted += usize::from(ok);
    }
    assert!(accepted >= 10);
}

#[test]
fn samples_seeds() {
    for path in seeds("samples_csv") {
        let s = PsiSamples::read_csv(fs::File::open(&path).unwrap())
            .unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        assert!(s.len() >= 2);
    }
}

#[test]
fn rational_seeds() {
    for path in seeds("ext_rational") {
        let text = fs::read_to_string(&path).unwrap();
        let x: ExtRational = text.parse().unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        assert_eq!(x.to_string().parse::<ExtRational>(), Ok(x));
    }
}
