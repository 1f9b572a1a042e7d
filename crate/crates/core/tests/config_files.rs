use std::path::Path;

use cylscale::io::mtx::{parse_matrix_market, to_matrix_market};
use cylscale::io::RunConfig;

fn files(dir: &str) -> Vec<std::path::PathBuf> {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("../..").join(dir);
    let mut v: Vec<_> = std::fs::read_dir(root).unwrap().map(|e| e.unwrap().path()).collect();
    v.sort();
    v
}

#[test]
fn shipped_configs_load_and_round_trip() {
    let paths = files("configs");
    assert!(paths.len() >= 3);
    for p in paths {
        let cfg = RunConfig::load(&p).unwrap_or_else(|e| panic!("{}: {e}", p.display()));
        assert_eq!(RunConfig::from_json(&cfg.to_json().unwrap()).unwrap(), cfg);
    }
}

#[test]
fn fuzz_seeds_satisfy_target_properties() {
    let mut accepted = 0;
    for p in files("fuzz/corpus/config_json") {
        if let Ok(cfg) = RunConfig::from_json(&std::fs::read_to_string(&p).unwrap()) {
            assert_eq!(RunConfig::from_json(&cfg.to_json().unwrap()).unwrap(), cfg);
            accepted += 1;
        }
    }
    assert!(accepted >= 3);
    for p in files("fuzz/corpus/matrix_market") {
        let a = parse_matrix_market(&std::fs::read_to_string(&p).unwrap()).unwrap();
        assert_eq!(parse_matrix_market(&to_matrix_market(&a, None)).unwrap(), a, "{}", p.display());
    }
}
