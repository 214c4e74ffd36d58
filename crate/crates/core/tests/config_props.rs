mod common;

use std::path::PathBuf;

use biot_core::cli::{parse_config, render_config, Mode, RunConfig};
use proptest::prelude::*;

fn config() -> impl Strategy<Value = RunConfig> {
    (
        (prop::sample::select(Mode::ALL.to_vec()), 1..=6usize, 0..=1usize, 2..=8usize),
        (1e-3..10.0f64, 1..1000usize, 1..=64usize, any::<u64>(), any::<bool>()),
        (common::params(0), prop::option::of(0.1..100.0f64), 0.1..10.0f64, "[a-z][a-z0-9_/]{0,12}"),
    )
        .prop_map(|((mode, k, ell, levels), (t_final, slabs, mesh, seed, snapshots), (params, eta, omega, out))| {
            RunConfig {
                mode,
                k,
                ell,
                levels,
                t_final,
                slabs,
                mesh,
                seed,
                out: PathBuf::from(out),
                snapshots,
                params,
                eta,
                omega,
                ..RunConfig::default()
            }
        })
}

proptest! {
    #[test]
    fn render_parse_round_trip(c in config()) {
        prop_assume!(c.validate().is_ok());
        let back = parse_config(&render_config(&c)).unwrap();
        prop_assert_eq!(back, c);
    }

    #[test]
    fn parser_never_panics(text in "\\PC{0,200}") {
        let _ = parse_config(&text);
    }

    #[test]
    fn parser_never_panics_on_near_miss(lines in prop::collection::vec(
        prop_oneof![
            Just("[run]".to_string()),
            Just("[physics]".to_string()),
            Just("[mms]".to_string()),
            "(k|ell|levels|slabs|mesh|seed|alpha|phi0|eta|mode|t_final|omega) *= *[-0-9a-z.e+]{0,8}",
            "#.{0,10}",
        ],
        0..12,
    )) {
        let text = lines.join("\n");
        if let Ok(c) = parse_config(&text) {
            prop_assert_eq!(parse_config(&render_config(&c)).unwrap(), c);
        }
    }
}

/// Replays the fuzz corpus seeds through the fuzz target's round-trip check.
#[test]
fn fuzz_corpus_round_trips() {
    let dir = concat!(env!("CARGO_MANIFEST_DIR"), "/../../fuzz/corpus/parse_config");
    let mut seen = 0;
    for entry in std::fs::read_dir(dir).unwrap() {
        let bytes = std::fs::read(entry.unwrap().path()).unwrap();
        let Ok(text) = std::str::from_utf8(&bytes) else { continue };
        if let Ok(c) = parse_config(text) {
            assert_eq!(parse_config(&render_config(&c)).unwrap(), c);
        }
        seen += 1;
    }
    assert!(seen >= 8);
}
