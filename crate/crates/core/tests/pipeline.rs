//! Simulation → tag file → analysis round trips and reference-table oracles.

use std::path::Path;

use num_complex::Complex64;

use qdemux_core::experiment::{analyze, channel_map, simulate, simulate_hom_pair};
use qdemux_core::tagfile::{read_file, write_file, TagFileHeader};
use qdemux_core::units::ev_to_hz;
use qdemux_core::visibility::faddeeva::erfcx;
use qdemux_core::*;

fn reference_rows() -> Vec<[f64; 4]> {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data/faddeeva_reference.csv");
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| {
            let v: Vec<f64> = l.split(',').map(|x| x.parse().unwrap()).collect();
            [v[0], v[1], v[2], v[3]]
        })
        .collect()
}

#[test]
fn faddeeva_matches_high_precision_table() {
    let rows = reference_rows();
    assert!(rows.len() >= 1000);
    for r in rows {
        let want = Complex64::new(r[2], r[3]);
        let got = faddeeva(Complex64::new(r[0], r[1]));
        assert!((got - want).norm() / want.norm() < 1e-6, "w({}+{}i)", r[0], r[1]);
    }
}

#[test]
fn erfcx_matches_imaginary_axis_of_table() {
    for r in reference_rows().into_iter().filter(|r| r[0] == 0.0) {
        assert!((erfcx(r[1]) - r[2]).abs() / r[2] < 1e-12, "erfcx({})", r[1]);
    }
}

#[test]
fn measured_hom_corrections() {
    assert!((correct_hom(0.876, 0.028, 0.47, 0.53).unwrap().value - 0.937).abs() < 1e-3);
    assert!((correct_hom(0.840, 0.022, 0.47, 0.53).unwrap().value - 0.90).abs() < 0.015);
}

#[test]
fn line_cut_at_170_ps_crosses_a_quarter_near_7_uev() {
    let fss: Vec<f64> = (0..=200).map(|k| k as f64 * 0.1e-6).collect();
    let map = visibility_map(&[170e-12], &fss, 0.0, GammaRule::Radiative).unwrap();
    let cut = map.line_cut(170e-12).unwrap();
    let crossing = cut.windows(2).find(|w| w[0].1 >= 0.25 && w[1].1 < 0.25).unwrap();
    assert!((crossing[0].0 - 7e-6).abs() < 0.5e-6, "{:?}", crossing);
    let v = visibility_eq2(&Eq2Inputs::new(170e-12, ev_to_hz(7e-6), 0.0)).unwrap();
    assert!((v - 0.25).abs() < 0.03);
}

#[test]
fn two_passive_modes_need_no_eom() {
    let r = multiphoton_rate(&DemuxScheme {
        n_modes: 2,
        passive_doubling: true,
        ..Default::default()
    })
    .unwrap();
    assert_eq!(r.eom_count, 0);
}

#[test]
fn tag_file_round_trip_preserves_analysis() {
    let dir = tempfile::tempdir().unwrap();
    let mut s = Scenario {
        experiment: Experiment::HbtH,
        ..Default::default()
    };
    s.qd.reexcitation_prob = 0.03;
    s.sequence.n_periods = 50_000;
    let out = simulate(&s).unwrap();
    let direct = analyze(s.experiment, &s, &channel_map(&out), None, 0.0).unwrap();
    for name in ["run.tags", "run.qdt"] {
        let path = dir.path().join(name);
        write_file(&path, &TagFileHeader::for_scenario(&s, out.duration), &out.stream_refs()).unwrap();
        let f = read_file(&path).unwrap();
        let s2 = f.header.scenario().unwrap();
        assert_eq!(s2.hash(), s.hash());
        let again = analyze(s2.experiment, &s2, &f.streams, None, 0.0).unwrap();
        assert_eq!(again, direct, "{name}");
    }
}

#[test]
fn header_scenario_regenerates_the_file() {
    let mut s = Scenario {
        experiment: Experiment::HomHv,
        seed: 42,
        ..Default::default()
    };
    s.sequence.n_periods = 10_000;
    let out = simulate(&s).unwrap();
    let header = TagFileHeader::for_scenario(&s, out.duration);
    let again = simulate(&header.scenario().unwrap()).unwrap();
    assert_eq!(again, out);
}

#[test]
fn hom_reference_run_equals_standalone_cross_run() {
    let mut s = Scenario {
        experiment: Experiment::HomCoV,
        seed: 8,
        ..Default::default()
    };
    s.sequence.n_periods = 10_000;
    let (_, cross) = simulate_hom_pair(&s).unwrap();
    let alone = simulate(&Scenario {
        experiment: Experiment::HomCrossV,
        ..s.clone()
    })
    .unwrap();
    assert_eq!(cross, alone);
}
