mod common;

use common::fixture;
use sisogrand::sim::{run_points, SimConfig};

fn hamming_config() -> SimConfig {
    SimConfig::load(fixture("hamming_product.toml")).unwrap()
}

#[test]
fn ber_does_not_rise_across_iterations() {
    let cfg = hamming_config();
    let points = run_points(&cfg).unwrap();
    let its = &points[0].stats.iterations;
    assert!(its.last().unwrap().frame_errors >= 100);
    for w in its.windows(2) {
        assert!(w[1].ber() <= w[0].ber(), "{} then {}", w[0].ber(), w[1].ber());
    }
}

#[test]
fn statistics_are_conserved() {
    let cfg = SimConfig { max_frames: 50, ..hamming_config() };
    let points = run_points(&cfg).unwrap();
    for it in &points[0].stats.iterations {
        assert_eq!(it.frames, 50);
        assert_eq!(it.decodes, 2 * 32 * 50);
        assert_eq!(it.bits, 32 * 32 * 50);
        assert!(it.pairs <= it.found && it.found + it.abandoned == it.decodes);
        assert_eq!(it.competitor_rate(), it.pairs as f64 / it.decodes as f64);
        assert!((0.0..=0.5).contains(&it.ber()));
    }
}

#[test]
fn fixed_seed_gives_identical_statistics() {
    let cfg = SimConfig { max_frames: 30, ebn0_list: vec![2.5, 3.0], ..hamming_config() };
    let a = run_points(&cfg).unwrap();
    let b = run_points(&cfg).unwrap();
    assert_eq!(a, b);
    let other = SimConfig { seed: cfg.seed + 1, ..cfg };
    assert_ne!(run_points(&other).unwrap(), a);
}

#[test]
fn stopping_rule_holds() {
    let cfg = SimConfig { min_frame_errors: 5, max_frames: 400, ebn0_list: vec![2.5, 4.0], ..hamming_config() };
    for p in run_points(&cfg).unwrap() {
        for it in &p.stats.iterations {
            assert!(it.frame_errors >= 5 || it.frames == 400);
        }
    }
}

#[test]
fn ofec_noiseless_frame() {
    let cfg = SimConfig {
        ebn0_list: vec![4.0],
        max_frames: 1,
        noiseless: true,
        ..SimConfig::load(fixture("ofec_product.toml")).unwrap()
    };
    let points = run_points(&cfg).unwrap();
    let its = &points[0].stats.iterations;
    assert_eq!(its[0].avg_q_main(), 1.0);
    assert!(its.iter().all(|it| it.bit_errors == 0));
}
