mod common;

use std::io::Write;

use common::fixture;
use sisogrand::sim::{QuantizerStep, SimConfig};
use sisogrand::ScheduleKind;

#[test]
fn fixture_configs_are_valid() {
    for name in ["hamming_product.toml", "ofec_product.toml"] {
        let cfg = SimConfig::load(fixture(name)).unwrap();
        cfg.validate().unwrap();
        assert_eq!(cfg.quantizer_step, Some(QuantizerStep::Auto));
        assert_eq!(
            cfg.policy.schedule,
            vec![ScheduleKind::Lwo, ScheduleKind::Ilwo, ScheduleKind::Ilwo]
        );
    }
}

#[test]
fn requantize_and_budget_modes() {
    let mut file = tempfile::NamedTempFile::new().unwrap();
    writeln!(
        file,
        "ebn0_list = [5.0]\nquantizer_step = 0.5\nrequantize = true\n\
         nonincreasing_budgets = true\nq_max = [8192, 8192, 4096]\nq_max_c = [65536, 65536, 40960]"
    )
    .unwrap();
    let cfg = SimConfig::load(file.path()).unwrap();
    assert_eq!(cfg.policy.requantize_step, Some(0.5));
    cfg.validate().unwrap();

    let mut bad = tempfile::NamedTempFile::new().unwrap();
    writeln!(bad, "ebn0_list = [5.0]\nnonincreasing_budgets = true\nq_max = [4096, 8192, 8192]").unwrap();
    assert!(SimConfig::load(bad.path()).unwrap().validate().is_err());

    let mut auto_requant = tempfile::NamedTempFile::new().unwrap();
    writeln!(auto_requant, "quantizer_step = \"auto\"\nrequantize = true").unwrap();
    assert!(SimConfig::load(auto_requant.path()).is_err());
}

#[test]
fn invalid_values_are_rejected() {
    for text in [
        "ebn0_list = []",
        "ebn0_list = [5.0]\nmax_frames = 0",
        "ebn0_list = [5.0]\nmin_frame_errors = 0",
        "ebn0_list = [5.0]\nworkers = 0",
        "ebn0_list = [5.0]\nquantizer_step = -1.0",
        "ebn0_list = [5.0]\nschedule = [\"LWO\"]",
    ] {
        let mut file = tempfile::NamedTempFile::new().unwrap();
        write!(file, "{text}").unwrap();
        let loaded = SimConfig::load(file.path());
        assert!(loaded.map_or(true, |c| c.validate().is_err()), "{text}");
    }
    let mut file = tempfile::NamedTempFile::new().unwrap();
    writeln!(file, "ebn0_list = [5.0").unwrap();
    assert!(SimConfig::load(file.path()).is_err());
}
