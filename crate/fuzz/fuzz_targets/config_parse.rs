#![no_main]

use libfuzzer_sys::fuzz_target;
use shrinkcov::config::ExperimentConfig;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(cfg) = ExperimentConfig::from_json_str(text) else {
        return;
    };
    cfg.validate().expect("parsed configs are valid");
    cfg.method_infos().expect("parsed methods resolve");
    // Serializing a parsed config must give back the same config.
    let json = cfg.to_json_string().expect("config serializes");
    let again = ExperimentConfig::from_json_str(&json).expect("re-parse");
    assert_eq!(again, cfg);
});
