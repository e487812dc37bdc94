#![no_main]
use libfuzzer_sys::fuzz_target;
use sunflower_lab::config::parse_config_text;
use sunflower_lab::ExperimentConfig;

fuzz_target!(|data: &str| {
    if let Ok(entries) = parse_config_text(data) {
        let _ = ExperimentConfig::resolve(None, entries);
    }
});
