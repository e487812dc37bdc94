#![no_main]
use libfuzzer_sys::fuzz_target;
use sunflower_lab::Report;

fuzz_target!(|data: &str| {
    let _ = Report::from_json(data);
});
