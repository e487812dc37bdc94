#![no_main]
use libfuzzer_sys::fuzz_target;
use sunflower_lab::config::parse_rational;

fuzz_target!(|data: &str| {
    if let Ok(r) = parse_rational(data) {
        assert_eq!(parse_rational(&r.to_string()).unwrap(), r);
    }
});
