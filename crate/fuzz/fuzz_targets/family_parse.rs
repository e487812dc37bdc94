#![no_main]
use libfuzzer_sys::fuzz_target;
use sunflower_core::SetFamily;

fuzz_target!(|data: &str| {
    if let Ok(f) = SetFamily::parse(data) {
        assert_eq!(SetFamily::parse(&f.to_text()).unwrap(), f);
    }
});
