#![no_main]
use libfuzzer_sys::fuzz_target;
use sunflower_core::codes::Polynomial;

fuzz_target!(|data: &str| {
    if let Ok(p) = Polynomial::parse(data) {
        assert_eq!(Polynomial::parse(&p.to_text()).unwrap(), p);
    }
});
