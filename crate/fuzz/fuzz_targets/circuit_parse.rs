#![no_main]
use libfuzzer_sys::fuzz_target;
use sunflower_core::monotone::MonotoneCircuit;

fuzz_target!(|data: &str| {
    if let Ok(c) = MonotoneCircuit::parse(data) {
        let back = MonotoneCircuit::parse(&c.to_text()).unwrap();
        assert_eq!(back.n(), c.n());
    }
});
