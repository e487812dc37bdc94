#![no_main]
use libfuzzer_sys::fuzz_target;
use sunflower_core::clique::Graph;

fuzz_target!(|data: &str| {
    if let Ok(g) = Graph::parse(data) {
        assert_eq!(Graph::parse(&g.to_text()).unwrap(), g);
    }
});
