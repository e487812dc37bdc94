#![no_main]
use libfuzzer_sys::fuzz_target;
use sunflower_core::codes::Code;

fuzz_target!(|data: (u8, &str)| {
    let (q, text) = data;
    if let Ok(code) = Code::from_csv(q as usize, text) {
        assert_eq!(Code::from_csv(q as usize, &code.to_csv()).unwrap(), code);
    }
});
