#![no_main]

use libfuzzer_sys::fuzz_target;
use plurinorm::rational::ExtRational;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(x) = text.parse::<ExtRational>() {
        assert_eq!(x.to_string().parse::<ExtRational>(), Ok(x));
    }
});
