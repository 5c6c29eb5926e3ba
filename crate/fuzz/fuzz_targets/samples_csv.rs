#![no_main]

use libfuzzer_sys::fuzz_target;
use plurinorm::asymptotics::PsiSamples;

fuzz_target!(|data: &[u8]| {
    let Ok(samples) = PsiSamples::read_csv(data) else {
        return;
    };
    let mut out = Vec::new();
    samples.write_csv(&mut out).expect("accepted samples serialize");
    let again = PsiSamples::read_csv(out.as_slice()).expect("written samples parse");
    assert_eq!(again.len(), samples.len());
    for (x, y) in again.delta_values().iter().zip(samples.delta_values()) {
        assert_eq!(x.to_bits(), y.to_bits());
    }
});
