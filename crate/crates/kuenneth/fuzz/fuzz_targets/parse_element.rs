#![no_main]

use kuenneth::algebra::{AlgebraPresentation, CoefficientMode, GeneratorSpec, Parity};
use kuenneth::parse::parse_element;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(src) = std::str::from_utf8(data) else { return };
    let pres = AlgebraPresentation::new(
        2,
        CoefficientMode::Fp,
        vec![
            GeneratorSpec::polynomial("x", 2),
            GeneratorSpec::polynomial("x1", 4),
            GeneratorSpec::exterior("e", 3, Parity::Odd),
        ],
        16,
    )
    .unwrap();
    // must never panic; errors are fine
    let _ = parse_element(src, &pres);

    let odd = AlgebraPresentation::new(
        3,
        CoefficientMode::IntegersLocalizedAtP,
        vec![GeneratorSpec::polynomial("v1", 4), GeneratorSpec::polynomial("v2", 16)],
        24,
    )
    .unwrap();
    let _ = parse_element(src, &odd);
});
