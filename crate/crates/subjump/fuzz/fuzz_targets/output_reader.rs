//! Fuzz the report reader: parsing emitted tables must never panic, and
//! render ∘ parse must be idempotent (one pass canonicalizes).

#![no_main]

use libfuzzer_sys::fuzz_target;
use subjump::report::Report;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(report) = Report::parse(text) else {
        return;
    };
    let first = report.render();
    let reparsed = Report::parse(&first).expect("rendered report must reparse");
    assert_eq!(
        first,
        reparsed.render(),
        "render/parse round-trip is not a fixpoint"
    );
});
