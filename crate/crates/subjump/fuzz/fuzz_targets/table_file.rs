//! Fuzz the table decoder: CSV parsing must never panic, and any table the
//! validator accepts must yield a model that is total on its public API.

#![no_main]

use libfuzzer_sys::fuzz_target;
use subjump::modelspec::{parse_model, parse_table, ParsedModel};
use subjump::TailModel;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(pairs) = parse_table(text) else {
        return;
    };
    let Ok(model) = TailModel::from_table(&pairs) else {
        return;
    };
    // An accepted table is a real model: the tail must evaluate everywhere
    // and stay nonincreasing, and every integral functional must be total.
    let mut prev = f64::INFINITY;
    for x in [1e-6, 1e-2, 0.5, 1.0, 7.3, 1e9] {
        let tail = model.tail(x).expect("tail evaluation on accepted table");
        assert!(
            tail >= 0.0 && tail <= prev,
            "tail not nonincreasing at x = {x}: {tail} after {prev}"
        );
        prev = tail;
        let _ = model.condition_iii_ratio(x);
        let _ = model.lower_moment_integral(x);
    }
    let _ = model.tail_phi_integral(1.0).expect("finite tables are integrable");
    let canonical = model.describe();
    assert!(
        matches!(parse_model(&canonical), Ok(ParsedModel::Ready(_))),
        "accepted table describes as '{canonical}' which fails to reparse"
    );
});
