//! Fuzz the model/regime/direction grammar: parsing must never panic, and
//! an accepted model's canonical description must parse back.

#![no_main]

use libfuzzer_sys::fuzz_target;
use subjump::modelspec::{parse_direction, parse_model, parse_regime, ParsedModel};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let _ = parse_regime(text);
    let _ = parse_direction(text);
    match parse_model(text) {
        Ok(ParsedModel::Ready(model)) => {
            let canonical = model.describe();
            let reparsed = parse_model(&canonical);
            assert!(
                matches!(reparsed, Ok(ParsedModel::Ready(_))),
                "accepted model '{text}' describes as '{canonical}' which fails to reparse"
            );
        }
        // Table specs defer to file loading; the grammar only captures the
        // path, which any string may be.
        Ok(ParsedModel::TableFile(_)) | Err(_) => {}
    }
});
