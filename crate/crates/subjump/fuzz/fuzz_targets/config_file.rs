//! Fuzz the config-file reader: parsing and typed key access must never
//! panic, whatever the file contains.

#![no_main]

use libfuzzer_sys::fuzz_target;
use subjump::config::ConfigFile;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(cfg) = ConfigFile::parse(text) else {
        return;
    };
    // Typed getters may reject a value, never panic.
    let _ = cfg.get("model");
    let _ = cfg.get_f64("rel-tol");
    let _ = cfg.get_u64("seed");
    let _ = cfg.get_usize("n");
    let _ = cfg.get_bool("compensate");
    let _ = cfg.get_grid("t");
    let _ = cfg.get_grid("lambda");
});
