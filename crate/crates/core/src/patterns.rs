//! Bundled benchmark patterns and the running-example log.

use crate::io::{parse_pattern, parse_word};
use crate::model::{Pta, TimedWord};

pub const EXAMPLE_JSON: &str = include_str!("../patterns/example.pat.json");
pub const GEAR_JSON: &str = include_str!("../patterns/gear.pat.json");
pub const ACCEL_JSON: &str = include_str!("../patterns/accel.pat.json");
pub const BLOWUP_JSON: &str = include_str!("../patterns/blowup.pat.json");
pub const EXAMPLE_WORD: &str = include_str!("../patterns/example.tw");

/// Two parameters `p1`, `p2`: an `a` more than `p1` after the start, then
/// two further `a`s each less than `p2` apart.
pub fn example() -> Pta {
    parse_pattern(EXAMPLE_JSON).expect("bundled pattern")
}

/// A change to gear 1 followed by a change to gear 2 within `p`.
pub fn gear() -> Pta {
    parse_pattern(GEAR_JSON).expect("bundled pattern")
}

/// Gears 1 to 4 in order with the last shift within `p`, a high-RPM event
/// somewhere along the way, and more than one time unit after gear 4.
pub fn accel() -> Pta {
    parse_pattern(ACCEL_JSON).expect("bundled pattern")
}

/// Alternating `a`/`b` with a loop; quadratically many matches.
pub fn blowup() -> Pta {
    parse_pattern(BLOWUP_JSON).expect("bundled pattern")
}

pub fn example_word() -> TimedWord {
    parse_word(EXAMPLE_WORD).expect("bundled word")
}

/// Looks a bundled pattern up by name.
pub fn by_name(name: &str) -> Option<Pta> {
    match name {
        "example" => Some(example()),
        "gear" => Some(gear()),
        "accel" => Some(accel()),
        "blowup" => Some(blowup()),
        _ => None,
    }
}
