//! Deterministic benchmark words.

use crate::model::{Event, TimedWord};
use crate::rational::{ratio, Rational};

/// 32-bit linear congruential generator with the Numerical Recipes constants.
#[derive(Debug, Clone)]
pub struct Lcg {
    state: u32,
}

impl Lcg {
    pub fn new(seed: u32) -> Self {
        Lcg { state: seed }
    }

    pub fn next_u32(&mut self) -> u32 {
        self.state = self.state.wrapping_mul(1_664_525).wrapping_add(1_013_904_223);
        self.state
    }

    /// A gap in `[0.05, 0.949]` with millisecond resolution.
    pub fn next_gap(&mut self) -> Rational {
        ratio(i64::from(self.next_u32() % 900) + 50, 1000)
    }
}

/// `events` alternating `a`, `b`, `a`, ... with LCG gaps.
pub fn blowup_word(events: usize, seed: u32) -> TimedWord {
    let mut lcg = Lcg::new(seed);
    let mut time = Rational::from_integer(0.into());
    let evs = (0..events)
        .map(|i| {
            time += lcg.next_gap();
            Event::new(if i % 2 == 0 { "a" } else { "b" }, time.clone())
        })
        .collect();
    TimedWord::new(evs).expect("increasing by construction")
}

/// Gear changes `g1`..`g4`: each event moves one gear up or down, starting
/// from gear 1, with LCG gaps.
pub fn gear_word(events: usize, seed: u32) -> TimedWord {
    let mut lcg = Lcg::new(seed);
    let mut time = Rational::from_integer(0.into());
    let mut gear = 1u32;
    let mut evs = Vec::with_capacity(events);
    for i in 0..events {
        time += lcg.next_gap();
        if i > 0 {
            let up = lcg.next_u32() & 0x100 != 0;
            gear = match (gear, up) {
                (1, _) => 2,
                (4, _) => 3,
                (g, true) => g + 1,
                (g, false) => g - 1,
            };
        }
        evs.push(Event::new(format!("g{gear}"), time.clone()));
    }
    TimedWord::new(evs).expect("increasing by construction")
}
