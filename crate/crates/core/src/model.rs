//! Timed words, segments, guards and parametric timed automata.
//!
//! Event indices are 1-based wherever they appear in the public API, so that
//! `slice(i, j)` reads events `i..=j` the way logs are usually described.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_traits::Signed;
use thiserror::Error;

use crate::rational::{parse_decimal, to_display_string, Rational};

/// The terminal character closing every segment.
pub const TERMINAL: &str = "$";
/// Pattern-local action that starts a match.
pub const START: &str = "start";
/// Pattern-local action leaving the former final location.
pub const END: &str = "$end";

/// Actions a log may never contain.
pub fn is_reserved_action(action: &str) -> bool {
    action == START || action.starts_with('$')
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModelError {
    #[error("timestamps must strictly increase (event {index})")]
    NonMonotone { index: usize },
    #[error("timestamps must be positive (event {index})")]
    NonPositiveTimestamp { index: usize },
    #[error("reserved action name `{0}`")]
    ReservedAction(String),
    #[error("index range ({i}, {j}) is invalid for a word of length {len}")]
    IndexOutOfRange { i: usize, j: usize, len: usize },
    #[error("shift by {0} would make a timestamp non-positive")]
    InvalidShift(String),
    #[error("segment bounds require 0 <= t < t' (got t = {t}, t' = {t_prime})")]
    InvalidSegmentBounds { t: String, t_prime: String },
    #[error("malformed segment: {0}")]
    InvalidSegment(String),
    #[error("undeclared clock `{0}`")]
    UndeclaredClock(String),
    #[error("undeclared parameter `{0}`")]
    UndeclaredParam(String),
    #[error("unknown location `{0}`")]
    UnknownLocation(String),
    #[error("duplicate name `{0}`")]
    DuplicateName(String),
    #[error("action `{0}` is not in the alphabet")]
    UnknownAction(String),
    #[error("guard constant must be non-negative, got {0}")]
    NegativeConstant(String),
    #[error("valuation is missing `{0}`")]
    MissingValue(String),
    #[error("value of `{0}` must be non-negative")]
    NegativeValue(String),
    #[error("cannot parse guard atom `{0}`")]
    BadGuard(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Event {
    pub action: String,
    pub time: Rational,
}

impl Event {
    pub fn new(action: impl Into<String>, time: Rational) -> Self {
        Event {
            action: action.into(),
            time,
        }
    }
}

impl fmt::Display for Event {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.action, to_display_string(&self.time))
    }
}

/// Absorbing concatenation: actions and timestamps are appended verbatim.
/// Validity of the result is checked when it is turned into a word or segment.
pub fn concat_absorb(left: &[Event], right: &[Event]) -> Vec<Event> {
    left.iter().chain(right).cloned().collect()
}

/// A finite log with strictly increasing, strictly positive timestamps.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TimedWord {
    events: Vec<Event>,
}

impl TimedWord {
    pub fn new(events: Vec<Event>) -> Result<Self, ModelError> {
        for (k, ev) in events.iter().enumerate() {
            if is_reserved_action(&ev.action) {
                return Err(ModelError::ReservedAction(ev.action.clone()));
            }
            if !ev.time.is_positive() {
                return Err(ModelError::NonPositiveTimestamp { index: k + 1 });
            }
            if k > 0 && events[k - 1].time >= ev.time {
                return Err(ModelError::NonMonotone { index: k + 1 });
            }
        }
        Ok(TimedWord { events })
    }

    pub fn empty() -> Self {
        TimedWord::default()
    }

    pub fn events(&self) -> &[Event] {
        &self.events
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    /// Timestamp of the 1-based event `k`.
    pub fn time(&self, k: usize) -> &Rational {
        &self.events[k - 1].time
    }

    pub fn alphabet(&self) -> BTreeSet<String> {
        self.events.iter().map(|e| e.action.clone()).collect()
    }

    /// Every timestamp moved by `delta`; fails unless the result stays positive.
    pub fn shift(&self, delta: &Rational) -> Result<TimedWord, ModelError> {
        if let Some(first) = self.events.first() {
            if !(&first.time + delta).is_positive() {
                return Err(ModelError::InvalidShift(to_display_string(delta)));
            }
        }
        Ok(TimedWord {
            events: shift_events(&self.events, delta),
        })
    }

    /// Events `i..=j`, 1-based.
    pub fn slice(&self, i: usize, j: usize) -> Result<TimedWord, ModelError> {
        if i == 0 || i > j || j > self.len() {
            return Err(ModelError::IndexOutOfRange {
                i,
                j,
                len: self.len(),
            });
        }
        Ok(TimedWord {
            events: self.events[i - 1..j].to_vec(),
        })
    }

    /// The segment over `[t, t']`: the events with timestamps in `[t, t']`,
    /// shifted by `-t`, followed by `($, t' - t)`.
    pub fn segment(&self, t: &Rational, t_prime: &Rational) -> Result<Segment, ModelError> {
        if t.is_negative() || t >= t_prime {
            return Err(ModelError::InvalidSegmentBounds {
                t: to_display_string(t),
                t_prime: to_display_string(t_prime),
            });
        }
        let first = self.events.partition_point(|e| &e.time < t);
        let last = self.events.partition_point(|e| &e.time <= t_prime);
        let inner = if first < last {
            &self.events[first..last]
        } else {
            &[][..]
        };
        let shifted = shift_events(inner, &-t);
        let tail = [Event::new(TERMINAL, t_prime - t)];
        Segment::new(concat_absorb(&shifted, &tail))
    }
}

fn shift_events(events: &[Event], delta: &Rational) -> Vec<Event> {
    events
        .iter()
        .map(|e| Event::new(e.action.clone(), &e.time + delta))
        .collect()
}

/// A timed word segment: word events followed by exactly one `$`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Segment {
    events: Vec<Event>,
}

impl Segment {
    pub fn new(events: Vec<Event>) -> Result<Self, ModelError> {
        let Some((last, body)) = events.split_last() else {
            return Err(ModelError::InvalidSegment("no terminal event".into()));
        };
        if last.action != TERMINAL {
            return Err(ModelError::InvalidSegment("last event must be $".into()));
        }
        if body.iter().any(|e| e.action == TERMINAL) {
            return Err(ModelError::InvalidSegment("$ may only appear last".into()));
        }
        if body.is_empty() && !last.time.is_positive() {
            return Err(ModelError::InvalidSegment("empty segment needs positive duration".into()));
        }
        if let Some(first) = events.first() {
            if first.time.is_negative() {
                return Err(ModelError::InvalidSegment("negative timestamp".into()));
            }
        }
        for w in body.windows(2) {
            if w[0].time >= w[1].time {
                return Err(ModelError::InvalidSegment("timestamps must increase".into()));
            }
        }
        if let Some(prev) = body.last() {
            if prev.time > last.time {
                return Err(ModelError::InvalidSegment("$ precedes the last event".into()));
            }
        }
        Ok(Segment { events })
    }

    pub fn events(&self) -> &[Event] {
        &self.events
    }

    /// Timestamp of the terminal event, i.e. `t' - t`.
    pub fn duration(&self) -> &Rational {
        &self.events.last().expect("segment has a terminal").time
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CmpOp {
    Lt,
    Le,
    Eq,
    Ge,
    Gt,
}

impl CmpOp {
    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Eq => "=",
            CmpOp::Ge => ">=",
            CmpOp::Gt => ">",
        }
    }

    pub fn from_symbol(s: &str) -> Option<CmpOp> {
        Some(match s {
            "<" => CmpOp::Lt,
            "<=" => CmpOp::Le,
            "=" | "==" => CmpOp::Eq,
            ">=" => CmpOp::Ge,
            ">" => CmpOp::Gt,
            _ => return None,
        })
    }

    pub fn holds(self, lhs: &Rational, rhs: &Rational) -> bool {
        match self {
            CmpOp::Lt => lhs < rhs,
            CmpOp::Le => lhs <= rhs,
            CmpOp::Eq => lhs == rhs,
            CmpOp::Ge => lhs >= rhs,
            CmpOp::Gt => lhs > rhs,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Rhs {
    Const(Rational),
    Param(String),
}

/// `clock ⋈ constant` or `clock ⋈ parameter`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GuardAtom {
    pub clock: String,
    pub op: CmpOp,
    pub rhs: Rhs,
}

impl GuardAtom {
    pub fn constant(clock: impl Into<String>, op: CmpOp, value: Rational) -> Self {
        GuardAtom {
            clock: clock.into(),
            op,
            rhs: Rhs::Const(value),
        }
    }

    pub fn param(clock: impl Into<String>, op: CmpOp, param: impl Into<String>) -> Self {
        GuardAtom {
            clock: clock.into(),
            op,
            rhs: Rhs::Param(param.into()),
        }
    }

    /// Parses `x < p1`, `x >= 0.5`, `x_abs = 3`.
    pub fn parse(text: &str) -> Result<Self, ModelError> {
        let bad = || ModelError::BadGuard(text.to_string());
        let ops = ["<=", ">=", "==", "<", ">", "="];
        let (pos, op) = ops
            .iter()
            .filter_map(|op| text.find(op).map(|p| (p, *op)))
            .min_by_key(|(p, op)| (*p, std::cmp::Reverse(op.len())))
            .ok_or_else(bad)?;
        let clock = text[..pos].trim();
        let rhs = text[pos + op.len()..].trim();
        if clock.is_empty() || rhs.is_empty() {
            return Err(bad());
        }
        let op = CmpOp::from_symbol(op).ok_or_else(bad)?;
        let rhs = match parse_decimal(rhs) {
            Some(v) => Rhs::Const(v),
            None => Rhs::Param(rhs.to_string()),
        };
        Ok(GuardAtom {
            clock: clock.to_string(),
            op,
            rhs,
        })
    }
}

impl fmt::Display for GuardAtom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} ", self.clock, self.op.symbol())?;
        match &self.rhs {
            Rhs::Const(c) => write!(f, "{}", to_display_string(c)),
            Rhs::Param(p) => write!(f, "{p}"),
        }
    }
}

/// A conjunction of atoms; the empty guard is `true`.
pub type Guard = Vec<GuardAtom>;

/// Parses `x > p1 && x <= 2` (also `&` or `,` as separators; `true` or empty is the empty guard).
pub fn parse_guard(text: &str) -> Result<Guard, ModelError> {
    let text = text.trim();
    if text.is_empty() || text == "true" {
        return Ok(Vec::new());
    }
    text.split(['&', ','])
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(GuardAtom::parse)
        .collect()
}

pub type ParamValuation = BTreeMap<String, Rational>;
pub type ClockValuation = BTreeMap<String, Rational>;

/// Whether `clocks` and `params` satisfy every atom of `guard`.
pub fn guard_sat(
    guard: &[GuardAtom],
    clocks: &ClockValuation,
    params: &ParamValuation,
) -> Result<bool, ModelError> {
    let mut all = true;
    for atom in guard {
        let lhs = clocks
            .get(&atom.clock)
            .ok_or_else(|| ModelError::UndeclaredClock(atom.clock.clone()))?;
        let rhs = match &atom.rhs {
            Rhs::Const(c) => c,
            Rhs::Param(p) => params
                .get(p)
                .ok_or_else(|| ModelError::UndeclaredParam(p.clone()))?,
        };
        all &= atom.op.holds(lhs, rhs);
    }
    Ok(all)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Edge {
    pub source: usize,
    pub guard: Guard,
    pub action: String,
    pub resets: BTreeSet<String>,
    pub target: usize,
}

/// A parametric timed automaton. Locations are addressed by index into
/// `locations`; clocks and parameters by name.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Pta {
    pub alphabet: BTreeSet<String>,
    pub locations: Vec<String>,
    pub initial: usize,
    pub accepting: BTreeSet<usize>,
    pub clocks: Vec<String>,
    pub params: Vec<String>,
    pub invariants: Vec<Guard>,
    pub edges: Vec<Edge>,
}

impl Pta {
    pub fn validate(&self) -> Result<(), ModelError> {
        let n = self.locations.len();
        let loc_err = |i: usize| ModelError::UnknownLocation(format!("#{i}"));
        check_unique(&self.locations)?;
        check_unique(self.clocks.iter().chain(&self.params))?;
        if self.initial >= n {
            return Err(loc_err(self.initial));
        }
        if let Some(&bad) = self.accepting.iter().find(|&&l| l >= n) {
            return Err(loc_err(bad));
        }
        if self.invariants.len() != n {
            return Err(ModelError::UnknownLocation(
                "invariant table does not match locations".into(),
            ));
        }
        for inv in &self.invariants {
            self.check_guard(inv)?;
        }
        for e in &self.edges {
            if e.source >= n {
                return Err(loc_err(e.source));
            }
            if e.target >= n {
                return Err(loc_err(e.target));
            }
            if !self.alphabet.contains(&e.action) && !is_reserved_action(&e.action) {
                return Err(ModelError::UnknownAction(e.action.clone()));
            }
            self.check_guard(&e.guard)?;
            if let Some(c) = e.resets.iter().find(|c| !self.clocks.contains(c)) {
                return Err(ModelError::UndeclaredClock(c.clone()));
            }
        }
        Ok(())
    }

    fn check_guard(&self, guard: &[GuardAtom]) -> Result<(), ModelError> {
        for atom in guard {
            if !self.clocks.contains(&atom.clock) {
                return Err(ModelError::UndeclaredClock(atom.clock.clone()));
            }
            match &atom.rhs {
                Rhs::Const(c) if c.is_negative() => {
                    return Err(ModelError::NegativeConstant(to_display_string(c)))
                }
                Rhs::Param(p) if !self.params.contains(p) => {
                    return Err(ModelError::UndeclaredParam(p.clone()))
                }
                _ => {}
            }
        }
        Ok(())
    }

    pub fn location_index(&self, name: &str) -> Option<usize> {
        self.locations.iter().position(|l| l == name)
    }

    pub fn edges_from(&self, loc: usize) -> impl Iterator<Item = &Edge> {
        self.edges.iter().filter(move |e| e.source == loc)
    }

    /// Declared alphabet plus every action that labels an edge.
    pub fn effective_alphabet(&self) -> BTreeSet<String> {
        let mut all = self.alphabet.clone();
        all.extend(self.edges.iter().map(|e| e.action.clone()));
        all
    }

    /// Largest number of edges sharing a source and an action (at least 1).
    pub fn max_branching(&self) -> usize {
        let mut counts: BTreeMap<(usize, &str), usize> = BTreeMap::new();
        for e in &self.edges {
            *counts.entry((e.source, e.action.as_str())).or_default() += 1;
        }
        counts.values().copied().max().unwrap_or(1).max(1)
    }

    /// The automaton with every parameter replaced by its value.
    pub fn valuate(&self, valuation: &ParamValuation) -> Result<Pta, ModelError> {
        for p in &self.params {
            let v = valuation
                .get(p)
                .ok_or_else(|| ModelError::MissingValue(p.clone()))?;
            if v.is_negative() {
                return Err(ModelError::NegativeValue(p.clone()));
            }
        }
        let subst = |g: &Guard| -> Guard {
            g.iter()
                .map(|a| match &a.rhs {
                    Rhs::Param(p) => GuardAtom::constant(a.clock.clone(), a.op, valuation[p].clone()),
                    Rhs::Const(_) => a.clone(),
                })
                .collect()
        };
        Ok(Pta {
            params: Vec::new(),
            invariants: self.invariants.iter().map(subst).collect(),
            edges: self
                .edges
                .iter()
                .map(|e| Edge {
                    guard: subst(&e.guard),
                    ..e.clone()
                })
                .collect(),
            ..self.clone()
        })
    }
}

fn check_unique<'a>(names: impl IntoIterator<Item = &'a String>) -> Result<(), ModelError> {
    let mut seen = BTreeSet::new();
    for n in names {
        if !seen.insert(n) {
            return Err(ModelError::DuplicateName(n.clone()));
        }
    }
    Ok(())
}

/// Incremental construction of a [`Pta`] by name.
#[derive(Debug, Default, Clone)]
pub struct PtaBuilder {
    pta: PtaParts,
}

#[derive(Debug, Default, Clone)]
struct PtaParts {
    alphabet: BTreeSet<String>,
    locations: Vec<String>,
    initial: Option<usize>,
    accepting: BTreeSet<usize>,
    clocks: Vec<String>,
    params: Vec<String>,
    invariants: Vec<Guard>,
    edges: Vec<Edge>,
}

impl PtaBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn clock(&mut self, name: &str) -> &mut Self {
        self.pta.clocks.push(name.to_string());
        self
    }

    pub fn param(&mut self, name: &str) -> &mut Self {
        self.pta.params.push(name.to_string());
        self
    }

    pub fn action(&mut self, name: &str) -> &mut Self {
        self.pta.alphabet.insert(name.to_string());
        self
    }

    /// Adds a location; the first one added becomes initial unless overridden.
    pub fn location(&mut self, name: &str) -> usize {
        self.pta.locations.push(name.to_string());
        self.pta.invariants.push(Vec::new());
        if self.pta.initial.is_none() {
            self.pta.initial = Some(self.pta.locations.len() - 1);
        }
        self.pta.locations.len() - 1
    }

    pub fn initial(&mut self, loc: usize) -> &mut Self {
        self.pta.initial = Some(loc);
        self
    }

    pub fn accepting(&mut self, loc: usize) -> &mut Self {
        self.pta.accepting.insert(loc);
        self
    }

    pub fn invariant(&mut self, loc: usize, guard: Guard) -> &mut Self {
        self.pta.invariants[loc] = guard;
        self
    }

    pub fn edge(
        &mut self,
        source: usize,
        target: usize,
        action: &str,
        guard: Guard,
        resets: &[&str],
    ) -> &mut Self {
        self.pta.edges.push(Edge {
            source,
            guard,
            action: action.to_string(),
            resets: resets.iter().map(|s| s.to_string()).collect(),
            target,
        });
        self
    }

    pub fn build(&self) -> Result<Pta, ModelError> {
        let p = self.pta.clone();
        let pta = Pta {
            alphabet: p.alphabet,
            locations: p.locations,
            initial: p.initial.unwrap_or(0),
            accepting: p.accepting,
            clocks: p.clocks,
            params: p.params,
            invariants: p.invariants,
            edges: p.edges,
        };
        pta.validate()?;
        Ok(pta)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};

    fn dec(s: &str) -> Rational {
        parse_decimal(s).unwrap()
    }

    fn word(items: &[(&str, &str)]) -> TimedWord {
        TimedWord::new(items.iter().map(|(a, t)| Event::new(*a, dec(t))).collect()).unwrap()
    }

    fn example_word() -> TimedWord {
        word(&[
            ("a", "0.5"),
            ("a", "0.9"),
            ("b", "1.3"),
            ("b", "1.7"),
            ("a", "2.8"),
            ("a", "3.7"),
            ("a", "4.9"),
            ("a", "5.3"),
            ("a", "6.0"),
        ])
    }

    fn events(items: &[(&str, &str)]) -> Vec<Event> {
        items.iter().map(|(a, t)| Event::new(*a, dec(t))).collect()
    }

    #[test]
    fn word_invariants_are_enforced() {
        assert_eq!(
            TimedWord::new(events(&[("a", "1"), ("a", "1")])),
            Err(ModelError::NonMonotone { index: 2 })
        );
        assert!(matches!(
            TimedWord::new(events(&[("a", "0")])),
            Err(ModelError::NonPositiveTimestamp { index: 1 })
        ));
        assert!(matches!(
            TimedWord::new(events(&[("start", "1")])),
            Err(ModelError::ReservedAction(_))
        ));
        assert!(matches!(
            TimedWord::new(events(&[("$", "1")])),
            Err(ModelError::ReservedAction(_))
        ));
    }

    #[test]
    fn shift_examples() {
        let w = word(&[("a", "0.5"), ("a", "0.9")]);
        assert_eq!(w.shift(&int(0)).unwrap(), w);
        let w = word(&[("a", "2.8")]);
        assert_eq!(w.shift(&int(-2)).unwrap(), word(&[("a", "0.8")]));
        let w = word(&[("a", "0.5")]);
        assert!(matches!(w.shift(&dec("-0.5")), Err(ModelError::InvalidShift(_))));
    }

    #[test]
    fn slice_examples() {
        let w = example_word();
        assert_eq!(
            w.slice(7, 9).unwrap(),
            word(&[("a", "4.9"), ("a", "5.3"), ("a", "6.0")])
        );
        assert_eq!(w.slice(4, 4).unwrap(), word(&[("b", "1.7")]));
        assert!(w.slice(2, 1).is_err());
        assert!(w.slice(0, 1).is_err());
        assert!(w.slice(9, 10).is_err());
    }

    #[test]
    fn concat_examples() {
        let a1 = events(&[("a", "1")]);
        let end2 = events(&[("$", "2")]);
        assert_eq!(concat_absorb(&a1, &end2), events(&[("a", "1"), ("$", "2")]));
        assert_eq!(concat_absorb(&a1, &[]), a1);
        let joined = concat_absorb(&events(&[("a", "2.2")]), &events(&[("$", "2.2")]));
        assert!(Segment::new(joined).is_ok());
    }

    #[test]
    fn segment_examples() {
        let w = example_word();
        let s = w.segment(&dec("3.8"), &dec("6.0")).unwrap();
        assert_eq!(
            s.events(),
            events(&[("a", "1.1"), ("a", "1.5"), ("a", "2.2"), ("$", "2.2")])
        );
        let s = w.segment(&dec("2.0"), &dec("3.0")).unwrap();
        assert_eq!(s.events(), events(&[("a", "0.8"), ("$", "1.0")]));
        let s = w.segment(&dec("1.4"), &dec("1.5")).unwrap();
        assert_eq!(s.events(), events(&[("$", "0.1")]));
        assert!(w.segment(&int(3), &int(3)).is_err());
        assert!(w.segment(&int(4), &int(3)).is_err());
    }

    #[test]
    fn segment_start_is_closed_on_the_right() {
        let w = example_word();
        let s = w.segment(&dec("3.7"), &int(4)).unwrap();
        assert_eq!(s.events(), events(&[("a", "0"), ("$", "0.3")]));
        let s = w.segment(&int(0), &dec("0.5")).unwrap();
        assert_eq!(s.events(), events(&[("a", "0.5"), ("$", "0.5")]));
    }

    #[test]
    fn segment_shape_is_checked() {
        assert!(Segment::new(events(&[("a", "1")])).is_err());
        assert!(Segment::new(events(&[("$", "1"), ("a", "2")])).is_err());
        assert!(Segment::new(events(&[("a", "2"), ("$", "1")])).is_err());
        assert!(Segment::new(events(&[("$", "0")])).is_err());
        assert!(Segment::new(events(&[("$", "0.1")])).is_ok());
    }

    #[test]
    fn guard_sat_examples() {
        let mut mu = ClockValuation::new();
        mu.insert("x".into(), dec("1.1"));
        let mut v = ParamValuation::new();
        v.insert("p1".into(), int(1));
        assert!(guard_sat(&parse_guard("x > p1").unwrap(), &mu, &v).unwrap());
        assert!(guard_sat(&[], &mu, &v).unwrap());
        mu.insert("x".into(), int(2));
        v.insert("p".into(), int(3));
        assert!(!guard_sat(&parse_guard("x = p").unwrap(), &mu, &v).unwrap());
        assert!(matches!(
            guard_sat(&parse_guard("y < 1").unwrap(), &mu, &v),
            Err(ModelError::UndeclaredClock(_))
        ));
        assert!(matches!(
            guard_sat(&parse_guard("x < q").unwrap(), &mu, &v),
            Err(ModelError::UndeclaredParam(_))
        ));
    }

    #[test]
    fn guard_parsing() {
        let g = parse_guard("x >= 0.5 && y < p2").unwrap();
        assert_eq!(g[0], GuardAtom::constant("x", CmpOp::Ge, ratio(1, 2)));
        assert_eq!(g[1], GuardAtom::param("y", CmpOp::Lt, "p2"));
        assert_eq!(parse_guard("true").unwrap(), Vec::new());
        assert!(parse_guard("x ~ 3").is_err());
    }

    fn example_pattern() -> Pta {
        let mut b = PtaBuilder::new();
        b.clock("x").param("p1").param("p2").action("a").action("b");
        let l: Vec<usize> = (0..5).map(|i| b.location(&format!("l{i}"))).collect();
        b.accepting(l[4]);
        b.edge(l[0], l[1], "a", parse_guard("x > p1").unwrap(), &["x"]);
        b.edge(l[1], l[2], "a", parse_guard("x < p2").unwrap(), &["x"]);
        b.edge(l[2], l[3], "a", parse_guard("x < p2").unwrap(), &[]);
        b.edge(l[3], l[4], "$", Vec::new(), &[]);
        b.build().unwrap()
    }

    #[test]
    fn valuate_examples() {
        let a = example_pattern();
        let mut v = ParamValuation::new();
        v.insert("p1".into(), int(1));
        v.insert("p2".into(), int(1));
        let ta = a.valuate(&v).unwrap();
        assert!(ta.params.is_empty());
        assert_eq!(ta.edges[0].guard, vec![GuardAtom::constant("x", CmpOp::Gt, int(1))]);
        assert_eq!(ta.locations.len(), a.locations.len());
        assert_eq!(ta.edges.len(), a.edges.len());
        assert_eq!(ta.alphabet, a.alphabet);

        let plain = ta.clone();
        assert_eq!(plain.valuate(&ParamValuation::new()).unwrap(), plain);

        v.remove("p2");
        assert_eq!(a.valuate(&v), Err(ModelError::MissingValue("p2".into())));
    }

    #[test]
    fn validation_rejects_undeclared_symbols() {
        let mut b = PtaBuilder::new();
        b.clock("x").action("a");
        let l0 = b.location("l0");
        b.edge(l0, l0, "a", parse_guard("y < 1").unwrap(), &[]);
        assert_eq!(b.build(), Err(ModelError::UndeclaredClock("y".into())));

        let mut b = PtaBuilder::new();
        b.clock("x").action("a");
        let l0 = b.location("l0");
        b.edge(l0, l0, "c", Vec::new(), &[]);
        assert_eq!(b.build(), Err(ModelError::UnknownAction("c".into())));
    }

    #[test]
    fn branching_degree() {
        assert_eq!(example_pattern().max_branching(), 1);
        let mut b = PtaBuilder::new();
        b.action("a");
        let l0 = b.location("l0");
        let l1 = b.location("l1");
        b.edge(l0, l1, "a", Vec::new(), &[]).edge(l0, l0, "a", Vec::new(), &[]);
        assert_eq!(b.build().unwrap().max_branching(), 2);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn arb_word() -> impl Strategy<Value = TimedWord> {
            prop::collection::vec((0..3u8, 1..50i64), 0..12).prop_map(|raw| {
                let mut t = int(0);
                let evs = raw
                    .into_iter()
                    .map(|(a, gap)| {
                        t = &t + ratio(gap, 10);
                        Event::new(["a", "b", "c"][a as usize], t.clone())
                    })
                    .collect();
                TimedWord::new(evs).unwrap()
            })
        }

        proptest! {
            #[test]
            fn shift_round_trips(w in arb_word(), d in 0..100i64) {
                let d = ratio(d, 7);
                let there = w.shift(&d).unwrap();
                prop_assert_eq!(there.shift(&-d).unwrap(), w);
            }

            #[test]
            fn segment_duration_and_content(w in arb_word(), a in 0..70i64, len in 1..70i64) {
                let t = ratio(a, 10);
                let tp = ratio(a + len, 10);
                let s = w.segment(&t, &tp).unwrap();
                prop_assert_eq!(s.duration(), &(&tp - &t));
                let expected: Vec<Event> = w
                    .events()
                    .iter()
                    .filter(|e| e.time >= t && e.time <= tp)
                    .map(|e| Event::new(e.action.clone(), &e.time - &t))
                    .collect();
                let body = &s.events()[..s.events().len() - 1];
                prop_assert_eq!(body, &expected[..]);
            }

            #[test]
            fn guard_sat_distributes(x in 0..20i64, p in 0..20i64, c1 in 0..20i64, c2 in 0..20i64) {
                let mut mu = ClockValuation::new();
                mu.insert("x".into(), ratio(x, 2));
                let mut v = ParamValuation::new();
                v.insert("p".into(), ratio(p, 2));
                let g1 = vec![GuardAtom::constant("x", CmpOp::Ge, ratio(c1, 2)), GuardAtom::param("x", CmpOp::Lt, "p")];
                let g2 = vec![GuardAtom::constant("x", CmpOp::Le, ratio(c2, 3))];
                let both: Guard = g1.iter().chain(&g2).cloned().collect();
                prop_assert_eq!(
                    guard_sat(&both, &mu, &v).unwrap(),
                    guard_sat(&g1, &mu, &v).unwrap() && guard_sat(&g2, &mu, &v).unwrap()
                );
            }
        }
    }
}
