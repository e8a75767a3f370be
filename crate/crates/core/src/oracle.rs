//! Brute-force semantics used to cross-check the engine.
//!
//! Nothing here goes through the symbolic construction: segments are run
//! concretely on the valuated pattern, and fixed-valuation match sets are
//! built window by window from explicit edge paths.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::model::{
    CmpOp, Guard, ModelError, ParamValuation, Pta, Rhs, Segment, TimedWord, TERMINAL,
};
use crate::polyhedron::{ConvexPoly, DisjPoly, LinAtom, Rel, Space, VarSpace};
use crate::rational::Rational;
use crate::transform::{T_PARAM, T_PRIME_PARAM};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OracleError {
    #[error("automaton still has parameters")]
    Parametric,
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// A location with concrete clock values (in declaration order).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct ConcreteState {
    pub loc: usize,
    pub clocks: Vec<Rational>,
}

fn constant(a: &crate::model::GuardAtom) -> Result<&Rational, OracleError> {
    match &a.rhs {
        Rhs::Const(c) => Ok(c),
        Rhs::Param(_) => Err(OracleError::Parametric),
    }
}

fn holds(g: &Guard, ta: &Pta, clocks: &[Rational]) -> Result<bool, OracleError> {
    for a in g {
        let i = ta
            .clocks
            .iter()
            .position(|c| *c == a.clock)
            .ok_or_else(|| ModelError::UndeclaredClock(a.clock.clone()))?;
        if !a.op.holds(&clocks[i], constant(a)?) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Whether the parameter-free automaton accepts the segment.
pub fn membership(seg: &Segment, ta: &Pta) -> Result<bool, OracleError> {
    if !ta.params.is_empty() {
        return Err(OracleError::Parametric);
    }
    let zero = Rational::from_integer(0.into());
    let start = ConcreteState {
        loc: ta.initial,
        clocks: vec![zero.clone(); ta.clocks.len()],
    };
    let mut current = Vec::new();
    if holds(&ta.invariants[start.loc], ta, &start.clocks)? {
        current.push(start);
    }
    let mut now = zero;
    for ev in seg.events() {
        let delay = &ev.time - &now;
        now = ev.time.clone();
        let mut next: Vec<ConcreteState> = Vec::new();
        for s in &current {
            let clocks: Vec<Rational> = s.clocks.iter().map(|c| c + &delay).collect();
            if !holds(&ta.invariants[s.loc], ta, &clocks)? {
                continue;
            }
            for e in ta.edges_from(s.loc).filter(|e| e.action == ev.action) {
                if !holds(&e.guard, ta, &clocks)? {
                    continue;
                }
                let reset: Vec<Rational> = ta
                    .clocks
                    .iter()
                    .zip(&clocks)
                    .map(|(name, v)| {
                        if e.resets.contains(name) {
                            Rational::from_integer(0.into())
                        } else {
                            v.clone()
                        }
                    })
                    .collect();
                if !holds(&ta.invariants[e.target], ta, &reset)? {
                    continue;
                }
                let st = ConcreteState {
                    loc: e.target,
                    clocks: reset,
                };
                if !next.contains(&st) {
                    next.push(st);
                }
            }
        }
        current = next;
        if current.is_empty() {
            return Ok(false);
        }
    }
    Ok(current.iter().any(|s| ta.accepting.contains(&s.loc)))
}

/// `c_t·t + c_t'·t' + c` over the two time parameters.
#[derive(Debug, Clone, PartialEq)]
struct Affine {
    t: Rational,
    t_prime: Rational,
    c: Rational,
}

impl Affine {
    fn constant(c: Rational) -> Self {
        let z = Rational::from_integer(0.into());
        Affine {
            t: z.clone(),
            t_prime: z,
            c,
        }
    }

    fn var_t() -> Self {
        Affine {
            t: Rational::from_integer(1.into()),
            ..Affine::constant(Rational::from_integer(0.into()))
        }
    }

    fn var_t_prime() -> Self {
        Affine {
            t_prime: Rational::from_integer(1.into()),
            ..Affine::constant(Rational::from_integer(0.into()))
        }
    }

    fn minus(&self, o: &Affine) -> Affine {
        Affine {
            t: &self.t - &o.t,
            t_prime: &self.t_prime - &o.t_prime,
            c: &self.c - &o.c,
        }
    }

    /// `self ⋈ k` as one atom over `(t, t')`.
    fn compare(&self, op: CmpOp, k: &Rational) -> LinAtom {
        let coeffs = [self.t.clone(), self.t_prime.clone()];
        let bound = k - &self.c;
        let neg = [-&coeffs[0], -&coeffs[1]];
        match op {
            CmpOp::Lt => LinAtom::new(&coeffs, Rel::Lt, bound),
            CmpOp::Le => LinAtom::new(&coeffs, Rel::Le, bound),
            CmpOp::Eq => LinAtom::new(&coeffs, Rel::Eq, bound),
            CmpOp::Ge => LinAtom::new(&neg, Rel::Le, -bound),
            CmpOp::Gt => LinAtom::new(&neg, Rel::Lt, -bound),
        }
    }
}

fn time_space() -> Space {
    VarSpace::params([T_PARAM, T_PRIME_PARAM]).expect("distinct")
}

struct PathSearch<'a> {
    ta: &'a Pta,
    clock_index: BTreeMap<&'a str, usize>,
    space: Space,
    out: DisjPoly,
}

impl PathSearch<'_> {
    /// Constraints for `g` evaluated at time `now`, clocks last reset at `resets`.
    fn guard_atoms(&self, g: &Guard, now: &Affine, resets: &[Affine]) -> Result<Vec<LinAtom>, OracleError> {
        g.iter()
            .map(|a| {
                let i = self.clock_index[a.clock.as_str()];
                Ok(now.minus(&resets[i]).compare(a.op, constant(a)?))
            })
            .collect()
    }

    /// Extends a path at `loc` over `events`, then `$`. The invariant of
    /// `loc` held on arrival and is checked again on departure.
    fn extend(
        &mut self,
        loc: usize,
        resets: Vec<Affine>,
        poly: ConvexPoly,
        events: &[(String, Affine)],
    ) -> Result<(), OracleError> {
        let ta = self.ta;
        let (action, at) = match events.split_first() {
            Some(((a, at), _)) => (a.as_str(), at.clone()),
            None => (TERMINAL, Affine::var_t_prime()),
        };
        let stay = self.guard_atoms(&ta.invariants[loc], &at, &resets)?;
        let base = poly.conjoin(&stay).expect("same space");
        if base.is_empty() {
            return Ok(());
        }
        for e in ta.edges_from(loc).filter(|e| e.action == action) {
            let g = self.guard_atoms(&e.guard, &at, &resets)?;
            let mut r = resets.clone();
            for (name, &i) in &self.clock_index {
                if e.resets.contains(*name) {
                    r[i] = at.clone();
                }
            }
            let arrive = self.guard_atoms(&ta.invariants[e.target], &at, &r)?;
            let mut atoms = g;
            atoms.extend(arrive);
            let p = base.conjoin(&atoms).expect("same space");
            if p.is_empty() {
                continue;
            }
            if events.is_empty() {
                if ta.accepting.contains(&e.target) {
                    self.out.union_add(p, false).expect("same space");
                }
            } else {
                self.extend(e.target, r, p, &events[1..])?;
            }
        }
        Ok(())
    }
}

/// The fixed-valuation match set over `(t, t_prime)`, by enumerating every
/// window of consecutive events and every edge path that reads it.
pub fn brute_force_match_set(
    w: &TimedWord,
    pattern: &Pta,
    valuation: &ParamValuation,
) -> Result<DisjPoly, OracleError> {
    let ta = pattern.valuate(valuation)?;
    let space = time_space();
    let n = w.len();
    let tau = |k: usize| w.time(k).clone();
    let cmp = |var: &str, op: &str, v: Rational| LinAtom::var_cmp(&space, var, op, v).expect("known var");
    let zero = Rational::from_integer(0.into());
    let ordered = LinAtom::new(
        &[Rational::from_integer(1.into()), Rational::from_integer((-1).into())],
        Rel::Lt,
        zero.clone(),
    );

    let mut search = PathSearch {
        ta: &ta,
        clock_index: ta.clocks.iter().enumerate().map(|(i, c)| (c.as_str(), i)).collect(),
        space: space.clone(),
        out: DisjPoly::empty(space.clone()),
    };

    for i in 1..=n + 1 {
        for j in (i - 1)..=n {
            let mut window = vec![cmp(T_PARAM, ">=", zero.clone()), ordered.clone()];
            if i > 1 {
                window.push(cmp(T_PARAM, ">", tau(i - 1)));
            }
            if i <= n {
                window.push(cmp(T_PARAM, "<=", tau(i)));
            }
            if j >= 1 {
                window.push(cmp(T_PRIME_PARAM, ">=", tau(j)));
            }
            if j < n {
                window.push(cmp(T_PRIME_PARAM, "<", tau(j + 1)));
            }
            let poly = ConvexPoly::from_atoms(search.space.clone(), window).expect("same space");
            if poly.is_empty() {
                continue;
            }
            let events: Vec<(String, Affine)> = (i..=j)
                .map(|k| (w.events()[k - 1].action.clone(), Affine::constant(tau(k))))
                .collect();
            let start = Affine::var_t();
            let resets = vec![start.clone(); ta.clocks.len()];
            let init_inv = search.guard_atoms(&ta.invariants[ta.initial], &start, &resets)?;
            let poly = poly.conjoin(&init_inv).expect("same space");
            if poly.is_empty() {
                continue;
            }
            search.extend(ta.initial, resets, poly, &events)?;
        }
    }
    Ok(search.out)
}

#[cfg(test)]
mod tests;
