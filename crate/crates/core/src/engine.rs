//! Reachability synthesis over the parametric zone graph, the matcher built
//! on it, and a branch-and-bound variant that optimizes one parameter.

use std::collections::VecDeque;
use std::time::Instant;

use rustc_hash::FxHashMap;
use thiserror::Error;

use crate::model::{ParamValuation, Pta, TimedWord};
use crate::polyhedron::{
    unit_atom, Bound, Bounds, ConvexPoly, DisjPoly, LinAtom, PolyError, Rel, Space, VarKind, VarSpace,
};
use crate::rational::Rational;
use crate::transform::{build_pipeline, Product, SymbolicOptions, Transition, TransformError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EngineError {
    #[error(transparent)]
    Transform(#[from] TransformError),
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error("initial zone is empty")]
    EmptyInitialZone,
    #[error("state limit of {0} exceeded")]
    StateLimit(usize),
    #[error("unknown parameter `{0}`")]
    UnknownParam(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct EngineOptions {
    /// Skip accepting projections already covered by a stored disjunct.
    pub subsumption: bool,
    /// Abort once this many states are stored.
    pub state_limit: Option<usize>,
    pub symbolic: SymbolicOptions,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SymbolicState {
    pub locs: Vec<usize>,
    pub zone: ConvexPoly,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Stats {
    /// Symbolic states stored in the visited set.
    pub states: usize,
    /// Disjuncts in the result.
    pub matches: usize,
    pub comp_seconds: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MatchSet {
    pub set: DisjPoly,
    pub stats: Stats,
}

impl MatchSet {
    pub fn space(&self) -> &Space {
        self.set.space()
    }

    pub fn is_empty(&self) -> bool {
        self.set.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Min,
    Max,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptResult {
    pub param: String,
    pub direction: Direction,
    /// `None` when no valuation matches; otherwise the infimum (min) or
    /// supremum (max), with `strict` set when it is not attained.
    pub optimum: Option<Bound>,
    pub stats: Stats,
}

impl OptResult {
    pub fn feasible(&self) -> bool {
        self.optimum.is_some()
    }
}

/// Zero clocks, non-negative parameters, the initial invariant, then delay.
pub fn initial_state(product: &Product, extra: &[LinAtom]) -> Result<SymbolicState, EngineError> {
    Ok(initial_keyed(product, extra, key_var(product))?.0)
}

fn initial_keyed(
    product: &Product,
    extra: &[LinAtom],
    key: Option<usize>,
) -> Result<(SymbolicState, Key), EngineError> {
    let space = product.space();
    let dim = space.dim();
    let zero = Rational::from_integer(0.into());
    let mut atoms: Vec<LinAtom> = Vec::with_capacity(dim + extra.len());
    for i in 0..dim {
        match space.kind(i) {
            VarKind::Clock => atoms.push(unit_atom(dim, i, 1, Rel::Eq, zero.clone())),
            VarKind::Param => atoms.push(unit_atom(dim, i, -1, Rel::Le, zero.clone())),
        }
    }
    atoms.extend_from_slice(extra);
    let locs = product.initial();
    let inv = product.invariant(&locs);
    atoms.extend(inv.iter().cloned());
    let zone = ConvexPoly::from_atoms(space.clone(), atoms)?
        .time_elapse()
        .conjoin(&inv)?;
    let k = state_key(&zone, key).ok_or(EngineError::EmptyInitialZone)?;
    Ok((SymbolicState { locs, zone }, k))
}

/// Guard, reset, target invariant, delay, target invariant. `None` when the
/// resulting zone is empty.
pub fn successor(product: &Product, s: &SymbolicState, tr: &Transition) -> Option<SymbolicState> {
    successor_keyed(product, s, tr, key_var(product)).map(|(s, _)| s)
}

fn successor_keyed(
    product: &Product,
    s: &SymbolicState,
    tr: &Transition,
    key: Option<usize>,
) -> Option<(SymbolicState, Key)> {
    let inv = product.invariant(&tr.target);
    let zone = s
        .zone
        .conjoin(&tr.guard)
        .ok()?
        .reset_indices(&tr.resets)
        .conjoin(&inv)
        .ok()?
        .time_elapse()
        .conjoin(&inv)
        .ok()?;
    let k = state_key(&zone, key)?;
    Some((
        SymbolicState {
            locs: tr.target.clone(),
            zone,
        },
        k,
    ))
}

/// Range of the key variable: a semantic invariant of the zone, so equal
/// zones always share it. Computing it doubles as the emptiness check.
type Key = Option<Bounds>;

/// `t` when present, otherwise the first variable.
fn key_var(product: &Product) -> Option<usize> {
    let space = product.space();
    space
        .index(crate::transform::T_PARAM)
        .ok()
        .or((space.dim() > 0).then_some(0))
}

/// `None` when the zone is empty.
fn state_key(zone: &ConvexPoly, key: Option<usize>) -> Option<Key> {
    match key {
        Some(k) => zone.bounds_index(k).ok().map(Some),
        None => (!zone.is_empty()).then_some(None),
    }
}

/// Stored zones bucketed by location tuple and key; equality is mutual
/// inclusion.
struct Visited {
    buckets: FxHashMap<(Vec<usize>, Key), Vec<ConvexPoly>>,
    count: usize,
}

impl Visited {
    fn new() -> Self {
        Visited {
            buckets: FxHashMap::default(),
            count: 0,
        }
    }

    /// Records the state; returns false if an equal one is already stored.
    fn insert(&mut self, s: &SymbolicState, key: Key) -> bool {
        let bucket = self.buckets.entry((s.locs.clone(), key)).or_default();
        let dup = bucket.iter().any(|z| {
            z.atoms() == s.zone.atoms()
                || (z.includes_nonempty(&s.zone) && s.zone.includes_nonempty(z))
        });
        if dup {
            return false;
        }
        bucket.push(s.zone.clone());
        self.count += 1;
        true
    }
}

/// Parameter space of a product: its parameter variables in order.
fn param_space(product: &Product) -> Result<(Vec<usize>, Space), EngineError> {
    let space = product.space();
    let idx = space.indices_of(VarKind::Param);
    let ps = VarSpace::new(idx.iter().map(|&i| (space.name(i).to_string(), VarKind::Param)))?;
    Ok((idx, ps))
}

/// Union of the parameter projections of every reachable accepting zone.
pub fn efsynth(product: &Product, opts: &EngineOptions) -> Result<MatchSet, EngineError> {
    efsynth_with(product, &[], opts)
}

/// [`efsynth`] with extra constraints conjoined to the initial zone.
pub fn efsynth_with(
    product: &Product,
    extra: &[LinAtom],
    opts: &EngineOptions,
) -> Result<MatchSet, EngineError> {
    let started = Instant::now();
    let (keep, pspace) = param_space(product)?;
    let mut result = DisjPoly::empty(pspace.clone());
    let mut visited = Visited::new();
    let mut queue = VecDeque::new();
    let key = key_var(product);
    let (init, k0) = initial_keyed(product, extra, key)?;
    visited.insert(&init, k0);
    queue.push_back(init);
    while let Some(s) = queue.pop_front() {
        if product.is_accepting(&s.locs) {
            result.union_add(s.zone.project_indices(&keep, pspace.clone()), opts.subsumption)?;
            continue;
        }
        for tr in product.transitions(&s.locs) {
            let Some((next, k)) = successor_keyed(product, &s, &tr, key) else {
                continue;
            };
            if visited.insert(&next, k) {
                check_limit(visited.count, opts)?;
                queue.push_back(next);
            }
        }
    }
    Ok(MatchSet {
        stats: Stats {
            states: visited.count,
            matches: result.len(),
            comp_seconds: started.elapsed().as_secs_f64(),
        },
        set: result,
    })
}

fn check_limit(count: usize, opts: &EngineOptions) -> Result<(), EngineError> {
    match opts.state_limit {
        Some(limit) if count > limit => Err(EngineError::StateLimit(limit)),
        _ => Ok(()),
    }
}

/// `t < t_prime` over the product space.
fn ordered_times(product: &Product) -> Result<Vec<LinAtom>, EngineError> {
    let space = product.space();
    let one = Rational::from_integer(1.into());
    Ok(vec![LinAtom::from_terms(
        space,
        &[(crate::transform::T_PARAM, one.clone()), (crate::transform::T_PRIME_PARAM, -one)],
        Rel::Lt,
        Rational::from_integer(0.into()),
    )?])
}

/// All `(t, t', v)` such that the segment of `w` over `[t, t']` is accepted
/// by `pattern` under `v`. The result ranges over the pattern parameters
/// followed by `t` and `t_prime`.
pub fn match_set(pattern: &Pta, w: &TimedWord, opts: &EngineOptions) -> Result<MatchSet, EngineError> {
    let started = Instant::now();
    let pipeline = build_pipeline(pattern, w, opts.symbolic)?;
    let extra = ordered_times(&pipeline.product)?;
    let mut m = efsynth_with(&pipeline.product, &extra, opts)?;
    m.stats.comp_seconds = started.elapsed().as_secs_f64();
    Ok(m)
}

/// The match set at a fixed valuation, over `t` and `t_prime` only.
pub fn match_set_fixed(
    pattern: &Pta,
    w: &TimedWord,
    valuation: &ParamValuation,
    opts: &EngineOptions,
) -> Result<MatchSet, EngineError> {
    let ta = pattern.valuate(valuation).map_err(TransformError::from)?;
    match_set(&ta, w, opts)
}

/// Substitutes a valuation into a parametric match set, leaving `(t, t')`.
pub fn instantiate(m: &DisjPoly, valuation: &ParamValuation) -> Result<DisjPoly, EngineError> {
    let mut out = m.clone();
    for name in m.space().names() {
        if name == crate::transform::T_PARAM || name == crate::transform::T_PRIME_PARAM {
            continue;
        }
        let v = valuation
            .get(name)
            .ok_or_else(|| EngineError::UnknownParam(name.clone()))?;
        out = out.substitute(name, v)?;
    }
    Ok(out)
}

/// Whether `a` is a strictly better optimum than `b` in `dir`.
fn better(a: &Bound, b: &Bound, dir: Direction) -> bool {
    match (a, b) {
        (Bound::Unbounded, Bound::Unbounded) => false,
        (Bound::Unbounded, _) => true,
        (_, Bound::Unbounded) => false,
        (
            Bound::Finite { value: va, strict: sa },
            Bound::Finite { value: vb, strict: sb },
        ) => {
            let improves = match dir {
                Direction::Min => va < vb,
                Direction::Max => va > vb,
            };
            improves || (va == vb && !sa && *sb)
        }
    }
}

fn side(bounds: crate::polyhedron::Bounds, dir: Direction) -> Bound {
    match dir {
        Direction::Min => bounds.lower,
        Direction::Max => bounds.upper,
    }
}

/// Infimum or supremum of one parameter over the match set, exploring only
/// branches that could still improve on the best value found so far.
pub fn optimize(
    pattern: &Pta,
    w: &TimedWord,
    param: &str,
    dir: Direction,
    opts: &EngineOptions,
) -> Result<OptResult, EngineError> {
    if !pattern.params.iter().any(|p| p == param) {
        return Err(EngineError::UnknownParam(param.to_string()));
    }
    let started = Instant::now();
    let pipeline = build_pipeline(pattern, w, opts.symbolic)?;
    let product = &pipeline.product;
    let k = product.space().index(param)?;
    let extra = ordered_times(product)?;

    let mut incumbent: Option<Bound> = None;
    let promising = |zone: &ConvexPoly, incumbent: &Option<Bound>| -> Option<Bound> {
        let b = side(zone.bounds_index(k).ok()?, dir);
        match incumbent {
            Some(best) if !better(&b, best, dir) => None,
            _ => Some(b),
        }
    };

    let mut visited = Visited::new();
    let mut queue = VecDeque::new();
    let key = key_var(product);
    let (init, k0) = initial_keyed(product, &extra, key)?;
    visited.insert(&init, k0);
    queue.push_back(init);
    while let Some(s) = queue.pop_front() {
        let Some(b) = promising(&s.zone, &incumbent) else {
            continue;
        };
        if product.is_accepting(&s.locs) {
            incumbent = Some(b);
            continue;
        }
        for tr in product.transitions(&s.locs) {
            let Some((next, k)) = successor_keyed(product, &s, &tr, key) else {
                continue;
            };
            if promising(&next.zone, &incumbent).is_none() {
                continue;
            }
            if visited.insert(&next, k) {
                check_limit(visited.count, opts)?;
                queue.push_back(next);
            }
        }
    }
    Ok(OptResult {
        param: param.to_string(),
        direction: dir,
        optimum: incumbent,
        stats: Stats {
            states: visited.count,
            matches: 0,
            comp_seconds: started.elapsed().as_secs_f64(),
        },
    })
}

/// Explored-state ceiling `(|w|+3)(|w|+1)B^|w|` for the matcher, saturating.
pub fn state_ceiling(word_len: usize, branching: usize) -> u128 {
    let n = word_len as u128;
    let b = branching.max(1) as u128;
    let mut pow: u128 = 1;
    for _ in 0..word_len {
        pow = pow.saturating_mul(b);
    }
    (n + 3).saturating_mul(n + 1).saturating_mul(pow)
}

#[cfg(test)]
mod tests;
