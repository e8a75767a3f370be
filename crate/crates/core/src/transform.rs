//! Pattern normalization, the symbolic pattern construction, the word
//! automaton and strong-broadcast products.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use thiserror::Error;

use crate::model::{
    is_reserved_action, CmpOp, Edge, Guard, GuardAtom, ModelError, Pta, Rhs, TimedWord, END,
    START, TERMINAL,
};
use crate::polyhedron::{LinAtom, Rel, Space, VarKind, VarSpace};
use crate::rational::Rational;

/// Name of the start-time parameter.
pub const T_PARAM: &str = "t";
/// Name of the end-time parameter.
pub const T_PRIME_PARAM: &str = "t_prime";
/// Preferred name of the shared absolute clock.
pub const X_ABS: &str = "x_abs";

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TransformError {
    #[error("pattern has no accepting location")]
    NoAccepting,
    #[error("ill-formed pattern: {0}")]
    IllFormed(String),
    #[error("`{0}` is reserved and cannot be a pattern parameter")]
    ReservedParam(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Enforces a single final location reached only by `$` edges, and removes
/// edges whose action cannot occur in a segment over `sigma`.
///
/// The result declares the alphabet `sigma ∪ {$}`. Edges leaving the final
/// location are dropped since nothing follows `$` in a segment.
pub fn normalize_pattern(a: &Pta, sigma: &BTreeSet<String>) -> Result<Pta, TransformError> {
    a.validate()?;
    if a.accepting.is_empty() {
        return Err(TransformError::NoAccepting);
    }
    if let Some(bad) = sigma.iter().find(|s| is_reserved_action(s)) {
        return Err(ModelError::ReservedAction(bad.clone()).into());
    }
    for &f in &a.accepting {
        if !a.invariants[f].is_empty() {
            return Err(TransformError::IllFormed(format!(
                "accepting location `{}` has an invariant",
                a.locations[f]
            )));
        }
        if f == a.initial {
            return Err(TransformError::IllFormed(format!(
                "initial location `{}` is accepting",
                a.locations[f]
            )));
        }
    }

    let keep_action = |act: &str| act == TERMINAL || sigma.contains(act);
    let merged = a.accepting.len() > 1;
    let mut locations: Vec<String> = Vec::new();
    let mut invariants: Vec<Guard> = Vec::new();
    let mut remap = vec![0usize; a.locations.len()];
    for (i, name) in a.locations.iter().enumerate() {
        if merged && a.accepting.contains(&i) {
            continue;
        }
        remap[i] = locations.len();
        locations.push(name.clone());
        invariants.push(a.invariants[i].clone());
    }
    let final_loc = if merged {
        let name = fresh_name(
            "final",
            &a.locations.iter().cloned().collect::<BTreeSet<_>>(),
        );
        let idx = locations.len();
        locations.push(name);
        invariants.push(Vec::new());
        for &f in &a.accepting {
            remap[f] = idx;
        }
        idx
    } else {
        remap[*a.accepting.iter().next().expect("non-empty")]
    };

    let mut edges = Vec::new();
    for e in &a.edges {
        if !keep_action(&e.action) || a.accepting.contains(&e.source) {
            continue;
        }
        let target = remap[e.target];
        if target == final_loc && e.action != TERMINAL {
            return Err(TransformError::IllFormed(format!(
                "edge `{}` enters the final location without `$`",
                e.action
            )));
        }
        if e.action == TERMINAL && target != final_loc {
            return Err(TransformError::IllFormed(format!(
                "`$` edge into non-accepting location `{}`",
                a.locations[e.target]
            )));
        }
        edges.push(Edge {
            source: remap[e.source],
            target,
            ..e.clone()
        });
    }

    let mut alphabet = sigma.clone();
    alphabet.insert(TERMINAL.to_string());
    let out = Pta {
        alphabet,
        locations,
        initial: remap[a.initial],
        accepting: BTreeSet::from([final_loc]),
        clocks: a.clocks.clone(),
        params: a.params.clone(),
        invariants,
        edges,
    };
    out.validate()?;
    Ok(out)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SymbolicOptions {
    /// Use an existing pattern clock in place of a fresh `x_new`.
    pub reuse_clock: bool,
}

/// The symbolic pattern together with the clock names it settled on.
#[derive(Debug, Clone)]
pub struct SymbolicPattern {
    pub pta: Pta,
    pub x_abs: String,
    pub x_new: String,
    /// Index of the pre-initial location (the new initial location).
    pub pre_initial: usize,
    /// Index of the waiting location that skips events before a start.
    pub waiting: usize,
    /// Index of the accepting location after the positive-delay check.
    pub post_final: usize,
}

/// Builds the symbolic pattern from a normalized one: starts anywhere at
/// `x_abs = t`, ends with `$` at `x_abs = t_prime`, and requires a positive
/// delay after `$` before accepting.
pub fn make_symbolic(
    a: &Pta,
    sigma: &BTreeSet<String>,
    opts: SymbolicOptions,
) -> Result<SymbolicPattern, TransformError> {
    if a.accepting.len() != 1 {
        return Err(TransformError::IllFormed("pattern is not normalized".into()));
    }
    for reserved in [T_PARAM, T_PRIME_PARAM] {
        if a.params.iter().any(|p| p == reserved) {
            return Err(TransformError::ReservedParam(reserved.to_string()));
        }
    }
    let final_loc = *a.accepting.iter().next().expect("one accepting");
    let taken: BTreeSet<String> = a.clocks.iter().chain(&a.params).cloned().collect();
    let x_abs = fresh_name(X_ABS, &taken);
    let mut clocks = a.clocks.clone();
    let x_new = match (opts.reuse_clock, a.clocks.first()) {
        (true, Some(c)) => c.clone(),
        _ => {
            let mut t = taken.clone();
            t.insert(x_abs.clone());
            let name = fresh_name("x_new", &t);
            clocks.push(name.clone());
            name
        }
    };
    clocks.push(x_abs.clone());
    let mut params = a.params.clone();
    params.push(T_PARAM.to_string());
    params.push(T_PRIME_PARAM.to_string());

    let loc_names: BTreeSet<String> = a.locations.iter().cloned().collect();
    let mut locations = a.locations.clone();
    let mut invariants = a.invariants.clone();
    let mut add_loc = |base: &str, locations: &mut Vec<String>| {
        let taken: BTreeSet<String> = loc_names.iter().chain(locations.iter()).cloned().collect();
        locations.push(fresh_name(base, &taken));
        invariants.push(Vec::new());
        locations.len() - 1
    };
    let pre_initial = add_loc("pre_initial", &mut locations);
    let waiting = add_loc("waiting", &mut locations);
    let post_final = add_loc("post_final", &mut locations);

    let word_actions: Vec<&String> = sigma.iter().filter(|s| !is_reserved_action(s)).collect();
    let reset_new: BTreeSet<String> = BTreeSet::from([x_new.clone()]);
    let mut edges = Vec::new();
    for act in &word_actions {
        edges.push(Edge {
            source: waiting,
            guard: Vec::new(),
            action: (*act).clone(),
            resets: reset_new.clone(),
            target: waiting,
        });
        edges.push(Edge {
            source: pre_initial,
            guard: Vec::new(),
            action: (*act).clone(),
            resets: reset_new.clone(),
            target: waiting,
        });
    }
    let all_pattern_clocks: BTreeSet<String> =
        clocks.iter().filter(|c| **c != x_abs).cloned().collect();
    let at_t = GuardAtom::param(x_abs.clone(), CmpOp::Eq, T_PARAM);
    edges.push(Edge {
        source: waiting,
        guard: vec![at_t.clone(), GuardAtom::constant(x_new.clone(), CmpOp::Gt, Rational::from_integer(0.into()))],
        action: START.to_string(),
        resets: all_pattern_clocks.clone(),
        target: a.initial,
    });
    edges.push(Edge {
        source: pre_initial,
        guard: vec![at_t],
        action: START.to_string(),
        resets: all_pattern_clocks,
        target: a.initial,
    });
    for e in &a.edges {
        let mut e = e.clone();
        if e.action == TERMINAL {
            e.guard
                .push(GuardAtom::param(x_abs.clone(), CmpOp::Eq, T_PRIME_PARAM));
            e.resets.insert(x_new.clone());
        }
        edges.push(e);
    }
    edges.push(Edge {
        source: final_loc,
        guard: vec![GuardAtom::constant(x_new.clone(), CmpOp::Gt, Rational::from_integer(0.into()))],
        action: END.to_string(),
        resets: BTreeSet::new(),
        target: post_final,
    });

    let pta = Pta {
        alphabet: a.alphabet.clone(),
        locations,
        initial: pre_initial,
        accepting: BTreeSet::from([post_final]),
        clocks,
        params,
        invariants,
        edges,
    };
    pta.validate()?;
    Ok(SymbolicPattern {
        pta,
        x_abs,
        x_new,
        pre_initial,
        waiting,
        post_final,
    })
}

/// The word as a linear automaton over the clock `x_abs`: edge `k` fires at
/// exactly `τ_k`, and location `w_k` cannot be left later than `τ_{k+1}`.
pub fn tw2pta(w: &TimedWord, x_abs: &str) -> Pta {
    let n = w.len();
    let locations: Vec<String> = (0..=n).map(|k| format!("w{k}")).collect();
    let invariants: Vec<Guard> = (0..=n)
        .map(|k| {
            if k < n {
                vec![GuardAtom::constant(x_abs, CmpOp::Le, w.time(k + 1).clone())]
            } else {
                Vec::new()
            }
        })
        .collect();
    let edges = w
        .events()
        .iter()
        .enumerate()
        .map(|(k, e)| Edge {
            source: k,
            guard: vec![GuardAtom::constant(x_abs, CmpOp::Eq, e.time.clone())],
            action: e.action.clone(),
            resets: BTreeSet::new(),
            target: k + 1,
        })
        .collect();
    Pta {
        alphabet: w.alphabet(),
        locations,
        initial: 0,
        accepting: BTreeSet::new(),
        clocks: vec![x_abs.to_string()],
        params: Vec::new(),
        invariants,
        edges,
    }
}

/// Materializes the full strong-broadcast product (every location tuple).
///
/// Meant for small automata; the engine explores [`Product`] lazily instead.
pub fn sync_product(automata: &[Pta]) -> Result<Pta, TransformError> {
    if automata.is_empty() {
        return Err(TransformError::IllFormed("empty product".into()));
    }
    if automata.len() == 1 {
        return Ok(automata[0].clone());
    }
    let sizes: Vec<usize> = automata.iter().map(|a| a.locations.len()).collect();
    let total: usize = sizes.iter().product();
    let encode = |tuple: &[usize]| tuple.iter().zip(&sizes).fold(0, |acc, (l, s)| acc * s + l);
    let decode = |mut code: usize| {
        let mut tuple = vec![0; sizes.len()];
        for i in (0..sizes.len()).rev() {
            tuple[i] = code % sizes[i];
            code /= sizes[i];
        }
        tuple
    };

    let alphabets: Vec<BTreeSet<String>> = automata.iter().map(Pta::effective_alphabet).collect();
    let all_actions: BTreeSet<String> = alphabets.iter().flatten().cloned().collect();
    let mut clocks = Vec::new();
    let mut params = Vec::new();
    for a in automata {
        for c in &a.clocks {
            if !clocks.contains(c) {
                clocks.push(c.clone());
            }
        }
        for p in &a.params {
            if !params.contains(p) {
                params.push(p.clone());
            }
        }
    }

    let mut locations = Vec::with_capacity(total);
    let mut invariants = Vec::with_capacity(total);
    let mut accepting = BTreeSet::new();
    let mut edges = Vec::new();
    for code in 0..total {
        let tuple = decode(code);
        let names: Vec<&str> = tuple
            .iter()
            .zip(automata)
            .map(|(&l, a)| a.locations[l].as_str())
            .collect();
        locations.push(format!("({})", names.join(",")));
        invariants.push(
            tuple
                .iter()
                .zip(automata)
                .flat_map(|(&l, a)| a.invariants[l].iter().cloned())
                .collect(),
        );
        if tuple.iter().zip(automata).any(|(l, a)| a.accepting.contains(l)) {
            accepting.insert(code);
        }
        for act in &all_actions {
            let participants: Vec<usize> = (0..automata.len())
                .filter(|&i| alphabets[i].contains(act))
                .collect();
            let choices: Vec<Vec<&Edge>> = participants
                .iter()
                .map(|&i| {
                    automata[i]
                        .edges_from(tuple[i])
                        .filter(|e| &e.action == act)
                        .collect()
                })
                .collect();
            for combo in cartesian(&choices) {
                let mut target = tuple.clone();
                let mut guard = Vec::new();
                let mut resets = BTreeSet::new();
                for (&i, e) in participants.iter().zip(&combo) {
                    target[i] = e.target;
                    guard.extend(e.guard.iter().cloned());
                    resets.extend(e.resets.iter().cloned());
                }
                edges.push(Edge {
                    source: code,
                    guard,
                    action: act.clone(),
                    resets,
                    target: encode(&target),
                });
            }
        }
    }
    let initial = encode(&automata.iter().map(|a| a.initial).collect::<Vec<_>>());
    let alphabet = automata.iter().flat_map(|a| a.alphabet.iter().cloned()).collect();
    Ok(Pta {
        alphabet,
        locations,
        initial,
        accepting,
        clocks,
        params,
        invariants,
        edges,
    })
}

fn cartesian<'a, T>(choices: &[Vec<&'a T>]) -> Vec<Vec<&'a T>> {
    let mut out: Vec<Vec<&T>> = vec![Vec::new()];
    for options in choices {
        let mut next = Vec::with_capacity(out.len() * options.len());
        for prefix in &out {
            for o in options {
                let mut v = prefix.clone();
                v.push(*o);
                next.push(v);
            }
        }
        out = next;
    }
    out
}

fn fresh_name(base: &str, taken: &BTreeSet<String>) -> String {
    if !taken.contains(base) {
        return base.to_string();
    }
    (1..)
        .map(|i| format!("{base}_{i}"))
        .find(|n| !taken.contains(n))
        .expect("unbounded supply")
}

/// A guard or invariant compiled to linear atoms over a product space.
pub(crate) fn compile_guard(space: &VarSpace, guard: &[GuardAtom]) -> Vec<LinAtom> {
    let dim = space.dim();
    guard
        .iter()
        .flat_map(|g| {
            let x = space.index(&g.clock).expect("clock in product space");
            let mut coeffs = vec![Rational::from_integer(0.into()); dim];
            coeffs[x] = Rational::from_integer(1.into());
            let mut bound = Rational::from_integer(0.into());
            match &g.rhs {
                Rhs::Const(c) => bound = c.clone(),
                Rhs::Param(p) => {
                    let i = space.index(p).expect("param in product space");
                    coeffs[i] = Rational::from_integer((-1).into());
                }
            }
            let neg = |v: &[Rational]| v.iter().map(|c| -c).collect::<Vec<_>>();
            match g.op {
                CmpOp::Lt => vec![LinAtom::new(&coeffs, Rel::Lt, bound)],
                CmpOp::Le => vec![LinAtom::new(&coeffs, Rel::Le, bound)],
                CmpOp::Eq => vec![LinAtom::new(&coeffs, Rel::Eq, bound)],
                CmpOp::Ge => vec![LinAtom::new(&neg(&coeffs), Rel::Le, -bound)],
                CmpOp::Gt => vec![LinAtom::new(&neg(&coeffs), Rel::Lt, -bound)],
            }
        })
        .collect()
}

#[derive(Debug, Clone)]
struct CompiledEdge {
    guard: Vec<LinAtom>,
    resets: Vec<usize>,
    target: usize,
}

#[derive(Debug, Clone)]
struct Component {
    invariants: Vec<Vec<LinAtom>>,
    accepting: BTreeSet<usize>,
    initial: usize,
    /// Outgoing edges per location, keyed by action id.
    out: Vec<BTreeMap<usize, Vec<CompiledEdge>>>,
    alphabet: BTreeSet<usize>,
    location_names: Vec<String>,
}

/// One transition of the lazy product.
#[derive(Debug, Clone)]
pub struct Transition {
    pub action: String,
    pub guard: Vec<LinAtom>,
    pub resets: Vec<usize>,
    pub target: Vec<usize>,
}

/// A strong-broadcast product explored on demand. Guards, invariants and
/// resets are compiled once over a shared variable space.
#[derive(Debug, Clone)]
pub struct Product {
    space: Space,
    actions: Vec<String>,
    components: Vec<Component>,
    max_branching: usize,
}

impl Product {
    /// `params` fixes the order of parameter variables; any parameter of a
    /// component not listed is appended.
    pub fn new(automata: &[Pta], params: &[String]) -> Result<Product, TransformError> {
        if automata.is_empty() {
            return Err(TransformError::IllFormed("empty product".into()));
        }
        let mut vars: Vec<(String, VarKind)> = Vec::new();
        let mut seen = BTreeSet::new();
        for a in automata {
            a.validate()?;
            for c in &a.clocks {
                if seen.insert(c.clone()) {
                    vars.push((c.clone(), VarKind::Clock));
                }
            }
        }
        for p in params.iter().chain(automata.iter().flat_map(|a| &a.params)) {
            if seen.insert(p.clone()) {
                vars.push((p.clone(), VarKind::Param));
            }
        }
        let space = VarSpace::new(vars).map_err(|e| TransformError::IllFormed(e.to_string()))?;

        let mut actions: Vec<String> = Vec::new();
        let mut action_ids: HashMap<String, usize> = HashMap::new();
        let mut id_of = |a: &str, actions: &mut Vec<String>| -> usize {
            *action_ids.entry(a.to_string()).or_insert_with(|| {
                actions.push(a.to_string());
                actions.len() - 1
            })
        };
        let mut components = Vec::new();
        for a in automata {
            let alphabet = a
                .effective_alphabet()
                .iter()
                .map(|s| id_of(s, &mut actions))
                .collect();
            let mut out: Vec<BTreeMap<usize, Vec<CompiledEdge>>> =
                vec![BTreeMap::new(); a.locations.len()];
            for e in &a.edges {
                let id = id_of(&e.action, &mut actions);
                let resets = e
                    .resets
                    .iter()
                    .map(|c| space.index(c).expect("declared clock"))
                    .collect();
                out[e.source].entry(id).or_default().push(CompiledEdge {
                    guard: compile_guard(&space, &e.guard),
                    resets,
                    target: e.target,
                });
            }
            components.push(Component {
                invariants: a.invariants.iter().map(|g| compile_guard(&space, g)).collect(),
                accepting: a.accepting.clone(),
                initial: a.initial,
                out,
                alphabet,
                location_names: a.locations.clone(),
            });
        }
        let max_branching = automata.iter().map(Pta::max_branching).max().unwrap_or(1);
        Ok(Product {
            space,
            actions,
            components,
            max_branching,
        })
    }

    pub fn space(&self) -> &Space {
        &self.space
    }

    pub fn initial(&self) -> Vec<usize> {
        self.components.iter().map(|c| c.initial).collect()
    }

    pub fn is_accepting(&self, locs: &[usize]) -> bool {
        self.components
            .iter()
            .zip(locs)
            .any(|(c, l)| c.accepting.contains(l))
    }

    pub fn invariant(&self, locs: &[usize]) -> Vec<LinAtom> {
        self.components
            .iter()
            .zip(locs)
            .flat_map(|(c, &l)| c.invariants[l].iter().cloned())
            .collect()
    }

    /// Largest same-action out-degree over all components (at least 1).
    pub fn max_branching(&self) -> usize {
        self.max_branching
    }

    pub fn location_name(&self, locs: &[usize]) -> String {
        let names: Vec<&str> = self
            .components
            .iter()
            .zip(locs)
            .map(|(c, &l)| c.location_names[l].as_str())
            .collect();
        format!("({})", names.join(","))
    }

    /// Outgoing transitions in action order, then per-component edge order.
    pub fn transitions(&self, locs: &[usize]) -> Vec<Transition> {
        let mut candidate_actions: BTreeSet<usize> = BTreeSet::new();
        for (c, &l) in self.components.iter().zip(locs) {
            candidate_actions.extend(c.out[l].keys());
        }
        let mut result = Vec::new();
        for act in candidate_actions {
            let mut partial: Vec<(Vec<LinAtom>, Vec<usize>, Vec<usize>)> =
                vec![(Vec::new(), Vec::new(), locs.to_vec())];
            for (i, c) in self.components.iter().enumerate() {
                if !c.alphabet.contains(&act) {
                    continue;
                }
                let Some(edges) = c.out[locs[i]].get(&act) else {
                    partial.clear();
                    break;
                };
                let mut next = Vec::with_capacity(partial.len() * edges.len());
                for (g, r, t) in &partial {
                    for e in edges {
                        let mut g = g.clone();
                        g.extend(e.guard.iter().cloned());
                        let mut r = r.clone();
                        for &x in &e.resets {
                            if !r.contains(&x) {
                                r.push(x);
                            }
                        }
                        let mut t = t.clone();
                        t[i] = e.target;
                        next.push((g, r, t));
                    }
                }
                partial = next;
            }
            for (guard, resets, target) in partial {
                result.push(Transition {
                    action: self.actions[act].clone(),
                    guard,
                    resets,
                    target,
                });
            }
        }
        result
    }
}

/// Everything the matcher explores for one pattern and one word.
#[derive(Debug, Clone)]
pub struct Pipeline {
    pub product: Product,
    pub symbolic: SymbolicPattern,
    /// Original pattern parameters followed by `t` and `t_prime`.
    pub result_params: Vec<String>,
}

/// Normalizes `pattern` over the word's alphabet, builds the symbolic
/// pattern and the word automaton, and pairs them in a lazy product.
pub fn build_pipeline(
    pattern: &Pta,
    w: &TimedWord,
    opts: SymbolicOptions,
) -> Result<Pipeline, TransformError> {
    let sigma = w.alphabet();
    let normalized = normalize_pattern(pattern, &sigma)?;
    let symbolic = make_symbolic(&normalized, &sigma, opts)?;
    let word = tw2pta(w, &symbolic.x_abs);
    let result_params = symbolic.pta.params.clone();
    let product = Product::new(&[symbolic.pta.clone(), word], &result_params)?;
    Ok(Pipeline {
        product,
        symbolic,
        result_params,
    })
}
