use super::*;
use crate::model::{parse_guard, Event, PtaBuilder};
use crate::patterns;
use crate::polyhedron::Bounds;
use crate::rational::{int, parse_decimal, ratio};
use crate::transform::{make_symbolic, normalize_pattern, sync_product, tw2pta, T_PARAM, T_PRIME_PARAM};

fn dec(s: &str) -> Rational {
    parse_decimal(s).unwrap()
}

fn atom(space: &Space, terms: &[(&str, i64)], rel: Rel, bound: Rational) -> LinAtom {
    let t: Vec<(&str, Rational)> = terms.iter().map(|(n, c)| (*n, int(*c))).collect();
    LinAtom::from_terms(space, &t, rel, bound).unwrap()
}

fn cmp(space: &Space, v: &str, op: &str, b: Rational) -> LinAtom {
    LinAtom::var_cmp(space, v, op, b).unwrap()
}

/// The three disjuncts of the running example, over (p1, p2, t, t_prime).
fn example_expected(space: &Space) -> DisjPoly {
    let s = space;
    let d = |t_lo: &str, t_hi: &str, tp_lo: &str, tp_hi: Option<&str>, p2: &str| {
        let mut atoms = vec![
            cmp(s, "t", ">", dec(t_lo)),
            atom(s, &[("t", 1), ("p1", 1)], Rel::Lt, dec(t_hi)),
            cmp(s, "t_prime", ">=", dec(tp_lo)),
            cmp(s, "p2", ">", dec(p2)),
            cmp(s, "p1", ">=", int(0)),
        ];
        if let Some(h) = tp_hi {
            atoms.push(cmp(s, "t_prime", "<", dec(h)));
        }
        ConvexPoly::from_atoms(s.clone(), atoms).unwrap()
    };
    DisjPoly::from_disjuncts(
        s.clone(),
        vec![
            d("1.7", "2.8", "4.9", Some("5.3"), "1.2"),
            d("2.8", "3.7", "5.3", Some("6"), "1.2"),
            d("3.7", "4.9", "6", None, "0.7"),
        ],
    )
    .unwrap()
}

fn valuation(pairs: &[(&str, Rational)]) -> ParamValuation {
    pairs.iter().map(|(k, v)| (k.to_string(), v.clone())).collect()
}

#[test]
fn example_match_set_is_exact() {
    let m = match_set(&patterns::example(), &patterns::example_word(), &EngineOptions::default()).unwrap();
    assert_eq!(m.stats.matches, 3);
    assert_eq!(m.set.len(), 3);
    assert_eq!(m.space().names(), &["p1", "p2", "t", "t_prime"]);
    let expected = example_expected(m.space());
    assert!(m.set.same_set(&expected).unwrap());
}

#[test]
fn example_fixed_valuation() {
    let v = valuation(&[("p1", int(1)), ("p2", int(1))]);
    let m = match_set_fixed(&patterns::example(), &patterns::example_word(), &v, &EngineOptions::default()).unwrap();
    let s = m.space().clone();
    assert_eq!(s.names(), &[T_PARAM, T_PRIME_PARAM]);
    let expected = DisjPoly::from_disjuncts(
        s.clone(),
        vec![ConvexPoly::from_atoms(
            s.clone(),
            vec![
                cmp(&s, "t", ">", dec("3.7")),
                cmp(&s, "t", "<", dec("3.9")),
                cmp(&s, "t_prime", ">=", int(6)),
            ],
        )
        .unwrap()],
    )
    .unwrap();
    assert!(m.set.same_set(&expected).unwrap());

    let full = match_set(&patterns::example(), &patterns::example_word(), &EngineOptions::default()).unwrap();
    assert!(instantiate(&full.set, &v).unwrap().same_set(&expected).unwrap());

    let none = valuation(&[("p1", int(2)), ("p2", int(1))]);
    let m = match_set_fixed(&patterns::example(), &patterns::example_word(), &none, &EngineOptions::default()).unwrap();
    assert!(m.is_empty());

    let partial = valuation(&[("p1", int(1))]);
    assert!(match_set_fixed(&patterns::example(), &patterns::example_word(), &partial, &EngineOptions::default()).is_err());
}

#[test]
fn empty_word_never_matches_gear() {
    let v = valuation(&[("p", int(5))]);
    let m = match_set_fixed(&patterns::gear(), &TimedWord::empty(), &v, &EngineOptions::default()).unwrap();
    assert!(m.is_empty());
}

#[test]
fn example_optimization() {
    let opts = EngineOptions::default();
    let (a, w) = (patterns::example(), patterns::example_word());
    let r = optimize(&a, &w, "p2", Direction::Min, &opts).unwrap();
    assert_eq!(r.optimum, Some(Bound::finite(dec("0.7"), true)));
    let r = optimize(&a, &w, "p1", Direction::Max, &opts).unwrap();
    assert_eq!(r.optimum, Some(Bound::finite(dec("1.2"), true)));
    let r = optimize(&a, &w, "p2", Direction::Max, &opts).unwrap();
    assert_eq!(r.optimum, Some(Bound::Unbounded));
    let r = optimize(&a, &w, "p1", Direction::Min, &opts).unwrap();
    assert_eq!(r.optimum, Some(Bound::finite(int(0), false)));
    assert_eq!(
        optimize(&a, &w, "q", Direction::Min, &opts).unwrap_err(),
        EngineError::UnknownParam("q".into())
    );
}

#[test]
fn infeasible_optimization() {
    let w = TimedWord::new(vec![Event::new("g2", int(1)), Event::new("g3", int(2))]).unwrap();
    let r = optimize(&patterns::gear(), &w, "p", Direction::Min, &EngineOptions::default()).unwrap();
    assert!(!r.feasible());
}

#[test]
fn optimization_agrees_with_full_match_set() {
    let opts = EngineOptions::default();
    let cases: Vec<(Pta, TimedWord)> = vec![
        (patterns::example(), patterns::example_word()),
        (patterns::blowup(), crate::gen::blowup_word(8, 3)),
        (patterns::gear(), crate::gen::gear_word(12, 5)),
    ];
    for (a, w) in cases {
        let full = match_set(&a, &w, &opts).unwrap();
        for p in &a.params {
            for dir in [Direction::Min, Direction::Max] {
                let r = optimize(&a, &w, p, dir, &opts).unwrap();
                let expect = full.set.bounds(p).ok().map(|b: Bounds| match dir {
                    Direction::Min => b.lower,
                    Direction::Max => b.upper,
                });
                assert_eq!(r.optimum, expect, "{p} {dir:?}");
                assert!(r.stats.states <= full.stats.states);
            }
        }
    }
}

#[test]
fn blowup_counts() {
    for n in 1..=6usize {
        let w = crate::gen::blowup_word(2 * n, n as u32);
        let m = match_set(&patterns::blowup(), &w, &EngineOptions::default()).unwrap();
        assert_eq!(m.stats.matches, n * (n + 1) / 2, "n = {n}");
        let ceiling = state_ceiling(w.len(), patterns::blowup().max_branching());
        assert!((m.stats.states as u128) <= ceiling);
    }
}

#[test]
fn subsumption_keeps_the_set() {
    let w = crate::gen::blowup_word(8, 11);
    let off = match_set(&patterns::blowup(), &w, &EngineOptions::default()).unwrap();
    let on = match_set(
        &patterns::blowup(),
        &w,
        &EngineOptions {
            subsumption: true,
            ..EngineOptions::default()
        },
    )
    .unwrap();
    assert!(on.set.len() <= off.set.len());
    assert!(on.set.same_set(&off.set).unwrap());
}

#[test]
fn clock_reuse_keeps_the_set() {
    let reuse = EngineOptions {
        symbolic: SymbolicOptions { reuse_clock: true },
        ..EngineOptions::default()
    };
    for (a, w) in [
        (patterns::example(), patterns::example_word()),
        (patterns::blowup(), crate::gen::blowup_word(6, 2)),
    ] {
        let plain = match_set(&a, &w, &EngineOptions::default()).unwrap();
        let fewer = match_set(&a, &w, &reuse).unwrap();
        assert!(plain.set.same_set(&fewer.set).unwrap());
    }
}

#[test]
fn lazy_and_materialized_products_agree() {
    let (a, w) = (patterns::example(), patterns::example_word());
    let sigma = w.alphabet();
    let s = make_symbolic(&normalize_pattern(&a, &sigma).unwrap(), &sigma, SymbolicOptions::default()).unwrap();
    let word = tw2pta(&w, &s.x_abs);
    let lazy = Product::new(&[s.pta.clone(), word.clone()], &s.pta.params).unwrap();
    let mat = Product::new(&[sync_product(&[s.pta.clone(), word]).unwrap()], &s.pta.params).unwrap();
    let opts = EngineOptions::default();
    let a = efsynth(&lazy, &opts).unwrap();
    let b = efsynth(&mat, &opts).unwrap();
    assert_eq!(a.set.len(), b.set.len());
    assert!(a.set.same_set(&b.set).unwrap());
}

fn one_edge(guard: &str) -> Product {
    let mut b = PtaBuilder::new();
    b.clock("x").param("p").action("a");
    let l0 = b.location("l0");
    let f = b.location("lf");
    b.accepting(f);
    b.edge(l0, f, "a", parse_guard(guard).unwrap(), &[]);
    Product::new(&[b.build().unwrap()], &[]).unwrap()
}

#[test]
fn efsynth_examples() {
    let opts = EngineOptions {
        subsumption: true,
        ..EngineOptions::default()
    };
    let ps = VarSpace::params(["p"]).unwrap();
    let r = efsynth(&one_edge("x <= p"), &opts).unwrap();
    let expect = DisjPoly::from_disjuncts(
        ps.clone(),
        vec![ConvexPoly::from_atoms(ps.clone(), vec![cmp(&ps, "p", ">=", int(0))]).unwrap()],
    )
    .unwrap();
    assert!(r.set.same_set(&expect).unwrap());

    let r = efsynth(&one_edge("x = p && x <= 2"), &opts).unwrap();
    let expect = DisjPoly::from_disjuncts(
        ps.clone(),
        vec![ConvexPoly::from_atoms(
            ps.clone(),
            vec![cmp(&ps, "p", ">=", int(0)), cmp(&ps, "p", "<=", int(2))],
        )
        .unwrap()],
    )
    .unwrap();
    assert!(r.set.same_set(&expect).unwrap());

    let r = efsynth(&one_edge("x < p && x > p"), &opts).unwrap();
    assert!(r.set.is_empty());
}

#[test]
fn state_limit_is_enforced() {
    let w = crate::gen::blowup_word(10, 1);
    let opts = EngineOptions {
        state_limit: Some(5),
        ..EngineOptions::default()
    };
    assert_eq!(
        match_set(&patterns::blowup(), &w, &opts).unwrap_err(),
        EngineError::StateLimit(5)
    );
}

#[test]
fn initial_state_examples() {
    let (a, w) = (patterns::example(), patterns::example_word());
    let p = crate::transform::build_pipeline(&a, &w, SymbolicOptions::default()).unwrap();
    let s0 = initial_state(&p.product, &[]).unwrap();
    let sp = p.product.space();
    let x_abs = p.symbolic.x_abs.as_str();
    let z = &s0.zone;
    assert!(z.bounds(x_abs).unwrap().upper == Bound::finite(dec("0.5"), false));
    assert!(z.bounds(x_abs).unwrap().lower == Bound::finite(int(0), false));
    let same = ConvexPoly::from_atoms(sp.clone(), vec![atom(sp, &[(x_abs, 1), ("x", -1)], Rel::Eq, int(0))]).unwrap();
    assert!(same.includes(z).unwrap());
    assert_eq!(z.bounds("t").unwrap().lower, Bound::finite(int(0), false));

    // invariant x <= 0 pins every clock to zero
    let mut b = PtaBuilder::new();
    b.clock("x").param("p").action("a");
    let l0 = b.location("l0");
    b.invariant(l0, parse_guard("x <= 0").unwrap());
    let prod = Product::new(&[b.build().unwrap()], &[]).unwrap();
    let s = initial_state(&prod, &[]).unwrap();
    assert_eq!(s.zone.bounds("x").unwrap().upper, Bound::finite(int(0), false));
    assert_eq!(s.zone.bounds("p").unwrap().upper, Bound::Unbounded);

    let mut b = PtaBuilder::new();
    b.clock("x").param("p").action("a");
    let l0 = b.location("l0");
    b.invariant(l0, parse_guard("x < 0").unwrap());
    let prod = Product::new(&[b.build().unwrap()], &[]).unwrap();
    assert_eq!(initial_state(&prod, &[]).unwrap_err(), EngineError::EmptyInitialZone);
}

#[test]
fn successor_examples() {
    let (a, w) = (patterns::example(), patterns::example_word());
    let p = crate::transform::build_pipeline(&a, &w, SymbolicOptions::default()).unwrap();
    let s0 = initial_state(&p.product, &[]).unwrap();
    let trs = p.product.transitions(&s0.locs);
    let start = trs.iter().find(|t| t.action == crate::model::START).unwrap();
    let s1 = successor(&p.product, &s0, start).unwrap();
    assert_eq!(s1.zone.bounds("t").unwrap().upper, Bound::finite(dec("0.5"), false));

    // the first word event fires at 0.5 but not at 0.9
    let first_a = trs.iter().find(|t| t.action == "a").unwrap();
    assert!(successor(&p.product, &s0, first_a).is_some());
    let mut late = first_a.clone();
    late.guard.push(LinAtom::var_cmp(p.product.space(), &p.symbolic.x_abs, "=", dec("0.9")).unwrap());
    assert!(successor(&p.product, &s0, &late).is_none());
}

#[test]
fn ceiling_formula() {
    assert_eq!(state_ceiling(0, 1), 3);
    assert_eq!(state_ceiling(2, 2), 5 * 3 * 4);
    assert_eq!(state_ceiling(200, 3), u128::MAX);
}

#[test]
fn better_ordering() {
    let f = |v: Rational, s: bool| Bound::finite(v, s);
    assert!(better(&f(int(1), false), &f(int(1), true), Direction::Min));
    assert!(!better(&f(int(1), true), &f(int(1), false), Direction::Min));
    assert!(better(&f(ratio(1, 2), true), &f(int(1), false), Direction::Min));
    assert!(better(&f(int(2), true), &f(int(1), false), Direction::Max));
    assert!(better(&Bound::Unbounded, &f(int(1), false), Direction::Max));
    assert!(!better(&f(int(1), false), &f(int(1), false), Direction::Min));
}
