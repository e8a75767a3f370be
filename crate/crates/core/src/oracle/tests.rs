use super::*;
use crate::model::{parse_guard, Event, PtaBuilder};
use crate::patterns;
use crate::rational::{int, parse_decimal, ratio};

fn dec(s: &str) -> Rational {
    parse_decimal(s).unwrap()
}

fn unit() -> ParamValuation {
    [("p1".to_string(), int(1)), ("p2".to_string(), int(1))].into()
}

fn seg(events: &[(&str, &str)]) -> Segment {
    Segment::new(events.iter().map(|(a, t)| Event::new(*a, dec(t))).collect()).unwrap()
}

#[test]
fn membership_examples() {
    let ta = patterns::example().valuate(&unit()).unwrap();
    let yes = seg(&[("a", "1.1"), ("a", "1.5"), ("a", "2.2"), ("$", "2.2")]);
    assert!(membership(&yes, &ta).unwrap());
    let no = seg(&[("a", "0.7"), ("a", "1.9"), ("a", "2.3"), ("a", "3.0"), ("$", "3.0")]);
    assert!(!membership(&no, &ta).unwrap());
    assert!(!membership(&seg(&[("$", "1")]), &ta).unwrap());
    assert_eq!(membership(&yes, &patterns::example()).unwrap_err(), OracleError::Parametric);
}

#[test]
fn membership_checks_invariants_during_delays() {
    let mut b = PtaBuilder::new();
    b.clock("x").action("a");
    let l0 = b.location("l0");
    let l1 = b.location("l1");
    b.accepting(l1);
    b.invariant(l0, parse_guard("x <= 1").unwrap());
    b.edge(l0, l1, "$", vec![], &[]);
    let ta = b.build().unwrap();
    assert!(membership(&seg(&[("$", "1")]), &ta).unwrap());
    assert!(!membership(&seg(&[("$", "1.5")]), &ta).unwrap());
}

#[test]
fn brute_force_example() {
    let got = brute_force_match_set(&patterns::example_word(), &patterns::example(), &unit()).unwrap();
    let s = got.space().clone();
    let cmp = |v: &str, op: &str, b: Rational| LinAtom::var_cmp(&s, v, op, b).unwrap();
    let expected = DisjPoly::from_disjuncts(
        s.clone(),
        vec![ConvexPoly::from_atoms(
            s.clone(),
            vec![
                cmp("t", ">", dec("3.7")),
                cmp("t", "<", dec("3.9")),
                cmp("t_prime", ">=", int(6)),
            ],
        )
        .unwrap()],
    )
    .unwrap();
    assert!(got.same_set(&expected).unwrap());
}

#[test]
fn brute_force_unsatisfiable_first_guard() {
    let mut b = PtaBuilder::new();
    b.clock("x").action("a");
    let l0 = b.location("l0");
    let l1 = b.location("l1");
    let l2 = b.location("l2");
    b.accepting(l2);
    b.edge(l0, l1, "a", parse_guard("x < 0").unwrap(), &[]);
    b.edge(l1, l2, "$", vec![], &[]);
    let ta = b.build().unwrap();
    let got = brute_force_match_set(&patterns::example_word(), &ta, &ParamValuation::new()).unwrap();
    assert!(got.is_empty());
}

#[test]
fn brute_force_blowup_abab() {
    let w = TimedWord::new(
        [("a", "1"), ("b", "1.1"), ("a", "5"), ("b", "5.1")]
            .iter()
            .map(|(a, t)| Event::new(*a, dec(t)))
            .collect(),
    )
    .unwrap();
    let v: ParamValuation = [
        ("p1".to_string(), dec("4.5")),
        ("p2".to_string(), int(1000)),
        ("p3".to_string(), ratio(1, 1000)),
    ]
    .into();
    let got = brute_force_match_set(&w, &patterns::blowup(), &v).unwrap();
    assert_eq!(got.len(), 3);
}

/// Every grid point is classified the same way by the match set and by
/// running the pattern on the segment.
#[test]
fn agreement_law() {
    let w = patterns::example_word();
    let ta = patterns::example().valuate(&unit()).unwrap();
    let set = brute_force_match_set(&w, &patterns::example(), &unit()).unwrap();
    let mut inside = 0;
    for a in 0..=160 {
        for b in (a + 1)..=160 {
            if a % 2 == 1 && b % 3 != 0 {
                continue;
            }
            let (t, tp) = (ratio(a, 20), ratio(b, 20));
            let seg = w.segment(&t, &tp).unwrap();
            let member = membership(&seg, &ta).unwrap();
            assert_eq!(member, set.contains(&[t.clone(), tp.clone()]), "t={t} t'={tp}");
            inside += member as usize;
        }
    }
    assert!(inside > 0);
}
