//! Fourier–Motzkin elimination over integer-primitive rows.
//!
//! Every routine here works on plain atom lists. `simplify` is the cheap pass
//! run after each step: it drops trivial atoms, keeps only the tightest bound
//! per direction, fuses opposite bounds into equalities and detects
//! contradictions between parallel rows.

use rustc_hash::FxHashMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::{LinAtom, Rel};
use crate::rational::Rational;

/// Returns `None` when the atoms are contradictory.
pub(crate) fn simplify(atoms: Vec<LinAtom>) -> Option<Vec<LinAtom>> {
    let mut eqs: Vec<LinAtom> = Vec::new();
    let mut eq_index: FxHashMap<Vec<BigInt>, usize> = FxHashMap::default();
    let mut ineqs: Vec<LinAtom> = Vec::with_capacity(atoms.len());

    for atom in atoms {
        if atom.is_constant() {
            if !atom.constant_holds() {
                return None;
            }
            continue;
        }
        if atom.rel == Rel::Eq {
            match eq_index.get(&atom.coeffs) {
                Some(&i) => {
                    if eqs[i].bound != atom.bound {
                        return None;
                    }
                }
                None => {
                    eq_index.insert(atom.coeffs.clone(), eqs.len());
                    eqs.push(atom);
                }
            }
        } else {
            ineqs.push(atom);
        }
    }

    // Inequalities: tightest per direction, checked against equalities.
    let mut kept: Vec<LinAtom> = Vec::with_capacity(ineqs.len());
    let mut dir_index: FxHashMap<Vec<BigInt>, usize> = FxHashMap::default();
    for atom in ineqs {
        let (eq_key, flipped) = eq_key(&atom.coeffs);
        if let Some(&i) = eq_index.get(&eq_key) {
            // atom: a·x ⋈ b, equality gives a·x = c (sign per `flipped`).
            let c = if flipped { -&eqs[i].bound } else { eqs[i].bound.clone() };
            let ok = match atom.rel {
                Rel::Le => c <= atom.bound,
                Rel::Lt => c < atom.bound,
                Rel::Eq => unreachable!(),
            };
            if !ok {
                return None;
            }
            continue;
        }
        match dir_index.get(&atom.coeffs) {
            Some(&i) => {
                if tighter(&atom, &kept[i]) {
                    kept[i] = atom;
                }
            }
            None => {
                dir_index.insert(atom.coeffs.clone(), kept.len());
                kept.push(atom);
            }
        }
    }

    // Opposite directions: a·x ≤ b and -a·x ≤ b'.
    let mut drop = vec![false; kept.len()];
    for i in 0..kept.len() {
        if drop[i] {
            continue;
        }
        let neg: Vec<BigInt> = kept[i].coeffs.iter().map(|c| -c).collect();
        let Some(&j) = dir_index.get(&neg) else { continue };
        if drop[j] || j < i {
            continue;
        }
        let upper = &kept[i].bound;
        let lower = -&kept[j].bound;
        if &lower > upper {
            return None;
        }
        if &lower == upper {
            if kept[i].rel == Rel::Lt || kept[j].rel == Rel::Lt {
                return None;
            }
            drop[i] = true;
            drop[j] = true;
            let eq = LinAtom::normalized(kept[i].coeffs.clone(), Rel::Eq, upper.clone());
            eqs.push(eq);
        }
    }

    let mut out = eqs;
    out.extend(
        kept.into_iter()
            .zip(drop)
            .filter(|(_, d)| !d)
            .map(|(a, _)| a),
    );
    Some(out)
}

/// [`simplify`], then equalities in reduced echelon form (pivot = lowest
/// variable index) with every pivot substituted out of the other atoms.
pub(crate) fn reduce(atoms: Vec<LinAtom>) -> Option<Vec<LinAtom>> {
    let mut current = simplify(atoms)?;
    loop {
        let (eqs, mut rest): (Vec<LinAtom>, Vec<LinAtom>) =
            current.into_iter().partition(|a| a.rel == Rel::Eq);
        if eqs.is_empty() {
            return Some(rest);
        }
        let mut pivots: Vec<(usize, LinAtom)> = Vec::with_capacity(eqs.len());
        for eq in eqs {
            let mut e = eq;
            for (k, p) in &pivots {
                e = substitute_eq(&e, p, *k);
            }
            if e.is_constant() {
                if !e.constant_holds() {
                    return None;
                }
                continue;
            }
            let k = e.coeffs.iter().position(|c| !c.is_zero()).expect("non-constant");
            for (_, p) in pivots.iter_mut() {
                *p = substitute_eq(p, &e, k);
            }
            pivots.push((k, e));
        }
        let before = pivots.len();
        for a in rest.iter_mut() {
            for (k, p) in &pivots {
                *a = substitute_eq(a, p, *k);
            }
        }
        pivots.sort_by_key(|(k, _)| *k);
        let mut all: Vec<LinAtom> = pivots.into_iter().map(|(_, p)| p).collect();
        all.append(&mut rest);
        current = simplify(all)?;
        if current.iter().filter(|a| a.rel == Rel::Eq).count() == before {
            return Some(current);
        }
    }
}

fn tighter(a: &LinAtom, b: &LinAtom) -> bool {
    a.bound < b.bound || (a.bound == b.bound && a.rel == Rel::Lt && b.rel == Rel::Le)
}

/// Key under which an equality parallel to `coeffs` would be stored.
fn eq_key(coeffs: &[BigInt]) -> (Vec<BigInt>, bool) {
    let first_negative = coeffs
        .iter()
        .find(|c| !c.is_zero())
        .is_some_and(|c| c.is_negative());
    if first_negative {
        (coeffs.iter().map(|c| -c).collect(), true)
    } else {
        (coeffs.to_vec(), false)
    }
}

/// Combines `p` (positive coefficient on `k`) and `n` (negative) so that `k` cancels.
fn combine(p: &LinAtom, n: &LinAtom, k: usize) -> LinAtom {
    let pk = &p.coeffs[k];
    let nk = -&n.coeffs[k];
    let coeffs: Vec<BigInt> = p
        .coeffs
        .iter()
        .zip(&n.coeffs)
        .map(|(a, b)| a * &nk + b * pk)
        .collect();
    let bound = &p.bound * Rational::from_integer(nk) + &n.bound * Rational::from_integer(pk.clone());
    let rel = if p.rel == Rel::Lt || n.rel == Rel::Lt {
        Rel::Lt
    } else {
        Rel::Le
    };
    LinAtom::normalized(coeffs, rel, bound)
}

/// Rewrites `atom` with variable `k` replaced using the equality `eq`.
fn substitute_eq(atom: &LinAtom, eq: &LinAtom, k: usize) -> LinAtom {
    let ak = &atom.coeffs[k];
    if ak.is_zero() {
        return atom.clone();
    }
    let ek = &eq.coeffs[k];
    let scale = ek.abs();
    let factor = if ek.is_negative() { -ak } else { ak.clone() };
    let coeffs: Vec<BigInt> = atom
        .coeffs
        .iter()
        .zip(&eq.coeffs)
        .map(|(a, e)| a * &scale - e * &factor)
        .collect();
    let bound = &atom.bound * Rational::from_integer(scale) - &eq.bound * Rational::from_integer(factor);
    LinAtom::normalized(coeffs, atom.rel, bound)
}

/// One elimination step. Returns the atoms that mentioned `k` (for witness
/// reconstruction) alongside the projected system, or `None` when infeasible.
pub(crate) fn eliminate_one(
    atoms: Vec<LinAtom>,
    k: usize,
) -> Option<(Vec<LinAtom>, Vec<LinAtom>)> {
    let pivot = atoms
        .iter()
        .enumerate()
        .filter(|(_, a)| a.rel == Rel::Eq && !a.coeffs[k].is_zero())
        .min_by_key(|(_, a)| a.support())
        .map(|(i, _)| i);

    if let Some(pi) = pivot {
        let eq = atoms[pi].clone();
        let mut out = Vec::with_capacity(atoms.len());
        for (i, a) in atoms.iter().enumerate() {
            if i != pi {
                out.push(substitute_eq(a, &eq, k));
            }
        }
        return simplify(out).map(|s| (vec![eq], s));
    }

    let mut pos = Vec::new();
    let mut neg = Vec::new();
    let mut rest = Vec::new();
    for a in atoms {
        match a.coeffs[k].sign() {
            num_bigint::Sign::Plus => pos.push(a),
            num_bigint::Sign::Minus => neg.push(a),
            num_bigint::Sign::NoSign => rest.push(a),
        }
    }
    for p in &pos {
        for n in &neg {
            rest.push(combine(p, n, k));
        }
    }
    let mut involved = pos;
    involved.extend(neg);
    simplify(rest).map(|s| (involved, s))
}

/// Variable order heuristic: equalities first, then the smallest FM product.
pub(crate) fn pick_variable(atoms: &[LinAtom], candidates: &[usize]) -> Option<usize> {
    let mut best: Option<(usize, (u8, isize))> = None;
    for &k in candidates {
        let mut pos = 0usize;
        let mut neg = 0usize;
        let mut has_eq = false;
        for a in atoms {
            let c = &a.coeffs[k];
            if c.is_zero() {
                continue;
            }
            if a.rel == Rel::Eq {
                has_eq = true;
            } else if c.is_positive() {
                pos += 1;
            } else {
                neg += 1;
            }
        }
        if !has_eq && pos + neg == 0 {
            continue;
        }
        let score = if has_eq {
            (0, 0)
        } else {
            (1, (pos * neg) as isize - (pos + neg) as isize)
        };
        if best.as_ref().is_none_or(|(_, s)| score < *s) {
            best = Some((k, score));
        }
    }
    best.map(|(k, _)| k)
}

/// Projects away every variable in `vars`. `None` means infeasible.
pub(crate) fn eliminate_all(atoms: Vec<LinAtom>, vars: &[usize]) -> Option<Vec<LinAtom>> {
    let mut current = simplify(atoms)?;
    let mut remaining: Vec<usize> = vars.to_vec();
    while let Some(k) = pick_variable(&current, &remaining) {
        remaining.retain(|&v| v != k);
        current = eliminate_one(current, k)?.1;
    }
    Some(current)
}

/// A satisfying point, or `None` if the system is infeasible.
pub(crate) fn witness(atoms: Vec<LinAtom>, dim: usize) -> Option<Vec<Rational>> {
    let mut current = simplify(atoms)?;
    let all: Vec<usize> = (0..dim).collect();
    let mut steps: Vec<(usize, Vec<LinAtom>)> = Vec::new();
    let mut remaining = all;
    while let Some(k) = pick_variable(&current, &remaining) {
        remaining.retain(|&v| v != k);
        let (involved, next) = eliminate_one(current, k)?;
        steps.push((k, involved));
        current = next;
    }
    let mut point = vec![Rational::zero(); dim];
    for (k, involved) in steps.into_iter().rev() {
        point[k] = choose_value(&involved, k, &point);
    }
    Some(point)
}

fn choose_value(atoms: &[LinAtom], k: usize, point: &[Rational]) -> Rational {
    let mut lower: Option<(Rational, bool)> = None;
    let mut upper: Option<(Rational, bool)> = None;
    for a in atoms {
        let ak = Rational::from_integer(a.coeffs[k].clone());
        let mut rhs = a.bound.clone();
        for (i, c) in a.coeffs.iter().enumerate() {
            if i != k && !c.is_zero() {
                rhs -= Rational::from_integer(c.clone()) * &point[i];
            }
        }
        let value = rhs / &ak;
        if a.rel == Rel::Eq {
            return value;
        }
        let strict = a.rel == Rel::Lt;
        if ak.is_positive() {
            if upper.as_ref().is_none_or(|(u, s)| value < *u || (value == *u && strict && !s)) {
                upper = Some((value, strict));
            }
        } else if lower.as_ref().is_none_or(|(l, s)| value > *l || (value == *l && strict && !s)) {
            lower = Some((value, strict));
        }
    }
    match (lower, upper) {
        (Some((l, _)), Some((u, _))) if l == u => l,
        (Some((l, _)), Some((u, _))) => (l + u) / Rational::from_integer(BigInt::from(2)),
        (Some((l, _)), None) => l.floor() + Rational::one(),
        (None, Some((u, _))) => u.ceil() - Rational::one(),
        (None, None) => Rational::zero(),
    }
}

pub(crate) fn gcd_all(values: &[BigInt]) -> BigInt {
    values
        .iter()
        .fold(BigInt::zero(), |g, v| if v.is_zero() { g } else { g.gcd(v) })
}
