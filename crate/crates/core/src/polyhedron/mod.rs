//! Exact not-necessarily-closed convex polyhedra over the rationals and their
//! finite unions.
//!
//! A [`ConvexPoly`] is a conjunction of [`LinAtom`]s `a·x ⋈ b` with
//! `⋈ ∈ {≤, <, =}`. Rows are stored with primitive integer coefficients and a
//! rational bound; strictness is one flag per atom. Every geometric question
//! (emptiness, projection, inclusion, bounds) is answered by Fourier–Motzkin
//! elimination, where a combined row is strict iff one of its parents is.

mod fm;

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::rational::{to_display_string, Rational};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PolyError {
    #[error("operands live in different variable spaces")]
    SpaceMismatch,
    #[error("unknown variable `{0}`")]
    UnknownVar(String),
    #[error("duplicate variable `{0}`")]
    DuplicateVar(String),
    #[error("polyhedron is empty")]
    Empty,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum VarKind {
    Clock,
    Param,
}

/// Ordered, named variables with a fixed kind each.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct VarSpace {
    names: Vec<String>,
    kinds: Vec<VarKind>,
}

pub type Space = Arc<VarSpace>;

impl VarSpace {
    pub fn new<S: Into<String>>(vars: impl IntoIterator<Item = (S, VarKind)>) -> Result<Space, PolyError> {
        let mut names = Vec::new();
        let mut kinds = Vec::new();
        let mut seen = BTreeSet::new();
        for (name, kind) in vars {
            let name = name.into();
            if !seen.insert(name.clone()) {
                return Err(PolyError::DuplicateVar(name));
            }
            names.push(name);
            kinds.push(kind);
        }
        Ok(Arc::new(VarSpace { names, kinds }))
    }

    /// All variables as parameters.
    pub fn params<S: Into<String>>(names: impl IntoIterator<Item = S>) -> Result<Space, PolyError> {
        VarSpace::new(names.into_iter().map(|n| (n, VarKind::Param)))
    }

    pub fn dim(&self) -> usize {
        self.names.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, i: usize) -> &str {
        &self.names[i]
    }

    pub fn kind(&self, i: usize) -> VarKind {
        self.kinds[i]
    }

    pub fn index(&self, name: &str) -> Result<usize, PolyError> {
        self.names
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| PolyError::UnknownVar(name.to_string()))
    }

    pub fn indices_of(&self, kind: VarKind) -> Vec<usize> {
        (0..self.dim()).filter(|&i| self.kinds[i] == kind).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Rel {
    Le,
    Lt,
    Eq,
}

impl Rel {
    pub fn symbol(self) -> &'static str {
        match self {
            Rel::Le => "<=",
            Rel::Lt => "<",
            Rel::Eq => "=",
        }
    }
}

/// `coeffs · x  rel  bound`, with primitive integer coefficients.
///
/// Equalities have their first nonzero coefficient positive. An atom whose
/// coefficients are all zero is a constant truth or falsity.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LinAtom {
    coeffs: Vec<BigInt>,
    rel: Rel,
    bound: Rational,
}

impl LinAtom {
    /// Builds an atom from dense rational coefficients.
    pub fn new(coeffs: &[Rational], rel: Rel, bound: Rational) -> LinAtom {
        let lcm = coeffs
            .iter()
            .fold(BigInt::one(), |l, c| l.lcm(c.denom()));
        let scale = Rational::from_integer(lcm);
        let ints = coeffs
            .iter()
            .map(|c| (c * &scale).to_integer())
            .collect();
        LinAtom::normalized(ints, rel, bound * scale)
    }

    /// Builds an atom from `(variable, coefficient)` terms over `space`.
    pub fn from_terms(
        space: &VarSpace,
        terms: &[(&str, Rational)],
        rel: Rel,
        bound: Rational,
    ) -> Result<LinAtom, PolyError> {
        let mut dense = vec![Rational::zero(); space.dim()];
        for (name, c) in terms {
            dense[space.index(name)?] += c;
        }
        Ok(LinAtom::new(&dense, rel, bound))
    }

    /// `var ⋈ value` for a single variable, with `⋈` given as one of
    /// `<`, `<=`, `=`, `>=`, `>`.
    pub fn var_cmp(space: &VarSpace, var: &str, op: &str, value: Rational) -> Result<LinAtom, PolyError> {
        let (sign, rel) = match op {
            "<" => (1, Rel::Lt),
            "<=" => (1, Rel::Le),
            "=" => (1, Rel::Eq),
            ">=" => (-1, Rel::Le),
            ">" => (-1, Rel::Lt),
            _ => return Err(PolyError::UnknownVar(op.to_string())),
        };
        let s = Rational::from_integer(BigInt::from(sign));
        LinAtom::from_terms(space, &[(var, s.clone())], rel, value * s)
    }

    pub(crate) fn normalized(mut coeffs: Vec<BigInt>, rel: Rel, mut bound: Rational) -> LinAtom {
        let g = fm::gcd_all(&coeffs);
        if !g.is_zero() && !g.is_one() {
            for c in coeffs.iter_mut() {
                *c /= &g;
            }
            bound /= Rational::from_integer(g);
        }
        if rel == Rel::Eq && coeffs.iter().find(|c| !c.is_zero()).is_some_and(|c| c.is_negative()) {
            for c in coeffs.iter_mut() {
                *c = -&*c;
            }
            bound = -bound;
        }
        LinAtom { coeffs, rel, bound }
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    pub fn coeff(&self, i: usize) -> Rational {
        Rational::from_integer(self.coeffs[i].clone())
    }

    pub fn rel(&self) -> Rel {
        self.rel
    }

    pub fn bound(&self) -> &Rational {
        &self.bound
    }

    pub fn dim(&self) -> usize {
        self.coeffs.len()
    }

    pub(crate) fn support(&self) -> usize {
        self.coeffs.iter().filter(|c| !c.is_zero()).count()
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.iter().all(Zero::is_zero)
    }

    pub(crate) fn constant_holds(&self) -> bool {
        let zero = Rational::zero();
        match self.rel {
            Rel::Le => zero <= self.bound,
            Rel::Lt => zero < self.bound,
            Rel::Eq => zero == self.bound,
        }
    }

    pub fn holds_at(&self, point: &[Rational]) -> bool {
        let lhs: Rational = self
            .coeffs
            .iter()
            .zip(point)
            .filter(|(c, _)| !c.is_zero())
            .map(|(c, x)| Rational::from_integer(c.clone()) * x)
            .sum();
        match self.rel {
            Rel::Le => lhs <= self.bound,
            Rel::Lt => lhs < self.bound,
            Rel::Eq => lhs == self.bound,
        }
    }

    /// Closure of the atom (`<` relaxed to `<=`).
    pub fn closure(&self) -> LinAtom {
        let rel = if self.rel == Rel::Lt { Rel::Le } else { self.rel };
        LinAtom { rel, ..self.clone() }
    }

    /// The complement as a union of atoms (one atom, or two for an equality).
    pub fn negation(&self) -> Vec<LinAtom> {
        let neg: Vec<BigInt> = self.coeffs.iter().map(|c| -c).collect();
        let nb = -&self.bound;
        match self.rel {
            Rel::Le => vec![LinAtom::normalized(neg, Rel::Lt, nb)],
            Rel::Lt => vec![LinAtom::normalized(neg, Rel::Le, nb)],
            Rel::Eq => vec![
                LinAtom::normalized(self.coeffs.clone(), Rel::Lt, self.bound.clone()),
                LinAtom::normalized(neg, Rel::Lt, nb),
            ],
        }
    }

    /// Substitutes `value` for variable `i` and removes its column.
    fn without_var(&self, i: usize, value: &Rational) -> LinAtom {
        let bound = &self.bound - self.coeff(i) * value;
        let mut coeffs = self.coeffs.clone();
        coeffs.remove(i);
        LinAtom::normalized(coeffs, self.rel, bound)
    }

    /// Keeps only the columns listed in `keep` (their coefficients must be the
    /// only nonzero ones).
    fn restricted(&self, keep: &[usize]) -> LinAtom {
        let coeffs = keep.iter().map(|&i| self.coeffs[i].clone()).collect();
        LinAtom::normalized(coeffs, self.rel, self.bound.clone())
    }

    fn embedded(&self, map: &[usize], dim: usize) -> LinAtom {
        let mut coeffs = vec![BigInt::zero(); dim];
        for (i, c) in self.coeffs.iter().enumerate() {
            coeffs[map[i]] = c.clone();
        }
        LinAtom::normalized(coeffs, self.rel, self.bound.clone())
    }

    /// Human-readable rendering, e.g. `p2 > 7/10` or `t + p1 < 14/5`.
    pub fn render(&self, space: &VarSpace) -> String {
        let flip = self.rel != Rel::Eq
            && self
                .coeffs
                .iter()
                .find(|c| !c.is_zero())
                .is_some_and(|c| c.is_negative());
        let sign = if flip { -BigInt::one() } else { BigInt::one() };
        let mut lhs = String::new();
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let c = c * &sign;
            let name = space.name(i);
            let abs = c.abs();
            let term = if abs.is_one() {
                name.to_string()
            } else {
                format!("{abs}*{name}")
            };
            if lhs.is_empty() {
                if c.is_negative() {
                    lhs.push('-');
                }
                lhs.push_str(&term);
            } else {
                lhs.push_str(if c.is_negative() { " - " } else { " + " });
                lhs.push_str(&term);
            }
        }
        if lhs.is_empty() {
            lhs.push('0');
        }
        let op = match (self.rel, flip) {
            (Rel::Eq, _) => "=",
            (Rel::Le, false) => "<=",
            (Rel::Lt, false) => "<",
            (Rel::Le, true) => ">=",
            (Rel::Lt, true) => ">",
        };
        let bound = if flip { -&self.bound } else { self.bound.clone() };
        format!("{lhs} {op} {}", to_display_string(&bound))
    }
}

/// A bound on one variable: infimum or supremum, `strict` when not attained.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Bound {
    Unbounded,
    Finite { value: Rational, strict: bool },
}

impl Bound {
    pub fn finite(value: Rational, strict: bool) -> Bound {
        Bound::Finite { value, strict }
    }

    pub fn value(&self) -> Option<&Rational> {
        match self {
            Bound::Finite { value, .. } => Some(value),
            Bound::Unbounded => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Bounds {
    pub lower: Bound,
    pub upper: Bound,
}

/// A conjunction of atoms over a shared space. No atoms means the universe.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConvexPoly {
    space: Space,
    atoms: Vec<LinAtom>,
}

impl ConvexPoly {
    pub fn universe(space: Space) -> ConvexPoly {
        ConvexPoly {
            space,
            atoms: Vec::new(),
        }
    }

    /// A canonical empty polyhedron (`0 < 0`).
    pub fn empty(space: Space) -> ConvexPoly {
        let zero = vec![BigInt::zero(); space.dim()];
        ConvexPoly {
            atoms: vec![LinAtom::normalized(zero, Rel::Lt, Rational::zero())],
            space,
        }
    }

    pub fn from_atoms(space: Space, atoms: Vec<LinAtom>) -> Result<ConvexPoly, PolyError> {
        if atoms.iter().any(|a| a.dim() != space.dim()) {
            return Err(PolyError::SpaceMismatch);
        }
        Ok(ConvexPoly::settled(space, atoms))
    }

    /// Wraps atoms after the cheap simplification pass.
    fn settled(space: Space, atoms: Vec<LinAtom>) -> ConvexPoly {
        match fm::reduce(atoms) {
            Some(atoms) => ConvexPoly { space, atoms },
            None => ConvexPoly::empty(space),
        }
    }

    pub fn space(&self) -> &Space {
        &self.space
    }

    pub fn atoms(&self) -> &[LinAtom] {
        &self.atoms
    }

    pub fn is_universe(&self) -> bool {
        self.atoms.is_empty()
    }

    fn check_space(&self, other: &Space) -> Result<(), PolyError> {
        if Arc::ptr_eq(&self.space, other) || *self.space == **other {
            Ok(())
        } else {
            Err(PolyError::SpaceMismatch)
        }
    }

    /// Intersection with extra atoms.
    pub fn conjoin(&self, atoms: &[LinAtom]) -> Result<ConvexPoly, PolyError> {
        if atoms.iter().any(|a| a.dim() != self.space.dim()) {
            return Err(PolyError::SpaceMismatch);
        }
        if atoms.is_empty() {
            return Ok(self.clone());
        }
        let mut all = self.atoms.clone();
        all.extend_from_slice(atoms);
        Ok(ConvexPoly::settled(self.space.clone(), all))
    }

    pub fn intersect(&self, other: &ConvexPoly) -> Result<ConvexPoly, PolyError> {
        self.check_space(&other.space)?;
        self.conjoin(&other.atoms)
    }

    pub fn is_empty(&self) -> bool {
        let all: Vec<usize> = (0..self.space.dim()).collect();
        fm::eliminate_all(self.atoms.clone(), &all).is_none()
    }

    /// Some rational point of the polyhedron.
    pub fn witness(&self) -> Option<Vec<Rational>> {
        fm::witness(self.atoms.clone(), self.space.dim())
    }

    pub fn contains(&self, point: &[Rational]) -> bool {
        self.atoms.iter().all(|a| a.holds_at(point))
    }

    fn var_indices(&self, vars: &[&str]) -> Result<Vec<usize>, PolyError> {
        vars.iter().map(|v| self.space.index(v)).collect()
    }

    /// Existential projection of `vars`; the space is kept and the eliminated
    /// variables become unconstrained.
    pub fn eliminate(&self, vars: &[&str]) -> Result<ConvexPoly, PolyError> {
        let idx = self.var_indices(vars)?;
        Ok(self.eliminate_indices(&idx))
    }

    pub(crate) fn eliminate_indices(&self, idx: &[usize]) -> ConvexPoly {
        match fm::eliminate_all(self.atoms.clone(), idx) {
            Some(atoms) => ConvexPoly::settled(self.space.clone(), atoms),
            None => ConvexPoly::empty(self.space.clone()),
        }
    }

    /// Projection onto `keep` (in that order) as a polyhedron over a smaller space.
    pub fn project(&self, keep: &[&str]) -> Result<ConvexPoly, PolyError> {
        let keep_idx = self.var_indices(keep)?;
        let space = VarSpace::new(
            keep_idx
                .iter()
                .map(|&i| (self.space.name(i).to_string(), self.space.kind(i))),
        )?;
        Ok(self.project_indices(&keep_idx, space))
    }

    pub(crate) fn project_indices(&self, keep: &[usize], space: Space) -> ConvexPoly {
        let drop: Vec<usize> = (0..self.space.dim()).filter(|i| !keep.contains(i)).collect();
        match fm::eliminate_all(self.atoms.clone(), &drop) {
            Some(atoms) => ConvexPoly::settled(space, atoms.iter().map(|a| a.restricted(keep)).collect()),
            None => ConvexPoly::empty(space),
        }
    }

    /// Re-expresses the polyhedron over a larger space that contains every
    /// variable of the current one.
    pub fn embed(&self, target: &Space) -> Result<ConvexPoly, PolyError> {
        let map = self
            .space
            .names()
            .iter()
            .map(|n| target.index(n))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(ConvexPoly {
            atoms: self
                .atoms
                .iter()
                .map(|a| a.embedded(&map, target.dim()))
                .collect(),
            space: target.clone(),
        })
    }

    /// Lets every clock grow by the same non-negative delay.
    pub fn time_elapse(&self) -> ConvexPoly {
        let clocks = self.space.indices_of(VarKind::Clock);
        self.elapse_clocks(&clocks)
    }

    pub(crate) fn elapse_clocks(&self, clocks: &[usize]) -> ConvexPoly {
        // Row a·x ⋈ b becomes a·x - s·d ⋈ b with s the clock-coefficient sum;
        // d ≥ 0 is then eliminated.
        let mut still = Vec::new();
        let mut uppers = Vec::new(); // s < 0: upper bounds on d
        let mut lowers = Vec::new(); // s > 0: lower bounds on d
        for a in &self.atoms {
            let s: BigInt = clocks.iter().map(|&i| &a.coeffs[i]).sum();
            let parts = if a.rel == Rel::Eq && !s.is_zero() {
                vec![
                    (LinAtom { rel: Rel::Le, ..a.clone() }, s.clone()),
                    (
                        LinAtom::normalized(a.coeffs.iter().map(|c| -c).collect(), Rel::Le, -&a.bound),
                        -s,
                    ),
                ]
            } else {
                vec![(a.clone(), s)]
            };
            for (row, s) in parts {
                match s.sign() {
                    num_bigint::Sign::NoSign => still.push(row),
                    num_bigint::Sign::Minus => uppers.push((row, s)),
                    num_bigint::Sign::Plus => lowers.push((row, s)),
                }
            }
        }
        let mut out = still;
        for (p, sp) in &uppers {
            out.push(p.clone());
            let np = -sp;
            for (n, sn) in &lowers {
                let coeffs: Vec<BigInt> = p
                    .coeffs
                    .iter()
                    .zip(&n.coeffs)
                    .map(|(a, b)| a * sn + b * &np)
                    .collect();
                let bound = &p.bound * Rational::from_integer(sn.clone())
                    + &n.bound * Rational::from_integer(np.clone());
                let rel = if p.rel == Rel::Lt || n.rel == Rel::Lt {
                    Rel::Lt
                } else {
                    Rel::Le
                };
                out.push(LinAtom::normalized(coeffs, rel, bound));
            }
        }
        ConvexPoly::settled(self.space.clone(), out)
    }

    /// Projects away the clocks in `clocks` and pins them to zero.
    pub fn reset(&self, clocks: &[&str]) -> Result<ConvexPoly, PolyError> {
        let idx = self.var_indices(clocks)?;
        Ok(self.reset_indices(&idx))
    }

    pub(crate) fn reset_indices(&self, idx: &[usize]) -> ConvexPoly {
        if idx.is_empty() {
            return self.clone();
        }
        let projected = self.eliminate_indices(idx);
        let mut atoms = projected.atoms;
        for &i in idx {
            atoms.push(unit_atom(self.space.dim(), i, 1, Rel::Eq, Rational::zero()));
        }
        ConvexPoly::settled(self.space.clone(), atoms)
    }

    /// Whether `other ⊆ self`.
    pub fn includes(&self, other: &ConvexPoly) -> Result<bool, PolyError> {
        self.check_space(&other.space)?;
        if other.is_empty() {
            return Ok(true);
        }
        Ok(self.includes_nonempty(other))
    }

    pub(crate) fn includes_nonempty(&self, other: &ConvexPoly) -> bool {
        for c in &self.atoms {
            for neg in c.negation() {
                let mut probe = other.atoms.clone();
                probe.push(neg);
                let all: Vec<usize> = (0..self.space.dim()).collect();
                if fm::eliminate_all(probe, &all).is_some() {
                    return false;
                }
            }
        }
        true
    }

    /// Mutual inclusion.
    pub fn same_set(&self, other: &ConvexPoly) -> Result<bool, PolyError> {
        Ok(self.includes(other)? && other.includes(self)?)
    }

    /// Fixes `var := value` and drops it from the space.
    pub fn substitute(&self, var: &str, value: &Rational) -> Result<ConvexPoly, PolyError> {
        let i = self.space.index(var)?;
        let space = VarSpace::new(
            (0..self.space.dim())
                .filter(|&j| j != i)
                .map(|j| (self.space.name(j).to_string(), self.space.kind(j))),
        )?;
        let atoms = self.atoms.iter().map(|a| a.without_var(i, value)).collect();
        Ok(ConvexPoly::settled(space, atoms))
    }

    /// Infimum and supremum of `var`.
    pub fn bounds(&self, var: &str) -> Result<Bounds, PolyError> {
        let k = self.space.index(var)?;
        self.bounds_index(k)
    }

    pub(crate) fn bounds_index(&self, k: usize) -> Result<Bounds, PolyError> {
        let others: Vec<usize> = (0..self.space.dim()).filter(|&i| i != k).collect();
        let atoms = fm::eliminate_all(self.atoms.clone(), &others).ok_or(PolyError::Empty)?;
        let mut lower = Bound::Unbounded;
        let mut upper = Bound::Unbounded;
        for a in &atoms {
            let c = a.coeff(k);
            if c.is_zero() {
                continue;
            }
            let v = &a.bound / &c;
            let strict = a.rel == Rel::Lt;
            if a.rel == Rel::Eq {
                lower = Bound::finite(v.clone(), false);
                upper = Bound::finite(v, false);
                break;
            }
            if c.is_positive() {
                if tighter_upper(&v, strict, &upper) {
                    upper = Bound::finite(v, strict);
                }
            } else if tighter_lower(&v, strict, &lower) {
                lower = Bound::finite(v, strict);
            }
        }
        Ok(Bounds { lower, upper })
    }

    /// Drops atoms implied by the others. Equalities are kept.
    pub fn remove_redundant(&mut self) {
        let all: Vec<usize> = (0..self.space.dim()).collect();
        let mut i = 0;
        while i < self.atoms.len() {
            if self.atoms[i].rel == Rel::Eq {
                i += 1;
                continue;
            }
            let mut probe: Vec<LinAtom> = self
                .atoms
                .iter()
                .enumerate()
                .filter(|(j, _)| *j != i)
                .map(|(_, a)| a.clone())
                .collect();
            probe.extend(self.atoms[i].negation());
            if fm::eliminate_all(probe, &all).is_none() {
                self.atoms.remove(i);
            } else {
                i += 1;
            }
        }
    }

    /// `self \ other` as a union of pairwise disjoint pieces.
    pub fn subtract(&self, other: &ConvexPoly) -> Result<Vec<ConvexPoly>, PolyError> {
        self.check_space(&other.space)?;
        let meet = self.intersect(other)?;
        if meet.is_empty() {
            return Ok(if self.is_empty() { vec![] } else { vec![self.clone()] });
        }
        let mut pieces = Vec::new();
        let mut prefix = self.atoms.clone();
        for c in &other.atoms {
            for neg in c.negation() {
                let mut atoms = prefix.clone();
                atoms.push(neg);
                let piece = ConvexPoly::settled(self.space.clone(), atoms);
                if !piece.is_empty() {
                    pieces.push(piece);
                }
            }
            prefix.push(c.clone());
        }
        Ok(pieces)
    }

    /// Renders as `a ∧ b ∧ ...`, or `true` for the universe.
    pub fn render(&self) -> String {
        if self.atoms.is_empty() {
            return "true".to_string();
        }
        self.atoms
            .iter()
            .map(|a| a.render(&self.space))
            .collect::<Vec<_>>()
            .join(" ∧ ")
    }
}

impl fmt::Display for ConvexPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

pub(crate) fn unit_atom(dim: usize, i: usize, sign: i64, rel: Rel, bound: Rational) -> LinAtom {
    let mut coeffs = vec![BigInt::zero(); dim];
    coeffs[i] = BigInt::from(sign);
    LinAtom::normalized(coeffs, rel, bound)
}

fn tighter_upper(v: &Rational, strict: bool, current: &Bound) -> bool {
    match current {
        Bound::Unbounded => true,
        Bound::Finite { value, strict: s } => v < value || (v == value && strict && !s),
    }
}

fn tighter_lower(v: &Rational, strict: bool, current: &Bound) -> bool {
    match current {
        Bound::Unbounded => true,
        Bound::Finite { value, strict: s } => v > value || (v == value && strict && !s),
    }
}

/// A finite union of convex polyhedra; no disjuncts means the empty set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DisjPoly {
    space: Space,
    disjuncts: Vec<ConvexPoly>,
}

impl DisjPoly {
    pub fn empty(space: Space) -> DisjPoly {
        DisjPoly {
            space,
            disjuncts: Vec::new(),
        }
    }

    pub fn from_disjuncts(space: Space, disjuncts: Vec<ConvexPoly>) -> Result<DisjPoly, PolyError> {
        let mut out = DisjPoly::empty(space);
        for d in disjuncts {
            out.union_add(d, false)?;
        }
        Ok(out)
    }

    pub fn space(&self) -> &Space {
        &self.space
    }

    pub fn disjuncts(&self) -> &[ConvexPoly] {
        &self.disjuncts
    }

    pub fn len(&self) -> usize {
        self.disjuncts.len()
    }

    /// Whether the denoted set is empty.
    pub fn is_empty(&self) -> bool {
        self.disjuncts.iter().all(ConvexPoly::is_empty)
    }

    pub fn contains(&self, point: &[Rational]) -> bool {
        self.disjuncts.iter().any(|d| d.contains(point))
    }

    /// Adds `poly` unless it is empty or (with `subsumption`) already covered
    /// by a single existing disjunct. Returns whether it was added.
    pub fn union_add(&mut self, poly: ConvexPoly, subsumption: bool) -> Result<bool, PolyError> {
        poly.check_space(&self.space)?;
        if poly.is_empty() {
            return Ok(false);
        }
        if subsumption && self.disjuncts.iter().any(|d| d.includes_nonempty(&poly)) {
            return Ok(false);
        }
        self.disjuncts.push(poly);
        Ok(true)
    }

    /// Exact `self \ other`.
    pub fn difference(&self, other: &DisjPoly) -> Result<DisjPoly, PolyError> {
        if *self.space != *other.space {
            return Err(PolyError::SpaceMismatch);
        }
        let mut result = Vec::new();
        for p in &self.disjuncts {
            let mut pieces = vec![p.clone()];
            for q in &other.disjuncts {
                let mut next = Vec::new();
                for piece in &pieces {
                    next.extend(piece.subtract(q)?);
                }
                pieces = next;
                if pieces.is_empty() {
                    break;
                }
            }
            result.extend(pieces);
        }
        Ok(DisjPoly {
            space: self.space.clone(),
            disjuncts: result,
        })
    }

    /// Set equality via both differences being empty.
    pub fn same_set(&self, other: &DisjPoly) -> Result<bool, PolyError> {
        Ok(self.difference(other)?.is_empty() && other.difference(self)?.is_empty())
    }

    pub fn substitute(&self, var: &str, value: &Rational) -> Result<DisjPoly, PolyError> {
        let mut space = None;
        let mut disjuncts = Vec::new();
        for d in &self.disjuncts {
            let s = d.substitute(var, value)?;
            space.get_or_insert_with(|| s.space.clone());
            if !s.is_empty() {
                disjuncts.push(s);
            }
        }
        let space = match space {
            Some(s) => s,
            None => {
                let i = self.space.index(var)?;
                VarSpace::new(
                    (0..self.space.dim())
                        .filter(|&j| j != i)
                        .map(|j| (self.space.name(j).to_string(), self.space.kind(j))),
                )?
            }
        };
        let disjuncts = disjuncts
            .into_iter()
            .map(|d| ConvexPoly { space: space.clone(), ..d })
            .collect();
        Ok(DisjPoly { space, disjuncts })
    }

    pub fn project(&self, keep: &[&str]) -> Result<DisjPoly, PolyError> {
        let keep_idx = keep
            .iter()
            .map(|v| self.space.index(v))
            .collect::<Result<Vec<_>, _>>()?;
        let space = VarSpace::new(
            keep_idx
                .iter()
                .map(|&i| (self.space.name(i).to_string(), self.space.kind(i))),
        )?;
        let mut out = DisjPoly::empty(space.clone());
        for d in &self.disjuncts {
            out.union_add(d.project_indices(&keep_idx, space.clone()), false)?;
        }
        Ok(out)
    }

    /// Infimum and supremum of `var` over the whole union.
    pub fn bounds(&self, var: &str) -> Result<Bounds, PolyError> {
        let k = self.space.index(var)?;
        let mut acc: Option<Bounds> = None;
        for d in &self.disjuncts {
            let b = match d.bounds_index(k) {
                Ok(b) => b,
                Err(PolyError::Empty) => continue,
                Err(e) => return Err(e),
            };
            acc = Some(match acc {
                None => b,
                Some(a) => Bounds {
                    lower: looser_lower(a.lower, b.lower),
                    upper: looser_upper(a.upper, b.upper),
                },
            });
        }
        acc.ok_or(PolyError::Empty)
    }

    pub fn render(&self) -> String {
        if self.disjuncts.is_empty() {
            return "false".to_string();
        }
        self.disjuncts
            .iter()
            .map(ConvexPoly::render)
            .collect::<Vec<_>>()
            .join("\n∨ ")
    }
}

fn looser_lower(a: Bound, b: Bound) -> Bound {
    match (&a, &b) {
        (Bound::Unbounded, _) | (_, Bound::Unbounded) => Bound::Unbounded,
        (Bound::Finite { value: va, strict: sa }, Bound::Finite { value: vb, strict: sb }) => {
            if va < vb || (va == vb && !sa) {
                a
            } else if va == vb && !sb {
                b
            } else if va < vb {
                a
            } else {
                b
            }
        }
    }
}

fn looser_upper(a: Bound, b: Bound) -> Bound {
    match (&a, &b) {
        (Bound::Unbounded, _) | (_, Bound::Unbounded) => Bound::Unbounded,
        (Bound::Finite { value: va, strict: sa }, Bound::Finite { value: vb, strict: sb }) => {
            if va > vb || (va == vb && !sa) {
                a
            } else if va == vb && !sb {
                b
            } else if va > vb {
                a
            } else {
                b
            }
        }
    }
}
