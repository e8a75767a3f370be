//! File formats: timed words (`.tw`), patterns (`.pat.json`), match results
//! (`.match.json`) and 2-D projections (`.csv` plus a gnuplot script).

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::engine::{MatchSet, Stats};
use crate::model::{
    is_reserved_action, CmpOp, Edge, Event, Guard, GuardAtom, ModelError, Pta, Rhs, TimedWord,
};
use crate::polyhedron::{ConvexPoly, DisjPoly, LinAtom, PolyError, Rel, VarKind, VarSpace};
use crate::rational::{
    parse_rational, to_decimal_string, to_f64, to_literal_string, to_ratio_string,
    Rational,
};

#[derive(Debug, Error)]
pub enum IoError {
    #[error("line {line}: {msg}")]
    Word { line: usize, msg: String },
    #[error("{field}: {msg}")]
    Pattern { field: String, msg: String },
    #[error("invalid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("result document: {0}")]
    Result(String),
    #[error("unknown variable `{0}`")]
    UnknownVar(String),
    #[error("invalid box: {0}")]
    BadBox(String),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

fn pattern_err(field: impl Into<String>, msg: impl Into<String>) -> IoError {
    IoError::Pattern {
        field: field.into(),
        msg: msg.into(),
    }
}

fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

// ---- timed words ----------------------------------------------------------

/// One `<action> <timestamp>` per line; blank lines and `;` comments skipped.
/// Timestamps are decimal literals (or `num/den`), converted exactly.
pub fn parse_word(text: &str) -> Result<TimedWord, IoError> {
    let mut events: Vec<Event> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let err = |msg: String| IoError::Word { line, msg };
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with(';') {
            continue;
        }
        let mut parts = trimmed.split_whitespace();
        let (Some(action), Some(stamp), None) = (parts.next(), parts.next(), parts.next()) else {
            return Err(err(format!("expected `<action> <timestamp>`, got `{trimmed}`")));
        };
        if !is_identifier(action) {
            return Err(err(format!("invalid action name `{action}`")));
        }
        if is_reserved_action(action) {
            return Err(err(format!("reserved action name `{action}`")));
        }
        let time = parse_rational(stamp).ok_or_else(|| err(format!("invalid timestamp `{stamp}`")))?;
        if time <= Rational::from_integer(0.into()) {
            return Err(err("timestamps must be positive".into()));
        }
        if let Some(prev) = events.last() {
            if time <= prev.time {
                return Err(err("timestamps must strictly increase".into()));
            }
        }
        events.push(Event::new(action, time));
    }
    TimedWord::new(events).map_err(|e| IoError::Word {
        line: 0,
        msg: e.to_string(),
    })
}

pub fn write_word(w: &TimedWord) -> String {
    let mut out = String::new();
    for e in w.events() {
        out.push_str(&e.action);
        out.push(' ');
        out.push_str(&to_literal_string(&e.time));
        out.push('\n');
    }
    out
}

// ---- patterns -------------------------------------------------------------

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PatternDoc {
    alphabet: Vec<String>,
    clocks: Vec<String>,
    parameters: Vec<String>,
    locations: Vec<String>,
    initial: String,
    accepting: Vec<String>,
    #[serde(default)]
    invariants: BTreeMap<String, Vec<AtomDoc>>,
    edges: Vec<EdgeDoc>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct AtomDoc {
    clock: String,
    op: String,
    rhs: RhsDoc,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "lowercase")]
enum RhsDoc {
    Const(Value),
    Param(String),
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EdgeDoc {
    source: String,
    target: String,
    action: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    guard: Vec<AtomDoc>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    resets: Vec<String>,
}

fn parse_const(v: &Value, field: &str) -> Result<Rational, IoError> {
    let text = match v {
        Value::Number(n) => n.to_string(),
        Value::String(s) => s.clone(),
        _ => return Err(pattern_err(field, "constant must be a number or a string")),
    };
    parse_rational(&text)
        .ok_or_else(|| pattern_err(field, format!("invalid decimal constant `{text}`")))
}

fn const_value(r: &Rational) -> Value {
    match to_decimal_string(r) {
        Some(d) => serde_json::from_str::<serde_json::Number>(&d)
            .map(Value::Number)
            .unwrap_or(Value::String(d)),
        None => Value::String(to_ratio_string(r)),
    }
}

fn parse_atoms(atoms: &[AtomDoc], field: &str) -> Result<Guard, IoError> {
    atoms
        .iter()
        .enumerate()
        .map(|(i, a)| {
            let f = format!("{field}[{i}]");
            let op = CmpOp::from_symbol(&a.op)
                .ok_or_else(|| pattern_err(format!("{f}.op"), format!("bad operator `{}`", a.op)))?;
            let rhs = match &a.rhs {
                RhsDoc::Const(v) => Rhs::Const(parse_const(v, &format!("{f}.rhs.const"))?),
                RhsDoc::Param(p) => Rhs::Param(p.clone()),
            };
            Ok(GuardAtom {
                clock: a.clock.clone(),
                op,
                rhs,
            })
        })
        .collect()
}

fn atom_docs(g: &Guard) -> Vec<AtomDoc> {
    g.iter()
        .map(|a| AtomDoc {
            clock: a.clock.clone(),
            op: a.op.symbol().to_string(),
            rhs: match &a.rhs {
                Rhs::Const(c) => RhsDoc::Const(const_value(c)),
                Rhs::Param(p) => RhsDoc::Param(p.clone()),
            },
        })
        .collect()
}

/// Parses and validates a pattern description.
pub fn parse_pattern(json: &str) -> Result<Pta, IoError> {
    let doc: PatternDoc = serde_json::from_str(json)?;
    let loc = |name: &str, field: &str| -> Result<usize, IoError> {
        doc.locations
            .iter()
            .position(|l| l == name)
            .ok_or_else(|| pattern_err(field, format!("unknown location `{name}`")))
    };
    let mut invariants: Vec<Guard> = vec![Vec::new(); doc.locations.len()];
    for (name, atoms) in &doc.invariants {
        let field = format!("invariants.{name}");
        invariants[loc(name, &field)?] = parse_atoms(atoms, &field)?;
    }
    let mut edges = Vec::new();
    for (i, e) in doc.edges.iter().enumerate() {
        let field = format!("edges[{i}]");
        edges.push(Edge {
            source: loc(&e.source, &format!("{field}.source"))?,
            guard: parse_atoms(&e.guard, &format!("{field}.guard"))?,
            action: e.action.clone(),
            resets: e.resets.iter().cloned().collect(),
            target: loc(&e.target, &format!("{field}.target"))?,
        });
    }
    let accepting = doc
        .accepting
        .iter()
        .enumerate()
        .map(|(i, a)| loc(a, &format!("accepting[{i}]")))
        .collect::<Result<BTreeSet<_>, _>>()?;
    if let Some(bad) = doc.alphabet.iter().find(|a| is_reserved_action(a)) {
        return Err(pattern_err("alphabet", format!("reserved action `{bad}`")));
    }
    let pta = Pta {
        alphabet: doc.alphabet.iter().cloned().collect(),
        locations: doc.locations.clone(),
        initial: loc(&doc.initial, "initial")?,
        accepting,
        clocks: doc.clocks.clone(),
        params: doc.parameters.clone(),
        invariants,
        edges,
    };
    pta.validate().map_err(|e| pattern_err(model_field(&e), e.to_string()))?;
    Ok(pta)
}

fn model_field(e: &ModelError) -> &'static str {
    match e {
        ModelError::UndeclaredClock(_) => "clocks",
        ModelError::UndeclaredParam(_) => "parameters",
        ModelError::UnknownAction(_) => "alphabet",
        ModelError::NegativeConstant(_) => "constant",
        ModelError::DuplicateName(_) => "names",
        _ => "pattern",
    }
}

pub fn write_pattern(a: &Pta) -> String {
    let doc = PatternDoc {
        alphabet: a.alphabet.iter().cloned().collect(),
        clocks: a.clocks.clone(),
        parameters: a.params.clone(),
        locations: a.locations.clone(),
        initial: a.locations[a.initial].clone(),
        accepting: a.accepting.iter().map(|&l| a.locations[l].clone()).collect(),
        invariants: a
            .invariants
            .iter()
            .enumerate()
            .filter(|(_, g)| !g.is_empty())
            .map(|(i, g)| (a.locations[i].clone(), atom_docs(g)))
            .collect(),
        edges: a
            .edges
            .iter()
            .map(|e| EdgeDoc {
                source: a.locations[e.source].clone(),
                target: a.locations[e.target].clone(),
                action: e.action.clone(),
                guard: atom_docs(&e.guard),
                resets: e.resets.iter().cloned().collect(),
            })
            .collect(),
    };
    serde_json::to_string_pretty(&doc).expect("pattern serializes")
}

// ---- results --------------------------------------------------------------

/// Serialized match set. Each atom reads `Σ coeffs[v]·v  rel  const`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultDocument {
    pub variables: Vec<String>,
    pub disjuncts: Vec<Vec<AtomRecord>>,
    pub stats: StatsRecord,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AtomRecord {
    pub coeffs: BTreeMap<String, String>,
    #[serde(rename = "const")]
    pub constant: String,
    pub rel: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatsRecord {
    pub states: usize,
    pub matches: usize,
    pub comp_seconds: f64,
}

fn atom_record(a: &LinAtom, space: &VarSpace) -> AtomRecord {
    let coeffs = a
        .coeffs()
        .iter()
        .enumerate()
        .filter(|(_, c)| !num_traits::Zero::is_zero(*c))
        .map(|(i, c)| {
            (
                space.name(i).to_string(),
                to_ratio_string(&Rational::from_integer(c.clone())),
            )
        })
        .collect();
    AtomRecord {
        coeffs,
        constant: to_ratio_string(a.bound()),
        rel: match a.rel() {
            Rel::Le => "le",
            Rel::Lt => "lt",
            Rel::Eq => "eq",
        }
        .to_string(),
    }
}

fn atom_sort_key(a: &AtomRecord) -> String {
    serde_json::to_string(a).expect("atom serializes")
}

/// Deterministic document: atoms sorted within each disjunct, disjuncts
/// sorted by their atom serializations.
pub fn result_document(m: &MatchSet) -> ResultDocument {
    let space = m.set.space();
    let mut disjuncts: Vec<Vec<AtomRecord>> = m
        .set
        .disjuncts()
        .iter()
        .map(|d| {
            let mut atoms: Vec<AtomRecord> = d.atoms().iter().map(|a| atom_record(a, space)).collect();
            atoms.sort_by_key(atom_sort_key);
            atoms
        })
        .collect();
    disjuncts.sort_by_key(|d| d.iter().map(atom_sort_key).collect::<Vec<_>>());
    ResultDocument {
        variables: space.names().to_vec(),
        disjuncts,
        stats: StatsRecord {
            states: m.stats.states,
            matches: m.stats.matches,
            comp_seconds: m.stats.comp_seconds,
        },
    }
}

pub fn write_result(m: &MatchSet) -> String {
    serde_json::to_string_pretty(&result_document(m)).expect("result serializes")
}

/// One disjunct per line, atoms joined by `∧`; `no match` when empty.
pub fn result_text(m: &MatchSet) -> String {
    if m.set.disjuncts().is_empty() {
        return "no match\n".to_string();
    }
    let mut lines: Vec<String> = m.set.disjuncts().iter().map(ConvexPoly::render).collect();
    lines.sort();
    let mut out = String::new();
    for l in lines {
        out.push_str(&l);
        out.push('\n');
    }
    out
}

fn parse_result_rational(s: &str) -> Result<Rational, IoError> {
    parse_rational(s).ok_or_else(|| IoError::Result(format!("invalid rational `{s}`")))
}

/// Rebuilds the match set and stats from a result document.
pub fn parse_result(json: &str) -> Result<MatchSet, IoError> {
    let doc: ResultDocument = serde_json::from_str(json)?;
    match_set_from_document(&doc)
}

pub fn match_set_from_document(doc: &ResultDocument) -> Result<MatchSet, IoError> {
    let space = VarSpace::params(doc.variables.iter().cloned())
        .map_err(|e| IoError::Result(e.to_string()))?;
    let mut disjuncts = Vec::new();
    for atoms in &doc.disjuncts {
        let mut lin = Vec::new();
        for a in atoms {
            let rel = match a.rel.as_str() {
                "le" => Rel::Le,
                "lt" => Rel::Lt,
                "eq" => Rel::Eq,
                other => return Err(IoError::Result(format!("invalid relation `{other}`"))),
            };
            let mut dense = vec![Rational::from_integer(0.into()); space.dim()];
            for (var, c) in &a.coeffs {
                let i = space
                    .index(var)
                    .map_err(|_| IoError::Result(format!("unknown variable `{var}`")))?;
                dense[i] = parse_result_rational(c)?;
            }
            lin.push(LinAtom::new(&dense, rel, parse_result_rational(&a.constant)?));
        }
        disjuncts.push(ConvexPoly::from_atoms(space.clone(), lin).map_err(poly_err)?);
    }
    let set = DisjPoly::from_disjuncts(space, disjuncts).map_err(poly_err)?;
    Ok(MatchSet {
        set,
        stats: Stats {
            states: doc.stats.states,
            matches: doc.stats.matches,
            comp_seconds: doc.stats.comp_seconds,
        },
    })
}

fn poly_err(e: PolyError) -> IoError {
    IoError::Result(e.to_string())
}

// ---- 2-D projection -------------------------------------------------------

/// Axis-aligned plotting window `[x0, x1] × [y0, y1]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlotBox {
    pub x0: Rational,
    pub x1: Rational,
    pub y0: Rational,
    pub y1: Rational,
}

impl PlotBox {
    pub fn new(x0: Rational, x1: Rational, y0: Rational, y1: Rational) -> Result<PlotBox, IoError> {
        if x0 >= x1 || y0 >= y1 {
            return Err(IoError::BadBox("box must have positive width and height".into()));
        }
        Ok(PlotBox { x0, x1, y0, y1 })
    }

    /// Parses `x0,x1,y0,y1`.
    pub fn parse(text: &str) -> Result<PlotBox, IoError> {
        let v: Vec<Rational> = text
            .split(',')
            .map(|s| parse_rational(s.trim()).ok_or_else(|| IoError::BadBox(format!("bad number `{s}`"))))
            .collect::<Result<_, _>>()?;
        let [x0, x1, y0, y1]: [Rational; 4] = v
            .try_into()
            .map_err(|_| IoError::BadBox("expected four numbers".into()))?;
        PlotBox::new(x0, x1, y0, y1)
    }
}

/// A convex polygon in counterclockwise order. `clipped[i]` marks the edge
/// from vertex `i` to vertex `i+1` (cyclically) as lying on the plotting
/// window only, i.e. the region continues beyond it.
#[derive(Debug, Clone, PartialEq)]
pub struct Polygon {
    pub disjunct: usize,
    pub vertices: Vec<(Rational, Rational)>,
    pub clipped: Vec<bool>,
}

/// Projects each disjunct onto `(x, y)`, clips it to `window` and lists
/// its vertices. Disjuncts whose clipped projection is empty are skipped.
pub fn project_2d(set: &DisjPoly, x: &str, y: &str, window: &PlotBox) -> Result<Vec<Polygon>, IoError> {
    let space = set.space();
    for v in [x, y] {
        space.index(v).map_err(|_| IoError::UnknownVar(v.to_string()))?;
    }
    if x == y {
        return Err(IoError::UnknownVar(format!("{x} (twice)")));
    }
    let plane = VarSpace::new([(x.to_string(), VarKind::Param), (y.to_string(), VarKind::Param)])
        .expect("distinct names");
    let box_atoms = |s: &VarSpace| -> Vec<LinAtom> {
        vec![
            LinAtom::var_cmp(s, x, ">=", window.x0.clone()).expect("x"),
            LinAtom::var_cmp(s, x, "<=", window.x1.clone()).expect("x"),
            LinAtom::var_cmp(s, y, ">=", window.y0.clone()).expect("y"),
            LinAtom::var_cmp(s, y, "<=", window.y1.clone()).expect("y"),
        ]
    };
    let mut polygons = Vec::new();
    for (n, d) in set.disjuncts().iter().enumerate() {
        let shadow = d.project(&[x, y]).map_err(poly_err)?;
        let shadow = ConvexPoly::from_atoms(plane.clone(), shadow.atoms().to_vec()).map_err(poly_err)?;
        let clipped = shadow.conjoin(&box_atoms(&plane)).map_err(poly_err)?;
        if clipped.is_empty() {
            continue;
        }
        let own: Vec<LinAtom> = shadow.atoms().iter().map(LinAtom::closure).collect();
        let boxed = box_atoms(&plane);
        let mut lines: Vec<&LinAtom> = own.iter().collect();
        lines.extend(boxed.iter());
        let closed: Vec<LinAtom> = own.iter().chain(&boxed).cloned().collect();
        let vertices = enumerate_vertices(&lines, &closed);
        let flags = (0..vertices.len())
            .map(|i| {
                let a = &vertices[i];
                let b = &vertices[(i + 1) % vertices.len()];
                on_some_line(&boxed, a, b) && !on_some_line(&own, a, b)
            })
            .collect();
        polygons.push(Polygon {
            disjunct: n,
            vertices,
            clipped: flags,
        });
    }
    Ok(polygons)
}

fn on_line(a: &LinAtom, p: &(Rational, Rational)) -> bool {
    let c = |i: usize| Rational::from_integer(a.coeffs()[i].clone());
    c(0) * &p.0 + c(1) * &p.1 == *a.bound()
}

fn on_some_line(atoms: &[LinAtom], a: &(Rational, Rational), b: &(Rational, Rational)) -> bool {
    atoms.iter().any(|l| !l.is_constant() && on_line(l, a) && on_line(l, b))
}

fn enumerate_vertices(lines: &[&LinAtom], closed: &[LinAtom]) -> Vec<(Rational, Rational)> {
    let mut points: Vec<(Rational, Rational)> = Vec::new();
    for i in 0..lines.len() {
        for j in i + 1..lines.len() {
            let Some(p) = intersect(lines[i], lines[j]) else {
                continue;
            };
            let v = [p.0.clone(), p.1.clone()];
            if closed.iter().all(|a| a.holds_at(&v)) && !points.contains(&p) {
                points.push(p);
            }
        }
    }
    sort_ccw(points)
}

fn intersect(a: &LinAtom, b: &LinAtom) -> Option<(Rational, Rational)> {
    let r = |l: &LinAtom, i: usize| Rational::from_integer(l.coeffs()[i].clone());
    let (a1, b1, c1) = (r(a, 0), r(a, 1), a.bound().clone());
    let (a2, b2, c2) = (r(b, 0), r(b, 1), b.bound().clone());
    let det = &a1 * &b2 - &a2 * &b1;
    if num_traits::Zero::is_zero(&det) {
        return None;
    }
    let x = (&c1 * &b2 - &c2 * &b1) / &det;
    let y = (&a1 * &c2 - &a2 * &c1) / &det;
    Some((x, y))
}

fn sort_ccw(mut points: Vec<(Rational, Rational)>) -> Vec<(Rational, Rational)> {
    if points.len() < 3 {
        return points;
    }
    let n = Rational::from_integer((points.len() as i64).into());
    let cx = points.iter().map(|p| p.0.clone()).sum::<Rational>() / &n;
    let cy = points.iter().map(|p| p.1.clone()).sum::<Rational>() / &n;
    points.sort_by(|p, q| {
        let ap = (to_f64(&(&p.1 - &cy))).atan2(to_f64(&(&p.0 - &cx)));
        let aq = (to_f64(&(&q.1 - &cy))).atan2(to_f64(&(&q.0 - &cx)));
        ap.total_cmp(&aq)
    });
    points
}

const CSV_HEADER: &str = "# polygon,vertex,x,y,x_exact,y_exact,clipped_edge\n";

/// CSV with one block per polygon. Each block starts with a `#` header line
/// and blocks are separated by two blank lines (gnuplot datasets).
pub fn polygons_csv(polygons: &[Polygon]) -> Result<String, IoError> {
    let mut blocks = Vec::new();
    for p in polygons {
        let mut w = csv::Writer::from_writer(CSV_HEADER.as_bytes().to_vec());
        for (i, (x, y)) in p.vertices.iter().enumerate() {
            w.write_record([
                p.disjunct.to_string(),
                i.to_string(),
                to_f64(x).to_string(),
                to_f64(y).to_string(),
                to_ratio_string(x),
                to_ratio_string(y),
                p.clipped[i].to_string(),
            ])?;
        }
        let bytes = w.into_inner().map_err(|e| IoError::Csv(e.into_error().into()))?;
        blocks.push(String::from_utf8(bytes).expect("ascii csv"));
    }
    Ok(blocks.join("\n\n"))
}

/// A gnuplot script drawing every dataset of `csv_path` as a filled polygon.
pub fn gnuplot_script(csv_path: &str, x: &str, y: &str, window: &PlotBox) -> String {
    format!(
        "set datafile separator ','\n\
         set key off\n\
         set xlabel '{x}'\n\
         set ylabel '{y}'\n\
         set xrange [{}:{}]\n\
         set yrange [{}:{}]\n\
         set style fill transparent solid 0.35 border\n\
         plot for [i=0:*] '{csv_path}' index i using 3:4 with filledcurves closed lc rgb '#cc3333'\n",
        to_f64(&window.x0),
        to_f64(&window.x1),
        to_f64(&window.y0),
        to_f64(&window.y1),
    )
}

/// Parses `p1=1,p2=0.5` into a valuation.
pub fn parse_valuation(text: &str) -> Result<BTreeMap<String, Rational>, IoError> {
    let mut out = BTreeMap::new();
    for part in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let (name, value) = part
            .split_once('=')
            .ok_or_else(|| pattern_err("valuation", format!("expected name=value, got `{part}`")))?;
        let v = parse_rational(value.trim())
            .ok_or_else(|| pattern_err("valuation", format!("invalid value `{value}`")))?;
        out.insert(name.trim().to_string(), v);
    }
    Ok(out)
}
