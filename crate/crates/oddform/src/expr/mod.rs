//! Charts, symbolic scalar expressions and scalar fields.
//!
//! This is the minimal computer-algebra kernel underneath everything else:
//! expression trees over named coordinates and constants, exact symbolic
//! partial differentiation, numeric evaluation, and a text parser.
//!
//! # Design
//!
//! - **No canonical form.** Simplification is limited to constant folding
//!   and 0/1 identities inside the smart constructors. Equality of fields is
//!   decided by [`field_equal`], i.e. by sampling — never syntactically.
//!   (Canonical simplification in the presence of `sqrt` is a tar pit;
//!   sampling is exactly what residual-based verification needs.)
//! - **Structure sharing.** Expressions are reference-counted trees
//!   ([`ScalarExpr`] wraps an `Rc`); building a derivative or a product
//!   shares subtrees instead of copying them, and evaluation memoizes on
//!   node identity so shared subtrees are evaluated once per point.
//! - **Immutability.** Every value is frozen after construction and every
//!   operation is a pure function.
//!
//! # Domains
//!
//! Evaluation is defined wherever denominators are nonzero and `sqrt`
//! arguments are nonnegative; violations surface as [`EvalError`] carrying
//! the offending point, they are never silently mapped to NaN.

use std::collections::HashMap;
use std::fmt;
use std::rc::Rc;

use thiserror::Error;

mod parse;
mod sampler;

pub use parse::{parse_expr, ParseError, ParseErrorKind};
pub use sampler::{Sampler, SamplerBuilder, SamplerError};

/// Default number of sample points used by verification routines.
pub const DEFAULT_SAMPLES: usize = 32;
/// Default relative tolerance for residual comparisons.
pub const DEFAULT_TOL: f64 = 1e-9;
/// Default RNG seed.
pub const DEFAULT_SEED: u64 = 42;

// ---------------------------------------------------------------------------
// Chart
// ---------------------------------------------------------------------------

/// Errors arising from chart and point construction.
#[derive(Debug, Error, PartialEq)]
pub enum ChartError {
    /// A coordinate or constant name appears twice.
    #[error("duplicate name `{0}` in chart")]
    DuplicateName(String),
    /// A name is not a valid identifier (`[A-Za-z_][A-Za-z0-9_]*`).
    #[error("`{0}` is not a valid identifier")]
    InvalidIdentifier(String),
    /// `sqrt` is reserved by the expression grammar.
    #[error("`{0}` is a reserved word and cannot name a coordinate or constant")]
    ReservedName(String),
    /// A chart needs at least one coordinate.
    #[error("a chart needs at least one coordinate")]
    Empty,
    /// Point/coordinate-vector length does not match the chart dimension.
    #[error("expected {expected} values for this chart, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    /// A field was moved onto a chart lacking one of its symbols.
    #[error("target chart has no coordinate or constant named `{0}`")]
    MissingSymbol(String),
    /// A named constant exists on both charts but with different values.
    #[error("constant `{name}` differs between charts ({ours} vs {theirs})")]
    ConstantMismatch { name: String, ours: f64, theirs: f64 },
}

#[derive(Debug, PartialEq)]
struct ChartData {
    coords: Vec<String>,
    constants: Vec<(String, f64)>,
}

/// An ordered list of coordinate names plus named numeric constants.
///
/// Charts are cheap to clone (shared internally). Two charts are equal when
/// their coordinate lists and constant tables are equal; all operations in
/// this crate require their operands to live on equal charts.
#[derive(Clone)]
pub struct Chart(Rc<ChartData>);

impl PartialEq for Chart {
    fn eq(&self, other: &Self) -> bool {
        Rc::ptr_eq(&self.0, &other.0) || *self.0 == *other.0
    }
}

impl Eq for Chart {}

impl fmt::Debug for Chart {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Chart({})", self.0.coords.join(", "))
    }
}

fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

impl Chart {
    /// Build a chart from coordinate names and `(name, value)` constants.
    ///
    /// Names must be unique identifiers across both lists, and must not
    /// collide with the reserved word `sqrt`.
    pub fn new(coords: &[&str], constants: &[(&str, f64)]) -> Result<Self, ChartError> {
        if coords.is_empty() {
            return Err(ChartError::Empty);
        }
        let mut seen = std::collections::HashSet::new();
        for name in coords.iter().copied().chain(constants.iter().map(|(n, _)| *n)) {
            if !is_identifier(name) {
                return Err(ChartError::InvalidIdentifier(name.to_owned()));
            }
            if name == "sqrt" {
                return Err(ChartError::ReservedName(name.to_owned()));
            }
            if !seen.insert(name) {
                return Err(ChartError::DuplicateName(name.to_owned()));
            }
        }
        Ok(Chart(Rc::new(ChartData {
            coords: coords.iter().map(|s| s.to_string()).collect(),
            constants: constants.iter().map(|(n, v)| (n.to_string(), *v)).collect(),
        })))
    }

    /// Number of coordinates.
    pub fn dim(&self) -> usize {
        self.0.coords.len()
    }

    /// Coordinate names in order.
    pub fn coords(&self) -> impl Iterator<Item = &str> {
        self.0.coords.iter().map(|s| s.as_str())
    }

    /// Name of coordinate `i`.
    ///
    /// # Panics
    /// If `i` is out of range.
    pub fn coord_name(&self, i: usize) -> &str {
        &self.0.coords[i]
    }

    /// Index of the coordinate called `name`, if any.
    pub fn coord_index(&self, name: &str) -> Option<usize> {
        self.0.coords.iter().position(|c| c == name)
    }

    /// `(name, value)` constants in declaration order.
    pub fn constants(&self) -> impl Iterator<Item = (&str, f64)> {
        self.0.constants.iter().map(|(n, v)| (n.as_str(), *v))
    }

    /// Index of the constant called `name`, if any.
    pub fn constant_index(&self, name: &str) -> Option<usize> {
        self.0.constants.iter().position(|(c, _)| c == name)
    }

    fn constant_value(&self, i: usize) -> f64 {
        self.0.constants[i].1
    }

    fn constant_name(&self, i: usize) -> &str {
        &self.0.constants[i].0
    }

    /// Build a point on this chart from one value per coordinate.
    pub fn point(&self, values: &[f64]) -> Result<Point, ChartError> {
        if values.len() != self.dim() {
            return Err(ChartError::DimensionMismatch {
                expected: self.dim(),
                got: values.len(),
            });
        }
        Ok(Point {
            chart: self.clone(),
            values: values.to_vec(),
        })
    }
}

// ---------------------------------------------------------------------------
// Point
// ---------------------------------------------------------------------------

/// A concrete point of a chart: one real value per coordinate.
#[derive(Clone, PartialEq)]
pub struct Point {
    chart: Chart,
    values: Vec<f64>,
}

impl Point {
    /// The chart this point lives on.
    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    /// Coordinate values in chart order.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Value of coordinate `i`.
    pub fn value(&self, i: usize) -> f64 {
        self.values[i]
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, v) in self.values.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{}={}", self.chart.coord_name(i), v)?;
        }
        write!(f, ")")
    }
}

impl fmt::Debug for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

// ---------------------------------------------------------------------------
// Expression nodes and smart constructors
// ---------------------------------------------------------------------------

#[derive(Debug)]
enum Node {
    /// Literal real number.
    Lit(f64),
    /// Named constant, stored as an index into the chart's constant table.
    Konst(usize),
    /// Coordinate, stored as an index into the chart's coordinate list.
    Coord(usize),
    /// n-ary sum.
    Sum(Vec<ScalarExpr>),
    /// n-ary product.
    Prod(Vec<ScalarExpr>),
    /// Quotient.
    Quot(ScalarExpr, ScalarExpr),
    /// Nonnegative integer power; the constructors reduce exponents 0 and 1,
    /// so a stored node always has exponent ≥ 2.
    Pow(ScalarExpr, u32),
    /// Square root.
    Sqrt(ScalarExpr),
    /// Negation.
    Neg(ScalarExpr),
}

/// A symbolic expression tree (reference-counted; cheap to clone).
///
/// Expressions carry coordinate/constant *indices*, not names; they are
/// always paired with their [`Chart`] inside a [`ScalarField`].
#[derive(Debug, Clone)]
pub struct ScalarExpr(Rc<Node>);

impl ScalarExpr {
    fn new(node: Node) -> Self {
        ScalarExpr(Rc::new(node))
    }

    fn as_lit(&self) -> Option<f64> {
        match *self.0 {
            Node::Lit(v) => Some(v),
            _ => None,
        }
    }

    fn is_zero_lit(&self) -> bool {
        self.as_lit() == Some(0.0)
    }
}

/// `-0.0` is normalized to `0.0` so that folded literals print canonically.
fn lit(v: f64) -> ScalarExpr {
    let v = if v == 0.0 { 0.0 } else { v };
    ScalarExpr::new(Node::Lit(v))
}

fn add(terms: Vec<ScalarExpr>) -> ScalarExpr {
    let mut flat = Vec::with_capacity(terms.len());
    let mut acc = 0.0f64;
    let mut stack: Vec<ScalarExpr> = terms;
    stack.reverse();
    while let Some(t) = stack.pop() {
        match &*t.0 {
            Node::Sum(inner) => {
                for s in inner.iter().rev() {
                    stack.push(s.clone());
                }
            }
            Node::Lit(v) => acc += v,
            _ => flat.push(t),
        }
    }
    if acc != 0.0 {
        flat.push(lit(acc));
    }
    match flat.len() {
        0 => lit(0.0),
        1 => flat.pop().unwrap(),
        _ => ScalarExpr::new(Node::Sum(flat)),
    }
}

fn sub(a: ScalarExpr, b: ScalarExpr) -> ScalarExpr {
    add(vec![a, neg(b)])
}

fn mul(factors: Vec<ScalarExpr>) -> ScalarExpr {
    let mut flat = Vec::with_capacity(factors.len());
    let mut acc = 1.0f64;
    let mut stack: Vec<ScalarExpr> = factors;
    stack.reverse();
    while let Some(fct) = stack.pop() {
        match &*fct.0 {
            Node::Prod(inner) => {
                for s in inner.iter().rev() {
                    stack.push(s.clone());
                }
            }
            Node::Lit(v) => acc *= v,
            _ => flat.push(fct),
        }
    }
    if acc == 0.0 {
        return lit(0.0);
    }
    if acc != 1.0 {
        flat.insert(0, lit(acc));
    }
    match flat.len() {
        0 => lit(1.0),
        1 => flat.pop().unwrap(),
        _ => ScalarExpr::new(Node::Prod(flat)),
    }
}

fn neg(e: ScalarExpr) -> ScalarExpr {
    match &*e.0 {
        Node::Lit(v) => lit(-v),
        Node::Neg(inner) => inner.clone(),
        _ => ScalarExpr::new(Node::Neg(e)),
    }
}

fn quot(num: ScalarExpr, den: ScalarExpr) -> ScalarExpr {
    if num.is_zero_lit() {
        return lit(0.0);
    }
    match den.as_lit() {
        Some(1.0) => num,
        Some(-1.0) => neg(num),
        Some(d) if d != 0.0 => {
            if let Some(n) = num.as_lit() {
                return lit(n / d);
            }
            ScalarExpr::new(Node::Quot(num, den))
        }
        // A literal zero denominator is kept; evaluation reports it.
        _ => ScalarExpr::new(Node::Quot(num, den)),
    }
}

fn pow(base: ScalarExpr, exp: u32) -> ScalarExpr {
    match exp {
        0 => lit(1.0),
        1 => base,
        _ => match base.as_lit() {
            Some(v) => lit(v.powi(exp as i32)),
            None => ScalarExpr::new(Node::Pow(base, exp)),
        },
    }
}

fn sqrt(e: ScalarExpr) -> ScalarExpr {
    match e.as_lit() {
        Some(v) if v >= 0.0 => lit(v.sqrt()),
        _ => ScalarExpr::new(Node::Sqrt(e)),
    }
}

// ---------------------------------------------------------------------------
// Evaluation
// ---------------------------------------------------------------------------

/// What went wrong while evaluating an expression.
#[derive(Debug, Clone, PartialEq)]
pub enum EvalErrorKind {
    /// A quotient's denominator evaluated to exactly zero.
    DivisionByZero,
    /// A `sqrt` argument evaluated to a negative number.
    SqrtOfNegative(f64),
}

/// Domain error during evaluation, carrying the offending point.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("{} at point {point}", match .kind {
    EvalErrorKind::DivisionByZero => "division by zero".to_string(),
    EvalErrorKind::SqrtOfNegative(v) => format!("square root of negative number ({v})"),
})]
pub struct EvalError {
    /// The kind of domain violation.
    pub kind: EvalErrorKind,
    /// The point at which evaluation failed.
    pub point: Point,
}

fn eval_node(
    e: &ScalarExpr,
    p: &Point,
    cache: &mut HashMap<*const Node, f64>,
) -> Result<f64, EvalErrorKind> {
    let key = Rc::as_ptr(&e.0);
    if let Some(v) = cache.get(&key) {
        return Ok(*v);
    }
    let v = match &*e.0 {
        Node::Lit(v) => *v,
        Node::Konst(i) => p.chart.constant_value(*i),
        Node::Coord(i) => p.values[*i],
        Node::Sum(terms) => {
            let mut acc = 0.0;
            for t in terms {
                acc += eval_node(t, p, cache)?;
            }
            acc
        }
        Node::Prod(factors) => {
            let mut acc = 1.0;
            for f in factors {
                acc *= eval_node(f, p, cache)?;
            }
            acc
        }
        Node::Quot(n, d) => {
            let dv = eval_node(d, p, cache)?;
            if dv == 0.0 {
                return Err(EvalErrorKind::DivisionByZero);
            }
            eval_node(n, p, cache)? / dv
        }
        Node::Pow(b, k) => eval_node(b, p, cache)?.powi(*k as i32),
        Node::Sqrt(a) => {
            let av = eval_node(a, p, cache)?;
            if av < 0.0 {
                return Err(EvalErrorKind::SqrtOfNegative(av));
            }
            av.sqrt()
        }
        Node::Neg(a) => -eval_node(a, p, cache)?,
    };
    cache.insert(key, v);
    Ok(v)
}

// ---------------------------------------------------------------------------
// Differentiation
// ---------------------------------------------------------------------------

fn diff_node(e: &ScalarExpr, coord: usize) -> ScalarExpr {
    match &*e.0 {
        Node::Lit(_) | Node::Konst(_) => lit(0.0),
        Node::Coord(i) => lit(if *i == coord { 1.0 } else { 0.0 }),
        Node::Sum(terms) => add(terms.iter().map(|t| diff_node(t, coord)).collect()),
        Node::Prod(factors) => {
            let mut terms = Vec::with_capacity(factors.len());
            for (i, fi) in factors.iter().enumerate() {
                let dfi = diff_node(fi, coord);
                if dfi.is_zero_lit() {
                    continue;
                }
                let mut fs: Vec<ScalarExpr> = Vec::with_capacity(factors.len());
                fs.extend(factors.iter().take(i).cloned());
                fs.push(dfi);
                fs.extend(factors.iter().skip(i + 1).cloned());
                terms.push(mul(fs));
            }
            add(terms)
        }
        Node::Quot(n, d) => {
            // (n/d)' = (n'·d − n·d') / d²
            let dn = diff_node(n, coord);
            let dd = diff_node(d, coord);
            quot(
                sub(mul(vec![dn, d.clone()]), mul(vec![n.clone(), dd])),
                pow(d.clone(), 2),
            )
        }
        Node::Pow(b, k) => {
            // (b^k)' = k·b^(k−1)·b'
            let db = diff_node(b, coord);
            mul(vec![lit(*k as f64), pow(b.clone(), k - 1), db])
        }
        Node::Sqrt(a) => {
            // (√a)' = a' / (2√a)
            let da = diff_node(a, coord);
            quot(da, mul(vec![lit(2.0), sqrt(a.clone())]))
        }
        Node::Neg(a) => neg(diff_node(a, coord)),
    }
}

// ---------------------------------------------------------------------------
// ScalarField
// ---------------------------------------------------------------------------

/// A symbolic scalar function on a chart: an expression plus its chart.
///
/// Arithmetic between fields requires equal charts; mixing charts is a
/// programming error and panics with a descriptive message. All
/// user-supplied input goes through [`parse_expr`]/[`Chart::new`], which
/// validate symbols up front.
#[derive(Debug, Clone)]
pub struct ScalarField {
    chart: Chart,
    expr: ScalarExpr,
}

fn assert_same_chart(a: &Chart, b: &Chart, op: &str) {
    assert!(
        a == b,
        "chart mismatch in {op}: {:?} vs {:?}",
        a,
        b
    );
}

impl ScalarField {
    fn from_expr(chart: Chart, expr: ScalarExpr) -> Self {
        ScalarField { chart, expr }
    }

    /// The identically-zero field.
    pub fn zero(chart: &Chart) -> Self {
        Self::from_expr(chart.clone(), lit(0.0))
    }

    /// The identically-one field.
    pub fn one(chart: &Chart) -> Self {
        Self::from_expr(chart.clone(), lit(1.0))
    }

    /// A constant field with the given value.
    pub fn constant(chart: &Chart, v: f64) -> Self {
        Self::from_expr(chart.clone(), lit(v))
    }

    /// The coordinate function `x^i`.
    ///
    /// # Panics
    /// If `i` is out of range for the chart.
    pub fn coord(chart: &Chart, i: usize) -> Self {
        assert!(i < chart.dim(), "coordinate index {i} out of range");
        Self::from_expr(chart.clone(), ScalarExpr::new(Node::Coord(i)))
    }

    /// The named-constant field, if `name` is declared on the chart.
    pub fn named_constant(chart: &Chart, name: &str) -> Option<Self> {
        chart
            .constant_index(name)
            .map(|i| Self::from_expr(chart.clone(), ScalarExpr::new(Node::Konst(i))))
    }

    /// The chart this field lives on.
    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    /// True when the field is the literal constant 0 (syntactically).
    ///
    /// This is only a fast path — a field can vanish identically without
    /// being the literal zero; use [`field_equal`] for semantic tests.
    pub fn is_literal_zero(&self) -> bool {
        self.expr.is_zero_lit()
    }

    /// Exact partial derivative with respect to coordinate `i`.
    ///
    /// # Panics
    /// If `i` is out of range.
    pub fn diff(&self, i: usize) -> Self {
        assert!(i < self.chart.dim(), "coordinate index {i} out of range");
        Self::from_expr(self.chart.clone(), diff_node(&self.expr, i))
    }

    /// Exact partial derivative with respect to the named coordinate.
    pub fn diff_named(&self, coord: &str) -> Result<Self, ChartError> {
        let i = self
            .chart
            .coord_index(coord)
            .ok_or_else(|| ChartError::MissingSymbol(coord.to_owned()))?;
        Ok(self.diff(i))
    }

    /// Evaluate at a point of the same chart.
    ///
    /// # Panics
    /// If the point lives on a different chart.
    pub fn eval(&self, p: &Point) -> Result<f64, EvalError> {
        assert_same_chart(&self.chart, &p.chart, "eval");
        let mut cache = HashMap::new();
        eval_node(&self.expr, p, &mut cache).map_err(|kind| EvalError {
            kind,
            point: p.clone(),
        })
    }

    /// Quotient `self / den` (kept symbolic; division by zero surfaces at
    /// evaluation time).
    pub fn div(&self, den: &ScalarField) -> Self {
        assert_same_chart(&self.chart, &den.chart, "div");
        Self::from_expr(self.chart.clone(), quot(self.expr.clone(), den.expr.clone()))
    }

    /// Integer power with nonnegative exponent.
    pub fn powi(&self, k: u32) -> Self {
        Self::from_expr(self.chart.clone(), pow(self.expr.clone(), k))
    }

    /// Square root (domain checked at evaluation time).
    pub fn sqrt(&self) -> Self {
        Self::from_expr(self.chart.clone(), sqrt(self.expr.clone()))
    }

    /// Multiply by a plain number.
    pub fn scale(&self, k: f64) -> Self {
        Self::from_expr(self.chart.clone(), mul(vec![lit(k), self.expr.clone()]))
    }

    /// Rebuild this field on another chart that contains (at least) the same
    /// coordinate names and constants.
    ///
    /// Used to push spacetime-level coefficient functions onto the larger
    /// phase chart. Shared subtrees stay shared.
    pub fn transport(&self, target: &Chart) -> Result<Self, ChartError> {
        if self.chart == *target {
            return Ok(self.clone());
        }
        let mut memo: HashMap<*const Node, ScalarExpr> = HashMap::new();
        let expr = transport_node(&self.expr, &self.chart, target, &mut memo)?;
        Ok(Self::from_expr(target.clone(), expr))
    }
}

fn transport_node(
    e: &ScalarExpr,
    from: &Chart,
    to: &Chart,
    memo: &mut HashMap<*const Node, ScalarExpr>,
) -> Result<ScalarExpr, ChartError> {
    let key = Rc::as_ptr(&e.0);
    if let Some(done) = memo.get(&key) {
        return Ok(done.clone());
    }
    let out = match &*e.0 {
        Node::Lit(v) => lit(*v),
        Node::Konst(i) => {
            let name = from.constant_name(*i);
            let j = to
                .constant_index(name)
                .ok_or_else(|| ChartError::MissingSymbol(name.to_owned()))?;
            let (ours, theirs) = (from.constant_value(*i), to.constant_value(j));
            if ours != theirs {
                return Err(ChartError::ConstantMismatch {
                    name: name.to_owned(),
                    ours,
                    theirs,
                });
            }
            ScalarExpr::new(Node::Konst(j))
        }
        Node::Coord(i) => {
            let name = from.coord_name(*i);
            let j = to
                .coord_index(name)
                .ok_or_else(|| ChartError::MissingSymbol(name.to_owned()))?;
            ScalarExpr::new(Node::Coord(j))
        }
        Node::Sum(ts) => add(
            ts.iter()
                .map(|t| transport_node(t, from, to, memo))
                .collect::<Result<_, _>>()?,
        ),
        Node::Prod(fs) => mul(
            fs.iter()
                .map(|t| transport_node(t, from, to, memo))
                .collect::<Result<_, _>>()?,
        ),
        Node::Quot(n, d) => quot(
            transport_node(n, from, to, memo)?,
            transport_node(d, from, to, memo)?,
        ),
        Node::Pow(b, k) => pow(transport_node(b, from, to, memo)?, *k),
        Node::Sqrt(a) => sqrt(transport_node(a, from, to, memo)?),
        Node::Neg(a) => neg(transport_node(a, from, to, memo)?),
    };
    memo.insert(key, out.clone());
    Ok(out)
}

// Operator sugar. All of these panic on mismatched charts, which is a
// programming error (public input paths validate charts first).

impl std::ops::Add for &ScalarField {
    type Output = ScalarField;
    fn add(self, rhs: &ScalarField) -> ScalarField {
        assert_same_chart(&self.chart, &rhs.chart, "add");
        ScalarField::from_expr(self.chart.clone(), add(vec![self.expr.clone(), rhs.expr.clone()]))
    }
}

impl std::ops::Sub for &ScalarField {
    type Output = ScalarField;
    fn sub(self, rhs: &ScalarField) -> ScalarField {
        assert_same_chart(&self.chart, &rhs.chart, "sub");
        ScalarField::from_expr(self.chart.clone(), sub(self.expr.clone(), rhs.expr.clone()))
    }
}

impl std::ops::Mul for &ScalarField {
    type Output = ScalarField;
    fn mul(self, rhs: &ScalarField) -> ScalarField {
        assert_same_chart(&self.chart, &rhs.chart, "mul");
        ScalarField::from_expr(self.chart.clone(), mul(vec![self.expr.clone(), rhs.expr.clone()]))
    }
}

impl std::ops::Neg for &ScalarField {
    type Output = ScalarField;
    fn neg(self) -> ScalarField {
        ScalarField::from_expr(self.chart.clone(), neg(self.expr.clone()))
    }
}

impl std::ops::Add for ScalarField {
    type Output = ScalarField;
    fn add(self, rhs: ScalarField) -> ScalarField {
        &self + &rhs
    }
}

impl std::ops::Sub for ScalarField {
    type Output = ScalarField;
    fn sub(self, rhs: ScalarField) -> ScalarField {
        &self - &rhs
    }
}

impl std::ops::Mul for ScalarField {
    type Output = ScalarField;
    fn mul(self, rhs: ScalarField) -> ScalarField {
        &self * &rhs
    }
}

impl std::ops::Neg for ScalarField {
    type Output = ScalarField;
    fn neg(self) -> ScalarField {
        -&self
    }
}

// ---------------------------------------------------------------------------
// Printing
// ---------------------------------------------------------------------------

/// Operator strength used to decide parenthesization when printing.
/// Atoms are 4; the printed output re-parses to an evaluation-equal tree.
#[derive(PartialEq, PartialOrd, Clone, Copy)]
enum Prec {
    Sum = 1,
    Term = 2,
    Factor = 3,
    Atom = 4,
}

fn fmt_node(
    e: &ScalarExpr,
    chart: &Chart,
    f: &mut fmt::Formatter<'_>,
    min: Prec,
) -> fmt::Result {
    let prec = match &*e.0 {
        Node::Lit(v) => {
            if *v < 0.0 {
                Prec::Factor
            } else {
                Prec::Atom
            }
        }
        Node::Konst(_) | Node::Coord(_) | Node::Sqrt(_) => Prec::Atom,
        Node::Sum(_) => Prec::Sum,
        Node::Prod(_) | Node::Quot(_, _) => Prec::Term,
        Node::Pow(_, _) => Prec::Factor,
        Node::Neg(_) => Prec::Factor,
    };
    let parens = (prec as u8) < (min as u8);
    if parens {
        write!(f, "(")?;
    }
    match &*e.0 {
        Node::Lit(v) => write!(f, "{v}")?,
        Node::Konst(i) => write!(f, "{}", chart.constant_name(*i))?,
        Node::Coord(i) => write!(f, "{}", chart.coord_name(*i))?,
        Node::Sum(terms) => {
            for (i, t) in terms.iter().enumerate() {
                if i == 0 {
                    fmt_node(t, chart, f, Prec::Sum)?;
                } else if let Node::Neg(inner) = &*t.0 {
                    write!(f, " - ")?;
                    fmt_node(inner, chart, f, Prec::Term)?;
                } else {
                    write!(f, " + ")?;
                    fmt_node(t, chart, f, Prec::Term)?;
                }
            }
        }
        Node::Prod(factors) => {
            for (i, fac) in factors.iter().enumerate() {
                if i > 0 {
                    write!(f, "*")?;
                }
                fmt_node(fac, chart, f, Prec::Factor)?;
            }
        }
        Node::Quot(n, d) => {
            fmt_node(n, chart, f, Prec::Term)?;
            write!(f, "/")?;
            fmt_node(d, chart, f, Prec::Atom)?;
        }
        Node::Pow(b, k) => {
            fmt_node(b, chart, f, Prec::Atom)?;
            write!(f, "^{k}")?;
        }
        Node::Sqrt(a) => {
            write!(f, "sqrt(")?;
            fmt_node(a, chart, f, Prec::Sum)?;
            write!(f, ")")?;
        }
        Node::Neg(a) => {
            write!(f, "-")?;
            fmt_node(a, chart, f, Prec::Atom)?;
        }
    }
    if parens {
        write!(f, ")")?;
    }
    Ok(())
}

impl fmt::Display for ScalarField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt_node(&self.expr, &self.chart, f, Prec::Sum)
    }
}

// ---------------------------------------------------------------------------
// Sampled equality
// ---------------------------------------------------------------------------

/// Outcome of a sampled field comparison.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldComparison {
    /// True iff `residual ≤ tol`.
    pub equal: bool,
    /// `max` over samples of `|f−g| / (1 + max(|f|, |g|))`.
    pub residual: f64,
}

/// Compare two fields over the sampler's points with relative residual
/// `|f−g| / (1 + max(|f|, |g|))`.
///
/// A domain error at any sample point aborts the comparison and is
/// returned, with the offending point attached.
pub fn field_equal(
    f: &ScalarField,
    g: &ScalarField,
    samples: &Sampler,
    tol: f64,
) -> Result<FieldComparison, EvalError> {
    assert_same_chart(f.chart(), g.chart(), "field_equal");
    assert_same_chart(f.chart(), samples.chart(), "field_equal (sampler)");
    let mut residual = 0.0f64;
    for p in samples.points() {
        let fv = f.eval(p)?;
        let gv = g.eval(p)?;
        let r = (fv - gv).abs() / (1.0 + fv.abs().max(gv.abs()));
        residual = residual.max(r);
    }
    Ok(FieldComparison {
        equal: residual <= tol,
        residual,
    })
}

/// Residual of a field against zero over the sampler's points.
pub fn field_residual(f: &ScalarField, samples: &Sampler) -> Result<f64, EvalError> {
    let zero = ScalarField::zero(f.chart());
    Ok(field_equal(f, &zero, samples, 0.0)?.residual)
}

// ---------------------------------------------------------------------------
// Random polynomials
// ---------------------------------------------------------------------------

/// A random polynomial of total degree ≤ 2 with coefficients drawn uniformly
/// from [−1, 1].
///
/// Degree 2 is enough to excite every term of the identities verified in
/// this crate while keeping expression growth bounded; the verification
/// routines that need random test functions all use this generator.
pub fn random_polynomial(chart: &Chart, rng: &mut impl rand::Rng) -> ScalarField {
    let n = chart.dim();
    let mut terms = vec![lit(2.0 * rng.gen::<f64>() - 1.0)];
    for i in 0..n {
        let c = 2.0 * rng.gen::<f64>() - 1.0;
        terms.push(mul(vec![lit(c), ScalarExpr::new(Node::Coord(i))]));
    }
    for i in 0..n {
        for j in i..n {
            let c = 2.0 * rng.gen::<f64>() - 1.0;
            terms.push(mul(vec![
                lit(c),
                ScalarExpr::new(Node::Coord(i)),
                ScalarExpr::new(Node::Coord(j)),
            ]));
        }
    }
    ScalarField::from_expr(chart.clone(), add(terms))
}

// Internal constructors used by the parser.
pub(crate) mod build {
    use super::*;

    pub(crate) fn field(chart: &Chart, expr: ScalarExpr) -> ScalarField {
        ScalarField::from_expr(chart.clone(), expr)
    }

    pub(crate) fn lit(v: f64) -> ScalarExpr {
        super::lit(v)
    }
    pub(crate) fn konst(i: usize) -> ScalarExpr {
        ScalarExpr::new(Node::Konst(i))
    }
    pub(crate) fn coord(i: usize) -> ScalarExpr {
        ScalarExpr::new(Node::Coord(i))
    }
    pub(crate) fn add(terms: Vec<ScalarExpr>) -> ScalarExpr {
        super::add(terms)
    }
    pub(crate) fn mul(factors: Vec<ScalarExpr>) -> ScalarExpr {
        super::mul(factors)
    }
    pub(crate) fn quot(n: ScalarExpr, d: ScalarExpr) -> ScalarExpr {
        super::quot(n, d)
    }
    pub(crate) fn pow(b: ScalarExpr, k: u32) -> ScalarExpr {
        super::pow(b, k)
    }
    pub(crate) fn sqrt(a: ScalarExpr) -> ScalarExpr {
        super::sqrt(a)
    }
    pub(crate) fn neg(a: ScalarExpr) -> ScalarExpr {
        super::neg(a)
    }
}
