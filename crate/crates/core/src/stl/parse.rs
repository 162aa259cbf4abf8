//! Recursive-descent parser for the specification language.
//!
//! ```text
//! spec     := group ("&&" group)*
//! group    := temporal | "(" temporal ("||" temporal)* ")"
//! temporal := "!" temporal
//!           | OP interval (OP interval)? body
//!           | body "U" interval body
//! OP       := "F" | "G"
//! interval := "[" num "," num "]"
//! body     := "(" bexpr ")" | factor
//! bexpr    := conj ("|" conj)*
//! conj     := factor ("&" factor)*
//! factor   := "!" factor | "(" bexpr ")" | atom
//! atom     := box(v,lo,hi) | rect(xlo,xhi,ylo,yhi) | circle(v,v,cx,cy,r)
//!           | v "<=" num | v ">=" num | lin(a_1,...,a_n,b)
//! ```
//!
//! Variables are `x`, `y`, `z` or `x1`, `x2`, ...; the state dimension is the
//! largest variable index used. A negated temporal operator is rewritten by
//! duality (`!F φ = G !φ`, `!F G φ = G F !φ`); a negated `U` is rejected.

use std::fmt;

use thiserror::Error;

use super::ast::{InnerFormula, SpecTree, Subtask, SubtaskGroup, TemporalOp};
use super::normalize::{normalize, Atom, BoolFormula, NormalizeError};
use crate::geometry::TargetSet;

/// 1-based line and column in the source text.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}, column {}", self.line, self.col)
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StlError {
    #[error("{pos}: syntax error: {msg}")]
    Syntax { pos: Pos, msg: String },
    #[error("{pos}: invalid predicate: {msg}")]
    InvalidPredicate { pos: Pos, msg: String },
    #[error("{pos}: invalid interval: {msg}")]
    InvalidInterval { pos: Pos, msg: String },
    #[error("{pos}: {source}")]
    Normalize { pos: Pos, source: NormalizeError },
    #[error("{pos}: negation cannot be eliminated: {msg}")]
    Negation { pos: Pos, msg: String },
    #[error("{pos}: temporal operators cannot be combined with bare predicates")]
    TemporalWithPredicate { pos: Pos },
    #[error("{pos}: dimension mismatch: {msg}")]
    Dimension { pos: Pos, msg: String },
}

impl StlError {
    pub fn pos(&self) -> Pos {
        match self {
            StlError::Syntax { pos, .. }
            | StlError::InvalidPredicate { pos, .. }
            | StlError::InvalidInterval { pos, .. }
            | StlError::Normalize { pos, .. }
            | StlError::Negation { pos, .. }
            | StlError::TemporalWithPredicate { pos }
            | StlError::Dimension { pos, .. } => *pos,
        }
    }
}

/// Parses a specification.
pub fn parse_spec(text: &str) -> Result<SpecTree, StlError> {
    let tokens = lex(text)?;
    let mut p = Parser { tokens, pos: 0 };
    let groups = p.spec()?;
    lower(groups)
}

// ---------------------------------------------------------------------------
// Lexer

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Num(f64),
    LBrack,
    RBrack,
    LParen,
    RParen,
    Comma,
    AndAnd,
    OrOr,
    And,
    Or,
    Not,
    Le,
    Ge,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "`{s}`"),
            Tok::Num(v) => write!(f, "number {v}"),
            Tok::LBrack => write!(f, "`[`"),
            Tok::RBrack => write!(f, "`]`"),
            Tok::LParen => write!(f, "`(`"),
            Tok::RParen => write!(f, "`)`"),
            Tok::Comma => write!(f, "`,`"),
            Tok::AndAnd => write!(f, "`&&`"),
            Tok::OrOr => write!(f, "`||`"),
            Tok::And => write!(f, "`&`"),
            Tok::Or => write!(f, "`|`"),
            Tok::Not => write!(f, "`!`"),
            Tok::Le => write!(f, "`<=`"),
            Tok::Ge => write!(f, "`>=`"),
            Tok::Eof => write!(f, "end of input"),
        }
    }
}

fn lex(text: &str) -> Result<Vec<(Tok, Pos)>, StlError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0, 1, 1);
    while i < chars.len() {
        let c = chars[i];
        let pos = Pos { line, col };
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        let next = chars.get(i + 1).copied();
        let (tok, len) = match c {
            '[' => (Tok::LBrack, 1),
            ']' => (Tok::RBrack, 1),
            '(' => (Tok::LParen, 1),
            ')' => (Tok::RParen, 1),
            ',' => (Tok::Comma, 1),
            '&' if next == Some('&') => (Tok::AndAnd, 2),
            '&' => (Tok::And, 1),
            '|' if next == Some('|') => (Tok::OrOr, 2),
            '|' => (Tok::Or, 1),
            '!' | '¬' => (Tok::Not, 1),
            '<' if next == Some('=') => (Tok::Le, 2),
            '>' if next == Some('=') => (Tok::Ge, 2),
            '≤' => (Tok::Le, 1),
            '≥' => (Tok::Ge, 1),
            c if c.is_ascii_digit() || c == '.' || c == '-' || c == '+' => {
                let mut j = i + 1;
                while j < chars.len() {
                    let d = chars[j];
                    let exp_sign = (d == '-' || d == '+') && matches!(chars[j - 1], 'e' | 'E');
                    if d.is_ascii_digit() || d == '.' || d == 'e' || d == 'E' || exp_sign {
                        j += 1;
                    } else {
                        break;
                    }
                }
                let s: String = chars[i..j].iter().collect();
                let v: f64 = s.parse().map_err(|_| StlError::Syntax { pos, msg: format!("malformed number `{s}`") })?;
                if !v.is_finite() {
                    return Err(StlError::Syntax { pos, msg: format!("number `{s}` is not finite") });
                }
                (Tok::Num(v), j - i)
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let mut j = i + 1;
                while j < chars.len() && (chars[j].is_ascii_alphanumeric() || chars[j] == '_') {
                    j += 1;
                }
                (Tok::Ident(chars[i..j].iter().collect()), j - i)
            }
            other => return Err(StlError::Syntax { pos, msg: format!("unexpected character `{other}`") }),
        };
        out.push((tok, pos));
        i += len;
        col += len;
    }
    out.push((Tok::Eof, Pos { line, col }));
    Ok(out)
}

// ---------------------------------------------------------------------------
// Raw syntax tree (before the state dimension is known)

#[derive(Debug, Clone)]
enum RawAtom {
    Box { axis: usize, lo: f64, hi: f64 },
    Rect { lo: [f64; 2], hi: [f64; 2] },
    Circle { axes: [usize; 2], center: [f64; 2], radius: f64 },
    Upper { axis: usize, value: f64 },
    Lower { axis: usize, value: f64 },
    Lin { coeffs: Vec<f64>, offset: f64 },
}

#[derive(Debug, Clone)]
enum RawBool {
    Atom(RawAtom, Pos),
    Not(Box<RawBool>),
    And(Vec<RawBool>),
    Or(Vec<RawBool>),
}

#[derive(Debug, Clone)]
struct RawTemporal {
    op: TemporalOp,
    inner: RawBool,
    left: Option<RawBool>,
}

struct Parser {
    tokens: Vec<(Tok, Pos)>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.tokens[self.pos].0
    }

    fn peek_at(&self, k: usize) -> &Tok {
        &self.tokens[(self.pos + k).min(self.tokens.len() - 1)].0
    }

    fn here(&self) -> Pos {
        self.tokens[self.pos].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.tokens[self.pos].0.clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn syntax<T>(&self, msg: impl Into<String>) -> Result<T, StlError> {
        Err(StlError::Syntax { pos: self.here(), msg: msg.into() })
    }

    fn expect(&mut self, want: Tok) -> Result<(), StlError> {
        if *self.peek() == want {
            self.bump();
            Ok(())
        } else {
            self.syntax(format!("expected {want}, found {}", self.peek()))
        }
    }

    fn number(&mut self) -> Result<f64, StlError> {
        match self.peek().clone() {
            Tok::Num(v) => {
                self.bump();
                Ok(v)
            }
            other => self.syntax(format!("expected a number, found {other}")),
        }
    }

    fn is_temporal_op(&self) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == "F" || s == "G") && *self.peek_at(1) == Tok::LBrack
    }

    fn spec(&mut self) -> Result<Vec<Vec<RawTemporal>>, StlError> {
        let mut groups = vec![self.group()?];
        loop {
            match self.peek() {
                Tok::AndAnd => {
                    self.bump();
                    groups.push(self.group()?);
                }
                Tok::Eof => return Ok(groups),
                Tok::And | Tok::Or => return Err(StlError::TemporalWithPredicate { pos: self.here() }),
                other => return self.syntax(format!("expected `&&` or end of input, found {other}")),
            }
        }
    }

    fn group(&mut self) -> Result<Vec<RawTemporal>, StlError> {
        if *self.peek() == Tok::LParen {
            let start = self.pos;
            let first = match self.paren_group() {
                Ok(g) => return Ok(g),
                Err(e) => e,
            };
            let first_at = self.pos;
            self.pos = start;
            return match self.temporal() {
                Ok(t) => Ok(vec![t]),
                Err(second) => {
                    // Report whichever attempt got further.
                    let second_at = self.pos;
                    Err(if first_at > second_at { first } else { second })
                }
            };
        }
        Ok(vec![self.temporal()?])
    }

    fn paren_group(&mut self) -> Result<Vec<RawTemporal>, StlError> {
        self.expect(Tok::LParen)?;
        let mut members = vec![self.temporal()?];
        while *self.peek() == Tok::OrOr {
            self.bump();
            members.push(self.temporal()?);
        }
        self.expect(Tok::RParen)?;
        Ok(members)
    }

    fn interval(&mut self) -> Result<(f64, f64, Pos), StlError> {
        let pos = self.here();
        self.expect(Tok::LBrack)?;
        let a = self.number()?;
        self.expect(Tok::Comma)?;
        let b = self.number()?;
        self.expect(Tok::RBrack)?;
        if a < 0.0 || b < a {
            return Err(StlError::InvalidInterval {
                pos,
                msg: format!("[{a},{b}] must satisfy 0 <= lower <= upper"),
            });
        }
        Ok((a, b, pos))
    }

    fn temporal(&mut self) -> Result<RawTemporal, StlError> {
        let pos = self.here();
        if *self.peek() == Tok::Not {
            let start = self.pos;
            self.bump();
            if self.is_temporal_op() {
                let inner = self.temporal()?;
                return negate_temporal(inner, pos);
            }
            if *self.peek() == Tok::LParen {
                self.bump();
                if let Ok(inner) = self.temporal() {
                    if *self.peek() == Tok::RParen {
                        self.bump();
                        return negate_temporal(inner, pos);
                    }
                }
            }
            // Not a negated temporal operator: the `!` belongs to the left
            // operand of an until.
            self.pos = start;
        }
        if self.is_temporal_op() {
            let Tok::Ident(outer) = self.bump() else { unreachable!() };
            let (a, b, _) = self.interval()?;
            let op = if self.is_temporal_op() {
                let Tok::Ident(inner) = self.bump() else { unreachable!() };
                let (c, d, _) = self.interval()?;
                match (outer.as_str(), inner.as_str()) {
                    ("F", "G") => TemporalOp::FinallyGlobally { a, b, c, d },
                    ("G", "F") => TemporalOp::GloballyFinally { a, b, c, d },
                    _ => {
                        return Err(StlError::Syntax {
                            pos,
                            msg: format!("nested `{outer}{inner}` is outside the supported fragment"),
                        })
                    }
                }
            } else if outer == "F" {
                TemporalOp::Finally { a, b }
            } else {
                TemporalOp::Globally { a, b }
            };
            let inner = self.body()?;
            return Ok(RawTemporal { op, inner, left: None });
        }
        let left = self.body()?;
        match self.peek() {
            Tok::Ident(s) if s == "U" => {
                self.bump();
                let (a, b, _) = self.interval()?;
                let right = self.body()?;
                Ok(RawTemporal { op: TemporalOp::Until { a, b }, inner: right, left: Some(left) })
            }
            Tok::AndAnd | Tok::OrOr | Tok::Eof | Tok::RParen | Tok::And | Tok::Or => {
                Err(StlError::TemporalWithPredicate { pos })
            }
            other => self.syntax(format!("expected `U[a,b]` after a predicate formula, found {other}")),
        }
    }

    fn body(&mut self) -> Result<RawBool, StlError> {
        if *self.peek() == Tok::LParen {
            self.bump();
            let f = self.bexpr()?;
            self.expect(Tok::RParen)?;
            Ok(f)
        } else {
            self.factor()
        }
    }

    fn bexpr(&mut self) -> Result<RawBool, StlError> {
        let mut parts = vec![self.conj()?];
        while *self.peek() == Tok::Or {
            self.bump();
            parts.push(self.conj()?);
        }
        Ok(if parts.len() == 1 { parts.pop().unwrap() } else { RawBool::Or(parts) })
    }

    fn conj(&mut self) -> Result<RawBool, StlError> {
        let mut parts = vec![self.factor()?];
        while *self.peek() == Tok::And {
            self.bump();
            parts.push(self.factor()?);
        }
        Ok(if parts.len() == 1 { parts.pop().unwrap() } else { RawBool::And(parts) })
    }

    fn factor(&mut self) -> Result<RawBool, StlError> {
        match self.peek() {
            Tok::Not => {
                self.bump();
                Ok(RawBool::Not(Box::new(self.factor()?)))
            }
            Tok::LParen => {
                self.bump();
                let f = self.bexpr()?;
                self.expect(Tok::RParen)?;
                Ok(f)
            }
            _ if self.is_temporal_op() => Err(StlError::Syntax {
                pos: self.here(),
                msg: "temporal operators cannot be nested inside a predicate formula".into(),
            }),
            _ => self.atom(),
        }
    }

    fn args(&mut self) -> Result<Vec<(Tok, Pos)>, StlError> {
        self.expect(Tok::LParen)?;
        let mut out = Vec::new();
        loop {
            let pos = self.here();
            match self.bump() {
                t @ (Tok::Num(_) | Tok::Ident(_)) => out.push((t, pos)),
                other => return Err(StlError::Syntax { pos, msg: format!("expected an argument, found {other}") }),
            }
            match self.bump() {
                Tok::Comma => continue,
                Tok::RParen => return Ok(out),
                other => {
                    return Err(StlError::Syntax { pos: self.tokens[self.pos - 1].1, msg: format!("expected `,` or `)`, found {other}") })
                }
            }
        }
    }

    fn atom(&mut self) -> Result<RawBool, StlError> {
        let pos = self.here();
        let name = match self.peek().clone() {
            Tok::Ident(s) => s,
            other => return self.syntax(format!("expected a predicate, found {other}")),
        };
        self.bump();
        let bad = |msg: String| StlError::InvalidPredicate { pos, msg };
        let atom = match name.as_str() {
            "box" => {
                let a = self.args()?;
                expect_arity(&a, 3, "box(var,lo,hi)", pos)?;
                let axis = var(&a[0])?;
                let (lo, hi) = (num(&a[1])?, num(&a[2])?);
                if !(lo < hi) {
                    return Err(bad(format!("box bounds must satisfy lo < hi, got [{lo},{hi}]")));
                }
                RawAtom::Box { axis, lo, hi }
            }
            "rect" => {
                let a = self.args()?;
                expect_arity(&a, 4, "rect(xlo,xhi,ylo,yhi)", pos)?;
                let v: Vec<f64> = a.iter().map(num).collect::<Result<_, _>>()?;
                if !(v[0] < v[1] && v[2] < v[3]) {
                    return Err(bad(format!("rect bounds must satisfy lo < hi on both axes, got {v:?}")));
                }
                RawAtom::Rect { lo: [v[0], v[2]], hi: [v[1], v[3]] }
            }
            "circle" => {
                let a = self.args()?;
                expect_arity(&a, 5, "circle(var,var,cx,cy,r)", pos)?;
                let axes = [var(&a[0])?, var(&a[1])?];
                if axes[0] == axes[1] {
                    return Err(bad("circle needs two distinct variables".into()));
                }
                let (cx, cy, r) = (num(&a[2])?, num(&a[3])?, num(&a[4])?);
                if !(r > 0.0) {
                    return Err(bad(format!("circle radius must be positive, got {r}")));
                }
                RawAtom::Circle { axes, center: [cx, cy], radius: r }
            }
            "lin" => {
                let a = self.args()?;
                if a.len() < 2 {
                    return Err(bad("lin needs at least one coefficient and an offset".into()));
                }
                let v: Vec<f64> = a.iter().map(num).collect::<Result<_, _>>()?;
                let (coeffs, offset) = (v[..v.len() - 1].to_vec(), v[v.len() - 1]);
                if coeffs.iter().all(|c| *c == 0.0) {
                    return Err(bad("lin coefficients must not all be zero".into()));
                }
                RawAtom::Lin { coeffs, offset }
            }
            _ => {
                let axis = var(&(Tok::Ident(name.clone()), pos))?;
                let op = self.bump();
                let value = self.number()?;
                match op {
                    Tok::Le => RawAtom::Upper { axis, value },
                    Tok::Ge => RawAtom::Lower { axis, value },
                    other => return Err(StlError::Syntax { pos, msg: format!("expected `<=` or `>=` after `{name}`, found {other}") }),
                }
            }
        };
        Ok(RawBool::Atom(atom, pos))
    }
}

fn expect_arity(args: &[(Tok, Pos)], n: usize, form: &str, pos: Pos) -> Result<(), StlError> {
    if args.len() == n {
        Ok(())
    } else {
        Err(StlError::InvalidPredicate { pos, msg: format!("expected {form}, got {} arguments", args.len()) })
    }
}

fn num(arg: &(Tok, Pos)) -> Result<f64, StlError> {
    match &arg.0 {
        Tok::Num(v) => Ok(*v),
        other => Err(StlError::Syntax { pos: arg.1, msg: format!("expected a number, found {other}") }),
    }
}

fn var(arg: &(Tok, Pos)) -> Result<usize, StlError> {
    let Tok::Ident(name) = &arg.0 else {
        return Err(StlError::Syntax { pos: arg.1, msg: format!("expected a variable, found {}", arg.0) });
    };
    let idx = match name.as_str() {
        "x" => Some(0),
        "y" => Some(1),
        "z" => Some(2),
        s => s.strip_prefix('x').and_then(|d| d.parse::<usize>().ok()).filter(|&k| k >= 1).map(|k| k - 1),
    };
    idx.ok_or_else(|| StlError::Syntax { pos: arg.1, msg: format!("unknown variable `{name}`") })
}

fn negate_temporal(t: RawTemporal, pos: Pos) -> Result<RawTemporal, StlError> {
    let op = match t.op {
        TemporalOp::Finally { a, b } => TemporalOp::Globally { a, b },
        TemporalOp::Globally { a, b } => TemporalOp::Finally { a, b },
        TemporalOp::FinallyGlobally { a, b, c, d } => TemporalOp::GloballyFinally { a, b, c, d },
        TemporalOp::GloballyFinally { a, b, c, d } => TemporalOp::FinallyGlobally { a, b, c, d },
        TemporalOp::Until { .. } => {
            return Err(StlError::Negation { pos, msg: "a negated until has no equivalent in the fragment".into() })
        }
    };
    Ok(RawTemporal { op, inner: RawBool::Not(Box::new(t.inner)), left: None })
}

// ---------------------------------------------------------------------------
// Lowering

fn lower(groups: Vec<Vec<RawTemporal>>) -> Result<SpecTree, StlError> {
    let mut dim = 0;
    for t in groups.iter().flatten() {
        dim = dim.max(bool_dim(&t.inner)?);
        if let Some(l) = &t.left {
            dim = dim.max(bool_dim(l)?);
        }
    }
    let mut next_id = 1;
    let mut out = Vec::with_capacity(groups.len());
    for group in groups {
        let mut members = Vec::with_capacity(group.len());
        for t in group {
            let inner = lower_inner(&t.inner, dim)?;
            let left_inner = t.left.as_ref().map(|l| lower_inner(l, dim)).transpose()?;
            members.push(Subtask { id: next_id, op: t.op, inner, left_inner });
            next_id += 1;
        }
        out.push(if members.len() == 1 { SubtaskGroup::Single(members.pop().unwrap()) } else { SubtaskGroup::Any(members) });
    }
    Ok(SpecTree { dim, groups: out })
}

fn bool_dim(f: &RawBool) -> Result<usize, StlError> {
    Ok(match f {
        RawBool::Atom(a, _) => match a {
            RawAtom::Box { axis, .. } | RawAtom::Upper { axis, .. } | RawAtom::Lower { axis, .. } => axis + 1,
            RawAtom::Rect { .. } => 2,
            RawAtom::Circle { axes, .. } => axes[0].max(axes[1]) + 1,
            RawAtom::Lin { coeffs, .. } => coeffs.len(),
        },
        RawBool::Not(g) => bool_dim(g)?,
        RawBool::And(v) | RawBool::Or(v) => v.iter().map(bool_dim).try_fold(0, |m, d| d.map(|d| m.max(d)))?,
    })
}

fn first_pos(f: &RawBool) -> Pos {
    match f {
        RawBool::Atom(_, p) => *p,
        RawBool::Not(g) => first_pos(g),
        RawBool::And(v) | RawBool::Or(v) => first_pos(&v[0]),
    }
}

fn lower_inner(f: &RawBool, dim: usize) -> Result<InnerFormula, StlError> {
    let formula = lower_bool(f, dim)?;
    normalize(&formula, dim, None).map_err(|source| StlError::Normalize { pos: first_pos(f), source })
}

fn lower_bool(f: &RawBool, dim: usize) -> Result<BoolFormula, StlError> {
    Ok(match f {
        RawBool::Atom(a, pos) => lower_atom(a, dim, *pos)?,
        RawBool::Not(g) => BoolFormula::not(lower_bool(g, dim)?),
        RawBool::And(v) => BoolFormula::And(v.iter().map(|g| lower_bool(g, dim)).collect::<Result<_, _>>()?),
        RawBool::Or(v) => BoolFormula::Or(v.iter().map(|g| lower_bool(g, dim)).collect::<Result<_, _>>()?),
    })
}

fn lower_atom(a: &RawAtom, dim: usize, pos: Pos) -> Result<BoolFormula, StlError> {
    let slab = |axis: usize, lo: f64, hi: f64| {
        BoolFormula::And(vec![
            BoolFormula::atom(Atom::lower(axis, dim, lo)),
            BoolFormula::atom(Atom::upper(axis, dim, hi)),
        ])
    };
    Ok(match a {
        RawAtom::Box { axis, lo, hi } => slab(*axis, *lo, *hi),
        RawAtom::Rect { lo, hi } => BoolFormula::And(vec![slab(0, lo[0], hi[0]), slab(1, lo[1], hi[1])]),
        RawAtom::Upper { axis, value } => BoolFormula::atom(Atom::upper(*axis, dim, *value)),
        RawAtom::Lower { axis, value } => BoolFormula::atom(Atom::lower(*axis, dim, *value)),
        RawAtom::Lin { coeffs, offset } => {
            if coeffs.len() != dim {
                return Err(StlError::Dimension {
                    pos,
                    msg: format!("lin has {} coefficients but the state has dimension {dim}", coeffs.len()),
                });
            }
            BoolFormula::atom(Atom::Halfspace { normal: coeffs.clone(), offset: *offset })
        }
        RawAtom::Circle { axes, center, radius } => {
            if dim != 2 {
                return Err(StlError::Normalize {
                    pos,
                    source: NormalizeError::NonCompact(format!("a circle in a {dim}-dimensional state space is not bounded")),
                });
            }
            let mut c = vec![0.0; 2];
            c[axes[0]] = center[0];
            c[axes[1]] = center[1];
            let set = TargetSet::disc(c, *radius).map_err(|e| StlError::InvalidPredicate { pos, msg: e.to_string() })?;
            BoolFormula::atom(Atom::Set(set))
        }
    })
}
