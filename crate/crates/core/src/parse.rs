//! Expression grammar for differential polynomials and lambda polynomials.
//!
//! Identifiers name generators or central symbols; `D(expr)` or a postfix
//! apostrophe applies the total derivative; a bare `D` is the derivative as
//! a formal operator symbol, so `(D + 2*l1)*L` applies the operator
//! `D + 2*l1` to `L`; `l1`, `l2`, ... are lambda variables; `+ - * / ^` have
//! the usual precedence; rational literals are `p` or `p/q`. The
//! pretty-printer emits the same grammar, so printing and re-parsing
//! round-trips on canonical forms.

use crate::diffpoly::DiffPoly;
use crate::error::{Error, Result};
use crate::lambda::LambdaPoly;
use crate::scalar::{binomial, Q};
use crate::table::GenTable;
use num_bigint::BigInt;
use num_traits::Zero;
use std::collections::BTreeMap;
use std::sync::Arc;

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(BigInt),
    Ident(String),
    Lambda(usize), // 0-based
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    Prime,
    LParen,
    RParen,
    DOp,
}

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
    line: usize,
    col: usize,
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Self {
        Lexer {
            src: src.as_bytes(),
            pos: 0,
            line: 1,
            col: 1,
        }
    }

    fn err(&self, msg: impl Into<String>) -> Error {
        Error::Syntax {
            line: self.line,
            col: self.col,
            msg: msg.into(),
        }
    }

    fn bump(&mut self) -> Option<u8> {
        let c = self.src.get(self.pos).copied();
        if let Some(c) = c {
            self.pos += 1;
            if c == b'\n' {
                self.line += 1;
                self.col = 1;
            } else {
                self.col += 1;
            }
        }
        c
    }

    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn tokens(mut self) -> Result<Vec<(Tok, usize, usize)>> {
        let mut out = Vec::new();
        while let Some(c) = self.peek() {
            let (line, col) = (self.line, self.col);
            match c {
                b' ' | b'\t' | b'\n' | b'\r' => {
                    self.bump();
                }
                b'0'..=b'9' => {
                    let mut s = String::new();
                    while let Some(d @ b'0'..=b'9') = self.peek() {
                        s.push(d as char);
                        self.bump();
                    }
                    out.push((Tok::Num(s.parse().unwrap()), line, col));
                }
                b'+' => {
                    self.bump();
                    out.push((Tok::Plus, line, col));
                }
                b'-' => {
                    self.bump();
                    out.push((Tok::Minus, line, col));
                }
                b'*' => {
                    self.bump();
                    out.push((Tok::Star, line, col));
                }
                b'/' => {
                    self.bump();
                    out.push((Tok::Slash, line, col));
                }
                b'^' => {
                    self.bump();
                    out.push((Tok::Caret, line, col));
                }
                b'\'' => {
                    self.bump();
                    out.push((Tok::Prime, line, col));
                }
                b'(' => {
                    self.bump();
                    out.push((Tok::LParen, line, col));
                }
                b')' => {
                    self.bump();
                    out.push((Tok::RParen, line, col));
                }
                c if c.is_ascii_alphabetic() || c == b'_' => {
                    let mut s = String::new();
                    while let Some(d) = self.peek() {
                        if d.is_ascii_alphanumeric() || d == b'_' {
                            s.push(d as char);
                            self.bump();
                        } else {
                            break;
                        }
                    }
                    if s == "D" {
                        out.push((Tok::DOp, line, col));
                    } else if let Some(rest) = s.strip_prefix('l') {
                        if !rest.is_empty() && rest.bytes().all(|b| b.is_ascii_digit()) {
                            let n: usize = rest.parse().map_err(|_| self.err("bad lambda index"))?;
                            if n == 0 {
                                return Err(self.err("lambda variables are numbered from l1"));
                            }
                            out.push((Tok::Lambda(n - 1), line, col));
                        } else {
                            out.push((Tok::Ident(s), line, col));
                        }
                    } else {
                        out.push((Tok::Ident(s), line, col));
                    }
                }
                other => {
                    return Err(self.err(format!("unexpected character `{}`", other as char)));
                }
            }
        }
        Ok(out)
    }
}

/// Intermediate parse value: a polynomial in the formal derivative operator
/// `D` with lambda-polynomial coefficients on the left of the `D` powers.
/// Plain values are the `D^0` part.
#[derive(Debug, Clone)]
struct OpVal {
    table: Arc<GenTable>,
    terms: BTreeMap<u16, LambdaPoly>,
}

impl OpVal {
    fn pure(v: LambdaPoly) -> OpVal {
        let table = v.table.clone();
        let mut terms = BTreeMap::new();
        if !v.is_zero() {
            terms.insert(0, v);
        }
        OpVal { table, terms }
    }

    fn d_symbol(table: &Arc<GenTable>) -> OpVal {
        let mut terms = BTreeMap::new();
        terms.insert(1u16, LambdaPoly::from_poly(DiffPoly::one(table), 0));
        OpVal {
            table: table.clone(),
            terms,
        }
    }

    fn nvars(&self) -> usize {
        self.terms.values().map(|v| v.nvars).max().unwrap_or(0)
    }

    fn widen(mut self, n: usize) -> OpVal {
        for v in self.terms.values_mut() {
            while v.nvars < n {
                *v = v.insert_var(v.nvars);
            }
        }
        self
    }

    fn is_pure(&self) -> bool {
        self.terms.keys().all(|&k| k == 0)
    }

    fn add_part(&mut self, k: u16, v: LambdaPoly) {
        if v.is_zero() {
            return;
        }
        match self.terms.entry(k) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(v);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                let s = e.get().add(&v).expect("same table");
                if s.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = s;
                }
            }
        }
    }

    fn add(self, other: OpVal, negate: bool) -> OpVal {
        let n = self.nvars().max(other.nvars());
        let mut a = self.widen(n);
        let b = other.widen(n);
        for (k, v) in b.terms {
            a.add_part(k, if negate { v.neg() } else { v });
        }
        a
    }

    fn neg(mut self) -> OpVal {
        for v in self.terms.values_mut() {
            *v = v.neg();
        }
        self
    }

    fn scale(mut self, q: &Q) -> OpVal {
        for v in self.terms.values_mut() {
            *v = v.scale(q);
        }
        self.terms.retain(|_, v| !v.is_zero());
        self
    }

    /// `self * other`. When `other` is a plain value and `self` carries `D`
    /// powers, the operator is applied; when `other` carries `D` powers the
    /// product is operator composition, commuting `D` past coefficients by
    /// the Leibniz rule.
    fn mul(self, other: OpVal) -> Result<OpVal> {
        let n = self.nvars().max(other.nvars());
        let a = self.widen(n);
        let b = other.widen(n);
        let mut out = OpVal {
            table: a.table.clone(),
            terms: BTreeMap::new(),
        };
        let apply = b.is_pure();
        for (&k, av) in &a.terms {
            for (&j, bv) in &b.terms {
                if apply {
                    // av * D^k(bv)
                    let mut d = bv.clone();
                    for _ in 0..k {
                        d = d.map_coeffs_total_derivative();
                    }
                    out.add_part(0, av.mul(&d)?);
                } else {
                    // av D^k bv D^j = av sum_i C(k,i) D^i(bv) D^{k-i+j}
                    for i in 0..=k {
                        let mut d = bv.clone();
                        for _ in 0..i {
                            d = d.map_coeffs_total_derivative();
                        }
                        out.add_part(k - i + j, av.mul(&d)?.scale(&binomial(k as u32, i as u32)));
                    }
                }
            }
        }
        Ok(out)
    }
}

/// Result of parsing: a lambda polynomial in `nvars` variables. When the
/// expression mentions no lambda variables, `nvars == 0` and the value is a
/// plain differential polynomial.
pub struct Parsed(pub LambdaPoly);

impl Parsed {
    pub fn into_poly(self) -> Result<DiffPoly> {
        if self.0.nvars != 0 {
            return Err(Error::Parameter(
                "expression involves lambda variables where a differential polynomial was expected"
                    .into(),
            ));
        }
        let table = self.0.table.clone();
        Ok(self
            .0
            .terms
            .into_iter()
            .next()
            .map(|(_, c)| c)
            .unwrap_or_else(|| DiffPoly::zero(&table)))
    }

    /// Widen to the requested number of lambda variables.
    pub fn into_lambda(self, nvars: usize) -> Result<LambdaPoly> {
        if self.0.nvars > nvars {
            return Err(Error::Parameter(format!(
                "expression uses l{} but only {} lambda variable(s) are allowed",
                self.0.nvars, nvars
            )));
        }
        let mut v = self.0;
        while v.nvars < nvars {
            v = v.insert_var(v.nvars);
        }
        Ok(v)
    }
}

struct Parser<'a> {
    toks: Vec<(Tok, usize, usize)>,
    pos: usize,
    table: &'a Arc<GenTable>,
}

impl<'a> Parser<'a> {
    fn err_at(&self, msg: impl Into<String>) -> Error {
        let (line, col) = self
            .toks
            .get(self.pos)
            .map(|(_, l, c)| (*l, *c))
            .or_else(|| self.toks.last().map(|(_, l, c)| (*l, *c + 1)))
            .unwrap_or((1, 1));
        Error::Syntax {
            line,
            col,
            msg: msg.into(),
        }
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(t, _, _)| t)
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|(t, _, _)| t.clone());
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn expect_rparen(&mut self) -> Result<()> {
        match self.next() {
            Some(Tok::RParen) => Ok(()),
            _ => {
                self.pos = self.pos.saturating_sub(1);
                Err(self.err_at("expected `)`"))
            }
        }
    }

    // expr := term (('+'|'-') term)*
    fn expr(&mut self) -> Result<OpVal> {
        let mut acc = self.term()?;
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.next();
                    let t = self.term()?;
                    acc = acc.add(t, false);
                }
                Some(Tok::Minus) => {
                    self.next();
                    let t = self.term()?;
                    acc = acc.add(t, true);
                }
                _ => break,
            }
        }
        Ok(acc)
    }

    // term := factor (('*'|'/') factor)*
    fn term(&mut self) -> Result<OpVal> {
        let mut acc = self.factor()?;
        loop {
            match self.peek() {
                Some(Tok::Star) => {
                    self.next();
                    let f = self.factor()?;
                    acc = acc.mul(f)?;
                }
                Some(Tok::Slash) => {
                    self.next();
                    let f = self.factor()?;
                    let k = constant_of(&f).ok_or_else(|| {
                        self.err_at("division is only defined by nonzero rational constants")
                    })?;
                    if k.is_zero() {
                        return Err(self.err_at("division by zero"));
                    }
                    acc = acc.scale(&(Q::from_integer(1.into()) / k));
                }
                _ => break,
            }
        }
        Ok(acc)
    }

    // factor := ('-'|'+')* power
    fn factor(&mut self) -> Result<OpVal> {
        if let Some(Tok::Minus) = self.peek() {
            self.next();
            return Ok(self.factor()?.neg());
        }
        if let Some(Tok::Plus) = self.peek() {
            self.next();
            return self.factor();
        }
        self.power()
    }

    // power := atom ('^' uint)?
    fn power(&mut self) -> Result<OpVal> {
        let base = self.atom()?;
        if let Some(Tok::Caret) = self.peek() {
            self.next();
            let n = match self.next() {
                Some(Tok::Num(n)) => n,
                _ => {
                    self.pos = self.pos.saturating_sub(1);
                    return Err(self.err_at("exponent must be a nonnegative integer"));
                }
            };
            let n: u32 = n
                .try_into()
                .map_err(|_| self.err_at("exponent out of range"))?;
            let mut acc = OpVal::pure(LambdaPoly::from_poly(DiffPoly::one(self.table), 0));
            for _ in 0..n {
                acc = acc.mul(base.clone())?;
            }
            return Ok(acc);
        }
        Ok(base)
    }

    // atom := number | ident primes* | lambda | 'D' ('^' uint)? '(' expr ')' primes*
    //       | 'D' | '(' expr ')' primes*
    fn atom(&mut self) -> Result<OpVal> {
        let t = self
            .next()
            .ok_or_else(|| self.err_at("unexpected end of input"))?;
        let mut val = match t {
            Tok::Num(n) => OpVal::pure(LambdaPoly::from_poly(
                DiffPoly::constant(self.table, Q::from_integer(n)),
                0,
            )),
            Tok::Lambda(i) => OpVal::pure(LambdaPoly::lambda(self.table, i + 1, i)),
            Tok::Ident(name) => {
                if let Some(g) = self.table.gen_index(&name) {
                    OpVal::pure(LambdaPoly::from_poly(DiffPoly::var(self.table, g, 0), 0))
                } else if let Some(c) = self.table.central_index(&name) {
                    OpVal::pure(LambdaPoly::from_poly(DiffPoly::central(self.table, c), 0))
                } else {
                    self.pos -= 1;
                    return Err(Error::UnknownIdentifier(name));
                }
            }
            Tok::DOp => {
                // D^k(expr) and D(expr) apply; bare D is the operator symbol.
                let mut reps: u32 = 1;
                let mut explicit_pow = false;
                if let Some(Tok::Caret) = self.peek() {
                    if let Some((Tok::Num(_), _, _)) = self.toks.get(self.pos + 1) {
                        if let Some((Tok::LParen, _, _)) = self.toks.get(self.pos + 2) {
                            self.next();
                            if let Some(Tok::Num(n)) = self.next() {
                                reps = n
                                    .try_into()
                                    .map_err(|_| self.err_at("derivative order out of range"))?;
                                explicit_pow = true;
                            }
                        }
                    }
                }
                match self.peek() {
                    Some(Tok::LParen) => {
                        self.next();
                        let inner = self.expr()?;
                        self.expect_rparen()?;
                        if !inner.is_pure() {
                            return Err(
                                self.err_at("D(...) applies to plain expressions, not operators")
                            );
                        }
                        let mut v = inner;
                        let d = OpVal::d_symbol(self.table);
                        for _ in 0..reps {
                            v = d.clone().mul(v)?;
                        }
                        v
                    }
                    _ if !explicit_pow => OpVal::d_symbol(self.table),
                    _ => return Err(self.err_at("expected `(` after D^k")),
                }
            }
            Tok::LParen => {
                let inner = self.expr()?;
                self.expect_rparen()?;
                inner
            }
            other => {
                self.pos = self.pos.saturating_sub(1);
                return Err(self.err_at(format!("unexpected token {other:?}")));
            }
        };
        while let Some(Tok::Prime) = self.peek() {
            self.next();
            if !val.is_pure() {
                return Err(self.err_at("the prime derivative applies to plain expressions only"));
            }
            val = OpVal::d_symbol(self.table).mul(val)?;
        }
        Ok(val)
    }
}

fn constant_of(v: &OpVal) -> Option<Q> {
    if v.terms.is_empty() {
        return Some(Q::zero());
    }
    if !v.is_pure() {
        return None;
    }
    let lam = v.terms.get(&0).unwrap();
    if lam.terms.len() != 1 {
        return None;
    }
    let (e, c) = lam.terms.iter().next().unwrap();
    if e.iter().any(|&x| x != 0) {
        return None;
    }
    if c.terms.len() != 1 {
        return None;
    }
    let (m, q) = c.terms.iter().next().unwrap();
    if m.is_one() {
        Some(q.clone())
    } else {
        None
    }
}

/// Parse an expression over the given table. Lambda variables may appear;
/// the result records how many were used.
pub fn parse(text: &str, table: &Arc<GenTable>) -> Result<Parsed> {
    let toks = Lexer::new(text).tokens()?;
    if toks.is_empty() {
        return Err(Error::Syntax {
            line: 1,
            col: 1,
            msg: "empty expression".into(),
        });
    }
    let mut p = Parser {
        toks,
        pos: 0,
        table,
    };
    let v = p.expr()?;
    if p.pos != p.toks.len() {
        return Err(p.err_at("trailing input"));
    }
    if !v.is_pure() {
        return Err(p.err_at("dangling derivative operator: apply D to an operand"));
    }
    let nvars = v.nvars();
    let v = v.widen(nvars);
    let lam = v
        .terms
        .into_iter()
        .next()
        .map(|(_, l)| l)
        .unwrap_or_else(|| LambdaPoly::zero(table, nvars));
    Ok(Parsed(lam))
}

/// Parse an expression that must be a plain differential polynomial.
pub fn parse_poly(text: &str, table: &Arc<GenTable>) -> Result<DiffPoly> {
    parse(text, table)?.into_poly()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{q, qr};
    use crate::table::{Central, Generator, Parity};

    fn vir_table() -> Arc<GenTable> {
        GenTable::new(
            vec![Generator {
                name: "L".into(),
                parity: Parity::Even,
                weight: q(2),
            }],
            vec![Central {
                name: "c".into(),
                value: None,
            }],
        )
        .unwrap()
    }

    #[test]
    fn parse_simple_products() {
        let t = GenTable::even(&[("u", q(1))]);
        let p = parse_poly("u*D(u)", &t).unwrap();
        let u = DiffPoly::var(&t, 0, 0);
        let up = DiffPoly::var(&t, 0, 1);
        assert_eq!(p, u.mul(&up).unwrap());
        // D(u)^2 - D(u^2)/2 + u*D(u) = (u')^2
        let p = parse_poly("D(u)^2 - D(u^2)/2 + u*D(u)", &t).unwrap();
        assert_eq!(p, up.mul(&up).unwrap());
    }

    #[test]
    fn parse_virasoro_bracket() {
        let t = vir_table();
        let v = parse("(D + 2*l1)*L + (c/12)*l1^3", &t).unwrap().0;
        assert_eq!(v.nvars, 1);
        let lp = DiffPoly::var(&t, 0, 1);
        assert_eq!(v.coeff1(0), lp);
        assert_eq!(v.coeff1(1), DiffPoly::var(&t, 0, 0).scale(&q(2)));
        assert_eq!(v.coeff1(3), DiffPoly::central(&t, 0).scale(&qr(1, 12)));
    }

    #[test]
    fn operator_composition() {
        let t = GenTable::even(&[("u", q(1))]);
        // (D + l1)^2 u = u'' + 2 l1 u' + l1^2 u
        let v = parse("(D + l1)^2 * u", &t).unwrap().0;
        let mut expect = LambdaPoly::zero(&t, 1);
        expect.add_term(vec![0], DiffPoly::var(&t, 0, 2));
        expect.add_term(vec![1], DiffPoly::var(&t, 0, 1).scale(&q(2)));
        expect.add_term(vec![2], DiffPoly::var(&t, 0, 0));
        assert_eq!(v, expect);
        // u*D dangling
        assert!(parse("u*D", &t).is_err());
    }

    #[test]
    fn unknown_identifier() {
        let t = vir_table();
        assert!(matches!(
            parse_poly("L*w", &t),
            Err(Error::UnknownIdentifier(n)) if n == "w"
        ));
    }

    #[test]
    fn syntax_error_position() {
        let t = vir_table();
        match parse_poly("L + ", &t) {
            Err(Error::Syntax { col, .. }) => assert!(col >= 4),
            other => panic!("expected syntax error, got {other:?}"),
        }
    }

    #[test]
    fn print_parse_roundtrip() {
        let t = vir_table();
        let exprs = ["L", "L*L' + 3*D^2(L)", "c*L - 1/2", "(L)^2*c^3", "L''*L'*L"];
        for e in exprs {
            let p = parse_poly(e, &t).unwrap();
            let printed = p.to_string();
            let q = parse_poly(&printed, &t).unwrap();
            assert_eq!(p, q, "roundtrip failed for `{e}` printed as `{printed}`");
        }
    }
}
