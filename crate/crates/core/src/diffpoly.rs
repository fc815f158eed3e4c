//! Super-commutative differential polynomials over exact rationals.
//!
//! A `DiffPoly` is a finite rational combination of monomials in the
//! variables `u_i^(k)` (generator `i` differentiated `k` times) and in the
//! central symbols of the table. Odd variables square to zero and reordering
//! odd factors produces Koszul signs; the canonical monomial order is
//! lexicographic on (generator index, derivative order).

use crate::error::{Error, Result};
use crate::scalar::{format_q_abs, Q};
use crate::table::{same_table, GenTable, Parity};
use num_traits::{One, Signed, Zero};
use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

/// One differential variable `u_gen^(order)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DiffVar {
    pub gen: u32,
    pub order: u32,
}

impl DiffVar {
    pub fn new(gen: usize, order: u32) -> DiffVar {
        DiffVar {
            gen: gen as u32,
            order,
        }
    }

    pub fn parity(&self, table: &GenTable) -> Parity {
        table.gens[self.gen as usize].parity
    }

    /// weight(u_i^(k)) = weight(u_i) + k
    pub fn weight(&self, table: &GenTable) -> Q {
        table.gens[self.gen as usize].weight.clone() + Q::from_integer(self.order.into())
    }
}

/// Canonical monomial: sorted variables with multiplicities (odd variables
/// have multiplicity exactly 1) and central symbol powers.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct DiffMonomial {
    pub vars: Vec<(DiffVar, u32)>,
    pub centrals: Vec<(u32, u32)>,
}

impl DiffMonomial {
    pub fn one() -> DiffMonomial {
        DiffMonomial::default()
    }

    pub fn var(v: DiffVar) -> DiffMonomial {
        DiffMonomial {
            vars: vec![(v, 1)],
            centrals: vec![],
        }
    }

    pub fn central(idx: usize) -> DiffMonomial {
        DiffMonomial {
            vars: vec![],
            centrals: vec![(idx as u32, 1)],
        }
    }

    pub fn is_one(&self) -> bool {
        self.vars.is_empty() && self.centrals.is_empty()
    }

    pub fn parity(&self, table: &GenTable) -> Parity {
        let mut bit = 0u8;
        for (v, m) in &self.vars {
            bit ^= (v.parity(table).bit() * (*m as u8 & 1)) & 1;
        }
        Parity::from_bit(bit)
    }

    /// Total weight: sum over variables of (generator weight + order) times
    /// multiplicity. Central symbols have weight 0.
    pub fn weight(&self, table: &GenTable) -> Q {
        let mut w = Q::zero();
        for (v, m) in &self.vars {
            w += v.weight(table) * Q::from_integer((*m).into());
        }
        w
    }

    /// Total polynomial degree in the differential variables.
    pub fn degree(&self) -> u32 {
        self.vars.iter().map(|(_, m)| *m).sum()
    }

    /// Multiply two canonical monomials; returns the Koszul sign, or `None`
    /// if an odd variable repeats.
    pub fn mul(&self, other: &DiffMonomial, table: &GenTable) -> Option<(DiffMonomial, i32)> {
        // Koszul sign: odd factors of `other` that must move left past odd
        // factors of `self` that are strictly greater.
        let odd_a: Vec<DiffVar> = self
            .vars
            .iter()
            .filter(|(v, _)| v.parity(table).is_odd())
            .map(|(v, _)| *v)
            .collect();
        let odd_b: Vec<DiffVar> = other
            .vars
            .iter()
            .filter(|(v, _)| v.parity(table).is_odd())
            .map(|(v, _)| *v)
            .collect();
        let mut inversions = 0u64;
        for b in &odd_b {
            for a in &odd_a {
                if a == b {
                    return None; // odd square
                }
                if b < a {
                    inversions += 1;
                }
            }
        }
        let mut vars: Vec<(DiffVar, u32)> = Vec::with_capacity(self.vars.len() + other.vars.len());
        let (mut i, mut j) = (0, 0);
        while i < self.vars.len() || j < other.vars.len() {
            let take_a = if i == self.vars.len() {
                false
            } else if j == other.vars.len() {
                true
            } else {
                self.vars[i].0 <= other.vars[j].0
            };
            if take_a && j < other.vars.len() && self.vars[i].0 == other.vars[j].0 {
                let v = self.vars[i].0;
                debug_assert!(!v.parity(table).is_odd());
                vars.push((v, self.vars[i].1 + other.vars[j].1));
                i += 1;
                j += 1;
            } else if take_a {
                vars.push(self.vars[i]);
                i += 1;
            } else {
                vars.push(other.vars[j]);
                j += 1;
            }
        }
        let mut centrals: BTreeMap<u32, u32> = self.centrals.iter().cloned().collect();
        for (c, p) in &other.centrals {
            *centrals.entry(*c).or_insert(0) += *p;
        }
        let m = DiffMonomial {
            vars,
            centrals: centrals.into_iter().collect(),
        };
        let sign = if inversions % 2 == 0 { 1 } else { -1 };
        Some((m, sign))
    }
}

/// Element of the super-commutative differential polynomial algebra.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiffPoly {
    pub table: Arc<GenTable>,
    pub terms: BTreeMap<DiffMonomial, Q>,
}

impl DiffPoly {
    pub fn zero(table: &Arc<GenTable>) -> DiffPoly {
        DiffPoly {
            table: table.clone(),
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(table: &Arc<GenTable>, c: Q) -> DiffPoly {
        let mut p = DiffPoly::zero(table);
        if !c.is_zero() {
            p.terms.insert(DiffMonomial::one(), c);
        }
        p
    }

    pub fn one(table: &Arc<GenTable>) -> DiffPoly {
        DiffPoly::constant(table, Q::one())
    }

    pub fn var(table: &Arc<GenTable>, gen: usize, order: u32) -> DiffPoly {
        let mut p = DiffPoly::zero(table);
        p.terms
            .insert(DiffMonomial::var(DiffVar::new(gen, order)), Q::one());
        p
    }

    pub fn central(table: &Arc<GenTable>, idx: usize) -> DiffPoly {
        let mut p = DiffPoly::zero(table);
        p.terms.insert(DiffMonomial::central(idx), Q::one());
        p
    }

    pub fn monomial(table: &Arc<GenTable>, m: DiffMonomial, c: Q) -> DiffPoly {
        let mut p = DiffPoly::zero(table);
        if !c.is_zero() {
            p.terms.insert(m, c);
        }
        p
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add_term(&mut self, m: DiffMonomial, c: Q) {
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry(m);
        match entry {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    pub fn add(&self, other: &DiffPoly) -> Result<DiffPoly> {
        same_table(&self.table, &other.table)?;
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn sub(&self, other: &DiffPoly) -> Result<DiffPoly> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> DiffPoly {
        let mut out = self.clone();
        for c in out.terms.values_mut() {
            *c = -c.clone();
        }
        out
    }

    pub fn scale(&self, k: &Q) -> DiffPoly {
        if k.is_zero() {
            return DiffPoly::zero(&self.table);
        }
        let mut out = self.clone();
        for c in out.terms.values_mut() {
            *c *= k.clone();
        }
        out
    }

    /// Exact super-commutative product with Koszul signs.
    pub fn mul(&self, other: &DiffPoly) -> Result<DiffPoly> {
        same_table(&self.table, &other.table)?;
        let mut out = DiffPoly::zero(&self.table);
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                if let Some((m, sign)) = ma.mul(mb, &self.table) {
                    let mut c = ca.clone() * cb.clone();
                    if sign < 0 {
                        c = -c;
                    }
                    out.add_term(m, c);
                }
            }
        }
        Ok(out)
    }

    /// Parity if homogeneous, `None` for mixed-parity elements.
    pub fn parity(&self) -> Option<Parity> {
        let mut it = self.terms.keys();
        let first = it.next()?.parity(&self.table);
        for m in it {
            if m.parity(&self.table) != first {
                return None;
            }
        }
        Some(first)
    }

    /// Conformal weight if homogeneous (zero polynomial reports weight 0).
    pub fn weight(&self) -> Option<Q> {
        let mut it = self.terms.keys();
        let first = match it.next() {
            None => return Some(Q::zero()),
            Some(m) => m.weight(&self.table),
        };
        for m in it {
            if m.weight(&self.table) != first {
                return None;
            }
        }
        Some(first)
    }

    /// Component of the given weight.
    pub fn weight_component(&self, w: &Q) -> DiffPoly {
        let mut out = DiffPoly::zero(&self.table);
        for (m, c) in &self.terms {
            if &m.weight(&self.table) == w {
                out.add_term(m.clone(), c.clone());
            }
        }
        out
    }

    /// The coefficient of the empty monomial.
    pub fn constant_term(&self) -> Q {
        self.terms
            .get(&DiffMonomial::one())
            .cloned()
            .unwrap_or_else(Q::zero)
    }

    /// Total derivative: the even derivation with `u_i^(k) -> u_i^(k+1)` and
    /// central symbols killed.
    pub fn total_derivative(&self) -> DiffPoly {
        let mut out = DiffPoly::zero(&self.table);
        for (m, c) in &self.terms {
            for pos in 0..m.vars.len() {
                let (v, mult) = m.vars[pos];
                let bumped = DiffVar {
                    gen: v.gen,
                    order: v.order + 1,
                };
                // remove one copy of v, insert one copy of bumped
                let mut vars = m.vars.clone();
                if mult == 1 {
                    vars.remove(pos);
                } else {
                    vars[pos].1 = mult - 1;
                }
                // insert bumped maintaining sorted order; bumped never crosses
                // a variable of different parity (same generator, adjacent
                // order), so no Koszul sign arises.
                let mut dead = false;
                match vars.binary_search_by(|(w, _)| w.cmp(&bumped)) {
                    Ok(i) => {
                        if bumped.parity(&self.table).is_odd() {
                            dead = true;
                        } else {
                            vars[i].1 += 1;
                        }
                    }
                    Err(i) => vars.insert(i, (bumped, 1)),
                }
                if dead {
                    continue;
                }
                let nm = DiffMonomial {
                    vars,
                    centrals: m.centrals.clone(),
                };
                out.add_term(nm, c.clone() * Q::from_integer(mult.into()));
            }
        }
        out
    }

    /// Iterated total derivative.
    pub fn total_derivative_n(&self, n: u32) -> DiffPoly {
        let mut p = self.clone();
        for _ in 0..n {
            p = p.total_derivative();
        }
        p
    }

    /// Left partial derivative with respect to one differential variable,
    /// with Koszul signs for odd variables.
    pub fn partial(&self, v: DiffVar) -> DiffPoly {
        let odd = v.parity(&self.table).is_odd();
        let mut out = DiffPoly::zero(&self.table);
        for (m, c) in &self.terms {
            let pos = match m.vars.binary_search_by(|(w, _)| w.cmp(&v)) {
                Ok(p) => p,
                Err(_) => continue,
            };
            let mult = m.vars[pos].1;
            let mut vars = m.vars.clone();
            if mult == 1 {
                vars.remove(pos);
            } else {
                vars[pos].1 = mult - 1;
            }
            let mut coeff = c.clone() * Q::from_integer(mult.into());
            if odd {
                // sign: move d/dv past the odd factors preceding v
                let preceding_odd = m.vars[..pos]
                    .iter()
                    .filter(|(w, _)| w.parity(&self.table).is_odd())
                    .count();
                if preceding_odd % 2 == 1 {
                    coeff = -coeff;
                }
            }
            out.add_term(
                DiffMonomial {
                    vars,
                    centrals: m.centrals.clone(),
                },
                coeff,
            );
        }
        out
    }

    /// Largest derivative order of the given generator occurring in `self`.
    pub fn max_order(&self, gen: usize) -> Option<u32> {
        self.terms
            .keys()
            .flat_map(|m| m.vars.iter())
            .filter(|(v, _)| v.gen as usize == gen)
            .map(|(v, _)| v.order)
            .max()
    }

    /// Substitute every variable of every generator by `t * variable`
    /// (a one-parameter dilation), exactly: each degree-d monomial picks up
    /// the rational factor `t^d`.
    pub fn dilate(&self, t: &Q) -> DiffPoly {
        let mut out = DiffPoly::zero(&self.table);
        for (m, c) in &self.terms {
            let d = m.degree();
            let mut f = Q::one();
            for _ in 0..d {
                f *= t.clone();
            }
            out.add_term(m.clone(), c.clone() * f);
        }
        out
    }

    /// Specialize one central symbol to a rational value.
    pub fn specialize_central(&self, idx: usize, value: &Q, target: &Arc<GenTable>) -> DiffPoly {
        let mut out = DiffPoly::zero(target);
        for (m, c) in &self.terms {
            let mut coeff = c.clone();
            let mut centrals = Vec::new();
            for (ci, p) in &m.centrals {
                if *ci as usize == idx {
                    for _ in 0..*p {
                        coeff *= value.clone();
                    }
                } else {
                    // the target table may index centrals differently
                    let name = &self.table.centrals[*ci as usize].name;
                    let ni = target
                        .central_index(name)
                        .expect("central present in target table");
                    centrals.push((ni as u32, *p));
                }
            }
            centrals.sort_unstable();
            out.add_term(
                DiffMonomial {
                    vars: m.vars.clone(),
                    centrals,
                },
                coeff,
            );
        }
        out
    }

    /// Re-express this polynomial over another table with the same generator
    /// names (used when moving between presentations of one algebra).
    pub fn retable(&self, target: &Arc<GenTable>) -> Result<DiffPoly> {
        let mut out = DiffPoly::zero(target);
        for (m, c) in &self.terms {
            let mut vars = Vec::with_capacity(m.vars.len());
            for (v, mult) in &m.vars {
                let name = &self.table.gens[v.gen as usize].name;
                let ni = target
                    .gen_index(name)
                    .ok_or_else(|| Error::UnknownIdentifier(name.clone()))?;
                vars.push((DiffVar::new(ni, v.order), *mult));
            }
            vars.sort_unstable();
            let mut centrals = Vec::with_capacity(m.centrals.len());
            for (ci, p) in &m.centrals {
                let name = &self.table.centrals[*ci as usize].name;
                let ni = target
                    .central_index(name)
                    .ok_or_else(|| Error::UnknownIdentifier(name.clone()))?;
                centrals.push((ni as u32, *p));
            }
            centrals.sort_unstable();
            out.add_term(DiffMonomial { vars, centrals }, c.clone());
        }
        Ok(out)
    }

    /// Formal derivative with respect to a symbolic central parameter.
    pub fn d_central(&self, idx: usize) -> DiffPoly {
        let mut out = DiffPoly::zero(&self.table);
        for (m, c) in &self.terms {
            for (pos, (ci, p)) in m.centrals.iter().enumerate() {
                if *ci as usize != idx {
                    continue;
                }
                let mut centrals = m.centrals.clone();
                if *p == 1 {
                    centrals.remove(pos);
                } else {
                    centrals[pos].1 = p - 1;
                }
                out.add_term(
                    DiffMonomial {
                        vars: m.vars.clone(),
                        centrals,
                    },
                    c.clone() * Q::from_integer((*p).into()),
                );
            }
        }
        out
    }
}

fn format_var(table: &GenTable, v: &DiffVar) -> String {
    let name = &table.gens[v.gen as usize].name;
    match v.order {
        0 => name.clone(),
        1 => format!("{name}'"),
        k => format!("D^{k}({name})"),
    }
}

pub(crate) fn format_monomial(table: &GenTable, m: &DiffMonomial) -> String {
    let mut parts: Vec<String> = Vec::new();
    for (c, p) in &m.centrals {
        let name = &table.centrals[*c as usize].name;
        if *p == 1 {
            parts.push(name.clone());
        } else {
            parts.push(format!("{name}^{p}"));
        }
    }
    for (v, mult) in &m.vars {
        let base = format_var(table, v);
        if *mult == 1 {
            parts.push(base);
        } else if v.order >= 2 {
            // D^k(u) needs parens before ^ to re-parse
            parts.push(format!("({base})^{mult}"));
        } else {
            parts.push(format!("{base}^{mult}"));
        }
    }
    parts.join("*")
}

impl fmt::Display for DiffPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (m, c) in &self.terms {
            let neg = c.is_negative();
            if first {
                if neg {
                    write!(f, "-")?;
                }
                first = false;
            } else if neg {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            let mono = format_monomial(&self.table, m);
            let one = c.abs().is_one();
            if mono.is_empty() {
                write!(f, "{}", format_q_abs(c))?;
            } else if one {
                write!(f, "{mono}")?;
            } else {
                write!(f, "{}*{mono}", format_q_abs(c))?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::q;
    use crate::table::{Central, Generator};

    fn boson_table() -> Arc<GenTable> {
        GenTable::even(&[("u", q(1))])
    }

    fn fermion_table() -> Arc<GenTable> {
        GenTable::new(
            vec![Generator {
                name: "psi".into(),
                parity: Parity::Odd,
                weight: crate::scalar::qr(1, 2),
            }],
            vec![],
        )
        .unwrap()
    }

    #[test]
    fn product_basics() {
        let t = boson_table();
        let u = DiffPoly::var(&t, 0, 0);
        let up = DiffPoly::var(&t, 0, 1);
        // u * u' -> u u'
        let p = u.mul(&up).unwrap();
        assert_eq!(p.to_string(), "u*u'");
        // (u + u')(u - u') = u^2 - (u')^2
        let a = u.add(&up).unwrap();
        let b = u.sub(&up).unwrap();
        let prod = a.mul(&b).unwrap();
        let expect = u
            .mul(&u)
            .unwrap()
            .sub(&up.mul(&up).unwrap())
            .unwrap();
        assert_eq!(prod, expect);
    }

    #[test]
    fn odd_square_vanishes() {
        let t = fermion_table();
        let psi = DiffPoly::var(&t, 0, 0);
        assert!(psi.mul(&psi).unwrap().is_zero());
        // psi * psi' = - psi' * psi
        let psip = DiffPoly::var(&t, 0, 1);
        let ab = psi.mul(&psip).unwrap();
        let ba = psip.mul(&psi).unwrap();
        assert_eq!(ab, ba.neg());
    }

    #[test]
    fn derivative_examples() {
        let t = boson_table();
        let u = DiffPoly::var(&t, 0, 0);
        let u2 = u.mul(&u).unwrap();
        // D(u^2) = 2 u u'
        let d = u2.total_derivative();
        let up = DiffPoly::var(&t, 0, 1);
        assert_eq!(d, u.mul(&up).unwrap().scale(&q(2)));
        // D(1) = 0
        assert!(DiffPoly::one(&t).total_derivative().is_zero());
        // D(u u') = (u')^2 + u u''
        let uu1 = u.mul(&up).unwrap();
        let upp = DiffPoly::var(&t, 0, 2);
        let expect = up
            .mul(&up)
            .unwrap()
            .add(&u.mul(&upp).unwrap())
            .unwrap();
        assert_eq!(uu1.total_derivative(), expect);
    }

    #[test]
    fn partial_derivative_signs() {
        let t = fermion_table();
        let psi = DiffPoly::var(&t, 0, 0);
        let psip = DiffPoly::var(&t, 0, 1);
        let m = psi.mul(&psip).unwrap(); // psi psi'
        // d/d(psi) (psi psi') = psi'
        assert_eq!(m.partial(DiffVar::new(0, 0)), psip);
        // d/d(psi') (psi psi') = -psi   (moves past the odd factor psi)
        assert_eq!(m.partial(DiffVar::new(0, 1)), psi.neg());
    }

    #[test]
    fn table_mismatch() {
        let t1 = boson_table();
        let t2 = GenTable::even(&[("v", q(1))]);
        let a = DiffPoly::var(&t1, 0, 0);
        let b = DiffPoly::var(&t2, 0, 0);
        assert_eq!(a.mul(&b), Err(Error::TableMismatch));
    }

    #[test]
    fn central_symbols() {
        let t = GenTable::new(
            vec![Generator {
                name: "u".into(),
                parity: Parity::Even,
                weight: q(1),
            }],
            vec![Central {
                name: "c".into(),
                value: None,
            }],
        )
        .unwrap();
        let c = DiffPoly::central(&t, 0);
        assert!(c.total_derivative().is_zero());
        let u = DiffPoly::var(&t, 0, 0);
        let cu = c.mul(&u).unwrap();
        assert_eq!(cu.to_string(), "c*u");
        assert_eq!(cu.d_central(0), u);
    }
}
