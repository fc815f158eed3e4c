//! Polynomials in formal lambda variables with differential-polynomial
//! coefficients, and the quotient normal form that eliminates the last
//! variable through `l_n := -D - l_1 - ... - l_{n-1}` with the total
//! derivative acting on coefficients.

use crate::diffpoly::DiffPoly;
use crate::error::Result;
use crate::scalar::{binomial, Q};
use crate::table::GenTable;
use num_traits::Zero;
use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

/// Finite map from exponent vectors over the free lambda variables to
/// coefficients. `nvars` fixes the exponent-vector length; a value with
/// `nvars = 0` is just a differential polynomial.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LambdaPoly {
    pub nvars: usize,
    pub table: Arc<GenTable>,
    pub terms: BTreeMap<Vec<u16>, DiffPoly>,
}

impl LambdaPoly {
    pub fn zero(table: &Arc<GenTable>, nvars: usize) -> LambdaPoly {
        LambdaPoly {
            nvars,
            table: table.clone(),
            terms: BTreeMap::new(),
        }
    }

    pub fn from_poly(p: DiffPoly, nvars: usize) -> LambdaPoly {
        let table = p.table.clone();
        let mut lp = LambdaPoly::zero(&table, nvars);
        lp.add_term(vec![0; nvars], p);
        lp
    }

    /// The monomial `l_i` (0-based index).
    pub fn lambda(table: &Arc<GenTable>, nvars: usize, i: usize) -> LambdaPoly {
        let mut e = vec![0u16; nvars];
        e[i] = 1;
        let mut lp = LambdaPoly::zero(table, nvars);
        lp.add_term(e, DiffPoly::one(table));
        lp
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add_term(&mut self, exps: Vec<u16>, c: DiffPoly) {
        debug_assert_eq!(exps.len(), self.nvars);
        if c.is_zero() {
            return;
        }
        match self.terms.entry(exps) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                let s = e.get().add(&c).expect("same table");
                if s.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = s;
                }
            }
        }
    }

    pub fn add(&self, other: &LambdaPoly) -> Result<LambdaPoly> {
        assert_eq!(self.nvars, other.nvars);
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(e.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn sub(&self, other: &LambdaPoly) -> Result<LambdaPoly> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> LambdaPoly {
        let mut out = self.clone();
        for c in out.terms.values_mut() {
            *c = c.neg();
        }
        out
    }

    pub fn scale(&self, k: &Q) -> LambdaPoly {
        let mut out = LambdaPoly::zero(&self.table, self.nvars);
        for (e, c) in &self.terms {
            out.add_term(e.clone(), c.scale(k));
        }
        out
    }

    /// Multiply every coefficient on the left by a differential polynomial.
    pub fn mul_poly_left(&self, p: &DiffPoly) -> Result<LambdaPoly> {
        let mut out = LambdaPoly::zero(&self.table, self.nvars);
        for (e, c) in &self.terms {
            out.add_term(e.clone(), p.mul(c)?);
        }
        Ok(out)
    }

    pub fn mul_poly_right(&self, p: &DiffPoly) -> Result<LambdaPoly> {
        let mut out = LambdaPoly::zero(&self.table, self.nvars);
        for (e, c) in &self.terms {
            out.add_term(e.clone(), c.mul(p)?);
        }
        Ok(out)
    }

    /// Product of two lambda polynomials (coefficients multiply super-
    /// commutatively, lambda variables are even scalars).
    pub fn mul(&self, other: &LambdaPoly) -> Result<LambdaPoly> {
        assert_eq!(self.nvars, other.nvars);
        let mut out = LambdaPoly::zero(&self.table, self.nvars);
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                let e: Vec<u16> = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                out.add_term(e, ca.mul(cb)?);
            }
        }
        Ok(out)
    }

    pub fn mul_lambda_pow(&self, var: usize, k: u16) -> LambdaPoly {
        let mut out = LambdaPoly::zero(&self.table, self.nvars);
        for (e, c) in &self.terms {
            let mut e = e.clone();
            e[var] += k;
            out.add_term(e, c.clone());
        }
        out
    }

    /// Apply the total derivative to every coefficient.
    pub fn map_coeffs_total_derivative(&self) -> LambdaPoly {
        let mut out = LambdaPoly::zero(&self.table, self.nvars);
        for (e, c) in &self.terms {
            out.add_term(e.clone(), c.total_derivative());
        }
        out
    }

    /// d/d(lambda_i)
    pub fn d_lambda(&self, var: usize) -> LambdaPoly {
        let mut out = LambdaPoly::zero(&self.table, self.nvars);
        for (e, c) in &self.terms {
            let k = e[var];
            if k == 0 {
                continue;
            }
            let mut e = e.clone();
            e[var] = k - 1;
            out.add_term(e, c.scale(&Q::from_integer(k.into())));
        }
        out
    }

    /// Definite integral of the variable `var` from 0 to itself:
    /// `l^k  ->  l^{k+1} / (k+1)`.
    pub fn integrate_lambda(&self, var: usize) -> LambdaPoly {
        let mut out = LambdaPoly::zero(&self.table, self.nvars);
        for (e, c) in &self.terms {
            let k = e[var];
            let mut e = e.clone();
            e[var] = k + 1;
            out.add_term(e, c.scale(&Q::new(1.into(), (k as i64 + 1).into())));
        }
        out
    }

    /// Substitute `l_var := -D - sum of listed variables`, with the total
    /// derivative acting on the coefficient to the right. The result no
    /// longer involves `l_var` (its exponent is always zero) but keeps the
    /// same variable count; use `drop_var` to remove it.
    pub fn subst_neg_del(&self, var: usize, others: &[usize]) -> LambdaPoly {
        let mut out = LambdaPoly::zero(&self.table, self.nvars);
        for (e, c) in &self.terms {
            let k = e[var] as u32;
            let mut base = e.clone();
            base[var] = 0;
            // (-D - sum)^k c: expand iteratively
            let mut layer: Vec<(Vec<u16>, DiffPoly)> = vec![(base, c.clone())];
            for _ in 0..k {
                let mut next: BTreeMap<Vec<u16>, DiffPoly> = BTreeMap::new();
                for (exps, coeff) in layer {
                    // -D part
                    let dc = coeff.total_derivative().neg();
                    merge(&mut next, exps.clone(), dc);
                    // -l_j parts
                    for &j in others {
                        let mut ej = exps.clone();
                        ej[j] += 1;
                        merge(&mut next, ej, coeff.neg());
                    }
                }
                layer = next.into_iter().filter(|(_, c)| !c.is_zero()).collect();
            }
            for (exps, coeff) in layer {
                out.add_term(exps, coeff);
            }
        }
        out
    }

    /// Remove a variable whose exponent is identically zero.
    pub fn drop_var(&self, var: usize) -> LambdaPoly {
        let mut out = LambdaPoly::zero(&self.table, self.nvars - 1);
        for (e, c) in &self.terms {
            debug_assert_eq!(e[var], 0);
            let mut ne: Vec<u16> = Vec::with_capacity(self.nvars - 1);
            ne.extend_from_slice(&e[..var]);
            ne.extend_from_slice(&e[var + 1..]);
            out.add_term(ne, c.clone());
        }
        out
    }

    /// Insert a fresh variable (exponent 0) at the given position.
    pub fn insert_var(&self, pos: usize) -> LambdaPoly {
        let mut out = LambdaPoly::zero(&self.table, self.nvars + 1);
        for (e, c) in &self.terms {
            let mut ne: Vec<u16> = Vec::with_capacity(self.nvars + 1);
            ne.extend_from_slice(&e[..pos]);
            ne.push(0);
            ne.extend_from_slice(&e[pos..]);
            out.add_term(ne, c.clone());
        }
        out
    }

    /// Rename variables: variable `i` becomes `perm[i]` (a bijection).
    pub fn permute_vars(&self, perm: &[usize]) -> LambdaPoly {
        debug_assert_eq!(perm.len(), self.nvars);
        let mut out = LambdaPoly::zero(&self.table, self.nvars);
        for (e, c) in &self.terms {
            let mut ne = vec![0u16; self.nvars];
            for (i, &x) in e.iter().enumerate() {
                ne[perm[i]] = x;
            }
            out.add_term(ne, c.clone());
        }
        out
    }

    /// Substitute `l_var := sum of listed variables` (no derivative part).
    pub fn subst_sum(&self, var: usize, others: &[usize]) -> LambdaPoly {
        let mut out = LambdaPoly::zero(&self.table, self.nvars);
        for (e, c) in &self.terms {
            let k = e[var] as u32;
            let mut base = e.clone();
            base[var] = 0;
            let mut layer: Vec<(Vec<u16>, Q)> = vec![(base, Q::from_integer(1.into()))];
            for _ in 0..k {
                let mut next: BTreeMap<Vec<u16>, Q> = BTreeMap::new();
                for (exps, coeff) in layer {
                    for &j in others {
                        let mut ej = exps.clone();
                        ej[j] += 1;
                        *next.entry(ej).or_insert_with(Q::zero) += coeff.clone();
                    }
                }
                layer = next.into_iter().collect();
            }
            for (exps, coeff) in layer {
                out.add_term(exps, c.scale(&coeff));
            }
        }
        out
    }

    /// Evaluate a one-variable lambda polynomial at `l := -D`, applying the
    /// total derivative to the coefficient: `sum_k (-D)^k c_k`.
    pub fn eval_at_neg_del(&self) -> DiffPoly {
        assert_eq!(self.nvars, 1);
        let mut out = DiffPoly::zero(&self.table);
        for (e, c) in &self.terms {
            let k = e[0] as u32;
            let mut d = c.clone();
            for _ in 0..k {
                d = d.total_derivative().neg();
            }
            out = out.add(&d).expect("same table");
        }
        out
    }

    /// Coefficient of `l^k` for a one-variable polynomial.
    pub fn coeff1(&self, k: u16) -> DiffPoly {
        assert_eq!(self.nvars, 1);
        self.terms
            .get(&vec![k])
            .cloned()
            .unwrap_or_else(|| DiffPoly::zero(&self.table))
    }

    /// Highest exponent of variable `var`.
    pub fn degree_in(&self, var: usize) -> u16 {
        self.terms.keys().map(|e| e[var]).max().unwrap_or(0)
    }

    /// Total lambda degree of a term map (max over terms).
    pub fn total_degree(&self) -> u16 {
        self.terms
            .keys()
            .map(|e| e.iter().sum::<u16>())
            .max()
            .unwrap_or(0)
    }

    /// All coefficients in one vector, for inspection.
    pub fn coeffs(&self) -> impl Iterator<Item = (&Vec<u16>, &DiffPoly)> {
        self.terms.iter()
    }
}

fn merge(map: &mut BTreeMap<Vec<u16>, DiffPoly>, e: Vec<u16>, c: DiffPoly) {
    match map.entry(e) {
        std::collections::btree_map::Entry::Vacant(en) => {
            en.insert(c);
        }
        std::collections::btree_map::Entry::Occupied(mut en) => {
            let s = en.get().add(&c).expect("same table");
            *en.get_mut() = s;
        }
    }
}

/// Skewsymmetry substitution on a one-variable lambda polynomial:
/// `sum_k l^k c_k  ->  sum_k (-l - D)^k c_k`, the total derivative acting on
/// the coefficient. An involution.
pub fn substitute_lambda(v: &LambdaPoly) -> LambdaPoly {
    assert_eq!(v.nvars, 1, "skew substitution acts on unary values");
    let mut out = LambdaPoly::zero(&v.table, 1);
    for (e, c) in &v.terms {
        let k = e[0] as u32;
        // (-l - D)^k c = (-1)^k sum_j C(k,j) l^{k-j} D^j c
        for j in 0..=k {
            let mut d = c.clone();
            for _ in 0..j {
                d = d.total_derivative();
            }
            let mut coef = binomial(k, j);
            if k % 2 == 1 {
                coef = -coef;
            }
            out.add_term(vec![(k - j) as u16], d.scale(&coef));
        }
    }
    out
}

impl fmt::Display for LambdaPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (e, c) in &self.terms {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            let mut lam = String::new();
            for (i, k) in e.iter().enumerate() {
                if *k == 0 {
                    continue;
                }
                if !lam.is_empty() {
                    lam.push('*');
                }
                if *k == 1 {
                    lam.push_str(&format!("l{}", i + 1));
                } else {
                    lam.push_str(&format!("l{}^{}", i + 1, k));
                }
            }
            if lam.is_empty() {
                write!(f, "({c})")?;
            } else {
                write!(f, "({c})*{lam}")?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::q;

    fn table() -> Arc<GenTable> {
        GenTable::even(&[("u", q(1))])
    }

    #[test]
    fn substitute_examples() {
        let t = table();
        // l * 1 -> -l * 1 (since D(1) = 0)
        let l = LambdaPoly::lambda(&t, 1, 0);
        assert_eq!(substitute_lambda(&l), l.neg());
        // l * u -> -l u - u'
        let u = DiffPoly::var(&t, 0, 0);
        let lu = l.mul_poly_left(&u).unwrap();
        let s = substitute_lambda(&lu);
        let up = DiffPoly::var(&t, 0, 1);
        let mut expect = LambdaPoly::zero(&t, 1);
        expect.add_term(vec![1], u.neg());
        expect.add_term(vec![0], up.neg());
        assert_eq!(s, expect);
    }

    #[test]
    fn substitute_involution() {
        let t = table();
        let u = DiffPoly::var(&t, 0, 0);
        let up = DiffPoly::var(&t, 0, 1);
        // (D + 2l)u-ish value: 2l*u + u'
        let mut v = LambdaPoly::zero(&t, 1);
        v.add_term(vec![1], u.scale(&q(2)));
        v.add_term(vec![0], up.clone());
        let twice = substitute_lambda(&substitute_lambda(&v));
        assert_eq!(twice, v);
    }

    #[test]
    fn normal_form_idempotent() {
        let t = table();
        let u = DiffPoly::var(&t, 0, 0);
        // two-variable value l1^2 u, eliminate l2 (which does not appear):
        let mut v = LambdaPoly::zero(&t, 2);
        v.add_term(vec![2, 0], u.clone());
        let nf = v.subst_neg_del(1, &[0]);
        assert_eq!(nf, v);
        // eliminate l1 in l1*u: becomes (-D - l2)u = -u' - l2 u
        let mut w = LambdaPoly::zero(&t, 2);
        w.add_term(vec![1, 0], u.clone());
        let nf = w.subst_neg_del(0, &[1]);
        let mut expect = LambdaPoly::zero(&t, 2);
        expect.add_term(vec![0, 0], DiffPoly::var(&t, 0, 1).neg());
        expect.add_term(vec![0, 1], u.neg());
        assert_eq!(nf, expect);
        // idempotent: substituting again changes nothing
        assert_eq!(nf.subst_neg_del(0, &[1]), nf);
    }
}
