//! Variational calculus on differential polynomial superalgebras: Euler
//! operators, the quotient by total derivatives, membership in the image of
//! the total derivative with an explicit witness, and reconstruction of
//! local functionals from their variational derivatives.

use crate::diffpoly::{DiffPoly, DiffVar};
use crate::error::{Error, Result};
use crate::scalar::{binomial, Q};
use crate::table::GenTable;
use num_traits::Zero;
use std::fmt;
use std::sync::Arc;

/// A differential operator `sum_k c_k D^k` with polynomial coefficients,
/// acting on the left: `f -> sum_k c_k D^k(f)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiffOperator {
    pub table: Arc<GenTable>,
    pub coeffs: Vec<DiffPoly>,
}

impl DiffOperator {
    pub fn zero(table: &Arc<GenTable>) -> DiffOperator {
        DiffOperator {
            table: table.clone(),
            coeffs: vec![],
        }
    }

    pub fn from_coeffs(table: &Arc<GenTable>, mut coeffs: Vec<DiffPoly>) -> DiffOperator {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        DiffOperator {
            table: table.clone(),
            coeffs,
        }
    }

    /// The operator `D` itself.
    pub fn del(table: &Arc<GenTable>) -> DiffOperator {
        DiffOperator::from_coeffs(table, vec![DiffPoly::zero(table), DiffPoly::one(table)])
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    pub fn apply(&self, f: &DiffPoly) -> Result<DiffPoly> {
        let mut out = DiffPoly::zero(&self.table);
        let mut d = f.clone();
        for (k, c) in self.coeffs.iter().enumerate() {
            if k > 0 {
                d = d.total_derivative();
            }
            out = out.add(&c.mul(&d)?)?;
        }
        Ok(out)
    }

    pub fn add(&self, other: &DiffOperator) -> Result<DiffOperator> {
        let n = self.coeffs.len().max(other.coeffs.len());
        let mut coeffs = Vec::with_capacity(n);
        for k in 0..n {
            let a = self
                .coeffs
                .get(k)
                .cloned()
                .unwrap_or_else(|| DiffPoly::zero(&self.table));
            let b = other
                .coeffs
                .get(k)
                .cloned()
                .unwrap_or_else(|| DiffPoly::zero(&self.table));
            coeffs.push(a.add(&b)?);
        }
        Ok(DiffOperator::from_coeffs(&self.table, coeffs))
    }

    pub fn sub(&self, other: &DiffOperator) -> Result<DiffOperator> {
        self.add(&DiffOperator::from_coeffs(
            &other.table,
            other.coeffs.iter().map(|c| c.neg()).collect(),
        ))
    }

    /// Formal adjoint: `(sum_k c_k D^k)* = sum_k (-D)^k (c_k .)`, expanded
    /// back to coefficient form by the Leibniz rule.
    pub fn adjoint(&self) -> Result<DiffOperator> {
        let n = self.coeffs.len();
        let mut coeffs = vec![DiffPoly::zero(&self.table); n];
        for (k, c) in self.coeffs.iter().enumerate() {
            // (-1)^k sum_j C(k,j) D^{k-j}(c) D^j
            for j in 0..=k {
                let mut term = c.total_derivative_n((k - j) as u32);
                term = term.scale(&binomial(k as u32, j as u32));
                if k % 2 == 1 {
                    term = term.neg();
                }
                coeffs[j] = coeffs[j].add(&term)?;
            }
        }
        Ok(DiffOperator::from_coeffs(&self.table, coeffs))
    }
}

impl fmt::Display for DiffOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (k, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match k {
                0 => write!(f, "({c})")?,
                1 => write!(f, "({c})*D")?,
                _ => write!(f, "({c})*D^{k}")?,
            }
        }
        Ok(())
    }
}

/// Variational derivative (Euler operator) with respect to one generator:
/// `sum_k (-D)^k (d f / d u^(k))`, with signed partials in the super case.
pub fn variational_derivative(f: &DiffPoly, gen: usize) -> DiffPoly {
    let mut out = DiffPoly::zero(&f.table);
    let max = match f.max_order(gen) {
        Some(m) => m,
        None => return out,
    };
    for k in 0..=max {
        let mut p = f.partial(DiffVar::new(gen, k));
        p = p.total_derivative_n(k);
        if k % 2 == 1 {
            p = p.neg();
        }
        out = out.add(&p).expect("same table");
    }
    out
}

/// All variational derivatives as a vector, one per generator.
pub fn variational_gradient(f: &DiffPoly) -> Vec<DiffPoly> {
    (0..f.table.num_gens())
        .map(|g| variational_derivative(f, g))
        .collect()
}

/// Decide membership in the image of the total derivative. Requires a zero
/// constant term. On success returns the witness `g` with `D(g) = f`
/// exactly, built by iterated integration by parts on the highest variable.
pub fn is_total_derivative(f: &DiffPoly) -> Result<(bool, Option<DiffPoly>)> {
    if !f.constant_term().is_zero() {
        return Err(Error::NotInImage(
            "nonzero constant term cannot be a total derivative".into(),
        ));
    }
    for g in 0..f.table.num_gens() {
        if !variational_derivative(f, g).is_zero() {
            return Ok((false, None));
        }
    }
    let witness = antiderivative(f)?;
    Ok((true, Some(witness)))
}

/// Antiderivative of an element of the image of the total derivative.
/// Assumes all variational derivatives vanish.
fn antiderivative(f: &DiffPoly) -> Result<DiffPoly> {
    let table = f.table.clone();
    let mut f = f.clone();
    let mut g = DiffPoly::zero(&table);
    loop {
        let top = f
            .terms
            .keys()
            .flat_map(|m| m.vars.iter().map(|(v, _)| *v))
            .max();
        let v = match top {
            None => {
                if f.is_zero() {
                    return Ok(g);
                }
                return Err(Error::NotInImage("nonzero constant remainder".into()));
            }
            Some(v) => v,
        };
        if v.order == 0 {
            return Err(Error::NotInImage(
                "only underived variables remain in a nonzero remainder".into(),
            ));
        }
        // f = f1 * v + rest, with v appearing linearly if f is an image
        let mut f1 = DiffPoly::zero(&table);
        for (m, c) in &f.terms {
            if let Ok(pos) = m.vars.binary_search_by(|(w, _)| w.cmp(&v)) {
                let (_, mult) = m.vars[pos];
                if mult > 1 {
                    return Err(Error::NotInImage(format!(
                        "highest variable appears with multiplicity {mult}"
                    )));
                }
                let mut vars = m.vars.clone();
                vars.remove(pos);
                // v is the maximal variable: no factor sits to its right,
                // so deleting it produces no Koszul sign.
                f1.add_term(
                    crate::diffpoly::DiffMonomial {
                        vars,
                        centrals: m.centrals.clone(),
                    },
                    c.clone(),
                );
            }
        }
        let w = DiffVar {
            gen: v.gen,
            order: v.order - 1,
        };
        let w_odd = w.parity(&table).is_odd();
        // integrate f1 with respect to w: a_i w^i -> a_i w^{i+1}/(i+1)
        let mut slice = DiffPoly::zero(&table);
        for (m, c) in &f1.terms {
            let i = m
                .vars
                .binary_search_by(|(x, _)| x.cmp(&w))
                .ok()
                .map(|p| m.vars[p].1)
                .unwrap_or(0);
            if w_odd && i >= 1 {
                return Err(Error::NotInImage(
                    "odd variable obstructs integration by parts".into(),
                ));
            }
            let mono = crate::diffpoly::DiffMonomial::var(w);
            let (prod, sign) = m
                .mul(&mono, &table)
                .ok_or_else(|| Error::NotInImage("odd square during integration".into()))?;
            let mut coeff = c.clone() * Q::new(1.into(), (i as i64 + 1).into());
            if sign < 0 {
                coeff = -coeff;
            }
            slice.add_term(prod, coeff);
        }
        g = g.add(&slice)?;
        f = f.sub(&slice.total_derivative())?;
        // all v-terms cancelled; the maximal variable strictly decreased
        debug_assert!(f
            .terms
            .keys()
            .all(|m| m.vars.binary_search_by(|(x, _)| x.cmp(&v)).is_err()));
    }
}

/// A local functional: an element of the quotient of the polynomial algebra
/// by total derivatives, held as a canonical representative.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Functional {
    pub rep: DiffPoly,
}

fn reducible(m: &crate::diffpoly::DiffMonomial, table: &Arc<GenTable>) -> bool {
    let (v, mult) = match m.vars.last() {
        None => return false,
        Some(x) => *x,
    };
    if v.order == 0 || mult != 1 {
        return false;
    }
    let w = DiffVar {
        gen: v.gen,
        order: v.order - 1,
    };
    if w.parity(table).is_odd() {
        // odd lower variable present blocks the rewrite
        let has_w = m.vars.iter().any(|(x, _)| *x == w);
        !has_w
    } else {
        true
    }
}

impl Functional {
    /// Canonicalize by iterated integration by parts. A monomial
    /// `y w^m v` with `v = u^(k)` its highest variable appearing once,
    /// `k >= 1`, and `w = u^(k-1)` (`y` free of both) rewrites to
    /// `-(D y) w^{m+1} / (m+1)`, whose variables all sit strictly below
    /// `v`. Odd `w` with `m >= 1` blocks the rewrite (the monomial is
    /// already a canonical representative). Irreducible polynomials form a
    /// transversal of the image of the total derivative, so equality of
    /// functionals is normal-form equality.
    pub fn new(p: DiffPoly) -> Functional {
        let table = p.table.clone();
        let mut work = p;
        loop {
            let target = work
                .terms
                .iter()
                .rev()
                .find(|(m, _)| reducible(m, &table))
                .map(|(m, c)| (m.clone(), c.clone()));
            match target {
                None => break,
                Some((m, c)) => {
                    work.add_term(m.clone(), -c.clone());
                    let (v, _) = *m.vars.last().unwrap();
                    let w = DiffVar {
                        gen: v.gen,
                        order: v.order - 1,
                    };
                    let mut y = m.clone();
                    y.vars.pop(); // remove v
                    let m_pow = match y.vars.last() {
                        Some((lw, mult)) if *lw == w => {
                            let k = *mult;
                            y.vars.pop();
                            k
                        }
                        _ => 0,
                    };
                    // y w^m v = D(y w^{m+1})/(m+1) - (D y) w^{m+1}/(m+1)
                    let mut wpow = DiffPoly::one(&table);
                    let wvar = DiffPoly::var(&table, w.gen as usize, w.order);
                    for _ in 0..=m_pow {
                        wpow = wpow.mul(&wvar).expect("same table");
                    }
                    let dy = DiffPoly::monomial(&table, y, c).total_derivative();
                    let repl = dy
                        .mul(&wpow)
                        .expect("same table")
                        .scale(&Q::new((-1).into(), (m_pow as i64 + 1).into()));
                    work = work.add(&repl).expect("same table");
                }
            }
        }
        Functional { rep: work }
    }

    pub fn zero(table: &Arc<GenTable>) -> Functional {
        Functional {
            rep: DiffPoly::zero(table),
        }
    }

    pub fn table(&self) -> &Arc<GenTable> {
        &self.rep.table
    }

    pub fn is_zero(&self) -> bool {
        self.rep.is_zero()
    }

    pub fn add(&self, other: &Functional) -> Result<Functional> {
        Ok(Functional::new(self.rep.add(&other.rep)?))
    }

    pub fn sub(&self, other: &Functional) -> Result<Functional> {
        Ok(Functional::new(self.rep.sub(&other.rep)?))
    }

    pub fn scale(&self, k: &Q) -> Functional {
        Functional {
            rep: self.rep.scale(k),
        }
    }

    /// Variational gradient of the class (representative independent).
    pub fn gradient(&self) -> Vec<DiffPoly> {
        variational_gradient(&self.rep)
    }

    /// Keep only the component of the given conformal weight.
    pub fn weight_component(&self, w: &Q) -> Functional {
        Functional {
            rep: self.rep.weight_component(w),
        }
    }
}

impl fmt::Display for Functional {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "int({})", self.rep)
    }
}

/// Fréchet derivative of a vector of polynomials: the operator matrix with
/// entries `sum_k (d xi_i / d u_j^(k)) D^k`.
pub fn frechet_derivative(xi: &[DiffPoly]) -> Result<Vec<Vec<DiffOperator>>> {
    let table = xi
        .first()
        .map(|p| p.table.clone())
        .ok_or_else(|| Error::Parameter("empty vector".into()))?;
    let n = table.num_gens();
    if xi.len() != n {
        return Err(Error::Parameter(format!(
            "expected one entry per generator ({n}), got {}",
            xi.len()
        )));
    }
    let mut rows = Vec::with_capacity(n);
    for xi_i in xi {
        let mut row = Vec::with_capacity(n);
        for j in 0..n {
            let max = xi_i.max_order(j).map(|m| m + 1).unwrap_or(0) as usize;
            let mut coeffs = Vec::with_capacity(max);
            for k in 0..max {
                coeffs.push(xi_i.partial(DiffVar::new(j, k as u32)));
            }
            row.push(DiffOperator::from_coeffs(&table, coeffs));
        }
        rows.push(row);
    }
    Ok(rows)
}

/// Self-adjointness of the Fréchet derivative: the condition for a vector
/// to be a variational gradient.
pub fn helmholtz_check(xi: &[DiffPoly]) -> Result<bool> {
    let d = frechet_derivative(xi)?;
    let n = d.len();
    for i in 0..n {
        for j in 0..n {
            let adj = d[j][i].adjoint()?;
            if d[i][j] != adj {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Reconstruct a functional from its variational gradient by the
/// one-parameter homotopy `int_0^1 dt sum_i u_i xi_i(t u)`, evaluated with
/// exact rational t-integration.
pub fn homotopy_reconstruct(xi: &[DiffPoly]) -> Result<Functional> {
    if !helmholtz_check(xi)? {
        return Err(Error::NotVariational);
    }
    let table = xi[0].table.clone();
    let mut h = DiffPoly::zero(&table);
    for (i, xi_i) in xi.iter().enumerate() {
        let ui = DiffPoly::var(&table, i, 0);
        for (m, c) in &xi_i.terms {
            let d = m.degree();
            let term = DiffPoly::monomial(&table, m.clone(), c.clone())
                .scale(&Q::new(1.into(), (d as i64 + 1).into()));
            h = h.add(&ui.mul(&term)?)?;
        }
    }
    Ok(Functional::new(h))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse_poly;
    use crate::scalar::q;
    use crate::table::{Central, Generator, Parity};

    fn kdv_table() -> Arc<GenTable> {
        GenTable::new(
            vec![Generator {
                name: "u".into(),
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
    fn euler_operator_examples() {
        let t = kdv_table();
        let f = parse_poly("u^2/2", &t).unwrap();
        assert_eq!(variational_derivative(&f, 0), parse_poly("u", &t).unwrap());
        let f = parse_poly("u^3/2 - (c/24)*u'^2", &t).unwrap();
        let expect = parse_poly("(3/2)*u^2 + (c/12)*u''", &t).unwrap();
        assert_eq!(variational_derivative(&f, 0), expect);
        let f = parse_poly("u*u'", &t).unwrap();
        assert!(variational_derivative(&f, 0).is_zero());
    }

    #[test]
    fn total_derivative_membership() {
        let t = kdv_table();
        let f = parse_poly("u*u'", &t).unwrap();
        let (ok, wit) = is_total_derivative(&f).unwrap();
        assert!(ok);
        let w = wit.unwrap();
        assert_eq!(w.total_derivative(), f);
        assert_eq!(w, parse_poly("u^2/2", &t).unwrap());

        let f = parse_poly("u^2", &t).unwrap();
        assert_eq!(is_total_derivative(&f).unwrap(), (false, None));

        let f = parse_poly("3*u^2*u' + (c/12)*D^4(u)", &t).unwrap();
        let (ok, wit) = is_total_derivative(&f).unwrap();
        assert!(ok);
        let w = wit.unwrap();
        assert_eq!(w.total_derivative(), f);
        assert_eq!(w, parse_poly("u^3 + (c/12)*u'''", &t).unwrap());

        assert!(is_total_derivative(&parse_poly("1 + u*u'", &t).unwrap()).is_err());
    }

    #[test]
    fn helmholtz_examples() {
        let t = kdv_table();
        assert!(helmholtz_check(&[parse_poly("u", &t).unwrap()]).unwrap());
        assert!(helmholtz_check(&[parse_poly("(3/2)*u^2 + (c/12)*u''", &t).unwrap()]).unwrap());
        assert!(!helmholtz_check(&[parse_poly("u*u'", &t).unwrap()]).unwrap());
    }

    #[test]
    fn homotopy_examples() {
        let t = kdv_table();
        let h = homotopy_reconstruct(&[parse_poly("u", &t).unwrap()]).unwrap();
        assert_eq!(h.rep, parse_poly("u^2/2", &t).unwrap());

        let h =
            homotopy_reconstruct(&[parse_poly("(3/2)*u^2 + (c/12)*u''", &t).unwrap()]).unwrap();
        let expect = Functional::new(parse_poly("u^3/2 - (c/24)*u'^2", &t).unwrap());
        assert_eq!(h, expect);

        let h = homotopy_reconstruct(&[parse_poly("1", &t).unwrap()]).unwrap();
        assert_eq!(h.rep, parse_poly("u", &t).unwrap());

        assert_eq!(
            homotopy_reconstruct(&[parse_poly("u*u'", &t).unwrap()]),
            Err(Error::NotVariational)
        );
    }

    #[test]
    fn adjoint_of_frechet() {
        let t = kdv_table();
        let d = frechet_derivative(&[parse_poly("u*u'", &t).unwrap()]).unwrap();
        let adj = d[0][0].adjoint().unwrap();
        let up = parse_poly("u'", &t).unwrap();
        let u = parse_poly("u", &t).unwrap();
        assert_eq!(d[0][0], DiffOperator::from_coeffs(&t, vec![up, u.clone()]));
        assert_eq!(
            adj,
            DiffOperator::from_coeffs(&t, vec![DiffPoly::zero(&t), u.neg()])
        );
    }

    #[test]
    fn functional_normal_form() {
        let t = kdv_table();
        let f = Functional::new(parse_poly("u*u''", &t).unwrap());
        assert_eq!(f.rep, parse_poly("-u'^2", &t).unwrap());
        let f = Functional::new(parse_poly("u^3/2 + (c/24)*u*u''", &t).unwrap());
        assert_eq!(f.rep, parse_poly("u^3/2 - (c/24)*u'^2", &t).unwrap());
        let f = Functional::new(parse_poly("D(u^2*u' + 7*u)", &t).unwrap());
        assert!(f.is_zero());
    }

    #[test]
    fn gradient_kills_total_derivatives_randomized() {
        use rand::{Rng, SeedableRng};
        let t = kdv_table();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let mut p = DiffPoly::zero(&t);
            for _ in 0..rng.gen_range(1..5) {
                let mono = (0..rng.gen_range(1..4)).fold(DiffPoly::one(&t), |acc, _| {
                    let v = DiffPoly::var(&t, 0, rng.gen_range(0..4));
                    acc.mul(&v).unwrap()
                });
                p = p.add(&mono.scale(&q(rng.gen_range(-3..4)))).unwrap();
            }
            let d = p.total_derivative();
            assert!(variational_derivative(&d, 0).is_zero());
            let (ok, wit) = is_total_derivative(&d).unwrap();
            assert!(ok);
            assert_eq!(wit.unwrap().total_derivative(), d);
        }
    }
}
