//! Finite presentations of Lie conformal superalgebras: structure brackets
//! on generators, extension by sesquilinearity, axiom verification, and a
//! catalog of standard examples (free boson/fermion, affine, Virasoro).

use crate::diffpoly::{DiffPoly, DiffVar};
use crate::error::{Error, Result};
use crate::lambda::{substitute_lambda, LambdaPoly};
use crate::scalar::{q, qr, Q};
use crate::table::{Central, GenTable, Generator, Parity};
use num_traits::Zero;
use std::collections::BTreeMap;
use std::sync::Arc;

/// Presentation of a Lie conformal superalgebra: a generator table and the
/// structure brackets `[g_i l g_j]` for `i <= j`, each a one-variable lambda
/// polynomial whose coefficients lie in the span of derived generators and
/// central symbols. The other triangle is generated by skewsymmetry on
/// demand, so an inconsistent skew pair cannot be stored.
#[derive(Debug, Clone)]
pub struct LcaPresentation {
    pub table: Arc<GenTable>,
    brackets: BTreeMap<(usize, usize), LambdaPoly>,
}

/// Outcome of an axiom verification: failures are report entries, not
/// errors.
#[derive(Debug, Clone, Default)]
pub struct CheckReport {
    pub violations: Vec<String>,
}

impl CheckReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn merge(&mut self, other: CheckReport) {
        self.violations.extend(other.violations);
    }
}

fn is_linear_in_gens(p: &DiffPoly) -> bool {
    p.terms.keys().all(|m| {
        let deg: u32 = m.vars.iter().map(|(_, k)| *k).sum();
        let cdeg: u32 = m.centrals.iter().map(|(_, k)| *k).sum();
        (deg == 1 && cdeg == 0) || (deg == 0 && cdeg <= 1)
    })
}

impl LcaPresentation {
    /// Build a presentation from the brackets on pairs `i <= j`.
    pub fn new(
        table: Arc<GenTable>,
        entries: Vec<((usize, usize), LambdaPoly)>,
    ) -> Result<LcaPresentation> {
        let mut brackets = BTreeMap::new();
        for ((i, j), v) in entries {
            if i > j {
                return Err(Error::Parameter(
                    "structure brackets are given on pairs i <= j".into(),
                ));
            }
            if i >= table.num_gens() || j >= table.num_gens() {
                return Err(Error::Parameter("generator index out of range".into()));
            }
            for (_, c) in v.coeffs() {
                if !is_linear_in_gens(c) {
                    return Err(Error::Parameter(format!(
                        "bracket [{} l {}] has a coefficient outside the generator span",
                        table.gens[i].name, table.gens[j].name
                    )));
                }
            }
            let want = table.gens[i].parity.combine(table.gens[j].parity);
            for (_, c) in v.coeffs() {
                if let Some(p) = c.parity() {
                    if !c.is_zero() && p != want {
                        return Err(Error::Parameter(format!(
                            "bracket [{} l {}] does not preserve parity",
                            table.gens[i].name, table.gens[j].name
                        )));
                    }
                }
            }
            brackets.insert((i, j), v);
        }
        Ok(LcaPresentation { table, brackets })
    }

    pub fn num_gens(&self) -> usize {
        self.table.num_gens()
    }

    pub fn gen_parity(&self, i: usize) -> Parity {
        self.table.gens[i].parity
    }

    /// Structure bracket `[g_i l g_j]` for any ordered pair, the lower
    /// triangle generated by skewsymmetry.
    pub fn structure_bracket(&self, i: usize, j: usize) -> LambdaPoly {
        if i <= j {
            self.brackets
                .get(&(i, j))
                .cloned()
                .unwrap_or_else(|| LambdaPoly::zero(&self.table, 1))
        } else {
            let v = self.structure_bracket(j, i);
            let mut s = substitute_lambda(&v).neg();
            if self.gen_parity(i).is_odd() && self.gen_parity(j).is_odd() {
                s = s.neg();
            }
            s
        }
    }

    /// `[D^m g_i l D^n g_j] = (-l)^m (l+D)^n [g_i l g_j]`, exactly.
    pub fn extend_bracket(&self, a: DiffVar, b: DiffVar) -> LambdaPoly {
        let mut v = self.structure_bracket(a.gen as usize, b.gen as usize);
        for _ in 0..b.order {
            v = v
                .mul_lambda_pow(0, 1)
                .add(&v.map_coeffs_total_derivative())
                .expect("same table");
        }
        if !v.is_zero() {
            v = v.mul_lambda_pow(0, a.order as u16);
            if a.order % 2 == 1 {
                v = v.neg();
            }
        }
        v
    }

    /// Bilinear bracket on F-combinations of derived generators and central
    /// symbols (centrals and constants bracket to zero).
    pub fn bracket_span(&self, x: &DiffPoly, y: &DiffPoly) -> Result<LambdaPoly> {
        let mut out = LambdaPoly::zero(&self.table, 1);
        for (mx, cx) in &x.terms {
            if mx.vars.is_empty() {
                continue; // constant or central on the left
            }
            if mx.vars.len() != 1 || mx.vars[0].1 != 1 || !mx.centrals.is_empty() {
                return Err(Error::Parameter(
                    "bracket argument is not in the generator span".into(),
                ));
            }
            let va = mx.vars[0].0;
            for (my, cy) in &y.terms {
                if my.vars.is_empty() {
                    continue;
                }
                if my.vars.len() != 1 || my.vars[0].1 != 1 || !my.centrals.is_empty() {
                    return Err(Error::Parameter(
                        "bracket argument is not in the generator span".into(),
                    ));
                }
                let vb = my.vars[0].0;
                let term = self.extend_bracket(va, vb);
                out = out.add(&term.scale(&(cx.clone() * cy.clone())))?;
            }
        }
        Ok(out)
    }

    /// Verify skewsymmetry on all generator pairs.
    pub fn check_skewsymmetry(&self) -> CheckReport {
        let mut report = CheckReport::default();
        let n = self.num_gens();
        for i in 0..n {
            for j in 0..n {
                let lhs = self.structure_bracket(i, j);
                let mut rhs = substitute_lambda(&self.structure_bracket(j, i)).neg();
                if self.gen_parity(i).is_odd() && self.gen_parity(j).is_odd() {
                    rhs = rhs.neg();
                }
                if lhs != rhs {
                    report.violations.push(format!(
                        "skewsymmetry fails on ({}, {}): left side {} vs skew side {}",
                        self.table.gens[i].name, self.table.gens[j].name, lhs, rhs
                    ));
                }
            }
        }
        report
    }

    /// Left bracket of a generator (lambda at position `var`) with a
    /// two-variable polynomial whose coefficients lie in the generator span.
    fn bracket_gen_poly2(&self, i: usize, var: usize, v: &LambdaPoly) -> Result<LambdaPoly> {
        let gi = DiffPoly::var(&self.table, i, 0);
        let mut out = LambdaPoly::zero(&self.table, 2);
        for (e, c) in v.coeffs() {
            let b = self.bracket_span(&gi, c)?;
            for (be, bc) in b.coeffs() {
                let mut exps = e.clone();
                exps[var] += be[0];
                out.add_term(exps, bc.clone());
            }
        }
        Ok(out)
    }

    /// Verify the Jacobi identity on all generator triples, as a polynomial
    /// identity in two formal variables.
    pub fn check_jacobi(&self) -> CheckReport {
        let mut report = CheckReport::default();
        let n = self.num_gens();
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    match self.jacobi_defect(i, j, k) {
                        Ok(d) if d.is_zero() => {}
                        Ok(d) => report.violations.push(format!(
                            "Jacobi fails on ({}, {}, {}): defect {}",
                            self.table.gens[i].name,
                            self.table.gens[j].name,
                            self.table.gens[k].name,
                            d
                        )),
                        Err(e) => report
                            .violations
                            .push(format!("Jacobi check error on ({i}, {j}, {k}): {e}")),
                    }
                }
            }
        }
        report
    }

    /// `[g_i l [g_j m g_k]] - (-1)^{p_i p_j} [g_j m [g_i l g_k]]
    ///  - [[g_i l g_j]_{l+m} g_k]` in the variables (l, m).
    pub fn jacobi_defect(&self, i: usize, j: usize, k: usize) -> Result<LambdaPoly> {
        let inner_jk = self.structure_bracket(j, k).insert_var(0);
        let t1 = self.bracket_gen_poly2(i, 0, &inner_jk)?;

        let inner_ik = self.structure_bracket(i, k).insert_var(1);
        let mut t2 = self.bracket_gen_poly2(j, 1, &inner_ik)?;
        if self.gen_parity(i).is_odd() && self.gen_parity(j).is_odd() {
            t2 = t2.neg();
        }

        // [[g_i l g_j]_{l+m} g_k]: bracket each coefficient with g_k in a
        // fresh variable, then substitute it by l + m.
        let gk = DiffPoly::var(&self.table, k, 0);
        let ij = self.structure_bracket(i, j);
        let mut t3 = LambdaPoly::zero(&self.table, 2);
        for (e, c) in ij.coeffs() {
            let b = self.bracket_span(c, &gk)?;
            let mut emb = LambdaPoly::zero(&self.table, 3);
            for (be, bc) in b.coeffs() {
                emb.add_term(vec![e[0], 0, be[0]], bc.clone());
            }
            let sub = emb.subst_sum(2, &[0, 1]).drop_var(2);
            t3 = t3.add(&sub)?;
        }

        t1.sub(&t2)?.sub(&t3)
    }

    /// Specialize a central symbol to a scalar, or keep it as a symbolic
    /// scalar (`None`), producing a new presentation.
    pub fn quotient_central(&self, name: &str, value: Option<Q>) -> Result<LcaPresentation> {
        let idx = self
            .table
            .central_index(name)
            .ok_or_else(|| Error::UnknownIdentifier(name.to_string()))?;
        let centrals: Vec<Central> = match &value {
            Some(_) => self
                .table
                .centrals
                .iter()
                .enumerate()
                .filter(|(k, _)| *k != idx)
                .map(|(_, c)| c.clone())
                .collect(),
            None => self.table.centrals.clone(),
        };
        let table = GenTable::new(self.table.gens.clone(), centrals)?;
        let mut entries = Vec::new();
        for ((i, j), v) in &self.brackets {
            let mut nv = LambdaPoly::zero(&table, 1);
            for (e, c) in v.coeffs() {
                let nc = match &value {
                    Some(val) => c.specialize_central(idx, val, &table),
                    None => c.retable(&table)?,
                };
                nv.add_term(e.clone(), nc);
            }
            entries.push(((*i, *j), nv));
        }
        LcaPresentation::new(table, entries)
    }
}

/// Parameters for the catalog presentations.
#[derive(Debug, Clone)]
pub enum CatalogParams {
    None,
    /// Bilinear form on purely even (boson) or purely odd (fermion)
    /// generators.
    Form(Vec<Vec<Q>>),
    /// Super form: generator parities plus the matrix.
    SuperForm {
        parities: Vec<Parity>,
        form: Vec<Vec<Q>>,
    },
    /// Lie algebra data: `comm[i][j] = sum_k c^k_{ij} e_k` and an invariant
    /// symmetric form.
    Lie {
        names: Vec<String>,
        comm: Vec<Vec<Vec<Q>>>,
        form: Vec<Vec<Q>>,
    },
}

/// Catalog of standard Lie conformal superalgebras: `boson`, `fermion`,
/// `affine`, `virasoro`.
pub fn catalog(name: &str, params: CatalogParams) -> Result<LcaPresentation> {
    match name {
        "virasoro" => {
            let table = GenTable::new(
                vec![Generator {
                    name: "L".into(),
                    parity: Parity::Even,
                    weight: q(2),
                }],
                vec![Central {
                    name: "C".into(),
                    value: None,
                }],
            )?;
            // [L l L] = (D + 2 l) L + (1/12) l^3 C
            let mut v = LambdaPoly::zero(&table, 1);
            v.add_term(vec![0], DiffPoly::var(&table, 0, 1));
            v.add_term(vec![1], DiffPoly::var(&table, 0, 0).scale(&q(2)));
            v.add_term(vec![3], DiffPoly::central(&table, 0).scale(&qr(1, 12)));
            LcaPresentation::new(table, vec![((0, 0), v)])
        }
        "boson" => {
            let (parities, form) = match params {
                CatalogParams::Form(f) => (vec![Parity::Even; f.len()], f),
                CatalogParams::SuperForm { parities, form } => (parities, form),
                _ => return Err(Error::Parameter("boson needs a bilinear form".into())),
            };
            let n = form.len();
            for (i, row) in form.iter().enumerate() {
                if row.len() != n {
                    return Err(Error::Parameter("form matrix is not square".into()));
                }
                for (j, x) in row.iter().enumerate() {
                    let flip = if parities[i].is_odd() && parities[j].is_odd() {
                        -form[j][i].clone()
                    } else {
                        form[j][i].clone()
                    };
                    if *x != flip || (parities[i] != parities[j] && !x.is_zero()) {
                        return Err(Error::Parameter("boson form must be supersymmetric".into()));
                    }
                }
            }
            let gens = (0..n)
                .map(|i| Generator {
                    name: if n == 1 { "u".into() } else { format!("u{}", i + 1) },
                    parity: parities[i],
                    weight: q(1),
                })
                .collect();
            let table = GenTable::new(
                gens,
                vec![Central {
                    name: "K".into(),
                    value: None,
                }],
            )?;
            let mut entries = Vec::new();
            for i in 0..n {
                for j in i..n {
                    if form[i][j].is_zero() {
                        continue;
                    }
                    let mut v = LambdaPoly::zero(&table, 1);
                    v.add_term(vec![1], DiffPoly::central(&table, 0).scale(&form[i][j]));
                    entries.push(((i, j), v));
                }
            }
            LcaPresentation::new(table, entries)
        }
        "fermion" => {
            let (parities, form) = match params {
                CatalogParams::Form(f) => (vec![Parity::Odd; f.len()], f),
                CatalogParams::SuperForm { parities, form } => (parities, form),
                _ => return Err(Error::Parameter("fermion needs a bilinear form".into())),
            };
            let n = form.len();
            for (i, row) in form.iter().enumerate() {
                if row.len() != n {
                    return Err(Error::Parameter("form matrix is not square".into()));
                }
                for (j, x) in row.iter().enumerate() {
                    let flip = if parities[i].is_odd() && parities[j].is_odd() {
                        form[j][i].clone()
                    } else {
                        -form[j][i].clone()
                    };
                    if *x != flip || (parities[i] != parities[j] && !x.is_zero()) {
                        return Err(Error::Parameter(
                            "fermion form must be super-skewsymmetric".into(),
                        ));
                    }
                }
            }
            let gens = (0..n)
                .map(|i| Generator {
                    name: if n == 1 {
                        "psi".into()
                    } else {
                        format!("psi{}", i + 1)
                    },
                    parity: parities[i],
                    weight: qr(1, 2),
                })
                .collect();
            let table = GenTable::new(
                gens,
                vec![Central {
                    name: "K".into(),
                    value: None,
                }],
            )?;
            let mut entries = Vec::new();
            for i in 0..n {
                for j in i..n {
                    if form[i][j].is_zero() {
                        continue;
                    }
                    let mut v = LambdaPoly::zero(&table, 1);
                    v.add_term(vec![0], DiffPoly::central(&table, 0).scale(&form[i][j]));
                    entries.push(((i, j), v));
                }
            }
            LcaPresentation::new(table, entries)
        }
        "affine" => {
            let (names, comm, form) = match params {
                CatalogParams::Lie { names, comm, form } => (names, comm, form),
                _ => {
                    return Err(Error::Parameter(
                        "affine needs Lie structure constants and a form".into(),
                    ))
                }
            };
            let n = names.len();
            if comm.len() != n || form.len() != n {
                return Err(Error::Parameter("dimension mismatch".into()));
            }
            for i in 0..n {
                for j in 0..n {
                    if form[i][j] != form[j][i] {
                        return Err(Error::Parameter("affine form must be symmetric".into()));
                    }
                }
            }
            // invariance ([a,b]|c) = (a|[b,c])
            for i in 0..n {
                for j in 0..n {
                    for k in 0..n {
                        let lhs: Q = comm[i][j]
                            .iter()
                            .enumerate()
                            .map(|(m, c)| c.clone() * form[m][k].clone())
                            .fold(Q::zero(), |a, b| a + b);
                        let rhs: Q = comm[j][k]
                            .iter()
                            .enumerate()
                            .map(|(m, c)| c.clone() * form[i][m].clone())
                            .fold(Q::zero(), |a, b| a + b);
                        if lhs != rhs {
                            return Err(Error::Parameter("affine form must be invariant".into()));
                        }
                    }
                }
            }
            let gens = names
                .iter()
                .map(|nm| Generator {
                    name: nm.clone(),
                    parity: Parity::Even,
                    weight: q(1),
                })
                .collect();
            let table = GenTable::new(
                gens,
                vec![Central {
                    name: "K".into(),
                    value: None,
                }],
            )?;
            let mut entries = Vec::new();
            for i in 0..n {
                for j in i..n {
                    let mut v = LambdaPoly::zero(&table, 1);
                    let mut lie = DiffPoly::zero(&table);
                    for (k, ck) in comm[i][j].iter().enumerate() {
                        lie = lie.add(&DiffPoly::var(&table, k, 0).scale(ck))?;
                    }
                    v.add_term(vec![0], lie);
                    v.add_term(vec![1], DiffPoly::central(&table, 0).scale(&form[i][j]));
                    if !v.is_zero() {
                        entries.push(((i, j), v));
                    }
                }
            }
            LcaPresentation::new(table, entries)
        }
        other => Err(Error::Parameter(format!(
            "unknown catalog algebra `{other}`"
        ))),
    }
}

/// Affine presentation for sl2 with basis (e, h, f) and the trace form of
/// the defining representation.
pub fn affine_sl2() -> Result<LcaPresentation> {
    let z = Q::zero;
    // [e,h] = -2e, [e,f] = h, [h,f] = -2f
    let comm = vec![
        vec![
            vec![z(), z(), z()],
            vec![q(-2), z(), z()],
            vec![z(), q(1), z()],
        ],
        vec![
            vec![q(2), z(), z()],
            vec![z(), z(), z()],
            vec![z(), z(), q(-2)],
        ],
        vec![
            vec![z(), q(-1), z()],
            vec![z(), z(), q(2)],
            vec![z(), z(), z()],
        ],
    ];
    // trace form: (e|f) = 1, (h|h) = 2
    let form = vec![
        vec![z(), z(), q(1)],
        vec![z(), q(2), z()],
        vec![q(1), z(), z()],
    ];
    catalog(
        "affine",
        CatalogParams::Lie {
            names: vec!["e".into(), "h".into(), "f".into()],
            comm,
            form,
        },
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn virasoro_axioms() {
        let r = catalog("virasoro", CatalogParams::None).unwrap();
        assert!(r.check_skewsymmetry().passed());
        assert!(r.check_jacobi().passed());
    }

    #[test]
    fn boson_fermion_axioms() {
        let r = catalog("boson", CatalogParams::Form(vec![vec![q(1)]])).unwrap();
        assert!(r.check_skewsymmetry().passed());
        assert!(r.check_jacobi().passed());
        let r = catalog("fermion", CatalogParams::Form(vec![vec![q(1)]])).unwrap();
        assert!(r.check_skewsymmetry().passed());
        assert!(r.check_jacobi().passed());
    }

    #[test]
    fn affine_sl2_axioms() {
        let r = affine_sl2().unwrap();
        assert!(r.check_skewsymmetry().passed());
        assert!(r.check_jacobi().passed());
    }

    #[test]
    fn corrupted_virasoro_fails_skew() {
        let table = GenTable::even(&[("L", q(2))]);
        let mut v = LambdaPoly::zero(&table, 1);
        v.add_term(vec![0], DiffPoly::var(&table, 0, 1));
        v.add_term(vec![1], DiffPoly::var(&table, 0, 0).scale(&q(3)));
        let r = LcaPresentation::new(table, vec![((0, 0), v)]).unwrap();
        let rep = r.check_skewsymmetry();
        assert!(!rep.passed());
        assert!(rep.violations[0].contains("(L, L)"));
    }

    #[test]
    fn corrupted_affine_fails_jacobi() {
        let base = affine_sl2().unwrap();
        let table = base.table.clone();
        let mut entries = Vec::new();
        for i in 0..3 {
            for j in i..3 {
                if !(i == 0 && j == 0) {
                    entries.push(((i, j), base.structure_bracket(i, j)));
                }
            }
        }
        // tamper: a fake pairing (e|e) = 1 is not invariant
        let mut v = base.structure_bracket(0, 0);
        v.add_term(vec![1], DiffPoly::central(&table, 0));
        entries.push(((0, 0), v));
        let r = LcaPresentation::new(table, entries).unwrap();
        assert!(!r.check_jacobi().passed());
    }

    #[test]
    fn extend_bracket_examples() {
        // free boson: [u' l u] = -l^2 K, [u l u'] = l^2 K
        let r = catalog("boson", CatalogParams::Form(vec![vec![q(1)]])).unwrap();
        let t = &r.table;
        let k = DiffPoly::central(t, 0);
        let b = r.extend_bracket(DiffVar::new(0, 1), DiffVar::new(0, 0));
        let mut expect = LambdaPoly::zero(t, 1);
        expect.add_term(vec![2], k.neg());
        assert_eq!(b, expect);
        let b = r.extend_bracket(DiffVar::new(0, 0), DiffVar::new(0, 1));
        assert_eq!(b, expect.neg());

        // Virasoro: [L l L'] = (l+D)((D+2l)L + (1/12)l^3 C)
        let r = catalog("virasoro", CatalogParams::None).unwrap();
        let t = &r.table;
        let b = r.extend_bracket(DiffVar::new(0, 0), DiffVar::new(0, 1));
        let mut expect = LambdaPoly::zero(t, 1);
        expect.add_term(vec![0], DiffPoly::var(t, 0, 2));
        expect.add_term(vec![1], DiffPoly::var(t, 0, 1).scale(&q(3)));
        expect.add_term(vec![2], DiffPoly::var(t, 0, 0).scale(&q(2)));
        expect.add_term(vec![4], DiffPoly::central(t, 0).scale(&qr(1, 12)));
        assert_eq!(b, expect);
    }

    #[test]
    fn sesquilinearity_both_slots() {
        for r in [
            catalog("virasoro", CatalogParams::None).unwrap(),
            catalog("boson", CatalogParams::Form(vec![vec![q(1)]])).unwrap(),
            catalog("fermion", CatalogParams::Form(vec![vec![q(1)]])).unwrap(),
            affine_sl2().unwrap(),
        ] {
            for i in 0..r.num_gens() {
                for j in 0..r.num_gens() {
                    for m in 0..4u32 {
                        let lhs = r.extend_bracket(DiffVar::new(i, m + 1), DiffVar::new(j, 0));
                        let rhs = r
                            .extend_bracket(DiffVar::new(i, m), DiffVar::new(j, 0))
                            .mul_lambda_pow(0, 1)
                            .neg();
                        assert_eq!(lhs, rhs);
                        let lhs = r.extend_bracket(DiffVar::new(i, 0), DiffVar::new(j, m + 1));
                        let v = r.extend_bracket(DiffVar::new(i, 0), DiffVar::new(j, m));
                        let rhs = v
                            .mul_lambda_pow(0, 1)
                            .add(&v.map_coeffs_total_derivative())
                            .unwrap();
                        assert_eq!(lhs, rhs);
                    }
                }
            }
        }
    }

    #[test]
    fn central_quotient_preserves_axioms() {
        let r = catalog("virasoro", CatalogParams::None).unwrap();
        let r0 = r.quotient_central("C", Some(q(0))).unwrap();
        assert!(r0.check_skewsymmetry().passed());
        assert!(r0.check_jacobi().passed());
        let r5 = r.quotient_central("C", Some(q(5))).unwrap();
        assert!(r5.check_jacobi().passed());
    }
}
