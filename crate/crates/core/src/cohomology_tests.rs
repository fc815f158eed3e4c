use super::*;
use crate::lca::{catalog, CatalogParams};
use crate::parse::parse_poly;
use crate::pva::PvaAlgebra;
use crate::scalar::q;

fn vir_trivial() -> Complex {
    // the Virasoro presentation with the central element killed, trivial
    // coefficients
    let r = catalog("virasoro", CatalogParams::None).unwrap();
    Complex::trivial(r.quotient_central("C", Some(q(0))).unwrap())
}

fn vir_adjoint() -> Complex {
    let r = catalog("virasoro", CatalogParams::None).unwrap();
    let pva = PvaAlgebra::quotient(&r, "C", Some(q(0))).unwrap();
    Complex::adjoint(pva).unwrap()
}

fn boson_adjoint() -> Complex {
    let r = catalog("boson", CatalogParams::Form(vec![vec![q(1)]])).unwrap();
    let pva = PvaAlgebra::quotient(&r, "K", Some(q(1))).unwrap();
    Complex::adjoint(pva).unwrap()
}

fn fermion_adjoint() -> Complex {
    let r = catalog("fermion", CatalogParams::Form(vec![vec![q(1)]])).unwrap();
    let pva = PvaAlgebra::quotient(&r, "K", Some(q(1))).unwrap();
    Complex::adjoint(pva).unwrap()
}

/// The alternating cubic two-cocycle over the Virasoro generator.
fn vir_two_cocycle(cx: &Complex) -> Cochain {
    let t = cx.table();
    let mut y = Cochain::new(2, 1, t);
    let mut v = LambdaPoly::zero(t, 1);
    v.add_term(vec![3], DiffPoly::one(t));
    y.set_value(vec![0, 0], v).unwrap();
    y
}

/// The Vandermonde three-cocycle (l1-l2)(l1-l3)(l2-l3) in normal form.
fn vir_three_cocycle(cx: &Complex) -> Cochain {
    let t = cx.table();
    // substitute l3 = -l1-l2 (the derivative acts as zero on constants):
    // (l1-l2)(2 l1 + l2)(l1 + 2 l2)
    let l1 = LambdaPoly::lambda(t, 2, 0);
    let l2 = LambdaPoly::lambda(t, 2, 1);
    let f1 = l1.sub(&l2).unwrap();
    let f2 = l1.scale(&q(2)).add(&l2).unwrap();
    let f3 = l1.add(&l2.scale(&q(2))).unwrap();
    let v = f1.mul(&f2).unwrap().mul(&f3).unwrap();
    let mut y = Cochain::new(3, 0, t);
    y.set_value(vec![0, 0, 0], v).unwrap();
    y
}

#[test]
fn blocks_have_expected_dimensions() {
    let cx = vir_trivial();
    // degree 2, weight 1: the cubic alternating values, one dimension
    let b = block(&cx, 2, &q(1), 1).unwrap();
    assert_eq!(b.dim(), 1);
    // degree 1, weight 0 trivially empty after the normal form
    let b = block(&cx, 1, &q(0), 0).unwrap();
    // a 1-cochain on L with constant value has weight 2
    assert_eq!(b.dim(), 0);
    let b = block(&cx, 1, &q(2), 0).unwrap();
    assert_eq!(b.dim(), 1);
}

#[test]
fn symmetry_constraint_is_enforced() {
    let cx = vir_trivial();
    // degree 2 values on (L, L) must be alternating: even lambda powers die
    for w in [0i64, 2] {
        let b = block(&cx, 2, &q(w), 1).unwrap();
        // weight 0 -> quartic values: l^3 would be degree 3... total grade
        // 4 - w; grade 4: only l1^3 survives among 1, l1, l1^2, l1^3? the
        // alternating condition picks odd powers
        for y in &b.basis {
            let v = y.values.get(&vec![0, 0]).unwrap();
            let swapped = transpose_value(v, 2, 0);
            assert_eq!(swapped, v.neg());
        }
    }
}

#[test]
fn differential_squares_to_zero() {
    // over all catalog complexes, d(d(Y)) = 0 for every block basis vector
    // in a sample of small blocks
    let cases: Vec<(Complex, Vec<(usize, i64)>)> = vec![
        (vir_trivial(), vec![(1, 2), (2, 1), (2, 3)]),
        (vir_adjoint(), vec![(1, 0), (1, 2), (2, 1)]),
        (boson_adjoint(), vec![(1, 0), (1, 1), (2, 1)]),
        (fermion_adjoint(), vec![(1, 0), (2, 1)]),
    ];
    for (cx, shapes) in cases {
        for (deg, w) in shapes {
            for pbar in [0u8, 1] {
                let b = block(&cx, deg, &q(w), pbar).unwrap();
                for y in &b.basis {
                    let dy = differential(y, &cx).unwrap();
                    let ddy = differential(&dy, &cx).unwrap();
                    assert!(
                        ddy.is_zero(),
                        "d^2 != 0 at degree {deg}, weight {w}, parity {pbar}"
                    );
                }
            }
        }
    }
}

#[test]
fn fermion_half_integer_blocks() {
    let cx = fermion_adjoint();
    let b = block(&cx, 1, &crate::scalar::qr(1, 2), 1).unwrap();
    for y in &b.basis {
        let dy = differential(y, &cx).unwrap();
        assert!(differential(&dy, &cx).unwrap().is_zero());
    }
}

#[test]
fn total_derivative_cochain_is_closed() {
    // D(g) = g' defines a closed 1-cochain in the adjoint complex
    for cx in [vir_adjoint(), boson_adjoint(), fermion_adjoint()] {
        let t = cx.table();
        let mut y = Cochain::new(1, 0, t);
        for g in 0..cx.num_gens() {
            y.set_value(vec![g], LambdaPoly::from_poly(DiffPoly::var(t, g, 1), 0))
                .unwrap();
        }
        assert!(is_closed(&y, &cx).unwrap());
    }
}

#[test]
fn virasoro_two_cocycle_closed_not_exact() {
    let cx = vir_trivial();
    let y = vir_two_cocycle(&cx);
    let res = is_exact_in_weight(&y, &cx).unwrap();
    assert!(res.closed);
    assert!(!res.exact);
}

#[test]
fn virasoro_three_cocycle_closed_not_exact() {
    let cx = vir_trivial();
    let y = vir_three_cocycle(&cx);
    assert_eq!(cochain_weight(&y, &cx), Some(q(3)));
    let res = is_exact_in_weight(&y, &cx).unwrap();
    assert!(res.closed);
    assert!(!res.exact);
}

#[test]
fn coboundaries_are_closed_and_exact() {
    let cx = vir_trivial();
    for w in [1i64, 3] {
        for pbar in [0u8, 1] {
            let b = block(&cx, 2, &q(w), pbar).unwrap();
            for z in &b.basis {
                let dz = differential(z, &cx).unwrap();
                if dz.is_zero() {
                    continue;
                }
                let res = is_exact_in_weight(&dz, &cx).unwrap();
                assert!(res.closed && res.exact);
                let wit = res.witness.unwrap();
                let dwit = differential(&wit, &cx).unwrap();
                // the witness maps onto the same coboundary
                let diff = dwit.add(&dz.neg()).unwrap();
                assert!(diff.is_zero());
            }
        }
    }
}

#[test]
fn casimir_bases() {
    // free boson: int 1 and int u
    let cx = boson_adjoint();
    let cas = casimirs(&cx, &q(3)).unwrap();
    assert_eq!(cas.len(), 2);
    let reps: Vec<String> = cas.iter().map(|f| f.rep.to_string()).collect();
    assert!(reps.contains(&"1".to_string()));
    assert!(reps.contains(&"u".to_string()));

    // free fermion: only int 1
    let cx = fermion_adjoint();
    let cas = casimirs(&cx, &q(2)).unwrap();
    assert_eq!(cas.len(), 1);

    // Virasoro (universal over the centerless presentation): only int 1
    let cx = vir_adjoint();
    let cas = casimirs(&cx, &q(4)).unwrap();
    assert_eq!(cas.len(), 1);
}

#[test]
fn derivations_boson_and_fermion() {
    // free boson: one outer derivation, D(u) = 1
    let cx = boson_adjoint();
    let (dim, reps) = derivations_mod_inner(&cx, &q(3)).unwrap();
    assert_eq!(dim, 1);
    let rep = &reps[0];
    let v = rep.values.get(&vec![0]).unwrap();
    assert_eq!(v.total_degree(), 0);
    // the value is a constant
    let c = v.coeff1(0);
    assert!(c.terms.keys().all(|m| m.is_one()));

    // free fermion: none
    let cx = fermion_adjoint();
    let (dim, _) = derivations_mod_inner(&cx, &q(3)).unwrap();
    assert_eq!(dim, 0);
}

#[test]
fn zero_bracket_collapse() {
    // boson carrier with the bracket forced to zero: the differential
    // vanishes identically, so every block is its own cohomology
    let table = crate::table::GenTable::even(&[("u", q(1))]);
    let lca = crate::lca::LcaPresentation::new(table, vec![]).unwrap();
    let cx = Complex::adjoint(PvaAlgebra::universal(lca)).unwrap();
    for deg in 1..=3usize {
        for w in -2..=3i64 {
            for pbar in [0u8, 1] {
                let b = block(&cx, deg, &q(w), pbar).unwrap();
                for y in &b.basis {
                    assert!(differential(y, &cx).unwrap().is_zero());
                }
            }
            let bc = block_cohomology(&cx, deg, &q(w)).unwrap();
            assert_eq!(bc.dim_h(), bc.dim_space);
        }
    }
}

#[test]
fn leibniz_evaluation() {
    use rand::SeedableRng;
    let cx = boson_adjoint();
    let t = cx.table();
    // a derivation-shaped 1-cochain: D(u) = u^2
    let mut y = Cochain::new(1, 0, t);
    y.set_value(vec![0], LambdaPoly::from_poly(parse_poly("u^2", t).unwrap(), 0))
        .unwrap();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
    // the Leibniz extension passes
    let ok = check_leibniz(
        |args| pv_eval(&y, &cx, args),
        &cx,
        1,
        12,
        &mut rng,
    )
    .unwrap();
    assert!(ok);
    // an arbitrary extension that kills products fails
    let bad = |args: &[DiffPoly]| -> crate::error::Result<LambdaPoly> {
        // evaluates like y on plain generators, zero on anything composite
        let m = &args[0];
        if m.terms.keys().all(|mm| mm.degree() <= 1) {
            y.eval_args(&cx, args)
        } else {
            Ok(LambdaPoly::zero(&y.table, 0))
        }
    };
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
    assert!(!check_leibniz(bad, &cx, 1, 12, &mut rng).unwrap());
    // unit arguments vanish
    let one = DiffPoly::one(t);
    assert!(pv_eval(&y, &cx, &[one]).unwrap().is_zero());
}

#[test]
fn transfer_round_trip() {
    use rand::SeedableRng;
    let cx = boson_adjoint();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
    // random 2-cochains from a block: extend by Leibniz, restrict back
    let b = block(&cx, 2, &q(1), 0).unwrap();
    let b2 = block(&cx, 2, &q(0), 1).unwrap();
    for y in b.basis.iter().chain(b2.basis.iter()).take(6) {
        for tuple in sorted_tuples(cx.num_gens(), 2) {
            let args: Vec<DiffPoly> = tuple
                .iter()
                .map(|&g| DiffPoly::var(cx.table(), g, 0))
                .collect();
            let direct = y.eval_args(&cx, &args).unwrap();
            let via_leibniz = pv_eval(y, &cx, &args).unwrap();
            assert_eq!(direct, via_leibniz);
        }
        // and the Leibniz extension is consistent
        let ok = check_leibniz(|args| pv_eval(y, &cx, args), &cx, 2, 8, &mut rng).unwrap();
        assert!(ok);
    }
}

#[test]
fn central_extension_one_cochain() {
    // over the centrally extended Virasoro presentation with trivial
    // coefficients, the 1-cochain with value 1 on the central symbol has
    // coboundary proportional to the cubic cocycle
    let r = catalog("virasoro", CatalogParams::None).unwrap();
    let cx = Complex::trivial(r);
    let t = cx.table();
    let mut beta = Cochain::new(1, 0, t);
    beta.central_values.insert(0, DiffPoly::one(t));
    let dbeta = differential(&beta, &cx).unwrap();
    let v = dbeta.values.get(&vec![0, 0]).cloned().unwrap();
    // expected: +/- (1/12) l1^3
    let mut plus = LambdaPoly::zero(t, 1);
    plus.add_term(vec![3], DiffPoly::one(t).scale(&crate::scalar::qr(1, 12)));
    assert!(
        v == plus || v == plus.neg(),
        "unexpected coboundary value {v}"
    );
    // record the realized sign for downstream use: with these conventions
    // the image of the extension cocycle equals d(-beta) or d(beta)
    let sign_positive = v == plus;
    // the two-cocycle of the extension is itself closed and non-exact over
    // the quotient presentation
    let cxq = vir_trivial();
    let alpha = vir_two_cocycle(&cxq);
    let res = is_exact_in_weight(&alpha, &cxq).unwrap();
    assert!(res.closed && !res.exact);
    // over the extended presentation alpha becomes exact: it is d(beta) up
    // to the recorded sign and normalization
    let mut alpha_ext = vir_two_cocycle(&cx);
    alpha_ext = alpha_ext.scale(&crate::scalar::qr(1, 12));
    let diff = if sign_positive {
        dbeta.add(&alpha_ext.neg()).unwrap()
    } else {
        dbeta.add(&alpha_ext).unwrap()
    };
    assert!(diff.is_zero());
}

#[test]
fn classical_cochain_embedding() {
    let cx = boson_adjoint();
    let b = block(&cx, 2, &q(1), 0).unwrap();
    for y in b.basis.iter().take(3) {
        let cl = ClCochain::from_cochain(y);
        assert_eq!(cl.edge_grades(), vec![0]);
        assert!(cl.check_component_sesquilinearity());
    }
}

#[test]
fn boson_low_degree_dimensions() {
    // H^0, H^1, H^2 of the rank-one free boson within small weights:
    // expected totals 2, 1, 0
    let cx = boson_adjoint();
    // H^0 within cutoff 3
    assert_eq!(casimirs(&cx, &q(3)).unwrap().len(), 2);
    // H^1 within cutoff 3
    assert_eq!(derivations_mod_inner(&cx, &q(3)).unwrap().0, 1);
    // H^2: every closed two-cochain in the scanned blocks is exact
    let mut h2 = 0usize;
    for w in weight_grid(&cx, 2, &q(4)) {
        let bc = block_cohomology(&cx, 2, &w).unwrap();
        h2 += bc.dim_h();
    }
    assert_eq!(h2, 0);
}
