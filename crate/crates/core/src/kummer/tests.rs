use alloc::vec;
use alloc::vec::Vec;

use proptest::prelude::*;

use super::*;
use crate::cyclo::{Cyclo, CycloElem};
use crate::ecq::CurveOverL;

fn fe(x: CycloElem) -> FactoredElem {
    FactoredElem::from_base(x).unwrap()
}

fn prime_above(n: u32, p: u64) -> CycloElem {
    Cyclo::new(n).unwrap().solve_norm_equation(p, 4).unwrap().unwrap()
}

fn e3() -> CurveOverL {
    let k = Cyclo::new(3).unwrap();
    let a = [k.zero(), k.zero(), k.one(), k.zero(), k.zero()];
    let s = Point::Aff(k.zero(), k.zero());
    let t = Point::Aff(k.from_int(-1), k.zeta_pow(2));
    CurveOverL::new(a, Some((s, t)), vec![], Some(3)).unwrap()
}

fn e4() -> CurveOverL {
    let k = Cyclo::new(4).unwrap();
    let a = [k.zero(), k.from_int(-34), k.zero(), k.from_int(225), k.zero()];
    let s = Point::Aff(k.from_int(45), k.from_int(180));
    let t = Point::Aff(k.from_int(15), k.zeta().scale_int(-30));
    CurveOverL::new(a, Some((s, t)), vec![], Some(4)).unwrap()
}

/// All places above the given primes, closed under Galois.
fn places(n: u32, primes: &[u64]) -> Vec<SplitPlace> {
    let k = Cyclo::new(n).unwrap();
    primes.iter().flat_map(|&p| k.places_above(p).unwrap()).collect()
}

#[test]
fn representation_from_torsion() {
    let rep = GaloisRep::from_torsion(&e3(), 3).unwrap();
    assert_eq!(rep.get(1).unwrap(), &GaloisMatrix::identity(3));
    assert_eq!(rep.get(2).unwrap(), &GaloisMatrix::new(1, 0, 0, 2, 3));
    assert!(rep.is_upper_triangular());
    let rep4 = GaloisRep::from_torsion(&e4(), 4).unwrap();
    assert_eq!(rep4.get(3).unwrap(), &GaloisMatrix::new(1, 0, 0, 3, 4));
    for (t, m) in &rep4.mats {
        assert_eq!(m.det(), t % 4);
    }
}

#[test]
fn unstable_basis_is_rejected() {
    let e = e3();
    let (s, t) = e.torsion_basis.clone().unwrap();
    let st = e.curve.add(&s, &t);
    let bad = CurveOverL::new(e.curve.a.clone(), Some((st.clone(), t.clone())), vec![], Some(3)).unwrap();
    assert!(GaloisRep::from_torsion(&bad, 3).is_err());
    let undeclared = CurveOverL::new(e.curve.a.clone(), Some((st, t)), vec![], None).unwrap();
    let rep = GaloisRep::from_torsion(&undeclared, 3).unwrap();
    assert!(!rep.is_upper_triangular());
}

#[test]
fn representation_checks() {
    let mut mats = BTreeMap::new();
    mats.insert(1, GaloisMatrix::identity(3));
    mats.insert(2, GaloisMatrix::new(1, 0, 0, 1, 3));
    assert!(GaloisRep::new(3, 3, mats.clone()).is_err());
    mats.insert(2, GaloisMatrix::new(2, 2, 1, 2, 3));
    assert!(GaloisRep::new(3, 3, mats).is_err());
}

#[test]
fn scaling_and_addition() {
    let k = Cyclo::new(3).unwrap();
    let x = KummerPair::new(fe(prime_above(3, 7)), fe(prime_above(3, 13)), 3).unwrap();
    assert!(pair_scale(0, &x).is_trivial());
    let two = pair_scale(2, &x);
    assert_eq!(two.a, x.a.pow(2));
    assert_eq!(two.b, x.b.pow(2));
    assert!(pair_add(&x, &pair_scale(-1, &x)).unwrap().is_trivial());
    let y = KummerPair::new(fe(k.zeta()), FactoredElem::one(3), 3).unwrap();
    assert!(pair_add(&x, &KummerPair::trivial(9, 3).unwrap()).is_err());
    assert_eq!(pair_add(&x, &y).unwrap().a, x.a.mul(&y.a).unwrap());
}

#[test]
fn matrix_action_examples() {
    let a = fe(prime_above(4, 5));
    let b = fe(prime_above(4, 13));
    let id = GaloisMatrix::identity(4);
    assert_eq!(matrix_act(&id, &a, &b).unwrap(), (a.clone(), b.clone()));
    let rot = GaloisMatrix::new(0, 1, -1, 0, 4);
    assert_eq!(matrix_act(&rot, &a, &b).unwrap(), (b.clone(), a.pow(3)));
    let a3 = fe(prime_above(3, 7));
    let b3 = fe(prime_above(3, 13));
    let diag = GaloisMatrix::new(1, 0, 0, 2, 3);
    assert_eq!(matrix_act(&diag, &a3, &b3).unwrap(), (a3.clone(), b3.pow(2)));
}

#[test]
fn twisted_conjugate_examples() {
    let rep = GaloisRep::from_torsion(&e3(), 3).unwrap();
    let x = KummerPair::new(fe(prime_above(3, 7)), fe(prime_above(3, 13)), 3).unwrap();
    assert_eq!(twisted_conjugate(1, &rep, &x).unwrap(), x.reduced());
    let g = GaloisAuto::new(2, 3).unwrap();
    let y = twisted_conjugate(2, &rep, &x).unwrap();
    assert_eq!(y.a, x.a.galois(&g).unwrap().pow(2));
    assert_eq!(y.b, x.b.galois(&g).unwrap());
    assert!(twisted_conjugate(5, &GaloisRep::trivial(3, 3), &x).is_err());
}

#[test]
fn norm_with_upper_triangular_rep() {
    let rep = GaloisRep::from_torsion(&e3(), 3).unwrap();
    let pi = fe(prime_above(3, 7));
    let x = KummerPair::new(pi.clone(), FactoredElem::one(3), 3).unwrap();
    let (nm, f) = twisted_norm(&rep, &x).unwrap();
    let g = GaloisAuto::new(2, 3).unwrap();
    let expect = reduce_exponents(&pi.mul(&pi.galois(&g).unwrap().pow(2)).unwrap(), 3);
    assert_eq!(nm.a, expect);
    assert!(nm.b.is_one());
    assert!(f.d.is_one());
    let pl = places(3, &[7, 13]);
    assert!(is_invariant(&rep, &nm, &pl).unwrap());
    assert!(!is_invariant(&rep, &x, &pl).unwrap());
    assert!(is_invariant(&rep, &KummerPair::trivial(3, 3).unwrap(), &pl).unwrap());
}

#[test]
fn norm_over_trivial_group() {
    let x = KummerPair::new(fe(prime_above(3, 7)), fe(prime_above(3, 13)), 3).unwrap();
    let mut rep = GaloisRep::trivial(3, 3);
    assert!(twisted_norm(&rep, &x).is_err());
    rep.mats.insert(2, GaloisMatrix::new(1, 0, 0, 2, 3));
    let (nm, _) = twisted_norm(&rep, &x).unwrap();
    let pl = places(3, &[7, 13]);
    assert!(is_invariant(&rep, &nm, &pl).unwrap());
    let x2 = KummerPair::new(FactoredElem::one(2), fe(Cyclo::new(2).unwrap().from_int(5)), 2).unwrap();
    let (n2, _) = twisted_norm(&GaloisRep::trivial(2, 2), &x2).unwrap();
    assert_eq!(n2, x2.reduced());
}

#[test]
fn invariance_needs_closed_places() {
    let rep = GaloisRep::from_torsion(&e3(), 3).unwrap();
    let x = KummerPair::trivial(3, 3).unwrap();
    let one = vec![Cyclo::new(3).unwrap().split_place(7).unwrap()];
    assert!(is_invariant(&rep, &x, &one).is_err());
}

#[test]
fn obstruction_of_units_vanishes() {
    let k = Cyclo::new(3).unwrap();
    let x = KummerPair::new(fe(k.zeta()), fe(k.from_int(-1)), 3).unwrap();
    let ob = obstruction(&x, &[]).unwrap();
    assert!(ob.report.sum().is_zero());
    assert_eq!(ob.report.global_order, 1);
    assert!(!ob.two_torsion_ambiguity);
    let k4 = Cyclo::new(4).unwrap();
    let y = KummerPair::new(fe(k4.zeta()), fe(k4.from_int(-1)), 2).unwrap();
    let ob = obstruction(&y, &[]).unwrap();
    assert!(ob.two_torsion_ambiguity);
}

#[test]
fn level_shift_two_to_four() {
    let q = Cyclo::new(2).unwrap();
    let x = KummerPair::new(fe(q.from_int(5)), fe(q.from_int(13)), 2).unwrap();
    let pl = places(2, &[5, 13]);
    assert_eq!(level_shift_checks(&x, 1, &pl).unwrap(), (true, true));
    assert_eq!(level_shift_checks(&x, 2, &pl).unwrap(), (true, true));
    let y = push_forward(&x, 2).unwrap();
    for v in &pl {
        let base = localfield::tame_symbol(&x.a, &x.b, v, 2).unwrap();
        for w in lift_places(core::slice::from_ref(v), 2).unwrap() {
            let up = localfield::tame_symbol(&y.a, &y.b, &w, 4).unwrap();
            assert_eq!(up.reduced(), LocalInvariant::new(2 * base.num() as i64, 2).reduced());
        }
    }
    assert!(level_shift_checks(&x, 2, &places(2, &[7])).is_err());
}

#[test]
fn push_forward_kills_order_l() {
    let pi = fe(prime_above(3, 19));
    let pl = places(3, &[19, 37]);
    let k = Cyclo::new(3).unwrap();
    let other = k
        .norm_solutions(37, 6)
        .unwrap()
        .into_iter()
        .flat_map(|b| k.roots_of_unity().into_iter().map(move |u| fe(&b * &u)))
        .find(|b| {
            let x = KummerPair::new(pi.clone(), b.clone(), 3).unwrap();
            localfield::support_of(&x.a, &x.b).map(|s| s.iter().all(|w| pl.contains(w))).unwrap_or(false)
                && pl.iter().any(|v| localfield::tame_symbol(&x.a, &x.b, v, 3).map(|i| !i.is_zero()).unwrap_or(false))
        });
    let Some(b) = other else { panic!("no test element") };
    let x = KummerPair::new(pi, b, 3).unwrap();
    let y = push_forward(&x, 3).unwrap();
    for w in lift_places(&pl, 3).unwrap() {
        let inv = localfield::tame_symbol(&y.a, &y.b, &w, 9).unwrap();
        assert!(inv.is_zero());
    }
}

fn pool(n: u32) -> Vec<CycloElem> {
    let k = Cyclo::new(n).unwrap();
    let mut out: Vec<CycloElem> = [7u64, 13, 19, 31, 37].iter()
        .filter(|p| *p % n as u64 == 1)
        .flat_map(|&p| k.norm_solutions(p, 4).unwrap())
        .collect();
    out.extend(k.roots_of_unity());
    out.push(k.from_int(-1));
    out
}

fn arb_pair(n: u32, pool: Vec<CycloElem>) -> impl Strategy<Value = KummerPair> {
    let len = pool.len();
    prop::collection::vec((0..len, 0..len, -2i64..3, -2i64..3), 1..4).prop_map(move |v| {
        let lvl = n;
        let mut a = FactoredElem::one(lvl);
        let mut b = FactoredElem::one(lvl);
        for (i, j, e, f) in v {
            a = a.mul(&FactoredElem::new(lvl, vec![(pool[i].clone(), e)]).unwrap()).unwrap();
            b = b.mul(&FactoredElem::new(lvl, vec![(pool[j].clone(), f)]).unwrap()).unwrap();
        }
        KummerPair::new(a, b, n).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn twisted_action_is_a_group_action(x in arb_pair(3, pool(3)), y in arb_pair(3, pool(3))) {
        let rep = GaloisRep::from_torsion(&e3(), 3).unwrap();
        let pl = places(3, &[7, 13, 19, 31, 37]);
        for s in [1u32, 2] {
            for t in [1u32, 2] {
                let lhs = twisted_conjugate(s, &rep, &twisted_conjugate(t, &rep, &x).unwrap()).unwrap();
                let rhs = twisted_conjugate(s * t % 3, &rep, &x).unwrap();
                prop_assert!(locally_equal(&lhs, &rhs, &pl).unwrap());
            }
        }
        let (nx, fx) = twisted_norm(&rep, &x).unwrap();
        let (ny, _) = twisted_norm(&rep, &y).unwrap();
        let (nxy, _) = twisted_norm(&rep, &pair_add(&x, &y).unwrap()).unwrap();
        prop_assert!(is_invariant(&rep, &nx, &pl).unwrap());
        prop_assert!(locally_equal(&nxy, &pair_add(&nx, &ny).unwrap(), &pl).unwrap());
        prop_assert!(fx.d.is_one());
        prop_assert_eq!(level_shift_checks(&x, 3, &places(3, &[19, 37])).unwrap(), (true, true));
    }

    #[test]
    fn twisted_action_level_four(x in arb_pair(4, pool(4))) {
        let rep = GaloisRep::from_torsion(&e4(), 4).unwrap();
        let pl = places(4, &[13, 37]);
        let lhs = twisted_conjugate(3, &rep, &twisted_conjugate(3, &rep, &x).unwrap()).unwrap();
        prop_assert!(locally_equal(&lhs, &x, &pl).unwrap());
        let (nx, fx) = twisted_norm(&rep, &x).unwrap();
        prop_assert!(is_invariant(&rep, &nx, &places(4, &[5, 13, 17, 29, 37])).unwrap());
        prop_assert!(fx.d.is_one());
        prop_assert_eq!(level_shift_checks(&x, 2, &places(4, &[17])).unwrap(), (true, true));
    }
}
