use alloc::collections::BTreeSet;
use alloc::vec;

use super::*;
use crate::ecq::CurveFp;

fn congruent() -> CurveOverL {
    let k = Cyclo::new(2).unwrap();
    let a = [k.zero(), k.zero(), k.zero(), k.from_int(-1), k.zero()];
    let s = Point::Aff(k.zero(), k.zero());
    let t = Point::Aff(k.one(), k.zero());
    CurveOverL::new(a, Some((s, t)), vec![], None).unwrap()
}

fn e3() -> CurveOverL {
    let k = Cyclo::new(3).unwrap();
    let a = [k.zero(), k.zero(), k.one(), k.zero(), k.zero()];
    let s = Point::Aff(k.zero(), k.zero());
    let t = Point::Aff(k.from_int(-1), k.zeta_pow(2));
    CurveOverL::new(a, Some((s.clone(), t)), vec![s], Some(3)).unwrap()
}

#[test]
fn bad_sets() {
    let (b, m) = bad_set(&congruent(), 2).unwrap();
    assert_eq!(b.primes, vec![2]);
    assert!(b.archimedean);
    assert_eq!(m, 8);
    let (b, m) = bad_set(&e3(), 3).unwrap();
    assert_eq!(b.primes, vec![3]);
    assert!(!b.archimedean);
    assert_eq!(m, 27);
}

/// 2E(F_p) by enumeration.
fn doubles(e: &CurveFp) -> BTreeSet<PointFp> {
    let mut pts = vec![Point::Inf];
    pts.extend(e.points());
    pts.iter().map(|x| e.mul(2, x)).collect()
}

#[test]
fn smallest_v_for_the_congruent_curve() {
    let e = congruent();
    let s = Sieve::new(&e, 2, Mode::A, Bounds { prime_bound: 10_000, ..Bounds::default() }).unwrap();
    let (v, div) = s.find_v().unwrap();
    let expect = (3..10_000u64)
        .filter(|p| arith::is_prime(*p) && p % 8 == 1)
        .find(|&p| {
            let ef = CurveFp::new(p, [0, 0, 0, p - 1, 0]);
            let d = doubles(&ef);
            d.contains(&Point::Aff(0, 0)) && d.contains(&Point::Aff(1, 0))
        })
        .unwrap();
    assert_eq!(v.place.p, expect);
    assert_eq!(v.pi, Cyclo::new(2).unwrap().from_int(expect as i64));
    assert_eq!(div.len(), 2);
    assert_eq!(v.s_witnesses.len(), 2);
}

#[test]
fn pair_for_the_congruent_curve() {
    let e = congruent();
    let s = Sieve::new(&e, 2, Mode::A, Bounds { prime_bound: 10_000, ..Bounds::default() }).unwrap();
    let c = s.find_pair().unwrap();
    let p = c.v.place.p;
    let q = c.vp.place.p;
    assert_eq!(q % 8, 1);
    assert_eq!(arith::legendre(q, p), -1);
    let first = (3..q).filter(|x| arith::is_prime(*x) && x % 8 == 1 && *x != p).find(|x| arith::legendre(*x, p) == -1);
    assert_eq!(first, None);
    assert!(recheck_pair(&e, &c).unwrap().is_empty());
}

#[test]
fn tiny_bounds_give_a_histogram() {
    let e = congruent();
    let s = Sieve::new(&e, 2, Mode::A, Bounds { prime_bound: 16, ..Bounds::default() }).unwrap();
    match s.find_v() {
        Err(Error::NotFound { histogram, .. }) => {
            assert!(!histogram.is_empty());
            assert!(histogram.iter().all(|(_, c)| *c > 0));
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn mode_b_pair_at_level_three() {
    let e = e3();
    let s = Sieve::new(&e, 3, Mode::B, Bounds { prime_bound: 100_000, ..Bounds::default() }).unwrap();
    let c = s.find_pair().unwrap();
    assert_eq!(c.b4_residues.len(), 1);
    assert!(c.group.0 * c.group.1 % 9 == 0);
    assert!(recheck_pair(&e, &c).unwrap().is_empty());
    let v = c.v.place;
    let tv = localfield::order_in_unit_quotient(c.a4_residue, &v, 3).unwrap();
    assert_eq!(tv, 3);
    let mut t = c.clone();
    t.a4_residue = (t.a4_residue + 1) % v.p;
    assert!(!recheck_pair(&e, &t).unwrap().is_empty());
    let mut t = c.clone();
    t.division[0].root = Point::Inf;
    assert!(!recheck_pair(&e, &t).unwrap().is_empty());
    let mut t = c.clone();
    t.v.s_witnesses.clear();
    assert!(!recheck_pair(&e, &t).unwrap().is_empty());
    let again = s.find_pair().unwrap();
    assert_eq!(again, c);
}

#[test]
fn mode_b_rejects_irrational_generators() {
    let e = e3();
    let k = Cyclo::new(3).unwrap();
    let t = Point::Aff(k.from_int(-1), k.zeta_pow(2));
    let bad = CurveOverL::new(e.curve.a.clone(), e.torsion_basis.clone(), vec![t], None).unwrap();
    assert!(Sieve::new(&bad, 3, Mode::B, Bounds::default()).is_err());
}

#[test]
fn fast_roots_match_enumeration() {
    for n in [3u32, 4, 5, 8, 9] {
        let k = Cyclo::new(n).unwrap();
        for p in (2..400u64).filter(|p| arith::is_prime(*p) && p % n as u64 == 1) {
            let brute: Vec<u64> = (0..p)
                .filter(|&w| crate::cyclo::eval_int_poly(k.phi(), w, p) == 0)
                .collect();
            assert_eq!(k.roots_mod(p), brute);
        }
    }
}
