use super::*;
use crate::cyclo::{Cyclo, CycloElem};
use alloc::vec;
use alloc::vec::Vec;
use proptest::prelude::*;

fn fe(x: CycloElem) -> FactoredElem {
    FactoredElem::from_base(x).unwrap()
}

fn q(a: i64) -> FactoredElem {
    fe(Cyclo::new(2).unwrap().from_int(a))
}

fn split_odd(a: i64, p: i64) -> (i64, i64) {
    let mut a = a;
    let mut v = 0;
    while a % p == 0 {
        a /= p;
        v += 1;
    }
    (v, a)
}

/// Classical quadratic Hilbert symbol over Q_p, as 0 or 1 (additively).
fn hilbert_q(a: i64, b: i64, p: i64) -> u32 {
    if p == 0 {
        return (a < 0 && b < 0) as u32;
    }
    let (al, u) = split_odd(a, p);
    let (be, w) = split_odd(b, p);
    if p == 2 {
        let eps = |x: i64| (x.rem_euclid(4) - 1) / 2;
        let omg = |x: i64| ((x * x - 1) / 8).rem_euclid(2);
        return ((eps(u) * eps(w) + al * omg(w) + be * omg(u)).rem_euclid(2)) as u32;
    }
    let leg = |x: i64| -> i64 {
        if arith::legendre(x.rem_euclid(p) as u64, p as u64) == 1 {
            0
        } else {
            1
        }
    };
    ((al * be * ((p - 1) / 2) + be * leg(u) + al * leg(w)).rem_euclid(2)) as u32
}

#[test]
fn quadratic_examples() {
    let k = Cyclo::new(2).unwrap();
    let v5 = k.split_place(5).unwrap();
    let v3 = k.split_place(3).unwrap();
    assert_eq!(tame_symbol(&q(2), &q(3), &v5, 2).unwrap(), LocalInvariant::new(0, 2));
    assert_eq!(tame_symbol(&q(2), &q(3), &v3, 2).unwrap(), LocalInvariant::new(1, 2));
}

#[test]
fn quartic_example_has_order_four() {
    let k = Cyclo::new(4).unwrap();
    let v = k.split_place(13).unwrap();
    assert_eq!(v.omega, 5);
    let pi = k.from_ints(&[3, 2]).unwrap();
    assert!(pi.reduce_at(&v).unwrap().1);
    let s = tame_symbol(&fe(k.zeta()), &fe(pi), &v, 4).unwrap();
    let fourth: Vec<u64> = (1..13u64).map(|x| arith::pow_mod(x, 4, 13)).collect();
    let brute = (1..=4u64).find(|&d| fourth.contains(&arith::pow_mod(5, d, 13))).unwrap();
    assert_eq!(s.order() as u64, brute);
    assert_eq!(s.order(), 4);
}

#[test]
fn real_examples() {
    assert_eq!(real_symbol(-1, -1, 2).unwrap(), LocalInvariant::new(1, 2));
    assert_eq!(real_symbol(-1, 1, 2).unwrap(), LocalInvariant::zero(2));
    assert_eq!(real_symbol(1, 1, 2).unwrap(), LocalInvariant::zero(2));
    assert!(real_symbol(-1, -1, 3).is_err());
}

#[test]
fn global_two_three_has_inferred_wild_entry() {
    let k = Cyclo::new(2).unwrap();
    let v3 = k.split_place(3).unwrap();
    let r = global_symbol(&q(2), &q(3), &[v3], 2).unwrap();
    assert_eq!(r.get(&Place::Split(v3)).unwrap().inv, LocalInvariant::new(1, 2));
    assert_eq!(r.get(&Place::Real).unwrap().inv, LocalInvariant::zero(2));
    let w = r.get(&Place::Wild(2)).unwrap();
    assert_eq!(w.source, Source::Inferred);
    assert_eq!(w.inv.num(), hilbert_q(2, 3, 2));
    assert!(product_formula_check(&r));
    assert!(global_symbol(&q(2), &q(3), &[], 2).is_err());
}

#[test]
fn global_symbols_match_classical_oracle() {
    let k = Cyclo::new(2).unwrap();
    for a in [-15i64, -6, -3, -1, 2, 3, 5, 6, 7, 10, 21, -22] {
        for b in [-35i64, -5, -2, 3, 11, 13, 14, 15, -1, 33] {
            let (fa, fb) = (q(a), q(b));
            let support = support_of(&fa, &fb).unwrap();
            let r = global_symbol(&fa, &fb, &support, 2).unwrap();
            for e in &r.entries {
                let p = match e.place {
                    Place::Real => 0,
                    Place::Wild(p) => p as i64,
                    Place::Split(v) => v.p as i64,
                };
                assert_eq!(e.inv.num(), hilbert_q(a, b, p), "({a},{b}) at {p}");
            }
            for p in [3i64, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
                if !support.iter().any(|v| v.p as i64 == p) {
                    assert_eq!(hilbert_q(a, b, p), 0);
                    let _ = k.split_place(p as u64).unwrap();
                }
            }
        }
    }
}

#[test]
fn product_formula_examples() {
    let k = Cyclo::new(4).unwrap();
    let v = k.split_place(13).unwrap();
    let mk = |pairs: Vec<(u32, i64)>, level| ObstructionReport {
        level,
        entries: pairs
            .into_iter()
            .map(|(w, num)| ReportEntry {
                place: Place::Split(SplitPlace { omega: w as u64, ..v }),
                inv: LocalInvariant::new(num, level),
                source: Source::Tame,
            })
            .collect(),
        global_order: 0,
    };
    assert!(product_formula_check(&mk(vec![(5, 1), (8, 1)], 2)));
    assert!(product_formula_check(&mk(vec![(5, 1), (8, 2)], 3)));
    assert!(!product_formula_check(&mk(vec![(5, 1)], 4)));
}

#[test]
fn unit_quotient_examples() {
    let k2 = Cyclo::new(2).unwrap();
    assert_eq!(order_in_unit_quotient(2, &k2.split_place(3).unwrap(), 2).unwrap(), 2);
    assert_eq!(order_in_unit_quotient(4, &k2.split_place(7).unwrap(), 2).unwrap(), 1);
    let k4 = Cyclo::new(4).unwrap();
    assert_eq!(order_in_unit_quotient(3, &k4.split_place(13).unwrap(), 4).unwrap(), 1);
    assert!(order_in_unit_quotient(0, &k4.split_place(13).unwrap(), 4).is_err());
}

#[test]
fn invariant_arithmetic() {
    let a = LocalInvariant::new(2, 4);
    assert_eq!(a.order(), 2);
    assert_eq!(a.reduced(), (1, 2));
    assert!(a.eq_qz(&LocalInvariant::new(1, 2)));
    assert_eq!(LocalInvariant::new(1, 2).at_level(8), Some(LocalInvariant::new(4, 8)));
    assert_eq!(LocalInvariant::new(1, 4).at_level(2), None);
    assert_eq!(alloc::format!("{}", LocalInvariant::new(-1, 3)), "2/3");
}

/// Elements of small norm supported at split places only.
fn pool(n: u32) -> Vec<CycloElem> {
    let k = Cyclo::new(n).unwrap();
    let mut out = Vec::new();
    let bound = if n == 2 { 400 } else { 12 };
    for p in (3..400u64).filter(|&p| arith::is_prime(p) && p % n as u64 == 1) {
        out.extend(k.norm_solutions(p, bound).unwrap().into_iter().take(2));
    }
    out
}

fn pick(n: u32, idx: &[usize], exps: &[i64]) -> FactoredElem {
    let k = Cyclo::new(n).unwrap();
    let pl = pool(n);
    let roots = k.roots_of_unity();
    let mut f = vec![(roots[idx[0] % roots.len()].clone(), 1)];
    for (i, e) in idx[1..].iter().zip(exps) {
        f.push((pl[*i % pl.len()].clone(), *e));
    }
    FactoredElem::new(n, f).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn tame_laws(
        n in prop::sample::select(vec![2u32, 3, 4]),
        ia in proptest::collection::vec(0usize..1000, 3),
        ib in proptest::collection::vec(0usize..1000, 3),
        ic in proptest::collection::vec(0usize..1000, 3),
        ea in proptest::collection::vec(-3i64..=3, 2),
        eb in proptest::collection::vec(-3i64..=3, 2),
    ) {
        let (a, b, c) = (pick(n, &ia, &ea), pick(n, &ib, &eb), pick(n, &ic, &ea));
        let k = Cyclo::new(n).unwrap();
        let mut places = support_of(&a, &b).unwrap();
        places.extend(support_of(&c, &b).unwrap());
        places.push(k.split_place(pool_prime(n)).unwrap());
        for v in &places {
            let ab = tame_symbol(&a, &b, v, n).unwrap();
            let cb = tame_symbol(&c, &b, v, n).unwrap();
            let acb = tame_symbol(&a.mul(&c).unwrap(), &b, v, n).unwrap();
            prop_assert_eq!(acb, ab.add(&cb));
            prop_assert!(ab.add(&tame_symbol(&b, &a, v, n).unwrap()).is_zero());
            let minus_a = a.mul(&fe(k.from_int(-1))).unwrap();
            prop_assert!(tame_symbol(&a, &minus_a, v, n).unwrap().is_zero());
        }
    }
}

fn pool_prime(n: u32) -> u64 {
    (n as u64 + 1..).step_by(n as usize).find(|&p| arith::is_prime(p)).unwrap()
}

#[test]
fn lemma_clauses_by_brute_force() {
    for n in [2u32, 3, 4] {
        let k = Cyclo::new(n).unwrap();
        let mut count = 0;
        for p in (3..400u64).filter(|&p| arith::is_prime(p) && p % n as u64 == 1) {
            let powers: Vec<u64> = (1..p).map(|x| arith::pow_mod(x, n as u64, p)).collect();
            let Some(pi) = k.solve_norm_equation(p, if n == 2 { p as i64 } else { 20 }).unwrap() else { continue };
            let v = k
                .places_above(p)
                .unwrap()
                .into_iter()
                .find(|w| pi.reduce_at(w).unwrap().1)
                .unwrap();
            for u in 1..p.min(40) {
                let fu = fe(k.from_int(u as i64));
                for u2 in [2u64, 3, 5] {
                    if u2 % p != 0 {
                        let s = tame_symbol(&fu, &fe(k.from_int(u2 as i64)), &v, n).unwrap();
                        assert!(s.is_zero());
                    }
                }
                let s = tame_symbol(&fu, &fe(pi.clone()), &v, n).unwrap();
                let brute = (1..=n as u64).find(|&d| powers.contains(&arith::pow_mod(u, d, p))).unwrap();
                assert_eq!(s.order() as u64, brute, "n={n} p={p} u={u}");
                assert_eq!(order_in_unit_quotient(u, &v, n).unwrap() as u64, brute);
            }
            count += 1;
        }
        assert!(count >= 20, "n={n}: {count} places");
    }
}

#[test]
fn level_three_product_formula_on_local_cubes() {
    let k = Cyclo::new(3).unwrap();
    let t = WildTable::new(3, 3).unwrap();
    let s2 = k.galois(2).unwrap();
    let cubes: Vec<CycloElem> = (7..3000u64)
        .filter(|&p| arith::is_prime(p) && p % 3 == 1)
        .filter_map(|p| k.solve_norm_equation(p, 60).unwrap())
        .flat_map(|x| [x.galois(&s2).unwrap(), x])
        .flat_map(|x| k.roots_of_unity().into_iter().map(move |u| &u * &x))
        .filter(|x| matches!(t.test(&fe(x.clone())).unwrap(), WildPower::Power(_)))
        .collect();
    assert!(cubes.len() > 20, "{}", cubes.len());
    for i in 0..cubes.len() {
        let j = (i * 7 + 3) % cubes.len();
        let a = FactoredElem::new(3, vec![(cubes[i].clone(), 1), (cubes[(i + 1) % cubes.len()].clone(), 2)]).unwrap();
        let b = fe(cubes[j].clone());
        let r = global_symbol(&a, &b, &support_of(&a, &b).unwrap(), 3).unwrap();
        assert!(!r.has_inferred());
        assert!(product_formula_check(&r));
    }
}
