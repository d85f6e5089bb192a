use alloc::vec::Vec;

use super::*;
use crate::catalog;

fn bounds() -> Bounds {
    Bounds::default()
}

#[test]
fn xi_shapes() {
    let k = Cyclo::new(4).unwrap();
    let pi = k.from_ints(&[2, 1]).unwrap();
    let pi2 = k.from_ints(&[3, 2]).unwrap();
    let x = build_xi(&pi, &pi2, 4, 4).unwrap();
    assert_eq!(x.b.factors(), &[(pi2.clone(), 1)]);
    let x = build_xi(&pi, &pi2, 4, 2).unwrap();
    assert_eq!(x.b.factors(), &[(pi2.clone(), 2)]);
    let x = build_xi(&pi, &pi2, 4, 1).unwrap();
    assert!(x.reduced().b.is_one());
    assert!(build_xi(&pi, &pi2, 4, 3).is_err());
}

#[test]
fn lichtenbaum_examples() {
    assert!(lichtenbaum_check(2, 4));
    assert!(!lichtenbaum_check(3, 27));
    assert!(lichtenbaum_check(5, 5));
    assert!(!lichtenbaum_check(4, 2));
}

#[test]
fn mode_b_cubic() {
    let e = catalog::cubic();
    for ell in [1u32, 3] {
        let c = certify_mode_b(&e, 3, ell, bounds(), 0).unwrap();
        assert_eq!((c.period, c.index_upper, c.index_lower), (3, 3 * ell, 3 * ell));
        assert_eq!(c.class_report.get(&Place::Split(c.pair.v.place)).unwrap().inv.order(), ell);
        assert!(c.lichtenbaum_ok);
        assert_eq!(c.period_evidence.len(), 2);
        let node = Certificate::Single(Box::new(c)).to_node();
        let v = verify_certificate(&node);
        assert!(v.ok(), "{:?}", v.trace);
    }
}

#[test]
fn mode_a_cubic() {
    let e = catalog::cubic();
    let c = certify_mode_a(&e, 3, 3, bounds(), 0).unwrap();
    assert_eq!((c.period, c.index_upper), (3, 9));
    let ivp = c.report.get(&Place::Split(c.pair.vp.place)).unwrap().inv;
    assert_eq!(ivp.order(), 3);
    let c1 = certify_mode_a(&e, 3, 1, bounds(), 0).unwrap();
    assert_eq!(c1.index_upper, 3);
    assert!(c1.report.entries.iter().all(|x| x.inv.is_zero()));
    assert!(verify_certificate(&Certificate::Single(Box::new(c)).to_node()).ok());
}

#[test]
fn even_gate() {
    let e = catalog::congruent();
    let err = certify_mode_a(&e, 2, 1, bounds(), 0).unwrap_err();
    assert!(alloc::format!("{err}").contains("even_adjust"));
    let err = even_adjust(&e, 2, 2, Mode::A, bounds(), 0).unwrap_err();
    assert!(alloc::format!("{err}").contains("missing level-4"));
}

#[test]
fn compose_rules() {
    let e = catalog::cubic();
    let c = Certificate::Single(Box::new(certify_mode_b(&e, 3, 3, bounds(), 0).unwrap()));
    let t = Certificate::trivial(&e);
    assert_eq!(compose_coprime(&t, &c).unwrap(), c);
    assert!(compose_coprime(&c, &c).is_err());
    assert!(compose_coprime(&Certificate::trivial(&catalog::congruent()), &c).is_err());
}

#[test]
fn tampering_names_the_field() {
    let e = catalog::cubic();
    let node = Certificate::Single(Box::new(certify_mode_b(&e, 3, 3, bounds(), 0).unwrap())).to_node();
    let leaves: Vec<(String, String)> = node.leaves();
    let place = leaves.iter().find(|(p, v)| p.starts_with("report/entries/") && p.ends_with("/inv") && v != "0/3").unwrap();
    let mut bad = node.clone();
    let inv = LocalInvariant::new(place.1.split('/').next().unwrap().parse::<i64>().unwrap() + 1, 3);
    *bad.at_mut(&place.0).unwrap() = crate::cert::Node::s(inv);
    let v = verify_certificate(&bad);
    assert!(!v.ok());
    assert!(v.trace.iter().any(|t| t.contains(&place.0)), "{:?}", v.trace);

    let mut bad = node.clone();
    *bad.at_mut("index/lower_evidence").unwrap() = crate::cert::Node::List(Vec::new());
    let v = verify_certificate(&bad);
    assert!(v.trace.iter().any(|t| t.contains("index lower bound unproven")), "{:?}", v.trace);

    let mut bad = node.clone();
    *bad.at_mut("pair/v/pi/0").unwrap() = crate::cert::Node::s("12345");
    let v = verify_certificate(&bad);
    assert!(v.trace.iter().any(|t| t.starts_with("pair/v/pi/0")), "{:?}", v.trace);
}

#[test]
fn doubling_route() {
    let e = catalog::order_four();
    let c1 = even_adjust(&e, 2, 1, Mode::B, bounds(), 0).unwrap();
    assert_eq!((c1.period, c1.index_upper), (2, 2));
    let t = c1.even_trace.clone().unwrap();
    assert_eq!((t.level, t.inv_high.order(), t.inv_low.order()), (4, 2, 1));
    let c2 = even_adjust(&e, 2, 2, Mode::B, bounds(), 0).unwrap();
    assert_eq!((c2.period, c2.index_upper, c2.index_lower), (2, 4, 4));
    let t = c2.even_trace.clone().unwrap();
    assert_eq!((t.inv_high.order(), t.inv_low.order()), (4, 2));
    assert_eq!(c2.ambiguity, "absorbed by doubling");
    for c in [c1, c2] {
        let v = verify_certificate(&Certificate::Single(Box::new(c)).to_node());
        assert!(v.ok(), "{:?}", v.trace);
    }
    assert!(even_adjust(&e, 2, 4, Mode::B, bounds(), 0).is_err());
    assert!(certify_mode_b(&e, 2, 2, bounds(), 0).is_err());
}

#[test]
fn fresh_certificates_are_deterministic() {
    let e = catalog::cubic();
    let a = Certificate::Single(Box::new(certify_mode_b(&e, 3, 3, bounds(), 7).unwrap())).to_node();
    let b = Certificate::Single(Box::new(certify_mode_b(&e, 3, 3, bounds(), 7).unwrap())).to_node();
    assert_eq!(a, b);
    assert_eq!(certificate_from_node(&a).unwrap().to_node(), a);
}

proptest::proptest! {
    #[test]
    fn lichtenbaum_is_multiplicative(p1 in 1u32..60, d1 in 1u32..60, p2 in 1u32..60, d2 in 1u32..60) {
        let (i1, i2) = (p1 * d1, p2 * d2);
        if num_integer::Integer::gcd(&p1, &p2) == 1 && lichtenbaum_check(p1, i1) && lichtenbaum_check(p2, i2) {
            proptest::prop_assert!(lichtenbaum_check(p1 * p2, i1 * i2));
        }
        proptest::prop_assert_eq!(lichtenbaum_check(p1, i1), p1 % d1 == 0);
    }
}
