//! Named test curves with their declared torsion data.

use alloc::vec;

use crate::cyclo::Cyclo;
use crate::ecq::{CurveOverL, Point};

/// y² = x³ − x over Q, with E[2] = ⟨(0,0), (1,0)⟩.
pub fn congruent() -> CurveOverL {
    let k = Cyclo::new(2).unwrap();
    let a = [k.zero(), k.zero(), k.zero(), k.from_int(-1), k.zero()];
    let s = Point::Aff(k.zero(), k.zero());
    let t = Point::Aff(k.one(), k.zero());
    CurveOverL::new(a, Some((s, t)), vec![], None).unwrap()
}

/// y² + y = x³ over Q(ζ₃); (0,0) has order 3 and spans a Galois-stable subgroup.
pub fn cubic() -> CurveOverL {
    let k = Cyclo::new(3).unwrap();
    let a = [k.zero(), k.zero(), k.one(), k.zero(), k.zero()];
    let s = Point::Aff(k.zero(), k.zero());
    let t = Point::Aff(k.from_int(-1), k.zeta_pow(2));
    CurveOverL::new(a, Some((s.clone(), t)), vec![s], Some(3)).unwrap()
}

/// y² = x³ − 34x² + 225x over Q(i); (45, 180) is a rational point of order 4.
pub fn order_four() -> CurveOverL {
    let k = Cyclo::new(4).unwrap();
    let a = [k.zero(), k.from_int(-34), k.zero(), k.from_int(225), k.zero()];
    let s = Point::Aff(k.from_int(45), k.from_int(180));
    let t = Point::Aff(k.from_int(15), k.zeta().scale_int(-30));
    CurveOverL::new(a, Some((s.clone(), t)), vec![s, Point::Aff(k.zero(), k.zero())], Some(4)).unwrap()
}
