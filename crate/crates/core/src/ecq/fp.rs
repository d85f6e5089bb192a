use alloc::collections::BTreeSet;
use alloc::vec::Vec;

use super::{Curve, Field, Fp, Point};
use crate::arith;
use crate::error::{input, Result};

pub type PointFp = Point<u64>;

#[derive(Clone, Debug, PartialEq)]
pub struct CurveFp {
    pub p: u64,
    pub curve: Curve<Fp>,
}

/// E(F_p) ≅ Z/d1 × Z/d2 with d1 | d2, generated by g1 and g2.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroupStructure {
    pub d1: u64,
    pub d2: u64,
    pub g1: PointFp,
    pub g2: PointFp,
}

impl CurveFp {
    pub fn new(p: u64, a: [u64; 5]) -> CurveFp {
        CurveFp {
            p,
            curve: Curve {
                field: Fp(p),
                a: a.map(|c| c % p),
            },
        }
    }

    pub fn add(&self, a: &PointFp, b: &PointFp) -> PointFp {
        self.curve.add(a, b)
    }

    pub fn mul(&self, k: i64, a: &PointFp) -> PointFp {
        self.curve.mul(k, a)
    }

    pub fn neg(&self, a: &PointFp) -> PointFp {
        self.curve.neg(a)
    }

    fn quartic(&self, x: u64) -> u64 {
        let f = &self.curve.field;
        let [b2, b4, b6, _] = self.curve.b_invariants();
        let x2 = f.mul(&x, &x);
        let t = f.add(&f.mul(&4, &f.mul(&x2, &x)), &f.mul(&b2, &x2));
        f.add(&f.add(&t, &f.mul(&f.mul(&2, &b4), &x)), &b6)
    }

    /// #E(F_p) by a character sum; p must be odd.
    pub fn count(&self) -> u64 {
        let p = self.p;
        let s: i64 = (0..p).map(|x| arith::legendre(self.quartic(x), p) as i64).sum();
        (p as i64 + 1 + s) as u64
    }

    /// Points with the given x-coordinate, smaller y first.
    pub fn lift_x(&self, x: u64) -> Vec<PointFp> {
        let p = self.p;
        let f = &self.curve.field;
        let Some(r) = arith::sqrt_mod(self.quartic(x % p), p) else {
            return Vec::new();
        };
        let t = f.add(&f.mul(&self.curve.a[0], &x), &self.curve.a[2]);
        let half = arith::inv_mod(2, p).unwrap();
        let mut out: Vec<PointFp> = [r, (p - r) % p]
            .iter()
            .map(|s| Point::Aff(x % p, f.mul(&f.sub(s, &t), &half)))
            .collect();
        out.sort();
        out.dedup();
        out
    }

    /// Affine points in order of x, then y.
    pub fn points(&self) -> impl Iterator<Item = PointFp> + '_ {
        (0..self.p).flat_map(move |x| self.lift_x(x))
    }

    fn split_order(&self, l: u64) -> (u64, u32, u64) {
        let n = self.count();
        let a = arith::val_u(n, l);
        (n, a, n / l.pow(a))
    }

    /// The ℓ-Sylow subgroup of E(F_p) as a sorted list.
    pub fn sylow(&self, l: u64) -> Vec<PointFp> {
        let (_, a, m) = self.split_order(l);
        let size = l.pow(a) as usize;
        let mut g: BTreeSet<PointFp> = BTreeSet::new();
        g.insert(Point::Inf);
        for q in self.points() {
            if g.len() == size {
                break;
            }
            let r = self.mul(m as i64, &q);
            if g.contains(&r) {
                continue;
            }
            let base: Vec<PointFp> = g.iter().cloned().collect();
            let before = g.clone();
            let mut kr = r.clone();
            while !before.contains(&kr) {
                for h in &base {
                    g.insert(self.add(h, &kr));
                }
                kr = self.add(&kr, &r);
            }
        }
        g.into_iter().collect()
    }

    pub fn group_structure(&self) -> GroupStructure {
        let n = self.count();
        let mut gs = GroupStructure {
            d1: 1,
            d2: 1,
            g1: Point::Inf,
            g2: Point::Inf,
        };
        for (l, a) in arith::factor(n) {
            let g = self.sylow(l);
            let order = |x: &PointFp| self.curve.order(x, l.pow(a)).unwrap();
            let g2 = g.iter().max_by_key(|x| (order(x), core::cmp::Reverse(*x))).unwrap().clone();
            let e2 = order(&g2);
            let e1 = l.pow(a) / e2;
            let span2: BTreeSet<PointFp> = (0..e2).map(|k| self.mul(k as i64, &g2)).collect();
            let g1 = if e1 == 1 {
                Point::Inf
            } else {
                g.iter()
                    .find(|h| order(h) == e1 && !span2.contains(&self.mul((e1 / l) as i64, h)))
                    .unwrap()
                    .clone()
            };
            gs.d1 *= e1;
            gs.d2 *= e2;
            gs.g1 = self.add(&gs.g1, &g1);
            gs.g2 = self.add(&gs.g2, &g2);
        }
        gs
    }

    /// Some Q with nQ = P, for n a prime power.
    pub fn divide(&self, pt: &PointFp, n: u64) -> Result<Option<PointFp>> {
        let Some((l, _)) = arith::prime_power(n) else {
            return input("divisibility is tested for prime-power n only");
        };
        let (total, a, m) = self.split_order(l);
        if a == 0 {
            let k = arith::inv_mod(n % total, total).unwrap();
            return Ok(Some(self.mul(k as i64, pt)));
        }
        let la = l.pow(a);
        let e1 = (m as u128 * arith::inv_mod(m % la, la).unwrap() as u128 % total as u128) as i64;
        let pl = self.mul(e1, pt);
        let pm = self.add(pt, &self.neg(&pl));
        let Some(ql) = self.sylow(l).into_iter().find(|q| self.mul(n as i64, q) == pl) else {
            return Ok(None);
        };
        let qm = if m == 1 {
            Point::Inf
        } else {
            self.mul(arith::inv_mod(n % m, m).unwrap() as i64, &pm)
        };
        Ok(Some(self.add(&ql, &qm)))
    }

    pub fn is_n_divisible(&self, pt: &PointFp, n: u64) -> Result<bool> {
        Ok(self.divide(pt, n)?.is_some())
    }

    /// Value at r of the function with divisor n(P) - n(O); None if r meets a zero or pole.
    pub fn miller(&self, pt: &PointFp, n: u64, r: &PointFp) -> Option<u64> {
        let Point::Aff(xr, yr) = r else { return None };
        let f = &self.curve.field;
        let vert = |c: &PointFp| -> u64 {
            match c {
                Point::Inf => 1,
                Point::Aff(xc, _) => f.sub(xr, xc),
            }
        };
        let line = |a: &PointFp, b: &PointFp| -> Option<u64> {
            let Point::Aff(xa, ya) = a else { return Some(vert(b)) };
            match self.curve.slope(a, b) {
                None => Some(f.sub(xr, xa)),
                Some(l) => Some(f.sub(&f.sub(yr, ya), &f.mul(&l, &f.sub(xr, xa)))),
            }
        };
        let mut num = 1u64;
        let mut den = 1u64;
        let mut t = pt.clone();
        let bits = 64 - n.leading_zeros();
        for i in (0..bits - 1).rev() {
            let t2 = self.add(&t, &t);
            num = f.mul(&f.mul(&num, &num), &line(&t, &t)?);
            den = f.mul(&f.mul(&den, &den), &vert(&t2));
            t = t2;
            if (n >> i) & 1 == 1 {
                let t3 = self.add(&t, pt);
                num = f.mul(&num, &line(&t, pt)?);
                den = f.mul(&den, &vert(&t3));
                t = t3;
            }
        }
        if num == 0 || den == 0 {
            return None;
        }
        Some(f.mul(&num, &f.inv(&den)?))
    }

    /// e_n(S, T) by Miller evaluation with an auxiliary point drawn from x = seed, seed+1, ...
    pub fn weil_pairing(&self, s: &PointFp, t: &PointFp, n: u32, seed: u64) -> Result<u64> {
        let n = n as u64;
        if !self.mul(n as i64, s).is_inf() || !self.mul(n as i64, t).is_inf() {
            return input("pairing arguments are not n-torsion");
        }
        let multiples = |a: &PointFp| -> BTreeSet<PointFp> {
            (0..n).map(|k| self.mul(k as i64, a)).collect()
        };
        if multiples(s).contains(t) || multiples(t).contains(s) {
            return Ok(1);
        }
        let f = &self.curve.field;
        for dx in 0..self.p {
            for aux in self.lift_x(seed.wrapping_add(dx) % self.p) {
                let a = self.add(t, &aux);
                let b = aux.clone();
                let c = self.add(s, &self.neg(&aux));
                let d = self.neg(&aux);
                let vals = (
                    self.miller(s, n, &a),
                    self.miller(s, n, &b),
                    self.miller(t, n, &c),
                    self.miller(t, n, &d),
                );
                if let (Some(fa), Some(fb), Some(fc), Some(fd)) = vals {
                    let num = f.mul(&fa, &fd);
                    let den = f.mul(&fb, &fc);
                    return Ok(f.mul(&num, &f.inv(&den).unwrap()));
                }
            }
        }
        input("no auxiliary point avoids the pairing divisors")
    }
}
