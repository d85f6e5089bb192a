use alloc::format;
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::arith;
use crate::cyclo::{Cyclo, CycloElem, GaloisAuto, SplitPlace};
use crate::error::{input, Result};

/// A product of powers of nonzero field elements, kept unexpanded.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FactoredElem {
    level: u32,
    factors: Vec<(CycloElem, i64)>,
}

impl FactoredElem {
    pub fn one(level: u32) -> FactoredElem {
        FactoredElem {
            level,
            factors: Vec::new(),
        }
    }

    pub fn from_base(b: CycloElem) -> Result<FactoredElem> {
        let level = b.level();
        FactoredElem::new(level, alloc::vec![(b, 1)])
    }

    pub fn new(level: u32, factors: Vec<(CycloElem, i64)>) -> Result<FactoredElem> {
        let mut out = FactoredElem::one(level);
        for (b, e) in factors {
            if b.level() != level {
                return input(format!("base of level {} in a product of level {level}", b.level()));
            }
            if b.is_zero() {
                return input("zero base in a factored element");
            }
            out.push(b, e);
        }
        Ok(out)
    }

    fn push(&mut self, b: CycloElem, e: i64) {
        if e == 0 || b == b.ctx().one() {
            return;
        }
        if let Some(i) = self.factors.iter().position(|(x, _)| *x == b) {
            self.factors[i].1 += e;
            if self.factors[i].1 == 0 {
                self.factors.remove(i);
            }
        } else {
            self.factors.push((b, e));
        }
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn factors(&self) -> &[(CycloElem, i64)] {
        &self.factors
    }

    pub fn is_one(&self) -> bool {
        self.factors.is_empty()
    }

    pub fn mul(&self, o: &FactoredElem) -> Result<FactoredElem> {
        if self.level != o.level {
            return input(format!("level mismatch: {} vs {}", self.level, o.level));
        }
        let mut out = self.clone();
        for (b, e) in &o.factors {
            out.push(b.clone(), *e);
        }
        Ok(out)
    }

    pub fn pow(&self, m: i64) -> FactoredElem {
        let mut out = FactoredElem::one(self.level);
        for (b, e) in &self.factors {
            out.push(b.clone(), e * m);
        }
        out
    }

    pub fn galois(&self, s: &GaloisAuto) -> Result<FactoredElem> {
        let mut out = FactoredElem::one(self.level);
        for (b, e) in &self.factors {
            out.push(b.galois(s)?, *e);
        }
        Ok(out)
    }

    /// Image in Q(ζ_{m·level}).
    pub fn embed(&self, m: u32) -> Result<FactoredElem> {
        let mut out = FactoredElem::one(self.level * m);
        for (b, e) in &self.factors {
            out.push(b.embed(m)?, *e);
        }
        Ok(out)
    }

    pub fn expand(&self) -> Result<CycloElem> {
        let mut acc = Cyclo::new(self.level)?.one();
        for (b, e) in &self.factors {
            acc = &acc * &b.pow(*e)?;
        }
        Ok(acc)
    }

    /// `(v(x), residue of x·p^{-v(x)})` at a split place.
    pub fn local_coords(&self, v: &SplitPlace) -> Result<(i64, u64)> {
        let mut val = 0i64;
        let mut unit = 1u64;
        for (b, e) in &self.factors {
            let (bv, bu) = b.local_data(v)?;
            val += bv * e;
            let u = if *e < 0 { arith::inv_mod(bu, v.p).unwrap() } else { bu };
            unit = arith::mul_mod(unit, arith::pow_mod(u, e.unsigned_abs(), v.p), v.p);
        }
        Ok((val, unit))
    }

    /// Sign of a product of rationals; `None` if some base is irrational.
    pub fn rational_sign(&self) -> Option<i32> {
        let mut s = 1;
        for (b, e) in &self.factors {
            if !b.is_rational() {
                return None;
            }
            if b.coeffs()[0].is_negative() && e % 2 != 0 {
                s = -s;
            }
        }
        Some(s)
    }

    /// Primes dividing the numerator or denominator of some base's norm.
    pub fn norm_primes(&self) -> Result<Vec<u64>> {
        let mut out = Vec::new();
        for (b, _) in &self.factors {
            let nm = b.norm();
            for part in [nm.numer().abs(), nm.denom().abs()] {
                for q in small_prime_factors(&part)? {
                    if !out.contains(&q) {
                        out.push(q);
                    }
                }
            }
        }
        out.sort_unstable();
        Ok(out)
    }
}

fn small_prime_factors(x: &BigInt) -> Result<Vec<u64>> {
    let mut x = x.clone();
    let mut out = Vec::new();
    let mut d = 2u64;
    while !x.is_one() && !x.is_zero() {
        if let Some(small) = x.to_u64() {
            if (d as u128) * (d as u128) > small as u128 {
                out.push(small);
                break;
            }
        }
        if d > 10_000_000 {
            return input("norm has a prime factor beyond the trial-division range");
        }
        let db = BigInt::from(d);
        if (&x % &db).is_zero() {
            out.push(d);
            while (&x % &db).is_zero() {
                x /= &db;
            }
        }
        d += if d == 2 { 1 } else { 2 };
    }
    Ok(out)
}
