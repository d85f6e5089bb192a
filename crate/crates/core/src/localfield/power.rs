//! Local m-th power tests at the places above primes that cannot be handled by
//! residue symbols: the ramified place over the level's prime, and tame places
//! with residue degree above one.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::FactoredElem;
use crate::arith;
use crate::cyclo::{Cyclo, CycloElem};
use crate::error::{input, Result};

/// Largest residue enumeration used to build a power table.
pub const TABLE_LIMIT: u64 = 200_000;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum WildPower {
    /// A unit x with x^m congruent to the unit part modulo λ^prec.
    Power(Vec<i64>),
    NotPower,
    /// The table was too large to build and the congruence shortcut did not apply.
    Unknown,
}

/// Arithmetic in Z[ζ_N] / p^prec, enough to read λ-adic digits to `prec` places.
#[derive(Clone, Debug)]
struct Ring {
    phi: Vec<i64>,
    p: u64,
    modulus: u64,
    prec: u32,
    mu: Vec<u64>,
}

impl Ring {
    fn d(&self) -> usize {
        self.phi.len() - 1
    }

    fn mul(&self, a: &[u64], b: &[u64]) -> Vec<u64> {
        let d = self.d();
        let m = self.modulus as u128;
        let mut c = vec![0u128; 2 * d];
        for (i, &x) in a.iter().enumerate() {
            if x == 0 {
                continue;
            }
            for (j, &y) in b.iter().enumerate() {
                c[i + j] = (c[i + j] + x as u128 * y as u128) % m;
            }
        }
        for k in (d..2 * d).rev() {
            let lead = c[k];
            if lead == 0 {
                continue;
            }
            c[k] = 0;
            for (i, &f) in self.phi[..d].iter().enumerate() {
                if f != 0 {
                    let t = (lead * f.unsigned_abs() as u128) % m;
                    c[k - d + i] = if f > 0 { (c[k - d + i] + m - t) % m } else { (c[k - d + i] + t) % m };
                }
            }
        }
        c[..d].iter().map(|&x| x as u64).collect()
    }

    fn pow(&self, a: &[u64], mut e: u64) -> Vec<u64> {
        let mut acc = self.one();
        let mut b = a.to_vec();
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(&acc, &b);
            }
            b = self.mul(&b, &b);
            e >>= 1;
        }
        acc
    }

    fn one(&self) -> Vec<u64> {
        let mut v = vec![0u64; self.d()];
        v[0] = 1;
        v
    }

    /// First `prec` digits of z in base λ, digits in [0, p).
    fn digits(&self, z: &[u64]) -> Vec<u8> {
        let mut z = z.to_vec();
        let mut m = self.modulus;
        let mut out = Vec::with_capacity(self.prec as usize);
        for _ in 0..self.prec {
            let s = z.iter().fold(0u64, |acc, &x| (acc + x % self.p) % self.p);
            out.push(s as u8);
            z[0] = (z[0] + m - s) % m;
            let w = self.mul(&z, &self.mu);
            m /= self.p;
            z = w.iter().map(|&x| (x / self.p) % m.max(1)).collect();
        }
        out
    }

    fn reduce_elem(&self, x: &CycloElem) -> Option<Vec<u64>> {
        let mb = BigInt::from(self.modulus);
        x.coeffs()
            .iter()
            .map(|a| {
                let den = a.denom().mod_floor(&mb).to_u64()?;
                let inv = arith::inv_mod(den, self.modulus)?;
                let num = a.numer().mod_floor(&mb).to_u64()?;
                Some(arith::mul_mod(num, inv, self.modulus))
            })
            .collect()
    }
}

/// Precomputed m-th powers of units modulo λ^{2v(m)+1} in Q(ζ_N) at λ = 1 - ζ.
#[derive(Clone, Debug)]
pub struct WildTable {
    field_level: u32,
    m: u32,
    ring: Ring,
    mu: CycloElem,
    unit_p: CycloElem,
    table: Option<BTreeMap<Vec<u8>, Vec<u64>>>,
}

impl WildTable {
    pub fn new(field_level: u32, m: u32) -> Result<WildTable> {
        let k = Cyclo::new(field_level)?;
        if field_level % m != 0 || m < 2 {
            return input(alloc::format!("power {m} does not divide the level {field_level}"));
        }
        let p = k.char_prime();
        let e = k.degree() as u32;
        let s = arith::val_u(m as u64, p);
        let prec = 2 * e * s + 1;
        let modulus = p.checked_pow(prec).filter(|&x| x < (1u64 << 62));
        let Some(modulus) = modulus else {
            return input("wild precision exceeds word size");
        };
        let mut mu = k.one();
        for g in k.galois_group().iter().skip(1) {
            mu = &mu * &(&k.one() - &k.zeta_pow(g.t() as i64));
        }
        let unit_p = mu
            .pow(e as i64)?
            .scale(&BigRational::from_integer(BigInt::from(p).pow(e - 1)).recip());
        let mut ring = Ring {
            phi: k.phi().to_vec(),
            p,
            modulus,
            prec,
            mu: Vec::new(),
        };
        ring.mu = ring.reduce_elem(&mu).unwrap();
        let mut t = WildTable {
            field_level,
            m,
            ring,
            mu,
            unit_p,
            table: None,
        };
        let count = (p - 1) * p.pow(e * s);
        if count <= TABLE_LIMIT {
            t.table = Some(t.build(e * s + 1));
        }
        Ok(t)
    }

    fn build(&self, places: u32) -> BTreeMap<Vec<u8>, Vec<u64>> {
        let r = &self.ring;
        let mut lam = r.one();
        lam[1 % r.d().max(1)] = r.modulus - 1;
        if r.d() == 1 {
            lam = vec![2 % r.modulus];
        }
        let mut lam_pows = vec![r.one()];
        for _ in 1..places {
            let last = lam_pows.last().unwrap().clone();
            lam_pows.push(r.mul(&last, &lam));
        }
        let mut out = BTreeMap::new();
        let mut digits = vec![0u64; places as usize];
        digits[0] = 1;
        loop {
            let mut x = vec![0u64; r.d()];
            for (dg, lp) in digits.iter().zip(&lam_pows) {
                for (xi, li) in x.iter_mut().zip(lp) {
                    *xi = (*xi + arith::mul_mod(*dg, *li, r.modulus)) % r.modulus;
                }
            }
            let key = r.digits(&r.pow(&x, self.m as u64));
            out.entry(key).or_insert(x);
            let mut i = 0;
            loop {
                if i == digits.len() {
                    return out;
                }
                digits[i] += 1;
                if digits[i] < r.p {
                    break;
                }
                digits[i] = if i == 0 { 1 } else { 0 };
                i += 1;
            }
        }
    }

    pub fn precision(&self) -> u32 {
        self.ring.prec
    }

    pub fn prime(&self) -> u64 {
        self.ring.p
    }

    /// λ-valuation and unit part (mod p^prec) of a factored element.
    fn unit_part(&self, x: &FactoredElem) -> Result<(i64, Vec<u64>)> {
        if x.level() != self.field_level {
            return input("factored element at the wrong level");
        }
        let r = &self.ring;
        let pb = BigInt::from(r.p);
        let e = (self.field_level as u64 / r.p * (r.p - 1)) as i64;
        let mut val = 0i64;
        let mut acc = r.one();
        for (b, ex) in x.factors() {
            let den = b.denominator();
            let y = b.scale(&BigRational::from_integer(den.clone()));
            let ky = val_big(&y.norm().numer().abs(), &pb) as i64;
            let j = val_big(&den, &pb) as i64;
            let dprime = &den / pb.pow(j as u32);
            let mut u = &y * &self.mu.pow(ky)?;
            u = u.scale(&BigRational::new(BigInt::one(), pb.pow(ky as u32) * dprime));
            u = &u * &self.unit_p.pow(-j)?;
            val += ex * (ky - e * j);
            let u = if *ex < 0 { u.inv()? } else { u };
            let red = r.reduce_elem(&u).expect("unit part is p-integral");
            acc = r.mul(&acc, &r.pow(&red, ex.unsigned_abs()));
        }
        Ok((val, acc))
    }

    pub fn test(&self, x: &FactoredElem) -> Result<WildPower> {
        let (val, u) = self.unit_part(x)?;
        if val.rem_euclid(self.m as i64) != 0 {
            return Ok(WildPower::NotPower);
        }
        let key = self.ring.digits(&u);
        match &self.table {
            Some(t) => Ok(match t.get(&key) {
                Some(w) => WildPower::Power(signed(w, self.ring.modulus)),
                None => WildPower::NotPower,
            }),
            None => {
                if key == self.ring.digits(&self.ring.one()) {
                    Ok(WildPower::Power(signed(&self.ring.one(), self.ring.modulus)))
                } else {
                    Ok(WildPower::Unknown)
                }
            }
        }
    }
}

fn signed(v: &[u64], m: u64) -> Vec<i64> {
    v.iter()
        .map(|&x| if x > m / 2 { x as i64 - m as i64 } else { x as i64 })
        .collect()
}

fn val_big(x: &BigInt, p: &BigInt) -> u32 {
    let mut x = x.clone();
    let mut v = 0;
    while !x.is_zero() && (&x % p).is_zero() {
        x /= p;
        v += 1;
    }
    v
}

/// Checks x^m ≡ u mod λ^prec for a λ-unit u, by exact arithmetic.
pub fn check_wild_witness(u: &CycloElem, x: &CycloElem, m: u32, prec: u32) -> Result<bool> {
    let k = u.ctx();
    let p = k.char_prime();
    let pb = BigInt::from(p);
    let mut mu = k.one();
    for g in k.galois_group().iter().skip(1) {
        mu = &mu * &(&k.one() - &k.zeta_pow(g.t() as i64));
    }
    let diff = u - &x.pow(m as i64)?;
    let z = &diff * &mu.pow(prec as i64)?;
    let target = pb.pow(prec);
    Ok(z.coeffs().iter().all(|a| {
        !(a.denom() % &pb).is_zero() && (a.numer() % &target).is_zero()
    }) && !(x.norm().numer() % &pb).is_zero())
}

/// Whether x is an m-th power at every place above a prime q ∤ N.
pub fn tame_power_at(x: &FactoredElem, q: u64, m: u32) -> Result<bool> {
    let k = Cyclo::new(x.level())?;
    let n = k.n() as u64;
    if q % k.char_prime() == 0 || !arith::is_prime(q) {
        return input(alloc::format!("{q} is not a tame prime for level {n}"));
    }
    if n % m as u64 != 0 {
        return input(alloc::format!("power {m} does not divide the level {n}"));
    }
    let f = arith::mult_order(q % n, n).unwrap();
    let qf = (q as u128).pow(f as u32);
    let exp = (qf - 1) / m as u128;
    let phi = k.phi();
    let d = k.degree();
    let mut acc = vec![0u64; d];
    acc[0] = 1;
    let qb = BigInt::from(q);
    for (b, e) in x.factors() {
        let nm = b.norm();
        if (nm.numer() % &qb).is_zero() || (nm.denom() % &qb).is_zero() {
            return Ok(false);
        }
        let mut red = Vec::with_capacity(d);
        for a in b.coeffs() {
            let den = a.denom().mod_floor(&qb).to_u64().unwrap();
            let Some(inv) = arith::inv_mod(den, q) else {
                return Ok(false);
            };
            red.push(arith::mul_mod(a.numer().mod_floor(&qb).to_u64().unwrap(), inv, q));
        }
        let t = fq_pow(&red, exp, phi, q);
        let t = fq_pow(&t, e.rem_euclid(m as i64) as u128, phi, q);
        acc = fq_mul(&acc, &t, phi, q);
    }
    let mut one = vec![0u64; d];
    one[0] = 1;
    Ok(acc == one)
}

fn fq_mul(a: &[u64], b: &[u64], phi: &[i64], q: u64) -> Vec<u64> {
    let d = phi.len() - 1;
    let mut c = vec![0u64; 2 * d];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            c[i + j] = (c[i + j] + arith::mul_mod(x, y, q)) % q;
        }
    }
    for k in (d..2 * d).rev() {
        let lead = c[k];
        if lead == 0 {
            continue;
        }
        c[k] = 0;
        for (i, &f) in phi[..d].iter().enumerate() {
            let t = arith::mul_mod(lead, arith::reduce_i(f as i128, q), q);
            c[k - d + i] = (c[k - d + i] + q - t) % q;
        }
    }
    c.truncate(d);
    c
}

fn fq_pow(a: &[u64], mut e: u128, phi: &[i64], q: u64) -> Vec<u64> {
    let d = phi.len() - 1;
    let mut acc = vec![0u64; d];
    acc[0] = 1;
    let mut b = a.to_vec();
    while e > 0 {
        if e & 1 == 1 {
            acc = fq_mul(&acc, &b, phi, q);
        }
        b = fq_mul(&b, &b, phi, q);
        e >>= 1;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fe(x: CycloElem) -> FactoredElem {
        FactoredElem::from_base(x).unwrap()
    }

    #[test]
    fn two_adic_squares_of_integers() {
        let t = WildTable::new(2, 2).unwrap();
        let k = Cyclo::new(2).unwrap();
        for a in 1i64..200 {
            let odd = a >> a.trailing_zeros();
            let expect = a.trailing_zeros() % 2 == 0 && odd % 8 == 1;
            let got = matches!(t.test(&fe(k.from_int(a))).unwrap(), WildPower::Power(_));
            assert_eq!(got, expect, "{a}");
        }
        assert_eq!(t.test(&fe(k.from_int(-7))).unwrap(), WildPower::Power(vec![1]));
    }

    #[test]
    fn three_adic_cubes_of_integers() {
        let t = WildTable::new(3, 3).unwrap();
        let k = Cyclo::new(3).unwrap();
        for a in 1i64..100 {
            if a % 3 == 0 {
                continue;
            }
            let expect = a % 9 == 1 || a % 9 == 8;
            let got = matches!(t.test(&fe(k.from_int(a))).unwrap(), WildPower::Power(_));
            assert_eq!(got, expect, "{a}");
        }
    }

    #[test]
    fn cubes_are_cubes_and_witnesses_check() {
        let t = WildTable::new(3, 3).unwrap();
        let k = Cyclo::new(3).unwrap();
        for a in -5i64..=5 {
            for b in -5i64..=5 {
                let x = k.from_ints(&[a, b]).unwrap();
                if x.is_zero() {
                    continue;
                }
                let c = fe(x.clone()).pow(3);
                assert!(matches!(t.test(&c).unwrap(), WildPower::Power(_)), "{a} {b}");
                if let WildPower::Power(w) = t.test(&fe(x.clone())).unwrap() {
                    let wx = k.from_ints(&w).unwrap();
                    assert!(check_wild_witness(&x, &wx, 3, t.precision()).unwrap());
                }
            }
        }
        assert_eq!(t.test(&fe(k.one() - k.zeta())).unwrap(), WildPower::NotPower);
        assert_eq!(t.test(&fe(k.zeta())).unwrap(), WildPower::NotPower);
    }

    #[test]
    fn fourth_powers_in_gaussian_field() {
        let t = WildTable::new(4, 4).unwrap();
        let t2 = WildTable::new(4, 2).unwrap();
        let k = Cyclo::new(4).unwrap();
        for a in -6i64..=6 {
            for b in -6i64..=6 {
                let x = k.from_ints(&[a, b]).unwrap();
                if x.is_zero() {
                    continue;
                }
                assert!(matches!(t.test(&fe(x.clone()).pow(4)).unwrap(), WildPower::Power(_)));
                assert!(matches!(t2.test(&fe(x.clone()).pow(2)).unwrap(), WildPower::Power(_)));
                if matches!(t.test(&fe(x.clone())).unwrap(), WildPower::Power(_)) {
                    assert!(matches!(t2.test(&fe(x)).unwrap(), WildPower::Power(_)));
                }
            }
        }
        // -4 = (1+i)^4 is a fourth power; i is not even a square 2-adically in Q_2(i)
        assert!(matches!(t.test(&fe(k.from_int(-4))).unwrap(), WildPower::Power(_)));
        assert_eq!(t2.test(&fe(k.zeta())).unwrap(), WildPower::NotPower);
    }

    #[test]
    fn large_tables_fall_back() {
        let t = WildTable::new(9, 9).unwrap();
        let k = Cyclo::new(9).unwrap();
        assert_eq!(t.test(&fe(k.zeta())).unwrap(), WildPower::Unknown);
        assert!(matches!(t.test(&fe(k.one())).unwrap(), WildPower::Power(_)));
    }

    #[test]
    fn tame_powers_match_residue_criterion() {
        let k = Cyclo::new(4).unwrap();
        // 3 is inert in Q(i); residue field F_9
        for a in -4i64..=4 {
            for b in -4i64..=4 {
                let x = k.from_ints(&[a, b]).unwrap();
                if x.is_zero() || (x.norm().numer() % BigInt::from(3)).is_zero() {
                    continue;
                }
                let sq = tame_power_at(&fe(x.clone()).pow(2), 3, 2).unwrap();
                assert!(sq);
                let f4 = tame_power_at(&fe(x.clone()).pow(4), 3, 4).unwrap();
                assert!(f4);
            }
        }
        assert!(!tame_power_at(&fe(k.zeta()), 3, 4).unwrap());
        // every rational unit is a square in F_9
        assert!(tame_power_at(&fe(k.from_int(2)), 3, 2).unwrap());
        let k3 = Cyclo::new(3).unwrap();
        // 2 is inert in Q(ζ_3), residue field F_4 whose cubes are {1}
        assert!(!tame_power_at(&fe(k3.zeta()), 2, 3).unwrap());
        assert!(tame_power_at(&fe(k3.from_int(5)), 2, 3).unwrap());
    }
}
