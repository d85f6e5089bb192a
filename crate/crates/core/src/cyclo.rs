//! Exact arithmetic in Q(ζ_n) for prime-power n, in the power basis.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::arith;
use crate::error::{input, Error, Result};

/// The field Q(ζ_n) together with its defining polynomial.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cyclo {
    n: u32,
    p: u64,
    r: u32,
    phi: Vec<i64>,
}

pub fn cyclotomic_poly(n: u64) -> Result<Vec<i64>> {
    let (p, r) = match arith::prime_power(n) {
        Some(pr) if n >= 2 => pr,
        _ => return input(format!("level {n} is not a prime power >= 2")),
    };
    let m = p.pow(r - 1) as usize;
    let mut c = vec![0i64; (p as usize - 1) * m + 1];
    for i in 0..p as usize {
        c[i * m] = 1;
    }
    Ok(c)
}

impl Cyclo {
    pub fn new(n: u32) -> Result<Cyclo> {
        let phi = cyclotomic_poly(n as u64)?;
        let (p, r) = arith::prime_power(n as u64).unwrap();
        Ok(Cyclo { n, p, r, phi })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    /// The prime dividing n.
    pub fn char_prime(&self) -> u64 {
        self.p
    }

    pub fn exponent(&self) -> u32 {
        self.r
    }

    pub fn degree(&self) -> usize {
        self.phi.len() - 1
    }

    pub fn phi(&self) -> &[i64] {
        &self.phi
    }

    pub fn zero(&self) -> CycloElem {
        CycloElem {
            n: self.n,
            c: vec![BigRational::zero(); self.degree()],
        }
    }

    pub fn one(&self) -> CycloElem {
        self.from_int(1)
    }

    pub fn from_int(&self, a: i64) -> CycloElem {
        self.from_rational(BigRational::from_integer(a.into()))
    }

    pub fn from_rational(&self, a: BigRational) -> CycloElem {
        let mut z = self.zero();
        z.c[0] = a;
        z
    }

    /// ζ^k for any integer k.
    pub fn zeta_pow(&self, k: i64) -> CycloElem {
        let k = k.rem_euclid(self.n as i64) as usize;
        let mut c = vec![BigRational::zero(); self.n as usize];
        c[k] = BigRational::one();
        self.reduce(c)
    }

    pub fn zeta(&self) -> CycloElem {
        self.zeta_pow(1)
    }

    pub fn from_ints(&self, coeffs: &[i64]) -> Result<CycloElem> {
        self.from_coeffs(coeffs.iter().map(|&a| BigRational::from_integer(a.into())).collect())
    }

    /// Reduces an arbitrary-length coefficient list mod Φ_n.
    pub fn from_coeffs(&self, coeffs: Vec<BigRational>) -> Result<CycloElem> {
        Ok(self.reduce(coeffs))
    }

    fn reduce(&self, mut c: Vec<BigRational>) -> CycloElem {
        let d = self.degree();
        let m = self.p.pow(self.r - 1) as usize;
        if c.len() < d {
            c.resize(d, BigRational::zero());
        }
        for k in (d..c.len()).rev() {
            if c[k].is_zero() {
                continue;
            }
            let lead = core::mem::take(&mut c[k]);
            for i in 0..(self.p as usize - 1) {
                c[k - d + i * m] -= &lead;
            }
        }
        c.truncate(d);
        CycloElem { n: self.n, c }
    }

    pub fn galois(&self, t: i64) -> Result<GaloisAuto> {
        GaloisAuto::new(t, self.n)
    }

    /// All automorphisms σ_t, t in increasing order.
    pub fn galois_group(&self) -> Vec<GaloisAuto> {
        (1..self.n as u64)
            .filter(|&t| arith::gcd(t, self.n as u64) == 1)
            .map(|t| GaloisAuto { t: t as u32, n: self.n })
            .collect()
    }

    /// Roots of Φ_n mod p in increasing order.
    pub fn roots_mod(&self, p: u64) -> Vec<u64> {
        let n = self.n as u64;
        if p % n != 1 || !arith::is_prime(p) {
            return (0..p).filter(|&w| eval_int_poly(&self.phi, w, p) == 0).collect();
        }
        let w = (2..p)
            .map(|g| arith::pow_mod(g, (p - 1) / n, p))
            .find(|&w| arith::mult_order(w, p) == Some(n))
            .unwrap();
        let mut out: Vec<u64> = (1..n)
            .filter(|&k| arith::gcd(k, n) == 1)
            .map(|k| arith::pow_mod(w, k, p))
            .collect();
        out.sort_unstable();
        out
    }

    pub fn split_place(&self, p: u64) -> Result<SplitPlace> {
        self.places_above(p)?
            .into_iter()
            .next()
            .ok_or_else(|| Error::Input(format!("Φ_{} has no root mod {p}", self.n)))
    }

    /// Every place above a split prime, ordered by root.
    pub fn places_above(&self, p: u64) -> Result<Vec<SplitPlace>> {
        if !arith::is_prime(p) {
            return input(format!("{p} is not prime"));
        }
        if p % self.n as u64 != 1 {
            if self.p == p {
                return input(format!("{p} divides the level {}", self.n));
            }
            return input(format!("{p} is not 1 mod {}", self.n));
        }
        Ok(self
            .roots_mod(p)
            .into_iter()
            .map(|omega| SplitPlace { n: self.n, p, omega })
            .collect())
    }

    /// Elements of norm ±p with coordinates in [-bound, bound], in the canonical order.
    pub fn norm_solutions(&self, p: u64, bound: i64) -> Result<Vec<CycloElem>> {
        if p % self.n as u64 != 1 || !arith::is_prime(p) {
            return input(format!("{p} does not split completely in Q(ζ_{})", self.n));
        }
        if bound < 1 {
            return input("coefficient bound must be at least 1");
        }
        let d = self.degree();
        let target = BigInt::from(p);
        let mut found: Vec<Vec<i64>> = Vec::new();
        for place in self.places_above(p)? {
            let pw: Vec<u64> = (0..d).map(|i| arith::pow_mod(place.omega, i as u64, p)).collect();
            let mut tail = vec![-bound; d - 1];
            loop {
                let mut s: i128 = 0;
                for (i, &ci) in tail.iter().enumerate() {
                    s += ci as i128 * pw[i + 1] as i128;
                }
                let r = arith::reduce_i(-s, p) as i64;
                let mut c0 = r - ((r + bound) / p as i64) * p as i64;
                while c0 <= bound {
                    if c0 >= -bound {
                        let mut v = vec![c0];
                        v.extend_from_slice(&tail);
                        let hit = match self.int_norm(&v) {
                            Some(nv) => nv.unsigned_abs() == p as u128,
                            None => self.from_ints(&v)?.norm().numer().abs() == target,
                        };
                        if hit && !found.contains(&v) {
                            found.push(v);
                        }
                    }
                    c0 += p as i64;
                }
                if !odometer(&mut tail, bound) {
                    break;
                }
            }
        }
        found.sort_by(|a, b| canonical_cmp(a, b));
        found.iter().map(|v| self.from_ints(v)).collect()
    }

    /// Norm of an integral element with small coordinates, if i128 suffices.
    fn int_norm(&self, v: &[i64]) -> Option<i128> {
        let n = self.n as usize;
        let mut acc = vec![0i128; n];
        acc[0] = 1;
        for g in self.galois_group() {
            let mut conj = vec![0i128; n];
            for (i, &c) in v.iter().enumerate() {
                conj[(i * g.t as usize) % n] += c as i128;
            }
            let mut next = vec![0i128; n];
            for (i, &a) in acc.iter().enumerate().filter(|x| *x.1 != 0) {
                for (j, &b) in conj.iter().enumerate().filter(|x| *x.1 != 0) {
                    let k = (i + j) % n;
                    next[k] = next[k].checked_add(a.checked_mul(b)?)?;
                }
            }
            acc = next;
        }
        let d = self.degree();
        let step = n / self.p as usize;
        for k in (d..n).rev() {
            let c = acc[k];
            if c == 0 {
                continue;
            }
            acc[k] = 0;
            for i in 0..self.p as usize - 1 {
                let j = k - d + i * step;
                acc[j] = acc[j].checked_sub(c)?;
            }
        }
        if acc[1..d].iter().any(|c| *c != 0) {
            return None;
        }
        Some(acc[0])
    }

    /// Smallest solution of |N(x)| = p under the canonical order.
    pub fn solve_norm_equation(&self, p: u64, bound: i64) -> Result<Option<CycloElem>> {
        Ok(self.norm_solutions(p, bound)?.into_iter().next())
    }

    /// Roots of unity ±ζ^k, deduplicated, starting with 1.
    pub fn roots_of_unity(&self) -> Vec<CycloElem> {
        let mut out: Vec<CycloElem> = Vec::new();
        for sign in [1i64, -1] {
            for k in 0..self.n as i64 {
                let u = self.zeta_pow(k).scale_int(sign);
                if !out.contains(&u) {
                    out.push(u);
                }
            }
        }
        out
    }

    /// Cyclotomic units (1 - ζ^a)/(1 - ζ) for 1 < a < n/2 coprime to n.
    pub fn cyclotomic_units(&self) -> Vec<CycloElem> {
        let n = self.n as i64;
        let lam = self.one() - self.zeta();
        let lam_inv = lam.inv().expect("1 - ζ is nonzero");
        (2..)
            .take_while(|&a| 2 * a < n)
            .filter(|&a| arith::gcd(a as u64, n as u64) == 1)
            .map(|a| (self.one() - self.zeta_pow(a)) * lam_inv.clone())
            .collect()
    }

    pub fn is_totally_positive(&self, x: &CycloElem) -> (bool, &'static str) {
        if self.n <= 2 {
            (x.c[0].is_positive(), "real embedding")
        } else {
            (true, "totally imaginary")
        }
    }
}

/// Advances a counter over [-b, b]^k; false once it wraps.
fn odometer(v: &mut [i64], b: i64) -> bool {
    for x in v.iter_mut() {
        if *x < b {
            *x += 1;
            return true;
        }
        *x = -b;
    }
    false
}

fn coeff_key(c: i64) -> (u8, u64) {
    if c >= 0 {
        (0, c as u64)
    } else {
        (1, c.unsigned_abs())
    }
}

/// Compare from the top coefficient down; nonnegative values precede negative ones.
pub fn canonical_cmp(a: &[i64], b: &[i64]) -> Ordering {
    for (x, y) in a.iter().rev().zip(b.iter().rev()) {
        match coeff_key(*x).cmp(&coeff_key(*y)) {
            Ordering::Equal => continue,
            o => return o,
        }
    }
    Ordering::Equal
}

pub(crate) fn eval_int_poly(c: &[i64], x: u64, p: u64) -> u64 {
    let mut acc = 0u64;
    for &a in c.iter().rev() {
        acc = (arith::mul_mod(acc, x, p) + arith::reduce_i(a as i128, p)) % p;
    }
    acc
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GaloisAuto {
    t: u32,
    n: u32,
}

impl GaloisAuto {
    pub fn new(t: i64, n: u32) -> Result<GaloisAuto> {
        let t = t.rem_euclid(n as i64) as u64;
        if arith::gcd(t, n as u64) != 1 {
            return input(format!("{t} is not a unit mod {n}"));
        }
        Ok(GaloisAuto { t: t as u32, n })
    }

    pub fn t(&self) -> u32 {
        self.t
    }

    pub fn compose(&self, other: &GaloisAuto) -> GaloisAuto {
        GaloisAuto {
            t: ((self.t as u64 * other.t as u64) % self.n as u64) as u32,
            n: self.n,
        }
    }

    pub fn inverse(&self) -> GaloisAuto {
        let t = arith::inv_mod(self.t as u64, self.n as u64).unwrap();
        GaloisAuto { t: t as u32, n: self.n }
    }
}

/// An element of Q(ζ_n), fully reduced.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CycloElem {
    n: u32,
    c: Vec<BigRational>,
}

impl CycloElem {
    pub fn level(&self) -> u32 {
        self.n
    }

    pub fn ctx(&self) -> Cyclo {
        Cyclo::new(self.n).unwrap()
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.c
    }

    pub fn is_zero(&self) -> bool {
        self.c.iter().all(|a| a.is_zero())
    }

    pub fn is_integral(&self) -> bool {
        self.c.iter().all(|a| a.is_integer())
    }

    pub fn is_rational(&self) -> bool {
        self.c.iter().skip(1).all(|a| a.is_zero())
    }

    /// Integer coordinates, if integral and each fits in i64.
    pub fn int_coeffs(&self) -> Option<Vec<i64>> {
        self.c
            .iter()
            .map(|a| if a.is_integer() { a.numer().to_i64() } else { None })
            .collect()
    }

    /// Least common denominator of the coordinates.
    pub fn denominator(&self) -> BigInt {
        self.c
            .iter()
            .fold(BigInt::one(), |acc, a| acc.lcm(a.denom()))
    }

    fn check(&self, o: &CycloElem) -> Result<()> {
        if self.n != o.n {
            return input(format!("context mismatch: level {} vs {}", self.n, o.n));
        }
        Ok(())
    }

    pub fn checked_add(&self, o: &CycloElem) -> Result<CycloElem> {
        self.check(o)?;
        Ok(self + o)
    }

    pub fn checked_mul(&self, o: &CycloElem) -> Result<CycloElem> {
        self.check(o)?;
        Ok(self * o)
    }

    pub fn scale(&self, k: &BigRational) -> CycloElem {
        CycloElem {
            n: self.n,
            c: self.c.iter().map(|a| a * k).collect(),
        }
    }

    pub fn scale_int(&self, k: i64) -> CycloElem {
        self.scale(&BigRational::from_integer(k.into()))
    }

    /// σ_t applied coefficientwise: ζ^i ↦ ζ^{ti}.
    pub fn galois(&self, s: &GaloisAuto) -> Result<CycloElem> {
        if s.n != self.n {
            return input(format!("automorphism of level {} applied at level {}", s.n, self.n));
        }
        let n = self.n as usize;
        let mut c = vec![BigRational::zero(); n];
        for (i, a) in self.c.iter().enumerate() {
            c[(i * s.t as usize) % n] += a;
        }
        Ok(self.ctx().reduce(c))
    }

    pub fn conjugates(&self) -> Vec<CycloElem> {
        self.ctx()
            .galois_group()
            .iter()
            .map(|s| self.galois(s).unwrap())
            .collect()
    }

    /// N_{L/Q}(x) as the product of all conjugates.
    pub fn norm(&self) -> BigRational {
        let mut acc = self.ctx().one();
        for c in self.conjugates() {
            acc = &acc * &c;
        }
        acc.c[0].clone()
    }

    pub fn inv(&self) -> Result<CycloElem> {
        if self.is_zero() {
            return input("inverse of zero");
        }
        let ctx = self.ctx();
        let mut acc = ctx.one();
        for c in self.conjugates().into_iter().skip(1) {
            acc = &acc * &c;
        }
        let nm = (&acc * self).c[0].clone();
        Ok(acc.scale(&nm.recip()))
    }

    pub fn pow(&self, e: i64) -> Result<CycloElem> {
        let mut base = if e < 0 { self.inv()? } else { self.clone() };
        let mut e = e.unsigned_abs();
        let mut acc = self.ctx().one();
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            base = &base * &base;
            e >>= 1;
        }
        Ok(acc)
    }

    /// Image under Q(ζ_n) → Q(ζ_{mn}), ζ_n ↦ ζ_{mn}^m.
    pub fn embed(&self, m: u32) -> Result<CycloElem> {
        let big = Cyclo::new(self.n * m)?;
        let mut c = vec![BigRational::zero(); (self.n * m) as usize];
        for (i, a) in self.c.iter().enumerate() {
            c[i * m as usize] = a.clone();
        }
        big.from_coeffs(c)
    }

    /// Evaluation at ω mod p; `(residue, residue == 0)`.
    pub fn reduce_at(&self, v: &SplitPlace) -> Result<(u64, bool)> {
        if v.n != self.n {
            return input(format!("place of level {} used at level {}", v.n, self.n));
        }
        let p = v.p;
        let pb = BigInt::from(p);
        let mut acc = 0u64;
        let mut w = 1u64;
        for a in &self.c {
            if (a.denom() % &pb).is_zero() {
                return input(format!("{p} divides a coordinate denominator"));
            }
            let num = (a.numer() % &pb + &pb) % &pb;
            let den = (a.denom() % &pb + &pb) % &pb;
            let num = num.to_u64().unwrap();
            let den = arith::inv_mod(den.to_u64().unwrap(), p).unwrap();
            acc = (acc + arith::mul_mod(arith::mul_mod(num, den, p), w, p)) % p;
            w = arith::mul_mod(w, v.omega, p);
        }
        Ok((acc, acc == 0))
    }

    /// Exact valuation at `v` and the residue of x / p^val.
    pub fn local_data(&self, v: &SplitPlace) -> Result<(i64, u64)> {
        if v.n != self.n {
            return input(format!("place of level {} used at level {}", v.n, self.n));
        }
        if self.is_zero() {
            return input("valuation of zero");
        }
        let p = v.p;
        let pb = BigInt::from(p);
        let den = self.denominator();
        let (dval, den_unit) = split_p(&den, &pb);
        let y: Vec<BigInt> = self
            .c
            .iter()
            .map(|a| a.numer() * (&den / a.denom()))
            .collect();
        let yel = self.scale(&BigRational::from_integer(den.clone()));
        let nm = yel.norm().numer().abs();
        let (nval, _) = split_p(&nm, &pb);
        let (val, unit) = if nval == 0 {
            (0, eval_mod(&y, &BigInt::from(v.omega), &pb))
        } else {
            let k = nval + 1;
            let modulus = pb.pow(k);
            let root = hensel_lift(&self.ctx().phi, v.omega, p, k);
            let mut e = eval_mod(&y, &root, &modulus);
            let mut val = 0u32;
            while (&e % &pb).is_zero() {
                e /= &pb;
                val += 1;
            }
            (val, e % &pb)
        };
        let unit = unit.to_u64().unwrap();
        let du = (den_unit % &pb + &pb) % &pb;
        let du = arith::inv_mod(du.to_u64().unwrap(), p).unwrap();
        Ok((val as i64 - dval as i64, arith::mul_mod(unit, du, p)))
    }

    pub fn to_string_poly(&self) -> String {
        let parts: Vec<String> = self.c.iter().map(|a| format!("{a}")).collect();
        format!("[{}]", parts.join(", "))
    }
}

fn split_p(x: &BigInt, p: &BigInt) -> (u32, BigInt) {
    let mut x = x.clone();
    let mut v = 0;
    while !x.is_zero() && (&x % p).is_zero() {
        x /= p;
        v += 1;
    }
    (v, x)
}

fn eval_mod(c: &[BigInt], x: &BigInt, m: &BigInt) -> BigInt {
    let mut acc = BigInt::zero();
    for a in c.iter().rev() {
        acc = (acc * x + a).mod_floor(m);
    }
    acc
}

/// Lifts a simple root ω of Φ mod p to a root mod p^k.
fn hensel_lift(phi: &[i64], omega: u64, p: u64, k: u32) -> BigInt {
    let m = BigInt::from(p).pow(k);
    let f: Vec<BigInt> = phi.iter().map(|&a| BigInt::from(a)).collect();
    let df: Vec<BigInt> = f.iter().enumerate().skip(1).map(|(i, a)| a * i).collect();
    let mut x = BigInt::from(omega);
    for _ in 0..=k {
        let fx = eval_mod(&f, &x, &m);
        if fx.is_zero() {
            break;
        }
        let dfx = eval_mod(&df, &x, &m);
        let inv = mod_inverse(&dfx, &m);
        x = (x - fx * inv).mod_floor(&m);
    }
    x
}

fn mod_inverse(a: &BigInt, m: &BigInt) -> BigInt {
    let e = a.extended_gcd(m);
    e.x.mod_floor(m)
}

impl Add for &CycloElem {
    type Output = CycloElem;
    fn add(self, o: &CycloElem) -> CycloElem {
        assert_eq!(self.n, o.n, "context mismatch");
        CycloElem {
            n: self.n,
            c: self.c.iter().zip(&o.c).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &CycloElem {
    type Output = CycloElem;
    fn sub(self, o: &CycloElem) -> CycloElem {
        assert_eq!(self.n, o.n, "context mismatch");
        CycloElem {
            n: self.n,
            c: self.c.iter().zip(&o.c).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Mul for &CycloElem {
    type Output = CycloElem;
    fn mul(self, o: &CycloElem) -> CycloElem {
        assert_eq!(self.n, o.n, "context mismatch");
        let d = self.c.len();
        let mut c = vec![BigRational::zero(); 2 * d];
        for (i, a) in self.c.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in o.c.iter().enumerate() {
                if !b.is_zero() {
                    c[i + j] += a * b;
                }
            }
        }
        self.ctx().reduce(c)
    }
}

impl Neg for &CycloElem {
    type Output = CycloElem;
    fn neg(self) -> CycloElem {
        CycloElem {
            n: self.n,
            c: self.c.iter().map(|a| -a).collect(),
        }
    }
}

macro_rules! owned_ops {
    ($tr:ident, $m:ident) => {
        impl $tr for CycloElem {
            type Output = CycloElem;
            fn $m(self, o: CycloElem) -> CycloElem {
                (&self).$m(&o)
            }
        }
    };
}
owned_ops!(Add, add);
owned_ops!(Sub, sub);
owned_ops!(Mul, mul);

impl Neg for CycloElem {
    type Output = CycloElem;
    fn neg(self) -> CycloElem {
        -&self
    }
}

/// A place of Q(ζ_n) above a prime p ≡ 1 mod n, fixed by the image ω of ζ.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SplitPlace {
    pub n: u32,
    pub p: u64,
    pub omega: u64,
}

impl SplitPlace {
    /// The place σ_t(v): x vanishes at σ_t v iff σ_t⁻¹ x vanishes at v.
    pub fn conjugate(&self, s: &GaloisAuto) -> SplitPlace {
        let ti = arith::inv_mod(s.t() as u64, self.n as u64).unwrap();
        SplitPlace {
            n: self.n,
            p: self.p,
            omega: arith::pow_mod(self.omega, ti, self.p),
        }
    }

    /// The same prime seen at a level dividing n.
    pub fn restrict(&self, level: u32) -> SplitPlace {
        assert!(self.n % level == 0);
        SplitPlace {
            n: level,
            p: self.p,
            omega: arith::pow_mod(self.omega, (self.n / level) as u64, self.p),
        }
    }
}
