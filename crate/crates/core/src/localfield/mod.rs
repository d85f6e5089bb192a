//! Local symbols with values in (1/n)Z/Z and their global bookkeeping.

mod factored;
pub mod power;

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

pub use factored::FactoredElem;
pub use power::{WildPower, WildTable};

use crate::arith;
use crate::cyclo::{Cyclo, SplitPlace};
use crate::error::{input, Result};

/// An element k/n of (1/n)Z/Z.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct LocalInvariant {
    num: u32,
    level: u32,
}

impl LocalInvariant {
    pub fn new(num: i64, level: u32) -> LocalInvariant {
        LocalInvariant {
            num: num.rem_euclid(level as i64) as u32,
            level,
        }
    }

    pub fn zero(level: u32) -> LocalInvariant {
        LocalInvariant::new(0, level)
    }

    pub fn num(&self) -> u32 {
        self.num
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn is_zero(&self) -> bool {
        self.num == 0
    }

    pub fn add(&self, o: &LocalInvariant) -> LocalInvariant {
        assert_eq!(self.level, o.level, "invariant level mismatch");
        LocalInvariant::new(self.num as i64 + o.num as i64, self.level)
    }

    pub fn neg(&self) -> LocalInvariant {
        LocalInvariant::new(-(self.num as i64), self.level)
    }

    pub fn scale(&self, m: i64) -> LocalInvariant {
        LocalInvariant::new(self.num as i64 * m, self.level)
    }

    pub fn order(&self) -> u32 {
        self.level / arith::gcd(self.num as u64, self.level as u64) as u32
    }

    /// Lowest-terms fraction, for comparison in Q/Z.
    pub fn reduced(&self) -> (u32, u32) {
        if self.num == 0 {
            return (0, 1);
        }
        let g = arith::gcd(self.num as u64, self.level as u64) as u32;
        (self.num / g, self.level / g)
    }

    pub fn eq_qz(&self, o: &LocalInvariant) -> bool {
        self.reduced() == o.reduced()
    }

    /// The same element of Q/Z written with denominator `level`, if possible.
    pub fn at_level(&self, level: u32) -> Option<LocalInvariant> {
        let (a, b) = self.reduced();
        if level % b != 0 {
            return None;
        }
        Some(LocalInvariant::new((a * (level / b)) as i64, level))
    }
}

impl fmt::Display for LocalInvariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.level)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Place {
    Real,
    /// The unique place above the prime dividing the level.
    Wild(u64),
    Split(SplitPlace),
}

impl Place {
    pub fn sort_key(&self) -> (u64, u8, u64) {
        match self {
            Place::Real => (0, 0, 0),
            Place::Wild(p) => (*p, 1, 0),
            Place::Split(v) => (v.p, 2, v.omega),
        }
    }

    pub fn label(&self) -> String {
        match self {
            Place::Real => String::from("inf"),
            Place::Wild(p) => format!("{p}:wild"),
            Place::Split(v) => format!("{}:{}", v.p, v.omega),
        }
    }
}

impl PartialOrd for Place {
    fn partial_cmp(&self, o: &Place) -> Option<core::cmp::Ordering> {
        Some(self.cmp(o))
    }
}

impl Ord for Place {
    fn cmp(&self, o: &Place) -> core::cmp::Ordering {
        self.sort_key().cmp(&o.sort_key())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Source {
    Tame,
    Real,
    /// One argument is a local power, so the symbol vanishes.
    Power,
    /// Determined by the other entries through the product formula.
    Inferred,
}

impl Source {
    pub fn name(&self) -> &'static str {
        match self {
            Source::Tame => "tame",
            Source::Real => "real",
            Source::Power => "power",
            Source::Inferred => "inferred",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReportEntry {
    pub place: Place,
    pub inv: LocalInvariant,
    pub source: Source,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ObstructionReport {
    pub level: u32,
    pub entries: Vec<ReportEntry>,
    pub global_order: u32,
}

impl ObstructionReport {
    pub fn get(&self, place: &Place) -> Option<&ReportEntry> {
        self.entries.iter().find(|e| e.place == *place)
    }

    pub fn sum(&self) -> LocalInvariant {
        self.entries
            .iter()
            .fold(LocalInvariant::zero(self.level), |acc, e| acc.add(&e.inv))
    }

    pub fn has_inferred(&self) -> bool {
        self.entries.iter().any(|e| e.source == Source::Inferred)
    }
}

pub fn local_valuation(x: &FactoredElem, v: &SplitPlace) -> Result<i64> {
    Ok(x.local_coords(v)?.0)
}

/// The place restricted to the symbol's level, with ω replaced by ω^{N/level}.
fn symbol_root(v: &SplitPlace, level: u32) -> Result<u64> {
    if level < 2 || v.n % level != 0 {
        return input(format!("symbol level {level} does not divide field level {}", v.n));
    }
    Ok(v.restrict(level).omega)
}

/// Tame symbol from local coordinates (valuation, unit residue) of both arguments.
pub fn tame_from_coords(a: (i64, u64), b: (i64, u64), v: &SplitPlace, level: u32) -> Result<LocalInvariant> {
    let p = v.p;
    let w = symbol_root(v, level)?;
    let (alpha, ua) = a;
    let (beta, ub) = b;
    let pw = |u: u64, e: i64| {
        let u = if e < 0 { arith::inv_mod(u, p).unwrap() } else { u };
        arith::pow_mod(u, e.unsigned_abs(), p)
    };
    let mut r = arith::mul_mod(pw(ua, beta), pw(ub, -alpha), p);
    if (alpha * beta).rem_euclid(2) == 1 {
        r = (p - r) % p;
    }
    let t = arith::pow_mod(r, (p - 1) / level as u64, p);
    match arith::dlog(t, w, level as u64, p) {
        Some(k) => Ok(LocalInvariant::new(k as i64, level)),
        None => input("tame symbol value is not an n-th root of unity"),
    }
}

pub fn tame_symbol(a: &FactoredElem, b: &FactoredElem, v: &SplitPlace, level: u32) -> Result<LocalInvariant> {
    if a.level() != v.n || b.level() != v.n {
        return input("arguments and place live at different levels");
    }
    tame_from_coords(a.local_coords(v)?, b.local_coords(v)?, v, level)
}

pub fn real_symbol(sa: i32, sb: i32, level: u32) -> Result<LocalInvariant> {
    if level != 2 {
        return input(format!("no real places contribute at level {level}"));
    }
    Ok(LocalInvariant::new(if sa < 0 && sb < 0 { 1 } else { 0 }, 2))
}

/// Smallest d | level with u^{d(p-1)/level} = 1.
pub fn order_in_unit_quotient(u: u64, v: &SplitPlace, level: u32) -> Result<u32> {
    if u % v.p == 0 {
        return input("residue is zero");
    }
    if (v.p - 1) % level as u64 != 0 {
        return input(format!("{level} does not divide {} - 1", v.p));
    }
    for d in arith::divisors(level as u64) {
        if arith::pow_mod(u, d * (v.p - 1) / level as u64, v.p) == 1 {
            return Ok(d as u32);
        }
    }
    unreachable!()
}

/// Every split place where a or b has nonzero valuation; errors on unsupported primes.
pub fn support_of(a: &FactoredElem, b: &FactoredElem) -> Result<Vec<SplitPlace>> {
    let k = Cyclo::new(a.level())?;
    let mut primes = a.norm_primes()?;
    for q in b.norm_primes()? {
        if !primes.contains(&q) {
            primes.push(q);
        }
    }
    primes.sort_unstable();
    let mut out = Vec::new();
    for q in primes {
        if q == k.char_prime() {
            continue;
        }
        if q % k.n() as u64 != 1 {
            let unit_a = a.factors().iter().all(|(x, _)| !divides_norm(x, q));
            let unit_b = b.factors().iter().all(|(x, _)| !divides_norm(x, q));
            if unit_a && unit_b {
                continue;
            }
            return input(format!(
                "prime {q} has residue degree > 1 in Q(ζ_{}); symbols there are not supported",
                k.n()
            ));
        }
        for w in k.places_above(q)? {
            if a.local_coords(&w)?.0 != 0 || b.local_coords(&w)?.0 != 0 {
                out.push(w);
            }
        }
    }
    Ok(out)
}

fn divides_norm(x: &crate::cyclo::CycloElem, q: u64) -> bool {
    let nm = x.norm();
    let qb = num_bigint::BigInt::from(q);
    use num_traits::Zero;
    (nm.numer() % &qb).is_zero() || (nm.denom() % &qb).is_zero()
}

/// Local symbols at the listed split places, the real place at level 2,
/// and the wild place (vanishing or inferred).
pub fn global_symbol(
    a: &FactoredElem,
    b: &FactoredElem,
    support: &[SplitPlace],
    level: u32,
) -> Result<ObstructionReport> {
    let n = a.level();
    if b.level() != n {
        return input("arguments at different levels");
    }
    if n % level != 0 || level < 2 {
        return input(format!("symbol level {level} does not divide field level {n}"));
    }
    let needed = support_of(a, b)?;
    for w in &needed {
        if !support.contains(w) {
            return input(format!("support incomplete: missing place {}:{}", w.p, w.omega));
        }
    }
    let mut places: Vec<SplitPlace> = support.to_vec();
    places.sort();
    places.dedup();
    let mut entries = Vec::new();
    for v in &places {
        if v.n != n {
            return input("support place at the wrong level");
        }
        entries.push(ReportEntry {
            place: Place::Split(*v),
            inv: tame_symbol(a, b, v, level)?,
            source: Source::Tame,
        });
    }
    if n == 2 {
        let (Some(sa), Some(sb)) = (a.rational_sign(), b.rational_sign()) else {
            return input("irrational base at level 2");
        };
        entries.push(ReportEntry {
            place: Place::Real,
            inv: real_symbol(sa, sb, level)?,
            source: Source::Real,
        });
    }
    let k = Cyclo::new(n)?;
    let table = WildTable::new(n, level)?;
    let vanishes = matches!(table.test(a)?, WildPower::Power(_)) || matches!(table.test(b)?, WildPower::Power(_));
    let rest = entries
        .iter()
        .fold(LocalInvariant::zero(level), |acc, e| acc.add(&e.inv));
    entries.push(if vanishes {
        ReportEntry {
            place: Place::Wild(k.char_prime()),
            inv: LocalInvariant::zero(level),
            source: Source::Power,
        }
    } else {
        ReportEntry {
            place: Place::Wild(k.char_prime()),
            inv: rest.neg(),
            source: Source::Inferred,
        }
    });
    entries.sort_by_key(|e| e.place);
    let global_order = entries
        .iter()
        .fold(1u64, |acc, e| arith::lcm(acc, e.inv.order() as u64)) as u32;
    Ok(ObstructionReport {
        level,
        entries,
        global_order,
    })
}

pub fn product_formula_check(r: &ObstructionReport) -> bool {
    r.sum().is_zero()
}

#[cfg(test)]
mod tests;
