//! Bounded search for prime pairs meeting the local conditions of the construction.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};

use crate::arith;
use crate::cyclo::{Cyclo, CycloElem, GaloisAuto, SplitPlace};
use crate::ecq::{CurveOverL, Point, PointFp, PointL};
use crate::error::{input, Error, Result};
use crate::localfield::{self, power, FactoredElem, WildPower, WildTable};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Mode {
    A,
    B,
}

impl Mode {
    pub fn name(&self) -> &'static str {
        match self {
            Mode::A => "A",
            Mode::B => "B",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Bounds {
    pub prime_bound: u64,
    pub coeff_bound: i64,
    pub unit_window: u32,
}

impl Default for Bounds {
    fn default() -> Bounds {
        Bounds {
            prime_bound: 100_000,
            coeff_bound: 400,
            unit_window: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BadSet {
    pub primes: Vec<u64>,
    pub archimedean: bool,
}

impl BadSet {
    pub fn contains(&self, p: u64) -> bool {
        self.primes.contains(&p)
    }
}

/// Primes of bad reduction together with the primes dividing n, and 𝔪 = n²·∏ S.
pub fn bad_set(e: &CurveOverL, n: u32) -> Result<(BadSet, u64)> {
    let mut primes: Vec<u64> = arith::factor(n as u64).iter().map(|f| f.0).collect();
    let mut parts: Vec<BigInt> = Vec::new();
    let nm = e.discriminant.norm();
    parts.push(nm.numer().abs());
    for c in &e.curve.a {
        parts.push(c.denominator());
    }
    for x in parts {
        for q in small_factors(&x)? {
            if !primes.contains(&q) {
                primes.push(q);
            }
        }
    }
    primes.sort_unstable();
    let modulus = primes.iter().fold(n as u64 * n as u64, |m, q| m * q);
    Ok((
        BadSet {
            primes,
            archimedean: e.level() <= 2,
        },
        modulus,
    ))
}

fn small_factors(x: &BigInt) -> Result<Vec<u64>> {
    let mut x = x.abs();
    let mut out = Vec::new();
    let mut d = 2u64;
    while x > BigInt::from(1) {
        if d > 10_000_000 {
            return input("discriminant has a prime factor beyond trial-division range");
        }
        let db = BigInt::from(d);
        if (&x % &db).is_zero() {
            out.push(d);
            while (&x % &db).is_zero() {
                x /= &db;
            }
        }
        if let Some(small) = x.to_u64() {
            if small > 1 && d * d > small {
                out.push(small);
                break;
            }
        }
        d += 1;
    }
    out.dedup();
    Ok(out)
}

/// How π was shown to be an n-th power at a place of S.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SWitness {
    /// x with x^n ≡ π modulo λ^prec.
    Wild { prime: u64, prec: u32, root: Vec<i64> },
    /// π^{(q^f - 1)/n} ≡ 1 at every place above q.
    Tame { prime: u64 },
    Real,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PlaceCert {
    pub place: SplitPlace,
    pub pi: CycloElem,
    pub s_witnesses: Vec<SWitness>,
}

/// n·root = point in E(F_p).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DivisionWitness {
    pub point: PointFp,
    pub root: PointFp,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PrimePairCert {
    pub mode: Mode,
    pub n: u32,
    pub v: PlaceCert,
    pub vp: PlaceCert,
    /// E(F_p) ≅ Z/d1 × Z/d2 at v.
    pub group: (u64, u64),
    pub division: Vec<DivisionWitness>,
    /// Residue of π′ at v and its order in F_p^×/F_p^×ⁿ.
    pub a4_residue: u64,
    pub a4_order: u32,
    /// (t, residue of σ_t π′ at v) for t ≠ 1, mode B only.
    pub b4_residues: Vec<(u32, u64)>,
}

pub struct Sieve<'a> {
    pub e: &'a CurveOverL,
    pub n: u32,
    pub mode: Mode,
    pub bounds: Bounds,
    pub bad: BadSet,
    pub modulus: u64,
    k: Cyclo,
    wild: WildTable,
    gens: Vec<PointL>,
    units: Vec<CycloElem>,
}

type Hist = BTreeMap<String, u64>;

fn bump(h: &mut Hist, key: &str) {
    *h.entry(key.to_string()).or_insert(0) += 1;
}

impl<'a> Sieve<'a> {
    pub fn new(e: &'a CurveOverL, n: u32, mode: Mode, bounds: Bounds) -> Result<Sieve<'a>> {
        let k = Cyclo::new(e.level())?;
        if n < 2 || k.n() % n != 0 {
            return input(format!("n = {n} does not divide the field level {}", k.n()));
        }
        let (bad, modulus) = bad_set(e, n)?;
        let mut gens = e.mw_generators.clone();
        match mode {
            Mode::A => {
                if let Some((s, t)) = &e.torsion_basis {
                    gens.push(s.clone());
                    gens.push(t.clone());
                }
            }
            Mode::B => {
                for (i, g) in gens.iter().enumerate() {
                    if let Point::Aff(x, y) = g {
                        if !x.is_rational() || !y.is_rational() {
                            return input(format!("generator {i} is not a rational point"));
                        }
                    }
                }
                if !e.is_rational() {
                    return input("mode B needs a curve defined over Q");
                }
            }
        }
        let mut units = k.roots_of_unity();
        if bounds.unit_window > 0 {
            let w = bounds.unit_window as i64;
            let base = units.clone();
            for eta in k.cyclotomic_units() {
                for ex in (-w..=w).filter(|x| *x != 0) {
                    let f = eta.pow(ex)?;
                    for u in &base {
                        units.push(u * &f);
                    }
                }
            }
        }
        Ok(Sieve {
            e,
            n,
            mode,
            bounds,
            bad,
            modulus,
            wild: WildTable::new(k.n(), n)?,
            k,
            gens,
            units,
        })
    }

    pub fn field(&self) -> &Cyclo {
        &self.k
    }

    fn candidate_primes(&self) -> impl Iterator<Item = u64> + '_ {
        let step = self.k.n() as u64;
        (1..)
            .map(move |j| j * step + 1)
            .take_while(move |p| *p <= self.bounds.prime_bound)
            .filter(|p| arith::is_prime(*p))
    }

    /// Generators of the places above p, each with its place, in search order.
    fn generators(&self, p: u64) -> Result<Vec<(SplitPlace, CycloElem)>> {
        let places = self.k.places_above(p)?;
        let mut out: Vec<(SplitPlace, CycloElem)> = Vec::new();
        for s in self.k.norm_solutions(p, self.bounds.coeff_bound)? {
            for u in &self.units {
                let x = &s * u;
                if out.iter().any(|(_, y)| *y == x) {
                    continue;
                }
                let Some(v) = places.iter().find(|v| x.reduce_at(v).map(|r| r.0 == 0).unwrap_or(false)) else {
                    continue;
                };
                out.push((*v, x));
            }
        }
        Ok(out)
    }

    /// A1 and A3: total positivity and n-th powers at every place of S.
    fn s_conditions(&self, pi: &CycloElem) -> Result<core::result::Result<Vec<SWitness>, &'static str>> {
        let mut w = Vec::new();
        if self.bad.archimedean {
            if !self.k.is_totally_positive(pi).0 {
                return Ok(Err("A1: generator not totally positive"));
            }
            w.push(SWitness::Real);
        }
        let x = FactoredElem::from_base(pi.clone())?;
        for &q in &self.bad.primes {
            if q == self.k.char_prime() {
                match self.wild.test(&x)? {
                    WildPower::Power(root) => w.push(SWitness::Wild {
                        prime: q,
                        prec: self.wild.precision(),
                        root,
                    }),
                    WildPower::NotPower => return Ok(Err("A3: not an n-th power at the wild place")),
                    WildPower::Unknown => return Ok(Err("A3: wild power test undecided")),
                }
            } else if power::tame_power_at(&x, q, self.n)? {
                w.push(SWitness::Tame { prime: q });
            } else {
                return Ok(Err("A3: not an n-th power at a bad place"));
            }
        }
        Ok(Ok(w))
    }

    fn division(&self, v: &SplitPlace) -> Result<core::result::Result<Vec<DivisionWitness>, &'static str>> {
        let ef = match self.e.reduce(v) {
            Ok(ef) => ef,
            Err(_) => return Ok(Err("bad reduction or p | n")),
        };
        let mut out = Vec::new();
        for g in &self.gens {
            let pt = self.e.reduce_point(g, v)?;
            match ef.divide(&pt, self.n as u64)? {
                Some(root) => out.push(DivisionWitness { point: pt, root }),
                None => return Ok(Err("A2: generator not n-divisible in E(F_p)")),
            }
        }
        Ok(Ok(out))
    }

    /// Every generator up to the bound that passes A1 and A3, in search order.
    fn s_good(&self, hist: &mut Hist) -> Result<Vec<PlaceCert>> {
        let mut out = Vec::new();
        for p in self.candidate_primes() {
            if self.bad.contains(p) {
                bump(hist, "bad reduction or p | n");
                continue;
            }
            let gens = self.generators(p)?;
            if gens.is_empty() {
                bump(hist, "A1: no generator within the coefficient bound");
                continue;
            }
            for (v, pi) in gens {
                match self.s_conditions(&pi)? {
                    Ok(s) => out.push(PlaceCert {
                        place: v,
                        pi,
                        s_witnesses: s,
                    }),
                    Err(why) => bump(hist, why),
                }
            }
        }
        Ok(out)
    }

    pub fn find_v(&self) -> Result<(PlaceCert, Vec<DivisionWitness>)> {
        let mut hist = Hist::new();
        let mut cache = BTreeMap::new();
        for pc in self.s_good(&mut hist)? {
            match self.division_cached(&pc.place, &mut cache)? {
                Ok(d) => return Ok((pc, d)),
                Err(why) => bump(&mut hist, why),
            }
        }
        Err(not_found("v", hist))
    }

    fn division_cached(
        &self,
        v: &SplitPlace,
        cache: &mut BTreeMap<SplitPlace, core::result::Result<Vec<DivisionWitness>, &'static str>>,
    ) -> Result<core::result::Result<Vec<DivisionWitness>, &'static str>> {
        if !cache.contains_key(v) {
            cache.insert(*v, self.division(v)?);
        }
        Ok(cache[v].clone())
    }

    fn residue(&self, x: &CycloElem, v: &SplitPlace) -> Result<u64> {
        let (val, u) = x.local_data(v)?;
        if val != 0 {
            return input("element is not a unit at v");
        }
        Ok(u)
    }

    /// A4 and B4 against a fixed v, over generators already passing A1 and A3.
    fn vprime_among(
        &self,
        v: &PlaceCert,
        good: &[PlaceCert],
        hist: &mut Hist,
    ) -> Result<Option<(PlaceCert, u64, Vec<(u32, u64)>)>> {
        let p = v.place.p;
        let n = self.n;
        'cand: for w in good {
            if w.place.p == p {
                continue;
            }
            let r = self.residue(&w.pi, &v.place)?;
            if localfield::order_in_unit_quotient(r, &v.place, n)? != n {
                bump(hist, "A4: residue at v has order below n");
                continue;
            }
            let mut b4 = Vec::new();
            if self.mode == Mode::B {
                for g in self.k.galois_group().into_iter().filter(|g| g.t() != 1) {
                    let rs = self.residue(&w.pi.galois(&g)?, &v.place)?;
                    if arith::pow_mod(rs, (p - 1) / n as u64, p) != 1 {
                        bump(hist, "B4: a conjugate is not an n-th power at v");
                        continue 'cand;
                    }
                    b4.push((g.t(), rs));
                }
            }
            return Ok(Some((w.clone(), r, b4)));
        }
        Ok(None)
    }

    pub fn find_vprime(&self, v: &PlaceCert) -> Result<(PlaceCert, u64, Vec<(u32, u64)>)> {
        let mut hist = Hist::new();
        let good = self.s_good(&mut hist)?;
        match self.vprime_among(v, &good, &mut hist)? {
            Some(x) => Ok(x),
            None => Err(not_found("v'", hist)),
        }
    }

    /// The first v, in search order, for which some v′ exists.
    pub fn find_pair(&self) -> Result<PrimePairCert> {
        let mut hist = Hist::new();
        let good = self.s_good(&mut hist)?;
        let mut cache = BTreeMap::new();
        for v in &good {
            let division = match self.division_cached(&v.place, &mut cache)? {
                Ok(d) => d,
                Err(why) => {
                    bump(&mut hist, why);
                    continue;
                }
            };
            let Some((vp, r, b4)) = self.vprime_among(v, &good, &mut hist)? else {
                bump(&mut hist, "no v' for this v");
                continue;
            };
            let g = self.e.reduce(&v.place)?.group_structure();
            return Ok(PrimePairCert {
                mode: self.mode,
                n: self.n,
                v: v.clone(),
                vp,
                group: (g.d1, g.d2),
                division,
                a4_residue: r,
                a4_order: self.n,
                b4_residues: b4,
            });
        }
        Err(not_found("pair (v, v')", hist))
    }
}

fn not_found(what: &str, hist: Hist) -> Error {
    Error::NotFound {
        what: format!("no place {what} within bounds"),
        histogram: hist.into_iter().collect(),
    }
}

/// Rechecks every condition of a pair certificate from its witnesses; returns failures.
pub fn recheck_pair(e: &CurveOverL, cert: &PrimePairCert) -> Result<Vec<String>> {
    let mut bad = Vec::new();
    let n = cert.n;
    let k = Cyclo::new(e.level())?;
    let (bs, _) = bad_set(e, n)?;
    for (name, pc) in [("v", &cert.v), ("v'", &cert.vp)] {
        let p = pc.place.p;
        if bs.contains(p) {
            bad.push(format!("{name}: prime {p} lies in the bad set"));
        }
        if p % k.n() as u64 != 1 || !k.roots_mod(p).contains(&pc.place.omega) {
            bad.push(format!("{name}: place is not split"));
        }
        if pc.pi.norm().numer().abs() != BigInt::from(p) || pc.pi.norm().denom() != &BigInt::from(1) {
            bad.push(format!("{name}: generator norm is not ±{p}"));
        }
        if pc.pi.local_data(&pc.place).map(|d| d.0).unwrap_or(0) != 1 {
            bad.push(format!("{name}: generator does not vanish at the place"));
        }
        let mut expect: Vec<u64> = bs.primes.clone();
        for w in &pc.s_witnesses {
            match w {
                SWitness::Real => {
                    if !k.is_totally_positive(&pc.pi).0 || !bs.archimedean {
                        bad.push(format!("{name}: real place check failed"));
                    }
                }
                SWitness::Wild { prime, prec, root } => {
                    expect.retain(|q| q != prime);
                    let x = k.from_ints(root)?;
                    if *prime != k.char_prime() || !power::check_wild_witness(&pc.pi, &x, n, *prec)? {
                        bad.push(format!("{name}: wild witness at {prime} fails"));
                    }
                }
                SWitness::Tame { prime } => {
                    expect.retain(|q| q != prime);
                    if !power::tame_power_at(&FactoredElem::from_base(pc.pi.clone())?, *prime, n)? {
                        bad.push(format!("{name}: not an n-th power above {prime}"));
                    }
                }
            }
        }
        if !expect.is_empty() {
            bad.push(format!("{name}: S-places {expect:?} lack witnesses"));
        }
        if bs.archimedean && !pc.s_witnesses.contains(&SWitness::Real) {
            bad.push(format!("{name}: real place lacks a witness"));
        }
    }
    if cert.v.place == cert.vp.place {
        bad.push(String::from("v and v' coincide"));
    }
    let v = &cert.v.place;
    let ef = e.reduce(v)?;
    let mut gens = e.mw_generators.clone();
    if cert.mode == Mode::A {
        if let Some((s, t)) = &e.torsion_basis {
            gens.push(s.clone());
            gens.push(t.clone());
        }
    }
    if gens.len() != cert.division.len() {
        bad.push(String::from("A2: witness count differs from generator count"));
    }
    for (i, (g, w)) in gens.iter().zip(&cert.division).enumerate() {
        if e.reduce_point(g, v)? != w.point || !ef.curve.on_curve(&w.root) || ef.mul(n as i64, &w.root) != w.point {
            bad.push(format!("A2: division witness {i} fails"));
        }
    }
    let g = ef.group_structure();
    if (g.d1, g.d2) != cert.group {
        bad.push(String::from("A2: group structure differs"));
    }
    let p = v.p;
    let (val, r) = cert.vp.pi.local_data(v)?;
    if val != 0 || r != cert.a4_residue {
        bad.push(String::from("A4: residue of π' at v differs"));
    }
    if localfield::order_in_unit_quotient(r, v, n).ok() != Some(cert.a4_order) || cert.a4_order != n {
        bad.push(String::from("A4: order is not n"));
    }
    if cert.mode == Mode::B {
        let ts: Vec<u32> = k.galois_group().iter().map(|g| g.t()).filter(|t| *t != 1).collect();
        if cert.b4_residues.iter().map(|x| x.0).collect::<Vec<_>>() != ts {
            bad.push(String::from("B4: conjugate list incomplete"));
        }
        for (t, rs) in &cert.b4_residues {
            let g = GaloisAuto::new(*t as i64, k.n())?;
            let (cv, cr) = cert.vp.pi.galois(&g)?.local_data(v)?;
            if cv != 0 || cr != *rs || arith::pow_mod(*rs, (p - 1) / n as u64, p) != 1 {
                bad.push(format!("B4: σ_{t} π' is not an n-th power at v"));
            }
        }
    }
    Ok(bad)
}

#[cfg(test)]
mod tests;
