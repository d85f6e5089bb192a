//! Kummer coordinates for H¹(L, E[n]): pairs in (L×/L×ⁿ)² with the twisted Galois action.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec::Vec;

use crate::arith;
use crate::cyclo::{Cyclo, GaloisAuto, SplitPlace};
use crate::ecq::{CurveOverL, Point};
use crate::error::{input, Result};
use crate::localfield::{self, FactoredElem, LocalInvariant, ObstructionReport};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KummerPair {
    pub a: FactoredElem,
    pub b: FactoredElem,
    pub n: u32,
}

impl KummerPair {
    pub fn new(a: FactoredElem, b: FactoredElem, n: u32) -> Result<KummerPair> {
        if a.level() != b.level() {
            return input("pair coordinates at different levels");
        }
        if n < 2 || a.level() % n != 0 {
            return input(format!("level {n} does not divide field level {}", a.level()));
        }
        Ok(KummerPair { a, b, n })
    }

    pub fn trivial(field_level: u32, n: u32) -> Result<KummerPair> {
        KummerPair::new(FactoredElem::one(field_level), FactoredElem::one(field_level), n)
    }

    pub fn field_level(&self) -> u32 {
        self.a.level()
    }

    pub fn is_trivial(&self) -> bool {
        self.a.is_one() && self.b.is_one()
    }

    /// Exponents brought into [0, n).
    pub fn reduced(&self) -> KummerPair {
        KummerPair {
            a: reduce_exponents(&self.a, self.n),
            b: reduce_exponents(&self.b, self.n),
            n: self.n,
        }
    }

    /// Per-place classes in K_v×/K_v×ⁿ of both coordinates.
    pub fn local_classes(&self, v: &SplitPlace) -> Result<((u32, u32), (u32, u32))> {
        Ok((local_class(&self.a, v, self.n)?, local_class(&self.b, v, self.n)?))
    }
}

pub fn reduce_exponents(x: &FactoredElem, n: u32) -> FactoredElem {
    let f = x
        .factors()
        .iter()
        .map(|(b, e)| (b.clone(), e.rem_euclid(n as i64)))
        .collect();
    FactoredElem::new(x.level(), f).unwrap()
}

/// (v(x) mod n, k) with u^{(p-1)/n} = ω_n^k for the unit part u.
pub fn local_class(x: &FactoredElem, v: &SplitPlace, n: u32) -> Result<(u32, u32)> {
    let (val, u) = x.local_coords(v)?;
    let p = v.p;
    let w = v.restrict(n).omega;
    let t = arith::pow_mod(u, (p - 1) / n as u64, p);
    let Some(k) = arith::dlog(t, w, n as u64, p) else {
        return input("unit power is not an n-th root of unity");
    };
    Ok((val.rem_euclid(n as i64) as u32, k as u32))
}

pub fn pair_add(x: &KummerPair, y: &KummerPair) -> Result<KummerPair> {
    if x.n != y.n || x.field_level() != y.field_level() {
        return input("pairs at different levels");
    }
    KummerPair::new(x.a.mul(&y.a)?, x.b.mul(&y.b)?, x.n)
}

pub fn pair_scale(m: i64, x: &KummerPair) -> KummerPair {
    KummerPair {
        a: x.a.pow(m),
        b: x.b.pow(m),
        n: x.n,
    }
}

/// [[i, j], [k, l]] over Z/n; columns are the images of S and T.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GaloisMatrix {
    pub i: u32,
    pub j: u32,
    pub k: u32,
    pub l: u32,
    pub n: u32,
}

impl GaloisMatrix {
    pub fn new(i: i64, j: i64, k: i64, l: i64, n: u32) -> GaloisMatrix {
        let r = |x: i64| x.rem_euclid(n as i64) as u32;
        GaloisMatrix {
            i: r(i),
            j: r(j),
            k: r(k),
            l: r(l),
            n,
        }
    }

    pub fn identity(n: u32) -> GaloisMatrix {
        GaloisMatrix::new(1, 0, 0, 1, n)
    }

    pub fn det(&self) -> u32 {
        let n = self.n as i64;
        (self.i as i64 * self.l as i64 - self.j as i64 * self.k as i64).rem_euclid(n) as u32
    }

    pub fn mul(&self, o: &GaloisMatrix) -> GaloisMatrix {
        let (a, b, c, d) = (self.i as i64, self.j as i64, self.k as i64, self.l as i64);
        let (e, f, g, h) = (o.i as i64, o.j as i64, o.k as i64, o.l as i64);
        GaloisMatrix::new(a * e + b * g, a * f + b * h, c * e + d * g, c * f + d * h, self.n)
    }

    pub fn is_upper_triangular(&self) -> bool {
        self.k == 0
    }
}

/// (a, b) ↦ (a^i b^j, a^k b^l), exponents mod n.
pub fn matrix_act(m: &GaloisMatrix, a: &FactoredElem, b: &FactoredElem) -> Result<(FactoredElem, FactoredElem)> {
    let na = a.pow(m.i as i64).mul(&b.pow(m.j as i64))?;
    let nb = a.pow(m.k as i64).mul(&b.pow(m.l as i64))?;
    Ok((reduce_exponents(&na, m.n), reduce_exponents(&nb, m.n)))
}

/// σ_t ↦ M_t for every t in (Z/N)^×, N the field level.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GaloisRep {
    pub n: u32,
    pub field_level: u32,
    pub mats: BTreeMap<u32, GaloisMatrix>,
}

impl GaloisRep {
    /// Checks that the map is a homomorphism with determinant t mod n.
    pub fn new(n: u32, field_level: u32, mats: BTreeMap<u32, GaloisMatrix>) -> Result<GaloisRep> {
        let nl = field_level as u64;
        for (&t, m) in &mats {
            if m.n != n {
                return input(format!("matrix for t={t} is over Z/{}", m.n));
            }
            if m.det() as u64 != t as u64 % n as u64 {
                return input(format!("det M_{t} = {} but the cyclotomic character gives {}", m.det(), t % n));
            }
        }
        for (&s, ms) in &mats {
            for (&t, mt) in &mats {
                let st = (s as u64 * t as u64 % nl) as u32;
                if let Some(mst) = mats.get(&st) {
                    if *mst != ms.mul(mt) {
                        return input(format!("M_{st} differs from M_{s}·M_{t}"));
                    }
                }
            }
        }
        Ok(GaloisRep { n, field_level, mats })
    }

    /// Reads off the action on the declared torsion basis.
    pub fn from_torsion(e: &CurveOverL, n: u32) -> Result<GaloisRep> {
        let Some((s, t)) = &e.torsion_basis else {
            return input("no torsion basis declared");
        };
        let k = Cyclo::new(e.level())?;
        let grid = e.torsion_grid(n)?;
        if grid.iter().filter(|p| **p == Point::Inf).count() != 1 {
            return input("S and T do not generate E[n]");
        }
        let coords = |p: &crate::ecq::PointL| -> Result<(i64, i64)> {
            match grid.iter().position(|q| q == p) {
                Some(idx) => Ok(((idx as u32 / n) as i64, (idx as u32 % n) as i64)),
                None => input("conjugate of a basis point lies outside the declared E[n]"),
            }
        };
        let mut mats = BTreeMap::new();
        for g in k.galois_group() {
            let (i, kk) = coords(&e.galois_point(s, &g)?)?;
            let (j, l) = coords(&e.galois_point(t, &g)?)?;
            mats.insert(g.t(), GaloisMatrix::new(i, j, kk, l, n));
        }
        let rep = GaloisRep::new(n, e.level(), mats)?;
        if e.stable_subgroup_order.is_some() && !rep.is_upper_triangular() {
            return input("declared stable subgroup ⟨S⟩ is not Galois-stable");
        }
        Ok(rep)
    }

    pub fn trivial(n: u32, field_level: u32) -> GaloisRep {
        let mut mats = BTreeMap::new();
        mats.insert(1, GaloisMatrix::identity(n));
        GaloisRep { n, field_level, mats }
    }

    pub fn get(&self, t: u32) -> Result<&GaloisMatrix> {
        match self.mats.get(&(t % self.field_level)) {
            Some(m) => Ok(m),
            None => input(format!("representation is not defined at σ_{t}")),
        }
    }

    pub fn is_upper_triangular(&self) -> bool {
        self.mats.values().all(|m| m.is_upper_triangular())
    }

    pub fn is_total(&self) -> bool {
        let nl = self.field_level as u64;
        (1..nl).filter(|t| arith::gcd(*t, nl) == 1).all(|t| self.mats.contains_key(&(t as u32)))
    }

    fn automorphisms(&self) -> Result<Vec<(GaloisAuto, GaloisMatrix)>> {
        self.mats
            .iter()
            .map(|(&t, m)| Ok((GaloisAuto::new(t as i64, self.field_level)?, *m)))
            .collect()
    }
}

/// κ(ξ^σ) = M_σ/det M_σ · (σa, σb).
pub fn twisted_conjugate(t: u32, rep: &GaloisRep, x: &KummerPair) -> Result<KummerPair> {
    check_rep(rep, x)?;
    let m = rep.get(t)?;
    let g = GaloisAuto::new(t as i64, rep.field_level)?;
    conjugate_with(&g, m, x)
}

fn check_rep(rep: &GaloisRep, x: &KummerPair) -> Result<()> {
    if rep.n != x.n || rep.field_level != x.field_level() {
        return input("representation and pair at different levels");
    }
    Ok(())
}

fn conjugate_with(g: &GaloisAuto, m: &GaloisMatrix, x: &KummerPair) -> Result<KummerPair> {
    let (a, b) = matrix_act(m, &x.a.galois(g)?, &x.b.galois(g)?)?;
    let dinv = arith::inv_mod(m.det() as u64, m.n as u64).unwrap() as i64;
    Ok(KummerPair {
        a: reduce_exponents(&a.pow(dinv), x.n),
        b: reduce_exponents(&b.pow(dinv), x.n),
        n: x.n,
    })
}

/// c, d come from the first coordinate and c′, d′ from the second.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NormFactors {
    pub c: FactoredElem,
    pub d: FactoredElem,
    pub c_prime: FactoredElem,
    pub d_prime: FactoredElem,
}

pub fn twisted_norm(rep: &GaloisRep, x: &KummerPair) -> Result<(KummerPair, NormFactors)> {
    check_rep(rep, x)?;
    if !rep.is_total() {
        return input("representation does not cover the whole Galois group");
    }
    let lvl = x.field_level();
    let n = x.n;
    let mut f = NormFactors {
        c: FactoredElem::one(lvl),
        d: FactoredElem::one(lvl),
        c_prime: FactoredElem::one(lvl),
        d_prime: FactoredElem::one(lvl),
    };
    for (g, m) in rep.automorphisms()? {
        let dinv = arith::inv_mod(m.det() as u64, n as u64).unwrap() as i64;
        let sa = x.a.galois(&g)?;
        let sb = x.b.galois(&g)?;
        f.c = f.c.mul(&sa.pow(m.i as i64 * dinv))?;
        f.d = f.d.mul(&sa.pow(m.k as i64 * dinv))?;
        f.c_prime = f.c_prime.mul(&sb.pow(m.j as i64 * dinv))?;
        f.d_prime = f.d_prime.mul(&sb.pow(m.l as i64 * dinv))?;
    }
    f.c = reduce_exponents(&f.c, n);
    f.d = reduce_exponents(&f.d, n);
    f.c_prime = reduce_exponents(&f.c_prime, n);
    f.d_prime = reduce_exponents(&f.d_prime, n);
    let nm = KummerPair {
        a: reduce_exponents(&f.c.mul(&f.c_prime)?, n),
        b: reduce_exponents(&f.d.mul(&f.d_prime)?, n),
        n,
    };
    Ok((nm, f))
}

/// Whether x and y agree in (K_v×/K_v×ⁿ)² at every listed place.
pub fn locally_equal(x: &KummerPair, y: &KummerPair, places: &[SplitPlace]) -> Result<bool> {
    if x.n != y.n || x.field_level() != y.field_level() {
        return input("pairs at different levels");
    }
    for v in places {
        if x.local_classes(v)? != y.local_classes(v)? {
            return Ok(false);
        }
    }
    Ok(true)
}

pub fn is_invariant(rep: &GaloisRep, x: &KummerPair, places: &[SplitPlace]) -> Result<bool> {
    check_rep(rep, x)?;
    for v in places {
        for (g, _) in rep.automorphisms()? {
            if !places.contains(&v.conjugate(&g)) {
                return input(format!("place {}:{} has a conjugate outside the list", v.p, v.omega));
            }
        }
    }
    for w in localfield::support_of(&x.a, &x.b)? {
        if !places.contains(&w) {
            return input(format!("place {}:{} in the support is not listed", w.p, w.omega));
        }
    }
    for (g, m) in rep.automorphisms()? {
        if !locally_equal(&conjugate_with(&g, &m, x)?, x, places)? {
            return Ok(false);
        }
    }
    Ok(true)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Obstruction {
    pub report: ObstructionReport,
    /// Set for even n: the true obstruction may differ by a 2-torsion class.
    pub two_torsion_ambiguity: bool,
}

pub fn obstruction(x: &KummerPair, places: &[SplitPlace]) -> Result<Obstruction> {
    let report = localfield::global_symbol(&x.a, &x.b, places, x.n)?;
    Ok(Obstruction {
        report,
        two_torsion_ambiguity: x.n % 2 == 0,
    })
}

/// j_*: (a, b) ↦ (a^m, b^m) read at level mn over Q(ζ_{mN}).
pub fn push_forward(x: &KummerPair, m: u32) -> Result<KummerPair> {
    KummerPair::new(
        x.a.pow(m as i64).embed(m)?,
        x.b.pow(m as i64).embed(m)?,
        x.n * m,
    )
}

/// [m]: the same representatives read at level n/m.
pub fn multiply_down(x: &KummerPair, m: u32) -> Result<KummerPair> {
    if x.n % m != 0 {
        return input(format!("{m} does not divide the level {}", x.n));
    }
    KummerPair::new(x.a.clone(), x.b.clone(), x.n / m)
}

/// Places of Q(ζ_{mN}) restricting to the given places of Q(ζ_N).
pub fn lift_places(places: &[SplitPlace], m: u32) -> Result<Vec<SplitPlace>> {
    let mut out = Vec::new();
    for v in places {
        let k = Cyclo::new(v.n * m)?;
        let above: Vec<SplitPlace> = k
            .places_above(v.p)?
            .into_iter()
            .filter(|w| w.restrict(v.n) == *v)
            .collect();
        if above.is_empty() {
            return input(format!("{} does not split completely at level {}", v.p, v.n * m));
        }
        out.extend(above);
    }
    Ok(out)
}

fn tame_at(x: &KummerPair, v: &SplitPlace) -> Result<LocalInvariant> {
    localfield::tame_symbol(&x.a, &x.b, v, x.n)
}

/// (Ob_{mn} ∘ j_* = m·Ob_n, Ob_n ∘ [m] = m·Ob_{mn}) checked place by place.
pub fn level_shift_checks(x: &KummerPair, m: u32, places: &[SplitPlace]) -> Result<(bool, bool)> {
    if m == 1 {
        return Ok((true, true));
    }
    Cyclo::new(x.field_level() * m)?;
    let y = push_forward(x, m)?;
    let z = multiply_down(&y, m)?;
    let mut first = true;
    let mut second = true;
    for v in places {
        let base = tame_at(x, v)?;
        for w in lift_places(core::slice::from_ref(v), m)? {
            let up = tame_at(&y, &w)?;
            first &= up.reduced() == qz_scale(&base, m);
            let down = tame_at(&z, &w)?;
            second &= down.reduced() == qz_scale(&up, m);
        }
    }
    Ok((first, second))
}

fn qz_scale(x: &LocalInvariant, m: u32) -> (u32, u32) {
    LocalInvariant::new(x.num() as i64 * m as i64, x.level()).reduced()
}

#[cfg(test)]
mod tests;
