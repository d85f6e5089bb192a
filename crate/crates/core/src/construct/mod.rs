//! Period-index certificates: construction, composition and the even-level doubling route.

use alloc::boxed::Box;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::arith;
use crate::cyclo::{Cyclo, CycloElem, SplitPlace};
use crate::ecq::{CurveOverL, TorsionCheck};
use crate::error::{input, Error, Result};
use crate::kummer::{self, GaloisRep, KummerPair, NormFactors};
use crate::localfield::{self, FactoredElem, LocalInvariant, ObstructionReport, Place, ReportEntry};
use crate::sieve::{self, Bounds, Mode, PrimePairCert, Sieve};

mod encode;
mod verify;

pub use encode::{certificate_from_node, curve_node, parse_curve};
pub use verify::{verify_certificate, Verdict};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Route {
    Direct,
    /// Build at level 2n with symbol order 2ℓ, then pass to the class 2η at level n.
    Doubled,
}

impl Route {
    pub fn name(&self) -> &'static str {
        match self {
            Route::Direct => "direct",
            Route::Doubled => "doubled",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Context {
    pub n: u32,
    pub ell: u32,
    pub mode: Mode,
    pub route: Route,
    pub bounds: Bounds,
    pub seed: u64,
}

impl Context {
    /// Level of the Kummer construction.
    pub fn level(&self) -> u32 {
        match self.route {
            Route::Direct => self.n,
            Route::Doubled => 2 * self.n,
        }
    }

    /// Target symbol order at the construction level.
    pub fn symbol_order(&self) -> u32 {
        match self.route {
            Route::Direct => self.ell,
            Route::Doubled => 2 * self.ell,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EvenTrace {
    pub level: u32,
    pub symbol_order: u32,
    /// Ob_{2n}(η) at v.
    pub inv_high: LocalInvariant,
    /// Ob_n(2η) = 2·Ob_{2n}(η) at v.
    pub inv_low: LocalInvariant,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PeriodIndexCertificate {
    pub context: Context,
    pub curve: CurveOverL,
    pub pair: PrimePairCert,
    /// ω at v, pinned by e(S̄, T̄) = ω at the construction level.
    pub omega: u64,
    pub xi: KummerPair,
    pub rep: Option<GaloisRep>,
    pub norm: Option<(NormFactors, KummerPair)>,
    /// Symbols of the constructed class at the construction level.
    pub report: ObstructionReport,
    pub ambiguity: &'static str,
    pub lemmas: Vec<(String, bool)>,
    /// Obstruction of the final class at level n.
    pub class_report: ObstructionReport,
    pub period: u32,
    /// (m, m·v(a) mod n) for 0 < m < n.
    pub period_evidence: Vec<(u32, u32)>,
    pub index_upper: u32,
    pub index_lower: u32,
    /// (ℓ′, ℓ′·Ob_n at v) for ℓ′ | ℓ, ℓ′ < ℓ.
    pub lower_evidence: Vec<(u32, LocalInvariant)>,
    pub even_trace: Option<EvenTrace>,
    pub lichtenbaum_ok: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Certificate {
    /// The zero class: period 1, index 1.
    Trivial { digest: String },
    Single(Box<PeriodIndexCertificate>),
    Composite(Vec<Certificate>),
}

impl Certificate {
    pub fn period(&self) -> u32 {
        match self {
            Certificate::Trivial { .. } => 1,
            Certificate::Single(c) => c.period,
            Certificate::Composite(v) => v.iter().map(|c| c.period()).product(),
        }
    }

    pub fn index(&self) -> u32 {
        match self {
            Certificate::Trivial { .. } => 1,
            Certificate::Single(c) => c.index_upper,
            Certificate::Composite(v) => v.iter().map(|c| c.index()).product(),
        }
    }

    pub fn digest(&self) -> String {
        match self {
            Certificate::Trivial { digest } => digest.clone(),
            Certificate::Single(c) => c.curve.digest(),
            Certificate::Composite(v) => v[0].digest(),
        }
    }

    pub fn places(&self) -> Vec<(u64, u64)> {
        match self {
            Certificate::Trivial { .. } => Vec::new(),
            Certificate::Single(c) => alloc::vec![(c.pair.v.place.p, c.pair.vp.place.p)],
            Certificate::Composite(v) => v.iter().flat_map(|c| c.places()).collect(),
        }
    }

    pub fn trivial(curve: &CurveOverL) -> Certificate {
        Certificate::Trivial { digest: curve.digest() }
    }
}

pub fn lichtenbaum_check(period: u32, index: u32) -> bool {
    let (p, i) = (period as u64, index as u64);
    p >= 1 && i >= 1 && i % p == 0 && (p * p) % i == 0
}

/// κ(ξ) = (π, π′^{n/ℓ}).
pub fn build_xi(pi: &CycloElem, pi2: &CycloElem, n: u32, ell: u32) -> Result<KummerPair> {
    if ell == 0 || n % ell != 0 {
        return input(format!("ℓ = {ell} does not divide n = {n}"));
    }
    KummerPair::new(
        FactoredElem::from_base(pi.clone())?,
        FactoredElem::from_base(pi2.clone())?.pow((n / ell) as i64),
        n,
    )
}

fn gate(e: &CurveOverL, ctx: &Context) -> Result<()> {
    let (n, ell) = (ctx.n, ctx.ell);
    if n < 2 || ell == 0 || n % ell != 0 {
        return input(format!("need n ≥ 2 and ℓ | n, got n = {n}, ℓ = {ell}"));
    }
    match ctx.route {
        Route::Direct => {
            if n % 2 == 0 && ell % 4 != 0 {
                return input(format!(
                    "n = {n} is even and 4 ∤ ℓ = {ell}: use the level-2n route (even_adjust)"
                ));
            }
        }
        Route::Doubled => {
            if !n.is_power_of_two() {
                return input(format!("the doubling route needs n a power of 2, got {n}"));
            }
            if ell > 2 {
                return input(format!("the doubling route covers ℓ ∈ {{1, 2}}, got {ell}"));
            }
            if e.level() % (2 * n) != 0 {
                return input(format!(
                    "missing level-{} data: the field Q(ζ_{}) lacks the {}-th roots of unity",
                    2 * n,
                    e.level(),
                    2 * n
                ));
            }
        }
    }
    if e.level() % ctx.level() != 0 {
        return input(format!("level {} does not divide the field level {}", ctx.level(), e.level()));
    }
    if ctx.mode == Mode::B && e.level() != ctx.level() {
        return input(format!(
            "mode B works over L = Q(ζ_{}) above K = Q, but the curve lives at level {}",
            ctx.level(),
            e.level()
        ));
    }
    if e.torsion_basis.is_none() {
        return input(format!("missing level-{} torsion basis", ctx.level()));
    }
    Ok(())
}

/// Runs the sieve and assembles the certificate.
pub fn certify(e: &CurveOverL, ctx: &Context) -> Result<PeriodIndexCertificate> {
    gate(e, ctx)?;
    torsion_only(e, ctx)?;
    let pair = Sieve::new(e, ctx.level(), ctx.mode, ctx.bounds)?.find_pair()?;
    let fails = sieve::recheck_pair(e, &pair)?;
    if !fails.is_empty() {
        return Err(Error::Inconsistent(format!("fresh pair fails its recheck: {fails:?}")));
    }
    assemble(e, ctx, &pair)
}

pub fn certify_mode_a(e: &CurveOverL, n: u32, ell: u32, bounds: Bounds, seed: u64) -> Result<PeriodIndexCertificate> {
    certify(e, &Context { n, ell, mode: Mode::A, route: Route::Direct, bounds, seed })
}

pub fn certify_mode_b(e: &CurveOverL, n: u32, ell: u32, bounds: Bounds, seed: u64) -> Result<PeriodIndexCertificate> {
    certify(e, &Context { n, ell, mode: Mode::B, route: Route::Direct, bounds, seed })
}

pub fn even_adjust(e: &CurveOverL, n: u32, ell: u32, mode: Mode, bounds: Bounds, seed: u64) -> Result<PeriodIndexCertificate> {
    certify(e, &Context { n, ell, mode, route: Route::Doubled, bounds, seed })
}

/// Cheap torsion checks that need no place: nS = nT = O, independence, Galois data.
fn torsion_only(e: &CurveOverL, ctx: &Context) -> Result<()> {
    let nc = ctx.level();
    let (s, t) = e.torsion_basis.as_ref().unwrap();
    for (name, p) in [("S", s), ("T", t)] {
        if !e.curve.mul(nc as i64, p).is_inf() {
            return input(format!("torsion basis: {nc}{name} is not the identity"));
        }
    }
    if ctx.mode == Mode::B {
        rep_for(e, nc)?;
    }
    Ok(())
}

fn rep_for(e: &CurveOverL, nc: u32) -> Result<GaloisRep> {
    let rep = GaloisRep::from_torsion(e, nc)?;
    if !rep.is_upper_triangular() && !rep.mats.values().all(|m| m.det() == 1) {
        return input("the Galois action is neither upper-triangular nor of determinant 1");
    }
    Ok(rep)
}

fn entry(r: &ObstructionReport, v: &SplitPlace) -> Result<LocalInvariant> {
    match r.get(&Place::Split(*v)) {
        Some(e) => Ok(e.inv),
        None => Err(Error::Inconsistent(format!("no report entry at {}:{}", v.p, v.omega))),
    }
}

/// Rebuilds every derived field from the inputs and the pair witnesses; no search.
pub fn assemble(e: &CurveOverL, ctx: &Context, pair: &PrimePairCert) -> Result<PeriodIndexCertificate> {
    gate(e, ctx)?;
    let (n, ell) = (ctx.n, ctx.ell);
    let nc = ctx.level();
    let lc = ctx.symbol_order();
    if pair.n != nc || pair.mode != ctx.mode {
        return input(format!("pair was sieved for level {} mode {}", pair.n, pair.mode.name()));
    }
    let v = pair.v.place;
    let vp = pair.vp.place;
    match e.verify_torsion_basis(nc, &v, ctx.seed)? {
        TorsionCheck::Pass => {}
        TorsionCheck::Fail(why) => return input(format!("torsion basis: {why}")),
    }
    let omega = v.restrict(nc).omega;
    let xi = build_xi(&pair.v.pi, &pair.vp.pi, nc, lc)?;
    let k = Cyclo::new(e.level())?;

    let (class, rep, norm, support) = match ctx.mode {
        Mode::A => {
            let mut s = localfield::support_of(&xi.a, &xi.b)?;
            s.push(v);
            s.push(vp);
            (xi.clone(), None, None, s)
        }
        Mode::B => {
            let rep = rep_for(e, nc)?;
            let (nm, f) = kummer::twisted_norm(&rep, &xi)?;
            let mut s = localfield::support_of(&nm.a, &nm.b)?;
            s.extend(k.places_above(v.p)?);
            s.extend(k.places_above(vp.p)?);
            (nm.clone(), Some(rep), Some((f, nm)), s)
        }
    };
    let mut support = support;
    support.sort();
    support.dedup();
    let ob = kummer::obstruction(&class, &support)?;
    let report = ob.report;

    let mut lemmas: Vec<(String, bool)> = Vec::new();
    let iv = entry(&report, &v)?;
    let ivp = entry(&report, &vp)?;
    lemmas.push((String::from("product formula"), localfield::product_formula_check(&report)));
    lemmas.push((String::from("order at v is the target"), iv.order() == lc));
    lemmas.push((String::from("order at v' matches v"), ivp.order() == iv.order()));
    let allowed = |pl: &Place| match (ctx.mode, pl) {
        (Mode::A, Place::Split(w)) => *w == v || *w == vp,
        (Mode::B, Place::Split(w)) => w.p == v.p || w.p == vp.p,
        _ => false,
    };
    let elsewhere = report.entries.iter().all(|en| allowed(&en.place) || en.inv.is_zero());
    lemmas.push((String::from("trivial elsewhere"), elsewhere));
    if let (Some(rep), Some((f, nm))) = (&rep, &norm) {
        let cd = localfield::tame_symbol(&f.c, &f.d, &v, nc)?;
        lemmas.push((String::from("<c,d> vanishes at v"), cd.is_zero()));
        if rep.is_upper_triangular() {
            lemmas.push((String::from("d is trivial"), kummer::reduce_exponents(&f.d, nc).is_one()));
        }
        lemmas.push((String::from("norm is invariant"), kummer::is_invariant(rep, nm, &support)?));
        let same = |q: u64, x: LocalInvariant| {
            report.entries.iter().all(|en| match en.place {
                Place::Split(w) if w.p == q => en.inv == x,
                _ => true,
            })
        };
        lemmas.push((String::from("conjugate places agree"), same(v.p, iv) && same(vp.p, ivp)));
    }
    if let Some((name, _)) = lemmas.iter().find(|l| !l.1) {
        return Err(Error::Inconsistent(format!("lemma check failed: {name}")));
    }

    let (class_report, even_trace) = match ctx.route {
        Route::Direct => (report.clone(), None),
        Route::Doubled => {
            let low = halve_level(&report, n);
            let trace = EvenTrace {
                level: nc,
                symbol_order: lc,
                inv_high: iv,
                inv_low: entry(&low, &v)?,
            };
            (low, Some(trace))
        }
    };
    let inv_v = entry(&class_report, &v)?;

    let val = localfield::local_valuation(&class.a, &v)?.rem_euclid(n as i64) as u64;
    let period_evidence: Vec<(u32, u32)> = (1..n).map(|m| (m, (m as u64 * val % n as u64) as u32)).collect();
    if period_evidence.iter().any(|x| x.1 == 0) {
        return Err(Error::Inconsistent(String::from("period evidence: some mξ is locally trivial at v")));
    }
    let index_upper = n * class_report.global_order;
    if index_upper != n * ell {
        return Err(Error::Inconsistent(format!(
            "obstruction order {} differs from ℓ = {ell}",
            class_report.global_order
        )));
    }
    let lower_evidence: Vec<(u32, LocalInvariant)> = (1..ell)
        .filter(|d| ell % d == 0)
        .map(|d| (d, inv_v.scale(d as i64)))
        .collect();
    if lower_evidence.iter().any(|x| x.1.is_zero()) {
        return Err(Error::Inconsistent(String::from("index lower bound: some ℓ′·Ob vanishes at v")));
    }
    let ambiguity = if n % 2 == 1 {
        "none"
    } else if ctx.route == Route::Doubled {
        "absorbed by doubling"
    } else {
        "immaterial: 4 divides the symbol order"
    };
    Ok(PeriodIndexCertificate {
        context: *ctx,
        curve: e.clone(),
        pair: pair.clone(),
        omega,
        xi,
        rep,
        norm,
        report,
        ambiguity,
        lemmas,
        class_report,
        period: n,
        period_evidence,
        index_upper,
        index_lower: n * ell,
        lower_evidence,
        even_trace,
        lichtenbaum_ok: lichtenbaum_check(n, index_upper),
    })
}

/// 2·x for x ∈ (1/2n)Z/Z, written in (1/n)Z/Z.
fn halve_level(r: &ObstructionReport, n: u32) -> ObstructionReport {
    let entries: Vec<ReportEntry> = r
        .entries
        .iter()
        .map(|e| ReportEntry {
            place: e.place,
            inv: LocalInvariant::new(e.inv.num() as i64, n),
            source: e.source,
        })
        .collect();
    let global_order = entries.iter().fold(1u64, |a, e| arith::lcm(a, e.inv.order() as u64)) as u32;
    ObstructionReport { level: n, entries, global_order }
}

pub fn compose_coprime(c1: &Certificate, c2: &Certificate) -> Result<Certificate> {
    if c1.digest() != c2.digest() {
        return input("certificates concern different curves");
    }
    let (p1, p2) = (c1.period(), c2.period());
    if arith::gcd(p1 as u64, p2 as u64) != 1 {
        return input(format!("periods {p1} and {p2} are not coprime"));
    }
    if matches!(c1, Certificate::Trivial { .. }) {
        return Ok(c2.clone());
    }
    if matches!(c2, Certificate::Trivial { .. }) {
        return Ok(c1.clone());
    }
    let mut parts = Vec::new();
    for c in [c1, c2] {
        match c {
            Certificate::Composite(v) => parts.extend(v.iter().cloned()),
            other => parts.push(other.clone()),
        }
    }
    Ok(Certificate::Composite(parts))
}

#[cfg(test)]
mod tests;
