//! Weierstrass curves over Q(ζ_n) and over prime fields.

mod fp;

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::Debug;

use num_rational::BigRational;
use sha2::{Digest, Sha256};

pub use fp::{CurveFp, GroupStructure, PointFp};

use crate::arith;
use crate::cyclo::{Cyclo, CycloElem, GaloisAuto, SplitPlace};
use crate::error::{input, Result};

/// The field operations the group law needs.
pub trait Field {
    type E: Clone + PartialEq + Debug;
    fn zero(&self) -> Self::E;
    fn one(&self) -> Self::E;
    fn add(&self, a: &Self::E, b: &Self::E) -> Self::E;
    fn sub(&self, a: &Self::E, b: &Self::E) -> Self::E;
    fn mul(&self, a: &Self::E, b: &Self::E) -> Self::E;
    fn inv(&self, a: &Self::E) -> Option<Self::E>;
    fn from_i64(&self, a: i64) -> Self::E;
    fn is_zero(&self, a: &Self::E) -> bool {
        *a == self.zero()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Fp(pub u64);

impl Field for Fp {
    type E = u64;
    fn zero(&self) -> u64 {
        0
    }
    fn one(&self) -> u64 {
        1
    }
    fn add(&self, a: &u64, b: &u64) -> u64 {
        (a + b) % self.0
    }
    fn sub(&self, a: &u64, b: &u64) -> u64 {
        (a + self.0 - b) % self.0
    }
    fn mul(&self, a: &u64, b: &u64) -> u64 {
        arith::mul_mod(*a, *b, self.0)
    }
    fn inv(&self, a: &u64) -> Option<u64> {
        arith::inv_mod(*a, self.0)
    }
    fn from_i64(&self, a: i64) -> u64 {
        arith::reduce_i(a as i128, self.0)
    }
}

impl Field for Cyclo {
    type E = CycloElem;
    fn zero(&self) -> CycloElem {
        Cyclo::zero(self)
    }
    fn one(&self) -> CycloElem {
        Cyclo::one(self)
    }
    fn add(&self, a: &CycloElem, b: &CycloElem) -> CycloElem {
        a + b
    }
    fn sub(&self, a: &CycloElem, b: &CycloElem) -> CycloElem {
        a - b
    }
    fn mul(&self, a: &CycloElem, b: &CycloElem) -> CycloElem {
        a * b
    }
    fn inv(&self, a: &CycloElem) -> Option<CycloElem> {
        a.inv().ok()
    }
    fn from_i64(&self, a: i64) -> CycloElem {
        self.from_int(a)
    }
    fn is_zero(&self, a: &CycloElem) -> bool {
        a.is_zero()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Point<E> {
    Inf,
    Aff(E, E),
}

impl<E> Point<E> {
    pub fn is_inf(&self) -> bool {
        matches!(self, Point::Inf)
    }
}

/// y² + a1xy + a3y = x³ + a2x² + a4x + a6 over a field F.
#[derive(Clone, Debug, PartialEq)]
pub struct Curve<F: Field> {
    pub field: F,
    pub a: [F::E; 5],
}

impl<F: Field> Curve<F> {
    fn c(&self, i: usize) -> &F::E {
        &self.a[i]
    }

    /// (b2, b4, b6, b8).
    pub fn b_invariants(&self) -> [F::E; 4] {
        let f = &self.field;
        let [a1, a2, a3, a4, a6] = &self.a;
        let b2 = f.add(&f.mul(a1, a1), &f.mul(&f.from_i64(4), a2));
        let b4 = f.add(&f.mul(a1, a3), &f.mul(&f.from_i64(2), a4));
        let b6 = f.add(&f.mul(a3, a3), &f.mul(&f.from_i64(4), a6));
        let t1 = f.mul(&f.mul(a1, a1), a6);
        let t2 = f.mul(&f.from_i64(4), &f.mul(a2, a6));
        let t3 = f.mul(&f.mul(a1, a3), a4);
        let t4 = f.mul(&f.mul(a2, a3), a3);
        let t5 = f.mul(a4, a4);
        let b8 = f.sub(&f.sub(&f.add(&f.add(&t1, &t2), &t4), &t3), &t5);
        [b2, b4, b6, b8]
    }

    pub fn discriminant(&self) -> F::E {
        let f = &self.field;
        let [b2, b4, b6, b8] = self.b_invariants();
        let t1 = f.mul(&f.mul(&f.mul(&b2, &b2), &b8), &f.from_i64(-1));
        let t2 = f.mul(&f.from_i64(-8), &f.mul(&b4, &f.mul(&b4, &b4)));
        let t3 = f.mul(&f.from_i64(-27), &f.mul(&b6, &b6));
        let t4 = f.mul(&f.from_i64(9), &f.mul(&b2, &f.mul(&b4, &b6)));
        f.add(&f.add(&t1, &t2), &f.add(&t3, &t4))
    }

    pub fn on_curve(&self, p: &Point<F::E>) -> bool {
        let f = &self.field;
        match p {
            Point::Inf => true,
            Point::Aff(x, y) => {
                let lhs = f.add(&f.mul(y, y), &f.mul(y, &f.add(&f.mul(self.c(0), x), self.c(2))));
                let x2 = f.mul(x, x);
                let rhs = f.add(
                    &f.add(&f.mul(&x2, x), &f.mul(self.c(1), &x2)),
                    &f.add(&f.mul(self.c(3), x), self.c(4)),
                );
                lhs == rhs
            }
        }
    }

    pub fn neg(&self, p: &Point<F::E>) -> Point<F::E> {
        let f = &self.field;
        match p {
            Point::Inf => Point::Inf,
            Point::Aff(x, y) => {
                let t = f.add(&f.mul(self.c(0), x), self.c(2));
                Point::Aff(x.clone(), f.sub(&f.sub(&f.zero(), y), &t))
            }
        }
    }

    /// Slope of the chord or tangent through P and Q, or None when vertical.
    pub fn slope(&self, p: &Point<F::E>, q: &Point<F::E>) -> Option<F::E> {
        let f = &self.field;
        let (Point::Aff(x1, y1), Point::Aff(x2, y2)) = (p, q) else {
            return None;
        };
        if x1 != x2 {
            return Some(f.mul(&f.sub(y2, y1), &f.inv(&f.sub(x2, x1))?));
        }
        let den = f.add(
            &f.add(&f.mul(&f.from_i64(2), y1), &f.mul(self.c(0), x1)),
            self.c(2),
        );
        if y1 != y2 || f.is_zero(&den) {
            return None;
        }
        let num = f.sub(
            &f.add(
                &f.add(&f.mul(&f.from_i64(3), &f.mul(x1, x1)), &f.mul(&f.mul(&f.from_i64(2), self.c(1)), x1)),
                self.c(3),
            ),
            &f.mul(self.c(0), y1),
        );
        Some(f.mul(&num, &f.inv(&den)?))
    }

    pub fn add(&self, p: &Point<F::E>, q: &Point<F::E>) -> Point<F::E> {
        let f = &self.field;
        match (p, q) {
            (Point::Inf, _) => q.clone(),
            (_, Point::Inf) => p.clone(),
            (Point::Aff(x1, y1), Point::Aff(x2, _)) => match self.slope(p, q) {
                None => Point::Inf,
                Some(l) => {
                    let x3 = f.sub(
                        &f.sub(&f.sub(&f.add(&f.mul(&l, &l), &f.mul(self.c(0), &l)), self.c(1)), x1),
                        x2,
                    );
                    let y3 = f.sub(
                        &f.sub(&f.mul(&l, &f.sub(x1, &x3)), y1),
                        &f.add(&f.mul(self.c(0), &x3), self.c(2)),
                    );
                    Point::Aff(x3, y3)
                }
            },
        }
    }

    pub fn mul(&self, k: i64, p: &Point<F::E>) -> Point<F::E> {
        let mut base = if k < 0 { self.neg(p) } else { p.clone() };
        let mut k = k.unsigned_abs();
        let mut acc = Point::Inf;
        while k > 0 {
            if k & 1 == 1 {
                acc = self.add(&acc, &base);
            }
            base = self.add(&base, &base);
            k >>= 1;
        }
        acc
    }

    /// Exact order of p if it divides `bound`.
    pub fn order(&self, p: &Point<F::E>, bound: u64) -> Option<u64> {
        if !self.mul(bound as i64, p).is_inf() {
            return None;
        }
        let mut ord = bound;
        for (q, _) in arith::factor(bound) {
            while ord % q == 0 && self.mul((ord / q) as i64, p).is_inf() {
                ord /= q;
            }
        }
        Some(ord)
    }
}

pub type CurveL = Curve<Cyclo>;
pub type PointL = Point<CycloElem>;

/// A curve over L with the arithmetic data the constructions rely on.
#[derive(Clone, Debug, PartialEq)]
pub struct CurveOverL {
    pub curve: CurveL,
    pub discriminant: CycloElem,
    pub torsion_basis: Option<(PointL, PointL)>,
    pub mw_generators: Vec<PointL>,
    pub stable_subgroup_order: Option<u32>,
}

impl CurveOverL {
    pub fn new(
        a: [CycloElem; 5],
        torsion_basis: Option<(PointL, PointL)>,
        mw_generators: Vec<PointL>,
        stable_subgroup_order: Option<u32>,
    ) -> Result<CurveOverL> {
        let level = a[0].level();
        if a.iter().any(|c| c.level() != level) {
            return input("coefficients at different levels");
        }
        let curve = Curve { field: Cyclo::new(level)?, a };
        let discriminant = curve.discriminant();
        if discriminant.is_zero() {
            return input("singular curve: discriminant is zero");
        }
        let mut all: Vec<(String, &PointL)> = Vec::new();
        if let Some((s, t)) = &torsion_basis {
            all.push((String::from("basis/0"), s));
            all.push((String::from("basis/1"), t));
        }
        for (i, g) in mw_generators.iter().enumerate() {
            all.push((format!("generators/{i}"), g));
        }
        for (name, p) in all {
            if let Point::Aff(x, y) = p {
                if x.level() != level || y.level() != level {
                    return input(format!("{name}: point lives at the wrong level"));
                }
            }
            if !curve.on_curve(p) {
                return input(format!("{name}: point is not on the curve"));
            }
        }
        Ok(CurveOverL {
            curve,
            discriminant,
            torsion_basis,
            mw_generators,
            stable_subgroup_order,
        })
    }

    pub fn level(&self) -> u32 {
        self.curve.field.n()
    }

    pub fn is_rational(&self) -> bool {
        self.curve.a.iter().all(|c| c.is_rational())
    }

    /// Rewrites the curve and its points in Q(ζ_{m·level}).
    pub fn embed(&self, m: u32) -> Result<CurveOverL> {
        let emb = |p: &PointL| -> Result<PointL> {
            Ok(match p {
                Point::Inf => Point::Inf,
                Point::Aff(x, y) => Point::Aff(x.embed(m)?, y.embed(m)?),
            })
        };
        let a = [
            self.curve.a[0].embed(m)?,
            self.curve.a[1].embed(m)?,
            self.curve.a[2].embed(m)?,
            self.curve.a[3].embed(m)?,
            self.curve.a[4].embed(m)?,
        ];
        let basis = match &self.torsion_basis {
            Some((s, t)) => Some((emb(s)?, emb(t)?)),
            None => None,
        };
        let gens = self.mw_generators.iter().map(emb).collect::<Result<Vec<_>>>()?;
        CurveOverL::new(a, basis, gens, self.stable_subgroup_order)
    }

    /// Hash of the coefficients and declared points, in canonical text.
    pub fn digest(&self) -> String {
        let mut h = Sha256::new();
        h.update(self.canonical_text().as_bytes());
        let out = h.finalize();
        out.iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn canonical_text(&self) -> String {
        let pt = |p: &PointL| match p {
            Point::Inf => String::from("O"),
            Point::Aff(x, y) => format!("({},{})", x.to_string_poly(), y.to_string_poly()),
        };
        let mut s = format!("level={};a=", self.level());
        for c in &self.curve.a {
            s += &c.to_string_poly();
            s.push(';');
        }
        if let Some((a, b)) = &self.torsion_basis {
            s += &format!("S={};T={};", pt(a), pt(b));
        }
        for g in &self.mw_generators {
            s += &format!("G={};", pt(g));
        }
        if let Some(o) = self.stable_subgroup_order {
            s += &format!("stable={o};");
        }
        s
    }

    /// The reduction at a split place, which must be of good reduction.
    pub fn reduce(&self, v: &SplitPlace) -> Result<CurveFp> {
        let mut a = [0u64; 5];
        for (i, c) in self.curve.a.iter().enumerate() {
            a[i] = c.reduce_at(v)?.0;
        }
        let e = CurveFp::new(v.p, a);
        if e.curve.discriminant() == 0 {
            return input(format!("bad reduction at {}:{}", v.p, v.omega));
        }
        Ok(e)
    }

    pub fn reduce_point(&self, p: &PointL, v: &SplitPlace) -> Result<PointFp> {
        match p {
            Point::Inf => Ok(Point::Inf),
            Point::Aff(x, y) => {
                let (vx, _) = if x.is_zero() { (0, 0) } else { x.local_data(v)? };
                if vx < 0 {
                    return Ok(Point::Inf);
                }
                Ok(Point::Aff(x.reduce_at(v)?.0, y.reduce_at(v)?.0))
            }
        }
    }

    pub fn galois_point(&self, p: &PointL, s: &GaloisAuto) -> Result<PointL> {
        Ok(match p {
            Point::Inf => Point::Inf,
            Point::Aff(x, y) => Point::Aff(x.galois(s)?, y.galois(s)?),
        })
    }

    /// Checks nS = nT = O exactly and e_n(S̄, T̄) = ω at v.
    pub fn verify_torsion_basis(&self, n: u32, v: &SplitPlace, seed: u64) -> Result<TorsionCheck> {
        let Some((s, t)) = &self.torsion_basis else {
            return input("no torsion basis declared");
        };
        for (name, p) in [("S", s), ("T", t)] {
            if !self.curve.mul(n as i64, p).is_inf() {
                return Ok(TorsionCheck::Fail(format!("{n}{name} is not the identity")));
            }
        }
        let e = self.reduce(v)?;
        let (sb, tb) = (self.reduce_point(s, v)?, self.reduce_point(t, v)?);
        let w = e.weil_pairing(&sb, &tb, n, seed)?;
        let omega = v.restrict(n).omega;
        if w == omega {
            return Ok(TorsionCheck::Pass);
        }
        match arith::dlog(w, omega, n as u64, v.p) {
            Some(k) if k == 0 => Ok(TorsionCheck::Fail(String::from("pairing is 1: S and T are dependent"))),
            Some(k) => Ok(TorsionCheck::Fail(format!(
                "pairing is ω^{k}, expected ω"
            ))),
            None => Ok(TorsionCheck::Fail(String::from("pairing is not an n-th root of unity"))),
        }
    }

    /// All aS + bT for 0 ≤ a, b < n, row-major in a.
    pub fn torsion_grid(&self, n: u32) -> Result<Vec<PointL>> {
        let Some((s, t)) = &self.torsion_basis else {
            return input("no torsion basis declared");
        };
        let mut out = Vec::with_capacity((n * n) as usize);
        let mut sa = Point::Inf;
        for _ in 0..n {
            let mut p = sa.clone();
            for _ in 0..n {
                out.push(p.clone());
                p = self.curve.add(&p, t);
            }
            sa = self.curve.add(&sa, s);
        }
        Ok(out)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TorsionCheck {
    Pass,
    Fail(String),
}

/// Builds a curve over Q(ζ_level) from rational coefficients.
pub fn rational_curve(level: u32, a: [BigRational; 5]) -> Result<CurveL> {
    let k = Cyclo::new(level)?;
    let a = a.map(|c| k.from_rational(c));
    Ok(Curve { field: k, a })
}
