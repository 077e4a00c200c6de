//! Scalar backends for orbit iteration.
//!
//! Everything jet-valued runs in `f64`; orbits of the critical point can be
//! driven either in plain `f64` (with compensated error tracking done by the
//! callers) or in double-double when a measurement needs to resolve
//! separations below what ~1e-16 per-step noise allows.

use std::cmp::Ordering;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::sync::OnceLock;

/// sin(2*pi*x) with the argument reduced to [-1/2, 1/2) first.
///
/// Reducing before calling libm makes lift periodicity exact: x and x+1
/// produce bit-identical values.
pub fn sin_2pi_f64(x: f64) -> f64 {
    let t = wrap_signed_f64(x);
    (std::f64::consts::TAU * t).sin()
}

/// cos(2*pi*x) with the same reduction as [`sin_2pi_f64`].
pub fn cos_2pi_f64(x: f64) -> f64 {
    let t = wrap_signed_f64(x);
    (std::f64::consts::TAU * t).cos()
}

/// Reduce to [0, 1).
pub fn wrap_unit_f64(x: f64) -> f64 {
    let t = x - x.floor();
    if t >= 1.0 {
        0.0
    } else {
        t
    }
}

/// Reduce to [-1/2, 1/2).
pub fn wrap_signed_f64(x: f64) -> f64 {
    let t = wrap_unit_f64(x);
    if t >= 0.5 {
        t - 1.0
    } else {
        t
    }
}

/// Scalar usable for orbit iteration.
pub trait Real:
    Copy
    + PartialOrd
    + std::fmt::Debug
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    /// Machine epsilon of the backend.
    const EPS: f64;
    const NAME: &'static str;

    fn from_f64(x: f64) -> Self;
    fn to_f64(self) -> f64;
    fn abs(self) -> Self;
    fn floor(self) -> Self;
    fn mul_f64(self, k: f64) -> Self;
    fn sin_2pi(self) -> Self;
    fn cos_2pi(self) -> Self;
    /// sin and cos of 2 pi x sharing one argument reduction; the cosine is
    /// only needed at working precision (derivative tracking).
    fn sin_cos_2pi(self) -> (Self, f64);
    fn exp(self) -> Self;
    fn powi(self, n: i32) -> Self;
    /// Real exponent power; `None` when the backend cannot honour it at
    /// full precision (double-double has no general powf).
    fn try_powf(self, p: f64) -> Option<Self>;

    fn wrap_unit(self) -> Self {
        let t = self - self.floor();
        if t.to_f64() >= 1.0 {
            Self::from_f64(0.0)
        } else {
            t
        }
    }

    fn wrap_signed(self) -> Self {
        let t = self.wrap_unit();
        if t.to_f64() >= 0.5 {
            t - Self::from_f64(1.0)
        } else {
            t
        }
    }
}

impl Real for f64 {
    const EPS: f64 = f64::EPSILON;
    const NAME: &'static str = "f64";

    fn from_f64(x: f64) -> Self {
        x
    }
    fn to_f64(self) -> f64 {
        self
    }
    fn abs(self) -> Self {
        f64::abs(self)
    }
    fn floor(self) -> Self {
        f64::floor(self)
    }
    fn mul_f64(self, k: f64) -> Self {
        self * k
    }
    fn sin_2pi(self) -> Self {
        sin_2pi_f64(self)
    }
    fn cos_2pi(self) -> Self {
        cos_2pi_f64(self)
    }
    fn sin_cos_2pi(self) -> (Self, f64) {
        let t = wrap_signed_f64(self);
        (std::f64::consts::TAU * t).sin_cos()
    }
    fn exp(self) -> Self {
        f64::exp(self)
    }
    fn powi(self, n: i32) -> Self {
        f64::powi(self, n)
    }
    fn try_powf(self, p: f64) -> Option<Self> {
        Some(f64::powf(self, p))
    }
}

// ---------------------------------------------------------------------------
// Double-double arithmetic
// ---------------------------------------------------------------------------

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

#[cfg(target_feature = "fma")]
#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

// Dekker splitting when hardware FMA is unavailable: f64::mul_add would
// fall back to a (slow, but correct) software fma.
#[cfg(not(target_feature = "fma"))]
#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    const SPLIT: f64 = 134217729.0; // 2^27 + 1
    let p = a * b;
    let ta = SPLIT * a;
    let ah = ta - (ta - a);
    let al = a - ah;
    let tb = SPLIT * b;
    let bh = tb - (tb - b);
    let bl = b - bh;
    (p, ((ah * bh - p) + ah * bl + al * bh) + al * bl)
}

/// Unevaluated sum of two doubles, |lo| <= ulp(hi)/2 after renormalization.
#[derive(Clone, Copy, Debug, Default)]
pub struct Dd {
    pub hi: f64,
    pub lo: f64,
}

impl Dd {
    pub const ZERO: Dd = Dd { hi: 0.0, lo: 0.0 };
    pub const ONE: Dd = Dd { hi: 1.0, lo: 0.0 };
    /// 2*pi to double-double precision.
    pub const TAU: Dd = Dd {
        hi: 6.283185307179586,
        lo: 2.4492935982947064e-16,
    };
    /// ln 2 to double-double precision.
    pub const LN2: Dd = Dd {
        hi: 0.6931471805599453,
        lo: 2.3190468138462996e-17,
    };

    #[inline]
    pub fn new(hi: f64, lo: f64) -> Self {
        let (s, e) = quick_two_sum(hi, lo);
        Dd { hi: s, lo: e }
    }

    #[inline]
    pub fn from_f64(x: f64) -> Self {
        Dd { hi: x, lo: 0.0 }
    }

    #[inline]
    pub fn add(self, o: Dd) -> Dd {
        let (s, e) = two_sum(self.hi, o.hi);
        Dd::new(s, e + self.lo + o.lo)
    }

    #[inline]
    pub fn sub(self, o: Dd) -> Dd {
        self.add(o.neg())
    }

    #[inline]
    pub fn neg(self) -> Dd {
        Dd {
            hi: -self.hi,
            lo: -self.lo,
        }
    }

    #[inline]
    pub fn mul(self, o: Dd) -> Dd {
        let (p, e) = two_prod(self.hi, o.hi);
        Dd::new(p, e + self.hi * o.lo + self.lo * o.hi)
    }

    #[inline]
    pub fn mul_f64(self, k: f64) -> Dd {
        let (p, e) = two_prod(self.hi, k);
        Dd::new(p, e + self.lo * k)
    }

    #[inline]
    pub fn div(self, o: Dd) -> Dd {
        let q1 = self.hi / o.hi;
        let r = self.sub(o.mul_f64(q1));
        let q2 = r.hi / o.hi;
        let r = r.sub(o.mul_f64(q2));
        let q3 = r.hi / o.hi;
        Dd::new(q1, q2).add(Dd::from_f64(q3))
    }

    #[inline]
    pub fn abs(self) -> Dd {
        if self.hi < 0.0 || (self.hi == 0.0 && self.lo < 0.0) {
            self.neg()
        } else {
            self
        }
    }

    pub fn floor(self) -> Dd {
        let fh = self.hi.floor();
        if fh != self.hi {
            // hi is not integral; lo cannot push the sum across an integer.
            Dd { hi: fh, lo: 0.0 }
        } else {
            Dd::new(fh, self.lo.floor())
        }
    }

    pub fn round(self) -> Dd {
        self.add(Dd::from_f64(0.5)).floor()
    }

    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    fn cmp_total(self, o: Dd) -> Ordering {
        match self.hi.partial_cmp(&o.hi) {
            Some(Ordering::Equal) => self.lo.partial_cmp(&o.lo).unwrap_or(Ordering::Equal),
            Some(ord) => ord,
            None => Ordering::Equal,
        }
    }

    /// exp(x), argument assumed moderate (|x| < ~700).
    pub fn exp(self) -> Dd {
        let k = (self.hi / Dd::LN2.hi).round();
        let r = self.sub(Dd::LN2.mul_f64(k));
        // sum_{j} r^j / j!, |r| <= ln2/2
        let table = inv_factorials();
        let mut acc = table[EXP_TERMS - 1];
        for j in (0..EXP_TERMS - 1).rev() {
            acc = acc.mul(r).add(table[j]);
        }
        let scale = 2.0f64.powi(k as i32);
        Dd {
            hi: acc.hi * scale,
            lo: acc.lo * scale,
        }
    }

    /// sin(2*pi*x) for any x: reduce mod 1, then quadrant reduction and a
    /// Taylor series on |w| <= pi/4.
    pub fn sin_2pi(self) -> Dd {
        let (m, w) = reduce_2pi(self);
        let (s, c) = sin_cos_small(w);
        match m.rem_euclid(4) {
            0 => s,
            1 => c,
            2 => s.neg(),
            _ => c.neg(),
        }
    }

    pub fn cos_2pi(self) -> Dd {
        let (m, w) = reduce_2pi(self);
        let (s, c) = sin_cos_small(w);
        match m.rem_euclid(4) {
            0 => c,
            1 => s.neg(),
            2 => c.neg(),
            _ => s,
        }
    }

    pub fn powi(self, n: i32) -> Dd {
        if n == 0 {
            return Dd::ONE;
        }
        let mut base = if n < 0 { Dd::ONE.div(self) } else { self };
        let mut e = n.unsigned_abs();
        let mut acc = Dd::ONE;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(base);
            }
            base = base.mul(base);
            e >>= 1;
        }
        acc
    }
}

/// Split 2*pi*x into quadrant index m and residual angle w = 2*pi*r with
/// |r| <= 1/8.
fn reduce_2pi(x: Dd) -> (i32, Dd) {
    let t = {
        let u = x.sub(x.floor());
        if u.hi >= 0.5 {
            u.sub(Dd::ONE)
        } else {
            u
        }
    };
    let m = (4.0 * t.hi).round();
    let r = t.sub(Dd::from_f64(m * 0.25));
    (m as i32, Dd::TAU.mul(r))
}

// Series lengths chosen for step accuracy ~1e-27 on |w| <= pi/4 (the
// first omitted sin term w^25/25! is ~1.5e-28). That is the accuracy the
// backend advertises through `Dd::EPS`; twenty decimal orders below f64 is
// what deep-orbit certification needs, full 1e-32 double-double is not.
const SIN_TERMS: usize = 12; // up to w^23
const COS_TERMS: usize = 13; // up to w^24
const EXP_TERMS: usize = 21;

fn inv_factorials() -> &'static [Dd; 32] {
    static TABLE: OnceLock<[Dd; 32]> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut t = [Dd::ZERO; 32];
        let mut fact = Dd::ONE;
        t[0] = Dd::ONE;
        for k in 1..32 {
            fact = fact.mul_f64(k as f64);
            t[k] = Dd::ONE.div(fact);
        }
        t
    })
}

fn sin_cos_small(w: Dd) -> (Dd, Dd) {
    let table = inv_factorials();
    let w2 = w.mul(w);
    // sin(w)/w = sum (-1)^k w^{2k} / (2k+1)!
    let mut s = if SIN_TERMS % 2 == 0 {
        table[2 * (SIN_TERMS - 1) + 1].neg()
    } else {
        table[2 * (SIN_TERMS - 1) + 1]
    };
    for k in (0..SIN_TERMS - 1).rev() {
        let coef = if k % 2 == 0 {
            table[2 * k + 1]
        } else {
            table[2 * k + 1].neg()
        };
        s = s.mul(w2).add(coef);
    }
    let sin = s.mul(w);
    let mut c = if COS_TERMS % 2 == 0 {
        table[2 * (COS_TERMS - 1)].neg()
    } else {
        table[2 * (COS_TERMS - 1)]
    };
    for k in (0..COS_TERMS - 1).rev() {
        let coef = if k % 2 == 0 {
            table[2 * k]
        } else {
            table[2 * k].neg()
        };
        c = c.mul(w2).add(coef);
    }
    (sin, c)
}

impl PartialEq for Dd {
    fn eq(&self, other: &Self) -> bool {
        self.hi == other.hi && self.lo == other.lo
    }
}

impl PartialOrd for Dd {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp_total(*other))
    }
}

impl Add for Dd {
    type Output = Dd;
    fn add(self, o: Dd) -> Dd {
        Dd::add(self, o)
    }
}
impl Sub for Dd {
    type Output = Dd;
    fn sub(self, o: Dd) -> Dd {
        Dd::sub(self, o)
    }
}
impl Mul for Dd {
    type Output = Dd;
    fn mul(self, o: Dd) -> Dd {
        Dd::mul(self, o)
    }
}
impl Div for Dd {
    type Output = Dd;
    fn div(self, o: Dd) -> Dd {
        Dd::div(self, o)
    }
}
impl Neg for Dd {
    type Output = Dd;
    fn neg(self) -> Dd {
        Dd::neg(self)
    }
}

impl Real for Dd {
    // effective per-operation accuracy of the orbit backend (series
    // truncation dominates, not the 1e-32 representation limit)
    const EPS: f64 = 2.5e-27;
    const NAME: &'static str = "dd";

    fn from_f64(x: f64) -> Self {
        Dd::from_f64(x)
    }
    fn to_f64(self) -> f64 {
        Dd::to_f64(self)
    }
    fn abs(self) -> Self {
        Dd::abs(self)
    }
    fn floor(self) -> Self {
        Dd::floor(self)
    }
    fn mul_f64(self, k: f64) -> Self {
        Dd::mul_f64(self, k)
    }
    fn sin_2pi(self) -> Self {
        Dd::sin_2pi(self)
    }
    fn cos_2pi(self) -> Self {
        Dd::cos_2pi(self)
    }
    fn sin_cos_2pi(self) -> (Self, f64) {
        let (m, w) = reduce_2pi(self);
        let (s, c) = sin_cos_small(w);
        match m.rem_euclid(4) {
            0 => (s, c.to_f64()),
            1 => (c, -s.to_f64()),
            2 => (s.neg(), -c.to_f64()),
            _ => (c.neg(), s.to_f64()),
        }
    }
    fn exp(self) -> Self {
        Dd::exp(self)
    }
    fn powi(self, n: i32) -> Self {
        Dd::powi(self, n)
    }
    fn try_powf(self, _p: f64) -> Option<Self> {
        None
    }
}
