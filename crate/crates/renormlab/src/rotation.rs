//! Continued fractions, return times, combinatorial rotation-number
//! measurement by closest returns, and tuning of a one-parameter family to
//! a target rotation number.
//!
//! The measurement never averages: partial quotients are read off as counts
//! of closest returns of the critical orbit, which is exact combinatorics
//! as long as side-of-the-critical-point comparisons are trustworthy. When
//! an f64 orbit cannot certify a comparison the measurement retries in
//! double-double.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::map::{Backend, CircleMap, PrecisionPolicy};
use crate::real::{wrap_unit_f64, Dd, Real};

/// (sqrt(5) - 1)/2
pub const GOLDEN_MEAN: f64 = 0.618_033_988_749_894_9;

// ---------------------------------------------------------------------------
// Continued fractions
// ---------------------------------------------------------------------------

/// [a0, a1, ...] with x = 1/(a0 + 1/(a1 + ...)), convergents p_n/q_n where
/// q_0 = 1, q_1 = a_0, q_{n+1} = a_n q_n + q_{n-1} (and the same recursion
/// for p with p_0 = 0, p_1 = 1).
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ContinuedFraction {
    pub quotients: Vec<u64>,
    /// (p_n, q_n) for n = 0..=quotients.len()
    pub convergents: Vec<(u64, u64)>,
    /// true when the expansion terminated exactly (rational input)
    pub terminated: bool,
}

impl ContinuedFraction {
    pub fn from_quotients(quotients: Vec<u64>, terminated: bool) -> Self {
        let mut convergents = Vec::with_capacity(quotients.len() + 1);
        convergents.push((0u64, 1u64));
        let (mut p_prev, mut q_prev) = (1u64, 0u64);
        for (i, &a) in quotients.iter().enumerate() {
            let (p_cur, q_cur) = convergents[i];
            let p_next = a
                .checked_mul(p_cur)
                .and_then(|m| m.checked_add(p_prev))
                .expect("convergent numerator overflow");
            let q_next = a
                .checked_mul(q_cur)
                .and_then(|m| m.checked_add(q_prev))
                .expect("convergent denominator overflow");
            p_prev = p_cur;
            q_prev = q_cur;
            convergents.push((p_next, q_next));
        }
        ContinuedFraction {
            quotients,
            convergents,
            terminated,
        }
    }

    /// Gauss-map expansion of x in (0,1). Terminates early when the
    /// remainder underflows working precision.
    pub fn expand(x: f64, max_terms: usize) -> Result<Self> {
        if !(0.0..1.0).contains(&x) || x == 0.0 {
            return Err(Error::Invalid(format!("cannot expand {x} as [a0,a1,...]")));
        }
        let mut quotients = Vec::new();
        let mut rem = x;
        let mut scale = 1.0f64; // rough size of the current remainder's ulp
        let mut terminated = false;
        for _ in 0..max_terms {
            let inv = 1.0 / rem;
            let a = inv.floor();
            if a < 1.0 || !a.is_finite() || a >= 9.0e15 {
                terminated = true;
                break;
            }
            quotients.push(a as u64);
            let next = inv - a;
            scale *= inv * inv;
            if next <= f64::EPSILON * scale.max(1.0) {
                terminated = true;
                break;
            }
            rem = next;
        }
        Ok(ContinuedFraction::from_quotients(quotients, terminated))
    }

    /// Value of the deepest convergent.
    pub fn value(&self) -> f64 {
        let &(p, q) = self.convergents.last().unwrap();
        p as f64 / q as f64
    }

    /// q_0..q_n (requires at least n quotients).
    pub fn return_times(&self, n: usize) -> Result<Vec<u64>> {
        if self.quotients.len() < n {
            return Err(Error::Invalid(format!(
                "return_times needs {n} quotients, have {}",
                self.quotients.len()
            )));
        }
        Ok(self.convergents[..=n].iter().map(|&(_, q)| q).collect())
    }
}

// ---------------------------------------------------------------------------
// Rotation targets
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum TailRule {
    /// The listed quotients are all of them (a rational target).
    Terminate,
    /// The final listed quotient repeats forever.
    RepeatLast,
    /// Quotient 2 everywhere except at the anchor indices, which carry
    /// 32, 128, 512, ... (capped); the desk-scale stand-in for
    /// double-exponential quotients on a sparse subsequence.
    DoubleExp { anchors: Vec<u32> },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RotationTarget {
    pub head: Vec<u64>,
    pub tail: TailRule,
}

impl RotationTarget {
    pub fn golden() -> Self {
        RotationTarget {
            head: vec![1],
            tail: TailRule::RepeatLast,
        }
    }

    pub fn silver() -> Self {
        RotationTarget {
            head: vec![2],
            tail: TailRule::RepeatLast,
        }
    }

    pub fn from_quotients(head: Vec<u64>, tail: TailRule) -> Result<Self> {
        if head.iter().any(|&a| a == 0) {
            return Err(Error::Invalid("partial quotients must be >= 1".into()));
        }
        if head.is_empty() && !matches!(tail, TailRule::DoubleExp { .. }) {
            return Err(Error::Invalid("empty quotient list".into()));
        }
        Ok(RotationTarget { head, tail })
    }

    /// CLI syntax: "1,1,1,*" (periodic tail), "3,2,5" (rational),
    /// "rule:doubleexp@3,7" (generator).
    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        match s {
            "golden" => return Ok(Self::golden()),
            "silver" => return Ok(Self::silver()),
            _ => {}
        }
        if let Some(rule) = s.strip_prefix("rule:") {
            if let Some(args) = rule.strip_prefix("doubleexp@") {
                let anchors = args
                    .split(',')
                    .map(|t| {
                        t.trim()
                            .parse::<u32>()
                            .map_err(|e| Error::Invalid(format!("bad anchor {t:?}: {e}")))
                    })
                    .collect::<Result<Vec<_>>>()?;
                if anchors.is_empty() {
                    return Err(Error::Invalid("doubleexp rule needs anchors".into()));
                }
                return Self::from_quotients(vec![], TailRule::DoubleExp { anchors });
            }
            return Err(Error::Invalid(format!("unknown generator rule {rule:?}")));
        }
        let mut parts: Vec<&str> = s.split(',').map(str::trim).collect();
        let tail = if parts.last() == Some(&"*") {
            parts.pop();
            TailRule::RepeatLast
        } else {
            TailRule::Terminate
        };
        let head = parts
            .iter()
            .map(|t| {
                t.parse::<u64>()
                    .map_err(|e| Error::Invalid(format!("bad quotient {t:?}: {e}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_quotients(head, tail)
    }

    pub fn quotient(&self, n: usize) -> Option<u64> {
        if n < self.head.len() {
            return Some(self.head[n]);
        }
        match &self.tail {
            TailRule::Terminate => None,
            TailRule::RepeatLast => self.head.last().copied(),
            TailRule::DoubleExp { anchors } => {
                let rank = anchors.iter().position(|&a| a as usize == n);
                Some(match rank {
                    Some(r) => (32u64 << (2 * r as u32)).min(512),
                    None => 2,
                })
            }
        }
    }

    pub fn quotients(&self, depth: usize) -> Vec<u64> {
        (0..depth).map_while(|n| self.quotient(n)).collect()
    }

    pub fn is_rational(&self) -> bool {
        matches!(self.tail, TailRule::Terminate)
    }

    /// Bounded-type flag over the requested depth against a declared bound.
    pub fn is_bounded_type(&self, depth: usize, bound: u64) -> bool {
        self.quotients(depth).iter().all(|&a| a <= bound)
    }

    /// Approximate value from the convergents at the given depth.
    pub fn value(&self, depth: usize) -> f64 {
        let mut quots = Vec::new();
        let (mut q_cur, mut q_prev) = (1u128, 0u128);
        for n in 0..depth {
            match self.quotient(n) {
                Some(a) => {
                    let q_next = a as u128 * q_cur + q_prev;
                    if q_next > (1u128 << 62) {
                        break;
                    }
                    quots.push(a);
                    q_prev = q_cur;
                    q_cur = q_next;
                }
                None => break,
            }
        }
        ContinuedFraction::from_quotients(quots, false).value()
    }

    /// Smallest N with 1/(q_N q_{N+1}) < tol: matching quotients a_0..a_N
    /// pins the rotation number to within tol.
    pub fn prefix_depth_for(&self, tol: f64) -> Result<usize> {
        let (mut q_cur, mut q_prev) = (1u128, 0u128); // q_0 = 1, q_{-1} = 0
        let mut n = 0usize;
        loop {
            let a = match self.quotient(n) {
                Some(a) => a,
                None => return Ok(n), // rational target: all of it
            };
            let q_next = a as u128 * q_cur + q_prev;
            // after this step q_cur = q_{n+1}: test 1/(q_n q_{n+1})
            if (q_cur * q_next) as f64 > 1.0 / tol {
                return Ok(n);
            }
            q_prev = q_cur;
            q_cur = q_next;
            n += 1;
            if n > 200 {
                return Err(Error::Invalid(format!(
                    "tolerance {tol} needs more than 200 quotients"
                )));
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Closest-return measurement
// ---------------------------------------------------------------------------

/// Data accumulated by the closest-return measurement.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ClosestReturns {
    /// a_0..a_depth
    pub quotients: Vec<u64>,
    /// q_0..q_{depth+1}
    pub return_times: Vec<u64>,
    /// measured numerators p_0..p_{depth+1} (wrap counts of the orbit),
    /// cross-validated against the convergent recursion
    pub numerators: Vec<u64>,
    /// |I_n| = circle distance from f^{q_n}(c) to c, n = 0..=depth+1
    pub side_lengths: Vec<f64>,
    /// +1 when f^{q_n}(c) lies on the positive side of c
    pub directions: Vec<i8>,
    pub backend: &'static str,
    pub orbit_steps: u64,
}

impl ClosestReturns {
    /// Signed chart displacement d_n with A_n(x) = c + x d_n.
    pub fn signed_displacement(&self, n: usize) -> f64 {
        self.side_lengths[n] * self.directions[n] as f64
    }

    pub fn lambda(&self, n: usize) -> f64 {
        -self.side_lengths[n] / self.side_lengths[n - 1]
    }
}

/// How a measurement ended.
#[derive(Clone, Copy, Debug)]
enum MeasureEnd {
    /// all requested stages counted
    Full,
    /// a per-stage cap stopped it: (stage, measured quotient above the cap?)
    CapHit(usize, bool),
    /// a periodic orbit was encountered (exact closure of the critical
    /// orbit, or the orbit converged onto an attracting cycle inside a
    /// mode-locked window); the rotation number is exactly p/q
    Locked(u64, u64),
}

struct Walker<'m, R: Real> {
    map: &'m CircleMap,
    c: R,
    pos: R,
    /// circular offset of `pos` from c, in [0,1)
    tau: f64,
    err: f64,
    steps: u64,
    guard: u64,
    lock_tol: f64,
    crossings: u64,
}

impl<'m, R: Real> Walker<'m, R> {
    fn new(map: &'m CircleMap, policy: &PrecisionPolicy) -> Self {
        let c = R::from_f64(wrap_unit_f64(map.critical));
        Walker {
            map,
            c,
            pos: c,
            tau: 0.0,
            err: 0.0,
            steps: 0,
            guard: policy.orbit_guard,
            lock_tol: 1e3 * R::EPS,
            crossings: 0,
        }
    }

    /// Jump the walker to an anchored point, restoring that point's own
    /// accumulated error estimate.
    fn seat(&mut self, a: Anchor<R>) {
        self.pos = a.pos;
        self.tau = self.tau_of(a.pos);
        self.crossings = a.cross;
        self.err = a.err;
    }

    /// Offset from the critical point in [0,1). Computed in f64: every
    /// comparison made with it is guarded by the error estimate, which is
    /// itself far above 1 ulp.
    fn tau_of(&self, pos: R) -> f64 {
        wrap_unit_f64(pos.to_f64() - self.c.to_f64())
    }

    fn anchor(&self) -> Anchor<R> {
        Anchor {
            pos: self.pos,
            cross: self.crossings,
            err: self.err,
        }
    }

    /// Advance one step, counting crossings of the critical point.
    fn step(&mut self) -> Result<()> {
        if self.steps >= self.guard {
            return Err(Error::Invalid(format!(
                "orbit guard {} exhausted during measurement",
                self.guard
            )));
        }
        let (next, slope) = self.map.step(self.pos)?;
        self.err = self.err * slope.abs() + 4.0 * R::EPS;
        self.steps += 1;
        let tau_next = self.tau_of(next);
        if tau_next < self.tau {
            self.crossings += 1;
        }
        self.pos = next;
        self.tau = tau_next;
        Ok(())
    }

    fn block(&mut self, len: u64) -> Result<()> {
        for _ in 0..len {
            self.step()?;
        }
        Ok(())
    }

    fn offset(&self, dir: i8) -> f64 {
        if dir > 0 {
            self.tau
        } else {
            1.0 - self.tau
        }
    }

    /// Margin of the current point from the critical point.
    fn margin(&self) -> f64 {
        self.tau.min(1.0 - self.tau)
    }

    fn ambiguous(&self) -> Result<()> {
        if self.margin() < 4.0 * self.err {
            return Err(Error::PrecisionExhausted(format!(
                "side comparison ambiguous: offset {:.3e} vs error {:.3e}",
                self.margin(),
                self.err
            )));
        }
        Ok(())
    }

    /// Numerator adjustment: round rather than floor the accumulated lift
    /// displacement.
    fn round_up(&self) -> u64 {
        u64::from(self.tau > 0.5)
    }
}

#[derive(Clone, Copy)]
struct Anchor<R: Real> {
    pos: R,
    cross: u64,
    err: f64,
}

struct RawMeasurement {
    returns: ClosestReturns,
    end: MeasureEnd,
}

fn measure_impl<R: Real>(
    map: &CircleMap,
    depth: usize,
    policy: &PrecisionPolicy,
    caps: Option<&RotationTarget>,
) -> Result<RawMeasurement> {
    let mut w: Walker<R> = Walker::new(map, policy);
    let mut quotients: Vec<u64> = Vec::new();
    let mut times = vec![1u64]; // q_0
    let mut nums = vec![0u64]; // p_0
    let mut lens: Vec<f64> = Vec::new();
    let mut dirs: Vec<i8> = vec![1];
    let stall_tol = w.lock_tol;

    let done = |quotients: Vec<u64>,
                times: Vec<u64>,
                nums: Vec<u64>,
                lens: Vec<f64>,
                dirs: Vec<i8>,
                steps: u64,
                end: MeasureEnd| {
        Ok(RawMeasurement {
            returns: ClosestReturns {
                quotients,
                return_times: times,
                numerators: nums,
                side_lengths: lens,
                directions: dirs,
                backend: R::NAME,
                orbit_steps: steps,
            },
            end,
        })
    };

    // --- stage 0: count forward steps before the orbit passes c again ---
    let cap0 = caps.and_then(|t| t.quotient(0));
    let mut prev_tau = 0.0f64;
    let mut u_anchor = None;
    let a0 = loop {
        w.step()?;
        let k = w.steps;
        if w.margin() < w.lock_tol {
            let p = w.crossings + w.round_up();
            return done(quotients, times, nums, lens, dirs, k, MeasureEnd::Locked(p, k));
        }
        w.ambiguous()?;
        if k == 1 {
            u_anchor = Some(w.anchor());
            lens.push(w.tau); // |I_0|
        }
        if k > 1 && w.tau < prev_tau {
            break k - 1; // wrapped past c at step k
        }
        if k > 1 && (w.tau - prev_tau).abs() < stall_tol {
            // converged onto a fixed point: rotation number 0
            return done(quotients, times, nums, lens, dirs, k, MeasureEnd::Locked(0, 1));
        }
        if let Some(t0) = cap0 {
            if k > t0 {
                return done(quotients, times, nums, lens, dirs, k, MeasureEnd::CapHit(0, true));
            }
        }
        prev_tau = w.tau;
    };
    if a0 == 0 {
        return Err(Error::Combinatorics(
            "first-return count zero; map does not rotate forward".into(),
        ));
    }
    let mut u = u_anchor.unwrap();
    u.cross = 0;
    // v = f^{q_1}(c): re-walk to it so the anchor state is consistent
    w.seat(u);
    w.block(a0 - 1)?;
    let mut v = w.anchor();
    quotients.push(a0);
    times.push(a0); // q_1
    nums.push(1); // p_1
    lens.push(w.offset(-1)); // |I_1|
    dirs.push(-1);
    if let Some(t0) = cap0 {
        if a0 != t0 {
            let steps = w.steps;
            return done(
                quotients,
                times,
                nums,
                lens,
                dirs,
                steps,
                MeasureEnd::CapHit(0, a0 > t0),
            );
        }
    }

    // --- stages n >= 1 ---
    for n in 1..=depth {
        let q_prev = times[n - 1];
        let q_cur = times[n];
        let dir_prev = dirs[n - 1];
        let len_prev = lens[n - 1];
        let len_cur = lens[n];
        let threshold = (1.0 + len_prev - len_cur) / 2.0;
        let cap = caps.and_then(|t| t.quotient(n));

        w.seat(u);
        let mut k = 0u64;
        let mut prev_y = u;
        let mut prev_off = len_prev;
        let counted: u64 = loop {
            w.block(q_cur)?;
            k += 1;
            if w.margin() < w.lock_tol {
                // exact closure after q_{n-1} + k q_n iterates
                let period = q_prev + k * q_cur;
                let p = w.crossings + w.round_up();
                let steps = w.steps;
                return done(
                    quotients,
                    times,
                    nums,
                    lens,
                    dirs,
                    steps,
                    MeasureEnd::Locked(p, period),
                );
            }
            w.ambiguous()?;
            let xi = w.offset(dir_prev);
            if xi > threshold {
                break k - 1; // crossed to the other side: a_n = k - 1
            }
            if (prev_off - xi).abs() < stall_tol {
                // return map stalled on an attracting cycle: the rotation
                // number is exactly the current convergent p_n/q_n
                let steps = w.steps;
                let lock = MeasureEnd::Locked(nums[n], times[n]);
                return done(quotients, times, nums, lens, dirs, steps, lock);
            }
            if let Some(t) = cap {
                if k > t {
                    let steps = w.steps;
                    return done(
                        quotients,
                        times,
                        nums,
                        lens,
                        dirs,
                        steps,
                        MeasureEnd::CapHit(n, true),
                    );
                }
            }
            prev_y = w.anchor();
            prev_off = xi;
        };

        if counted == 0 {
            return Err(Error::Combinatorics(format!(
                "zero return count at stage {n}"
            )));
        }
        let a_n = counted;
        quotients.push(a_n);
        let q_next = a_n
            .checked_mul(q_cur)
            .and_then(|m| m.checked_add(q_prev))
            .ok_or_else(|| Error::Invalid("return time overflow".into()))?;
        times.push(q_next);
        // measured numerator: crossings along c -> y_{a_n} plus the
        // near-side rounding
        let p_meas = prev_y.cross + u64::from(dir_prev < 0);
        nums.push(p_meas);
        lens.push(prev_off);
        dirs.push(dir_prev);
        // cross-validate the orbit wrap count against the convergent
        // recursion p_{n+1} = a_n p_n + p_{n-1}
        let p_expect = a_n * nums[n] + nums[n - 1];
        if p_meas != p_expect {
            return Err(Error::PrecisionExhausted(format!(
                "orbit wrap count {p_meas} disagrees with convergent recursion {p_expect} at stage {n}"
            )));
        }
        if let Some(t) = cap {
            if a_n != t {
                let steps = w.steps;
                return done(
                    quotients,
                    times,
                    nums,
                    lens,
                    dirs,
                    steps,
                    MeasureEnd::CapHit(n, a_n > t),
                );
            }
        }
        // advance anchors: u <- v, v <- y_{a_n}
        u = v;
        v = prev_y;
    }

    let steps = w.steps;
    done(quotients, times, nums, lens, dirs, steps, MeasureEnd::Full)
}

fn measure_with_escalation(
    map: &CircleMap,
    depth: usize,
    policy: &PrecisionPolicy,
    caps: Option<&RotationTarget>,
) -> Result<RawMeasurement> {
    match policy.backend {
        Backend::DoubleDouble => measure_impl::<Dd>(map, depth, policy, caps),
        Backend::F64 => match measure_impl::<f64>(map, depth, policy, caps) {
            // binary64 could not certify a side comparison: retry the
            // whole measurement in double-double
            Err(Error::PrecisionExhausted(msg)) => {
                if std::env::var("RENORMLAB_DEBUG_ESC").is_ok() {
                    eprintln!("escalating: {msg}");
                }
                measure_impl::<Dd>(map, depth, policy, caps)
            }
            other => other,
        },
    }
}

/// Partial quotients a_0..a_depth of the map's rotation number, measured
/// combinatorially from closest returns of the critical orbit.
///
/// A periodic orbit (exact closure, or convergence onto an attracting
/// cycle inside a mode-locked window) is reported as a rational lock.
pub fn rotation_number(
    map: &CircleMap,
    depth: usize,
    policy: &PrecisionPolicy,
) -> Result<(ContinuedFraction, ClosestReturns)> {
    let raw = measure_with_escalation(map, depth, policy, None)?;
    match raw.end {
        MeasureEnd::Locked(_, q) => Err(Error::RationalLock { period: q }),
        _ => {
            let cf = ContinuedFraction::from_quotients(raw.returns.quotients.clone(), false);
            Ok((cf, raw.returns))
        }
    }
}

// ---------------------------------------------------------------------------
// Tuning
// ---------------------------------------------------------------------------

/// One-parameter families with monotone rotation number.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum MapFamily {
    Rotation,
    /// The critical sine family; the bracket keeps the pointwise
    /// displacement positive (omega > 1/2pi).
    Sine,
}

impl MapFamily {
    pub fn build(&self, omega: f64) -> CircleMap {
        match self {
            MapFamily::Rotation => CircleMap::rotation(omega),
            MapFamily::Sine => CircleMap::sine(omega),
        }
    }

    pub fn bracket(&self) -> (f64, f64) {
        match self {
            MapFamily::Rotation => (1e-9, 1.0 - 1e-9),
            MapFamily::Sine => (0.161, 0.999),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum Compared {
    Matches(usize),
    MapBelow,
    MapAbove,
}

/// Alternating lexicographic order: at even index a larger quotient means a
/// smaller value.
fn quotient_order(idx: usize, measured: u64, target: u64) -> Compared {
    if measured == target {
        return Compared::Matches(idx);
    }
    let measured_bigger = measured > target;
    if (idx % 2 == 0) == measured_bigger {
        Compared::MapBelow
    } else {
        Compared::MapAbove
    }
}

/// Compare a locked rational p/q against the target by expanding p/q and
/// using the alternating order with the "missing quotient = infinity" rule.
fn compare_rational(p: u64, q: u64, target: &RotationTarget) -> Compared {
    let mut num = p;
    let mut den = q;
    let mut idx = 0usize;
    loop {
        // expand p/q in (0,1): a = floor(den/num), remainder swaps
        if num == 0 {
            // ran out: rational equals the finite prefix; treat missing as infinity
            return match target.quotient(idx) {
                None => Compared::Matches(idx),
                Some(_) => {
                    if idx % 2 == 0 {
                        Compared::MapBelow
                    } else {
                        Compared::MapAbove
                    }
                }
            };
        }
        let a = den / num;
        let r = den % num;
        match target.quotient(idx) {
            None => {
                // target rational ran out first: target has "infinity" here
                return if idx % 2 == 0 {
                    Compared::MapAbove
                } else {
                    Compared::MapBelow
                };
            }
            Some(t) => {
                if a != t || r == 0 {
                    // note: when r == 0 the expansion of p/q ends with this
                    // quotient; equal quotients with r == 0 still mean the
                    // rational is an endpoint, resolved at the next index.
                    if a != t {
                        return match quotient_order(idx, a, t) {
                            Compared::Matches(_) => unreachable!(),
                            other => other,
                        };
                    }
                    // a == t, r == 0: p/q = [..., a] exactly; next measured
                    // quotient is infinity
                    return match target.quotient(idx + 1) {
                        None => Compared::Matches(idx + 1),
                        Some(_) => {
                            if (idx + 1) % 2 == 0 {
                                Compared::MapBelow
                            } else {
                                Compared::MapAbove
                            }
                        }
                    };
                }
            }
        }
        den = num;
        num = r;
        idx += 1;
    }
}

fn compare_to_target(
    map: &CircleMap,
    target: &RotationTarget,
    depth: usize,
    policy: &PrecisionPolicy,
) -> Result<Compared> {
    let t0 = std::time::Instant::now();
    let raw = measure_with_escalation(map, depth, policy, Some(target))?;
    if std::env::var("RENORMLAB_DEBUG_ESC").is_ok() {
        eprintln!(
            "compare depth={depth} steps={} backend={} end={:?} in {:.1?}",
            raw.returns.orbit_steps, raw.returns.backend, raw.end, t0.elapsed()
        );
    }
    match raw.end {
        MeasureEnd::Full => Ok(Compared::Matches(depth + 1)),
        MeasureEnd::Locked(p, q) => Ok(compare_rational(p, q, target)),
        MeasureEnd::CapHit(stage, above) => {
            let above_means = if stage % 2 == 0 {
                Compared::MapBelow
            } else {
                Compared::MapAbove
            };
            Ok(if above {
                above_means
            } else {
                match above_means {
                    Compared::MapBelow => Compared::MapAbove,
                    _ => Compared::MapBelow,
                }
            })
        }
    }
}

/// Tune the family parameter so the first N partial quotients match the
/// target, where N is large enough that 1/(q_N q_{N+1}) < tol.
///
/// Bisection with a progressive depth schedule: comparisons run only as
/// deep as needed to find the first mismatching quotient, and the depth is
/// raised once the midpoint matches the whole current prefix.
pub fn tune_parameter(
    family: MapFamily,
    target: &RotationTarget,
    tol: f64,
    policy: &PrecisionPolicy,
) -> Result<f64> {
    let full_depth = target.prefix_depth_for(tol)?;
    let (mut lo, mut hi) = family.bracket();
    let lo_cmp = compare_to_target(&family.build(lo), target, full_depth, policy)?;
    let hi_cmp = compare_to_target(&family.build(hi), target, full_depth, policy)?;
    match (lo_cmp, hi_cmp) {
        (Compared::Matches(_), _) => return Ok(lo),
        (_, Compared::Matches(_)) => return Ok(hi),
        (Compared::MapBelow, Compared::MapAbove) => {}
        _ => {
            return Err(Error::Invalid(format!(
                "bracket failure: target not enclosed by family bracket ({lo_cmp:?}, {hi_cmp:?})"
            )))
        }
    }
    let mut depth = full_depth.min(4);
    let mut mid = 0.5 * (lo + hi);
    for _ in 0..600 {
        match compare_to_target(&family.build(mid), target, depth, policy)? {
            Compared::Matches(_) => {
                if depth >= full_depth {
                    return Ok(mid);
                }
                depth = (depth + 3).min(full_depth);
                // keep the same midpoint, just measure deeper
            }
            Compared::MapBelow => {
                lo = mid;
                mid = 0.5 * (lo + hi);
            }
            Compared::MapAbove => {
                hi = mid;
                mid = 0.5 * (lo + hi);
            }
        }
        if mid <= lo.min(hi) || mid >= hi.max(lo) || hi - lo <= 0.0 {
            return Err(Error::PrecisionExhausted(
                "tuning bracket collapsed to machine resolution without quotient match".into(),
            ));
        }
    }
    Err(Error::PrecisionExhausted(
        "tuning did not converge in 600 bisection steps".into(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn golden_expansion_all_ones() {
        let cf = ContinuedFraction::expand(GOLDEN_MEAN, 20).unwrap();
        assert!(cf.quotients.iter().take(18).all(|&a| a == 1));
    }

    #[test]
    fn sqrt2_expansion_all_twos() {
        let x = std::f64::consts::SQRT_2 - 1.0;
        let cf = ContinuedFraction::expand(x, 15).unwrap();
        assert!(cf.quotients.iter().take(13).all(|&a| a == 2));
    }

    #[test]
    fn one_third_terminates() {
        let cf = ContinuedFraction::expand(1.0 / 3.0, 10).unwrap();
        assert_eq!(cf.quotients, vec![3]);
        assert!(cf.terminated);
    }

    #[test]
    fn return_times_fibonacci() {
        let cf = ContinuedFraction::from_quotients(vec![1; 6], false);
        assert_eq!(
            cf.return_times(6).unwrap(),
            vec![1, 1, 2, 3, 5, 8, 13]
        );
    }

    #[test]
    fn return_times_pell_and_single() {
        let cf = ContinuedFraction::from_quotients(vec![2; 4], false);
        assert_eq!(cf.return_times(4).unwrap(), vec![1, 2, 5, 12, 29]);
        let cf = ContinuedFraction::from_quotients(vec![5], false);
        assert_eq!(cf.return_times(1).unwrap(), vec![1, 5]);
    }

    #[test]
    fn convergents_alternate_and_approximate() {
        let x = GOLDEN_MEAN;
        let cf = ContinuedFraction::expand(x, 12).unwrap();
        let mut last_side = 0.0;
        for n in 1..cf.convergents.len() - 1 {
            let (p, q) = cf.convergents[n];
            let (_, q_next) = cf.convergents[n + 1];
            let err = x - p as f64 / q as f64;
            assert!(
                err.abs() < 1.0 / (q as f64 * q_next as f64) + 1e-15,
                "n={n}"
            );
            if n > 1 {
                assert!(err.signum() != last_side, "signs must alternate at n={n}");
            }
            last_side = err.signum();
        }
    }

    #[test]
    fn rotation_number_of_rigid_golden_rotation() {
        let map = CircleMap::rotation(GOLDEN_MEAN);
        let (cf, data) = rotation_number(&map, 8, &PrecisionPolicy::default()).unwrap();
        assert_eq!(cf.quotients, vec![1; 9]);
        assert_eq!(data.return_times[..8], [1, 1, 2, 3, 5, 8, 13, 21]);
        // numerators are Fibonacci shifted: p_n/q_n converge to the golden mean
        assert_eq!(data.numerators[..8], [0, 1, 1, 2, 3, 5, 8, 13]);
    }

    #[test]
    fn rotation_number_of_sqrt2_rotation() {
        let map = CircleMap::rotation(std::f64::consts::SQRT_2 - 1.0);
        let (cf, _) = rotation_number(&map, 6, &PrecisionPolicy::default()).unwrap();
        assert_eq!(cf.quotients, vec![2; 7]);
    }

    #[test]
    fn rational_rotation_locks() {
        let map = CircleMap::rotation(1.0 / 3.0);
        match rotation_number(&map, 5, &PrecisionPolicy::default()) {
            Err(Error::RationalLock { period }) => assert_eq!(period, 3),
            other => panic!("expected rational lock, got {other:?}"),
        }
    }

    #[test]
    fn tune_rotation_family_returns_target_value() {
        let target = RotationTarget::golden();
        let omega =
            tune_parameter(MapFamily::Rotation, &target, 1e-10, &PrecisionPolicy::default())
                .unwrap();
        assert!((omega - GOLDEN_MEAN).abs() < 1e-10);
    }

    #[test]
    fn target_parsing() {
        assert_eq!(
            RotationTarget::parse("1,1,1,*").unwrap(),
            RotationTarget {
                head: vec![1, 1, 1],
                tail: TailRule::RepeatLast
            }
        );
        assert_eq!(
            RotationTarget::parse("3,2").unwrap().tail,
            TailRule::Terminate
        );
        let de = RotationTarget::parse("rule:doubleexp@3,7").unwrap();
        assert_eq!(de.quotient(0), Some(2));
        assert_eq!(de.quotient(3), Some(32));
        assert_eq!(de.quotient(7), Some(128));
        assert_eq!(de.quotient(8), Some(2));
        assert!(RotationTarget::parse("0,1").is_err());
    }

    #[test]
    fn bounded_type_flag() {
        let g = RotationTarget::golden();
        assert!(g.is_bounded_type(50, 1));
        let de = RotationTarget::parse("rule:doubleexp@3").unwrap();
        assert!(!de.is_bounded_type(10, 8));
    }

    #[test]
    fn prefix_depth_matches_convergent_growth() {
        let g = RotationTarget::golden();
        let n = g.prefix_depth_for(1e-12).unwrap();
        // fibonacci q_29 * q_30 = 832040 * 1346269 > 1e12 > q_28 * q_29
        assert_eq!(n, 29);
    }

    #[test]
    fn compare_rational_ordering() {
        // 1/3 < golden < 1/2 < 3/4
        let g = RotationTarget::golden();
        assert_eq!(compare_rational(1, 3, &g), Compared::MapBelow);
        assert_eq!(compare_rational(1, 2, &g), Compared::MapBelow);
        assert_eq!(compare_rational(2, 3, &g), Compared::MapAbove);
        assert_eq!(compare_rational(5, 8, &g), Compared::MapAbove);
    }
}
