//! Composition trees of primitive map pieces, evaluable as order-3 jets on
//! lifts of the circle.
//!
//! A map is a tree of [`MapNode`]s. Circle maps are represented by their
//! lifts F with F(x+1) = F(x)+1; the periodic primitives (sine family, bump)
//! reduce their argument internally so that lift periodicity is exact in
//! floating point. Chart pieces (affine, Moebius, power-law) are ordinary
//! interval maps used to build commuting pairs and rescaled factors.

use std::sync::Arc;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jet::Jet3;
use crate::real::{wrap_unit_f64, Real};

/// One piece of a composition tree.
#[derive(Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum MapNode {
    /// x -> a x + b
    Affine { a: f64, b: f64 },
    /// x -> (a x + b)/(c x + d), normalized so that ad - bc = 1.
    Moebius { a: f64, b: f64, c: f64, d: f64 },
    /// x -> (x - c)|x - c|^{p-1} + a
    PowerLawChart { p: f64, center: f64, offset: f64 },
    /// x -> x + omega - (K/2pi) sin(2pi x)
    SineFamily { omega: f64, coupling: f64 },
    /// x -> x + amplitude * eta((x - center)/radius), eta the smooth
    /// compactly supported profile exp(1 - 1/(1-t^2)) on (-1, 1).
    ///
    /// Identically the identity outside the support arc, which the
    /// evaluation honours exactly.
    Bump {
        center: f64,
        radius: f64,
        amplitude: f64,
    },
    InverseOf { node: Arc<MapNode> },
    /// Composition in the usual order: `nodes[0]` is applied last.
    Composition { nodes: Vec<Arc<MapNode>> },
    Iterate { node: Arc<MapNode>, count: u64 },
    /// by ∘ inner ∘ by^{-1}. `outer_support` is the arc (lo, len) outside of
    /// which the whole conjugate is known to be the identity; the evaluator
    /// returns its input exactly there without touching `by`.
    ConjugateBy {
        inner: Arc<MapNode>,
        by: Arc<MapNode>,
        outer_support: Option<(f64, f64)>,
    },
    /// Chart plumbing: snap a lift to the branch within (center-1/2,
    /// center+1/2]. A local isometry used to splice circle orbits into
    /// affine charts.
    Rewrap { center: f64 },
}

/// Evaluation backend selection.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Backend {
    F64,
    DoubleDouble,
}

/// Guards for deep orbit work.
///
/// Orbits longer than `orbit_guard` are refused. Accumulated per-iterate
/// error estimates are carried alongside f64 orbits; operations that would
/// build or compare intervals shorter than `min_interval` (or shorter than
/// the accumulated error) report precision exhaustion instead of returning
/// silently degraded values.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct PrecisionPolicy {
    pub backend: Backend,
    pub orbit_guard: u64,
    pub min_interval: f64,
}

impl Default for PrecisionPolicy {
    fn default() -> Self {
        PrecisionPolicy {
            backend: Backend::F64,
            orbit_guard: 30_000_000,
            min_interval: 1e-12,
        }
    }
}

impl PrecisionPolicy {
    pub fn with_backend(backend: Backend) -> Self {
        PrecisionPolicy {
            backend,
            ..Default::default()
        }
    }

    /// Locking tolerance: 1e3 machine epsilons of the active backend.
    pub fn lock_tol(&self) -> f64 {
        match self.backend {
            Backend::F64 => 1e3 * f64::EPSILON,
            Backend::DoubleDouble => 1e3 * 4.93e-32,
        }
    }
}

// --- bump profile -----------------------------------------------------------

/// eta(t) = exp(1 - 1/(1-t^2)) on (-1,1), zero outside, with eta(0) = 1.
/// Returns (eta, eta', eta'', eta''').
pub fn bump_profile_jet(t: f64) -> (f64, f64, f64, f64) {
    if t.abs() >= 1.0 {
        return (0.0, 0.0, 0.0, 0.0);
    }
    let s = 1.0 - t * t;
    let w1 = -2.0 * t / (s * s);
    let w2 = -2.0 / (s * s) - 8.0 * t * t / (s * s * s);
    let w3 = -24.0 * t / (s * s * s) - 48.0 * t * t * t / (s * s * s * s);
    let eta = (1.0 - 1.0 / s).exp();
    (
        eta,
        eta * w1,
        eta * (w1 * w1 + w2),
        eta * (w1 * w1 * w1 + 3.0 * w1 * w2 + w3),
    )
}

fn bump_profile_value<R: Real>(t: R) -> R {
    let one = R::from_f64(1.0);
    let tf = t.to_f64();
    if tf.abs() >= 1.0 {
        return R::from_f64(0.0);
    }
    let s = one - t * t;
    (one - one / s).exp()
}

/// sup |eta'| over (-1,1), sampled once.
pub fn bump_profile_slope_sup() -> f64 {
    static SUP: OnceLock<f64> = OnceLock::new();
    *SUP.get_or_init(|| {
        let mut sup: f64 = 0.0;
        for i in 0..20_000 {
            let t = -1.0 + (i as f64 + 0.5) * (2.0 / 20_000.0);
            sup = sup.max(bump_profile_jet(t).1.abs());
        }
        sup
    })
}

fn arc_contains(lo: f64, len: f64, pos: f64) -> bool {
    wrap_unit_f64(pos - lo) <= len
}

impl MapNode {
    // -- constructors --------------------------------------------------------

    pub fn affine(a: f64, b: f64) -> Arc<MapNode> {
        Arc::new(MapNode::Affine { a, b })
    }

    pub fn moebius(a: f64, b: f64, c: f64, d: f64) -> Result<Arc<MapNode>> {
        let det = a * d - b * c;
        if det <= 0.0 || !det.is_finite() {
            return Err(Error::Invalid(format!(
                "Moebius coefficients must have positive determinant, got {det}"
            )));
        }
        let s = det.sqrt();
        Ok(Arc::new(MapNode::Moebius {
            a: a / s,
            b: b / s,
            c: c / s,
            d: d / s,
        }))
    }

    /// The Moebius transformation sending x0,x1,x2 to y0,y1,y2 (all finite,
    /// orientation-preserving triples).
    pub fn moebius_through(xs: [f64; 3], ys: [f64; 3]) -> Result<Arc<MapNode>> {
        // standard map to (0, 1, infinity): z -> (z-x0)(x1-x2) / ((z-x2)(x1-x0))
        fn to_std(p: [f64; 3]) -> [f64; 4] {
            let [x0, x1, x2] = p;
            [x1 - x2, -x0 * (x1 - x2), x1 - x0, -x2 * (x1 - x0)]
        }
        let m = to_std(xs);
        let n = to_std(ys);
        // result = n^{-1} * m (matrix product), n^{-1} via adjugate
        let ninv = [n[3], -n[1], -n[2], n[0]];
        let a = ninv[0] * m[0] + ninv[1] * m[2];
        let b = ninv[0] * m[1] + ninv[1] * m[3];
        let c = ninv[2] * m[0] + ninv[3] * m[2];
        let d = ninv[2] * m[1] + ninv[3] * m[3];
        MapNode::moebius(a, b, c, d)
    }

    pub fn power_law(p: f64, center: f64, offset: f64) -> Arc<MapNode> {
        Arc::new(MapNode::PowerLawChart { p, center, offset })
    }

    pub fn sine(omega: f64, coupling: f64) -> Arc<MapNode> {
        Arc::new(MapNode::SineFamily { omega, coupling })
    }

    pub fn bump(center: f64, radius: f64, amplitude: f64) -> Result<Arc<MapNode>> {
        if !(radius > 0.0 && radius <= 0.25) {
            return Err(Error::Invalid(format!(
                "bump radius {radius} outside (0, 1/4]"
            )));
        }
        if amplitude.abs() * bump_profile_slope_sup() / radius >= 1.0 {
            return Err(Error::Invalid(format!(
                "bump amplitude {amplitude} breaks monotonicity at radius {radius}"
            )));
        }
        Ok(Arc::new(MapNode::Bump {
            center,
            radius,
            amplitude,
        }))
    }

    pub fn inverse(node: Arc<MapNode>) -> Arc<MapNode> {
        Arc::new(MapNode::InverseOf { node })
    }

    pub fn compose(nodes: Vec<Arc<MapNode>>) -> Arc<MapNode> {
        Arc::new(MapNode::Composition { nodes })
    }

    pub fn iterate(node: Arc<MapNode>, count: u64) -> Arc<MapNode> {
        Arc::new(MapNode::Iterate { node, count })
    }

    pub fn conjugate_by(
        inner: Arc<MapNode>,
        by: Arc<MapNode>,
        outer_support: Option<(f64, f64)>,
    ) -> Arc<MapNode> {
        Arc::new(MapNode::ConjugateBy {
            inner,
            by,
            outer_support,
        })
    }

    pub fn rewrap(center: f64) -> Arc<MapNode> {
        Arc::new(MapNode::Rewrap { center })
    }

    /// Arc outside of which this node is exactly the identity, if that is
    /// structurally known.
    pub fn displaced_support(&self) -> Option<(f64, f64)> {
        match self {
            MapNode::Bump { center, radius, .. } => {
                Some((wrap_unit_f64(center - radius), 2.0 * radius))
            }
            MapNode::InverseOf { node } => node.displaced_support(),
            _ => None,
        }
    }

    // -- evaluation ----------------------------------------------------------

    /// Value together with the first derivative (as f64, for error
    /// tracking), generic over the scalar backend.
    pub fn eval_step<R: Real>(&self, x: R) -> Result<(R, f64)> {
        match self {
            MapNode::Affine { a, b } => Ok((x.mul_f64(*a) + R::from_f64(*b), *a)),
            MapNode::Moebius { a, b, c, d } => {
                let den = x.mul_f64(*c) + R::from_f64(*d);
                let den_f = den.to_f64();
                if den_f == 0.0 {
                    return Err(Error::Domain(format!(
                        "Moebius pole at x = {}",
                        x.to_f64()
                    )));
                }
                let num = x.mul_f64(*a) + R::from_f64(*b);
                Ok((num / den, 1.0 / (den_f * den_f)))
            }
            MapNode::PowerLawChart { p, center, offset } => {
                let u = x - R::from_f64(*center);
                let uf = u.to_f64();
                let val = if *p == p.round() && *p >= 1.0 && *p <= 16.0 {
                    let k = p.round() as i32;
                    u * u.abs().powi(k - 1)
                } else {
                    match u.abs().try_powf(*p) {
                        Some(m) => {
                            if uf < 0.0 {
                                -m
                            } else {
                                m
                            }
                        }
                        None => {
                            return Err(Error::PrecisionExhausted(format!(
                                "power-law exponent {p} not supported by the {} backend",
                                R::NAME
                            )))
                        }
                    }
                };
                Ok((val + R::from_f64(*offset), p * uf.abs().powf(p - 1.0)))
            }
            MapNode::SineFamily { omega, coupling } => {
                let k_over_tau = coupling / std::f64::consts::TAU;
                let (s, c) = x.sin_cos_2pi();
                let val = x + R::from_f64(*omega) - s.mul_f64(k_over_tau);
                Ok((val, 1.0 - coupling * c))
            }
            MapNode::Bump {
                center,
                radius,
                amplitude,
            } => {
                // reduce to the unit circle first: x - floor(x) is exact,
                // so lifted arguments see bit-identical profile values
                let t = (x.wrap_unit() - R::from_f64(*center)).wrap_signed();
                let tf = t.to_f64();
                if tf.abs() >= *radius {
                    return Ok((x, 1.0));
                }
                let tt = t.mul_f64(1.0 / radius);
                let eta = bump_profile_value(tt);
                let d1 = bump_profile_jet(tf / radius).1;
                Ok((
                    x + eta.mul_f64(*amplitude),
                    1.0 + amplitude * d1 / radius,
                ))
            }
            MapNode::InverseOf { node } => {
                let sol = node.invert_value(x)?;
                let (_, s) = node.eval_step(sol)?;
                if s == 0.0 {
                    return Err(Error::Domain("inverse at a critical value".into()));
                }
                Ok((sol, 1.0 / s))
            }
            MapNode::Composition { nodes } => {
                let mut v = x;
                let mut slope = 1.0;
                for node in nodes.iter().rev() {
                    let (nv, s) = node.eval_step(v)?;
                    v = nv;
                    slope *= s;
                }
                Ok((v, slope))
            }
            MapNode::Iterate { node, count } => {
                let mut v = x;
                let mut slope = 1.0;
                for _ in 0..*count {
                    let (nv, s) = node.eval_step(v)?;
                    v = nv;
                    slope *= s;
                }
                Ok((v, slope))
            }
            MapNode::ConjugateBy {
                inner,
                by,
                outer_support,
            } => {
                if let Some((lo, len)) = outer_support {
                    if !arc_contains(*lo, *len, x.to_f64()) {
                        return Ok((x, 1.0));
                    }
                }
                let u = by.invert_value(x)?;
                if let Some((slo, slen)) = inner.displaced_support() {
                    if !arc_contains(slo, slen, u.to_f64()) {
                        return Ok((x, 1.0));
                    }
                }
                let (_, s_u) = by.eval_step(u)?;
                let (v, s_in) = inner.eval_step(u)?;
                let (w, s_by) = by.eval_step(v)?;
                if s_u == 0.0 {
                    return Err(Error::Domain("conjugating chart is critical".into()));
                }
                Ok((w, s_by * s_in / s_u))
            }
            MapNode::Rewrap { center } => {
                let val = R::from_f64(*center) + (x - R::from_f64(*center)).wrap_signed();
                Ok((val, 1.0))
            }
        }
    }

    pub fn eval_value<R: Real>(&self, x: R) -> Result<R> {
        Ok(self.eval_step(x)?.0)
    }

    /// Full order-3 jet at `x` (f64 only).
    pub fn eval_jet(&self, x: f64) -> Result<Jet3> {
        match self {
            MapNode::Affine { a, b } => Ok(Jet3::new(a * x + b, *a, 0.0, 0.0)),
            MapNode::Moebius { a, b, c, d } => {
                let den = c * x + d;
                if den == 0.0 {
                    return Err(Error::Domain(format!("Moebius pole at x = {x}")));
                }
                let den2 = den * den;
                Ok(Jet3::new(
                    (a * x + b) / den,
                    1.0 / den2,
                    -2.0 * c / (den2 * den),
                    6.0 * c * c / (den2 * den2),
                ))
            }
            MapNode::PowerLawChart { p, center, offset } => {
                let u = x - center;
                if *p == 3.0 {
                    return Ok(Jet3::new(
                        u * u * u + offset,
                        3.0 * u * u,
                        6.0 * u,
                        6.0,
                    ));
                }
                let au = u.abs();
                let sgn = if u < 0.0 { -1.0 } else { 1.0 };
                Ok(Jet3::new(
                    sgn * au.powf(*p) + offset,
                    p * au.powf(p - 1.0),
                    p * (p - 1.0) * sgn * au.powf(p - 2.0),
                    p * (p - 1.0) * (p - 2.0) * au.powf(p - 3.0),
                ))
            }
            MapNode::SineFamily { omega, coupling } => {
                let tau = std::f64::consts::TAU;
                let t = crate::real::wrap_signed_f64(x);
                let (s, c) = (tau * t).sin_cos();
                Ok(Jet3::new(
                    x + omega - coupling / tau * s,
                    1.0 - coupling * c,
                    tau * coupling * s,
                    tau * tau * coupling * c,
                ))
            }
            MapNode::Bump {
                center,
                radius,
                amplitude,
            } => {
                let t = crate::real::wrap_signed_f64(crate::real::wrap_unit_f64(x) - center);
                if t.abs() >= *radius {
                    return Ok(Jet3::identity(x));
                }
                let (e0, e1, e2, e3) = bump_profile_jet(t / radius);
                let r = *radius;
                Ok(Jet3::new(
                    x + amplitude * e0,
                    1.0 + amplitude * e1 / r,
                    amplitude * e2 / (r * r),
                    amplitude * e3 / (r * r * r),
                ))
            }
            MapNode::InverseOf { node } => {
                let sol = node.invert_value(x)?;
                node.eval_jet(sol)?.invert(sol)
            }
            MapNode::Composition { nodes } => {
                let mut jet = Jet3::identity(x);
                for node in nodes.iter().rev() {
                    jet = Jet3::compose(node.eval_jet(jet.f)?, jet);
                }
                Ok(jet)
            }
            MapNode::Iterate { node, count } => {
                let mut jet = Jet3::identity(x);
                for _ in 0..*count {
                    jet = Jet3::compose(node.eval_jet(jet.f)?, jet);
                }
                Ok(jet)
            }
            MapNode::ConjugateBy {
                inner,
                by,
                outer_support,
            } => {
                if let Some((lo, len)) = outer_support {
                    if !arc_contains(*lo, *len, x) {
                        return Ok(Jet3::identity(x));
                    }
                }
                let u = by.invert_value(x)?;
                if let Some((slo, slen)) = inner.displaced_support() {
                    if !arc_contains(slo, slen, u) {
                        return Ok(Jet3::identity(x));
                    }
                }
                let j_byinv = by.eval_jet(u)?.invert(u)?;
                let j_in = inner.eval_jet(u)?;
                let j_by = by.eval_jet(j_in.f)?;
                Ok(Jet3::compose(j_by, Jet3::compose(j_in, j_byinv)))
            }
            MapNode::Rewrap { center } => Ok(Jet3::new(
                center + crate::real::wrap_signed_f64(x - center),
                1.0,
                0.0,
                0.0,
            )),
        }
    }

    /// Solve node(x) = y on the monotone branch.
    ///
    /// Closed forms where available; safeguarded bisection+Newton to 1e-14
    /// absolute (1e-28 under double-double) for the transcendental pieces.
    pub fn invert_value<R: Real>(&self, y: R) -> Result<R> {
        match self {
            MapNode::Affine { a, b } => {
                if *a == 0.0 {
                    return Err(Error::Domain("affine map with zero slope".into()));
                }
                Ok((y - R::from_f64(*b)).mul_f64(1.0 / a))
            }
            MapNode::Moebius { a, b, c, d } => {
                // inverse of (ax+b)/(cx+d) with det 1 is (dy-b)/(-cy+a)
                let den = -(y.mul_f64(*c)) + R::from_f64(*a);
                if den.to_f64() == 0.0 {
                    return Err(Error::Domain("Moebius inverse pole".into()));
                }
                Ok((y.mul_f64(*d) - R::from_f64(*b)) / den)
            }
            MapNode::PowerLawChart { p, center, offset } => {
                let u = y - R::from_f64(*offset);
                let uf = u.to_f64();
                let m = match u.abs().try_powf(1.0 / p) {
                    Some(m) => m,
                    None => {
                        // integer cube root etc. still need powf; fall back to
                        // an f64 seed refined by Newton in R
                        let seed = uf.abs().powf(1.0 / p);
                        let mut v = R::from_f64(seed);
                        for _ in 0..4 {
                            // v <- v - (v^p - |u|)/(p v^{p-1})
                            let k = p.round() as i32;
                            let vp = v.powi(k);
                            let dv = (vp - u.abs()).mul_f64(1.0 / p) / v.powi(k - 1);
                            v = v - dv;
                        }
                        v
                    }
                };
                let signed = if uf < 0.0 { -m } else { m };
                Ok(signed + R::from_f64(*center))
            }
            MapNode::SineFamily { omega, coupling } => {
                let half_width = coupling.abs() / std::f64::consts::TAU + 1e-9;
                let lo = y - R::from_f64(omega + half_width);
                let hi = y - R::from_f64(omega - half_width);
                solve_increasing(|x| self.eval_step(x), y, lo, hi)
            }
            MapNode::Bump {
                center,
                radius,
                amplitude,
            } => {
                let t = (y.wrap_unit() - R::from_f64(*center)).wrap_signed();
                let tf = t.to_f64();
                if tf.abs() >= *radius {
                    return Ok(y);
                }
                // solve s + amp*eta(s/r) = t on [-r, r], then re-attach branch
                let shift = MapNode::Bump {
                    center: 0.0,
                    radius: *radius,
                    amplitude: *amplitude,
                };
                let lo = R::from_f64(-radius);
                let hi = R::from_f64(*radius);
                let sol = solve_increasing(|x| shift.eval_step(x), t, lo, hi)?;
                Ok(y - t + sol)
            }
            MapNode::InverseOf { node } => node.eval_value(y),
            MapNode::Composition { nodes } => {
                let mut v = y;
                for node in nodes.iter() {
                    v = node.invert_value(v)?;
                }
                Ok(v)
            }
            MapNode::Iterate { node, count } => {
                let mut v = y;
                for _ in 0..*count {
                    v = node.invert_value(v)?;
                }
                Ok(v)
            }
            MapNode::ConjugateBy {
                inner,
                by,
                outer_support,
            } => {
                if let Some((lo, len)) = outer_support {
                    if !arc_contains(*lo, *len, y.to_f64()) {
                        return Ok(y);
                    }
                }
                let u = by.invert_value(y)?;
                if let Some((slo, slen)) = inner.displaced_support() {
                    if !arc_contains(slo, slen, u.to_f64()) {
                        return Ok(y);
                    }
                }
                let v = inner.invert_value(u)?;
                by.eval_value(v)
            }
            MapNode::Rewrap { .. } => Ok(y),
        }
    }
}

/// Safeguarded bisection+Newton for an increasing function on [lo, hi].
fn solve_increasing<R: Real, F>(f: F, y: R, mut lo: R, mut hi: R) -> Result<R>
where
    F: Fn(R) -> Result<(R, f64)>,
{
    let tol = if R::EPS < 1e-20 { 1e-28 } else { 1e-14 };
    let (flo, _) = f(lo)?;
    let (fhi, _) = f(hi)?;
    if (flo - y).to_f64() > 0.0 || (fhi - y).to_f64() < 0.0 {
        return Err(Error::Invalid(format!(
            "solver bracket failure: f({:?})={:?}, f({:?})={:?}, y={:?}",
            lo.to_f64(),
            flo.to_f64(),
            hi.to_f64(),
            fhi.to_f64(),
            y.to_f64()
        )));
    }
    let mut x = (lo + hi).mul_f64(0.5);
    for _ in 0..240 {
        let (v, s) = f(x)?;
        let r = v - y;
        let rf = r.to_f64();
        if rf == 0.0 {
            return Ok(x);
        }
        if rf > 0.0 {
            hi = x;
        } else {
            lo = x;
        }
        if (hi - lo).to_f64().abs() <= tol {
            return Ok((lo + hi).mul_f64(0.5));
        }
        let newton = x - r.mul_f64(1.0 / s);
        let nf = newton.to_f64();
        x = if s.abs() > 1e-12 && nf > lo.to_f64() && nf < hi.to_f64() {
            newton
        } else {
            (lo + hi).mul_f64(0.5)
        };
    }
    Ok(x)
}

/// Jet of the n-th iterate with compensated error tracking on the value
/// channel. The accumulated estimate must stay below the policy's
/// min-interval guard.
pub fn iterate_jet(
    node: &MapNode,
    x: f64,
    n: u64,
    policy: &PrecisionPolicy,
) -> Result<Jet3> {
    if n > policy.orbit_guard {
        return Err(Error::Invalid(format!(
            "iterate length {n} exceeds orbit guard {}",
            policy.orbit_guard
        )));
    }
    let mut jet = Jet3::identity(x);
    let mut err = 0.0f64;
    for _ in 0..n {
        let step = node.eval_jet(jet.f)?;
        err = err * step.d1.abs() + f64::EPSILON * (1.0 + step.f.abs());
        jet = Jet3::compose(step, jet);
        if err > policy.min_interval {
            return Err(Error::PrecisionExhausted(format!(
                "iterate error estimate {err:.3e} exceeds guard {:.3e}",
                policy.min_interval
            )));
        }
    }
    Ok(jet)
}

/// Schwarzian derivative of the map at x.
pub fn schwarzian(node: &MapNode, x: f64) -> Result<f64> {
    node.eval_jet(x)?.schwarzian()
}

// --- circle maps -------------------------------------------------------------

/// A circle homeomorphism given by its lift, together with its critical (or
/// marked) point.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CircleMap {
    pub root: Arc<MapNode>,
    pub critical: f64,
}

impl CircleMap {
    pub fn new(root: Arc<MapNode>, critical: f64) -> Self {
        CircleMap { root, critical }
    }

    /// Rigid rotation by rho, marked point 0.
    pub fn rotation(rho: f64) -> Self {
        CircleMap::new(MapNode::affine(1.0, rho), 0.0)
    }

    /// Critical sine family x + omega - sin(2 pi x)/(2 pi), cubic critical
    /// point at 0.
    pub fn sine(omega: f64) -> Self {
        CircleMap::new(MapNode::sine(omega, 1.0), 0.0)
    }

    pub fn sine_coupling(omega: f64, coupling: f64) -> Self {
        CircleMap::new(MapNode::sine(omega, coupling), 0.0)
    }

    /// h ∘ f ∘ h^{-1} for a circle diffeo h; the critical point moves to
    /// h(c).
    pub fn conjugate_by(h: &Arc<MapNode>, f: &CircleMap) -> Result<CircleMap> {
        let critical = wrap_unit_f64(h.eval_value(f.critical)?);
        let root = MapNode::compose(vec![
            h.clone(),
            f.root.clone(),
            MapNode::inverse(h.clone()),
        ]);
        Ok(CircleMap::new(root, critical))
    }

    /// One step of the lift, reduced back to [0,1). Returns the reduced
    /// position and the derivative of the step.
    pub fn step<R: Real>(&self, x: R) -> Result<(R, f64)> {
        let (y, s) = self.root.eval_step(x)?;
        Ok((y.wrap_unit(), s))
    }

    /// Positions c, f(c), ..., f^{len-1}(c) in [0,1), with the compensated
    /// error estimate of the final point.
    pub fn orbit(&self, len: usize, policy: &PrecisionPolicy) -> Result<Orbit> {
        if len as u64 > policy.orbit_guard {
            return Err(Error::Invalid(format!(
                "orbit length {len} exceeds guard {}",
                policy.orbit_guard
            )));
        }
        let mut positions = Vec::with_capacity(len);
        let mut err = 0.0f64;
        let mut x = wrap_unit_f64(self.critical);
        for _ in 0..len {
            positions.push(x);
            let (y, s) = self.step(x)?;
            err = err * s.abs() + 4.0 * f64::EPSILON;
            x = y;
        }
        Ok(Orbit { positions, err })
    }
}

/// A finite critical orbit with its error estimate.
pub struct Orbit {
    pub positions: Vec<f64>,
    pub err: f64,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_eval() {
        let id = MapNode::affine(1.0, 0.0);
        assert_eq!(id.eval_jet(0.3).unwrap(), Jet3::identity(0.3));
    }

    #[test]
    fn power_law_cubic_jet_matches_hand_values() {
        let n = MapNode::power_law(3.0, 0.0, 0.0);
        let j = n.eval_jet(1.0).unwrap();
        assert_eq!((j.f, j.d1, j.d2, j.d3), (1.0, 3.0, 6.0, 6.0));
    }

    #[test]
    fn sine_family_critical_jet() {
        let n = MapNode::sine(0.0, 1.0);
        let j = n.eval_jet(0.0).unwrap();
        assert_eq!(j.f, 0.0);
        assert_eq!(j.d1, 0.0);
        assert!(j.d2.abs() < 1e-15);
        let tau = std::f64::consts::TAU;
        assert!((j.d3 - tau * tau).abs() < 1e-9);
    }

    #[test]
    fn moebius_schwarzian_is_zero() {
        let m = MapNode::moebius(2.0, 1.0, 1.0, 1.0).unwrap();
        for x in [0.1, 0.5, 2.0, -0.3] {
            assert!(schwarzian(&m, x).unwrap().abs() < 1e-12);
        }
    }

    #[test]
    fn power_law_schwarzian_cubic() {
        let n = MapNode::power_law(3.0, 0.0, 0.0);
        // -(p^2-1)/(2 x^2) = -4 at x=1
        assert!((schwarzian(&n, 1.0).unwrap() + 4.0).abs() < 1e-12);
        assert!((schwarzian(&n, 2.0).unwrap() + 1.0).abs() < 1e-12);
    }

    #[test]
    fn schwarzian_cocycle_on_composition() {
        let f = MapNode::moebius(1.3, 0.2, 0.4, 1.0).unwrap();
        let g = MapNode::power_law(3.0, -0.5, 0.1);
        let comp = MapNode::compose(vec![f.clone(), g.clone()]);
        for x in [0.2, 0.7, 1.1] {
            let jg = g.eval_jet(x).unwrap();
            let direct = schwarzian(&comp, x).unwrap();
            let cocycle =
                schwarzian(&f, jg.f).unwrap() * jg.d1 * jg.d1 + schwarzian(&g, x).unwrap();
            assert!(
                (direct - cocycle).abs() <= 1e-8 * direct.abs().max(1.0),
                "x={x}: {direct} vs {cocycle}"
            );
        }
    }

    #[test]
    fn lift_periodicity() {
        // On points where x+1 is exactly representable the reduced argument
        // is bit-identical, so the derivative channels match exactly and the
        // value differs by 1 up to the final rounding.
        let f = MapNode::sine(0.3456, 1.0);
        for k in 0..64u32 {
            let x = k as f64 / 64.0;
            let j0 = f.eval_jet(x).unwrap();
            let j1 = f.eval_jet(x + 1.0).unwrap();
            assert!((j1.f - (j0.f + 1.0)).abs() <= 4.0 * f64::EPSILON);
            assert_eq!(j1.d1, j0.d1);
            assert_eq!(j1.d2, j0.d2);
            assert_eq!(j1.d3, j0.d3);
        }
        let b = MapNode::bump(0.4, 0.0625, 0.01).unwrap();
        let j0 = b.eval_jet(0.4375).unwrap();
        let j1 = b.eval_jet(1.4375).unwrap();
        assert!((j1.f - (j0.f + 1.0)).abs() <= 4.0 * f64::EPSILON);
        assert_eq!(j1.d1, j0.d1);
    }

    #[test]
    fn bump_identity_outside_support_exact() {
        let b = MapNode::bump(0.4, 0.05, 0.01).unwrap();
        assert_eq!(b.eval_jet(0.6).unwrap(), Jet3::identity(0.6));
        assert_eq!(b.eval_value(0.1f64).unwrap(), 0.1);
    }

    #[test]
    fn iterate_examples() {
        // rigid rotation by rho, n=5: (x+5rho, 1, 0, 0)
        let rot = MapNode::affine(1.0, 0.318);
        let j = rot
            .eval_jet(0.0)
            .map(|_| iterate_jet(&rot, 0.2, 5, &PrecisionPolicy::default()).unwrap())
            .unwrap();
        assert!((j.f - (0.2 + 5.0 * 0.318)).abs() < 1e-14);
        assert_eq!((j.d1, j.d2, j.d3), (1.0, 0.0, 0.0));

        // affine a=2, b=0, n=10 at x=1: value 1024, d1 1024. The error
        // estimate grows with the values, so widen the guard for this
        // expanding chart.
        let loose = PrecisionPolicy {
            min_interval: 1e-9,
            ..Default::default()
        };
        let double = MapNode::affine(2.0, 0.0);
        let j = iterate_jet(&double, 1.0, 10, &loose).unwrap();
        assert_eq!(j.f, 1024.0);
        assert_eq!(j.d1, 1024.0);

        // n = 0 is the identity jet
        let j = iterate_jet(&double, 0.7, 0, &loose).unwrap();
        assert_eq!(j, Jet3::identity(0.7));
    }

    #[test]
    fn inverse_roundtrip_to_1e14() {
        let f = MapNode::sine(0.35, 1.0);
        for x in [0.12, 0.5, 0.83] {
            let y = f.eval_value(x).unwrap();
            let back: f64 = f.invert_value(y).unwrap();
            assert!((back - x).abs() < 1e-13, "x={x} back={back}");
        }
        let b = MapNode::bump(0.3, 0.1, 0.02).unwrap();
        for x in [0.25, 0.3, 0.35] {
            let y = b.eval_value(x).unwrap();
            let back: f64 = b.invert_value(y).unwrap();
            assert!((back - x).abs() < 1e-13);
        }
        // outside the support the inverse is exact
        assert_eq!(b.invert_value(0.7f64).unwrap(), 0.7);
    }

    #[test]
    fn inverse_node_jet_matches_derivative_formula() {
        let f = MapNode::sine(0.35, 0.8);
        let inv = MapNode::inverse(f.clone());
        let x = 0.4;
        let y = f.eval_value(x).unwrap();
        let ji = inv.eval_jet(y).unwrap();
        let jf = f.eval_jet(x).unwrap();
        assert!((ji.f - x).abs() < 1e-13);
        assert!((ji.d1 - 1.0 / jf.d1).abs() < 1e-10);
    }

    #[test]
    fn finite_differences_validate_jets() {
        use rand::Rng;
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let nodes: Vec<Arc<MapNode>> = vec![
            MapNode::sine(0.3, 0.9),
            MapNode::moebius(1.2, 0.3, 0.2, 1.0).unwrap(),
            MapNode::bump(0.5, 0.2, 0.05).unwrap(),
            MapNode::compose(vec![
                MapNode::sine(0.1, 0.5),
                MapNode::affine(1.0, 0.21),
            ]),
        ];
        for _ in 0..100 {
            let node = &nodes[rng.gen_range(0..nodes.len())];
            // keep clear of the bump-support edge where the fourth
            // derivative blows past what central differences can resolve
            let x: f64 = rng.gen_range(0.35..0.62);
            let h = 1e-4;
            let j = node.eval_jet(x).unwrap();
            let v = |t: f64| node.eval_jet(t).unwrap().f;
            let d1 = (v(x + h) - v(x - h)) / (2.0 * h);
            let d2 = (v(x + h) - 2.0 * v(x) + v(x - h)) / (h * h);
            let d3 =
                (v(x + 2.0 * h) - 2.0 * v(x + h) + 2.0 * v(x - h) - v(x - 2.0 * h))
                    / (2.0 * h * h * h);
            let scale1 = j.d1.abs().max(1.0);
            let scale2 = j.d2.abs().max(10.0);
            let scale3 = j.d3.abs().max(100.0);
            assert!(
                (j.d1 - d1).abs() < 1e3 * h * h * scale1,
                "d1 {} vs fd {}",
                j.d1,
                d1
            );
            assert!(
                (j.d2 - d2).abs() < 1e5 * h * h * scale2,
                "d2 {} vs fd {}",
                j.d2,
                d2
            );
            assert!(
                (j.d3 - d3).abs() < 1e4 * h * scale3,
                "d3 {} vs fd {}",
                j.d3,
                d3
            );
        }
    }

    #[test]
    fn conjugate_identity_outside_outer_support() {
        let f = MapNode::sine(0.38, 1.0);
        let bump = MapNode::bump(0.2, 0.02, 1e-5).unwrap();
        let by = MapNode::iterate(f, 3);
        // place the stated outer support away from the probe point
        let conj = MapNode::conjugate_by(MapNode::inverse(bump), by, Some((0.9, 0.05)));
        assert_eq!(conj.eval_value(0.5f64).unwrap(), 0.5);
        assert_eq!(conj.eval_jet(0.5).unwrap(), Jet3::identity(0.5));
    }

    #[test]
    fn dd_and_f64_agree_on_sine_step() {
        use crate::real::Dd;
        let f = MapNode::sine(0.382, 1.0);
        let mut xf = 0.0f64;
        let mut xd = Dd::from_f64(0.0);
        for _ in 0..1000 {
            xf = f.eval_value(xf).unwrap();
            xf = wrap_unit_f64(xf);
            xd = f.eval_value(xd).unwrap().wrap_unit();
        }
        assert!((xf - xd.to_f64()).abs() < 1e-10);
    }

    #[test]
    fn orbit_guard_enforced() {
        let policy = PrecisionPolicy {
            orbit_guard: 10,
            ..Default::default()
        };
        let f = CircleMap::rotation(0.3);
        assert!(f.orbit(100, &policy).is_err());
    }
}
