//! Order-3 jets: value and first three derivatives at a point.
//!
//! Three derivatives are exactly what the Schwarzian, the Moebius 2-jet
//! approximation and the C^m composition checker (m <= 3) consume.

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Jet3 {
    pub f: f64,
    pub d1: f64,
    pub d2: f64,
    pub d3: f64,
}

impl Jet3 {
    pub fn new(f: f64, d1: f64, d2: f64, d3: f64) -> Self {
        Jet3 { f, d1, d2, d3 }
    }

    /// Jet of the identity map at `x`: (x, 1, 0, 0).
    pub fn identity(x: f64) -> Self {
        Jet3::new(x, 1.0, 0.0, 0.0)
    }

    /// Chain rule: jet of outer∘inner, where `outer` was evaluated at
    /// `inner.f`.
    pub fn compose(outer: Jet3, inner: Jet3) -> Jet3 {
        let g1 = inner.d1;
        let g2 = inner.d2;
        let g3 = inner.d3;
        Jet3 {
            f: outer.f,
            d1: outer.d1 * g1,
            d2: outer.d2 * g1 * g1 + outer.d1 * g2,
            d3: outer.d3 * g1 * g1 * g1 + 3.0 * outer.d2 * g1 * g2 + outer.d1 * g3,
        }
    }

    /// Jet of the inverse function at the image point.
    ///
    /// `self` is the forward jet at `x`; the result is the jet of f^{-1} at
    /// f(x), whose value is `x`.
    pub fn invert(self, x: f64) -> Result<Jet3> {
        let a = self.d1;
        if a == 0.0 || !a.is_finite() {
            return Err(Error::Domain(format!(
                "cannot invert jet with derivative {a} at x={x}"
            )));
        }
        let a3 = a * a * a;
        Jet3::new(
            x,
            1.0 / a,
            -self.d2 / a3,
            (3.0 * self.d2 * self.d2 - a * self.d3) / (a3 * a * a),
        )
        .ok()
    }

    /// Schwarzian derivative from the jet: d3/d1 - (3/2)(d2/d1)^2.
    pub fn schwarzian(self) -> Result<f64> {
        if self.d1 == 0.0 {
            return Err(Error::Domain(
                "Schwarzian undefined at a critical point (D1 = 0)".into(),
            ));
        }
        let n = self.d2 / self.d1;
        Ok(self.d3 / self.d1 - 1.5 * n * n)
    }

    fn ok(self) -> Result<Jet3> {
        Ok(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cube_jet(x: f64) -> Jet3 {
        Jet3::new(x * x * x, 3.0 * x * x, 6.0 * x, 6.0)
    }

    #[test]
    fn identity_jet() {
        assert_eq!(Jet3::identity(0.3), Jet3::new(0.3, 1.0, 0.0, 0.0));
    }

    #[test]
    fn compose_with_identity_is_noop() {
        let j = cube_jet(1.7);
        assert_eq!(Jet3::compose(j, Jet3::identity(1.7)), j);
    }

    #[test]
    fn chain_rule_is_associative() {
        // f = x^3, g = 2x+1, h = x^2 composed both ways at x0
        let x0 = 0.37;
        let h = Jet3::new(x0 * x0, 2.0 * x0, 2.0, 0.0);
        let g = Jet3::new(2.0 * h.f + 1.0, 2.0, 0.0, 0.0);
        let f = cube_jet(g.f);
        let left = Jet3::compose(Jet3::compose(f, g), h);
        let right = Jet3::compose(f, Jet3::compose(g, h));
        assert!((left.d3 - right.d3).abs() <= 1e-10 * left.d3.abs().max(1.0));
        assert!((left.d2 - right.d2).abs() <= 1e-10 * left.d2.abs().max(1.0));
    }

    #[test]
    fn inverse_jet_of_cube() {
        // f(x)=x^3 at x=2: f^{-1}(y)=y^{1/3}, derivatives at y=8
        let inv = cube_jet(2.0).invert(2.0).unwrap();
        assert!((inv.d1 - 1.0 / 12.0).abs() < 1e-15);
        // (y^{1/3})'' = -2/9 y^{-5/3} = -2/(9*32) at y=8
        assert!((inv.d2 - (-2.0 / 288.0)).abs() < 1e-15);
        // (y^{1/3})''' = 10/27 y^{-8/3} = 10/(27*256)
        assert!((inv.d3 - 10.0 / (27.0 * 256.0)).abs() < 1e-15);
    }

    #[test]
    fn schwarzian_of_cube() {
        // S(x^3) = -8/(2x^2) * ... = 6/(3x^2)... check against formula
        // S f = f'''/f' - 1.5 (f''/f')^2 = 6/(3x^2) - 1.5*(2/x)^2 = 2/x^2 - 6/x^2
        let s = cube_jet(1.0).schwarzian().unwrap();
        assert!((s - (-4.0)).abs() < 1e-14);
    }

    #[test]
    fn schwarzian_rejects_critical_point() {
        assert!(cube_jet(0.0).schwarzian().is_err());
    }
}
