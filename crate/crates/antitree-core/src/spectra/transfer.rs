//! Transfer matrices for `−(μ f′)′ = λ μ f` with piecewise-constant `μ`.
//!
//! The state `(f, μ f′)` is continuous across breakpoints. A running product
//! is stored in Iwasawa form `M = K(angle) · A(log_scale) · N(shear)` with
//!
//! ```text
//! K(a) = [[cos a, −sin a], [sin a, cos a]]
//! A(r) = diag(e^r, e^−r)
//! N(x) = [[1, x], [0, 1]]
//! ```
//!
//! so the determinant is one by construction and magnitudes live in a
//! logarithm. For weight contrasts around `10⁶` the naive product loses the
//! determinant to cancellation; this form does not.

use nalgebra::Matrix2;

use crate::model::MetricProfile;

/// An element of `SL(2, ℝ)` in Iwasawa coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Transfer {
    angle: f64,
    log_scale: f64,
    shear: f64,
}

impl Default for Transfer {
    fn default() -> Self {
        Self::IDENTITY
    }
}

impl Transfer {
    pub const IDENTITY: Transfer = Transfer {
        angle: 0.0,
        log_scale: 0.0,
        shear: 0.0,
    };

    /// Rotation angle of the first column, in `[0, 2π)`.
    pub fn angle(&self) -> f64 {
        self.angle
    }

    /// `ln |M e₁|`.
    pub fn log_scale(&self) -> f64 {
        self.log_scale
    }

    pub fn shear(&self) -> f64 {
        self.shear
    }

    /// Dense matrix. Entries may overflow for extreme products; prefer the
    /// coordinates when only directions are needed.
    pub fn matrix(&self) -> Matrix2<f64> {
        let (s, c) = self.angle.sin_cos();
        let e = self.log_scale.exp();
        let k = Matrix2::new(c, -s, s, c);
        k * Matrix2::new(e, e * self.shear, 0.0, 1.0 / e)
    }

    /// Determinant from the factors: `det A = det N = 1`, so only the
    /// rotation contributes rounding.
    pub fn determinant(&self) -> f64 {
        let (s, c) = self.angle.sin_cos();
        c * c + s * s
    }

    /// `M (1, 0)ᵀ / |M (1, 0)ᵀ|`: the direction of the solution started
    /// with `f = 1`, `μ f′ = 0`.
    pub fn neumann_direction(&self) -> (f64, f64) {
        let (s, c) = self.angle.sin_cos();
        (c, s)
    }

    /// Replaces `self` by `G · self` given the Iwasawa data of `G · K(angle)`.
    fn absorb(&mut self, angle: f64, log_scale: f64, shear: f64) {
        let old = self.log_scale;
        self.angle = angle.rem_euclid(std::f64::consts::TAU);
        self.log_scale = log_scale + old;
        self.shear += shear * (-2.0 * old).exp();
    }

    /// `K(a) · self`.
    pub fn rotate(&mut self, a: f64) {
        self.angle = (self.angle + a).rem_euclid(std::f64::consts::TAU);
    }

    /// `A(u) · self`.
    pub fn scale(&mut self, u: f64) {
        let (s, c) = self.angle.sin_cos();
        // First column of A(u)K(angle) is (e^u c, e^−u s); divide through by
        // the larger exponential so nothing overflows.
        let (angle, log_norm, shear) = if u >= 0.0 {
            let q = (-4.0 * u).exp();
            let n2 = c * c + q * s * s;
            (
                ((-2.0 * u).exp() * s).atan2(c),
                u + 0.5 * n2.ln(),
                -c * s * (1.0 - q) / n2,
            )
        } else {
            let q = (4.0 * u).exp();
            let n2 = q * c * c + s * s;
            (
                s.atan2((2.0 * u).exp() * c),
                -u + 0.5 * n2.ln(),
                -c * s * (q - 1.0) / n2,
            )
        };
        self.absorb(angle, log_norm, shear);
    }

    /// `N(y) · self`.
    pub fn shear_by(&mut self, y: f64) {
        let (s, c) = self.angle.sin_cos();
        let a = c + y * s;
        let n2 = a * a + s * s;
        let shear = (a * (y * c - s) + s * c) / n2;
        self.absorb(s.atan2(a), 0.5 * n2.ln(), shear);
    }

    /// Left-multiplies the propagator of one interval of length `h` and
    /// weight `mu` at spectral parameter `lambda`.
    pub fn push_interval(&mut self, lambda: f64, mu: f64, h: f64) {
        if lambda > 0.0 {
            // [[cos ωh, sin ωh/(ωμ)], [−ωμ sin ωh, cos ωh]] = A(u) K(−ωh) A(−u)
            let omega = lambda.sqrt();
            let u = -0.5 * (omega * mu).ln();
            self.scale(-u);
            self.rotate(-omega * h);
            self.scale(u);
        } else if lambda < 0.0 {
            // [[cosh κh, sinh κh/(κμ)], [κμ sinh κh, cosh κh]]
            //   = A(u) K(π/4) A(κh) K(−π/4) A(−u)
            let kappa = (-lambda).sqrt();
            let u = -0.5 * (kappa * mu).ln();
            let quarter = std::f64::consts::FRAC_PI_4;
            self.scale(-u);
            self.rotate(-quarter);
            self.scale(kappa * h);
            self.rotate(quarter);
            self.scale(u);
        } else {
            self.shear_by(h / mu);
        }
    }
}

/// Propagator of a single constant-weight interval as a dense matrix.
pub fn interval_matrix(lambda: f64, mu: f64, h: f64) -> Matrix2<f64> {
    if lambda > 0.0 {
        let w = lambda.sqrt();
        let (s, c) = (w * h).sin_cos();
        Matrix2::new(c, s / (w * mu), -w * mu * s, c)
    } else if lambda < 0.0 {
        let k = (-lambda).sqrt();
        let (sh, ch) = ((k * h).sinh(), (k * h).cosh());
        Matrix2::new(ch, sh / (k * mu), k * mu * sh, ch)
    } else {
        Matrix2::new(1.0, h / mu, 0.0, 1.0)
    }
}

/// Product of the interval propagators for `I_from, …, I_to` (inclusive),
/// mapping the state at `t_from` to the state at `t_{to+1}`.
pub fn sym_transfer(profile: &MetricProfile, lambda: f64, from_index: usize, to_index: usize) -> Transfer {
    assert!(
        from_index <= to_index && to_index <= profile.depth(),
        "interval range {from_index}..={to_index} outside 0..={}",
        profile.depth()
    );
    let mut m = Transfer::IDENTITY;
    for n in from_index..=to_index {
        m.push_interval(lambda, profile.weight(n), profile.lengths()[n]);
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: &Matrix2<f64>, b: &Matrix2<f64>, tol: f64) -> bool {
        (a - b).abs().max() <= tol * (1.0 + b.abs().max())
    }

    #[test]
    fn elementary_factors_match_dense() {
        let mut t = Transfer::IDENTITY;
        t.rotate(0.3);
        t.scale(0.7);
        t.shear_by(-1.2);
        t.scale(-2.5);
        t.rotate(2.0);
        let k = |a: f64| Matrix2::new(a.cos(), -a.sin(), a.sin(), a.cos());
        let a = |u: f64| Matrix2::new(u.exp(), 0.0, 0.0, (-u).exp());
        let n = |x: f64| Matrix2::new(1.0, x, 0.0, 1.0);
        let dense = k(2.0) * a(-2.5) * n(-1.2) * a(0.7) * k(0.3);
        assert!(close(&t.matrix(), &dense, 1e-13), "{} vs {}", t.matrix(), dense);
    }

    #[test]
    fn interval_propagators_match_closed_form() {
        for &(lambda, mu, h) in &[(2.0, 3.0, 0.7), (0.0, 5.0, 1.5), (-1.3, 0.5, 0.9), (400.0, 1e4, 0.01)] {
            let mut t = Transfer::IDENTITY;
            t.push_interval(lambda, mu, h);
            let want = interval_matrix(lambda, mu, h);
            assert!(
                close(&t.matrix(), &want, 1e-12),
                "λ={lambda}: {} vs {}",
                t.matrix(),
                want
            );
        }
    }

    #[test]
    fn full_period_is_identity() {
        let w = 3.0_f64;
        let mut t = Transfer::IDENTITY;
        t.push_interval(w * w, 7.0, std::f64::consts::TAU / w);
        assert!(close(&t.matrix(), &Matrix2::identity(), 1e-12));
    }

    #[test]
    fn zero_lambda_single_interval() {
        let p = MetricProfile::from_sequences(vec![1, 2, 3], vec![1.0, 0.5]).unwrap();
        let m = sym_transfer(&p, 0.0, 1, 1).matrix();
        assert!(close(&m, &Matrix2::new(1.0, 0.5 / 6.0, 0.0, 1.0), 1e-15));
    }

    #[test]
    fn huge_hyperbolic_growth_stays_finite() {
        let mut t = Transfer::IDENTITY;
        for _ in 0..50 {
            t.push_interval(-1e4, 1e6, 1.0);
        }
        assert!(t.log_scale().is_finite() && t.log_scale() > 4000.0);
        assert!((t.determinant() - 1.0).abs() < 1e-15);
        assert!(t.angle().is_finite() && t.shear().is_finite());
    }
}
