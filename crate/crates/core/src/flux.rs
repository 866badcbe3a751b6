//! Strictly convex Lipschitz fluxes, represented through their velocity.
//!
//! The velocity `a = f'` is nondecreasing with explicit one-sided limits at
//! its jump points. Between knots it is affine and strictly increasing, which
//! encodes the requirement that `f` is affine on no interval.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::profile::{lerp, near, Knot, MonotoneProfile, PiecewiseLinear};
use crate::scalar::{lit, Scalar};

/// Nondecreasing velocity on `[-M, M]` in piecewise-affine-with-jumps form.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MonotoneVelocity<T> {
    bound: T,
    graph: PiecewiseLinear<T>,
}

impl<T: Scalar> MonotoneVelocity<T> {
    /// `knots` must start at `-bound` and end at `bound`. At each knot
    /// `left ≤ right`; each affine piece must rise strictly.
    pub fn new(bound: T, mut knots: Vec<Knot<T>>) -> Result<Self> {
        if !(bound > T::zero() && bound.is_finite()) {
            return Err(Error::InvalidFlux(format!("bound M = {bound} must be positive")));
        }
        // canonicalize abscissae
        let mut merged: Vec<Knot<T>> = Vec::with_capacity(knots.len());
        for k in knots.drain(..) {
            match merged.last_mut() {
                Some(last) if near(k.x, last.x) => {
                    last.right = k.right;
                }
                _ => merged.push(k),
            }
        }
        let (first, last) = match (merged.first(), merged.last()) {
            (Some(f), Some(l)) if merged.len() >= 2 => (f.x, l.x),
            _ => return Err(Error::InvalidFlux("need at least two knots".into())),
        };
        if !near(first, -bound) || !near(last, bound) {
            return Err(Error::InvalidFlux(format!(
                "knots must span [-M, M] = [{}, {bound}], got [{first}, {last}]",
                -bound
            )));
        }
        merged[0].x = -bound;
        let n = merged.len();
        merged[n - 1].x = bound;
        for k in &merged {
            if k.left > k.right {
                return Err(Error::InvalidFlux(format!(
                    "velocity decreases across u = {}: a- = {} > a+ = {}",
                    k.x, k.left, k.right
                )));
            }
        }
        for w in merged.windows(2) {
            if w[1].left <= w[0].right {
                return Err(Error::InvalidFlux(format!(
                    "velocity not strictly increasing on [{}, {}] (flux affine there)",
                    w[0].x, w[1].x
                )));
            }
        }
        let graph = PiecewiseLinear::new(merged)?;
        Ok(MonotoneVelocity { bound, graph })
    }

    pub fn bound(&self) -> T {
        self.bound
    }

    pub fn knots(&self) -> &[Knot<T>] {
        self.graph.knots()
    }

    pub fn graph(&self) -> &PiecewiseLinear<T> {
        &self.graph
    }

    fn check(&self, u: T) -> Result<()> {
        let m = self.bound;
        if u.is_nan() || (u.abs() > m && !near(u.abs(), m)) {
            return Err(Error::out_of_domain("state", u.as_f64(), -m.as_f64(), m.as_f64()));
        }
        Ok(())
    }

    /// `(a⁻(u), a⁺(u))`.
    pub fn limits(&self, u: T) -> Result<(T, T)> {
        self.check(u)?;
        Ok(self.graph.limits(u))
    }

    /// `λ a⁺(u) + (1 − λ) a⁻(u)`.
    pub fn mean(&self, u: T, lambda: T) -> Result<T> {
        if !(lambda >= T::zero() && lambda <= T::one()) {
            return Err(Error::out_of_domain("lambda", lambda.as_f64(), 0.0, 1.0));
        }
        let (lo, hi) = self.limits(u)?;
        Ok(lambda * hi + (T::one() - lambda) * lo)
    }

    /// Whether `xi` belongs to the image `ā_λ([-M, M])`.
    ///
    /// The image is the union of the affine pieces' open ranges and the
    /// isolated means at the knots; it is not an interval when `a` jumps.
    pub fn mean_image_contains(&self, xi: T, lambda: T) -> bool {
        let ks = self.graph.knots();
        let tol = T::knot_tol() * T::one().max(xi.abs());
        for (i, k) in ks.iter().enumerate() {
            let m = lambda * k.right + (T::one() - lambda) * k.left;
            if (xi - m).abs() <= tol {
                return true;
            }
            if let Some(next) = ks.get(i + 1) {
                if xi > k.right && xi < next.left {
                    return true;
                }
            }
        }
        false
    }
}

/// Strictly convex flux `f(u) = f_ref + ∫_{u_ref}^u a(v) dv` on `[-M, M]`.
#[derive(Clone, Debug, Serialize)]
pub struct ConvexFlux<T> {
    velocity: MonotoneVelocity<T>,
    u_ref: T,
    f_ref: T,
    #[serde(skip)]
    primitive: Vec<T>,
    #[serde(skip)]
    inverse: MonotoneProfile<T>,
    approximation_error: T,
}

impl<T: Scalar> ConvexFlux<T> {
    pub fn new(velocity: MonotoneVelocity<T>, u_ref: T, f_ref: T) -> Result<Self> {
        velocity.check(u_ref)?;
        let ks = velocity.knots();
        let mut primitive = Vec::with_capacity(ks.len());
        let mut acc = T::zero();
        primitive.push(acc);
        for w in ks.windows(2) {
            acc = acc + (w[1].x - w[0].x) * (w[0].right + w[1].left) * T::half();
            primitive.push(acc);
        }
        let inverse = velocity.graph().generalized_inverse()?;
        Ok(ConvexFlux {
            velocity,
            u_ref,
            f_ref,
            primitive,
            inverse,
            approximation_error: T::zero(),
        })
    }

    /// Records the error of the knot approximation of a closed form, relative to `‖a‖∞`.
    pub fn with_approximation_error(mut self, err: T) -> Self {
        self.approximation_error = err;
        self
    }

    /// `f(u) = u²/2`.
    pub fn burgers(bound: T) -> Result<Self> {
        let v = MonotoneVelocity::new(
            bound,
            vec![Knot::continuous(-bound, -bound), Knot::continuous(bound, bound)],
        )?;
        ConvexFlux::new(v, T::zero(), T::zero())
    }

    /// `f(u) = u² + |u|`, velocity `2u + sign(u)` with a unit jump on each side of 0.
    pub fn example12(bound: T) -> Result<Self> {
        let edge = T::two() * bound + T::one();
        let v = MonotoneVelocity::new(
            bound,
            vec![
                Knot::continuous(-bound, -edge),
                Knot::new(T::zero(), -T::one(), T::one()),
                Knot::continuous(bound, edge),
            ],
        )?;
        ConvexFlux::new(v, T::zero(), T::zero())
    }

    /// `f(u) = |u|^{p+1}/(p+1)`, velocity `sign(u)|u|^p`, `p ≥ 1`.
    ///
    /// For `p ≠ 1` the velocity is interpolated on a symmetric grid that is
    /// geometric with ratio `1 + resolution` on `[0.02 M, M]` and uniform below.
    /// The largest interpolation error of `a` relative to `M^p` is recorded.
    pub fn power(p: T, bound: T, resolution: T) -> Result<Self> {
        if !(p >= T::one()) || !p.is_finite() {
            return Err(Error::InvalidFlux(format!("power exponent p = {p} must be >= 1")));
        }
        if p == T::one() {
            return ConvexFlux::burgers(bound);
        }
        if !(resolution > T::zero() && resolution < T::one()) {
            return Err(Error::InvalidFlux(format!(
                "resolution = {resolution} must lie in (0, 1)"
            )));
        }
        let vel = |u: T| u.signum() * u.abs().powf(p);
        let ratio = T::one() + resolution;
        let floor: T = lit(0.02);
        let steps = ((T::one() / floor).ln() / ratio.ln()).ceil();
        let steps_n = steps.to_usize().unwrap_or(0);
        let g_min = bound / ratio.powf(steps);
        let n_uniform = (T::one() / resolution).ceil().to_usize().unwrap_or(1).max(1);
        let mut positive: Vec<T> = Vec::with_capacity(n_uniform + steps_n + 1);
        for k in 1..n_uniform {
            positive.push(g_min * lit(k as f64) / lit(n_uniform as f64));
        }
        for j in (0..=steps_n).rev() {
            positive.push(bound / ratio.powi(j as i32));
        }
        *positive.last_mut().unwrap() = bound;
        let mut knots: Vec<Knot<T>> = positive
            .iter()
            .rev()
            .map(|&u| Knot::continuous(-u, vel(-u)))
            .collect();
        knots.push(Knot::continuous(T::zero(), T::zero()));
        knots.extend(positive.iter().map(|&u| Knot::continuous(u, vel(u))));

        let scale = vel(bound);
        let mut err = T::zero();
        let mut prev = T::zero();
        for &u in &positive {
            let mid = (prev + u) * T::half();
            let exact = vel(mid);
            let approx = lerp(prev, vel(prev), u, vel(u), mid);
            err = err.max((approx - exact).abs() / scale);
            prev = u;
        }
        let v = MonotoneVelocity::new(bound, knots)?;
        Ok(ConvexFlux::new(v, T::zero(), T::zero())?.with_approximation_error(err))
    }

    /// Truncated atomic velocity `δu + Σ_{n ≤ N} 2⁻ⁿ H(u − r_n)`, where `r_n`
    /// enumerates the reduced fractions of `(-1, 1)` by denominator, scaled by `M`.
    pub fn atomic(terms: usize, ramp: T, bound: T) -> Result<Self> {
        if !(ramp > T::zero()) {
            return Err(Error::InvalidFlux(format!(
                "ramp δ = {ramp} must be positive for strict convexity"
            )));
        }
        let atoms: Vec<(T, T)> = rationals_in_unit_interval::<T>(terms)
            .into_iter()
            .enumerate()
            .map(|(n, r)| (r * bound, lit::<T>(0.5).powi(n as i32 + 1)))
            .collect();
        let mut xs: Vec<T> = atoms.iter().map(|a| a.0).collect();
        xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let below = |u: T, strict: bool| -> T {
            atoms
                .iter()
                .filter(|(r, _)| if strict { *r < u } else { *r <= u })
                .fold(ramp * u, |acc, (_, w)| acc + *w)
        };
        let mut knots = vec![Knot::continuous(-bound, below(-bound, true))];
        knots.extend(xs.iter().map(|&x| Knot::new(x, below(x, true), below(x, false))));
        knots.push(Knot::continuous(bound, below(bound, false)));
        let v = MonotoneVelocity::new(bound, knots)?;
        ConvexFlux::new(v, T::zero(), T::zero())
    }

    pub fn velocity(&self) -> &MonotoneVelocity<T> {
        &self.velocity
    }

    pub fn bound(&self) -> T {
        self.velocity.bound
    }

    pub fn anchor(&self) -> (T, T) {
        (self.u_ref, self.f_ref)
    }

    pub fn approximation_error(&self) -> T {
        self.approximation_error
    }

    pub fn velocity_limits(&self, u: T) -> Result<(T, T)> {
        self.velocity.limits(u)
    }

    pub fn velocity_mean(&self, u: T, lambda: T) -> Result<T> {
        self.velocity.mean(u, lambda)
    }

    /// `ā(u) = (a⁻(u) + a⁺(u)) / 2`.
    pub fn mean_velocity(&self, u: T) -> Result<T> {
        self.velocity.mean(u, T::half())
    }

    fn primitive_at(&self, u: T) -> T {
        let ks = self.velocity.knots();
        let i = ks.partition_point(|k| k.x <= u).clamp(1, ks.len() - 1) - 1;
        let k = &ks[i];
        let a = lerp(k.x, k.right, ks[i + 1].x, ks[i + 1].left, u);
        self.primitive[i] + (u - k.x) * (k.right + a) * T::half()
    }

    /// Exact evaluation of the piecewise-quadratic flux.
    pub fn eval(&self, u: T) -> Result<T> {
        self.velocity.check(u)?;
        let m = self.bound();
        let u = u.max(-m).min(m);
        Ok(self.f_ref + self.primitive_at(u) - self.primitive_at(self.u_ref))
    }

    /// The generalized inverse `b = a⁻¹` on `[a⁻(-M), a⁺(M)]`.
    pub fn inverse(&self) -> &MonotoneProfile<T> {
        &self.inverse
    }

    /// `max |a±(v)|` over the given states.
    pub fn speed_bound<I: IntoIterator<Item = T>>(&self, states: I) -> Result<T> {
        let mut s = T::zero();
        for v in states {
            let (lo, hi) = self.velocity_limits(v)?;
            s = s.max(lo.abs()).max(hi.abs());
        }
        Ok(s)
    }
}

/// Reduced fractions `p/q` in `(-1, 1)`: 0, ±1/2, ±1/3, ±2/3, ±1/4, ±3/4, …
fn rationals_in_unit_interval<T: Scalar>(count: usize) -> Vec<T> {
    fn gcd(a: u64, b: u64) -> u64 {
        if b == 0 {
            a
        } else {
            gcd(b, a % b)
        }
    }
    let mut out = Vec::with_capacity(count);
    if count == 0 {
        return out;
    }
    out.push(T::zero());
    let mut q = 2u64;
    while out.len() < count {
        for p in 1..q {
            if gcd(p, q) != 1 {
                continue;
            }
            for sign in [1.0, -1.0] {
                if out.len() < count {
                    out.push(lit(sign * p as f64 / q as f64));
                }
            }
        }
        q += 1;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn velocity_limits_examples() {
        let f = ConvexFlux::<f64>::example12(1.0).unwrap();
        assert_eq!(f.velocity_limits(0.0).unwrap(), (-1.0, 1.0));
        assert_eq!(f.velocity_limits(0.5).unwrap(), (2.0, 2.0));
        let g = ConvexFlux::<f64>::burgers(1.0).unwrap();
        let (lo, hi) = g.velocity_limits(0.3).unwrap();
        assert_eq!(lo, hi);
        assert!((lo - 0.3).abs() < 1e-15);
        assert!(matches!(f.velocity_limits(1.5), Err(Error::OutOfDomain { .. })));
    }

    #[test]
    fn velocity_mean_examples() {
        let f = ConvexFlux::<f64>::example12(1.0).unwrap();
        assert_eq!(f.velocity_mean(0.0, 0.5).unwrap(), 0.0);
        assert_eq!(f.velocity_mean(0.0, 1.0).unwrap(), 1.0);
        assert_eq!(f.velocity_mean(0.0, 0.25).unwrap(), -0.5);
        assert!(f.velocity_mean(0.0, 1.5).is_err());
    }

    #[test]
    fn eval_flux_examples() {
        let f = ConvexFlux::<f64>::example12(1.0).unwrap();
        assert_eq!(f.eval(-1.0).unwrap(), 2.0);
        assert_eq!(f.eval(0.0).unwrap(), 0.0);
        assert_eq!(f.eval(0.5).unwrap(), 0.75);
        let g = ConvexFlux::<f64>::burgers(2.0).unwrap();
        assert_eq!(g.eval(2.0).unwrap(), 2.0);
        assert!(g.eval(2.5).is_err());
    }

    #[test]
    fn generalized_inverse_examples() {
        let f = ConvexFlux::<f64>::example12(1.0).unwrap();
        let b = f.inverse();
        assert_eq!(b.eval(2.0).unwrap(), 0.5);
        assert_eq!(b.eval(0.0).unwrap(), 0.0);
        assert_eq!(b.domain(), (-3.0, 3.0));
        let g = ConvexFlux::<f64>::burgers(1.0).unwrap();
        for y in [-1.0, -0.3, 0.0, 0.7, 1.0] {
            assert!((g.inverse().eval(y).unwrap() - y).abs() < 1e-15);
        }
    }

    #[test]
    fn rejects_flat_velocity_pieces() {
        let r = MonotoneVelocity::new(
            1.0,
            vec![Knot::continuous(-1.0, 0.0), Knot::continuous(1.0, 0.0)],
        );
        assert!(matches!(r, Err(Error::InvalidFlux(_))));
        let r = MonotoneVelocity::new(
            1.0,
            vec![Knot::continuous(-1.0, 0.0), Knot::new(0.0, 1.0, 0.5), Knot::continuous(1.0, 2.0)],
        );
        assert!(r.is_err());
        let r = MonotoneVelocity::new(1.0, vec![Knot::continuous(-0.5, 0.0), Knot::continuous(1.0, 1.0)]);
        assert!(r.is_err());
    }

    #[test]
    fn power_flux_is_accurate() {
        let f = ConvexFlux::<f64>::power(3.0, 1.0, 7e-4).unwrap();
        assert!(f.approximation_error() < 5e-7, "{}", f.approximation_error());
        let (lo, hi) = f.velocity_limits(0.5).unwrap();
        assert_eq!(lo, hi);
        assert!((lo - 0.125).abs() < 1e-7);
        assert!((f.eval(1.0).unwrap() - 0.25).abs() < 1e-6);
        // exact symmetry of the grid
        let ks = f.velocity().knots();
        let n = ks.len();
        for i in 0..n {
            assert_eq!(ks[i].x, -ks[n - 1 - i].x);
        }
    }

    #[test]
    fn atomic_flux_has_jumps_at_rationals() {
        let f = ConvexFlux::<f64>::atomic(5, 1e-6, 1.0).unwrap();
        let (lo, hi) = f.velocity_limits(0.0).unwrap();
        assert!((hi - lo - 0.5).abs() < 1e-15);
        let (lo, hi) = f.velocity_limits(0.5).unwrap();
        assert!((hi - lo - 0.25).abs() < 1e-15);
        let (lo, hi) = f.velocity_limits(-1.0 / 3.0).unwrap();
        assert!((hi - lo - 1.0 / 32.0).abs() < 1e-15);
        assert!(ConvexFlux::<f64>::atomic(5, 0.0, 1.0).is_err());
    }

    #[test]
    fn rationals_enumeration() {
        let r: Vec<f64> = rationals_in_unit_interval(7);
        assert_eq!(r, vec![0.0, 0.5, -0.5, 1.0 / 3.0, -1.0 / 3.0, 2.0 / 3.0, -2.0 / 3.0]);
    }

    #[test]
    fn mean_image_membership() {
        let f = ConvexFlux::<f64>::example12(1.0).unwrap();
        let v = f.velocity();
        assert!(v.mean_image_contains(0.0, 0.5));
        assert!(v.mean_image_contains(-2.0, 0.5));
        assert!(v.mean_image_contains(-3.0, 0.5));
        assert!(!v.mean_image_contains(-1.0, 0.5));
        assert!(!v.mean_image_contains(0.5, 0.5));
        assert!(v.mean_image_contains(-1.0, 0.0));
        assert!(!v.mean_image_contains(1.0, 0.0));
    }
}
