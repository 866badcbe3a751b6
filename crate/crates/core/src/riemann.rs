//! Riemann problems: exact self-similar fans, the ε-subdivision of the state
//! space, the interpolated flux `f_ε` and its piecewise-constant fans.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::flux::ConvexFlux;
use crate::profile::{near, Knot, MonotoneProfile, PiecewiseLinear};
use crate::scalar::{lit, Scalar};

/// Exact entropy solution of a Riemann problem as a function of `ξ = x/t`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum RiemannFan<T> {
    Empty { state: T },
    Shock { left: T, right: T, speed: T },
    Rarefaction { left: T, right: T, left_edge: T, right_edge: T },
}

/// Solves the Riemann problem with states `u_l`, `u_r` for the flux `F`.
pub fn solve_exact<T: Scalar>(flux: &ConvexFlux<T>, u_l: T, u_r: T) -> Result<RiemannFan<T>> {
    let (al, _) = flux.velocity_limits(u_l)?;
    let (_, ar) = flux.velocity_limits(u_r)?;
    if u_l == u_r {
        return Ok(RiemannFan::Empty { state: u_l });
    }
    if u_l > u_r {
        let speed = (flux.eval(u_r)? - flux.eval(u_l)?) / (u_r - u_l);
        return Ok(RiemannFan::Shock { left: u_l, right: u_r, speed });
    }
    Ok(RiemannFan::Rarefaction { left: u_l, right: u_r, left_edge: al, right_edge: ar })
}

impl<T: Scalar> RiemannFan<T> {
    pub fn states(&self) -> (T, T) {
        match *self {
            RiemannFan::Empty { state } => (state, state),
            RiemannFan::Shock { left, right, .. } | RiemannFan::Rarefaction { left, right, .. } => {
                (left, right)
            }
        }
    }

    /// `U(ξ)`. At a shock the right value is returned.
    pub fn eval(&self, flux: &ConvexFlux<T>, xi: T) -> T {
        match *self {
            RiemannFan::Empty { state } => state,
            RiemannFan::Shock { left, right, speed } => {
                if xi < speed {
                    left
                } else {
                    right
                }
            }
            RiemannFan::Rarefaction { left, right, left_edge, right_edge } => {
                if xi < left_edge {
                    left
                } else if xi > right_edge {
                    right
                } else {
                    flux.inverse().eval_clamped(xi).max(left).min(right)
                }
            }
        }
    }

    /// The solution at time `t > 0` as a function of `x`.
    pub fn profile(&self, flux: &ConvexFlux<T>, t: T) -> Result<PiecewiseLinear<T>> {
        if !(t > T::zero()) {
            return Err(Error::out_of_domain("time", t.as_f64(), 0.0, f64::INFINITY));
        }
        match *self {
            RiemannFan::Empty { state } => Ok(PiecewiseLinear::constant(state)),
            RiemannFan::Shock { left, right, speed } => {
                PiecewiseLinear::new(vec![Knot::new(speed * t, left, right)])
            }
            RiemannFan::Rarefaction { left, right, left_edge, right_edge } => {
                let mut knots = vec![Knot::continuous(left_edge * t, left)];
                for &(y, u) in flux.inverse().knots() {
                    if y > left_edge && y < right_edge && !near(y, left_edge) && !near(y, right_edge)
                    {
                        knots.push(Knot::continuous(y * t, u));
                    }
                }
                if right_edge > left_edge {
                    knots.push(Knot::continuous(right_edge * t, right));
                } else {
                    knots[0].right = right;
                }
                PiecewiseLinear::new(knots)
            }
        }
    }
}

/// Ordered states `c_0 = -M < … < c_p = M` with `a⁻(c_{i+1}) − a⁺(c_i) ≤ ε/4`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Subdivision<T> {
    states: Vec<T>,
    eps: T,
}

/// Greedy construction `c_{i+1} = sup{v : a⁻(v) − a⁺(c_i) ≤ ε/4}`.
///
/// `a⁻` is affine between knots, so each supremum is an exact linear solve.
pub fn build_subdivision<T: Scalar>(flux: &ConvexFlux<T>, eps: T) -> Result<Subdivision<T>> {
    if !(eps > T::zero() && eps.is_finite()) {
        return Err(Error::out_of_domain("epsilon", eps.as_f64(), 0.0, f64::INFINITY));
    }
    let m = flux.bound();
    let ks = flux.velocity().knots();
    let quarter = eps / lit::<T>(4.0);
    let mut states = vec![-m];
    let mut c = -m;
    while c < m {
        let target = flux.velocity_limits(c)?.1 + quarter;
        // first piece ending strictly right of c
        let mut i = ks.partition_point(|k| k.x <= c) - 1;
        let next = loop {
            let (k0, k1) = (&ks[i], &ks[i + 1]);
            if k1.left > target {
                let v = k0.x + (target - k0.right) / (k1.left - k0.right) * (k1.x - k0.x);
                break if near(v, k1.x) { k1.x } else { v.max(c) };
            }
            if i + 2 == ks.len() || k1.right >= target {
                break k1.x;
            }
            i += 1;
        };
        let next = if near(next, m) { m } else { next };
        if next <= c {
            return Err(Error::Invariant(format!("subdivision stalled at c = {c}")));
        }
        states.push(next);
        c = next;
    }
    Ok(Subdivision { states, eps })
}

impl<T: Scalar> Subdivision<T> {
    pub fn states(&self) -> &[T] {
        &self.states
    }

    pub fn eps(&self) -> T {
        self.eps
    }

    /// Index of `u` in 𝔅, up to the knot tolerance.
    pub fn index_of(&self, u: T) -> Option<usize> {
        let i = self.states.partition_point(|&c| c < u);
        [i.checked_sub(1), Some(i)]
            .into_iter()
            .flatten()
            .find(|&j| j < self.states.len() && near(u, self.states[j]))
    }

    /// Nearest element of 𝔅; ties go to the smaller magnitude.
    pub fn nearest(&self, u: T) -> T {
        let s = &self.states;
        let i = s.partition_point(|&c| c < u);
        if i == 0 {
            return s[0];
        }
        if i == s.len() {
            return s[i - 1];
        }
        let (lo, hi) = (s[i - 1], s[i]);
        let (dl, dh) = (u - lo, hi - u);
        if dl < dh || (dl == dh && lo.abs() <= hi.abs()) {
            lo
        } else {
            hi
        }
    }

    pub fn max_gap(&self) -> T {
        self.states
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(T::zero(), T::max)
    }
}

/// Kind of a discontinuity of a piecewise-constant solution.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum FrontKind {
    Shock,
    Rarefaction,
}

impl FrontKind {
    pub fn as_str(self) -> &'static str {
        match self {
            FrontKind::Shock => "shock",
            FrontKind::Rarefaction => "rarefaction",
        }
    }
}

/// A straight discontinuity `x(t) = x0 + speed (t − t0)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Front<T> {
    pub x0: T,
    pub t0: T,
    pub speed: T,
    pub left: T,
    pub right: T,
    pub kind: FrontKind,
}

impl<T: Scalar> Front<T> {
    pub fn position(&self, t: T) -> T {
        self.x0 + self.speed * (t - self.t0)
    }
}

/// The continuous piecewise-linear interpolant `f_ε` of `f` on 𝔅.
#[derive(Clone, Debug, Serialize)]
pub struct ApproxFlux<T> {
    flux: ConvexFlux<T>,
    subdivision: Subdivision<T>,
    values: Vec<T>,
    slopes: Vec<T>,
}

/// Builds `f_ε` from exact flux values at the nodes.
pub fn approx_flux<T: Scalar>(flux: &ConvexFlux<T>, sub: Subdivision<T>) -> Result<ApproxFlux<T>> {
    let values = sub
        .states
        .iter()
        .map(|&c| flux.eval(c))
        .collect::<Result<Vec<T>>>()?;
    let slopes: Vec<T> = (1..values.len())
        .map(|i| (values[i] - values[i - 1]) / (sub.states[i] - sub.states[i - 1]))
        .collect();
    Ok(ApproxFlux { flux: flux.clone(), subdivision: sub, values, slopes })
}

/// Sampling speeds of the modified Oleinik inequality for one fan.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TildePoints<T> {
    /// `ā(c_i)` for the interior states of the fan.
    pub interior: Vec<T>,
    /// `ā(u_l)`.
    pub left_mean: T,
    /// `a_ε⁺(u_l)`, the speed of the first front.
    pub left_plus: T,
    /// `ā(u_r)`.
    pub right_mean: T,
    /// `a_ε⁻(u_r)`, the speed of the last front.
    pub right_minus: T,
    pub time: T,
}

impl<T: Scalar> TildePoints<T> {
    pub fn position(&self, xi: T) -> T {
        xi * self.time
    }
}

impl<T: Scalar> ApproxFlux<T> {
    pub fn flux(&self) -> &ConvexFlux<T> {
        &self.flux
    }

    pub fn subdivision(&self) -> &Subdivision<T> {
        &self.subdivision
    }

    pub fn states(&self) -> &[T] {
        &self.subdivision.states
    }

    /// Cell slopes `s_1, …, s_p`; `slopes()[i]` belongs to `(c_i, c_{i+1})`.
    pub fn slopes(&self) -> &[T] {
        &self.slopes
    }

    /// `f_ε(u)`.
    pub fn eval(&self, u: T) -> Result<T> {
        let c = self.states();
        let m = self.flux.bound();
        if u.is_nan() || (u.abs() > m && !near(u.abs(), m)) {
            return Err(Error::out_of_domain("state", u.as_f64(), -m.as_f64(), m.as_f64()));
        }
        if let Some(i) = self.subdivision.index_of(u) {
            return Ok(self.values[i]);
        }
        let i = c.partition_point(|&x| x < u).clamp(1, c.len() - 1);
        Ok(self.values[i - 1] + self.slopes[i - 1] * (u - c[i - 1]))
    }

    /// Index of a state of 𝔅; errors for any other state.
    pub fn index(&self, u: T) -> Result<usize> {
        self.subdivision.index_of(u).ok_or_else(|| {
            Error::InvalidArgument(format!("state {u} is not a subdivision point"))
        })
    }

    /// One-sided velocities `(a_ε⁻(c_i), a_ε⁺(c_i))` of `f_ε` at a state of 𝔅:
    /// the slopes of the adjacent cells, extended by the end cells at `±M`.
    pub fn velocity_limits(&self, u: T) -> Result<(T, T)> {
        let i = self.index(u)?;
        let s = &self.slopes;
        if s.is_empty() {
            return self.flux.velocity_limits(u);
        }
        let lo = s[i.saturating_sub(1).min(s.len() - 1)];
        let hi = s[i.min(s.len() - 1)];
        Ok((lo, hi))
    }

    /// Rankine–Hugoniot speed between two states of 𝔅.
    pub fn rh_speed(&self, u_l: T, u_r: T) -> Result<T> {
        let (i, j) = (self.index(u_l)?, self.index(u_r)?);
        if i == j {
            return Err(Error::InvalidArgument("equal states have no jump speed".into()));
        }
        Ok((self.values[j] - self.values[i]) / (self.states()[j] - self.states()[i]))
    }

    /// Fronts of the `f_ε` Riemann solution, centred at `(x, t)`.
    pub fn solve_at(&self, u_l: T, u_r: T, x: T, t: T) -> Result<Vec<Front<T>>> {
        let (i, j) = (self.index(u_l)?, self.index(u_r)?);
        let c = self.states();
        if i > j {
            let speed = self.rh_speed(u_l, u_r)?;
            return Ok(vec![Front { x0: x, t0: t, speed, left: c[i], right: c[j], kind: FrontKind::Shock }]);
        }
        Ok((i..j)
            .map(|k| Front {
                x0: x,
                t0: t,
                speed: self.slopes[k],
                left: c[k],
                right: c[k + 1],
                kind: FrontKind::Rarefaction,
            })
            .collect())
    }

    /// Fronts of the `f_ε` Riemann solution centred at the origin.
    pub fn solve(&self, u_l: T, u_r: T) -> Result<Vec<Front<T>>> {
        self.solve_at(u_l, u_r, T::zero(), T::zero())
    }

    /// The ξ̃ sampling speeds for a rarefaction fan from `u_l` to `u_r`.
    pub fn tilde_points(&self, u_l: T, u_r: T, t: T) -> Result<TildePoints<T>> {
        if !(t > T::zero()) {
            return Err(Error::out_of_domain("time", t.as_f64(), 0.0, f64::INFINITY));
        }
        let (k, kp) = (self.index(u_l)?, self.index(u_r)?);
        if k >= kp {
            return Err(Error::InvalidArgument(format!(
                "tilde points need u_l < u_r, got ({u_l}, {u_r})"
            )));
        }
        let c = self.states();
        let interior = (k + 1..kp)
            .map(|i| self.flux.mean_velocity(c[i]))
            .collect::<Result<Vec<T>>>()?;
        Ok(TildePoints {
            interior,
            left_mean: self.flux.mean_velocity(c[k])?,
            left_plus: self.slopes[k],
            right_mean: self.flux.mean_velocity(c[kp])?,
            right_minus: self.slopes[kp - 1],
            time: t,
        })
    }
}

/// Piecewise-linear approximants `a_n` of `ā` on `[u_l, u_r]` (nodes
/// `v_i = u_l + i (u_r − u_l)/n`) and their classical inverses `b_n`.
pub fn refine_velocity<T: Scalar>(
    flux: &ConvexFlux<T>,
    u_l: T,
    u_r: T,
    n: usize,
) -> Result<(MonotoneProfile<T>, MonotoneProfile<T>)> {
    if !(u_l < u_r) {
        return Err(Error::InvalidArgument(format!("need u_l < u_r, got ({u_l}, {u_r})")));
    }
    if n == 0 {
        return Err(Error::InvalidArgument("n must be at least 1".into()));
    }
    let nt = lit::<T>(n as f64);
    let mut a = Vec::with_capacity(n + 1);
    for i in 0..=n {
        let v = if i == n { u_r } else { u_l + (u_r - u_l) * lit::<T>(i as f64) / nt };
        a.push((v, flux.mean_velocity(v)?));
    }
    let b = a.iter().map(|&(v, y)| (y, v)).collect();
    Ok((MonotoneProfile::new(a)?, MonotoneProfile::new(b)?))
}
