//! Piecewise-linear functions of one variable.
//!
//! [`PiecewiseLinear`] allows jumps at knots and is used for velocities, raw
//! gauges and spatial solution profiles. [`MonotoneProfile`] is continuous and
//! nondecreasing on a closed interval and houses generalized inverses and
//! moduli of continuity. [`StepFunction`] is the piecewise-constant state of a
//! front tracking run.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// A knot of a [`PiecewiseLinear`] function, carrying both one-sided limits.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Knot<T> {
    pub x: T,
    pub left: T,
    pub right: T,
}

impl<T: Scalar> Knot<T> {
    pub fn new(x: T, left: T, right: T) -> Self {
        Knot { x, left, right }
    }

    pub fn continuous(x: T, value: T) -> Self {
        Knot::new(x, value, value)
    }
}

#[inline]
pub(crate) fn lerp<T: Scalar>(x0: T, y0: T, x1: T, y1: T, x: T) -> T {
    if x1 == x0 {
        return y1;
    }
    let w = (x - x0) / (x1 - x0);
    y0 + (y1 - y0) * w
}

/// Whether `x` should be treated as sitting on the knot `k`.
#[inline]
pub(crate) fn near<T: Scalar>(x: T, k: T) -> bool {
    (x - k).abs() <= T::knot_tol() * T::one().max(k.abs())
}

/// Piecewise-linear function on the real line with possible jumps at knots.
///
/// Between `knots[i]` and `knots[i + 1]` the function interpolates linearly
/// from `knots[i].right` to `knots[i + 1].left`. Outside the knot range it is
/// extended by constants.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PiecewiseLinear<T> {
    knots: Vec<Knot<T>>,
}

impl<T: Scalar> PiecewiseLinear<T> {
    pub fn new(knots: Vec<Knot<T>>) -> Result<Self> {
        if knots.is_empty() {
            return Err(Error::InvalidProfile("no knots".into()));
        }
        for k in &knots {
            if !(k.x.is_finite() && k.left.is_finite() && k.right.is_finite()) {
                return Err(Error::InvalidProfile(format!("non-finite knot {k:?}")));
            }
        }
        for w in knots.windows(2) {
            if w[1].x <= w[0].x {
                return Err(Error::InvalidProfile(format!(
                    "knot abscissae not strictly increasing: {} then {}",
                    w[0].x, w[1].x
                )));
            }
        }
        Ok(PiecewiseLinear { knots })
    }

    pub fn constant(value: T) -> Self {
        PiecewiseLinear {
            knots: vec![Knot::continuous(T::zero(), value)],
        }
    }

    pub fn knots(&self) -> &[Knot<T>] {
        &self.knots
    }

    /// Left and right limits at `x`. Points within the knot tolerance of a knot
    /// are snapped onto it.
    pub fn limits(&self, x: T) -> (T, T) {
        let ks = &self.knots;
        let i = ks.partition_point(|k| k.x < x);
        if i < ks.len() && near(x, ks[i].x) {
            return (ks[i].left, ks[i].right);
        }
        if i > 0 && near(x, ks[i - 1].x) {
            return (ks[i - 1].left, ks[i - 1].right);
        }
        let v = if i == 0 {
            ks[0].left
        } else if i == ks.len() {
            ks[i - 1].right
        } else {
            let (a, b) = (&ks[i - 1], &ks[i]);
            lerp(a.x, a.right, b.x, b.left, x)
        };
        (v, v)
    }

    pub fn eval_left(&self, x: T) -> T {
        self.limits(x).0
    }

    pub fn eval_right(&self, x: T) -> T {
        self.limits(x).1
    }

    pub fn is_nondecreasing(&self) -> bool {
        self.knots.iter().all(|k| k.left <= k.right)
            && self.knots.windows(2).all(|w| w[0].right <= w[1].left)
    }

    /// The values a subdivision of `[alpha, beta]` can see, in spatial order:
    /// the value at `alpha`, both limits at every interior knot, and both limits
    /// at `beta`. Point values follow the right-limit convention.
    ///
    /// Between two consecutive entries the function is monotone, so for any
    /// superadditive gauge the supremum over subdivisions is reached on a
    /// subsequence of this list.
    pub fn sample_sequence(&self, alpha: T, beta: T) -> Vec<T> {
        let mut out = vec![self.eval_right(alpha)];
        for k in &self.knots {
            if k.x > alpha && k.x < beta && !near(k.x, alpha) && !near(k.x, beta) {
                out.push(k.left);
                out.push(k.right);
            }
        }
        let (l, r) = self.limits(beta);
        out.push(l);
        out.push(r);
        out.dedup();
        out
    }

    /// Exact `∫_lo^hi |self − other| dx`.
    pub fn l1_distance(&self, other: &PiecewiseLinear<T>, lo: T, hi: T) -> T {
        if hi <= lo {
            return T::zero();
        }
        let mut xs: Vec<T> = vec![lo, hi];
        xs.extend(
            self.knots
                .iter()
                .chain(other.knots.iter())
                .map(|k| k.x)
                .filter(|&x| x > lo && x < hi),
        );
        xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        xs.dedup();
        let mut total = T::zero();
        for w in xs.windows(2) {
            let (x0, x1) = (w[0], w[1]);
            let d0 = self.right_of(x0) - other.right_of(x0);
            let d1 = self.left_of(x1) - other.left_of(x1);
            total = total + abs_linear_integral(d0, d1, x1 - x0);
        }
        total
    }

    /// Limit from the right without knot snapping, for exact integration.
    fn right_of(&self, x: T) -> T {
        let ks = &self.knots;
        let i = ks.partition_point(|k| k.x <= x);
        if i == 0 {
            return ks[0].left;
        }
        let a = &ks[i - 1];
        if a.x == x || i == ks.len() {
            return a.right;
        }
        let b = &ks[i];
        lerp(a.x, a.right, b.x, b.left, x)
    }

    fn left_of(&self, x: T) -> T {
        let ks = &self.knots;
        let i = ks.partition_point(|k| k.x < x);
        if i == ks.len() {
            return ks[i - 1].right;
        }
        let b = &ks[i];
        if b.x == x || i == 0 {
            return b.left;
        }
        let a = &ks[i - 1];
        lerp(a.x, a.right, b.x, b.left, x)
    }

    /// Generalized inverse `y ↦ inf{x : y ≤ g(x)}` of a nondecreasing function
    /// with strictly increasing linear pieces, restricted to the knot range.
    ///
    /// Each jump `[left, right]` at `x` becomes a flat piece of value `x`.
    pub fn generalized_inverse(&self) -> Result<MonotoneProfile<T>> {
        let mut pts: Vec<(T, T)> = Vec::with_capacity(2 * self.knots.len());
        for k in &self.knots {
            if k.left > k.right {
                return Err(Error::InvalidProfile(format!(
                    "decreasing jump at x = {}",
                    k.x
                )));
            }
            pts.push((k.left, k.x));
            if k.right > k.left {
                pts.push((k.right, k.x));
            }
        }
        for w in pts.windows(2) {
            if w[1].0 <= w[0].0 {
                return Err(Error::InvalidProfile(format!(
                    "flat or decreasing piece ending at y = {}; inverse would jump",
                    w[1].0
                )));
            }
        }
        MonotoneProfile::new(pts)
    }
}

/// `∫_0^w |d(s)| ds` for `d` linear from `d0` to `d1`.
pub(crate) fn abs_linear_integral<T: Scalar>(d0: T, d1: T, w: T) -> T {
    if d0 * d1 >= T::zero() {
        (d0.abs() + d1.abs()) * w * T::half()
    } else {
        let (a, b) = (d0.abs(), d1.abs());
        w * (a * a + b * b) / (T::two() * (a + b))
    }
}

/// Continuous nondecreasing piecewise-linear function on `[x_first, x_last]`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MonotoneProfile<T> {
    knots: Vec<(T, T)>,
}

impl<T: Scalar> MonotoneProfile<T> {
    /// Builds the profile, merging abscissae closer than the knot tolerance.
    pub fn new(mut knots: Vec<(T, T)>) -> Result<Self> {
        if knots.is_empty() {
            return Err(Error::InvalidProfile("no knots".into()));
        }
        let mut out: Vec<(T, T)> = Vec::with_capacity(knots.len());
        for (x, y) in knots.drain(..) {
            if !(x.is_finite() && y.is_finite()) {
                return Err(Error::InvalidProfile(format!("non-finite knot ({x}, {y})")));
            }
            if let Some(last) = out.last_mut() {
                if x < last.0 && !near(x, last.0) {
                    return Err(Error::InvalidProfile(format!(
                        "abscissae not increasing: {} then {x}",
                        last.0
                    )));
                }
                if near(x, last.0) {
                    last.1 = last.1.max(y);
                    continue;
                }
                if y < last.1 {
                    return Err(Error::InvalidProfile(format!(
                        "values decrease at x = {x}: {} then {y}",
                        last.1
                    )));
                }
            }
            out.push((x, y));
        }
        Ok(MonotoneProfile { knots: out })
    }

    pub fn knots(&self) -> &[(T, T)] {
        &self.knots
    }

    pub fn domain(&self) -> (T, T) {
        (self.knots[0].0, self.knots[self.knots.len() - 1].0)
    }

    pub fn range(&self) -> (T, T) {
        (self.knots[0].1, self.knots[self.knots.len() - 1].1)
    }

    /// Evaluates at `x`, which must lie in the domain up to the knot tolerance.
    pub fn eval(&self, x: T) -> Result<T> {
        let (lo, hi) = self.domain();
        if (x < lo && !near(x, lo)) || (x > hi && !near(x, hi)) || x.is_nan() {
            return Err(Error::out_of_domain(
                "profile argument",
                x.as_f64(),
                lo.as_f64(),
                hi.as_f64(),
            ));
        }
        Ok(self.eval_clamped(x))
    }

    /// Evaluates with constant extension outside the domain.
    pub fn eval_clamped(&self, x: T) -> T {
        let ks = &self.knots;
        let i = ks.partition_point(|k| k.0 < x);
        if i == 0 {
            return ks[0].1;
        }
        if i == ks.len() {
            return ks[i - 1].1;
        }
        let (a, b) = (ks[i - 1], ks[i]);
        lerp(a.0, a.1, b.0, b.1, x)
    }

    /// Generalized inverse `y ↦ inf{x : y ≤ g(x)}` on the range of `g`.
    pub fn generalized_inverse(&self) -> InverseProfile<T> {
        let ks = &self.knots;
        let mut graph = Vec::with_capacity(ks.len());
        let mut i = 0;
        while i < ks.len() {
            let mut j = i;
            while j + 1 < ks.len() && ks[j + 1].1 == ks[i].1 {
                j += 1;
            }
            graph.push(Knot::new(ks[i].1, ks[i].0, ks[j].0));
            i = j + 1;
        }
        let (lo, hi) = self.range();
        InverseProfile {
            graph: PiecewiseLinear { knots: graph },
            lo,
            hi,
        }
    }

    /// `sup |self − other|` over the intersection of the two domains.
    pub fn sup_distance(&self, other: &MonotoneProfile<T>) -> T {
        let (a0, a1) = self.domain();
        let (b0, b1) = other.domain();
        let (lo, hi) = (a0.max(b0), a1.min(b1));
        if hi < lo {
            return T::zero();
        }
        let xs = self
            .knots
            .iter()
            .chain(other.knots.iter())
            .map(|k| k.0)
            .filter(|&x| x >= lo && x <= hi)
            .chain([lo, hi]);
        xs.map(|x| (self.eval_clamped(x) - other.eval_clamped(x)).abs())
            .fold(T::zero(), T::max)
    }
}

/// Generalized inverse of a [`MonotoneProfile`]: nondecreasing, with upward
/// jumps where the original is flat. Point values are the infimum, i.e. the
/// left limit.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InverseProfile<T> {
    graph: PiecewiseLinear<T>,
    lo: T,
    hi: T,
}

impl<T: Scalar> InverseProfile<T> {
    pub fn graph(&self) -> &PiecewiseLinear<T> {
        &self.graph
    }

    pub fn domain(&self) -> (T, T) {
        (self.lo, self.hi)
    }

    pub fn eval(&self, y: T) -> Result<T> {
        if (y < self.lo && !near(y, self.lo)) || (y > self.hi && !near(y, self.hi)) || y.is_nan()
        {
            return Err(Error::out_of_domain(
                "inverse argument",
                y.as_f64(),
                self.lo.as_f64(),
                self.hi.as_f64(),
            ));
        }
        Ok(self.graph.eval_left(y))
    }
}

/// Piecewise-constant function: `values[i]` holds on `[breaks[i-1], breaks[i])`.
///
/// Breaks may coincide (zero-width regions); point values take the right limit.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StepFunction<T> {
    breaks: Vec<T>,
    values: Vec<T>,
}

impl<T: Scalar> StepFunction<T> {
    pub fn new(breaks: Vec<T>, values: Vec<T>) -> Result<Self> {
        if values.len() != breaks.len() + 1 {
            return Err(Error::InvalidProfile(format!(
                "{} breaks need {} values, got {}",
                breaks.len(),
                breaks.len() + 1,
                values.len()
            )));
        }
        if breaks.iter().chain(values.iter()).any(|v| !v.is_finite()) {
            return Err(Error::InvalidProfile("non-finite step data".into()));
        }
        if breaks.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::InvalidProfile("breaks not sorted".into()));
        }
        Ok(StepFunction { breaks, values })
    }

    pub fn constant(value: T) -> Self {
        StepFunction {
            breaks: Vec::new(),
            values: vec![value],
        }
    }

    pub fn breaks(&self) -> &[T] {
        &self.breaks
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    /// Value at `x` with the right-limit convention.
    pub fn value_at(&self, x: T) -> T {
        self.values[self.breaks.partition_point(|&b| b <= x)]
    }

    /// Drops zero-width pieces and merges equal neighbours.
    pub fn simplified(&self) -> Self {
        let mut breaks = Vec::new();
        let mut values = vec![self.values[0]];
        for (i, &b) in self.breaks.iter().enumerate() {
            let v = self.values[i + 1];
            if let Some(&last_b) = breaks.last() {
                if b == last_b {
                    // zero-width region: the later value wins
                    breaks.pop();
                    values.pop();
                }
            }
            if *values.last().unwrap() == v {
                continue;
            }
            breaks.push(b);
            values.push(v);
        }
        StepFunction { breaks, values }
    }

    pub fn to_piecewise_linear(&self) -> PiecewiseLinear<T> {
        let s = self.simplified();
        if s.breaks.is_empty() {
            return PiecewiseLinear::constant(s.values[0]);
        }
        let knots = s
            .breaks
            .iter()
            .enumerate()
            .map(|(i, &x)| Knot::new(x, s.values[i], s.values[i + 1]))
            .collect();
        PiecewiseLinear { knots }
    }

    /// Common refinement with `other`: `(x_left, x_right, self value, other value)`
    /// for every piece, with infinite outer pieces.
    pub fn overlay(&self, other: &StepFunction<T>) -> Vec<(T, T, T, T)> {
        let mut xs: Vec<T> = self.breaks.iter().chain(other.breaks.iter()).copied().collect();
        xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        xs.dedup();
        let mut out = Vec::with_capacity(xs.len() + 1);
        let mut left = T::neg_infinity();
        for &x in &xs {
            out.push((left, x, self.value_left_of(x), other.value_left_of(x)));
            left = x;
        }
        out.push((left, T::infinity(), self.value_at(left), other.value_at(left)));
        out
    }

    fn value_left_of(&self, x: T) -> T {
        self.values[self.breaks.partition_point(|&b| b < x)]
    }

    /// `∫ g(self(x), other(x)) dx` over the line; the integrand must vanish on
    /// the unbounded outer pieces.
    pub fn integrate_with(
        &self,
        other: &StepFunction<T>,
        mut g: impl FnMut(T, T) -> Result<T>,
    ) -> Result<T> {
        let mut total = T::zero();
        for (x0, x1, a, b) in self.overlay(other) {
            let v = g(a, b)?;
            if v == T::zero() {
                continue;
            }
            if !(x0.is_finite() && x1.is_finite()) {
                return Err(Error::InvalidArgument(
                    "integrand does not vanish at infinity".into(),
                ));
            }
            total = total + v * (x1 - x0);
        }
        Ok(total)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn example_velocity() -> PiecewiseLinear<f64> {
        PiecewiseLinear::<f64>::new(vec![
            Knot::continuous(-1.0, -3.0),
            Knot::new(0.0, -1.0, 1.0),
            Knot::continuous(1.0, 3.0),
        ])
        .unwrap()
    }

    #[test]
    fn limits_and_interpolation() {
        let a = example_velocity();
        assert_eq!(a.limits(0.0), (-1.0, 1.0));
        assert_eq!(a.limits(0.5), (2.0, 2.0));
        assert_eq!(a.limits(-0.5), (-2.0, -2.0));
        assert_eq!(a.limits(7.0), (3.0, 3.0));
        assert!(a.is_nondecreasing());
    }

    #[test]
    fn rejects_unsorted_knots() {
        let r = PiecewiseLinear::<f64>::new(vec![Knot::continuous(1.0, 0.0), Knot::continuous(0.0, 1.0)]);
        assert!(r.is_err());
        assert!(MonotoneProfile::<f64>::new(vec![(0.0, 1.0), (1.0, 0.0)]).is_err());
        assert!(StepFunction::<f64>::new(vec![0.0], vec![1.0]).is_err());
    }

    #[test]
    fn inverse_of_jump_is_flat() {
        let b = example_velocity().generalized_inverse().unwrap();
        assert_eq!(b.domain(), (-3.0, 3.0));
        assert_eq!(b.eval(2.0).unwrap(), 0.5);
        assert_eq!(b.eval(0.3).unwrap(), 0.0);
        assert_eq!(b.eval(-2.0).unwrap(), -0.5);
        assert!(b.eval(3.5).is_err());
    }

    #[test]
    fn inverse_of_plateau_is_left_continuous_jump() {
        let w = MonotoneProfile::<f64>::new(vec![(0.0, 0.0), (2.0, 1.0), (4.0, 1.0), (6.0, 2.0)]).unwrap();
        let phi = w.generalized_inverse();
        assert_eq!(phi.eval(0.5).unwrap(), 1.0);
        assert_eq!(phi.eval(1.0).unwrap(), 2.0);
        assert_eq!(phi.eval(1.5).unwrap(), 5.0);
        assert_eq!(phi.graph().limits(1.0), (2.0, 4.0));
        assert!(phi.eval(2.5).is_err());
    }

    #[test]
    fn l1_distance_exact_with_crossing() {
        // f = x on [-1, 1] (constant outside), g = 0
        let f = PiecewiseLinear::<f64>::new(vec![Knot::continuous(-1.0, -1.0), Knot::continuous(1.0, 1.0)])
            .unwrap();
        let g = PiecewiseLinear::constant(0.0);
        assert!((f.l1_distance(&g, -2.0, 2.0) - 3.0).abs() < 1e-15);
        let step = StepFunction::<f64>::new(vec![0.0], vec![-1.0, 1.0]).unwrap().to_piecewise_linear();
        assert!((f.l1_distance(&step, -1.0, 1.0) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn sample_sequence_uses_right_limit_at_points() {
        let s = StepFunction::<f64>::new(vec![-1.0, 0.0, 1.0], vec![0.0, 2.0, 1.0, 3.0]).unwrap();
        let p = s.to_piecewise_linear();
        assert_eq!(p.sample_sequence(-0.5, 0.5), vec![2.0, 1.0]);
        assert_eq!(p.sample_sequence(-1.0, 1.0), vec![2.0, 1.0, 3.0]);
        assert_eq!(p.sample_sequence(-2.0, 2.0), vec![0.0, 2.0, 1.0, 3.0]);
    }

    #[test]
    fn step_simplify_and_overlay() {
        let s = StepFunction::<f64>::new(vec![0.0, 0.0, 1.0, 2.0], vec![1.0, 5.0, 2.0, 2.0, 0.0]).unwrap();
        let t = s.simplified();
        assert_eq!(t.breaks(), &[0.0, 2.0]);
        assert_eq!(t.values(), &[1.0, 2.0, 0.0]);
        assert_eq!(s.value_at(0.0), 2.0);
        let z = StepFunction::<f64>::new(vec![0.5], vec![0.0, 0.0]).unwrap();
        let r = StepFunction::<f64>::new(vec![0.0, 1.0], vec![0.0, 3.0, 0.0]).unwrap();
        let i = r.integrate_with(&z, |a, b| Ok((a - b).abs())).unwrap();
        assert_eq!(i, 3.0);
        let bad = StepFunction::<f64>::constant(1.0).integrate_with(&z, |a, b| Ok((a - b).abs()));
        assert!(bad.is_err());
    }

    #[test]
    fn sup_distance_between_profiles() {
        let p = MonotoneProfile::<f64>::new(vec![(0.0, 0.0), (1.0, 1.0)]).unwrap();
        let q = MonotoneProfile::<f64>::new(vec![(0.0, 0.0), (0.5, 0.25), (1.0, 1.0)]).unwrap();
        assert_eq!(p.sup_distance(&q), 0.25);
    }
}
