//! Event-driven front tracking for `u_t + f_ε(u)_x = 0`.
//!
//! The solution is piecewise constant with values in 𝔅. Fronts move on
//! straight lines; when adjacent fronts meet, the Riemann problem between the
//! outer states is solved again with `f_ε` at the collision point.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::profile::StepFunction;
use crate::riemann::{ApproxFlux, Subdivision};
use crate::scalar::{lit, Scalar};

pub use crate::riemann::{Front, FrontKind};

/// Named initial profiles supported in `[-A, A]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Shape {
    /// `x / A`
    Ramp,
    /// `sin(π x / A)`
    Sine,
    /// `cos²(π x / 2A)`
    Bump,
    /// `1` on `|x| < A/2`
    Box,
}

impl Shape {
    pub const ALL: [Shape; 4] = [Shape::Ramp, Shape::Sine, Shape::Bump, Shape::Box];

    pub fn name(self) -> &'static str {
        match self {
            Shape::Ramp => "ramp",
            Shape::Sine => "sine",
            Shape::Bump => "bump",
            Shape::Box => "box",
        }
    }

    /// Unit-amplitude profile at `x` for support radius `a`.
    pub fn eval<T: Scalar>(self, x: T, a: T) -> T {
        if x.abs() > a {
            return T::zero();
        }
        let pi = T::from(std::f64::consts::PI).unwrap();
        match self {
            Shape::Ramp => x / a,
            Shape::Sine => (pi * x / a).sin(),
            Shape::Bump => {
                let c = (pi * x / (T::two() * a)).cos();
                c * c
            }
            Shape::Box => {
                if x.abs() < a * T::half() {
                    T::one()
                } else {
                    T::zero()
                }
            }
        }
    }

    /// An antiderivative of [`Shape::eval`], constant outside `[-a, a]`.
    fn primitive<T: Scalar>(self, x: T, a: T) -> T {
        let x = x.max(-a).min(a);
        let pi = T::from(std::f64::consts::PI).unwrap();
        match self {
            Shape::Ramp => x * x / (T::two() * a),
            Shape::Sine => -(a / pi) * (pi * x / a).cos(),
            Shape::Bump => x * T::half() + a / (T::two() * pi) * (pi * x / a).sin(),
            Shape::Box => x.max(-a * T::half()).min(a * T::half()),
        }
    }
}

/// Initial data of a run.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum InitialDatum<T> {
    /// `u_l` for `x < 0`, `u_r` for `x > 0`.
    Riemann { left: T, right: T },
    /// A step function; its values are quantized piece by piece.
    Steps { profile: StepFunction<T> },
    /// `amplitude · shape(x)` on `[-A, A]`, zero outside.
    Sampled { shape: Shape, amplitude: T },
}

impl<T: Scalar> InitialDatum<T> {
    /// Values the datum takes, used for speed bounds.
    pub fn value_range(&self) -> (T, T) {
        match self {
            InitialDatum::Riemann { left, right } => (left.min(*right), left.max(*right)),
            InitialDatum::Steps { profile } => profile
                .values()
                .iter()
                .fold((T::infinity(), T::neg_infinity()), |(lo, hi), &v| (lo.min(v), hi.max(v))),
            InitialDatum::Sampled { shape, amplitude } => match shape {
                Shape::Ramp | Shape::Sine => (-amplitude.abs(), amplitude.abs()),
                Shape::Bump | Shape::Box => (amplitude.min(T::zero()), amplitude.max(T::zero())),
            },
        }
    }
}

/// Default cell count `m = ⌈ε^{-1/2}⌉`, so that `m ε → 0`.
pub fn default_cells<T: Scalar>(eps: T) -> usize {
    (T::one() / eps.sqrt()).ceil().to_usize().unwrap_or(1).max(1)
}

/// Approximates the datum by a 𝔅-valued step function.
///
/// Sampled data use the grid `x_i = -A + i h`, `h = 2A/m`, exact cell averages
/// and the nearest state of 𝔅 (ties toward smaller magnitude); outside `[-A, A]`
/// the value is the quantization of 0. Step data keep their breaks and have
/// each value quantized.
pub fn quantize_initial<T: Scalar>(
    datum: &InitialDatum<T>,
    support: T,
    m: usize,
    sub: &Subdivision<T>,
) -> Result<StepFunction<T>> {
    if m == 0 {
        return Err(Error::InvalidArgument("cell count m must be at least 1".into()));
    }
    if !(support > T::zero() && support.is_finite()) {
        return Err(Error::out_of_domain("support radius", support.as_f64(), 0.0, f64::INFINITY));
    }
    let bound = *sub.states().last().unwrap();
    let check = |u: T| -> Result<T> {
        if u.abs() > bound * (T::one() + T::knot_tol()) || u.is_nan() {
            return Err(Error::out_of_domain("initial value", u.as_f64(), -bound.as_f64(), bound.as_f64()));
        }
        Ok(sub.nearest(u))
    };
    match datum {
        InitialDatum::Riemann { left, right } => {
            StepFunction::new(vec![T::zero()], vec![check(*left)?, check(*right)?])
        }
        InitialDatum::Steps { profile } => {
            let values = profile.values().iter().map(|&v| check(v)).collect::<Result<_>>()?;
            Ok(StepFunction::new(profile.breaks().to_vec(), values)?.simplified())
        }
        InitialDatum::Sampled { shape, amplitude } => {
            let h = T::two() * support / lit(m as f64);
            let outside = check(T::zero())?;
            let mut breaks = Vec::with_capacity(m + 1);
            let mut values = vec![outside];
            for i in 0..m {
                let x0 = -support + h * lit(i as f64);
                let x1 = if i + 1 == m { support } else { x0 + h };
                let avg = *amplitude * (shape.primitive(x1, support) - shape.primitive(x0, support)) / (x1 - x0);
                breaks.push(x0);
                values.push(check(avg)?);
            }
            breaks.push(support);
            values.push(outside);
            Ok(StepFunction::new(breaks, values)?.simplified())
        }
    }
}

/// Classification of a front interaction.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Interaction {
    SS,
    RS,
    SR,
    #[serde(rename = "cancel")]
    Cancel,
}

impl Interaction {
    pub fn as_str(self) -> &'static str {
        match self {
            Interaction::SS => "SS",
            Interaction::RS => "RS",
            Interaction::SR => "SR",
            Interaction::Cancel => "cancel",
        }
    }
}

/// A pending collision: the run of adjacent fronts `first..=last` meets at
/// `(time, position)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Event<T> {
    pub time: T,
    pub position: T,
    pub first: usize,
    pub last: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EventRecord<T> {
    pub time: T,
    pub position: T,
    /// Indices of the incoming fronts in the front list before the event.
    pub incoming: Vec<usize>,
    pub outgoing: Vec<Front<T>>,
    pub classification: Interaction,
}

impl<T> EventRecord<T> {
    pub fn in_count(&self) -> usize {
        self.incoming.len()
    }

    pub fn out_count(&self) -> usize {
        self.outgoing.len()
    }
}

/// A maximal constant region of the solution at a fixed time.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Region<T> {
    pub x_left: T,
    pub x_right: T,
    pub u: T,
    pub chi: T,
    pub left_front: Option<FrontKind>,
    pub right_front: Option<FrontKind>,
}

/// Solution and modified velocity at one time, as constant regions.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Snapshot<T> {
    pub time: T,
    pub regions: Vec<Region<T>>,
}

impl<T: Scalar> Snapshot<T> {
    fn steps(&self, value: impl Fn(&Region<T>) -> T) -> StepFunction<T> {
        let breaks = self.regions[1..].iter().map(|r| r.x_left).collect();
        let values = self.regions.iter().map(value).collect();
        StepFunction::new(breaks, values).expect("regions are ordered")
    }

    /// `u(t, ·)` as a step function.
    pub fn solution(&self) -> StepFunction<T> {
        self.steps(|r| r.u)
    }

    /// `χ(t, ·)` as a step function.
    pub fn chi(&self) -> StepFunction<T> {
        self.steps(|r| r.chi)
    }
}

/// Front tracking state for one run.
#[derive(Clone, Debug, Serialize)]
pub struct TrackerState<T> {
    time: T,
    fronts: Vec<Front<T>>,
    approx: ApproxFlux<T>,
    events: Vec<EventRecord<T>>,
    initial_fronts: usize,
    initial_hull: Option<(T, T)>,
    initial_range: (T, T),
    far_left: T,
    far_right: T,
}

/// Solves the Riemann problem at every jump of the 𝔅-valued step data.
pub fn init_tracker<T: Scalar>(steps: &StepFunction<T>, approx: ApproxFlux<T>) -> Result<TrackerState<T>> {
    let s = steps.simplified();
    let c = approx.states();
    let vals = s
        .values()
        .iter()
        .map(|&v| approx.index(v).map(|i| c[i]))
        .collect::<Result<Vec<T>>>()?;
    let mut fronts = Vec::new();
    for (i, &x) in s.breaks().iter().enumerate() {
        fronts.extend(approx.solve_at(vals[i], vals[i + 1], x, T::zero())?);
    }
    let range = vals
        .iter()
        .fold((T::infinity(), T::neg_infinity()), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    let hull = match (s.breaks().first(), s.breaks().last()) {
        (Some(&lo), Some(&hi)) => Some((lo, hi)),
        _ => None,
    };
    Ok(TrackerState {
        time: T::zero(),
        initial_fronts: fronts.len(),
        initial_hull: hull,
        initial_range: range,
        fronts,
        far_left: vals[0],
        far_right: *vals.last().unwrap(),
        approx,
        events: Vec::new(),
    })
}

impl<T: Scalar> TrackerState<T> {
    pub fn time(&self) -> T {
        self.time
    }

    pub fn fronts(&self) -> &[Front<T>] {
        &self.fronts
    }

    pub fn approx(&self) -> &ApproxFlux<T> {
        &self.approx
    }

    pub fn events(&self) -> &[EventRecord<T>] {
        &self.events
    }

    /// `m₀`, the number of fronts created at `t = 0`.
    pub fn initial_fronts(&self) -> usize {
        self.initial_fronts
    }

    /// Smallest interval containing every jump of the initial data.
    pub fn initial_hull(&self) -> Option<(T, T)> {
        self.initial_hull
    }

    /// `‖a(u₀)‖∞`, the largest one-sided velocity over the initial values.
    pub fn initial_speed_bound(&self) -> Result<T> {
        let (lo, hi) = self.initial_range;
        self.approx.flux().speed_bound([lo, hi])
    }

    /// Smallest interval containing every front at the current time.
    pub fn support_hull(&self) -> Option<(T, T)> {
        let t = self.time;
        Some((self.fronts.first()?.position(t), self.fronts.last()?.position(t)))
    }

    /// Constant states at `x → -∞` and `x → +∞`.
    pub fn far_field(&self) -> (T, T) {
        (self.far_left, self.far_right)
    }

    pub fn positions(&self, t: T) -> Vec<T> {
        self.fronts.iter().map(|f| f.position(t)).collect()
    }

    /// Collision time of fronts `j` and `j + 1`, if they approach.
    fn pair_time(&self, j: usize) -> Option<T> {
        let (a, b) = (&self.fronts[j], &self.fronts[j + 1]);
        if a.speed <= b.speed {
            return None;
        }
        let gap = (b.position(self.time) - a.position(self.time)).max(T::zero());
        Some(self.time + gap / (a.speed - b.speed))
    }

    /// The earliest collision, leftmost first among simultaneous ones.
    ///
    /// The event covers the maximal run of adjacent fronts that meet at the
    /// same point, so coincident multi-front collisions resolve at once.
    pub fn next_event(&self) -> Option<Event<T>> {
        let n = self.fronts.len();
        if n < 2 {
            return None;
        }
        let times: Vec<Option<T>> = (0..n - 1).map(|j| self.pair_time(j)).collect();
        let t_star = times.iter().flatten().copied().fold(T::infinity(), T::min);
        if !t_star.is_finite() {
            return None;
        }
        let tol = T::time_tol() * T::one().max(t_star.abs());
        let j = times.iter().position(|t| matches!(t, Some(t) if *t <= t_star + tol))?;
        let time = times[j].unwrap();
        let x = self.fronts[j].position(time);
        let xtol = T::time_tol() * T::one().max(x.abs());
        let meets = |k: usize| -> bool {
            matches!(times[k], Some(t) if t <= t_star + tol)
                || (self.fronts[k + 1].position(time) - self.fronts[k].position(time)).abs() <= xtol
        };
        let mut first = j;
        while first > 0 && meets(first - 1) {
            first -= 1;
        }
        let mut last = j + 1;
        while last + 1 < n && meets(last) {
            last += 1;
        }
        Some(Event { time, position: x, first, last })
    }

    /// Replaces the colliding run by the `f_ε` Riemann solution of its outer states.
    pub fn resolve_event(&mut self, ev: Event<T>) -> Result<()> {
        let run = &self.fronts[ev.first..=ev.last];
        let pair = run
            .windows(2)
            .find(|w| w[0].speed > w[1].speed)
            .ok_or_else(|| Error::Invariant("event without approaching fronts".into()))?;
        let kinds = (pair[0].kind, pair[1].kind);
        let (u1, u3) = (run[0].left, run[run.len() - 1].right);
        let outgoing = self.approx.solve_at(u1, u3, ev.position, ev.time)?;
        if outgoing.len() >= run.len() {
            return Err(Error::Invariant(format!(
                "interaction at t = {} did not reduce the front count ({} -> {})",
                ev.time,
                run.len(),
                outgoing.len()
            )));
        }
        let classification = match kinds {
            _ if outgoing.is_empty() => Interaction::Cancel,
            (FrontKind::Shock, FrontKind::Shock) => Interaction::SS,
            (FrontKind::Rarefaction, FrontKind::Shock) => Interaction::RS,
            (FrontKind::Shock, FrontKind::Rarefaction) => Interaction::SR,
            (FrontKind::Rarefaction, FrontKind::Rarefaction) => {
                return Err(Error::Invariant(format!(
                    "two rarefaction fronts collided at t = {}",
                    ev.time
                )))
            }
        };
        self.time = self.time.max(ev.time);
        self.fronts.splice(ev.first..=ev.last, outgoing.iter().copied());
        self.events.push(EventRecord {
            time: ev.time,
            position: ev.position,
            incoming: (ev.first..=ev.last).collect(),
            outgoing,
            classification,
        });
        Ok(())
    }

    /// Processes every event up to `t`, then moves the clock to `t`.
    pub fn advance_to(&mut self, t: T) -> Result<()> {
        if t < self.time {
            return Err(Error::out_of_domain(
                "target time",
                t.as_f64(),
                self.time.as_f64(),
                f64::INFINITY,
            ));
        }
        while let Some(ev) = self.next_event() {
            if ev.time > t {
                break;
            }
            self.resolve_event(ev)?;
        }
        self.time = t;
        Ok(())
    }

    fn region_index(&self, x: T) -> usize {
        let t = self.time;
        self.fronts.partition_point(|f| f.position(t) <= x)
    }

    fn region_value(&self, r: usize) -> T {
        if r == 0 {
            self.far_left
        } else {
            self.fronts[r - 1].right
        }
    }

    fn region_chi(&self, r: usize) -> Result<T> {
        let u = self.region_value(r);
        let left = r.checked_sub(1).map(|i| self.fronts[i].kind);
        let right = self.fronts.get(r).map(|f| f.kind);
        let flux = self.approx.flux();
        match (left, right) {
            (Some(FrontKind::Shock), Some(FrontKind::Rarefaction)) => Ok(flux.velocity_limits(u)?.1),
            (Some(FrontKind::Rarefaction), Some(FrontKind::Shock)) => Ok(flux.velocity_limits(u)?.0),
            _ => flux.mean_velocity(u),
        }
    }

    /// `u(t, x)` at the current time; the right limit at a front.
    pub fn sample_solution(&self, x: T) -> T {
        self.region_value(self.region_index(x))
    }

    /// `χ(t, x)` at the current time; the right limit at a front.
    pub fn sample_chi(&self, x: T) -> Result<T> {
        self.region_chi(self.region_index(x))
    }

    /// Constant regions at the current time, zero-width regions dropped.
    pub fn snapshot(&self) -> Result<Snapshot<T>> {
        let t = self.time;
        let n = self.fronts.len();
        let mut regions = Vec::with_capacity(n + 1);
        for r in 0..=n {
            let x_left = if r == 0 { T::neg_infinity() } else { self.fronts[r - 1].position(t) };
            let x_right = if r == n { T::infinity() } else { self.fronts[r].position(t) };
            if r > 0 && r < n && x_right <= x_left {
                continue;
            }
            regions.push(Region {
                x_left,
                x_right,
                u: self.region_value(r),
                chi: self.region_chi(r)?,
                left_front: r.checked_sub(1).map(|i| self.fronts[i].kind),
                right_front: self.fronts.get(r).map(|f| f.kind),
            });
        }
        // fronts collapsed onto one point leave adjacent regions to be stitched
        for i in 1..regions.len() {
            if regions[i].x_left < regions[i - 1].x_right {
                regions[i].x_left = regions[i - 1].x_right;
            }
        }
        Ok(Snapshot { time: t, regions })
    }

    /// Exact `∫_lo^hi u(t, x) dx` at the current time.
    pub fn mass(&self, lo: T, hi: T) -> T {
        let t = self.time;
        let mut total = T::zero();
        let mut x = lo;
        let mut r = self.region_index(lo);
        while x < hi {
            let next = self.fronts.get(r).map(|f| f.position(t)).unwrap_or(hi).min(hi).max(x);
            total = total + self.region_value(r) * (next - x);
            x = next;
            r += 1;
            if r > self.fronts.len() {
                total = total + self.far_right * (hi - x);
                break;
            }
        }
        total
    }

    /// Checks ordering, value chaining, membership in 𝔅 and admissibility.
    pub fn check_invariants(&self) -> Result<()> {
        let t = self.time;
        let c = self.approx.states();
        let tol = T::time_tol();
        let mut prev = self.far_left;
        let mut last_x = T::neg_infinity();
        for f in &self.fronts {
            let x = f.position(t);
            if x < last_x - tol * T::one().max(x.abs()) {
                return Err(Error::Invariant(format!("fronts out of order at x = {x}")));
            }
            last_x = x;
            if f.left != prev {
                return Err(Error::Invariant(format!("value chaining broken at x = {x}")));
            }
            let (i, j) = (self.approx.index(f.left)?, self.approx.index(f.right)?);
            let ok = match f.kind {
                FrontKind::Shock => i > j,
                FrontKind::Rarefaction => j == i + 1,
            };
            if !ok || c[i] != f.left || c[j] != f.right {
                return Err(Error::Invariant(format!("inadmissible front at x = {x}: {f:?}")));
            }
            prev = f.right;
        }
        if prev != self.far_right {
            return Err(Error::Invariant("right far field does not match".into()));
        }
        Ok(())
    }
}
