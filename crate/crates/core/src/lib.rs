//! Wave front tracking for 1D scalar conservation laws `u_t + f(u)_x = 0`
//! with strictly convex, merely Lipschitz fluxes.
//!
//! The velocity `a = f'` may jump. The crate builds the gauge Φ that measures
//! the nonlinearity of `f`, tracks entropy solutions of piecewise-linear flux
//! approximations exactly, and checks Oleinik-type and `BV^Φ` bounds on the
//! computed solutions.
//!
//! Everything is generic over a [`Scalar`] (`f32` or `f64`); the aliases at
//! the crate root fix `f64`.

pub mod error;
pub mod flux;
pub mod phi;
pub mod profile;
pub mod riemann;
pub mod scalar;
pub mod tracker;
pub mod verify;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type Velocity = flux::MonotoneVelocity<f64>;
pub type Flux = flux::ConvexFlux<f64>;
pub type Profile = profile::MonotoneProfile<f64>;
pub type Steps = profile::StepFunction<f64>;
pub type Gauge = phi::ConvexGauge<f64>;
pub type Subdivision = riemann::Subdivision<f64>;
pub type ApproxFlux = riemann::ApproxFlux<f64>;
pub type Fan = riemann::RiemannFan<f64>;
pub type Tracker = tracker::TrackerState<f64>;
