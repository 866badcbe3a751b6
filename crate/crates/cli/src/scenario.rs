//! Scenario files: TOML with nested `[flux]` and `[datum]` tables.

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use bvphi::flux::{ConvexFlux, MonotoneVelocity};
use bvphi::profile::{Knot, StepFunction};
use bvphi::tracker::{InitialDatum, Shape};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub const DEFAULT_POWER_RESOLUTION: f64 = 1e-2;
pub const DEFAULT_RAMP: f64 = 1e-6;

fn default_resolution() -> f64 {
    DEFAULT_POWER_RESOLUTION
}

fn default_ramp() -> f64 {
    DEFAULT_RAMP
}

fn default_support() -> f64 {
    1.0
}

/// One run: a flux, initial data, a resolution and the times to report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    pub eps: f64,
    /// Cell count `m`; defaults to `⌈ε^{-1/2}⌉`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cells: Option<usize>,
    pub times: Vec<f64>,
    /// Interval `[α, β]` of the solution bounds; defaults to the support hull.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub interval: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Output directory, overridden by `--out-dir`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    pub flux: FluxSpec,
    pub datum: DatumSpec,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum FluxSpec {
    /// `u²/2`
    Burgers { bound: f64 },
    /// `|u|^{p+1}/(p+1)`
    Power {
        p: f64,
        bound: f64,
        #[serde(default = "default_resolution")]
        resolution: f64,
    },
    /// `u² + |u|`
    Example12 { bound: f64 },
    /// `δu + Σ_{n ≤ N} 2⁻ⁿ H(u − r_n)` integrated
    Atomic {
        terms: usize,
        #[serde(default = "default_ramp")]
        ramp: f64,
        bound: f64,
    },
    /// Explicit velocity: rows `[u, a⁻(u), a⁺(u)]` from `-M` to `M`; `f(0) = 0`.
    Table { knots: Vec<[f64; 3]> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum DatumSpec {
    Riemann { left: f64, right: f64 },
    Steps { breaks: Vec<f64>, values: Vec<f64> },
    Sampled {
        shape: Shape,
        amplitude: f64,
        #[serde(default = "default_support")]
        support: f64,
    },
    /// Independent uniform values in `[-amplitude, amplitude]` on the `m`
    /// cells of `[-A, A]`, drawn from the scenario seed.
    Random {
        amplitude: f64,
        #[serde(default = "default_support")]
        support: f64,
    },
}

pub const BUILTINS: [&str; 4] = ["burgers", "power(p)", "example12", "atomic(N, δ)"];

fn field_error(field: &str, msg: impl std::fmt::Display) -> anyhow::Error {
    anyhow::anyhow!("invalid scenario field `{field}`: {msg}")
}

fn finite(field: &str, v: f64) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(field_error(field, format!("must be finite, got {v}")))
    }
}

impl Scenario {
    pub fn from_toml(text: &str) -> Result<Self> {
        let sc: Scenario = toml::from_str(text).context("cannot parse scenario")?;
        sc.validate()?;
        Ok(sc)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
        Scenario::from_toml(&text).with_context(|| format!("in {}", path.display()))
    }

    pub fn to_toml(&self) -> Result<String> {
        Ok(toml::to_string(self)?)
    }

    /// `M` of the flux.
    pub fn bound(&self) -> f64 {
        match &self.flux {
            FluxSpec::Burgers { bound }
            | FluxSpec::Power { bound, .. }
            | FluxSpec::Example12 { bound }
            | FluxSpec::Atomic { bound, .. } => *bound,
            FluxSpec::Table { knots } => knots.last().map_or(0.0, |k| k[0]),
        }
    }

    /// Checks ranges that parsing cannot, naming the offending field.
    pub fn validate(&self) -> Result<()> {
        if !(finite("eps", self.eps)? > 0.0) {
            return Err(field_error("eps", format!("must be positive, got {}", self.eps)));
        }
        if self.cells == Some(0) {
            return Err(field_error("cells", "must be at least 1"));
        }
        if self.times.is_empty() {
            return Err(field_error("times", "needs at least one time"));
        }
        for (i, &t) in self.times.iter().enumerate() {
            if !(finite("times", t)? > 0.0) {
                return Err(field_error(&format!("times[{i}]"), format!("must be positive, got {t}")));
            }
        }
        if let Some([a, b]) = self.interval {
            if !(finite("interval", a)? < finite("interval", b)?) {
                return Err(field_error("interval", format!("[{a}, {b}] is empty")));
            }
        }
        let m = self.bound();
        if !(finite("flux.bound", m)? > 0.0) {
            return Err(field_error("flux.bound", format!("must be positive, got {m}")));
        }
        match &self.flux {
            FluxSpec::Power { p, resolution, .. } => {
                if !(*p >= 1.0) {
                    return Err(field_error("flux.p", format!("must be at least 1, got {p}")));
                }
                if !(*resolution > 0.0 && *resolution < 1.0) {
                    return Err(field_error("flux.resolution", format!("must lie in (0, 1), got {resolution}")));
                }
            }
            FluxSpec::Atomic { terms, ramp, .. } => {
                if *terms == 0 {
                    return Err(field_error("flux.terms", "must be at least 1"));
                }
                if !(*ramp > 0.0) {
                    return Err(field_error("flux.ramp", format!("must be positive, got {ramp}")));
                }
            }
            FluxSpec::Table { knots } => {
                if knots.len() < 2 {
                    return Err(field_error("flux.knots", "needs at least two rows"));
                }
                if knots[0][0] != -m {
                    return Err(field_error("flux.knots", format!("must start at -M = {}, got {}", -m, knots[0][0])));
                }
            }
            _ => {}
        }
        let within = |field: &str, v: f64| -> Result<()> {
            if finite(field, v)?.abs() > m {
                return Err(field_error(field, format!("{v} lies outside [-{m}, {m}]")));
            }
            Ok(())
        };
        match &self.datum {
            DatumSpec::Riemann { left, right } => {
                within("datum.left", *left)?;
                within("datum.right", *right)?;
            }
            DatumSpec::Steps { breaks, values } => {
                if values.len() != breaks.len() + 1 {
                    return Err(field_error(
                        "datum.values",
                        format!("needs {} entries for {} breaks, got {}", breaks.len() + 1, breaks.len(), values.len()),
                    ));
                }
                if breaks.windows(2).any(|w| !(w[0] < w[1])) {
                    return Err(field_error("datum.breaks", "must be strictly increasing"));
                }
                for (i, &v) in values.iter().enumerate() {
                    within(&format!("datum.values[{i}]"), v)?;
                }
                for &x in breaks {
                    finite("datum.breaks", x)?;
                }
            }
            DatumSpec::Sampled { amplitude, support, .. } | DatumSpec::Random { amplitude, support } => {
                within("datum.amplitude", *amplitude)?;
                if !(finite("datum.support", *support)? > 0.0) {
                    return Err(field_error("datum.support", format!("must be positive, got {support}")));
                }
            }
        }
        Ok(())
    }

    pub fn build_flux(&self) -> Result<ConvexFlux<f64>> {
        let flux = match &self.flux {
            FluxSpec::Burgers { bound } => ConvexFlux::burgers(*bound),
            FluxSpec::Power { p, bound, resolution } => ConvexFlux::power(*p, *bound, *resolution),
            FluxSpec::Example12 { bound } => ConvexFlux::example12(*bound),
            FluxSpec::Atomic { terms, ramp, bound } => ConvexFlux::atomic(*terms, *ramp, *bound),
            FluxSpec::Table { knots } => {
                let ks = knots.iter().map(|k| Knot::new(k[0], k[1], k[2])).collect();
                MonotoneVelocity::new(self.bound(), ks).and_then(|v| ConvexFlux::new(v, 0.0, 0.0))
            }
        };
        flux.context("invalid scenario field `flux`")
    }

    pub fn cells(&self) -> usize {
        self.cells.unwrap_or_else(|| bvphi::tracker::default_cells(self.eps))
    }

    /// Support radius `A` used by the covering grid.
    pub fn support(&self) -> f64 {
        match &self.datum {
            DatumSpec::Sampled { support, .. } | DatumSpec::Random { support, .. } => *support,
            DatumSpec::Steps { breaks, .. } => breaks.iter().fold(1.0f64, |a, x| a.max(x.abs())),
            DatumSpec::Riemann { .. } => 1.0,
        }
    }

    /// The initial datum; random data are drawn from `seed`.
    pub fn initial_datum(&self, seed: u64) -> Result<InitialDatum<f64>> {
        Ok(match &self.datum {
            DatumSpec::Riemann { left, right } => InitialDatum::Riemann { left: *left, right: *right },
            DatumSpec::Steps { breaks, values } => InitialDatum::Steps {
                profile: StepFunction::new(breaks.clone(), values.clone()).context("invalid scenario field `datum`")?,
            },
            DatumSpec::Sampled { shape, amplitude, .. } => InitialDatum::Sampled { shape: *shape, amplitude: *amplitude },
            DatumSpec::Random { amplitude, support } => {
                let m = self.cells();
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let h = 2.0 * support / m as f64;
                let breaks = (0..=m).map(|i| -support + h * i as f64).collect();
                let mut values = vec![0.0];
                values.extend((0..m).map(|_| rng.gen_range(-amplitude.abs()..=amplitude.abs())));
                values.push(0.0);
                InitialDatum::Steps { profile: StepFunction::new(breaks, values)? }
            }
        })
    }
}
