#![allow(dead_code)]

use std::sync::OnceLock;

use bvphi::flux::ConvexFlux;
use bvphi::phi::{build_phi, ConvexGauge};
use bvphi::profile::StepFunction;
use bvphi::riemann::{approx_flux, build_subdivision, ApproxFlux};
use bvphi::tracker::{init_tracker, TrackerState};
use rand::Rng;

pub const NAMES: [&str; 4] = ["burgers", "example12", "power3", "atomic"];

pub fn make_flux(i: usize) -> ConvexFlux<f64> {
    match i {
        0 => ConvexFlux::burgers(1.0),
        1 => ConvexFlux::example12(1.0),
        2 => ConvexFlux::power(3.0, 1.0, 1e-2),
        _ => ConvexFlux::atomic(6, 1e-3, 1.0),
    }
    .unwrap()
}

struct Cached {
    flux: ConvexFlux<f64>,
    gauge: ConvexGauge<f64>,
}

fn cache() -> &'static Vec<Cached> {
    static C: OnceLock<Vec<Cached>> = OnceLock::new();
    C.get_or_init(|| {
        (0..NAMES.len())
            .map(|i| {
                let flux = make_flux(i);
                let gauge = build_phi(&flux).unwrap();
                Cached { flux, gauge }
            })
            .collect()
    })
}

pub fn flux(i: usize) -> &'static ConvexFlux<f64> {
    &cache()[i].flux
}

pub fn gauge(i: usize) -> &'static ConvexGauge<f64> {
    &cache()[i].gauge
}

pub fn approx(flux: &ConvexFlux<f64>, eps: f64) -> ApproxFlux<f64> {
    approx_flux(flux, build_subdivision(flux, eps).unwrap()).unwrap()
}

/// 𝔅-valued step data with `breaks` jumps in `[-a, a]` and zero-quantized far field.
pub fn random_steps(rng: &mut impl Rng, fe: &ApproxFlux<f64>, breaks: usize, a: f64) -> StepFunction<f64> {
    let sub = fe.subdivision();
    let m = fe.flux().bound();
    let mut xs: Vec<f64> = (0..breaks).map(|_| rng.gen_range(-a..a)).collect();
    xs.sort_by(|p, q| p.partial_cmp(q).unwrap());
    xs.dedup();
    let far = sub.nearest(0.0);
    let mut vals = vec![far];
    for _ in 1..xs.len() {
        vals.push(sub.nearest(rng.gen_range(-m..=m)));
    }
    vals.push(far);
    StepFunction::new(xs, vals).unwrap()
}

pub fn random_run(rng: &mut impl Rng, fe: &ApproxFlux<f64>, breaks: usize) -> TrackerState<f64> {
    init_tracker(&random_steps(rng, fe, breaks, 1.0), fe.clone()).unwrap()
}

/// Every subsequence chain, summed left to right.
pub fn brute_force(values: &[f64], g: impl Fn(f64) -> f64, positive: bool) -> f64 {
    let n = values.len();
    let mut best = 0.0f64;
    for mask in 1u32..(1 << n) {
        let idx: Vec<usize> = (0..n).filter(|i| mask & (1 << i) != 0).collect();
        let mut acc = 0.0;
        for w in idx.windows(2) {
            let d = values[w[1]] - values[w[0]];
            acc += g(if positive { d.max(0.0) } else { d.abs() });
        }
        best = best.max(acc);
    }
    best
}
