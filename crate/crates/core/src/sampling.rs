//! Seeded quasi-random sample points inside a scenario's safe region.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::geometry::{ChartKind, Point};

/// A region described in spherical terms, mapped into the owning chart.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleBox {
    pub t: (f64, f64),
    pub r: (f64, f64),
    /// Polar angles stay in `[θ_min, π − θ_min]`.
    pub theta_min: f64,
}

impl SampleBox {
    pub fn new(r_min: f64, r_max: f64) -> Self {
        SampleBox {
            t: (-1.0, 1.0),
            r: (r_min, r_max),
            theta_min: 0.2,
        }
    }
}

fn radical_inverse(mut i: u64, base: u64) -> f64 {
    let inv = 1.0 / base as f64;
    let mut f = inv;
    let mut out = 0.0;
    while i > 0 {
        out += f * (i % base) as f64;
        i /= base;
        f *= inv;
    }
    out
}

/// `count` Halton points (bases 2, 3, 5, 7) with a seeded Cranley–Patterson
/// rotation, mapped to `(t, r, θ, φ)` and then into `chart`.
pub fn sample_points(region: &SampleBox, chart: ChartKind, count: usize, seed: u64) -> Vec<Point> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let shift: [f64; 4] = std::array::from_fn(|_| rng.gen::<f64>());
    let bases = [2, 3, 5, 7];
    (0..count)
        .map(|i| {
            let u: [f64; 4] = std::array::from_fn(|d| (radical_inverse(i as u64 + 1, bases[d]) + shift[d]).fract());
            let t = region.t.0 + u[0] * (region.t.1 - region.t.0);
            let r = region.r.0 + u[1] * (region.r.1 - region.r.0);
            let (c_hi, c_lo) = (region.theta_min.cos(), (PI - region.theta_min).cos());
            let theta = (c_lo + u[2] * (c_hi - c_lo)).acos();
            let phi = -PI + 2.0 * PI * u[3];
            match chart {
                ChartKind::Spherical => Point::new(t, r, theta, phi),
                ChartKind::Cartesian => Point::new(t, r * theta.sin() * phi.cos(), r * theta.sin() * phi.sin(), r * theta.cos()),
            }
        })
        .collect()
}
