//! Synthetic datasets shared by model and harness tests.

use alloc::string::String;
use alloc::vec::Vec;
use core::f64::consts::PI;

use rand::Rng;

use super::{Dataset, Matrix};
use crate::math;

pub fn normal<R: Rng>(rng: &mut R) -> f64 {
    let u1: f64 = rng.random_range(f64::EPSILON..1.0);
    let u2: f64 = rng.random::<f64>();
    math::sqrt(-2.0 * math::ln(u1)) * math::cos(2.0 * PI * u2)
}

/// Two Gaussian blobs whose means differ by `separation` standard deviations
/// along each of the first two axes; the remaining `dims - 2` columns are
/// unit noise. Labels alternate so both classes are balanced.
pub fn blobs(n: usize, dims: usize, separation: f64, seed: u64) -> Dataset {
    let mut rng = crate::rng::rng_from(seed);
    let mut rows = Vec::with_capacity(n);
    let mut y = Vec::with_capacity(n);
    for i in 0..n {
        let label = (i % 2) as u8;
        let shift = if label == 1 { separation / 2.0 } else { -separation / 2.0 };
        let row: Vec<f64> = (0..dims)
            .map(|j| normal(&mut rng) + if j < 2 { shift } else { 0.0 })
            .collect();
        rows.push(row);
        y.push(label);
    }
    Dataset::new(Matrix::from_rows(&rows).unwrap(), y, alloc::vec![String::from("xx"); n]).unwrap()
}
