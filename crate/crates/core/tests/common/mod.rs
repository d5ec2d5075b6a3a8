#![allow(dead_code)]

use kappa_nbody::dynamics::pair_gap;
use kappa_nbody::{Curvature, SystemState, Vec3};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    use rand::SeedableRng;
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn sphere_point(rng: &mut ChaCha8Rng) -> Vec3 {
    loop {
        let v = Vec3::new(
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
        );
        let n = v.norm();
        if n > 0.1 && n <= 1.0 {
            return v / n;
        }
    }
}

/// A point of the upper sheet within hyperbolic distance about `reach` of
/// the vertex.
pub fn hyperboloid_point(rng: &mut ChaCha8Rng, reach: f64) -> Vec3 {
    let r = rng.gen_range(0.0..reach).sinh();
    let a = rng.gen_range(0.0..std::f64::consts::TAU);
    Vec3::new(r * a.cos(), r * a.sin(), (1.0 + r * r).sqrt())
}

pub fn surface_point(k: Curvature, rng: &mut ChaCha8Rng) -> Vec3 {
    if k.is_spherical() {
        sphere_point(rng)
    } else {
        hyperboloid_point(rng, 1.5)
    }
}

pub fn small_vector(rng: &mut ChaCha8Rng, size: f64) -> Vec3 {
    if size == 0.0 {
        return Vec3::ZERO;
    }
    Vec3::new(
        rng.gen_range(-size..size),
        rng.gen_range(-size..size),
        rng.gen_range(-size..size),
    )
}

/// Random positions whose pairwise gaps all exceed `min_gap`.
pub fn spread_positions(k: Curvature, n: usize, min_gap: f64, rng: &mut ChaCha8Rng) -> Vec<Vec3> {
    loop {
        let q: Vec<Vec3> = (0..n).map(|_| surface_point(k, rng)).collect();
        let ok = (0..n).all(|i| ((i + 1)..n).all(|j| pair_gap(k, q[i], q[j]) > min_gap));
        if ok {
            return q;
        }
    }
}

pub fn random_state(
    k: Curvature,
    n: usize,
    speed: f64,
    min_gap: f64,
    rng: &mut ChaCha8Rng,
) -> SystemState {
    let q = spread_positions(k, n, min_gap, rng);
    let m: Vec<f64> = (0..n).map(|_| rng.gen_range(0.5..2.0)).collect();
    let v: Vec<Vec3> = (0..n).map(|_| small_vector(rng, speed)).collect();
    SystemState::projected(k, &m, &q, &v).expect("random data is admissible")
}
