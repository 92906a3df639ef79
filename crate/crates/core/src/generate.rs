//! Seeded random problem instances with known solutions.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::linalg::{Matrix, Vector};
use crate::oracles::{ObjectiveSpec, Problem, ProblemError, ProblemFile, RowSpec, SetSpec};

fn gaussian(rng: &mut ChaCha8Rng, n: usize) -> Vector {
    Vector::from_fn(n, |_, _| rng.sample(StandardNormal))
}

fn in_ball(rng: &mut ChaCha8Rng, n: usize, radius: f64) -> Vector {
    let dir = gaussian(rng, n).normalize();
    let t: f64 = rng.gen();
    dir * (radius * t.powf(1.0 / n as f64))
}

fn to_rows(m: &Matrix) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

/// `f(x) = max_i ⟨a_i, x⟩ + b_i` over the unit ball, with every row active at
/// a known minimizer `x*` in the inner half of the ball.
///
/// The last row is `−Σ w_i a_i` (normalized) for random positive `w`, so zero
/// lies in the convex hull of the active gradients.
pub fn max_affine(n: usize, rows: usize, seed: u64) -> Result<Problem, ProblemError> {
    if n == 0 || rows < 2 {
        return Err(ProblemError::Invalid("need dim ≥ 1 and at least two rows".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let xstar = in_ball(&mut rng, n, 0.5);
    let fstar: f64 = rng.gen_range(-1.0..1.0);
    let mut normals: Vec<Vector> = (0..rows - 1).map(|_| gaussian(&mut rng, n).normalize()).collect();
    let mut last = Vector::zeros(n);
    for a in &normals {
        last.axpy(-rng.gen_range(0.5..1.5), a, 1.0);
    }
    let norm = last.norm();
    normals.push(if norm > 1e-8 { last / norm } else { -&normals[0] });
    let rows = normals
        .into_iter()
        .map(|a| RowSpec { b: fstar - a.dot(&xstar), a: a.as_slice().to_vec() })
        .collect();
    Problem::from_file(ProblemFile {
        dim: n,
        x0: vec![0.0; n],
        radius: 1.0,
        set: SetSpec::Ball { center: vec![0.0; n], radius: 1.0 },
        objective: ObjectiveSpec::MaxAffine { rows },
        xstar: Some(xstar.as_slice().to_vec()),
        fstar: Some(fstar),
        r: None,
        variation: None,
        seed: Some(seed),
    })
}

/// Affine monotone operator `V(x) = Mx + q` on the unit ball with a zero at an
/// interior point; `M` is skew plus a small positive semidefinite part.
pub fn vi_affine(n: usize, seed: u64) -> Result<Problem, ProblemError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a = Matrix::from_fn(n, n, |_, _| rng.sample(StandardNormal));
    let b = Matrix::from_fn(n, n, |_, _| rng.sample::<f64, _>(StandardNormal) * 0.3);
    let m = (&a - a.transpose()) * 0.5 + &b * b.transpose();
    let xstar = in_ball(&mut rng, n, 0.5);
    let q = -(&m * &xstar);
    Problem::from_file(ProblemFile {
        dim: n,
        x0: vec![0.0; n],
        radius: 1.0,
        set: SetSpec::Ball { center: vec![0.0; n], radius: 1.0 },
        objective: ObjectiveSpec::ViAffine { m: to_rows(&m), q: q.as_slice().to_vec() },
        xstar: Some(xstar.as_slice().to_vec()),
        fstar: None,
        r: None,
        variation: None,
        seed: Some(seed),
    })
}

/// Bilinear saddle problem `⟨p,u⟩ + ⟨Mv,u⟩ + ⟨q,v⟩` over a product of unit balls.
pub fn saddle_bilinear(nu: usize, nv: usize, seed: u64) -> Result<Problem, ProblemError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m = Matrix::from_fn(nu, nv, |_, _| rng.sample(StandardNormal));
    let p = gaussian(&mut rng, nu) * 0.3;
    let q = gaussian(&mut rng, nv) * 0.3;
    let n = nu + nv;
    Problem::from_file(ProblemFile {
        dim: n,
        x0: vec![0.0; n],
        radius: std::f64::consts::SQRT_2,
        set: SetSpec::BallProduct {
            split: nu,
            u_center: vec![0.0; nu],
            u_radius: 1.0,
            v_center: vec![0.0; nv],
            v_radius: 1.0,
        },
        objective: ObjectiveSpec::SaddleBilinear {
            m: to_rows(&m),
            p: Some(p.as_slice().to_vec()),
            q: Some(q.as_slice().to_vec()),
        },
        xstar: None,
        fstar: None,
        r: None,
        variation: None,
        seed: Some(seed),
    })
}
