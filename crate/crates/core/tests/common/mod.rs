#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use subell::certificates::{augment, localizer_support};
use subell::generate;
use subell::linalg::{Matrix, SymmetricOperator, Vector};
use subell::oracles::Problem;
use subell::solver::{run_with, AlphaSchedule, HistoryRecord, Solver, StorageMode, StrategyConfig, Variant};

pub fn problem(n: usize, seed: u64) -> Problem {
    generate::max_affine(n, 2 * n + 1, seed).unwrap()
}

pub fn gaussian(rng: &mut ChaCha8Rng, n: usize) -> Vector {
    Vector::from_fn(n, |_, _| rng.sample(StandardNormal))
}

pub fn random_spd(rng: &mut ChaCha8Rng, n: usize) -> SymmetricOperator {
    let a = Matrix::from_fn(n, n, |_, _| rng.sample::<f64, _>(StandardNormal));
    SymmetricOperator::from_matrix(&a * a.transpose() / n as f64 + Matrix::identity(n, n) * 0.3).unwrap()
}

fn rel_slack(scale: f64) -> f64 {
    1e-9 * (1.0 + scale.abs())
}

/// Run `steps` iterations and call `check` after every one.
pub fn each_step<F>(problem: &Problem, variant: Variant, steps: usize, mut check: F) -> Result<(), String>
where
    F: FnMut(&Solver) -> Result<(), String>,
{
    let cfg = StrategyConfig::new(variant, problem.dim, AlphaSchedule::TimeVarying).map_err(|e| e.to_string())?;
    let mut failure = None;
    let out = run_with(problem, cfg, steps, StorageMode::Full, |s, _| {
        if failure.is_none() {
            if let Err(e) = check(s) {
                failure = Some(format!("k = {}: {e}", s.state().k));
            }
        }
        Ok(())
    });
    out.map_err(|e| e.to_string())?;
    failure.map_or(Ok(()), Err)
}

/// `−ℓ_k(x) + ½‖x − x_k‖²_{G_k} − ½R_k²`.
pub fn representation_value(s: &Solver, x: &Vector) -> f64 {
    let st = s.state();
    let d = x - &st.x;
    let gd = st.h.solve(&d).unwrap();
    -(st.c.dot(x) - st.sigma) + 0.5 * d.dot(&gd) - 0.5 * st.rsq
}

/// `ω_k(x) − ½R²` rebuilt from the step records.
pub fn omega_value(records: &[HistoryRecord], x0: &Vector, r0: f64, x: &Vector) -> f64 {
    let mut w = 0.5 * (x - x0).norm_squared();
    for rec in records {
        let t = rec.g.dot(&(x - &rec.x));
        w += 0.5 * rec.b * (rec.u + t) * t;
    }
    w - 0.5 * r0 * r0
}

/// The known minimizer stays in `Ω_k ∩ L_k⁻`.
pub fn check_containment(problem: &Problem, variant: Variant, steps: usize) -> Result<(), String> {
    let xs = problem.known_xstar.clone().ok_or("no known solution")?;
    each_step(problem, variant, steps, |s| {
        let st = s.state();
        let v = representation_value(s, &xs);
        if v > rel_slack(st.rsq) {
            return Err(format!("x* outside Ω_k: excess {v:e}"));
        }
        if !st.in_halfspace(&xs, rel_slack(st.sigma)) {
            return Err(format!("x* outside L_k⁻: ⟨c,x*⟩ − σ = {:e}", st.c.dot(&xs) - st.sigma));
        }
        Ok(())
    })
}

/// `ω_k(x) ≤ ½R²` agrees with the closed-form ellipsoid on sampled points.
pub fn check_representation(problem: &Problem, variant: Variant, steps: usize, samples: usize, seed: u64) -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = problem.dim;
    each_step(problem, variant, steps, |s| {
        let st = s.state();
        let records = &s.history().records;
        let (z, d) = st.localizer().map_err(|e| e.to_string())?;
        let l = st.h.matrix().clone().cholesky().ok_or("H_k is not positive definite")?.unpack();
        let mut inside = 0;
        for i in 0..samples {
            let x = if i % 2 == 0 {
                let u = gaussian(&mut rng, n).normalize() * rng.gen_range(0.0..1.3);
                &z + &l * u * d.sqrt()
            } else {
                &problem.x0 + gaussian(&mut rng, n).normalize() * rng.gen_range(0.0..1.5 * problem.radius)
            };
            let w = omega_value(records, &problem.x0, problem.radius, &x);
            let r = representation_value(s, &x);
            let scale = 1.0 + w.abs().max(r.abs()) + st.rsq;
            if (w - r).abs() > 1e-9 * scale {
                return Err(format!("ω_k − ½R² = {w:e} but closed form gives {r:e}"));
            }
            if w.abs() > 1e-9 * scale && (w <= 0.0) != (r <= 0.0) {
                return Err("membership differs".into());
            }
            inside += usize::from(w <= 0.0);
        }
        if inside == 0 {
            return Err("no sample fell inside Ω_k".into());
        }
        Ok(())
    })
}

/// `det G_k = (1 + γ)^k`, measured from `H_k` directly.
pub fn check_det(problem: &Problem, variant: Variant, steps: usize) -> Result<(), String> {
    let cfg = StrategyConfig::new(variant, problem.dim, AlphaSchedule::TimeVarying).map_err(|e| e.to_string())?;
    let gamma = cfg.gamma;
    each_step(problem, variant, steps, |s| {
        let st = s.state();
        let want = st.k as f64 * (1.0 + gamma).ln();
        let got = -st.h.log_determinant().map_err(|e| e.to_string())?;
        let rel = ((got - want).exp() - 1.0).abs();
        if rel > 1e-8 {
            return Err(format!("det G_k off by relative {rel:e}"));
        }
        Ok(())
    })
}

/// Augmentation inequality for `s_k = −c_k` and a random direction.
pub fn check_augmentation(problem: &Problem, variant: Variant, steps: usize, seed: u64) -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    each_step(problem, variant, steps, |s| {
        let st = s.state();
        let records = &s.history().records;
        for s_k in [-&st.c, gaussian(&mut rng, problem.dim)] {
            if s_k.norm() == 0.0 {
                continue;
            }
            let (mu, _) = augment(records, &st.h, &s_k).map_err(|e| e.to_string())?;
            if let Some(m) = mu.iter().find(|m| !(**m >= 0.0)) {
                return Err(format!("negative multiplier {m}"));
            }
            let mut s0 = s_k.clone();
            let mut acc = 0.0;
            for (m, rec) in mu.iter().zip(records) {
                s0 -= &rec.g * *m;
                acc += m * rec.g.dot(&rec.x);
            }
            let lhs = s0.dot(&problem.x0) + problem.radius * s0.norm() + acc;
            let rhs = localizer_support(st, &s_k).map_err(|e| e.to_string())?;
            let scale = s_k.norm() * (problem.radius + problem.x0.norm()) + acc.abs();
            if lhs > rhs + 1e-9 * (1.0 + scale) {
                return Err(format!("lhs {lhs} exceeds rhs {rhs}"));
            }
        }
        Ok(())
    })
}
