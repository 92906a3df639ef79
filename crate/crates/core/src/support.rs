//! Linear maximization over the intersection of an ellipsoid
//! `{x : ‖x‖_{H^{-1}} ≤ 1}` with one or two halfspaces, solved through the
//! dual problem in closed form.
//!
//! Every quantity below depends on `H` only through pairings `⟨u, H v⟩` of the
//! vectors involved, so the public entry points compute those pairings once
//! (one matrix–vector product per vector) and hand them to scalar kernels.
//! The solver and the certificate pass call the kernels directly.

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::linalg::{clamped_sqrt, LinalgError, SymmetricOperator, Vector, RADICAND_CLAMP};

/// Absolute slack used in every sign test against a Slater-type boundary.
pub const SLATER_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SupportError {
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("Slater condition violated: {0}")]
    SlaterViolation(String),
    #[error("constraint normals are linearly dependent")]
    DependentConstraints,
    #[error("internal inconsistency: {0}")]
    Internal(&'static str),
}

/// The halfspace `{x : ⟨normal, x⟩ ≤ offset}`.
#[derive(Debug, Clone, PartialEq)]
pub struct HalfspaceCut {
    pub normal: Vector,
    pub offset: f64,
}

impl HalfspaceCut {
    pub fn new(normal: Vector, offset: f64) -> Self {
        Self { normal, offset }
    }

    /// `⟨0, x⟩ ≤ 0`, which every point satisfies.
    pub fn vacuous(dim: usize) -> Self {
        Self { normal: Vector::zeros(dim), offset: 0.0 }
    }

    pub fn contains(&self, x: &Vector) -> bool {
        self.normal.dot(x) <= self.offset
    }
}

/// Pairings of `(s, a)` under `H` for the one-cut problem.
#[derive(Debug, Clone, Copy)]
pub(crate) struct PairGram {
    pub ss: f64,
    pub sa: f64,
    pub aa: f64,
}

impl PairGram {
    fn scaled(self, factor: f64) -> Self {
        Self { ss: self.ss * factor, sa: self.sa * factor, aa: self.aa * factor }
    }
}

/// Pairings of `(s, a₁, a₂)` under `H` for the two-cut problem.
#[derive(Debug, Clone, Copy)]
pub(crate) struct TripleGram {
    pub ss: f64,
    pub s1: f64,
    pub s2: f64,
    pub a11: f64,
    pub a12: f64,
    pub a22: f64,
}

impl TripleGram {
    pub(crate) fn from_products(
        s: &Vector,
        a1: &Vector,
        a2: &Vector,
        hs: &Vector,
        ha1: &Vector,
        ha2: &Vector,
    ) -> Self {
        Self {
            ss: s.dot(hs),
            s1: a1.dot(hs),
            s2: a2.dot(hs),
            a11: a1.dot(ha1),
            a12: a1.dot(ha2),
            a22: a2.dot(ha2),
        }
    }

    pub(crate) fn scaled(self, f: f64) -> Self {
        Self {
            ss: self.ss * f,
            s1: self.s1 * f,
            s2: self.s2 * f,
            a11: self.a11 * f,
            a12: self.a12 * f,
            a22: self.a22 * f,
        }
    }

    fn first(&self) -> PairGram {
        PairGram { ss: self.ss, sa: self.s1, aa: self.a11 }
    }

    fn second(&self) -> PairGram {
        PairGram { ss: self.ss, sa: self.s2, aa: self.a22 }
    }

    /// Pairings of `(a₂, a₁)`: maximize `⟨a₂, x⟩` under the first cut.
    fn second_under_first(&self) -> PairGram {
        PairGram { ss: self.a22, sa: self.a12, aa: self.a11 }
    }

    /// Pairings of `(a₁, a₂)`: maximize `⟨a₁, x⟩` under the second cut.
    fn first_under_second(&self) -> PairGram {
        PairGram { ss: self.a11, sa: self.a12, aa: self.a22 }
    }

    fn residual_sq(&self, m1: f64, m2: f64) -> f64 {
        self.ss - 2.0 * m1 * self.s1 - 2.0 * m2 * self.s2
            + m1 * m1 * self.a11
            + 2.0 * m1 * m2 * self.a12
            + m2 * m2 * self.a22
    }

    pub(crate) fn objective(&self, m1: f64, m2: f64, b1: f64, b2: f64) -> Result<f64, SupportError> {
        Ok(clamped_sqrt(self.residual_sq(m1, m2))? + m1 * b1 + m2 * b2)
    }
}

pub(crate) fn tau_kernel(g: PairGram, beta: f64) -> Result<f64, SupportError> {
    Ok(tau_and_residual(g, beta)?.0)
}

// Minimizer `τ` together with the attained residual norm `‖s − τa‖*`.
fn tau_and_residual(g: PairGram, beta: f64) -> Result<(f64, f64), SupportError> {
    let a_norm = clamped_sqrt(g.aa)?;
    if beta < -a_norm - SLATER_TOL {
        return Err(SupportError::SlaterViolation(format!(
            "offset {beta:e} below -‖a‖* = {:e}",
            -a_norm
        )));
    }
    let s_norm = clamped_sqrt(g.ss)?;
    if g.ss <= 0.0 || beta >= a_norm {
        // zero objective, or the whole ellipsoid lies inside the halfspace
        return Ok((0.0, s_norm));
    }
    if g.sa <= beta * s_norm + SLATER_TOL {
        return Ok((0.0, s_norm));
    }
    let slack = 1.0 - beta * beta / g.aa;
    if slack <= 0.0 {
        return Err(SupportError::SlaterViolation(
            "halfspace touches the ellipsoid in a single point".into(),
        ));
    }
    let num = g.ss - g.sa * g.sa / g.aa;
    let r = clamped_radicand(num, g.ss)?.sqrt() / slack.sqrt();
    let t = (g.sa - r * beta) / g.aa;
    if t <= 0.0 {
        return Ok((0.0, s_norm));
    }
    Ok((t, r))
}

pub(crate) fn xi_kernel(g: PairGram, beta: f64) -> Result<f64, SupportError> {
    let (t, r) = tau_and_residual(g, beta)?;
    Ok(r + t * beta)
}

// Radicand clamp relative to the magnitude of the terms that produced it.
fn clamped_radicand(value: f64, scale: f64) -> Result<f64, SupportError> {
    if value >= 0.0 {
        Ok(value)
    } else if value >= -RADICAND_CLAMP * scale.abs().max(1.0) {
        Ok(0.0)
    } else {
        Err(SupportError::Linalg(LinalgError::NotPositiveDefinite(value)))
    }
}

/// Two-cut dual multipliers on pairings. Cut `j` is `⟨a_j, x⟩ ≤ b_j`.
pub(crate) fn dual_multipliers_kernel(
    g: TripleGram,
    b1: f64,
    b2: f64,
) -> Result<(f64, f64), SupportError> {
    let tau1 = tau_kernel(g.first(), b1)?;
    let tau2 = tau_kernel(g.second(), b2)?;
    if g.ss <= 0.0 {
        return Ok((0.0, 0.0));
    }
    let xi1 = xi_kernel(g.second_under_first(), b1)?;
    let xi2 = xi_kernel(g.first_under_second(), b2)?;

    // the second cut is implied by the first, or vice versa
    if xi1 <= b2 + SLATER_TOL {
        return Ok((tau1, 0.0));
    }
    if xi2 <= b1 + SLATER_TOL {
        return Ok((0.0, tau2));
    }

    // the one-cut maximizer already satisfies the other cut
    let r1 = clamped_radicand(g.residual_sq(tau1, 0.0), g.ss)?.sqrt();
    if g.s2 - tau1 * g.a12 <= b2 * r1 + SLATER_TOL {
        return Ok((tau1, 0.0));
    }
    let r2 = clamped_radicand(g.residual_sq(0.0, tau2), g.ss)?.sqrt();
    if g.s1 - tau2 * g.a12 <= b1 * r2 + SLATER_TOL {
        return Ok((0.0, tau2));
    }

    // both cuts active
    let det = g.a11 * g.a22 - g.a12 * g.a12;
    if det <= 1e-12 * g.a11 * g.a22 {
        // parallel normals: the optimum has one zero multiplier
        let f1 = g.objective(tau1, 0.0, b1, b2)?;
        let f2 = g.objective(0.0, tau2, b1, b2)?;
        return Ok(if f1 <= f2 { (tau1, 0.0) } else { (0.0, tau2) });
    }
    let inv = |x: f64, y: f64| ((g.a22 * x - g.a12 * y) / det, (g.a11 * y - g.a12 * x) / det);
    let (w1, w2) = inv(g.s1, g.s2);
    let (v1, v2) = inv(b1, b2);
    let bmb = b1 * v1 + b2 * v2;
    if bmb >= 1.0 {
        return Err(SupportError::SlaterViolation(
            "two-cut system has empty interior".into(),
        ));
    }
    let num = g.ss - (g.s1 * w1 + g.s2 * w2);
    let r = (clamped_radicand(num, g.ss)? / (1.0 - bmb)).sqrt();
    let u1 = w1 - r * v1;
    let u2 = w2 - r * v2;
    let floor = -1e-9 * (1.0 + u1.abs().max(u2.abs()));
    if u1 < floor || u2 < floor {
        return Err(SupportError::Internal("two-cut minimizer left the nonnegative quadrant"));
    }
    Ok((u1.max(0.0), u2.max(0.0)))
}

fn pair_gram(h: &SymmetricOperator, s: &Vector, a: &Vector) -> Result<PairGram, SupportError> {
    check_len(h, s)?;
    check_len(h, a)?;
    let hs = h.apply(s);
    let ha = h.apply(a);
    Ok(PairGram { ss: s.dot(&hs), sa: a.dot(&hs), aa: a.dot(&ha) })
}

fn check_len(h: &SymmetricOperator, v: &Vector) -> Result<(), SupportError> {
    if v.len() != h.dim() {
        return Err(LinalgError::DimensionMismatch { expected: h.dim(), got: v.len() }.into());
    }
    Ok(())
}

/// Unconstrained minimizer of `‖s − A u‖*_{H^{-1}} + ⟨u, b⟩` over `u ∈ Rᵐ`,
/// where `A` has the given columns. Returns `(u, r)` with `r = ‖s − A u‖*`.
///
/// Requires linearly independent columns and `⟨b, (AᵀHA)^{-1} b⟩ < 1`.
pub fn minimizer_u(
    h: &SymmetricOperator,
    s: &Vector,
    columns: &[Vector],
    b: &[f64],
) -> Result<(DVector<f64>, f64), SupportError> {
    let m = columns.len();
    if b.len() != m {
        return Err(LinalgError::DimensionMismatch { expected: m, got: b.len() }.into());
    }
    check_len(h, s)?;
    for c in columns {
        check_len(h, c)?;
    }
    let hs = h.apply(s);
    let ha: Vec<Vector> = columns.iter().map(|c| h.apply(c)).collect();
    let gram = DMatrix::from_fn(m, m, |i, j| columns[i].dot(&ha[j]));
    let gram = 0.5 * (&gram + gram.transpose());
    let chol = gram.cholesky().ok_or(SupportError::DependentConstraints)?;
    let t = DVector::from_fn(m, |i, _| columns[i].dot(&hs));
    let bv = DVector::from_column_slice(b);
    let w = chol.solve(&t);
    let v = chol.solve(&bv);
    let bmb = bv.dot(&v);
    if bmb >= 1.0 {
        return Err(SupportError::SlaterViolation(format!(
            "⟨b, (AᵀHA)^(-1) b⟩ = {bmb} ≥ 1"
        )));
    }
    let ss = s.dot(&hs);
    let num = clamped_radicand(ss - t.dot(&w), ss)?;
    let r = (num / (1.0 - bmb)).sqrt();
    Ok((w - v * r, r))
}

/// Minimizer over `τ ≥ 0` of `‖s − τ a‖*_{H^{-1}} + τ β`.
pub fn tau(h: &SymmetricOperator, s: &Vector, cut: &HalfspaceCut) -> Result<f64, SupportError> {
    tau_kernel(pair_gram(h, s, &cut.normal)?, cut.offset)
}

/// `max { ⟨s, x⟩ : ‖x‖_{H^{-1}} ≤ 1, ⟨a, x⟩ ≤ β }`, evaluated as the dual
/// objective at [`tau`].
pub fn support_value_xi(
    h: &SymmetricOperator,
    s: &Vector,
    cut: &HalfspaceCut,
) -> Result<f64, SupportError> {
    xi_kernel(pair_gram(h, s, &cut.normal)?, cut.offset)
}

/// Same as [`support_value_xi`] for the operator `scale · H`, without forming it.
pub(crate) fn support_value_xi_scaled(
    h: &SymmetricOperator,
    scale: f64,
    s: &Vector,
    cut: &HalfspaceCut,
) -> Result<f64, SupportError> {
    xi_kernel(pair_gram(h, s, &cut.normal)?.scaled(scale), cut.offset)
}

/// Nonnegative minimizer of
/// `‖s − μ₁a₁ − μ₂a₂‖*_{H^{-1}} + μ₁b₁ + μ₂b₂`, the Lagrange multipliers of
/// `max { ⟨s, x⟩ : ‖x‖_{H^{-1}} ≤ 1, ⟨a₁, x⟩ ≤ b₁, ⟨a₂, x⟩ ≤ b₂ }`.
pub fn dual_multipliers(
    h: &SymmetricOperator,
    s: &Vector,
    cut1: &HalfspaceCut,
    cut2: &HalfspaceCut,
) -> Result<(f64, f64), SupportError> {
    check_len(h, s)?;
    check_len(h, &cut1.normal)?;
    check_len(h, &cut2.normal)?;
    let g = TripleGram::from_products(
        s,
        &cut1.normal,
        &cut2.normal,
        &h.apply(s),
        &h.apply(&cut1.normal),
        &h.apply(&cut2.normal),
    );
    dual_multipliers_kernel(g, cut1.offset, cut2.offset)
}

/// Objective of the two-cut dual problem at `(μ₁, μ₂)`.
pub fn dual_objective(
    h: &SymmetricOperator,
    s: &Vector,
    cut1: &HalfspaceCut,
    cut2: &HalfspaceCut,
    mu: (f64, f64),
) -> Result<f64, SupportError> {
    let r = s - &cut1.normal * mu.0 - &cut2.normal * mu.1;
    Ok(clamped_sqrt(h.quadratic_form(&r))? + mu.0 * cut1.offset + mu.1 * cut2.offset)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{dual_norm, Matrix};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn v(xs: &[f64]) -> Vector {
        Vector::from_column_slice(xs)
    }

    fn random_spd(rng: &mut ChaCha8Rng, n: usize) -> SymmetricOperator {
        let a = Matrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
        SymmetricOperator::from_matrix(&a * a.transpose() + Matrix::identity(n, n) * 0.3).unwrap()
    }

    fn random_vec(rng: &mut ChaCha8Rng, n: usize) -> Vector {
        Vector::from_fn(n, |_, _| rng.gen_range(-1.0..1.0))
    }

    #[test]
    fn minimizer_residual_free() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let h = random_spd(&mut rng, 4);
        let cols = vec![random_vec(&mut rng, 4), random_vec(&mut rng, 4)];
        let w = [0.7, -1.3];
        let s = &cols[0] * w[0] + &cols[1] * w[1];
        let (u, r) = minimizer_u(&h, &s, &cols, &[0.1, -0.05]).unwrap();
        assert!(r.abs() < 1e-7, "r = {r}");
        assert!((u[0] - w[0]).abs() < 1e-7 && (u[1] - w[1]).abs() < 1e-7);
    }

    #[test]
    fn minimizer_scalar_example() {
        let h = SymmetricOperator::identity(2);
        let (u, r) = minimizer_u(&h, &v(&[2.0, 1.0]), &[v(&[1.0, 0.0])], &[0.0]).unwrap();
        assert!((u[0] - 2.0).abs() < 1e-15);
        assert!((r - 1.0).abs() < 1e-15);
        let residual = dual_norm(&h, &(v(&[2.0, 1.0]) - v(&[1.0, 0.0]) * u[0])).unwrap();
        assert!((residual - 1.0).abs() < 1e-15);
    }

    #[test]
    fn minimizer_rejects_bad_inputs() {
        let h = SymmetricOperator::identity(3);
        let a = v(&[1.0, 0.0, 0.0]);
        let err = minimizer_u(&h, &v(&[1.0, 1.0, 0.0]), &[a.clone(), a.clone() * 2.0], &[0.0, 0.0]);
        assert_eq!(err.unwrap_err(), SupportError::DependentConstraints);
        let err = minimizer_u(&h, &v(&[1.0, 1.0, 0.0]), &[a], &[1.0]);
        assert!(matches!(err.unwrap_err(), SupportError::SlaterViolation(_)));
    }

    #[test]
    fn minimizer_beats_random_perturbations() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let h = random_spd(&mut rng, 4);
        let cols = vec![random_vec(&mut rng, 4), random_vec(&mut rng, 4)];
        let s = random_vec(&mut rng, 4);
        let b = [0.1, -0.2];
        let (u, _) = minimizer_u(&h, &s, &cols, &b).unwrap();
        let obj = |u0: f64, u1: f64| {
            let r = &s - &cols[0] * u0 - &cols[1] * u1;
            dual_norm(&h, &r).unwrap() + u0 * b[0] + u1 * b[1]
        };
        let best = obj(u[0], u[1]);
        for _ in 0..100_000 {
            let scale = 10f64.powf(rng.gen_range(-6.0..0.0));
            let d0 = rng.gen_range(-1.0..1.0) * scale;
            let d1 = rng.gen_range(-1.0..1.0) * scale;
            assert!(obj(u[0] + d0, u[1] + d1) >= best - 1e-12);
        }
    }

    #[test]
    fn minimizer_first_order_condition() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let n = rng.gen_range(2..5);
            let h = random_spd(&mut rng, n);
            let m = rng.gen_range(1..3);
            let cols: Vec<Vector> = (0..m).map(|_| random_vec(&mut rng, n)).collect();
            let s = random_vec(&mut rng, n);
            // b from a strictly feasible point keeps ⟨b, M⁻¹ b⟩ < 1
            let ha: Vec<Vector> = cols.iter().map(|c| h.apply(c)).collect();
            let gram = DMatrix::from_fn(m, m, |i, j| cols[i].dot(&ha[j]));
            let raw: Vec<f64> = (0..m).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let q = DVector::from_column_slice(&raw);
            let val = q.dot(&gram.clone().cholesky().unwrap().solve(&q));
            let b: Vec<f64> = raw.iter().map(|x| x * 0.8 / val.sqrt()).collect();
            let (u, r) = minimizer_u(&h, &s, &cols, &b).unwrap();
            let mut res = s.clone();
            for (c, ui) in cols.iter().zip(u.iter()) {
                res -= c * *ui;
            }
            if r < 1e-6 * dual_norm(&h, &s).unwrap() {
                continue;
            }
            let hres = h.apply(&res);
            for (c, bi) in cols.iter().zip(&b) {
                assert!((c.dot(&hres) / r - bi).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn tau_examples() {
        let h = SymmetricOperator::identity(2);
        // first branch: ⟨a, Hs⟩ ≤ β ‖s‖
        let cut = HalfspaceCut::new(v(&[0.0, 1.0]), 0.5);
        assert_eq!(tau(&h, &v(&[1.0, 0.0]), &cut).unwrap(), 0.0);
        // s = 0
        let cut = HalfspaceCut::new(v(&[0.3, -1.0]), -0.2);
        assert_eq!(tau(&h, &Vector::zeros(2), &cut).unwrap(), 0.0);
        // Slater violation
        let cut = HalfspaceCut::new(v(&[1.0, 0.0]), -1.5);
        assert!(matches!(tau(&h, &v(&[1.0, 0.0]), &cut), Err(SupportError::SlaterViolation(_))));
    }

    #[test]
    fn tau_matches_scan() {
        let h = SymmetricOperator::identity(2);
        let s = v(&[1.0, 0.0]);
        let cut = HalfspaceCut::new(v(&[1.0, 0.0]), 0.0);
        let t = tau(&h, &s, &cut).unwrap();
        // 1-D scan over [0, 10] at step 1e-6
        let obj = |t: f64| dual_norm(&h, &(&s - &cut.normal * t)).unwrap() + t * cut.offset;
        let mut best = (f64::INFINITY, 0.0);
        for i in 0..=10_000_000 {
            let ti = i as f64 * 1e-6;
            let f = obj(ti);
            if f < best.0 {
                best = (f, ti);
            }
        }
        assert!((t - 1.0).abs() < 1e-12);
        assert!((obj(t) - best.0).abs() < 1e-9);
        assert!((best.1 - 1.0).abs() < 1e-5);
    }

    #[test]
    fn xi_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let h = random_spd(&mut rng, 3);
        let s = random_vec(&mut rng, 3);
        let val = support_value_xi(&h, &s, &HalfspaceCut::vacuous(3)).unwrap();
        assert!((val - dual_norm(&h, &s).unwrap()).abs() < 1e-14);
        let cut = HalfspaceCut::new(random_vec(&mut rng, 3), 0.1);
        assert_eq!(support_value_xi(&h, &Vector::zeros(3), &cut).unwrap(), 0.0);
    }

    #[test]
    fn joint_rescaling_of_cut() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..200 {
            let n = rng.gen_range(1..5);
            let h = random_spd(&mut rng, n);
            let s = random_vec(&mut rng, n);
            let a = random_vec(&mut rng, n);
            let beta = rng.gen_range(-0.5..0.5) * dual_norm(&h, &a).unwrap();
            let k: f64 = rng.gen_range(0.1..10.0);
            let c1 = HalfspaceCut::new(a.clone(), beta);
            let c2 = HalfspaceCut::new(a * k, beta * k);
            // the multiplied normal τ·a and the support value are unchanged
            let t1 = tau(&h, &s, &c1).unwrap();
            let t2 = tau(&h, &s, &c2).unwrap();
            assert!((t1 - t2 * k).abs() <= 1e-7 * (1.0 + t1));
            let x1 = support_value_xi(&h, &s, &c1).unwrap();
            let x2 = support_value_xi(&h, &s, &c2).unwrap();
            assert!((x1 - x2).abs() <= 1e-7 * (1.0 + x1.abs()));
        }
    }

    #[test]
    fn dual_multipliers_inactive_cuts() {
        let h = SymmetricOperator::identity(2);
        let s = v(&[1.0, 0.5]);
        let c1 = HalfspaceCut::new(v(&[1.0, 0.0]), 2.0);
        let c2 = HalfspaceCut::new(v(&[0.0, 1.0]), 3.0);
        assert_eq!(dual_multipliers(&h, &s, &c1, &c2).unwrap(), (0.0, 0.0));
    }

    #[test]
    fn dual_multipliers_single_active() {
        let h = SymmetricOperator::identity(2);
        let s = v(&[1.0, 0.0]);
        let c1 = HalfspaceCut::new(v(&[1.0, 0.0]), 0.0);
        let c2 = HalfspaceCut::new(v(&[0.0, 1.0]), 10.0);
        let mu = dual_multipliers(&h, &s, &c1, &c2).unwrap();
        assert_eq!(mu, (tau(&h, &s, &c1).unwrap(), 0.0));
    }

    #[test]
    fn dual_multipliers_both_active() {
        let h = SymmetricOperator::identity(2);
        let s = v(&[1.0, 1.0]);
        let c1 = HalfspaceCut::new(v(&[1.0, 0.0]), 0.0);
        let c2 = HalfspaceCut::new(v(&[0.0, 1.0]), 0.0);
        let mu = dual_multipliers(&h, &s, &c1, &c2).unwrap();
        assert!((mu.0 - 1.0).abs() < 1e-12 && (mu.1 - 1.0).abs() < 1e-12);
        assert!(dual_objective(&h, &s, &c1, &c2, mu).unwrap().abs() < 1e-12);
    }

    #[test]
    fn dual_multipliers_parallel_normals() {
        let h = SymmetricOperator::identity(2);
        let s = v(&[1.0, 0.3]);
        // slab -0.2 ≤ x₁ ≤ 0.1
        let c1 = HalfspaceCut::new(v(&[1.0, 0.0]), 0.1);
        let c2 = HalfspaceCut::new(v(&[-2.0, 0.0]), 0.4);
        let mu = dual_multipliers(&h, &s, &c1, &c2).unwrap();
        let best = dual_objective(&h, &s, &c1, &c2, mu).unwrap();
        // primal optimum: x₁ = 0.1, x₂ = √(1 − 0.01)
        let primal = 0.1 + 0.3 * (1.0f64 - 0.01).sqrt();
        assert!((best - primal).abs() < 1e-12, "{best} vs {primal}");
        // identical cuts
        let mu = dual_multipliers(&h, &s, &c1, &c1).unwrap();
        assert!((dual_objective(&h, &s, &c1, &c1, mu).unwrap() - primal).abs() < 1e-12);
    }

    #[test]
    fn dual_multipliers_beat_candidates() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..200 {
            let n = rng.gen_range(2..5);
            let h = random_spd(&mut rng, n);
            let s = random_vec(&mut rng, n);
            // strictly feasible point at half the radius
            let dir = random_vec(&mut rng, n);
            let x = &dir * (0.5 / crate::linalg::primal_norm(&h, &dir).unwrap());
            let a1 = random_vec(&mut rng, n);
            let a2 = random_vec(&mut rng, n);
            let c1 = HalfspaceCut::new(a1.clone(), a1.dot(&x) + rng.gen_range(0.0..0.3));
            let c2 = HalfspaceCut::new(a2.clone(), a2.dot(&x) + rng.gen_range(0.0..0.3));
            let mu = dual_multipliers(&h, &s, &c1, &c2).unwrap();
            assert!(mu.0 >= 0.0 && mu.1 >= 0.0);
            let f = dual_objective(&h, &s, &c1, &c2, mu).unwrap();
            let t1 = tau(&h, &s, &c1).unwrap();
            let t2 = tau(&h, &s, &c2).unwrap();
            for cand in [(t1, 0.0), (0.0, t2), (0.0, 0.0)] {
                assert!(f <= dual_objective(&h, &s, &c1, &c2, cand).unwrap() + 1e-10);
            }
            for _ in 0..1000 {
                let cand = (rng.gen_range(0.0..3.0), rng.gen_range(0.0..3.0));
                assert!(f <= dual_objective(&h, &s, &c1, &c2, cand).unwrap() + 1e-10);
            }
        }
    }
}
