//! Accuracy semicertificates for runs of the solver.
//!
//! A semicertificate is a vector of nonnegative weights over the oracle
//! answers of a run. Its gap over the initial ball bounds the inaccuracy of
//! the weighted average of productive test points; when some productive step
//! carries positive weight it is a certificate and its residual bounds the
//! problem-specific error directly.

use thiserror::Error;

use crate::linalg::{top_eigenpair, LinalgError, SymmetricOperator, Vector};
use crate::solver::{avg_radius, HistoryRecord, SolverError, SolverState, TerminalRecord};
use crate::support::{dual_multipliers_kernel, support_value_xi_scaled, HalfspaceCut, SupportError, TripleGram};

const EIGEN_TOL: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum CertificateError {
    #[error("dual multiplier at step {step}: {source}")]
    Multiplier { step: usize, source: SupportError },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error("Γ(λ) = 0: the gap is undefined")]
    ZeroGamma,
    #[error("S(λ) = 0: no productive step carries weight")]
    NotCertificate,
    #[error("gap {delta} is not below r = {r}; the residual bound is vacuous")]
    Vacuous { delta: f64, r: f64 },
    #[error("history has {records} records but the state is at iteration {k}")]
    Mismatch { records: usize, k: usize },
}

/// Weights over the steps of a run, optionally followed by a terminal step.
#[derive(Debug, Clone, PartialEq)]
pub struct Semicertificate {
    pub weights: Vec<f64>,
    /// The step that triggered termination; its weight is the last entry.
    pub terminal: Option<TerminalRecord>,
    /// `Γ(λ) = Σ λ_i ‖g_i‖*`.
    pub gamma: f64,
    /// `S(λ) = Σ_{productive i} λ_i`.
    pub s_lambda: f64,
}

impl Semicertificate {
    fn new(weights: Vec<f64>, terminal: Option<TerminalRecord>, records: &[HistoryRecord]) -> Self {
        let mut cert = Self { weights, terminal, gamma: 0.0, s_lambda: 0.0 };
        let (mut gamma, mut s_lambda) = (0.0, 0.0);
        for (lam, (_, g, productive)) in cert.weights.iter().zip(cert.steps(records)) {
            gamma += lam * g.norm();
            if productive {
                s_lambda += lam;
            }
        }
        cert.gamma = gamma;
        cert.s_lambda = s_lambda;
        cert
    }

    pub fn is_certificate(&self) -> bool {
        self.s_lambda > 0.0
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            weights: self.weights.iter().map(|w| w * factor).collect(),
            terminal: self.terminal.clone(),
            gamma: self.gamma * factor,
            s_lambda: self.s_lambda * factor,
        }
    }

    /// `(x_i, g_i, productive_i)` in weight order.
    pub fn steps<'a>(&'a self, records: &'a [HistoryRecord]) -> impl Iterator<Item = (&'a Vector, &'a Vector, bool)> {
        let n = self.weights.len() - usize::from(self.terminal.is_some());
        records[..n]
            .iter()
            .map(|r| (&r.x, &r.g, r.productive))
            .chain(self.terminal.iter().map(|t| (&t.x, &t.g, t.productive)))
    }

    // Σ λ_i ⟨g_i, x_i⟩ − ⟨w, x0⟩ + R‖w‖ with w = Σ λ_i g_i.
    fn unnormalized_gap(&self, records: &[HistoryRecord], x0: &Vector, radius: f64) -> f64 {
        let mut w = Vector::zeros(x0.len());
        let mut acc = 0.0;
        for (lam, (x, g, _)) in self.weights.iter().zip(self.steps(records)) {
            acc += lam * g.dot(x);
            w.axpy(*lam, g, 1.0);
        }
        acc - w.dot(x0) + radius * w.norm()
    }

    /// `δ(λ) = max_{x ∈ B(x0,R)} Σ λ_i ⟨g_i, x_i − x⟩ / Γ(λ)`.
    pub fn gap(&self, records: &[HistoryRecord], x0: &Vector, radius: f64) -> Result<f64, CertificateError> {
        if !(self.gamma > 0.0) {
            return Err(CertificateError::ZeroGamma);
        }
        Ok(self.unnormalized_gap(records, x0, radius) / self.gamma)
    }

    /// `ε(λ) = max_{x ∈ B(x0,R)} Σ λ_i ⟨g_i, x_i − x⟩ / S(λ)`.
    pub fn residual(&self, records: &[HistoryRecord], x0: &Vector, radius: f64) -> Result<f64, CertificateError> {
        if !self.is_certificate() {
            return Err(CertificateError::NotCertificate);
        }
        Ok(self.unnormalized_gap(records, x0, radius) / self.s_lambda)
    }

    /// `x̂ = Σ_{productive i} λ_i x_i / S(λ)`.
    pub fn average_point(&self, records: &[HistoryRecord]) -> Result<Vector, CertificateError> {
        if !self.is_certificate() {
            return Err(CertificateError::NotCertificate);
        }
        let mut acc: Option<Vector> = None;
        for (lam, (x, _, productive)) in self.weights.iter().zip(self.steps(records)) {
            if productive {
                match &mut acc {
                    Some(a) => a.axpy(*lam, x, 1.0),
                    None => acc = Some(x * *lam),
                }
            }
        }
        Ok(acc.expect("a certificate has a productive step") / self.s_lambda)
    }
}

/// `ε ≤ δV/(r − δ)`, valid for any semicertificate with gap `δ < r`.
pub fn residual_bound_from_gap(delta: f64, r: f64, variation: f64) -> Result<f64, CertificateError> {
    if !(delta < r) {
        return Err(CertificateError::Vacuous { delta, r });
    }
    Ok(delta * variation / (r - delta))
}

/// Generate certificates at `k = 1, 2, 4, 8, …`.
pub fn is_pow2_checkpoint(k: usize) -> bool {
    k.is_power_of_two()
}

/// Backward pass producing multipliers `μ_0, …, μ_{k−1}` for `s_k`, and `s_0`.
///
/// `h_final` is `H_k`; it is only used when the records do not carry their
/// own operators.
pub fn augment(
    records: &[HistoryRecord],
    h_final: &SymmetricOperator,
    s_k: &Vector,
) -> Result<(Vec<f64>, Vector), CertificateError> {
    let mut mu = vec![0.0; records.len()];
    let mut s = s_k.clone();
    let mut rebuilt = if records.iter().any(|r| r.h.is_none()) { Some(h_final.clone()) } else { None };
    for (i, rec) in records.iter().enumerate().rev() {
        if let Some(h) = rebuilt.as_mut() {
            // H_i = H_{i+1} + b (H_i g)(H_i g)ᵀ / (1 + b ⟨g, H_i g⟩)
            if rec.b != 0.0 {
                h.subtract_outer(&rec.hg, -rec.b / (1.0 + rec.b * rec.ghg));
            }
        }
        let h = rec.h.as_ref().or(rebuilt.as_ref()).expect("an operator is available");
        let gram = TripleGram::from_products(&s, &rec.c, &rec.g, &h.apply(&s), &h.apply(&rec.c), &rec.hg)
            .scaled(rec.d);
        let b1 = rec.sigma - rec.c.dot(&rec.z);
        let b2 = rec.g.dot(&(&rec.x - &rec.z));
        let (_, m2) = dual_multipliers_kernel(gram, b1, b2)
            .map_err(|source| CertificateError::Multiplier { step: i, source })?;
        mu[i] = m2;
        s.axpy(-m2, &rec.g, 1.0);
    }
    Ok((mu, s))
}

/// `max { ⟨s, x⟩ : x ∈ Ω_k ∩ L_k⁻ }`.
pub fn localizer_support(state: &SolverState, s: &Vector) -> Result<f64, CertificateError> {
    let (z, d) = state.localizer()?;
    let cut = HalfspaceCut::new(state.c.clone(), state.sigma - state.c.dot(&z));
    let xi = support_value_xi_scaled(&state.h, d, s, &cut).map_err(|source| CertificateError::Multiplier {
        step: state.k,
        source,
    })?;
    Ok(s.dot(&z) + xi)
}

/// `max_{x ∈ B(x0,R)} [⟨s_k, x⟩ + Σ μ_i ⟨g_i, x_i − x⟩]`, the left side of the
/// augmentation inequality.
pub fn augmented_ball_support(records: &[HistoryRecord], mu: &[f64], s_k: &Vector, x0: &Vector, radius: f64) -> f64 {
    let mut s0 = s_k.clone();
    let mut acc = 0.0;
    for (m, rec) in mu.iter().zip(records) {
        s0.axpy(-m, &rec.g, 1.0);
        acc += m * rec.g.dot(&rec.x);
    }
    s0.dot(x0) + radius * s0.norm() + acc
}

fn check_prefix(records: &[HistoryRecord], state: &SolverState) -> Result<(), CertificateError> {
    if records.len() != state.k {
        return Err(CertificateError::Mismatch { records: records.len(), k: state.k });
    }
    Ok(())
}

/// Turn the step sizes `a` of a nonterminal run into `λ = a + μ` with
/// `δ(λ) ≤ Δ_k`.
pub fn certify_from_preliminary(records: &[HistoryRecord], state: &SolverState) -> Result<Semicertificate, CertificateError> {
    check_prefix(records, state)?;
    if !(state.gamma_sum > 0.0) {
        return Err(CertificateError::ZeroGamma);
    }
    let (mu, _) = augment(records, &state.h, &(-&state.c))?;
    let weights = records.iter().zip(&mu).map(|(r, m)| r.a + m).collect();
    Ok(Semicertificate::new(weights, None, records))
}

/// Certificate `λ = (μ_0, …, μ_{k−1}, 1)` for a run stopped by `U_k ≤ δ‖g_k‖*`;
/// its gap is at most `δ`.
pub fn certify_terminal(
    records: &[HistoryRecord],
    state: &SolverState,
    terminal: &TerminalRecord,
) -> Result<Semicertificate, CertificateError> {
    check_prefix(records, state)?;
    let (mut weights, _) = augment(records, &state.h, &(-&terminal.g))?;
    weights.push(1.0);
    Ok(Semicertificate::new(weights, Some(terminal.clone()), records))
}

#[derive(Debug, Clone, PartialEq)]
pub struct EllipsoidCertificate {
    pub certificate: Semicertificate,
    /// Unit direction of minimal width of `Ω_k`.
    pub direction: Vector,
    /// `ρ_k = 2 avrad Ω_k`.
    pub rho: f64,
    /// `2ρ_k D / (r − ρ_k)` when `ρ_k < r`.
    pub gap_bound: Option<f64>,
}

/// Certificate for the standard ellipsoid method from two backward passes
/// along the direction of minimal width.
pub fn certify_standard_ellipsoid(
    records: &[HistoryRecord],
    state: &SolverState,
    inner_radius: f64,
    diameter: f64,
) -> Result<EllipsoidCertificate, CertificateError> {
    check_prefix(records, state)?;
    let g = state.h.inverse()?;
    let (_, s) = top_eigenpair(&g, EIGEN_TOL)?;
    let (mu, _) = augment(records, &state.h, &s)?;
    let (mu_neg, _) = augment(records, &state.h, &(-&s))?;
    let weights = mu.iter().zip(&mu_neg).map(|(a, b)| a + b).collect();
    let rho = 2.0 * avg_radius(state);
    let gap_bound = (rho < inner_radius).then(|| 2.0 * rho * diameter / (inner_radius - rho));
    Ok(EllipsoidCertificate { certificate: Semicertificate::new(weights, None, records), direction: s, rho, gap_bound })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracles::Problem;
    use crate::solver::{run, sliding_gap, AlphaSchedule, StorageMode, StrategyConfig, Variant};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn v(xs: &[f64]) -> Vector {
        Vector::from_column_slice(xs)
    }

    fn random_problem(rng: &mut ChaCha8Rng, n: usize) -> Problem {
        let rows: Vec<String> = (0..2 * n + 1)
            .map(|_| {
                let a: Vec<String> = (0..n).map(|_| format!("{}", rng.gen_range(-1.0..1.0))).collect();
                format!(r#"{{"a":[{}],"b":{}}}"#, a.join(","), rng.gen_range(-0.3..0.3))
            })
            .collect();
        let zeros = vec!["0"; n].join(",");
        Problem::from_json(&format!(
            r#"{{"kind":"max_affine","dim":{n},"x0":[{zeros}],"R":1.0,
                "set":{{"type":"ball","center":[{zeros}],"radius":1.0}},"rows":[{}]}}"#,
            rows.join(",")
        ))
        .unwrap()
    }

    fn record(x: Vector, g: Vector) -> HistoryRecord {
        let n = x.len();
        HistoryRecord {
            hg: g.clone(),
            ghg: g.dot(&g),
            z: x.clone(),
            x,
            g,
            a: 1.0,
            b: 0.0,
            u: 1.0,
            d: 1.0,
            c: Vector::zeros(n),
            sigma: 0.0,
            rsq: 1.0,
            productive: true,
            h: None,
        }
    }

    #[test]
    fn gap_of_single_step_is_radius() {
        let recs = vec![record(v(&[0.2, 0.1]), v(&[3.0, -1.0]))];
        let cert = Semicertificate::new(vec![1.0], None, &recs);
        let gap = cert.gap(&recs, &v(&[0.2, 0.1]), 0.7).unwrap();
        assert!((gap - 0.7).abs() < 1e-15);
    }

    #[test]
    fn gap_and_residual_are_scale_invariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let recs: Vec<HistoryRecord> = (0..6)
            .map(|_| {
                let mut r = record(
                    Vector::from_fn(3, |_, _| rng.gen_range(-1.0..1.0)),
                    Vector::from_fn(3, |_, _| rng.gen_range(-1.0..1.0)),
                );
                r.productive = rng.gen_bool(0.5);
                r
            })
            .collect();
        let mut weights: Vec<f64> = (0..6).map(|_| rng.gen_range(0.0..2.0)).collect();
        weights[0] = 1.0;
        let mut recs = recs;
        recs[0].productive = true;
        let cert = Semicertificate::new(weights, None, &recs);
        let x0 = Vector::zeros(3);
        let (g1, r1) = (cert.gap(&recs, &x0, 1.0).unwrap(), cert.residual(&recs, &x0, 1.0).unwrap());
        let scaled = cert.scaled(3.7);
        let (g2, r2) = (scaled.gap(&recs, &x0, 1.0).unwrap(), scaled.residual(&recs, &x0, 1.0).unwrap());
        assert!((g1 - g2).abs() < 1e-12 && (r1 - r2).abs() < 1e-12);
        assert!((r1 - g1 * cert.gamma / cert.s_lambda).abs() < 1e-12);
    }

    #[test]
    fn gap_matches_sampling() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let n = 2;
        let recs: Vec<HistoryRecord> = (0..5)
            .map(|_| {
                record(
                    Vector::from_fn(n, |_, _| rng.gen_range(-1.0..1.0)),
                    Vector::from_fn(n, |_, _| rng.gen_range(-1.0..1.0)),
                )
            })
            .collect();
        let weights: Vec<f64> = (0..5).map(|_| rng.gen_range(0.1..1.0)).collect();
        let cert = Semicertificate::new(weights.clone(), None, &recs);
        let x0 = v(&[0.1, -0.3]);
        let radius = 1.5;
        let gap = cert.gap(&recs, &x0, radius).unwrap();
        let mut best = f64::NEG_INFINITY;
        for _ in 0..1_000_000 {
            let t: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
            let x = &x0 + v(&[t.cos(), t.sin()]) * radius;
            let val: f64 = weights.iter().zip(&recs).map(|(l, r)| l * r.g.dot(&(&r.x - &x))).sum();
            best = best.max(val / cert.gamma);
        }
        assert!(gap >= best - 1e-12 && gap - best < 1e-3);
    }

    #[test]
    fn residual_bound_examples() {
        assert_eq!(residual_bound_from_gap(0.0, 1.0, 3.0).unwrap(), 0.0);
        assert!((residual_bound_from_gap(0.5, 1.0, 3.0).unwrap() - 3.0).abs() < 1e-15);
        assert!(matches!(residual_bound_from_gap(1.0, 1.0, 3.0), Err(CertificateError::Vacuous { .. })));
    }

    #[test]
    fn pow2_cadence() {
        let ks: Vec<usize> = (1..=20).filter(|&k| is_pow2_checkpoint(k)).collect();
        assert_eq!(ks, vec![1, 2, 4, 8, 16]);
    }

    #[test]
    fn single_step_certificate_equals_sliding_gap() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let problem = random_problem(&mut rng, 3);
        for variant in [Variant::Subgradient, Variant::SubgradientEllipsoid, Variant::EllipsoidPrelimCert] {
            let cfg = StrategyConfig::new(variant, 3, AlphaSchedule::TimeVarying).unwrap();
            let out = run(&problem, cfg, 1, StorageMode::Full).unwrap();
            let recs = &out.solver.history().records;
            let st = out.solver.state();
            let cert = certify_from_preliminary(recs, st).unwrap();
            assert_eq!(cert.weights[0], recs[0].a);
            let gap = cert.gap(recs, &problem.x0, problem.radius).unwrap();
            assert!((gap - sliding_gap(st).unwrap()).abs() < 1e-12);
        }
    }

    #[test]
    fn preliminary_certificate_dominance_and_residual_bound() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for n in [2, 3, 5] {
            let problem = random_problem(&mut rng, n);
            for variant in [Variant::Subgradient, Variant::SubgradientEllipsoid, Variant::EllipsoidPrelimCert] {
                let cfg = StrategyConfig::new(variant, n, AlphaSchedule::TimeVarying).unwrap();
                let out = run(&problem, cfg, 64, StorageMode::Full).unwrap();
                let recs = &out.solver.history().records;
                let st = out.solver.state();
                let cert = certify_from_preliminary(recs, st).unwrap();
                assert!(cert.weights.iter().all(|&w| w >= 0.0));
                assert!(cert.gamma >= st.gamma_sum * (1.0 - 1e-12));
                let gap = cert.gap(recs, &problem.x0, problem.radius).unwrap();
                assert!(gap <= sliding_gap(st).unwrap() + 1e-9, "{variant}: {gap}");

                let s_k = -&st.c;
                let (mu, _) = augment(recs, &st.h, &s_k).unwrap();
                let lhs = augmented_ball_support(recs, &mu, &s_k, &problem.x0, problem.radius);
                let rhs = localizer_support(st, &s_k).unwrap();
                assert!(lhs <= rhs + 1e-9 * (1.0 + rhs.abs()));
            }
        }
    }

    #[test]
    fn lean_and_full_modes_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let problem = random_problem(&mut rng, 4);
        let cfg = StrategyConfig::new(Variant::SubgradientEllipsoid, 4, AlphaSchedule::TimeVarying).unwrap();
        let full = run(&problem, cfg.clone(), 100, StorageMode::Full).unwrap();
        let lean = run(&problem, cfg, 100, StorageMode::Lean).unwrap();
        let cf = certify_from_preliminary(&full.solver.history().records, full.solver.state()).unwrap();
        let cl = certify_from_preliminary(&lean.solver.history().records, lean.solver.state()).unwrap();
        for (a, b) in cf.weights.iter().zip(&cl.weights) {
            assert!((a - b).abs() <= 1e-10 * (1.0 + a.abs()));
        }
    }

    #[test]
    fn identical_subgradients_across_modes() {
        let g = v(&[0.6, -0.8]);
        let cfg = StrategyConfig::new(Variant::SubgradientEllipsoid, 2, AlphaSchedule::TimeVarying).unwrap();
        let mut results = Vec::new();
        for mode in [StorageMode::Full, StorageMode::Lean] {
            let mut s = crate::solver::Solver::new(Vector::zeros(2), 1.0, cfg.clone(), mode).unwrap();
            for _ in 0..8 {
                let out = s.step(crate::oracles::OracleResponse { g: g.clone(), productive: true }).unwrap();
                if out != crate::solver::StepOutcome::Continue {
                    break;
                }
            }
            assert!(!s.history().is_empty());
            let (mu, _) = augment(&s.history().records, &s.state().h, &(-&g)).unwrap();
            results.push(mu);
        }
        for (a, b) in results[0].iter().zip(&results[1]) {
            assert!(*a >= 0.0 && (a - b).abs() <= 1e-10 * (1.0 + a.abs()));
        }
    }

    #[test]
    fn terminal_certificate_gap_below_delta() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let problem = random_problem(&mut rng, 2);
        let delta = 0.1 * problem.radius;
        let cfg = StrategyConfig::new(Variant::SubgradientEllipsoid, 2, AlphaSchedule::TimeVarying)
            .unwrap()
            .with_delta(delta);
        let out = run(&problem, cfg, 100_000, StorageMode::Full).unwrap();
        assert_eq!(out.termination, crate::solver::Termination::SmallSupport);
        let s = &out.solver;
        let cert = certify_terminal(&s.history().records, s.state(), s.terminal().unwrap()).unwrap();
        assert_eq!(*cert.weights.last().unwrap(), 1.0);
        let gap = cert.gap(&s.history().records, &problem.x0, problem.radius).unwrap();
        assert!(gap <= delta + 1e-9);
    }

    #[test]
    fn standard_ellipsoid_certificate() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let n = 2;
        let problem = random_problem(&mut rng, n);
        let cfg = StrategyConfig::new(Variant::StandardEllipsoid, n, AlphaSchedule::TimeVarying).unwrap();
        let out = run(&problem, cfg, 30, StorageMode::Full).unwrap();
        let recs = &out.solver.history().records;
        let st = out.solver.state();
        let d = problem.set.diameter();
        let ec = certify_standard_ellipsoid(recs, st, problem.inner_radius, d).unwrap();
        let (_, dk) = st.localizer().unwrap();
        let width = 2.0 * dk.sqrt() * st.h.quadratic_form(&ec.direction).sqrt();
        assert!(width <= ec.rho * (1.0 + 1e-12));
        let bound = ec.gap_bound.expect("ρ_k < r after 30 steps");
        assert!(ec.certificate.gamma >= (problem.inner_radius - ec.rho) / d - 1e-12);
        let gap = ec.certificate.gap(recs, &problem.x0, problem.radius).unwrap();
        assert!(gap <= bound + 1e-9);
        let raw = gap * ec.certificate.gamma;
        assert!(raw <= 2.0 * ec.rho + 1e-9);
    }

    #[test]
    fn vacuous_single_cut() {
        // the one cut is slack inside the initial ball only at the boundary
        let cfg = StrategyConfig::new(Variant::Subgradient, 2, AlphaSchedule::TimeVarying).unwrap();
        let mut s = crate::solver::Solver::new(Vector::zeros(2), 1.0, cfg, StorageMode::Full).unwrap();
        s.step(crate::oracles::OracleResponse { g: v(&[1.0, 0.0]), productive: true }).unwrap();
        let recs = &s.history().records;
        // s_1 pointing away from the cut: the cut is inactive
        let s1 = v(&[-1.0, 0.0]);
        let (mu, _) = augment(recs, &s.state().h, &s1).unwrap();
        assert_eq!(mu, vec![0.0]);
        let lhs = augmented_ball_support(recs, &mu, &s1, &Vector::zeros(2), 1.0);
        assert!((lhs - 1.0).abs() < 1e-15);
    }
}
