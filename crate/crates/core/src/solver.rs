//! The general cutting-plane scheme with quadratic and affine models.
//!
//! Each iteration queries the oracle at the test point `x_k`, computes the
//! support value `U_k` of the current localizer `Ω_k ∩ L_k⁻`, chooses the
//! coefficients `(a_k, b_k)` from a [`StrategyConfig`] and updates the test
//! point, the inverse operator `H_k`, the radius `R_k` and the affine model
//! `ℓ_k(x) = ⟨c_k, x⟩ − σ_k`. Four parameter strategies are provided, ranging
//! from the subgradient method to the standard ellipsoid method.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::linalg::{clamped_sqrt, LinalgError, SymmetricOperator, Vector, RADICAND_CLAMP};
use crate::oracles::{OracleResponse, Problem};
use crate::support::{xi_kernel, PairGram, SupportError};

#[derive(Debug, Error)]
pub enum SolverError {
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Support(#[from] SupportError),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("numerical breakdown at iteration {k}: {what}")]
    Breakdown { k: usize, what: String },
    #[error("separation oracle returned a zero vector at iteration {0}")]
    ZeroSeparator(usize),
    #[error("sliding gap is undefined while Γ_k = 0")]
    UndefinedGap,
    #[error("accumulated Γ_k = {stored} drifted from the history sum {recomputed}")]
    GammaDrift { stored: f64, recomputed: f64 },
    #[error("solver already terminated")]
    Terminated,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Variant {
    Subgradient,
    StandardEllipsoid,
    EllipsoidPrelimCert,
    SubgradientEllipsoid,
}

impl Variant {
    pub const ALL: [Variant; 4] = [
        Variant::Subgradient,
        Variant::StandardEllipsoid,
        Variant::EllipsoidPrelimCert,
        Variant::SubgradientEllipsoid,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Variant::Subgradient => "subgradient",
            Variant::StandardEllipsoid => "ellipsoid",
            Variant::EllipsoidPrelimCert => "ellipsoid-cert",
            Variant::SubgradientEllipsoid => "subgrad-ellipsoid",
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Variant {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Variant::ALL
            .into_iter()
            .find(|v| v.name() == s)
            .ok_or_else(|| format!("unknown variant '{s}' (expected subgradient, ellipsoid, ellipsoid-cert or subgrad-ellipsoid)"))
    }
}

/// Coefficients `β_i` driving `α_i`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AlphaSchedule {
    /// `β_i = 1/√K` for a horizon `K` fixed in advance.
    Constant { horizon: usize },
    /// `β_i = 1/√(i+1)`.
    TimeVarying,
}

impl AlphaSchedule {
    pub fn beta(&self, i: usize) -> f64 {
        match *self {
            AlphaSchedule::Constant { horizon } => 1.0 / (horizon as f64).sqrt(),
            AlphaSchedule::TimeVarying => 1.0 / ((i + 1) as f64).sqrt(),
        }
    }
}

impl fmt::Display for AlphaSchedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AlphaSchedule::Constant { horizon } => write!(f, "const:{horizon}"),
            AlphaSchedule::TimeVarying => f.write_str("decay"),
        }
    }
}

impl FromStr for AlphaSchedule {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "decay" {
            return Ok(AlphaSchedule::TimeVarying);
        }
        let horizon = s
            .strip_prefix("const:")
            .and_then(|k| k.parse::<usize>().ok())
            .filter(|&k| k > 0)
            .ok_or_else(|| format!("invalid schedule '{s}' (expected const:K with K ≥ 1, or decay)"))?;
        Ok(AlphaSchedule::Constant { horizon })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StrategyConfig {
    pub variant: Variant,
    pub theta: f64,
    pub gamma: f64,
    pub schedule: AlphaSchedule,
    /// Stop when `U_k ≤ δ ‖g_k‖*`; zero disables early termination.
    pub delta_term: f64,
    /// Recompute `Γ_k` from the history after every step.
    pub check_drift: bool,
}

impl StrategyConfig {
    /// Standard parameters of `variant` in dimension `n`.
    pub fn new(variant: Variant, n: usize, schedule: AlphaSchedule) -> Result<Self, SolverError> {
        if n == 0 {
            return Err(SolverError::InvalidConfig("dimension must be positive".into()));
        }
        let p = n as f64;
        let (theta, gamma) = match variant {
            Variant::Subgradient => (0.0, 0.0),
            Variant::StandardEllipsoid => {
                if n < 2 {
                    return Err(SolverError::InvalidConfig(
                        "the standard ellipsoid method needs dimension ≥ 2".into(),
                    ));
                }
                (0.0, gamma_opt(0.5, p)?)
            }
            Variant::EllipsoidPrelimCert => (2f64.sqrt() - 1.0, gamma_opt(1.0, 2.0 * p)?),
            Variant::SubgradientEllipsoid => (2f64.cbrt() - 1.0, gamma_opt(1.0, 2.0 * p)?),
        };
        Ok(Self { variant, theta, gamma, schedule, delta_term: 0.0, check_drift: false })
    }

    pub fn with_delta(mut self, delta: f64) -> Self {
        self.delta_term = delta;
        self
    }

    pub fn with_theta(mut self, theta: f64) -> Self {
        self.theta = theta;
        self
    }

    pub fn with_drift_check(mut self, on: bool) -> Self {
        self.check_drift = on;
        self
    }

    /// `α_k` for this strategy.
    pub fn alpha(&self, k: usize) -> f64 {
        match self.variant {
            Variant::Subgradient => self.schedule.beta(k),
            Variant::SubgradientEllipsoid => {
                self.schedule.beta(k) * (self.theta / (self.theta + 1.0)).sqrt()
            }
            Variant::StandardEllipsoid | Variant::EllipsoidPrelimCert => 0.0,
        }
    }

    fn validate(&self) -> Result<(), SolverError> {
        let ok = self.theta.is_finite()
            && self.theta >= 0.0
            && self.gamma.is_finite()
            && self.gamma >= 0.0
            && self.delta_term.is_finite()
            && self.delta_term >= 0.0;
        if ok {
            Ok(())
        } else {
            Err(SolverError::InvalidConfig(format!(
                "θ = {}, γ = {}, δ = {} must be finite and nonnegative",
                self.theta, self.gamma, self.delta_term
            )))
        }
    }
}

/// `γ_c(p) = 2 / (√(c²p² − (2c − 1)) + cp − 1)`, the minimizer of `ζ_{p,c}`.
pub fn gamma_opt(c: f64, p: f64) -> Result<f64, SolverError> {
    if !(c >= 0.5 && p >= 2.0) {
        return Err(SolverError::InvalidConfig(format!("γ_c(p) needs c ≥ 1/2 and p ≥ 2, got c = {c}, p = {p}")));
    }
    Ok(2.0 / ((c * c * p * p - (2.0 * c - 1.0)).sqrt() + c * p - 1.0))
}

/// `(q_c(γ), ζ_{p,c}(γ))` with `q_c(γ) = 1 + cγ²/(2(1+γ))` and
/// `ζ_{p,c}(γ) = q_c(γ)^p / (1+γ)`.
pub fn q_and_zeta(c: f64, p: f64, gamma: f64) -> (f64, f64) {
    let q = 1.0 + c * gamma * gamma / (2.0 * (1.0 + gamma));
    (q, q.powf(p) / (1.0 + gamma))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverState {
    pub k: usize,
    pub x: Vector,
    /// `H_k = G_k⁻¹`.
    pub h: SymmetricOperator,
    /// `R_k²`.
    pub rsq: f64,
    pub c: Vector,
    pub sigma: f64,
    /// `Γ_k = Σ a_i ‖g_i‖*`.
    pub gamma_sum: f64,
    pub r0: f64,
    pub x0: Vector,
    /// `ln det G_k`, accumulated from the rank-one updates.
    pub log_det_g: f64,
    /// Cached `H_k c_k`.
    pub hc: Vector,
}

impl SolverState {
    pub fn new(x0: Vector, r0: f64) -> Self {
        let n = x0.len();
        Self {
            k: 0,
            x: x0.clone(),
            h: SymmetricOperator::identity(n),
            rsq: r0 * r0,
            c: Vector::zeros(n),
            sigma: 0.0,
            gamma_sum: 0.0,
            r0,
            x0,
            log_det_g: 0.0,
            hc: Vector::zeros(n),
        }
    }

    pub fn dim(&self) -> usize {
        self.x.len()
    }

    pub fn radius(&self) -> f64 {
        self.rsq.sqrt()
    }

    /// Center `z_k` and squared radius `D_k` of `Ω_k = {x : ‖x − z_k‖²_{G_k} ≤ D_k}`.
    pub fn localizer(&self) -> Result<(Vector, f64), SolverError> {
        let z = &self.x + &self.hc;
        let raw = self.rsq - 2.0 * (self.sigma - self.c.dot(&self.x)) + self.c.dot(&self.hc);
        let d = if raw > 0.0 {
            raw
        } else if raw >= -RADICAND_CLAMP * self.rsq {
            0.0
        } else {
            return Err(SolverError::Breakdown { k: self.k, what: format!("D_k = {raw:e} < 0") });
        };
        Ok((z, d))
    }

    /// Halfspace `L_k⁻ = {x : ⟨c_k, x⟩ ≤ σ_k}`.
    pub fn in_halfspace(&self, x: &Vector, slack: f64) -> bool {
        self.c.dot(x) <= self.sigma + slack
    }
}

// U_k from precomputed products.
fn support_u(state: &SolverState, g: &Vector, hg: &Vector) -> Result<f64, SolverError> {
    let (z, d) = state.localizer()?;
    if d <= 0.0 {
        return Err(SolverError::Breakdown { k: state.k, what: "localizer has empty interior (D_k = 0)".into() });
    }
    let gram = PairGram {
        ss: d * g.dot(hg),
        sa: -d * g.dot(&state.hc),
        aa: d * state.c.dot(&state.hc),
    };
    let beta = state.sigma - state.c.dot(&z);
    Ok(xi_kernel(gram, beta)? - g.dot(&state.hc))
}

/// `U_k = max { ⟨g, x_k − x⟩ : x ∈ Ω_k ∩ L_k⁻ }`.
pub fn compute_u(state: &SolverState, g: &Vector) -> Result<f64, SolverError> {
    let hg = state.h.apply(g);
    support_u(state, g, &hg)
}

/// `(a_k, b_k)` for the oracle vector `g` at the current state.
pub fn coefficients(config: &StrategyConfig, state: &SolverState, g: &Vector) -> Result<(f64, f64), SolverError> {
    let ghg = state.h.quadratic_form(g);
    coefficients_from(config, state, ghg)
}

fn coefficients_from(config: &StrategyConfig, state: &SolverState, ghg: f64) -> Result<(f64, f64), SolverError> {
    if !(ghg > 0.0) {
        return Err(SolverError::Breakdown { k: state.k, what: format!("⟨g, Hg⟩ = {ghg:e}") });
    }
    let norm_g = ghg.sqrt();
    let a = (config.alpha(state.k) * state.r0 + 0.5 * config.theta * config.gamma * state.radius()) / norm_g;
    let b = config.gamma / ghg;
    Ok((a, b))
}

/// `Δ_k = (σ_k − ⟨c_k, z_k⟩ + √D_k ‖c_k‖*_{G_k}) / Γ_k`.
pub fn sliding_gap(state: &SolverState) -> Result<f64, SolverError> {
    if !(state.gamma_sum > 0.0) {
        return Err(SolverError::UndefinedGap);
    }
    let (z, d) = state.localizer()?;
    let c_norm = clamped_sqrt(state.c.dot(&state.hc))?;
    Ok((state.sigma - state.c.dot(&z) + d.sqrt() * c_norm) / state.gamma_sum)
}

/// `avrad Ω_k = R_k (det G_k)^{−1/(2n)}` with the determinant tracked in the state.
pub fn avg_radius(state: &SolverState) -> f64 {
    state.radius() * (-state.log_det_g / (2.0 * state.dim() as f64)).exp()
}

/// How the history keeps the inverse operators needed by the backward pass.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum StorageMode {
    /// Store `H_i` with every record.
    #[default]
    Full,
    /// Store only `H_i g_i`; `H_i` is rebuilt backward from `H_k`.
    Lean,
}

/// One nonterminal iteration, captured before the update.
#[derive(Debug, Clone, PartialEq)]
pub struct HistoryRecord {
    pub x: Vector,
    pub g: Vector,
    pub a: f64,
    pub b: f64,
    pub u: f64,
    pub hg: Vector,
    pub ghg: f64,
    pub z: Vector,
    pub d: f64,
    pub c: Vector,
    pub sigma: f64,
    pub rsq: f64,
    pub productive: bool,
    pub h: Option<SymmetricOperator>,
}

impl HistoryRecord {
    pub fn g_norm(&self) -> f64 {
        self.g.norm()
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct History {
    pub mode: StorageMode,
    pub records: Vec<HistoryRecord>,
}

impl History {
    pub fn new(mode: StorageMode) -> Self {
        Self { mode, records: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// `Σ a_i ‖g_i‖*` over the stored records.
    pub fn gamma_sum(&self) -> f64 {
        self.records.iter().map(|r| r.a * r.g_norm()).sum()
    }
}

/// The iteration at which the method stopped, not part of the history.
#[derive(Debug, Clone, PartialEq)]
pub struct TerminalRecord {
    pub x: Vector,
    pub g: Vector,
    pub u: f64,
    pub productive: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    MaxIter,
    /// `U_k ≤ δ ‖g_k‖*`.
    SmallSupport,
    /// The oracle returned `g = 0` at an interior point.
    ExactSolution,
}

impl Termination {
    pub fn name(self) -> &'static str {
        match self {
            Termination::MaxIter => "max_iter",
            Termination::SmallSupport => "small_support",
            Termination::ExactSolution => "exact_solution",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepOutcome {
    Continue,
    Stop(Termination),
}

/// A solver instance advanced one oracle response at a time.
#[derive(Debug, Clone)]
pub struct Solver {
    config: StrategyConfig,
    state: SolverState,
    history: History,
    terminal: Option<TerminalRecord>,
    stopped: Option<Termination>,
}

impl Solver {
    pub fn new(x0: Vector, radius: f64, config: StrategyConfig, mode: StorageMode) -> Result<Self, SolverError> {
        config.validate()?;
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(SolverError::InvalidConfig(format!("R = {radius} must be positive")));
        }
        if config.variant == Variant::StandardEllipsoid && x0.len() < 2 {
            return Err(SolverError::InvalidConfig("the standard ellipsoid method needs dimension ≥ 2".into()));
        }
        Ok(Self {
            config,
            state: SolverState::new(x0, radius),
            history: History::new(mode),
            terminal: None,
            stopped: None,
        })
    }

    pub fn for_problem(problem: &Problem, config: StrategyConfig, mode: StorageMode) -> Result<Self, SolverError> {
        Self::new(problem.x0.clone(), problem.radius, config, mode)
    }

    pub fn config(&self) -> &StrategyConfig {
        &self.config
    }

    pub fn state(&self) -> &SolverState {
        &self.state
    }

    pub fn history(&self) -> &History {
        &self.history
    }

    pub fn terminal(&self) -> Option<&TerminalRecord> {
        self.terminal.as_ref()
    }

    pub fn stopped(&self) -> Option<Termination> {
        self.stopped
    }

    /// Current test point, the next oracle query.
    pub fn point(&self) -> &Vector {
        &self.state.x
    }

    pub fn sliding_gap(&self) -> Result<f64, SolverError> {
        sliding_gap(&self.state)
    }

    pub fn avg_radius(&self) -> f64 {
        avg_radius(&self.state)
    }

    /// Consume the oracle answer at [`Solver::point`].
    pub fn step(&mut self, response: OracleResponse) -> Result<StepOutcome, SolverError> {
        if self.stopped.is_some() {
            return Err(SolverError::Terminated);
        }
        let OracleResponse { g, productive } = response;
        let st = &self.state;
        if g.len() != st.dim() {
            return Err(LinalgError::DimensionMismatch { expected: st.dim(), got: g.len() }.into());
        }
        if g.iter().all(|&v| v == 0.0) {
            if !productive {
                return Err(SolverError::ZeroSeparator(st.k));
            }
            self.terminal = Some(TerminalRecord { x: st.x.clone(), g, u: 0.0, productive });
            self.stopped = Some(Termination::ExactSolution);
            return Ok(StepOutcome::Stop(Termination::ExactSolution));
        }

        let hg = st.h.apply(&g);
        let ghg = g.dot(&hg);
        let u = support_u(st, &g, &hg)?;
        if u <= self.config.delta_term * g.norm() {
            self.terminal = Some(TerminalRecord { x: st.x.clone(), g, u, productive });
            self.stopped = Some(Termination::SmallSupport);
            return Ok(StepOutcome::Stop(Termination::SmallSupport));
        }
        let (a, b) = coefficients_from(&self.config, st, ghg)?;
        let (z, d) = st.localizer()?;

        let denom = 1.0 + b * ghg;
        let shift = a + 0.5 * b * u;
        let record = HistoryRecord {
            x: st.x.clone(),
            g: g.clone(),
            a,
            b,
            u,
            hg: hg.clone(),
            ghg,
            z,
            d,
            c: st.c.clone(),
            sigma: st.sigma,
            rsq: st.rsq,
            productive,
            h: match self.history.mode {
                StorageMode::Full => Some(st.h.clone()),
                StorageMode::Lean => None,
            },
        };

        let st = &mut self.state;
        st.sigma += a * g.dot(&st.x);
        st.c.axpy(a, &g, 1.0);
        st.x.axpy(-shift / denom, &hg, 1.0);
        st.hc = if b != 0.0 {
            st.log_det_g += denom.ln();
            st.h.subtract_outer_apply(&hg, b / denom, &st.c)
        } else {
            st.h.apply(&st.c)
        };
        st.rsq += shift * shift * ghg / denom;
        st.gamma_sum += a * g.norm();
        st.k += 1;
        self.history.records.push(record);

        if self.config.check_drift {
            self.check_gamma_drift()?;
        }
        Ok(StepOutcome::Continue)
    }

    /// Compare the accumulated `Γ_k` with the sum over the history.
    pub fn check_gamma_drift(&self) -> Result<(), SolverError> {
        let recomputed = self.history.gamma_sum();
        let stored = self.state.gamma_sum;
        if (stored - recomputed).abs() > 1e-9 * recomputed.abs().max(f64::MIN_POSITIVE) {
            return Err(SolverError::GammaDrift { stored, recomputed });
        }
        Ok(())
    }

    fn finish(&mut self) {
        self.stopped.get_or_insert(Termination::MaxIter);
    }
}

/// Per-iteration metrics after `k` completed steps.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    pub k: usize,
    /// Whether `x_{k−1}` was interior.
    pub productive: bool,
    /// `f(x_{k−1})` for minimization problems at productive points.
    pub f_value: Option<f64>,
    pub sliding_gap: Option<f64>,
    pub r_k: f64,
    pub avrad: f64,
    pub gamma: f64,
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub trace: Vec<TraceRow>,
    pub solver: Solver,
    pub termination: Termination,
}

/// Drive `max_iter` iterations of the scheme against the composed oracle.
pub fn run(
    problem: &Problem,
    config: StrategyConfig,
    max_iter: usize,
    mode: StorageMode,
) -> Result<RunOutput, SolverError> {
    run_with(problem, config, max_iter, mode, |_, _| Ok(()))
}

/// [`run`] with a hook invoked after every completed step.
pub fn run_with<F>(
    problem: &Problem,
    config: StrategyConfig,
    max_iter: usize,
    mode: StorageMode,
    mut observe: F,
) -> Result<RunOutput, SolverError>
where
    F: FnMut(&Solver, &TraceRow) -> Result<(), SolverError>,
{
    if max_iter == 0 {
        return Err(SolverError::InvalidConfig("max_iter must be at least 1".into()));
    }
    let mut solver = Solver::for_problem(problem, config, mode)?;
    let mut trace = Vec::with_capacity(max_iter);
    for _ in 0..max_iter {
        let x = solver.point().clone();
        let response = problem.oracle(&x);
        let productive = response.productive;
        if let StepOutcome::Stop(_) = solver.step(response)? {
            break;
        }
        let st = solver.state();
        let row = TraceRow {
            k: st.k,
            productive,
            f_value: if productive { problem.objective_value(&x) } else { None },
            sliding_gap: sliding_gap(st).ok(),
            r_k: st.radius(),
            avrad: avg_radius(st),
            gamma: st.gamma_sum,
        };
        observe(&solver, &row)?;
        trace.push(row);
    }
    solver.finish();
    let termination = solver.stopped().expect("finish sets the termination");
    Ok(RunOutput { trace, solver, termination })
}
