//! Problems with convex structure: a feasible solid given by a separation
//! oracle and a vector field given by a first-order oracle.
//!
//! Three problem classes are covered: convex minimization (max-of-affine and
//! quadratic objectives), bilinear convex–concave saddle points over a
//! product of balls, and variational inequalities with an affine monotone
//! operator. Problems are loaded from JSON documents and validated once.

use std::path::Path;

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{Matrix, Vector};

/// Relative slack for containment checks performed at load time.
const CONTAINMENT_TOL: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum ProblemError {
    #[error("cannot read problem file: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed problem document: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("invalid problem: {0}")]
    Invalid(String),
    #[error("separation oracle called at interior point")]
    InteriorPoint,
}

fn invalid<T>(msg: impl Into<String>) -> Result<T, ProblemError> {
    Err(ProblemError::Invalid(msg.into()))
}

/// Output of the composed oracle at a test point.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleResponse {
    /// Subgradient / field value on productive steps, separator otherwise.
    pub g: Vector,
    /// The test point lies in the interior of the feasible set.
    pub productive: bool,
}

impl OracleResponse {
    /// A zero vector on a productive step means the test point is an exact
    /// solution.
    pub fn is_exact_solution(&self) -> bool {
        self.productive && self.g.iter().all(|&x| x == 0.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AffineRow {
    pub a: Vector,
    pub b: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum FeasibleSet {
    Ball { center: Vector, radius: f64 },
    Box { lower: Vector, upper: Vector },
    /// `U × V` with `U = B(u_center, u_radius)` holding the first `split`
    /// coordinates.
    BallProduct { split: usize, u_center: Vector, u_radius: f64, v_center: Vector, v_radius: f64 },
}

impl FeasibleSet {
    pub fn dim(&self) -> usize {
        match self {
            Self::Ball { center, .. } => center.len(),
            Self::Box { lower, .. } => lower.len(),
            Self::BallProduct { u_center, v_center, .. } => u_center.len() + v_center.len(),
        }
    }

    pub fn is_interior(&self, x: &Vector) -> bool {
        match self {
            Self::Ball { center, radius } => (x - center).norm() < *radius,
            Self::Box { lower, upper } => {
                x.iter().zip(lower.iter().zip(upper.iter())).all(|(&xi, (&l, &u))| l < xi && xi < u)
            }
            Self::BallProduct { split, u_center, u_radius, v_center, v_radius } => {
                let (u, v) = split_point(x, *split);
                (u - u_center).norm() < *u_radius && (v - v_center).norm() < *v_radius
            }
        }
    }

    /// Membership with relative slack `tol`.
    pub fn contains(&self, x: &Vector, tol: f64) -> bool {
        match self {
            Self::Ball { center, radius } => (x - center).norm() <= radius * (1.0 + tol),
            Self::Box { lower, upper } => x.iter().zip(lower.iter().zip(upper.iter())).all(|(&xi, (&l, &u))| {
                let slack = tol * (u - l);
                l - slack <= xi && xi <= u + slack
            }),
            Self::BallProduct { split, u_center, u_radius, v_center, v_radius } => {
                let (u, v) = split_point(x, *split);
                (u - u_center).norm() <= u_radius * (1.0 + tol)
                    && (v - v_center).norm() <= v_radius * (1.0 + tol)
            }
        }
    }

    /// Separator at a point outside the interior.
    pub fn separate(&self, x: &Vector) -> Result<OracleResponse, ProblemError> {
        match self {
            Self::Ball { center, radius } => separation_ball(x, center, *radius),
            Self::Box { lower, upper } => separation_box(x, lower, upper),
            Self::BallProduct { split, u_center, u_radius, v_center, v_radius } => {
                let (u, v) = split_point(x, *split);
                let mut g = Vector::zeros(x.len());
                let (du, dv) = (u - u_center, v - v_center);
                if du.norm() >= *u_radius {
                    g.rows_mut(0, *split).copy_from(&du);
                } else if dv.norm() >= *v_radius {
                    g.rows_mut(*split, dv.len()).copy_from(&dv);
                } else {
                    return Err(ProblemError::InteriorPoint);
                }
                Ok(OracleResponse { g, productive: false })
            }
        }
    }

    pub fn diameter(&self) -> f64 {
        match self {
            Self::Ball { radius, .. } => 2.0 * radius,
            Self::Box { lower, upper } => (upper - lower).norm(),
            Self::BallProduct { u_radius, v_radius, .. } => 2.0 * u_radius.hypot(*v_radius),
        }
    }

    /// Center and radius of the largest Euclidean ball inside the set.
    pub fn inscribed_ball(&self) -> (Vector, f64) {
        match self {
            Self::Ball { center, radius } => (center.clone(), *radius),
            Self::Box { lower, upper } => {
                let half = (upper - lower) * 0.5;
                ((lower + upper) * 0.5, half.min())
            }
            Self::BallProduct { u_center, u_radius, v_center, v_radius, .. } => {
                (stack(u_center, v_center), u_radius.min(*v_radius))
            }
        }
    }

    /// A ball containing the set.
    pub fn bounding_ball(&self) -> (Vector, f64) {
        match self {
            Self::Ball { center, radius } => (center.clone(), *radius),
            Self::Box { lower, upper } => ((lower + upper) * 0.5, 0.5 * (upper - lower).norm()),
            Self::BallProduct { u_center, u_radius, v_center, v_radius, .. } => {
                (stack(u_center, v_center), u_radius.hypot(*v_radius))
            }
        }
    }

    /// `max_{y ∈ Q} ‖y − x0‖`.
    pub fn max_distance_from(&self, x0: &Vector) -> f64 {
        match self {
            Self::Ball { center, radius } => (center - x0).norm() + radius,
            Self::Box { lower, upper } => lower
                .iter()
                .zip(upper.iter())
                .zip(x0.iter())
                .map(|((&l, &u), &x)| (l - x).abs().max((u - x).abs()).powi(2))
                .sum::<f64>()
                .sqrt(),
            Self::BallProduct { split, u_center, u_radius, v_center, v_radius } => {
                let (u0, v0) = split_point(x0, *split);
                ((u_center - u0).norm() + u_radius).hypot((v_center - v0).norm() + v_radius)
            }
        }
    }
}

fn split_point(x: &Vector, split: usize) -> (Vector, Vector) {
    (x.rows(0, split).into_owned(), x.rows(split, x.len() - split).into_owned())
}

fn stack(u: &Vector, v: &Vector) -> Vector {
    Vector::from_iterator(u.len() + v.len(), u.iter().chain(v.iter()).copied())
}

#[derive(Debug, Clone, PartialEq)]
pub enum Objective {
    /// `f(x) = max_i ⟨a_i, x⟩ + b_i`.
    MaxAffine { rows: Vec<AffineRow> },
    /// `f(x) = ½⟨Px, x⟩ + ⟨q, x⟩` with `P ⪰ 0`.
    Quadratic { p: Matrix, q: Vector },
    /// `f(u, v) = ⟨u, Mv⟩ + ⟨p, u⟩ + ⟨q, v⟩`.
    SaddleBilinear { m: Matrix, p: Vector, q: Vector },
    /// `V(x) = Mx + q` with `M + Mᵀ ⪰ 0`.
    ViAffine { m: Matrix, q: Vector },
}

/// Separator `x − center` for a Euclidean ball; `x` must not be interior.
pub fn separation_ball(x: &Vector, center: &Vector, radius: f64) -> Result<OracleResponse, ProblemError> {
    let g = x - center;
    if g.norm() < radius {
        return Err(ProblemError::InteriorPoint);
    }
    Ok(OracleResponse { g, productive: false })
}

/// Signed unit vector of the most violated coordinate (smallest index on ties).
pub fn separation_box(x: &Vector, lower: &Vector, upper: &Vector) -> Result<OracleResponse, ProblemError> {
    let mut best: Option<(usize, f64, f64)> = None;
    for i in 0..x.len() {
        let over = x[i] - upper[i];
        let under = lower[i] - x[i];
        let (viol, sign) = if over >= under { (over, 1.0) } else { (under, -1.0) };
        if viol >= 0.0 && best.map_or(true, |(_, v, _)| viol > v) {
            best = Some((i, viol, sign));
        }
    }
    let (i, _, sign) = best.ok_or(ProblemError::InteriorPoint)?;
    let mut g = Vector::zeros(x.len());
    g[i] = sign;
    Ok(OracleResponse { g, productive: false })
}

/// Gradient of the smallest-index active row of `max_i ⟨a_i, x⟩ + b_i`.
pub fn subgradient_max_affine(x: &Vector, rows: &[AffineRow]) -> Vector {
    let mut best = 0;
    let mut best_val = f64::NEG_INFINITY;
    for (i, row) in rows.iter().enumerate() {
        let val = row.a.dot(x) + row.b;
        if val > best_val {
            best = i;
            best_val = val;
        }
    }
    rows[best].a.clone()
}

pub fn max_affine_value(x: &Vector, rows: &[AffineRow]) -> f64 {
    rows.iter().map(|r| r.a.dot(x) + r.b).fold(f64::NEG_INFINITY, f64::max)
}

/// `(∂_u f, −∂_v f)` for `f(u, v) = ⟨u, Mv⟩ + ⟨p, u⟩ + ⟨q, v⟩`.
pub fn saddle_oracle(x: &Vector, m: &Matrix, p: &Vector, q: &Vector) -> Vector {
    let (u, v) = split_point(x, m.nrows());
    let gu = m * &v + p;
    let gv = -(m.transpose() * &u + q);
    stack(&gu, &gv)
}

/// `V(x) = Mx + q`.
pub fn vi_oracle(x: &Vector, m: &Matrix, q: &Vector) -> Vector {
    m * x + q
}

/// A validated problem instance.
#[derive(Debug, Clone, PartialEq)]
pub struct Problem {
    pub dim: usize,
    pub x0: Vector,
    /// Radius of the initial ball `B(x0, R) ⊇ Q`.
    pub radius: f64,
    pub set: FeasibleSet,
    pub objective: Objective,
    pub known_xstar: Option<Vector>,
    pub known_fstar: Option<f64>,
    /// `B(inner_center, inner_radius) ⊆ Q`.
    pub inner_center: Vector,
    pub inner_radius: f64,
    /// Semiboundedness constant: `⟨g(x), y − x⟩ ≤ V` on `int Q × Q`.
    pub variation_bound: f64,
    /// Generator seed, for randomly generated instances.
    pub seed: Option<u64>,
}

impl Problem {
    /// First-order oracle on `int Q`, separation oracle elsewhere.
    pub fn oracle(&self, x: &Vector) -> OracleResponse {
        if self.set.is_interior(x) {
            OracleResponse { g: self.field(x), productive: true }
        } else {
            self.set.separate(x).expect("point is outside the interior")
        }
    }

    /// The first-order vector field, evaluated anywhere.
    pub fn field(&self, x: &Vector) -> Vector {
        match &self.objective {
            Objective::MaxAffine { rows } => subgradient_max_affine(x, rows),
            Objective::Quadratic { p, q } => p * x + q,
            Objective::SaddleBilinear { m, p, q } => saddle_oracle(x, m, p, q),
            Objective::ViAffine { m, q } => vi_oracle(x, m, q),
        }
    }

    /// Objective value for minimization problems.
    pub fn objective_value(&self, x: &Vector) -> Option<f64> {
        match &self.objective {
            Objective::MaxAffine { rows } => Some(max_affine_value(x, rows)),
            Objective::Quadratic { p, q } => Some(0.5 * x.dot(&(p * x)) + q.dot(x)),
            _ => None,
        }
    }

    /// Primal–dual gap `φ(u) − ψ(v)` of a bilinear saddle problem over balls.
    pub fn saddle_gap(&self, x: &Vector) -> Option<f64> {
        let (Objective::SaddleBilinear { m, p, q }, FeasibleSet::BallProduct { split, u_center, u_radius, v_center, v_radius }) =
            (&self.objective, &self.set)
        else {
            return None;
        };
        let (u, v) = split_point(x, *split);
        let wu = m.transpose() * &u + q;
        let phi = p.dot(&u) + wu.dot(v_center) + v_radius * wu.norm();
        let wv = m * &v + p;
        let psi = q.dot(&v) + wv.dot(u_center) - u_radius * wv.norm();
        Some(phi - psi)
    }

    pub fn is_minimization(&self) -> bool {
        matches!(self.objective, Objective::MaxAffine { .. } | Objective::Quadratic { .. })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, ProblemError> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text)
    }

    pub fn from_json(text: &str) -> Result<Self, ProblemError> {
        let file: ProblemFile = serde_json::from_str(text)?;
        Self::from_file(file)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_file()).expect("problem serializes")
    }

    pub fn from_file(file: ProblemFile) -> Result<Self, ProblemError> {
        let n = file.dim;
        if n == 0 {
            return invalid("dim must be positive");
        }
        let x0 = vector_of(&file.x0, n, "x0")?;
        let radius = file.radius;
        if !(radius.is_finite() && radius > 0.0) {
            return invalid("R must be positive and finite");
        }
        let set = file.set.build(n)?;
        let reach = set.max_distance_from(&x0);
        if reach > radius * (1.0 + CONTAINMENT_TOL) {
            return invalid(format!("feasible set reaches distance {reach} from x0, beyond R = {radius}"));
        }
        let objective = file.objective.build(n, &set)?;

        let (inner_center, max_inner) = set.inscribed_ball();
        let inner_radius = match file.r {
            Some(r) if !(r > 0.0 && r <= max_inner * (1.0 + CONTAINMENT_TOL)) => {
                return invalid(format!("r = {r} is not the radius of a ball inside Q (max {max_inner})"));
            }
            Some(r) => r,
            None => max_inner,
        };

        let known_xstar = match &file.xstar {
            Some(xs) => {
                let xs = vector_of(xs, n, "xstar")?;
                if !set.contains(&xs, 1e-9) {
                    return invalid("xstar lies outside the feasible set");
                }
                Some(xs)
            }
            None => None,
        };

        let mut problem = Problem {
            dim: n,
            x0,
            radius,
            set,
            objective,
            known_xstar,
            known_fstar: file.fstar,
            inner_center,
            inner_radius,
            variation_bound: 0.0,
            seed: file.seed,
        };

        if let (Some(xs), None) = (&problem.known_xstar, problem.known_fstar) {
            problem.known_fstar = problem.objective_value(xs);
        }
        if let (Some(xs), Some(fs)) = (&problem.known_xstar, problem.known_fstar) {
            if let Some(val) = problem.objective_value(xs) {
                if (val - fs).abs() > 1e-8 * (1.0 + fs.abs()) {
                    return invalid(format!("fstar = {fs} disagrees with f(xstar) = {val}"));
                }
            }
        }
        if problem.known_fstar.is_some() && !problem.is_minimization() {
            return invalid("fstar only applies to minimization problems");
        }

        problem.variation_bound = match file.variation {
            Some(v) if !(v.is_finite() && v >= 0.0) => return invalid("V must be nonnegative"),
            Some(v) => v,
            None => problem.field_bound() * problem.set.diameter(),
        };
        Ok(problem)
    }

    /// Upper bound on `sup_{x ∈ Q} ‖g(x)‖`.
    pub fn field_bound(&self) -> f64 {
        let (c, rho) = self.set.bounding_ball();
        let affine = |m: &Matrix, q: &Vector| (m * &c + q).norm() + spectral_norm(m) * rho;
        match &self.objective {
            Objective::MaxAffine { rows } => rows.iter().map(|r| r.a.norm()).fold(0.0, f64::max),
            Objective::Quadratic { p, q } => affine(p, q),
            Objective::ViAffine { m, q } => affine(m, q),
            Objective::SaddleBilinear { m, p, q } => {
                let (nu, nv) = (m.nrows(), m.ncols());
                let mut j = Matrix::zeros(nu + nv, nu + nv);
                j.view_mut((0, nu), (nu, nv)).copy_from(m);
                j.view_mut((nu, 0), (nv, nu)).copy_from(&(-m.transpose()));
                affine(&j, &stack(p, &(-q)))
            }
        }
    }

    pub fn to_file(&self) -> ProblemFile {
        ProblemFile {
            dim: self.dim,
            x0: self.x0.as_slice().to_vec(),
            radius: self.radius,
            set: SetSpec::from_set(&self.set),
            objective: ObjectiveSpec::from_objective(&self.objective),
            xstar: self.known_xstar.as_ref().map(|x| x.as_slice().to_vec()),
            fstar: self.known_fstar,
            r: Some(self.inner_radius),
            variation: Some(self.variation_bound),
            seed: self.seed,
        }
    }
}

fn spectral_norm(m: &Matrix) -> f64 {
    m.clone().singular_values().max()
}

fn vector_of(xs: &[f64], n: usize, what: &str) -> Result<Vector, ProblemError> {
    if xs.len() != n {
        return invalid(format!("{what} has length {}, expected {n}", xs.len()));
    }
    if xs.iter().any(|x| !x.is_finite()) {
        return invalid(format!("{what} has non-finite entries"));
    }
    Ok(Vector::from_column_slice(xs))
}

fn matrix_of(rows: &[Vec<f64>], nr: usize, nc: usize, what: &str) -> Result<Matrix, ProblemError> {
    if rows.len() != nr || rows.iter().any(|r| r.len() != nc) {
        return invalid(format!("{what} must be {nr}×{nc}"));
    }
    if rows.iter().flatten().any(|x| !x.is_finite()) {
        return invalid(format!("{what} has non-finite entries"));
    }
    Ok(DMatrix::from_fn(nr, nc, |i, j| rows[i][j]))
}

fn rows_of(m: &Matrix) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

fn min_sym_eigenvalue(m: &Matrix) -> f64 {
    let sym = (m + m.transpose()) * 0.5;
    SymmetricEigen::new(sym).eigenvalues.min()
}

/// On-disk problem document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemFile {
    pub dim: usize,
    pub x0: Vec<f64>,
    #[serde(rename = "R")]
    pub radius: f64,
    pub set: SetSpec,
    #[serde(flatten)]
    pub objective: ObjectiveSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub xstar: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fstar: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r: Option<f64>,
    #[serde(rename = "V", default, skip_serializing_if = "Option::is_none")]
    pub variation: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum SetSpec {
    Ball {
        center: Vec<f64>,
        radius: f64,
    },
    Box {
        lower: Vec<f64>,
        upper: Vec<f64>,
    },
    BallProduct {
        split: usize,
        u_center: Vec<f64>,
        u_radius: f64,
        v_center: Vec<f64>,
        v_radius: f64,
    },
}

impl SetSpec {
    fn build(&self, n: usize) -> Result<FeasibleSet, ProblemError> {
        match self {
            Self::Ball { center, radius } => {
                if !(*radius > 0.0 && radius.is_finite()) {
                    return invalid("ball radius must be positive");
                }
                Ok(FeasibleSet::Ball { center: vector_of(center, n, "set.center")?, radius: *radius })
            }
            Self::Box { lower, upper } => {
                let lower = vector_of(lower, n, "set.lower")?;
                let upper = vector_of(upper, n, "set.upper")?;
                if lower.iter().zip(upper.iter()).any(|(l, u)| l >= u) {
                    return invalid("box bounds must satisfy lower < upper");
                }
                Ok(FeasibleSet::Box { lower, upper })
            }
            Self::BallProduct { split, u_center, u_radius, v_center, v_radius } => {
                if *split == 0 || *split >= n {
                    return invalid("ball product split must lie strictly between 0 and dim");
                }
                if !(*u_radius > 0.0 && *v_radius > 0.0) {
                    return invalid("ball product radii must be positive");
                }
                Ok(FeasibleSet::BallProduct {
                    split: *split,
                    u_center: vector_of(u_center, *split, "set.u_center")?,
                    u_radius: *u_radius,
                    v_center: vector_of(v_center, n - split, "set.v_center")?,
                    v_radius: *v_radius,
                })
            }
        }
    }

    fn from_set(set: &FeasibleSet) -> Self {
        match set {
            FeasibleSet::Ball { center, radius } => {
                Self::Ball { center: center.as_slice().to_vec(), radius: *radius }
            }
            FeasibleSet::Box { lower, upper } => {
                Self::Box { lower: lower.as_slice().to_vec(), upper: upper.as_slice().to_vec() }
            }
            FeasibleSet::BallProduct { split, u_center, u_radius, v_center, v_radius } => Self::BallProduct {
                split: *split,
                u_center: u_center.as_slice().to_vec(),
                u_radius: *u_radius,
                v_center: v_center.as_slice().to_vec(),
                v_radius: *v_radius,
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RowSpec {
    pub a: Vec<f64>,
    pub b: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ObjectiveSpec {
    MaxAffine {
        rows: Vec<RowSpec>,
    },
    Quadratic {
        #[serde(rename = "P")]
        p: Vec<Vec<f64>>,
        q: Vec<f64>,
    },
    SaddleBilinear {
        #[serde(rename = "M")]
        m: Vec<Vec<f64>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        p: Option<Vec<f64>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        q: Option<Vec<f64>>,
    },
    ViAffine {
        #[serde(rename = "M")]
        m: Vec<Vec<f64>>,
        q: Vec<f64>,
    },
}

impl ObjectiveSpec {
    fn build(&self, n: usize, set: &FeasibleSet) -> Result<Objective, ProblemError> {
        match self {
            Self::MaxAffine { rows } => {
                if rows.is_empty() {
                    return invalid("max_affine needs at least one row");
                }
                let rows = rows
                    .iter()
                    .enumerate()
                    .map(|(i, r)| {
                        if !r.b.is_finite() {
                            return invalid(format!("rows[{i}].b is not finite"));
                        }
                        Ok(AffineRow { a: vector_of(&r.a, n, &format!("rows[{i}].a"))?, b: r.b })
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                Ok(Objective::MaxAffine { rows })
            }
            Self::Quadratic { p, q } => {
                let p = matrix_of(p, n, n, "P")?;
                if (&p - p.transpose()).amax() > 1e-12 * p.amax().max(1.0) {
                    return invalid("P must be symmetric");
                }
                if min_sym_eigenvalue(&p) < -1e-10 {
                    return invalid("P must be positive semidefinite");
                }
                Ok(Objective::Quadratic { p, q: vector_of(q, n, "q")? })
            }
            Self::SaddleBilinear { m, p, q } => {
                let FeasibleSet::BallProduct { split, .. } = set else {
                    return invalid("saddle_bilinear requires a ball_product feasible set");
                };
                let (nu, nv) = (*split, n - split);
                let m = matrix_of(m, nu, nv, "M")?;
                let p = match p {
                    Some(p) => vector_of(p, nu, "p")?,
                    None => Vector::zeros(nu),
                };
                let q = match q {
                    Some(q) => vector_of(q, nv, "q")?,
                    None => Vector::zeros(nv),
                };
                Ok(Objective::SaddleBilinear { m, p, q })
            }
            Self::ViAffine { m, q } => {
                let m = matrix_of(m, n, n, "M")?;
                let lo = min_sym_eigenvalue(&m);
                if lo < -1e-10 {
                    return invalid(format!("operator is not monotone: M + Mᵀ has eigenvalue {}", 2.0 * lo));
                }
                Ok(Objective::ViAffine { m, q: vector_of(q, n, "q")? })
            }
        }
    }

    fn from_objective(obj: &Objective) -> Self {
        let vec = |v: &Vector| v.as_slice().to_vec();
        match obj {
            Objective::MaxAffine { rows } => Self::MaxAffine {
                rows: rows.iter().map(|r| RowSpec { a: vec(&r.a), b: r.b }).collect(),
            },
            Objective::Quadratic { p, q } => Self::Quadratic { p: rows_of(p), q: vec(q) },
            Objective::SaddleBilinear { m, p, q } => {
                Self::SaddleBilinear { m: rows_of(m), p: Some(vec(p)), q: Some(vec(q)) }
            }
            Objective::ViAffine { m, q } => Self::ViAffine { m: rows_of(m), q: vec(q) },
        }
    }
}
