//! Laplacian trajectory editing and curve-length ranked candidate selection.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::arc_length;
use crate::linalg::SymBand;
use crate::scalar::{dist, Scalar};
use crate::trajectory::Trajectory;

pub const DEFAULT_WEIGHT: f64 = 1e3;

/// Soft positional constraint. Negative indices count from the end (`-1` is
/// the last sample).
#[derive(Debug, Clone, PartialEq)]
pub struct Constraint<S = f64> {
    pub index: isize,
    pub target: Vec<S>,
    pub weight: S,
}

impl<S: Scalar> Constraint<S> {
    pub fn new(index: isize, target: Vec<S>) -> Self {
        Self {
            index,
            target,
            weight: S::lit(DEFAULT_WEIGHT),
        }
    }

    pub fn with_weight(mut self, weight: S) -> Self {
        self.weight = weight;
        self
    }

    pub fn resolve(&self, len: usize) -> Result<usize> {
        let idx = if self.index < 0 {
            len as isize + self.index
        } else {
            self.index
        };
        if idx < 0 || idx as usize >= len {
            return Err(Error::param(format!(
                "constraint index {} out of range for {len} samples",
                self.index
            )));
        }
        Ok(idx as usize)
    }
}

/// JSON form of a constraint file entry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstraintSpec {
    pub index: isize,
    pub target: Vec<f64>,
    #[serde(default = "default_weight")]
    pub weight: f64,
}

fn default_weight() -> f64 {
    DEFAULT_WEIGHT
}

impl ConstraintSpec {
    pub fn to_constraint<S: Scalar>(&self) -> Constraint<S> {
        Constraint {
            index: self.index,
            target: self.target.iter().map(|&v| S::lit(v)).collect(),
            weight: S::lit(self.weight),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EditResult<S = f64> {
    pub edited: Trajectory<S>,
    /// Largest distance between a constrained sample and its target.
    pub constraint_residual: S,
    /// Edited arc length over original arc length.
    pub length_ratio: S,
}

/// Rows of the path Laplacian as `(column, value)` pairs. Interior rows are
/// `(-0.5, 1, -0.5)`; the end rows are `0.5 * (1, -1)` and `0.5 * (-1, 1)`.
fn laplacian_row<S: Scalar>(len: usize, i: usize) -> Vec<(usize, S)> {
    let half = S::lit(0.5);
    if i == 0 {
        vec![(0, half), (1, -half)]
    } else if i == len - 1 {
        vec![(len - 2, -half), (len - 1, half)]
    } else {
        vec![(i - 1, -half), (i, S::one()), (i + 1, -half)]
    }
}

/// `L x` for one coordinate column.
pub fn apply_laplacian<S: Scalar>(x: &[S]) -> Vec<S> {
    let len = x.len();
    (0..len)
        .map(|i| laplacian_row::<S>(len, i).iter().map(|&(c, v)| v * x[c]).sum())
        .collect()
}

fn check_constraints<S: Scalar>(
    len: usize,
    dim: usize,
    constraints: &[Constraint<S>],
) -> Result<Vec<(usize, Vec<S>, S)>> {
    if constraints.is_empty() {
        return Err(Error::param("at least one constraint is required"));
    }
    let mut resolved: Vec<(usize, Vec<S>, S)> = Vec::with_capacity(constraints.len());
    for c in constraints {
        if c.target.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: c.target.len(),
            });
        }
        if !(c.weight > S::zero()) || !c.weight.is_finite() {
            return Err(Error::param("constraint weight must be positive"));
        }
        if c.target.iter().any(|v| !v.is_finite()) {
            return Err(Error::param("constraint target must be finite"));
        }
        let idx = c.resolve(len)?;
        if let Some((_, t, _)) = resolved.iter().find(|(i, _, _)| *i == idx) {
            if *t != c.target {
                return Err(Error::ConflictingConstraints { index: idx });
            }
        }
        resolved.push((idx, c.target.clone(), c.weight));
    }
    Ok(resolved)
}

/// Minimizes `|L P' - L P|^2 + sum_c w_c^2 |P'[t_c] - target_c|^2` per dimension.
pub fn edit<S: Scalar>(prim: &Trajectory<S>, constraints: &[Constraint<S>]) -> Result<EditResult<S>> {
    let len = prim.len();
    let dim = prim.dim();
    if len < 3 {
        return Err(Error::InvalidTrajectory(format!(
            "editing needs at least 3 samples, got {len}"
        )));
    }
    let resolved = check_constraints(len, dim, constraints)?;

    // Normal matrix L^T L + sum w^2 e_t e_t^T, pentadiagonal.
    let mut normal = SymBand::zeros(len, 2);
    for i in 0..len {
        let row = laplacian_row::<S>(len, i);
        for &(a, va) in &row {
            for &(b, vb) in &row {
                if a >= b {
                    normal.add(a, b, va * vb);
                }
            }
        }
    }
    for (idx, _, w) in &resolved {
        normal.add(*idx, *idx, *w * *w);
    }
    let chol = normal.cholesky().ok_or(Error::Singular)?;

    let mut out = vec![S::zero(); len * dim];
    for d in 0..dim {
        let col = prim.column(d);
        let delta = apply_laplacian(&col);
        // rhs = L^T delta + sum w^2 target
        let mut rhs = vec![S::zero(); len];
        for (i, &di) in delta.iter().enumerate() {
            for (c, v) in laplacian_row::<S>(len, i) {
                rhs[c] += v * di;
            }
        }
        for (idx, target, w) in &resolved {
            rhs[*idx] += *w * *w * target[d];
        }
        let mut x = chol.solve(&rhs);
        // one round of iterative refinement
        let ax = normal.mul_vec(&x);
        let r: Vec<S> = rhs.iter().zip(&ax).map(|(b, a)| *b - *a).collect();
        let dx = chol.solve(&r);
        x.iter_mut().zip(&dx).for_each(|(v, e)| *v += *e);
        for (i, v) in x.into_iter().enumerate() {
            out[i * dim + d] = v;
        }
    }

    let edited = Trajectory::new(out, dim, prim.dt(), prim.dim_names().to_vec())?;
    let constraint_residual = resolved
        .iter()
        .map(|(idx, target, _)| dist(edited.row(*idx), target))
        .fold(S::zero(), S::max);
    let original = arc_length(prim);
    let length_ratio = if original > S::zero() {
        arc_length(&edited) / original
    } else {
        S::infinity()
    };
    Ok(EditResult {
        edited,
        constraint_residual,
        length_ratio,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Ranking {
    /// Smallest `|length_ratio - 1|` first.
    #[default]
    LeastDistortion,
    /// Shortest edited curve first.
    Shortest,
}

#[derive(Debug, Clone)]
pub struct Candidate<S = f64> {
    pub rank: usize,
    pub id: String,
    pub result: EditResult<S>,
}

#[derive(Debug, Clone, Default)]
pub struct Selection<S = f64> {
    pub ranked: Vec<Candidate<S>>,
    /// Primitives whose edit failed, with the reason.
    pub errors: Vec<(String, String)>,
}

/// Edits every primitive under the shared constraints and keeps the best `top_k`.
pub fn select_candidates<S: Scalar>(
    prims: &[(String, Trajectory<S>)],
    constraints: &[Constraint<S>],
    top_k: usize,
    ranking: Ranking,
) -> Result<Selection<S>> {
    if prims.is_empty() {
        return Err(Error::param("no primitives to select from"));
    }
    if top_k == 0 {
        return Err(Error::param("top_k must be at least 1"));
    }
    let mut ok: Vec<(String, EditResult<S>, S)> = Vec::new();
    let mut errors = Vec::new();
    for (id, t) in prims {
        match edit(t, constraints) {
            Ok(r) => {
                let len = arc_length(&r.edited);
                ok.push((id.clone(), r, len));
            }
            Err(e) => errors.push((id.clone(), e.to_string())),
        }
    }
    let key = |r: &EditResult<S>| match ranking {
        Ranking::LeastDistortion => (r.length_ratio - S::one()).abs(),
        Ranking::Shortest => S::zero(),
    };
    ok.sort_by(|a, b| {
        key(&a.1)
            .partial_cmp(&key(&b.1))
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.2.partial_cmp(&b.2).unwrap_or(std::cmp::Ordering::Equal))
            .then(a.0.cmp(&b.0))
    });
    let ranked = ok
        .into_iter()
        .take(top_k)
        .enumerate()
        .map(|(i, (id, result, _))| Candidate {
            rank: i + 1,
            id,
            result,
        })
        .collect();
    Ok(Selection { ranked, errors })
}
