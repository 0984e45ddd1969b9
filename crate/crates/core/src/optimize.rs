//! Damped Gauss–Newton least squares over SE(2) pose graphs.

use std::collections::{BTreeMap, BTreeSet};
use std::ops::AddAssign;

use nalgebra::{DVector, Matrix2, Matrix3, Vector2, Vector3};
use nalgebra_sparse::factorization::CscCholesky;
use nalgebra_sparse::{CooMatrix, CscMatrix};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{SlamGraph, VertexId};
use crate::pose::{normalize_angle, Pose2};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OptimizerConfig {
    pub max_iters: usize,
    /// Stop once an accepted step lowers chi² by less than this fraction.
    pub tol: f64,
    pub initial_lambda: f64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            max_iters: 100,
            tol: 1e-12,
            initial_lambda: 1e-6,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimizationResult {
    pub iterations: usize,
    pub initial_chi2: f64,
    pub final_chi2: f64,
    pub converged: bool,
}

const MAX_LAMBDA: f64 = 1e12;

/// Minimizes Σ rᵀΩr over all edges, holding the vertices in `fixed` constant.
///
/// Each iteration solves `(H + λ·diag(H)) δ = −b` with a sparse Cholesky
/// factorization over the free vertices. Steps that do not lower chi² are
/// rejected and λ grows tenfold; accepted steps shrink it tenfold.
pub fn optimize(
    graph: &mut SlamGraph,
    fixed: &BTreeSet<VertexId>,
    cfg: &OptimizerConfig,
) -> Result<OptimizationResult> {
    if fixed.is_empty() {
        return Err(Error::NoFixedVertex);
    }
    if let Some(v) = fixed.iter().find(|v| !graph.contains(**v)) {
        return Err(Error::UnknownVertex(*v));
    }
    if !graph.is_connected() {
        return Err(Error::Disconnected);
    }

    let index: BTreeMap<VertexId, usize> = graph
        .vertices()
        .map(|v| v.id())
        .filter(|id| !fixed.contains(id))
        .enumerate()
        .map(|(i, id)| (id, i))
        .collect();
    let mut poses: BTreeMap<VertexId, Pose2> = graph.vertices().map(|v| (v.id(), v.pose())).collect();

    let initial_chi2 = graph.chi2();
    let mut result = OptimizationResult {
        iterations: 0,
        initial_chi2,
        final_chi2: initial_chi2,
        converged: true,
    };
    if index.is_empty() || initial_chi2 == 0.0 {
        return Ok(result);
    }

    let n = 3 * index.len();
    let mut chi2 = initial_chi2;
    let mut lambda = cfg.initial_lambda;
    let mut system = None;
    result.converged = false;

    while result.iterations < cfg.max_iters {
        let (h, b) = match &system {
            Some(s) => s,
            None => system.insert(linearize(graph, &poses, &index, n)),
        };
        result.iterations += 1;

        let step = solve_damped(h, b, lambda, n)?;
        let candidate: BTreeMap<VertexId, Pose2> = poses
            .iter()
            .map(|(id, p)| {
                let p = match index.get(id) {
                    Some(&i) => Pose2::new(p.x + step[3 * i], p.y + step[3 * i + 1], p.theta + step[3 * i + 2]),
                    None => *p,
                };
                (*id, p)
            })
            .collect();
        let new_chi2 = chi2_at(graph, &candidate);

        if new_chi2 < chi2 {
            let rel = (chi2 - new_chi2) / chi2;
            poses = candidate;
            chi2 = new_chi2;
            lambda = (lambda / 10.0).max(1e-15);
            system = None;
            if rel < cfg.tol || chi2 == 0.0 {
                result.converged = true;
                break;
            }
        } else {
            lambda *= 10.0;
            if lambda > MAX_LAMBDA {
                // No descent direction left at any damping: a local minimum.
                result.converged = true;
                break;
            }
        }
    }

    for (id, p) in &poses {
        if index.contains_key(id) {
            graph.set_pose(*id, *p)?;
        }
    }
    result.final_chi2 = chi2;
    Ok(result)
}

fn chi2_at(graph: &SlamGraph, poses: &BTreeMap<VertexId, Pose2>) -> f64 {
    graph
        .edges()
        .iter()
        .map(|e| {
            let r = Vector3::from(crate::graph::edge_residual(
                &poses[&e.from],
                &poses[&e.to],
                &e.relative_pose,
            ));
            r.dot(&(e.information.matrix() * r))
        })
        .sum()
}

/// Residual and Jacobians with respect to additive `(x, y, θ)` increments of both endpoints.
fn residual_and_jacobians(a: &Pose2, b: &Pose2, z: &Pose2) -> (Vector3<f64>, Matrix3<f64>, Matrix3<f64>) {
    let rot_t = |t: f64| {
        let (s, c) = t.sin_cos();
        Matrix2::new(c, s, -s, c)
    };
    let ra_t = rot_t(a.theta);
    let rz_t = rot_t(z.theta);
    let (sa, ca) = a.theta.sin_cos();
    let dra_t = Matrix2::new(-sa, ca, -ca, -sa);
    let dt = Vector2::new(b.x - a.x, b.y - a.y);

    let exy = rz_t * (ra_t * dt - Vector2::new(z.x, z.y));
    let eth = normalize_angle(b.theta - a.theta - z.theta);
    let e = Vector3::new(exy.x, exy.y, eth);

    let mut ja = Matrix3::zeros();
    let m = -(rz_t * ra_t);
    ja.fixed_view_mut::<2, 2>(0, 0).copy_from(&m);
    ja.fixed_view_mut::<2, 1>(0, 2).copy_from(&(rz_t * dra_t * dt));
    ja[(2, 2)] = -1.0;

    let mut jb = Matrix3::zeros();
    jb.fixed_view_mut::<2, 2>(0, 0).copy_from(&(rz_t * ra_t));
    jb[(2, 2)] = 1.0;
    (e, ja, jb)
}

fn linearize(
    graph: &SlamGraph,
    poses: &BTreeMap<VertexId, Pose2>,
    index: &BTreeMap<VertexId, usize>,
    n: usize,
) -> (CooMatrix<f64>, DVector<f64>) {
    let mut h = CooMatrix::new(n, n);
    let mut b = DVector::zeros(n);
    let push_block = |h: &mut CooMatrix<f64>, r: usize, c: usize, m: &Matrix3<f64>| {
        for i in 0..3 {
            for j in 0..3 {
                h.push(3 * r + i, 3 * c + j, m[(i, j)]);
            }
        }
    };
    for e in graph.edges() {
        let (r, ja, jb) = residual_and_jacobians(&poses[&e.from], &poses[&e.to], &e.relative_pose);
        let omega = e.information.matrix();
        let ia = index.get(&e.from).copied();
        let ib = index.get(&e.to).copied();
        if let Some(i) = ia {
            push_block(&mut h, i, i, &(ja.transpose() * omega * ja));
            let g = ja.transpose() * omega * r;
            b.fixed_rows_mut::<3>(3 * i).add_assign(&g);
        }
        if let Some(j) = ib {
            push_block(&mut h, j, j, &(jb.transpose() * omega * jb));
            let g = jb.transpose() * omega * r;
            b.fixed_rows_mut::<3>(3 * j).add_assign(&g);
        }
        if let (Some(i), Some(j)) = (ia, ib) {
            let hij = ja.transpose() * omega * jb;
            push_block(&mut h, i, j, &hij);
            push_block(&mut h, j, i, &hij.transpose());
        }
    }
    (h, b)
}

fn solve_damped(h: &CooMatrix<f64>, b: &DVector<f64>, lambda: f64, n: usize) -> Result<DVector<f64>> {
    let mut damped = h.clone();
    let mut diag = vec![0.0; n];
    for (r, c, v) in h.triplet_iter() {
        if r == c {
            diag[r] += *v;
        }
    }
    for (i, d) in diag.iter().enumerate() {
        damped.push(i, i, lambda * d.max(1e-9));
    }
    let csc = CscMatrix::from(&damped);
    let chol = CscCholesky::factor(&csc).map_err(|e| Error::Solver(format!("{e:?}")))?;
    let rhs = -b;
    let x = chol.solve(&rhs);
    Ok(x.column(0).into_owned())
}
