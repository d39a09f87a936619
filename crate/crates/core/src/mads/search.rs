use alloc::vec;
use alloc::vec::Vec;

use super::mesh::MeshState;
use crate::eval::{Cache, Status};
use crate::linalg;
use crate::space::{Point, SpaceDefinition};

/// Extrapolates the last successful step: `project(incumbent + 2 * step)`.
pub fn speculative_search(
    space: &SpaceDefinition,
    incumbent: &Point,
    last_success_step: Option<&[f64]>,
) -> Vec<Point> {
    let Some(step) = last_success_step else {
        return Vec::new();
    };
    let raw: Vec<f64> = incumbent
        .values()
        .iter()
        .zip(step)
        .map(|(x, s)| x + 2.0 * s)
        .collect();
    match space.project(&raw) {
        Ok(p) if p.key() != incumbent.key() => vec![p],
        _ => Vec::new(),
    }
}

/// Rounds `x` to the mesh centered on `center`, then onto the variable grid.
fn to_mesh(space: &SpaceDefinition, mesh: &MeshState, center: &Point, x: &[f64]) -> Point {
    let raw: Vec<f64> = x
        .iter()
        .zip(center.values())
        .zip(mesh.delta())
        .map(|((x, c), d)| c + d * libm::round((x - c) / d))
        .collect();
    space.project(&raw).expect("dimension checked by caller")
}

/// Fitted separable quadratic `a0 + sum_i (b_i u_i + c_i u_i^2)` in scaled
/// coordinates `u_i = (x_i - center_i) / frame_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct SeparableQuadratic {
    /// Constant term.
    pub a0: f64,
    /// Linear coefficients.
    pub b: Vec<f64>,
    /// Quadratic coefficients.
    pub c: Vec<f64>,
}

impl SeparableQuadratic {
    /// Least-squares fit; `None` when the normal equations are singular.
    pub fn fit(samples: &[(&[f64], f64)]) -> Option<Self> {
        let n = samples.first()?.0.len();
        let features: Vec<Vec<f64>> = samples
            .iter()
            .map(|(u, _)| {
                let mut row = Vec::with_capacity(2 * n + 1);
                row.push(1.0);
                row.extend(u.iter().copied());
                row.extend(u.iter().map(|x| x * x));
                row
            })
            .collect();
        let targets: Vec<f64> = samples.iter().map(|(_, f)| *f).collect();
        let theta = linalg::least_squares(&features, &targets)?;
        if theta.iter().any(|t| !t.is_finite()) {
            return None;
        }
        Some(SeparableQuadratic {
            a0: theta[0],
            b: theta[1..=n].to_vec(),
            c: theta[n + 1..].to_vec(),
        })
    }

    /// Minimizer over the box `lo <= u <= hi`, coordinate by coordinate.
    /// Concave or flat coordinates pick the better endpoint (lower on ties).
    pub fn box_minimizer(&self, lo: &[f64], hi: &[f64]) -> Vec<f64> {
        (0..self.b.len())
            .map(|i| {
                let (b, c) = (self.b[i], self.c[i]);
                if c > 0.0 {
                    (-b / (2.0 * c)).clamp(lo[i], hi[i])
                } else {
                    let q = |u: f64| b * u + c * u * u;
                    if q(hi[i]) < q(lo[i]) {
                        hi[i]
                    } else {
                        lo[i]
                    }
                }
            })
            .collect()
    }
}

/// Surrogate search on cached evaluations around the incumbent.
///
/// Uses the ok-status cache points inside `incumbent +- 2 * frame`. With at
/// least `2n + 1` of them, fits a [`SeparableQuadratic`] and proposes its box
/// minimizer, then the best non-incumbent local cache point, both rounded to
/// the mesh. Candidates already in the cache are dropped.
pub fn quadratic_model_search(
    cache: &Cache,
    incumbent: &Point,
    mesh: &MeshState,
    space: &SpaceDefinition,
) -> Vec<Point> {
    let n = space.dim();
    let frame = mesh.frame();
    let center = incumbent.values();
    let local: Vec<(Vec<f64>, f64, &Point)> = cache
        .records()
        .iter()
        .filter(|r| r.result.status == Status::Ok && r.result.objective.is_finite())
        .filter(|r| {
            r.point
                .values()
                .iter()
                .zip(center)
                .zip(frame)
                .all(|((x, c), f)| (x - c).abs() <= 2.0 * f)
        })
        .map(|r| {
            let u = r
                .point
                .values()
                .iter()
                .zip(center)
                .zip(frame)
                .map(|((x, c), f)| (x - c) / f)
                .collect();
            (u, r.result.objective, &r.point)
        })
        .collect();
    if local.len() < 2 * n + 1 {
        return Vec::new();
    }
    let samples: Vec<(&[f64], f64)> = local.iter().map(|(u, f, _)| (u.as_slice(), *f)).collect();
    let Some(model) = SeparableQuadratic::fit(&samples) else {
        return Vec::new();
    };
    let (lo, hi): (Vec<f64>, Vec<f64>) = space
        .variables()
        .iter()
        .zip(center)
        .zip(frame)
        .map(|((v, c), f)| (((v.lower - c) / f).max(-2.0), ((v.upper - c) / f).min(2.0)))
        .unzip();
    let u_star = model.box_minimizer(&lo, &hi);
    let x_star: Vec<f64> = u_star
        .iter()
        .zip(center)
        .zip(frame)
        .map(|((u, c), f)| c + u * f)
        .collect();

    let mut out: Vec<Point> = Vec::new();
    let mut push = |p: Point| {
        if !cache.contains(&p) && p.key() != incumbent.key() && !out.contains(&p) {
            out.push(p);
        }
    };
    push(to_mesh(space, mesh, incumbent, &x_star));
    let incumbent_key = incumbent.key();
    let best_other = local
        .iter()
        .filter(|(_, _, p)| p.key() != incumbent_key)
        .fold(None, |best: Option<&(Vec<f64>, f64, &Point)>, item| match best {
            Some(b) if b.1 <= item.1 => Some(b),
            _ => Some(item),
        });
    if let Some((_, _, p)) = best_other {
        push(to_mesh(space, mesh, incumbent, p.values()));
    }
    out
}
