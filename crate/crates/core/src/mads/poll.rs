use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use rand_distr::StandardNormal;

use super::mesh::MeshState;
use crate::space::{Point, SpaceDefinition};

/// Draws a unit vector from the generator.
pub fn random_unit_vector<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        let norm = libm::sqrt(v.iter().map(|x| x * x).sum::<f64>());
        if norm > 1e-12 {
            return v.into_iter().map(|x| x / norm).collect();
        }
    }
}

/// `2n` mesh offsets from the Householder matrix `I - 2 v v^T`.
///
/// Row `i` is normalized by its largest magnitude, coordinate `j` is scaled by
/// the frame size and rounded to a multiple of the mesh size. The rows and
/// their negations are returned, rows first.
pub fn householder_offsets(mesh: &MeshState, v: &[f64]) -> Vec<Vec<f64>> {
    let n = v.len();
    let (delta, frame) = (mesh.delta(), mesh.frame());
    let mut rows = Vec::with_capacity(2 * n);
    for i in 0..n {
        let h: Vec<f64> = (0..n)
            .map(|j| if i == j { 1.0 } else { 0.0 } - 2.0 * v[i] * v[j])
            .collect();
        let inf_norm = h.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        rows.push(
            (0..n)
                .map(|j| delta[j] * libm::round(frame[j] / delta[j] * h[j] / inf_norm))
                .collect::<Vec<f64>>(),
        );
    }
    let negated: Vec<Vec<f64>> = rows
        .iter()
        .map(|r| r.iter().map(|x| if *x == 0.0 { 0.0 } else { -x }).collect())
        .collect();
    rows.extend(negated);
    rows
}

/// Poll offsets for the current mesh, using a fresh random direction.
pub fn poll_directions<R: Rng + ?Sized>(mesh: &MeshState, rng: &mut R) -> Vec<Vec<f64>> {
    let v = random_unit_vector(mesh.delta().len(), rng);
    householder_offsets(mesh, &v)
}

/// `center + offset`, with each coordinate pulled back toward the center by
/// whole mesh steps until it is inside the bounds. `None` if nothing moved.
pub fn mesh_point(
    space: &SpaceDefinition,
    mesh: &MeshState,
    center: &Point,
    offset: &[f64],
) -> Option<Point> {
    let delta = mesh.delta();
    let mut out = vec![0.0; offset.len()];
    for (j, var) in space.variables().iter().enumerate() {
        let c = center.values()[j];
        let mut x = c + offset[j];
        if x > var.upper {
            x = c + delta[j] * libm::floor((var.upper - c) / delta[j]);
        } else if x < var.lower {
            x = c + delta[j] * libm::ceil((var.lower - c) / delta[j]);
        }
        out[j] = var.project_value(x);
    }
    let p = Point::new(out);
    (p.key() != center.key()).then_some(p)
}
