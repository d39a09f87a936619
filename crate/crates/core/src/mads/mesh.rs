use alloc::vec::Vec;

use crate::space::SpaceDefinition;

/// Per-variable mesh sizes (`delta`) and frame sizes (`frame`).
///
/// Continuous variables use `delta = min(frame, frame^2 / range)` so the mesh
/// refines faster than the frame. Discrete variables keep `delta` at the
/// largest multiple of their granularity not exceeding `frame`.
#[derive(Debug, Clone, PartialEq)]
pub struct MeshState {
    delta: Vec<f64>,
    frame: Vec<f64>,
    tau: f64,
    granularity: Vec<Option<f64>>,
    range: Vec<f64>,
}

impl MeshState {
    /// Initial mesh: `frame_i = fraction * range_i`, floored at the granularity.
    pub fn new(space: &SpaceDefinition, initial_frame_fraction: f64, tau: f64) -> Self {
        let frame = space
            .variables()
            .iter()
            .map(|v| initial_frame_fraction * v.range())
            .collect();
        Self::with_frame(space, frame, tau)
    }

    /// Mesh with the given frame sizes; mesh sizes follow from the coupling rule.
    pub fn with_frame(space: &SpaceDefinition, frame: Vec<f64>, tau: f64) -> Self {
        let mut mesh = MeshState {
            delta: Vec::new(),
            frame,
            tau,
            granularity: space.variables().iter().map(|v| v.kind.granularity()).collect(),
            range: space.variables().iter().map(|v| v.range()).collect(),
        };
        for i in 0..mesh.frame.len() {
            if mesh.range[i] <= 0.0 {
                // fixed variable: any positive size works, projection pins it
                mesh.frame[i] = mesh.granularity[i].unwrap_or(1.0);
            } else if let Some(g) = mesh.granularity[i] {
                mesh.frame[i] = mesh.frame[i].max(g);
            }
        }
        mesh.refresh_delta();
        mesh
    }

    fn refresh_delta(&mut self) {
        self.delta = (0..self.frame.len())
            .map(|i| {
                let frame = self.frame[i];
                match self.granularity[i] {
                    Some(g) => (g * libm::floor(frame / g)).max(g),
                    None if self.range[i] <= 0.0 => frame,
                    None => frame.min(frame * frame / self.range[i]),
                }
            })
            .collect();
    }

    /// Mesh sizes.
    pub fn delta(&self) -> &[f64] {
        &self.delta
    }

    /// Frame sizes.
    pub fn frame(&self) -> &[f64] {
        &self.frame
    }

    /// Mesh adjustment base.
    pub fn tau(&self) -> f64 {
        self.tau
    }

    /// Granularity of each variable (`None` when continuous).
    pub fn granularity(&self) -> &[Option<f64>] {
        &self.granularity
    }

    /// Variable ranges.
    pub fn range(&self) -> &[f64] {
        &self.range
    }

    /// Enlarges the frame after a success, shrinks it after a failure.
    pub fn update(&mut self, success: bool) {
        for i in 0..self.frame.len() {
            if self.range[i] <= 0.0 {
                continue;
            }
            let f = if success {
                (self.tau * self.frame[i]).min(self.range[i])
            } else {
                self.frame[i] / self.tau
            };
            self.frame[i] = match self.granularity[i] {
                Some(g) => f.max(g),
                None => f,
            };
        }
        self.refresh_delta();
    }

    /// True if every non-fixed continuous frame is below `min_frame`.
    /// `None` when the space has no such variable.
    pub fn continuous_converged(&self, min_frame: f64) -> Option<bool> {
        let mut any = false;
        for i in 0..self.frame.len() {
            if self.granularity[i].is_none() && self.range[i] > 0.0 {
                any = true;
                if self.frame[i] >= min_frame {
                    return Some(false);
                }
            }
        }
        any.then_some(true)
    }

    /// True if every discrete frame sits at its granularity floor.
    pub fn discrete_at_floor(&self) -> bool {
        self.granularity
            .iter()
            .zip(&self.frame)
            .all(|(g, &f)| g.is_none_or(|g| f <= g))
    }
}

/// Returns the mesh after one iteration outcome.
pub fn update_mesh(mesh: &MeshState, success: bool) -> MeshState {
    let mut next = mesh.clone();
    next.update(success);
    next
}
