use super::{Mode, ModelError};
use crate::matrix::squared_distance;

fn check_dims(a: &[f64], b: &[f64]) -> Result<(), ModelError> {
    if a.len() != b.len() {
        return Err(ModelError::DimMismatch { expected: a.len(), found: b.len() });
    }
    Ok(())
}

/// Squared Euclidean reconstruction error, summed over dimensions.
pub fn loss_ae(x: &[f64], reconstruction: &[f64]) -> Result<f64, ModelError> {
    check_dims(x, reconstruction)?;
    Ok(squared_distance(x, reconstruction))
}

fn mean_squared_distance<R: AsRef<[f64]>>(reconstruction: &[f64], neighbors: &[R]) -> Result<f64, ModelError> {
    if neighbors.is_empty() {
        return Err(ModelError::EmptyNeighborhood);
    }
    let mut total = 0.0;
    for n in neighbors {
        let n = n.as_ref();
        check_dims(reconstruction, n)?;
        total += squared_distance(n, reconstruction);
    }
    Ok(total / neighbors.len() as f64)
}

/// Mean squared distance from a reconstruction to its temporal neighbors' inputs.
pub fn loss_tc<R: AsRef<[f64]>>(reconstruction: &[f64], temporal_neighbors: &[R]) -> Result<f64, ModelError> {
    mean_squared_distance(reconstruction, temporal_neighbors)
}

/// Mean squared distance from a reconstruction to its feature-space neighbors' inputs.
pub fn loss_lp<R: AsRef<[f64]>>(reconstruction: &[f64], feature_neighbors: &[R]) -> Result<f64, ModelError> {
    mean_squared_distance(reconstruction, feature_neighbors)
}

/// The three per-sample loss terms.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SampleLosses {
    pub ae: f64,
    pub tc: f64,
    pub lp: f64,
}

/// Coefficients of the three terms in the per-sample objective.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossWeights {
    pub ae: f64,
    pub tc: f64,
    pub lp: f64,
}

impl LossWeights {
    /// `(1 − α − β, α, β)`, rejecting negative weights or `α + β > 1`.
    pub fn joint(alpha: f64, beta: f64) -> Result<Self, ModelError> {
        if !(alpha >= 0.0 && beta >= 0.0 && alpha + beta <= 1.0) {
            return Err(ModelError::InvalidWeights { alpha, beta });
        }
        Ok(Self { ae: 1.0 - alpha - beta, tc: alpha, lp: beta })
    }

    /// Weights for a training mode. Ablation modes zero the unused term, and
    /// `AeOnly` is exactly `joint(0, 0)`.
    pub fn for_mode(mode: Mode, alpha: f64, beta: f64) -> Result<Self, ModelError> {
        // validate the configured pair even when a mode ignores part of it
        Self::joint(alpha, beta)?;
        match mode {
            Mode::Joint => Self::joint(alpha, beta),
            Mode::AeOnly => Self::joint(0.0, 0.0),
            Mode::TcAe => Self::joint(alpha, 0.0),
            Mode::LpAe => Self::joint(0.0, beta),
        }
    }

    pub fn combine(&self, l: SampleLosses) -> f64 {
        self.ae * l.ae + self.tc * l.tc + self.lp * l.lp
    }
}

/// `(1 − α − β)·ae + α·tc + β·lp` for one sample.
pub fn loss_joint(losses: SampleLosses, alpha: f64, beta: f64) -> Result<f64, ModelError> {
    Ok(LossWeights::joint(alpha, beta)?.combine(losses))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ae_examples() {
        assert_eq!(loss_ae(&[1.0, 2.0], &[1.0, 2.0]).unwrap(), 0.0);
        assert_eq!(loss_ae(&[1.0, 0.0], &[0.0, 0.0]).unwrap(), 1.0);
        assert_eq!(loss_ae(&[1.0, 2.0], &[3.0, 5.0]).unwrap(), 13.0);
        assert!(loss_ae(&[1.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn neighbor_examples() {
        assert_eq!(loss_tc(&[1.0, 1.0], &[[1.0, 1.0], [1.0, 1.0]]).unwrap(), 0.0);
        assert_eq!(loss_tc(&[0.0, 0.0], &[[1.0, 0.0], [0.0, 1.0]]).unwrap(), 1.0);
        assert_eq!(loss_tc(&[0.5, 2.0], &[[3.0, 1.0]]).unwrap(), loss_ae(&[3.0, 1.0], &[0.5, 2.0]).unwrap());
        assert_eq!(loss_lp(&[1.0], &[[0.0], [2.0]]).unwrap(), 1.0);
        assert_eq!(loss_lp(&[4.0], &[[4.0]]).unwrap(), 0.0);
        let x = [0.3, -1.0];
        let recon = [1.0, 1.0];
        assert_eq!(loss_lp(&recon, &[x]).unwrap(), loss_ae(&x, &recon).unwrap());
        assert!(matches!(loss_lp::<[f64; 1]>(&[1.0], &[]), Err(ModelError::EmptyNeighborhood)));
    }

    #[test]
    fn joint_examples() {
        let l = SampleLosses { ae: 2.0, tc: 4.0, lp: 6.0 };
        assert_eq!(loss_joint(l, 0.0, 0.0).unwrap(), 2.0);
        assert_eq!(loss_joint(l, 1.0, 0.0).unwrap(), 4.0);
        assert_eq!(loss_joint(l, 0.25, 0.25).unwrap(), 3.5);
        assert!(matches!(loss_joint(l, 0.7, 0.5), Err(ModelError::InvalidWeights { .. })));
        assert!(matches!(loss_joint(l, -0.1, 0.0), Err(ModelError::InvalidWeights { .. })));
    }

    #[test]
    fn mode_weights() {
        assert_eq!(LossWeights::for_mode(Mode::AeOnly, 0.3, 0.2).unwrap(), LossWeights::joint(0.0, 0.0).unwrap());
        let tc = LossWeights::for_mode(Mode::TcAe, 0.3, 0.2).unwrap();
        assert_eq!((tc.tc, tc.lp), (0.3, 0.0));
        let lp = LossWeights::for_mode(Mode::LpAe, 0.3, 0.2).unwrap();
        assert_eq!((lp.tc, lp.lp), (0.0, 0.2));
    }
}
