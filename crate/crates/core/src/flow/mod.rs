//! Desk-scale diffusion trainer: rectified-flow (velocity) and
//! noise-prediction objectives on a two-layer conv denoiser, trained with
//! plain gradient descent on the band-weighted wavelet loss.

mod data;
mod model;
mod train;

pub use data::SyntheticDataset;
pub use model::{Denoiser, ForwardCache};
pub use train::{loss_and_grad, train, Batch, CurvePoint, LossPath, TrainConfig, TrainReport, WeightMode};

use core::f64::consts::PI;

use num_traits::Float;

use crate::tensor::Tensor;
use crate::{Error, Result};

/// Interpolant coefficients `z_t = alpha(t) x0 + sigma(t) eps`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Schedule {
    /// `alpha = 1 - t`, `sigma = t`.
    #[default]
    RectifiedFlow,
    /// `alpha = cos(pi t / 2)`, `sigma = sin(pi t / 2)`.
    Cosine,
}

impl Schedule {
    pub fn alpha(self, t: f64) -> f64 {
        match self {
            Schedule::RectifiedFlow => 1.0 - t,
            Schedule::Cosine => Float::cos(PI * t / 2.0),
        }
    }

    pub fn sigma(self, t: f64) -> f64 {
        match self {
            Schedule::RectifiedFlow => t,
            Schedule::Cosine => Float::sin(PI * t / 2.0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Objective {
    /// Predict `eps - x0`.
    #[default]
    Velocity,
    /// Predict `eps`.
    Noise,
}

/// `alpha(t) * x0 + sigma(t) * eps`.
pub fn forward_diffuse<T: Float>(x0: &Tensor<T>, eps: &Tensor<T>, t: f64, schedule: Schedule) -> Result<Tensor<T>> {
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::contract("diffusion time must lie in [0, 1]"));
    }
    let a = T::from(schedule.alpha(t)).unwrap_or_else(T::nan);
    let s = T::from(schedule.sigma(t)).unwrap_or_else(T::nan);
    x0.zip_with(eps, |x, e| a * x + s * e)
}

/// Regression target of `objective`.
pub fn target<T: Float>(objective: Objective, x0: &Tensor<T>, eps: &Tensor<T>) -> Result<Tensor<T>> {
    match objective {
        Objective::Velocity => eps.sub(x0),
        Objective::Noise => {
            if x0.shape() != eps.shape() {
                return Err(Error::contract("x0 and eps shapes differ"));
            }
            Ok(eps.clone())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pair() -> (Tensor<f64>, Tensor<f64>) {
        (
            Tensor::from_fn((2, 4, 4), |c, y, x| (c + y * 3 + x) as f64 * 0.1 - 0.5),
            Tensor::from_fn((2, 4, 4), |c, y, x| ((c * 7 + y * 5 + x * 3) % 11) as f64 * 0.2 - 1.0),
        )
    }

    #[test]
    fn rectified_endpoints() {
        let s = Schedule::RectifiedFlow;
        assert_eq!((s.alpha(0.0), s.sigma(0.0)), (1.0, 0.0));
        assert_eq!((s.alpha(1.0), s.sigma(1.0)), (0.0, 1.0));
        let (x0, eps) = pair();
        assert_eq!(forward_diffuse(&x0, &eps, 0.0, s).unwrap(), x0);
        assert_eq!(forward_diffuse(&x0, &eps, 1.0, s).unwrap(), eps);
        let mid = forward_diffuse(&x0, &eps, 0.5, s).unwrap();
        for ((m, a), b) in mid.as_slice().iter().zip(x0.as_slice()).zip(eps.as_slice()) {
            assert_eq!(*m, 0.5 * a + 0.5 * b);
        }
        assert!(forward_diffuse(&x0, &eps, 1.5, s).is_err());
    }

    #[test]
    fn targets() {
        let (x0, eps) = pair();
        assert!(target(Objective::Velocity, &x0, &x0)
            .unwrap()
            .as_slice()
            .iter()
            .all(|&v| v == 0.0));
        assert_eq!(target(Objective::Noise, &x0, &eps).unwrap(), eps);
        let zero = Tensor::zeros(x0.shape());
        assert_eq!(
            target(Objective::Velocity, &zero, &eps).unwrap(),
            target(Objective::Noise, &x0, &eps).unwrap()
        );
    }
}
