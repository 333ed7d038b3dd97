use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tensor::ParamSet;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdamConfig {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        AdamConfig {
            lr: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

/// First and second moment estimates, one pair per parameter.
#[derive(Clone, Debug, PartialEq)]
pub struct AdamState {
    pub config: AdamConfig,
    pub t: u64,
    pub m: ParamSet,
    pub v: ParamSet,
}

impl AdamState {
    pub fn new(config: AdamConfig, params: &ParamSet) -> Self {
        AdamState {
            config,
            t: 0,
            m: params.zeros_like(),
            v: params.zeros_like(),
        }
    }

    /// One bias-corrected Adam update. Rejects the whole step, leaving
    /// parameters untouched, if any gradient entry is non-finite.
    pub fn step(&mut self, params: &mut ParamSet, grads: &ParamSet) -> Result<()> {
        for (name, g) in grads.iter() {
            if !g.is_finite() {
                return Err(Error::Optimizer { param: name.into() });
            }
        }
        let AdamConfig {
            lr,
            beta1,
            beta2,
            eps,
        } = self.config;
        self.t += 1;
        let c1 = 1.0 - beta1.powi(self.t as i32);
        let c2 = 1.0 - beta2.powi(self.t as i32);

        for (name, theta) in params.iter_mut() {
            let g = grads
                .get(name)
                .ok_or_else(|| Error::Contract(format!("no gradient for parameter {name}")))?;
            if g.shape() != theta.shape() {
                return Err(Error::Shape {
                    op: "adam",
                    left: theta.shape(),
                    right: g.shape(),
                });
            }
            let m = self.m.get_mut(name).expect("moments track params");
            for (mi, &gi) in m.data_mut().iter_mut().zip(g.data()) {
                *mi = beta1 * *mi + (1.0 - beta1) * gi;
            }
            let v = self.v.get_mut(name).expect("moments track params");
            for (vi, &gi) in v.data_mut().iter_mut().zip(g.data()) {
                *vi = beta2 * *vi + (1.0 - beta2) * gi * gi;
            }
            let (m, v) = (self.m.get(name).unwrap(), self.v.get(name).unwrap());
            for ((p, &mi), &vi) in theta.data_mut().iter_mut().zip(m.data()).zip(v.data()) {
                *p -= lr * (mi / c1) / ((vi / c2).sqrt() + eps);
            }
        }
        Ok(())
    }
}

/// Global L2 norm over every gradient entry.
pub fn global_norm(grads: &ParamSet) -> f64 {
    grads.iter().map(|(_, g)| g.sum_squares()).sum::<f64>().sqrt()
}

/// Rescales `grads` so their global norm is at most `max_norm`. Returns the
/// norm before clipping and whether it fired.
pub fn clip_global_norm(grads: &mut ParamSet, max_norm: f64) -> (f64, bool) {
    let norm = global_norm(grads);
    if norm > max_norm && norm > 0.0 {
        let k = max_norm / norm;
        for (_, g) in grads.iter_mut() {
            g.scale_in_place(k);
        }
        (norm, true)
    } else {
        (norm, false)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::{Matrix, Rng};
    use proptest::prelude::*;

    fn single(name: &str, v: f64) -> ParamSet {
        [(name.to_string(), Matrix::filled(1, 1, v))].into_iter().collect()
    }

    #[test]
    fn zero_gradient_leaves_params_unchanged() {
        let mut rng = Rng::new(0);
        let mut p: ParamSet = [(
            "w".to_string(),
            Matrix::from_vec(2, 3, (0..6).map(|_| rng.uniform(-1.0, 1.0)).collect()).unwrap(),
        )]
        .into_iter()
        .collect();
        let before = p.clone();
        let mut s = AdamState::new(AdamConfig::default(), &p);
        let zeros = p.zeros_like();
        for _ in 0..50 {
            s.step(&mut p, &zeros).unwrap();
        }
        assert_eq!(p, before);
        assert_eq!(s.t, 50);
    }

    #[test]
    fn first_step_moves_by_learning_rate() {
        let mut p = single("theta", 1.0);
        let mut s = AdamState::new(
            AdamConfig {
                lr: 0.1,
                ..Default::default()
            },
            &p,
        );
        s.step(&mut p, &single("theta", 1.0)).unwrap();
        // m_hat = 1, v_hat = 1, step = 0.1 / (1 + 1e-8)
        let expect = 1.0 - 0.1 / (1.0 + 1e-8);
        assert!((p.get("theta").unwrap().data()[0] - expect).abs() < 1e-15);
    }

    #[test]
    fn converges_on_quadratic_bowl() {
        let mut p = single("theta", 1.0);
        let mut s = AdamState::new(
            AdamConfig {
                lr: 0.05,
                ..Default::default()
            },
            &p,
        );
        for _ in 0..500 {
            let th = p.get("theta").unwrap().data()[0];
            s.step(&mut p, &single("theta", 2.0 * th)).unwrap();
        }
        assert!(p.get("theta").unwrap().data()[0].abs() < 1e-3);
    }

    #[test]
    fn non_finite_gradient_names_parameter() {
        let mut p = single("theta", 1.0);
        p.insert("other", Matrix::zeros(1, 1));
        let mut grads = single("theta", 0.0);
        grads.insert("other", Matrix::filled(1, 1, f64::NAN));
        let before = p.clone();
        let mut s = AdamState::new(AdamConfig::default(), &p);
        match s.step(&mut p, &grads) {
            Err(Error::Optimizer { param }) => assert_eq!(param, "other"),
            other => panic!("unexpected {other:?}"),
        }
        assert_eq!(p, before);
        assert_eq!(s.t, 0);
    }

    proptest! {
        #[test]
        fn clipping_never_grows_and_keeps_direction(
            xs in proptest::collection::vec(-10.0f64..10.0, 1..20),
            max_norm in 0.01f64..5.0,
        ) {
            let g: ParamSet = [("g".to_string(), Matrix::column(&xs))].into_iter().collect();
            let mut clipped = g.clone();
            let (before, fired) = clip_global_norm(&mut clipped, max_norm);
            let after = global_norm(&clipped);
            prop_assert!(after <= before + 1e-12);
            if fired {
                prop_assert!((after - max_norm).abs() < 1e-9);
                let a = g.get("g").unwrap();
                let b = clipped.get("g").unwrap();
                let dot: f64 = a.data().iter().zip(b.data()).map(|(x, y)| x * y).sum();
                let cos = dot / (before * after);
                prop_assert!((cos - 1.0).abs() < 1e-12);
            } else {
                prop_assert_eq!(&clipped, &g);
            }
        }
    }
}
