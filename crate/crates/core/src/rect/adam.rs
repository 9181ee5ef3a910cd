use nalgebra::DMatrix;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AdamConfig {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        AdamConfig {
            lr: 0.001,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

/// Bias-corrected Adam update of one tensor at step `t >= 1`.
pub fn adam_update(
    config: &AdamConfig,
    param: &mut DMatrix<f64>,
    grad: &DMatrix<f64>,
    m: &mut DMatrix<f64>,
    v: &mut DMatrix<f64>,
    t: usize,
) {
    assert!(t >= 1, "adam steps are 1-based");
    let c1 = 1.0 - config.beta1.powi(t as i32);
    let c2 = 1.0 - config.beta2.powi(t as i32);
    for (((p, &g), mi), vi) in param.iter_mut().zip(grad.iter()).zip(m.iter_mut()).zip(v.iter_mut()) {
        *mi = config.beta1 * *mi + (1.0 - config.beta1) * g;
        *vi = config.beta2 * *vi + (1.0 - config.beta2) * g * g;
        let m_hat = *mi / c1;
        let v_hat = *vi / c2;
        *p -= config.lr * m_hat / (v_hat.sqrt() + config.eps);
    }
}

/// Moment buffers for a fixed list of parameter tensors.
#[derive(Clone, Debug)]
pub struct Adam {
    config: AdamConfig,
    first: Vec<DMatrix<f64>>,
    second: Vec<DMatrix<f64>>,
    t: usize,
}

impl Adam {
    pub fn new(config: AdamConfig, shapes: &[(usize, usize)]) -> Self {
        Adam {
            config,
            first: shapes.iter().map(|&(r, c)| DMatrix::zeros(r, c)).collect(),
            second: shapes.iter().map(|&(r, c)| DMatrix::zeros(r, c)).collect(),
            t: 0,
        }
    }

    pub fn steps(&self) -> usize {
        self.t
    }

    pub fn step(&mut self, params: &mut [&mut DMatrix<f64>], grads: &[&DMatrix<f64>]) {
        assert_eq!(params.len(), self.first.len());
        assert_eq!(grads.len(), self.first.len());
        self.t += 1;
        for (idx, param) in params.iter_mut().enumerate() {
            adam_update(
                &self.config,
                param,
                grads[idx],
                &mut self.first[idx],
                &mut self.second[idx],
                self.t,
            );
        }
    }
}
