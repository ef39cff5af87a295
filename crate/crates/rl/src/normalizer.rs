use serde::{Deserialize, Serialize};

/// Running per-feature mean and variance (parallel Welford merge).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunningNorm {
    pub mean: Vec<f64>,
    pub var: Vec<f64>,
    pub count: f64,
    pub clip: f64,
}

impl RunningNorm {
    pub fn new(dim: usize) -> Self {
        RunningNorm {
            mean: vec![0.0; dim],
            var: vec![1.0; dim],
            count: 1e-4,
            clip: 10.0,
        }
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn update(&mut self, x: &[f64]) {
        assert_eq!(x.len(), self.dim());
        let total = self.count + 1.0;
        for i in 0..x.len() {
            let delta = x[i] - self.mean[i];
            let m_a = self.var[i] * self.count;
            self.mean[i] += delta / total;
            let m2 = m_a + delta * delta * self.count / total;
            self.var[i] = m2 / total;
        }
        self.count = total;
    }

    pub fn normalize(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .zip(self.mean.iter().zip(&self.var))
            .map(|(v, (m, s2))| ((v - m) / (s2 + 1e-8).sqrt()).clamp(-self.clip, self.clip))
            .collect()
    }
}
