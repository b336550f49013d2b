use super::Matrix;

/// Per-feature z-scoring fit on training rows. Constant features keep
/// scale 1 so they map to zero.
#[derive(Debug, Clone, PartialEq)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    pub scale: Vec<f64>,
}

impl Standardizer {
    pub fn fit(x: &Matrix) -> Self {
        let mean = x.column_means();
        let n = x.rows().max(1) as f64;
        let mut var = vec![0.0; x.cols()];
        for r in x.iter_rows() {
            for ((v, &xi), &m) in var.iter_mut().zip(r).zip(&mean) {
                *v += (xi - m) * (xi - m);
            }
        }
        let scale = var
            .into_iter()
            .map(|v| {
                let s = (v / n).sqrt();
                if s > 0.0 && s.is_finite() {
                    s
                } else {
                    1.0
                }
            })
            .collect();
        Self { mean, scale }
    }

    pub fn transform_row(&self, row: &[f64], out: &mut [f64]) {
        for (((o, &x), &m), &s) in out.iter_mut().zip(row).zip(&self.mean).zip(&self.scale) {
            *o = (x - m) / s;
        }
    }

    pub fn transform(&self, x: &Matrix) -> Matrix {
        let mut out = Matrix::zeros(x.rows(), x.cols());
        for i in 0..x.rows() {
            self.transform_row(x.row(i), out.row_mut(i));
        }
        out
    }
}
