//! Separable double-precision 8x8 DCT-II / DCT-III.

use num_traits::Float;

/// `BASIS[u][x] = c(u)/2 * cos((2x+1) u pi / 16)`, `c(0) = 1/sqrt(2)`.
pub(crate) struct DctBasis([[f64; 8]; 8]);

impl DctBasis {
    pub fn new() -> Self {
        let mut m = [[0.0f64; 8]; 8];
        for (u, row) in m.iter_mut().enumerate() {
            let cu = if u == 0 { Float::sqrt(0.5) } else { 1.0 };
            for (x, v) in row.iter_mut().enumerate() {
                let angle = ((2 * x + 1) * u) as f64 * core::f64::consts::PI / 16.0;
                *v = 0.5 * cu * Float::cos(angle);
            }
        }
        DctBasis(m)
    }

    /// Forward transform of a level-shifted block in natural order.
    pub fn forward(&self, block: &[f64; 64]) -> [f64; 64] {
        let m = &self.0;
        let mut tmp = [0.0f64; 64];
        // rows: tmp[y][u] = sum_x m[u][x] * block[y][x]
        for y in 0..8 {
            for u in 0..8 {
                let mut acc = 0.0;
                for x in 0..8 {
                    acc += m[u][x] * block[y * 8 + x];
                }
                tmp[y * 8 + u] = acc;
            }
        }
        let mut out = [0.0f64; 64];
        for v in 0..8 {
            for u in 0..8 {
                let mut acc = 0.0;
                for y in 0..8 {
                    acc += m[v][y] * tmp[y * 8 + u];
                }
                out[v * 8 + u] = acc;
            }
        }
        out
    }

    /// Inverse transform; output is still level-shifted (centered on 0).
    pub fn inverse(&self, coeffs: &[f64; 64]) -> [f64; 64] {
        let m = &self.0;
        let mut tmp = [0.0f64; 64];
        // columns first: tmp[y][u] = sum_v m[v][y] * coeffs[v][u]
        for y in 0..8 {
            for u in 0..8 {
                let mut acc = 0.0;
                for v in 0..8 {
                    acc += m[v][y] * coeffs[v * 8 + u];
                }
                tmp[y * 8 + u] = acc;
            }
        }
        let mut out = [0.0f64; 64];
        for y in 0..8 {
            for x in 0..8 {
                let mut acc = 0.0;
                for u in 0..8 {
                    acc += m[u][x] * tmp[y * 8 + u];
                }
                out[y * 8 + x] = acc;
            }
        }
        out
    }
}
