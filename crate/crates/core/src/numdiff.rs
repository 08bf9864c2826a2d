//! Central finite-difference partial derivatives on tensor-product stencils.

use crate::kernel::MultiIndex;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stencil {
    /// Offsets −1..=1; derivative orders up to 2.
    Three,
    /// Offsets −2..=2; derivative orders up to 4.
    Five,
}

impl Stencil {
    fn half_width(self) -> i32 {
        match self {
            Stencil::Three => 1,
            Stencil::Five => 2,
        }
    }

    fn weights(self, order: u32) -> &'static [f64] {
        match (self, order) {
            (Stencil::Three, 0) => &[0.0, 1.0, 0.0],
            (Stencil::Three, 1) => &[-0.5, 0.0, 0.5],
            (Stencil::Three, 2) => &[1.0, -2.0, 1.0],
            (Stencil::Five, 0) => &[0.0, 0.0, 1.0, 0.0, 0.0],
            (Stencil::Five, 1) => &[1.0 / 12.0, -8.0 / 12.0, 0.0, 8.0 / 12.0, -1.0 / 12.0],
            (Stencil::Five, 2) => &[-1.0 / 12.0, 16.0 / 12.0, -30.0 / 12.0, 16.0 / 12.0, -1.0 / 12.0],
            (Stencil::Five, 3) => &[-0.5, 1.0, 0.0, -1.0, 0.5],
            (Stencil::Five, 4) => &[1.0, -4.0, 6.0, -4.0, 1.0],
            _ => panic!("stencil {self:?} does not support derivative order {order}"),
        }
    }
}

/// `D_v g(t)` with per-axis step `steps[i]`.
pub fn partial<G: Fn(&[f64]) -> f64>(
    g: G,
    t: &[f64],
    v: &MultiIndex,
    steps: &[f64],
    stencil: Stencil,
) -> f64 {
    let dim = t.len();
    assert_eq!(v.0.len(), dim);
    let w = stencil.half_width();
    let width = (2 * w + 1) as usize;
    let axes: Vec<&[f64]> = v.0.iter().map(|&k| stencil.weights(k)).collect();
    if dim == 1 {
        // Pair mirrored offsets so that D_v g(t) and D_v g(−t) of an even
        // or odd g agree to the last bit.
        let h = steps[0];
        let wts = axes[0];
        let mut total = wts[w as usize] * g(t);
        for j in 1..=w {
            let plus = wts[(w + j) as usize] * g(&[t[0] + j as f64 * h]);
            let minus = wts[(w - j) as usize] * g(&[t[0] - j as f64 * h]);
            total += plus + minus;
        }
        return total / h.powi(v.0[0] as i32);
    }
    let mut point = t.to_vec();
    let mut total = 0.0;
    for flat in 0..width.pow(dim as u32) {
        let mut rem = flat;
        let mut weight = 1.0;
        for i in 0..dim {
            let j = rem % width;
            rem /= width;
            weight *= axes[i][j];
            point[i] = t[i] + (j as i32 - w) as f64 * steps[i];
        }
        if weight != 0.0 {
            total += weight * g(&point);
        }
    }
    let scale: f64 = v
        .0
        .iter()
        .zip(steps)
        .map(|(&k, h)| h.powi(k as i32))
        .product();
    total / scale
}

/// Step `base·max(1, |tᵢ|)` per axis.
pub fn scaled_steps(t: &[f64], base: f64) -> Vec<f64> {
    t.iter().map(|x| base * x.abs().max(1.0)).collect()
}
