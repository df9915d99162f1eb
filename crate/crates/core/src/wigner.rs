//! Wigner d-functions `d^l_{mm'}(β)`.
//!
//! Values are produced by the three-term recurrence in `l` at fixed
//! `(m, m')`, seeded at `l = max(|m|, |m'|)` where the closed-form sum has
//! a single term. The convention matches Condon–Shortley harmonics and
//! `D^l_{mm'}(α, β, γ) = e^{-imα} d^l_{mm'}(β) e^{-im'γ}` for the active
//! rotation `R_z(α) R_y(β) R_z(γ)`.

use std::sync::OnceLock;

use nalgebra::DMatrix;

use crate::so3::beta_node;

fn ln_factorial(n: usize) -> f64 {
    static TABLE: OnceLock<Vec<f64>> = OnceLock::new();
    let table = TABLE.get_or_init(|| {
        let mut t = vec![0.0; 1024];
        for i in 1..t.len() {
            t[i] = t[i - 1] + (i as f64).ln();
        }
        t
    });
    table[n]
}

/// Closed-form sum for `d^j_{ab}(β)`.
///
/// Exact up to rounding for small `j`; the alternating sum cancels badly at
/// high degree, so it is used only for recurrence seeds (single term) and
/// as a low-degree reference.
pub fn wigner_d_explicit(j: usize, a: i64, b: i64, beta: f64) -> f64 {
    let ji = j as i64;
    assert!(a.abs() <= ji && b.abs() <= ji);
    let (c, s) = ((beta / 2.0).cos(), (beta / 2.0).sin());
    let pre = 0.5
        * (ln_factorial((ji + a) as usize)
            + ln_factorial((ji - a) as usize)
            + ln_factorial((ji + b) as usize)
            + ln_factorial((ji - b) as usize));
    let s_min = 0.max(b - a);
    let s_max = (ji + b).min(ji - a);
    let mut sum = 0.0;
    for k in s_min..=s_max {
        let den = ln_factorial((ji + b - k) as usize)
            + ln_factorial(k as usize)
            + ln_factorial((a - b + k) as usize)
            + ln_factorial((ji - a - k) as usize);
        let sign = if (a - b + k) % 2 == 0 { 1.0 } else { -1.0 };
        let pc = (2 * ji + b - a - 2 * k) as i32;
        let ps = (a - b + 2 * k) as i32;
        sum += sign * (pre - den).exp() * c.powi(pc) * s.powi(ps);
    }
    sum
}

/// All `d^l(β)` blocks for `0 <= l < lmax` at a single angle.
#[derive(Debug, Clone)]
pub struct WignerTable {
    lmax: usize,
    offsets: Vec<usize>,
    data: Vec<f64>,
}

impl WignerTable {
    pub fn new(lmax: usize, beta: f64) -> Self {
        let mut offsets = Vec::with_capacity(lmax + 1);
        let mut total = 0;
        for l in 0..=lmax {
            offsets.push(total);
            total += (2 * l + 1) * (2 * l + 1);
        }
        let mut data = vec![0.0; offsets[lmax]];
        let cb = beta.cos();
        let top = lmax as i64 - 1;
        for m in -top..=top {
            for mp in -top..=top {
                let l0 = m.abs().max(mp.abs()) as usize;
                let (mf, mpf) = (m as f64, mp as f64);
                let mut prev = 0.0;
                let mut cur = wigner_d_explicit(l0, m, mp, beta);
                let mut l = l0;
                loop {
                    let w = 2 * l + 1;
                    let li = l as i64;
                    data[offsets[l] + ((m + li) as usize) * w + (mp + li) as usize] = cur;
                    if l + 1 >= lmax {
                        break;
                    }
                    let next = if l == 0 {
                        cb
                    } else {
                        let j = l as f64;
                        let j1 = j + 1.0;
                        let num = (2.0 * j + 1.0) * (j * j1 * cb - mf * mpf) * cur
                            - j1 * ((j * j - mf * mf) * (j * j - mpf * mpf)).sqrt() * prev;
                        num / (j * ((j1 * j1 - mf * mf) * (j1 * j1 - mpf * mpf)).sqrt())
                    };
                    prev = cur;
                    cur = next;
                    l += 1;
                }
            }
        }
        Self {
            lmax,
            offsets,
            data,
        }
    }

    pub fn lmax(&self) -> usize {
        self.lmax
    }

    /// Row-major `(2l+1)²` block, rows `m`, columns `m'`, both from `-l`.
    #[inline]
    pub fn block(&self, l: usize) -> &[f64] {
        &self.data[self.offsets[l]..self.offsets[l + 1]]
    }

    #[inline]
    pub fn get(&self, l: usize, m: i64, mp: i64) -> f64 {
        let li = l as i64;
        self.block(l)[((m + li) as usize) * (2 * l + 1) + (mp + li) as usize]
    }
}

/// `d^l(β)` as a `(2l+1)×(2l+1)` matrix indexed from `m = -l`.
pub fn wigner_d(l: usize, beta: f64) -> DMatrix<f64> {
    let table = WignerTable::new(l + 1, beta);
    let w = 2 * l + 1;
    DMatrix::from_row_slice(w, w, table.block(l))
}

/// `d^l` at every β-node `π(2b+1)/4B` of the rotation grid.
#[derive(Debug, Clone)]
pub struct WignerBlock {
    pub degree: usize,
    pub betas: Vec<f64>,
    pub matrices: Vec<DMatrix<f64>>,
}

impl WignerBlock {
    pub fn new(degree: usize, bandwidth: usize) -> Self {
        let betas: Vec<f64> = (0..2 * bandwidth).map(|b| beta_node(b, bandwidth)).collect();
        let matrices = betas.iter().map(|&b| wigner_d(degree, b)).collect();
        Self {
            degree,
            betas,
            matrices,
        }
    }

    /// Largest entry of `d·dᵀ - I` over all nodes.
    pub fn orthogonality_error(&self) -> f64 {
        let w = 2 * self.degree + 1;
        self.matrices
            .iter()
            .map(|d| (d * d.transpose() - DMatrix::identity(w, w)).abs().max())
            .fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use super::*;

    #[test]
    fn identity_at_zero() {
        for l in [0, 1, 5, 20] {
            let d = wigner_d(l, 0.0);
            let w = 2 * l + 1;
            assert!((d - DMatrix::identity(w, w)).abs().max() < 1e-12);
        }
    }

    #[test]
    fn degree_one_closed_form() {
        let beta = 0.83;
        let d = wigner_d(1, beta);
        let (c, s) = (beta.cos(), beta.sin());
        let r2 = 2f64.sqrt();
        #[rustfmt::skip]
        let want = DMatrix::from_row_slice(3, 3, &[
            (1.0 + c) / 2.0,  s / r2, (1.0 - c) / 2.0,
            -s / r2,          c,      s / r2,
            (1.0 - c) / 2.0, -s / r2, (1.0 + c) / 2.0,
        ]);
        assert!((d - want).abs().max() < 1e-14);
        assert!((wigner_d(1, PI / 3.0)[(1, 1)] - 0.5).abs() < 1e-14);
        assert!((wigner_d(1, PI / 2.0)[(2, 2)] - 0.5).abs() < 1e-14);
    }

    #[test]
    fn recurrence_matches_closed_form_sum() {
        for &beta in &[0.1, 1.0, PI / 2.0, 2.5, PI - 1e-3] {
            let table = WignerTable::new(9, beta);
            for l in 0..9usize {
                let li = l as i64;
                for m in -li..=li {
                    for mp in -li..=li {
                        let want = wigner_d_explicit(l, m, mp, beta);
                        let got = table.get(l, m, mp);
                        assert!((want - got).abs() < 1e-12, "l={l} m={m} m'={mp}: {got} vs {want}");
                    }
                }
            }
        }
    }

    #[test]
    fn orthogonal_at_high_degree() {
        for l in [10, 31, 63] {
            let block = WignerBlock::new(l, 4);
            assert!(block.orthogonality_error() < 1e-9, "l={l}: {}", block.orthogonality_error());
        }
    }
}
