//! Correlation of spherical signals over the rotation group.
//!
//! For band-limited `f`, `g` the correlation
//! `C(R) = ∫ f(ω) conj(g(R⁻¹ω)) dω = Σ_l Σ_{m,m'} f̂_l^m conj(ĝ_l^{m'}) conj(D^l_{mm'}(R))`
//! is evaluated on a 2B×2B×2B grid of zyz Euler angles. Fixing β, the
//! `(α, γ)` dependence is a 2-D Fourier series, so each β-slice costs one
//! Wigner-weighted sum over degrees plus one 2-D inverse FFT.

use std::f64::consts::{PI, TAU};
use std::io::Write;

use nalgebra::{Rotation3, Vector3};
use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::sht::HarmonicCoeffs;
use crate::wigner::WignerTable;

/// Norms at or below this are treated as an all-zero signal.
pub const ZERO_NORM: f64 = 1e-12;

/// β_b = π(2b+1)/4B.
pub fn beta_node(b: usize, bandwidth: usize) -> f64 {
    PI * (2 * b + 1) as f64 / (4 * bandwidth) as f64
}

/// α_a = γ_a = πa/B.
pub fn azimuth_node(a: usize, bandwidth: usize) -> f64 {
    PI * a as f64 / bandwidth as f64
}

/// A rotation `R_z(α) R_y(β) R_z(γ)` in zyz Euler angles.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RotationZYZ {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

impl RotationZYZ {
    pub const IDENTITY: Self = Self {
        alpha: 0.0,
        beta: 0.0,
        gamma: 0.0,
    };

    pub fn new(alpha: f64, beta: f64, gamma: f64) -> Self {
        Self { alpha, beta, gamma }
    }

    pub fn matrix(&self) -> Rotation3<f64> {
        Rotation3::from_axis_angle(&Vector3::z_axis(), self.alpha)
            * Rotation3::from_axis_angle(&Vector3::y_axis(), self.beta)
            * Rotation3::from_axis_angle(&Vector3::z_axis(), self.gamma)
    }

    /// Euler angles of `rot`, with α, γ in [0, 2π) and β in [0, π].
    /// When β is 0 or π only α ± γ is defined and γ is set to 0.
    pub fn from_matrix(rot: &Rotation3<f64>) -> Self {
        let m = rot.matrix();
        let beta = m[(2, 2)].clamp(-1.0, 1.0).acos();
        let (alpha, gamma) = if beta.sin() > 1e-12 {
            (m[(1, 2)].atan2(m[(0, 2)]), m[(2, 1)].atan2(-m[(2, 0)]))
        } else if m[(2, 2)] > 0.0 {
            (m[(1, 0)].atan2(m[(0, 0)]), 0.0)
        } else {
            ((-m[(1, 0)]).atan2(-m[(0, 0)]), 0.0)
        };
        Self::new(wrap(alpha), beta, wrap(gamma))
    }

    pub fn inverse(&self) -> Self {
        Self::new(wrap(PI - self.gamma), self.beta, wrap(PI - self.alpha))
    }

    /// Rotation angle in [0, π].
    pub fn angle(&self) -> f64 {
        self.matrix().angle()
    }
}

fn wrap(a: f64) -> f64 {
    let w = a.rem_euclid(TAU);
    if w >= TAU {
        0.0
    } else {
        w
    }
}

/// Coefficients of `g(R⁻¹·)`: `ĝ'_l^m = Σ_{m'} e^{-imα} d^l_{mm'}(β) e^{-im'γ} ĝ_l^{m'}`.
pub fn rotate_coeffs(c: &HarmonicCoeffs, rot: &RotationZYZ) -> HarmonicCoeffs {
    let bw = c.bandwidth();
    let table = WignerTable::new(bw, rot.beta);
    let mut out = HarmonicCoeffs::zeros(bw);
    for l in 0..bw {
        let li = l as i64;
        let src = c.degree(l);
        let twisted: Vec<Complex64> = (-li..=li)
            .zip(src)
            .map(|(mp, v)| v * Complex64::from_polar(1.0, -(mp as f64) * rot.gamma))
            .collect();
        let block = table.block(l);
        let w = 2 * l + 1;
        for (row, dst) in out.degree_mut(l).iter_mut().enumerate() {
            let m = row as i64 - li;
            let acc: Complex64 = block[row * w..(row + 1) * w]
                .iter()
                .zip(&twisted)
                .map(|(d, v)| v * *d)
                .sum();
            *dst = acc * Complex64::from_polar(1.0, -(m as f64) * rot.alpha);
        }
    }
    out
}

/// Correlation values on the `(α_a, β_b, γ_c)` grid, indexed `[a][b][c]`.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationGrid {
    bandwidth: usize,
    values: Vec<f64>,
    /// `‖f‖·‖g‖` once normalized.
    normalization: Option<f64>,
    imag_residue: f64,
}

impl CorrelationGrid {
    pub fn from_values(bandwidth: usize, values: Vec<f64>) -> Result<Self> {
        let n = 2 * bandwidth;
        if values.len() != n * n * n {
            return Err(Error::DimensionMismatch {
                expected: n * n * n,
                got: values.len(),
            });
        }
        Ok(Self {
            bandwidth,
            values,
            normalization: None,
            imag_residue: 0.0,
        })
    }

    pub fn bandwidth(&self) -> usize {
        self.bandwidth
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn normalization(&self) -> Option<f64> {
        self.normalization
    }

    /// Largest imaginary part discarded when the grid was formed.
    pub fn imag_residue(&self) -> f64 {
        self.imag_residue
    }

    #[inline]
    pub fn flat(&self, a: usize, b: usize, c: usize) -> usize {
        let n = 2 * self.bandwidth;
        (a * n + b) * n + c
    }

    pub fn get(&self, a: usize, b: usize, c: usize) -> f64 {
        self.values[self.flat(a, b, c)]
    }

    pub fn node(&self, a: usize, b: usize, c: usize) -> RotationZYZ {
        let bw = self.bandwidth;
        RotationZYZ::new(azimuth_node(a, bw), beta_node(b, bw), azimuth_node(c, bw))
    }

    /// Grid node `[a, b, c]` holding the largest value (first on ties).
    pub fn argmax(&self) -> [usize; 3] {
        let mut best = 0;
        for (i, &v) in self.values.iter().enumerate() {
            if v > self.values[best] {
                best = i;
            }
        }
        self.unflat(best)
    }

    fn unflat(&self, i: usize) -> [usize; 3] {
        let n = 2 * self.bandwidth;
        [i / (n * n), (i / n) % n, i % n]
    }

    /// Dense dump with header `alpha,beta,gamma,value`, keeping rows whose
    /// value is at least `display_threshold`.
    pub fn write_csv(&self, out: &mut impl Write, display_threshold: f64) -> std::io::Result<()> {
        writeln!(out, "alpha,beta,gamma,value")?;
        for (i, &v) in self.values.iter().enumerate() {
            if v >= display_threshold {
                let [a, b, c] = self.unflat(i);
                let r = self.node(a, b, c);
                writeln!(
                    out,
                    "{},{},{},{}",
                    crate::output::sig9(r.alpha),
                    crate::output::sig9(r.beta),
                    crate::output::sig9(r.gamma),
                    crate::output::sig9(v)
                )?;
            }
        }
        Ok(())
    }
}

/// Spectral evaluation of the correlation grid in `O(B⁴)`.
pub fn correlate(fc: &HarmonicCoeffs, gc: &HarmonicCoeffs) -> Result<CorrelationGrid> {
    let bw = fc.bandwidth();
    if gc.bandwidth() != bw {
        return Err(Error::BandwidthMismatch(bw, gc.bandwidth()));
    }
    let n = 2 * bw;
    let fft = FftPlanner::new().plan_fft_inverse(n);
    let g_conj: Vec<Complex64> = gc.as_slice().iter().map(|c| c.conj()).collect();

    let slices: Vec<(Vec<f64>, f64)> = (0..n)
        .into_par_iter()
        .map(|b| {
            let table = WignerTable::new(bw, beta_node(b, bw));
            // S[m][m'] = Σ_l f̂_l^m conj(ĝ_l^{m'}) d^l_{mm'}(β_b), stored at (m mod n, m' mod n)
            let mut s = vec![Complex64::new(0.0, 0.0); n * n];
            for l in 0..bw {
                let li = l as i64;
                let w = 2 * l + 1;
                let block = table.block(l);
                let fl = fc.degree(l);
                let gl = &g_conj[l * l..(l + 1) * (l + 1)];
                for (row, fv) in fl.iter().enumerate() {
                    if fv.re == 0.0 && fv.im == 0.0 {
                        continue;
                    }
                    let m = row as i64 - li;
                    let base = m.rem_euclid(n as i64) as usize * n;
                    for (col, gv) in gl.iter().enumerate() {
                        let mp = col as i64 - li;
                        s[base + mp.rem_euclid(n as i64) as usize] +=
                            fv * gv * block[row * w + col];
                    }
                }
            }
            // inverse 2-D DFT over (m, m') -> (α_a, γ_c)
            let mut scratch = vec![Complex64::new(0.0, 0.0); n];
            for row in s.chunks_mut(n) {
                fft.process(row);
            }
            for c in 0..n {
                for (a, x) in scratch.iter_mut().enumerate() {
                    *x = s[a * n + c];
                }
                fft.process(&mut scratch);
                for (a, x) in scratch.iter().enumerate() {
                    s[a * n + c] = *x;
                }
            }
            let residue = s.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
            (s.iter().map(|z| z.re).collect(), residue)
        })
        .collect();

    let mut values = vec![0.0; n * n * n];
    let mut imag_residue: f64 = 0.0;
    for (b, (slice, residue)) in slices.into_iter().enumerate() {
        imag_residue = imag_residue.max(residue);
        for a in 0..n {
            for c in 0..n {
                values[(a * n + b) * n + c] = slice[a * n + c];
            }
        }
    }
    Ok(CorrelationGrid {
        bandwidth: bw,
        values,
        normalization: None,
        imag_residue,
    })
}

/// Node-by-node evaluation of the correlation sum, `O(B⁶)`. Reference only.
pub fn correlate_direct(fc: &HarmonicCoeffs, gc: &HarmonicCoeffs) -> Result<CorrelationGrid> {
    let bw = fc.bandwidth();
    if gc.bandwidth() != bw {
        return Err(Error::BandwidthMismatch(bw, gc.bandwidth()));
    }
    let n = 2 * bw;
    let mut values = vec![0.0; n * n * n];
    let mut imag_residue: f64 = 0.0;
    for b in 0..n {
        let beta = beta_node(b, bw);
        let table = WignerTable::new(bw, beta);
        for a in 0..n {
            let alpha = azimuth_node(a, bw);
            for c in 0..n {
                let gamma = azimuth_node(c, bw);
                let mut acc = Complex64::new(0.0, 0.0);
                for l in 0..bw {
                    let li = l as i64;
                    for m in -li..=li {
                        for mp in -li..=li {
                            let d_conj = Complex64::from_polar(
                                table.get(l, m, mp),
                                m as f64 * alpha + mp as f64 * gamma,
                            );
                            acc += fc.get(l, m) * gc.get(l, mp).conj() * d_conj;
                        }
                    }
                }
                imag_residue = imag_residue.max(acc.im.abs());
                values[(a * n + b) * n + c] = acc.re;
            }
        }
    }
    Ok(CorrelationGrid {
        bandwidth: bw,
        values,
        normalization: None,
        imag_residue,
    })
}

/// Divides by `‖f‖·‖g‖` so values lie in [-1, 1].
pub fn normalize(
    grid: &CorrelationGrid,
    fc: &HarmonicCoeffs,
    gc: &HarmonicCoeffs,
) -> Result<CorrelationGrid> {
    let (nf, ng) = (fc.norm(), gc.norm());
    for norm in [nf, ng] {
        if norm <= ZERO_NORM {
            return Err(Error::ZeroSignal(norm));
        }
    }
    let scale = nf * ng;
    Ok(CorrelationGrid {
        bandwidth: grid.bandwidth,
        values: grid.values.iter().map(|v| v / scale).collect(),
        normalization: Some(scale),
        imag_residue: grid.imag_residue / scale,
    })
}

/// A grid rotation selected for contact sampling.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampledRotation {
    pub node: [usize; 3],
    pub rotation: RotationZYZ,
    pub value: f64,
}

/// All nodes with value strictly above `t_corr`, descending by value, ties
/// in `(a, b, c)` order.
pub fn extract_rotations(grid: &CorrelationGrid, t_corr: f64) -> Vec<SampledRotation> {
    extract_rotations_with(grid, t_corr, false)
}

/// As [`extract_rotations`]; with `local_max` only nodes not exceeded by any
/// of their 26 grid neighbors are kept (α and γ wrap, β does not).
pub fn extract_rotations_with(
    grid: &CorrelationGrid,
    t_corr: f64,
    local_max: bool,
) -> Vec<SampledRotation> {
    let n = 2 * grid.bandwidth;
    let mut out: Vec<SampledRotation> = grid
        .values
        .iter()
        .enumerate()
        .filter(|&(_, &v)| v > t_corr)
        .map(|(i, &v)| {
            let node = grid.unflat(i);
            SampledRotation {
                node,
                rotation: grid.node(node[0], node[1], node[2]),
                value: v,
            }
        })
        .filter(|s| !local_max || is_local_max(grid, s.node, n))
        .collect();
    // stable sort keeps (a, b, c) order among equal values
    out.sort_by(|x, y| y.value.total_cmp(&x.value));
    out
}

fn is_local_max(grid: &CorrelationGrid, [a, b, c]: [usize; 3], n: usize) -> bool {
    let v = grid.get(a, b, c);
    for da in [n - 1, 0, 1] {
        for db in [-1i64, 0, 1] {
            let bb = b as i64 + db;
            if bb < 0 || bb >= n as i64 {
                continue;
            }
            for dc in [n - 1, 0, 1] {
                if da == 0 && db == 0 && dc == 0 {
                    continue;
                }
                if grid.get((a + da) % n, bb as usize, (c + dc) % n) > v {
                    return false;
                }
            }
        }
    }
    true
}
