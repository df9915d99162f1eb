//! Discrete spherical harmonic transform on the 2B×2B equiangular grid.
//!
//! Harmonics carry the Condon–Shortley factor `(-1)^m` explicitly; the
//! associated Legendre values computed here do not include it. Coefficients
//! use the orthonormal convention, so `f̂_l^m = ∫ f conj(Y_l^m) dΩ`.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::sphere::{theta_node, SphereGrid, SphericalDirection};

/// Complex coefficients `f̂_l^m` for `0 <= l < B`, `-l <= m <= l`.
#[derive(Debug, Clone, PartialEq)]
pub struct HarmonicCoeffs {
    bandwidth: usize,
    coeffs: Vec<Complex64>,
}

impl HarmonicCoeffs {
    pub fn zeros(bandwidth: usize) -> Self {
        Self {
            bandwidth,
            coeffs: vec![Complex64::new(0.0, 0.0); bandwidth * bandwidth],
        }
    }

    /// Wraps `B²` coefficients laid out degree by degree, `m` ascending.
    pub fn from_vec(bandwidth: usize, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != bandwidth * bandwidth {
            return Err(Error::DimensionMismatch {
                expected: bandwidth * bandwidth,
                got: coeffs.len(),
            });
        }
        Ok(Self { bandwidth, coeffs })
    }

    pub fn bandwidth(&self) -> usize {
        self.bandwidth
    }

    #[inline]
    fn index(l: usize, m: i64) -> usize {
        debug_assert!(m.unsigned_abs() as usize <= l);
        (l * l + l).wrapping_add_signed(m as isize)
    }

    pub fn get(&self, l: usize, m: i64) -> Complex64 {
        self.coeffs[Self::index(l, m)]
    }

    pub fn set(&mut self, l: usize, m: i64, v: Complex64) {
        let i = Self::index(l, m);
        self.coeffs[i] = v;
    }

    /// The `2l+1` coefficients of degree `l`, ordered `m = -l..=l`.
    pub fn degree(&self, l: usize) -> &[Complex64] {
        &self.coeffs[l * l..(l + 1) * (l + 1)]
    }

    pub fn degree_mut(&mut self, l: usize) -> &mut [Complex64] {
        &mut self.coeffs[l * l..(l + 1) * (l + 1)]
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// `(l, m, value)` in storage order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, i64, Complex64)> + '_ {
        (0..self.bandwidth).flat_map(move |l| {
            (-(l as i64)..=l as i64).map(move |m| (l, m, self.get(l, m)))
        })
    }

    /// L² norm of the represented function (Parseval).
    pub fn norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest deviation from `f̂_l^{-m} = (-1)^m conj(f̂_l^m)`.
    pub fn real_symmetry_residue(&self) -> f64 {
        self.iter()
            .filter(|&(_, m, _)| m > 0)
            .map(|(l, m, c)| (self.get(l, -m) - parity(m) * c.conj()).norm())
            .fold(0.0, f64::max)
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            bandwidth: self.bandwidth,
            coeffs: self.coeffs.iter().map(|c| c * s).collect(),
        }
    }

    /// Coefficient list as `{l, m, re, im}` records.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::Value::Array(
            self.iter()
                .map(|(l, m, c)| serde_json::json!({"l": l, "m": m, "re": c.re, "im": c.im}))
                .collect(),
        )
    }
}

#[inline]
pub(crate) fn parity(m: i64) -> f64 {
    if m % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Offset of `(l, m >= 0)` in a triangular Legendre table.
#[inline]
pub(crate) fn tri(l: usize, m: usize) -> usize {
    l * (l + 1) / 2 + m
}

/// Orthonormalized associated Legendre values `P̄_l^m(cos θ)` for
/// `0 <= m <= l < lmax`, without the Condon–Shortley phase, such that
/// `Y_l^m = (-1)^m P̄_l^m(cos θ) e^{imφ}` for `m >= 0`.
///
/// Uses the sectoral seed and the standard three-term recurrence in `l`,
/// which stays finite well past `l = 128`.
pub fn normalized_legendre(lmax: usize, theta: f64) -> Vec<f64> {
    let mut out = vec![0.0; lmax * (lmax + 1) / 2];
    if lmax == 0 {
        return out;
    }
    let (s, x) = theta.sin_cos();
    let mut pmm = 1.0 / (4.0 * PI).sqrt();
    for m in 0..lmax {
        if m > 0 {
            let mf = m as f64;
            pmm *= ((2.0 * mf + 1.0) / (2.0 * mf)).sqrt() * s;
        }
        out[tri(m, m)] = pmm;
        if m + 1 < lmax {
            out[tri(m + 1, m)] = (2.0 * m as f64 + 3.0).sqrt() * x * pmm;
        }
        for l in m + 2..lmax {
            let (lf, mf) = (l as f64, m as f64);
            let a = ((4.0 * lf * lf - 1.0) / (lf * lf - mf * mf)).sqrt();
            let b = (((lf - 1.0).powi(2) - mf * mf) / (4.0 * (lf - 1.0).powi(2) - 1.0)).sqrt();
            out[tri(l, m)] = a * (x * out[tri(l - 1, m)] - b * out[tri(l - 2, m)]);
        }
    }
    out
}

/// `Y_l^m(θ, φ)` with `Y_l^{-m} = (-1)^m conj(Y_l^m)`.
pub fn eval_ylm(l: usize, m: i64, d: SphericalDirection) -> Result<Complex64> {
    if m.unsigned_abs() as usize > l {
        return Err(Error::Domain { l, m });
    }
    let table = normalized_legendre(l + 1, d.theta);
    let am = m.unsigned_abs() as usize;
    let p = table[tri(l, am)];
    let sign = if m >= 0 { parity(m) } else { 1.0 };
    Ok(Complex64::from_polar(sign * p, m as f64 * d.phi))
}

/// Per-ring colatitude weights of the sampling-theorem quadrature.
///
/// `Σ_j w_j g(θ_j) = ∫_0^π g(θ) sin θ dθ` holds exactly whenever `g` is a
/// polynomial in `cos θ` of degree below `2B`; hence `Σ_j w_j = 2`. The
/// weight of a full grid cell is `w_j · π/B` (see [`Self::cell_weight`]).
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureWeights {
    bandwidth: usize,
    weights: Vec<f64>,
}

impl QuadratureWeights {
    pub fn bandwidth(&self) -> usize {
        self.bandwidth
    }

    pub fn ring_weights(&self) -> &[f64] {
        &self.weights
    }

    /// Area weight of one grid sample on ring `j`.
    pub fn cell_weight(&self, j: usize) -> f64 {
        self.weights[j] * PI / self.bandwidth as f64
    }

    /// Discrete `∫_{S²} f dΩ`.
    pub fn integrate(&self, grid: &SphereGrid) -> f64 {
        let n = 2 * self.bandwidth;
        (0..n)
            .map(|j| self.cell_weight(j) * grid.ring(j).iter().sum::<f64>())
            .sum()
    }
}

pub fn quadrature_weights(bandwidth: usize) -> QuadratureWeights {
    assert!(bandwidth >= 1, "bandwidth must be positive");
    let b = bandwidth as f64;
    let weights = (0..2 * bandwidth)
        .map(|j| {
            let t = theta_node(j, bandwidth);
            let sum: f64 = (0..bandwidth)
                .map(|k| {
                    let kk = (2 * k + 1) as f64;
                    (kk * t).sin() / kk
                })
                .sum();
            2.0 / b * t.sin() * sum
        })
        .collect();
    QuadratureWeights { bandwidth, weights }
}

/// Precomputed weights, Legendre tables and FFT plans for one bandwidth.
pub struct ShtPlan {
    bandwidth: usize,
    weights: QuadratureWeights,
    /// `legendre[j]` is the triangular table at `θ_j`.
    legendre: Vec<Vec<f64>>,
    fft_forward: Arc<dyn Fft<f64>>,
    fft_inverse: Arc<dyn Fft<f64>>,
}

impl ShtPlan {
    pub fn new(bandwidth: usize) -> Self {
        Self::with_weights(quadrature_weights(bandwidth))
    }

    pub fn with_weights(weights: QuadratureWeights) -> Self {
        let bandwidth = weights.bandwidth();
        let legendre = (0..2 * bandwidth)
            .map(|j| normalized_legendre(bandwidth, theta_node(j, bandwidth)))
            .collect();
        let mut planner = FftPlanner::new();
        Self {
            bandwidth,
            weights,
            legendre,
            fft_forward: planner.plan_fft_forward(2 * bandwidth),
            fft_inverse: planner.plan_fft_inverse(2 * bandwidth),
        }
    }

    pub fn bandwidth(&self) -> usize {
        self.bandwidth
    }

    pub fn weights(&self) -> &QuadratureWeights {
        &self.weights
    }

    pub fn forward(&self, samples: &SphereGrid) -> Result<HarmonicCoeffs> {
        let b = self.bandwidth;
        let n = 2 * b;
        if samples.bandwidth() != b {
            return Err(Error::DimensionMismatch {
                expected: n * n,
                got: samples.values().len(),
            });
        }
        // φ-sums: F_j(m) = Σ_k f(θ_j, φ_k) e^{-imφ_k}, pre-multiplied by the cell weight
        let mut rings: Vec<Complex64> = samples
            .values()
            .iter()
            .map(|&v| Complex64::new(v, 0.0))
            .collect();
        for (j, ring) in rings.chunks_mut(n).enumerate() {
            self.fft_forward.process(ring);
            let w = self.weights.cell_weight(j);
            ring.iter_mut().for_each(|c| *c *= w);
        }
        let mut out = HarmonicCoeffs::zeros(b);
        for l in 0..b {
            for m in -(l as i64)..=l as i64 {
                let am = m.unsigned_abs() as usize;
                let col = m.rem_euclid(n as i64) as usize;
                let t = tri(l, am);
                let acc: Complex64 = (0..n)
                    .map(|j| rings[j * n + col] * self.legendre[j][t])
                    .sum();
                let sign = if m >= 0 { parity(m) } else { 1.0 };
                out.set(l, m, acc * sign);
            }
        }
        Ok(out)
    }

    /// Synthesizes samples and returns them with the largest discarded
    /// imaginary part.
    pub fn inverse_with_residue(&self, c: &HarmonicCoeffs) -> Result<(SphereGrid, f64)> {
        let b = self.bandwidth;
        let n = 2 * b;
        if c.bandwidth() != b {
            return Err(Error::BandwidthMismatch(c.bandwidth(), b));
        }
        let mut rings = vec![Complex64::new(0.0, 0.0); n * n];
        for (j, ring) in rings.chunks_mut(n).enumerate() {
            let leg = &self.legendre[j];
            for l in 0..b {
                for m in -(l as i64)..=l as i64 {
                    let am = m.unsigned_abs() as usize;
                    let sign = if m >= 0 { parity(m) } else { 1.0 };
                    ring[m.rem_euclid(n as i64) as usize] += c.get(l, m) * (sign * leg[tri(l, am)]);
                }
            }
            self.fft_inverse.process(ring);
        }
        let residue = rings.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
        let values = rings.iter().map(|z| z.re).collect();
        Ok((SphereGrid::from_values(b, values)?, residue))
    }

    pub fn inverse(&self, c: &HarmonicCoeffs) -> Result<SphereGrid> {
        let (grid, residue) = self.inverse_with_residue(c)?;
        let scale = grid.values().iter().map(|v| v.abs()).fold(1.0, f64::max);
        if residue > 1e-6 * scale {
            return Err(Error::SymmetryViolation { residue });
        }
        Ok(grid)
    }
}

/// Forward transform `f̂_l^m = Σ_{j,k} w_j f(θ_j, φ_k) conj(Y_l^m(θ_j, φ_k))`.
pub fn forward_sht(samples: &SphereGrid, weights: &QuadratureWeights) -> Result<HarmonicCoeffs> {
    let n = 2 * weights.bandwidth();
    if samples.values().len() != n * n {
        return Err(Error::DimensionMismatch {
            expected: n * n,
            got: samples.values().len(),
        });
    }
    ShtPlan::with_weights(weights.clone()).forward(samples)
}

/// Inverse transform `f(θ_j, φ_k) = Σ_l Σ_m f̂_l^m Y_l^m(θ_j, φ_k)`.
pub fn inverse_sht(c: &HarmonicCoeffs) -> Result<SphereGrid> {
    ShtPlan::new(c.bandwidth()).inverse(c)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spot_values() {
        let y00 = eval_ylm(0, 0, SphericalDirection::new(1.1, 2.3)).unwrap();
        assert!((y00.re - 0.5 / PI.sqrt()).abs() < 1e-12 && y00.im.abs() < 1e-15);
        let y10 = eval_ylm(1, 0, SphericalDirection::new(0.0, 0.0)).unwrap();
        assert!((y10.re - (3.0 / (4.0 * PI)).sqrt()).abs() < 1e-12);
        let y11 = eval_ylm(1, 1, SphericalDirection::new(PI / 2.0, 0.0)).unwrap();
        assert!((y11.re + (3.0 / (8.0 * PI)).sqrt()).abs() < 1e-12);
        assert!(matches!(
            eval_ylm(2, 3, SphericalDirection::new(0.0, 0.0)),
            Err(Error::Domain { .. })
        ));
    }

    #[test]
    fn negative_orders_conjugate() {
        let d = SphericalDirection::new(0.7, 1.9);
        for l in 0..6 {
            for m in 1..=l as i64 {
                let pos = eval_ylm(l, m, d).unwrap();
                let neg = eval_ylm(l, -m, d).unwrap();
                assert!((neg - parity(m) * pos.conj()).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn closed_forms_degree_two() {
        // Y_2^1 = -sqrt(15/8π) sinθ cosθ e^{iφ}, Y_2^2 = sqrt(15/32π) sin²θ e^{2iφ}
        let d = SphericalDirection::new(0.9, 0.4);
        let (s, c) = d.theta.sin_cos();
        let y21 = Complex64::from_polar(-(15.0 / (8.0 * PI)).sqrt() * s * c, d.phi);
        let y22 = Complex64::from_polar((15.0 / (32.0 * PI)).sqrt() * s * s, 2.0 * d.phi);
        assert!((eval_ylm(2, 1, d).unwrap() - y21).norm() < 1e-13);
        assert!((eval_ylm(2, 2, d).unwrap() - y22).norm() < 1e-13);
    }

    #[test]
    fn legendre_stays_finite_at_high_degree() {
        for theta in [1e-3, 0.5, PI / 2.0, 3.0] {
            let t = normalized_legendre(129, theta);
            assert!(t.iter().all(|v| v.is_finite()));
        }
    }

    #[test]
    fn weights_integrate_polynomials() {
        for b in [1, 2, 4, 8, 16] {
            let w = quadrature_weights(b);
            assert!(w.ring_weights().iter().all(|&x| x > 0.0));
            for p in 0..2 * b {
                let got: f64 = (0..2 * b)
                    .map(|j| w.ring_weights()[j] * theta_node(j, b).cos().powi(p as i32))
                    .sum();
                let want = if p % 2 == 0 { 2.0 / (p as f64 + 1.0) } else { 0.0 };
                assert!((got - want).abs() < 1e-12, "B={b} p={p}: {got} vs {want}");
            }
        }
    }

    #[test]
    fn constant_signal() {
        let b = 6;
        let ones = SphereGrid::from_fn(b, |_| 1.0);
        let w = quadrature_weights(b);
        assert!((w.integrate(&ones) - 4.0 * PI).abs() < 1e-9);
        let c = forward_sht(&ones, &w).unwrap();
        for (l, m, v) in c.iter() {
            let want = if l == 0 { 2.0 * PI.sqrt() } else { 0.0 };
            assert!((v.re - want).abs() < 1e-9 && v.im.abs() < 1e-9, "{l} {m} {v}");
        }
        let back = inverse_sht(&c).unwrap();
        assert!(back.values().iter().all(|v| (v - 1.0).abs() < 1e-9));
    }

    #[test]
    fn dimension_checks() {
        let w = quadrature_weights(4);
        let g = SphereGrid::zeros(3);
        assert!(matches!(forward_sht(&g, &w), Err(Error::DimensionMismatch { .. })));
        let mut c = HarmonicCoeffs::zeros(4);
        c.set(2, 1, Complex64::new(1.0, 0.0));
        assert!(matches!(inverse_sht(&c), Err(Error::SymmetryViolation { .. })));
    }

    #[test]
    fn single_cell_signal_round_trips_as_projection() {
        let b = 8;
        let mut g = SphereGrid::zeros(b);
        g.set(5, 3, 1.0);
        let plan = ShtPlan::new(b);
        let c = plan.forward(&g).unwrap();
        assert!(c.real_symmetry_residue() < 1e-12);
        let projected = plan.inverse(&c).unwrap();
        let again = plan.forward(&projected).unwrap();
        for (a, z) in c.as_slice().iter().zip(again.as_slice()) {
            assert!((a - z).norm() < 1e-9);
        }
    }
}
