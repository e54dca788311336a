//! Uniform periodic grid on `[-a, a)` with its discrete Fourier transform.
//!
//! Nodes are `x_k = -a + k h` for `k = 0..N`, `h = 2a / N`; the point `x = a`
//! is identified with `x = -a`. Spectral arrays are stored in natural FFT
//! order: index `k` holds mode `m = k` for `k < N/2` and `m = k - N`
//! otherwise, with angular frequency `nu_m = pi m / a`.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{check_len, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Inverse,
}

#[derive(Clone)]
pub struct GridSpec {
    half_width: f64,
    n: usize,
    h: f64,
    nodes: Vec<f64>,
    freqs: Vec<f64>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for GridSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GridSpec")
            .field("half_width", &self.half_width)
            .field("n", &self.n)
            .field("h", &self.h)
            .finish()
    }
}

impl PartialEq for GridSpec {
    fn eq(&self, other: &Self) -> bool {
        self.half_width == other.half_width && self.n == other.n
    }
}

impl GridSpec {
    pub fn new(half_width: f64, n: usize) -> Result<Self> {
        if !(half_width.is_finite() && half_width > 0.0) {
            return Err(Error::Domain(format!(
                "grid half width must be positive and finite, got {half_width}"
            )));
        }
        if n < 8 || !n.is_power_of_two() {
            return Err(Error::Domain(format!(
                "grid point count must be a power of two >= 8, got {n}"
            )));
        }
        let h = 2.0 * half_width / n as f64;
        let nodes = (0..n).map(|k| -half_width + k as f64 * h).collect();
        let freqs = (0..n)
            .map(|k| PI * mode_number(k, n) as f64 / half_width)
            .collect();
        let mut planner = FftPlanner::new();
        Ok(Self {
            half_width,
            n,
            h,
            nodes,
            freqs,
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
        })
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn spacing(&self) -> f64 {
        self.h
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// Angular frequencies `nu_m` in natural FFT order.
    pub fn freqs(&self) -> &[f64] {
        &self.freqs
    }

    pub fn spectral_transform(
        &self,
        field: &[Complex64],
        direction: Direction,
    ) -> Result<Vec<Complex64>> {
        check_len(self.n, field.len())?;
        let mut out = field.to_vec();
        match direction {
            Direction::Forward => self.forward_in_place(&mut out),
            Direction::Inverse => self.inverse_in_place(&mut out),
        }
        Ok(out)
    }

    /// Unnormalized forward DFT in place. Panics on length mismatch.
    pub fn forward_in_place(&self, buf: &mut [Complex64]) {
        self.forward.process(buf);
    }

    /// Inverse DFT in place, including the `1/N` factor.
    pub fn inverse_in_place(&self, buf: &mut [Complex64]) {
        self.inverse.process(buf);
        let scale = 1.0 / self.n as f64;
        buf.iter_mut().for_each(|z| *z *= scale);
    }

    pub(crate) fn forward_with_scratch(&self, buf: &mut [Complex64], scratch: &mut [Complex64]) {
        self.forward.process_with_scratch(buf, scratch);
    }

    pub(crate) fn inverse_with_scratch(&self, buf: &mut [Complex64], scratch: &mut [Complex64]) {
        self.inverse.process_with_scratch(buf, scratch);
        let scale = 1.0 / self.n as f64;
        buf.iter_mut().for_each(|z| *z *= scale);
    }

    pub(crate) fn scratch_len(&self) -> usize {
        self.forward
            .get_inplace_scratch_len()
            .max(self.inverse.get_inplace_scratch_len())
    }

    /// Spectral first derivative. The Nyquist mode is dropped so that real
    /// fields have real derivatives.
    pub fn spectral_derivative(&self, field: &[Complex64]) -> Result<Vec<Complex64>> {
        check_len(self.n, field.len())?;
        let mut buf = field.to_vec();
        self.forward_in_place(&mut buf);
        let nyquist = self.n / 2;
        for (k, (z, &nu)) in buf.iter_mut().zip(&self.freqs).enumerate() {
            *z = if k == nyquist {
                Complex64::new(0.0, 0.0)
            } else {
                *z * Complex64::new(0.0, nu)
            };
        }
        self.inverse_in_place(&mut buf);
        Ok(buf)
    }

    /// Rectangle rule `h * sum(field)`; spectrally accurate for smooth periodic data.
    pub fn quadrature(&self, field: &[f64]) -> Result<f64> {
        check_len(self.n, field.len())?;
        Ok(self.h * field.iter().sum::<f64>())
    }

    /// Trigonometric interpolant of nodal samples, returning value and first
    /// two derivatives at an arbitrary `x`.
    pub fn interpolate(&self, spectrum: &[Complex64], x: f64) -> [Complex64; 3] {
        let n = self.n as f64;
        let s = x + self.half_width;
        let nyquist = self.n / 2;
        let mut out = [Complex64::new(0.0, 0.0); 3];
        for (k, (&c, &nu)) in spectrum.iter().zip(&self.freqs).enumerate() {
            // Split the Nyquist mode symmetrically so real samples interpolate to real values.
            let terms: &[(f64, f64)] = if k == nyquist {
                &[(nu, 0.5), (-nu, 0.5)]
            } else {
                &[(nu, 1.0)]
            };
            for &(freq, weight) in terms {
                let e = Complex64::cis(freq * s) * c * (weight / n);
                out[0] += e;
                out[1] += e * Complex64::new(0.0, freq);
                out[2] += e * (-freq * freq);
            }
        }
        out
    }

    /// Band-limited translation `f(x) -> f(x - shift)` on the periodic grid.
    pub fn translate(&self, field: &[Complex64], shift: f64) -> Result<Vec<Complex64>> {
        check_len(self.n, field.len())?;
        let mut buf = field.to_vec();
        self.forward_in_place(&mut buf);
        let nyquist = self.n / 2;
        for (k, (z, &nu)) in buf.iter_mut().zip(&self.freqs).enumerate() {
            *z *= if k == nyquist {
                Complex64::new((nu * shift).cos(), 0.0)
            } else {
                Complex64::cis(-nu * shift)
            };
        }
        self.inverse_in_place(&mut buf);
        Ok(buf)
    }

    /// Index of the node nearest to `x`, wrapping periodically.
    pub fn nearest_index(&self, x: f64) -> usize {
        let s = (x + self.half_width) / self.h;
        (s.round() as i64).rem_euclid(self.n as i64) as usize
    }
}

/// Signed mode number of FFT index `k` for a length-`n` transform.
pub fn mode_number(k: usize, n: usize) -> i64 {
    if k < n / 2 {
        k as i64
    } else {
        k as i64 - n as i64
    }
}

pub fn make_grid(half_width: f64, n: usize) -> Result<GridSpec> {
    GridSpec::new(half_width, n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    /// Direct evaluation of the defining sums.
    fn naive_dft(grid: &GridSpec, field: &[Complex64], direction: Direction) -> Vec<Complex64> {
        let n = grid.len();
        let x0 = grid.nodes()[0];
        (0..n)
            .map(|out| match direction {
                Direction::Forward => {
                    let nu = grid.freqs()[out];
                    (0..n)
                        .map(|l| field[l] * Complex64::cis(-nu * (grid.nodes()[l] - x0)))
                        .sum()
                }
                Direction::Inverse => {
                    let x = grid.nodes()[out] - x0;
                    (0..n)
                        .map(|m| field[m] * Complex64::cis(grid.freqs()[m] * x))
                        .sum::<Complex64>()
                        / n as f64
                }
            })
            .collect()
    }

    fn pseudo_random_field(n: usize, seed: u64) -> Vec<Complex64> {
        // Small LCG; keeps the test free of an RNG dependency.
        let mut state = seed.wrapping_mul(6364136223846793005).wrapping_add(1);
        let mut next = move || {
            state = state
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            ((state >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
        };
        (0..n).map(|_| c(next(), next())).collect()
    }

    fn sup(a: &[Complex64], b: &[Complex64]) -> f64 {
        a.iter()
            .zip(b)
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max)
    }

    #[test]
    fn preset_grid_spacing() {
        let g = make_grid(20.0, 1024).unwrap();
        assert_eq!(g.spacing(), 0.0390625);
        assert_eq!(g.nodes()[0], -20.0);
        assert_eq!(*g.nodes().last().unwrap(), 20.0 - 0.0390625);

        let g = make_grid(200.0, 4096).unwrap();
        assert_eq!(g.spacing(), 400.0 / 4096.0);
    }

    #[test]
    fn small_grid_nodes_and_frequencies() {
        let g = make_grid(1.0, 8).unwrap();
        let expected = [-1.0, -0.75, -0.5, -0.25, 0.0, 0.25, 0.5, 0.75];
        assert_eq!(g.nodes(), &expected);
        assert!((g.freqs()[1] - PI).abs() < 1e-15);
        assert!((g.freqs()[7] + PI).abs() < 1e-15);
        assert!((g.freqs()[4] + 4.0 * PI).abs() < 1e-15);
        // nu_m = 2 pi m / L with L = 2a
        assert!((g.freqs()[3] - 2.0 * PI * 3.0 / 2.0).abs() < 1e-14);
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(matches!(make_grid(1.0, 12), Err(Error::Domain(_))));
        assert!(matches!(make_grid(1.0, 4), Err(Error::Domain(_))));
        assert!(matches!(make_grid(0.0, 16), Err(Error::Domain(_))));
        assert!(matches!(make_grid(-3.0, 16), Err(Error::Domain(_))));
        assert!(matches!(make_grid(f64::NAN, 16), Err(Error::Domain(_))));
    }

    #[test]
    fn length_mismatch_is_reported() {
        let g = make_grid(1.0, 8).unwrap();
        let err = g
            .spectral_transform(&[c(0.0, 0.0); 7], Direction::Forward)
            .unwrap_err();
        assert!(matches!(
            err,
            Error::LengthMismatch {
                expected: 8,
                got: 7
            }
        ));
        assert!(g.quadrature(&[0.0; 9]).is_err());
        assert!(g.spectral_derivative(&[c(0.0, 0.0); 3]).is_err());
    }

    #[test]
    fn constant_field_is_pure_dc() {
        let g = make_grid(3.0, 16).unwrap();
        let val = c(1.5, -0.5);
        let hat = g
            .spectral_transform(&vec![val; 16], Direction::Forward)
            .unwrap();
        assert!((hat[0] - val * 16.0).norm() < 1e-13);
        assert!(hat[1..].iter().all(|z| z.norm() < 1e-13));
    }

    #[test]
    fn single_mode_is_orthogonal() {
        let g = make_grid(2.0, 32).unwrap();
        let x0 = g.nodes()[0];
        let nu1 = g.freqs()[1];
        let field: Vec<_> = g
            .nodes()
            .iter()
            .map(|&x| Complex64::cis(nu1 * (x - x0)))
            .collect();
        let hat = g.spectral_transform(&field, Direction::Forward).unwrap();
        for (k, z) in hat.iter().enumerate() {
            let expected = if k == 1 { 32.0 } else { 0.0 };
            assert!((z - expected).norm() < 1e-12, "mode {k}: {z}");
        }
    }

    #[test]
    fn fft_matches_direct_summation() {
        let g = make_grid(5.0, 64).unwrap();
        let field = pseudo_random_field(64, 7);
        let fwd = g.spectral_transform(&field, Direction::Forward).unwrap();
        let fwd_naive = naive_dft(&g, &field, Direction::Forward);
        assert!(sup(&fwd, &fwd_naive) < 1e-11);
        let inv = g.spectral_transform(&fwd, Direction::Inverse).unwrap();
        let inv_naive = naive_dft(&g, &fwd_naive, Direction::Inverse);
        assert!(sup(&inv, &inv_naive) < 1e-12);
        assert!(sup(&inv, &field) < 1e-12);
    }

    #[test]
    fn derivative_of_fourier_mode() {
        let g = make_grid(20.0, 256).unwrap();
        let nu2 = g.freqs()[2];
        let field: Vec<_> = g.nodes().iter().map(|&x| Complex64::cis(nu2 * x)).collect();
        let d = g.spectral_derivative(&field).unwrap();
        let expected: Vec<_> = field.iter().map(|z| z * c(0.0, nu2)).collect();
        assert!(sup(&d, &expected) < 1e-10);

        let d0 = g.spectral_derivative(&vec![c(2.0, 1.0); 256]).unwrap();
        assert!(d0.iter().all(|z| z.norm() < 1e-13));
    }

    #[test]
    fn derivative_of_sech() {
        let g = make_grid(20.0, 1024).unwrap();
        let field: Vec<_> = g.nodes().iter().map(|&x| c(1.0 / x.cosh(), 0.0)).collect();
        let d = g.spectral_derivative(&field).unwrap();
        let exact: Vec<_> = g
            .nodes()
            .iter()
            .map(|&x| c(-x.tanh() / x.cosh(), 0.0))
            .collect();
        assert!(sup(&d, &exact) < 1e-8);
    }

    #[test]
    fn quadrature_values() {
        let g = make_grid(7.5, 64).unwrap();
        assert!((g.quadrature(&vec![1.0; 64]).unwrap() - 15.0).abs() < 1e-13);

        let g = make_grid(20.0, 1024).unwrap();
        let sech2: Vec<_> = g.nodes().iter().map(|&x| 1.0 / x.cosh().powi(2)).collect();
        assert!((g.quadrature(&sech2).unwrap() - 2.0).abs() < 1e-10);

        // |Q_5|^2 = 10 sech^2(sqrt 5 x); closed-form mass 4 sqrt 5.
        let omega: f64 = 5.0;
        let q2: Vec<_> = g
            .nodes()
            .iter()
            .map(|&x| 2.0 * omega / (omega.sqrt() * x).cosh().powi(2))
            .collect();
        assert!((g.quadrature(&q2).unwrap() - 4.0 * 5f64.sqrt()).abs() < 1e-8);
    }

    #[test]
    fn interpolation_reproduces_band_limited_field() {
        let g = make_grid(3.0, 32).unwrap();
        let nu = g.freqs()[3];
        let field: Vec<_> = g.nodes().iter().map(|&x| c((nu * x).cos(), 0.0)).collect();
        let hat = g.spectral_transform(&field, Direction::Forward).unwrap();
        for &x in &[-2.9, -0.123, 0.5, 2.71] {
            let [v, d1, d2] = g.interpolate(&hat, x);
            assert!((v.re - (nu * x).cos()).abs() < 1e-12);
            assert!((d1.re + nu * (nu * x).sin()).abs() < 1e-11);
            assert!((d2.re + nu * nu * (nu * x).cos()).abs() < 1e-10);
        }
    }

    #[test]
    fn translation_by_whole_cells_is_a_shift() {
        let g = make_grid(20.0, 512).unwrap();
        let field: Vec<_> = g
            .nodes()
            .iter()
            .map(|&x| c(1.0 / (x - 1.0).cosh(), 0.0))
            .collect();
        let moved = g.translate(&field, 3.0 * g.spacing()).unwrap();
        for k in 3..512 {
            assert!((moved[k] - field[k - 3]).norm() < 1e-12);
        }
    }

    proptest! {
        #[test]
        fn parseval_and_roundtrip(seed in any::<u64>(), log_n in 3usize..10, a in 0.5f64..50.0) {
            let n = 1usize << log_n;
            let g = make_grid(a, n).unwrap();
            let field = pseudo_random_field(n, seed);
            let hat = g.spectral_transform(&field, Direction::Forward).unwrap();
            let lhs = g.spacing() * field.iter().map(|z| z.norm_sqr()).sum::<f64>();
            let rhs = g.spacing() / n as f64 * hat.iter().map(|z| z.norm_sqr()).sum::<f64>();
            prop_assert!((lhs - rhs).abs() <= 1e-12 * lhs);

            let back = g.spectral_transform(&hat, Direction::Inverse).unwrap();
            let scale = field.iter().map(|z| z.norm()).fold(0.0, f64::max);
            prop_assert!(sup(&back, &field) <= 1e-12 * scale);
            let other = g.spectral_transform(&g.spectral_transform(&field, Direction::Inverse).unwrap(), Direction::Forward).unwrap();
            prop_assert!(sup(&other, &field) <= 1e-12 * scale);
        }

        #[test]
        fn derivative_integrates_to_zero(seed in any::<u64>(), log_n in 3usize..10) {
            let n = 1usize << log_n;
            let g = make_grid(4.0, n).unwrap();
            let field = pseudo_random_field(n, seed);
            let d = g.spectral_derivative(&field).unwrap();
            let re: Vec<f64> = d.iter().map(|z| z.re).collect();
            let im: Vec<f64> = d.iter().map(|z| z.im).collect();
            prop_assert!(g.quadrature(&re).unwrap().abs() < 1e-10);
            prop_assert!(g.quadrature(&im).unwrap().abs() < 1e-10);
        }
    }
}
