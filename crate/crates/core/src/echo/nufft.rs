//! Fast-time accumulation kernels.
//!
//! Every PRI row is a sum of complex exponentials at arbitrary beat
//! frequencies, `s[n] = Σ_j c_j exp(i ω_j n)` for `n = 0..N`. [`Gridder`]
//! evaluates it as a type-1 non-uniform FFT with Gaussian gridding
//! (Greengard & Lee, SIAM Review 2004): spread every source onto an
//! oversampled periodic grid, take one inverse FFT, divide out the Gaussian's
//! transform. [`direct_row`] is the exact O(N) per-source evaluation.

use std::sync::Arc;

use num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::scalar::{cis, Real};

/// Gaussian half-width in grid cells. Twelve cells give roughly 1e-12
/// relative accuracy at 2× oversampling.
const SPREAD: usize = 12;

/// Smallest 2·3·5-smooth integer ≥ `n`.
pub fn smooth_size(n: usize) -> usize {
    let mut m = n.max(1);
    loop {
        let mut r = m;
        for p in [2, 3, 5] {
            while r % p == 0 {
                r /= p;
            }
        }
        if r == 1 {
            return m;
        }
        m += 1;
    }
}

pub struct Gridder<T: Real> {
    n: usize,
    grid_len: usize,
    offset: usize,
    /// `exp(-(q h)² / 4τ)` for `q = -SPREAD+1 ..= SPREAD`.
    e3: Vec<T>,
    h_over_2tau: T,
    inv_4tau: T,
    h: T,
    deconv: Vec<T>,
    fft: Arc<dyn Fft<T>>,
    grid: Vec<Complex<T>>,
    scratch: Vec<Complex<T>>,
}

impl<T: Real> Gridder<T> {
    pub fn new(n: usize) -> Self {
        let grid_len = smooth_size(2 * n).max(2 * SPREAD + 1);
        let ratio = grid_len as f64 / n as f64;
        let tau = std::f64::consts::PI * SPREAD as f64
            / ((n * n) as f64 * ratio * (ratio - 0.5));
        let h = 2.0 * std::f64::consts::PI / grid_len as f64;
        let e3 = (-(SPREAD as i64) + 1..=SPREAD as i64)
            .map(|q| T::lit((-(q as f64 * h).powi(2) / (4.0 * tau)).exp()))
            .collect();
        let offset = n / 2;
        let deconv = (0..n)
            .map(|i| {
                let k = i as f64 - offset as f64;
                T::lit((std::f64::consts::PI / tau).sqrt() * (k * k * tau).exp() / grid_len as f64)
            })
            .collect();
        let fft = FftPlanner::new().plan_fft_inverse(grid_len);
        let scratch = vec![Complex::default(); fft.get_inplace_scratch_len()];
        Gridder {
            n,
            grid_len,
            offset,
            e3,
            h_over_2tau: T::lit(h / (2.0 * tau)),
            inv_4tau: T::lit(1.0 / (4.0 * tau)),
            h: T::lit(h),
            deconv,
            fft,
            grid: vec![Complex::default(); grid_len],
            scratch,
        }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn clear(&mut self) {
        self.grid.iter_mut().for_each(|g| *g = Complex::default());
    }

    /// Adds the source `c · exp(i ω n)`.
    pub fn add(&mut self, c: Complex<T>, omega: T) {
        let two_pi = T::two_pi();
        let c = c * cis(omega * T::lit(self.offset as f64));
        let mut x = omega % two_pi;
        if x < T::zero() {
            x += two_pi;
        }
        let cell = (x / self.h).floor();
        let d = x - cell * self.h;
        let l0 = cell.as_usize().min(self.grid_len - 1);
        let e1 = (-(d * d) * self.inv_4tau).exp();
        let e2 = (d * self.h_over_2tau).exp();
        let inv_e2 = T::one() / e2;
        let s = SPREAD as isize;
        let base = c * e1;
        let mut up = T::one();
        let mut down = inv_e2;
        let gl = self.grid_len as isize;
        let idx = |q: isize| -> usize {
            let i = l0 as isize + q;
            (if i < 0 {
                i + gl
            } else if i >= gl {
                i - gl
            } else {
                i
            }) as usize
        };
        for q in 0..=s {
            let w = up * self.e3[(q + s - 1) as usize];
            self.grid[idx(q)] += base * w;
            up *= e2;
        }
        for q in 1..s {
            let w = down * self.e3[(s - 1 - q) as usize];
            self.grid[idx(-q)] += base * w;
            down *= inv_e2;
        }
    }

    /// Writes the accumulated row into `out` (length N) and clears the grid.
    pub fn finish(&mut self, out: &mut [Complex<T>]) {
        debug_assert_eq!(out.len(), self.n);
        self.fft.process_with_scratch(&mut self.grid, &mut self.scratch);
        let gl = self.grid_len as isize;
        for (i, o) in out.iter_mut().enumerate() {
            let k = i as isize - self.offset as isize;
            let j = if k < 0 { k + gl } else { k } as usize;
            *o = self.grid[j] * self.deconv[i];
        }
        self.clear();
    }
}

/// Exact `out[n] += Σ c exp(i ω n)`.
pub fn direct_row<T: Real>(sources: &[(Complex<T>, T)], out: &mut [Complex<T>]) {
    for &(c, omega) in sources {
        for (n, o) in out.iter_mut().enumerate() {
            *o += c * cis(omega * T::lit(n as f64));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    #[test]
    fn smooth_sizes() {
        assert_eq!(smooth_size(1334), 1350);
        assert_eq!(smooth_size(128), 128);
        assert_eq!(smooth_size(7), 8);
    }

    fn compare(n: usize, sources: usize, seed: u64) -> f64 {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let src: Vec<(Complex<f64>, f64)> = (0..sources)
            .map(|_| {
                (
                    Complex::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)),
                    rng.random_range(-7.0..7.0),
                )
            })
            .collect();
        let mut exact = vec![Complex::default(); n];
        direct_row(&src, &mut exact);
        let mut g = Gridder::new(n);
        for &(c, w) in &src {
            g.add(c, w);
        }
        let mut fast = vec![Complex::default(); n];
        g.finish(&mut fast);
        let err: f64 = exact.iter().zip(&fast).map(|(a, b)| (a - b).norm_sqr()).sum();
        let norm: f64 = exact.iter().map(|a| a.norm_sqr()).sum();
        (err / norm).sqrt()
    }

    #[test]
    fn gridder_matches_direct_sum() {
        for (n, s, seed) in [(667, 300, 1), (64, 50, 2), (65, 10, 3), (16, 5, 4)] {
            let e = compare(n, s, seed);
            assert!(e < 1e-10, "N = {n}: relative error {e:e}");
        }
    }

    #[test]
    fn gridder_single_width() {
        let n = 333;
        let mut g = Gridder::<f32>::new(n);
        g.add(Complex::new(1.0, 0.0), 0.3);
        let mut out = vec![Complex::default(); n];
        g.finish(&mut out);
        for (i, o) in out.iter().enumerate() {
            let e = cis(0.3f32 * i as f32);
            assert!((o - e).norm() < 1e-4, "{i}: {o} vs {e}");
        }
    }
}
