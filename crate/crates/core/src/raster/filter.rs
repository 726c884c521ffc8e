use alloc::vec;
use alloc::vec::Vec;

use super::kernel::{ideal_lowpass_kernel, mtf_gaussian_kernel, Kernel2D, MtfSpec};
use crate::error::{Error, Result};
use crate::math;
use crate::types::Grid;

/// Maps any integer index onto `0..n` with half-sample symmetric reflection.
#[inline]
pub fn reflect_index(i: isize, n: usize) -> usize {
    let period = 2 * n as isize;
    let m = i.rem_euclid(period);
    if m < n as isize {
        m as usize
    } else {
        (period - 1 - m) as usize
    }
}

fn check_support(band: &Grid, radius: usize) -> Result<()> {
    if band.width() < radius || band.height() < radius {
        return Err(Error::TooSmall { width: band.width(), height: band.height(), needed: radius });
    }
    Ok(())
}

/// Same-size 2-D convolution with reflected borders.
pub fn convolve_reflect(band: &Grid, kernel: &Kernel2D) -> Result<Grid> {
    let radius = kernel.radius();
    check_support(band, radius)?;
    let (w, h) = (band.width(), band.height());
    let r = radius as isize;
    if let Some(f) = kernel.factor() {
        let rows: Vec<usize> = (0..h).collect();
        let cols: Vec<usize> = (0..w).collect();
        return Ok(separable_at(band, f, &rows, &cols));
    }
    let src = band.data();
    let mut out = Vec::with_capacity(w * h);
    for i in 0..h {
        for j in 0..w {
            let mut acc = 0.0;
            for a in -r..=r {
                let row = reflect_index(i as isize - a, h) * w;
                let krow = (a + r) as usize;
                for b in -r..=r {
                    let col = reflect_index(j as isize - b, w);
                    acc += kernel.get(krow, (b + r) as usize) * src[row + col];
                }
            }
            out.push(acc);
        }
    }
    Grid::new(w, h, out)
}

/// Separable convolution evaluated only at the requested output rows and
/// columns: a horizontal pass over every input row, then a vertical pass.
fn separable_at(band: &Grid, factor: &[f64], out_rows: &[usize], out_cols: &[usize]) -> Grid {
    let (w, h) = (band.width(), band.height());
    let r = (factor.len() / 2) as isize;
    let src = band.data();
    let nc = out_cols.len();
    let mut tmp = vec![0.0; h * nc];
    for i in 0..h {
        let line = &src[i * w..(i + 1) * w];
        for (jj, &j) in out_cols.iter().enumerate() {
            let mut acc = 0.0;
            for b in -r..=r {
                acc += factor[(b + r) as usize] * line[reflect_index(j as isize - b, w)];
            }
            tmp[i * nc + jj] = acc;
        }
    }
    let mut out = Vec::with_capacity(out_rows.len() * nc);
    for &i in out_rows {
        for jj in 0..nc {
            let mut acc = 0.0;
            for a in -r..=r {
                acc += factor[(a + r) as usize] * tmp[reflect_index(i as isize - a, h) * nc + jj];
            }
            out.push(acc);
        }
    }
    Grid::new(nc, out_rows.len(), out).expect("non-empty output")
}

fn check_divisible(band: &Grid, ratio: usize) -> Result<()> {
    if ratio == 0 || !band.width().is_multiple_of(ratio) || !band.height().is_multiple_of(ratio) {
        return Err(Error::NonDivisible { width: band.width(), height: band.height(), ratio });
    }
    Ok(())
}

/// Keeps the center sample of every `ratio x ratio` block.
pub fn decimate(band: &Grid, ratio: usize) -> Result<Grid> {
    check_divisible(band, ratio)?;
    let offset = ratio / 2;
    let (w, h) = (band.width() / ratio, band.height() / ratio);
    Ok(Grid::from_fn(w, h, |i, j| band.get(i * ratio + offset, j * ratio + offset)))
}

/// Low-pass filter and decimation, the single definition of "spatially
/// degraded" used both to simulate reduced-resolution data and by D_lambda.
#[derive(Debug, Clone, PartialEq)]
pub struct Degradation {
    kernel: Kernel2D,
    ratio: usize,
}

impl Degradation {
    pub fn new(kernel: Kernel2D, ratio: usize) -> Result<Self> {
        if ratio < 2 {
            return Err(Error::InvalidFilter("ratio must be at least 2".into()));
        }
        Ok(Self { kernel, ratio })
    }

    /// Gaussian MTF-matched filter.
    pub fn mtf(spec: &MtfSpec) -> Result<Self> {
        Self::new(mtf_gaussian_kernel(spec)?, spec.ratio)
    }

    /// Windowed-sinc ideal low-pass, for sensitivity studies without a sensor model.
    pub fn ideal(ratio: usize, kernel_size: usize) -> Result<Self> {
        Self::new(ideal_lowpass_kernel(ratio, kernel_size)?, ratio)
    }

    #[inline]
    pub fn ratio(&self) -> usize {
        self.ratio
    }

    #[inline]
    pub fn kernel(&self) -> &Kernel2D {
        &self.kernel
    }

    /// Equivalent to `decimate(convolve_reflect(band, kernel), ratio)` but
    /// only evaluates the retained samples.
    pub fn apply(&self, band: &Grid) -> Result<Grid> {
        check_divisible(band, self.ratio)?;
        check_support(band, self.kernel.radius())?;
        let offset = self.ratio / 2;
        let rows: Vec<usize> = (0..band.height() / self.ratio).map(|i| i * self.ratio + offset).collect();
        let cols: Vec<usize> = (0..band.width() / self.ratio).map(|j| j * self.ratio + offset).collect();
        if let Some(f) = self.kernel.factor() {
            return Ok(separable_at(band, f, &rows, &cols));
        }
        let full = convolve_reflect(band, &self.kernel)?;
        decimate(&full, self.ratio)
    }
}

/// MTF-matched degradation of one band by `spec.ratio`.
pub fn degrade(band: &Grid, spec: &MtfSpec) -> Result<Grid> {
    Degradation::mtf(spec)?.apply(band)
}

/// Catmull-Rom weights for taps at offsets -1, 0, 1, 2 around fraction `t`.
#[inline]
fn catmull_rom(t: f64) -> [f64; 4] {
    let t2 = t * t;
    let t3 = t2 * t;
    [
        0.5 * (-t3 + 2.0 * t2 - t),
        0.5 * (3.0 * t3 - 5.0 * t2 + 2.0),
        0.5 * (-3.0 * t3 + 4.0 * t2 + t),
        0.5 * (t3 - t2),
    ]
}

/// Per output index: base input index and the four tap weights.
fn cubic_taps(n_out: usize, ratio: usize) -> Vec<(isize, [f64; 4])> {
    let offset = (ratio / 2) as f64;
    (0..n_out)
        .map(|p| {
            let u = (p as f64 - offset) / ratio as f64;
            let base = math::floor(u);
            (base as isize, catmull_rom(u - base))
        })
        .collect()
}

/// Bicubic (Catmull-Rom) interpolation by an integer factor.
///
/// Output sample `i * ratio + ratio / 2` coincides with input sample `i`.
pub fn upsample_interp(band: &Grid, ratio: usize) -> Grid {
    assert!(ratio >= 1, "ratio must be positive");
    let (w, h) = (band.width(), band.height());
    let (ow, oh) = (w * ratio, h * ratio);
    let col_taps = cubic_taps(ow, ratio);
    let row_taps = cubic_taps(oh, ratio);
    let src = band.data();
    let mut tmp = vec![0.0; h * ow];
    for i in 0..h {
        let line = &src[i * w..(i + 1) * w];
        for (q, (base, wts)) in col_taps.iter().enumerate() {
            let mut acc = 0.0;
            for (k, wt) in wts.iter().enumerate() {
                acc += wt * line[reflect_index(base + k as isize - 1, w)];
            }
            tmp[i * ow + q] = acc;
        }
    }
    let mut out = Vec::with_capacity(oh * ow);
    for (base, wts) in &row_taps {
        let rows: [usize; 4] = core::array::from_fn(|k| reflect_index(base + k as isize - 1, h));
        for q in 0..ow {
            let mut acc = 0.0;
            for k in 0..4 {
                acc += wts[k] * tmp[rows[k] * ow + q];
            }
            out.push(acc);
        }
    }
    Grid::new(ow, oh, out).expect("non-empty output")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::raster::kernel::default_kernel_size;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_grid(rng: &mut ChaCha8Rng, w: usize, h: usize) -> Grid {
        Grid::from_fn(w, h, |_, _| rng.random::<f64>())
    }

    /// Brute-force convolution with explicit mirrored padding.
    fn oracle_convolve(x: &Grid, k: &Kernel2D) -> Grid {
        let r = k.radius() as isize;
        let (w, h) = (x.width() as isize, x.height() as isize);
        let mirror = |i: isize, n: isize| -> usize {
            let mut i = i;
            while i < 0 || i >= n {
                i = if i < 0 { -i - 1 } else { 2 * n - 1 - i };
            }
            i as usize
        };
        Grid::from_fn(x.width(), x.height(), |i, j| {
            let mut acc = 0.0;
            for a in -r..=r {
                for b in -r..=r {
                    let v = x.get(mirror(i as isize - a, h), mirror(j as isize - b, w));
                    acc += k.get((a + r) as usize, (b + r) as usize) * v;
                }
            }
            acc
        })
    }

    #[test]
    fn reflect_rule() {
        let idx: Vec<usize> = (-3..7).map(|i| reflect_index(i, 4)).collect();
        assert_eq!(idx, vec![2, 1, 0, 0, 1, 2, 3, 3, 2, 1]);
        assert_eq!(reflect_index(-5, 1), 0);
        assert_eq!(reflect_index(3, 1), 0);
    }

    #[test]
    fn constant_is_preserved() {
        let spec = MtfSpec::new(0.3, 6).unwrap();
        let k = mtf_gaussian_kernel(&spec).unwrap();
        let g = Grid::filled(24, 24, 3.25);
        let out = convolve_reflect(&g, &k).unwrap();
        assert!(out.data().iter().all(|v| (v - 3.25).abs() < 1e-12));
    }

    #[test]
    fn impulse_response() {
        let k = Kernel2D::new(3, (1..=9).map(|v| v as f64).collect()).unwrap();
        let mut g = Grid::filled(9, 9, 0.0);
        g.set(4, 4, 1.0);
        let out = convolve_reflect(&g, &k).unwrap();
        for a in 0..3 {
            for b in 0..3 {
                assert_eq!(out.get(3 + a, 3 + b), k.get(a, b));
            }
        }
        assert_eq!(out.data().iter().sum::<f64>(), 45.0);
    }

    #[test]
    fn matches_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let x = random_grid(&mut rng, 8, 8);
        let k = Kernel2D::new(3, (0..9).map(|_| rng.random::<f64>() - 0.5).collect()).unwrap();
        let out = convolve_reflect(&x, &k).unwrap();
        let want = oracle_convolve(&x, &k);
        for (a, b) in out.data().iter().zip(want.data()) {
            assert!((a - b).abs() < 1e-6);
        }
        let sep = Kernel2D::separable(vec![0.25, 0.5, 0.25]).unwrap();
        let out = convolve_reflect(&x, &sep).unwrap();
        let want = oracle_convolve(&x, &sep);
        for (a, b) in out.data().iter().zip(want.data()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_band_smaller_than_radius() {
        let k = Kernel2D::separable(vec![0.2; 5]).unwrap();
        assert!(convolve_reflect(&Grid::filled(1, 3, 0.0), &k).is_err());
        assert!(convolve_reflect(&Grid::filled(2, 2, 0.0), &k).is_ok());
    }

    #[test]
    fn decimate_examples() {
        assert_eq!(decimate(&Grid::filled(6, 6, 5.0), 6).unwrap().data(), &[5.0]);
        let mut g = Grid::filled(12, 12, 0.0);
        g.set(3, 3, 1.0);
        assert_eq!(decimate(&g, 6).unwrap().data(), &[1.0, 0.0, 0.0, 0.0]);
        let err = decimate(&Grid::filled(5, 6, 0.0), 6).unwrap_err();
        assert!(matches!(err, Error::NonDivisible { .. }));
    }

    #[test]
    fn degrade_matches_convolve_then_sample() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let x = random_grid(&mut rng, 384, 384);
        let spec = MtfSpec::new(0.3, 6).unwrap();
        let out = degrade(&x, &spec).unwrap();
        assert_eq!((out.width(), out.height()), (64, 64));
        let full = convolve_reflect(&x, &mtf_gaussian_kernel(&spec).unwrap()).unwrap();
        for i in 0..64 {
            for j in 0..64 {
                assert!((out.get(i, j) - full.get(6 * i + 3, 6 * j + 3)).abs() < 1e-6);
            }
        }
        // The brute-force oracle on a smaller tile.
        let y = random_grid(&mut rng, 48, 42);
        let k = mtf_gaussian_kernel(&spec).unwrap();
        let want = oracle_convolve(&y, &k);
        let got = degrade(&y, &spec).unwrap();
        for i in 0..got.height() {
            for j in 0..got.width() {
                assert!((got.get(i, j) - want.get(6 * i + 3, 6 * j + 3)).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn degrade_constant_and_ramp() {
        let spec = MtfSpec::new(0.3, 6).unwrap();
        let out = degrade(&Grid::filled(48, 48, -2.5), &spec).unwrap();
        assert!(out.data().iter().all(|&v| (v + 2.5).abs() < 1e-12));
        let ramp = Grid::from_fn(96, 96, |i, j| 0.01 * i as f64 + 0.02 * j as f64);
        let out = degrade(&ramp, &spec).unwrap();
        let margin = default_kernel_size(6) / 2 / 6 + 1;
        for i in margin..16 - margin {
            for j in margin..16 - margin {
                let want = 0.01 * (6 * i + 3) as f64 + 0.02 * (6 * j + 3) as f64;
                assert!((out.get(i, j) - want).abs() < 1e-3);
            }
        }
    }

    #[test]
    fn ideal_degradation_is_consistent_on_constants() {
        let d = Degradation::ideal(6, 41).unwrap();
        let out = d.apply(&Grid::filled(60, 60, 1.5)).unwrap();
        assert!(out.data().iter().all(|&v| (v - 1.5).abs() < 1e-12));
    }

    #[test]
    fn upsample_constant_and_single_pixel() {
        let out = upsample_interp(&Grid::filled(3, 2, 4.0), 6);
        assert_eq!((out.width(), out.height()), (18, 12));
        assert!(out.data().iter().all(|&v| (v - 4.0).abs() < 1e-12));
        let one = upsample_interp(&Grid::filled(1, 1, 0.7), 6);
        assert_eq!(one.len(), 36);
        assert!(one.data().iter().all(|&v| (v - 0.7).abs() < 1e-12));
    }

    #[test]
    fn upsample_hits_original_samples() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let x = random_grid(&mut rng, 5, 4);
        let up = upsample_interp(&x, 6);
        for i in 0..4 {
            for j in 0..5 {
                assert!((up.get(6 * i + 3, 6 * j + 3) - x.get(i, j)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn degrade_of_upsample_round_trip() {
        // Smooth 16x16 field: sum of two low-frequency sinusoids.
        let x = Grid::from_fn(16, 16, |i, j| {
            let (u, v) = (i as f64 / 16.0, j as f64 / 16.0);
            (2.0 * core::f64::consts::PI * u).sin() + 0.5 * (2.0 * core::f64::consts::PI * v).cos()
        });
        let spec = MtfSpec::new(0.3, 6).unwrap();
        let back = degrade(&upsample_interp(&x, 6), &spec).unwrap();
        let lo = x.data().iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = x.data().iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let mad = x.data().iter().zip(back.data()).map(|(a, b)| (a - b).abs()).sum::<f64>()
            / x.len() as f64;
        assert!(mad <= 0.02 * (hi - lo), "mad {mad} range {}", hi - lo);
    }
}
