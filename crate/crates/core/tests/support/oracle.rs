//! Straight-line reference implementations of the quality indices, written
//! without any of the library's filtering or regression code.
#![allow(clippy::needless_range_loop)]
#![allow(dead_code)]

use hspan_core::HyperCube;

/// Band-major copy of a cube as `f64`.
pub struct Bands {
    pub width: usize,
    pub height: usize,
    pub data: Vec<Vec<f64>>,
}

impl Bands {
    pub fn of(cube: &HyperCube) -> Self {
        Self {
            width: cube.width(),
            height: cube.height(),
            data: (0..cube.bands()).map(|b| cube.band(b).iter().map(|&v| v as f64).collect()).collect(),
        }
    }

    pub fn single(width: usize, height: usize, values: &[f32]) -> Self {
        Self { width, height, data: vec![values.iter().map(|&v| v as f64).collect()] }
    }
}

fn mirror(mut i: isize, n: isize) -> usize {
    while i < 0 || i >= n {
        i = if i < 0 { -i - 1 } else { 2 * n - 1 - i };
    }
    i as usize
}

/// Full 2-D convolution with mirrored borders; `k` is `size x size` row-major.
pub fn convolve(band: &[f64], w: usize, h: usize, k: &[f64], size: usize) -> Vec<f64> {
    let r = (size / 2) as isize;
    let mut out = vec![0.0; w * h];
    for i in 0..h as isize {
        for j in 0..w as isize {
            let mut acc = 0.0;
            for a in -r..=r {
                for b in -r..=r {
                    let kv = k[((a + r) as usize) * size + (b + r) as usize];
                    acc += kv * band[mirror(i - a, h as isize) * w + mirror(j - b, w as isize)];
                }
            }
            out[i as usize * w + j as usize] = acc;
        }
    }
    out
}

/// Gaussian whose Fourier amplitude at the coarse Nyquist frequency is `gain`,
/// found by bisection on the continuous transform `exp(-2 pi^2 s^2 f^2)`.
pub fn gaussian_kernel(gain: f64, ratio: usize, size: usize) -> Vec<f64> {
    let f = 0.5 / ratio as f64;
    let (mut lo, mut hi) = (1e-6, 100.0);
    for _ in 0..200 {
        let s = 0.5 * (lo + hi);
        let amp = (-2.0 * std::f64::consts::PI.powi(2) * s * s * f * f).exp();
        if amp > gain {
            lo = s;
        } else {
            hi = s;
        }
    }
    let sigma = 0.5 * (lo + hi);
    let r = (size / 2) as f64;
    let mut k = Vec::with_capacity(size * size);
    for a in 0..size {
        for b in 0..size {
            let (y, x) = (a as f64 - r, b as f64 - r);
            k.push((-(x * x + y * y) / (2.0 * sigma * sigma)).exp());
        }
    }
    let total: f64 = k.iter().sum();
    k.iter().map(|v| v / total).collect()
}

pub fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

pub fn rmse(x: &[f64], y: &[f64]) -> f64 {
    let mut ss = 0.0;
    for i in 0..x.len() {
        ss += (x[i] - y[i]).powi(2);
    }
    (ss / x.len() as f64).sqrt()
}

pub fn ergas(x: &Bands, y: &Bands, h_over_l: f64) -> f64 {
    let mut acc = 0.0;
    for b in 0..x.data.len() {
        acc += (rmse(&x.data[b], &y.data[b]) / mean(&y.data[b])).powi(2);
    }
    100.0 * h_over_l * (acc / x.data.len() as f64).sqrt()
}

/// Mean spectral angle in degrees via the arc cosine; pixels with a zero
/// spectrum are skipped.
pub fn sam(x: &Bands, y: &Bands) -> f64 {
    let n = x.width * x.height;
    let (mut total, mut count) = (0.0, 0);
    for p in 0..n {
        let (mut dot, mut nx, mut ny) = (0.0, 0.0, 0.0);
        for b in 0..x.data.len() {
            dot += x.data[b][p] * y.data[b][p];
            nx += x.data[b][p].powi(2);
            ny += y.data[b][p].powi(2);
        }
        if nx == 0.0 || ny == 0.0 {
            continue;
        }
        total += (dot / (nx.sqrt() * ny.sqrt())).clamp(-1.0, 1.0).acos();
        count += 1;
    }
    total / count as f64 * 180.0 / std::f64::consts::PI
}

pub fn pearson(x: &[f64], y: &[f64]) -> f64 {
    let (mx, my) = (mean(x), mean(y));
    let cov: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let vx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let vy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    cov / (vx * vy).sqrt()
}

pub fn scc(x: &Bands, y: &Bands) -> f64 {
    let f = [-1.0, -1.0, -1.0, -1.0, 8.0, -1.0, -1.0, -1.0, -1.0];
    let mut total = 0.0;
    for b in 0..x.data.len() {
        let fx = convolve(&x.data[b], x.width, x.height, &f, 3);
        let fy = convolve(&y.data[b], y.width, y.height, &f, 3);
        total += pearson(&fx, &fy);
    }
    total / x.data.len() as f64
}

/// Single-window UQI from the closed form `4 s_xy m_x m_y / ((s_x^2 + s_y^2)(m_x^2 + m_y^2))`.
pub fn uqi_global(x: &[f64], y: &[f64]) -> f64 {
    let (mx, my) = (mean(x), mean(y));
    let n = x.len() as f64;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum::<f64>() / n;
    let syy: f64 = y.iter().map(|b| (b - my).powi(2)).sum::<f64>() / n;
    4.0 * sxy * mx * my / ((sxx + syy) * (mx * mx + my * my))
}

/// Mean UQI over bands; only valid for bands no larger than one block.
pub fn q_avg_small(x: &Bands, y: &Bands) -> f64 {
    assert!(x.width <= 32 && x.height <= 32);
    let total: f64 = (0..x.data.len()).map(|b| uqi_global(&x.data[b], &y.data[b])).sum();
    total / x.data.len() as f64
}

/// Gaussian blur, then keep the sample at offset `ratio / 2` of every block.
pub fn degrade(band: &[f64], w: usize, h: usize, gain: f64, ratio: usize, size: usize) -> Vec<f64> {
    let k = gaussian_kernel(gain, ratio, size);
    let blurred = convolve(band, w, h, &k, size);
    let mut out = Vec::new();
    for i in 0..h / ratio {
        for j in 0..w / ratio {
            out.push(blurred[(i * ratio + ratio / 2) * w + j * ratio + ratio / 2]);
        }
    }
    out
}

pub fn d_lambda(fused: &Bands, hs: &Bands, gain: f64, ratio: usize, size: usize) -> f64 {
    let degraded = Bands {
        width: hs.width,
        height: hs.height,
        data: fused.data.iter().map(|b| degrade(b, fused.width, fused.height, gain, ratio, size)).collect(),
    };
    1.0 - q_avg_small(&degraded, hs)
}

/// Solves `a x = b` by Gaussian elimination with partial pivoting.
pub fn solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for c in 0..n {
        let p = (c..n).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs())).unwrap();
        a.swap(c, p);
        b.swap(c, p);
        for r in c + 1..n {
            let f = a[r][c] / a[c][c];
            for k in c..n {
                a[r][k] -= f * a[c][k];
            }
            b[r] -= f * b[c];
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|k| a[r][k] * x[k]).sum();
        x[r] = (b[r] - s) / a[r][r];
    }
    x
}

/// R^2 of an ordinary least-squares fit with intercept, via normal equations.
pub fn r_squared(columns: &[Vec<f64>], target: &[f64]) -> f64 {
    let m = target.len();
    let design: Vec<Vec<f64>> = (0..m)
        .map(|i| std::iter::once(1.0).chain(columns.iter().map(|c| c[i])).collect())
        .collect();
    let p = columns.len() + 1;
    let mut ata = vec![vec![0.0; p]; p];
    let mut aty = vec![0.0; p];
    for (row, &y) in design.iter().zip(target) {
        for i in 0..p {
            aty[i] += row[i] * y;
            for j in 0..p {
                ata[i][j] += row[i] * row[j];
            }
        }
    }
    let beta = solve(ata, aty);
    let my = mean(target);
    let (mut ss_res, mut ss_tot) = (0.0, 0.0);
    for (row, &y) in design.iter().zip(target) {
        let fit: f64 = row.iter().zip(&beta).map(|(a, b)| a * b).sum();
        ss_res += (y - fit).powi(2);
        ss_tot += (y - my).powi(2);
    }
    1.0 - ss_res / ss_tot
}

pub fn d_s(fused: &Bands, pan: &[f64]) -> f64 {
    1.0 - r_squared(&fused.data, pan)
}

/// Catmull-Rom cubic convolution kernel.
fn cubic(x: f64) -> f64 {
    let a = x.abs();
    if a <= 1.0 {
        1.5 * a.powi(3) - 2.5 * a.powi(2) + 1.0
    } else if a < 2.0 {
        -0.5 * a.powi(3) + 2.5 * a.powi(2) - 4.0 * a + 2.0
    } else {
        0.0
    }
}

/// Bicubic upsampling where output `i * ratio + ratio / 2` sits on input `i`.
pub fn upsample(band: &[f64], w: usize, h: usize, ratio: usize) -> Vec<f64> {
    let coord = |p: usize| (p as f64 - (ratio / 2) as f64) / ratio as f64;
    let (ow, oh) = (w * ratio, h * ratio);
    let mut out = vec![0.0; ow * oh];
    for i in 0..oh {
        let v = coord(i);
        for j in 0..ow {
            let u = coord(j);
            let mut acc = 0.0;
            for a in (v.floor() as isize - 1)..=(v.floor() as isize + 2) {
                for b in (u.floor() as isize - 1)..=(u.floor() as isize + 2) {
                    let wt = cubic(v - a as f64) * cubic(u - b as f64);
                    acc += wt * band[mirror(a, h as isize) * w + mirror(b, w as isize)];
                }
            }
            out[i * ow + j] = acc;
        }
    }
    out
}

fn variance(x: &[f64]) -> f64 {
    let m = mean(x);
    x.iter().map(|v| (v - m).powi(2)).sum::<f64>() / x.len() as f64
}

fn covariance(x: &[f64], y: &[f64]) -> f64 {
    let (mx, my) = (mean(x), mean(y));
    x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum::<f64>() / x.len() as f64
}

/// GSA written out step by step: upsample, regress the degraded PAN on the
/// low-resolution bands, form the intensity, match the PAN to it and inject
/// with global covariance gains.
pub fn gsa(hs: &Bands, pan: &[f64], gain: f64, ratio: usize, size: usize) -> Vec<Vec<f64>> {
    let (w, h) = (hs.width * ratio, hs.height * ratio);
    let up: Vec<Vec<f64>> = hs.data.iter().map(|b| upsample(b, hs.width, hs.height, ratio)).collect();
    let pan_lo = degrade(pan, w, h, gain, ratio, size);

    let n = hs.data.len();
    let mut ata = vec![vec![0.0; n + 1]; n + 1];
    let mut aty = vec![0.0; n + 1];
    for p in 0..pan_lo.len() {
        let row: Vec<f64> = std::iter::once(1.0).chain(hs.data.iter().map(|b| b[p])).collect();
        for i in 0..=n {
            aty[i] += row[i] * pan_lo[p];
            for j in 0..=n {
                ata[i][j] += row[i] * row[j];
            }
        }
    }
    let beta = solve(ata, aty);

    let intensity: Vec<f64> = (0..w * h)
        .map(|p| beta[0] + (0..n).map(|k| beta[k + 1] * up[k][p]).sum::<f64>())
        .collect();
    let (mi, si) = (mean(&intensity), variance(&intensity).sqrt());
    let (mp, sp) = (mean(pan), variance(pan).sqrt());
    let matched: Vec<f64> = pan.iter().map(|v| (v - mp) / sp * si + mi).collect();
    let var_i = variance(&intensity);
    up.iter()
        .map(|band| {
            let g = covariance(band, &intensity) / var_i;
            (0..w * h).map(|p| band[p] + g * (matched[p] - intensity[p])).collect()
        })
        .collect()
}
