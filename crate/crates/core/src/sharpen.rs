//! Component-substitution pansharpeners and the interpolation baseline.
//!
//! Every method maps a `<PAN, HS>` request to a cube on the PAN grid with the
//! HS bands. Results produced elsewhere (for instance by neural networks) are
//! checked against the same geometry with [`check_fused`].

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::error::{Error, Result};
use crate::math::approx_eq;
use crate::raster::{
    covariance, histogram_match_linear, mean, mean_std, symmetric_eigen, upsample_interp, variance,
    Degradation, Matrix, MtfSpec, Regression,
};
use crate::types::{Grid, HyperCube, PanImage, RasterMeta};

/// A pansharpened cube: PAN grid, HS bands and wavelengths.
pub type FusedCube = HyperCube;

/// Inputs of one pansharpening call.
#[derive(Debug, Clone, Copy)]
pub struct SharpenRequest<'a> {
    pub pan: &'a PanImage,
    pub hs: &'a HyperCube,
    /// Sensor model; its ratio is the scale factor between the two grids.
    pub mtf: MtfSpec,
}

impl<'a> SharpenRequest<'a> {
    pub fn new(pan: &'a PanImage, hs: &'a HyperCube, mtf: MtfSpec) -> Result<Self> {
        let r = mtf.ratio;
        if pan.width() != r * hs.width() || pan.height() != r * hs.height() {
            return Err(Error::GeometryMismatch(format!(
                "PAN {}x{} is not {r}x HS {}x{}",
                pan.width(),
                pan.height(),
                hs.width(),
                hs.height()
            )));
        }
        Ok(Self { pan, hs, mtf })
    }

    #[inline]
    pub fn ratio(&self) -> usize {
        self.mtf.ratio
    }

    /// Metadata every fused result for this request must carry.
    pub fn fused_meta(&self) -> RasterMeta {
        let pan = self.pan.meta();
        self.hs.meta().with_grid(pan.width, pan.height, pan.gsd)
    }

    fn upsampled(&self) -> Vec<Grid> {
        (0..self.hs.bands())
            .map(|b| upsample_interp(&self.hs.band_grid(b), self.ratio()))
            .collect()
    }
}

/// Built-in methods.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    /// Bicubic interpolation only.
    Exp,
    /// Principal component substitution.
    Pca,
    /// Gram-Schmidt adaptive (global weights and gains).
    Gsa,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::Exp, Method::Pca, Method::Gsa];

    pub fn name(self) -> &'static str {
        match self {
            Method::Exp => "exp",
            Method::Pca => "pca",
            Method::Gsa => "gsa",
        }
    }

    pub fn sharpen(self, req: &SharpenRequest<'_>) -> Result<FusedCube> {
        match self {
            Method::Exp => sharpen_exp(req),
            Method::Pca => sharpen_pca(req),
            Method::Gsa => sharpen_gsa(req),
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "exp" => Ok(Method::Exp),
            "pca" => Ok(Method::Pca),
            "gsa" => Ok(Method::Gsa),
            other => Err(Error::InvalidArgument(format!("unknown method '{other}'"))),
        }
    }
}

fn assemble(req: &SharpenRequest<'_>, bands: &[Grid]) -> Result<FusedCube> {
    HyperCube::from_grids(req.fused_meta(), bands)
}

/// Per-band bicubic interpolation; ignores the PAN.
pub fn sharpen_exp(req: &SharpenRequest<'_>) -> Result<FusedCube> {
    assemble(req, &req.upsampled())
}

/// Principal components of a band stack (pixels as observations,
/// population covariance).
#[derive(Debug, Clone, PartialEq)]
pub struct PrincipalComponents {
    pub means: Vec<f64>,
    /// Component variances, descending.
    pub variances: Vec<f64>,
    /// Unit loadings per component, largest-magnitude entry positive.
    pub loadings: Vec<Vec<f64>>,
}

impl PrincipalComponents {
    pub fn fit(bands: &[Grid]) -> Self {
        let k = bands.len();
        let means: Vec<f64> = bands.iter().map(|b| mean(b.data())).collect();
        let mut cov = Matrix::zeros(k, k);
        for i in 0..k {
            for j in i..k {
                let c = covariance(bands[i].data(), bands[j].data());
                cov.set(i, j, c);
                cov.set(j, i, c);
            }
        }
        let eig = symmetric_eigen(&cov);
        Self { means, variances: eig.values, loadings: eig.vectors }
    }

    /// Scores of component `c` for every pixel.
    pub fn scores(&self, bands: &[Grid], c: usize) -> Grid {
        let load = &self.loadings[c];
        let first = &bands[0];
        let mut out = Grid::filled(first.width(), first.height(), 0.0);
        for (k, band) in bands.iter().enumerate() {
            let (m, w) = (self.means[k], load[k]);
            for (o, v) in out.data_mut().iter_mut().zip(band.data()) {
                *o += w * (v - m);
            }
        }
        out
    }
}

/// Replaces the first principal component of `upsampled` with `component`
/// and maps back to band space. Only PC1 changes, so the inverse reduces to
/// `band_k + loading_k * (component - pc1)`.
pub fn pca_substitute(
    upsampled: &[Grid],
    pcs: &PrincipalComponents,
    component: &Grid,
) -> Vec<Grid> {
    let pc1 = pcs.scores(upsampled, 0);
    upsampled
        .iter()
        .zip(&pcs.loadings[0])
        .map(|(band, &w)| {
            let mut out = band.clone();
            for ((o, c), s) in out.data_mut().iter_mut().zip(component.data()).zip(pc1.data()) {
                *o += w * (c - s);
            }
            out
        })
        .collect()
}

/// PCA component substitution.
///
/// A constant PAN cannot be stretched, so it is substituted at PC1's mean.
pub fn sharpen_pca(req: &SharpenRequest<'_>) -> Result<FusedCube> {
    if req.hs.bands() < 2 {
        return Err(Error::InvalidArgument("PCA needs at least two bands".into()));
    }
    let up = req.upsampled();
    let pcs = PrincipalComponents::fit(&up);
    if !(pcs.variances[0] > 0.0) {
        return Err(Error::ZeroVariance("upsampled cube"));
    }
    let pc1 = pcs.scores(&up, 0);
    let (m, s) = mean_std(pc1.data());
    let pan = req.pan.grid();
    let matched = match histogram_match_linear(&pan, m, s) {
        Ok(g) => g,
        Err(Error::ZeroVariance(_)) => Grid::filled(pan.width(), pan.height(), m),
        Err(e) => return Err(e),
    };
    assemble(req, &pca_substitute(&up, &pcs, &matched))
}

/// Spectral weights of the GSA intensity component.
#[derive(Debug, Clone, PartialEq)]
pub struct GsaWeights {
    pub weights: Vec<f64>,
    pub offset: f64,
}

impl GsaWeights {
    /// Regresses the MTF-degraded PAN on the native-resolution HS bands.
    pub fn fit(req: &SharpenRequest<'_>) -> Result<Self> {
        let degradation = Degradation::mtf(&req.mtf)?;
        let pan_lo = degradation.apply(&req.pan.grid())?;
        let hs = req.hs;
        let mut reg = Regression::new(hs.bands(), true);
        let mut row = alloc::vec![0.0; hs.bands()];
        for (p, &target) in pan_lo.data().iter().enumerate() {
            for (b, slot) in row.iter_mut().enumerate() {
                *slot = hs.band(b)[p] as f64;
            }
            reg.push(&row, target);
        }
        let fit = reg.finish()?;
        Ok(Self { weights: fit.coefficients, offset: fit.intercept.unwrap_or(0.0) })
    }

    pub fn intensity(&self, bands: &[Grid]) -> Grid {
        let first = &bands[0];
        let mut out = Grid::filled(first.width(), first.height(), self.offset);
        for (band, &w) in bands.iter().zip(&self.weights) {
            for (o, v) in out.data_mut().iter_mut().zip(band.data()) {
                *o += w * v;
            }
        }
        out
    }
}

/// Intensity with no spread beyond rounding noise of its own magnitude.
fn is_flat(intensity: &Grid) -> bool {
    let (m, s) = mean_std(intensity.data());
    !(s > 1e-12 * m.abs().max(f64::MIN_POSITIVE))
}

/// Injects `detail_source - intensity` into every band with global gains
/// `cov(band, I) / var(I)`.
pub fn gsa_inject(upsampled: &[Grid], intensity: &Grid, detail_source: &Grid) -> Result<Vec<Grid>> {
    let var_i = variance(intensity.data());
    if is_flat(intensity) {
        return Err(Error::ZeroVariance("degenerate intensity"));
    }
    Ok(upsampled
        .iter()
        .map(|band| {
            let gain = covariance(band.data(), intensity.data()) / var_i;
            let mut out = band.clone();
            for ((o, p), i) in out.data_mut().iter_mut().zip(detail_source.data()).zip(intensity.data())
            {
                *o += gain * (p - i);
            }
            out
        })
        .collect())
}

/// Gram-Schmidt adaptive component substitution.
pub fn sharpen_gsa(req: &SharpenRequest<'_>) -> Result<FusedCube> {
    let up = req.upsampled();
    let weights = GsaWeights::fit(req)?;
    let intensity = weights.intensity(&up);
    if is_flat(&intensity) {
        return Err(Error::ZeroVariance("degenerate intensity"));
    }
    let (m, s) = mean_std(intensity.data());
    let matched = histogram_match_linear(&req.pan.grid(), m, s)?;
    assemble(req, &gsa_inject(&up, &intensity, &matched)?)
}

/// Checks that an externally produced cube fits `expected`, listing every
/// mismatching field.
pub fn check_fused(cube: &HyperCube, expected: &RasterMeta) -> Result<()> {
    let got = cube.meta();
    let mut problems: Vec<String> = Vec::new();
    if got.width != expected.width {
        problems.push(format!("width: {} != {}", got.width, expected.width));
    }
    if got.height != expected.height {
        problems.push(format!("height: {} != {}", got.height, expected.height));
    }
    if got.bands != expected.bands {
        problems.push(format!("bands: {} != {}", got.bands, expected.bands));
    }
    if !approx_eq(got.gsd, expected.gsd) {
        problems.push(format!("gsd: {} != {}", got.gsd, expected.gsd));
    }
    if got.bands == expected.bands
        && got
            .wavelengths
            .iter()
            .zip(&expected.wavelengths)
            .any(|(a, b)| (a - b).abs() > 1e-3)
    {
        problems.push("wavelengths differ".into());
    }
    if problems.is_empty() {
        Ok(())
    } else {
        Err(Error::GeometryMismatch(problems.join("; ")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn spec() -> MtfSpec {
        MtfSpec::new(0.3, 6).unwrap()
    }

    fn cube_from(bands: &[Grid], gsd: f64) -> HyperCube {
        let wl: Vec<f64> = (0..bands.len()).map(|i| 450.0 + 100.0 * i as f64).collect();
        let meta = RasterMeta::new(bands[0].width(), bands[0].height(), gsd, wl).unwrap();
        HyperCube::from_grids(meta, bands).unwrap()
    }

    fn pan_from(grid: &Grid) -> PanImage {
        let meta = RasterMeta::new(grid.width(), grid.height(), 5.0, vec![550.0]).unwrap();
        PanImage::from_grid(meta, grid).unwrap()
    }

    fn random_scene(seed: u64, size: usize, bands: usize) -> (PanImage, HyperCube) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let hs: Vec<Grid> = (0..bands)
            .map(|_| Grid::from_fn(size, size, |_, _| 0.2 + rng.random::<f64>()))
            .collect();
        let pan = Grid::from_fn(size * 6, size * 6, |_, _| rng.random::<f64>());
        (pan_from(&pan), cube_from(&hs, 30.0))
    }

    fn range(g: &[Grid]) -> f64 {
        let all = g.iter().flat_map(|b| b.data().iter().cloned());
        let (lo, hi) = all.fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), v| (l.min(v), h.max(v)));
        hi - lo
    }

    #[test]
    fn exp_examples() {
        let hs = cube_from(&[Grid::filled(1, 1, 0.25), Grid::filled(1, 1, 0.75)], 30.0);
        let pan = pan_from(&Grid::filled(6, 6, 9.0));
        let req = SharpenRequest::new(&pan, &hs, spec()).unwrap();
        let out = sharpen_exp(&req).unwrap();
        assert_eq!((out.width(), out.height(), out.bands()), (6, 6, 2));
        assert!(out.band(0).iter().all(|&v| v == 0.25));
        assert!(out.band(1).iter().all(|&v| v == 0.75));
        assert_eq!(out.meta().gsd, 5.0);

        let (pan, hs) = random_scene(1, 8, 4);
        let req = SharpenRequest::new(&pan, &hs, spec()).unwrap();
        let out = sharpen_exp(&req).unwrap();
        for b in 0..4 {
            let want = upsample_interp(&hs.band_grid(b), 6);
            let got: Vec<f32> = want.data().iter().map(|&v| v as f32).collect();
            assert_eq!(out.band(b), &got[..]);
        }
        // PAN invariance.
        let (other_pan, _) = random_scene(2, 8, 4);
        let req2 = SharpenRequest::new(&other_pan, &hs, spec()).unwrap();
        assert_eq!(sharpen_exp(&req2).unwrap(), out);
    }

    #[test]
    fn request_geometry() {
        let (pan, hs) = random_scene(3, 8, 2);
        let bad = MtfSpec::new(0.3, 4).unwrap();
        assert!(SharpenRequest::new(&pan, &hs, bad).is_err());
    }

    #[test]
    fn pca_self_substitution() {
        let (_, hs) = random_scene(4, 12, 4);
        let up: Vec<Grid> = (0..4).map(|b| upsample_interp(&hs.band_grid(b), 6)).collect();
        let pcs = PrincipalComponents::fit(&up);
        let pc1 = pcs.scores(&up, 0);
        let pan = pan_from(&pc1);
        let req = SharpenRequest::new(&pan, &hs, spec()).unwrap();
        let out = sharpen_pca(&req).unwrap();
        let tol = 1e-5 * range(&up);
        for (b, band) in up.iter().enumerate() {
            for (a, w) in out.band(b).iter().zip(band.data()) {
                assert!((*a as f64 - w).abs() <= tol);
            }
        }
    }

    #[test]
    fn pca_identical_bands_stay_identical() {
        let base = Grid::from_fn(6, 6, |i, j| ((i * 3 + j * 5) % 7) as f64 * 0.1 + 0.2);
        let hs = cube_from(&[base.clone(), base.clone(), base], 30.0);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let pan = pan_from(&Grid::from_fn(36, 36, |_, _| rng.random::<f64>()));
        let out = sharpen_pca(&SharpenRequest::new(&pan, &hs, spec()).unwrap()).unwrap();
        assert_eq!(out.band(0), out.band(1));
        assert_eq!(out.band(1), out.band(2));
        // Output equals the band mean plus the PAN stretched to PC1's spread and
        // projected through loading 1/sqrt(3): a linear map of the PAN.
        let up = upsample_interp(&hs.band_grid(0), 6);
        let (mu, sd) = mean_std(up.data());
        let stretched = histogram_match_linear(&pan.grid(), mu, sd).unwrap();
        for (a, b) in out.band(0).iter().zip(stretched.data()) {
            assert!((*a as f64 - b).abs() < 1e-5);
        }
    }

    #[test]
    fn pca_constant_pan_preserves_means() {
        let (_, hs) = random_scene(6, 6, 3);
        let pan = pan_from(&Grid::filled(36, 36, 1.0));
        let out = sharpen_pca(&SharpenRequest::new(&pan, &hs, spec()).unwrap()).unwrap();
        for b in 0..3 {
            let up = upsample_interp(&hs.band_grid(b), 6);
            let got = out.band_grid(b);
            assert!((mean(got.data()) - mean(up.data())).abs() < 1e-6);
        }
    }

    #[test]
    fn pca_needs_two_bands() {
        let (pan, hs) = random_scene(7, 6, 1);
        assert!(sharpen_pca(&SharpenRequest::new(&pan, &hs, spec()).unwrap()).is_err());
    }

    #[test]
    fn gsa_zero_detail_identity() {
        let (pan, hs) = random_scene(8, 12, 3);
        let req = SharpenRequest::new(&pan, &hs, spec()).unwrap();
        let up: Vec<Grid> = (0..3).map(|b| upsample_interp(&hs.band_grid(b), 6)).collect();
        let intensity = GsaWeights::fit(&req).unwrap().intensity(&up);
        let out = gsa_inject(&up, &intensity, &intensity).unwrap();
        assert_eq!(out, up);
    }

    #[test]
    fn gsa_single_band_self_consistent() {
        // Cosines that are symmetric under the border reflection, at a low frequency.
        let n = 192.0;
        let pan_grid = Grid::from_fn(192, 192, |i, j| {
            let pi = core::f64::consts::PI;
            1.0 + 0.25 * (pi * (i as f64 + 0.5) / n).cos() + 0.25 * (pi * (j as f64 + 0.5) / n).cos()
        });
        let lo = crate::raster::degrade(&pan_grid, &spec()).unwrap();
        let hs = cube_from(&[lo], 30.0);
        let pan = pan_from(&pan_grid);
        let req = SharpenRequest::new(&pan, &hs, spec()).unwrap();
        let w = GsaWeights::fit(&req).unwrap();
        assert!((w.weights[0] - 1.0).abs() < 1e-4, "{:?}", w);
        let out = sharpen_gsa(&req).unwrap();
        let (lo_v, hi_v) = pan_grid
            .data()
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &v| (l.min(v), h.max(v)));
        let mad = out.band(0).iter().zip(pan_grid.data()).map(|(a, b)| (*a as f64 - b).abs()).sum::<f64>()
            / pan_grid.len() as f64;
        assert!(mad <= 1e-3 * (hi_v - lo_v), "mad {mad}");
    }

    #[test]
    fn gsa_constant_pan_is_degenerate() {
        let (_, hs) = random_scene(9, 12, 2);
        let pan = pan_from(&Grid::filled(72, 72, 0.5));
        let err = sharpen_gsa(&SharpenRequest::new(&pan, &hs, spec()).unwrap()).unwrap_err();
        assert_eq!(err, Error::ZeroVariance("degenerate intensity"));
    }

    #[test]
    fn fused_geometry_check() {
        let (pan, hs) = random_scene(10, 8, 3);
        let req = SharpenRequest::new(&pan, &hs, spec()).unwrap();
        let out = sharpen_exp(&req).unwrap();
        check_fused(&out, &req.fused_meta()).unwrap();
        let fewer = out.select_bands(&[0, 1]).unwrap();
        let err = check_fused(&fewer, &req.fused_meta()).unwrap_err();
        assert!(err.to_string().contains("bands: 2 != 3"), "{err}");
        let mut wrong = req.fused_meta();
        wrong.gsd = 30.0;
        let err = check_fused(&out, &wrong).unwrap_err();
        assert!(err.to_string().contains("gsd"), "{err}");
    }

    #[test]
    fn method_names_round_trip() {
        for m in Method::ALL {
            assert_eq!(m.name().parse::<Method>().unwrap(), m);
        }
        assert!("hysure".parse::<Method>().is_err());
    }
}
