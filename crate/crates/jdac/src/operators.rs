//! Pluggable denoiser and corrector contracts, classical baselines, and the
//! L1 evaluation losses.
//!
//! Denoisers follow a residual-prediction convention: `raw_predict` returns
//! the noise estimate divided by its variance, and [`denoise_with`] folds
//! that back into the image as `x − σ²·raw_predict(x, σ)`. A plugin trained
//! to output scaled residuals and one computing them classically are then
//! interchangeable behind the same call.
//!
//! Correctors are plain volume-to-volume maps targeting structured
//! artifacts rather than noise.

use crate::error::{Error, Result};
use crate::kspace::{fft3, ifft3_magnitude, KSpace};
use crate::volume::{gaussian_smooth, gradient, Volume};

/// Noise-removal plugin: predicts the scaled residual ξ/σ².
pub trait Denoiser: Send + Sync {
    /// Predicted noise divided by its variance. Deterministic; output dims
    /// must equal input dims.
    fn raw_predict(&self, x: &Volume, sigma_e: f64) -> Result<Volume>;
    fn name(&self) -> &str;
}

/// Artifact-correction plugin: a deterministic volume map.
pub trait Corrector: Send + Sync {
    /// Output dims must equal input dims.
    fn correct(&self, x: &Volume) -> Result<Volume>;
    fn name(&self) -> &str;
}

/// Runs a denoiser under the residual convention:
/// `x − sigma_e² · raw_predict(x, sigma_e)`.
///
/// `sigma_e = 0` short-circuits to `x` exactly (zero scaling) without
/// invoking the plugin, so a plugin that divides by σ² stays safe.
pub fn denoise_with(d: &dyn Denoiser, x: &Volume, sigma_e: f64) -> Result<Volume> {
    if !(sigma_e >= 0.0) {
        return Err(Error::BadConfig(format!(
            "sigma_e must be >= 0, got {sigma_e}"
        )));
    }
    if sigma_e == 0.0 {
        return Ok(x.clone());
    }
    let raw = d.raw_predict(x, sigma_e)?;
    if raw.dims() != x.dims() {
        return Err(Error::OperatorContractViolation(format!(
            "denoiser `{}` returned dims {:?} for input {:?}",
            d.name(),
            raw.dims(),
            x.dims()
        )));
    }
    x.sub(&raw.scale(sigma_e * sigma_e))
}

/// Denoiser that predicts nothing; [`denoise_with`] returns its input.
#[derive(Clone, Copy, Debug, Default)]
pub struct IdentityDenoiser;

pub fn identity_denoiser() -> IdentityDenoiser {
    IdentityDenoiser
}

impl Denoiser for IdentityDenoiser {
    fn raw_predict(&self, x: &Volume, _sigma_e: f64) -> Result<Volume> {
        Ok(x.map(|_| 0.0))
    }

    fn name(&self) -> &str {
        "identity"
    }
}

/// Corrector that returns its input unchanged.
#[derive(Clone, Copy, Debug, Default)]
pub struct IdentityCorrector;

pub fn identity_corrector() -> IdentityCorrector {
    IdentityCorrector
}

impl Corrector for IdentityCorrector {
    fn correct(&self, x: &Volume) -> Result<Volume> {
        Ok(x.clone())
    }

    fn name(&self) -> &str {
        "identity"
    }
}

/// Classical smoothing denoiser. The kernel std adapts to the conditioning
/// noise level: `w = width_scale · 10 · max(sigma_e, 0.01)` voxels,
/// truncated at radius `floor(3w)`. The factor 10 maps the working σ range
/// (roughly 0.01 to 0.3 in normalized intensity) onto usable kernel widths
/// of 0.1 to 3 voxels; without it every kernel would collapse below one
/// voxel and the operator would degenerate to the identity.
#[derive(Clone, Copy, Debug)]
pub struct GaussianDenoiser {
    width_scale: f64,
}

/// `width_scale` stretches or shrinks the σ-to-kernel mapping; 1.0 is the
/// calibrated default.
pub fn gaussian_denoiser(width_scale: f64) -> GaussianDenoiser {
    assert!(width_scale > 0.0, "width_scale must be positive");
    GaussianDenoiser { width_scale }
}

impl GaussianDenoiser {
    /// Kernel std in voxels for a given conditioning noise level.
    pub fn kernel_std(&self, sigma_e: f64) -> f64 {
        self.width_scale * 10.0 * sigma_e.max(0.01)
    }
}

impl Denoiser for GaussianDenoiser {
    fn raw_predict(&self, x: &Volume, sigma_e: f64) -> Result<Volume> {
        if sigma_e <= 0.0 {
            return Ok(x.map(|_| 0.0));
        }
        let smoothed = gaussian_smooth(x, self.kernel_std(sigma_e));
        Ok(x.sub(&smoothed)?.scale(1.0 / (sigma_e * sigma_e)))
    }

    fn name(&self) -> &str {
        "gauss"
    }
}

/// Test aid: a denoiser that knows the true residual ξ and reports exactly
/// ξ/σ², so [`denoise_with`] inverts the corruption algebraically.
#[derive(Clone, Debug)]
pub struct OracleDenoiser {
    residual: Volume,
}

impl OracleDenoiser {
    pub fn new(residual: Volume) -> Self {
        OracleDenoiser { residual }
    }
}

impl Denoiser for OracleDenoiser {
    fn raw_predict(&self, _x: &Volume, sigma_e: f64) -> Result<Volume> {
        Ok(self.residual.scale(1.0 / (sigma_e * sigma_e)))
    }

    fn name(&self) -> &str {
        "oracle"
    }
}

/// Minimum coefficients a radial band needs before outlier squashing is
/// allowed. Small bands near DC carry almost all image structure and their
/// medians are too noisy to trust.
const MIN_BAND_MEMBERS: usize = 48;

/// Spectral outlier squasher for spike artifacts: any non-DC coefficient
/// whose magnitude exceeds `z_threshold` times the median magnitude of its
/// radial frequency band is pulled down to that median, phase preserved.
#[derive(Clone, Copy, Debug)]
pub struct SpikeNotchCorrector {
    z_threshold: f64,
}

pub fn spike_notch_corrector(z_threshold: f64) -> SpikeNotchCorrector {
    assert!(z_threshold > 2.0, "z_threshold must exceed 2");
    SpikeNotchCorrector { z_threshold }
}

impl SpikeNotchCorrector {
    fn band_index(k: &KSpace, i: usize, j: usize, kk: usize) -> usize {
        let [l, w, h] = k.dims();
        let fi = KSpace::signed_freq(i, l) as f64;
        let fj = KSpace::signed_freq(j, w) as f64;
        let fk = KSpace::signed_freq(kk, h) as f64;
        (fi * fi + fj * fj + fk * fk).sqrt().round() as usize
    }
}

impl Corrector for SpikeNotchCorrector {
    fn correct(&self, x: &Volume) -> Result<Volume> {
        let mut k = fft3(x);
        let [l, w, h] = k.dims();
        let max_band = Self::band_index(&k, l / 2, w / 2, h / 2);
        let mut bands: Vec<Vec<f64>> = vec![Vec::new(); max_band + 1];
        for kk in 0..h {
            for jj in 0..w {
                for ii in 0..l {
                    let b = Self::band_index(&k, ii, jj, kk);
                    bands[b].push(k.get(ii, jj, kk).norm());
                }
            }
        }
        let medians: Vec<Option<f64>> = bands
            .into_iter()
            .map(|mut mags| {
                if mags.len() < MIN_BAND_MEMBERS {
                    return None;
                }
                mags.sort_unstable_by(|a, b| a.partial_cmp(b).unwrap());
                let n = mags.len();
                Some(if n % 2 == 1 {
                    mags[n / 2]
                } else {
                    (mags[n / 2 - 1] + mags[n / 2]) / 2.0
                })
            })
            .collect();
        for kk in 0..h {
            for jj in 0..w {
                for ii in 0..l {
                    if (ii, jj, kk) == (0, 0, 0) {
                        continue;
                    }
                    let Some(median) = medians[Self::band_index(&k, ii, jj, kk)] else {
                        continue;
                    };
                    let c = k.get(ii, jj, kk);
                    let mag = c.norm();
                    if mag > self.z_threshold * median {
                        let squashed = if mag == 0.0 {
                            c
                        } else {
                            c * (median / mag)
                        };
                        k.set(ii, jj, kk, squashed);
                    }
                }
            }
        }
        Ok(ifft3_magnitude(&k))
    }

    fn name(&self) -> &str {
        "spike-notch"
    }
}

/// Evaluation losses, all mean-per-voxel L1. `l_a = l_m + l_g` exactly;
/// `l_n` is 0 unless a noise pair was supplied.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LossReport {
    pub l_n: f64,
    pub l_m: f64,
    pub l_g: f64,
    pub l_a: f64,
}

fn mean_abs_diff(a: &Volume, b: &Volume) -> Result<f64> {
    let d = a.sub(b)?;
    Ok(d.data().iter().map(|x| x.abs()).sum::<f64>() / d.len() as f64)
}

/// L1 between a predicted noise field and the true one.
pub fn loss_noise(n_hat: &Volume, xi: &Volume) -> Result<f64> {
    mean_abs_diff(n_hat, xi)
}

/// L1 between a restored volume and its reference.
pub fn loss_motion(m: &Volume, m_hat: &Volume) -> Result<f64> {
    mean_abs_diff(m, m_hat)
}

/// L1 between the gradients of two volumes, averaged over all three
/// component volumes (3N values for N voxels).
pub fn loss_gradient(m: &Volume, m_hat: &Volume) -> Result<f64> {
    let ga = gradient(m)?;
    let gb = gradient(m_hat)?;
    let mut acc = 0.0;
    let mut count = 0usize;
    for (a, b) in ga.components().iter().zip(gb.components()) {
        acc += a
            .data()
            .iter()
            .zip(b.data())
            .map(|(x, y)| (x - y).abs())
            .sum::<f64>();
        count += a.len();
    }
    Ok(acc / count as f64)
}

/// Combined artifact loss: `l_a = l_m + l_g`, with `l_n` left at zero.
pub fn loss_total(m: &Volume, m_hat: &Volume) -> Result<LossReport> {
    let l_m = loss_motion(m, m_hat)?;
    let l_g = loss_gradient(m, m_hat)?;
    Ok(LossReport { l_n: 0.0, l_m, l_g, l_a: l_m + l_g })
}

/// [`loss_total`] plus the noise-prediction term.
pub fn loss_total_with_noise(
    m: &Volume,
    m_hat: &Volume,
    n_hat: &Volume,
    xi: &Volume,
) -> Result<LossReport> {
    let mut report = loss_total(m, m_hat)?;
    report.l_n = loss_noise(n_hat, xi)?;
    Ok(report)
}

/// Builds a denoiser from its registry name: `identity`,
/// `gauss[:width_scale]`, or `external:<command>`.
pub fn denoiser_from_name(name: &str) -> Result<Box<dyn Denoiser>> {
    if let Some(command) = name.strip_prefix("external:") {
        if command.trim().is_empty() {
            return Err(Error::UnknownOperator(
                "external denoiser needs a command".to_string(),
            ));
        }
        return Ok(Box::new(crate::io::external::ExternalOperator::new(command)));
    }
    match name.split_once(':') {
        None if name == "identity" => Ok(Box::new(identity_denoiser())),
        None if name == "gauss" => Ok(Box::new(gaussian_denoiser(1.0))),
        Some(("gauss", arg)) => {
            let width_scale: f64 = arg.parse().map_err(|_| {
                Error::UnknownOperator(format!("bad gauss width `{arg}`"))
            })?;
            if !(width_scale > 0.0) || !width_scale.is_finite() {
                return Err(Error::UnknownOperator(format!(
                    "gauss width must be positive, got `{arg}`"
                )));
            }
            Ok(Box::new(gaussian_denoiser(width_scale)))
        }
        _ => Err(Error::UnknownOperator(format!("unknown denoiser `{name}`"))),
    }
}

/// Builds a corrector from its registry name: `identity`,
/// `spike-notch[:z]`, or `external:<command>`.
pub fn corrector_from_name(name: &str) -> Result<Box<dyn Corrector>> {
    if let Some(command) = name.strip_prefix("external:") {
        if command.trim().is_empty() {
            return Err(Error::UnknownOperator(
                "external corrector needs a command".to_string(),
            ));
        }
        return Ok(Box::new(crate::io::external::ExternalOperator::new(command)));
    }
    match name.split_once(':') {
        None if name == "identity" => Ok(Box::new(identity_corrector())),
        None if name == "spike-notch" => Ok(Box::new(spike_notch_corrector(8.0))),
        Some(("spike-notch", arg)) => {
            let z: f64 = arg.parse().map_err(|_| {
                Error::UnknownOperator(format!("bad spike-notch threshold `{arg}`"))
            })?;
            if !(z > 2.0) || !z.is_finite() {
                return Err(Error::UnknownOperator(format!(
                    "spike-notch threshold must exceed 2, got `{arg}`"
                )));
            }
            Ok(Box::new(spike_notch_corrector(z)))
        }
        _ => Err(Error::UnknownOperator(format!("unknown corrector `{name}`"))),
    }
}
