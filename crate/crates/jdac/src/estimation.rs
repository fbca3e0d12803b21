//! Gradient-map noise estimation.
//!
//! The estimator is the pooled standard deviation of the central-difference
//! gradient components. Central differences halve the variance of i.i.d.
//! noise, so the raw statistic reads ~sigma/sqrt(2) on pure Gaussian noise;
//! the calibration factor multiplies that back out. Structure in the image
//! contributes its own gradient energy, which is why the estimate is biased
//! high on clean volumes and why the engine's stopping rule is calibrated
//! against clean-corpus raw values rather than zero.

use crate::error::{Error, Result};
use crate::volume::{gradient, pooled_std, Volume};

/// Multiplier that undoes the central-difference noise response.
pub const GRADIENT_NOISE_CALIBRATION: f64 = std::f64::consts::SQRT_2;

/// Default early-stop threshold for the restoration engine, compared
/// against the RAW (uncalibrated) gradient std. Derived from clean MR
/// corpora whose raw gradient stds cluster around 0.03 to 0.05.
pub const DEFAULT_STOP_THRESHOLD: f64 = 0.028;

/// A noise-level reading. `sigma_e = calibration * raw_std` exactly.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NoiseEstimate {
    /// Calibrated estimate of the Gaussian noise std.
    pub sigma_e: f64,
    /// Uncalibrated pooled gradient std; the stopping statistic.
    pub raw_std: f64,
    /// The multiplier that was applied.
    pub calibration: f64,
}

/// Estimates the noise level with the default sqrt(2) calibration.
pub fn estimate_noise(v: &Volume) -> Result<NoiseEstimate> {
    estimate_noise_with(v, GRADIENT_NOISE_CALIBRATION)
}

/// Estimates the noise level with an explicit calibration factor.
pub fn estimate_noise_with(v: &Volume, calibration: f64) -> Result<NoiseEstimate> {
    let raw_std = pooled_std(&gradient(v)?);
    Ok(NoiseEstimate {
        sigma_e: calibration * raw_std,
        raw_std,
        calibration,
    })
}

/// Mean raw gradient std over a clean corpus; a drop-in replacement for the
/// default stopping threshold when the deployment data differs from the
/// corpora behind 0.028.
pub fn calibrate_threshold(clean_volumes: &[Volume]) -> Result<f64> {
    if clean_volumes.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let mut acc = 0.0;
    for v in clean_volumes {
        acc += estimate_noise(v)?.raw_std;
    }
    Ok(acc / clean_volumes.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corruption::add_gaussian;
    use crate::phantom::{make_phantom, PhantomKind};

    #[test]
    fn constant_volume_reads_zero() {
        let v = Volume::filled([16, 16, 16], 0.4);
        let est = estimate_noise(&v).unwrap();
        assert_eq!(est.raw_std, 0.0);
        assert_eq!(est.sigma_e, 0.0);
        assert_eq!(est.calibration, GRADIENT_NOISE_CALIBRATION);
    }

    #[test]
    fn invariant_holds_for_any_calibration() {
        let v = make_phantom([32, 32, 32], PhantomKind::Ellipsoids, 0).unwrap();
        for c in [0.5, 1.0, GRADIENT_NOISE_CALIBRATION, 3.0] {
            let est = estimate_noise_with(&v, c).unwrap();
            assert_eq!(est.sigma_e, c * est.raw_std);
        }
    }

    #[test]
    fn unbiased_on_pure_gaussian_noise() {
        let z = Volume::zeros([64, 64, 64]);
        let mut acc = 0.0;
        for seed in 0..20 {
            let n = add_gaussian(&z, 0.10, seed);
            acc += estimate_noise(&n).unwrap().sigma_e;
        }
        let mean = acc / 20.0;
        assert!((mean - 0.10).abs() < 0.005, "mean sigma_e {mean}");
    }

    #[test]
    fn raw_std_is_scale_equivariant() {
        let v = make_phantom([32, 32, 32], PhantomKind::CheckerSmooth, 1).unwrap();
        let a = estimate_noise(&v).unwrap().raw_std;
        let b = estimate_noise(&v.scale(3.0)).unwrap().raw_std;
        assert!((b - 3.0 * a).abs() <= 1e-12 * b.abs(), "{a} vs {b}");
    }

    #[test]
    fn threshold_is_the_corpus_mean() {
        let a = make_phantom([32, 32, 32], PhantomKind::Ellipsoids, 0).unwrap();
        let b = make_phantom([32, 32, 32], PhantomKind::Ellipsoids, 1).unwrap();
        let ra = estimate_noise(&a).unwrap().raw_std;
        let rb = estimate_noise(&b).unwrap().raw_std;
        let t = calibrate_threshold(&[a.clone(), b]).unwrap();
        assert!((t - (ra + rb) / 2.0).abs() < 1e-15);
        assert!((calibrate_threshold(&[Volume::filled([8, 8, 8], 0.2)]).unwrap()).abs() == 0.0);
        assert!(matches!(calibrate_threshold(&[]), Err(Error::EmptyCorpus)));
        let single = calibrate_threshold(&[a.clone()]).unwrap();
        assert_eq!(single, ra);
    }

    #[test]
    fn clean_phantom_corpus_threshold_fixture() {
        // ten 64-cube ellipsoid phantoms, seeds 0..9; value pinned from a
        // reference run so regressions in phantom or gradient code surface
        let volumes: Vec<Volume> = (0..10)
            .map(|s| make_phantom([64, 64, 64], PhantomKind::Ellipsoids, s).unwrap())
            .collect();
        let t = calibrate_threshold(&volumes).unwrap();
        assert!(
            t < DEFAULT_STOP_THRESHOLD,
            "clean corpus raw std {t} should sit under the default threshold"
        );
        assert!((t - 0.012435169364).abs() < 1e-9, "corpus threshold {t}");
    }
}
