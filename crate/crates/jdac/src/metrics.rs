//! Restoration quality metrics: RMSE, PSNR, SSIM, MS-SSIM, evaluated either
//! on the image volumes directly or on their gradient-magnitude maps. The
//! gradient domain is what exposes residual artifacts: stripes and ghosts
//! that barely move image-domain RMSE light up as structured gradients.

use crate::error::{Error, Result};
use crate::volume::{gaussian_kernel, gradient, separable_normalized, Volume};
use serde::{Serialize, Serializer};

/// Which domain a report was computed on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricDomain {
    Image,
    Gradient,
}

/// The four metrics for one test/reference pair.
///
/// `psnr_db` is `+inf` for a bit-identical pair; JSON renders that as the
/// string `"inf"` since JSON has no infinity literal.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct MetricsReport {
    #[serde(serialize_with = "serialize_maybe_inf")]
    pub psnr_db: f64,
    pub rmse: f64,
    pub ssim: f64,
    pub ms_ssim: f64,
    pub domain: MetricDomain,
}

fn serialize_maybe_inf<S: Serializer>(v: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if v.is_finite() {
        s.serialize_f64(*v)
    } else {
        s.serialize_str("inf")
    }
}

fn check_dims(test: &Volume, reference: &Volume) -> Result<()> {
    if test.dims() != reference.dims() {
        return Err(Error::DimMismatch(format!(
            "metrics need matching dims, got {:?} vs {:?}",
            test.dims(),
            reference.dims()
        )));
    }
    Ok(())
}

/// Root mean square difference.
pub fn rmse(test: &Volume, reference: &Volume) -> Result<f64> {
    check_dims(test, reference)?;
    let n = test.len() as f64;
    let sum: f64 = test
        .data()
        .iter()
        .zip(reference.data())
        .map(|(&a, &b)| (a - b) * (a - b))
        .sum();
    Ok((sum / n).sqrt())
}

/// Peak signal-to-noise ratio in dB: `20 log10(data_range / rmse)`.
/// Identical volumes give `+inf`.
pub fn psnr(test: &Volume, reference: &Volume, data_range: f64) -> Result<f64> {
    let e = rmse(test, reference)?;
    if e == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(20.0 * (data_range / e).log10())
}

const SSIM_WINDOW: usize = 11;
const SSIM_SIGMA: f64 = 1.5;

/// Largest odd window size that fits the volume, capped at the standard 11.
fn window_size(dims: [usize; 3]) -> usize {
    let min_dim = dims.iter().copied().min().expect("three dims");
    if min_dim >= SSIM_WINDOW {
        SSIM_WINDOW
    } else if min_dim % 2 == 1 {
        min_dim
    } else {
        min_dim - 1
    }
}

/// Mean SSIM and mean contrast-structure term over all voxel-centered
/// windows. Boundary windows are cropped to the grid and renormalized.
fn ssim_means(test: &Volume, reference: &Volume, data_range: f64) -> Result<(f64, f64)> {
    check_dims(test, reference)?;
    let dims = test.dims();
    let win = window_size(dims);
    let kernel = gaussian_kernel(win / 2, SSIM_SIGMA);
    let x = test.data();
    let y = reference.data();
    let smooth = |d: &[f64]| separable_normalized(d, dims, &kernel);
    let mx = smooth(x);
    let my = smooth(y);
    let xx: Vec<f64> = x.iter().map(|a| a * a).collect();
    let yy: Vec<f64> = y.iter().map(|a| a * a).collect();
    let xy: Vec<f64> = x.iter().zip(y).map(|(a, b)| a * b).collect();
    let mxx = smooth(&xx);
    let myy = smooth(&yy);
    let mxy = smooth(&xy);
    let c1 = (0.01 * data_range).powi(2);
    let c2 = (0.03 * data_range).powi(2);
    let mut ssim_sum = 0.0;
    let mut cs_sum = 0.0;
    for i in 0..x.len() {
        let vx = mxx[i] - mx[i] * mx[i];
        let vy = myy[i] - my[i] * my[i];
        let cxy = mxy[i] - mx[i] * my[i];
        let a1 = 2.0 * mx[i] * my[i] + c1;
        let a2 = 2.0 * cxy + c2;
        let b1 = mx[i] * mx[i] + my[i] * my[i] + c1;
        let b2 = vx + vy + c2;
        ssim_sum += (a1 * a2) / (b1 * b2);
        cs_sum += a2 / b2;
    }
    let n = x.len() as f64;
    Ok((ssim_sum / n, cs_sum / n))
}

/// Structural similarity with a Gaussian window (size 11, std 1.5 by
/// default; the window shrinks to the largest odd size that fits small
/// volumes).
pub fn ssim3d(test: &Volume, reference: &Volume, data_range: f64) -> Result<f64> {
    Ok(ssim_means(test, reference, data_range)?.0)
}

const MS_WEIGHTS: [f64; 5] = [0.0448, 0.2856, 0.3001, 0.2363, 0.1333];

/// How many dyadic scales MS-SSIM will use for a volume of these dims:
/// pooling continues while every axis stays >= 11, up to five scales.
pub(crate) fn ms_scale_count(dims: [usize; 3]) -> usize {
    let mut d = dims;
    let mut count = 1;
    while count < MS_WEIGHTS.len() && d.iter().all(|&s| s / 2 >= SSIM_WINDOW) {
        d = [d[0] / 2, d[1] / 2, d[2] / 2];
        count += 1;
    }
    count
}

/// Non-overlapping 2x2x2 mean pooling; trailing odd planes are dropped.
fn pool2(v: &Volume) -> Volume {
    let [l, w, h] = v.dims();
    let (l2, w2, h2) = (l / 2, w / 2, h / 2);
    Volume::from_fn([l2, w2, h2], |i, j, k| {
        let mut sum = 0.0;
        for dk in 0..2 {
            for dj in 0..2 {
                for di in 0..2 {
                    sum += v.get(2 * i + di, 2 * j + dj, 2 * k + dk);
                }
            }
        }
        sum / 8.0
    })
}

/// Multi-scale SSIM: the contrast-structure term at each dyadic scale and
/// the full SSIM (luminance included) at the coarsest, combined as a
/// weighted geometric mean. Weights are the standard five, truncated and
/// renormalized to the number of usable scales. Negative per-scale means
/// are clamped to zero before exponentiation.
pub fn ms_ssim3d(test: &Volume, reference: &Volume, data_range: f64) -> Result<f64> {
    check_dims(test, reference)?;
    let count = ms_scale_count(test.dims());
    let wsum: f64 = MS_WEIGHTS[..count].iter().sum();
    let mut x = test.clone();
    let mut y = reference.clone();
    let mut result = 1.0;
    for (j, weight) in MS_WEIGHTS[..count].iter().enumerate() {
        let (ssim, cs) = ssim_means(&x, &y, data_range)?;
        let term = if j + 1 == count { ssim } else { cs };
        result *= term.max(0.0).powf(weight / wsum);
        if j + 1 < count {
            x = pool2(&x);
            y = pool2(&y);
        }
    }
    Ok(result)
}

fn report(test: &Volume, reference: &Volume, domain: MetricDomain) -> Result<MetricsReport> {
    Ok(MetricsReport {
        psnr_db: psnr(test, reference, 1.0)?,
        rmse: rmse(test, reference)?,
        ssim: ssim3d(test, reference, 1.0)?,
        ms_ssim: ms_ssim3d(test, reference, 1.0)?,
        domain,
    })
}

/// All four metrics on the volumes as-is, data range 1.
pub fn image_metrics(test: &Volume, reference: &Volume) -> Result<MetricsReport> {
    report(test, reference, MetricDomain::Image)
}

/// All four metrics on the gradient-magnitude maps of the two volumes,
/// data range 1. Constant intensity shifts vanish here; what remains is
/// edge and artifact structure.
pub fn gradient_metrics(test: &Volume, reference: &Volume) -> Result<MetricsReport> {
    check_dims(test, reference)?;
    let gt = gradient(test)?.magnitude();
    let gr = gradient(reference)?.magnitude();
    report(&gt, &gr, MetricDomain::Gradient)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phantom::{make_phantom, PhantomKind};

    /// Deterministic pseudo-random volume, same sequence as the offline
    /// reference that produced the frozen MS-SSIM values below.
    fn lcg_volume(dims: [usize; 3], seed: u64) -> Volume {
        let mut state = seed;
        let n = dims[0] * dims[1] * dims[2];
        let data: Vec<f64> = (0..n)
            .map(|_| {
                state = state
                    .wrapping_mul(6364136223846793005)
                    .wrapping_add(1442695040888963407);
                (state >> 11) as f64 / (1u64 << 53) as f64
            })
            .collect();
        Volume::new(dims, [1.0; 3], data).unwrap()
    }

    fn mix(a: &Volume, b: &Volume) -> Volume {
        a.zip_map(b, |x, r| 0.8 * x + 0.2 * r).unwrap()
    }

    #[test]
    fn lcg_matches_the_offline_generator() {
        let v = lcg_volume([4, 1, 1], 1);
        assert!((v.data()[0] - 0.42320917087271326).abs() < 1e-15);
        assert!((v.data()[1] - 0.5094074428837206).abs() < 1e-15);
        assert!((v.data()[2] - 0.6483593939634306).abs() < 1e-15);
    }

    #[test]
    fn rmse_closed_forms_and_brute_force() {
        let a = lcg_volume([8, 8, 8], 10);
        assert_eq!(rmse(&a, &a).unwrap(), 0.0);

        let b = a.map(|x| x + 0.05);
        assert!((rmse(&b, &a).unwrap() - 0.05).abs() < 1e-12);

        let c = lcg_volume([8, 8, 8], 11);
        let mut sum = 0.0;
        for (x, y) in a.data().iter().zip(c.data()) {
            sum += (x - y) * (x - y);
        }
        let oracle = (sum / a.len() as f64).sqrt();
        assert!((rmse(&a, &c).unwrap() - oracle).abs() < 1e-12);

        let small = lcg_volume([4, 4, 4], 12);
        assert!(rmse(&a, &small).is_err());
    }

    #[test]
    fn psnr_closed_forms() {
        let a = lcg_volume([8, 8, 8], 20);
        let b = a.map(|x| x + 0.1);
        assert!((psnr(&b, &a, 1.0).unwrap() - 20.0).abs() < 1e-9);
        let c = a.map(|x| x + 0.01);
        assert!((psnr(&c, &a, 1.0).unwrap() - 40.0).abs() < 1e-9);
        assert_eq!(psnr(&a, &a, 1.0).unwrap(), f64::INFINITY);
    }

    #[test]
    fn ssim_is_one_on_identical_and_symmetric() {
        let a = make_phantom([32, 32, 32], PhantomKind::Ellipsoids, 3).unwrap();
        assert!((ssim3d(&a, &a, 1.0).unwrap() - 1.0).abs() < 1e-12);

        let b = lcg_volume([32, 32, 32], 30);
        let fwd = ssim3d(&a, &b, 1.0).unwrap();
        let bwd = ssim3d(&b, &a, 1.0).unwrap();
        assert!((fwd - bwd).abs() < 1e-12);
        assert!(fwd <= 1.0);
    }

    #[test]
    fn anticorrelated_pair_scores_negative() {
        let a = lcg_volume([16, 16, 16], 40);
        let b = a.map(|x| 1.0 - x);
        let s = ssim3d(&a, &b, 1.0).unwrap();
        assert!(s < 0.0, "anti-correlated ssim {s}");
    }

    /// Direct per-window implementation: crop the Gaussian window to the
    /// grid, renormalize, take weighted moments. Nothing shared with the
    /// separable fast path.
    fn ssim_naive(test: &Volume, reference: &Volume, win: usize, data_range: f64) -> f64 {
        let radius = (win / 2) as isize;
        let kern = gaussian_kernel(win / 2, SSIM_SIGMA);
        let [l, w, h] = test.dims();
        let c1 = (0.01 * data_range).powi(2);
        let c2 = (0.03 * data_range).powi(2);
        let mut total = 0.0;
        for k in 0..h as isize {
            for j in 0..w as isize {
                for i in 0..l as isize {
                    let (mut wsum, mut sx, mut sy, mut sxx, mut syy, mut sxy) =
                        (0.0, 0.0, 0.0, 0.0, 0.0, 0.0);
                    for dk in -radius..=radius {
                        let kk = k + dk;
                        if kk < 0 || kk >= h as isize {
                            continue;
                        }
                        for dj in -radius..=radius {
                            let jj = j + dj;
                            if jj < 0 || jj >= w as isize {
                                continue;
                            }
                            for di in -radius..=radius {
                                let ii = i + di;
                                if ii < 0 || ii >= l as isize {
                                    continue;
                                }
                                let wt = kern[(di + radius) as usize]
                                    * kern[(dj + radius) as usize]
                                    * kern[(dk + radius) as usize];
                                let xv = test.get(ii as usize, jj as usize, kk as usize);
                                let yv = reference.get(ii as usize, jj as usize, kk as usize);
                                wsum += wt;
                                sx += wt * xv;
                                sy += wt * yv;
                                sxx += wt * xv * xv;
                                syy += wt * yv * yv;
                                sxy += wt * xv * yv;
                            }
                        }
                    }
                    let mx = sx / wsum;
                    let my = sy / wsum;
                    let vx = sxx / wsum - mx * mx;
                    let vy = syy / wsum - my * my;
                    let cxy = sxy / wsum - mx * my;
                    total += ((2.0 * mx * my + c1) * (2.0 * cxy + c2))
                        / ((mx * mx + my * my + c1) * (vx + vy + c2));
                }
            }
        }
        total / test.len() as f64
    }

    #[test]
    fn ssim_matches_sliding_window_oracle() {
        let a = lcg_volume([16, 16, 16], 50);
        let b = mix(&a, &lcg_volume([16, 16, 16], 51));
        let fast = ssim3d(&a, &b, 1.0).unwrap();
        let naive = ssim_naive(&a, &b, 11, 1.0);
        assert!(
            (fast - naive).abs() < 1e-9,
            "fast {fast} vs naive {naive}"
        );
    }

    #[test]
    fn small_volumes_shrink_the_window() {
        let a = lcg_volume([8, 8, 8], 60);
        let b = mix(&a, &lcg_volume([8, 8, 8], 61));
        assert!((ssim3d(&a, &a, 1.0).unwrap() - 1.0).abs() < 1e-12);
        let fast = ssim3d(&a, &b, 1.0).unwrap();
        let naive = ssim_naive(&a, &b, 7, 1.0);
        assert!((fast - naive).abs() < 1e-9);
    }

    #[test]
    fn scale_selection_follows_the_window_floor() {
        assert_eq!(ms_scale_count([32, 32, 32]), 2);
        assert_eq!(ms_scale_count([64, 64, 64]), 3);
        assert_eq!(ms_scale_count([176, 224, 160]), 4);
        assert_eq!(ms_scale_count([2048, 2048, 2048]), 5);
        assert_eq!(ms_scale_count([8, 8, 8]), 1);
    }

    #[test]
    fn ms_ssim_is_one_on_identical() {
        let a = make_phantom([32, 32, 32], PhantomKind::Ellipsoids, 4).unwrap();
        assert!((ms_ssim3d(&a, &a, 1.0).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn ms_ssim_matches_offline_reference() {
        let x64 = lcg_volume([64, 64, 64], 1);
        let r64 = lcg_volume([64, 64, 64], 2);
        let y64 = mix(&x64, &r64);
        let correlated = ms_ssim3d(&x64, &y64, 1.0).unwrap();
        assert!(
            (correlated - 0.960353366031).abs() < 1e-6,
            "correlated {correlated}"
        );
        let independent = ms_ssim3d(&x64, &r64, 1.0).unwrap();
        assert!(
            (independent - 0.083487138089).abs() < 1e-6,
            "independent {independent}"
        );
        let plain = ssim3d(&x64, &y64, 1.0).unwrap();
        assert!((plain - 0.952423219592).abs() < 1e-6, "ssim {plain}");

        let x32 = lcg_volume([32, 32, 32], 3);
        let y32 = mix(&x32, &lcg_volume([32, 32, 32], 4));
        let two_scale = ms_ssim3d(&x32, &y32, 1.0).unwrap();
        assert!(
            (two_scale - 0.952627028227).abs() < 1e-6,
            "32-cube {two_scale}"
        );
    }

    #[test]
    fn gradient_metrics_kill_constant_offsets() {
        // quantized to 1/64 so adding 0.25 is exact in binary floating point
        let a = lcg_volume([16, 16, 16], 70).map(|x| (x * 48.0).floor() / 64.0);
        let self_report = gradient_metrics(&a, &a).unwrap();
        assert_eq!(self_report.rmse, 0.0);
        assert_eq!(self_report.psnr_db, f64::INFINITY);
        assert!((self_report.ssim - 1.0).abs() < 1e-12);
        assert!((self_report.ms_ssim - 1.0).abs() < 1e-12);
        assert_eq!(self_report.domain, MetricDomain::Gradient);

        let shifted = a.map(|x| x + 0.25);
        let report = gradient_metrics(&shifted, &a).unwrap();
        assert_eq!(report.rmse, 0.0);
        assert_eq!(report.psnr_db, f64::INFINITY);
        assert!((report.ssim - 1.0).abs() < 1e-12);
    }

    #[test]
    fn reports_keep_psnr_consistent_with_rmse() {
        let a = make_phantom([32, 32, 32], PhantomKind::Ellipsoids, 5).unwrap();
        let b = mix(&a, &lcg_volume([32, 32, 32], 80));
        for report in [
            image_metrics(&b, &a).unwrap(),
            gradient_metrics(&b, &a).unwrap(),
        ] {
            assert!(report.rmse > 0.0);
            let expect = 20.0 * (1.0 / report.rmse).log10();
            assert!((report.psnr_db - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn json_uses_the_inf_sentinel() {
        let a = lcg_volume([16, 16, 16], 90);
        let same = serde_json::to_value(image_metrics(&a, &a).unwrap()).unwrap();
        assert_eq!(same["psnr_db"], "inf");
        assert_eq!(same["rmse"], 0.0);
        assert_eq!(same["domain"], "image");

        let b = a.map(|x| x * 0.9);
        let diff = serde_json::to_value(image_metrics(&b, &a).unwrap()).unwrap();
        assert!(diff["psnr_db"].is_f64());
        assert_eq!(diff["domain"], "image");
    }

    #[test]
    fn spike_notch_raises_gradient_psnr() {
        use crate::corruption::spike_kspace;
        use crate::kspace::{fft3, ifft3_magnitude};
        use crate::operators::{spike_notch_corrector, Corrector};

        let base = make_phantom([32, 32, 32], PhantomKind::Ellipsoids, 6).unwrap();
        let clean = base.map(|x| 0.55 + 0.35 * x);
        let mut k = fft3(&clean);
        spike_kspace(&mut k, 1, 0.5, 7);
        let corrupted = ifft3_magnitude(&k);
        let corrected = spike_notch_corrector(8.0).correct(&corrupted).unwrap();

        let before = gradient_metrics(&corrupted, &clean).unwrap().psnr_db;
        let after = gradient_metrics(&corrected, &clean).unwrap().psnr_db;
        assert!(
            before < after,
            "gradient psnr should rise: {before} -> {after}"
        );
    }
}
