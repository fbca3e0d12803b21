//! Discrete Fourier transforms between image space and k-space.
//!
//! Conventions: the forward transform is unnormalized (DC coefficient equals
//! the intensity sum), the inverse carries the full 1/N factor, and the DC
//! term sits at index (0, 0, 0). Any extent is handled exactly via
//! mixed-radix passes; nothing is padded to a power of two.
//!
//! [`ifft3`] expects a spectrum that is Hermitian-symmetric up to rounding
//! and fails loudly when it is not; simulators that deliberately break the
//! symmetry (spike noise) recover a real volume with [`ifft3_magnitude`]
//! instead.

use crate::error::{Error, Result};
use crate::volume::Volume;
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

/// Complex 3D spectrum, DC at (0, 0, 0), x-fastest layout.
#[derive(Clone, Debug)]
pub struct KSpace {
    dims: [usize; 3],
    spacing: [f64; 3],
    residual: bool,
    data: Vec<Complex<f64>>,
}

impl KSpace {
    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    pub fn data(&self) -> &[Complex<f64>] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [Complex<f64>] {
        &mut self.data
    }

    #[inline]
    pub fn idx(&self, i: usize, j: usize, k: usize) -> usize {
        i + self.dims[0] * (j + self.dims[1] * k)
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize) -> Complex<f64> {
        self.data[self.idx(i, j, k)]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, k: usize, value: Complex<f64>) {
        let idx = self.idx(i, j, k);
        self.data[idx] = value;
    }

    /// The DC coefficient, equal to the intensity sum of the source volume.
    pub fn dc(&self) -> Complex<f64> {
        self.data[0]
    }

    /// Signed frequency index along an axis of length `n`: 0, 1, ..., n/2,
    /// then negative frequencies.
    pub fn signed_freq(index: usize, n: usize) -> isize {
        if index <= n / 2 {
            index as isize
        } else {
            index as isize - n as isize
        }
    }

    /// Per-axis frequency normalized by the axis Nyquist (n/2), so the
    /// centered spectrum lives in [-1, 1]^3 and radius sqrt(3) is the corner.
    pub fn normalized_radius(&self, i: usize, j: usize, k: usize) -> f64 {
        let f = [
            Self::signed_freq(i, self.dims[0]) as f64 / (self.dims[0] as f64 / 2.0),
            Self::signed_freq(j, self.dims[1]) as f64 / (self.dims[1] as f64 / 2.0),
            Self::signed_freq(k, self.dims[2]) as f64 / (self.dims[2] as f64 / 2.0),
        ];
        (f[0] * f[0] + f[1] * f[1] + f[2] * f[2]).sqrt()
    }
}

/// Unnormalized forward DFT of a volume.
pub fn fft3(v: &Volume) -> KSpace {
    let data: Vec<Complex<f64>> = v.data().iter().map(|&x| Complex::new(x, 0.0)).collect();
    let mut k = KSpace {
        dims: v.dims(),
        spacing: v.spacing(),
        residual: v.residual(),
        data,
    };
    transform(&mut k, rustfft::FftDirection::Forward);
    k
}

/// Inverse DFT (1/N normalization) of a near-Hermitian spectrum.
///
/// The imaginary residue is discarded after asserting
/// `max |Im| <= 1e-5 * max |Re|`; anything larger is an error rather than a
/// silent lie about the data.
pub fn ifft3(k: &KSpace) -> Result<Volume> {
    let field = ifft3_complex(k);
    let mut max_re = 0.0_f64;
    let mut max_im = 0.0_f64;
    for c in &field {
        max_re = max_re.max(c.re.abs());
        max_im = max_im.max(c.im.abs());
    }
    if max_im > 1e-5 * max_re {
        return Err(Error::NonNegligibleImaginaryPart { max_im, max_re });
    }
    let data = field.into_iter().map(|c| c.re).collect();
    let mut v = Volume::new(k.dims, k.spacing, data).expect("dims preserved");
    v.set_residual(k.residual);
    Ok(v)
}

/// Inverse DFT followed by complex magnitude, for spectra that are not
/// Hermitian-symmetric (as after asymmetric k-space edits).
pub fn ifft3_magnitude(k: &KSpace) -> Volume {
    let field = ifft3_complex(k);
    let data = field.into_iter().map(|c| c.norm()).collect();
    let mut v = Volume::new(k.dims, k.spacing, data).expect("dims preserved");
    v.set_residual(k.residual);
    v
}

/// Full complex inverse with 1/N scaling.
pub(crate) fn ifft3_complex(k: &KSpace) -> Vec<Complex<f64>> {
    let mut tmp = k.clone();
    transform(&mut tmp, rustfft::FftDirection::Inverse);
    let n = (k.dims[0] * k.dims[1] * k.dims[2]) as f64;
    for c in &mut tmp.data {
        *c /= n;
    }
    tmp.data
}

fn transform(k: &mut KSpace, direction: rustfft::FftDirection) {
    let [l, w, h] = k.dims;
    let mut planner = FftPlanner::new();
    let lens = [l, w, h];
    let strides = [1usize, l, l * w];
    for axis in 0..3 {
        let n = lens[axis];
        let fft = planner.plan_fft(n, direction);
        let stride = strides[axis];
        let (a, b) = match axis {
            0 => (1, 2),
            1 => (0, 2),
            _ => (0, 1),
        };
        let mut line = vec![Complex::new(0.0, 0.0); n];
        for vb in 0..lens[b] {
            for va in 0..lens[a] {
                let base = va * strides[a] + vb * strides[b];
                for (t, c) in line.iter_mut().enumerate() {
                    *c = k.data[base + t * stride];
                }
                fft.process(&mut line);
                for (t, c) in line.iter().enumerate() {
                    k.data[base + t * stride] = *c;
                }
            }
        }
    }
}
