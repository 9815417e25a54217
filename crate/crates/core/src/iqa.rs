//! Generic measures: MSE, PSNR, SSIM, the equal-weight Qu combination,
//! histogram entropy and the visible-edge count.
//!
//! All sample arithmetic runs on the 0..255 scale regardless of buffer
//! depth, so 8-bit and float inputs of the same picture score identically.

use crate::color::srgb_to_lab;
use crate::config::SsimSettings;
use crate::diff::{ciede2000, Ciede2000Params};
use crate::error::{Error, Result};
use crate::gradient::{sobel_magnitude, Plane};
use crate::image::{to_grayscale, ImageBuffer};
use crate::real::{cst, Real};

/// Peak signal-to-noise ratio in dB, with an explicit sentinel for the
/// zero-error case.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Psnr<T> {
    Db(T),
    Infinite,
}

impl<T: Real> Psnr<T> {
    pub fn as_db(&self) -> Option<T> {
        match self {
            Psnr::Db(v) => Some(*v),
            Psnr::Infinite => None,
        }
    }
}

fn check_same_shape(a: &ImageBuffer, b: &ImageBuffer) -> Result<()> {
    if a.width() != b.width() || a.height() != b.height() || a.channels() != b.channels() {
        return Err(Error::DimensionMismatch(a.width(), a.height(), b.width(), b.height()));
    }
    Ok(())
}

/// Mean squared sample difference (0..255 scale) and the derived PSNR with a
/// 255 peak.
pub fn mse_psnr<T: Real>(reference: &ImageBuffer, test: &ImageBuffer) -> Result<(T, Psnr<T>)> {
    check_same_shape(reference, test)?;
    let mut acc = T::zero();
    for y in 0..reference.height() {
        for x in 0..reference.width() {
            for c in 0..reference.channels() {
                let d = reference.sample_255::<T>(x, y, c) - test.sample_255::<T>(x, y, c);
                acc += d * d;
            }
        }
    }
    let n = reference.pixel_count() * reference.channels();
    let mse = acc / T::from_usize(n).unwrap();
    let psnr = if mse == T::zero() {
        Psnr::Infinite
    } else {
        let peak: T = cst(255.0);
        Psnr::Db(cst::<T>(10.0) * (peak * peak / mse).log10())
    };
    Ok((mse, psnr))
}

fn gaussian_kernel<T: Real>(window: usize, sigma: f64) -> Vec<T> {
    let half = (window / 2) as f64;
    let mut k: Vec<T> = (0..window)
        .map(|i| {
            let d = i as f64 - half;
            cst((-d * d / (2.0 * sigma * sigma)).exp())
        })
        .collect();
    let mut sum = T::zero();
    for &v in &k {
        sum += v;
    }
    for v in &mut k {
        *v = *v / sum;
    }
    k
}

fn gray_plane<T: Real>(img: &ImageBuffer) -> Result<Plane<T>> {
    let gray;
    let g = if img.channels() == 3 {
        gray = to_grayscale(img)?;
        &gray
    } else {
        img
    };
    Ok(Plane::from_channel_255(g, 0))
}

/// Separable Gaussian filter restricted to positions where the whole window
/// fits ("valid" region). Output size shrinks by `window - 1` per axis.
fn filter_valid<T: Real>(plane: &Plane<T>, kernel: &[T]) -> Plane<T> {
    let win = kernel.len();
    let (w, h) = (plane.width, plane.height);
    let out_w = w - win + 1;
    // horizontal pass
    let mut rows = vec![T::zero(); out_w * h];
    for y in 0..h {
        for ox in 0..out_w {
            let mut acc = T::zero();
            for (i, &k) in kernel.iter().enumerate() {
                acc += k * plane.at(ox + i, y);
            }
            rows[y * out_w + ox] = acc;
        }
    }
    // vertical pass
    let out_h = h - win + 1;
    let mut data = vec![T::zero(); out_w * out_h];
    for oy in 0..out_h {
        for x in 0..out_w {
            let mut acc = T::zero();
            for (i, &k) in kernel.iter().enumerate() {
                acc += k * rows[(oy + i) * out_w + x];
            }
            data[oy * out_w + x] = acc;
        }
    }
    Plane { width: out_w, height: out_h, data }
}

/// Mean structural similarity with the Gaussian-weighted window form.
/// 3-channel inputs are collapsed to luminance first.
pub fn ssim<T: Real>(
    reference: &ImageBuffer,
    test: &ImageBuffer,
    params: &SsimSettings,
) -> Result<T> {
    check_same_shape(reference, test)?;
    let win = params.window;
    if reference.width() < win || reference.height() < win {
        return Err(Error::WindowTooLarge {
            width: reference.width(),
            height: reference.height(),
            window: win,
        });
    }
    let x = gray_plane::<T>(reference)?;
    let y = gray_plane::<T>(test)?;
    let kernel = gaussian_kernel::<T>(win, params.sigma);

    let sq = |p: &Plane<T>| Plane {
        width: p.width,
        height: p.height,
        data: p.data.iter().map(|&v| v * v).collect(),
    };
    let xy = Plane {
        width: x.width,
        height: x.height,
        data: x.data.iter().zip(&y.data).map(|(&a, &b)| a * b).collect(),
    };

    let mu_x = filter_valid(&x, &kernel);
    let mu_y = filter_valid(&y, &kernel);
    let e_xx = filter_valid(&sq(&x), &kernel);
    let e_yy = filter_valid(&sq(&y), &kernel);
    let e_xy = filter_valid(&xy, &kernel);

    let range: T = cst(params.dynamic_range);
    let c1 = cst::<T>(params.k1 * params.k1) * range * range;
    let c2 = cst::<T>(params.k2 * params.k2) * range * range;
    let two: T = cst(2.0);

    let mut acc = T::zero();
    for i in 0..mu_x.data.len() {
        let mx = mu_x.data[i];
        let my = mu_y.data[i];
        let var_x = e_xx.data[i] - mx * mx;
        let var_y = e_yy.data[i] - my * my;
        let cov = e_xy.data[i] - mx * my;
        let v = ((two * mx * my + c1) * (two * cov + c2))
            / ((mx * mx + my * my + c1) * (var_x + var_y + c2));
        acc += v;
    }
    Ok(acc / T::from_usize(mu_x.data.len()).unwrap())
}

/// The Qu combination with its components.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuBreakdown<T> {
    pub ssim: T,
    pub mean_delta_e: T,
    pub value: T,
}

/// Equal-weight combination of SSIM and the mean per-pixel CIEDE2000,
/// the latter mapped onto [0,1] through its 100 ceiling:
/// `qu = 0.5 * ssim + 0.5 * (1 - mean_dE00 / 100)`. Higher is better.
pub fn qu<T: Real>(
    reference: &ImageBuffer,
    test: &ImageBuffer,
    params: &SsimSettings,
) -> Result<QuBreakdown<T>> {
    check_same_shape(reference, test)?;
    let s = ssim::<T>(reference, test, params)?;
    let de_params = Ciede2000Params::default();
    let mut acc = T::zero();
    for y in 0..reference.height() {
        for x in 0..reference.width() {
            let lr = srgb_to_lab(pixel3(reference, x, y));
            let lt = srgb_to_lab(pixel3(test, x, y));
            acc += ciede2000(&lr, &lt, &de_params).value;
        }
    }
    let mean_delta_e = acc / T::from_usize(reference.pixel_count()).unwrap();
    let half: T = cst(0.5);
    let value = half * s + half * (T::one() - mean_delta_e / cst(100.0));
    Ok(QuBreakdown { ssim: s, mean_delta_e, value })
}

fn pixel3<T: Real>(img: &ImageBuffer, x: usize, y: usize) -> [T; 3] {
    if img.channels() == 3 {
        img.pixel_unit(x, y)
    } else {
        let v = img.sample_unit(x, y, 0);
        [v, v, v]
    }
}

/// Shannon entropy of the 256-bin luminance histogram, in bits.
/// Float samples are binned at their rounded 8-bit level.
pub fn entropy<T: Real>(img: &ImageBuffer) -> Result<T> {
    let plane = gray_plane::<f64>(img)?;
    let mut hist = [0u64; 256];
    for &v in &plane.data {
        hist[(v.round().clamp(0.0, 255.0)) as usize] += 1;
    }
    let n = plane.data.len() as f64;
    let mut bits = 0.0f64;
    for &count in &hist {
        if count > 0 {
            let p = count as f64 / n;
            bits -= p * p.log2();
        }
    }
    Ok(cst(bits))
}

/// Pixels whose raw Sobel magnitude exceeds `threshold`, with the fraction
/// of the image they cover.
pub fn visible_edge_count<T: Real>(img: &ImageBuffer, threshold: f64) -> Result<(usize, T)> {
    let plane = gray_plane::<T>(img)?;
    let mag = sobel_magnitude(&plane);
    let th: T = cst(threshold);
    let count = mag.data.iter().filter(|&&m| m > th).count();
    Ok((count, T::from_usize(count).unwrap() / T::from_usize(mag.data.len()).unwrap()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::SsimSettings;
    use crate::image::Encoding;

    fn gray(w: usize, h: usize, data: Vec<u8>) -> ImageBuffer {
        ImageBuffer::from_u8(w, h, 1, Encoding::Grayscale, data).unwrap()
    }

    #[test]
    fn mse_identical_gives_infinite_psnr() {
        let a = gray(4, 4, vec![9; 16]);
        let (mse, psnr) = mse_psnr::<f64>(&a, &a).unwrap();
        assert_eq!(mse, 0.0);
        assert_eq!(psnr, Psnr::Infinite);
    }

    #[test]
    fn psnr_off_by_one_closed_form() {
        let a = gray(8, 8, vec![100; 64]);
        let b = gray(8, 8, vec![101; 64]);
        let (mse, psnr) = mse_psnr::<f64>(&a, &b).unwrap();
        assert_eq!(mse, 1.0);
        let db = psnr.as_db().unwrap();
        assert!((db - 48.1308).abs() < 0.01, "{db}");
    }

    #[test]
    fn psnr_black_white_extreme() {
        let a = gray(4, 4, vec![0; 16]);
        let b = gray(4, 4, vec![255; 16]);
        let (mse, psnr) = mse_psnr::<f64>(&a, &b).unwrap();
        assert_eq!(mse, 255.0 * 255.0);
        assert!((psnr.as_db().unwrap()).abs() < 1e-12);
    }

    #[test]
    fn mse_dimension_mismatch() {
        let a = gray(4, 4, vec![0; 16]);
        let b = gray(4, 5, vec![0; 20]);
        assert!(matches!(mse_psnr::<f64>(&a, &b), Err(Error::DimensionMismatch(..))));
    }

    #[test]
    fn ssim_identical_is_one() {
        let data: Vec<u8> = (0..256).map(|i| (i * 13 % 256) as u8).collect();
        let a = gray(16, 16, data);
        let s: f64 = ssim(&a, &a, &SsimSettings::default()).unwrap();
        assert!((s - 1.0).abs() < 1e-12);
    }

    #[test]
    fn ssim_checkerboard_vs_negation_is_negative() {
        // One 11x11 window; hand evaluation of the local formula below.
        let mut a = Vec::with_capacity(121);
        for y in 0..11 {
            for x in 0..11 {
                a.push(if (x + y) % 2 == 0 { 0u8 } else { 255 });
            }
        }
        let b: Vec<u8> = a.iter().map(|&v| 255 - v).collect();
        let pa = gray(11, 11, a.clone());
        let pb = gray(11, 11, b.clone());
        let cfg = SsimSettings::default();
        let got: f64 = ssim(&pa, &pb, &cfg).unwrap();

        // Independent evaluation: direct weighted sums over the one window.
        let kernel: Vec<f64> = {
            let mut k: Vec<f64> = (0..11)
                .map(|i| {
                    let d = i as f64 - 5.0;
                    (-d * d / (2.0 * 1.5 * 1.5)).exp()
                })
                .collect();
            let s: f64 = k.iter().sum();
            k.iter_mut().for_each(|v| *v /= s);
            k
        };
        let (mut mx, mut my, mut exx, mut eyy, mut exy) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for y in 0..11 {
            for x in 0..11 {
                let w = kernel[y] * kernel[x];
                let va = a[y * 11 + x] as f64;
                let vb = b[y * 11 + x] as f64;
                mx += w * va;
                my += w * vb;
                exx += w * va * va;
                eyy += w * vb * vb;
                exy += w * va * vb;
            }
        }
        let c1 = (0.01f64 * 255.0).powi(2);
        let c2 = (0.03f64 * 255.0).powi(2);
        let expected = ((2.0 * mx * my + c1) * (2.0 * (exy - mx * my) + c2))
            / ((mx * mx + my * my + c1) * ((exx - mx * mx) + (eyy - my * my) + c2));
        assert!(expected < 0.0);
        assert!((got - expected).abs() < 1e-9, "got {got}, expected {expected}");
    }

    #[test]
    fn ssim_window_too_large() {
        let a = gray(8, 8, vec![0; 64]);
        assert!(matches!(
            ssim::<f64>(&a, &a, &SsimSettings::default()),
            Err(Error::WindowTooLarge { .. })
        ));
    }

    #[test]
    fn qu_identical_is_one() {
        let mut data = Vec::new();
        for i in 0..(16 * 16) {
            data.extend_from_slice(&[(i % 251) as u8, (i * 3 % 256) as u8, 40]);
        }
        let img = ImageBuffer::from_u8(16, 16, 3, Encoding::Srgb, data).unwrap();
        let q: QuBreakdown<f64> = qu(&img, &img, &SsimSettings::default()).unwrap();
        assert!((q.value - 1.0).abs() < 1e-9);
    }

    #[test]
    fn qu_recombines_from_components() {
        let a = gray(16, 16, (0..256).map(|i| (i % 200) as u8).collect());
        let b = gray(16, 16, (0..256).map(|i| (i % 200) as u8 / 2 + 30).collect());
        let q: QuBreakdown<f64> = qu(&a, &b, &SsimSettings::default()).unwrap();
        let expected = 0.5 * q.ssim + 0.5 * (1.0 - q.mean_delta_e / 100.0);
        assert!((q.value - expected).abs() < 1e-12);
    }

    #[test]
    fn entropy_examples() {
        let constant = gray(8, 8, vec![41; 64]);
        assert_eq!(entropy::<f64>(&constant).unwrap(), 0.0);

        let uniform: Vec<u8> = (0..256).map(|i| i as u8).collect();
        let img = gray(16, 16, uniform);
        assert!((entropy::<f64>(&img).unwrap() - 8.0).abs() < 1e-12);

        let two_level = gray(4, 4, vec![0, 255, 0, 255, 0, 255, 0, 255, 0, 255, 0, 255, 0, 255, 0, 255]);
        assert!((entropy::<f64>(&two_level).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn edge_count_examples() {
        let constant = gray(8, 8, vec![100; 64]);
        let (count, ratio) = visible_edge_count::<f64>(&constant, 25.0).unwrap();
        assert_eq!(count, 0);
        assert_eq!(ratio, 0.0);

        // Vertical step: exactly the two columns around the step fire.
        let w = 8;
        let h = 5;
        let mut data = vec![0u8; w * h];
        for y in 0..h {
            for x in 4..w {
                data[y * w + x] = 255;
            }
        }
        let img = gray(w, h, data);
        let (count, ratio) = visible_edge_count::<f64>(&img, 1000.0).unwrap();
        assert_eq!(count, 2 * h);
        assert!((ratio - (2 * h) as f64 / (w * h) as f64).abs() < 1e-12);

        let (count, _) = visible_edge_count::<f64>(&img, f64::INFINITY).unwrap();
        assert_eq!(count, 0);
    }
}
