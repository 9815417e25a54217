//! The three no-reference underwater measures: UCIQE, UIQM and CCF.
//!
//! Each returns its attribute breakdown next to the weighted total, with all
//! weights taken from the [`Constants`](crate::config::Constants) record.
//!
//! The attribute formulas follow the measures' defining references where
//! those pin them down. The CCF component formulas are reconstructions (the
//! index's reference leaves them underspecified): colorfulness is a
//! Hasler/Suesstrunk-style combination of log-opponent statistics, contrast
//! is the mean gradient magnitude over visible-edge pixels, and fog density
//! is the reciprocal-visibility index `1 / (1 + mean gradient / 255)`.

use crate::color::{lab_to_lch, saturation, srgb_to_lab};
use crate::config::{MetricConfig, UciqeLuminance};
use crate::error::{Error, Result};
use crate::gradient::{for_each_block, sobel_magnitude, Plane};
use crate::image::{ImageBuffer, LUMA_WEIGHTS};
use crate::real::{cst, Real};

/// Alpha-trimmed mean and variance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrimmedStats<T> {
    pub mean: T,
    pub variance: T,
    pub alpha: f64,
}

/// Mean and population variance after discarding `ceil(alpha * n)` values
/// from each tail of the sorted sequence.
pub fn alpha_trimmed_stats<T: Real>(values: &[T], alpha: f64) -> Result<TrimmedStats<T>> {
    assert!((0.0..0.5).contains(&alpha), "alpha must lie in [0, 0.5)");
    if values.is_empty() {
        return Err(Error::EmptyAfterTrim);
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite samples"));
    let cut = (alpha * sorted.len() as f64).ceil() as usize;
    if 2 * cut >= sorted.len() {
        return Err(Error::EmptyAfterTrim);
    }
    let kept = &sorted[cut..sorted.len() - cut];
    let n = T::from_usize(kept.len()).unwrap();
    let mut sum = T::zero();
    for &v in kept {
        sum += v;
    }
    let mean = sum / n;
    let mut var = T::zero();
    for &v in kept {
        var += (v - mean) * (v - mean);
    }
    Ok(TrimmedStats { mean, variance: var / n, alpha })
}

/// UCIQE attributes: chroma spread, luminance-extremes contrast, mean
/// saturation. Chroma is measured on the L-normalized scale (Lab chroma
/// divided by 100) so the components share magnitude order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UciqeBreakdown<T> {
    pub sigma_c: T,
    pub con_l: T,
    pub mu_s: T,
    pub value: T,
}

/// UCIQE over a 3-channel image.
pub fn uciqe<T: Real>(img: &ImageBuffer, config: &MetricConfig) -> Result<UciqeBreakdown<T>> {
    if img.channels() != 3 {
        return Err(Error::ChannelMismatch(img.channels()));
    }
    let n = img.pixel_count();
    let hundred: T = cst(100.0);

    let mut chroma = Vec::with_capacity(n);
    let mut lum = Vec::with_capacity(n);
    let mut sat_sum = T::zero();
    for y in 0..img.height() {
        for x in 0..img.width() {
            let lch = lab_to_lch(&srgb_to_lab(img.pixel_unit::<T>(x, y)));
            chroma.push(lch.c / hundred);
            sat_sum += saturation(&lch);
            lum.push(match config.uciqe_luminance {
                UciqeLuminance::LabL => lch.l,
                UciqeLuminance::Luma8 => {
                    cst::<T>(LUMA_WEIGHTS[0]) * img.sample_255(x, y, 0)
                        + cst::<T>(LUMA_WEIGHTS[1]) * img.sample_255(x, y, 1)
                        + cst::<T>(LUMA_WEIGHTS[2]) * img.sample_255(x, y, 2)
                }
            });
        }
    }

    let nt = T::from_usize(n).unwrap();
    let mut mean_c = T::zero();
    for &c in &chroma {
        mean_c += c;
    }
    mean_c = mean_c / nt;
    let mut var_c = T::zero();
    for &c in &chroma {
        var_c += (c - mean_c) * (c - mean_c);
    }
    let sigma_c = (var_c / nt).sqrt();

    lum.sort_by(|a, b| a.partial_cmp(b).expect("finite lightness"));
    let tail = ((n as f64) * 0.01).ceil().max(1.0) as usize;
    let mut low = T::zero();
    let mut high = T::zero();
    for i in 0..tail {
        low += lum[i];
        high += lum[n - 1 - i];
    }
    let tail_t = T::from_usize(tail).unwrap();
    let lum_range: T = match config.uciqe_luminance {
        UciqeLuminance::LabL => hundred,
        UciqeLuminance::Luma8 => cst(255.0),
    };
    let con_l = (high - low) / tail_t / lum_range;

    let mu_s = sat_sum / nt;
    let w = config.constants.uciqe_weights;
    let value = cst::<T>(w[0]) * sigma_c + cst::<T>(w[1]) * con_l + cst::<T>(w[2]) * mu_s;
    Ok(UciqeBreakdown { sigma_c, con_l, mu_s, value })
}

/// UIQM attributes: colourfulness (signed), sharpness, contrast.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UiqmBreakdown<T> {
    pub uicm: T,
    pub uism: T,
    pub uiconm: T,
    pub value: T,
}

/// UIQM over a 3-channel image. Requires at least one full statistics block.
pub fn uiqm<T: Real>(img: &ImageBuffer, config: &MetricConfig) -> Result<UiqmBreakdown<T>> {
    if img.channels() != 3 {
        return Err(Error::ChannelMismatch(img.channels()));
    }
    let block = config.constants.block_size;
    if img.width() < block || img.height() < block {
        return Err(Error::BlockTooLarge {
            width: img.width(),
            height: img.height(),
            block,
        });
    }

    let r = Plane::<T>::from_channel_255(img, 0);
    let g = Plane::<T>::from_channel_255(img, 1);
    let b = Plane::<T>::from_channel_255(img, 2);
    let n = r.data.len();
    let two: T = cst(2.0);

    // Colourfulness from alpha-trimmed opponent statistics.
    let mut rg = Vec::with_capacity(n);
    let mut yb = Vec::with_capacity(n);
    for i in 0..n {
        rg.push(r.data[i] - g.data[i]);
        yb.push((r.data[i] + g.data[i]) / two - b.data[i]);
    }
    let alpha = config.constants.uicm_trim_alpha;
    let s_rg = alpha_trimmed_stats(&rg, alpha)?;
    let s_yb = alpha_trimmed_stats(&yb, alpha)?;
    let [c_mu, c_sigma] = config.constants.uicm_coefficients;
    let uicm = cst::<T>(c_mu) * s_rg.mean.hypot(s_yb.mean)
        + cst::<T>(c_sigma) * (s_rg.variance + s_yb.variance).sqrt();

    // Sharpness: blockwise log-contrast of the Sobel-weighted channels,
    // combined with the luminance weights.
    let mut uism = T::zero();
    for (lambda, plane) in LUMA_WEIGHTS.iter().zip([&r, &g, &b]) {
        let mag = sobel_magnitude(plane);
        let weighted = Plane {
            width: plane.width,
            height: plane.height,
            data: mag
                .data
                .iter()
                .zip(&plane.data)
                .map(|(&m, &v)| m * v)
                .collect(),
        };
        uism += cst::<T>(*lambda) * eme(&weighted, block);
    }

    // Contrast: blockwise Michelson log form over the luminance plane.
    let gray = luma_plane(img);
    let uiconm = if config.uiconm_plip {
        log_contrast(&gray, block, Some(cst(config.constants.plip_gamma)))
    } else {
        log_contrast(&gray, block, None)
    };

    let w = config.constants.uiqm_weights;
    let value = cst::<T>(w[0]) * uicm + cst::<T>(w[1]) * uism + cst::<T>(w[2]) * uiconm;
    Ok(UiqmBreakdown { uicm, uism, uiconm, value })
}

/// Blockwise log max/min contrast: `2/(k1 k2) * sum ln(max/min)`.
/// Blocks with `min <= 0` or `max == min` contribute nothing.
fn eme<T: Real>(plane: &Plane<T>, block: usize) -> T {
    let mut total = T::zero();
    let (k1, k2) = for_each_block(plane, block, |mn, mx| {
        if mn > T::zero() && mx > mn {
            total += (mx / mn).ln();
        }
    });
    if k1 == 0 || k2 == 0 {
        return T::zero();
    }
    cst::<T>(2.0) / T::from_usize(k1 * k2).unwrap() * total
}

/// Blockwise Michelson-style entropy-weighted contrast:
/// `1/(k1 k2) * sum -ratio * ln(ratio)` with `ratio = (max-min)/(max+min)`.
/// With a PLIP gamma, the ratio numerator and denominator use PLIP
/// subtraction and addition instead.
fn log_contrast<T: Real>(plane: &Plane<T>, block: usize, plip_gamma: Option<T>) -> T {
    let mut total = T::zero();
    let (k1, k2) = for_each_block(plane, block, |mn, mx| {
        let (top, bottom) = match plip_gamma {
            Some(gamma) => (gamma * (mx - mn) / (gamma - mn), mx + mn - mx * mn / gamma),
            None => (mx - mn, mx + mn),
        };
        if top > T::zero() && bottom > T::zero() {
            let ratio = top / bottom;
            if ratio > T::zero() && ratio < T::one() {
                total += -(ratio * ratio.ln());
            }
        }
    });
    if k1 == 0 || k2 == 0 {
        return T::zero();
    }
    total / T::from_usize(k1 * k2).unwrap()
}

fn luma_plane<T: Real>(img: &ImageBuffer) -> Plane<T> {
    let (w, h) = (img.width(), img.height());
    let mut data = Vec::with_capacity(w * h);
    for y in 0..h {
        for x in 0..w {
            data.push(
                cst::<T>(LUMA_WEIGHTS[0]) * img.sample_255(x, y, 0)
                    + cst::<T>(LUMA_WEIGHTS[1]) * img.sample_255(x, y, 1)
                    + cst::<T>(LUMA_WEIGHTS[2]) * img.sample_255(x, y, 2),
            );
        }
    }
    Plane { width: w, height: h, data }
}

/// CCF component indices, all non-negative.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CcfBreakdown<T> {
    pub colorfulness: T,
    pub contrast: T,
    pub fog_density: T,
    pub value: T,
}

/// CCF over a 3-channel image.
pub fn ccf<T: Real>(img: &ImageBuffer, config: &MetricConfig) -> Result<CcfBreakdown<T>> {
    if img.channels() != 3 {
        return Err(Error::ChannelMismatch(img.channels()));
    }
    let n = img.pixel_count();
    let nt = T::from_usize(n).unwrap();
    let two: T = cst(2.0);

    // Log-opponent channel statistics, log(0) guarded by the +1 offset.
    let mut lrg = Vec::with_capacity(n);
    let mut lyb = Vec::with_capacity(n);
    for y in 0..img.height() {
        for x in 0..img.width() {
            let r: T = img.sample_255(x, y, 0);
            let g: T = img.sample_255(x, y, 1);
            let b: T = img.sample_255(x, y, 2);
            lrg.push((r + T::one()).ln() - (g + T::one()).ln());
            lyb.push(((r + g) / two + T::one()).ln() - (b + T::one()).ln());
        }
    }
    let stat = |vals: &[T]| -> (T, T) {
        let mut mean = T::zero();
        for &v in vals {
            mean += v;
        }
        mean = mean / nt;
        let mut var = T::zero();
        for &v in vals {
            var += (v - mean) * (v - mean);
        }
        (mean, (var / nt).sqrt())
    };
    let (mu_rg, sd_rg) = stat(&lrg);
    let (mu_yb, sd_yb) = stat(&lyb);
    let colorfulness = sd_rg.hypot(sd_yb) + cst::<T>(0.3) * mu_rg.hypot(mu_yb);

    // Edge statistics on the luminance plane. The gradient is divided by the
    // Sobel kernel gain of 4 so it reads on the 0..255 sample scale.
    let mag = sobel_magnitude(&luma_plane::<T>(img));
    let threshold: T = cst(config.edge_threshold);
    let four: T = cst(4.0);
    let mut edge_sum = T::zero();
    let mut edge_count = 0usize;
    let mut energy = T::zero();
    for &m in &mag.data {
        energy += m / four;
        if m > threshold {
            edge_sum += m / four;
            edge_count += 1;
        }
    }
    let contrast = if edge_count == 0 {
        T::zero()
    } else {
        edge_sum / T::from_usize(edge_count).unwrap()
    };
    let fog_density = T::one() / (T::one() + energy / nt / cst(255.0));

    let w = config.constants.ccf_weights;
    let value =
        cst::<T>(w[0]) * colorfulness + cst::<T>(w[1]) * contrast + cst::<T>(w[2]) * fog_density;
    Ok(CcfBreakdown { colorfulness, contrast, fog_density, value })
}
