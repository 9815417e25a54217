//! Full-reference colour-accuracy measures: CIEDE2000, the reproduction
//! angular error, and plain Euclidean distances.
//!
//! CIEDE2000 follows the reference procedure exactly, including the a'
//! chroma compensation, the hue-difference edge cases for zero-chroma
//! samples and hue gaps over 180 degrees, and the blue-region rotation term.

use crate::color::Lab;
use crate::error::{Error, Result};
use crate::real::{cst, Real};

/// A colour difference at or below this is considered visually imperceptible.
pub const IMPERCEPTIBLE_DELTA_E: f64 = 1.0;

/// Parametric weighing factors for the viewing conditions. Default (1,1,1).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ciede2000Params<T> {
    pub k_l: T,
    pub k_c: T,
    pub k_h: T,
}

impl<T: Real> Default for Ciede2000Params<T> {
    fn default() -> Self {
        Self { k_l: T::one(), k_c: T::one(), k_h: T::one() }
    }
}

/// The terms of the colour difference alongside the total.
///
/// `value` recombines as
/// `sqrt((d_l/(kL*s_l))^2 + (d_c/(kC*s_c))^2 + (d_h/(kH*s_h))^2 + d_r)`,
/// where `d_r` already contains the full rotation-term contribution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ciede2000Breakdown<T> {
    pub d_l: T,
    pub d_c: T,
    pub d_h: T,
    pub s_l: T,
    pub s_c: T,
    pub s_h: T,
    pub d_r: T,
    pub value: T,
}

impl<T: Real> Ciede2000Breakdown<T> {
    pub fn is_imperceptible(&self) -> bool {
        self.value <= cst(IMPERCEPTIBLE_DELTA_E)
    }
}

/// CIEDE2000 colour difference between two CIELab samples.
pub fn ciede2000<T: Real>(
    reference: &Lab<T>,
    test: &Lab<T>,
    params: &Ciede2000Params<T>,
) -> Ciede2000Breakdown<T> {
    let two: T = cst(2.0);
    let c180: T = cst(180.0);
    let c360: T = cst(360.0);

    let c1 = reference.a.hypot(reference.b);
    let c2 = test.a.hypot(test.b);
    let c_bar = (c1 + c2) / two;

    let pow7 = |v: T| v.powi(7);
    let c25_7: T = cst(6103515625.0); // 25^7
    let g = (T::one() - (pow7(c_bar) / (pow7(c_bar) + c25_7)).sqrt()) / two;

    let a1p = reference.a * (T::one() + g);
    let a2p = test.a * (T::one() + g);
    let c1p = a1p.hypot(reference.b);
    let c2p = a2p.hypot(test.b);

    let hue_of = |a: T, b: T| -> T {
        if a == T::zero() && b == T::zero() {
            T::zero()
        } else {
            let mut h = b.atan2(a).to_degrees();
            if h < T::zero() {
                h = h + c360;
            }
            h
        }
    };
    let h1p = hue_of(a1p, reference.b);
    let h2p = hue_of(a2p, test.b);

    let d_l = test.l - reference.l;
    let d_c = c2p - c1p;

    let cc = c1p * c2p;
    let dhp = if cc == T::zero() {
        T::zero()
    } else {
        let diff = h2p - h1p;
        if diff.abs() <= c180 {
            diff
        } else if diff > c180 {
            diff - c360
        } else {
            diff + c360
        }
    };
    let d_h = two * cc.sqrt() * (dhp.to_radians() / two).sin();

    let l_bar = (reference.l + test.l) / two;
    let c_bar_p = (c1p + c2p) / two;
    let h_bar_p = if cc == T::zero() {
        h1p + h2p
    } else {
        let sum = h1p + h2p;
        if (h1p - h2p).abs() <= c180 {
            sum / two
        } else if sum < c360 {
            (sum + c360) / two
        } else {
            (sum - c360) / two
        }
    };

    let t = T::one() - cst::<T>(0.17) * (h_bar_p - cst(30.0)).to_radians().cos()
        + cst::<T>(0.24) * (two * h_bar_p).to_radians().cos()
        + cst::<T>(0.32) * (cst::<T>(3.0) * h_bar_p + cst(6.0)).to_radians().cos()
        - cst::<T>(0.20) * (cst::<T>(4.0) * h_bar_p - cst(63.0)).to_radians().cos();

    let l50sq = (l_bar - cst(50.0)) * (l_bar - cst(50.0));
    let s_l = T::one() + cst::<T>(0.015) * l50sq / (cst::<T>(20.0) + l50sq).sqrt();
    let s_c = T::one() + cst::<T>(0.045) * c_bar_p;
    let s_h = T::one() + cst::<T>(0.015) * c_bar_p * t;

    let d_theta: T = cst::<T>(30.0) * (-((h_bar_p - cst(275.0)) / cst(25.0)).powi(2)).exp();
    let r_c = two * (pow7(c_bar_p) / (pow7(c_bar_p) + c25_7)).sqrt();
    let r_t = -r_c * (two * d_theta).to_radians().sin();

    let tl = d_l / (params.k_l * s_l);
    let tc = d_c / (params.k_c * s_c);
    let th = d_h / (params.k_h * s_h);
    let d_r = r_t * tc * th;
    let value = (tl * tl + tc * tc + th * th + d_r).sqrt();

    Ciede2000Breakdown { d_l, d_c, d_h, s_l, s_c, s_h, d_r, value }
}

/// Angle between an RGB vector and the achromatic diagonal, in degrees.
/// Scale-invariant by construction, so it cannot see lightness errors.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct AngularError<T> {
    degrees: T,
}

impl<T: Real> AngularError<T> {
    pub fn degrees(&self) -> T {
        self.degrees
    }
}

/// Reproduction angular error of a non-negative RGB triple:
/// `phi = arccos((r+g+b) / (sqrt(3) * |v|))` in degrees.
pub fn reproduction_angular_error<T: Real>(patch: [T; 3]) -> Result<AngularError<T>> {
    let [r, g, b] = patch;
    let norm = (r * r + g * g + b * b).sqrt();
    if norm == T::zero() {
        return Err(Error::ZeroVector);
    }
    let cosine = ((r + g + b) / (cst::<T>(3.0).sqrt() * norm))
        .max(-T::one())
        .min(T::one());
    Ok(AngularError { degrees: cosine.acos().to_degrees() })
}

/// Colour space tag for [`euclidean_distance`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DistanceSpace {
    Rgb,
    Lab,
}

/// Plain L2 distance between two colour triples of the named space.
pub fn euclidean_distance<T: Real>(a: [T; 3], b: [T; 3], _space: DistanceSpace) -> T {
    let d0 = a[0] - b[0];
    let d1 = a[1] - b[1];
    let d2 = a[2] - b[2];
    (d0 * d0 + d1 * d1 + d2 * d2).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn de(l1: f64, a1: f64, b1: f64, l2: f64, a2: f64, b2: f64) -> f64 {
        ciede2000(
            &Lab::new(l1, a1, b1),
            &Lab::new(l2, a2, b2),
            &Ciede2000Params::default(),
        )
        .value
    }

    #[test]
    fn identical_samples_are_zero() {
        assert_eq!(de(50.0, 10.0, -10.0, 50.0, 10.0, -10.0), 0.0);
    }

    #[test]
    fn published_first_pair() {
        let got = de(50.0, 2.6772, -79.7751, 50.0, 0.0, -82.7485);
        assert!((got - 2.0425).abs() < 1e-4, "{got}");
    }

    #[test]
    fn lightness_factor_scales_pure_lightness_difference() {
        let base = de(50.0, 0.0, 0.0, 55.0, 0.0, 0.0);
        let halved = ciede2000(
            &Lab::new(50.0, 0.0, 0.0),
            &Lab::new(55.0, 0.0, 0.0),
            &Ciede2000Params { k_l: 2.0, k_c: 1.0, k_h: 1.0 },
        )
        .value;
        assert!((halved - base / 2.0).abs() < 1e-12);
    }

    #[test]
    fn breakdown_recombines() {
        let p = Ciede2000Params::<f64>::default();
        let bd = ciede2000(&Lab::new(61.29, 3.72, -5.39), &Lab::new(61.43, 2.25, -4.96), &p);
        let tl = bd.d_l / (p.k_l * bd.s_l);
        let tc = bd.d_c / (p.k_c * bd.s_c);
        let th = bd.d_h / (p.k_h * bd.s_h);
        let recombined = (tl * tl + tc * tc + th * th + bd.d_r).sqrt();
        assert!((recombined - bd.value).abs() < 1e-9);
    }

    #[test]
    fn angular_error_examples() {
        let phi = |v: [f64; 3]| reproduction_angular_error(v).unwrap().degrees();
        assert!(phi([0.5, 0.5, 0.5]).abs() < 1e-9);
        assert!((phi([1.0, 0.0, 0.0]) - 54.7356).abs() < 1e-4);
        assert!((phi([2.0, 1.0, 1.0]) - 19.4712).abs() < 1e-4);
    }

    #[test]
    fn angular_error_zero_vector_is_undefined() {
        assert!(matches!(
            reproduction_angular_error([0.0f64, 0.0, 0.0]),
            Err(Error::ZeroVector)
        ));
    }

    #[test]
    fn euclidean_examples() {
        let d = euclidean_distance([0.0f64, 0.0, 0.0], [0.0, 0.0, 0.0], DistanceSpace::Rgb);
        assert_eq!(d, 0.0);
        let d = euclidean_distance([0.0f64, 0.0, 0.0], [255.0, 0.0, 0.0], DistanceSpace::Rgb);
        assert_eq!(d, 255.0);
        let d = euclidean_distance([50.0f64, 3.0, 4.0], [50.0, 0.0, 0.0], DistanceSpace::Lab);
        assert!((d - 5.0).abs() < 1e-12);
    }
}
