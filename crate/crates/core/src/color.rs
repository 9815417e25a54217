//! sRGB to CIELab/LCh conversion under the D65 2-degree reference white.
//!
//! Conversions run in the abstract scalar type but the constants are the
//! standard double-precision sRGB primaries, so `f64` callers get the usual
//! reference chain: inverse companding, linear RGB to XYZ, XYZ to CIELab.

use crate::real::{cst, Real};

/// CIELab colour sample: `l` in [0,100], opponent axes `a` (green-red) and
/// `b` (blue-yellow).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lab<T> {
    pub l: T,
    pub a: T,
    pub b: T,
}

impl<T> Lab<T> {
    pub const fn new(l: T, a: T, b: T) -> Self {
        Self { l, a, b }
    }
}

/// Cylindrical CIELab: chroma `c = sqrt(a^2 + b^2)` and hue angle `h` in
/// [0,360). Achromatic samples carry `h = 0` by convention.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lch<T> {
    pub l: T,
    pub c: T,
    pub h: T,
}

// D65 2-degree observer white point.
const D65: [f64; 3] = [0.95047, 1.0, 1.08883];

// sRGB (linear) to XYZ and back.
const RGB_TO_XYZ: [[f64; 3]; 3] = [
    [0.4124564, 0.3575761, 0.1804375],
    [0.2126729, 0.7151522, 0.0721750],
    [0.0193339, 0.1191920, 0.9503041],
];
const XYZ_TO_RGB: [[f64; 3]; 3] = [
    [3.2404542, -1.5371385, -0.4985314],
    [-0.9692660, 1.8760108, 0.0415560],
    [0.0556434, -0.2040259, 1.0572252],
];

fn srgb_expand<T: Real>(c: T) -> T {
    if c <= cst(0.04045) {
        c / cst(12.92)
    } else {
        ((c + cst(0.055)) / cst(1.055)).powf(cst(2.4))
    }
}

fn srgb_compand<T: Real>(c: T) -> T {
    if c <= cst(0.0031308) {
        c * cst(12.92)
    } else {
        cst::<T>(1.055) * c.powf(T::one() / cst(2.4)) - cst(0.055)
    }
}

fn lab_f<T: Real>(t: T) -> T {
    let delta: T = cst(6.0 / 29.0);
    if t > delta.powi(3) {
        t.cbrt()
    } else {
        t / (cst::<T>(3.0) * delta * delta) + cst(4.0 / 29.0)
    }
}

fn lab_f_inv<T: Real>(t: T) -> T {
    let delta: T = cst(6.0 / 29.0);
    if t > delta {
        t.powi(3)
    } else {
        cst::<T>(3.0) * delta * delta * (t - cst(4.0 / 29.0))
    }
}

/// Converts a unit-interval sRGB triple to CIELab under D65.
///
/// The lightness is clipped into [0,100]; the standard primaries are not
/// exactly white-point preserving and leave white a few 1e-6 above 100.
pub fn srgb_to_lab<T: Real>(rgb: [T; 3]) -> Lab<T> {
    let lin = [srgb_expand(rgb[0]), srgb_expand(rgb[1]), srgb_expand(rgb[2])];
    let mut xyz = [T::zero(); 3];
    for (i, row) in RGB_TO_XYZ.iter().enumerate() {
        xyz[i] = cst::<T>(row[0]) * lin[0] + cst::<T>(row[1]) * lin[1] + cst::<T>(row[2]) * lin[2];
    }
    let fx = lab_f(xyz[0] / cst(D65[0]));
    let fy = lab_f(xyz[1] / cst(D65[1]));
    let fz = lab_f(xyz[2] / cst(D65[2]));
    Lab {
        l: (cst::<T>(116.0) * fy - cst(16.0)).max(T::zero()).min(cst(100.0)),
        a: cst::<T>(500.0) * (fx - fy),
        b: cst::<T>(200.0) * (fy - fz),
    }
}

/// Converts an 8-bit sRGB triple to CIELab.
pub fn srgb8_to_lab<T: Real>(rgb: [u8; 3]) -> Lab<T> {
    let u = |v: u8| T::from_u8(v).unwrap() / cst(255.0);
    srgb_to_lab([u(rgb[0]), u(rgb[1]), u(rgb[2])])
}

/// Converts CIELab back to a unit-interval sRGB triple, clipping out-of-gamut
/// channels into [0,1].
pub fn lab_to_srgb<T: Real>(lab: &Lab<T>) -> [T; 3] {
    let fy = (lab.l + cst(16.0)) / cst(116.0);
    let fx = fy + lab.a / cst(500.0);
    let fz = fy - lab.b / cst(200.0);
    let xyz = [
        lab_f_inv(fx) * cst(D65[0]),
        lab_f_inv(fy) * cst(D65[1]),
        lab_f_inv(fz) * cst(D65[2]),
    ];
    let mut rgb = [T::zero(); 3];
    for (i, row) in XYZ_TO_RGB.iter().enumerate() {
        let lin = cst::<T>(row[0]) * xyz[0] + cst::<T>(row[1]) * xyz[1] + cst::<T>(row[2]) * xyz[2];
        rgb[i] = srgb_compand(lin.max(T::zero()).min(T::one()))
            .max(T::zero())
            .min(T::one());
    }
    rgb
}

/// Converts CIELab to 8-bit sRGB, rounding half away from zero.
pub fn lab_to_srgb8<T: Real>(lab: &Lab<T>) -> [u8; 3] {
    let rgb = lab_to_srgb(lab);
    let q = |v: T| (v * cst(255.0)).round().to_u8().unwrap_or(255);
    [q(rgb[0]), q(rgb[1]), q(rgb[2])]
}

/// Rectangular to cylindrical: `c = sqrt(a^2+b^2)`, `h = atan2(b,a)` mapped
/// into [0,360).
pub fn lab_to_lch<T: Real>(lab: &Lab<T>) -> Lch<T> {
    let c = lab.a.hypot(lab.b);
    let mut h = lab.b.atan2(lab.a).to_degrees();
    if h < T::zero() {
        h = h + cst(360.0);
    }
    if h >= cst(360.0) {
        h = h - cst(360.0);
    }
    if c == T::zero() {
        h = T::zero();
    }
    Lch { l: lab.l, c, h }
}

/// Cylindrical back to rectangular.
pub fn lch_to_lab<T: Real>(lch: &Lch<T>) -> Lab<T> {
    let hr = lch.h.to_radians();
    Lab { l: lch.l, a: lch.c * hr.cos(), b: lch.c * hr.sin() }
}

/// Saturation `s = c / l`, with 0 for near-black samples (`l <= 1e-6`).
pub fn saturation<T: Real>(lch: &Lch<T>) -> T {
    if lch.l <= cst(1e-6) {
        T::zero()
    } else {
        lch.c / lch.l
    }
}
