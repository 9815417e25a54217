//! Internal planar work arrays and the Sobel operator.

use crate::image::ImageBuffer;
use crate::real::Real;

/// A single-channel work plane in the abstract scalar type.
#[derive(Debug, Clone)]
pub(crate) struct Plane<T> {
    pub width: usize,
    pub height: usize,
    pub data: Vec<T>,
}

impl<T: Real> Plane<T> {
    pub fn from_channel_255(img: &ImageBuffer, ch: usize) -> Self {
        let (w, h) = (img.width(), img.height());
        let mut data = Vec::with_capacity(w * h);
        for y in 0..h {
            for x in 0..w {
                data.push(img.sample_255(x, y, ch));
            }
        }
        Self { width: w, height: h, data }
    }

    #[inline]
    pub fn at(&self, x: usize, y: usize) -> T {
        self.data[y * self.width + x]
    }

    /// Sample with replicated borders.
    #[inline]
    fn at_clamped(&self, x: isize, y: isize) -> T {
        let cx = x.clamp(0, self.width as isize - 1) as usize;
        let cy = y.clamp(0, self.height as isize - 1) as usize;
        self.at(cx, cy)
    }
}

/// Raw Sobel gradient magnitude with replicated borders. An isolated unit
/// step produces a magnitude of 4 per level of difference.
pub(crate) fn sobel_magnitude<T: Real>(plane: &Plane<T>) -> Plane<T> {
    let (w, h) = (plane.width, plane.height);
    let two: T = T::from_u8(2).unwrap();
    let mut data = Vec::with_capacity(w * h);
    for y in 0..h as isize {
        for x in 0..w as isize {
            let p = |dx: isize, dy: isize| plane.at_clamped(x + dx, y + dy);
            let gx = (p(1, -1) + two * p(1, 0) + p(1, 1))
                - (p(-1, -1) + two * p(-1, 0) + p(-1, 1));
            let gy = (p(-1, 1) + two * p(0, 1) + p(1, 1))
                - (p(-1, -1) + two * p(0, -1) + p(1, -1));
            data.push(gx.hypot(gy));
        }
    }
    Plane { width: w, height: h, data }
}

/// Visits each full `block x block` tile with its min and max; trailing
/// partial tiles are discarded. Returns the tile grid size `(k1, k2)`.
pub(crate) fn for_each_block<T: Real>(
    plane: &Plane<T>,
    block: usize,
    mut visit: impl FnMut(T, T),
) -> (usize, usize) {
    let k1 = plane.width / block;
    let k2 = plane.height / block;
    for by in 0..k2 {
        for bx in 0..k1 {
            let mut mn = T::infinity();
            let mut mx = T::neg_infinity();
            for y in by * block..(by + 1) * block {
                for x in bx * block..(bx + 1) * block {
                    let v = plane.at(x, y);
                    mn = mn.min(v);
                    mx = mx.max(v);
                }
            }
            visit(mn, mx);
        }
    }
    (k1, k2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::image::{Encoding, ImageBuffer};

    #[test]
    fn sobel_of_constant_is_zero() {
        let img = ImageBuffer::from_u8(5, 4, 1, Encoding::Grayscale, vec![90; 20]).unwrap();
        let mag = sobel_magnitude(&Plane::<f64>::from_channel_255(&img, 0));
        assert!(mag.data.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn sobel_vertical_step() {
        // Left half 0, right half 255: the two columns adjacent to the step
        // read 4*255, everything else 0.
        let w = 6;
        let h = 4;
        let mut data = vec![0u8; w * h];
        for y in 0..h {
            for x in 3..w {
                data[y * w + x] = 255;
            }
        }
        let img = ImageBuffer::from_u8(w, h, 1, Encoding::Grayscale, data).unwrap();
        let mag = sobel_magnitude(&Plane::<f64>::from_channel_255(&img, 0));
        for y in 0..h {
            for x in 0..w {
                let expect = if x == 2 || x == 3 { 1020.0 } else { 0.0 };
                assert_eq!(mag.at(x, y), expect, "at ({x},{y})");
            }
        }
    }

    #[test]
    fn blocks_discard_partial_tiles() {
        let img = ImageBuffer::from_u8(17, 9, 1, Encoding::Grayscale, vec![1; 153]).unwrap();
        let plane = Plane::<f64>::from_channel_255(&img, 0);
        let mut n = 0;
        let (k1, k2) = for_each_block(&plane, 8, |_, _| n += 1);
        assert_eq!((k1, k2), (2, 1));
        assert_eq!(n, 2);
    }
}
