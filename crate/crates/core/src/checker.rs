//! Colour-checker protocol: polygon annotations, per-patch mean colours, and
//! patch scoring against the reference chart with the angular error and
//! CIEDE2000.
//!
//! The annotation format is the subset of the LabelMe export schema the
//! protocol needs: a JSON object with a `shapes` array whose entries carry a
//! `label` string and a `points` array of `[x, y]` pairs. Unknown fields are
//! ignored.

use std::collections::HashSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::color::srgb_to_lab;
use crate::config::{MetricConfig, PhiMode};
use crate::diff::{ciede2000, reproduction_angular_error, Ciede2000Params};
use crate::error::{Error, Result};
use crate::image::ImageBuffer;

/// A labelled polygon region in image coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct PatchAnnotation {
    pub label: String,
    /// Ordered vertices, at least 3.
    pub polygon: Vec<[f64; 2]>,
}

#[derive(Deserialize)]
struct LabelMeFile {
    shapes: Vec<LabelMeShape>,
}

#[derive(Deserialize)]
struct LabelMeShape {
    label: String,
    points: Vec<[f64; 2]>,
}

/// Parses patch annotations from a LabelMe-style JSON file.
pub fn parse_annotations(path: impl AsRef<Path>) -> Result<Vec<PatchAnnotation>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| Error::FileRead {
        path: path.to_path_buf(),
        source,
    })?;
    let parsed: LabelMeFile = serde_json::from_str(&text).map_err(|e| Error::Annotation {
        path: path.to_path_buf(),
        reason: e.to_string(),
    })?;

    let mut seen = HashSet::new();
    let mut out = Vec::with_capacity(parsed.shapes.len());
    for shape in parsed.shapes {
        if shape.points.len() < 3 {
            return Err(Error::TooFewVertices {
                label: shape.label,
                count: shape.points.len(),
            });
        }
        if !seen.insert(shape.label.clone()) {
            return Err(Error::DuplicateLabel(shape.label));
        }
        out.push(PatchAnnotation { label: shape.label, polygon: shape.points });
    }
    Ok(out)
}

/// One reference patch: its sRGB value under D65 and whether it is neutral.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferencePatch {
    pub label: String,
    pub srgb: [u8; 3],
    pub achromatic: bool,
}

/// The 24-patch reference chart under D65: 18 chromatic plus 6 achromatic
/// patches.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckerReference {
    patches: Vec<ReferencePatch>,
}

const BUILTIN_CHART: &str = include_str!("../data/colorchecker_d65.json");

impl CheckerReference {
    /// The classic 24-patch chart's published sRGB values under D65.
    pub fn builtin() -> Self {
        Self::from_json(BUILTIN_CHART).expect("builtin chart is valid")
    }

    /// Loads an alternate chart from a JSON array of
    /// `{label, srgb: [r,g,b], achromatic}` entries.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| Error::FileRead {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_json(&text)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let patches: Vec<ReferencePatch> =
            serde_json::from_str(text).map_err(|e| Error::Chart(e.to_string()))?;
        let chart = Self { patches };
        chart.validate()?;
        Ok(chart)
    }

    fn validate(&self) -> Result<()> {
        if self.patches.len() != 24 {
            return Err(Error::Chart(format!(
                "{} patches, the chart must have 24",
                self.patches.len()
            )));
        }
        let achromatic = self.patches.iter().filter(|p| p.achromatic).count();
        if achromatic != 6 {
            return Err(Error::Chart(format!(
                "{achromatic} achromatic patches, the chart must have 6"
            )));
        }
        let mut seen = HashSet::new();
        for p in &self.patches {
            if !seen.insert(&p.label) {
                return Err(Error::Chart(format!("duplicate label {:?}", p.label)));
            }
        }
        Ok(())
    }

    pub fn patches(&self) -> &[ReferencePatch] {
        &self.patches
    }

    pub fn find(&self, label: &str) -> Option<&ReferencePatch> {
        self.patches.iter().find(|p| p.label == label)
    }
}

/// Even-odd-rule point-in-polygon test.
fn inside(polygon: &[[f64; 2]], px: f64, py: f64) -> bool {
    let mut odd = false;
    let n = polygon.len();
    let mut j = n - 1;
    for i in 0..n {
        let [xi, yi] = polygon[i];
        let [xj, yj] = polygon[j];
        if (yi > py) != (yj > py) && px < (xj - xi) * (py - yi) / (yj - yi) + xi {
            odd = !odd;
        }
        j = i;
    }
    odd
}

fn distance_to_segment(px: f64, py: f64, a: [f64; 2], b: [f64; 2]) -> f64 {
    let (dx, dy) = (b[0] - a[0], b[1] - a[1]);
    let len2 = dx * dx + dy * dy;
    let t = if len2 == 0.0 {
        0.0
    } else {
        (((px - a[0]) * dx + (py - a[1]) * dy) / len2).clamp(0.0, 1.0)
    };
    let (cx, cy) = (a[0] + t * dx, a[1] + t * dy);
    (px - cx).hypot(py - cy)
}

fn check_bounds(img: &ImageBuffer, poly: &PatchAnnotation) -> Result<()> {
    let (w, h) = (img.width() as f64, img.height() as f64);
    for &[x, y] in &poly.polygon {
        if !(0.0..=w).contains(&x) || !(0.0..=h).contains(&y) {
            return Err(Error::PolygonOutOfBounds {
                label: poly.label.clone(),
                width: img.width(),
                height: img.height(),
            });
        }
    }
    Ok(())
}

/// Visits every pixel whose center lies inside the polygon eroded by
/// `erosion` pixels (a disk-radius margin from every edge).
fn for_each_interior_pixel(
    img: &ImageBuffer,
    poly: &PatchAnnotation,
    erosion: f64,
    mut visit: impl FnMut(usize, usize),
) -> usize {
    let xs = poly.polygon.iter().map(|p| p[0]);
    let ys = poly.polygon.iter().map(|p| p[1]);
    let x0 = xs.clone().fold(f64::INFINITY, f64::min).floor().max(0.0) as usize;
    let x1 = (xs.fold(f64::NEG_INFINITY, f64::max).ceil() as usize).min(img.width());
    let y0 = ys.clone().fold(f64::INFINITY, f64::min).floor().max(0.0) as usize;
    let y1 = (ys.fold(f64::NEG_INFINITY, f64::max).ceil() as usize).min(img.height());

    let n = poly.polygon.len();
    let mut count = 0;
    for y in y0..y1 {
        for x in x0..x1 {
            let (cx, cy) = (x as f64 + 0.5, y as f64 + 0.5);
            if !inside(&poly.polygon, cx, cy) {
                continue;
            }
            if erosion > 0.0 {
                let near_edge = (0..n).any(|i| {
                    distance_to_segment(cx, cy, poly.polygon[i], poly.polygon[(i + 1) % n])
                        < erosion
                });
                if near_edge {
                    continue;
                }
            }
            visit(x, y);
            count += 1;
        }
    }
    count
}

/// Mean sRGB of the pixels strictly inside the eroded polygon, on the buffer's
/// native sample scale (0..255 for 8-bit, 0..1 for float).
pub fn patch_mean_color(
    img: &ImageBuffer,
    poly: &PatchAnnotation,
    erosion: f64,
) -> Result<[f64; 3]> {
    if img.channels() != 3 {
        return Err(Error::ChannelMismatch(img.channels()));
    }
    check_bounds(img, poly)?;
    let mut acc = [0.0f64; 3];
    let count = for_each_interior_pixel(img, poly, erosion, |x, y| {
        for (c, a) in acc.iter_mut().enumerate() {
            let v: f64 = match img.depth() {
                crate::image::Depth::U8 => img.sample_255(x, y, c),
                crate::image::Depth::F32 => img.sample_unit(x, y, c),
            };
            *a += v;
        }
    });
    if count == 0 {
        return Err(Error::EmptyPatchInterior(poly.label.clone()));
    }
    Ok(acc.map(|v| v / count as f64))
}

/// Scores for one patch. `phi_degrees` is populated for achromatic patches
/// (all patches when so configured); `delta_e00` is always populated.
#[derive(Debug, Clone, PartialEq)]
pub struct PatchScore {
    pub label: String,
    /// Mean patch colour on the image's native sample scale.
    pub measured_rgb: [f64; 3],
    pub phi_degrees: Option<f64>,
    pub delta_e00: f64,
    pub worse_than_original: Option<WorseThanOriginal>,
}

/// Per-measure comparison against the original image's score of the same
/// patch: true where this image's error is larger.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WorseThanOriginal {
    pub phi: bool,
    pub delta_e00: bool,
}

/// Scores every annotated patch against the reference chart.
///
/// The angular error is computed from the mean patch colour (or as the mean
/// of per-pixel angles when configured), CIEDE2000 between the measured and
/// reference colours converted to CIELab. With `original_scores` supplied,
/// each patch is flagged where its error exceeds the original's.
pub fn evaluate_checker(
    img: &ImageBuffer,
    annotations: &[PatchAnnotation],
    reference: &CheckerReference,
    original_scores: Option<&[PatchScore]>,
    config: &MetricConfig,
) -> Result<Vec<PatchScore>> {
    if img.channels() != 3 {
        return Err(Error::ChannelMismatch(img.channels()));
    }
    let de_params = Ciede2000Params::default();
    let unit_scale = match img.depth() {
        crate::image::Depth::U8 => 255.0,
        crate::image::Depth::F32 => 1.0,
    };

    let mut scores = Vec::with_capacity(annotations.len());
    for poly in annotations {
        let patch = reference
            .find(&poly.label)
            .ok_or_else(|| Error::UnmatchedLabel(poly.label.clone()))?;
        let measured_rgb = patch_mean_color(img, poly, config.patch_erosion)?;

        let phi_degrees = if patch.achromatic || config.phi_all_patches {
            let phi = match config.phi_mode {
                PhiMode::MeanColor => {
                    let unit = measured_rgb.map(|v| v / unit_scale);
                    reproduction_angular_error(unit)?.degrees()
                }
                PhiMode::PerPixel => {
                    let mut acc = 0.0;
                    let mut n = 0usize;
                    let mut zero_pixel = false;
                    for_each_interior_pixel(img, poly, config.patch_erosion, |x, y| {
                        let px = img.pixel_unit::<f64>(x, y);
                        match reproduction_angular_error(px) {
                            Ok(a) => {
                                acc += a.degrees();
                                n += 1;
                            }
                            Err(_) => zero_pixel = true,
                        }
                    });
                    if zero_pixel || n == 0 {
                        return Err(Error::ZeroVector);
                    }
                    acc / n as f64
                }
            };
            Some(phi)
        } else {
            None
        };

        let measured_lab = srgb_to_lab(measured_rgb.map(|v| v / unit_scale));
        let reference_lab = srgb_to_lab(patch.srgb.map(|v| f64::from(v) / 255.0));
        let delta_e00 = ciede2000(&reference_lab, &measured_lab, &de_params).value;

        let worse_than_original = original_scores
            .and_then(|orig| orig.iter().find(|s| s.label == poly.label))
            .map(|orig| WorseThanOriginal {
                phi: match (phi_degrees, orig.phi_degrees) {
                    (Some(now), Some(before)) => now > before,
                    _ => false,
                },
                delta_e00: delta_e00 > orig.delta_e00,
            });

        scores.push(PatchScore {
            label: poly.label.clone(),
            measured_rgb,
            phi_degrees,
            delta_e00,
            worse_than_original,
        });
    }
    Ok(scores)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::image::Encoding;

    fn rect(x0: f64, y0: f64, x1: f64, y1: f64) -> Vec<[f64; 2]> {
        vec![[x0, y0], [x1, y0], [x1, y1], [x0, y1]]
    }

    fn annotation(label: &str, polygon: Vec<[f64; 2]>) -> PatchAnnotation {
        PatchAnnotation { label: label.into(), polygon }
    }

    fn uniform(w: usize, h: usize, rgb: [u8; 3]) -> ImageBuffer {
        let mut data = Vec::with_capacity(w * h * 3);
        for _ in 0..w * h {
            data.extend_from_slice(&rgb);
        }
        ImageBuffer::from_u8(w, h, 3, Encoding::Srgb, data).unwrap()
    }

    #[test]
    fn parse_single_triangle() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ann.json");
        std::fs::write(
            &path,
            r#"{"version":"5.0","shapes":[{"label":"gray_1","points":[[0,0],[4,0],[2,3]],"shape_type":"polygon"}]}"#,
        )
        .unwrap();
        let anns = parse_annotations(&path).unwrap();
        assert_eq!(anns.len(), 1);
        assert_eq!(anns[0].label, "gray_1");
        assert_eq!(anns[0].polygon.len(), 3);
    }

    #[test]
    fn parse_rejects_duplicates_and_degenerate_polygons() {
        let dir = tempfile::tempdir().unwrap();
        let dup = dir.path().join("dup.json");
        std::fs::write(
            &dup,
            r#"{"shapes":[{"label":"a","points":[[0,0],[1,0],[1,1]]},{"label":"a","points":[[0,0],[2,0],[2,2]]}]}"#,
        )
        .unwrap();
        let err = parse_annotations(&dup).unwrap_err();
        assert!(err.to_string().contains('a'), "{err}");
        assert!(matches!(err, Error::DuplicateLabel(_)));

        let two = dir.path().join("two.json");
        std::fs::write(&two, r#"{"shapes":[{"label":"b","points":[[0,0],[1,1]]}]}"#).unwrap();
        assert!(matches!(parse_annotations(&two), Err(Error::TooFewVertices { .. })));

        let bad = dir.path().join("bad.json");
        std::fs::write(&bad, "{ not json").unwrap();
        let err = parse_annotations(&bad).unwrap_err();
        assert!(err.to_string().contains("bad.json"));
    }

    #[test]
    fn builtin_chart_is_valid() {
        let chart = CheckerReference::builtin();
        assert_eq!(chart.patches().len(), 24);
        assert_eq!(chart.patches().iter().filter(|p| p.achromatic).count(), 6);
        assert!(chart.find("white").is_some());
    }

    #[test]
    fn chart_validation_rejects_wrong_counts() {
        let err = CheckerReference::from_json(
            r#"[{"label":"x","srgb":[0,0,0],"achromatic":true}]"#,
        )
        .unwrap_err();
        assert!(matches!(err, Error::Chart(_)));
    }

    #[test]
    fn mean_of_uniform_patch_is_the_patch_colour() {
        let img = uniform(10, 10, [10, 20, 30]);
        let mean = patch_mean_color(&img, &annotation("p", rect(1.0, 1.0, 8.0, 8.0)), 0.0).unwrap();
        assert_eq!(mean, [10.0, 20.0, 30.0]);
    }

    #[test]
    fn mean_of_straddling_polygon_is_the_midpoint() {
        // Left half 0, right half 255; the rectangle covers both evenly.
        let w = 8;
        let h = 6;
        let mut data = Vec::new();
        for _y in 0..h {
            for x in 0..w {
                let v = if x < 4 { 0u8 } else { 255 };
                data.extend_from_slice(&[v, v, v]);
            }
        }
        let img = ImageBuffer::from_u8(w, h, 3, Encoding::Srgb, data).unwrap();
        let mean = patch_mean_color(&img, &annotation("p", rect(2.0, 1.0, 6.0, 5.0)), 0.0).unwrap();
        assert_eq!(mean, [127.5, 127.5, 127.5]);
    }

    #[test]
    fn erosion_larger_than_polygon_is_an_error() {
        let img = uniform(10, 10, [1, 2, 3]);
        let result = patch_mean_color(&img, &annotation("tiny", rect(2.0, 2.0, 5.0, 5.0)), 4.0);
        assert!(matches!(result, Err(Error::EmptyPatchInterior(_))));
    }

    #[test]
    fn vertex_rotation_order_does_not_change_the_mean() {
        let mut data = Vec::new();
        for i in 0..(10 * 10) {
            data.extend_from_slice(&[(i * 31 % 256) as u8, (i * 7 % 256) as u8, (i % 256) as u8]);
        }
        let img = ImageBuffer::from_u8(10, 10, 3, Encoding::Srgb, data).unwrap();
        let poly = rect(1.0, 2.0, 8.0, 7.0);
        let m1 = patch_mean_color(&img, &annotation("p", poly.clone()), 1.0).unwrap();
        let mut rotated = poly.clone();
        rotated.rotate_left(2);
        let m2 = patch_mean_color(&img, &annotation("p", rotated), 1.0).unwrap();
        let mut reversed = poly;
        reversed.reverse();
        let m3 = patch_mean_color(&img, &annotation("p", reversed), 1.0).unwrap();
        assert_eq!(m1, m2);
        assert_eq!(m1, m3);
    }

    #[test]
    fn out_of_bounds_polygon_is_rejected() {
        let img = uniform(10, 10, [0, 0, 0]);
        let result = patch_mean_color(&img, &annotation("p", rect(-1.0, 0.0, 5.0, 5.0)), 0.0);
        assert!(matches!(result, Err(Error::PolygonOutOfBounds { .. })));
    }

    #[test]
    fn perfect_patches_score_zero() {
        let chart = CheckerReference::builtin();
        let white = chart.find("white").unwrap().srgb;
        let img = uniform(12, 12, white);
        let anns = vec![annotation("white", rect(1.0, 1.0, 11.0, 11.0))];
        let cfg = MetricConfig::default();
        let scores = evaluate_checker(&img, &anns, &chart, None, &cfg).unwrap();
        assert_eq!(scores.len(), 1);
        assert!(scores[0].phi_degrees.unwrap() < 0.05);
        assert!(scores[0].delta_e00 < 1e-9);
    }

    #[test]
    fn gray_rendered_white_fools_phi_but_not_delta_e() {
        // A neutral_5 patch rendered pure white: the angular error stays 0
        // while the colour difference is clearly perceptible.
        let chart = CheckerReference::builtin();
        let img = uniform(12, 12, [255, 255, 255]);
        let anns = vec![annotation("neutral_5", rect(1.0, 1.0, 11.0, 11.0))];
        let cfg = MetricConfig::default();
        let scores = evaluate_checker(&img, &anns, &chart, None, &cfg).unwrap();
        assert!(scores[0].phi_degrees.unwrap() < 1e-9);
        assert!(scores[0].delta_e00 > 1.0);
    }

    #[test]
    fn unmatched_label_errors() {
        let chart = CheckerReference::builtin();
        let img = uniform(12, 12, [1, 2, 3]);
        let anns = vec![annotation("nonexistent", rect(1.0, 1.0, 11.0, 11.0))];
        let cfg = MetricConfig::default();
        assert!(matches!(
            evaluate_checker(&img, &anns, &chart, None, &cfg),
            Err(Error::UnmatchedLabel(_))
        ));
    }

    #[test]
    fn worse_than_original_flags() {
        let chart = CheckerReference::builtin();
        let cfg = MetricConfig::default();
        let anns = vec![annotation("neutral_5", rect(1.0, 1.0, 11.0, 11.0))];
        // Original: mild cast. Enhanced: strong cast, strictly worse.
        let original = evaluate_checker(&uniform(12, 12, [130, 122, 118]), &anns, &chart, None, &cfg).unwrap();
        let enhanced =
            evaluate_checker(&uniform(12, 12, [200, 120, 80]), &anns, &chart, Some(&original), &cfg)
                .unwrap();
        let flags = enhanced[0].worse_than_original.unwrap();
        assert!(flags.phi);
        assert!(flags.delta_e00);

        // Identical to the original: not worse.
        let same =
            evaluate_checker(&uniform(12, 12, [130, 122, 118]), &anns, &chart, Some(&original), &cfg)
                .unwrap();
        let flags = same[0].worse_than_original.unwrap();
        assert!(!flags.phi);
        assert!(!flags.delta_e00);
    }

    #[test]
    fn per_pixel_phi_mode_matches_mean_mode_on_uniform_patch() {
        let chart = CheckerReference::builtin();
        let img = uniform(12, 12, [180, 150, 120]);
        let anns = vec![annotation("white", rect(1.0, 1.0, 11.0, 11.0))];
        let mean_cfg = MetricConfig::default();
        let mut pixel_cfg = MetricConfig::default();
        pixel_cfg.phi_mode = PhiMode::PerPixel;
        let a = evaluate_checker(&img, &anns, &chart, None, &mean_cfg).unwrap();
        let b = evaluate_checker(&img, &anns, &chart, None, &pixel_cfg).unwrap();
        let (pa, pb) = (a[0].phi_degrees.unwrap(), b[0].phi_degrees.unwrap());
        assert!((pa - pb).abs() < 1e-9, "{pa} vs {pb}");
    }
}
