//! Raster rendering of 2D coordinate slices: carpet cells dark, packing
//! balls outlined, excluded balls highlighted. Output is a binary P6
//! pixmap with deterministic bytes.

use crate::carnot::{kc_dist_boundary, CarnotPoint};
use crate::carpet::Carpet;
use crate::error::{Error, Result};
use crate::packing::Packing;

const BACKGROUND: [u8; 3] = [255, 255, 255];
const CARPET: [u8; 3] = [45, 45, 45];
const OUTLINE: [u8; 3] = [30, 90, 200];
const EXCLUDED: [u8; 3] = [220, 70, 70];

/// A 2D slice through the chart cube: every axis but two is pinned.
#[derive(Clone, Debug, PartialEq)]
pub struct PlaneSpec {
    /// `(axis, value)` pairs, 0-based axes.
    pub fixed: Vec<(usize, f64)>,
}

impl PlaneSpec {
    /// Parses specs like `"x3=0"` or `"x3=0,x4=-0.25"` (1-based axes).
    /// The empty string pins nothing.
    pub fn parse(text: &str) -> Result<PlaneSpec> {
        let mut fixed = Vec::new();
        for part in text.split(',').filter(|p| !p.trim().is_empty()) {
            let part = part.trim();
            let (axis_txt, value_txt) = part.split_once('=').ok_or_else(|| {
                Error::InvalidPlane(text.into(), format!("{part:?} is not of the form x<i>=<value>"))
            })?;
            let axis_txt = axis_txt.trim();
            if !axis_txt.starts_with('x') {
                return Err(Error::InvalidPlane(
                    text.into(),
                    format!("{axis_txt:?} should name an axis like x3"),
                ));
            }
            let axis: usize = axis_txt[1..].parse().map_err(|_| {
                Error::InvalidPlane(text.into(), format!("{axis_txt:?} has no axis number"))
            })?;
            if axis == 0 {
                return Err(Error::InvalidPlane(text.into(), "axes are numbered from 1".into()));
            }
            let value: f64 = value_txt.trim().parse().map_err(|_| {
                Error::InvalidPlane(text.into(), format!("{value_txt:?} is not a number"))
            })?;
            if !(-0.5..=0.5).contains(&value) {
                return Err(Error::InvalidPlane(
                    text.into(),
                    format!("value {value} lies outside [-1/2, 1/2]"),
                ));
            }
            if fixed.iter().any(|&(a, _)| a == axis - 1) {
                return Err(Error::InvalidPlane(text.into(), format!("axis x{axis} pinned twice")));
            }
            fixed.push((axis - 1, value));
        }
        Ok(PlaneSpec { fixed })
    }

    /// The two free axes (the lowest unpinned ones) for a chart of `dim`
    /// axes; errors unless exactly two remain free.
    pub fn free_axes(&self, dim: usize) -> Result<(usize, usize)> {
        for &(axis, _) in &self.fixed {
            if axis >= dim {
                return Err(Error::InvalidPlane(
                    format!("{self:?}"),
                    format!("axis x{} exceeds the chart dimension {dim}", axis + 1),
                ));
            }
        }
        let free: Vec<usize> = (0..dim)
            .filter(|a| !self.fixed.iter().any(|&(f, _)| f == *a))
            .collect();
        if free.len() != 2 {
            return Err(Error::InvalidPlane(
                format!("{self:?}"),
                format!("{} axes stay free (need exactly 2) in dimension {dim}", free.len()),
            ));
        }
        Ok((free[0], free[1]))
    }
}

/// 8-bit RGB raster.
#[derive(Clone, Debug, PartialEq)]
pub struct Pixmap {
    pub width: usize,
    pub height: usize,
    pub rgb: Vec<u8>,
}

impl Pixmap {
    /// Binary P6 bytes with the configuration fingerprint as a comment.
    pub fn to_p6(&self, config_hash: &str) -> Vec<u8> {
        let mut out =
            format!("P6\n# cfg {config_hash}\n{} {}\n255\n", self.width, self.height).into_bytes();
        out.extend_from_slice(&self.rgb);
        out
    }

    /// Fraction of pixels painted with the carpet color.
    pub fn carpet_fraction(&self) -> f64 {
        let total = self.width * self.height;
        let dark = self
            .rgb
            .chunks_exact(3)
            .filter(|px| px == &CARPET)
            .count();
        dark as f64 / total as f64
    }
}

/// Renders a `res x res` slice. Pixels in the carpet are dark; pixels in a
/// removed cell are white; ball boundaries get an outline and excluded
/// balls a filled highlight.
pub fn render_slice(
    carpet: &Carpet,
    packing: Option<&Packing>,
    plane: &PlaneSpec,
    res: usize,
) -> Result<Pixmap> {
    if res == 0 || res > 1 << 14 {
        return Err(Error::OutOfRange {
            what: "render resolution",
            value: res as f64,
            lo: 1.0,
            hi: (1 << 14) as f64,
        });
    }
    let spec = carpet.spec();
    let (ax, ay) = plane.free_axes(spec.dim)?;
    let mut chart = vec![0.0; spec.dim];
    for &(axis, value) in &plane.fixed {
        chart[axis] = value;
    }
    let px = 1.0 / res as f64;
    let band = 1.5 * px;
    let mut rgb = vec![0u8; res * res * 3];

    for row in 0..res {
        // image rows from the top: y decreases
        let y = 0.5 - (row as f64 + 0.5) * px;
        for col in 0..res {
            let x = -0.5 + (col as f64 + 0.5) * px;
            chart[ax] = x;
            chart[ay] = y;
            let mut color = if spec.contains(&chart)? {
                CARPET
            } else {
                BACKGROUND
            };
            if let Some(packing) = packing {
                let p = CarnotPoint::from_chart(packing.algebra, packing.n, &chart);
                for pb in packing.balls() {
                    let d = kc_dist_boundary(&p, &pb.ball.center);
                    if pb.excluded && d <= pb.ball.radius {
                        color = EXCLUDED;
                    }
                    if (d - pb.ball.radius).abs() <= band {
                        color = OUTLINE;
                        break;
                    }
                }
            }
            let at = (row * res + col) * 3;
            rgb[at..at + 3].copy_from_slice(&color);
        }
    }
    Ok(Pixmap {
        width: res,
        height: res,
        rgb,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::Algebra;
    use crate::carpet::CarpetSpec;
    use crate::packing::pack;

    fn carpet2() -> Carpet {
        Carpet::build(CarpetSpec::new(2, vec![3, 9], 2).unwrap(), 1000).unwrap()
    }

    #[test]
    fn plane_parsing() {
        assert_eq!(PlaneSpec::parse("").unwrap().fixed, vec![]);
        let p = PlaneSpec::parse("x3=0").unwrap();
        assert_eq!(p.fixed, vec![(2, 0.0)]);
        let p = PlaneSpec::parse("x3=0.25, x1=-0.5").unwrap();
        assert_eq!(p.fixed, vec![(2, 0.25), (0, -0.5)]);
        assert!(PlaneSpec::parse("y3=0").is_err());
        assert!(PlaneSpec::parse("x0=0").is_err());
        assert!(PlaneSpec::parse("x1=2").is_err());
        assert!(PlaneSpec::parse("x1=0,x1=0.1").is_err());
    }

    #[test]
    fn free_axis_selection() {
        let p = PlaneSpec::parse("x3=0").unwrap();
        assert_eq!(p.free_axes(3).unwrap(), (0, 1));
        assert!(p.free_axes(2).is_err(), "axis beyond the chart");
        let empty = PlaneSpec::parse("").unwrap();
        assert_eq!(empty.free_axes(2).unwrap(), (0, 1));
        assert!(empty.free_axes(3).is_err(), "three axes free");
    }

    #[test]
    fn p6_header_and_size() {
        let carpet = carpet2();
        let pm = render_slice(&carpet, None, &PlaneSpec::parse("").unwrap(), 64).unwrap();
        let bytes = pm.to_p6("deadbeef");
        assert!(bytes.starts_with(b"P6\n# cfg deadbeef\n64 64\n255\n"));
        assert_eq!(bytes.len(), 28 + 64 * 64 * 3);
    }

    #[test]
    fn carpet_fraction_tracks_measure() {
        let carpet = carpet2();
        let pm = render_slice(&carpet, None, &PlaneSpec::parse("").unwrap(), 512).unwrap();
        let exact = carpet.spec().measure_exact();
        assert!(
            (pm.carpet_fraction() - exact).abs() < 0.02,
            "fraction {} vs measure {exact}",
            pm.carpet_fraction()
        );
    }

    #[test]
    fn deterministic_bytes_with_balls() {
        let carpet = carpet2();
        let packing = pack(Algebra::R, 3, &carpet, 0, 200).exclude(&[1]).unwrap();
        let plane = PlaneSpec::parse("").unwrap();
        let a = render_slice(&carpet, Some(&packing), &plane, 128).unwrap();
        let b = render_slice(&carpet, Some(&packing), &plane, 128).unwrap();
        assert_eq!(a.to_p6("x"), b.to_p6("x"));
        // some outline and highlight pixels exist
        let has = |c: [u8; 3]| a.rgb.chunks_exact(3).any(|px| px == c);
        assert!(has(OUTLINE));
        assert!(has(EXCLUDED));
    }
}
