use alloc::vec::Vec;

use super::device::{DeviceModel, DifferentialPair};
use super::read::{read_weight, ReadConfig};
use crate::error::{positive, Error, Result};
use crate::Binary;

/// A point in device space.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields))]
pub struct CompatPoint {
    pub r_on: f64,
    pub ratio: f64,
    pub cap: f64,
}

impl Default for CompatPoint {
    fn default() -> Self {
        Self { r_on: 1e9, ratio: 100.0, cap: 100e-15 }
    }
}

/// Mean normalizer output, as a fraction of `norm_bias`, for a pair storing high.
///
/// A ratio of 1 stores no information and yields 0.
pub fn compatibility(r_on: f64, ratio: f64, cap: f64, cfg: &ReadConfig) -> Result<f64> {
    positive("r_on", r_on)?;
    positive("ratio", ratio)?;
    if cap < 0.0 || !cap.is_finite() {
        return Err(Error::InvalidParameter { name: "cap", value: cap });
    }
    if ratio <= 1.0 {
        return Ok(0.0);
    }
    let dev = DeviceModel::new(r_on, r_on * ratio, cap)?;
    let pair = DifferentialPair::new(&dev, Binary::High)?;
    Ok(read_weight(&pair, &ReadConfig { trace_points: 2, ..*cfg })?.mean_fraction)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum SweepParam {
    ROn,
    Ratio,
    Cap,
}

impl SweepParam {
    /// CSV column name with its SI unit.
    pub fn column(self) -> &'static str {
        match self {
            SweepParam::ROn => "r_on_ohm",
            SweepParam::Ratio => "ratio",
            SweepParam::Cap => "cap_f",
        }
    }

    fn set(self, p: &mut CompatPoint, v: f64) {
        match self {
            SweepParam::ROn => p.r_on = v,
            SweepParam::Ratio => p.ratio = v,
            SweepParam::Cap => p.cap = v,
        }
    }

    fn get(self, p: &CompatPoint) -> f64 {
        match self {
            SweepParam::ROn => p.r_on,
            SweepParam::Ratio => p.ratio,
            SweepParam::Cap => p.cap,
        }
    }
}

/// Log axis `10^(k / per_decade)` for `k` in `min_exp·per_decade ..= max_exp·per_decade`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields))]
pub struct Axis {
    pub param: SweepParam,
    pub min_exp: i32,
    pub max_exp: i32,
    pub per_decade: u32,
}

impl Axis {
    pub fn values(&self) -> Result<Vec<f64>> {
        if self.per_decade == 0 || self.max_exp < self.min_exp {
            return Err(Error::InvalidParameter { name: "axis", value: self.per_decade as f64 });
        }
        let n = self.per_decade as i32;
        Ok((self.min_exp * n..=self.max_exp * n).map(|k| libm::pow(10.0, k as f64 / n as f64)).collect())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Heatmap {
    pub x: SweepParam,
    pub y: SweepParam,
    pub x_values: Vec<f64>,
    pub y_values: Vec<f64>,
    /// Mean fractions indexed `[y][x]`.
    pub cells: Vec<Vec<f64>>,
}

/// Evaluates [`compatibility`] on a 2-D log grid, holding the third
/// parameter at its value in `base`. `map_rows` may evaluate rows in parallel.
pub fn compatibility_sweep(
    x: &Axis,
    y: &Axis,
    base: &CompatPoint,
    cfg: &ReadConfig,
    map_rows: impl FnOnce(&[f64], &(dyn Fn(f64) -> Result<Vec<f64>> + Sync)) -> Result<Vec<Vec<f64>>>,
) -> Result<Heatmap> {
    if x.param == y.param {
        return Err(Error::InvalidParameter { name: "axis", value: 0.0 });
    }
    cfg.validate()?;
    let xs = x.values()?;
    let ys = y.values()?;
    let row = |yv: f64| -> Result<Vec<f64>> {
        xs.iter()
            .map(|&xv| {
                let mut p = *base;
                x.param.set(&mut p, xv);
                y.param.set(&mut p, yv);
                compatibility(p.r_on, p.ratio, p.cap, cfg)
            })
            .collect()
    };
    let cells = map_rows(&ys, &row)?;
    Ok(Heatmap { x: x.param, y: y.param, x_values: xs, y_values: ys, cells })
}

impl Heatmap {
    /// Serial row evaluation for [`compatibility_sweep`].
    pub fn serial_rows(ys: &[f64], row: &(dyn Fn(f64) -> Result<Vec<f64>> + Sync)) -> Result<Vec<Vec<f64>>> {
        ys.iter().map(|&y| row(y)).collect()
    }

    /// Index of the row/column closest (in log) to `value` on `param`'s axis.
    pub fn nearest(&self, param: SweepParam, value: f64) -> Option<usize> {
        let axis = if param == self.x {
            &self.x_values
        } else if param == self.y {
            &self.y_values
        } else {
            return None;
        };
        let lv = libm::log10(value);
        (0..axis.len()).min_by(|&a, &b| (libm::log10(axis[a]) - lv).abs().total_cmp(&(libm::log10(axis[b]) - lv).abs()))
    }
}

/// First grid value along `along` (ascending) whose fraction reaches
/// `threshold`, with the other axis fixed at index `at`; also returns the
/// preceding grid value, so the contour lies in `(prev, found]`.
pub fn min_compatible(map: &Heatmap, along: SweepParam, at: usize, threshold: f64) -> Option<(Option<f64>, f64)> {
    let (values, cell): (&[f64], &dyn Fn(usize) -> f64) = if along == map.x {
        (&map.x_values, &|k| map.cells[at][k])
    } else if along == map.y {
        (&map.y_values, &|k| map.cells[k][at])
    } else {
        return None;
    };
    let k = (0..values.len()).find(|&k| cell(k) >= threshold)?;
    Some((k.checked_sub(1).map(|j| values[j]), values[k]))
}

/// Value of `param` at a point.
pub fn point_value(p: &CompatPoint, param: SweepParam) -> f64 {
    param.get(p)
}
