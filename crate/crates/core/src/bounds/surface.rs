use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::formulas::{effect_of_bias, optimal_c, spsa_bound_variant, two_point_bound, BoundParams, Regime, SpsaVariant};
use crate::{Error, Result};

/// What a surface tabulates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SurfaceKind {
    /// Two-point bound over `(b, c)`.
    TwoPointBound,
    /// SPSA bound over `(b, c)`.
    SpsaBound,
    /// `c*` over `(b, p)`.
    OptimalC,
    /// Effect of bias over `(b, c)`.
    EffBias,
}

impl SurfaceKind {
    /// Name of the second axis.
    pub fn second_axis(&self) -> &'static str {
        match self {
            SurfaceKind::OptimalC => "p",
            _ => "c",
        }
    }
}

/// An evenly spaced axis with both ends included.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Axis {
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
}

impl Axis {
    pub fn points(&self) -> Result<Vec<f64>> {
        if self.n == 0 || !self.lo.is_finite() || !self.hi.is_finite() || self.hi < self.lo {
            return Err(Error::InvalidArgument(format!("bad axis {self:?}")));
        }
        if self.n == 1 {
            return Ok(vec![self.lo]);
        }
        let step = (self.hi - self.lo) / (self.n - 1) as f64;
        Ok((0..self.n).map(|i| self.lo + step * i as f64).collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SurfacePoint {
    pub b: f64,
    /// `c`, or `p` for [`SurfaceKind::OptimalC`].
    pub y: f64,
    pub value: f64,
    pub precondition_ok: bool,
}

/// A grid of bound values, `b` outermost.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Surface {
    pub kind: SurfaceKind,
    pub b: Vec<f64>,
    pub y: Vec<f64>,
    pub points: Vec<SurfacePoint>,
}

impl Surface {
    pub fn at(&self, ib: usize, iy: usize) -> &SurfacePoint {
        &self.points[ib * self.y.len() + iy]
    }

    pub fn to_csv(&self) -> String {
        let mut s = format!("b,{},bound_value,precondition_ok\n", self.kind.second_axis());
        for q in &self.points {
            let _ = writeln!(s, "{:?},{:?},{:?},{}", q.b, q.y, q.value, q.precondition_ok);
        }
        s
    }
}

/// Evaluates `kind` on the `b × y` grid with `params` supplying every
/// other constant. For `OptimalC` the second axis is rounded to integer
/// `p ≥ 1`.
pub fn surface(
    kind: SurfaceKind,
    params: &BoundParams,
    regime: Regime,
    variant: SpsaVariant,
    b_axis: &Axis,
    y_axis: &Axis,
) -> Result<Surface> {
    let bs = b_axis.points()?;
    let mut ys = y_axis.points()?;
    if kind == SurfaceKind::OptimalC {
        for y in ys.iter_mut() {
            *y = y.round();
            if *y < 1.0 {
                return Err(Error::InvalidArgument(format!("p = {y} must be at least 1")));
            }
        }
    }
    let mut points = Vec::with_capacity(bs.len() * ys.len());
    for &b in &bs {
        for &y in &ys {
            let (value, ok) = match kind {
                SurfaceKind::TwoPointBound => {
                    let v = two_point_bound(&BoundParams { b, c: y, ..*params }, regime)?;
                    (v.value, v.precondition_ok)
                }
                SurfaceKind::SpsaBound => {
                    let v = spsa_bound_variant(&BoundParams { b, c: y, ..*params }, regime, variant)?;
                    (v.value, v.precondition_ok)
                }
                SurfaceKind::EffBias => (effect_of_bias(b, y, params.l, params.p)?, true),
                SurfaceKind::OptimalC => (optimal_c(b, params.l, y as usize)?, true),
            };
            points.push(SurfacePoint { b, y, value, precondition_ok: ok });
        }
    }
    Ok(Surface { kind, b: bs, y: ys, points })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fig() -> BoundParams {
        BoundParams {
            l: 8.0,
            alpha: 4.0,
            sigma: 1.0,
            k: 100_000,
            p: 2,
            f_gap: 1.0,
            b0: 2.0,
            b3: 1.0,
            ..BoundParams::default()
        }
    }

    #[test]
    fn single_cell_equals_direct_call() {
        let one = |x| Axis { lo: x, hi: x, n: 1 };
        let s = surface(SurfaceKind::SpsaBound, &fig(), Regime::FixedBudget, SpsaVariant::MainText, &one(0.3), &one(0.4)).unwrap();
        assert_eq!(s.points.len(), 1);
        let direct = spsa_bound_variant(&BoundParams { b: 0.3, c: 0.4, ..fig() }, Regime::FixedBudget, SpsaVariant::MainText).unwrap();
        assert_eq!(s.points[0].value, direct.value);
        let csv = s.to_csv();
        assert!(csv.starts_with("b,c,bound_value,precondition_ok\n"));
        assert_eq!(csv.lines().count(), 2);
    }

    #[test]
    fn optimal_c_surface_shape() {
        let s = surface(
            SurfaceKind::OptimalC,
            &fig(),
            Regime::FixedBudget,
            SpsaVariant::MainText,
            &Axis { lo: 0.05, hi: 1.0, n: 20 },
            &Axis { lo: 1.0, hi: 20.0, n: 20 },
        )
        .unwrap();
        assert!(s.to_csv().starts_with("b,p,"));
        for ib in 0..s.b.len() {
            for iy in 0..s.y.len() {
                let v = s.at(ib, iy).value;
                if ib + 1 < s.b.len() {
                    assert!(s.at(ib + 1, iy).value > v);
                }
                if iy + 1 < s.y.len() {
                    assert!(s.at(ib, iy + 1).value < v);
                }
            }
        }
    }

    #[test]
    fn axis_points() {
        assert_eq!(Axis { lo: 0.0, hi: 1.0, n: 3 }.points().unwrap(), vec![0.0, 0.5, 1.0]);
        assert!(Axis { lo: 1.0, hi: 0.0, n: 3 }.points().is_err());
        assert!(Axis { lo: 0.0, hi: 1.0, n: 0 }.points().is_err());
    }

    #[test]
    fn zero_c_in_grid_is_an_error() {
        let r = surface(
            SurfaceKind::SpsaBound,
            &fig(),
            Regime::FixedBudget,
            SpsaVariant::MainText,
            &Axis { lo: 0.0, hi: 1.0, n: 3 },
            &Axis { lo: 0.0, hi: 1.0, n: 3 },
        );
        assert!(r.is_err());
    }
}
