//! Constants measured on an objective: shift-rule bias, Lipschitz
//! estimate, noise variance and objective gap.

use std::f64::consts::FRAC_PI_2;

use rayon::prelude::*;

use crate::objective::NoisyObjective;
use crate::optim::Objective;
use crate::{Error, Result};

/// `n^p` points of the regular grid `lo + (hi − lo) i/n`, `i = 0..n`. The
/// upper end is excluded, which suits periodic angles.
pub fn product_grid(p: usize, n: usize, lo: f64, hi: f64) -> Vec<Vec<f64>> {
    if p == 0 || n == 0 {
        return Vec::new();
    }
    let step = (hi - lo) / n as f64;
    let total = n.pow(p as u32);
    (0..total)
        .map(|mut idx| {
            (0..p)
                .map(|_| {
                    let i = idx % n;
                    idx /= n;
                    lo + step * i as f64
                })
                .collect()
        })
        .collect()
}

fn nonempty(grid: &[Vec<f64>]) -> Result<()> {
    if grid.is_empty() {
        Err(Error::InvalidArgument("theta grid is empty".into()))
    } else {
        Ok(())
    }
}

/// `L_V · max |E_χ F(θ ± π/2 at site i) − f(θ ± π/2 at site i)|` over the
/// grid, every shift site and both signs.
pub fn psr_bias_bound(obj: &NoisyObjective, grid: &[Vec<f64>], l_v: usize) -> Result<f64> {
    nonempty(grid)?;
    let sites = obj.shift_sites()?.len();
    let worst = grid
        .par_iter()
        .map(|theta| {
            let mut m: f64 = 0.0;
            for site in 0..sites {
                for d in [FRAC_PI_2, -FRAC_PI_2] {
                    let shift = Some((site, d));
                    m = m.max((obj.exact_value(theta, shift)? - obj.ideal_value_at(theta, shift)?).abs());
                }
            }
            Ok(m)
        })
        .collect::<Result<Vec<f64>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    Ok(l_v as f64 * worst)
}

/// `sup |E_χ F(θ) − f(θ)|` over the grid.
pub fn bias_sup(obj: &NoisyObjective, grid: &[Vec<f64>]) -> Result<f64> {
    nonempty(grid)?;
    let v = grid
        .par_iter()
        .map(|t| obj.bias_of(t).map(f64::abs))
        .collect::<Result<Vec<f64>>>()?;
    Ok(v.into_iter().fold(0.0, f64::max))
}

/// Largest difference quotient `‖∇f(θ) − ∇f(θ′)‖ / ‖θ − θ′‖` over grid
/// pairs, with exact gradients. This is a lower bound on `L`.
pub fn estimate_lipschitz<O: Objective + ?Sized>(obj: &O, grid: &[Vec<f64>]) -> Result<f64> {
    if grid.len() < 2 {
        return Err(Error::InvalidArgument("Lipschitz estimate needs at least two grid points".into()));
    }
    let grads = grid
        .par_iter()
        .map(|t| {
            obj.exact_gradient(t)
                .ok_or_else(|| Error::InvalidArgument("objective has no exact gradient".into()))?
        })
        .collect::<Result<Vec<Vec<f64>>>>()?;
    let dist = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
    let best = (0..grid.len())
        .into_par_iter()
        .map(|i| {
            let mut m: Option<f64> = None;
            for j in i + 1..grid.len() {
                let dx = dist(&grid[i], &grid[j]);
                if dx > 0.0 {
                    let q = dist(&grads[i], &grads[j]) / dx;
                    m = Some(m.map_or(q, |x| x.max(q)));
                }
            }
            m
        })
        .reduce(|| None, |a, b| match (a, b) {
            (Some(x), Some(y)) => Some(x.max(y)),
            (x, None) => x,
            (None, y) => y,
        });
    best.ok_or_else(|| Error::InvalidArgument("all grid points coincide".into()))
}

/// `sup Var F(θ, ξ)` over the grid: the `σ²` of single evaluations.
pub fn eval_variance_sup(obj: &NoisyObjective, grid: &[Vec<f64>]) -> Result<f64> {
    nonempty(grid)?;
    let v = grid
        .par_iter()
        .map(|t| obj.eval_variance(t, None))
        .collect::<Result<Vec<f64>>>()?;
    Ok(v.into_iter().fold(0.0, f64::max))
}

/// `sup E‖g − E g‖²` of the shift-rule estimate at `s = π/2` over the
/// grid. Evaluations are independent, so each site contributes
/// `scale² (Var₊ + Var₋) / 4`.
pub fn psr_variance_sup(obj: &NoisyObjective, grid: &[Vec<f64>]) -> Result<f64> {
    nonempty(grid)?;
    let sites = obj.shift_sites()?;
    let v = grid
        .par_iter()
        .map(|t| {
            let mut total = 0.0;
            for (j, s) in sites.iter().enumerate() {
                let vp = obj.eval_variance(t, Some((j, FRAC_PI_2)))?;
                let vm = obj.eval_variance(t, Some((j, -FRAC_PI_2)))?;
                total += s.scale * s.scale * (vp + vm) / 4.0;
            }
            Ok(total)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(v.into_iter().fold(0.0, f64::max))
}

/// `f(θ_0) − min f` with the minimum over the grid and `θ_0` itself.
pub fn f_gap<F>(f: F, theta0: &[f64], grid: &[Vec<f64>]) -> Result<f64>
where
    F: Fn(&[f64]) -> Result<f64> + Sync,
{
    let f0 = f(theta0)?;
    let vals = grid.par_iter().map(|t| f(t)).collect::<Result<Vec<f64>>>()?;
    let min = vals.into_iter().fold(f0, f64::min);
    Ok(f0 - min)
}

/// Grid point with the smallest `f`.
pub fn grid_argmin<F>(f: F, grid: &[Vec<f64>]) -> Result<Vec<f64>>
where
    F: Fn(&[f64]) -> Result<f64> + Sync,
{
    nonempty(grid)?;
    let vals = grid.par_iter().map(|t| f(t)).collect::<Result<Vec<f64>>>()?;
    let (i, _) = vals
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .expect("nonempty");
    Ok(grid[i].clone())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::noise::ReadoutModel;
    use crate::objective::{qaoa_circuit, Graph, NoiseConfig, Observable, Shots};
    use crate::optim::FnObjective;

    fn qaoa(noise: NoiseConfig) -> NoisyObjective {
        let g = Graph::cycle(4).unwrap();
        NoisyObjective::new(qaoa_circuit(&g, 1).unwrap(), Observable::maxcut(&g).unwrap(), noise, Shots::Exact, 1).unwrap()
    }

    #[test]
    fn grid_shape() {
        let g = product_grid(2, 4, 0.0, 1.0);
        assert_eq!(g.len(), 16);
        assert_eq!(g[0], vec![0.0, 0.0]);
        assert_eq!(g[5], vec![0.25, 0.25]);
        assert!(g.iter().all(|t| t.iter().all(|x| *x < 1.0)));
    }

    #[test]
    fn bias_bound_zero_without_noise() {
        let grid = product_grid(2, 5, 0.0, 3.0);
        assert_eq!(psr_bias_bound(&qaoa(NoiseConfig::none()), &grid, 1).unwrap(), 0.0);
    }

    #[test]
    fn bias_bound_of_constant_offset() {
        let grid = product_grid(2, 4, 0.0, 3.0);
        let obj = qaoa(NoiseConfig {
            extra_bias: 0.25,
            ..NoiseConfig::none()
        });
        for lv in [1, 3] {
            let b = psr_bias_bound(&obj, &grid, lv).unwrap();
            assert!((b - 0.25 * lv as f64).abs() < 1e-12);
        }
        assert!((bias_sup(&obj, &grid).unwrap() - 0.25).abs() < 1e-12);
    }

    #[test]
    fn bias_bound_grows_with_flip_probability() {
        let grid = product_grid(2, 4, 0.0, 3.0);
        let mut last = -1.0;
        for q in [0.0, 0.01, 0.03, 0.06, 0.1] {
            let obj = qaoa(NoiseConfig {
                readout: Some(ReadoutModel::symmetric_flip(q, 4).unwrap()),
                ..NoiseConfig::none()
            });
            let b = psr_bias_bound(&obj, &grid, 1).unwrap();
            assert!(b > last || (q == 0.0 && b == 0.0));
            last = b;
        }
    }

    #[test]
    fn lipschitz_of_linear_is_zero() {
        let f = FnObjective::new(2, |t| 3.0 * t[0] - t[1]).with_gradient(|_| vec![3.0, -1.0]);
        assert_eq!(estimate_lipschitz(&f, &product_grid(2, 3, 0.0, 1.0)).unwrap(), 0.0);
    }

    #[test]
    fn lipschitz_of_cosine() {
        let f = FnObjective::new(1, |t| t[0].cos()).with_gradient(|t| vec![-t[0].sin()]);
        let mut prev = 0.0;
        for n in [4, 16, 64, 256] {
            let h = 2.0 * std::f64::consts::PI / n as f64;
            let l = estimate_lipschitz(&f, &product_grid(1, n, 0.0, 2.0 * std::f64::consts::PI)).unwrap();
            // largest quotient sits on the pair (0, h): sin(h)/h
            assert!((l - h.sin() / h).abs() < 1e-12);
            assert!(l <= 1.0 && l >= prev);
            prev = l;
        }
        assert!(prev > 0.9998);
    }

    #[test]
    fn lipschitz_of_quadratic() {
        // A = [[3, 1], [1, 2]], ‖A‖₂ = (5 + √5)/2
        let f = FnObjective::new(2, |t| 0.5 * (3.0 * t[0] * t[0] + 2.0 * t[0] * t[1] + 2.0 * t[1] * t[1]))
            .with_gradient(|t| vec![3.0 * t[0] + t[1], t[0] + 2.0 * t[1]]);
        let norm = (5.0 + 5f64.sqrt()) / 2.0;
        let l = estimate_lipschitz(&f, &product_grid(2, 12, -1.0, 1.0)).unwrap();
        assert!(l <= norm + 1e-12);
        assert!(l > 0.95 * norm);
    }

    #[test]
    fn lipschitz_errors() {
        let f = FnObjective::new(1, |t| t[0]).with_gradient(|_| vec![1.0]);
        assert!(estimate_lipschitz(&f, &[vec![0.0]]).is_err());
        assert!(estimate_lipschitz(&f, &[vec![0.0], vec![0.0]]).is_err());
        let nograd = FnObjective::new(1, |t| t[0]);
        assert!(estimate_lipschitz(&nograd, &product_grid(1, 3, 0.0, 1.0)).is_err());
    }

    #[test]
    fn variance_sups() {
        let grid = product_grid(2, 4, 0.0, 3.0);
        let exact = qaoa(NoiseConfig::none());
        assert_eq!(eval_variance_sup(&exact, &grid).unwrap(), 0.0);
        let shot = exact.with_shots(Shots::Finite(100)).unwrap();
        let v = eval_variance_sup(&shot, &grid).unwrap();
        // cut values of the 4-cycle lie in [0, 4]
        assert!(v > 0.0 && v <= 4.0 / 100.0);
        assert!(psr_variance_sup(&shot, &grid).unwrap() > 0.0);
    }

    #[test]
    fn gap_and_argmin() {
        let grid = product_grid(1, 100, 0.0, 2.0 * std::f64::consts::PI);
        let f = |t: &[f64]| Ok(t[0].cos());
        assert!((f_gap(f, &[0.0], &grid).unwrap() - 2.0).abs() < 1e-12);
        let a = grid_argmin(f, &grid).unwrap();
        assert!((a[0] - std::f64::consts::PI).abs() < 1e-12);
    }
}
