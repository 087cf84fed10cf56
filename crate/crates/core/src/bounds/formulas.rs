use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Step-size regime of a bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    /// `α_k = α/√K`, bound on `min_k E‖∇f(θ_k)‖²`.
    FixedBudget,
    /// `α_k = α/k^γ`, bound on `E‖∇f(θ_R)‖²` for the step-weighted random
    /// iterate.
    Diminishing,
}

/// Which statement of the SPSA variance bracket to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum SpsaVariant {
    /// `σ²B3²/c² + 2b0c² + 2b²B3²/c²`.
    #[default]
    MainText,
    /// `σ²B3²/c² + 4b0c² + 4b²B3²/c²`, with the bias terms doubled.
    Restated,
}

/// Constants of the convergence bounds. Every field is nonnegative.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BoundParams {
    /// Lipschitz modulus of the gradient.
    pub l: f64,
    /// Noise standard deviation.
    pub sigma: f64,
    /// Almost-sure bias bound.
    pub b: f64,
    /// Smoothing or perturbation scale.
    pub c: f64,
    /// Parameter dimension.
    pub p: usize,
    pub alpha: f64,
    /// Exponent of the diminishing schedule, in `(1/2, 1]`.
    pub gamma: f64,
    /// Iteration count.
    pub k: u64,
    /// `f(θ_0) − f*`.
    pub f_gap: f64,
    /// SPSA intrinsic bias constant: `‖b_0(θ)‖ ≤ b0 c²`.
    pub b0: f64,
    /// Almost-sure bound on `|Δ_i|⁻¹`.
    pub b3: f64,
    /// Layer count entering the shift-rule bias.
    pub l_v: usize,
    /// Biased-SGD model: `‖b(θ)‖ ≤ m‖∇f‖² + ζ²`.
    pub m: f64,
    /// Biased-SGD model: `E‖r‖² ≤ M‖∇f + b‖² + σ²`.
    pub big_m: f64,
    /// `ζ²` of the biased-SGD model.
    pub zeta_sq: f64,
}

impl Default for BoundParams {
    fn default() -> Self {
        BoundParams {
            l: 1.0,
            sigma: 0.0,
            b: 0.0,
            c: 0.1,
            p: 1,
            alpha: 0.1,
            gamma: 1.0,
            k: 1,
            f_gap: 1.0,
            b0: 0.0,
            b3: 1.0,
            l_v: 1,
            m: 0.0,
            big_m: 0.0,
            zeta_sq: 0.0,
        }
    }
}

/// A bound with its step-size precondition check attached. A failed
/// precondition does not stop the evaluation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundValue {
    pub value: f64,
    pub precondition_ok: bool,
    pub message: Option<String>,
}

impl BoundValue {
    fn checked(value: f64, ok: bool, message: impl FnOnce() -> String) -> Self {
        BoundValue {
            value,
            precondition_ok: ok,
            message: if ok { None } else { Some(message()) },
        }
    }
}

fn nonneg(name: &str, x: f64) -> Result<()> {
    if x >= 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("{name} = {x} must be finite and nonnegative")))
    }
}

fn positive_c(c: f64) -> Result<()> {
    if c > 0.0 && c.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("c = {c} must be positive")))
    }
}

impl BoundParams {
    pub fn validate(&self) -> Result<()> {
        for (name, x) in [
            ("L", self.l),
            ("sigma", self.sigma),
            ("b", self.b),
            ("c", self.c),
            ("alpha", self.alpha),
            ("f_gap", self.f_gap),
            ("b0", self.b0),
            ("B3", self.b3),
            ("m", self.m),
            ("M", self.big_m),
            ("zeta_sq", self.zeta_sq),
        ] {
            nonneg(name, x)?;
        }
        if !(self.gamma > 0.5 && self.gamma <= 1.0) {
            return Err(Error::InvalidArgument(format!("gamma = {} must lie in (1/2, 1]", self.gamma)));
        }
        if self.k == 0 {
            return Err(Error::InvalidArgument("K must be at least 1".into()));
        }
        Ok(())
    }

    /// `√K` or `K^γ`.
    fn k_scale(&self, regime: Regime) -> f64 {
        let k = self.k as f64;
        match regime {
            Regime::FixedBudget => k.sqrt(),
            Regime::Diminishing => k.powf(self.gamma),
        }
    }
}

/// Two-point smoothing bound:
/// `4f_gap/(αK') + 2Lα(σ² + 8b²/c²)/(αK') + [2b²/c² + (c²/2)L(p+3)³]` with
/// `K' = √K` or `K^γ`. Requires `α ≤ L/4`.
pub fn two_point_bound(bp: &BoundParams, regime: Regime) -> Result<BoundValue> {
    bp.validate()?;
    positive_c(bp.c)?;
    if bp.alpha == 0.0 {
        return Err(Error::InvalidArgument("alpha must be positive".into()));
    }
    let ks = bp.k_scale(regime);
    let (b2, c2) = (bp.b * bp.b, bp.c * bp.c);
    let transient = 4.0 * bp.f_gap / (bp.alpha * ks);
    let variance = 2.0 * bp.l * bp.alpha * (bp.sigma * bp.sigma + 8.0 * b2 / c2) / (bp.alpha * ks);
    let floor = effect_of_bias(bp.b, bp.c, bp.l, bp.p)?;
    let ok = bp.alpha <= bp.l / 4.0;
    Ok(BoundValue::checked(transient + variance + floor, ok, || {
        format!(
            "alpha = {} exceeds L/4 = {}; the stricter form asks for alpha <= L/6 = {}",
            bp.alpha,
            bp.l / 4.0,
            bp.l / 6.0
        )
    }))
}

/// SPSA bound with the main-text variance bracket.
pub fn spsa_bound(bp: &BoundParams, regime: Regime) -> Result<BoundValue> {
    spsa_bound_variant(bp, regime, SpsaVariant::MainText)
}

/// SPSA bound:
/// `4f_gap/(αK') + 2Lα[σ²B3²/c² + κb0c² + κb²B3²/c²]/K' + [b0c² + b²B3²/c²]`
/// with `κ = 2` (main text) or `4` (restated). Requires `α ≤ L/2`.
pub fn spsa_bound_variant(bp: &BoundParams, regime: Regime, variant: SpsaVariant) -> Result<BoundValue> {
    bp.validate()?;
    positive_c(bp.c)?;
    if bp.alpha == 0.0 {
        return Err(Error::InvalidArgument("alpha must be positive".into()));
    }
    let kappa = match variant {
        SpsaVariant::MainText => 2.0,
        SpsaVariant::Restated => 4.0,
    };
    let ks = bp.k_scale(regime);
    let c2 = bp.c * bp.c;
    let b3sq = bp.b3 * bp.b3;
    let bracket = bp.sigma * bp.sigma * b3sq / c2 + kappa * bp.b0 * c2 + kappa * bp.b * bp.b * b3sq / c2;
    let value = 4.0 * bp.f_gap / (bp.alpha * ks) + 2.0 * bp.l * bp.alpha * bracket / ks + spsa_floor(bp.b, bp.c, bp.b0, bp.b3)?;
    let ok = bp.alpha <= bp.l / 2.0;
    Ok(BoundValue::checked(value, ok, || {
        format!("alpha = {} exceeds L/2 = {}", bp.alpha, bp.l / 2.0)
    }))
}

/// Asymptotic SPSA floor `b0c² + b²B3²/c²`.
pub fn spsa_floor(b: f64, c: f64, b0: f64, b3: f64) -> Result<f64> {
    positive_c(c)?;
    Ok(b0 * c * c + b * b * b3 * b3 / (c * c))
}

/// Minimizer of [`spsa_floor`] over `c`: `(b²B3²/b0)^{1/4}`. Infinite when
/// `b0 = 0 < b`.
pub fn spsa_optimal_c(b: f64, b0: f64, b3: f64) -> f64 {
    (b * b * b3 * b3 / b0).powf(0.25)
}

/// Biased SGD with constant step:
/// `2F/(Kα(1−m)) + αLσ²/(1−m) + ζ²/(1−m)`. Requires `α ≤ 1/((1+M)L)`.
pub fn biased_sgd_bound(bp: &BoundParams) -> Result<BoundValue> {
    bp.validate()?;
    if bp.m >= 1.0 {
        return Err(Error::InvalidArgument(format!("m = {} must be below 1", bp.m)));
    }
    if bp.alpha == 0.0 {
        return Err(Error::InvalidArgument("alpha must be positive".into()));
    }
    let one_m = 1.0 - bp.m;
    let value = 2.0 * bp.f_gap / (bp.k as f64 * bp.alpha * one_m)
        + bp.alpha * bp.l * bp.sigma * bp.sigma / one_m
        + bp.zeta_sq / one_m;
    let limit = 1.0 / ((1.0 + bp.big_m) * bp.l);
    Ok(BoundValue::checked(value, bp.alpha <= limit, || {
        format!("alpha = {} exceeds 1/((1+M)L) = {limit}", bp.alpha)
    }))
}

/// Step and iteration count that make [`biased_sgd_bound`] of order
/// `ε + ζ²/(1−m)`: `α = min{1/((1+M)L), (ε(1−m)+ζ²)/(2Lσ²)}` and
/// `K = ⌈((M+1)/(ε(1−m)+ζ²) + σ²/(ε²(1−m)² + ζ⁴)) L F⌉`.
pub fn biased_sgd_schedule(bp: &BoundParams, eps: f64) -> Result<(f64, u64)> {
    bp.validate()?;
    if !(eps > 0.0) {
        return Err(Error::InvalidArgument(format!("eps = {eps} must be positive")));
    }
    if bp.m >= 1.0 {
        return Err(Error::InvalidArgument(format!("m = {} must be below 1", bp.m)));
    }
    if bp.l <= 0.0 {
        return Err(Error::InvalidArgument("L must be positive".into()));
    }
    let one_m = 1.0 - bp.m;
    let a = eps * one_m + bp.zeta_sq;
    let s2 = bp.sigma * bp.sigma;
    let alpha = (1.0 / ((1.0 + bp.big_m) * bp.l)).min(a / (2.0 * bp.l * s2));
    let k = ((bp.big_m + 1.0) / a + s2 / (eps * eps * one_m * one_m + bp.zeta_sq * bp.zeta_sq)) * bp.l * bp.f_gap;
    Ok((alpha, k.ceil().max(1.0) as u64))
}

/// Shift-rule bound: the biased-SGD bound with `m = M = 0` and `ζ² = b`,
/// `2F/(Kα) + αLσ² + b`.
pub fn psr_bound(bp: &BoundParams) -> Result<BoundValue> {
    biased_sgd_bound(&BoundParams {
        m: 0.0,
        big_m: 0.0,
        zeta_sq: bp.b,
        ..*bp
    })
}

/// Stationarity floor of two-point smoothing: `2b²/c² + (c²/2)L(p+3)³`.
pub fn effect_of_bias(b: f64, c: f64, l: f64, p: usize) -> Result<f64> {
    positive_c(c)?;
    let c2 = c * c;
    Ok(2.0 * b * b / c2 + 0.5 * c2 * l * ((p + 3) as f64).powi(3))
}

/// `c* = [4b²/(L(p+3)³)]^{1/4}`, the minimizer of [`effect_of_bias`].
pub fn optimal_c(b: f64, l: f64, p: usize) -> Result<f64> {
    if !(l > 0.0) || p == 0 {
        return Err(Error::InvalidArgument(format!("optimal c needs L > 0 and p >= 1 (L = {l}, p = {p})")));
    }
    Ok((4.0 * b * b / (l * ((p + 3) as f64).powi(3))).powf(0.25))
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
            b: 0.5,
            c: 0.5,
            b0: 2.0,
            b3: 1.0,
            ..BoundParams::default()
        }
    }

    // Second evaluation of each formula, written term by term from the
    // statements rather than sharing code with the main path.
    fn naive_two_point(q: &BoundParams, kk: f64) -> f64 {
        let (l, a, s, b, c, p, f) = (q.l, q.alpha, q.sigma, q.b, q.c, q.p as f64, q.f_gap);
        4.0 * f / (a * kk) + (2.0 * l * a * (s.powi(2) + 8.0 * b.powi(2) / c.powi(2))) / (a * kk)
            + (2.0 * b.powi(2) / c.powi(2) + c.powi(2) / 2.0 * l * (p + 3.0).powi(3))
    }

    fn naive_spsa(q: &BoundParams, kk: f64, kappa: f64) -> f64 {
        let (l, a, s, b, c, f, b0, b3) = (q.l, q.alpha, q.sigma, q.b, q.c, q.f_gap, q.b0, q.b3);
        let inner = s.powi(2) * b3.powi(2) / c.powi(2) + kappa * b0 * c.powi(2) + kappa * b.powi(2) * b3.powi(2) / c.powi(2);
        4.0 * f / (a * kk) + 2.0 * l * a * inner / kk + (b0 * c.powi(2) + b.powi(2) * b3.powi(2) / c.powi(2))
    }

    fn naive_biased(q: &BoundParams) -> f64 {
        let d = 1.0 - q.m;
        (2.0 * q.f_gap) / (q.k as f64 * q.alpha * d) + (q.alpha * q.l * q.sigma.powi(2)) / d + q.zeta_sq / d
    }

    fn close(a: f64, b: f64, rel: f64) -> bool {
        (a - b).abs() <= rel * a.abs().max(b.abs()).max(1e-300)
    }

    #[test]
    fn two_point_matches_naive() {
        let q = fig();
        let v = two_point_bound(&q, Regime::FixedBudget).unwrap();
        assert!(close(v.value, naive_two_point(&q, (1e5f64).sqrt()), 1e-12));
        // α = 4 > L/4 = 2
        assert!(!v.precondition_ok);
        assert!(v.message.unwrap().contains("L/6"));
        let q = BoundParams { gamma: 0.8, ..q };
        let v = two_point_bound(&q, Regime::Diminishing).unwrap();
        assert!(close(v.value, naive_two_point(&q, (1e5f64).powf(0.8)), 1e-12));
    }

    #[test]
    fn spsa_matches_naive() {
        let q = fig();
        let v = spsa_bound(&q, Regime::FixedBudget).unwrap();
        assert!(close(v.value, naive_spsa(&q, (1e5f64).sqrt(), 2.0), 1e-12));
        assert!(v.precondition_ok);
        let r = spsa_bound_variant(&q, Regime::FixedBudget, SpsaVariant::Restated).unwrap();
        assert!(close(r.value, naive_spsa(&q, (1e5f64).sqrt(), 4.0), 1e-12));
        assert!(r.value > v.value);
        let q = BoundParams { gamma: 0.6, ..q };
        let v = spsa_bound(&q, Regime::Diminishing).unwrap();
        assert!(close(v.value, naive_spsa(&q, (1e5f64).powf(0.6), 2.0), 1e-12));
    }

    #[test]
    fn hand_value_at_figure_constants() {
        // √K = 316.227766..., c² = 0.25, b² = 0.25
        // transient 4/(4·√K) = 1/√K; variance 2·8·(1 + 8) / √K = 144/√K;
        // floor 2 + 0.125·8·125 = 127
        let v = two_point_bound(&fig(), Regime::FixedBudget).unwrap().value;
        let rk = 1e5f64.sqrt();
        assert!(close(v, 145.0 / rk + 127.0, 1e-14));
        // spsa: bracket 4 + 1 + 2 = 7; 2·8·4·7 = 448; floor 0.5 + 1 = 1.5
        let v = spsa_bound(&fig(), Regime::FixedBudget).unwrap().value;
        assert!(close(v, 1.0 / rk + 448.0 / rk + 1.5, 1e-14));
    }

    #[test]
    fn zero_c_is_an_error() {
        let q = BoundParams { c: 0.0, ..fig() };
        assert!(two_point_bound(&q, Regime::FixedBudget).is_err());
        assert!(spsa_bound(&q, Regime::FixedBudget).is_err());
        assert!(effect_of_bias(0.1, 0.0, 1.0, 2).is_err());
    }

    #[test]
    fn smoothing_floor_limit() {
        let q = BoundParams {
            b: 0.0,
            k: 1_000_000_000_000,
            c: 0.3,
            ..fig()
        };
        let v = two_point_bound(&q, Regime::FixedBudget).unwrap().value;
        let floor = 0.5 * 0.09 * 8.0 * 125.0;
        assert!(close(v, floor, 1e-4));
    }

    #[test]
    fn spsa_without_bias_has_no_floor() {
        let q = BoundParams { b: 0.0, b0: 0.0, ..fig() };
        let v = spsa_bound(&q, Regime::FixedBudget).unwrap().value;
        let rk = 1e5f64.sqrt();
        assert!(close(v, 1.0 / rk + 2.0 * 8.0 * 4.0 * 4.0 / rk, 1e-14));
        assert_eq!(spsa_floor(0.0, 0.5, 0.0, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn spsa_floor_minimizer() {
        let (b, b0, b3) = (0.3, 2.0, 1.5);
        let cs = spsa_optimal_c(b, b0, b3);
        let fmin = spsa_floor(b, cs, b0, b3).unwrap();
        // calculus: minimum value 2 b B3 √b0
        assert!(close(fmin, 2.0 * b * b3 * b0.sqrt(), 1e-12));
        let grid: Vec<f64> = (1..=4000).map(|i| i as f64 * 5e-4).collect();
        let arg = grid
            .iter()
            .copied()
            .min_by(|x, y| spsa_floor(b, *x, b0, b3).unwrap().total_cmp(&spsa_floor(b, *y, b0, b3).unwrap()))
            .unwrap();
        assert!((arg - cs).abs() <= 5e-4);
    }

    #[test]
    fn psr_is_biased_sgd_special_case() {
        let q = BoundParams {
            l: 3.0,
            alpha: 0.1,
            sigma: 0.7,
            b: 0.3,
            k: 500,
            f_gap: 2.0,
            ..BoundParams::default()
        };
        let a = psr_bound(&q).unwrap();
        let b = biased_sgd_bound(&BoundParams { zeta_sq: 0.3, m: 0.0, big_m: 0.0, ..q }).unwrap();
        assert_eq!(a.value, b.value);
        let hand = 2.0 * 2.0 / (500.0 * 0.1) + 0.1 * 3.0 * 0.49 + 0.3;
        assert!(close(a.value, hand, 1e-14));
        // additive floor
        let z = psr_bound(&BoundParams { b: 0.0, ..q }).unwrap();
        assert!(close(a.value - z.value, 0.3, 1e-14));
        assert!(a.precondition_ok);
        assert!(close(biased_sgd_bound(&BoundParams { m: 0.4, zeta_sq: 0.1, ..q }).unwrap().value, naive_biased(&BoundParams { m: 0.4, zeta_sq: 0.1, ..q }), 1e-12));
    }

    #[test]
    fn psr_vanishes_without_noise() {
        let q = BoundParams {
            b: 0.0,
            sigma: 0.0,
            k: u64::MAX / 2,
            alpha: 0.1,
            f_gap: 1.0,
            ..BoundParams::default()
        };
        assert!(psr_bound(&q).unwrap().value < 1e-15);
    }

    #[test]
    fn biased_sgd_rejects_m_at_least_one() {
        let q = BoundParams { m: 1.0, ..BoundParams::default() };
        assert!(biased_sgd_bound(&q).is_err());
        let q = BoundParams { alpha: 10.0, l: 1.0, ..BoundParams::default() };
        assert!(!biased_sgd_bound(&q).unwrap().precondition_ok);
    }

    #[test]
    fn schedule_reaches_order_eps() {
        // With the schedule, the three terms are at most 4(ε + ζ²/(1−m)),
        // (ε + ζ²/(1−m))/2 and ζ²/(1−m), so 5.5 (ε + ζ²/(1−m)) caps the sum.
        for &l in &[0.5, 2.0, 10.0] {
            for &sigma in &[0.1, 1.0, 3.0] {
                for &m in &[0.0, 0.3, 0.8] {
                    for &big_m in &[0.0, 1.0, 4.0] {
                        for &zeta_sq in &[0.0, 1e-3, 0.1] {
                            for &eps in &[1e-3, 1e-2, 0.1] {
                                let q = BoundParams { l, sigma, m, big_m, zeta_sq, f_gap: 1.5, ..BoundParams::default() };
                                let (alpha, k) = biased_sgd_schedule(&q, eps).unwrap();
                                let v = biased_sgd_bound(&BoundParams { alpha, k, ..q }).unwrap();
                                assert!(v.precondition_ok);
                                let target = eps + zeta_sq / (1.0 - m);
                                assert!(v.value <= 5.5 * target * (1.0 + 1e-12), "{} vs {}", v.value, target);
                            }
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn optimal_c_minimizes_effect_of_bias() {
        for &(b, l, p) in &[(0.1, 8.0, 2usize), (0.5, 1.0, 6), (1e-3, 3.0, 1)] {
            let cs = optimal_c(b, l, p).unwrap();
            let best = effect_of_bias(b, cs, l, p).unwrap();
            // calculus: minimum value 2b √(L(p+3)³)
            assert!(close(best, 2.0 * b * (l * ((p + 3) as f64).powi(3)).sqrt(), 1e-12));
            let mut argmin = (f64::INFINITY, 0.0);
            for i in -600..=200 {
                let c = 10f64.powf(i as f64 / 100.0);
                let v = effect_of_bias(b, c, l, p).unwrap();
                assert!(best <= v * (1.0 + 1e-12));
                if v < argmin.0 {
                    argmin = (v, c);
                }
            }
            // log-grid resolution is a factor 10^{0.01}
            assert!((argmin.1 / cs).ln().abs() <= 0.01 * std::f64::consts::LN_10);
        }
        assert_eq!(optimal_c(0.0, 1.0, 2).unwrap(), 0.0);
        assert!(optimal_c(0.1, 0.0, 2).is_err());
    }

    #[test]
    fn effect_of_bias_convex_in_c_squared() {
        // f(u) = 2b²/u + (u/2)L(p+3)³ is convex in u = c² for u > 0, so the
        // interior stationary point is the unique minimizer.
        let (b, l, p) = (0.2, 4.0, 3usize);
        let f = |u: f64| effect_of_bias(b, u.sqrt(), l, p).unwrap();
        for i in 1..200 {
            let u = i as f64 * 0.01;
            let h = 1e-4;
            assert!(f(u + h) + f(u - h) - 2.0 * f(u) > -1e-9);
        }
        assert_eq!(effect_of_bias(0.2, 0.3, l, p).unwrap(), effect_of_bias(-0.2, 0.3, l, p).unwrap());
        assert_eq!(effect_of_bias(0.0, 0.3, l, p).unwrap(), 0.5 * 0.09 * l * 216.0);
    }

    #[test]
    fn regime_consistency() {
        let eps = 1e-3;
        let base = BoundParams { k: 1_000_000, gamma: 0.5 + eps, ..fig() };
        let fixed = two_point_bound(&base, Regime::FixedBudget).unwrap().value;
        let dim = two_point_bound(&base, Regime::Diminishing).unwrap().value;
        assert!((dim / fixed - 1.0).abs() < 0.05);
        // the K-dependent parts alone differ by K^ε
        let trans = |r| {
            let v = two_point_bound(&base, r).unwrap().value;
            v - effect_of_bias(base.b, base.c, base.l, base.p).unwrap()
        };
        let ratio = trans(Regime::FixedBudget) / trans(Regime::Diminishing);
        assert!((ratio - 1e6f64.powf(eps)).abs() < 1e-9);
        assert!((ratio - 1.0).abs() < 0.05);
        let fixed = spsa_bound(&base, Regime::FixedBudget).unwrap().value;
        let dim = spsa_bound(&base, Regime::Diminishing).unwrap().value;
        assert!((dim / fixed - 1.0).abs() < 0.05);
    }

    #[test]
    fn monotone_over_random_grid() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..2000 {
            let q = BoundParams {
                l: rng.random_range(0.1..10.0),
                sigma: rng.random_range(0.0..3.0),
                b: rng.random_range(0.0..1.0),
                c: rng.random_range(0.01..1.0),
                p: rng.random_range(1..10),
                alpha: rng.random_range(0.01..5.0),
                gamma: rng.random_range(0.51..1.0),
                k: rng.random_range(1..1_000_000),
                f_gap: rng.random_range(0.0..5.0),
                b0: rng.random_range(0.0..3.0),
                b3: rng.random_range(0.5..2.0),
                ..BoundParams::default()
            };
            let db = rng.random_range(0.0..0.5);
            let ds = rng.random_range(0.0..0.5);
            let dk = rng.random_range(0..1_000_000);
            let bumps = [
                BoundParams { b: q.b + db, ..q },
                BoundParams { sigma: q.sigma + ds, ..q },
            ];
            let longer = BoundParams { k: q.k + dk, ..q };
            let all = |x: &BoundParams| -> Vec<f64> {
                vec![
                    two_point_bound(x, Regime::FixedBudget).unwrap().value,
                    two_point_bound(x, Regime::Diminishing).unwrap().value,
                    spsa_bound(x, Regime::FixedBudget).unwrap().value,
                    spsa_bound(x, Regime::Diminishing).unwrap().value,
                    psr_bound(x).unwrap().value,
                ]
            };
            let v0 = all(&q);
            for x in &bumps {
                for (a, b) in v0.iter().zip(all(x)) {
                    assert!(b >= *a, "{b} < {a} for {x:?}");
                }
            }
            for (a, b) in v0.iter().zip(all(&longer)) {
                assert!(b <= *a);
            }
        }
    }

    #[test]
    fn invalid_params_rejected() {
        assert!(two_point_bound(&BoundParams { gamma: 0.5, ..fig() }, Regime::FixedBudget).is_err());
        assert!(spsa_bound(&BoundParams { sigma: -1.0, ..fig() }, Regime::FixedBudget).is_err());
        assert!(psr_bound(&BoundParams { k: 0, ..fig() }).is_err());
    }
}
