//! Bergman geodesic rays `φ(t;k)`, their shifted upper envelope, mass
//! budgets and growth diagnostics.

use std::io::{self, Write};

use num_complex::Complex;

use crate::asymptotics::{chow_weight_algebraic, AsymptoticReport};
use crate::numeric::{energy_derivative_at_t, BergmanLevel, McOptions, NumericError, Parametrization};
use crate::scalar::Real;
use crate::spectra::TestConfiguration;
use crate::Rational;

/// `φ(t;k)(z) = (1/k)·log(k^{-n} Σ_α e^{2tλ_α} |s_α(z)|² / ‖z‖^{2k})`,
/// by log-sum-exp so that `k·|tλ|` in the thousands stays finite.
pub fn ray_potential<R: Real>(level: &BergmanLevel<R>, t: R, z: &[Complex<R>]) -> Result<R, NumericError> {
    let k = R::of(level.k.max(1) as f64);
    let sections = level.unit_sections(z)?;
    let two_t = t + t;
    let logs: Vec<R> = sections
        .iter()
        .zip(&level.lambdas)
        .filter(|(s, _)| s.norm_sqr() > R::zero())
        .map(|(s, l)| two_t * *l + s.norm_sqr().ln())
        .collect();
    let top = logs.iter().copied().fold(R::neg_infinity(), R::max);
    if !top.is_finite() {
        return Err(NumericError::Indeterminate);
    }
    let sum: R = logs.iter().map(|x| (*x - top).exp()).sum();
    Ok((top + sum.ln() - R::of(level.n as f64) * k.ln()) / k)
}

/// Sample points of a chart: the origin, a geometric sweep of radii along a
/// generic direction, and (for curves) the point at infinity.
pub fn default_points<R: Real>(p: &Parametrization) -> Vec<Vec<Complex<R>>> {
    let chart = p.compile::<R>();
    let d = p.chart_dim();
    let dir = Complex::from_polar(R::one(), R::of(0.7));
    let mut pts = vec![chart.jet(&vec![Complex::new(R::zero(), R::zero()); d]).values];
    for j in -4..=4 {
        let r = R::of(10f64.powf(j as f64 / 2.0));
        let u: Vec<Complex<R>> = (0..d).map(|i| dir.scale(r) * Complex::from_polar(R::one(), R::of(i as f64))).collect();
        pts.push(chart.jet(&u).values);
    }
    if d == 1 {
        pts.push(p.at_infinity(&[Complex::new(R::one(), R::zero())]));
    }
    pts.retain(|z| z.iter().any(|c| c.norm() > R::zero()));
    pts
}

/// Potentials on a `(k, t, point)` grid with the shifted upper envelope.
#[derive(Clone, Debug)]
pub struct RayGrid<R> {
    pub t_grid: Vec<R>,
    pub points: Vec<Vec<Complex<R>>>,
    pub k_set: Vec<u32>,
    pub n: usize,
    /// `phi[k][t][x]`.
    pub phi: Vec<Vec<Vec<R>>>,
    /// `φ(0;k)` per point.
    pub phi_zero: Vec<Vec<R>>,
    pub c_k: Vec<R>,
    pub eps_k: Vec<R>,
    /// `envelope[t][x]` after the grid upper regularization.
    pub envelope: Vec<Vec<R>>,
    /// Index into `k_set` of the member attaining the pointwise max.
    pub attaining: Vec<Vec<usize>>,
    /// `φ(0;k) + c_k` strictly decreases in `k` at every point.
    pub monotone_boundary: bool,
    /// `max_x |envelope(t₀)[x] − φ(0;k_max)[x]|` at the grid time nearest 0.
    pub boundary_gap: R,
    pub boundary_t: R,
}

impl<R: Real> RayGrid<R> {
    pub fn shifted(&self, ki: usize, ti: usize, xi: usize) -> R {
        self.phi[ki][ti][xi] + self.c_k[ki] - self.eps_k[ki] * self.t_grid[ti]
    }

    /// `ψ(t;k) = k·[φ(t;k) − φ(0;k)] + n·log k`.
    pub fn psi(&self, ki: usize, ti: usize, xi: usize) -> R {
        let k = R::of(self.k_set[ki] as f64);
        k * (self.phi[ki][ti][xi] - self.phi_zero[ki][xi]) + R::of(self.n as f64) * k.ln()
    }
}

/// Evaluates `φ(t;k)` for each level and builds the envelope
/// `max_k [φ(t;k) + c_k − ε_k·t]` with `ε_k = k^{-1/2}` and
/// `c_k = 2·max_j(j²e_j)·Σ_{i≥k} i^{-2}`, `e_j = max_x|φ(0;j) − φ(0;k_max)|`.
pub fn envelope<R: Real>(levels: &[BergmanLevel<R>], t_grid: &[R], points: &[Vec<Complex<R>>]) -> Result<RayGrid<R>, NumericError> {
    if levels.is_empty() || t_grid.is_empty() || points.is_empty() {
        return Err(NumericError::BadOptions("envelope needs levels, times and points".into()));
    }
    if levels.windows(2).any(|w| w[0].k >= w[1].k) {
        return Err(NumericError::BadOptions("levels must be strictly ascending in k".into()));
    }
    let phi: Vec<Vec<Vec<R>>> = levels
        .iter()
        .map(|lv| {
            t_grid
                .iter()
                .map(|t| points.iter().map(|z| ray_potential(lv, *t, z)).collect::<Result<Vec<R>, _>>())
                .collect::<Result<Vec<_>, _>>()
        })
        .collect::<Result<_, _>>()?;
    let phi_zero: Vec<Vec<R>> = levels
        .iter()
        .map(|lv| points.iter().map(|z| ray_potential(lv, R::zero(), z)).collect::<Result<Vec<R>, _>>())
        .collect::<Result<_, _>>()?;
    let last = levels.len() - 1;
    let e: Vec<R> = (0..levels.len())
        .map(|i| phi_zero[i].iter().zip(&phi_zero[last]).fold(R::zero(), |m, (a, b)| m.max((*a - *b).abs())))
        .collect();
    let c_const = levels.iter().zip(&e).fold(R::zero(), |m, (lv, ej)| m.max(R::of((lv.k as f64).powi(2)) * *ej));
    let c_k: Vec<R> = levels.iter().map(|lv| R::of(2.0) * c_const * R::of(inverse_square_tail(lv.k))).collect();
    let eps_k: Vec<R> = levels.iter().map(|lv| R::one() / R::of(lv.k as f64).sqrt()).collect();
    let (nt, nx) = (t_grid.len(), points.len());
    let mut raw = vec![vec![R::neg_infinity(); nx]; nt];
    let mut attaining = vec![vec![0usize; nx]; nt];
    for ki in 0..levels.len() {
        for ti in 0..nt {
            for xi in 0..nx {
                let v = phi[ki][ti][xi] + c_k[ki] - eps_k[ki] * t_grid[ti];
                if v > raw[ti][xi] {
                    raw[ti][xi] = v;
                    attaining[ti][xi] = ki;
                }
            }
        }
    }
    // upper regularization on the grid: max over neighbouring times
    let mut order: Vec<usize> = (0..nt).collect();
    order.sort_by(|a, b| t_grid[*a].partial_cmp(&t_grid[*b]).unwrap());
    let mut env = raw.clone();
    for (pos, &ti) in order.iter().enumerate() {
        for xi in 0..nx {
            let mut m = raw[ti][xi];
            if pos > 0 {
                m = m.max(raw[order[pos - 1]][xi]);
            }
            if pos + 1 < nt {
                m = m.max(raw[order[pos + 1]][xi]);
            }
            env[ti][xi] = m;
        }
    }
    let monotone_boundary = (0..nx).all(|xi| (1..levels.len()).all(|ki| phi_zero[ki][xi] + c_k[ki] < phi_zero[ki - 1][xi] + c_k[ki - 1]));
    let nearest = *order.last().unwrap();
    let boundary_gap = (0..nx).fold(R::zero(), |m, xi| m.max((env[nearest][xi] - phi_zero[last][xi]).abs()));
    Ok(RayGrid {
        t_grid: t_grid.to_vec(),
        points: points.to_vec(),
        k_set: levels.iter().map(|l| l.k).collect(),
        n: levels[0].n,
        phi,
        phi_zero,
        c_k,
        eps_k,
        envelope: env,
        attaining,
        monotone_boundary,
        boundary_gap,
        boundary_t: t_grid[nearest],
    })
}

/// `Σ_{j≥k} j^{-2}`.
fn inverse_square_tail(k: u32) -> f64 {
    let head: f64 = (1..k.max(1)).map(|j| 1.0 / (j as f64 * j as f64)).sum();
    std::f64::consts::PI.powi(2) / 6.0 - head
}

/// Geometric grid from `lo` to `hi` (both negative) with `steps` points.
pub fn geometric_t_grid(lo: f64, hi: f64, steps: usize) -> Vec<f64> {
    assert!(lo < 0.0 && hi < 0.0 && steps >= 1);
    if steps == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.abs().ln(), hi.abs().ln());
    let mut g: Vec<f64> = (0..steps).map(|i| -(a + (b - a) * i as f64 / (steps - 1) as f64).exp()).collect();
    // pin the endpoints so `hi` is hit exactly
    g[0] = lo;
    g[steps - 1] = hi;
    g
}

#[derive(Clone, Debug, PartialEq)]
pub struct SupOsc<R> {
    pub t: R,
    pub sup: R,
    pub inf: R,
    pub osc: R,
    pub sup_over_2abs_t: R,
    /// `2|t|·|λ_min|/k − n·log(k)/k`.
    pub lower_bound: R,
    /// `2|t|·|λ_min|/k + max_x φ(0;k)`.
    pub upper_bound: R,
}

/// Per-time sup, inf and oscillation of `φ(t;k)` for the level at `ki`.
pub fn sup_osc_report<R: Real>(grid: &RayGrid<R>, level: &BergmanLevel<R>, ki: usize) -> Vec<SupOsc<R>> {
    let k = R::of(grid.k_set[ki] as f64);
    let lam = level.lambdas.iter().copied().fold(R::infinity(), R::min).abs();
    let top0 = grid.phi_zero[ki].iter().copied().fold(R::neg_infinity(), R::max);
    grid.t_grid
        .iter()
        .enumerate()
        .map(|(ti, &t)| {
            let row = &grid.phi[ki][ti];
            let sup = row.iter().copied().fold(R::neg_infinity(), R::max);
            let inf = row.iter().copied().fold(R::infinity(), R::min);
            let two_abs_t = R::of(2.0) * t.abs();
            SupOsc {
                t,
                sup,
                inf,
                osc: sup - inf,
                sup_over_2abs_t: sup / two_abs_t,
                lower_bound: two_abs_t * lam / k - R::of(grid.n as f64) * k.ln() / k,
                upper_bound: two_abs_t * lam / k + top0,
            }
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct ChowNumeric<R> {
    pub mu: R,
    pub stderr: R,
    /// The estimate at `t_probe / 2`.
    pub mu_half: R,
    pub stderr_half: R,
    /// `|Ė(t_probe) − Ė(t_probe/2)|`, a convergence proxy.
    pub gap: R,
    /// `mu ≥ mu_half − 3·stderr`, the direction forced by convexity.
    pub convex: bool,
}

/// `μ(Z_k, A_k) ≈ −Ė(t_probe)` along `e^{tA_k}` on the level-`k` image of the fiber.
pub fn chow_weight_numeric<R: Real>(
    fiber: &[Parametrization],
    level: &BergmanLevel<R>,
    t_probe: R,
    opts: &McOptions,
) -> Result<ChowNumeric<R>, NumericError> {
    let far = energy_derivative_at_t(fiber, level, &level.lambdas, t_probe, opts)?;
    let half = energy_derivative_at_t(fiber, level, &level.lambdas, t_probe * R::of(0.5), opts)?;
    let (mu, mu_half) = (-far.value(), -half.value());
    let combined = (far.error().powi(2) + half.error().powi(2)).sqrt();
    Ok(ChowNumeric {
        mu,
        stderr: far.error(),
        mu_half,
        stderr_half: half.error(),
        gap: (mu - mu_half).abs(),
        convex: mu >= mu_half - R::of(3.0) * combined,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct EnergyReport<R> {
    pub k: u32,
    /// `Ė(0) = 2(n+1)·Tr(A_k·M)`, by Monte Carlo.
    pub edot_zero: R,
    pub edot_zero_stderr: R,
    /// `lim_{t→−∞} Ė = −μ(Z_k, A_k)`, exact.
    pub edot_minus_inf: Rational,
    /// `(Ė(0) − Ė(−∞)) / ((n+1)·k^{n+1})`.
    pub mass: R,
    pub mass_stderr: R,
    pub mass_times_k: R,
    /// Numeric `(t, Ė(t), stderr)` at a probe time, when requested.
    pub edot_probe: Option<(R, R, R)>,
    /// `(Ė(0) − Ė(t_probe)) / ((n+1)·k^{n+1})`, the budget without the exact limit.
    pub mass_probe: Option<R>,
}

/// Monge-Ampère mass of the level-`k` Bergman ray from its boundary energies.
///
/// The `t → −∞` end uses the exact Chow weight. With `probe`, `Ė` is also
/// estimated at that time; for `k ≥ 2` it need not approach `−μ`, since the
/// flow's `t → −∞` limit cycle is the maximal-weight degeneration while the
/// exact weight comes from the minimal-weight one.
pub fn ma_mass<R: Real>(
    t: &TestConfiguration,
    report: &AsymptoticReport,
    fiber: &[Parametrization],
    level: &BergmanLevel<R>,
    opts: &McOptions,
    probe: Option<R>,
) -> Result<EnergyReport<R>, NumericError> {
    let k = level.k;
    let n = report.n;
    let mu = chow_weight_algebraic(t, report, k).mu;
    let e0 = energy_derivative_at_t(fiber, level, &level.lambdas, R::zero(), opts)?;
    let denom = R::of((n + 1) as f64) * R::of(k as f64).powi(n as i32 + 1);
    let mass = (e0.value() + R::rational(&mu)) / denom;
    let mass_stderr = e0.error() / denom;
    let edot_probe = match probe {
        Some(tp) => {
            let e = energy_derivative_at_t(fiber, level, &level.lambdas, tp, opts)?;
            Some((tp, e.value(), e.error()))
        }
        None => None,
    };
    let mass_probe = edot_probe.map(|(_, v, _)| (e0.value() - v) / denom);
    Ok(EnergyReport {
        k,
        edot_zero: e0.value(),
        edot_zero_stderr: e0.error(),
        edot_minus_inf: -mu,
        mass,
        mass_stderr,
        mass_times_k: mass * R::of(k as f64),
        edot_probe,
        mass_probe,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct ComparisonReport<R> {
    pub k: u32,
    pub l: u32,
    pub max_abs: R,
    /// `max|g|` over `t ∈ [−40, −20]`.
    pub max_far: R,
    /// `max|g|` over `t ∈ [−20, 0]`.
    pub max_near: R,
    pub ratio: R,
    pub bounded: bool,
}

/// `g(t) = [φ(t;l) + 2t·f(l)] − [φ(t;k) + 2t·f(k)]` over the grid.
pub fn ray_comparison<R: Real>(
    level_k: &BergmanLevel<R>,
    level_l: &BergmanLevel<R>,
    f_k: &Rational,
    f_l: &Rational,
    t_grid: &[R],
    points: &[Vec<Complex<R>>],
) -> Result<ComparisonReport<R>, NumericError> {
    let (fk, fl) = (R::rational(f_k), R::rational(f_l));
    let (mut far, mut near) = (R::zero(), R::zero());
    for &t in t_grid {
        for z in points {
            let g = (ray_potential(level_l, t, z)? + (t + t) * fl) - (ray_potential(level_k, t, z)? + (t + t) * fk);
            let g = g.abs();
            if t <= R::of(-20.0) && t >= R::of(-40.0) {
                far = far.max(g);
            }
            if t >= R::of(-20.0) && t <= R::zero() {
                near = near.max(g);
            }
        }
    }
    let ratio = if near > R::zero() { far / near } else if far > R::zero() { R::infinity() } else { R::zero() };
    Ok(ComparisonReport {
        k: level_k.k,
        l: level_l.k,
        max_abs: far.max(near),
        max_far: far,
        max_near: near,
        ratio,
        bounded: far <= R::of(1.2) * near,
    })
}

/// One row per `(t, point, k)`: the shifted potential and the envelope.
pub fn write_csv<R: Real, W: Write>(grid: &RayGrid<R>, mut out: W) -> io::Result<()> {
    writeln!(out, "t,point,k,phi,envelope")?;
    for (ti, t) in grid.t_grid.iter().enumerate() {
        for xi in 0..grid.points.len() {
            for (ki, k) in grid.k_set.iter().enumerate() {
                writeln!(
                    out,
                    "{},{},{},{},{}",
                    t.to_f64().unwrap_or(f64::NAN),
                    xi,
                    k,
                    grid.shifted(ki, ti, xi).to_f64().unwrap_or(f64::NAN),
                    grid.envelope[ti][xi].to_f64().unwrap_or(f64::NAN)
                )?;
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::asymptotics::{fit_asymptotics, futaki_f};
    use crate::numeric::build_level;

    fn conic(eta: &[i64]) -> (TestConfiguration, Vec<Parametrization>) {
        let t = TestConfiguration::from_text("conic", &["x", "y", "z"], eta, &["x*z - y^2"]).unwrap();
        (t, vec![Parametrization::from_text(1, &["1", "u1", "u1^2"], 1).unwrap()])
    }

    fn c(re: f64) -> Complex<f64> {
        Complex::new(re, 0.0)
    }

    #[test]
    fn potential_at_fixed_point_has_single_slope() {
        let (t, fiber) = conic(&[0, 0, 1]);
        let level = build_level::<f64>(&t, &fiber, 4, &McOptions::new(50_000, 3)).unwrap();
        let z = [c(0.0), c(0.0), c(1.0)];
        let slope = (ray_potential(&level, -30.0, &z).unwrap() - ray_potential(&level, -20.0, &z).unwrap()) / -20.0;
        // single dominant section z^4 with λ = 4 − 16/9
        assert!((slope - (4.0 - 16.0 / 9.0) / 4.0).abs() < 1e-12, "{slope}");
    }

    #[test]
    fn convex_and_slope_bounded_in_t() {
        let (t, fiber) = conic(&[0, 0, 1]);
        let level = build_level::<f64>(&t, &fiber, 3, &McOptions::new(50_000, 3)).unwrap();
        let lam = level.lambdas.iter().fold(0.0f64, |m, l| m.max(l.abs()));
        let ts: Vec<f64> = (0..=40).map(|i| -0.5 * i as f64).collect();
        for z in default_points::<f64>(&fiber[0]) {
            let v: Vec<f64> = ts.iter().map(|s| ray_potential(&level, *s, &z).unwrap()).collect();
            for w in v.windows(3) {
                assert!(w[0] - 2.0 * w[1] + w[2] >= -1e-9);
            }
            for w in v.windows(2) {
                assert!(((w[1] - w[0]) / 0.5).abs() <= 2.0 * lam / 3.0 + 1e-9);
            }
        }
    }

    #[test]
    fn trivial_action_is_static() {
        let (t, fiber) = conic(&[1, 1, 1]);
        let level = build_level::<f64>(&t, &fiber, 2, &McOptions::new(20_000, 1)).unwrap();
        for z in default_points::<f64>(&fiber[0]) {
            let a = ray_potential(&level, 0.0, &z).unwrap();
            let b = ray_potential(&level, -37.0, &z).unwrap();
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn envelope_dominates_members() {
        let (t, fiber) = conic(&[0, 0, 1]);
        let opts = McOptions::new(20_000, 5);
        let levels: Vec<_> = [2, 3, 4].iter().map(|k| build_level::<f64>(&t, &fiber, *k, &opts).unwrap()).collect();
        let ts = geometric_t_grid(-10.0, -0.1, 8);
        let pts = default_points::<f64>(&fiber[0]);
        let g = envelope(&levels, &ts, &pts).unwrap();
        assert!(g.monotone_boundary);
        for ki in 0..3 {
            for ti in 0..ts.len() {
                for xi in 0..pts.len() {
                    assert!(g.envelope[ti][xi] >= g.shifted(ki, ti, xi));
                }
            }
        }
        assert_eq!(g.eps_k[2], 0.5);
        assert!(g.c_k.windows(2).all(|w| w[0] > w[1]));
        let mut buf = Vec::new();
        write_csv(&g, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("t,point,k,phi,envelope\n"));
        assert_eq!(text.lines().count(), 1 + ts.len() * pts.len() * 3);
    }

    #[test]
    fn numeric_chow_weight_sees_the_maximal_weight_limit() {
        // t → −∞ sends the level-2 quartic to lines through weights
        // {0,0}, {0,1} (doubly covered), {1,2}; with λ = w − 4/5 and mass 1
        // per line, −Ė(−∞) = −4·[−4/5 + 2·(−3/10) + 7/10] = 14/5
        let (t, fiber) = conic(&[0, 0, 1]);
        let opts = McOptions::new(60_000, 17);
        let level = build_level::<f64>(&t, &fiber, 2, &opts).unwrap();
        let num = chow_weight_numeric(&fiber, &level, -15.0, &opts).unwrap();
        assert!((num.mu - 2.8).abs() < 4.0 * num.stderr, "{num:?}");
        let r = fit_asymptotics(&t, 1).unwrap();
        assert_eq!(chow_weight_algebraic(&t, &r, 2).mu, Rational::new(8.into(), 5.into()));
    }

    #[test]
    fn trivial_action_has_no_mass() {
        let (t, fiber) = conic(&[2, 2, 2]);
        let r = fit_asymptotics(&t, 1).unwrap();
        let opts = McOptions::new(10_000, 2);
        let level = build_level::<f64>(&t, &fiber, 3, &opts).unwrap();
        let e = ma_mass(&t, &r, &fiber, &level, &opts, Some(-5.0)).unwrap();
        assert_eq!((e.mass, e.edot_zero, e.mass_probe), (0.0, 0.0, Some(0.0)));
    }

    #[test]
    fn comparison_of_equal_levels_vanishes() {
        let (t, fiber) = conic(&[0, 0, 1]);
        let r = fit_asymptotics(&t, 1).unwrap();
        let level = build_level::<f64>(&t, &fiber, 2, &McOptions::new(20_000, 5)).unwrap();
        let f = futaki_f(&t, &r, 2);
        let rep = ray_comparison(&level, &level, &f, &f, &[-30.0, -5.0], &default_points(&fiber[0])).unwrap();
        assert_eq!(rep.max_abs, 0.0);
    }

    #[test]
    fn t_grid_shape() {
        let g = geometric_t_grid(-40.0, -0.1, 5);
        assert_eq!(g.len(), 5);
        assert_eq!((g[0], g[4]), (-40.0, -0.1));
        assert!((inverse_square_tail(1) - std::f64::consts::PI.powi(2) / 6.0).abs() < 1e-15);
    }
}
