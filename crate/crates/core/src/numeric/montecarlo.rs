//! Seeded, batch-parallel importance sampling over polynomial charts.
//!
//! The reproducibility key is `(seed, samples, batch_size, law)`: batch `b`
//! of component `c` draws from `ChaCha8Rng` seeded by the component seed with
//! stream `b`, batches are reduced by a fixed pairwise tree, so the result is
//! bit-identical regardless of thread count.

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::chart::to_c64;
use super::{NumericError, Parametrization};
use crate::scalar::Real;

/// Product over chart parameters of an equal-weight mixture of the
/// Fubini-Study laws `R²/(π(R² + |u|²)²)` at scales `R = e^ℓ`.
///
/// The `R = 1` member is the Fubini-Study density of a line itself, so
/// integrands built from rational charts have bounded importance weights.
#[derive(Clone, Debug, PartialEq)]
pub struct SamplingLaw {
    log_scales: Vec<f64>,
}

impl Default for SamplingLaw {
    fn default() -> Self {
        SamplingLaw { log_scales: vec![0.0] }
    }
}

impl SamplingLaw {
    pub fn new(log_scales: Vec<f64>) -> Self {
        assert!(!log_scales.is_empty());
        SamplingLaw { log_scales }
    }

    /// Integer log-scales covering `[−spread, spread]`, at most 61 of them.
    pub fn spread(spread: f64) -> Self {
        let l = spread.abs().ceil().min(30.0) as i64;
        SamplingLaw { log_scales: (-l..=l).map(|x| x as f64).collect() }
    }

    pub fn log_scales(&self) -> &[f64] {
        &self.log_scales
    }

    fn draw(&self, rng: &mut ChaCha8Rng, d: usize) -> (Vec<Complex<f64>>, f64) {
        let mut u = Vec::with_capacity(d);
        for _ in 0..d {
            let s = self.log_scales[rng.gen_range(0..self.log_scales.len())];
            let v: f64 = rng.gen();
            let theta: f64 = rng.gen::<f64>() * std::f64::consts::TAU;
            let r2 = (2.0 * s).exp() * v / (1.0 - v);
            u.push(Complex::from_polar(r2.sqrt(), theta));
        }
        let pdf = self.pdf(&u);
        (u, pdf)
    }

    pub fn pdf(&self, u: &[Complex<f64>]) -> f64 {
        let n = self.log_scales.len() as f64;
        u.iter()
            .map(|z| {
                let r2 = z.norm_sqr();
                self.log_scales
                    .iter()
                    .map(|s| {
                        let rr = (2.0 * s).exp();
                        rr / (std::f64::consts::PI * (rr + r2) * (rr + r2))
                    })
                    .sum::<f64>()
                    / n
            })
            .product()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct McOptions {
    pub samples: usize,
    pub seed: u64,
    pub batch_size: usize,
    pub law: SamplingLaw,
}

impl McOptions {
    pub fn new(samples: usize, seed: u64) -> Self {
        McOptions { samples, seed, batch_size: 4096, law: SamplingLaw::default() }
    }

    pub fn with_law(mut self, law: SamplingLaw) -> Self {
        self.law = law;
        self
    }
}

/// Mean estimate with standard errors for a vector of integrals.
#[derive(Clone, Debug, PartialEq)]
pub struct Estimate<R> {
    pub values: Vec<R>,
    pub stderr: Vec<R>,
    /// Same estimator restricted to the first quarter of the batches.
    pub quarter: Vec<R>,
    pub quarter_stderr: Vec<R>,
    pub samples: usize,
}

impl<R: Real> Estimate<R> {
    /// Full and quarter-size estimates agree within 5 combined standard errors.
    pub fn consistent(&self) -> bool {
        (0..self.values.len()).all(|i| {
            let tol = R::of(5.0) * (self.stderr[i].powi(2) + self.quarter_stderr[i].powi(2)).sqrt();
            (self.values[i] - self.quarter[i]).abs() <= tol + R::epsilon() * self.values[i].abs()
        })
    }

    pub fn value(&self) -> R {
        self.values[0]
    }

    pub fn error(&self) -> R {
        self.stderr[0]
    }
}

/// Running count, mean and sum of squared deviations.
#[derive(Clone, Debug)]
struct Moments<R> {
    n: usize,
    mean: Vec<R>,
    m2: Vec<R>,
}

impl<R: Real> Moments<R> {
    fn empty(len: usize) -> Self {
        Moments { n: 0, mean: vec![R::zero(); len], m2: vec![R::zero(); len] }
    }

    fn push(&mut self, x: &[R]) {
        self.n += 1;
        let n = R::of(self.n as f64);
        for i in 0..x.len() {
            let delta = x[i] - self.mean[i];
            self.mean[i] = self.mean[i] + delta / n;
            self.m2[i] = self.m2[i] + delta * (x[i] - self.mean[i]);
        }
    }

    fn merge(a: &Self, b: &Self) -> Self {
        if a.n == 0 {
            return b.clone();
        }
        if b.n == 0 {
            return a.clone();
        }
        let n = a.n + b.n;
        let (na, nb, nn) = (R::of(a.n as f64), R::of(b.n as f64), R::of(n as f64));
        let mut out = Moments::empty(a.mean.len());
        out.n = n;
        for i in 0..a.mean.len() {
            let delta = b.mean[i] - a.mean[i];
            out.mean[i] = (a.mean[i] * na + b.mean[i] * nb) / nn;
            out.m2[i] = a.m2[i] + b.m2[i] + delta * delta * na * nb / nn;
        }
        out
    }

    /// Pairwise tree reduction in fixed order.
    fn tree(parts: &[Self], len: usize) -> Self {
        match parts.len() {
            0 => Moments::empty(len),
            1 => parts[0].clone(),
            n => Self::merge(&Self::tree(&parts[..n / 2], len), &Self::tree(&parts[n / 2..], len)),
        }
    }

    fn stderr_sq(&self) -> Vec<R> {
        let n = self.n as f64;
        let denom = R::of(n * (n - 1.0).max(1.0));
        self.m2.iter().map(|m| *m / denom).collect()
    }
}

pub(crate) fn component_seed(seed: u64, c: usize) -> u64 {
    seed ^ (c as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

/// Estimates `Σ_c mult_c ∫ f_c(u) du` over every chart of `cycle`.
///
/// `f(c, u, out)` must write the integrand, including the volume density,
/// for component `c` at chart point `u` into `out` (length `outputs`).
pub fn mc_integrate<R, F>(cycle: &[Parametrization], outputs: usize, opts: &McOptions, f: F) -> Result<Estimate<R>, NumericError>
where
    R: Real,
    F: Fn(usize, &[Complex<R>], &mut [R]) -> Result<(), NumericError> + Sync,
{
    if opts.samples == 0 || opts.batch_size == 0 {
        return Err(NumericError::BadOptions("samples and batch size must be positive".into()));
    }
    let nb = opts.samples.div_ceil(opts.batch_size);
    let quarter_batches = (nb / 4).max(1);
    let mut full_value = vec![R::zero(); outputs];
    let mut full_var = vec![R::zero(); outputs];
    let mut q_value = vec![R::zero(); outputs];
    let mut q_var = vec![R::zero(); outputs];
    for (c, chart) in cycle.iter().enumerate() {
        let seed = component_seed(opts.seed, c);
        let d = chart.chart_dim();
        let batches: Vec<Result<Moments<R>, NumericError>> = (0..nb)
            .into_par_iter()
            .map(|b| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(b as u64);
                let count = opts.batch_size.min(opts.samples - b * opts.batch_size);
                let mut m = Moments::empty(outputs);
                let mut out = vec![R::zero(); outputs];
                for i in 0..count {
                    let (u64s, pdf) = opts.law.draw(&mut rng, d);
                    let u: Vec<Complex<R>> = u64s.iter().map(|z| Complex::new(R::of(z.re), R::of(z.im))).collect();
                    out.iter_mut().for_each(|o| *o = R::zero());
                    f(c, &u, &mut out).map_err(|e| match e {
                        NumericError::Indeterminate => NumericError::NonFinite {
                            component: c,
                            batch: b,
                            sample: i,
                            point: to_c64(&u),
                        },
                        other => other,
                    })?;
                    let w = R::of(1.0 / pdf);
                    for o in out.iter_mut() {
                        *o = *o * w;
                    }
                    if out.iter().any(|o| !o.is_finite()) || !pdf.is_finite() {
                        return Err(NumericError::NonFinite { component: c, batch: b, sample: i, point: to_c64(&u) });
                    }
                    m.push(&out);
                }
                Ok(m)
            })
            .collect();
        let batches = batches.into_iter().collect::<Result<Vec<_>, _>>()?;
        let mult = R::of(chart.multiplicity() as f64);
        for (moments, value, var) in [
            (Moments::tree(&batches, outputs), &mut full_value, &mut full_var),
            (Moments::tree(&batches[..quarter_batches], outputs), &mut q_value, &mut q_var),
        ] {
            let se2 = moments.stderr_sq();
            for i in 0..outputs {
                value[i] = value[i] + mult * moments.mean[i];
                var[i] = var[i] + mult * mult * se2[i];
            }
        }
    }
    Ok(Estimate {
        values: full_value,
        stderr: full_var.into_iter().map(|v: R| v.sqrt()).collect(),
        quarter: q_value,
        quarter_stderr: q_var.into_iter().map(|v: R| v.sqrt()).collect(),
        samples: opts.samples,
    })
}
