//! Divided differences, iterated difference operators, convexity probes and
//! Bernstein polynomial approximation for real functions of one variable.
//!
//! A function is n-convex on an interval when all its divided differences of
//! order n are nonnegative; equivalently (for continuous functions) when all
//! its iterated differences of order n with nonnegative steps are
//! nonnegative. The probes here sample both formulations on deterministic
//! grids, optionally extended with seeded random tuples. They are falsifiers,
//! not proofs.

use std::fmt;
use std::sync::Arc;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::comb::{k_subsets, subsets_by_size};
use crate::error::Error;
use crate::tol::{Margin, SignedSum, TolerancePolicy, MIN_SPACING_FRACTION, SINGULARITY_WINDOW};
use crate::Result;

/// An interval with open or closed endpoints; endpoints may be infinite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
    pub lo_open: bool,
    pub hi_open: bool,
}

impl Interval {
    pub const fn closed(lo: f64, hi: f64) -> Self {
        Self { lo, hi, lo_open: false, hi_open: false }
    }

    pub const fn open_closed(lo: f64, hi: f64) -> Self {
        Self { lo, hi, lo_open: true, hi_open: false }
    }

    pub const fn all_reals() -> Self {
        Self { lo: f64::NEG_INFINITY, hi: f64::INFINITY, lo_open: true, hi_open: true }
    }

    pub fn contains(&self, x: f64) -> bool {
        let lo_ok = if self.lo_open { x > self.lo } else { x >= self.lo };
        let hi_ok = if self.hi_open { x < self.hi } else { x <= self.hi };
        lo_ok && hi_ok && x.is_finite()
    }
}

type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A named scalar function with domain metadata, removable singularities and
/// the convexity orders it is claimed to satisfy on its default probe
/// interval.
#[derive(Clone)]
pub struct FunctionSpec {
    pub id: String,
    pub domain: Interval,
    /// Default interval used by probes and campaigns.
    pub probe_lo: f64,
    pub probe_hi: f64,
    /// Orders n in 0..=4 for which the function is n-convex on the probe
    /// interval.
    pub claimed_convex: Vec<usize>,
    /// Human-readable property notes.
    pub notes: String,
    /// Removable singularities as (location, limit) pairs.
    pub singularities: Vec<(f64, f64)>,
    eval: ScalarFn,
}

impl fmt::Debug for FunctionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FunctionSpec")
            .field("id", &self.id)
            .field("notes", &self.notes)
            .finish()
    }
}

/// Evaluate a catalog function, handling removable singularities by their
/// limits and rejecting arguments outside the domain.
pub fn eval_function(f: &FunctionSpec, x: f64) -> Result<f64> {
    for &(at, limit) in &f.singularities {
        if (x - at).abs() < SINGULARITY_WINDOW {
            return Ok(limit);
        }
    }
    if !f.domain.contains(x) {
        return Err(Error::Domain(format!("{}: x = {x} outside domain", f.id)));
    }
    let v = (f.eval)(x);
    if !v.is_finite() {
        return Err(Error::Singularity(format!("{}: non-finite value at x = {x}", f.id)));
    }
    Ok(v)
}

impl FunctionSpec {
    fn new(
        id: impl Into<String>,
        domain: Interval,
        probe: (f64, f64),
        claimed: &[usize],
        notes: &str,
        eval: ScalarFn,
    ) -> Self {
        Self {
            id: id.into(),
            domain,
            probe_lo: probe.0,
            probe_hi: probe.1,
            claimed_convex: claimed.to_vec(),
            notes: notes.to_string(),
            singularities: Vec::new(),
            eval,
        }
    }

    pub fn abs() -> Self {
        Self::new(
            "abs",
            Interval::all_reals(),
            (-2.0, 2.0),
            &[0, 2],
            "|x|; convex, not 3-convex",
            Arc::new(f64::abs),
        )
    }

    /// `x^alpha` on the nonnegative half-line (positive half-line when
    /// alpha < 0). The claimed orders follow the sign of
    /// `alpha (alpha-1) .. (alpha-n+1)`.
    pub fn power(alpha: f64) -> Self {
        let mut claimed = vec![0];
        for n in 1..=4usize {
            let mut prod = 1.0;
            for j in 0..n {
                prod *= alpha - j as f64;
            }
            if prod >= 0.0 {
                claimed.push(n);
            }
        }
        let (domain, probe) = if alpha < 0.0 {
            (Interval { lo: 0.0, hi: f64::INFINITY, lo_open: true, hi_open: true }, (0.1, 3.0))
        } else {
            (Interval { lo: 0.0, hi: f64::INFINITY, lo_open: false, hi_open: true }, (0.0, 3.0))
        };
        Self::new(
            format!("pow:{alpha}"),
            domain,
            probe,
            &claimed,
            "x^alpha; Bernstein function for alpha in (0,1]",
            Arc::new(move |x| x.powf(alpha)),
        )
    }

    pub fn exp() -> Self {
        Self::new(
            "exp",
            Interval::all_reals(),
            (0.0, 2.0),
            &[0, 1, 2, 3, 4],
            "exponential; n-convex for every n",
            Arc::new(f64::exp),
        )
    }

    /// `exp(-alpha x)`; completely monotone on the half-line for alpha >= 0.
    pub fn exp_neg(alpha: f64) -> Self {
        let claimed: &[usize] = if alpha == 0.0 { &[0, 1, 2, 3, 4] } else { &[0, 2, 4] };
        Self::new(
            format!("exp-neg:{alpha}"),
            Interval::all_reals(),
            (0.0, 3.0),
            claimed,
            "exp(-alpha x); completely monotone",
            Arc::new(move |x| (-alpha * x).exp()),
        )
    }

    pub fn ratio() -> Self {
        Self::new(
            "ratio",
            Interval { lo: 0.0, hi: f64::INFINITY, lo_open: false, hi_open: true },
            (0.0, 3.0),
            &[0, 1, 3],
            "x/(x+1); Bernstein function",
            Arc::new(|x| x / (x + 1.0)),
        )
    }

    pub fn one_minus_exp(alpha: f64) -> Self {
        Self::new(
            format!("one-minus-exp:{alpha}"),
            Interval { lo: 0.0, hi: f64::INFINITY, lo_open: false, hi_open: true },
            (0.0, 3.0),
            &[0, 1, 3],
            "1 - exp(-alpha x); Bernstein function",
            Arc::new(move |x| -(-alpha * x).exp_m1()),
        )
    }

    pub fn log1p() -> Self {
        Self::new(
            "log1p",
            Interval { lo: -1.0, hi: f64::INFINITY, lo_open: true, hi_open: true },
            (0.0, 3.0),
            &[0, 1, 3],
            "log(1+x); Bernstein function",
            Arc::new(f64::ln_1p),
        )
    }

    /// `(x-1)/log(x)` extended by its limit 1 at x = 1.
    pub fn ratio_log() -> Self {
        let mut f = Self::new(
            "ratio-log",
            Interval { lo: 0.0, hi: f64::INFINITY, lo_open: true, hi_open: true },
            (0.1, 3.0),
            &[0, 1, 3],
            "(x-1)/log x; Bernstein function",
            Arc::new(|x: f64| (x - 1.0) / x.ln()),
        );
        f.singularities.push((1.0, 1.0));
        f
    }

    /// `-x log(x)` extended by its limit 0 at x = 0.
    pub fn neg_x_log_x() -> Self {
        let mut f = Self::new(
            "neg-x-log-x",
            Interval { lo: 0.0, hi: f64::INFINITY, lo_open: false, hi_open: true },
            (0.0, 3.0),
            &[3],
            "-x log x; 3-convex, neither nonnegative nor monotone nor convex",
            Arc::new(|x: f64| -x * x.ln()),
        );
        f.singularities.push((0.0, 0.0));
        f
    }

    pub fn sinh() -> Self {
        Self::new(
            "sinh",
            Interval::all_reals(),
            (0.0, 3.0),
            &[0, 1, 2, 3, 4],
            "hyperbolic sine; n-convex on the half-line",
            Arc::new(f64::sinh),
        )
    }

    pub fn cosh() -> Self {
        Self::new(
            "cosh",
            Interval::all_reals(),
            (0.0, 3.0),
            &[0, 1, 2, 3, 4],
            "hyperbolic cosine; n-convex on the half-line",
            Arc::new(f64::cosh),
        )
    }

    /// `-log(Gamma(x))`; 3-convex on the positive half-line.
    pub fn neg_log_gamma() -> Self {
        Self::new(
            "neg-log-gamma",
            Interval { lo: 0.0, hi: f64::INFINITY, lo_open: true, hi_open: true },
            (0.05, 3.0),
            &[3],
            "-log Gamma(x); 3-convex",
            Arc::new(|x| -libm::lgamma(x)),
        )
    }

    /// Polynomial with ascending coefficients `c[0] + c[1] x + ...`; claimed
    /// orders are derived by sampling the exact derivative polynomials on
    /// the probe interval.
    pub fn poly(coeffs: &[f64]) -> Self {
        let probe = (0.0, 2.0);
        let mut claimed = Vec::new();
        for n in 0..=4usize {
            let d = poly_derivative(coeffs, n);
            let nonneg = (0..=200).all(|i| {
                let x = probe.0 + (probe.1 - probe.0) * i as f64 / 200.0;
                poly_eval(&d, x) >= -1e-12
            });
            if nonneg {
                claimed.push(n);
            }
        }
        let id = format!(
            "poly:{}",
            coeffs.iter().map(|c| format!("{c}")).collect::<Vec<_>>().join(",")
        );
        let coeffs = coeffs.to_vec();
        Self::new(
            id,
            Interval::all_reals(),
            probe,
            &claimed,
            "polynomial with given coefficients",
            Arc::new(move |x| poly_eval(&coeffs, x)),
        )
    }

    /// `1 - (x-3) + (x-3)^3 / 6`: 3-convex everywhere but neither
    /// nonnegative, nondecreasing nor convex on [0, 6].
    pub fn cubic_counterexample() -> Self {
        Self::new(
            "hh-cex",
            Interval::all_reals(),
            (0.0, 6.0),
            &[3, 4],
            "1 - (x-3) + (x-3)^3/6; 3-convex but not 0-, 1- or 2-convex",
            Arc::new(|x| {
                let t = x - 3.0;
                1.0 - t + t * t * t / 6.0
            }),
        )
    }

    /// Wrap the Bernstein polynomial of `f` of degree `m` on [0, 1] as a
    /// catalog function, so probes can be run against it.
    pub fn bernstein_of(f: &FunctionSpec, m: usize) -> Result<Self> {
        let mut samples = Vec::with_capacity(m + 1);
        for i in 0..=m {
            samples.push(eval_function(f, i as f64 / m as f64)?);
        }
        Ok(Self::new(
            format!("bernstein:{}:{}", m, f.id),
            Interval::closed(0.0, 1.0),
            (0.0, 1.0),
            &f.claimed_convex,
            "Bernstein polynomial of a catalog function",
            Arc::new(move |x| de_casteljau(&samples, x)),
        ))
    }
}

fn poly_eval(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c)
}

fn poly_derivative(coeffs: &[f64], order: usize) -> Vec<f64> {
    let mut c = coeffs.to_vec();
    for _ in 0..order {
        c = c
            .iter()
            .enumerate()
            .skip(1)
            .map(|(i, v)| i as f64 * v)
            .collect();
        if c.is_empty() {
            c.push(0.0);
        }
    }
    c
}

/// The default catalog instantiated with representative parameters.
pub fn default_catalog() -> Vec<FunctionSpec> {
    vec![
        FunctionSpec::abs(),
        FunctionSpec::power(0.5),
        FunctionSpec::power(2.5),
        FunctionSpec::exp(),
        FunctionSpec::exp_neg(1.0),
        FunctionSpec::ratio(),
        FunctionSpec::one_minus_exp(1.0),
        FunctionSpec::log1p(),
        FunctionSpec::ratio_log(),
        FunctionSpec::neg_x_log_x(),
        FunctionSpec::sinh(),
        FunctionSpec::cosh(),
        FunctionSpec::neg_log_gamma(),
        FunctionSpec::poly(&[0.0, 0.0, 1.0]),
        FunctionSpec::cubic_counterexample(),
    ]
}

/// Resolve a function id of the form `name` or `name:params`, falling back
/// to `alpha` for parametric families given without parameters.
pub fn resolve_function(spec: &str, alpha: f64) -> Result<FunctionSpec> {
    let (name, param) = match spec.split_once(':') {
        Some((n, p)) => (n, Some(p)),
        None => (spec, None),
    };
    let parse_alpha = |p: Option<&str>| -> Result<f64> {
        match p {
            Some(s) => s
                .parse()
                .map_err(|_| Error::Config(format!("bad parameter '{s}' for function {name}"))),
            None => Ok(alpha),
        }
    };
    match name {
        "abs" => Ok(FunctionSpec::abs()),
        "pow" => Ok(FunctionSpec::power(parse_alpha(param)?)),
        "exp" => Ok(FunctionSpec::exp()),
        "exp-neg" => Ok(FunctionSpec::exp_neg(parse_alpha(param)?)),
        "ratio" => Ok(FunctionSpec::ratio()),
        "one-minus-exp" => Ok(FunctionSpec::one_minus_exp(parse_alpha(param)?)),
        "log1p" => Ok(FunctionSpec::log1p()),
        "ratio-log" => Ok(FunctionSpec::ratio_log()),
        "neg-x-log-x" => Ok(FunctionSpec::neg_x_log_x()),
        "sinh" => Ok(FunctionSpec::sinh()),
        "cosh" => Ok(FunctionSpec::cosh()),
        "neg-log-gamma" => Ok(FunctionSpec::neg_log_gamma()),
        "hh-cex" => Ok(FunctionSpec::cubic_counterexample()),
        "poly" => {
            let p = param.ok_or_else(|| {
                Error::Config("poly requires coefficients, e.g. poly:1,0,-2".into())
            })?;
            let coeffs: Result<Vec<f64>> = p
                .split(',')
                .map(|s| {
                    s.trim()
                        .parse()
                        .map_err(|_| Error::Config(format!("bad polynomial coefficient '{s}'")))
                })
                .collect();
            Ok(FunctionSpec::poly(&coeffs?))
        }
        other => Err(Error::Config(format!("unknown scalar function '{other}'"))),
    }
}

fn check_spacing(points: &[f64]) -> Result<()> {
    if points.len() < 2 {
        return Ok(());
    }
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for &p in points {
        lo = lo.min(p);
        hi = hi.max(p);
    }
    let min_gap = MIN_SPACING_FRACTION * (hi - lo);
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            if (points[i] - points[j]).abs() < min_gap || points[i] == points[j] {
                return Err(Error::DegenerateInput(format!(
                    "points {} and {} closer than {min_gap:e}",
                    points[i], points[j]
                )));
            }
        }
    }
    Ok(())
}

/// Divided difference `[x_0, .., x_n; f]` in product form
/// `sum_j f(x_j) / prod_{k != j} (x_j - x_k)`, which is exactly invariant
/// under permutations of the points. Returns the value with the largest
/// absolute summand as scale.
pub fn divided_difference_margin(f: &FunctionSpec, points: &[f64]) -> Result<Margin> {
    if points.is_empty() {
        return Err(Error::DegenerateInput("no points".into()));
    }
    check_spacing(points)?;
    // canonical ascending order: makes the result bit-identical under any
    // permutation of the input points
    let mut pts = points.to_vec();
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut sum = SignedSum::new();
    for (j, &xj) in pts.iter().enumerate() {
        let mut denom = 1.0;
        for (k, &xk) in pts.iter().enumerate() {
            if k != j {
                denom *= xj - xk;
            }
        }
        sum.add(eval_function(f, xj)? / denom);
    }
    Ok(sum.into_margin())
}

/// Divided difference value; see [`divided_difference_margin`].
pub fn divided_difference(f: &FunctionSpec, points: &[f64]) -> Result<f64> {
    Ok(divided_difference_margin(f, points)?.value)
}

/// Divided difference by the textbook recursion
/// `([x_1..x_n; f] - [x_0..x_{n-1}; f]) / (x_n - x_0)`; the independent
/// second route for the product form.
pub fn divided_difference_recursive(f: &FunctionSpec, points: &[f64]) -> Result<f64> {
    if points.is_empty() {
        return Err(Error::DegenerateInput("no points".into()));
    }
    check_spacing(points)?;
    let mut pts = points.to_vec();
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut table: Vec<f64> = pts
        .iter()
        .map(|&x| eval_function(f, x))
        .collect::<Result<_>>()?;
    let n = pts.len();
    for level in 1..n {
        for i in 0..n - level {
            table[i] = (table[i + 1] - table[i]) / (pts[i + level] - pts[i]);
        }
    }
    Ok(table[0])
}

/// Iterated difference `Delta_{h_1} .. Delta_{h_n} f(base)`, expanded as the
/// alternating sum over subsets of the steps. Symmetric in the steps; equals
/// the Popoviciu alternating sum when `base = 0`.
pub fn iterated_difference_margin(f: &FunctionSpec, base: f64, steps: &[f64]) -> Result<Margin> {
    for &h in steps {
        if h < 0.0 {
            return Err(Error::Domain(format!("negative step {h}")));
        }
    }
    // canonical step order: exact symmetry in the steps
    let mut hs = steps.to_vec();
    hs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = hs.len();
    let mut sum = SignedSum::new();
    for subset in subsets_by_size(n) {
        let x = base + subset.iter().map(|&i| hs[i]).sum::<f64>();
        let sign = if (n - subset.len()).is_multiple_of(2) { 1.0 } else { -1.0 };
        sum.add(sign * eval_function(f, x)?);
    }
    Ok(sum.into_margin())
}

/// Iterated difference value; see [`iterated_difference_margin`].
pub fn iterated_difference(f: &FunctionSpec, base: f64, steps: &[f64]) -> Result<f64> {
    Ok(iterated_difference_margin(f, base, steps)?.value)
}

/// Outcome of a sampling probe: the worst margin seen, the inputs that
/// achieved it, and the pass verdict under the tolerance policy.
#[derive(Debug, Clone, PartialEq)]
pub struct Verdict {
    pub min_margin: f64,
    pub scale: f64,
    pub witness: Vec<f64>,
    pub passed: bool,
}

/// Accumulates probe samples, keeping the tolerance-adjusted worst case so
/// the final verdict satisfies `passed == (min_margin >= -tol(scale))`.
pub(crate) struct VerdictBuilder {
    tol: TolerancePolicy,
    worst_adjusted: f64,
    best: Option<(Margin, Vec<f64>)>,
}

impl VerdictBuilder {
    pub(crate) fn new(tol: TolerancePolicy) -> Self {
        Self { tol, worst_adjusted: f64::INFINITY, best: None }
    }

    pub(crate) fn record(&mut self, margin: Margin, witness: Vec<f64>) {
        let adjusted = margin.value + self.tol.at_scale(margin.scale);
        if adjusted < self.worst_adjusted || self.best.is_none() {
            self.worst_adjusted = adjusted;
            self.best = Some((margin, witness));
        }
    }

    pub(crate) fn is_empty(&self) -> bool {
        self.best.is_none()
    }

    pub(crate) fn finish(self) -> Result<Verdict> {
        let (margin, witness) = self
            .best
            .ok_or_else(|| Error::Domain("probe sampled no admissible tuples".into()))?;
        Ok(Verdict {
            min_margin: margin.value,
            scale: margin.scale,
            witness,
            passed: margin.passes(self.tol),
        })
    }
}

/// Sampling configuration shared by the probes. Deterministic given
/// `(seed, grid)`.
#[derive(Debug, Clone, Copy)]
pub struct ProbeConfig {
    /// Number of deterministic grid points per axis.
    pub grid: usize,
    /// Number of additional seeded random tuples.
    pub random_tuples: usize,
    pub seed: u64,
    pub tol: TolerancePolicy,
}

impl Default for ProbeConfig {
    fn default() -> Self {
        Self { grid: 16, random_tuples: 0, seed: 0, tol: TolerancePolicy::default() }
    }
}

fn grid_points(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    if count == 1 {
        return vec![lo];
    }
    (0..count)
        .map(|i| lo + (hi - lo) * i as f64 / (count - 1) as f64)
        .collect()
}

/// Probe n-convexity of `f` on `[lo, hi]` by sampling divided differences
/// over all (n+1)-subsets of a uniform grid, plus optional random tuples.
/// The verdict fails as soon as one sampled divided difference is negative
/// beyond tolerance.
pub fn n_convexity_probe(
    f: &FunctionSpec,
    lo: f64,
    hi: f64,
    n: usize,
    cfg: &ProbeConfig,
) -> Result<Verdict> {
    if !lo.is_finite() || !hi.is_finite() || lo >= hi {
        return Err(Error::Domain(format!("bad interval [{lo}, {hi}]")));
    }
    if cfg.grid < n + 1 {
        return Err(Error::Domain(format!(
            "grid of {} points cannot host an order-{n} divided difference",
            cfg.grid
        )));
    }
    let pts = grid_points(lo, hi, cfg.grid);
    let mut builder = VerdictBuilder::new(cfg.tol);
    let mut subsets = Vec::new();
    k_subsets(cfg.grid, n + 1, &mut subsets);
    let mut tuple = vec![0.0; n + 1];
    for s in &subsets {
        for (slot, &i) in tuple.iter_mut().zip(s.iter()) {
            *slot = pts[i];
        }
        let margin = divided_difference_margin(f, &tuple)?;
        builder.record(margin, tuple.clone());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut produced = 0;
    let mut attempts = 0;
    while produced < cfg.random_tuples && attempts < cfg.random_tuples * 100 {
        attempts += 1;
        for slot in tuple.iter_mut() {
            *slot = lo + (hi - lo) * rng.random::<f64>();
        }
        tuple.sort_by(|a, b| a.partial_cmp(b).unwrap());
        if check_spacing(&tuple).is_err() {
            continue;
        }
        let margin = divided_difference_margin(f, &tuple)?;
        builder.record(margin, tuple.clone());
        produced += 1;
    }
    builder.finish()
}

/// Probe order-n positivity of differences on `[lo, hi]`: minimum of
/// `Delta_{h_1} .. Delta_{h_n} f(base)` over grid bases and positive grid
/// steps with `base + sum(h) <= hi`. For continuous functions this verdict
/// matches `n_convexity_probe` in sign.
pub fn positive_difference_probe(
    f: &FunctionSpec,
    lo: f64,
    hi: f64,
    n: usize,
    cfg: &ProbeConfig,
) -> Result<Verdict> {
    if !lo.is_finite() || !hi.is_finite() || lo >= hi {
        return Err(Error::Domain(format!("bad interval [{lo}, {hi}]")));
    }
    let bases = grid_points(lo, hi, cfg.grid);
    let span = hi - lo;
    let step_values: Vec<f64> =
        (1..=cfg.grid).map(|j| span * j as f64 / cfg.grid as f64).collect();
    let mut builder = VerdictBuilder::new(cfg.tol);

    if n == 0 {
        for &b in &bases {
            let v = eval_function(f, b)?;
            builder.record(Margin::new(v, v.abs()), vec![b]);
        }
        return builder.finish();
    }

    // Non-decreasing step multi-indices: iterated differences are symmetric
    // in the steps, so ordered tuples cover everything.
    let mut idx = vec![0usize; n];
    let mut steps = vec![0.0; n];
    'outer: loop {
        for (s, &i) in steps.iter_mut().zip(idx.iter()) {
            *s = step_values[i];
        }
        let total: f64 = steps.iter().sum();
        for &b in &bases {
            if b + total > hi + 1e-12 * span.abs() {
                continue;
            }
            let margin = iterated_difference_margin(f, b, &steps)?;
            let mut witness = vec![b];
            witness.extend_from_slice(&steps);
            builder.record(margin, witness);
        }
        // advance the multi-index keeping it non-decreasing
        let mut pos = n;
        loop {
            if pos == 0 {
                break 'outer;
            }
            pos -= 1;
            if idx[pos] + 1 < step_values.len() {
                let v = idx[pos] + 1;
                for slot in idx.iter_mut().skip(pos) {
                    *slot = v;
                }
                break;
            }
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut produced = 0;
    let mut attempts = 0;
    while produced < cfg.random_tuples && attempts < cfg.random_tuples * 100 {
        attempts += 1;
        let b = lo + span * rng.random::<f64>();
        for s in steps.iter_mut() {
            *s = span * rng.random::<f64>();
        }
        let total: f64 = steps.iter().sum();
        if b + total > hi {
            continue;
        }
        let margin = iterated_difference_margin(f, b, &steps)?;
        let mut witness = vec![b];
        witness.extend_from_slice(&steps);
        builder.record(margin, witness);
        produced += 1;
    }
    if builder.is_empty() {
        return Err(Error::Domain("no admissible (base, steps) tuples".into()));
    }
    builder.finish()
}

/// Bernstein polynomial `B_m(f)(x)` on [0, 1], evaluated by repeated convex
/// combination (de Casteljau), which stays stable through m = 200.
pub fn bernstein_poly(f: &FunctionSpec, m: usize, x: f64) -> Result<f64> {
    if m == 0 {
        return Err(Error::Index("degree must be at least 1".into()));
    }
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::Domain(format!("x = {x} outside [0, 1]")));
    }
    let mut values = Vec::with_capacity(m + 1);
    for i in 0..=m {
        values.push(eval_function(f, i as f64 / m as f64)?);
    }
    Ok(de_casteljau(&values, x))
}

fn de_casteljau(values: &[f64], x: f64) -> f64 {
    let mut b = values.to_vec();
    let m = b.len() - 1;
    for r in 1..=m {
        for i in 0..=m - r {
            b[i] = (1.0 - x) * b[i] + x * b[i + 1];
        }
    }
    b[0]
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1.0)
    }

    #[test]
    fn eval_examples() {
        assert_eq!(eval_function(&FunctionSpec::ratio(), 1.0).unwrap(), 0.5);
        // limit of (x-1)/log x at 1, cross-checked just off the singularity
        let rl = FunctionSpec::ratio_log();
        assert_eq!(eval_function(&rl, 1.0).unwrap(), 1.0);
        assert!(close(eval_function(&rl, 1.0 + 1e-6).unwrap(), 1.0, 1e-5));
        assert!(close(eval_function(&rl, 1.0 - 1e-6).unwrap(), 1.0, 1e-5));
        // all correction terms vanish at x = 3
        assert_eq!(eval_function(&FunctionSpec::cubic_counterexample(), 3.0).unwrap(), 1.0);
    }

    #[test]
    fn eval_domain_errors() {
        assert!(matches!(
            eval_function(&FunctionSpec::ratio_log(), -1.0),
            Err(Error::Domain(_))
        ));
        assert!(eval_function(&FunctionSpec::neg_x_log_x(), 0.0).unwrap() == 0.0);
        assert!(matches!(
            eval_function(&FunctionSpec::power(-1.0), 0.0),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn divided_difference_examples() {
        let sq = FunctionSpec::poly(&[0.0, 0.0, 1.0]);
        assert!(close(divided_difference(&sq, &[1.0, 3.0]).unwrap(), 4.0, 1e-12));
        assert!(close(divided_difference(&sq, &[0.0, 1.0, 2.0]).unwrap(), 1.0, 1e-12));
        let cube = FunctionSpec::poly(&[0.0, 0.0, 0.0, 1.0]);
        assert!(close(
            divided_difference(&cube, &[0.0, 1.0, 2.0, 3.0]).unwrap(),
            1.0,
            1e-12
        ));
    }

    #[test]
    fn divided_difference_degenerate_spacing() {
        let sq = FunctionSpec::poly(&[0.0, 0.0, 1.0]);
        assert!(matches!(
            divided_difference(&sq, &[0.0, 1e-9, 1.0]),
            Err(Error::DegenerateInput(_))
        ));
        assert!(matches!(
            divided_difference(&sq, &[1.0, 1.0]),
            Err(Error::DegenerateInput(_))
        ));
    }

    #[test]
    fn divided_difference_permutation_invariance() {
        let f = FunctionSpec::exp();
        let a = divided_difference(&f, &[0.1, 0.7, 1.3, 1.9]).unwrap();
        let b = divided_difference(&f, &[1.9, 0.7, 0.1, 1.3]).unwrap();
        assert_eq!(a, b); // product form is exactly symmetric
    }

    #[test]
    fn recursive_matches_product_form() {
        let f = FunctionSpec::exp();
        let pts = [0.05, 0.4, 0.9, 1.3, 1.8];
        let p = divided_difference(&f, &pts).unwrap();
        let r = divided_difference_recursive(&f, &pts).unwrap();
        assert!(close(p, r, 1e-9));
    }

    #[test]
    fn iterated_difference_examples() {
        let sq = FunctionSpec::poly(&[0.0, 0.0, 1.0]);
        assert!(close(iterated_difference(&sq, 0.0, &[1.0, 1.0]).unwrap(), 2.0, 1e-12));
        let cube = FunctionSpec::poly(&[0.0, 0.0, 0.0, 1.0]);
        // Delta_a Delta_b Delta_c x^3 = 6abc
        assert!(close(
            iterated_difference(&cube, 0.0, &[1.0, 2.0, 3.0]).unwrap(),
            36.0,
            1e-12
        ));
        // the completely monotone counterexample direction
        let f = FunctionSpec::exp_neg(1.0);
        let v = iterated_difference(&f, 0.0, &[1.0, 1.0, 1.0]).unwrap();
        let expected = 3.0 * (-1.0f64).exp() + (-3.0f64).exp() - 3.0 * (-2.0f64).exp() - 1.0;
        assert!(close(v, expected, 1e-12));
        assert!((v + 0.25258).abs() < 5e-6);
    }

    #[test]
    fn iterated_difference_symmetric_in_steps() {
        let f = FunctionSpec::sinh();
        let a = iterated_difference(&f, 0.3, &[0.2, 0.9, 0.5]).unwrap();
        let b = iterated_difference(&f, 0.3, &[0.9, 0.5, 0.2]).unwrap();
        assert!(close(a, b, 1e-12));
    }

    #[test]
    fn iterated_difference_matches_popoviciu_sum() {
        // Explicit alternating-sum evaluation at base 0.
        let f = FunctionSpec::exp();
        let steps = [0.3, 0.7, 1.1];
        let direct = f64::exp(2.1) - f64::exp(1.0) - f64::exp(1.4) - f64::exp(1.8)
            + f64::exp(0.3)
            + f64::exp(0.7)
            + f64::exp(1.1)
            - 1.0;
        let v = iterated_difference(&f, 0.0, &steps).unwrap();
        assert!(close(v, direct, 1e-12));
    }

    #[test]
    fn nconvexity_probe_cubic_examples() {
        let f = FunctionSpec::cubic_counterexample();
        let cfg = ProbeConfig::default();
        // third divided differences of a cubic with leading coefficient 1/6
        let v = n_convexity_probe(&f, 0.0, 6.0, 3, &cfg).unwrap();
        assert!(v.passed);
        assert!((v.min_margin - 1.0 / 6.0).abs() < 1e-9);
        // not monotone: fails at order 1 near x = 3
        let v = n_convexity_probe(&f, 0.0, 6.0, 1, &cfg).unwrap();
        assert!(!v.passed);
        assert!(v.min_margin < -1e-3);
        let mid = 0.5 * (v.witness[0] + v.witness[1]);
        assert!((mid - 3.0).abs() < 1.0, "witness {:?}", v.witness);
        // x^2 is both 3-convex and 3-concave
        let sq = FunctionSpec::poly(&[0.0, 0.0, 1.0]);
        let v = n_convexity_probe(&sq, 0.0, 1.0, 3, &cfg).unwrap();
        assert!(v.passed);
        assert!(v.min_margin.abs() <= cfg.tol.at_scale(v.scale));
    }

    #[test]
    fn positive_difference_probe_examples() {
        let cfg = ProbeConfig::default();
        let v = positive_difference_probe(&FunctionSpec::exp(), 0.0, 2.0, 2, &cfg).unwrap();
        assert!(v.passed);
        assert!(v.min_margin > 0.0);
        let v = positive_difference_probe(&FunctionSpec::abs(), -2.0, 2.0, 2, &cfg).unwrap();
        assert!(v.passed);
        assert!(v.min_margin.abs() <= cfg.tol.at_scale(v.scale).max(1e-15));
        let neg_sq = FunctionSpec::poly(&[0.0, 0.0, -1.0]);
        let v = positive_difference_probe(&neg_sq, 0.0, 1.0, 2, &cfg).unwrap();
        assert!(!v.passed);
    }

    #[test]
    fn probes_respect_grid_preconditions() {
        let f = FunctionSpec::exp();
        let cfg = ProbeConfig { grid: 3, ..ProbeConfig::default() };
        assert!(n_convexity_probe(&f, 0.0, 1.0, 4, &cfg).is_err());
        assert!(n_convexity_probe(&f, 1.0, 0.0, 2, &ProbeConfig::default()).is_err());
    }

    #[test]
    fn probe_with_random_tuples_is_deterministic() {
        let f = FunctionSpec::exp();
        let cfg = ProbeConfig { random_tuples: 64, seed: 7, ..ProbeConfig::default() };
        let a = n_convexity_probe(&f, 0.0, 2.0, 2, &cfg).unwrap();
        let b = n_convexity_probe(&f, 0.0, 2.0, 2, &cfg).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn bernstein_examples() {
        let one = FunctionSpec::poly(&[1.0]);
        assert!((bernstein_poly(&one, 10, 0.3).unwrap() - 1.0).abs() < 1e-15);
        let x = FunctionSpec::poly(&[0.0, 1.0]);
        assert!((bernstein_poly(&x, 10, 0.7).unwrap() - 0.7).abs() < 1e-15);
        // B_m(x^2) = x^2 + x(1-x)/m
        let sq = FunctionSpec::poly(&[0.0, 0.0, 1.0]);
        assert!((bernstein_poly(&sq, 10, 0.5).unwrap() - 0.275).abs() < 1e-14);
        // stays stable at high degree
        let v = bernstein_poly(&sq, 200, 0.5).unwrap();
        assert!((v - (0.25 + 0.25 / 200.0)).abs() < 1e-12);
        assert!(bernstein_poly(&sq, 10, 1.5).is_err());
        assert!(bernstein_poly(&sq, 0, 0.5).is_err());
    }

    #[test]
    fn derivative_bounds_on_divided_differences() {
        // n-th divided differences of smooth f lie in
        // [min f^(n), max f^(n)] / n! over the hull of the points.
        let f = FunctionSpec::exp();
        let pts = [0.2, 0.5, 1.1];
        let dd = divided_difference(&f, &pts).unwrap();
        let lo = f64::exp(0.2) / 2.0;
        let hi = f64::exp(1.1) / 2.0;
        assert!(dd >= lo - 1e-12 && dd <= hi + 1e-12);

        let g = FunctionSpec::exp_neg(2.0); // f''' = -8 exp(-2x)
        let pts = [0.1, 0.4, 0.9, 1.5];
        let dd = divided_difference(&g, &pts).unwrap();
        let lo = -8.0 * f64::exp(-0.2) / 6.0;
        let hi = -8.0 * f64::exp(-3.0) / 6.0;
        assert!(dd >= lo - 1e-12 && dd <= hi + 1e-12);
    }

    #[test]
    fn convex_catalog_passes_order_two() {
        let cfg = ProbeConfig { grid: 10, ..ProbeConfig::default() };
        for f in default_catalog() {
            if !f.claimed_convex.contains(&2) {
                continue;
            }
            let v =
                positive_difference_probe(&f, f.probe_lo, f.probe_hi, 2, &cfg).unwrap();
            assert!(v.passed, "{} failed order-2 positivity: {:?}", f.id, v);
        }
    }

    proptest! {
        // Product and recursive forms agree to relative 1e-9 on random
        // admissible tuples.
        #[test]
        fn prop_product_vs_recursive(seed in 0u64..300) {
            let f = FunctionSpec::exp();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let n = 1 + (seed % 4) as usize;
            let mut pts: Vec<f64> = (0..=n).map(|_| rng.random::<f64>() * 2.0).collect();
            pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
            if check_spacing(&pts).is_ok() {
                let p = divided_difference_margin(&f, &pts).unwrap();
                let r = divided_difference_recursive(&f, &pts).unwrap();
                // agreement is relative to the scale of the summands
                let scale = p.scale.max(p.value.abs()).max(r.abs()).max(1.0);
                prop_assert!((p.value - r).abs() <= 1e-9 * scale, "{} vs {r}", p.value);
            }
        }

        // Divided differences are invariant under permutations of points.
        #[test]
        fn prop_permutation_invariance(seed in 0u64..300) {
            let f = FunctionSpec::sinh();
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(1000));
            let mut pts: Vec<f64> = (0..4).map(|_| rng.random::<f64>() * 3.0).collect();
            pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
            if check_spacing(&pts).is_ok() {
                let a = divided_difference(&f, &pts).unwrap();
                pts.reverse();
                let b = divided_difference(&f, &pts).unwrap();
                prop_assert_eq!(a, b);
            }
        }
    }
}
