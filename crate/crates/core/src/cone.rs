//! Difference operators and alternating subset sums for functions on the
//! nonnegative orthant: iterated cone differences, Sendov-Zitikis sums,
//! completely-monotone probes and double divided differences.

use std::fmt;
use std::sync::Arc;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::Error;
use crate::scalar::{eval_function, FunctionSpec, ProbeConfig};
use crate::tol::{Margin, SignedSum, MIN_SPACING_FRACTION};
use crate::Result;

/// A point of the closed nonnegative orthant.
#[derive(Debug, Clone, PartialEq)]
pub struct ConePoint {
    coords: Vec<f64>,
}

impl ConePoint {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::Domain("cone point needs at least one coordinate".into()));
        }
        for &c in &coords {
            if !c.is_finite() || c < 0.0 {
                return Err(Error::Domain(format!("coordinate {c} not in the cone")));
            }
        }
        Ok(Self { coords })
    }

    pub fn zero(dim: usize) -> Self {
        Self { coords: vec![0.0; dim] }
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch(format!(
                "{} vs {}",
                self.dim(),
                other.dim()
            )));
        }
        Ok(Self {
            coords: self
                .coords
                .iter()
                .zip(&other.coords)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    /// `base + sum of points[i] for i in subset`, added in index order.
    pub fn subset_sum(base: &Self, points: &[Self], subset: &[usize]) -> Result<Self> {
        let mut acc = base.clone();
        for &i in subset {
            acc = acc.add(&points[i])?;
        }
        Ok(acc)
    }
}

type MultiFn = Arc<dyn Fn(&[f64]) -> Result<f64> + Send + Sync>;

/// A named function on the orthant with its domain flavor and claimed
/// difference properties.
#[derive(Clone)]
pub struct MultiFunctionSpec {
    pub id: String,
    pub dim: usize,
    /// Domain is the open cone (all coordinates strictly positive).
    pub strict_positive: bool,
    /// Value of the continuous extension at the origin, when finite.
    pub value_at_origin: Option<f64>,
    /// Claimed completely monotone: `(-1)^k Delta^k f >= 0` for all k.
    pub cm_claimed: bool,
    /// Orders k for which plain positive differences `Delta^k f >= 0` are
    /// claimed.
    pub posdiff_claimed: Vec<usize>,
    /// The positive-difference claim holds only for axis-aligned steps
    /// (rectangle increments), not for arbitrary cone directions.
    pub axis_steps_only: bool,
    /// Default sampling box (per-coordinate lo, hi) for probes.
    pub box_lo: f64,
    pub box_hi: f64,
    eval: MultiFn,
}

impl fmt::Debug for MultiFunctionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MultiFunctionSpec")
            .field("id", &self.id)
            .field("dim", &self.dim)
            .finish()
    }
}

/// Evaluate a cone function at a point, enforcing dimension and (for
/// open-cone functions) strict positivity.
pub fn eval_multi(f: &MultiFunctionSpec, x: &ConePoint) -> Result<f64> {
    if x.dim() != f.dim {
        return Err(Error::DimensionMismatch(format!(
            "{}: point dimension {} vs {}",
            f.id,
            x.dim(),
            f.dim
        )));
    }
    if f.strict_positive {
        for &c in x.coords() {
            if c <= 0.0 {
                return Err(Error::Domain(format!(
                    "{}: coordinate {c} not strictly positive",
                    f.id
                )));
            }
        }
    }
    let v = (f.eval)(x.coords())?;
    if !v.is_finite() {
        return Err(Error::Singularity(format!("{}: non-finite value", f.id)));
    }
    Ok(v)
}

impl MultiFunctionSpec {
    /// `min(x, y)`, the Frechet-Hoeffding upper bound. Nondecreasing along
    /// any cone direction; its order-2 positivity is the 2-increasing
    /// rectangle property, which requires axis-aligned steps (it fails for
    /// skewed step pairs, e.g. base (0,1) with both steps (1, 1/4)).
    pub fn min2() -> Self {
        Self {
            id: "min2".into(),
            dim: 2,
            strict_positive: false,
            value_at_origin: Some(0.0),
            cm_claimed: false,
            posdiff_claimed: vec![1, 2],
            axis_steps_only: true,
            box_lo: 0.01,
            box_hi: 3.0,
            eval: Arc::new(|c| Ok(c[0].min(c[1]))),
        }
    }

    /// `-2 sqrt(x y)`: convex on the open quadrant yet without positive
    /// differences of order 2.
    pub fn neg_two_sqrt() -> Self {
        Self {
            id: "neg-2sqrt".into(),
            dim: 2,
            strict_positive: false,
            value_at_origin: Some(0.0),
            cm_claimed: false,
            posdiff_claimed: vec![],
            axis_steps_only: false,
            box_lo: 0.01,
            box_hi: 3.0,
            eval: Arc::new(|c| Ok(-2.0 * (c[0] * c[1]).sqrt())),
        }
    }

    /// Riesz kernel `prod x_i^(-alpha_i)`; completely monotone on the open
    /// cone.
    pub fn riesz(alphas: Vec<f64>) -> Result<Self> {
        if alphas.is_empty() {
            return Err(Error::Config("riesz kernel needs exponents".into()));
        }
        for &a in &alphas {
            if a < 0.0 {
                return Err(Error::Config(format!("riesz exponent {a} must be nonnegative")));
            }
        }
        let id = format!(
            "riesz:{}",
            alphas.iter().map(|a| format!("{a}")).collect::<Vec<_>>().join(",")
        );
        Ok(Self {
            id,
            dim: alphas.len(),
            strict_positive: true,
            value_at_origin: None,
            cm_claimed: true,
            posdiff_claimed: vec![2, 4],
            axis_steps_only: false,
            box_lo: 0.5,
            box_hi: 2.5,
            eval: Arc::new(move |c| {
                let mut v = 1.0;
                for (x, a) in c.iter().zip(&alphas) {
                    v *= x.powf(-a);
                }
                Ok(v)
            }),
        })
    }

    /// `exp(-<y, x>)` for a fixed cone vector `y`; completely monotone with
    /// continuous extension 1 at the origin.
    pub fn exp_inner(y: Vec<f64>) -> Result<Self> {
        if y.is_empty() {
            return Err(Error::Config("exponential kernel needs a weight vector".into()));
        }
        for &w in &y {
            if w < 0.0 {
                return Err(Error::Config(format!("weight {w} must be nonnegative")));
            }
        }
        let id = format!(
            "exp-inner:{}",
            y.iter().map(|a| format!("{a}")).collect::<Vec<_>>().join(",")
        );
        Ok(Self {
            id,
            dim: y.len(),
            strict_positive: false,
            value_at_origin: Some(1.0),
            cm_claimed: true,
            posdiff_claimed: vec![2, 4],
            axis_steps_only: false,
            box_lo: 0.01,
            box_hi: 3.0,
            eval: Arc::new(move |c| {
                let dot: f64 = c.iter().zip(&y).map(|(x, w)| x * w).sum();
                Ok((-dot).exp())
            }),
        })
    }

    /// Composition `f(<x, w>)` of a scalar catalog function with a
    /// nonnegative linear form; inherits order-n positive differences from
    /// n-convexity of `f`.
    pub fn compose(f: FunctionSpec, w: Vec<f64>) -> Result<Self> {
        if w.is_empty() {
            return Err(Error::Config("composition needs a weight vector".into()));
        }
        for &v in &w {
            if v < 0.0 {
                return Err(Error::Config(format!("weight {v} must be nonnegative")));
            }
        }
        let value_at_origin = eval_function(&f, 0.0).ok();
        let sum_w: f64 = w.iter().sum();
        let box_hi = if sum_w > 0.0 { f.probe_hi / sum_w } else { 3.0 };
        let box_lo = (0.01_f64).min(box_hi / 4.0).max({
            if f.probe_lo > 0.0 && sum_w > 0.0 {
                f.probe_lo / sum_w
            } else {
                0.0
            }
        });
        let id = format!(
            "compose:{}@{}",
            f.id,
            w.iter().map(|a| format!("{a}")).collect::<Vec<_>>().join(",")
        );
        let claimed = f.claimed_convex.clone();
        let dim = w.len();
        Ok(Self {
            id,
            dim,
            strict_positive: f.domain.lo_open && f.domain.lo == 0.0,
            value_at_origin,
            cm_claimed: false,
            posdiff_claimed: claimed,
            axis_steps_only: false,
            box_lo,
            box_hi,
            eval: Arc::new(move |c| {
                let dot: f64 = c.iter().zip(&w).map(|(x, v)| x * v).sum();
                eval_function(&f, dot)
            }),
        })
    }
}

/// Resolve a cone function id such as `min2`, `riesz:1,1`, `exp-inner:1,2`
/// or `compose:exp`; parameterless parametric families fall back to `alpha`
/// replicated across `dim` coordinates.
pub fn resolve_multi(spec: &str, alpha: f64, dim: usize) -> Result<MultiFunctionSpec> {
    let (name, param) = match spec.split_once(':') {
        Some((n, p)) => (n, Some(p)),
        None => (spec, None),
    };
    let parse_vec = |p: Option<&str>| -> Result<Vec<f64>> {
        match p {
            Some(s) => s
                .split(',')
                .map(|t| {
                    t.trim()
                        .parse()
                        .map_err(|_| Error::Config(format!("bad parameter '{t}'")))
                })
                .collect(),
            None => Ok(vec![alpha; dim.max(1)]),
        }
    };
    match name {
        "min2" => Ok(MultiFunctionSpec::min2()),
        "neg-2sqrt" => Ok(MultiFunctionSpec::neg_two_sqrt()),
        "riesz" => MultiFunctionSpec::riesz(parse_vec(param)?),
        "exp-inner" => MultiFunctionSpec::exp_inner(parse_vec(param)?),
        "compose" => {
            let inner = param.ok_or_else(|| {
                Error::Config("compose requires a scalar function, e.g. compose:exp".into())
            })?;
            let f = crate::scalar::resolve_function(inner, alpha)?;
            MultiFunctionSpec::compose(f, vec![1.0; dim.max(1)])
        }
        other => Err(Error::Config(format!("unknown cone function '{other}'"))),
    }
}

/// Iterated difference `Delta_{h_1} .. Delta_{h_k} f(base)` on the cone,
/// expanded as the alternating sum over subsets of the steps.
pub fn cone_iterated_difference_margin(
    f: &MultiFunctionSpec,
    base: &ConePoint,
    steps: &[ConePoint],
) -> Result<Margin> {
    // canonical lexicographic order: exact symmetry in the steps
    let mut hs = steps.to_vec();
    hs.sort_by(|a, b| {
        a.coords()
            .iter()
            .zip(b.coords())
            .find_map(|(x, y)| x.partial_cmp(y).filter(|o| o.is_ne()))
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let k = hs.len();
    let mut sum = SignedSum::new();
    for subset in crate::comb::subsets_by_size(k) {
        let x = ConePoint::subset_sum(base, &hs, &subset)?;
        let sign = if (k - subset.len()).is_multiple_of(2) { 1.0 } else { -1.0 };
        sum.add(sign * eval_multi(f, &x)?);
    }
    Ok(sum.into_margin())
}

/// Value of the iterated cone difference; see
/// [`cone_iterated_difference_margin`].
pub fn cone_iterated_difference(
    f: &MultiFunctionSpec,
    base: &ConePoint,
    steps: &[ConePoint],
) -> Result<f64> {
    Ok(cone_iterated_difference_margin(f, base, steps)?.value)
}

/// The alternating subset sum
/// `sum f(x_i) - sum f(x_i + x_j) + .. + (-1)^(n-1) f(x_1 + .. + x_n)`;
/// nonnegative for completely monotone `f`.
pub fn sz_alternating_sum_margin(
    f: &MultiFunctionSpec,
    points: &[ConePoint],
) -> Result<Margin> {
    if points.is_empty() {
        return Err(Error::Domain("alternating sum needs at least one point".into()));
    }
    let base = ConePoint::zero(points[0].dim());
    let mut sum = SignedSum::new();
    for subset in crate::comb::subsets_by_size(points.len()) {
        if subset.is_empty() {
            continue;
        }
        let x = ConePoint::subset_sum(&base, points, &subset)?;
        let sign = if subset.len().is_multiple_of(2) { -1.0 } else { 1.0 };
        sum.add(sign * eval_multi(f, &x)?);
    }
    Ok(sum.into_margin())
}

/// Value of the alternating subset sum; see [`sz_alternating_sum_margin`].
pub fn sz_alternating_sum(f: &MultiFunctionSpec, points: &[ConePoint]) -> Result<f64> {
    Ok(sz_alternating_sum_margin(f, points)?.value)
}

/// Two-sided margin for the double bound `0 <= sum <= f(0)`: the binding
/// side of the sandwich. When `f` has no finite extension at the origin the
/// upper bound is vacuous and only the lower bound is measured.
pub fn sz_double_margin(f: &MultiFunctionSpec, points: &[ConePoint]) -> Result<Margin> {
    let m = sz_alternating_sum_margin(f, points)?;
    match f.value_at_origin {
        Some(f0) => {
            let upper = f0 - m.value;
            let scale = m.scale.max(f0.abs());
            Ok(Margin::new(m.value.min(upper), scale))
        }
        None => Ok(m),
    }
}

/// Alternating exponential sums of the representation lemma:
/// `P = sum e^(-a_i) - sum e^(-(a_i+a_j)) + ..` and the same sum for
/// `1 - e^(-t)`. Both are nonnegative; `P = 1 - prod (1 - e^(-a_i))` and
/// `Q = 1 - P`.
pub fn bernstein_pq_values(alphas: &[f64]) -> Result<(f64, f64)> {
    if alphas.len() < 2 {
        return Err(Error::Index("need at least two exponents".into()));
    }
    for &a in alphas {
        if a < 0.0 {
            return Err(Error::Domain(format!("exponent {a} must be nonnegative")));
        }
    }
    let mut p = SignedSum::new();
    let mut q = SignedSum::new();
    for subset in crate::comb::subsets_by_size(alphas.len()) {
        if subset.is_empty() {
            continue;
        }
        let total: f64 = subset.iter().map(|&i| alphas[i]).sum();
        let sign = if subset.len().is_multiple_of(2) { -1.0 } else { 1.0 };
        p.add(sign * (-total).exp());
        q.add(sign * -(-total).exp_m1());
    }
    Ok((p.value(), q.value()))
}

/// Structured witness of a cone probe: the difference order, base point and
/// step vectors that achieved the minimum.
#[derive(Debug, Clone, PartialEq)]
pub struct ConeWitness {
    pub order: usize,
    pub base: Vec<f64>,
    pub steps: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConeVerdict {
    pub min_margin: f64,
    pub scale: f64,
    pub witness: ConeWitness,
    pub passed: bool,
    /// Smallest order at which a tolerance failure occurred, if any.
    pub failed_order: Option<usize>,
}

/// Probe complete monotonicity of `f` on a box strictly inside the open
/// cone via signed iterated differences `(-1)^k Delta_{v_1}..Delta_{v_k} f`,
/// for k = 1..=k_max. Step vectors mix grid-axis directions with seeded
/// random cone directions, since axis steps alone miss mixed sign failures.
pub fn cm_difference_probe(
    f: &MultiFunctionSpec,
    region: &[(f64, f64)],
    k_max: usize,
    cfg: &ProbeConfig,
) -> Result<ConeVerdict> {
    if region.len() != f.dim {
        return Err(Error::DimensionMismatch(format!(
            "region dimension {} vs {}",
            region.len(),
            f.dim
        )));
    }
    if k_max == 0 || k_max > 4 {
        return Err(Error::Index(format!("k_max = {k_max} outside 1..=4")));
    }
    for &(lo, hi) in region {
        if !lo.is_finite() || !hi.is_finite() || lo <= 0.0 || hi <= lo {
            return Err(Error::Domain(format!(
                "region side [{lo}, {hi}] not strictly inside the open cone"
            )));
        }
    }
    let n = f.dim;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);

    // Base lattice: full grid for low dimension, seeded samples otherwise.
    let lattice_size = (cfg.grid as f64).powi(n as i32);
    let bases: Vec<Vec<f64>> = if lattice_size <= 4096.0 {
        let mut out = vec![vec![]];
        for &(lo, hi) in region {
            let axis: Vec<f64> = (0..cfg.grid)
                .map(|i| lo + (hi - lo) * i as f64 / (cfg.grid.max(2) - 1) as f64)
                .collect();
            let mut next = Vec::new();
            for partial in &out {
                for &v in &axis {
                    let mut p = partial.clone();
                    p.push(v);
                    next.push(p);
                }
            }
            out = next;
        }
        out
    } else {
        (0..cfg.grid * cfg.grid)
            .map(|_| {
                region
                    .iter()
                    .map(|&(lo, hi)| lo + (hi - lo) * rng.random::<f64>())
                    .collect()
            })
            .collect()
    };

    let spans: Vec<f64> = region.iter().map(|&(lo, hi)| hi - lo).collect();
    let mut best: Option<(Margin, ConeWitness)> = None;
    let mut worst_adjusted = f64::INFINITY;
    let mut failed_order: Option<usize> = None;

    for base_coords in &bases {
        let base = ConePoint::new(base_coords.clone())?;
        for k in 1..=k_max {
            for _ in 0..cfg.grid.max(4) {
                let mut steps = Vec::with_capacity(k);
                for _ in 0..k {
                    let coords: Vec<f64> = if rng.random::<f64>() < 0.5 {
                        // axis-aligned step
                        let axis = rng.random_range(0..n);
                        let mag = spans[axis] * (0.1 + 0.9 * rng.random::<f64>());
                        (0..n).map(|i| if i == axis { mag } else { 0.0 }).collect()
                    } else {
                        // random direction in the cone
                        (0..n)
                            .map(|i| spans[i] * rng.random::<f64>())
                            .collect()
                    };
                    steps.push(ConePoint::new(coords)?);
                }
                let raw = cone_iterated_difference_margin(f, &base, &steps)?;
                let sign = if k.is_multiple_of(2) { 1.0 } else { -1.0 };
                let margin = Margin::new(sign * raw.value, raw.scale);
                if !margin.passes(cfg.tol) {
                    failed_order = Some(failed_order.map_or(k, |o: usize| o.min(k)));
                }
                let adjusted = margin.value + cfg.tol.at_scale(margin.scale);
                if adjusted < worst_adjusted || best.is_none() {
                    worst_adjusted = adjusted;
                    best = Some((
                        margin,
                        ConeWitness {
                            order: k,
                            base: base_coords.clone(),
                            steps: steps.iter().map(|s| s.coords().to_vec()).collect(),
                        },
                    ));
                }
            }
        }
    }

    let (margin, witness) =
        best.ok_or_else(|| Error::Domain("probe sampled no admissible tuples".into()))?;
    Ok(ConeVerdict {
        min_margin: margin.value,
        scale: margin.scale,
        witness,
        passed: failed_order.is_none(),
        failed_order,
    })
}

fn check_axis_spacing(points: &[f64]) -> Result<()> {
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
                    "axis points {} and {} too close",
                    points[i], points[j]
                )));
            }
        }
    }
    Ok(())
}

/// Double divided difference of a bivariate function over the point grids
/// `xs` x `ys`, in the product form
/// `sum_ij f(x_i, y_j) / (prod_k (x_i - x_k) prod_l (y_j - y_l))`,
/// which is exactly symmetric in the axis application order.
pub fn double_divided_difference(
    xs: &[f64],
    ys: &[f64],
    f: &dyn Fn(f64, f64) -> f64,
) -> Result<f64> {
    if xs.is_empty() || ys.is_empty() {
        return Err(Error::DegenerateInput("empty point list".into()));
    }
    check_axis_spacing(xs)?;
    check_axis_spacing(ys)?;
    let mut sum = SignedSum::new();
    for (i, &xi) in xs.iter().enumerate() {
        let mut dx = 1.0;
        for (k, &xk) in xs.iter().enumerate() {
            if k != i {
                dx *= xi - xk;
            }
        }
        for (j, &yj) in ys.iter().enumerate() {
            let mut dy = 1.0;
            for (l, &yl) in ys.iter().enumerate() {
                if l != j {
                    dy *= yj - yl;
                }
            }
            sum.add(f(xi, yj) / (dx * dy));
        }
    }
    Ok(sum.value())
}

/// Nested evaluation applying the x-axis divided difference first; used to
/// exercise the symmetry of [`double_divided_difference`].
pub fn double_divided_difference_x_first(
    xs: &[f64],
    ys: &[f64],
    f: &dyn Fn(f64, f64) -> f64,
) -> Result<f64> {
    check_axis_spacing(xs)?;
    check_axis_spacing(ys)?;
    // inner divided difference along x for fixed y, then outer along y
    let inner = |y: f64| -> f64 {
        let mut acc = 0.0;
        for (i, &xi) in xs.iter().enumerate() {
            let mut dx = 1.0;
            for (k, &xk) in xs.iter().enumerate() {
                if k != i {
                    dx *= xi - xk;
                }
            }
            acc += f(xi, y) / dx;
        }
        acc
    };
    let mut acc = 0.0;
    for (j, &yj) in ys.iter().enumerate() {
        let mut dy = 1.0;
        for (l, &yl) in ys.iter().enumerate() {
            if l != j {
                dy *= yj - yl;
            }
        }
        acc += inner(yj) / dy;
    }
    Ok(acc)
}

/// Nested evaluation applying the y-axis divided difference first.
pub fn double_divided_difference_y_first(
    xs: &[f64],
    ys: &[f64],
    f: &dyn Fn(f64, f64) -> f64,
) -> Result<f64> {
    let swapped = |y: f64, x: f64| f(x, y);
    double_divided_difference_x_first(ys, xs, &swapped)
}
