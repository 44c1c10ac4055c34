//! Seeded random input generation, verification campaigns over the
//! inequality registry, and counterexample search.
//!
//! Every target draws trial `t` from an RNG stream derived from
//! `(seed, t)` by a counter-based construction, so campaigns are
//! deterministic for a given config no matter how many threads run them.

use std::time::Instant;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cone::{
    cone_iterated_difference_margin, resolve_multi, sz_double_margin, ConePoint,
    MultiFunctionSpec,
};
use crate::error::Error;
use crate::inequalities as ineq;
use crate::matrix::{CharacterSpec, SymMatrix};
use crate::scalar::{
    divided_difference_margin, iterated_difference_margin, resolve_function, FunctionSpec,
};
use crate::tol::{Margin, TolerancePolicy};
use crate::Result;

/// Shift added to Gram matrices by the strictly-positive-definite sampler.
pub const GRAM_SHIFT: f64 = 0.1;

/// Input sampling distribution for PSD matrices. `Mixed` is the campaign
/// default: every fourth trial draws from the boundary (rank-deficient)
/// distribution, where the equality cases live.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Distribution {
    Gram,
    GramShift,
    Diagonal,
    Boundary,
    Mixed,
}

impl Distribution {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "gram" => Ok(Self::Gram),
            "gram+shift" | "gram-shift" => Ok(Self::GramShift),
            "diagonal" => Ok(Self::Diagonal),
            "boundary" => Ok(Self::Boundary),
            "mixed" => Ok(Self::Mixed),
            other => Err(Error::Config(format!("unknown distribution '{other}'"))),
        }
    }

    /// Concrete distribution used for a given trial index.
    fn effective(self, trial: u64) -> Distribution {
        match self {
            Distribution::Mixed => {
                if trial % 4 == 3 {
                    Distribution::Boundary
                } else {
                    Distribution::Gram
                }
            }
            d => d,
        }
    }
}

impl std::fmt::Display for Distribution {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Distribution::Gram => "gram",
            Distribution::GramShift => "gram+shift",
            Distribution::Diagonal => "diagonal",
            Distribution::Boundary => "boundary",
            Distribution::Mixed => "mixed",
        };
        f.write_str(s)
    }
}

/// Campaign and search configuration. `order` and `power` are the generic
/// integer parameters; their meaning per target is given in the registry
/// statement (e.g. for the mixed-tensor sandwich they are the two block
/// exponents, for the subset scheme the subset size).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchConfig {
    pub seed: u64,
    pub trials: u64,
    pub dim: usize,
    pub order: usize,
    pub power: usize,
    pub rho: f64,
    pub alpha: f64,
    pub distribution: Distribution,
    /// Function or variant selector for targets that take one.
    pub function: Option<String>,
    pub tol: TolerancePolicy,
    /// Condition-number cap for strictly positive definite sampling.
    pub cond_cap: f64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            seed: 42,
            trials: 1000,
            dim: 2,
            order: 3,
            power: 2,
            rho: 1.0,
            alpha: 1.0,
            distribution: Distribution::Mixed,
            function: None,
            tol: TolerancePolicy::default(),
            cond_cap: 1e8,
        }
    }
}

/// One sampled input of a campaign trial, serialized into reports so a
/// witness can be replayed exactly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InputValue {
    Matrix(SymMatrix),
    Point(Vec<f64>),
    Scalar(f64),
}

/// The trial achieving the minimum margin, with its full input values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub trial: u64,
    pub margin: f64,
    pub scale: f64,
    pub inputs: Vec<InputValue>,
}

/// Aggregate outcome of a randomized verification run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CampaignReport {
    pub inequality: String,
    pub config: SearchConfig,
    pub trials: u64,
    pub min_margin: f64,
    pub witness: Witness,
    pub failures: u64,
    pub elapsed_ms: u64,
}

/// What the mathematics says about a target's margins under its intended
/// sampling.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Claim {
    /// A proved statement: negative margins indicate a problem.
    Nonneg,
    /// A known counterexample direction: negative margins are expected.
    Violable,
    /// No claim either way; results are informational.
    Exploratory,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TargetId {
    OpHh,
    DetDiff,
    DetHh,
    EsymHlawka,
    ImmHh,
    LemmaMain,
    SkGeneral,
    SerreRev,
    MinkowskiDet,
    DetRho,
    Va,
    NConv,
    PosDiff,
    ConeDiff,
    CmDiff,
    Sz,
    CexPopoviciuExp,
    CexNegSqrt,
    CexCubicMonotone,
}

pub struct TargetInfo {
    pub id: &'static str,
    pub statement: &'static str,
    pub loewner: bool,
    pub target: TargetId,
}

/// The registry of verifiable statements, one stable identifier each.
pub static REGISTRY: &[TargetInfo] = &[
    TargetInfo {
        id: "op-hh",
        statement: "operator Hornich-Hlawka: T(A+X)+T(B+X)+T(C+X)+T(A+B+C+X) >= T(A+B+X)+T(B+C+X)+T(C+A+X)+T(X) in the Loewner order, T the p-fold tensor power, PSD inputs (p = power)",
        loewner: true,
        target: TargetId::OpHh,
    },
    TargetInfo {
        id: "det-diff",
        statement: "iterated differences of det: sum_k (-1)^(n-k) sum_{|S|=k} det(A_S + X) >= 0 for PSD inputs, any order n (n = order)",
        loewner: false,
        target: TargetId::DetDiff,
    },
    TargetInfo {
        id: "det-hh",
        statement: "determinant Hornich-Hlawka with base: det(A+X)+det(B+X)+det(C+X)+det(A+B+C+X) >= det(A+B+X)+det(B+C+X)+det(C+A+X)+det(X) for PSD inputs",
        loewner: false,
        target: TargetId::DetHh,
    },
    TargetInfo {
        id: "esym-hlawka",
        statement: "elementary symmetric Hornich-Hlawka: e_k(A)+e_k(B)+e_k(C)+e_k(A+B+C) >= e_k(A+B)+e_k(B+C)+e_k(C+A) for PSD inputs (k = order)",
        loewner: false,
        target: TargetId::EsymHlawka,
    },
    TargetInfo {
        id: "imm-hh",
        statement: "immanant Hornich-Hlawka with base term, character from --function (sign | trivial), PSD inputs",
        loewner: false,
        target: TargetId::ImmHh,
    },
    TargetInfo {
        id: "lemma-main",
        statement: "mixed tensor sandwich: X^k(x)V(x)X^l + (X+Y+Z)^k(x)V(x)(X+Y+Z)^l >= (X+Y)^k(x)V(x)(X+Y)^l + (X+Z)^k(x)V(x)(X+Z)^l in the Loewner order (k = order, l = power)",
        loewner: true,
        target: TargetId::LemmaMain,
    },
    TargetInfo {
        id: "sk-general",
        statement: "generalized subset-sum operator inequality: S_n + S_(n-2) + .. >= S_(n-1) + S_(n-3) + .. with S_k the tensor-power sums over k-subsets (n = order, p = power)",
        loewner: true,
        target: TargetId::SkGeneral,
    },
    TargetInfo {
        id: "serre-rev",
        statement: "reversed Hornich-Hlawka for det^(1/2) on 2x2 PSD matrices: pair terms dominate the singles plus the total",
        loewner: false,
        target: TargetId::SerreRev,
    },
    TargetInfo {
        id: "minkowski-det",
        statement: "Minkowski-like product inequality: det^(1/N)(A+B) det^(1/N)(A+C) >= det^(1/N)B det^(1/N)C + det^(1/N)A det^(1/N)(A+B+C) for PSD inputs",
        loewner: false,
        target: TargetId::MinkowskiDet,
    },
    TargetInfo {
        id: "det-rho",
        statement: "alternating sums of det^(-rho) over nonempty subset sums of strictly PD matrices stay nonnegative for rho in {0, 1/2, 1, ..} or rho >= (N-1)/2 (n = order)",
        loewner: false,
        target: TargetId::DetRho,
    },
    TargetInfo {
        id: "va",
        statement: "binomial-weighted k-subset inequality from the three-variable hypothesis: C(n-2,k-1) sum phi(x_i) + C(n-2,k-2) phi(sum x_i) >= sum_{|S|=k} phi(x_S); phi from --function (norm | det-shift | scalar id), n = order, k = power",
        loewner: false,
        target: TargetId::Va,
    },
    TargetInfo {
        id: "nconv",
        statement: "order-n divided differences of a catalog scalar function on its probe interval (function from --function, n = order)",
        loewner: false,
        target: TargetId::NConv,
    },
    TargetInfo {
        id: "posdiff",
        statement: "order-n iterated differences of a catalog scalar function with nonnegative steps (function from --function, n = order)",
        loewner: false,
        target: TargetId::PosDiff,
    },
    TargetInfo {
        id: "cone-diff",
        statement: "order-k iterated differences of a cone function with cone steps (function from --function, k = order); axis-aligned steps where the claim requires them",
        loewner: false,
        target: TargetId::ConeDiff,
    },
    TargetInfo {
        id: "cm-diff",
        statement: "complete monotonicity surrogate: (-1)^k times the order-k iterated difference of a cone function (function from --function, k = order)",
        loewner: false,
        target: TargetId::CmDiff,
    },
    TargetInfo {
        id: "sz",
        statement: "alternating subset sum of a completely monotone cone function over n points, sandwiched between 0 and f(0) (function from --function, n = order)",
        loewner: false,
        target: TargetId::Sz,
    },
    TargetInfo {
        id: "cex-popoviciu-exp",
        statement: "known violation: the order-3 alternating sum with base term of exp(-x) goes below -0.25, e.g. at steps (1,1,1)",
        loewner: false,
        target: TargetId::CexPopoviciuExp,
    },
    TargetInfo {
        id: "cex-neg-sqrt",
        statement: "known violation: order-2 differences of -2 sqrt(xy) go below -0.34 near base (0.01,0.01) with steps (1,2) and (2,1)",
        loewner: false,
        target: TargetId::CexNegSqrt,
    },
    TargetInfo {
        id: "cex-cubic-monotone",
        statement: "known violation: 1 - (x-3) + (x-3)^3/6 is 3-convex but not nondecreasing on [0,6]",
        loewner: false,
        target: TargetId::CexCubicMonotone,
    },
];

pub fn lookup(id: &str) -> Result<&'static TargetInfo> {
    REGISTRY
        .iter()
        .find(|t| t.id == id)
        .ok_or_else(|| Error::UnknownInequality(id.to_string()))
}

/// Per-trial RNG stream: a counter-based key from `(seed, trial)`.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&trial.to_le_bytes());
    key[16..24].copy_from_slice(b"margins\0");
    ChaCha8Rng::from_seed(key)
}

fn normal(rng: &mut ChaCha8Rng) -> f64 {
    // Box-Muller; the (0,1] flip guards the log
    let u1: f64 = 1.0 - rng.random::<f64>();
    let u2: f64 = rng.random();
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

fn psd_raw_len(dim: usize, dist: Distribution) -> usize {
    match dist {
        Distribution::Gram | Distribution::GramShift => dim * dim,
        Distribution::Diagonal => dim,
        Distribution::Boundary => 1 + dim * dim,
        Distribution::Mixed => unreachable!("mixed resolves per trial"),
    }
}

fn draw_psd_raw(rng: &mut ChaCha8Rng, dim: usize, dist: Distribution) -> Vec<f64> {
    match dist {
        Distribution::Gram | Distribution::GramShift => {
            (0..dim * dim).map(|_| normal(rng)).collect()
        }
        Distribution::Diagonal => (0..dim).map(|_| normal(rng)).collect(),
        Distribution::Boundary => {
            let mut raw = vec![rng.random::<f64>()];
            raw.extend((0..dim * dim).map(|_| normal(rng)));
            raw
        }
        Distribution::Mixed => unreachable!("mixed resolves per trial"),
    }
}

fn build_psd(dim: usize, dist: Distribution, raw: &[f64]) -> SymMatrix {
    match dist {
        Distribution::Gram => SymMatrix::gram(raw, dim, dim),
        Distribution::GramShift => SymMatrix::gram(raw, dim, dim)
            .add(&SymMatrix::identity(dim).scale(GRAM_SHIFT))
            .expect("same dimension"),
        Distribution::Diagonal => {
            let d: Vec<f64> = raw.iter().map(|v| v.abs()).collect();
            SymMatrix::diagonal(&d)
        }
        Distribution::Boundary => {
            if dim == 1 {
                return SymMatrix::zeros(1);
            }
            let width = 1 + ((raw[0].clamp(0.0, 1.0) * (dim - 1) as f64) as usize).min(dim - 2);
            let factor: Vec<f64> = raw[1..1 + dim * width].to_vec();
            SymMatrix::gram(&factor, dim, width)
        }
        Distribution::Mixed => unreachable!("mixed resolves per trial"),
    }
}

/// Draw one PSD matrix from the given distribution; the sampler behind
/// every matrix campaign.
pub fn sample_psd(dim: usize, rng: &mut ChaCha8Rng, dist: Distribution) -> SymMatrix {
    let dist = match dist {
        Distribution::Mixed => Distribution::Gram,
        d => d,
    };
    let raw = draw_psd_raw(rng, dim, dist);
    build_psd(dim, dist, &raw)
}

fn scalar_function(cfg: &SearchConfig, fallback: &str) -> Result<FunctionSpec> {
    resolve_function(cfg.function.as_deref().unwrap_or(fallback), cfg.alpha)
}

fn multi_function(cfg: &SearchConfig, fallback: &str) -> Result<MultiFunctionSpec> {
    resolve_multi(cfg.function.as_deref().unwrap_or(fallback), cfg.alpha, cfg.dim)
}

fn get_matrices(inputs: &[InputValue]) -> Result<Vec<&SymMatrix>> {
    inputs
        .iter()
        .map(|v| match v {
            InputValue::Matrix(m) => Ok(m),
            other => Err(Error::Config(format!("expected matrix input, found {other:?}"))),
        })
        .collect()
}

fn get_points(inputs: &[InputValue]) -> Result<Vec<ConePoint>> {
    inputs
        .iter()
        .map(|v| match v {
            InputValue::Point(p) => ConePoint::new(p.clone()),
            other => Err(Error::Config(format!("expected cone point, found {other:?}"))),
        })
        .collect()
}

fn get_scalars(inputs: &[InputValue]) -> Result<Vec<f64>> {
    inputs
        .iter()
        .map(|v| match v {
            InputValue::Scalar(s) => Ok(*s),
            other => Err(Error::Config(format!("expected scalar input, found {other:?}"))),
        })
        .collect()
}

impl TargetId {
    fn matrix_count(self, cfg: &SearchConfig) -> usize {
        match self {
            TargetId::OpHh | TargetId::DetHh | TargetId::ImmHh | TargetId::LemmaMain => 4,
            TargetId::DetDiff | TargetId::SkGeneral => cfg.order + 1,
            TargetId::EsymHlawka | TargetId::SerreRev | TargetId::MinkowskiDet => 3,
            TargetId::DetRho => cfg.order,
            _ => 0,
        }
    }

    /// Raw parameter vector for trial sampling; counterexample descent
    /// perturbs this vector and rebuilds.
    fn draw_raw(self, cfg: &SearchConfig, rng: &mut ChaCha8Rng, dist: Distribution) -> Vec<f64> {
        match self {
            TargetId::OpHh
            | TargetId::DetDiff
            | TargetId::DetHh
            | TargetId::EsymHlawka
            | TargetId::ImmHh
            | TargetId::LemmaMain
            | TargetId::SkGeneral
            | TargetId::SerreRev
            | TargetId::MinkowskiDet
            | TargetId::DetRho => {
                let count = self.matrix_count(cfg);
                let mut raw = Vec::new();
                for _ in 0..count {
                    raw.extend(draw_psd_raw(rng, cfg.dim, dist));
                }
                raw
            }
            TargetId::Va => {
                let n = cfg.order.max(3);
                match cfg.function.as_deref().unwrap_or("norm") {
                    "det-shift" => {
                        let mut raw = Vec::new();
                        for _ in 0..n {
                            raw.extend(draw_psd_raw(rng, cfg.dim, dist));
                        }
                        raw
                    }
                    _ => (0..n * cfg.dim).map(|_| rng.random::<f64>()).collect(),
                }
            }
            TargetId::NConv => (0..cfg.order + 1).map(|_| rng.random::<f64>()).collect(),
            TargetId::PosDiff => (0..cfg.order + 1).map(|_| rng.random::<f64>()).collect(),
            TargetId::ConeDiff | TargetId::CmDiff => {
                // base coords, then per step one selector plus coords
                let k = cfg.order.max(1);
                let dim = self.cone_dim(cfg);
                (0..dim + k * (1 + dim)).map(|_| rng.random::<f64>()).collect()
            }
            TargetId::Sz => {
                let n = cfg.order.max(1);
                let dim = self.cone_dim(cfg);
                (0..n * dim).map(|_| rng.random::<f64>()).collect()
            }
            TargetId::CexPopoviciuExp => (0..3).map(|_| rng.random::<f64>()).collect(),
            TargetId::CexNegSqrt => (0..6).map(|_| rng.random::<f64>()).collect(),
            TargetId::CexCubicMonotone => (0..2).map(|_| rng.random::<f64>()).collect(),
        }
    }

    fn cone_dim(self, cfg: &SearchConfig) -> usize {
        match cfg.function.as_deref() {
            Some(f) => match resolve_multi(f, cfg.alpha, cfg.dim) {
                Ok(spec) => spec.dim,
                Err(_) => cfg.dim,
            },
            None => cfg.dim,
        }
    }

    /// Build concrete inputs from raw parameters.
    fn build(
        self,
        cfg: &SearchConfig,
        dist: Distribution,
        raw: &[f64],
    ) -> Result<Vec<InputValue>> {
        match self {
            TargetId::OpHh
            | TargetId::DetDiff
            | TargetId::DetHh
            | TargetId::EsymHlawka
            | TargetId::ImmHh
            | TargetId::LemmaMain
            | TargetId::SkGeneral
            | TargetId::SerreRev
            | TargetId::MinkowskiDet
            | TargetId::DetRho => {
                let count = self.matrix_count(cfg);
                let per = psd_raw_len(cfg.dim, dist);
                if raw.len() != count * per {
                    return Err(Error::Config("raw parameter length mismatch".into()));
                }
                Ok((0..count)
                    .map(|i| {
                        InputValue::Matrix(build_psd(cfg.dim, dist, &raw[i * per..(i + 1) * per]))
                    })
                    .collect())
            }
            TargetId::Va => {
                let n = cfg.order.max(3);
                match cfg.function.as_deref().unwrap_or("norm") {
                    "det-shift" => {
                        let per = psd_raw_len(cfg.dim, dist);
                        Ok((0..n)
                            .map(|i| {
                                InputValue::Matrix(build_psd(
                                    cfg.dim,
                                    dist,
                                    &raw[i * per..(i + 1) * per],
                                ))
                            })
                            .collect())
                    }
                    "norm" => Ok(raw
                        .chunks(cfg.dim)
                        .take(n)
                        .map(|c| {
                            InputValue::Point(c.iter().map(|u| 3.0 * u.clamp(0.0, 1.0)).collect())
                        })
                        .collect()),
                    id => {
                        // scalar functional: points scaled so every subset
                        // sum stays inside the function's probe interval
                        let f = resolve_function(id, cfg.alpha)?;
                        let cap =
                            (f.probe_hi - cfg.alpha).max(0.0) / (n as f64 * cfg.dim as f64);
                        Ok(raw
                            .chunks(cfg.dim)
                            .take(n)
                            .map(|c| {
                                InputValue::Point(
                                    c.iter().map(|u| cap * u.clamp(0.0, 1.0)).collect(),
                                )
                            })
                            .collect())
                    }
                }
            }
            TargetId::NConv => {
                let f = scalar_function(cfg, "exp")?;
                let span = f.probe_hi - f.probe_lo;
                let mut pts: Vec<f64> = raw
                    .iter()
                    .map(|u| f.probe_lo + span * u.clamp(0.0, 1.0))
                    .collect();
                pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
                Ok(pts.into_iter().map(InputValue::Scalar).collect())
            }
            TargetId::PosDiff => {
                let f = scalar_function(cfg, "exp")?;
                let span = f.probe_hi - f.probe_lo;
                let n = cfg.order;
                let base = f.probe_lo + span * raw[0].clamp(0.0, 1.0);
                let budget = (f.probe_hi - base) / n.max(1) as f64;
                let mut out = vec![InputValue::Scalar(base)];
                for u in raw[1..=n].iter() {
                    out.push(InputValue::Scalar(budget * u.clamp(0.0, 1.0)));
                }
                Ok(out)
            }
            TargetId::ConeDiff | TargetId::CmDiff => {
                let f = multi_function(cfg, "exp-inner")?;
                let dim = f.dim;
                let k = cfg.order.max(1);
                let span = f.box_hi - f.box_lo;
                let mut out = Vec::with_capacity(1 + k);
                let base: Vec<f64> = raw[..dim]
                    .iter()
                    .map(|u| f.box_lo + span * u.clamp(0.0, 1.0))
                    .collect();
                out.push(InputValue::Point(base));
                let step_cap = span / k as f64;
                for s in 0..k {
                    let chunk = &raw[dim + s * (1 + dim)..dim + (s + 1) * (1 + dim)];
                    let selector = chunk[0];
                    let coords: Vec<f64> = if f.axis_steps_only || selector < 0.5 {
                        // axis-aligned step: direction and magnitude both
                        // recovered from the draws
                        let axis = ((selector.clamp(0.0, 1.0) * 2.0 % 1.0) * dim as f64) as usize;
                        let axis = axis.min(dim - 1);
                        let mag = step_cap * (0.05 + 0.95 * chunk[1].clamp(0.0, 1.0));
                        (0..dim).map(|i| if i == axis { mag } else { 0.0 }).collect()
                    } else {
                        chunk[1..]
                            .iter()
                            .map(|u| step_cap * u.clamp(0.0, 1.0))
                            .collect()
                    };
                    out.push(InputValue::Point(coords));
                }
                Ok(out)
            }
            TargetId::Sz => {
                let f = multi_function(cfg, "exp-inner")?;
                let dim = f.dim;
                let n = cfg.order.max(1);
                let span = f.box_hi - f.box_lo;
                // each point bounded so the total stays in the sampling box
                let cap = span / n as f64;
                Ok(raw
                    .chunks(dim)
                    .take(n)
                    .map(|c| {
                        InputValue::Point(
                            c.iter().map(|u| f.box_lo + cap * u.clamp(0.0, 1.0)).collect(),
                        )
                    })
                    .collect())
            }
            TargetId::CexPopoviciuExp => Ok(raw
                .iter()
                .map(|u| InputValue::Scalar(4.0 * u.clamp(0.0, 1.0)))
                .collect()),
            TargetId::CexNegSqrt => {
                let x: Vec<f64> =
                    raw[..2].iter().map(|u| 0.005 + 0.5 * u.clamp(0.0, 1.0)).collect();
                let a: Vec<f64> = raw[2..4].iter().map(|u| 3.0 * u.clamp(0.0, 1.0)).collect();
                let b: Vec<f64> = raw[4..6].iter().map(|u| 3.0 * u.clamp(0.0, 1.0)).collect();
                Ok(vec![InputValue::Point(x), InputValue::Point(a), InputValue::Point(b)])
            }
            TargetId::CexCubicMonotone => {
                let x = 6.0 * raw[0].clamp(0.0, 1.0);
                let h = (6.0 - x) * raw[1].clamp(0.0, 1.0);
                Ok(vec![InputValue::Scalar(x), InputValue::Scalar(h)])
            }
        }
    }

    /// Evaluate the target's margin on concrete inputs.
    pub fn eval(self, cfg: &SearchConfig, inputs: &[InputValue]) -> Result<Margin> {
        let need = |exact: usize| -> Result<()> {
            if inputs.len() != exact {
                return Err(Error::Config(format!(
                    "expected {exact} inputs, found {}",
                    inputs.len()
                )));
            }
            Ok(())
        };
        let need_at_least = |min: usize| -> Result<()> {
            if inputs.len() < min {
                return Err(Error::Config(format!(
                    "expected at least {min} inputs, found {}",
                    inputs.len()
                )));
            }
            Ok(())
        };
        match self {
            TargetId::OpHh | TargetId::DetHh | TargetId::ImmHh | TargetId::LemmaMain => need(4)?,
            TargetId::EsymHlawka
            | TargetId::SerreRev
            | TargetId::MinkowskiDet
            | TargetId::CexNegSqrt => need(3)?,
            TargetId::DetDiff | TargetId::SkGeneral | TargetId::CexCubicMonotone => {
                need_at_least(2)?
            }
            TargetId::Va => need_at_least(3)?,
            _ => need_at_least(1)?,
        }
        match self {
            TargetId::OpHh => {
                let m = get_matrices(inputs)?;
                ineq::operator_hh_margin(m[0], m[1], m[2], m[3], cfg.power)
            }
            TargetId::DetDiff => {
                let m = get_matrices(inputs)?;
                let (steps, x) = m.split_at(m.len() - 1);
                let steps: Vec<SymMatrix> = steps.iter().map(|m| (*m).clone()).collect();
                ineq::det_alternating_difference(&steps, x[0])
            }
            TargetId::DetHh => {
                let m = get_matrices(inputs)?;
                ineq::det_hlawka_with_base_margin(m[0], m[1], m[2], m[3])
            }
            TargetId::EsymHlawka => {
                let m = get_matrices(inputs)?;
                ineq::esym_hlawka_margin(m[0], m[1], m[2], cfg.order)
            }
            TargetId::ImmHh => {
                let m = get_matrices(inputs)?;
                let chi = match cfg.function.as_deref().unwrap_or("trivial") {
                    "sign" => CharacterSpec::Sign,
                    "trivial" => CharacterSpec::Trivial,
                    other => {
                        return Err(Error::Config(format!(
                            "unknown character '{other}' (use sign or trivial)"
                        )))
                    }
                };
                ineq::immanant_hh_margin(m[0], m[1], m[2], m[3], &chi)
            }
            TargetId::LemmaMain => {
                let m = get_matrices(inputs)?;
                ineq::lemma_main_margin(m[0], m[1], m[2], m[3], cfg.order, cfg.power)
            }
            TargetId::SkGeneral => {
                let m = get_matrices(inputs)?;
                let (terms, x) = m.split_at(m.len() - 1);
                let terms: Vec<SymMatrix> = terms.iter().map(|m| (*m).clone()).collect();
                ineq::generalized_sk_margin(&terms, x[0], cfg.power)
            }
            TargetId::SerreRev => {
                let m = get_matrices(inputs)?;
                ineq::serre_reverse_margin(m[0], m[1], m[2])
            }
            TargetId::MinkowskiDet => {
                let m = get_matrices(inputs)?;
                ineq::minkowski_like_margin(m[0], m[1], m[2])
            }
            TargetId::DetRho => {
                let m = get_matrices(inputs)?;
                for mat in &m {
                    let lam = mat.eigenvalues()?;
                    let cond = lam[lam.len() - 1] / lam[0].max(f64::MIN_POSITIVE);
                    if lam[0] <= 0.0 || !cond.is_finite() || cond > cfg.cond_cap {
                        return Err(Error::SingularMatrix(format!(
                            "condition number {cond:.3e} above cap {:.1e}",
                            cfg.cond_cap
                        )));
                    }
                }
                let terms: Vec<SymMatrix> = m.iter().map(|m| (*m).clone()).collect();
                ineq::detrho_alternating_sum(&terms, cfg.rho)
            }
            TargetId::Va => {
                let k = cfg.power;
                match cfg.function.as_deref().unwrap_or("norm") {
                    "det-shift" => {
                        let m = get_matrices(inputs)?;
                        let mats: Vec<SymMatrix> = m.iter().map(|m| (*m).clone()).collect();
                        let shift = SymMatrix::identity(cfg.dim);
                        ineq::va_margin(
                            &ineq::VaInputs::Matrices(mats),
                            k,
                            &ineq::VaFunctional::ShiftedDet { shift },
                            false,
                        )
                    }
                    "norm" => {
                        let pts = get_points(inputs)?;
                        ineq::va_margin(
                            &ineq::VaInputs::Points(pts),
                            k,
                            &ineq::VaFunctional::EuclideanNorm,
                            false,
                        )
                    }
                    id => {
                        let f = resolve_function(id, cfg.alpha)?;
                        let pts = get_points(inputs)?;
                        ineq::va_margin(
                            &ineq::VaInputs::Points(pts),
                            k,
                            &ineq::VaFunctional::ShiftedScalar { f, shift: cfg.alpha },
                            false,
                        )
                    }
                }
            }
            TargetId::NConv => {
                let f = scalar_function(cfg, "exp")?;
                let pts = get_scalars(inputs)?;
                divided_difference_margin(&f, &pts)
            }
            TargetId::PosDiff => {
                let f = scalar_function(cfg, "exp")?;
                let vals = get_scalars(inputs)?;
                iterated_difference_margin(&f, vals[0], &vals[1..])
            }
            TargetId::ConeDiff | TargetId::CmDiff => {
                let f = multi_function(cfg, "exp-inner")?;
                let pts = get_points(inputs)?;
                let (base, steps) = pts
                    .split_first()
                    .ok_or_else(|| Error::Config("cone difference needs a base point".into()))?;
                let raw = cone_iterated_difference_margin(&f, base, steps)?;
                if self == TargetId::CmDiff {
                    let sign = if steps.len().is_multiple_of(2) { 1.0 } else { -1.0 };
                    Ok(Margin::new(sign * raw.value, raw.scale))
                } else {
                    Ok(raw)
                }
            }
            TargetId::Sz => {
                let f = multi_function(cfg, "exp-inner")?;
                let pts = get_points(inputs)?;
                sz_double_margin(&f, &pts)
            }
            TargetId::CexPopoviciuExp => {
                let f = FunctionSpec::exp_neg(1.0);
                let steps = get_scalars(inputs)?;
                iterated_difference_margin(&f, 0.0, &steps)
            }
            TargetId::CexNegSqrt => {
                let f = MultiFunctionSpec::neg_two_sqrt();
                let pts = get_points(inputs)?;
                cone_iterated_difference_margin(&f, &pts[0], &pts[1..])
            }
            TargetId::CexCubicMonotone => {
                let f = FunctionSpec::cubic_counterexample();
                let vals = get_scalars(inputs)?;
                iterated_difference_margin(&f, vals[0], &vals[1..])
            }
        }
    }

    /// What the registered statement claims about the margins this target
    /// produces under its own sampling.
    pub fn claim(self, cfg: &SearchConfig) -> Claim {
        match self {
            TargetId::OpHh
            | TargetId::DetDiff
            | TargetId::DetHh
            | TargetId::EsymHlawka
            | TargetId::ImmHh
            | TargetId::LemmaMain
            | TargetId::SkGeneral
            | TargetId::SerreRev
            | TargetId::MinkowskiDet
            | TargetId::Va => Claim::Nonneg,
            TargetId::DetRho => {
                let half_integer = (2.0 * cfg.rho - (2.0 * cfg.rho).round()).abs() < 1e-12;
                if half_integer || cfg.rho >= (cfg.dim as f64 - 1.0) / 2.0 {
                    Claim::Nonneg
                } else {
                    Claim::Exploratory
                }
            }
            TargetId::NConv | TargetId::PosDiff => match scalar_function(cfg, "exp") {
                Ok(f) => {
                    if cfg.order <= 4 {
                        if f.claimed_convex.contains(&cfg.order) {
                            Claim::Nonneg
                        } else {
                            Claim::Violable
                        }
                    } else {
                        Claim::Exploratory
                    }
                }
                Err(_) => Claim::Exploratory,
            },
            TargetId::ConeDiff => match multi_function(cfg, "exp-inner") {
                Ok(f) => {
                    if f.posdiff_claimed.contains(&cfg.order) {
                        Claim::Nonneg
                    } else if f.id == "neg-2sqrt" && cfg.order == 2 {
                        Claim::Violable
                    } else {
                        Claim::Exploratory
                    }
                }
                Err(_) => Claim::Exploratory,
            },
            TargetId::CmDiff => match multi_function(cfg, "exp-inner") {
                Ok(f) => {
                    if f.cm_claimed {
                        Claim::Nonneg
                    } else if f.id == "neg-2sqrt" && cfg.order == 2 {
                        Claim::Violable
                    } else {
                        Claim::Exploratory
                    }
                }
                Err(_) => Claim::Exploratory,
            },
            TargetId::Sz => match multi_function(cfg, "exp-inner") {
                Ok(f) => {
                    if f.cm_claimed {
                        Claim::Nonneg
                    } else {
                        Claim::Exploratory
                    }
                }
                Err(_) => Claim::Exploratory,
            },
            TargetId::CexPopoviciuExp | TargetId::CexNegSqrt | TargetId::CexCubicMonotone => {
                Claim::Violable
            }
        }
    }
}

/// Sample the inputs of one campaign trial; deterministic in
/// `(config.seed, trial)`.
pub fn sample_trial(target: TargetId, cfg: &SearchConfig, trial: u64) -> Result<Vec<InputValue>> {
    let dist = effective_distribution(target, cfg, trial);
    let mut rng = trial_rng(cfg.seed, trial);
    let raw = target.draw_raw(cfg, &mut rng, dist);
    target.build(cfg, dist, &raw)
}

fn effective_distribution(target: TargetId, cfg: &SearchConfig, trial: u64) -> Distribution {
    // the det^(-rho) sums need strictly positive definite inputs
    if target == TargetId::DetRho {
        return Distribution::GramShift;
    }
    cfg.distribution.effective(trial)
}

#[derive(Clone, Copy)]
struct TrialStat {
    trial: u64,
    margin: f64,
    scale: f64,
    failed: bool,
}

fn run_trials(target: TargetId, cfg: &SearchConfig) -> Result<Vec<TrialStat>> {
    (0..cfg.trials)
        .into_par_iter()
        .map(|t| {
            let inputs = sample_trial(target, cfg, t)?;
            let margin = target.eval(cfg, &inputs)?;
            Ok(TrialStat {
                trial: t,
                margin: margin.value,
                scale: margin.scale,
                failed: !margin.passes(cfg.tol),
            })
        })
        .collect()
}

/// Run a randomized verification campaign for one registered inequality.
/// Reports are identical for a given `(id, config)` regardless of thread
/// count, except for the wall-time field.
pub fn run_campaign(id: &str, cfg: &SearchConfig) -> Result<CampaignReport> {
    let info = lookup(id)?;
    if cfg.trials == 0 {
        return Err(Error::Config("trials must be at least 1".into()));
    }
    let start = Instant::now();
    let stats = run_trials(info.target, cfg)?;
    let mut worst = stats[0];
    let mut failures = 0u64;
    for s in &stats {
        if s.failed {
            failures += 1;
        }
        // strict inequality keeps the lowest trial index on ties
        if s.margin < worst.margin {
            worst = *s;
        }
    }
    let witness_inputs = sample_trial(info.target, cfg, worst.trial)?;
    let elapsed_ms = start.elapsed().as_millis() as u64;
    Ok(CampaignReport {
        inequality: info.id.to_string(),
        config: cfg.clone(),
        trials: cfg.trials,
        min_margin: worst.margin,
        witness: Witness {
            trial: worst.trial,
            margin: worst.margin,
            scale: worst.scale,
            inputs: witness_inputs,
        },
        failures,
        elapsed_ms,
    })
}

/// Re-evaluate a report's witness inputs through the registered evaluator;
/// the result must reproduce the recorded margin.
pub fn replay_witness(report: &CampaignReport) -> Result<Margin> {
    let info = lookup(&report.inequality)?;
    info.target.eval(&report.config, &report.witness.inputs)
}

/// A found violation: inputs whose margin is below `-10 * tol * scale`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CexWitness {
    pub target: String,
    pub trial: u64,
    pub margin: f64,
    pub scale: f64,
    pub refined: bool,
    pub inputs: Vec<InputValue>,
}

fn violation_threshold(cfg: &SearchConfig, scale: f64) -> f64 {
    -10.0 * cfg.tol.at_scale(scale)
}

/// Search for a violation of a registered statement: seeded random
/// sampling, then coordinate-wise descent from the worst sample (20
/// halving step-size sweeps). Returns the strongest violation found, with
/// ties resolved by the lowest trial index, or `None` when nothing drops
/// below the violation threshold.
pub fn search_counterexample(id: &str, cfg: &SearchConfig) -> Result<Option<CexWitness>> {
    let info = lookup(id).map_err(|_| Error::UnknownTarget(id.to_string()))?;
    let target = info.target;
    let stats = run_trials(target, cfg)?;

    let mut worst = stats[0];
    for s in &stats {
        if s.margin < worst.margin {
            worst = *s;
        }
    }

    // local refinement from the worst sample
    let dist = effective_distribution(target, cfg, worst.trial);
    let mut rng = trial_rng(cfg.seed, worst.trial);
    let mut raw = target.draw_raw(cfg, &mut rng, dist);
    let mut refined_margin = worst.margin;
    let mut refined_scale = worst.scale;
    for step in 0..20 {
        let eta = 0.5f64.powi(step);
        for i in 0..raw.len() {
            let original = raw[i];
            let coord_scale = original.abs().max(0.25);
            for delta in [eta * coord_scale, -eta * coord_scale] {
                raw[i] = original + delta;
                let outcome = target
                    .build(cfg, dist, &raw)
                    .and_then(|inputs| target.eval(cfg, &inputs));
                match outcome {
                    Ok(m) if m.value < refined_margin => {
                        refined_margin = m.value;
                        refined_scale = m.scale;
                    }
                    _ => raw[i] = original,
                }
            }
        }
    }

    if refined_margin < worst.margin
        && refined_margin < violation_threshold(cfg, refined_scale)
    {
        let inputs = target.build(cfg, dist, &raw)?;
        let margin = target.eval(cfg, &inputs)?;
        return Ok(Some(CexWitness {
            target: info.id.to_string(),
            trial: worst.trial,
            margin: margin.value,
            scale: margin.scale,
            refined: true,
            inputs,
        }));
    }
    if worst.margin < violation_threshold(cfg, worst.scale) {
        let inputs = sample_trial(target, cfg, worst.trial)?;
        return Ok(Some(CexWitness {
            target: info.id.to_string(),
            trial: worst.trial,
            margin: worst.margin,
            scale: worst.scale,
            refined: false,
            inputs,
        }));
    }
    Ok(None)
}

/// The canonical built-in violations with frozen witness inputs, used by
/// the demo command and the acceptance suite.
pub fn builtin_counterexamples() -> Vec<(String, Vec<InputValue>, Margin)> {
    let cfg = SearchConfig::default();
    let cases = vec![
        (
            TargetId::CexPopoviciuExp,
            "cex-popoviciu-exp".to_string(),
            vec![InputValue::Scalar(1.0), InputValue::Scalar(1.0), InputValue::Scalar(1.0)],
        ),
        (
            TargetId::CexNegSqrt,
            "cex-neg-sqrt".to_string(),
            vec![
                InputValue::Point(vec![0.01, 0.01]),
                InputValue::Point(vec![1.0, 2.0]),
                InputValue::Point(vec![2.0, 1.0]),
            ],
        ),
        (
            TargetId::CexCubicMonotone,
            "cex-cubic-monotone".to_string(),
            vec![InputValue::Scalar(2.0), InputValue::Scalar(2.0)],
        ),
    ];
    cases
        .into_iter()
        .map(|(t, id, inputs)| {
            let margin = t.eval(&cfg, &inputs).expect("built-in inputs are admissible");
            (id, inputs, margin)
        })
        .collect()
}
