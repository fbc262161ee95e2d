//! Tensor-product quadrature on the reference box `(-1, 1)^n`.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::sum::pairwise_sum;
use crate::tensor::{AxisMap, MetricChart};

pub const MIN_NODES_PER_AXIS: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QuadratureRule {
    GaussLegendre,
    UniformMidpoint,
}

impl QuadratureRule {
    pub fn parse(text: &str) -> Result<Self> {
        match text.trim().to_ascii_lowercase().as_str() {
            "gauss-legendre" | "gl" => Ok(QuadratureRule::GaussLegendre),
            "uniform-midpoint" | "midpoint" => Ok(QuadratureRule::UniformMidpoint),
            other => Err(Error::Parse(format!("unknown quadrature rule `{other}`"))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            QuadratureRule::GaussLegendre => "gauss-legendre",
            QuadratureRule::UniformMidpoint => "uniform-midpoint",
        }
    }

    /// Nodes and weights on (-1, 1).
    pub fn nodes(self, k: usize) -> (Vec<f64>, Vec<f64>) {
        match self {
            QuadratureRule::GaussLegendre => gauss_legendre(k),
            QuadratureRule::UniformMidpoint => {
                let w = 2.0 / k as f64;
                ((0..k).map(|i| -1.0 + (i as f64 + 0.5) * w).collect(), vec![w; k])
            }
        }
    }
}

/// How unbounded chart axes are brought to a bounded integration box.
#[derive(Debug, Clone, PartialEq)]
pub enum Compactification {
    /// The chart's own axis maps.
    Chart,
    /// `x = center + scale * tan(pi t / 2)` on every unbounded axis.
    Tangent { scale: f64 },
    /// Replace unbounded axes by `[-cutoff, cutoff]` (non-compactified run).
    Truncate { cutoff: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureSpec {
    pub nodes_per_axis: usize,
    pub rule: QuadratureRule,
    pub compactification: Compactification,
}

impl QuadratureSpec {
    pub fn gauss(nodes_per_axis: usize) -> Self {
        Self {
            nodes_per_axis,
            rule: QuadratureRule::GaussLegendre,
            compactification: Compactification::Chart,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.nodes_per_axis < MIN_NODES_PER_AXIS {
            return Err(Error::InvalidParameter(format!(
                "nodes_per_axis must be >= {MIN_NODES_PER_AXIS}, got {}",
                self.nodes_per_axis
            )));
        }
        match self.compactification {
            Compactification::Tangent { scale } if !(scale > 0.0) => Err(Error::InvalidParameter(format!(
                "compactification scale must be > 0, got {scale}"
            ))),
            Compactification::Truncate { cutoff } if !(cutoff > 0.0) => Err(Error::InvalidParameter(format!(
                "truncation cutoff must be > 0, got {cutoff}"
            ))),
            _ => Ok(()),
        }
    }

    /// Same rule and substitution at half the resolution (floored at the minimum).
    pub fn halved(&self) -> Self {
        Self {
            nodes_per_axis: (self.nodes_per_axis / 2).max(MIN_NODES_PER_AXIS),
            ..self.clone()
        }
    }

    pub fn axis_maps(&self, chart: &MetricChart) -> Vec<AxisMap> {
        chart
            .domain()
            .iter()
            .zip(chart.axis_maps())
            .map(|(iv, map)| {
                if iv.is_bounded() {
                    return *map;
                }
                match self.compactification {
                    Compactification::Chart => *map,
                    Compactification::Tangent { scale } => AxisMap::Tangent { center: 0.0, scale },
                    Compactification::Truncate { cutoff } => AxisMap::Affine {
                        lo: iv.lo.max(-cutoff),
                        hi: iv.hi.min(cutoff),
                    },
                }
            })
            .collect()
    }
}

/// Gauss-Legendre nodes (ascending) and weights by Newton iteration on `P_k`.
pub fn gauss_legendre(k: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; k];
    let mut w = vec![0.0; k];
    let kf = k as f64;
    for i in 0..k.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (kf + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p1, mut p2) = (1.0, 0.0);
            for j in 1..=k {
                let jf = j as f64;
                let p3 = p2;
                p2 = p1;
                p1 = ((2.0 * jf - 1.0) * z * p2 - (jf - 1.0) * p3) / jf;
            }
            dp = kf * (z * p1 - p2) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[k - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[k - 1 - i] = wi;
    }
    (x, w)
}

/// One quadrature node mapped into the chart.
#[derive(Debug, Clone)]
pub struct Node {
    pub point: Vec<f64>,
    /// Reference weight times the Jacobian of the substitution (no volume density).
    pub weight: f64,
    /// All reference coordinates lie in `[-INTERIOR_BOX, INTERIOR_BOX]`.
    pub interior: bool,
}

/// Pointwise extrema (scalar curvature, structure residual) are taken over
/// nodes in this reference sub-box; far-out nodes of compactified axes lose
/// too many digits to cancellation for a pointwise maximum to be meaningful,
/// while their integral weight is negligible.
pub const INTERIOR_BOX: f64 = 0.9;

/// Tensor-product grid, lazily indexed in row-major order (last axis fastest).
pub struct Grid {
    maps: Vec<AxisMap>,
    nodes: Vec<f64>,
    weights: Vec<f64>,
    dim: usize,
}

impl Grid {
    pub fn new(chart: &MetricChart, spec: &QuadratureSpec) -> Result<Self> {
        spec.validate()?;
        let (nodes, weights) = spec.rule.nodes(spec.nodes_per_axis);
        Ok(Self {
            maps: spec.axis_maps(chart),
            nodes,
            weights,
            dim: chart.dim(),
        })
    }

    pub fn len(&self) -> usize {
        self.nodes.len().pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn node(&self, mut flat: usize) -> Node {
        let k = self.nodes.len();
        let mut point = vec![0.0; self.dim];
        let mut weight = 1.0;
        let mut interior = true;
        for a in (0..self.dim).rev() {
            let i = flat % k;
            flat /= k;
            interior &= self.nodes[i].abs() <= INTERIOR_BOX;
            let (x, jac) = self.maps[a].map(self.nodes[i]);
            point[a] = x;
            weight *= self.weights[i] * jac;
        }
        Node {
            point,
            weight,
            interior,
        }
    }

    /// Evaluate `f` at every node (in parallel) and reduce each component
    /// according to `kinds`. Summed components are added pairwise within
    /// slabs of fixed first-axis index and then across slabs, so the result
    /// does not depend on the thread count.
    pub fn reduce<const K: usize, F>(&self, kinds: [Reduce; K], f: F) -> Result<[f64; K]>
    where
        F: Fn(&Node) -> Result<[f64; K]> + Sync,
    {
        let k = self.nodes.len();
        let per_slab = self.len() / k.max(1);
        let slabs: Vec<[f64; K]> = (0..k)
            .into_par_iter()
            .map(|s| {
                let mut cols: Vec<Vec<f64>> = vec![Vec::with_capacity(per_slab); K];
                for flat in s * per_slab..(s + 1) * per_slab {
                    let v = f(&self.node(flat))?;
                    for (c, x) in cols.iter_mut().zip(v) {
                        c.push(x);
                    }
                }
                let mut out = [0.0; K];
                for ((o, c), kind) in out.iter_mut().zip(&cols).zip(kinds) {
                    *o = kind.apply(c);
                }
                Ok(out)
            })
            .collect::<Result<_>>()?;
        let mut out = [0.0; K];
        for (c, (o, kind)) in out.iter_mut().zip(kinds).enumerate() {
            let col: Vec<f64> = slabs.iter().map(|s| s[c]).collect();
            *o = kind.apply(&col);
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Reduce {
    Sum,
    Min,
    Max,
}

impl Reduce {
    fn apply(self, v: &[f64]) -> f64 {
        match self {
            Reduce::Sum => pairwise_sum(v),
            Reduce::Min => v.iter().copied().fold(f64::INFINITY, f64::min),
            Reduce::Max => v.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        }
    }
}

/// `int field dV_g` over the chart.
pub fn integrate<F>(chart: &MetricChart, field: F, quad: &QuadratureSpec) -> Result<f64>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    let grid = Grid::new(chart, quad)?;
    let [v] = grid.reduce([Reduce::Sum], |node| {
        chart.check_point(&node.point)?;
        let g = chart.metric(&node.point);
        let det = g.determinant();
        if !(det > 0.0) {
            return Err(Error::NotPositiveDefinite {
                point: node.point.clone(),
            });
        }
        Ok([node.weight * det.sqrt() * field(&node.point)])
    })?;
    Ok(v)
}
