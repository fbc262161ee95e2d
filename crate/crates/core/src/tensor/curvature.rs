//! Levi-Civita connection, Riemann/Ricci/Weyl tensors and the self-dual
//! splitting of the Weyl operator in dimension four.
//!
//! Conventions: `R_ijkl = <R(d_i, d_j) d_k, d_l>` with
//! `R(X, Y) = [nabla_X, nabla_Y] - nabla_[X,Y]`, so `R_ijji` is the
//! sectional curvature of the (i, j) plane (positive on round spheres) and
//! `Ric_ij = g^kl R_iklj`. The Laplacian is the trace of the Hessian.
//! Norms of `W+` and `W-` are Frobenius norms of the 3x3 operators taken in
//! a unit bivector basis, i.e. the sum of squared eigenvalues; with this
//! normalisation `|W|^2 = |W+|^2 + |W-|^2 = (1/4) W_ijkl W^ijkl`.

use nalgebra::{DMatrix, Matrix3, SymmetricEigen};

use crate::error::{Error, Result};
use crate::tensor::chart::{DerivativeSource, MetricChart, MetricJet};

/// Christoffel symbols of the second kind, `get(k, i, j) = Gamma^k_ij`.
#[derive(Debug, Clone, PartialEq)]
pub struct Christoffel {
    n: usize,
    data: Vec<f64>,
}

impl Christoffel {
    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, k: usize, i: usize, j: usize) -> f64 {
        self.data[(k * self.n + i) * self.n + j]
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Rank-4 covariant tensor stored densely.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor4 {
    n: usize,
    data: Vec<f64>,
}

impl Tensor4 {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![0.0; n * n * n * n],
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    fn idx(&self, i: usize, j: usize, k: usize, l: usize) -> usize {
        ((i * self.n + j) * self.n + k) * self.n + l
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize, l: usize) -> f64 {
        self.data[self.idx(i, j, k, l)]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, k: usize, l: usize, v: f64) {
        let id = self.idx(i, j, k, l);
        self.data[id] = v;
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Components in the frame whose vectors are the columns of `e`.
    pub fn in_frame(&self, e: &DMatrix<f64>) -> Tensor4 {
        let n = self.n;
        let ecols = row_major(e);
        let mut cur = self.data.clone();
        let mut next = vec![0.0; cur.len()];
        // contract one slot at a time, viewing the data as (outer, n, inner)
        for slot in 0..4u32 {
            let outer = n.pow(slot);
            let inner = n.pow(3 - slot);
            next.iter_mut().for_each(|v| *v = 0.0);
            for o in 0..outer {
                for i in 0..n {
                    let src = &cur[(o * n + i) * inner..(o * n + i + 1) * inner];
                    for a in 0..n {
                        let c = ecols[i * n + a];
                        let dst = &mut next[(o * n + a) * inner..(o * n + a + 1) * inner];
                        for (d, s) in dst.iter_mut().zip(src) {
                            *d += c * s;
                        }
                    }
                }
            }
            std::mem::swap(&mut cur, &mut next);
        }
        Tensor4 { n, data: cur }
    }
}

/// Eigenvalues of `W+` and `W-` (ascending) in an oriented orthonormal frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeylSplit {
    pub plus: [f64; 3],
    pub minus: [f64; 3],
}

impl WeylSplit {
    pub fn plus_norm_sq(&self) -> f64 {
        self.plus.iter().map(|w| w * w).sum()
    }

    pub fn minus_norm_sq(&self) -> f64 {
        self.minus.iter().map(|w| w * w).sum()
    }
}

/// Pointwise squared norms used by the integral formulas.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CurvatureNorms {
    pub w_plus_sq: f64,
    pub w_minus_sq: f64,
    pub w_sq: f64,
    pub traceless_ricci_sq: f64,
    pub ricci_sq: f64,
}

/// All pointwise curvature data at one chart point.
#[derive(Debug, Clone)]
pub struct CurvatureBundle {
    pub point: Vec<f64>,
    pub metric: DMatrix<f64>,
    pub metric_inv: DMatrix<f64>,
    pub christoffel: Christoffel,
    pub riemann: Tensor4,
    pub ricci: DMatrix<f64>,
    pub ricci_endo: DMatrix<f64>,
    pub scalar: f64,
    pub traceless_ricci: DMatrix<f64>,
    pub weyl: Tensor4,
    /// Present only in dimension four.
    pub split: Option<WeylSplit>,
    pub norms: CurvatureNorms,
    pub vol_density: f64,
    /// Oriented orthonormal frame (columns) used for the self-dual split.
    pub frame: DMatrix<f64>,
    pub source: DerivativeSource,
}

impl CurvatureBundle {
    pub fn dim(&self) -> usize {
        self.metric.nrows()
    }

    /// `Ric(v, v)` for a coordinate vector `v`.
    pub fn ricci_quadratic(&self, v: &[f64]) -> f64 {
        let n = self.dim();
        let mut acc = 0.0;
        for i in 0..n {
            for j in 0..n {
                acc += self.ricci[(i, j)] * v[i] * v[j];
            }
        }
        acc
    }

    /// Eigenvalues of the Ricci endomorphism, ascending.
    pub fn ricci_eigenvalues(&self) -> Vec<f64> {
        let ric_frame = self.frame.transpose() * &self.ricci * &self.frame;
        let sym = (&ric_frame + ric_frame.transpose()) * 0.5;
        let mut ev: Vec<f64> = SymmetricEigen::new(sym).eigenvalues.iter().copied().collect();
        ev.sort_by(|a, b| a.total_cmp(b));
        ev
    }

    /// Largest violation of the algebraic Riemann symmetries and the first
    /// Bianchi identity.
    pub fn symmetry_residual(&self) -> f64 {
        let r = &self.riemann;
        let n = self.dim();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        let v = r.get(i, j, k, l);
                        worst = worst
                            .max((v + r.get(j, i, k, l)).abs())
                            .max((v + r.get(i, j, l, k)).abs())
                            .max((v - r.get(k, l, i, j)).abs())
                            .max((v + r.get(i, k, l, j) + r.get(i, l, j, k)).abs());
                    }
                }
            }
        }
        worst
    }

    /// Largest `|g^ik W_ijkl|` over all (j, l).
    pub fn weyl_trace_residual(&self) -> f64 {
        let n = self.dim();
        let gi = &self.metric_inv;
        let mut worst = 0.0f64;
        for j in 0..n {
            for l in 0..n {
                let mut acc = 0.0;
                for i in 0..n {
                    for k in 0..n {
                        acc += gi[(i, k)] * self.weyl.get(i, j, k, l);
                    }
                }
                worst = worst.max(acc.abs());
            }
        }
        worst
    }

    /// `|Ric - g^kl R_iklj|`, confirming the contraction convention.
    pub fn ricci_contraction_residual(&self) -> f64 {
        contract_ricci(&self.riemann, &self.metric_inv)
            .iter()
            .zip(self.ricci.iter())
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }

    /// `(1/4) W_ijkl W^ijkl`, computed independently of the eigenvalues.
    pub fn weyl_tensor_norm_sq(&self) -> f64 {
        let wf = self.weyl.in_frame(&self.frame);
        0.25 * wf.data.iter().map(|v| v * v).sum::<f64>()
    }
}

/// Levi-Civita connection at `p`.
pub fn christoffel(chart: &MetricChart, p: &[f64]) -> Result<Christoffel> {
    let (jet, _) = chart.jet(p)?;
    let ginv = invert(&jet.g, p)?;
    Ok(christoffel_from_jet(&jet, &ginv))
}

fn invert(g: &DMatrix<f64>, p: &[f64]) -> Result<DMatrix<f64>> {
    g.clone()
        .cholesky()
        .map(|c| c.inverse())
        .ok_or_else(|| Error::NotPositiveDefinite { point: p.to_vec() })
}

/// Jet components copied into row-major flat arrays.
struct FlatJet {
    n: usize,
    /// `dg[(k * n + i) * n + j] = d_k g_ij`.
    dg: Vec<f64>,
    /// `d2g[((k * n + l) * n + i) * n + j] = d_k d_l g_ij`.
    d2g: Vec<f64>,
}

impl FlatJet {
    fn new(jet: &MetricJet) -> Self {
        let n = jet.dim();
        let flat = |m: &DMatrix<f64>, out: &mut Vec<f64>| {
            for i in 0..n {
                for j in 0..n {
                    out.push(m[(i, j)]);
                }
            }
        };
        let mut dg = Vec::with_capacity(n * n * n);
        for m in &jet.dg {
            flat(m, &mut dg);
        }
        let mut d2g = Vec::with_capacity(n * n * n * n);
        for m in &jet.d2g {
            flat(m, &mut d2g);
        }
        Self { n, dg, d2g }
    }

    /// First-kind symbols `Gamma_{l,ij} = (1/2)(d_i g_lj + d_j g_li - d_l g_ij)`
    /// stored at `(l * n + i) * n + j`.
    fn first_kind(&self) -> Vec<f64> {
        let n = self.n;
        let d = |k: usize, i: usize, j: usize| self.dg[(k * n + i) * n + j];
        let mut out = vec![0.0; n * n * n];
        for l in 0..n {
            for i in 0..n {
                for j in 0..n {
                    out[(l * n + i) * n + j] = 0.5 * (d(i, l, j) + d(j, l, i) - d(l, i, j));
                }
            }
        }
        out
    }
}

fn christoffel_from_first_kind(n: usize, g1: &[f64], ginv: &[f64]) -> Christoffel {
    let nn = n * n;
    let mut data = vec![0.0; n * nn];
    for k in 0..n {
        let out = &mut data[k * nn..(k + 1) * nn];
        for l in 0..n {
            let c = ginv[k * n + l];
            for (o, v) in out.iter_mut().zip(&g1[l * nn..(l + 1) * nn]) {
                *o += c * v;
            }
        }
    }
    Christoffel { n, data }
}

fn christoffel_from_jet(jet: &MetricJet, ginv: &DMatrix<f64>) -> Christoffel {
    let fj = FlatJet::new(jet);
    christoffel_from_first_kind(fj.n, &fj.first_kind(), &row_major(ginv))
}

fn row_major(m: &DMatrix<f64>) -> Vec<f64> {
    let (r, c) = m.shape();
    let mut out = Vec::with_capacity(r * c);
    for i in 0..r {
        for j in 0..c {
            out.push(m[(i, j)]);
        }
    }
    out
}

fn riemann_from_flat(fj: &FlatJet, g1: &[f64], gamma: &Christoffel) -> Tensor4 {
    let n = fj.n;
    let d2 = |k: usize, l: usize, i: usize, j: usize| fj.d2g[((k * n + l) * n + i) * n + j];
    let gf = |l: usize, i: usize, j: usize| g1[(l * n + i) * n + j];
    let gs = &gamma.data;
    let mut r = Tensor4::zeros(n);
    let at = |i: usize, j: usize, k: usize, l: usize| ((i * n + j) * n + k) * n + l;
    for i in 0..n {
        for j in i + 1..n {
            for k in 0..n {
                for l in k + 1..n {
                    let second = 0.5 * (d2(i, k, l, j) - d2(i, l, j, k) - d2(j, k, l, i) + d2(j, l, i, k));
                    let mut quad = 0.0;
                    for m in 0..n {
                        quad += gf(m, j, l) * gs[(m * n + i) * n + k] - gf(m, i, l) * gs[(m * n + j) * n + k];
                    }
                    let v = second + quad;
                    r.data[at(i, j, k, l)] = v;
                    r.data[at(j, i, k, l)] = -v;
                    r.data[at(i, j, l, k)] = -v;
                    r.data[at(j, i, l, k)] = v;
                }
            }
        }
    }
    r
}

fn contract_ricci(riemann: &Tensor4, ginv: &DMatrix<f64>) -> DMatrix<f64> {
    let n = riemann.dim();
    let gi = row_major(ginv);
    let mut ric = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let mut acc = 0.0;
            for k in 0..n {
                for l in 0..n {
                    acc += gi[k * n + l] * riemann.data[((i * n + k) * n + l) * n + j];
                }
            }
            ric[(i, j)] = acc;
        }
    }
    (&ric + ric.transpose()) * 0.5
}

fn weyl_from(riemann: &Tensor4, g: &DMatrix<f64>, ric: &DMatrix<f64>, scalar: f64) -> Tensor4 {
    let n = riemann.dim();
    let nf = n as f64;
    let mut w = Tensor4::zeros(n);
    if n < 3 {
        return w;
    }
    let (g, ric) = (row_major(g), row_major(ric));
    let a = 1.0 / (nf - 2.0);
    let b = scalar / ((nf - 1.0) * (nf - 2.0));
    let at = |i: usize, j: usize, k: usize, l: usize| ((i * n + j) * n + k) * n + l;
    for i in 0..n {
        for j in i + 1..n {
            for k in 0..n {
                for l in k + 1..n {
                    let kn = ric[i * n + k] * g[j * n + l] + ric[j * n + l] * g[i * n + k]
                        - ric[i * n + l] * g[j * n + k]
                        - ric[j * n + k] * g[i * n + l];
                    let gg = g[i * n + k] * g[j * n + l] - g[i * n + l] * g[j * n + k];
                    let v = riemann.data[at(i, j, k, l)] + a * kn - b * gg;
                    w.data[at(i, j, k, l)] = v;
                    w.data[at(j, i, k, l)] = -v;
                    w.data[at(i, j, l, k)] = -v;
                    w.data[at(j, i, l, k)] = v;
                }
            }
        }
    }
    w
}

/// Gram-Schmidt on the coordinate frame in index order; the last vector is
/// negated for negative chart orientation.
fn orthonormal_frame(g: &DMatrix<f64>, orientation_sign: f64, p: &[f64]) -> Result<DMatrix<f64>> {
    let n = g.nrows();
    let gm = row_major(g);
    let inner = |u: &[f64], v: &[f64]| {
        let mut acc = 0.0;
        for i in 0..n {
            for j in 0..n {
                acc += u[i] * gm[i * n + j] * v[j];
            }
        }
        acc
    };
    let mut cols: Vec<Vec<f64>> = Vec::with_capacity(n);
    for a in 0..n {
        let mut v = vec![0.0; n];
        v[a] = 1.0;
        for eb in &cols {
            let proj = inner(&v, eb);
            for (vi, e) in v.iter_mut().zip(eb) {
                *vi -= proj * e;
            }
        }
        let norm_sq = inner(&v, &v);
        if !(norm_sq > 0.0) {
            return Err(Error::NotPositiveDefinite { point: p.to_vec() });
        }
        let s = 1.0 / norm_sq.sqrt();
        v.iter_mut().for_each(|x| *x *= s);
        cols.push(v);
    }
    if orientation_sign < 0.0 {
        cols[n - 1].iter_mut().for_each(|x| *x = -*x);
    }
    Ok(DMatrix::from_fn(n, n, |i, a| cols[a][i]))
}

/// Unit bivector bases of Lambda^+ and Lambda^- as coefficient lists over
/// pairs (a, b) with a < b: `(e12 +- e34)/sqrt2`, `(e13 +- e42)/sqrt2`,
/// `(e14 +- e23)/sqrt2`.
fn bivector_basis(sign: f64) -> [[(usize, usize, f64); 2]; 3] {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    [
        [(0, 1, s), (2, 3, sign * s)],
        [(0, 2, s), (1, 3, -sign * s)],
        [(0, 3, s), (1, 2, sign * s)],
    ]
}

const PAIRS: [(usize, usize); 6] = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];

fn pair_index(a: usize, b: usize) -> usize {
    PAIRS.iter().position(|&p| p == (a, b)).expect("ordered pair")
}

/// `F[(a,b)][(c,d)] = W(e_a, e_b, e_d, e_c)` for `a < b`, `c < d`, computed as
/// `E Wc E^T` with `Wc[(i,j)][(k,l)] = W_ijlk` and `E` the frame bivectors.
fn weyl_pair_matrix(w: &Tensor4, frame: &DMatrix<f64>) -> [[f64; 6]; 6] {
    let mut wc = [[0.0; 6]; 6];
    let mut e = [[0.0; 6]; 6];
    for (p, &(i, j)) in PAIRS.iter().enumerate() {
        for (q, &(k, l)) in PAIRS.iter().enumerate() {
            wc[p][q] = w.get(i, j, l, k);
            e[p][q] = frame[(k, i)] * frame[(l, j)] - frame[(l, i)] * frame[(k, j)];
        }
    }
    let mut tmp = [[0.0; 6]; 6];
    for p in 0..6 {
        for q in 0..6 {
            tmp[p][q] = (0..6).map(|r| e[p][r] * wc[r][q]).sum();
        }
    }
    let mut out = [[0.0; 6]; 6];
    for p in 0..6 {
        for q in 0..6 {
            out[p][q] = (0..6).map(|r| tmp[p][r] * e[q][r]).sum();
        }
    }
    out
}

fn weyl_block(wp: &[[f64; 6]; 6], sign: f64) -> [f64; 3] {
    let basis = bivector_basis(sign);
    let mut m = Matrix3::<f64>::zeros();
    for p in 0..3 {
        for q in 0..3 {
            let mut acc = 0.0;
            for &(a, b, cp) in &basis[p] {
                for &(c, d, cq) in &basis[q] {
                    // operator sign matches R_abba > 0 on spheres
                    acc += cp * cq * wp[pair_index(a, b)][pair_index(c, d)];
                }
            }
            m[(p, q)] = acc;
        }
    }
    let m = (m + m.transpose()) * 0.5;
    let ev = SymmetricEigen::new(m).eigenvalues;
    let mut out = [ev[0], ev[1], ev[2]];
    out.sort_by(|a, b| a.total_cmp(b));
    out
}

/// Full curvature data at `p`.
pub fn curvature(chart: &MetricChart, p: &[f64]) -> Result<CurvatureBundle> {
    let (jet, source) = chart.jet(p)?;
    curvature_from_jet(&jet, source, chart.orientation().sign(), p)
}

pub(crate) fn curvature_from_jet(
    jet: &MetricJet,
    source: DerivativeSource,
    orientation_sign: f64,
    p: &[f64],
) -> Result<CurvatureBundle> {
    let n = jet.dim();
    let g = jet.g.clone();
    let ginv = invert(&g, p)?;
    let fj = FlatJet::new(jet);
    let g1 = fj.first_kind();
    let gamma = christoffel_from_first_kind(n, &g1, &row_major(&ginv));
    let riemann = riemann_from_flat(&fj, &g1, &gamma);
    let ricci = contract_ricci(&riemann, &ginv);
    let ricci_endo = &ginv * &ricci;
    let scalar = ricci_endo.trace();
    let traceless_ricci = &ricci - &g * (scalar / n as f64);
    let weyl = weyl_from(&riemann, &g, &ricci, scalar);
    let frame = orthonormal_frame(&g, orientation_sign, p)?;

    let split = if n == 4 {
        let wp = weyl_pair_matrix(&weyl, &frame);
        Some(WeylSplit {
            plus: weyl_block(&wp, 1.0),
            minus: weyl_block(&wp, -1.0),
        })
    } else {
        None
    };

    let tr_frame = frame.transpose() * &traceless_ricci * &frame;
    let traceless_ricci_sq = tr_frame.iter().map(|v| v * v).sum::<f64>();
    let ricci_sq = traceless_ricci_sq + scalar * scalar / n as f64;
    let norms = match split {
        Some(s) => CurvatureNorms {
            w_plus_sq: s.plus_norm_sq(),
            w_minus_sq: s.minus_norm_sq(),
            w_sq: s.plus_norm_sq() + s.minus_norm_sq(),
            traceless_ricci_sq,
            ricci_sq,
        },
        None => {
            let wf = weyl.in_frame(&frame);
            CurvatureNorms {
                w_sq: 0.25 * wf.data.iter().map(|v| v * v).sum::<f64>(),
                traceless_ricci_sq,
                ricci_sq,
                ..Default::default()
            }
        }
    };
    let vol_density = g.determinant().sqrt();

    Ok(CurvatureBundle {
        point: p.to_vec(),
        metric: g,
        metric_inv: ginv,
        christoffel: gamma,
        riemann,
        ricci,
        ricci_endo,
        scalar,
        traceless_ricci,
        weyl,
        split,
        norms,
        vol_density,
        frame,
        source,
    })
}

/// How points are chosen for sampled extrema and property checks.
#[derive(Debug, Clone, PartialEq)]
pub enum Sampler {
    /// Midpoint grid of the reference box, mapped through the chart's axis maps.
    Grid {
        per_axis: usize,
    },
    /// Uniform reference-box samples in (-0.9, 0.9)^n with a fixed seed.
    Random {
        count: usize,
        seed: u64,
    },
    Points(Vec<Vec<f64>>),
}

impl Sampler {
    pub fn points(&self, chart: &MetricChart) -> Vec<Vec<f64>> {
        use rand::{Rng, SeedableRng};
        let n = chart.dim();
        match self {
            Sampler::Grid { per_axis } => {
                let k = *per_axis;
                if k == 0 {
                    return Vec::new();
                }
                let total = k.pow(n as u32);
                (0..total)
                    .map(|mut flat| {
                        let t: Vec<f64> = (0..n)
                            .map(|_| {
                                let i = flat % k;
                                flat /= k;
                                -1.0 + (2.0 * i as f64 + 1.0) / k as f64
                            })
                            .collect();
                        chart.from_reference(&t).0
                    })
                    .collect()
            }
            Sampler::Random { count, seed } => {
                let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(*seed);
                (0..*count)
                    .map(|_| {
                        let t: Vec<f64> = (0..n).map(|_| rng.gen_range(-0.9..0.9)).collect();
                        chart.from_reference(&t).0
                    })
                    .collect()
            }
            Sampler::Points(p) => p.clone(),
        }
    }
}

/// Extremes of the Ricci endomorphism spectrum over sampled points.
#[derive(Debug, Clone, PartialEq)]
pub struct RicciExtremes {
    /// Smallest Ricci eigenvalue seen.
    pub min: f64,
    pub min_point: Vec<f64>,
    /// Largest Ricci eigenvalue seen.
    pub max: f64,
    pub max_point: Vec<f64>,
}

pub fn ricci_extremes(chart: &MetricChart, sampler: &Sampler) -> Result<RicciExtremes> {
    use rayon::prelude::*;
    let pts = sampler.points(chart);
    if pts.is_empty() {
        return Err(Error::EmptySample);
    }
    let spectra: Vec<(f64, f64)> = pts
        .par_iter()
        .map(|p| {
            let ev = curvature(chart, p)?.ricci_eigenvalues();
            Ok((ev[0], ev[ev.len() - 1]))
        })
        .collect::<Result<_>>()?;
    let mut out = RicciExtremes {
        min: f64::INFINITY,
        min_point: Vec::new(),
        max: f64::NEG_INFINITY,
        max_point: Vec::new(),
    };
    for (p, (lo, hi)) in pts.iter().zip(spectra) {
        if lo < out.min {
            out.min = lo;
            out.min_point = p.clone();
        }
        if hi > out.max {
            out.max = hi;
            out.max_point = p.clone();
        }
    }
    Ok(out)
}

/// Write one CSV row per point: coordinates, R, |W+|^2, |W-|^2, |Ric0|^2, sqrt det g.
pub fn write_curvature_csv<W: std::io::Write>(chart: &MetricChart, points: &[Vec<f64>], out: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(out);
    let n = chart.dim();
    let mut header: Vec<String> = (0..n).map(|i| format!("x{}", i + 1)).collect();
    header.extend(
        ["R", "w_plus_sq", "w_minus_sq", "traceless_ricci_sq", "vol_density"]
            .iter()
            .map(|s| s.to_string()),
    );
    wtr.write_record(&header)?;
    for p in points {
        let b = curvature(chart, p)?;
        let mut row: Vec<String> = p.iter().map(|v| format!("{v:.12e}")).collect();
        for v in [
            b.scalar,
            b.norms.w_plus_sq,
            b.norms.w_minus_sq,
            b.norms.traceless_ricci_sq,
            b.vol_density,
        ] {
            row.push(format!("{v:.12e}"));
        }
        wtr.write_record(&row)?;
    }
    wtr.flush()?;
    Ok(())
}
