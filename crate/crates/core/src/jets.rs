//! Finite-difference jets of maps from the punctured disk into `R^m`.
//!
//! Steps are relative to `|x|` and rounded down to a power of two, so grid
//! offsets are exact in binary and affine maps are differentiated exactly.
//! Each derivative is a tensor product of fourth-order central stencils,
//! improved by one Richardson halving.

use std::collections::HashMap;
use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use dashmap::DashMap;

use crate::error::{Bound, LabError, Result};

pub const DEFAULT_KAPPA: f64 = 1e-2;

pub type Point = [f64; 2];

pub type EvalFn = dyn Fn(Point) -> Result<Vec<f64>> + Send + Sync;

static NEXT_FIELD_ID: AtomicU64 = AtomicU64::new(1);

fn fresh_id() -> u64 {
    NEXT_FIELD_ID.fetch_add(1, Ordering::Relaxed)
}

type CacheKey = (u64, u64, u64, u64, usize);

/// Concurrent memo of computed jets, keyed on field, point, step factor and
/// order.
#[derive(Default)]
pub struct JetCache {
    map: DashMap<CacheKey, Arc<Jet>>,
}

impl JetCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn clear(&self) {
        self.map.clear();
    }
}

/// An evaluatable map of the punctured disk `r_min <= |x| <= r_max` into `R^m`.
#[derive(Clone)]
pub struct ImmersionField {
    id: u64,
    name: String,
    dim: usize,
    r_min: f64,
    r_max: f64,
    branch_order: Option<u32>,
    kappa: f64,
    eval: Arc<EvalFn>,
    cache: Option<Arc<JetCache>>,
}

impl fmt::Debug for ImmersionField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ImmersionField")
            .field("name", &self.name)
            .field("dim", &self.dim)
            .field("r_min", &self.r_min)
            .field("r_max", &self.r_max)
            .field("branch_order", &self.branch_order)
            .field("kappa", &self.kappa)
            .finish()
    }
}

impl ImmersionField {
    pub fn new<F>(name: impl Into<String>, dim: usize, r_min: f64, r_max: f64, eval: F) -> Self
    where
        F: Fn(Point) -> Result<Vec<f64>> + Send + Sync + 'static,
    {
        assert!(r_min > 0.0 && r_min < r_max, "bad domain [{r_min}, {r_max}]");
        ImmersionField {
            id: fresh_id(),
            name: name.into(),
            dim,
            r_min,
            r_max,
            branch_order: None,
            kappa: DEFAULT_KAPPA,
            eval: Arc::new(eval),
            cache: None,
        }
    }

    pub fn with_branch_order(mut self, theta0: u32) -> Self {
        self.branch_order = Some(theta0);
        self
    }

    /// Same map with a different relative step factor.
    pub fn with_kappa(mut self, kappa: f64) -> Self {
        assert!(kappa > 0.0 && kappa <= 0.1, "kappa {kappa} outside (0, 0.1]");
        self.kappa = kappa;
        self
    }

    pub fn with_cache(mut self, cache: Arc<JetCache>) -> Self {
        self.cache = Some(cache);
        self
    }

    pub fn without_cache(mut self) -> Self {
        self.cache = None;
        self
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn id(&self) -> u64 {
        self.id
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn r_min(&self) -> f64 {
        self.r_min
    }

    pub fn r_max(&self) -> f64 {
        self.r_max
    }

    pub fn branch_order(&self) -> Option<u32> {
        self.branch_order
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn cache(&self) -> Option<&Arc<JetCache>> {
        self.cache.as_ref()
    }

    pub fn eval(&self, x: Point) -> Result<Vec<f64>> {
        let r = x[0].hypot(x[1]);
        if r < self.r_min {
            return Err(LabError::OutsideDomain {
                radius: r,
                bound: Bound::Inner,
                limit: self.r_min,
            });
        }
        if r > self.r_max {
            return Err(LabError::OutsideDomain {
                radius: r,
                bound: Bound::Outer,
                limit: self.r_max,
            });
        }
        (self.eval)(x)
    }

    /// Raw access to the underlying map for constructors that compose fields.
    pub(crate) fn raw(&self) -> Arc<EvalFn> {
        Arc::clone(&self.eval)
    }
}

/// Value and partial derivatives up to `order` at one point.
#[derive(Debug, Clone)]
pub struct Jet {
    pub order: usize,
    pub x: Point,
    pub step: f64,
    pub value: Vec<f64>,
    partials: Vec<Vec<f64>>,
    errors: Vec<f64>,
}

fn partial_index(a: usize, b: usize) -> usize {
    let k = a + b;
    assert!((1..=3).contains(&k), "derivative order {k} outside 1..=3");
    k * (k + 1) / 2 - 1 + b
}

/// All multi-indices `(a, b)` with `1 <= a + b <= order`, in storage order.
pub fn multi_indices(order: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for k in 1..=order {
        for b in 0..=k {
            out.push((k - b, b));
        }
    }
    out
}

impl Jet {
    /// `∂_1^a ∂_2^b` of the field.
    pub fn partial(&self, a: usize, b: usize) -> &[f64] {
        assert!(a + b <= self.order, "jet of order {} lacks ({a},{b})", self.order);
        &self.partials[partial_index(a, b)]
    }

    pub fn error(&self, a: usize, b: usize) -> f64 {
        assert!(a + b <= self.order);
        self.errors[partial_index(a, b)]
    }

    /// First derivative along axis `j` in {0, 1}.
    pub fn d1(&self, j: usize) -> &[f64] {
        match j {
            0 => self.partial(1, 0),
            1 => self.partial(0, 1),
            _ => panic!("axis {j} out of range"),
        }
    }

    /// Second derivative `∂_i ∂_j`, axes in {0, 1}.
    pub fn d2(&self, i: usize, j: usize) -> &[f64] {
        let a = (i == 0) as usize + (j == 0) as usize;
        self.partial(a, 2 - a)
    }

    pub fn max_error(&self) -> f64 {
        self.errors.iter().cloned().fold(0.0, f64::max)
    }
}

/// Largest power of two not exceeding `kappa * r`.
pub fn relative_step(kappa: f64, r: f64) -> f64 {
    let t = kappa * r;
    assert!(t > 0.0 && t.is_finite(), "step from kappa {kappa}, r {r}");
    2f64.powi(t.log2().floor() as i32)
}

const D1: [f64; 5] = [1.0, -8.0, 0.0, 8.0, -1.0];
const D2: [f64; 5] = [-1.0, 16.0, -30.0, 16.0, -1.0];
const D3: [f64; 7] = [1.0, -8.0, 13.0, 0.0, -13.0, 8.0, -1.0];

/// Nonzero integer weights of the 1-D stencil for derivative order `a`, as
/// `(offset, weight)`, and their common denominator. Integer weights keep
/// affine maps exact.
fn stencil(a: usize) -> (Vec<(i32, f64)>, f64) {
    let (w, half, denom): (&[f64], i32, f64) = match a {
        0 => (&[1.0], 0, 1.0),
        1 => (&D1, 2, 12.0),
        2 => (&D2, 2, 12.0),
        3 => (&D3, 3, 8.0),
        _ => unreachable!(),
    };
    let taps = w
        .iter()
        .enumerate()
        .filter(|(_, c)| **c != 0.0)
        .map(|(i, c)| (i as i32 - half, *c))
        .collect();
    (taps, denom)
}

fn stencil_reach(order: usize) -> f64 {
    match order {
        1 => 2.0,
        2 => 2.0 * std::f64::consts::SQRT_2,
        _ => 3.0,
    }
}

fn check_stencil(field: &ImmersionField, x: Point, reach: f64) -> Result<()> {
    let r = x[0].hypot(x[1]);
    if r - reach < field.r_min {
        return Err(LabError::StencilOutOfDomain {
            radius: r,
            reach: r - reach,
            bound: Bound::Inner,
            limit: field.r_min,
        });
    }
    if r + reach > field.r_max {
        return Err(LabError::StencilOutOfDomain {
            radius: r,
            reach: r + reach,
            bound: Bound::Outer,
            limit: field.r_max,
        });
    }
    Ok(())
}

/// Evaluations on the grid `x + (i, j) * unit`, memoized per call.
struct GridSampler<'a> {
    field: &'a ImmersionField,
    x: Point,
    unit: f64,
    memo: HashMap<(i32, i32), Vec<f64>>,
}

impl<'a> GridSampler<'a> {
    fn get(&mut self, i: i32, j: i32) -> Result<&Vec<f64>> {
        if !self.memo.contains_key(&(i, j)) {
            let p = [
                self.x[0] + i as f64 * self.unit,
                self.x[1] + j as f64 * self.unit,
            ];
            let v = self.field.eval(p)?;
            self.memo.insert((i, j), v);
        }
        Ok(&self.memo[&(i, j)])
    }

    /// `∂_1^a ∂_2^b` with grid spacing `spacing * unit`.
    fn partial(&mut self, a: usize, b: usize, spacing: i32, center: &[f64]) -> Result<Vec<f64>> {
        let h = spacing as f64 * self.unit;
        let mut acc = vec![0.0; center.len()];
        let (sa, da) = stencil(a);
        let (sb, db) = stencil(b);
        for &(i, wi) in &sa {
            for &(j, wj) in &sb {
                let w = wi * wj;
                let v = self.get(i * spacing, j * spacing)?;
                for (s, (vk, ck)) in acc.iter_mut().zip(v.iter().zip(center)) {
                    *s += w * (vk - ck);
                }
            }
        }
        let denom = da * db * h.powi((a + b) as i32);
        Ok(acc.into_iter().map(|s| s / denom).collect())
    }
}

/// Jet of `field` at `x` up to `order` (1, 2 or 3), Richardson-extrapolated.
pub fn jet(field: &ImmersionField, x: Point, order: usize) -> Result<Jet> {
    if let Some(cache) = &field.cache {
        let key = (
            field.id,
            x[0].to_bits(),
            x[1].to_bits(),
            field.kappa.to_bits(),
            order,
        );
        if let Some(hit) = cache.map.get(&key) {
            return Ok((**hit).clone());
        }
        let j = compute_jet(field, x, order, true)?;
        cache.map.insert(key, Arc::new(j.clone()));
        return Ok(j);
    }
    compute_jet(field, x, order, true)
}

/// Plain fourth-order jet at step `h`, no extrapolation. Used to measure the
/// convergence order of the stencils.
pub fn jet_single_level(field: &ImmersionField, x: Point, order: usize) -> Result<Jet> {
    compute_jet(field, x, order, false)
}

fn compute_jet(field: &ImmersionField, x: Point, order: usize, richardson: bool) -> Result<Jet> {
    assert!((1..=3).contains(&order), "jet order {order} outside 1..=3");
    let r = x[0].hypot(x[1]);
    let h = relative_step(field.kappa, r);
    check_stencil(field, x, stencil_reach(order) * h)?;
    let mut grid = GridSampler {
        field,
        x,
        unit: h / 2.0,
        memo: HashMap::new(),
    };
    let value = grid.get(0, 0)?.clone();
    let mut partials = Vec::new();
    let mut errors = Vec::new();
    for (a, b) in multi_indices(order) {
        let coarse = grid.partial(a, b, 2, &value)?;
        if !richardson {
            partials.push(coarse);
            errors.push(0.0);
            continue;
        }
        let fine = grid.partial(a, b, 1, &value)?;
        let extrapolated: Vec<f64> = fine
            .iter()
            .zip(&coarse)
            .map(|(f, c)| (16.0 * f - c) / 15.0)
            .collect();
        let err = extrapolated
            .iter()
            .zip(&fine)
            .fold(0.0_f64, |m, (e, f)| m.max((e - f).abs()));
        partials.push(extrapolated);
        errors.push(err);
    }
    Ok(Jet {
        order,
        x,
        step: h,
        value,
        partials,
        errors,
    })
}

/// Fourth-order central difference of a derived field along axis
/// `direction` (0 or 1), with step `relative_step(kappa, |x|)`.
pub fn field_derivative<F>(f: F, x: Point, direction: usize, kappa: f64) -> Result<Vec<f64>>
where
    F: Fn(Point) -> Result<Vec<f64>>,
{
    assert!(direction < 2, "direction {direction} out of range");
    let h = relative_step(kappa, x[0].hypot(x[1]));
    let shifted = |k: f64| {
        let mut p = x;
        p[direction] += k * h;
        f(p)
    };
    let center = f(x)?;
    let mut acc = vec![0.0; center.len()];
    let (taps, denom) = stencil(1);
    for (k, w) in taps {
        let v = shifted(k as f64)?;
        for (s, (vk, ck)) in acc.iter_mut().zip(v.iter().zip(&center)) {
            *s += w * (vk - ck);
        }
    }
    Ok(acc.into_iter().map(|s| s / (denom * h)).collect())
}

/// Both first derivatives of a derived field.
pub fn field_gradient<F>(f: F, x: Point, kappa: f64) -> Result<[Vec<f64>; 2]>
where
    F: Fn(Point) -> Result<Vec<f64>>,
{
    Ok([
        field_derivative(&f, x, 0, kappa)?,
        field_derivative(&f, x, 1, kappa)?,
    ])
}

/// Flat Laplacian `∂_11 + ∂_22` of a derived field, fourth-order stencil.
pub fn field_laplacian<F>(f: F, x: Point, kappa: f64) -> Result<Vec<f64>>
where
    F: Fn(Point) -> Result<Vec<f64>>,
{
    let h = relative_step(kappa, x[0].hypot(x[1]));
    let center = f(x)?;
    let mut acc = vec![0.0; center.len()];
    let (taps, denom) = stencil(2);
    for direction in 0..2 {
        for &(k, w) in &taps {
            if k == 0 {
                continue;
            }
            let mut p = x;
            p[direction] += k as f64 * h;
            let v = f(p)?;
            for (s, (vk, ck)) in acc.iter_mut().zip(v.iter().zip(&center)) {
                *s += w * (vk - ck);
            }
        }
    }
    Ok(acc.into_iter().map(|s| s / (denom * h * h)).collect())
}
