//! Truncated Čech–de Rham cochains and their Deligne–Beilinson differentials.
//!
//! A cochain of truncation `k` on diagonal `l` has one layer per Čech degree
//! `q ∈ [max(0, l-k), l+1]`; layer `q` holds a form of degree `l-q` on every
//! `(q+1)`-fold chart intersection. Form degree `-1` is the integer layer, whose entry
//! `w` stands for the constant `2πw`.
//!
//! The differential sends layer `q` of the output to `δ̌(input q-1) + (-1)^l d(input q)`,
//! where `d` of the integer layer is the injection into constant functions and `d` of a
//! degree-`k` form is dropped.

use std::collections::BTreeMap;
use std::fmt;

use rand::Rng;
use serde_json::{json, Value};

use crate::complex::{cech_coboundary, cech_coboundary_int, Cochain, GoodCover};
use crate::error::{Error, Result};
use crate::scalar::{Rational, Scalar};

#[derive(Debug, Clone, PartialEq)]
pub enum LayerData<S> {
    Forms(Vec<Cochain<S>>),
    Integers(Vec<i64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Layer<S> {
    pub cech_degree: usize,
    pub form_degree: i64,
    pub data: LayerData<S>,
}

impl<S: Scalar> Layer<S> {
    fn zero(cover: &GoodCover, q: usize, form_degree: i64) -> Self {
        let data = if form_degree < 0 {
            LayerData::Integers(vec![0; cover.nerve().len(q)])
        } else {
            LayerData::Forms(cover.regions(q).iter().map(|r| r.zero(form_degree as usize)).collect())
        };
        Layer { cech_degree: q, form_degree, data }
    }

    fn combine(&self, o: &Self, sign: i64) -> Result<Self> {
        let data = match (&self.data, &o.data) {
            (LayerData::Forms(a), LayerData::Forms(b)) if a.len() == b.len() => LayerData::Forms(
                a.iter()
                    .zip(b)
                    .map(|(x, y)| if sign > 0 { x.add(y) } else { x.sub(y) })
                    .collect::<Result<_>>()?,
            ),
            (LayerData::Integers(a), LayerData::Integers(b)) if a.len() == b.len() => {
                LayerData::Integers(a.iter().zip(b).map(|(x, y)| x + sign * y).collect())
            }
            _ => return Err(Error::Shape(format!("layer {} shapes differ", self.cech_degree))),
        };
        Ok(Layer { cech_degree: self.cech_degree, form_degree: self.form_degree, data })
    }

    pub fn is_zero(&self) -> bool {
        match &self.data {
            LayerData::Forms(f) => f.iter().all(Cochain::is_zero),
            LayerData::Integers(n) => n.iter().all(|&v| v == 0),
        }
    }

    /// Largest entry magnitude; integer entries are measured as the constants they stand for.
    pub fn max_abs(&self) -> f64 {
        match &self.data {
            LayerData::Forms(f) => f.iter().map(Cochain::max_abs).fold(0.0, f64::max),
            LayerData::Integers(n) => n.iter().map(|&v| S::from_winding(v).magnitude()).fold(0.0, f64::max),
        }
    }
}

/// `(Čech degree, form degree)` of every layer at truncation `k`, diagonal `l`.
pub fn layout(k: usize, l: i64) -> Vec<(usize, i64)> {
    let lo = (l - k as i64).max(0);
    (lo..=l + 1).map(|q| (q as usize, l - q)).collect()
}

/// A Deligne–Beilinson cochain.
#[derive(Debug, Clone, PartialEq)]
pub struct DbCochain<S> {
    truncation: usize,
    diagonal: i64,
    layers: Vec<Layer<S>>,
}

impl<S: Scalar> DbCochain<S> {
    pub fn zero(cover: &GoodCover, k: usize, l: i64) -> Result<Self> {
        if l < -1 {
            return Err(Error::InvalidParameter(format!("diagonal {l} is below -1")));
        }
        let layers = layout(k, l).into_iter().map(|(q, f)| Layer::zero(cover, q, f)).collect();
        Ok(DbCochain { truncation: k, diagonal: l, layers })
    }

    /// Assembles a cochain from layers and checks them against the cover.
    pub fn from_layers(cover: &GoodCover, k: usize, l: i64, layers: Vec<Layer<S>>) -> Result<Self> {
        let x = DbCochain { truncation: k, diagonal: l, layers };
        x.validate(cover)?;
        Ok(x)
    }

    pub fn validate(&self, cover: &GoodCover) -> Result<()> {
        let expected = layout(self.truncation, self.diagonal);
        if self.diagonal < -1 || expected.len() != self.layers.len() {
            return Err(Error::Shape(format!(
                "expected {} layers for (k={}, l={}), found {}",
                expected.len(),
                self.truncation,
                self.diagonal,
                self.layers.len()
            )));
        }
        for ((q, f), layer) in expected.into_iter().zip(&self.layers) {
            if layer.cech_degree != q || layer.form_degree != f {
                return Err(Error::Shape(format!(
                    "layer ({}, {}) where ({q}, {f}) was expected",
                    layer.cech_degree, layer.form_degree
                )));
            }
            let n = cover.nerve().len(q);
            match &layer.data {
                LayerData::Integers(v) if f < 0 && v.len() == n => {}
                LayerData::Forms(v) if f >= 0 && v.len() == n => {
                    for (c, r) in v.iter().zip(cover.regions(q)) {
                        if c.degree as i64 != f || c.len() != r.len(c.degree) {
                            return Err(Error::Shape(format!("layer {q} member does not fit its intersection")));
                        }
                    }
                }
                _ => return Err(Error::Shape(format!("layer {q} has the wrong kind or length"))),
            }
        }
        Ok(())
    }

    pub fn truncation(&self) -> usize {
        self.truncation
    }

    pub fn diagonal(&self) -> i64 {
        self.diagonal
    }

    pub fn layers(&self) -> &[Layer<S>] {
        &self.layers
    }

    pub fn layer(&self, q: usize) -> Option<&Layer<S>> {
        self.layers.iter().find(|l| l.cech_degree == q)
    }

    pub fn layer_mut(&mut self, q: usize) -> Option<&mut Layer<S>> {
        self.layers.iter_mut().find(|l| l.cech_degree == q)
    }

    /// Form family at Čech degree `q` (empty slice for the integer layer or a missing layer).
    pub fn forms(&self, q: usize) -> &[Cochain<S>] {
        match self.layer(q).map(|l| &l.data) {
            Some(LayerData::Forms(f)) => f,
            _ => &[],
        }
    }

    pub fn forms_mut(&mut self, q: usize) -> Option<&mut Vec<Cochain<S>>> {
        match self.layer_mut(q).map(|l| &mut l.data) {
            Some(LayerData::Forms(f)) => Some(f),
            _ => None,
        }
    }

    /// The integer layer.
    pub fn integers(&self) -> &[i64] {
        match self.layers.last().map(|l| &l.data) {
            Some(LayerData::Integers(n)) => n,
            _ => &[],
        }
    }

    pub fn integers_mut(&mut self) -> &mut Vec<i64> {
        match self.layers.last_mut().map(|l| &mut l.data) {
            Some(LayerData::Integers(n)) => n,
            _ => unreachable!("the last layer is always the integer layer"),
        }
    }

    fn combine(&self, o: &Self, sign: i64) -> Result<Self> {
        if (self.truncation, self.diagonal) != (o.truncation, o.diagonal) {
            return Err(Error::Shape(format!(
                "cannot combine (k={}, l={}) with (k={}, l={})",
                self.truncation, self.diagonal, o.truncation, o.diagonal
            )));
        }
        let layers = self.layers.iter().zip(&o.layers).map(|(a, b)| a.combine(b, sign)).collect::<Result<_>>()?;
        Ok(DbCochain { truncation: self.truncation, diagonal: self.diagonal, layers })
    }

    pub fn add(&self, o: &Self) -> Result<Self> {
        self.combine(o, 1)
    }

    pub fn sub(&self, o: &Self) -> Result<Self> {
        self.combine(o, -1)
    }

    pub fn neg(&self) -> Self {
        let layers = self
            .layers
            .iter()
            .map(|l| Layer {
                cech_degree: l.cech_degree,
                form_degree: l.form_degree,
                data: match &l.data {
                    LayerData::Forms(f) => LayerData::Forms(f.iter().map(Cochain::neg).collect()),
                    LayerData::Integers(n) => LayerData::Integers(n.iter().map(|v| -v).collect()),
                },
            })
            .collect();
        DbCochain { truncation: self.truncation, diagonal: self.diagonal, layers }
    }

    pub fn is_zero(&self) -> bool {
        self.layers.iter().all(Layer::is_zero)
    }

    pub fn max_abs(&self) -> f64 {
        self.layers.iter().map(Layer::max_abs).fold(0.0, f64::max)
    }

    /// Drops the layers whose form degree exceeds `k`.
    pub fn truncate(&self, k: usize) -> Result<Self> {
        if k > self.truncation {
            return Err(Error::InvalidParameter(format!("cannot raise truncation {} to {k}", self.truncation)));
        }
        let layers = self.layers.iter().filter(|l| l.form_degree <= k as i64).cloned().collect();
        Ok(DbCochain { truncation: k, diagonal: self.diagonal, layers })
    }

    /// JSON form: layers keyed by Čech degree; integer layers as integer arrays.
    pub fn to_json(&self) -> Value {
        let layers: BTreeMap<String, Value> = self
            .layers
            .iter()
            .map(|l| {
                let data = match &l.data {
                    LayerData::Forms(f) => {
                        Value::Array(f.iter().map(|c| Value::Array(c.values.iter().map(S::to_json).collect())).collect())
                    }
                    LayerData::Integers(n) => json!(n),
                };
                (l.cech_degree.to_string(), json!({ "form_degree": l.form_degree, "values": data }))
            })
            .collect();
        json!({ "truncation": self.truncation, "diagonal": self.diagonal, "layers": layers })
    }

    pub fn from_json(cover: &GoodCover, v: &Value) -> Result<Self> {
        let bad = |m: &str| Error::Shape(format!("db cochain json: {m}"));
        let k = v["truncation"].as_u64().ok_or_else(|| bad("truncation"))? as usize;
        let l = v["diagonal"].as_i64().ok_or_else(|| bad("diagonal"))?;
        let mut layers = Vec::new();
        for (q, f) in layout(k, l) {
            let entry = &v["layers"][q.to_string()];
            let values = entry["values"].as_array().ok_or_else(|| bad("layer values"))?;
            let data = if f < 0 {
                LayerData::Integers(values.iter().map(|x| x.as_i64().ok_or_else(|| bad("integer"))).collect::<Result<_>>()?)
            } else {
                LayerData::Forms(
                    values
                        .iter()
                        .map(|c| {
                            let vals = c.as_array().ok_or_else(|| bad("cochain"))?;
                            Ok(Cochain::new(f as usize, vals.iter().map(S::from_json).collect::<Result<_>>()?))
                        })
                        .collect::<Result<_>>()?,
                )
            };
            layers.push(Layer { cech_degree: q, form_degree: f, data });
        }
        DbCochain::from_layers(cover, k, l, layers)
    }
}

/// One block of the differential's matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Block {
    Zero,
    Cech,
    /// Exterior derivative (or integer injection) with a sign.
    Deriv(i64),
}

impl fmt::Display for Block {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Block::Zero => write!(f, "0"),
            Block::Cech => write!(f, "δ̌"),
            Block::Deriv(1) => write!(f, "d"),
            Block::Deriv(_) => write!(f, "-d"),
        }
    }
}

/// Block matrix of `D[k,l]`: rows are output layers, columns input layers, both in
/// increasing Čech degree.
#[derive(Debug, Clone, PartialEq)]
pub struct DbOperatorSpec {
    pub truncation: usize,
    pub diagonal: i64,
    pub rows: Vec<(usize, i64)>,
    pub cols: Vec<(usize, i64)>,
    pub blocks: Vec<Vec<Block>>,
}

pub fn operator_spec(k: usize, l: i64) -> DbOperatorSpec {
    let rows = layout(k, l + 1);
    let cols = layout(k, l);
    let sign = if l.rem_euclid(2) == 0 { 1 } else { -1 };
    let blocks = rows
        .iter()
        .map(|&(qo, _)| {
            cols.iter()
                .map(|&(qi, _)| {
                    if qi + 1 == qo {
                        Block::Cech
                    } else if qi == qo {
                        Block::Deriv(sign)
                    } else {
                        Block::Zero
                    }
                })
                .collect()
        })
        .collect();
    DbOperatorSpec { truncation: k, diagonal: l, rows, cols, blocks }
}

impl fmt::Display for DbOperatorSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for row in &self.blocks {
            let cells: Vec<String> = row.iter().map(Block::to_string).collect();
            writeln!(f, "[{}]", cells.join(", "))?;
        }
        Ok(())
    }
}

fn apply_block<S: Scalar>(cover: &GoodCover, block: Block, input: &Layer<S>, out: &mut Layer<S>) -> Result<()> {
    let term = match (block, &input.data) {
        (Block::Zero, _) => return Ok(()),
        (Block::Cech, LayerData::Forms(f)) => LayerData::Forms(cech_coboundary(cover, input.cech_degree, f)?),
        (Block::Cech, LayerData::Integers(n)) => LayerData::Integers(cech_coboundary_int(cover.nerve(), input.cech_degree, n)?),
        (Block::Deriv(s), LayerData::Forms(f)) => LayerData::Forms(
            f.iter()
                .zip(cover.regions(input.cech_degree))
                .map(|(c, r)| Ok(if s > 0 { r.coboundary(c)? } else { r.coboundary(c)?.neg() }))
                .collect::<Result<_>>()?,
        ),
        (Block::Deriv(s), LayerData::Integers(n)) => LayerData::Forms(
            n.iter()
                .zip(cover.regions(input.cech_degree))
                .map(|(&w, r)| r.constant(S::from_winding(s * w)))
                .collect(),
        ),
    };
    let term = Layer { cech_degree: out.cech_degree, form_degree: out.form_degree, data: term };
    *out = out.combine(&term, 1)?;
    Ok(())
}

/// `D[k,l] x`.
pub fn db_differential<S: Scalar>(cover: &GoodCover, k: usize, l: i64, x: &DbCochain<S>) -> Result<DbCochain<S>> {
    if (x.truncation, x.diagonal) != (k, l) {
        return Err(Error::Shape(format!(
            "cochain has (k={}, l={}) but D[{k},{l}] was requested",
            x.truncation, x.diagonal
        )));
    }
    x.validate(cover)?;
    let spec = operator_spec(k, l);
    let mut out = DbCochain::zero(cover, k, l + 1)?;
    for (r, row) in spec.blocks.iter().enumerate() {
        for (c, &block) in row.iter().enumerate() {
            apply_block(cover, block, &x.layers[c], &mut out.layers[r])?;
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CocycleCheck {
    pub holds: bool,
    pub residual: f64,
}

/// Whether `D x = 0`, exactly for exact scalars and within `tol` otherwise.
pub fn is_cocycle<S: Scalar>(cover: &GoodCover, x: &DbCochain<S>, tol: f64) -> Result<CocycleCheck> {
    let dx = db_differential(cover, x.truncation, x.diagonal, x)?;
    let residual = dx.max_abs();
    let holds = if S::EXACT { dx.is_zero() } else { residual <= tol };
    Ok(CocycleCheck { holds, residual })
}

/// `x + D[k,l-1] q`.
pub fn gauge_transform<S: Scalar>(cover: &GoodCover, x: &DbCochain<S>, q: &DbCochain<S>) -> Result<DbCochain<S>> {
    if q.truncation != x.truncation || q.diagonal + 1 != x.diagonal {
        return Err(Error::Shape(format!(
            "gauge parameter (k={}, l={}) does not match cochain (k={}, l={})",
            q.truncation, q.diagonal, x.truncation, x.diagonal
        )));
    }
    x.add(&db_differential(cover, q.truncation, q.diagonal, q)?)
}

/// Random exact cochain: form entries `a/b` with `|a| <= 20`, `1 <= b <= 6`; integers in `[-5, 5]`.
pub fn random_cochain<R: Rng>(cover: &GoodCover, k: usize, l: i64, rng: &mut R) -> Result<DbCochain<Rational>> {
    let mut x = DbCochain::zero(cover, k, l)?;
    for layer in &mut x.layers {
        match &mut layer.data {
            LayerData::Forms(f) => {
                for c in f {
                    c.values.iter_mut().for_each(|v| *v = Rational::new(rng.gen_range(-20..=20), rng.gen_range(1..=6)));
                }
            }
            LayerData::Integers(n) => n.iter_mut().for_each(|v| *v = rng.gen_range(-5..=5)),
        }
    }
    Ok(x)
}
