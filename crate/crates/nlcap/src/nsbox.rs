//! Nonsignaling box data model.
//!
//! An [`NsBox`] stores the conditional probability tensor `P(r,s|a,b)` for a
//! bipartite device with finite input and outcome alphabets. Validation
//! checks nonnegativity, per-input normalization, and the nonsignaling
//! conditions: Alice's outcome marginal must not depend on Bob's input and
//! vice versa. The module also provides canonical constructors (PR box,
//! local deterministic boxes, convex mixtures), marginal extraction, the
//! per-pair mutual information, and the conversion to a [`CBox`] whose
//! composite sender input is `(r, a)`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Default tolerance for structural validation (normalization,
/// nonnegativity, nonsignaling residual). CLI-overridable.
pub const DEFAULT_TOL: f64 = 1e-9;

/// Tolerance asserted for internal reconstructions and for boxes produced
/// by the crate's own constructors.
pub const CONSTRUCTION_TOL: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum BoxError {
    #[error("invalid shape: all of nA, nB, nR, nS must be >= 1")]
    EmptyAlphabet,
    #[error("tensor has {got} entries, shape requires {want}")]
    TensorLength { got: usize, want: usize },
    #[error("tensor entry P[{a}][{b}][{r}][{s}] = {value} is not finite")]
    NonFinite { a: usize, b: usize, r: usize, s: usize, value: f64 },
    #[error("tensor entry P[{a}][{b}][{r}][{s}] = {value} is negative beyond tolerance {tol}")]
    Negative { a: usize, b: usize, r: usize, s: usize, value: f64, tol: f64 },
    #[error("cell (a={a}, b={b}) sums to {sum}, violating normalization beyond tolerance {tol}")]
    Normalization { a: usize, b: usize, sum: f64, tol: f64 },
    #[error("nonsignaling residual {residual} exceeds tolerance {tol}")]
    Signaling { residual: f64, tol: f64 },
    #[error("boxes have different shapes")]
    ShapeMismatch,
    #[error("mixture weights must be nonnegative and sum to 1 (got sum {sum})")]
    BadWeights { sum: f64 },
    #[error("mixture needs as many weights as boxes ({boxes} boxes, {weights} weights)")]
    WeightCount { boxes: usize, weights: usize },
    #[error("function value {value} out of range for alphabet of size {size}")]
    FunctionRange { value: usize, size: usize },
    #[error("function table has {got} entries, expected {want}")]
    FunctionLength { got: usize, want: usize },
}

/// Alphabet sizes of a bipartite box: `n_a` Alice inputs, `n_b` Bob inputs,
/// `n_r` Alice outcomes, `n_s` Bob outcomes (uniform across inputs).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoxShape {
    pub n_a: usize,
    pub n_b: usize,
    pub n_r: usize,
    pub n_s: usize,
}

impl BoxShape {
    pub fn new(n_a: usize, n_b: usize, n_r: usize, n_s: usize) -> Result<Self, BoxError> {
        if n_a == 0 || n_b == 0 || n_r == 0 || n_s == 0 {
            return Err(BoxError::EmptyAlphabet);
        }
        Ok(Self { n_a, n_b, n_r, n_s })
    }

    /// Number of tensor entries `nA*nB*nR*nS`.
    pub fn cell_count(&self) -> usize {
        self.n_a * self.n_b * self.n_r * self.n_s
    }

    /// `nS^nB`, the size of the Bob outcome-sequence space, or `None` on
    /// overflow. Whether this fits under the solver's sequence cap is
    /// checked where the sequence space is actually built.
    pub fn sequence_count(&self) -> Option<u128> {
        let mut acc: u128 = 1;
        for _ in 0..self.n_b {
            acc = acc.checked_mul(self.n_s as u128)?;
        }
        Some(acc)
    }
}

/// Result of a nonsignaling check. `ok` requires the Eq.-style residual,
/// normalization, and nonnegativity to all hold within the tolerance.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct NsReport {
    /// Largest violation of either nonsignaling condition.
    pub max_residual: f64,
    /// Largest deviation of any per-(a,b) cell sum from 1.
    pub max_normalization_dev: f64,
    /// Most negative tensor entry (0 if none are negative).
    pub min_entry: f64,
    pub ok: bool,
}

/// A nonsignaling box: the tensor `P(r,s|a,b)` plus its shape.
///
/// The tensor is stored flat in `[a][b][r][s]` order. Values are immutable
/// after construction; all operations are pure.
#[derive(Debug, Clone, PartialEq)]
pub struct NsBox {
    shape: BoxShape,
    p: Vec<f64>,
    name: Option<String>,
}

impl NsBox {
    /// Builds a box from a flat `[a][b][r][s]`-ordered tensor. Checks shape
    /// and finiteness only; probabilistic validity is the job of
    /// [`NsBox::validate`] / [`NsBox::verify_nonsignaling`].
    pub fn new(shape: BoxShape, p: Vec<f64>) -> Result<Self, BoxError> {
        if p.len() != shape.cell_count() {
            return Err(BoxError::TensorLength { got: p.len(), want: shape.cell_count() });
        }
        for (i, &v) in p.iter().enumerate() {
            if !v.is_finite() {
                let (a, b, r, s) = unflatten(shape, i);
                return Err(BoxError::NonFinite { a, b, r, s, value: v });
            }
        }
        Ok(Self { shape, p, name: None })
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = Some(name.into());
        self
    }

    pub fn name(&self) -> Option<&str> {
        self.name.as_deref()
    }

    pub fn shape(&self) -> BoxShape {
        self.shape
    }

    #[inline]
    pub fn prob(&self, a: usize, b: usize, r: usize, s: usize) -> f64 {
        self.p[flatten(self.shape, a, b, r, s)]
    }

    pub fn tensor(&self) -> &[f64] {
        &self.p
    }

    /// Checks nonnegativity and normalization, then the nonsignaling
    /// residual, each within `tol`. Errors carry the offending indices so
    /// structural problems are distinguishable from signaling.
    pub fn validate(&self, tol: f64) -> Result<(), BoxError> {
        let sh = self.shape;
        for (i, &v) in self.p.iter().enumerate() {
            if v < -tol {
                let (a, b, r, s) = unflatten(sh, i);
                return Err(BoxError::Negative { a, b, r, s, value: v, tol });
            }
        }
        for a in 0..sh.n_a {
            for b in 0..sh.n_b {
                let mut sum = 0.0;
                for r in 0..sh.n_r {
                    for s in 0..sh.n_s {
                        sum += self.prob(a, b, r, s);
                    }
                }
                if (sum - 1.0).abs() > tol {
                    return Err(BoxError::Normalization { a, b, sum, tol });
                }
            }
        }
        let residual = self.nonsignaling_residual();
        if residual > tol {
            return Err(BoxError::Signaling { residual, tol });
        }
        Ok(())
    }

    /// Largest violation of either nonsignaling condition: for Alice, the
    /// spread over `b` of `sum_s P(r,s|a,b)` at fixed `(a,r)`; for Bob, the
    /// spread over `a` of `sum_r P(r,s|a,b)` at fixed `(b,s)`.
    pub fn nonsignaling_residual(&self) -> f64 {
        let sh = self.shape;
        let mut residual: f64 = 0.0;
        for a in 0..sh.n_a {
            for r in 0..sh.n_r {
                let mut lo = f64::INFINITY;
                let mut hi = f64::NEG_INFINITY;
                for b in 0..sh.n_b {
                    let mut sum = 0.0;
                    for s in 0..sh.n_s {
                        sum += self.prob(a, b, r, s);
                    }
                    lo = lo.min(sum);
                    hi = hi.max(sum);
                }
                residual = residual.max(hi - lo);
            }
        }
        for b in 0..sh.n_b {
            for s in 0..sh.n_s {
                let mut lo = f64::INFINITY;
                let mut hi = f64::NEG_INFINITY;
                for a in 0..sh.n_a {
                    let mut sum = 0.0;
                    for r in 0..sh.n_r {
                        sum += self.prob(a, b, r, s);
                    }
                    lo = lo.min(sum);
                    hi = hi.max(sum);
                }
                residual = residual.max(hi - lo);
            }
        }
        residual
    }

    /// Full report variant of the nonsignaling check.
    pub fn verify_nonsignaling(&self, tol: f64) -> NsReport {
        let sh = self.shape;
        let mut min_entry: f64 = 0.0;
        for &v in &self.p {
            min_entry = min_entry.min(v);
        }
        let mut max_norm_dev: f64 = 0.0;
        for a in 0..sh.n_a {
            for b in 0..sh.n_b {
                let mut sum = 0.0;
                for r in 0..sh.n_r {
                    for s in 0..sh.n_s {
                        sum += self.prob(a, b, r, s);
                    }
                }
                max_norm_dev = max_norm_dev.max((sum - 1.0).abs());
            }
        }
        let max_residual = self.nonsignaling_residual();
        NsReport {
            max_residual,
            max_normalization_dev: max_norm_dev,
            min_entry,
            ok: max_residual <= tol && max_norm_dev <= tol && min_entry >= -tol,
        }
    }

    /// Party marginals `P(r|a)` and `P(s|b)`, evaluated at `b = 0` and
    /// `a = 0` respectively; a validated box makes the choice immaterial.
    pub fn marginals(&self) -> Marginals {
        let sh = self.shape;
        let mut alice = vec![vec![0.0; sh.n_r]; sh.n_a];
        for a in 0..sh.n_a {
            for r in 0..sh.n_r {
                let mut sum = 0.0;
                for s in 0..sh.n_s {
                    sum += self.prob(a, 0, r, s);
                }
                alice[a][r] = sum;
            }
        }
        let mut bob = vec![vec![0.0; sh.n_s]; sh.n_b];
        for b in 0..sh.n_b {
            for s in 0..sh.n_s {
                let mut sum = 0.0;
                for r in 0..sh.n_r {
                    sum += self.prob(0, b, r, s);
                }
                bob[b][s] = sum;
            }
        }
        Marginals { alice, bob }
    }

    /// Mutual information `I(R;S)` in bits of the joint outcome
    /// distribution at a fixed input pair, with the `0 log 0 = 0`
    /// convention.
    pub fn conditional_mutual_information(&self, a: usize, b: usize) -> f64 {
        let sh = self.shape;
        let mut pr = vec![0.0; sh.n_r];
        let mut ps = vec![0.0; sh.n_s];
        for r in 0..sh.n_r {
            for s in 0..sh.n_s {
                let v = self.prob(a, b, r, s);
                pr[r] += v;
                ps[s] += v;
            }
        }
        let mut info = 0.0;
        for r in 0..sh.n_r {
            for s in 0..sh.n_s {
                let v = self.prob(a, b, r, s);
                if v > 0.0 {
                    info += v * (v / (pr[r] * ps[s])).ln();
                }
            }
        }
        info / std::f64::consts::LN_2
    }

    /// Conditions Bob's outcome on Alice's result: `Q(s|x=(r,a), b) =
    /// P(r,s|a,b) / P(r|a)`. Composite inputs with `P(r|a) = 0` carry no
    /// mass and are dropped; they are listed in the returned box.
    pub fn to_cbox(&self) -> CBox {
        let sh = self.shape;
        let marg = self.marginals();
        let mut inputs = Vec::new();
        let mut dropped = Vec::new();
        for a in 0..sh.n_a {
            for r in 0..sh.n_r {
                if marg.alice[a][r] > 0.0 {
                    inputs.push((r, a));
                } else {
                    dropped.push((r, a));
                }
            }
        }
        let mut q = vec![0.0; inputs.len() * sh.n_b * sh.n_s];
        for (x, &(r, a)) in inputs.iter().enumerate() {
            let w = marg.alice[a][r];
            for b in 0..sh.n_b {
                for s in 0..sh.n_s {
                    q[(x * sh.n_b + b) * sh.n_s + s] = self.prob(a, b, r, s) / w;
                }
            }
        }
        CBox { n_b: sh.n_b, n_s: sh.n_s, inputs, dropped, q }
    }

    fn to_json_repr(&self) -> BoxJson {
        let sh = self.shape;
        let mut p = Vec::with_capacity(sh.n_a);
        for a in 0..sh.n_a {
            let mut pb = Vec::with_capacity(sh.n_b);
            for b in 0..sh.n_b {
                let mut pr = Vec::with_capacity(sh.n_r);
                for r in 0..sh.n_r {
                    let mut ps = Vec::with_capacity(sh.n_s);
                    for s in 0..sh.n_s {
                        ps.push(self.prob(a, b, r, s));
                    }
                    pr.push(ps);
                }
                pb.push(pr);
            }
            p.push(pb);
        }
        BoxJson {
            name: self.name.clone(),
            n_a: sh.n_a,
            n_b: sh.n_b,
            n_r: sh.n_r,
            n_s: sh.n_s,
            p,
        }
    }

    /// Serializes to the box JSON format (`nA`, `nB`, `nR`, `nS`, nested
    /// `P[a][b][r][s]`, optional `name`). Float formatting is exact
    /// round-trip.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_json_repr()).expect("box serialization")
    }

    /// Parses the box JSON format. Fails on malformed JSON, missing fields,
    /// or a tensor inconsistent with the declared shape; probabilistic
    /// validity is checked separately via [`NsBox::validate`].
    pub fn from_json(text: &str) -> Result<Self, BoxJsonError> {
        let repr: BoxJson = serde_json::from_str(text).map_err(BoxJsonError::Parse)?;
        let shape = BoxShape::new(repr.n_a, repr.n_b, repr.n_r, repr.n_s)
            .map_err(BoxJsonError::Structure)?;
        let mut p = Vec::with_capacity(shape.cell_count());
        if repr.p.len() != shape.n_a {
            return Err(BoxJsonError::Structure(BoxError::TensorLength {
                got: repr.p.len(),
                want: shape.n_a,
            }));
        }
        for pb in &repr.p {
            if pb.len() != shape.n_b {
                return Err(BoxJsonError::Structure(BoxError::TensorLength {
                    got: pb.len(),
                    want: shape.n_b,
                }));
            }
            for pr in pb {
                if pr.len() != shape.n_r {
                    return Err(BoxJsonError::Structure(BoxError::TensorLength {
                        got: pr.len(),
                        want: shape.n_r,
                    }));
                }
                for ps in pr {
                    if ps.len() != shape.n_s {
                        return Err(BoxJsonError::Structure(BoxError::TensorLength {
                            got: ps.len(),
                            want: shape.n_s,
                        }));
                    }
                    p.extend_from_slice(ps);
                }
            }
        }
        let mut bx = NsBox::new(shape, p).map_err(BoxJsonError::Structure)?;
        bx.name = repr.name;
        Ok(bx)
    }
}

/// Party marginals of a box: `alice[a][r] = P(r|a)`, `bob[b][s] = P(s|b)`.
#[derive(Debug, Clone)]
pub struct Marginals {
    pub alice: Vec<Vec<f64>>,
    pub bob: Vec<Vec<f64>>,
}

#[derive(Debug, Error)]
pub enum BoxJsonError {
    #[error("malformed box JSON: {0}")]
    Parse(serde_json::Error),
    #[error("invalid box structure: {0}")]
    Structure(BoxError),
}

#[derive(Serialize, Deserialize)]
struct BoxJson {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    name: Option<String>,
    #[serde(rename = "nA")]
    n_a: usize,
    #[serde(rename = "nB")]
    n_b: usize,
    #[serde(rename = "nR")]
    n_r: usize,
    #[serde(rename = "nS")]
    n_s: usize,
    #[serde(rename = "P")]
    p: Vec<Vec<Vec<Vec<f64>>>>,
}

/// A channel box `Q(s|x;b)` with composite sender input `x = (r, a)`,
/// obtained from an [`NsBox`] by conditioning on Alice's outcome. Only
/// inputs with `P(r|a) > 0` are retained.
#[derive(Debug, Clone)]
pub struct CBox {
    pub n_b: usize,
    pub n_s: usize,
    /// Retained composite inputs as `(r, a)`, in `(a, r)` iteration order.
    pub inputs: Vec<(usize, usize)>,
    /// Composite inputs removed because `P(r|a) = 0`.
    pub dropped: Vec<(usize, usize)>,
    q: Vec<f64>,
}

impl CBox {
    pub fn n_inputs(&self) -> usize {
        self.inputs.len()
    }

    #[inline]
    pub fn prob(&self, x: usize, b: usize, s: usize) -> f64 {
        self.q[(x * self.n_b + b) * self.n_s + s]
    }

    /// Checks that every `(x, b)` row is a distribution within `tol`.
    pub fn validate(&self, tol: f64) -> Result<(), BoxError> {
        for x in 0..self.n_inputs() {
            for b in 0..self.n_b {
                let mut sum = 0.0;
                for s in 0..self.n_s {
                    let v = self.prob(x, b, s);
                    if v < -tol {
                        let (r, a) = self.inputs[x];
                        return Err(BoxError::Negative { a, b, r, s, value: v, tol });
                    }
                    sum += v;
                }
                if (sum - 1.0).abs() > tol {
                    return Err(BoxError::Normalization { a: x, b, sum, tol });
                }
            }
        }
        Ok(())
    }
}

#[inline]
fn flatten(sh: BoxShape, a: usize, b: usize, r: usize, s: usize) -> usize {
    ((a * sh.n_b + b) * sh.n_r + r) * sh.n_s + s
}

fn unflatten(sh: BoxShape, i: usize) -> (usize, usize, usize, usize) {
    let s = i % sh.n_s;
    let i = i / sh.n_s;
    let r = i % sh.n_r;
    let i = i / sh.n_r;
    let b = i % sh.n_b;
    let a = i / sh.n_b;
    (a, b, r, s)
}

/// The Popescu-Rohrlich box: binary alphabets, `P(r,s|a,b) = 1/2` when
/// `r XOR s = a AND b` and `0` otherwise.
pub fn pr_box() -> NsBox {
    let shape = BoxShape::new(2, 2, 2, 2).expect("static shape");
    let mut p = vec![0.0; shape.cell_count()];
    for a in 0..2 {
        for b in 0..2 {
            for r in 0..2 {
                for s in 0..2 {
                    if (r ^ s) == (a & b) {
                        p[flatten(shape, a, b, r, s)] = 0.5;
                    }
                }
            }
        }
    }
    NsBox::new(shape, p).expect("static tensor").with_name("pr")
}

/// Deterministic local box `P(r,s|a,b) = [r = f(a)][s = g(b)]`.
pub fn local_deterministic_box(
    f: &[usize],
    g: &[usize],
    shape: BoxShape,
) -> Result<NsBox, BoxError> {
    if f.len() != shape.n_a {
        return Err(BoxError::FunctionLength { got: f.len(), want: shape.n_a });
    }
    if g.len() != shape.n_b {
        return Err(BoxError::FunctionLength { got: g.len(), want: shape.n_b });
    }
    if let Some(&v) = f.iter().find(|&&v| v >= shape.n_r) {
        return Err(BoxError::FunctionRange { value: v, size: shape.n_r });
    }
    if let Some(&v) = g.iter().find(|&&v| v >= shape.n_s) {
        return Err(BoxError::FunctionRange { value: v, size: shape.n_s });
    }
    let mut p = vec![0.0; shape.cell_count()];
    for a in 0..shape.n_a {
        for b in 0..shape.n_b {
            p[flatten(shape, a, b, f[a], g[b])] = 1.0;
        }
    }
    NsBox::new(shape, p)
}

/// Entrywise convex combination of boxes with the same shape. Weights must
/// be nonnegative and sum to 1 within 1e-12.
pub fn convex_mixture(boxes: &[NsBox], weights: &[f64]) -> Result<NsBox, BoxError> {
    if boxes.is_empty() || boxes.len() != weights.len() {
        return Err(BoxError::WeightCount { boxes: boxes.len(), weights: weights.len() });
    }
    let shape = boxes[0].shape;
    if boxes.iter().any(|b| b.shape != shape) {
        return Err(BoxError::ShapeMismatch);
    }
    let sum: f64 = weights.iter().sum();
    if weights.iter().any(|&w| w < 0.0) || (sum - 1.0).abs() > 1e-12 {
        return Err(BoxError::BadWeights { sum });
    }
    let mut p = vec![0.0; shape.cell_count()];
    for (bx, &w) in boxes.iter().zip(weights) {
        for (dst, &src) in p.iter_mut().zip(&bx.p) {
            *dst += w * src;
        }
    }
    NsBox::new(shape, p)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn shape2222() -> BoxShape {
        BoxShape::new(2, 2, 2, 2).unwrap()
    }

    #[test]
    fn pr_box_entries() {
        let bx = pr_box();
        assert_eq!(bx.prob(0, 0, 0, 0), 0.5);
        assert_eq!(bx.prob(1, 1, 0, 1), 0.5);
        assert_eq!(bx.prob(0, 0, 0, 1), 0.0);
    }

    #[test]
    fn pr_box_is_nonsignaling_exactly() {
        let report = pr_box().verify_nonsignaling(0.0);
        assert_eq!(report.max_residual, 0.0);
        assert!(report.ok);
    }

    #[test]
    fn same_cell_perturbation_keeps_nonsignaling() {
        // moving mass between outcome cells of one (a,b) keeps both
        // marginal families intact as long as the moved mass cancels
        let bx = pr_box();
        let mut p = bx.tensor().to_vec();
        p[flatten(shape2222(), 0, 0, 0, 0)] += 0.1;
        p[flatten(shape2222(), 0, 0, 1, 1)] -= 0.1;
        let bent = NsBox::new(shape2222(), p).unwrap();
        let report = bent.verify_nonsignaling(1e-9);
        assert!(report.max_normalization_dev <= 1e-15);
        // outcome marginals do shift: P(r=0|a=0) differs between b=0 and b=1
        assert!((report.max_residual - 0.1).abs() < 1e-15);
        assert!(!report.ok);
    }

    #[test]
    fn signaling_perturbation_detected() {
        let bx = pr_box();
        let mut p = bx.tensor().to_vec();
        let sh = shape2222();
        p[flatten(sh, 0, 0, 0, 0)] = 0.6;
        p[flatten(sh, 0, 0, 0, 1)] = 0.0;
        p[flatten(sh, 0, 0, 1, 0)] = 0.0;
        p[flatten(sh, 0, 0, 1, 1)] = 0.4;
        let bent = NsBox::new(sh, p).unwrap();
        let report = bent.verify_nonsignaling(1e-9);
        assert!((report.max_residual - 0.1).abs() < 1e-15);
        assert!(!report.ok);
        assert!(matches!(bent.validate(1e-9), Err(BoxError::Signaling { .. })));
    }

    #[test]
    fn pr_marginals_uniform() {
        let m = pr_box().marginals();
        for a in 0..2 {
            for r in 0..2 {
                assert!((m.alice[a][r] - 0.5).abs() < 1e-15);
            }
        }
        for b in 0..2 {
            for s in 0..2 {
                assert!((m.bob[b][s] - 0.5).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn local_deterministic_examples() {
        let sh = shape2222();
        let id = local_deterministic_box(&[0, 1], &[0, 1], sh).unwrap();
        assert_eq!(id.prob(0, 0, 0, 0), 1.0);
        let m = id.marginals();
        assert_eq!(m.alice[0][0], 1.0);
        assert_eq!(m.alice[1][1], 1.0);

        let konst = local_deterministic_box(&[0, 0], &[1, 1], sh).unwrap();
        for a in 0..2 {
            for b in 0..2 {
                assert_eq!(konst.prob(a, b, 0, 1), 1.0);
            }
        }
        assert_eq!(konst.verify_nonsignaling(0.0).max_residual, 0.0);

        assert!(matches!(
            local_deterministic_box(&[0, 2], &[0, 1], sh),
            Err(BoxError::FunctionRange { .. })
        ));
    }

    #[test]
    fn mixture_idempotence_and_degenerate_weights() {
        let bx = pr_box();
        let half = convex_mixture(&[bx.clone(), bx.clone()], &[0.5, 0.5]).unwrap();
        for (x, y) in half.tensor().iter().zip(bx.tensor()) {
            assert!((x - y).abs() < 1e-16);
        }
        let first = convex_mixture(
            &[bx.clone(), local_deterministic_box(&[0, 0], &[0, 0], shape2222()).unwrap()],
            &[1.0, 0.0],
        )
        .unwrap();
        assert_eq!(first.tensor(), bx.tensor());
    }

    #[test]
    fn mixture_of_local_boxes_stays_nonsignaling() {
        let sh = shape2222();
        let b1 = local_deterministic_box(&[0, 1], &[1, 0], sh).unwrap();
        let b2 = local_deterministic_box(&[1, 1], &[0, 0], sh).unwrap();
        let mix = convex_mixture(&[b1, b2], &[0.3, 0.7]).unwrap();
        assert_eq!(mix.verify_nonsignaling(0.0).max_residual, 0.0);
    }

    #[test]
    fn mixture_errors() {
        let bx = pr_box();
        let sh3 = BoxShape::new(3, 2, 2, 2).unwrap();
        let other = local_deterministic_box(&[0, 0, 0], &[0, 0], sh3).unwrap();
        assert!(matches!(
            convex_mixture(&[bx.clone(), other], &[0.5, 0.5]),
            Err(BoxError::ShapeMismatch)
        ));
        assert!(matches!(
            convex_mixture(&[bx.clone(), bx.clone()], &[0.6, 0.6]),
            Err(BoxError::BadWeights { .. })
        ));
    }

    #[test]
    fn pr_mutual_information_is_one_bit() {
        let bx = pr_box();
        for a in 0..2 {
            for b in 0..2 {
                assert!((bx.conditional_mutual_information(a, b) - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn cbox_of_pr_is_deterministic() {
        let cb = pr_box().to_cbox();
        assert_eq!(cb.n_inputs(), 4);
        assert!(cb.dropped.is_empty());
        for (x, &(r, a)) in cb.inputs.iter().enumerate() {
            for b in 0..2 {
                let expect = r ^ (a & b);
                assert_eq!(cb.prob(x, b, expect), 1.0);
                assert_eq!(cb.prob(x, b, 1 - expect), 0.0);
            }
        }
        cb.validate(1e-12).unwrap();
    }

    #[test]
    fn cbox_reconstructs_box() {
        let bx = pr_box();
        let m = bx.marginals();
        let cb = bx.to_cbox();
        for (x, &(r, a)) in cb.inputs.iter().enumerate() {
            for b in 0..2 {
                for s in 0..2 {
                    let back = cb.prob(x, b, s) * m.alice[a][r];
                    assert!((back - bx.prob(a, b, r, s)).abs() <= CONSTRUCTION_TOL);
                }
            }
        }
    }

    #[test]
    fn cbox_drops_zero_marginal_inputs() {
        let sh = shape2222();
        let det = local_deterministic_box(&[0, 1], &[0, 1], sh).unwrap();
        let cb = det.to_cbox();
        assert_eq!(cb.n_inputs(), 2);
        assert_eq!(cb.dropped.len(), 2);
    }

    #[test]
    fn json_round_trip_is_exact() {
        let bx = pr_box();
        let text = bx.to_json();
        let back = NsBox::from_json(&text).unwrap();
        assert_eq!(back.tensor(), bx.tensor());
        assert_eq!(back.name(), Some("pr"));

        // a value with no short decimal representation survives exactly
        let mut p = bx.tensor().to_vec();
        let sh = shape2222();
        p[flatten(sh, 0, 0, 0, 0)] = 0.1 + 1e-17;
        let odd = NsBox::new(sh, p.clone()).unwrap();
        let back = NsBox::from_json(&odd.to_json()).unwrap();
        assert_eq!(back.tensor(), &p[..]);
    }

    #[test]
    fn json_missing_field_names_it() {
        let err = NsBox::from_json(r#"{"nA":2,"nB":2,"nR":2,"nS":2}"#).unwrap_err();
        assert!(err.to_string().contains('P'), "message was: {err}");
    }

    #[test]
    fn validate_rejects_negative_beyond_tol() {
        let sh = shape2222();
        let mut p = pr_box().tensor().to_vec();
        p[0] -= 1e-6;
        let bx = NsBox::new(sh, p).unwrap();
        assert!(matches!(bx.validate(1e-9), Err(BoxError::Negative { .. })));
    }
}
