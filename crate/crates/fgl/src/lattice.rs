//! Sampled functions on uniform box lattices.
//!
//! A [`LatticeFunction`] holds node values on a vertex-centered uniform grid
//! over an axis-aligned box (spacing h identical per axis, nodes including
//! the box corners), evaluates anywhere in the box by piecewise-linear
//! interpolation (bilinear in 2D), and carries an [`ExteriorRule`] stating
//! what is known about the function outside the box: identically zero, a
//! closed-form extension, or only a magnitude bound. The exterior rule is
//! what makes nonlocal quadrature honest — every operator evaluation must
//! say how it treated the unbounded region.

use std::fmt;
use std::path::Path;
use std::sync::Arc;

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// Errors from lattice construction, evaluation, and serialization.
#[derive(Debug, Error)]
pub enum LatticeError {
    #[error("invalid lattice shape: {0}")]
    BadShape(String),
    #[error("lattice values must be finite (index {index} is {value})")]
    NonFinite { index: usize, value: f64 },
    #[error("point ({0}, {1}) lies outside the box and the exterior is only bounded")]
    ExteriorUnknown(f64, f64),
    #[error("lattice file error: {0}")]
    Io(#[from] std::io::Error),
    #[error("lattice file format error: {0}")]
    Format(String),
}

/// Axis-aligned box in one or two dimensions (1D boxes are intervals with a
/// collapsed second axis).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoxRegion {
    pub dim: usize,
    pub lo: [f64; 2],
    pub hi: [f64; 2],
}

impl BoxRegion {
    /// Interval [a, b] as a 1D box.
    pub fn interval(a: f64, b: f64) -> Result<Self, LatticeError> {
        if !(a.is_finite() && b.is_finite() && b > a) {
            return Err(LatticeError::BadShape(format!("degenerate interval [{a}, {b}]")));
        }
        Ok(Self { dim: 1, lo: [a, 0.0], hi: [b, 0.0] })
    }

    /// Rectangle [ax, bx] × [ay, by].
    pub fn rectangle(lo: [f64; 2], hi: [f64; 2]) -> Result<Self, LatticeError> {
        if !(lo.iter().chain(&hi).all(|v| v.is_finite()) && hi[0] > lo[0] && hi[1] > lo[1]) {
            return Err(LatticeError::BadShape(format!("degenerate rectangle {lo:?}..{hi:?}")));
        }
        Ok(Self { dim: 2, lo, hi })
    }

    /// Edge lengths (second entry 0 in 1D).
    pub fn extent(&self) -> [f64; 2] {
        [self.hi[0] - self.lo[0], self.hi[1] - self.lo[1]]
    }

    /// True if `p` lies in the closed box.
    pub fn contains(&self, p: [f64; 2]) -> bool {
        let in_x = p[0] >= self.lo[0] && p[0] <= self.hi[0];
        if self.dim == 1 {
            in_x
        } else {
            in_x && p[1] >= self.lo[1] && p[1] <= self.hi[1]
        }
    }

    /// Distance from an interior point to the box boundary (negative
    /// outside).
    pub fn boundary_distance(&self, p: [f64; 2]) -> f64 {
        let dx = (p[0] - self.lo[0]).min(self.hi[0] - p[0]);
        if self.dim == 1 {
            dx
        } else {
            dx.min((p[1] - self.lo[1]).min(self.hi[1] - p[1]))
        }
    }

    /// Radius of the smallest ball around `p` containing the whole box:
    /// beyond it, an exterior rule alone determines the integrand.
    pub fn cover_radius(&self, p: [f64; 2]) -> f64 {
        let fx = (p[0] - self.lo[0]).abs().max((p[0] - self.hi[0]).abs());
        if self.dim == 1 {
            fx
        } else {
            let fy = (p[1] - self.lo[1]).abs().max((p[1] - self.hi[1]).abs());
            (fx * fx + fy * fy).sqrt()
        }
    }
}

type FieldFn = Arc<dyn Fn([f64; 2]) -> f64 + Send + Sync>;

/// What is known about the function outside its box.
#[derive(Clone)]
pub enum ExteriorRule {
    /// u ≡ 0 outside (membership in the zero-trace energy space).
    Zero,
    /// Closed-form extension evaluated on demand; the label travels into
    /// reports, the closure does not survive serialization.
    Analytic { label: String, f: FieldFn },
    /// Only |u| ≤ m is known outside; operators must report brackets or
    /// refuse.
    Bounded(f64),
}

impl ExteriorRule {
    pub fn analytic(label: impl Into<String>, f: impl Fn([f64; 2]) -> f64 + Send + Sync + 'static) -> Self {
        Self::Analytic { label: label.into(), f: Arc::new(f) }
    }
}

impl fmt::Debug for ExteriorRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Zero => write!(f, "Zero"),
            Self::Analytic { label, .. } => write!(f, "Analytic({label})"),
            Self::Bounded(m) => write!(f, "Bounded({m})"),
        }
    }
}

impl Serialize for ExteriorRule {
    fn serialize<S: Serializer>(&self, ser: S) -> Result<S::Ok, S::Error> {
        match self {
            Self::Zero => ser.serialize_str("zero"),
            Self::Bounded(m) => {
                use serde::ser::SerializeMap;
                let mut map = ser.serialize_map(Some(1))?;
                map.serialize_entry("bounded", m)?;
                map.end()
            }
            Self::Analytic { label, .. } => {
                use serde::ser::SerializeMap;
                let mut map = ser.serialize_map(Some(1))?;
                map.serialize_entry("analytic", label)?;
                map.end()
            }
        }
    }
}

impl<'de> Deserialize<'de> for ExteriorRule {
    fn deserialize<D: Deserializer<'de>>(de: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Tag(String),
            Map { bounded: Option<f64>, analytic: Option<String> },
        }
        match Raw::deserialize(de)? {
            Raw::Tag(t) if t == "zero" => Ok(Self::Zero),
            Raw::Tag(t) => Err(D::Error::custom(format!("unknown exterior rule `{t}`"))),
            Raw::Map { bounded: Some(m), .. } => Ok(Self::Bounded(m)),
            Raw::Map { analytic: Some(label), .. } => Err(D::Error::custom(format!(
                "analytic exterior `{label}` cannot be restored from disk"
            ))),
            _ => Err(D::Error::custom("unknown exterior rule")),
        }
    }
}

/// Interpolation stencil: up to four (node, weight) pairs, zero-padded.
#[derive(Debug, Clone, Copy)]
pub struct Stencil4 {
    pub idx: [usize; 4],
    pub w: [f64; 4],
}

impl Stencil4 {
    /// Applies the stencil to a value array.
    pub fn apply(&self, vals: &[f64]) -> f64 {
        self.idx
            .iter()
            .zip(&self.w)
            .map(|(&i, &w)| w * vals[i])
            .sum()
    }
}

/// Node values on a uniform vertex-centered grid over a box, with an
/// exterior rule.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LatticeFunction {
    pub dim: usize,
    #[serde(rename = "box")]
    pub box_region: BoxRegion,
    pub h: f64,
    /// Nodes per axis; `shape[1] == 1` in 1D.
    pub shape: [usize; 2],
    /// Row-major values: index = iy * shape[0] + ix.
    pub values: Vec<f64>,
    pub exterior: ExteriorRule,
}

impl LatticeFunction {
    /// Builds a lattice over `box_region` with `nx` nodes along x (node
    /// count along y follows from the common spacing), taking values from
    /// `f` at the nodes.
    pub fn sample(
        box_region: BoxRegion,
        nx: usize,
        exterior: ExteriorRule,
        f: impl Fn([f64; 2]) -> f64,
    ) -> Result<Self, LatticeError> {
        if nx < 2 {
            return Err(LatticeError::BadShape(format!("need at least 2 nodes per axis, got {nx}")));
        }
        let ext = box_region.extent();
        let h = ext[0] / (nx - 1) as f64;
        let ny = if box_region.dim == 1 {
            1
        } else {
            let ny_f = ext[1] / h + 1.0;
            let ny = ny_f.round() as usize;
            if ny < 2 || ((ny - 1) as f64 * h - ext[1]).abs() > 1e-9 * h {
                return Err(LatticeError::BadShape(format!(
                    "y-extent {} is not an integer multiple of spacing {h}",
                    ext[1]
                )));
            }
            ny
        };
        let mut values = Vec::with_capacity(nx * ny);
        for iy in 0..ny {
            for ix in 0..nx {
                let p = [
                    box_region.lo[0] + ix as f64 * h,
                    box_region.lo[1] + iy as f64 * h,
                ];
                values.push(f(p));
            }
        }
        let out = Self { dim: box_region.dim, box_region, h, shape: [nx, ny], values, exterior: ext_check(exterior)? };
        out.validate()?;
        Ok(out)
    }

    /// Wraps existing node values; validates shape and finiteness.
    pub fn from_values(
        box_region: BoxRegion,
        shape: [usize; 2],
        values: Vec<f64>,
        exterior: ExteriorRule,
    ) -> Result<Self, LatticeError> {
        let ext = box_region.extent();
        if shape[0] < 2 || (box_region.dim == 2 && shape[1] < 2) || (box_region.dim == 1 && shape[1] != 1) {
            return Err(LatticeError::BadShape(format!("bad shape {shape:?} for dim {}", box_region.dim)));
        }
        let h = ext[0] / (shape[0] - 1) as f64;
        if box_region.dim == 2 {
            let hy = ext[1] / (shape[1] - 1) as f64;
            if (h - hy).abs() > 1e-9 * h {
                return Err(LatticeError::BadShape(format!(
                    "anisotropic spacing: hx = {h}, hy = {hy}"
                )));
            }
        }
        let out = Self { dim: box_region.dim, box_region, h, shape, values, exterior: ext_check(exterior)? };
        out.validate()?;
        Ok(out)
    }

    fn validate(&self) -> Result<(), LatticeError> {
        if self.values.len() != self.shape[0] * self.shape[1] {
            return Err(LatticeError::BadShape(format!(
                "{} values for shape {:?}",
                self.values.len(),
                self.shape
            )));
        }
        if let Some((index, &value)) = self.values.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(LatticeError::NonFinite { index, value });
        }
        Ok(())
    }

    /// Number of nodes.
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Flat index of node (ix, iy).
    pub fn index(&self, ix: usize, iy: usize) -> usize {
        iy * self.shape[0] + ix
    }

    /// Coordinates of node with flat index `i`.
    pub fn node(&self, i: usize) -> [f64; 2] {
        let ix = i % self.shape[0];
        let iy = i / self.shape[0];
        [
            self.box_region.lo[0] + ix as f64 * self.h,
            self.box_region.lo[1] + iy as f64 * self.h,
        ]
    }

    /// Tensor-trapezoid cell volume of node `i`: h^dim in the interior,
    /// halved per face the node sits on. These weights make the nodal
    /// quadrature Σ w_i f_i the exact trapezoid rule on the box.
    pub fn node_weight(&self, i: usize) -> f64 {
        let ix = i % self.shape[0];
        let iy = i / self.shape[0];
        let edge = |k: usize, n: usize| if k == 0 || k == n - 1 { 0.5 } else { 1.0 };
        let mut w = self.h * edge(ix, self.shape[0]);
        if self.dim == 2 {
            w *= self.h * edge(iy, self.shape[1]);
        }
        w
    }

    /// Nodal interpolation stencil at a point of the closed box: up to four
    /// (node index, weight) pairs reproducing [`Self::eval_inside`], padded
    /// with zero weights. Lets assembly code differentiate interpolated
    /// values exactly.
    pub fn interp_stencil(&self, p: [f64; 2]) -> Stencil4 {
        let fx = ((p[0] - self.box_region.lo[0]) / self.h).clamp(0.0, (self.shape[0] - 1) as f64);
        let ix = (fx.floor() as usize).min(self.shape[0] - 2);
        let tx = fx - ix as f64;
        if self.dim == 1 {
            return Stencil4 {
                idx: [ix, ix + 1, 0, 0],
                w: [1.0 - tx, tx, 0.0, 0.0],
            };
        }
        let fy = ((p[1] - self.box_region.lo[1]) / self.h).clamp(0.0, (self.shape[1] - 1) as f64);
        let iy = (fy.floor() as usize).min(self.shape[1] - 2);
        let ty = fy - iy as f64;
        Stencil4 {
            idx: [
                self.index(ix, iy),
                self.index(ix + 1, iy),
                self.index(ix, iy + 1),
                self.index(ix + 1, iy + 1),
            ],
            w: [
                (1.0 - tx) * (1.0 - ty),
                tx * (1.0 - ty),
                (1.0 - tx) * ty,
                tx * ty,
            ],
        }
    }

    /// Piecewise-linear (bilinear in 2D) interpolation at a point of the
    /// closed box.
    pub fn eval_inside(&self, p: [f64; 2]) -> f64 {
        debug_assert!(self.box_region.contains(p), "eval_inside outside box: {p:?}");
        let fx = ((p[0] - self.box_region.lo[0]) / self.h).clamp(0.0, (self.shape[0] - 1) as f64);
        let ix = (fx.floor() as usize).min(self.shape[0] - 2);
        let tx = fx - ix as f64;
        if self.dim == 1 {
            let a = self.values[ix];
            let b = self.values[ix + 1];
            return a + tx * (b - a);
        }
        let fy = ((p[1] - self.box_region.lo[1]) / self.h).clamp(0.0, (self.shape[1] - 1) as f64);
        let iy = (fy.floor() as usize).min(self.shape[1] - 2);
        let ty = fy - iy as f64;
        let v00 = self.values[self.index(ix, iy)];
        let v10 = self.values[self.index(ix + 1, iy)];
        let v01 = self.values[self.index(ix, iy + 1)];
        let v11 = self.values[self.index(ix + 1, iy + 1)];
        v00 * (1.0 - tx) * (1.0 - ty) + v10 * tx * (1.0 - ty) + v01 * (1.0 - tx) * ty + v11 * tx * ty
    }

    /// Evaluation anywhere: interpolation inside the box, the exterior rule
    /// outside. Returns an error for points where only a bound is known.
    pub fn eval(&self, p: [f64; 2]) -> Result<f64, LatticeError> {
        if self.box_region.contains(p) {
            return Ok(self.eval_inside(p));
        }
        match &self.exterior {
            ExteriorRule::Zero => Ok(0.0),
            ExteriorRule::Analytic { f, .. } => Ok(f(p)),
            ExteriorRule::Bounded(_) => Err(LatticeError::ExteriorUnknown(p[0], p[1])),
        }
    }

    /// Largest absolute node value.
    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// Writes the node series as CSV with header `x[,y],value`.
    pub fn write_csv(&self, path: &Path) -> Result<(), LatticeError> {
        let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
        if self.dim == 1 {
            w.write_record(["x", "value"]).map_err(csv_err)?;
        } else {
            w.write_record(["x", "y", "value"]).map_err(csv_err)?;
        }
        for i in 0..self.len() {
            let p = self.node(i);
            let rec: Vec<String> = if self.dim == 1 {
                vec![format!("{:.17e}", p[0]), format!("{:.17e}", self.values[i])]
            } else {
                vec![
                    format!("{:.17e}", p[0]),
                    format!("{:.17e}", p[1]),
                    format!("{:.17e}", self.values[i]),
                ]
            };
            w.write_record(&rec).map_err(csv_err)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Writes the full lattice (metadata + values) as JSON.
    pub fn write_json(&self, path: &Path) -> Result<(), LatticeError> {
        let file = std::fs::File::create(path)?;
        serde_json::to_writer_pretty(std::io::BufWriter::new(file), self)
            .map_err(|e| LatticeError::Format(e.to_string()))?;
        Ok(())
    }

    /// Reads a lattice back from JSON (analytic exteriors do not round-trip
    /// and produce a format error).
    pub fn read_json(path: &Path) -> Result<Self, LatticeError> {
        let file = std::fs::File::open(path)?;
        let out: Self = serde_json::from_reader(std::io::BufReader::new(file))
            .map_err(|e| LatticeError::Format(e.to_string()))?;
        out.validate()?;
        Ok(out)
    }
}

fn ext_check(e: ExteriorRule) -> Result<ExteriorRule, LatticeError> {
    if let ExteriorRule::Bounded(m) = &e {
        if !(m.is_finite() && *m >= 0.0) {
            return Err(LatticeError::BadShape(format!("exterior bound must be finite nonnegative, got {m}")));
        }
    }
    Ok(e)
}

fn csv_err(e: csv::Error) -> LatticeError {
    LatticeError::Format(e.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn interpolation_reproduces_affine_functions() {
        let rect = BoxRegion::rectangle([-1.0, 0.0], [1.0, 1.0]).unwrap();
        let f = |p: [f64; 2]| 2.0 * p[0] - 3.0 * p[1] + 0.5;
        let u = LatticeFunction::sample(rect, 21, ExteriorRule::Zero, f).unwrap();
        assert_eq!(u.shape, [21, 11]);
        for &p in &[[0.33, 0.77], [-0.99, 0.01], [1.0, 1.0], [0.0, 0.5]] {
            assert_relative_eq!(u.eval_inside(p), f(p), max_relative = 1e-12, epsilon = 1e-12);
        }
    }

    #[test]
    fn node_weights_sum_to_box_volume() {
        let rect = BoxRegion::rectangle([0.0, 0.0], [2.0, 1.0]).unwrap();
        let u = LatticeFunction::sample(rect, 41, ExteriorRule::Zero, |_| 0.0).unwrap();
        let total: f64 = (0..u.len()).map(|i| u.node_weight(i)).sum();
        assert_relative_eq!(total, 2.0, max_relative = 1e-12);

        let seg = BoxRegion::interval(-1.0, 3.0).unwrap();
        let v = LatticeFunction::sample(seg, 17, ExteriorRule::Zero, |_| 0.0).unwrap();
        let total: f64 = (0..v.len()).map(|i| v.node_weight(i)).sum();
        assert_relative_eq!(total, 4.0, max_relative = 1e-12);
    }

    #[test]
    fn exterior_rules_govern_outside_evaluation() {
        let seg = BoxRegion::interval(0.0, 1.0).unwrap();
        let z = LatticeFunction::sample(seg, 5, ExteriorRule::Zero, |p| p[0]).unwrap();
        assert_eq!(z.eval([2.0, 0.0]).unwrap(), 0.0);

        let a = LatticeFunction::sample(
            seg.clone(),
            5,
            ExteriorRule::analytic("linear", |p| p[0]),
            |p| p[0],
        )
        .unwrap();
        assert_relative_eq!(a.eval([2.5, 0.0]).unwrap(), 2.5);

        let b = LatticeFunction::sample(seg, 5, ExteriorRule::Bounded(1.0), |p| p[0]).unwrap();
        assert!(matches!(b.eval([2.0, 0.0]), Err(LatticeError::ExteriorUnknown(..))));
        assert_relative_eq!(b.eval([0.5, 0.0]).unwrap(), 0.5);
    }

    #[test]
    fn rejects_non_finite_values_and_bad_shapes() {
        let seg = BoxRegion::interval(0.0, 1.0).unwrap();
        assert!(matches!(
            LatticeFunction::sample(seg, 5, ExteriorRule::Zero, |p| if p[0] > 0.9 { f64::NAN } else { 0.0 }),
            Err(LatticeError::NonFinite { .. })
        ));
        let rect = BoxRegion::rectangle([0.0, 0.0], [1.0, 0.37]).unwrap();
        assert!(LatticeFunction::sample(rect, 11, ExteriorRule::Zero, |_| 0.0).is_err());
        assert!(BoxRegion::interval(1.0, 1.0).is_err());
    }

    #[test]
    fn json_round_trip_preserves_values_and_rejects_analytic() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("u.json");
        let seg = BoxRegion::interval(-1.0, 1.0).unwrap();
        let u = LatticeFunction::sample(seg.clone(), 9, ExteriorRule::Zero, |p| p[0] * p[0]).unwrap();
        u.write_json(&path).unwrap();
        let v = LatticeFunction::read_json(&path).unwrap();
        assert_eq!(u.values, v.values);
        assert_eq!(u.shape, v.shape);

        let a = LatticeFunction::sample(seg, 9, ExteriorRule::analytic("f", |_| 1.0), |p| p[0]).unwrap();
        let path2 = dir.path().join("a.json");
        a.write_json(&path2).unwrap();
        assert!(LatticeFunction::read_json(&path2).is_err());
    }

    #[test]
    fn csv_series_has_one_row_per_node() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("u.csv");
        let rect = BoxRegion::rectangle([0.0, 0.0], [1.0, 1.0]).unwrap();
        let u = LatticeFunction::sample(rect, 4, ExteriorRule::Zero, |p| p[0] + p[1]).unwrap();
        u.write_csv(&path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text.lines().count(), 1 + 16);
        assert!(text.lines().next().unwrap().starts_with("x,y,value"));
    }
}
