//! Caller-supplied distributions: closures or a tabulated grid.

use std::fmt;
use std::path::Path;
use std::sync::Arc;

use serde::Deserialize;

use crate::error::{Error, Result};

type Func = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A continuous base variate described by caller-supplied evaluators.
///
/// The location/scale parameters of the owning
/// [`Distribution`](super::Distribution) act on this base variate, which need
/// not be standardized itself.
#[derive(Clone)]
pub struct CustomFamily {
    pub(crate) name: String,
    pub(crate) cdf: Func,
    pub(crate) pdf: Func,
    pub(crate) quantile: Option<Func>,
    /// Support of the base variate; infinite ends allowed.
    pub(crate) support: (f64, f64),
    /// Moments of order strictly below this exist; `None` means all of them.
    pub(crate) tail_index: Option<f64>,
    /// Interior points where the density may have kinks.
    pub(crate) breaks: Vec<f64>,
}

impl fmt::Debug for CustomFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CustomFamily")
            .field("name", &self.name)
            .field("support", &self.support)
            .field("tail_index", &self.tail_index)
            .field("has_quantile", &self.quantile.is_some())
            .finish()
    }
}

impl CustomFamily {
    pub fn new<C, P>(name: impl Into<String>, cdf: C, pdf: P) -> Self
    where
        C: Fn(f64) -> f64 + Send + Sync + 'static,
        P: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self {
            name: name.into(),
            cdf: Arc::new(cdf),
            pdf: Arc::new(pdf),
            quantile: None,
            support: (f64::NEG_INFINITY, f64::INFINITY),
            tail_index: None,
            breaks: Vec::new(),
        }
    }

    pub fn with_quantile<Q>(mut self, quantile: Q) -> Self
    where
        Q: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        self.quantile = Some(Arc::new(quantile));
        self
    }

    pub fn with_support(mut self, lo: f64, hi: f64) -> Self {
        self.support = (lo, hi);
        self
    }

    /// Declares that moments of order `k` exist iff `k < index`.
    pub fn with_tail_index(mut self, index: f64) -> Self {
        self.tail_index = Some(index);
        self
    }

    pub fn with_breaks(mut self, breaks: Vec<f64>) -> Self {
        self.breaks = breaks;
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn moment_exists(&self, k: u32) -> bool {
        self.tail_index.is_none_or(|idx| (k as f64) < idx)
    }

    /// Builds a family from a tabulated grid, see [`TabulatedDescriptor`].
    pub fn tabulated(desc: TabulatedDescriptor) -> Result<Self> {
        let table = Arc::new(Tabulated::new(desc.x, desc.cdf, desc.pdf)?);
        let (lo, hi) = (table.x[0], *table.x.last().unwrap());
        let (t1, t2) = (table.clone(), table.clone());
        let breaks = table.x[1..table.x.len() - 1].to_vec();
        Ok(Self {
            name: desc.name.unwrap_or_else(|| "custom".to_string()),
            cdf: Arc::new(move |x| t1.cdf(x)),
            pdf: Arc::new(move |x| t2.pdf(x)),
            quantile: None,
            support: (lo, hi),
            tail_index: None,
            breaks,
        })
    }

    /// Reads a JSON descriptor file and builds the tabulated family.
    pub fn from_json_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::domain(format!("cannot read {}: {e}", path.display())))?;
        let desc: TabulatedDescriptor = serde_json::from_str(&text)
            .map_err(|e| Error::domain(format!("bad descriptor {}: {e}", path.display())))?;
        Self::tabulated(desc)
    }
}

/// JSON descriptor of a grid-tabulated distribution.
///
/// ```json
/// { "name": "tri", "x": [-1, 0, 1], "cdf": [0, 0.5, 1], "pdf": [0, 1, 0] }
/// ```
///
/// The cdf is interpolated by a monotone cubic Hermite spline through the
/// points, using the tabulated densities as slopes (clipped where needed to
/// keep the spline nondecreasing). The density is the derivative of that
/// spline, so cdf and pdf stay consistent. Outside the grid the cdf is 0 / 1.
#[derive(Debug, Clone, Deserialize)]
pub struct TabulatedDescriptor {
    #[serde(default)]
    pub name: Option<String>,
    pub x: Vec<f64>,
    pub cdf: Vec<f64>,
    pub pdf: Vec<f64>,
}

#[derive(Debug)]
struct Tabulated {
    x: Vec<f64>,
    c: Vec<f64>,
    slope: Vec<f64>,
}

impl Tabulated {
    fn new(x: Vec<f64>, c: Vec<f64>, pdf: Vec<f64>) -> Result<Self> {
        let n = x.len();
        if n < 2 || c.len() != n || pdf.len() != n {
            return Err(Error::domain("tabulated grid needs >= 2 points and equal lengths"));
        }
        if x.iter().chain(&c).chain(&pdf).any(|v| !v.is_finite()) {
            return Err(Error::domain("tabulated grid contains non-finite values"));
        }
        if x.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::domain("grid abscissae must be strictly increasing"));
        }
        if c.windows(2).any(|w| w[1] < w[0]) || c[0] < 0.0 || c[n - 1] > 1.0 {
            return Err(Error::domain("tabulated cdf must be nondecreasing within [0, 1]"));
        }
        if (c[0]).abs() > 1e-9 || (c[n - 1] - 1.0).abs() > 1e-9 {
            return Err(Error::domain("tabulated cdf must start at 0 and end at 1"));
        }
        if pdf.iter().any(|&d| d < 0.0) {
            return Err(Error::domain("tabulated pdf must be nonnegative"));
        }
        // Fritsch–Carlson limiting of the supplied slopes.
        let mut slope = pdf;
        for i in 0..n - 1 {
            let h = x[i + 1] - x[i];
            let delta = (c[i + 1] - c[i]) / h;
            if delta == 0.0 {
                slope[i] = 0.0;
                slope[i + 1] = 0.0;
                continue;
            }
            let a = slope[i] / delta;
            let b = slope[i + 1] / delta;
            let s = a * a + b * b;
            if s > 9.0 {
                let tau = 3.0 / s.sqrt();
                slope[i] = tau * a * delta;
                slope[i + 1] = tau * b * delta;
            }
        }
        Ok(Self { x, c, slope })
    }

    fn locate(&self, x: f64) -> Option<usize> {
        let n = self.x.len();
        if x < self.x[0] || x > self.x[n - 1] {
            return None;
        }
        let i = self.x.partition_point(|&g| g <= x);
        Some(i.clamp(1, n - 1) - 1)
    }

    fn cdf(&self, x: f64) -> f64 {
        let n = self.x.len();
        if x <= self.x[0] {
            return 0.0;
        }
        if x >= self.x[n - 1] {
            return 1.0;
        }
        let i = self.locate(x).unwrap();
        let h = self.x[i + 1] - self.x[i];
        let t = (x - self.x[i]) / h;
        let (t2, t3) = (t * t, t * t * t);
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        // Written in the cell increment to avoid cancellation where c is near 1.
        let rise = self.c[i + 1] - self.c[i];
        (self.c[i] + h01 * rise + h * (h10 * self.slope[i] + h11 * self.slope[i + 1])).clamp(0.0, 1.0)
    }

    fn pdf(&self, x: f64) -> f64 {
        let Some(i) = self.locate(x) else {
            return 0.0;
        };
        let h = self.x[i + 1] - self.x[i];
        let t = (x - self.x[i]) / h;
        let t2 = t * t;
        let d10 = 3.0 * t2 - 4.0 * t + 1.0;
        let d01 = -6.0 * t2 + 6.0 * t;
        let d11 = 3.0 * t2 - 2.0 * t;
        let rise = self.c[i + 1] - self.c[i];
        (d01 * rise / h + d10 * self.slope[i] + d11 * self.slope[i + 1]).max(0.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn triangle() -> TabulatedDescriptor {
        TabulatedDescriptor {
            name: Some("tri".into()),
            x: vec![-1.0, 0.0, 1.0],
            cdf: vec![0.0, 0.5, 1.0],
            pdf: vec![0.0, 1.0, 0.0],
        }
    }

    #[test]
    fn triangle_is_reproduced_exactly() {
        let fam = CustomFamily::tabulated(triangle()).unwrap();
        // Triangular cdf on [-1, 0]: (x + 1)^2 / 2, a cubic Hermite reproduces it.
        for &x in &[-0.75, -0.5, -0.1] {
            let want = 0.5 * (x + 1.0) * (x + 1.0);
            assert!(((fam.cdf)(x) - want).abs() < 1e-14);
            assert!(((fam.pdf)(x) - (x + 1.0)).abs() < 1e-14);
        }
        assert_eq!((fam.cdf)(-2.0), 0.0);
        assert_eq!((fam.cdf)(2.0), 1.0);
        assert_eq!((fam.pdf)(2.0), 0.0);
    }

    #[test]
    fn tail_density_is_smooth_within_a_cell() {
        // cdf = 1 - e^{-x}: in the far tail neighbouring cdf values agree to ~9 digits.
        // The density must stay an exact quadratic inside a cell, so its third
        // difference vanishes far below the density scale.
        let x: Vec<f64> = (0..=4000).map(|i| f64::from(i) * 0.01).collect();
        let cdf = x.iter().map(|v| -(-v).exp_m1()).collect();
        let pdf = x.iter().map(|v| (-v).exp()).collect();
        let fam = CustomFamily::tabulated(TabulatedDescriptor { name: None, x, cdf, pdf }).unwrap();
        let f: Vec<f64> = (0..4).map(|k| (fam.pdf)(18.001 + 0.002 * f64::from(k))).collect();
        let third = f[3] - 3.0 * f[2] + 3.0 * f[1] - f[0];
        assert!(third.abs() < 1e-12 * f[0], "third difference {third:e} at density {:e}", f[0]);
        assert!((f[0] / (-18.001f64).exp() - 1.0).abs() < 1e-4);
    }

    #[test]
    fn rejects_bad_grids() {
        let mut d = triangle();
        d.cdf = vec![0.0, 0.7, 0.6];
        assert!(CustomFamily::tabulated(d).is_err());
        let mut d = triangle();
        d.x = vec![0.0, 0.0, 1.0];
        assert!(CustomFamily::tabulated(d).is_err());
    }

    #[test]
    fn parses_json_descriptor() {
        let d: TabulatedDescriptor =
            serde_json::from_str(r#"{"x":[0,1],"cdf":[0,1],"pdf":[1,1]}"#).unwrap();
        let fam = CustomFamily::tabulated(d).unwrap();
        assert!(((fam.cdf)(0.25) - 0.25).abs() < 1e-15);
        assert_eq!(fam.name(), "custom");
    }
}
