use serde_json::Value;

use crate::error::{Error, Result};
use crate::ring::{Elem, FiniteRing, UnitaryRing};

/// Column vector over a finite ring.
pub type Vector = Vec<Elem>;

/// Dense row-major matrix of ring elements.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Mat {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<Elem>,
}

impl Mat {
    pub fn zeros(rows: usize, cols: usize) -> Mat {
        Mat {
            rows,
            cols,
            data: vec![0; rows * cols],
        }
    }

    pub fn identity(ring: &FiniteRing, n: usize) -> Mat {
        let mut m = Mat::zeros(n, n);
        for i in 0..n {
            m.set(i, i, ring.one());
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<Elem>>) -> Result<Mat> {
        let r = rows.len();
        let c = rows.first().map_or(0, |x| x.len());
        if rows.iter().any(|x| x.len() != c) {
            return Err(Error::ShapeMismatch("ragged matrix".into()));
        }
        Ok(Mat {
            rows: r,
            cols: c,
            data: rows.concat(),
        })
    }

    pub fn from_columns(rows: usize, cols: &[Vector]) -> Mat {
        let mut m = Mat::zeros(rows, cols.len());
        for (j, c) in cols.iter().enumerate() {
            for (i, &x) in c.iter().enumerate().take(rows) {
                m.set(i, j, x);
            }
        }
        m
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Elem {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, a: Elem) {
        self.data[i * self.cols + j] = a;
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn col(&self, j: usize) -> Vector {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn row(&self, i: usize) -> Vector {
        self.data[i * self.cols..(i + 1) * self.cols].to_vec()
    }

    pub fn columns(&self) -> Vec<Vector> {
        (0..self.cols).map(|j| self.col(j)).collect()
    }

    pub fn mul(&self, ring: &FiniteRing, other: &Mat) -> Mat {
        assert_eq!(self.cols, other.rows, "matrix product shape");
        let mut out = Mat::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for j in 0..other.cols {
                let mut acc = 0;
                for l in 0..self.cols {
                    let a = self.get(i, l);
                    if a != 0 {
                        acc = ring.add(acc, ring.mul(a, other.get(l, j)));
                    }
                }
                out.set(i, j, acc);
            }
        }
        out
    }

    pub fn apply(&self, ring: &FiniteRing, v: &[Elem]) -> Vector {
        assert_eq!(self.cols, v.len(), "matrix-vector shape");
        (0..self.rows)
            .map(|i| {
                let mut acc = 0;
                for (l, &x) in v.iter().enumerate() {
                    let a = self.get(i, l);
                    if a != 0 && x != 0 {
                        acc = ring.add(acc, ring.mul(a, x));
                    }
                }
                acc
            })
            .collect()
    }

    pub fn add(&self, ring: &FiniteRing, other: &Mat) -> Mat {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.zip(other, |a, b| ring.add(a, b))
    }

    pub fn sub(&self, ring: &FiniteRing, other: &Mat) -> Mat {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.zip(other, |a, b| ring.sub(a, b))
    }

    fn zip(&self, other: &Mat, f: impl Fn(Elem, Elem) -> Elem) -> Mat {
        Mat {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    pub fn map(&self, f: impl Fn(Elem) -> Elem) -> Mat {
        Mat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&a| f(a)).collect(),
        }
    }

    pub fn transpose(&self) -> Mat {
        let mut out = Mat::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set(j, i, self.get(i, j));
            }
        }
        out
    }

    /// Entrywise σ, then transpose.
    pub fn sigma_transpose(&self, ur: &UnitaryRing) -> Mat {
        self.map(|a| ur.sigma(a)).transpose()
    }

    pub fn left_scale(&self, ring: &FiniteRing, a: Elem) -> Mat {
        self.map(|x| ring.mul(a, x))
    }

    pub fn block_diag(a: &Mat, b: &Mat) -> Mat {
        let mut out = Mat::zeros(a.rows + b.rows, a.cols + b.cols);
        for i in 0..a.rows {
            for j in 0..a.cols {
                out.set(i, j, a.get(i, j));
            }
        }
        for i in 0..b.rows {
            for j in 0..b.cols {
                out.set(a.rows + i, a.cols + j, b.get(i, j));
            }
        }
        out
    }

    /// Rows `r0..r0+nr`, columns `c0..c0+nc`.
    pub fn block(&self, r0: usize, nr: usize, c0: usize, nc: usize) -> Mat {
        let mut out = Mat::zeros(nr, nc);
        for i in 0..nr {
            for j in 0..nc {
                out.set(i, j, self.get(r0 + i, c0 + j));
            }
        }
        out
    }

    pub fn is_idempotent(&self, ring: &FiniteRing) -> bool {
        self.is_square() && self.mul(ring, self) == *self
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&a| a == 0)
    }

    /// Nested-array literal.
    pub fn to_json(&self, ring: &FiniteRing) -> Value {
        Value::Array(
            (0..self.rows)
                .map(|i| {
                    Value::Array(
                        (0..self.cols)
                            .map(|j| ring.literal(self.get(i, j)))
                            .collect(),
                    )
                })
                .collect(),
        )
    }

    /// Parses a nested-array literal; `[]` is the 0×0 matrix.
    pub fn from_json(ring: &FiniteRing, v: &Value) -> Result<Mat> {
        let rows = v.as_array().ok_or_else(|| {
            Error::MalformedSpec("matrix literal must be an array of rows".into())
        })?;
        let parsed = rows
            .iter()
            .map(|r| {
                r.as_array()
                    .ok_or_else(|| Error::MalformedSpec("matrix row must be an array".into()))?
                    .iter()
                    .map(|x| ring.parse_literal(x))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Mat::from_rows(parsed)
    }
}

pub fn vadd(ring: &FiniteRing, a: &[Elem], b: &[Elem]) -> Vector {
    a.iter().zip(b).map(|(&x, &y)| ring.add(x, y)).collect()
}

pub fn vsub(ring: &FiniteRing, a: &[Elem], b: &[Elem]) -> Vector {
    a.iter().zip(b).map(|(&x, &y)| ring.sub(x, y)).collect()
}

pub fn vneg(ring: &FiniteRing, a: &[Elem]) -> Vector {
    a.iter().map(|&x| ring.neg(x)).collect()
}

/// v·a (right scalar action).
pub fn vscale(ring: &FiniteRing, v: &[Elem], a: Elem) -> Vector {
    v.iter().map(|&x| ring.mul(x, a)).collect()
}

pub fn is_zero(v: &[Elem]) -> bool {
    v.iter().all(|&x| x == 0)
}

pub fn vector_to_json(ring: &FiniteRing, v: &[Elem]) -> Value {
    Value::Array(v.iter().map(|&a| ring.literal(a)).collect())
}

pub fn vector_from_json(ring: &FiniteRing, v: &Value) -> Result<Vector> {
    v.as_array()
        .ok_or_else(|| Error::MalformedSpec("vector literal must be an array".into()))?
        .iter()
        .map(|x| ring.parse_literal(x))
        .collect()
}
