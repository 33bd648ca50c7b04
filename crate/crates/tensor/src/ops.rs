//! Primitive operations and their vector-Jacobian rules.

use crate::error::TensorError;
use crate::graph::{Graph, Op, Var};
use crate::special;
use crate::tensor::Tensor;

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

fn softplus_scalar(x: f64) -> f64 {
    x.max(0.0) + (-x.abs()).exp().ln_1p()
}

/// C[m,n] = op(A) * op(B) via `matrixmultiply`, with optional transposes
/// expressed through strides (no copies).
fn dgemm(
    a: &[f64],
    a_rows: usize,
    a_cols: usize,
    trans_a: bool,
    b: &[f64],
    b_rows: usize,
    b_cols: usize,
    trans_b: bool,
) -> Vec<f64> {
    let (m, k) = if trans_a { (a_cols, a_rows) } else { (a_rows, a_cols) };
    let (kb, n) = if trans_b { (b_cols, b_rows) } else { (b_rows, b_cols) };
    debug_assert_eq!(k, kb);
    let (rsa, csa) = if trans_a {
        (1isize, a_cols as isize)
    } else {
        (a_cols as isize, 1isize)
    };
    let (rsb, csb) = if trans_b {
        (1isize, b_cols as isize)
    } else {
        (b_cols as isize, 1isize)
    };
    let mut c = vec![0.0; m * n];
    unsafe {
        matrixmultiply::dgemm(
            m,
            k,
            n,
            1.0,
            a.as_ptr(),
            rsa,
            csa,
            b.as_ptr(),
            rsb,
            csb,
            0.0,
            c.as_mut_ptr(),
            n as isize,
            1,
        );
    }
    c
}

impl Graph {
    fn binary_same_shape(
        &mut self,
        op_name: &'static str,
        op: Op,
        a: Var,
        b: Var,
        f: impl Fn(f64, f64) -> f64,
    ) -> Result<Var, TensorError> {
        let (va, vb) = (self.value(a), self.value(b));
        if va.shape() != vb.shape() {
            return Err(TensorError::ShapeMismatch {
                op: op_name,
                lhs: va.shape().to_vec(),
                rhs: vb.shape().to_vec(),
            });
        }
        let value = va.zip(vb, f);
        Ok(self.push(op, vec![a, b], value))
    }

    pub fn add(&mut self, a: Var, b: Var) -> Result<Var, TensorError> {
        self.binary_same_shape("add", Op::Add, a, b, |x, y| x + y)
    }

    pub fn sub(&mut self, a: Var, b: Var) -> Result<Var, TensorError> {
        self.binary_same_shape("sub", Op::Sub, a, b, |x, y| x - y)
    }

    pub fn mul(&mut self, a: Var, b: Var) -> Result<Var, TensorError> {
        self.binary_same_shape("mul", Op::Mul, a, b, |x, y| x * y)
    }

    pub fn div(&mut self, a: Var, b: Var) -> Result<Var, TensorError> {
        if let Some(i) = self.value(b).data().iter().position(|&v| v == 0.0) {
            return Err(TensorError::Domain {
                op: "div",
                detail: format!("division by zero at element {i}"),
            });
        }
        self.binary_same_shape("div", Op::Div, a, b, |x, y| x / y)
    }

    pub fn add_scalar(&mut self, a: Var, c: f64) -> Var {
        let value = self.value(a).map(|x| x + c);
        self.push(Op::AddScalar(c), vec![a], value)
    }

    pub fn mul_scalar(&mut self, a: Var, c: f64) -> Var {
        let value = self.value(a).map(|x| x * c);
        self.push(Op::MulScalar(c), vec![a], value)
    }

    pub fn relu(&mut self, a: Var) -> Var {
        let value = self.value(a).map(|x| x.max(0.0));
        self.push(Op::Relu, vec![a], value)
    }

    pub fn softplus(&mut self, a: Var) -> Var {
        let value = self.value(a).map(softplus_scalar);
        self.push(Op::Softplus, vec![a], value)
    }

    pub fn exp(&mut self, a: Var) -> Var {
        let value = self.value(a).map(f64::exp);
        self.push(Op::Exp, vec![a], value)
    }

    pub fn ln(&mut self, a: Var) -> Result<Var, TensorError> {
        if let Some(i) = self.value(a).data().iter().position(|&v| v <= 0.0) {
            return Err(TensorError::Domain {
                op: "ln",
                detail: format!(
                    "log of non-positive value {} at element {i}",
                    self.value(a).data()[i]
                ),
            });
        }
        let value = self.value(a).map(f64::ln);
        Ok(self.push(Op::Ln, vec![a], value))
    }

    pub fn sqrt(&mut self, a: Var) -> Result<Var, TensorError> {
        if let Some(i) = self.value(a).data().iter().position(|&v| v < 0.0) {
            return Err(TensorError::Domain {
                op: "sqrt",
                detail: format!("sqrt of negative value at element {i}"),
            });
        }
        let value = self.value(a).map(f64::sqrt);
        Ok(self.push(Op::Sqrt, vec![a], value))
    }

    pub fn clamp_min(&mut self, a: Var, min: f64) -> Var {
        let value = self.value(a).map(|x| x.max(min));
        self.push(Op::ClampMin(min), vec![a], value)
    }

    pub fn digamma(&mut self, a: Var) -> Result<Var, TensorError> {
        self.check_positive_domain("digamma", a)?;
        let value = self.value(a).map(special::digamma_unchecked);
        Ok(self.push(Op::Digamma, vec![a], value))
    }

    pub fn lgamma(&mut self, a: Var) -> Result<Var, TensorError> {
        self.check_positive_domain("lgamma", a)?;
        let value = self.value(a).map(special::lgamma_unchecked);
        Ok(self.push(Op::Lgamma, vec![a], value))
    }

    fn check_positive_domain(&self, op: &'static str, a: Var) -> Result<(), TensorError> {
        if let Some(i) = self
            .value(a)
            .data()
            .iter()
            .position(|&v| !(v > 0.0) || !v.is_finite())
        {
            return Err(TensorError::Domain {
                op,
                detail: format!(
                    "argument must be positive and finite, got {} at element {i}",
                    self.value(a).data()[i]
                ),
            });
        }
        Ok(())
    }

    pub fn matmul(&mut self, a: Var, b: Var) -> Result<Var, TensorError> {
        let (va, vb) = (self.value(a), self.value(b));
        if va.rank() != 2 || vb.rank() != 2 || va.shape()[1] != vb.shape()[0] {
            return Err(TensorError::ShapeMismatch {
                op: "matmul",
                lhs: va.shape().to_vec(),
                rhs: vb.shape().to_vec(),
            });
        }
        let (m, k, n) = (va.shape()[0], va.shape()[1], vb.shape()[1]);
        let data = dgemm(va.data(), m, k, false, vb.data(), k, n, false);
        let value = Tensor::matrix(m, n, data)?;
        Ok(self.push(Op::MatMul, vec![a, b], value))
    }

    /// Row-wise softmax. Rank-1 input is treated as a single row.
    pub fn softmax_rows(&mut self, a: Var) -> Result<Var, TensorError> {
        let v = self.value(a);
        if v.rank() == 0 || v.rank() > 2 {
            return Err(TensorError::RankMismatch {
                op: "softmax_rows",
                expected: "a vector or matrix",
                got: v.shape().to_vec(),
            });
        }
        let cols = v.cols();
        let mut data = v.data().to_vec();
        for row in data.chunks_mut(cols) {
            let max = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let mut sum = 0.0;
            for x in row.iter_mut() {
                *x = (*x - max).exp();
                sum += *x;
            }
            for x in row.iter_mut() {
                *x /= sum;
            }
        }
        let value = Tensor::new(v.shape().to_vec(), data)?;
        Ok(self.push(Op::SoftmaxRows, vec![a], value))
    }

    fn axis_reduce(
        &mut self,
        op_name: &'static str,
        op: Op,
        a: Var,
        axis: usize,
        mean: bool,
    ) -> Result<Var, TensorError> {
        let v = self.value(a);
        if v.rank() != 2 || axis > 1 {
            return Err(TensorError::RankMismatch {
                op: op_name,
                expected: "a matrix with axis 0 or 1",
                got: v.shape().to_vec(),
            });
        }
        let (rows, cols) = (v.shape()[0], v.shape()[1]);
        let value = if axis == 0 {
            let mut out = vec![0.0; cols];
            for i in 0..rows {
                for (j, o) in out.iter_mut().enumerate() {
                    *o += v.at(i, j);
                }
            }
            if mean {
                for o in out.iter_mut() {
                    *o /= rows as f64;
                }
            }
            Tensor::vector(out)
        } else {
            let mut out = vec![0.0; rows];
            for (i, o) in out.iter_mut().enumerate() {
                *o = v.row(i).iter().sum();
                if mean {
                    *o /= cols as f64;
                }
            }
            Tensor::vector(out)
        };
        Ok(self.push(op, vec![a], value))
    }

    /// Sum over one axis of a matrix (axis 0 gives column sums, 1 row sums).
    pub fn sum_axis(&mut self, a: Var, axis: usize) -> Result<Var, TensorError> {
        self.axis_reduce("sum_axis", Op::SumAxis(axis), a, axis, false)
    }

    pub fn mean_axis(&mut self, a: Var, axis: usize) -> Result<Var, TensorError> {
        self.axis_reduce("mean_axis", Op::MeanAxis(axis), a, axis, true)
    }

    pub fn sum_all(&mut self, a: Var) -> Var {
        let value = Tensor::scalar(self.value(a).data().iter().sum());
        self.push(Op::SumAll, vec![a], value)
    }

    pub fn mean_all(&mut self, a: Var) -> Var {
        let v = self.value(a);
        let value = Tensor::scalar(v.data().iter().sum::<f64>() / v.len() as f64);
        self.push(Op::MeanAll, vec![a], value)
    }

    /// Tile a vector of length K into `rows` identical matrix rows.
    pub fn repeat_rows(&mut self, a: Var, rows: usize) -> Result<Var, TensorError> {
        let v = self.value(a);
        if v.rank() != 1 {
            return Err(TensorError::RankMismatch {
                op: "repeat_rows",
                expected: "a vector",
                got: v.shape().to_vec(),
            });
        }
        let cols = v.len();
        let mut data = Vec::with_capacity(rows * cols);
        for _ in 0..rows {
            data.extend_from_slice(v.data());
        }
        let value = Tensor::matrix(rows, cols, data)?;
        Ok(self.push(Op::RepeatRows(rows), vec![a], value))
    }

    /// Tile a vector of length B into `cols` identical matrix columns.
    pub fn repeat_cols(&mut self, a: Var, cols: usize) -> Result<Var, TensorError> {
        let v = self.value(a);
        if v.rank() != 1 {
            return Err(TensorError::RankMismatch {
                op: "repeat_cols",
                expected: "a vector",
                got: v.shape().to_vec(),
            });
        }
        let rows = v.len();
        let mut data = Vec::with_capacity(rows * cols);
        for &x in v.data() {
            data.extend(std::iter::repeat(x).take(cols));
        }
        let value = Tensor::matrix(rows, cols, data)?;
        Ok(self.push(Op::RepeatCols(cols), vec![a], value))
    }

    /// Gather matrix rows by index (duplicates allowed).
    pub fn select_rows(&mut self, a: Var, indices: &[usize]) -> Result<Var, TensorError> {
        let v = self.value(a);
        if v.rank() != 2 {
            return Err(TensorError::RankMismatch {
                op: "select_rows",
                expected: "a matrix",
                got: v.shape().to_vec(),
            });
        }
        if indices.is_empty() {
            return Err(TensorError::Contract {
                op: "select_rows",
                detail: "empty row selection".into(),
            });
        }
        let rows = v.shape()[0];
        if let Some(&bad) = indices.iter().find(|&&i| i >= rows) {
            return Err(TensorError::Contract {
                op: "select_rows",
                detail: format!("row index {bad} out of range for {rows} rows"),
            });
        }
        let cols = v.shape()[1];
        let mut data = Vec::with_capacity(indices.len() * cols);
        for &i in indices {
            data.extend_from_slice(v.row(i));
        }
        let value = Tensor::matrix(indices.len(), cols, data)?;
        Ok(self.push(Op::SelectRows(indices.to_vec()), vec![a], value))
    }

    pub fn reshape(&mut self, a: Var, shape: &[usize]) -> Result<Var, TensorError> {
        let v = self.value(a);
        let expected: usize = shape.iter().product();
        if expected != v.len() {
            return Err(TensorError::LengthMismatch {
                len: v.len(),
                shape: shape.to_vec(),
            });
        }
        let value = Tensor::new(shape.to_vec(), v.data().to_vec())?;
        Ok(self.push(Op::Reshape, vec![a], value))
    }

    // ---- composites over the primitives ----

    /// Dot product of two equal-length vectors.
    pub fn dot(&mut self, a: Var, b: Var) -> Result<Var, TensorError> {
        let p = self.mul(a, b)?;
        Ok(self.sum_all(p))
    }

    /// Euclidean norm of a vector, guarded so a zero vector does not produce
    /// an infinite gradient (the guard zeroes it instead).
    pub fn norm2(&mut self, a: Var) -> Result<Var, TensorError> {
        let sq = self.mul(a, a)?;
        let sum = self.sum_all(sq);
        let guarded = self.clamp_min(sum, 1e-300);
        self.sqrt(guarded)
    }

    /// Cosine similarity between two vectors.
    pub fn cosine(&mut self, a: Var, b: Var) -> Result<Var, TensorError> {
        let num = self.dot(a, b)?;
        let na = self.norm2(a)?;
        let nb = self.norm2(b)?;
        let den = self.mul(na, nb)?;
        let den = self.clamp_min(den, 1e-30);
        self.div(num, den)
    }

    /// Sum of several scalars.
    pub fn sum_vars(&mut self, vars: &[Var]) -> Result<Var, TensorError> {
        let mut iter = vars.iter();
        let Some(&first) = iter.next() else {
            return Err(TensorError::Contract {
                op: "sum_vars",
                detail: "empty variable list".into(),
            });
        };
        let mut acc = first;
        for &v in iter {
            acc = self.add(acc, v)?;
        }
        Ok(acc)
    }

    /// Mean of the selected rows of a matrix, as a vector.
    pub fn mean_rows(&mut self, a: Var, indices: &[usize]) -> Result<Var, TensorError> {
        let sel = self.select_rows(a, indices)?;
        self.mean_axis(sel, 0)
    }

    /// Extract one matrix row as a vector.
    pub fn row(&mut self, a: Var, index: usize) -> Result<Var, TensorError> {
        let cols = self.value(a).cols();
        let sel = self.select_rows(a, &[index])?;
        self.reshape(sel, &[cols])
    }
}

/// Gradient contributions of `op` to each parent, given the output gradient.
/// `wanted[i]` is false when parent `i` needs no gradient; those slots may be
/// skipped and returned as `None`.
pub(crate) fn vjp(
    op: &Op,
    out_grad: &Tensor,
    out_value: &Tensor,
    parents: &[&Tensor],
    wanted: &[bool],
) -> Vec<Option<Tensor>> {
    match op {
        Op::Leaf { .. } => vec![],
        Op::MatMul => {
            let (a, b) = (parents[0], parents[1]);
            let (m, k) = (a.shape()[0], a.shape()[1]);
            let n = b.shape()[1];
            let da = wanted[0].then(|| {
                let data = dgemm(out_grad.data(), m, n, false, b.data(), k, n, true);
                Tensor::matrix(m, k, data).expect("matmul vjp shape")
            });
            let db = wanted[1].then(|| {
                let data = dgemm(a.data(), m, k, true, out_grad.data(), m, n, false);
                Tensor::matrix(k, n, data).expect("matmul vjp shape")
            });
            vec![da, db]
        }
        Op::Add => vec![
            wanted[0].then(|| out_grad.clone()),
            wanted[1].then(|| out_grad.clone()),
        ],
        Op::Sub => vec![
            wanted[0].then(|| out_grad.clone()),
            wanted[1].then(|| out_grad.map(|g| -g)),
        ],
        Op::Mul => vec![
            wanted[0].then(|| out_grad.zip(parents[1], |g, b| g * b)),
            wanted[1].then(|| out_grad.zip(parents[0], |g, a| g * a)),
        ],
        Op::Div => {
            let (a, b) = (parents[0], parents[1]);
            let da = wanted[0].then(|| out_grad.zip(b, |g, y| g / y));
            let db = wanted[1].then(|| {
                let mut t = out_grad.zip(a, |g, x| g * x);
                for (v, &y) in t.data_mut().iter_mut().zip(b.data()) {
                    *v = -*v / (y * y);
                }
                t
            });
            vec![da, db]
        }
        Op::AddScalar(_) => vec![wanted[0].then(|| out_grad.clone())],
        Op::MulScalar(c) => vec![wanted[0].then(|| out_grad.map(|g| g * c))],
        Op::Relu => vec![wanted[0]
            .then(|| out_grad.zip(parents[0], |g, x| if x > 0.0 { g } else { 0.0 }))],
        Op::Softplus => {
            vec![wanted[0].then(|| out_grad.zip(parents[0], |g, x| g * sigmoid(x)))]
        }
        Op::Exp => vec![wanted[0].then(|| out_grad.zip(out_value, |g, y| g * y))],
        Op::Ln => vec![wanted[0].then(|| out_grad.zip(parents[0], |g, x| g / x))],
        Op::Sqrt => vec![wanted[0].then(|| out_grad.zip(out_value, |g, y| g / (2.0 * y)))],
        Op::ClampMin(min) => vec![wanted[0]
            .then(|| out_grad.zip(parents[0], |g, x| if x > *min { g } else { 0.0 }))],
        Op::Digamma => vec![wanted[0]
            .then(|| out_grad.zip(parents[0], |g, x| g * special::trigamma_unchecked(x)))],
        Op::Lgamma => vec![wanted[0]
            .then(|| out_grad.zip(parents[0], |g, x| g * special::digamma_unchecked(x)))],
        Op::SoftmaxRows => {
            vec![wanted[0].then(|| {
                let cols = out_value.cols();
                let mut data = vec![0.0; out_value.len()];
                for (r, chunk) in data.chunks_mut(cols).enumerate() {
                    let y = &out_value.data()[r * cols..(r + 1) * cols];
                    let g = &out_grad.data()[r * cols..(r + 1) * cols];
                    let dot: f64 = y.iter().zip(g).map(|(&yi, &gi)| yi * gi).sum();
                    for ((d, &yi), &gi) in chunk.iter_mut().zip(y).zip(g) {
                        *d = yi * (gi - dot);
                    }
                }
                Tensor::new(out_value.shape().to_vec(), data).expect("softmax vjp shape")
            })]
        }
        Op::SumAxis(axis) | Op::MeanAxis(axis) => {
            vec![wanted[0].then(|| {
                let parent = parents[0];
                let (rows, cols) = (parent.shape()[0], parent.shape()[1]);
                let scale = match op {
                    Op::MeanAxis(0) => 1.0 / rows as f64,
                    Op::MeanAxis(1) => 1.0 / cols as f64,
                    _ => 1.0,
                };
                let mut data = vec![0.0; rows * cols];
                if *axis == 0 {
                    for r in 0..rows {
                        for (c, &g) in out_grad.data().iter().enumerate() {
                            data[r * cols + c] = g * scale;
                        }
                    }
                } else {
                    for (r, &g) in out_grad.data().iter().enumerate() {
                        for c in 0..cols {
                            data[r * cols + c] = g * scale;
                        }
                    }
                }
                Tensor::matrix(rows, cols, data).expect("axis reduce vjp shape")
            })]
        }
        Op::SumAll | Op::MeanAll => {
            vec![wanted[0].then(|| {
                let parent = parents[0];
                let g = out_grad.data()[0];
                let scale = if matches!(op, Op::MeanAll) {
                    1.0 / parent.len() as f64
                } else {
                    1.0
                };
                Tensor::full(parent.shape(), g * scale)
            })]
        }
        Op::RepeatRows(rows) => {
            vec![wanted[0].then(|| {
                let cols = parents[0].len();
                let mut data = vec![0.0; cols];
                for r in 0..*rows {
                    for (c, d) in data.iter_mut().enumerate() {
                        *d += out_grad.data()[r * cols + c];
                    }
                }
                Tensor::vector(data)
            })]
        }
        Op::RepeatCols(cols) => {
            vec![wanted[0].then(|| {
                let rows = parents[0].len();
                let data = (0..rows)
                    .map(|r| out_grad.data()[r * cols..(r + 1) * cols].iter().sum())
                    .collect();
                Tensor::vector(data)
            })]
        }
        Op::SelectRows(indices) => {
            vec![wanted[0].then(|| {
                let parent = parents[0];
                let cols = parent.shape()[1];
                let mut data = vec![0.0; parent.len()];
                for (r, &i) in indices.iter().enumerate() {
                    for c in 0..cols {
                        data[i * cols + c] += out_grad.data()[r * cols + c];
                    }
                }
                Tensor::new(parent.shape().to_vec(), data).expect("select vjp shape")
            })]
        }
        Op::Reshape => {
            vec![wanted[0].then(|| {
                Tensor::new(parents[0].shape().to_vec(), out_grad.data().to_vec())
                    .expect("reshape vjp shape")
            })]
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scalar_graph(x: f64) -> (Graph, Var) {
        let mut g = Graph::new();
        let v = g.param(Tensor::scalar(x));
        (g, v)
    }

    #[test]
    fn softplus_at_zero_is_ln_two() {
        let (mut g, x) = scalar_graph(0.0);
        let y = g.softplus(x);
        assert!((g.value(y).scalar_value().unwrap() - 2.0f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn softmax_of_constant_row_is_uniform() {
        let mut g = Graph::new();
        let x = g.leaf(Tensor::vector(vec![0.0, 0.0, 0.0]));
        let y = g.softmax_rows(x).unwrap();
        for &v in g.value(y).data() {
            assert!((v - 1.0 / 3.0).abs() < 1e-12);
        }
    }

    #[test]
    fn cosine_of_orthogonal_vectors_is_zero() {
        let mut g = Graph::new();
        let a = g.leaf(Tensor::vector(vec![1.0, 0.0]));
        let b = g.leaf(Tensor::vector(vec![0.0, 1.0]));
        let c = g.cosine(a, b).unwrap();
        assert!(g.value(c).scalar_value().unwrap().abs() < 1e-12);
    }

    #[test]
    fn square_gradient() {
        let (mut g, x) = scalar_graph(3.0);
        let y = g.mul(x, x).unwrap();
        let grads = g.backward(y).unwrap();
        assert!((grads.grad(x).unwrap().data()[0] - 6.0).abs() < 1e-12);
    }

    #[test]
    fn softplus_gradient_at_zero_is_half() {
        let (mut g, x) = scalar_graph(0.0);
        let y = g.softplus(x);
        let grads = g.backward(y).unwrap();
        assert!((grads.grad(x).unwrap().data()[0] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn product_rule_gradients() {
        let mut g = Graph::new();
        let x = g.param(Tensor::scalar(2.0));
        let y = g.param(Tensor::scalar(5.0));
        let z = g.mul(x, y).unwrap();
        let grads = g.backward(z).unwrap();
        assert_eq!(grads.grad(x).unwrap().data()[0], 5.0);
        assert_eq!(grads.grad(y).unwrap().data()[0], 2.0);
    }

    #[test]
    fn shared_subexpression_accumulates_like_expanded_graph() {
        // f(x) = x*x + x*x with the inner product shared
        let (mut g, x) = scalar_graph(1.5);
        let sq = g.mul(x, x).unwrap();
        let f = g.add(sq, sq).unwrap();
        let grads = g.backward(f).unwrap();
        let shared = grads.grad(x).unwrap().data()[0];

        // expanded: two separate square nodes
        let (mut g2, x2) = scalar_graph(1.5);
        let sq_a = g2.mul(x2, x2).unwrap();
        let sq_b = g2.mul(x2, x2).unwrap();
        let f2 = g2.add(sq_a, sq_b).unwrap();
        let expanded = g2.backward(f2).unwrap().grad(x2).unwrap().data()[0];

        assert_eq!(shared, expanded);
        assert!((shared - 6.0).abs() < 1e-12);
    }

    #[test]
    fn unused_leaf_gets_zero_gradient() {
        let mut g = Graph::new();
        let x = g.param(Tensor::scalar(1.0));
        let unused = g.param(Tensor::vector(vec![1.0, 2.0]));
        let y = g.mul(x, x).unwrap();
        let grads = g.backward(y).unwrap();
        assert_eq!(grads.grad(unused).unwrap().data(), &[0.0, 0.0]);
    }

    #[test]
    fn non_scalar_loss_rejected() {
        let mut g = Graph::new();
        let x = g.param(Tensor::vector(vec![1.0, 2.0]));
        let y = g.relu(x);
        let err = g.backward(y).unwrap_err();
        assert!(matches!(err, TensorError::Contract { op: "backward", .. }));
    }

    #[test]
    fn shape_mismatch_names_operands() {
        let mut g = Graph::new();
        let a = g.leaf(Tensor::vector(vec![1.0, 2.0]));
        let b = g.leaf(Tensor::vector(vec![1.0, 2.0, 3.0]));
        let err = g.add(a, b).unwrap_err();
        match err {
            TensorError::ShapeMismatch { op, lhs, rhs } => {
                assert_eq!(op, "add");
                assert_eq!(lhs, vec![2]);
                assert_eq!(rhs, vec![3]);
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn division_by_zero_rejected() {
        let mut g = Graph::new();
        let a = g.leaf(Tensor::scalar(1.0));
        let b = g.leaf(Tensor::scalar(0.0));
        assert!(matches!(
            g.div(a, b),
            Err(TensorError::Domain { op: "div", .. })
        ));
    }

    #[test]
    fn log_of_non_positive_rejected() {
        let mut g = Graph::new();
        let a = g.leaf(Tensor::vector(vec![1.0, 0.0]));
        assert!(matches!(g.ln(a), Err(TensorError::Domain { op: "ln", .. })));
    }

    #[test]
    fn matmul_matches_hand_product() {
        let mut g = Graph::new();
        let a = g.leaf(Tensor::matrix(2, 3, vec![1., 2., 3., 4., 5., 6.]).unwrap());
        let b = g.leaf(Tensor::matrix(3, 2, vec![7., 8., 9., 10., 11., 12.]).unwrap());
        let c = g.matmul(a, b).unwrap();
        assert_eq!(g.value(c).data(), &[58., 64., 139., 154.]);
    }

    #[test]
    fn select_rows_gradient_scatters_with_duplicates() {
        let mut g = Graph::new();
        let m = g.param(Tensor::matrix(3, 2, vec![1., 2., 3., 4., 5., 6.]).unwrap());
        let sel = g.select_rows(m, &[1, 1, 2]).unwrap();
        let s = g.sum_all(sel);
        let grads = g.backward(s).unwrap();
        assert_eq!(grads.grad(m).unwrap().data(), &[0., 0., 2., 2., 1., 1.]);
    }
}
