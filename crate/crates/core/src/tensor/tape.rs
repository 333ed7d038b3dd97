//! Reverse-mode automatic differentiation over [`Matrix`] values.
//!
//! A [`Tape`] is an append-only list of nodes. Every operation pushes a new
//! node whose parents already live on the tape, so insertion order is a
//! topological order and the backward pass is a single reverse sweep.
//! Nodes are addressed by the copyable handle [`Var`].
//!
//! Leaves come in two flavours: [`Tape::param`] (gradient tracked) and
//! [`Tape::constant`] (inputs such as one-hot columns; no gradient is
//! propagated into them or into anything computed only from them).

use super::matrix::{gemm, Matrix};
use crate::error::{Error, Result};

/// Handle to a node on a [`Tape`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Var(usize);

impl Var {
    pub fn index(self) -> usize {
        self.0
    }
}

#[derive(Debug)]
enum Op {
    Leaf,
    MatMul(Var, Var),
    Hadamard(Var, Var),
    Add(Var, Var),
    AddBias(Var, Var),
    Tanh(Var),
    Sigmoid(Var),
    Scale(Var, f64),
    OneMinus(Var),
    MeanScalars(Vec<Var>),
    SoftmaxCrossEntropy {
        logits: Var,
        targets: Vec<usize>,
        probs: Matrix,
    },
}

#[derive(Debug)]
struct Node {
    value: Matrix,
    grad: Option<Matrix>,
    requires_grad: bool,
    op: Op,
}

#[derive(Debug, Default)]
pub struct Tape {
    nodes: Vec<Node>,
}

impl Tape {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Trainable leaf.
    pub fn param(&mut self, value: Matrix) -> Var {
        self.push(value, true, Op::Leaf)
    }

    /// Non-trainable leaf.
    pub fn constant(&mut self, value: Matrix) -> Var {
        self.push(value, false, Op::Leaf)
    }

    pub fn value(&self, v: Var) -> &Matrix {
        &self.nodes[v.0].value
    }

    pub fn shape(&self, v: Var) -> (usize, usize) {
        self.nodes[v.0].value.shape()
    }

    /// Accumulated gradient of `v`; zeros if nothing has flowed into it.
    pub fn grad(&self, v: Var) -> Matrix {
        let node = &self.nodes[v.0];
        node.grad
            .clone()
            .unwrap_or_else(|| Matrix::zeros(node.value.rows(), node.value.cols()))
    }

    pub fn zero_grads(&mut self) {
        for n in &mut self.nodes {
            n.grad = None;
        }
    }

    fn push(&mut self, value: Matrix, requires_grad: bool, op: Op) -> Var {
        self.nodes.push(Node {
            value,
            grad: None,
            requires_grad,
            op,
        });
        Var(self.nodes.len() - 1)
    }

    fn needs(&self, vars: &[Var]) -> bool {
        vars.iter().any(|v| self.nodes[v.0].requires_grad)
    }

    pub fn matmul(&mut self, a: Var, b: Var) -> Result<Var> {
        let (va, vb) = (self.value(a), self.value(b));
        let value = va.matmul(vb)?;
        let rg = self.needs(&[a, b]);
        Ok(self.push(value, rg, Op::MatMul(a, b)))
    }

    pub fn hadamard(&mut self, a: Var, b: Var) -> Result<Var> {
        let value = self.value(a).zip_map(self.value(b), |x, y| x * y).map_err(|_| {
            Error::Shape {
                op: "hadamard",
                left: self.shape(a),
                right: self.shape(b),
            }
        })?;
        let rg = self.needs(&[a, b]);
        Ok(self.push(value, rg, Op::Hadamard(a, b)))
    }

    pub fn add(&mut self, a: Var, b: Var) -> Result<Var> {
        let value = self.value(a).zip_map(self.value(b), |x, y| x + y).map_err(|_| {
            Error::Shape {
                op: "add",
                left: self.shape(a),
                right: self.shape(b),
            }
        })?;
        let rg = self.needs(&[a, b]);
        Ok(self.push(value, rg, Op::Add(a, b)))
    }

    /// Adds a `rows x 1` column to every column of `a`.
    pub fn add_bias(&mut self, a: Var, bias: Var) -> Result<Var> {
        let (rows, cols) = self.shape(a);
        if self.shape(bias) != (rows, 1) {
            return Err(Error::Shape {
                op: "add_bias",
                left: (rows, cols),
                right: self.shape(bias),
            });
        }
        let mut value = self.value(a).clone();
        let b = self.value(bias).data().to_vec();
        for (r, row) in value.data_mut().chunks_mut(cols.max(1)).enumerate().take(rows) {
            row.iter_mut().for_each(|x| *x += b[r]);
        }
        let rg = self.needs(&[a, bias]);
        Ok(self.push(value, rg, Op::AddBias(a, bias)))
    }

    pub fn tanh(&mut self, a: Var) -> Var {
        let value = self.value(a).map(f64::tanh);
        let rg = self.needs(&[a]);
        self.push(value, rg, Op::Tanh(a))
    }

    pub fn sigmoid(&mut self, a: Var) -> Var {
        let value = self.value(a).map(sigmoid);
        let rg = self.needs(&[a]);
        self.push(value, rg, Op::Sigmoid(a))
    }

    pub fn scale(&mut self, a: Var, k: f64) -> Var {
        let value = self.value(a).map(|x| x * k);
        let rg = self.needs(&[a]);
        self.push(value, rg, Op::Scale(a, k))
    }

    /// `1 - a`, elementwise.
    pub fn one_minus(&mut self, a: Var) -> Var {
        let value = self.value(a).map(|x| 1.0 - x);
        let rg = self.needs(&[a]);
        self.push(value, rg, Op::OneMinus(a))
    }

    /// Mean of 1x1 nodes, summed with error compensation so the loss
    /// value is accurate to about one rounding.
    pub fn mean_scalars(&mut self, xs: &[Var]) -> Result<Var> {
        if xs.is_empty() {
            return Err(Error::Contract("mean of no scalars".into()));
        }
        for &x in xs {
            if self.shape(x) != (1, 1) {
                return Err(Error::Shape {
                    op: "mean_scalars",
                    left: (1, 1),
                    right: self.shape(x),
                });
            }
        }
        let total = compensated_sum(xs.iter().map(|&x| self.value(x).data()[0]));
        let value = Matrix::filled(1, 1, total / xs.len() as f64);
        let rg = self.needs(xs);
        Ok(self.push(value, rg, Op::MeanScalars(xs.to_vec())))
    }

    /// Mean over columns of `-ln softmax(logits[:, b])[targets[b]]`.
    pub fn softmax_cross_entropy(&mut self, logits: Var, targets: &[usize]) -> Result<Var> {
        let (vocab, batch) = self.shape(logits);
        if targets.len() != batch {
            return Err(Error::Shape {
                op: "softmax_cross_entropy",
                left: (vocab, batch),
                right: (targets.len(), 1),
            });
        }
        if let Some(&bad) = targets.iter().find(|&&t| t >= vocab) {
            return Err(Error::Index {
                what: "target id",
                index: bad,
                limit: vocab,
            });
        }
        let z = self.value(logits);
        let mut probs = Matrix::zeros(vocab, batch);
        let mut terms = Vec::with_capacity(batch);
        for (b, &t) in targets.iter().enumerate() {
            let max = (0..vocab).map(|r| z.get(r, b)).fold(f64::NEG_INFINITY, f64::max);
            let sum: f64 = (0..vocab).map(|r| (z.get(r, b) - max).exp()).sum();
            let log_sum = sum.ln();
            for r in 0..vocab {
                probs.set(r, b, ((z.get(r, b) - max) - log_sum).exp());
            }
            terms.push(-((z.get(t, b) - max) - log_sum));
        }
        let total = compensated_sum(terms);
        let loss = Matrix::from_vec(1, 1, vec![total / batch.max(1) as f64])?;
        let rg = self.needs(&[logits]);
        Ok(self.push(
            loss,
            rg,
            Op::SoftmaxCrossEntropy {
                logits,
                targets: targets.to_vec(),
                probs,
            },
        ))
    }

    /// Accumulates `d root / d node` into every node reachable from `root`.
    ///
    /// Calling twice without [`Tape::zero_grads`] adds the gradients again.
    pub fn backward(&mut self, root: Var) -> Result<()> {
        if self.shape(root) != (1, 1) {
            return Err(Error::Contract(format!(
                "backward needs a 1x1 root, got {:?}",
                self.shape(root)
            )));
        }
        let mut adj: Vec<Option<Matrix>> = Vec::with_capacity(root.0 + 1);
        adj.resize_with(root.0 + 1, || None);
        adj[root.0] = Some(Matrix::filled(1, 1, 1.0));

        for i in (0..=root.0).rev() {
            let Some(g) = adj[i].take() else { continue };
            if !self.nodes[i].requires_grad {
                continue;
            }
            self.propagate(i, &g, &mut adj);
            match &mut self.nodes[i].grad {
                Some(acc) => acc.add_assign(&g),
                slot @ None => *slot = Some(g),
            }
        }
        Ok(())
    }

    fn propagate(&self, i: usize, g: &Matrix, adj: &mut [Option<Matrix>]) {
        let node = &self.nodes[i];
        match &node.op {
            Op::Leaf => {}
            Op::MatMul(a, b) => {
                let (va, vb) = (self.value(*a), self.value(*b));
                if self.wants(*a) {
                    // dA += dC * B^T
                    let slot = slot(adj, *a, va.shape());
                    gemm(1.0, g, false, vb, true, 1.0, slot);
                }
                if self.wants(*b) {
                    // dB += A^T * dC
                    let slot = slot(adj, *b, vb.shape());
                    gemm(1.0, va, true, g, false, 1.0, slot);
                }
            }
            Op::Hadamard(a, b) => {
                let (va, vb) = (self.value(*a), self.value(*b));
                if self.wants(*a) {
                    axpy_product(slot(adj, *a, va.shape()), g, vb);
                }
                if self.wants(*b) {
                    axpy_product(slot(adj, *b, vb.shape()), g, va);
                }
            }
            Op::Add(a, b) => {
                for v in [*a, *b] {
                    if self.wants(v) {
                        slot(adj, v, g.shape()).add_assign(g);
                    }
                }
            }
            Op::AddBias(a, bias) => {
                if self.wants(*a) {
                    slot(adj, *a, g.shape()).add_assign(g);
                }
                if self.wants(*bias) {
                    let cols = g.cols().max(1);
                    let s = slot(adj, *bias, (g.rows(), 1));
                    for (r, row) in g.data().chunks(cols).enumerate() {
                        s.data_mut()[r] += row.iter().sum::<f64>();
                    }
                }
            }
            Op::Tanh(a) => {
                if self.wants(*a) {
                    let y = &node.value;
                    let s = slot(adj, *a, y.shape());
                    for ((d, &gy), &yv) in s.data_mut().iter_mut().zip(g.data()).zip(y.data()) {
                        *d += gy * (1.0 - yv * yv);
                    }
                }
            }
            Op::Sigmoid(a) => {
                if self.wants(*a) {
                    let y = &node.value;
                    let s = slot(adj, *a, y.shape());
                    for ((d, &gy), &yv) in s.data_mut().iter_mut().zip(g.data()).zip(y.data()) {
                        *d += gy * yv * (1.0 - yv);
                    }
                }
            }
            Op::Scale(a, k) => {
                if self.wants(*a) {
                    let s = slot(adj, *a, g.shape());
                    for (d, &gy) in s.data_mut().iter_mut().zip(g.data()) {
                        *d += k * gy;
                    }
                }
            }
            Op::MeanScalars(xs) => {
                let share = g.data()[0] / xs.len() as f64;
                for &x in xs {
                    if self.wants(x) {
                        slot(adj, x, (1, 1)).data_mut()[0] += share;
                    }
                }
            }
            Op::OneMinus(a) => {
                if self.wants(*a) {
                    let s = slot(adj, *a, g.shape());
                    for (d, &gy) in s.data_mut().iter_mut().zip(g.data()) {
                        *d -= gy;
                    }
                }
            }
            Op::SoftmaxCrossEntropy {
                logits,
                targets,
                probs,
            } => {
                if self.wants(*logits) {
                    let scale = g.data()[0] / targets.len().max(1) as f64;
                    let s = slot(adj, *logits, probs.shape());
                    let cols = probs.cols();
                    for (k, (d, &p)) in s.data_mut().iter_mut().zip(probs.data()).enumerate() {
                        *d += scale * p;
                        let (r, b) = (k / cols, k % cols);
                        if targets[b] == r {
                            *d -= scale;
                        }
                    }
                }
            }
        }
    }

    fn wants(&self, v: Var) -> bool {
        self.nodes[v.0].requires_grad
    }
}

fn slot(adj: &mut [Option<Matrix>], v: Var, shape: (usize, usize)) -> &mut Matrix {
    adj[v.0].get_or_insert_with(|| Matrix::zeros(shape.0, shape.1))
}

fn axpy_product(acc: &mut Matrix, a: &Matrix, b: &Matrix) {
    for ((d, &x), &y) in acc.data_mut().iter_mut().zip(a.data()).zip(b.data()) {
        *d += x * y;
    }
}

/// Neumaier-compensated sum.
pub(crate) fn compensated_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let (mut sum, mut comp) = (0.0f64, 0.0f64);
    for v in values {
        let t = sum + v;
        comp += if sum.abs() >= v.abs() { (sum - t) + v } else { (v - t) + sum };
        sum = t;
    }
    sum + comp
}

#[inline]
pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}
