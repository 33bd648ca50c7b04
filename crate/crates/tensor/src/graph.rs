use crate::error::TensorError;
use crate::tensor::Tensor;

/// Handle to a node in a [`Graph`]. Only valid for the graph that created it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Var(pub(crate) usize);

impl Var {
    pub fn index(self) -> usize {
        self.0
    }
}

#[derive(Debug, Clone)]
pub(crate) enum Op {
    Leaf { requires_grad: bool },
    MatMul,
    Add,
    Sub,
    Mul,
    Div,
    AddScalar(f64),
    MulScalar(f64),
    Relu,
    Softplus,
    Exp,
    Ln,
    Sqrt,
    ClampMin(f64),
    Digamma,
    Lgamma,
    SoftmaxRows,
    SumAxis(usize),
    MeanAxis(usize),
    SumAll,
    MeanAll,
    RepeatRows(usize),
    RepeatCols(usize),
    SelectRows(Vec<usize>),
    Reshape,
}

pub(crate) struct Node {
    pub(crate) op: Op,
    pub(crate) parents: Vec<Var>,
    pub(crate) value: Tensor,
}

/// Define-by-run computation graph. Operations append nodes in topological
/// order (every input id precedes its consumer), so a backward pass is a
/// single reverse sweep that visits each node exactly once.
#[derive(Default)]
pub struct Graph {
    pub(crate) nodes: Vec<Node>,
}

impl Graph {
    pub fn new() -> Self {
        Self { nodes: Vec::new() }
    }

    /// Insert a constant leaf (no gradient is tracked for it).
    pub fn leaf(&mut self, value: Tensor) -> Var {
        self.push(
            Op::Leaf {
                requires_grad: false,
            },
            vec![],
            value,
        )
    }

    /// Insert a differentiable leaf.
    pub fn param(&mut self, value: Tensor) -> Var {
        self.push(
            Op::Leaf {
                requires_grad: true,
            },
            vec![],
            value,
        )
    }

    pub fn scalar(&mut self, value: f64) -> Var {
        self.leaf(Tensor::scalar(value))
    }

    pub fn value(&self, v: Var) -> &Tensor {
        &self.nodes[v.0].value
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub(crate) fn push(&mut self, op: Op, parents: Vec<Var>, value: Tensor) -> Var {
        self.nodes.push(Node { op, parents, value });
        Var(self.nodes.len() - 1)
    }

    /// Reverse-mode sweep from a scalar loss. Returns gradients for every
    /// `requires_grad` leaf; leaves the loss does not depend on get zeros.
    pub fn backward(&self, loss: Var) -> Result<GradStore, TensorError> {
        let loss_value = self.value(loss);
        if !loss_value.is_scalar() {
            return Err(TensorError::Contract {
                op: "backward",
                detail: format!("loss must be scalar, got shape {:?}", loss_value.shape()),
            });
        }

        // A node needs a gradient iff some requires_grad leaf feeds it.
        let mut needs = vec![false; self.nodes.len()];
        for (i, node) in self.nodes.iter().enumerate() {
            needs[i] = match node.op {
                Op::Leaf { requires_grad } => requires_grad,
                _ => node.parents.iter().any(|p| needs[p.0]),
            };
        }

        let mut grads: Vec<Option<Tensor>> = vec![None; self.nodes.len()];
        grads[loss.0] = Some(Tensor::full(loss_value.shape(), 1.0));

        for i in (0..=loss.0).rev() {
            let Some(out_grad) = grads[i].take() else {
                continue;
            };
            let node = &self.nodes[i];
            if matches!(node.op, Op::Leaf { .. }) {
                grads[i] = Some(out_grad);
                continue;
            }
            let parent_values: Vec<&Tensor> =
                node.parents.iter().map(|p| &self.nodes[p.0].value).collect();
            let wanted: Vec<bool> = node.parents.iter().map(|p| needs[p.0]).collect();
            let contributions =
                crate::ops::vjp(&node.op, &out_grad, &node.value, &parent_values, &wanted);
            for (parent, contribution) in node.parents.iter().zip(contributions) {
                if let Some(c) = contribution {
                    match grads[parent.0].as_mut() {
                        Some(acc) => acc.accumulate(&c),
                        None => grads[parent.0] = Some(c),
                    }
                }
            }
        }

        // Unused requires_grad leaves get zero gradients.
        for (i, node) in self.nodes.iter().enumerate() {
            if matches!(node.op, Op::Leaf { requires_grad: true }) && grads[i].is_none() {
                grads[i] = Some(Tensor::zeros(node.value.shape()));
            }
        }

        Ok(GradStore { grads })
    }
}

/// Gradients produced by [`Graph::backward`], indexed by [`Var`].
pub struct GradStore {
    grads: Vec<Option<Tensor>>,
}

impl GradStore {
    pub fn grad(&self, v: Var) -> Option<&Tensor> {
        self.grads.get(v.0).and_then(|g| g.as_ref())
    }

    pub fn take(&mut self, v: Var) -> Option<Tensor> {
        self.grads.get_mut(v.0).and_then(|g| g.take())
    }
}
