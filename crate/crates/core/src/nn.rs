//! Dense layers with hand-written reverse mode, batched over rows.

use ndarray::linalg::general_mat_mul;
use ndarray::{Array1, Array2, ArrayView2, Axis, Zip};
use rand::Rng;

/// Activation applied after the last layer of a stack.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum OutputActivation {
    /// ReLU on the first `relu_units` columns, tanh on the rest.
    ReluThenTanh { relu_units: usize },
    Sigmoid,
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Dense {
    /// `out × in`
    pub w: Array2<f64>,
    pub b: Array1<f64>,
}

impl Dense {
    pub fn init<R: Rng>(fan_in: usize, fan_out: usize, rng: &mut R) -> Self {
        let s = 1.0 / (fan_in as f64).sqrt();
        let w = Array2::from_shape_simple_fn((fan_out, fan_in), || rng.random_range(-s..=s));
        let b = Array1::from_shape_simple_fn(fan_out, || rng.random_range(-s..=s));
        Self { w, b }
    }

    fn forward(&self, x: ArrayView2<f64>) -> Array2<f64> {
        let mut z = x.dot(&self.w.t());
        z += &self.b;
        z
    }
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct DenseGrad {
    pub w: Array2<f64>,
    pub b: Array1<f64>,
}

impl DenseGrad {
    pub fn zeros_like(layer: &Dense) -> Self {
        Self {
            w: Array2::zeros(layer.w.raw_dim()),
            b: Array1::zeros(layer.b.raw_dim()),
        }
    }
}

/// A stack of dense layers, ReLU between them.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Mlp {
    pub layers: Vec<Dense>,
    pub output: OutputActivation,
}

/// Activations kept from a forward pass: `inputs[l]` feeds layer `l`.
pub(crate) struct Trace {
    inputs: Vec<Array2<f64>>,
    pub output: Array2<f64>,
}

impl Trace {
    /// Which ReLU units are active, hidden layers first, then any ReLU
    /// columns of the output. The loss is smooth wherever this stays fixed.
    pub fn active_units(&self, output: OutputActivation, mask: &mut Vec<bool>) {
        for x in &self.inputs[1..] {
            mask.extend(x.iter().map(|&a| a > 0.0));
        }
        if let OutputActivation::ReluThenTanh { relu_units } = output {
            for row in self.output.rows() {
                mask.extend(row.iter().take(relu_units).map(|&a| a > 0.0));
            }
        }
    }
}

impl Mlp {
    pub fn init<R: Rng>(widths: &[usize], output: OutputActivation, rng: &mut R) -> Self {
        let layers = widths
            .windows(2)
            .map(|w| Dense::init(w[0], w[1], rng))
            .collect();
        Self { layers, output }
    }

    pub fn forward(&self, x: ArrayView2<f64>) -> Array2<f64> {
        self.forward_traced(x).output
    }

    pub fn forward_traced(&self, x: ArrayView2<f64>) -> Trace {
        let mut inputs = Vec::with_capacity(self.layers.len());
        let mut current = x.to_owned();
        let last = self.layers.len() - 1;
        for (l, layer) in self.layers.iter().enumerate() {
            let mut z = layer.forward(current.view());
            if l == last {
                apply_output(&mut z, self.output);
            } else {
                z.mapv_inplace(|v| v.max(0.0));
            }
            inputs.push(std::mem::replace(&mut current, z));
        }
        Trace {
            inputs,
            output: current,
        }
    }

    /// Backpropagate `d_output` (gradient w.r.t. the activated output),
    /// accumulating parameter gradients into `grads`. Returns the gradient
    /// w.r.t. the input rows when `want_input` is set.
    pub fn backward(
        &self,
        trace: &Trace,
        d_output: Array2<f64>,
        grads: &mut [DenseGrad],
        want_input: bool,
    ) -> Option<Array2<f64>> {
        let last = self.layers.len() - 1;
        let mut dz = d_output;
        output_derivative(&mut dz, &trace.output, self.output);
        for l in (0..=last).rev() {
            let x = &trace.inputs[l];
            general_mat_mul(1.0, &dz.t(), x, 1.0, &mut grads[l].w);
            grads[l].b += &dz.sum_axis(Axis(0));
            if l == 0 && !want_input {
                return None;
            }
            let mut dx = dz.dot(&self.layers[l].w);
            if l > 0 {
                // x is the ReLU output of the previous layer
                Zip::from(&mut dx).and(x).for_each(|d, &a| {
                    if a <= 0.0 {
                        *d = 0.0;
                    }
                });
            }
            dz = dx;
        }
        Some(dz)
    }
}

fn apply_output(z: &mut Array2<f64>, act: OutputActivation) {
    match act {
        OutputActivation::Sigmoid => z.mapv_inplace(sigmoid),
        OutputActivation::ReluThenTanh { relu_units } => {
            for mut row in z.rows_mut() {
                for (j, v) in row.iter_mut().enumerate() {
                    *v = if j < relu_units { v.max(0.0) } else { v.tanh() };
                }
            }
        }
    }
}

fn output_derivative(d: &mut Array2<f64>, y: &Array2<f64>, act: OutputActivation) {
    match act {
        OutputActivation::Sigmoid => {
            Zip::from(d).and(y).for_each(|d, &y| *d *= y * (1.0 - y));
        }
        OutputActivation::ReluThenTanh { relu_units } => {
            Zip::indexed(d).and(y).for_each(|(_, j), d, &y| {
                if j < relu_units {
                    if y <= 0.0 {
                        *d = 0.0;
                    }
                } else {
                    *d *= 1.0 - y * y;
                }
            });
        }
    }
}

fn sigmoid(v: f64) -> f64 {
    if v >= 0.0 {
        1.0 / (1.0 + (-v).exp())
    } else {
        let e = v.exp();
        e / (1.0 + e)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn loss(mlp: &Mlp, x: &Array2<f64>, target: &Array2<f64>) -> f64 {
        let y = mlp.forward(x.view());
        (&y - target).mapv(|v| v * v).sum() * 0.5
    }

    #[test]
    fn backward_matches_central_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for output in [
            OutputActivation::Sigmoid,
            OutputActivation::ReluThenTanh { relu_units: 2 },
        ] {
            let mut mlp = Mlp::init(&[5, 7, 4], output, &mut rng);
            let x = Array2::from_shape_simple_fn((3, 5), || rng.random_range(-1.0..1.0));
            let target = Array2::from_shape_simple_fn((3, 4), || rng.random_range(-0.5..0.5));
            let trace = mlp.forward_traced(x.view());
            let mut grads: Vec<_> = mlp.layers.iter().map(DenseGrad::zeros_like).collect();
            let dx = mlp
                .backward(&trace, &trace.output - &target, &mut grads, true)
                .unwrap();
            assert_eq!(dx.dim(), (3, 5));

            let h = 1e-6;
            for l in 0..mlp.layers.len() {
                for idx in 0..mlp.layers[l].w.len() {
                    let (r, c) = (idx / mlp.layers[l].w.ncols(), idx % mlp.layers[l].w.ncols());
                    let orig = mlp.layers[l].w[[r, c]];
                    mlp.layers[l].w[[r, c]] = orig + h;
                    let up = loss(&mlp, &x, &target);
                    mlp.layers[l].w[[r, c]] = orig - h;
                    let down = loss(&mlp, &x, &target);
                    mlp.layers[l].w[[r, c]] = orig;
                    let numeric = (up - down) / (2.0 * h);
                    assert!((numeric - grads[l].w[[r, c]]).abs() < 1e-7);
                }
            }
        }
    }

    #[test]
    fn sigmoid_is_stable_at_extremes() {
        assert_eq!(sigmoid(-1000.0), 0.0);
        assert_eq!(sigmoid(1000.0), 1.0);
        assert!((sigmoid(0.0) - 0.5).abs() < 1e-15);
    }
}
