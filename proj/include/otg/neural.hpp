#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "otg/rng.hpp"
#include "otg/types.hpp"

namespace otg {

// Fully connected network: affine layers with a leaky rectifier (slope 0.2)
// on every hidden layer and a linear output.  No normalization layers
// anywhere; critics in particular must stay plain affine stacks.
template <typename Scalar = double>
struct Mlp {
  std::vector<Index> dims;                // layer widths, input first
  std::vector<MatrixX<Scalar>> weights;   // weights[l]: dims[l] x dims[l+1]
  std::vector<VectorX<Scalar>> biases;    // biases[l]: dims[l+1]

  Index layer_count() const { return static_cast<Index>(weights.size()); }
  Index input_dim() const { return dims.front(); }
  Index output_dim() const { return dims.back(); }

  void validate() const {
    if (dims.size() < 2) {
      throw ValueError("Mlp: need an input and an output width");
    }
    if (weights.size() + 1 != dims.size() || biases.size() != weights.size()) {
      throw DimensionError("Mlp: " + std::to_string(dims.size()) +
                           " widths need " + std::to_string(dims.size() - 1) +
                           " weight/bias pairs");
    }
    for (std::size_t l = 0; l < weights.size(); ++l) {
      if (dims[l] < 1 || dims[l + 1] < 1) {
        throw ValueError("Mlp: layer widths must be positive");
      }
      if (weights[l].rows() != dims[l] || weights[l].cols() != dims[l + 1] ||
          biases[l].size() != dims[l + 1]) {
        throw DimensionError("Mlp: layer " + std::to_string(l) +
                             " parameters do not match widths " +
                             std::to_string(dims[l]) + "x" +
                             std::to_string(dims[l + 1]));
      }
      if (!weights[l].allFinite() || !biases[l].allFinite()) {
        throw ValueError("Mlp: layer " + std::to_string(l) +
                         " has non-finite parameters");
      }
    }
  }
};

inline constexpr double kLeakySlope = 0.2;

namespace detail {

template <typename Scalar>
Scalar leaky(Scalar z) {
  return z >= Scalar(0) ? z : Scalar(kLeakySlope) * z;
}

// Right derivative at the kink: slope 1 at exactly zero.  Tests pin this
// convention; do not flip the comparison.
template <typename Scalar>
Scalar leaky_slope(Scalar z) {
  return z >= Scalar(0) ? Scalar(1) : Scalar(kLeakySlope);
}

inline void stamp_bytes(std::uint64_t& h, const void* data, std::size_t n) {
  const unsigned char* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ull;
  }
}

// Fingerprint of all parameters, used to reject stale tapes.
template <typename Scalar>
std::uint64_t param_stamp(const Mlp<Scalar>& net) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (std::size_t l = 0; l < net.weights.size(); ++l) {
    stamp_bytes(h, net.weights[l].data(),
                sizeof(Scalar) * static_cast<std::size_t>(net.weights[l].size()));
    stamp_bytes(h, net.biases[l].data(),
                sizeof(Scalar) * static_cast<std::size_t>(net.biases[l].size()));
  }
  return h;
}

}  // namespace detail

// Weights uniform in +-sqrt(6 / (fan_in + fan_out)), biases zero.  Entries
// are drawn row-major layer by layer, so the same seed reproduces the same
// network everywhere.
template <typename Scalar = double>
Mlp<Scalar> glorot_mlp(std::vector<Index> dims, std::uint64_t seed) {
  Mlp<Scalar> net;
  net.dims = std::move(dims);
  if (net.dims.size() < 2) {
    throw ValueError("glorot_mlp: need an input and an output width");
  }
  Rng rng(seed);
  for (std::size_t l = 0; l + 1 < net.dims.size(); ++l) {
    const Index fan_in = net.dims[l], fan_out = net.dims[l + 1];
    if (fan_in < 1 || fan_out < 1) {
      throw ValueError("glorot_mlp: layer widths must be positive");
    }
    const double bound =
        std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    MatrixX<Scalar> w(fan_in, fan_out);
    for (Index i = 0; i < fan_in; ++i) {
      for (Index j = 0; j < fan_out; ++j) {
        w(i, j) = static_cast<Scalar>(rng.uniform(-bound, bound));
      }
    }
    net.weights.push_back(std::move(w));
    net.biases.push_back(VectorX<Scalar>::Zero(fan_out));
  }
  net.validate();
  return net;
}

// What backward needs from a forward pass: the input each layer saw and the
// hidden pre-activations (for the rectifier masks), plus a parameter
// fingerprint so a tape cannot be replayed against updated weights.
template <typename Scalar = double>
struct Tape {
  std::vector<MatrixX<Scalar>> layer_inputs;     // A_0 .. A_{L-1}
  std::vector<MatrixX<Scalar>> pre_activations;  // Z_1 .. Z_{L-1}, hidden only
  std::uint64_t stamp = 0;
};

template <typename Scalar = double>
struct ForwardResult {
  MatrixX<Scalar> outputs;  // batch rows in, batch rows out
  Tape<Scalar> tape;
};

template <typename Scalar>
ForwardResult<Scalar> forward(const Mlp<Scalar>& net,
                              const MatrixX<Scalar>& batch) {
  net.validate();
  if (batch.cols() != net.input_dim()) {
    throw DimensionError("forward: batch has " + std::to_string(batch.cols()) +
                         " features, net expects " +
                         std::to_string(net.input_dim()));
  }
  if (batch.rows() < 1) {
    throw ValueError("forward: batch is empty");
  }
  const Index L = net.layer_count();
  ForwardResult<Scalar> out;
  out.tape.stamp = detail::param_stamp(net);
  MatrixX<Scalar> a = batch;
  for (Index l = 0; l < L; ++l) {
    out.tape.layer_inputs.push_back(a);
    MatrixX<Scalar> z = a * net.weights[static_cast<std::size_t>(l)];
    z.rowwise() += net.biases[static_cast<std::size_t>(l)].transpose();
    if (l + 1 < L) {
      out.tape.pre_activations.push_back(z);
      a = z.unaryExpr([](Scalar v) { return detail::leaky(v); });
    } else {
      a = std::move(z);
    }
  }
  out.outputs = std::move(a);
  return out;
}

// One gradient (or moment) tensor per parameter tensor.
template <typename Scalar = double>
struct MlpGrads {
  std::vector<MatrixX<Scalar>> weights;
  std::vector<VectorX<Scalar>> biases;

  static MlpGrads zeros_like(const Mlp<Scalar>& net) {
    MlpGrads g;
    for (std::size_t l = 0; l < net.weights.size(); ++l) {
      g.weights.push_back(
          MatrixX<Scalar>::Zero(net.weights[l].rows(), net.weights[l].cols()));
      g.biases.push_back(VectorX<Scalar>::Zero(net.biases[l].size()));
    }
    return g;
  }
};

template <typename Scalar = double>
struct BackwardResult {
  MlpGrads<Scalar> params;
  MatrixX<Scalar> inputs;  // gradient with respect to the batch
};

// Reverse-mode pass.  output_grad is the derivative of the scalar loss with
// respect to the network outputs; the result is exact for that scalar.
template <typename Scalar>
BackwardResult<Scalar> backward(const Mlp<Scalar>& net, const Tape<Scalar>& tape,
                                const MatrixX<Scalar>& output_grad) {
  const Index L = net.layer_count();
  if (tape.stamp != detail::param_stamp(net)) {
    throw ValueError(
        "backward: tape is stale; parameters changed since forward");
  }
  if (static_cast<Index>(tape.layer_inputs.size()) != L ||
      static_cast<Index>(tape.pre_activations.size()) != L - 1) {
    throw DimensionError("backward: tape does not match the network depth");
  }
  const Index k = tape.layer_inputs.front().rows();
  if (output_grad.rows() != k || output_grad.cols() != net.output_dim()) {
    throw DimensionError("backward: output_grad is " +
                         std::to_string(output_grad.rows()) + "x" +
                         std::to_string(output_grad.cols()) + ", expected " +
                         std::to_string(k) + "x" +
                         std::to_string(net.output_dim()));
  }
  BackwardResult<Scalar> out;
  out.params.weights.resize(static_cast<std::size_t>(L));
  out.params.biases.resize(static_cast<std::size_t>(L));
  MatrixX<Scalar> delta = output_grad;
  for (Index l = L - 1; l >= 0; --l) {
    const std::size_t ul = static_cast<std::size_t>(l);
    out.params.weights[ul].noalias() =
        tape.layer_inputs[ul].transpose() * delta;
    out.params.biases[ul] = delta.colwise().sum().transpose();
    MatrixX<Scalar> below = delta * net.weights[ul].transpose();
    if (l > 0) {
      below.array() *=
          tape.pre_activations[ul - 1].unaryExpr([](Scalar z) {
            return detail::leaky_slope(z);
          }).array();
    }
    delta = std::move(below);
  }
  out.inputs = std::move(delta);
  return out;
}

template <typename Scalar = double>
struct GradientPenalty {
  Scalar penalty = Scalar(0);
  MlpGrads<Scalar> params;
  Index zero_norm_samples = 0;  // samples where the input gradient vanished
};

// Mean squared deviation of the critic's input-gradient norm from 1, with
// its exact parameter gradient.
//
// The input gradient G of a rectifier network depends on the weights both
// explicitly (the product chain below) and through the rectifier masks.  The
// masks are piecewise constant, so their contribution to the derivative is
// zero almost everywhere; differentiating the chain with the masks held
// fixed is the exact gradient wherever one exists.  A consequence worth
// knowing: the penalty never depends on the biases, so their gradient is
// exactly zero, and at a sample with G = 0 the norm has no derivative and
// the subgradient 0 is used (counted in zero_norm_samples).
template <typename Scalar>
GradientPenalty<Scalar> gradient_penalty(const Mlp<Scalar>& critic,
                                         const MatrixX<Scalar>& interpolates) {
  if (critic.output_dim() != 1) {
    throw DimensionError("gradient_penalty: critic must have one output, has " +
                         std::to_string(critic.output_dim()));
  }
  if (!interpolates.allFinite()) {
    throw ValueError("gradient_penalty: interpolates must be finite");
  }
  const ForwardResult<Scalar> fwd = forward(critic, interpolates);
  const Index L = critic.layer_count();
  const Index k = interpolates.rows();

  // Input-gradient pass, recorded layer by layer: upstream[l] is the
  // derivative of the per-sample output with respect to layer l's output.
  std::vector<MatrixX<Scalar>> upstream(static_cast<std::size_t>(L + 1));
  std::vector<MatrixX<Scalar>> masks(static_cast<std::size_t>(L - 1));
  upstream[static_cast<std::size_t>(L)] = MatrixX<Scalar>::Ones(k, 1);
  for (Index l = L - 1; l >= 0; --l) {
    const std::size_t ul = static_cast<std::size_t>(l);
    MatrixX<Scalar> below =
        upstream[ul + 1] * critic.weights[ul].transpose();
    if (l > 0) {
      masks[ul - 1] = fwd.tape.pre_activations[ul - 1].unaryExpr(
          [](Scalar z) { return detail::leaky_slope(z); });
      below.array() *= masks[ul - 1].array();
    }
    upstream[ul] = std::move(below);
  }
  const MatrixX<Scalar>& input_grad = upstream[0];  // row i: grad of D at x_i

  GradientPenalty<Scalar> out;
  out.params = MlpGrads<Scalar>::zeros_like(critic);
  MatrixX<Scalar> penalty_grad(k, critic.input_dim());  // d penalty / d G
  for (Index i = 0; i < k; ++i) {
    const Scalar norm = input_grad.row(i).norm();
    const Scalar dev = norm - Scalar(1);
    out.penalty += dev * dev / Scalar(k);
    if (norm == Scalar(0)) {
      ++out.zero_norm_samples;
      penalty_grad.row(i).setZero();
    } else {
      penalty_grad.row(i) =
          (Scalar(2) / Scalar(k)) * dev / norm * input_grad.row(i);
    }
  }

  // Second reverse pass, now through the computation above: walk the layers
  // forward, pushing the adjoint of upstream[l-1] to the weight that
  // produced it and onward to upstream[l].
  MatrixX<Scalar> adj = penalty_grad;  // adjoint of upstream[l-1]
  for (Index l = 0; l < L; ++l) {
    const std::size_t ul = static_cast<std::size_t>(l);
    if (l > 0) adj.array() *= masks[ul - 1].array();
    out.params.weights[ul].noalias() = adj.transpose() * upstream[ul + 1];
    adj = adj * critic.weights[ul];
  }
  return out;
}

// Fixed optimizer constants; the momentum is deliberately low.
template <typename Scalar = double>
struct AdamState {
  Scalar beta1 = Scalar(0.5);
  Scalar beta2 = Scalar(0.999);
  Scalar eps = Scalar(1e-8);
  Index step = 0;
  MlpGrads<Scalar> first;   // running mean of gradients
  MlpGrads<Scalar> second;  // running mean of squared gradients

  static AdamState zeros_like(const Mlp<Scalar>& net) {
    AdamState s;
    s.first = MlpGrads<Scalar>::zeros_like(net);
    s.second = MlpGrads<Scalar>::zeros_like(net);
    return s;
  }
};

namespace detail {

template <typename Scalar, typename Tensor>
void adam_update(Tensor& param, const Tensor& grad, Tensor& m, Tensor& v,
                 const AdamState<Scalar>& state, Scalar lr,
                 const std::string& label) {
  if (grad.rows() != param.rows() || grad.cols() != param.cols()) {
    throw DimensionError("adam_step: gradient shape mismatch for " + label);
  }
  if (!grad.allFinite()) {
    throw ValueError("adam_step: non-finite gradient for " + label);
  }
  m = state.beta1 * m + (Scalar(1) - state.beta1) * grad;
  v.array() =
      state.beta2 * v.array() + (Scalar(1) - state.beta2) * grad.array().square();
  const Scalar bc1 =
      Scalar(1) - std::pow(state.beta1, static_cast<Scalar>(state.step));
  const Scalar bc2 =
      Scalar(1) - std::pow(state.beta2, static_cast<Scalar>(state.step));
  param.array() -=
      lr * (m.array() / bc1) / ((v.array() / bc2).sqrt() + state.eps);
}

}  // namespace detail

// One Adam update over every parameter tensor, in place.
template <typename Scalar>
void adam_step(Mlp<Scalar>& net, const MlpGrads<Scalar>& grads,
               AdamState<Scalar>& state, Scalar lr) {
  if (grads.weights.size() != net.weights.size() ||
      state.first.weights.size() != net.weights.size()) {
    throw DimensionError("adam_step: gradient or state does not match network");
  }
  state.step += 1;
  for (std::size_t l = 0; l < net.weights.size(); ++l) {
    detail::adam_update(net.weights[l], grads.weights[l], state.first.weights[l],
                        state.second.weights[l], state, lr,
                        "layer " + std::to_string(l) + " weights");
    detail::adam_update(net.biases[l], grads.biases[l], state.first.biases[l],
                        state.second.biases[l], state, lr,
                        "layer " + std::to_string(l) + " biases");
  }
}

// Checkpoint format: {"dims": [...], "layers": [{"w": [[row], ...], "b": [...]}]}
void save_mlp_json(const std::filesystem::path& path, const Mlp<double>& net);
Mlp<double> load_mlp_json(const std::filesystem::path& path);

}  // namespace otg
