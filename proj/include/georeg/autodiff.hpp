#pragma once

#include <functional>
#include <span>
#include <vector>

// Minimal reverse-mode differentiation over dense double tensors. Nodes are
// appended in evaluation order, so walking the tape backwards visits every
// node after all of its consumers.

namespace georeg::ad {

/// Up to three extents. Matrix ops read (d0 rows, d1 cols); feature-map ops
/// read (W, H, C) with the FeatureMap storage order.
struct Shape {
  int d0 = 1;
  int d1 = 1;
  int d2 = 1;

  std::size_t size() const noexcept { return static_cast<std::size_t>(d0) * d1 * d2; }
  bool operator==(const Shape&) const = default;
};

struct Var {
  int id = -1;
  bool valid() const noexcept { return id >= 0; }
};

class Tape {
 public:
  using Backward = std::function<void(Tape&, int self)>;

  Var constant(std::vector<double> value, Shape shape);
  Var parameter(std::span<const double> value, Shape shape);

  /// Appends a computed node. `backward` reads grad(self) and accumulates
  /// into the gradients of the node's inputs.
  Var push(std::vector<double> value, Shape shape, Backward backward);

  const std::vector<double>& value(Var v) const { return nodes_[v.id].value; }
  const Shape& shape(Var v) const { return nodes_[v.id].shape; }
  double scalar(Var v) const { return nodes_[v.id].value.at(0); }

  /// Gradient buffer of a node; valid after backward().
  std::vector<double>& grad(Var v) { return nodes_[v.id].grad; }
  std::vector<double>& grad(int id) { return nodes_[id].grad; }
  const std::vector<double>& value(int id) const { return nodes_[id].value; }

  /// Seeds d(output)/d(output) = 1 for a scalar output and propagates.
  void backward(Var output);

  std::size_t node_count() const noexcept { return nodes_.size(); }

 private:
  struct Node {
    std::vector<double> value;
    std::vector<double> grad;
    Shape shape;
    Backward backward;
  };
  std::vector<Node> nodes_;
};

// Matrix ops (row-major, rows = d0, cols = d1).

/// Y = X * W^T (+ b). X: n x in, W: out x in, b: out (optional).
Var linear(Tape& t, Var x, Var w, Var b = {});
/// Y = A * B. A: n x m, B: m x d.
Var matmul(Tape& t, Var a, Var b);
Var add(Tape& t, Var a, Var b);
Var scale(Tape& t, Var x, double s);
Var gelu(Tape& t, Var x);
Var softmax_rows(Tape& t, Var x);
/// Per-row normalization with learned gain and bias (length = cols).
Var layer_norm(Tape& t, Var x, Var gain, Var bias, double eps = 1e-5);
Var concat_rows(Tape& t, Var a, Var b);
Var slice_rows(Tape& t, Var x, int start, int count);
Var slice_cols(Tape& t, Var x, int start, int count);
Var concat_cols(Tape& t, std::span<const Var> parts);
Var reshape(Tape& t, Var x, Shape shape);

// Spatial ops on (W, H, C) feature maps.

/// Tokens ordered row-major over a (grid_w x grid_h) patch grid -> (W, H, C).
Var tokens_to_grid(Tape& t, Var tokens, int grid_w, int grid_h);
/// 3x3 neighbourhood gather: (W, H, C) -> (W*H) x (9*C) matrix, zero padded
/// in H, circular or zero padded in W.
Var im2col3x3(Tape& t, Var x, bool circular_width);
/// 3x3 convolution: weights Cout x (9*Cin), bias Cout.
Var conv3x3(Tape& t, Var x, Var w, Var b, bool circular_width);
/// 2x bilinear upsampling (half-pixel centers), circular or clamped in W,
/// clamped in H.
Var upsample2x(Tape& t, Var x, bool circular_width);

// Scalar helpers.

Var mul_scalars(Tape& t, Var a, Var b);
Var mean_of(Tape& t, std::span<const Var> scalars);

}  // namespace georeg::ad
