#pragma once

#include "shadowkit/tensorcore/tape.hpp"

// Differentiable operators. All of them validate shapes up front and throw
// ShapeError naming the operator, the expected dims and the actual dims.
// There is no implicit broadcasting anywhere.
namespace shadowkit::tensorcore {

/// 2-D cross-correlation with zero padding.
///
/// input [N, Cin, H, W], weight [Cout, Cin, K, K], bias [Cout] gives
/// [N, Cout, (H + 2 pad - K) / stride + 1, (W + 2 pad - K) / stride + 1].
/// Each output is bias + a sum over (cin, kh, kw) in row-major order.
Var conv2d(Var input, Var weight, Var bias, int stride, int pad);

/// Adjoint of conv2d's input map: input [N, Cin, H, W], weight
/// [Cin, Cout, K, K] gives [N, Cout, (H - 1) stride - 2 pad + K, ...].
Var conv_transpose2d(Var input, Var weight, int stride, int pad);

/// Window max. The gradient goes to the first maximal element of each window
/// in row-major order.
Var maxpool2d(Var input, int kernel = 2, int stride = 2);

/// Nearest-neighbour 2x upsampling; every pixel becomes a 2x2 block.
Var upsample_nearest2x(Var input);

Var sigmoid(Var input);
Var leaky_relu(Var input, double slope = 0.1);

/// input [N, F], weight [F, G], bias [G] -> [N, G].
Var linear(Var input, Var weight, Var bias);

/// [N, ...] -> [N, prod(...)].
Var flatten(Var input);

Var add(Var a, Var b);
Var scale(Var a, double factor);
Var sum(Var a);
Var mean(Var a);

inline constexpr double kBceEpsilon = 1e-7;

/// -mean(t log p + (1 - t) log(1 - p)) with p clamped into [eps, 1 - eps].
Var bce_loss(Var pred, Var target);
/// mean((p - t)^2).
Var mse_loss(Var pred, Var target);

inline void backward(Var loss) { loss.tape()->backward(loss); }

/// Output spatial size of conv2d along one axis; throws ShapeError if the
/// kernel does not fit.
std::size_t conv_output_size(std::size_t in, std::size_t kernel, int stride, int pad);
/// Output spatial size of conv_transpose2d along one axis.
std::size_t conv_transpose_output_size(std::size_t in, std::size_t kernel, int stride, int pad);

}  // namespace shadowkit::tensorcore
