#include "shadowkit/tensorcore/ops.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <string>

#include "shadowkit/errors.hpp"
#include "shadowkit/tensorcore/kernels.hpp"

namespace shadowkit::tensorcore {

namespace {

Tape& common_tape(std::initializer_list<Var> vars, const char* op) {
  Tape* tape = nullptr;
  for (const Var& v : vars) {
    if (!v.valid()) throw std::invalid_argument(std::string(op) + ": uninitialised Var");
    if (tape && v.tape() != tape) {
      throw std::invalid_argument(std::string(op) + ": inputs recorded on different tapes");
    }
    tape = v.tape();
  }
  return *tape;
}

[[noreturn]] void shape_fail(const char* op, const std::string& what, const std::string& expected,
                             const Shape& actual) {
  throw ShapeError(std::string(op) + ": " + what + " expected " + expected + ", got " +
                   shape_string(actual));
}

void expect_rank(const char* op, const char* what, const Shape& s, std::size_t rank,
                 const char* layout) {
  if (s.size() != rank) shape_fail(op, what, layout, s);
}

void expect_same(const char* op, const Shape& a, const Shape& b) {
  if (a != b) shape_fail(op, "second operand", shape_string(a), b);
}

// Geometry of one conv2d application: an input plane stack [C, H, W] read by a
// KxK window to produce [Ho, Wo] positions.
struct ConvGeom {
  std::size_t c, h, w, k, ho, wo;
  int stride, pad;

  std::size_t rows() const { return c * k * k; }   // Q
  std::size_t cols() const { return ho * wo; }     // P
  bool trivial() const { return k == 1 && stride == 1 && pad == 0; }
};

// col[q, p] with q = (ci * K + kh) * K + kw and p = oh * Wo + ow.
void im2col(const ConvGeom& g, const double* x, double* col) {
  const std::size_t P = g.cols();
  for (std::size_t ci = 0; ci < g.c; ++ci) {
    const double* plane = x + ci * g.h * g.w;
    for (std::size_t kh = 0; kh < g.k; ++kh) {
      for (std::size_t kw = 0; kw < g.k; ++kw) {
        double* dst = col + ((ci * g.k + kh) * g.k + kw) * P;
        for (std::size_t oh = 0; oh < g.ho; ++oh) {
          const long ih = static_cast<long>(oh) * g.stride + static_cast<long>(kh) - g.pad;
          double* row = dst + oh * g.wo;
          if (ih < 0 || ih >= static_cast<long>(g.h)) {
            std::fill(row, row + g.wo, 0.0);
            continue;
          }
          const double* src = plane + static_cast<std::size_t>(ih) * g.w;
          for (std::size_t ow = 0; ow < g.wo; ++ow) {
            const long iw = static_cast<long>(ow) * g.stride + static_cast<long>(kw) - g.pad;
            row[ow] = (iw < 0 || iw >= static_cast<long>(g.w)) ? 0.0 : src[iw];
          }
        }
      }
    }
  }
}

// Scatter-add of col back onto the input planes (adjoint of im2col).
void col2im(const ConvGeom& g, const double* col, double* x) {
  const std::size_t P = g.cols();
  for (std::size_t ci = 0; ci < g.c; ++ci) {
    double* plane = x + ci * g.h * g.w;
    for (std::size_t kh = 0; kh < g.k; ++kh) {
      for (std::size_t kw = 0; kw < g.k; ++kw) {
        const double* src = col + ((ci * g.k + kh) * g.k + kw) * P;
        for (std::size_t oh = 0; oh < g.ho; ++oh) {
          const long ih = static_cast<long>(oh) * g.stride + static_cast<long>(kh) - g.pad;
          if (ih < 0 || ih >= static_cast<long>(g.h)) continue;
          double* dst = plane + static_cast<std::size_t>(ih) * g.w;
          const double* row = src + oh * g.wo;
          for (std::size_t ow = 0; ow < g.wo; ++ow) {
            const long iw = static_cast<long>(ow) * g.stride + static_cast<long>(kw) - g.pad;
            if (iw >= 0 && iw < static_cast<long>(g.w)) dst[iw] += row[ow];
          }
        }
      }
    }
  }
}

// Returns a pointer to the [Q x P] column matrix of one sample, either the
// input itself (1x1 kernels) or `scratch` filled by im2col.
const double* columns(const ConvGeom& g, const double* x, std::vector<double>& scratch) {
  if (g.trivial()) return x;
  scratch.resize(g.rows() * g.cols());
  im2col(g, x, scratch.data());
  return scratch.data();
}

void check_conv_params(const char* op, std::size_t k, int stride, int pad) {
  if (k < 1) throw ShapeError(std::string(op) + ": kernel size must be >= 1");
  if (stride < 1) throw ShapeError(std::string(op) + ": stride must be >= 1, got " + std::to_string(stride));
  if (pad < 0) throw ShapeError(std::string(op) + ": pad must be >= 0, got " + std::to_string(pad));
}

}  // namespace

std::size_t conv_output_size(std::size_t in, std::size_t kernel, int stride, int pad) {
  check_conv_params("conv2d", kernel, stride, pad);
  const std::size_t padded = in + 2 * static_cast<std::size_t>(pad);
  if (padded < kernel) {
    throw ShapeError("conv2d: padded extent " + std::to_string(padded) +
                     " is smaller than kernel " + std::to_string(kernel));
  }
  return (padded - kernel) / static_cast<std::size_t>(stride) + 1;
}

std::size_t conv_transpose_output_size(std::size_t in, std::size_t kernel, int stride, int pad) {
  check_conv_params("conv_transpose2d", kernel, stride, pad);
  const long out = (static_cast<long>(in) - 1) * stride - 2L * pad + static_cast<long>(kernel);
  if (out < 1) {
    throw ShapeError("conv_transpose2d: output extent " + std::to_string(out) +
                     " is not positive for input " + std::to_string(in));
  }
  return static_cast<std::size_t>(out);
}

Var conv2d(Var input, Var weight, Var bias, int stride, int pad) {
  constexpr const char* op = "conv2d";
  Tape& tape = common_tape({input, weight, bias}, op);
  const Shape& xs = input.shape();
  const Shape& ws = weight.shape();
  expect_rank(op, "input", xs, 4, "[N x Cin x H x W]");
  expect_rank(op, "weight", ws, 4, "[Cout x Cin x K x K]");
  const std::size_t n = xs[0], cin = xs[1], cout = ws[0], k = ws[2];
  if (ws[1] != cin || ws[3] != k) {
    shape_fail(op, "weight", shape_string({cout, cin, k, k}), ws);
  }
  if (bias.shape() != Shape{cout}) shape_fail(op, "bias", shape_string({cout}), bias.shape());

  ConvGeom g{cin, xs[2], xs[3], k, conv_output_size(xs[2], k, stride, pad),
             conv_output_size(xs[3], k, stride, pad), stride, pad};
  const Shape out_shape{n, cout, g.ho, g.wo};
  tape.reserve(op, out_shape);

  const std::size_t Q = g.rows(), P = g.cols();
  const std::size_t in_stride = cin * g.h * g.w;
  Tensor out(out_shape);
  {
    const double* x = input.value().data().data();
    const double* w = weight.value().data().data();
    const double* b = bias.value().data().data();
    std::vector<double> scratch;
    for (std::size_t s = 0; s < n; ++s) {
      double* y = out.data().data() + s * cout * P;
      for (std::size_t co = 0; co < cout; ++co) std::fill(y + co * P, y + (co + 1) * P, b[co]);
      const double* col = columns(g, x + s * in_stride, scratch);
      kernels::gemm_acc(cout, P, Q, w, Q, col, P, y, P);
    }
  }

  const std::size_t xi = input.id(), wi = weight.id(), bi = bias.id();
  return tape.record(op, std::move(out), {xi, wi, bi},
                     [=](Tape& t, std::span<const double> gy) {
    const double* x = t.value(xi).data().data();
    const double* w = t.value(wi).data().data();
    std::vector<double> scratch;
    if (t.requires_grad(xi)) {
      double* dx = t.accumulate(xi).data();
      std::vector<double> wt(Q * cout);
      kernels::transpose(cout, Q, w, wt.data());
      std::vector<double> dcol(Q * P);
      for (std::size_t s = 0; s < n; ++s) {
        std::fill(dcol.begin(), dcol.end(), 0.0);
        kernels::gemm_acc(Q, P, cout, wt.data(), cout, gy.data() + s * cout * P, P, dcol.data(), P);
        col2im(g, dcol.data(), dx + s * in_stride);
      }
    }
    if (t.requires_grad(wi)) {
      double* dw = t.accumulate(wi).data();
      std::vector<double> row(P * Q);
      for (std::size_t s = 0; s < n; ++s) {
        const double* col = columns(g, x + s * in_stride, scratch);
        kernels::transpose(Q, P, col, row.data());
        kernels::gemm_acc(cout, Q, P, gy.data() + s * cout * P, P, row.data(), Q, dw, Q);
      }
    }
    if (t.requires_grad(bi)) {
      double* db = t.accumulate(bi).data();
      for (std::size_t s = 0; s < n; ++s)
        for (std::size_t co = 0; co < cout; ++co) {
          const double* src = gy.data() + (s * cout + co) * P;
          double acc = 0.0;
          for (std::size_t p = 0; p < P; ++p) acc += src[p];
          db[co] += acc;
        }
    }
  });
}

Var conv_transpose2d(Var input, Var weight, int stride, int pad) {
  constexpr const char* op = "conv_transpose2d";
  Tape& tape = common_tape({input, weight}, op);
  const Shape& xs = input.shape();
  const Shape& ws = weight.shape();
  expect_rank(op, "input", xs, 4, "[N x Cin x H x W]");
  expect_rank(op, "weight", ws, 4, "[Cin x Cout x K x K]");
  const std::size_t n = xs[0], cin = xs[1], cout = ws[1], k = ws[2];
  if (ws[0] != cin || ws[3] != k) shape_fail(op, "weight", shape_string({cin, cout, k, k}), ws);

  const std::size_t ho = conv_transpose_output_size(xs[2], k, stride, pad);
  const std::size_t wo = conv_transpose_output_size(xs[3], k, stride, pad);
  // The adjoint conv2d reads the output [Cout, Ho, Wo] and produces [H, W].
  ConvGeom g{cout, ho, wo, k, xs[2], xs[3], stride, pad};
  if (conv_output_size(ho, k, stride, pad) != xs[2] || conv_output_size(wo, k, stride, pad) != xs[3]) {
    shape_fail(op, "input", "spatial dims reachable by stride " + std::to_string(stride), xs);
  }
  const Shape out_shape{n, cout, ho, wo};
  tape.reserve(op, out_shape);

  const std::size_t Q = g.rows(), P = g.cols();
  const std::size_t out_stride = cout * ho * wo;
  Tensor out(out_shape);
  {
    const double* x = input.value().data().data();
    const double* w = weight.value().data().data();
    std::vector<double> wt(Q * cin);
    kernels::transpose(cin, Q, w, wt.data());
    std::vector<double> col(Q * P);
    for (std::size_t s = 0; s < n; ++s) {
      std::fill(col.begin(), col.end(), 0.0);
      kernels::gemm_acc(Q, P, cin, wt.data(), cin, x + s * cin * P, P, col.data(), P);
      col2im(g, col.data(), out.data().data() + s * out_stride);
    }
  }

  const std::size_t xi = input.id(), wi = weight.id();
  return tape.record(op, std::move(out), {xi, wi}, [=](Tape& t, std::span<const double> gy) {
    const double* x = t.value(xi).data().data();
    const double* w = t.value(wi).data().data();
    std::vector<double> scratch;
    std::vector<double> row;
    const bool need_x = t.requires_grad(xi), need_w = t.requires_grad(wi);
    double* dx = need_x ? t.accumulate(xi).data() : nullptr;
    double* dw = need_w ? t.accumulate(wi).data() : nullptr;
    for (std::size_t s = 0; s < n; ++s) {
      const double* col = columns(g, gy.data() + s * out_stride, scratch);
      if (need_x) kernels::gemm_acc(cin, P, Q, w, Q, col, P, dx + s * cin * P, P);
      if (need_w) {
        row.resize(P * Q);
        kernels::transpose(Q, P, col, row.data());
        kernels::gemm_acc(cin, Q, P, x + s * cin * P, P, row.data(), Q, dw, Q);
      }
    }
  });
}

Var maxpool2d(Var input, int kernel, int stride) {
  constexpr const char* op = "maxpool2d";
  Tape& tape = common_tape({input}, op);
  const Shape& xs = input.shape();
  expect_rank(op, "input", xs, 4, "[N x C x H x W]");
  if (kernel < 1 || stride < 1) throw ShapeError("maxpool2d: kernel and stride must be >= 1");
  const std::size_t k = static_cast<std::size_t>(kernel), st = static_cast<std::size_t>(stride);
  const std::size_t h = xs[2], w = xs[3];
  if (h < k || w < k || (h - k) % st != 0 || (w - k) % st != 0) {
    shape_fail(op, "input", "spatial dims tiled exactly by window " + std::to_string(k) +
                                " / stride " + std::to_string(st), xs);
  }
  const std::size_t ho = (h - k) / st + 1, wo = (w - k) / st + 1;
  const std::size_t planes = xs[0] * xs[1];
  const Shape out_shape{xs[0], xs[1], ho, wo};
  tape.reserve(op, out_shape);

  Tensor out(out_shape);
  auto argmax = std::make_shared<std::vector<std::size_t>>(out.size());
  const double* x = input.value().data().data();
  double* y = out.data().data();
  for (std::size_t pl = 0; pl < planes; ++pl) {
    const std::size_t base = pl * h * w;
    for (std::size_t oh = 0; oh < ho; ++oh) {
      for (std::size_t ow = 0; ow < wo; ++ow) {
        std::size_t best = base + (oh * st) * w + ow * st;
        for (std::size_t i = 0; i < k; ++i)
          for (std::size_t j = 0; j < k; ++j) {
            const std::size_t idx = base + (oh * st + i) * w + ow * st + j;
            if (x[idx] > x[best]) best = idx;
          }
        const std::size_t o = (pl * ho + oh) * wo + ow;
        y[o] = x[best];
        (*argmax)[o] = best;
      }
    }
  }

  const std::size_t xi = input.id();
  return tape.record(op, std::move(out), {xi}, [=](Tape& t, std::span<const double> gy) {
    auto dx = t.accumulate(xi);
    for (std::size_t o = 0; o < gy.size(); ++o) dx[(*argmax)[o]] += gy[o];
  });
}

Var upsample_nearest2x(Var input) {
  constexpr const char* op = "upsample_nearest2x";
  Tape& tape = common_tape({input}, op);
  const Shape& xs = input.shape();
  expect_rank(op, "input", xs, 4, "[N x C x H x W]");
  const std::size_t planes = xs[0] * xs[1], h = xs[2], w = xs[3];
  const Shape out_shape{xs[0], xs[1], 2 * h, 2 * w};
  tape.reserve(op, out_shape);

  Tensor out(out_shape);
  const double* x = input.value().data().data();
  double* y = out.data().data();
  for (std::size_t pl = 0; pl < planes; ++pl)
    for (std::size_t i = 0; i < h; ++i) {
      double* r0 = y + (pl * 2 * h + 2 * i) * 2 * w;
      double* r1 = r0 + 2 * w;
      const double* src = x + (pl * h + i) * w;
      for (std::size_t j = 0; j < w; ++j) {
        r0[2 * j] = r0[2 * j + 1] = r1[2 * j] = r1[2 * j + 1] = src[j];
      }
    }

  const std::size_t xi = input.id();
  return tape.record(op, std::move(out), {xi}, [=](Tape& t, std::span<const double> gy) {
    auto dx = t.accumulate(xi);
    for (std::size_t pl = 0; pl < planes; ++pl)
      for (std::size_t i = 0; i < h; ++i) {
        const double* r0 = gy.data() + (pl * 2 * h + 2 * i) * 2 * w;
        const double* r1 = r0 + 2 * w;
        for (std::size_t j = 0; j < w; ++j) {
          dx[(pl * h + i) * w + j] += r0[2 * j] + r0[2 * j + 1] + r1[2 * j] + r1[2 * j + 1];
        }
      }
  });
}

Var sigmoid(Var input) {
  Tape& tape = common_tape({input}, "sigmoid");
  tape.reserve("sigmoid", input.shape());
  Tensor out(input.shape());
  const auto x = input.value().data();
  auto y = out.data();
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] >= 0) {
      y[i] = 1.0 / (1.0 + std::exp(-x[i]));
    } else {
      const double e = std::exp(x[i]);
      y[i] = e / (1.0 + e);
    }
  }
  const std::size_t xi = input.id(), self = tape.size();
  return tape.record("sigmoid", std::move(out), {xi}, [=](Tape& t, std::span<const double> gy) {
    const auto yv = t.value(self).data();
    auto dx = t.accumulate(xi);
    for (std::size_t i = 0; i < gy.size(); ++i) dx[i] += gy[i] * yv[i] * (1.0 - yv[i]);
  });
}

Var leaky_relu(Var input, double slope) {
  Tape& tape = common_tape({input}, "leaky_relu");
  tape.reserve("leaky_relu", input.shape());
  Tensor out(input.shape());
  const auto x = input.value().data();
  auto y = out.data();
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = x[i] > 0 ? x[i] : slope * x[i];
  const std::size_t xi = input.id();
  return tape.record("leaky_relu", std::move(out), {xi}, [=](Tape& t, std::span<const double> gy) {
    const auto xv = t.value(xi).data();
    auto dx = t.accumulate(xi);
    for (std::size_t i = 0; i < gy.size(); ++i) dx[i] += xv[i] > 0 ? gy[i] : slope * gy[i];
  });
}

Var linear(Var input, Var weight, Var bias) {
  constexpr const char* op = "linear";
  Tape& tape = common_tape({input, weight, bias}, op);
  const Shape& xs = input.shape();
  const Shape& ws = weight.shape();
  expect_rank(op, "input", xs, 2, "[N x F]");
  expect_rank(op, "weight", ws, 2, "[F x G]");
  const std::size_t n = xs[0], f = xs[1], g = ws[1];
  if (ws[0] != f) shape_fail(op, "weight", shape_string({f, g}), ws);
  if (bias.shape() != Shape{g}) shape_fail(op, "bias", shape_string({g}), bias.shape());
  tape.reserve(op, {n, g});

  Tensor out({n, g});
  const double* b = bias.value().data().data();
  for (std::size_t r = 0; r < n; ++r) std::copy(b, b + g, out.data().data() + r * g);
  kernels::gemm_acc(n, g, f, input.value().data().data(), f, weight.value().data().data(), g,
                    out.data().data(), g);

  const std::size_t xi = input.id(), wi = weight.id(), bi = bias.id();
  return tape.record(op, std::move(out), {xi, wi, bi}, [=](Tape& t, std::span<const double> gy) {
    const double* x = t.value(xi).data().data();
    const double* w = t.value(wi).data().data();
    if (t.requires_grad(xi)) {
      std::vector<double> wt(g * f);
      kernels::transpose(f, g, w, wt.data());
      kernels::gemm_acc(n, f, g, gy.data(), g, wt.data(), f, t.accumulate(xi).data(), f);
    }
    if (t.requires_grad(wi)) {
      std::vector<double> xt(f * n);
      kernels::transpose(n, f, x, xt.data());
      kernels::gemm_acc(f, g, n, xt.data(), n, gy.data(), g, t.accumulate(wi).data(), g);
    }
    if (t.requires_grad(bi)) {
      auto db = t.accumulate(bi);
      for (std::size_t r = 0; r < n; ++r)
        for (std::size_t c = 0; c < g; ++c) db[c] += gy[r * g + c];
    }
  });
}

Var flatten(Var input) {
  Tape& tape = common_tape({input}, "flatten");
  const Shape& xs = input.shape();
  if (xs.size() < 2) shape_fail("flatten", "input", "[N x ...] with rank >= 2", xs);
  const std::size_t n = xs[0];
  Tensor out = input.value().reshaped({n, input.value().size() / n});
  out.set_requires_grad(false);
  const std::size_t xi = input.id();
  return tape.record("flatten", std::move(out), {xi}, [=](Tape& t, std::span<const double> gy) {
    auto dx = t.accumulate(xi);
    for (std::size_t i = 0; i < gy.size(); ++i) dx[i] += gy[i];
  });
}

Var add(Var a, Var b) {
  Tape& tape = common_tape({a, b}, "add");
  expect_same("add", a.shape(), b.shape());
  tape.reserve("add", a.shape());
  Tensor out(a.shape());
  const auto x = a.value().data(), y = b.value().data();
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] + y[i];
  const std::size_t ai = a.id(), bi = b.id();
  return tape.record("add", std::move(out), {ai, bi}, [=](Tape& t, std::span<const double> gy) {
    for (std::size_t id : {ai, bi}) {
      if (!t.requires_grad(id)) continue;
      auto d = t.accumulate(id);
      for (std::size_t i = 0; i < gy.size(); ++i) d[i] += gy[i];
    }
  });
}

Var scale(Var a, double factor) {
  Tape& tape = common_tape({a}, "scale");
  tape.reserve("scale", a.shape());
  Tensor out(a.shape());
  const auto x = a.value().data();
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = factor * x[i];
  const std::size_t ai = a.id();
  return tape.record("scale", std::move(out), {ai}, [=](Tape& t, std::span<const double> gy) {
    auto d = t.accumulate(ai);
    for (std::size_t i = 0; i < gy.size(); ++i) d[i] += factor * gy[i];
  });
}

Var sum(Var a) {
  Tape& tape = common_tape({a}, "sum");
  double acc = 0.0;
  for (double v : a.value().data()) acc += v;
  const std::size_t ai = a.id();
  return tape.record("sum", Tensor::scalar(acc), {ai}, [=](Tape& t, std::span<const double> gy) {
    auto d = t.accumulate(ai);
    for (auto& v : d) v += gy[0];
  });
}

Var mean(Var a) {
  Tape& tape = common_tape({a}, "mean");
  double acc = 0.0;
  for (double v : a.value().data()) acc += v;
  const double inv = 1.0 / static_cast<double>(a.value().size());
  const std::size_t ai = a.id();
  return tape.record("mean", Tensor::scalar(acc * inv), {ai},
                     [=](Tape& t, std::span<const double> gy) {
    auto d = t.accumulate(ai);
    for (auto& v : d) v += gy[0] * inv;
  });
}

Var bce_loss(Var pred, Var target) {
  Tape& tape = common_tape({pred, target}, "bce_loss");
  expect_same("bce_loss", pred.shape(), target.shape());
  const auto p = pred.value().data(), tg = target.value().data();
  const double inv = 1.0 / static_cast<double>(p.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double pc = std::clamp(p[i], kBceEpsilon, 1.0 - kBceEpsilon);
    acc += tg[i] * std::log(pc) + (1.0 - tg[i]) * std::log(1.0 - pc);
  }
  const std::size_t pi = pred.id(), ti = target.id();
  return tape.record("bce_loss", Tensor::scalar(-acc * inv), {pi, ti},
                     [=](Tape& t, std::span<const double> gy) {
    const auto pv = t.value(pi).data(), tv = t.value(ti).data();
    const double g = gy[0] * inv;
    if (t.requires_grad(pi)) {
      auto d = t.accumulate(pi);
      for (std::size_t i = 0; i < pv.size(); ++i) {
        if (pv[i] < kBceEpsilon || pv[i] > 1.0 - kBceEpsilon) continue;  // clamp is flat
        d[i] += g * (-tv[i] / pv[i] + (1.0 - tv[i]) / (1.0 - pv[i]));
      }
    }
    if (t.requires_grad(ti)) {
      auto d = t.accumulate(ti);
      for (std::size_t i = 0; i < pv.size(); ++i) {
        const double pc = std::clamp(pv[i], kBceEpsilon, 1.0 - kBceEpsilon);
        d[i] += -g * (std::log(pc) - std::log(1.0 - pc));
      }
    }
  });
}

Var mse_loss(Var pred, Var target) {
  Tape& tape = common_tape({pred, target}, "mse_loss");
  expect_same("mse_loss", pred.shape(), target.shape());
  const auto p = pred.value().data(), tg = target.value().data();
  const double inv = 1.0 / static_cast<double>(p.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) acc += (p[i] - tg[i]) * (p[i] - tg[i]);
  const std::size_t pi = pred.id(), ti = target.id();
  return tape.record("mse_loss", Tensor::scalar(acc * inv), {pi, ti},
                     [=](Tape& t, std::span<const double> gy) {
    const auto pv = t.value(pi).data(), tv = t.value(ti).data();
    const double g = 2.0 * gy[0] * inv;
    if (t.requires_grad(pi)) {
      auto d = t.accumulate(pi);
      for (std::size_t i = 0; i < pv.size(); ++i) d[i] += g * (pv[i] - tv[i]);
    }
    if (t.requires_grad(ti)) {
      auto d = t.accumulate(ti);
      for (std::size_t i = 0; i < pv.size(); ++i) d[i] -= g * (pv[i] - tv[i]);
    }
  });
}

}  // namespace shadowkit::tensorcore
