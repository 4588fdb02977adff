#include "georeg/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "georeg/error.hpp"
#include "georeg/geo.hpp"
#include "georeg/simd.hpp"

namespace georeg::ad {

Var Tape::constant(std::vector<double> value, Shape shape) {
  if (value.size() != shape.size()) fail(ErrorCode::ShapeMismatch, "constant value does not match shape");
  nodes_.push_back({std::move(value), {}, shape, nullptr});
  return {static_cast<int>(nodes_.size()) - 1};
}

Var Tape::parameter(std::span<const double> value, Shape shape) {
  if (value.size() != shape.size()) fail(ErrorCode::ShapeMismatch, "parameter value does not match shape");
  nodes_.push_back({std::vector<double>(value.begin(), value.end()), {}, shape, nullptr});
  return {static_cast<int>(nodes_.size()) - 1};
}

Var Tape::push(std::vector<double> value, Shape shape, Backward backward) {
  if (value.size() != shape.size()) fail(ErrorCode::ShapeMismatch, "op output does not match declared shape");
  nodes_.push_back({std::move(value), {}, shape, std::move(backward)});
  return {static_cast<int>(nodes_.size()) - 1};
}

void Tape::backward(Var output) {
  if (nodes_[output.id].value.size() != 1) fail(ErrorCode::ShapeMismatch, "backward() needs a scalar output");
  for (auto& n : nodes_) n.grad.assign(n.value.size(), 0.0);
  nodes_[output.id].grad[0] = 1.0;
  for (int id = output.id; id >= 0; --id) {
    Node& n = nodes_[id];
    if (!n.backward) continue;
    if (std::all_of(n.grad.begin(), n.grad.end(), [](double g) { return g == 0.0; })) continue;
    n.backward(*this, id);
  }
}

namespace {

void require(bool ok, const char* what) {
  if (!ok) fail(ErrorCode::ShapeMismatch, what);
}

}  // namespace

Var linear(Tape& t, Var x, Var w, Var b) {
  const Shape sx = t.shape(x);
  const Shape sw = t.shape(w);
  require(sw.d1 == sx.d1 && sx.d2 == 1 && sw.d2 == 1, "linear: inner dimensions differ");
  const int n = sx.d0, in = sx.d1, out = sw.d0;
  if (b.valid()) require(static_cast<int>(t.value(b).size()) == out, "linear: bias length");
  const auto& kern = simd::active();
  const double* X = t.value(x).data();
  const double* W = t.value(w).data();
  std::vector<double> y(static_cast<std::size_t>(n) * out);
  for (int r = 0; r < n; ++r)
    for (int o = 0; o < out; ++o)
      y[static_cast<std::size_t>(r) * out + o] =
          kern.dot(X + static_cast<std::size_t>(r) * in, W + static_cast<std::size_t>(o) * in, in) +
          (b.valid() ? t.value(b)[o] : 0.0);
  const int xi = x.id, wi = w.id, bi = b.id;
  return t.push(std::move(y), {n, out, 1}, [=](Tape& tp, int self) {
    const auto& k = simd::active();
    const auto& dy = tp.grad(self);
    const double* Xv = tp.value(xi).data();
    const double* Wv = tp.value(wi).data();
    double* dX = tp.grad(xi).data();
    double* dW = tp.grad(wi).data();
    double* dB = bi >= 0 ? tp.grad(bi).data() : nullptr;
    for (int r = 0; r < n; ++r)
      for (int o = 0; o < out; ++o) {
        const double g = dy[static_cast<std::size_t>(r) * out + o];
        if (g == 0.0) continue;
        k.axpy(g, Wv + static_cast<std::size_t>(o) * in, dX + static_cast<std::size_t>(r) * in, in);
        k.axpy(g, Xv + static_cast<std::size_t>(r) * in, dW + static_cast<std::size_t>(o) * in, in);
        if (dB) dB[o] += g;
      }
  });
}

Var matmul(Tape& t, Var a, Var b) {
  const Shape sa = t.shape(a);
  const Shape sb = t.shape(b);
  require(sa.d1 == sb.d0, "matmul: inner dimensions differ");
  const int n = sa.d0, m = sa.d1, d = sb.d1;
  const auto& kern = simd::active();
  const double* A = t.value(a).data();
  const double* B = t.value(b).data();
  std::vector<double> y(static_cast<std::size_t>(n) * d, 0.0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < m; ++j)
      kern.axpy(A[static_cast<std::size_t>(i) * m + j], B + static_cast<std::size_t>(j) * d,
                y.data() + static_cast<std::size_t>(i) * d, d);
  const int ai = a.id, bi = b.id;
  return t.push(std::move(y), {n, d, 1}, [=](Tape& tp, int self) {
    const auto& k = simd::active();
    const double* dy = tp.grad(self).data();
    const double* Av = tp.value(ai).data();
    const double* Bv = tp.value(bi).data();
    double* dA = tp.grad(ai).data();
    double* dB = tp.grad(bi).data();
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < m; ++j) {
        dA[static_cast<std::size_t>(i) * m + j] +=
            k.dot(dy + static_cast<std::size_t>(i) * d, Bv + static_cast<std::size_t>(j) * d, d);
        k.axpy(Av[static_cast<std::size_t>(i) * m + j], dy + static_cast<std::size_t>(i) * d,
               dB + static_cast<std::size_t>(j) * d, d);
      }
  });
}

Var add(Tape& t, Var a, Var b) {
  require(t.value(a).size() == t.value(b).size(), "add: sizes differ");
  std::vector<double> y = t.value(a);
  const auto& bv = t.value(b);
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += bv[i];
  const int ai = a.id, bi = b.id;
  return t.push(std::move(y), t.shape(a), [=](Tape& tp, int self) {
    const auto& dy = tp.grad(self);
    auto& da = tp.grad(ai);
    auto& db = tp.grad(bi);
    for (std::size_t i = 0; i < dy.size(); ++i) {
      da[i] += dy[i];
      db[i] += dy[i];
    }
  });
}

Var scale(Tape& t, Var x, double s) {
  std::vector<double> y = t.value(x);
  for (double& v : y) v *= s;
  const int xi = x.id;
  return t.push(std::move(y), t.shape(x), [=](Tape& tp, int self) {
    const auto& dy = tp.grad(self);
    auto& dx = tp.grad(xi);
    for (std::size_t i = 0; i < dy.size(); ++i) dx[i] += s * dy[i];
  });
}

namespace {

constexpr double kGeluC = 0.7978845608028654;  // sqrt(2 / pi)
constexpr double kGeluA = 0.044715;

}  // namespace

Var gelu(Tape& t, Var x) {
  const auto& xv = t.value(x);
  std::vector<double> y(xv.size());
  for (std::size_t i = 0; i < xv.size(); ++i) {
    const double v = xv[i];
    y[i] = 0.5 * v * (1.0 + std::tanh(kGeluC * (v + kGeluA * v * v * v)));
  }
  const int xi = x.id;
  return t.push(std::move(y), t.shape(x), [=](Tape& tp, int self) {
    const auto& dy = tp.grad(self);
    const auto& xs = tp.value(xi);
    auto& dx = tp.grad(xi);
    for (std::size_t i = 0; i < dy.size(); ++i) {
      const double v = xs[i];
      const double th = std::tanh(kGeluC * (v + kGeluA * v * v * v));
      const double d = 0.5 * (1.0 + th) + 0.5 * v * (1.0 - th * th) * kGeluC * (1.0 + 3.0 * kGeluA * v * v);
      dx[i] += dy[i] * d;
    }
  });
}

Var softmax_rows(Tape& t, Var x) {
  const Shape s = t.shape(x);
  const int n = s.d0, m = s.d1 * s.d2;
  std::vector<double> y = t.value(x);
  for (int r = 0; r < n; ++r) {
    double* row = y.data() + static_cast<std::size_t>(r) * m;
    const double mx = *std::max_element(row, row + m);
    double sum = 0.0;
    for (int j = 0; j < m; ++j) sum += (row[j] = std::exp(row[j] - mx));
    for (int j = 0; j < m; ++j) row[j] /= sum;
  }
  const int xi = x.id;
  return t.push(std::move(y), s, [=](Tape& tp, int self) {
    const auto& dy = tp.grad(self);
    const auto& yv = tp.value(self);
    auto& dx = tp.grad(xi);
    for (int r = 0; r < n; ++r) {
      const std::size_t o = static_cast<std::size_t>(r) * m;
      double inner = 0.0;
      for (int j = 0; j < m; ++j) inner += dy[o + j] * yv[o + j];
      for (int j = 0; j < m; ++j) dx[o + j] += yv[o + j] * (dy[o + j] - inner);
    }
  });
}

Var layer_norm(Tape& t, Var x, Var gain, Var bias, double eps) {
  const Shape s = t.shape(x);
  const int n = s.d0, m = s.d1;
  require(static_cast<int>(t.value(gain).size()) == m && static_cast<int>(t.value(bias).size()) == m,
          "layer_norm: gain/bias length");
  const auto& xv = t.value(x);
  const auto& g = t.value(gain);
  const auto& b = t.value(bias);
  std::vector<double> y(xv.size());
  std::vector<double> xhat(xv.size());
  std::vector<double> inv_std(n);
  for (int r = 0; r < n; ++r) {
    const std::size_t o = static_cast<std::size_t>(r) * m;
    double mean = 0.0;
    for (int j = 0; j < m; ++j) mean += xv[o + j];
    mean /= m;
    double var = 0.0;
    for (int j = 0; j < m; ++j) var += (xv[o + j] - mean) * (xv[o + j] - mean);
    var /= m;
    inv_std[r] = 1.0 / std::sqrt(var + eps);
    for (int j = 0; j < m; ++j) {
      xhat[o + j] = (xv[o + j] - mean) * inv_std[r];
      y[o + j] = g[j] * xhat[o + j] + b[j];
    }
  }
  const int xi = x.id, gi = gain.id, bi = bias.id;
  return t.push(std::move(y), s, [=, xhat = std::move(xhat), inv_std = std::move(inv_std)](Tape& tp, int self) {
    const auto& dy = tp.grad(self);
    const auto& gv = tp.value(gi);
    auto& dx = tp.grad(xi);
    auto& dg = tp.grad(gi);
    auto& db = tp.grad(bi);
    std::vector<double> dxhat(m);
    for (int r = 0; r < n; ++r) {
      const std::size_t o = static_cast<std::size_t>(r) * m;
      double mean_d = 0.0;
      double mean_dx = 0.0;
      for (int j = 0; j < m; ++j) {
        dg[j] += dy[o + j] * xhat[o + j];
        db[j] += dy[o + j];
        dxhat[j] = dy[o + j] * gv[j];
        mean_d += dxhat[j];
        mean_dx += dxhat[j] * xhat[o + j];
      }
      mean_d /= m;
      mean_dx /= m;
      for (int j = 0; j < m; ++j) dx[o + j] += inv_std[r] * (dxhat[j] - mean_d - xhat[o + j] * mean_dx);
    }
  });
}

Var concat_rows(Tape& t, Var a, Var b) {
  const Shape sa = t.shape(a);
  const Shape sb = t.shape(b);
  require(sa.d1 == sb.d1, "concat_rows: column counts differ");
  std::vector<double> y = t.value(a);
  const auto& bv = t.value(b);
  y.insert(y.end(), bv.begin(), bv.end());
  const int ai = a.id, bi = b.id;
  const std::size_t na = t.value(a).size();
  return t.push(std::move(y), {sa.d0 + sb.d0, sa.d1, 1}, [=](Tape& tp, int self) {
    const auto& dy = tp.grad(self);
    auto& da = tp.grad(ai);
    auto& db = tp.grad(bi);
    for (std::size_t i = 0; i < na; ++i) da[i] += dy[i];
    for (std::size_t i = 0; i < db.size(); ++i) db[i] += dy[na + i];
  });
}

Var slice_rows(Tape& t, Var x, int start, int count) {
  const Shape s = t.shape(x);
  require(start >= 0 && count >= 0 && start + count <= s.d0, "slice_rows: range");
  const int m = s.d1;
  const auto& xv = t.value(x);
  std::vector<double> y(xv.begin() + static_cast<std::ptrdiff_t>(start) * m,
                        xv.begin() + static_cast<std::ptrdiff_t>(start + count) * m);
  const int xi = x.id;
  return t.push(std::move(y), {count, m, 1}, [=](Tape& tp, int self) {
    const auto& dy = tp.grad(self);
    auto& dx = tp.grad(xi);
    for (std::size_t i = 0; i < dy.size(); ++i) dx[static_cast<std::size_t>(start) * m + i] += dy[i];
  });
}

Var slice_cols(Tape& t, Var x, int start, int count) {
  const Shape s = t.shape(x);
  require(start >= 0 && count >= 0 && start + count <= s.d1, "slice_cols: range");
  const int n = s.d0, m = s.d1;
  const auto& xv = t.value(x);
  std::vector<double> y(static_cast<std::size_t>(n) * count);
  for (int r = 0; r < n; ++r)
    std::copy_n(xv.begin() + static_cast<std::ptrdiff_t>(r) * m + start, count,
                y.begin() + static_cast<std::ptrdiff_t>(r) * count);
  const int xi = x.id;
  return t.push(std::move(y), {n, count, 1}, [=](Tape& tp, int self) {
    const auto& dy = tp.grad(self);
    auto& dx = tp.grad(xi);
    for (int r = 0; r < n; ++r)
      for (int j = 0; j < count; ++j)
        dx[static_cast<std::size_t>(r) * m + start + j] += dy[static_cast<std::size_t>(r) * count + j];
  });
}

Var concat_cols(Tape& t, std::span<const Var> parts) {
  require(!parts.empty(), "concat_cols: no inputs");
  const int n = t.shape(parts[0]).d0;
  std::vector<int> ids, widths, offsets;
  int total = 0;
  for (Var p : parts) {
    require(t.shape(p).d0 == n, "concat_cols: row counts differ");
    ids.push_back(p.id);
    widths.push_back(t.shape(p).d1);
    offsets.push_back(total);
    total += t.shape(p).d1;
  }
  std::vector<double> y(static_cast<std::size_t>(n) * total);
  for (std::size_t p = 0; p < ids.size(); ++p) {
    const auto& v = t.value(ids[p]);
    for (int r = 0; r < n; ++r)
      std::copy_n(v.begin() + static_cast<std::ptrdiff_t>(r) * widths[p], widths[p],
                  y.begin() + static_cast<std::ptrdiff_t>(r) * total + offsets[p]);
  }
  return t.push(std::move(y), {n, total, 1}, [=](Tape& tp, int self) {
    const auto& dy = tp.grad(self);
    for (std::size_t p = 0; p < ids.size(); ++p) {
      auto& dx = tp.grad(ids[p]);
      for (int r = 0; r < n; ++r)
        for (int j = 0; j < widths[p]; ++j)
          dx[static_cast<std::size_t>(r) * widths[p] + j] += dy[static_cast<std::size_t>(r) * total + offsets[p] + j];
    }
  });
}

Var reshape(Tape& t, Var x, Shape shape) {
  require(shape.size() == t.value(x).size(), "reshape: element count changes");
  const int xi = x.id;
  return t.push(t.value(x), shape, [=](Tape& tp, int self) {
    const auto& dy = tp.grad(self);
    auto& dx = tp.grad(xi);
    for (std::size_t i = 0; i < dy.size(); ++i) dx[i] += dy[i];
  });
}

Var tokens_to_grid(Tape& t, Var tokens, int grid_w, int grid_h) {
  const Shape s = t.shape(tokens);
  require(s.d0 == grid_w * grid_h, "tokens_to_grid: token count != grid area");
  const int c = s.d1;
  const auto& xv = t.value(tokens);
  std::vector<double> y(xv.size());
  // token (py * grid_w + px) -> feature column px, row py
  for (int py = 0; py < grid_h; ++py)
    for (int px = 0; px < grid_w; ++px)
      std::copy_n(xv.begin() + static_cast<std::ptrdiff_t>(py * grid_w + px) * c, c,
                  y.begin() + static_cast<std::ptrdiff_t>(px * grid_h + py) * c);
  const int xi = tokens.id;
  return t.push(std::move(y), {grid_w, grid_h, c}, [=](Tape& tp, int self) {
    const auto& dy = tp.grad(self);
    auto& dx = tp.grad(xi);
    for (int py = 0; py < grid_h; ++py)
      for (int px = 0; px < grid_w; ++px)
        for (int k = 0; k < c; ++k)
          dx[static_cast<std::size_t>(py * grid_w + px) * c + k] += dy[static_cast<std::size_t>(px * grid_h + py) * c + k];
  });
}

Var im2col3x3(Tape& t, Var x, bool circular_width) {
  const Shape s = t.shape(x);
  const int W = s.d0, H = s.d1, C = s.d2;
  const std::size_t cols = 9 * static_cast<std::size_t>(C);
  // Source offset for each (row, tap), or -1 for zero padding.
  std::vector<long long> src(static_cast<std::size_t>(W) * H * 9, -1);
  for (int w = 0; w < W; ++w)
    for (int h = 0; h < H; ++h)
      for (int dw = -1; dw <= 1; ++dw)
        for (int dh = -1; dh <= 1; ++dh) {
          int sw = w + dw;
          const int sh = h + dh;
          if (sh < 0 || sh >= H) continue;
          if (circular_width) {
            sw = wrap_index(sw, W);
          } else if (sw < 0 || sw >= W) {
            continue;
          }
          const int tap = (dw + 1) * 3 + (dh + 1);
          src[(static_cast<std::size_t>(w) * H + h) * 9 + tap] = (static_cast<long long>(sw) * H + sh) * C;
        }
  const auto& xv = t.value(x);
  std::vector<double> y(static_cast<std::size_t>(W) * H * cols, 0.0);
  for (std::size_t r = 0; r < static_cast<std::size_t>(W) * H; ++r)
    for (int tap = 0; tap < 9; ++tap) {
      const long long o = src[r * 9 + tap];
      if (o >= 0) std::copy_n(xv.begin() + o, C, y.begin() + static_cast<std::ptrdiff_t>(r * cols + tap * C));
    }
  const int xi = x.id;
  return t.push(std::move(y), {W * H, static_cast<int>(cols), 1}, [=, src = std::move(src)](Tape& tp, int self) {
    const auto& dy = tp.grad(self);
    auto& dx = tp.grad(xi);
    for (std::size_t r = 0; r < static_cast<std::size_t>(W) * H; ++r)
      for (int tap = 0; tap < 9; ++tap) {
        const long long o = src[r * 9 + tap];
        if (o < 0) continue;
        for (int k = 0; k < C; ++k) dx[o + k] += dy[r * cols + tap * C + k];
      }
  });
}

Var conv3x3(Tape& t, Var x, Var w, Var b, bool circular_width) {
  const Shape s = t.shape(x);
  require(t.shape(w).d1 == 9 * s.d2, "conv3x3: weight fan-in != 9 * input channels");
  Var cols = im2col3x3(t, x, circular_width);
  Var y = linear(t, cols, w, b);
  return reshape(t, y, {s.d0, s.d1, t.shape(w).d0});
}

namespace {

struct Tap2 {
  int i0, i1;
  double w0, w1;
};

std::vector<Tap2> upsample_taps(int in, bool circular) {
  std::vector<Tap2> taps(2 * static_cast<std::size_t>(in));
  for (int o = 0; o < 2 * in; ++o) {
    const int i = o / 2;
    int lo = (o % 2 == 0) ? i - 1 : i;
    int hi = lo + 1;
    const double w_hi = (o % 2 == 0) ? 0.75 : 0.25;
    if (circular) {
      lo = wrap_index(lo, in);
      hi = wrap_index(hi, in);
    } else {
      lo = std::clamp(lo, 0, in - 1);
      hi = std::clamp(hi, 0, in - 1);
    }
    taps[o] = {lo, hi, 1.0 - w_hi, w_hi};
  }
  return taps;
}

}  // namespace

Var upsample2x(Tape& t, Var x, bool circular_width) {
  const Shape s = t.shape(x);
  const int W = s.d0, H = s.d1, C = s.d2;
  const auto tw = upsample_taps(W, circular_width);
  const auto th = upsample_taps(H, false);
  const auto& xv = t.value(x);
  const int W2 = 2 * W, H2 = 2 * H;
  std::vector<double> y(static_cast<std::size_t>(W2) * H2 * C, 0.0);
  auto at = [&](int w, int h) { return static_cast<std::size_t>(w * H + h) * C; };
  for (int ow = 0; ow < W2; ++ow)
    for (int oh = 0; oh < H2; ++oh) {
      double* dst = y.data() + static_cast<std::size_t>(ow * H2 + oh) * C;
      const Tap2& a = tw[ow];
      const Tap2& b = th[oh];
      const std::size_t o00 = at(a.i0, b.i0), o01 = at(a.i0, b.i1), o10 = at(a.i1, b.i0), o11 = at(a.i1, b.i1);
      for (int k = 0; k < C; ++k)
        dst[k] = a.w0 * (b.w0 * xv[o00 + k] + b.w1 * xv[o01 + k]) + a.w1 * (b.w0 * xv[o10 + k] + b.w1 * xv[o11 + k]);
    }
  const int xi = x.id;
  return t.push(std::move(y), {W2, H2, C}, [=](Tape& tp, int self) {
    const auto& dy = tp.grad(self);
    auto& dx = tp.grad(xi);
    auto idx = [&](int w, int h) { return static_cast<std::size_t>(w * H + h) * C; };
    for (int ow = 0; ow < W2; ++ow)
      for (int oh = 0; oh < H2; ++oh) {
        const double* g = dy.data() + static_cast<std::size_t>(ow * H2 + oh) * C;
        const Tap2& a = tw[ow];
        const Tap2& b = th[oh];
        const std::size_t o00 = idx(a.i0, b.i0), o01 = idx(a.i0, b.i1), o10 = idx(a.i1, b.i0), o11 = idx(a.i1, b.i1);
        for (int k = 0; k < C; ++k) {
          dx[o00 + k] += a.w0 * b.w0 * g[k];
          dx[o01 + k] += a.w0 * b.w1 * g[k];
          dx[o10 + k] += a.w1 * b.w0 * g[k];
          dx[o11 + k] += a.w1 * b.w1 * g[k];
        }
      }
  });
}

Var mul_scalars(Tape& t, Var a, Var b) {
  require(t.value(a).size() == 1 && t.value(b).size() == 1, "mul_scalars: inputs must be scalars");
  const int ai = a.id, bi = b.id;
  return t.push({t.scalar(a) * t.scalar(b)}, {}, [=](Tape& tp, int self) {
    const double g = tp.grad(self)[0];
    tp.grad(ai)[0] += g * tp.value(bi)[0];
    tp.grad(bi)[0] += g * tp.value(ai)[0];
  });
}

Var mean_of(Tape& t, std::span<const Var> scalars) {
  require(!scalars.empty(), "mean_of: no inputs");
  std::vector<int> ids;
  double sum = 0.0;
  for (Var v : scalars) {
    ids.push_back(v.id);
    sum += t.scalar(v);
  }
  const double inv = 1.0 / static_cast<double>(ids.size());
  return t.push({sum * inv}, {}, [=](Tape& tp, int self) {
    const double g = tp.grad(self)[0] * inv;
    for (int id : ids) tp.grad(id)[0] += g;
  });
}

}  // namespace georeg::ad
