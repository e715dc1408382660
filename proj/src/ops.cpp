// Copyright 2026 The Gaitformer Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cmath>
#include <numbers>

#include <fmt/format.h>

#include "gaitformer/tensor.hpp"
#include "gemm.hpp"

namespace gaitformer {

namespace {

void require_same_tape(const char* op, Var a, Var b) {
  if (&a.tape() != &b.tape()) throw std::logic_error(fmt::format("{}: operands on different tapes", op));
}

Shape leading(const Shape& s, std::size_t drop) { return Shape(s.begin(), s.end() - drop); }

// Number of elements of `b` that repeat across `a`, validating the trailing
// broadcast rule.
std::size_t broadcast_period(const char* op, const Shape& a, const Shape& b) {
  if (a == b) return numel(a);
  auto first = std::find_if(b.begin(), b.end(), [](std::size_t d) { return d != 1; });
  const Shape core(first, b.end());
  const bool ok = core.size() <= a.size() && std::equal(core.rbegin(), core.rend(), a.rbegin());
  if (!ok) {
    throw ShapeError(fmt::format("{}: cannot broadcast {} onto {}", op, to_string(b), to_string(a)));
  }
  return numel(b);
}

enum class Binary { add, sub, mul };

Var binary(const char* op, Binary kind, Var a, Var b) {
  require_same_tape(op, a, b);
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  const std::size_t period = broadcast_period(op, av.shape(), bv.shape());
  Tensor out(av.shape());
  const std::size_t n = av.size();
  for (std::size_t i = 0; i < n; ++i) {
    const double x = av[i];
    const double y = bv[i % period];
    out[i] = kind == Binary::add ? x + y : kind == Binary::sub ? x - y : x * y;
  }
  return a.tape().record(op, std::move(out), {a, b},
                         [a, b, kind, period](Tape& tape, const Tensor&, const Tensor& g) {
                           const std::size_t n = g.size();
                           if (Tensor* ga = tape.grad_buffer(a)) {
                             if (kind == Binary::mul) {
                               const Tensor& bv = b.value();
                               for (std::size_t i = 0; i < n; ++i) (*ga)[i] += g[i] * bv[i % period];
                             } else {
                               for (std::size_t i = 0; i < n; ++i) (*ga)[i] += g[i];
                             }
                           }
                           if (Tensor* gb = tape.grad_buffer(b)) {
                             if (kind == Binary::mul) {
                               const Tensor& av = a.value();
                               for (std::size_t i = 0; i < n; ++i) (*gb)[i % period] += g[i] * av[i];
                             } else {
                               const double sign = kind == Binary::sub ? -1.0 : 1.0;
                               for (std::size_t i = 0; i < n; ++i) (*gb)[i % period] += sign * g[i];
                             }
                           }
                         });
}

template <class Forward, class Derivative>
Var unary(const char* op, Var x, Forward f, Derivative df) {
  const Tensor& xv = x.value();
  Tensor out(xv.shape());
  for (std::size_t i = 0; i < xv.size(); ++i) out[i] = f(xv[i]);
  return x.tape().record(op, std::move(out), {x}, [x, df](Tape& tape, const Tensor&, const Tensor& g) {
    Tensor* gx = tape.grad_buffer(x);
    const Tensor& xv = x.value();
    for (std::size_t i = 0; i < g.size(); ++i) (*gx)[i] += g[i] * df(xv[i]);
  });
}

// Gathers `in` into `out` through an index map: out[i] = in[index[i]].
// Backward scatters with the same map.
Var permute(const char* op, Var x, Shape shape, std::vector<std::size_t> index) {
  const Tensor& xv = x.value();
  Tensor out(std::move(shape));
  for (std::size_t i = 0; i < index.size(); ++i) out[i] = xv[index[i]];
  return x.tape().record(op, std::move(out), {x},
                         [x, index = std::move(index)](Tape& tape, const Tensor&, const Tensor& g) {
                           Tensor* gx = tape.grad_buffer(x);
                           for (std::size_t i = 0; i < index.size(); ++i) (*gx)[index[i]] += g[i];
                         });
}

}  // namespace

Var matmul(Var a, Var b) {
  require_same_tape("matmul", a, b);
  const Shape& as = a.shape();
  const Shape& bs = b.shape();
  if (as.size() < 2 || bs.size() < 2 || as[as.size() - 1] != bs[bs.size() - 2]) {
    throw ShapeError(fmt::format("matmul: incompatible shapes {} and {}", to_string(as), to_string(bs)));
  }
  const std::size_t m = as[as.size() - 2];
  const std::size_t k = as[as.size() - 1];
  const std::size_t n = bs[bs.size() - 1];
  const Shape batch_a = leading(as, 2);
  const Shape batch_b = leading(bs, 2);

  enum class Mode { shared_b, shared_a, batched };
  Mode mode;
  Shape out_batch;
  if (batch_b.empty()) {
    mode = Mode::shared_b;
    out_batch = batch_a;
  } else if (batch_a.empty()) {
    mode = Mode::shared_a;
    out_batch = batch_b;
  } else if (batch_a == batch_b) {
    mode = Mode::batched;
    out_batch = batch_a;
  } else {
    throw ShapeError(fmt::format("matmul: batch dimensions of {} and {} disagree", to_string(as),
                                 to_string(bs)));
  }
  const std::size_t batches = numel(out_batch);
  Shape out_shape = out_batch;
  out_shape.push_back(m);
  out_shape.push_back(n);
  Tensor out(out_shape);

  const double* ap = a.value().data();
  const double* bp = b.value().data();
  if (mode == Mode::shared_b) {
    detail::gemm_accumulate(false, false, batches * m, n, k, ap, bp, out.data());
  } else {
    const std::size_t a_step = mode == Mode::shared_a ? 0 : m * k;
    for (std::size_t i = 0; i < batches; ++i) {
      detail::gemm_accumulate(false, false, m, n, k, ap + i * a_step, bp + i * k * n,
                              out.data() + i * m * n);
    }
  }

  return a.tape().record(
      "matmul", std::move(out), {a, b},
      [a, b, mode, batches, m, n, k](Tape& tape, const Tensor&, const Tensor& g) {
        const double* ap = a.value().data();
        const double* bp = b.value().data();
        const double* gp = g.data();
        Tensor* ga = tape.grad_buffer(a);
        Tensor* gb = tape.grad_buffer(b);
        if (mode == Mode::shared_b) {
          // dA = dC B^T, dB = A^T dC over the flattened batch.
          if (ga) detail::gemm_accumulate(false, true, batches * m, k, n, gp, bp, ga->data());
          if (gb) detail::gemm_accumulate(true, false, k, n, batches * m, ap, gp, gb->data());
          return;
        }
        const std::size_t a_step = mode == Mode::shared_a ? 0 : m * k;
        for (std::size_t i = 0; i < batches; ++i) {
          const double* gi = gp + i * m * n;
          if (ga) detail::gemm_accumulate(false, true, m, k, n, gi, bp + i * k * n, ga->data() + i * a_step);
          if (gb) detail::gemm_accumulate(true, false, k, n, m, ap + i * a_step, gi, gb->data() + i * k * n);
        }
      });
}

Var transpose(Var x) {
  const Shape& s = x.shape();
  if (s.size() < 2) throw ShapeError("transpose: rank must be at least 2, got " + to_string(s));
  const std::size_t rows = s[s.size() - 2];
  const std::size_t cols = s[s.size() - 1];
  const std::size_t batches = numel(s) / (rows * cols);
  Shape out_shape = s;
  std::swap(out_shape[s.size() - 2], out_shape[s.size() - 1]);
  std::vector<std::size_t> index(numel(s));
  std::size_t i = 0;
  for (std::size_t bi = 0; bi < batches; ++bi) {
    for (std::size_t c = 0; c < cols; ++c) {
      for (std::size_t r = 0; r < rows; ++r) index[i++] = bi * rows * cols + r * cols + c;
    }
  }
  return permute("transpose", x, std::move(out_shape), std::move(index));
}

Var reshape(Var x, Shape shape) {
  Tensor out = x.value().reshaped(std::move(shape));
  return x.tape().record("reshape", std::move(out), {x}, [x](Tape& tape, const Tensor&, const Tensor& g) {
    Tensor* gx = tape.grad_buffer(x);
    for (std::size_t i = 0; i < g.size(); ++i) (*gx)[i] += g[i];
  });
}

Var split_heads(Var x, std::size_t heads) {
  const Shape& s = x.shape();
  if (s.size() < 2 || heads == 0 || s.back() % heads != 0) {
    throw ShapeError(fmt::format("split_heads: channel dimension of {} not divisible by {} heads",
                                 to_string(s), heads));
  }
  const std::size_t tokens = s[s.size() - 2];
  const std::size_t channels = s.back();
  const std::size_t per_head = channels / heads;
  const std::size_t batches = numel(s) / (tokens * channels);
  Shape out_shape = leading(s, 2);
  out_shape.insert(out_shape.end(), {heads, tokens, per_head});
  std::vector<std::size_t> index(numel(s));
  std::size_t i = 0;
  for (std::size_t bi = 0; bi < batches; ++bi) {
    for (std::size_t h = 0; h < heads; ++h) {
      for (std::size_t t = 0; t < tokens; ++t) {
        for (std::size_t j = 0; j < per_head; ++j) {
          index[i++] = bi * tokens * channels + t * channels + h * per_head + j;
        }
      }
    }
  }
  return permute("split_heads", x, std::move(out_shape), std::move(index));
}

Var merge_heads(Var x) {
  const Shape& s = x.shape();
  if (s.size() < 3) throw ShapeError("merge_heads: rank must be at least 3, got " + to_string(s));
  const std::size_t heads = s[s.size() - 3];
  const std::size_t tokens = s[s.size() - 2];
  const std::size_t per_head = s.back();
  const std::size_t batches = numel(s) / (heads * tokens * per_head);
  Shape out_shape = leading(s, 3);
  out_shape.insert(out_shape.end(), {tokens, heads * per_head});
  std::vector<std::size_t> index(numel(s));
  std::size_t i = 0;
  for (std::size_t bi = 0; bi < batches; ++bi) {
    for (std::size_t t = 0; t < tokens; ++t) {
      for (std::size_t h = 0; h < heads; ++h) {
        for (std::size_t j = 0; j < per_head; ++j) {
          index[i++] = ((bi * heads + h) * tokens + t) * per_head + j;
        }
      }
    }
  }
  return permute("merge_heads", x, std::move(out_shape), std::move(index));
}

Var flatten_frames(Var x) {
  const Shape& s = x.shape();
  if (s.size() < 3) throw ShapeError("flatten_frames: expected (..., T, N, D), got " + to_string(s));
  Shape out_shape = leading(s, 2);
  out_shape.push_back(s[s.size() - 2] * s.back());
  return reshape(x, std::move(out_shape));
}

Var softmax(Var x, std::size_t axis) {
  const Shape& s = x.shape();
  if (axis >= s.size()) {
    throw ShapeError(fmt::format("softmax: axis {} invalid for shape {}", axis, to_string(s)));
  }
  std::size_t outer = 1;
  std::size_t inner = 1;
  for (std::size_t d = 0; d < axis; ++d) outer *= s[d];
  for (std::size_t d = axis + 1; d < s.size(); ++d) inner *= s[d];
  const std::size_t len = s[axis];

  const Tensor& xv = x.value();
  Tensor out(s);
  for (std::size_t o = 0; o < outer; ++o) {
    for (std::size_t in = 0; in < inner; ++in) {
      const std::size_t base = o * len * inner + in;
      double peak = xv[base];
      for (std::size_t j = 1; j < len; ++j) peak = std::max(peak, xv[base + j * inner]);
      double total = 0.0;
      for (std::size_t j = 0; j < len; ++j) {
        const double e = std::exp(xv[base + j * inner] - peak);
        out[base + j * inner] = e;
        total += e;
      }
      for (std::size_t j = 0; j < len; ++j) out[base + j * inner] /= total;
    }
  }
  return x.tape().record("softmax", std::move(out), {x},
                         [x, outer, inner, len](Tape& tape, const Tensor& y, const Tensor& g) {
                           Tensor* gx = tape.grad_buffer(x);
                           for (std::size_t o = 0; o < outer; ++o) {
                             for (std::size_t in = 0; in < inner; ++in) {
                               const std::size_t base = o * len * inner + in;
                               double dot = 0.0;
                               for (std::size_t j = 0; j < len; ++j) {
                                 dot += g[base + j * inner] * y[base + j * inner];
                               }
                               for (std::size_t j = 0; j < len; ++j) {
                                 const std::size_t idx = base + j * inner;
                                 (*gx)[idx] += y[idx] * (g[idx] - dot);
                               }
                             }
                           }
                         });
}

Var layer_norm(Var x, Var gamma, Var beta, double eps) {
  require_same_tape("layer_norm", x, gamma);
  require_same_tape("layer_norm", x, beta);
  const Shape& s = x.shape();
  const std::size_t width = s.back();
  if (gamma.shape() != Shape{width} || beta.shape() != Shape{width}) {
    throw ShapeError(fmt::format("layer_norm: last dimension of {} does not match gamma {} / beta {}",
                                 to_string(s), to_string(gamma.shape()), to_string(beta.shape())));
  }
  if (!(eps > 0.0)) throw std::invalid_argument("layer_norm: eps must be positive");

  const std::size_t rows = numel(s) / width;
  const Tensor& xv = x.value();
  const Tensor& gv = gamma.value();
  const Tensor& bv = beta.value();
  Tensor out(s);
  std::vector<double> rstd(rows);
  std::vector<double> normed(xv.size());
  for (std::size_t r = 0; r < rows; ++r) {
    const double* row = xv.data() + r * width;
    double mean = 0.0;
    for (std::size_t j = 0; j < width; ++j) mean += row[j];
    mean /= static_cast<double>(width);
    double var = 0.0;
    for (std::size_t j = 0; j < width; ++j) var += (row[j] - mean) * (row[j] - mean);
    var /= static_cast<double>(width);
    rstd[r] = 1.0 / std::sqrt(var + eps);
    for (std::size_t j = 0; j < width; ++j) {
      const double xhat = (row[j] - mean) * rstd[r];
      normed[r * width + j] = xhat;
      out[r * width + j] = xhat * gv[j] + bv[j];
    }
  }
  return x.tape().record(
      "layer_norm", std::move(out), {x, gamma, beta},
      [x, gamma, beta, rows, width, rstd = std::move(rstd), normed = std::move(normed)](
          Tape& tape, const Tensor&, const Tensor& g) {
        const Tensor& gv = gamma.value();
        Tensor* gx = tape.grad_buffer(x);
        Tensor* gg = tape.grad_buffer(gamma);
        Tensor* gb = tape.grad_buffer(beta);
        const double inv_width = 1.0 / static_cast<double>(width);
        for (std::size_t r = 0; r < rows; ++r) {
          const double* grow = g.data() + r * width;
          const double* xhat = normed.data() + r * width;
          if (gg || gb) {
            for (std::size_t j = 0; j < width; ++j) {
              if (gg) (*gg)[j] += grow[j] * xhat[j];
              if (gb) (*gb)[j] += grow[j];
            }
          }
          if (!gx) continue;
          double mean_d = 0.0;
          double mean_dx = 0.0;
          for (std::size_t j = 0; j < width; ++j) {
            const double d = grow[j] * gv[j];
            mean_d += d;
            mean_dx += d * xhat[j];
          }
          mean_d *= inv_width;
          mean_dx *= inv_width;
          double* out_row = gx->data() + r * width;
          for (std::size_t j = 0; j < width; ++j) {
            const double d = grow[j] * gv[j];
            out_row[j] += rstd[r] * (d - mean_d - xhat[j] * mean_dx);
          }
        }
      });
}

Var add(Var a, Var b) { return binary("add", Binary::add, a, b); }
Var sub(Var a, Var b) { return binary("sub", Binary::sub, a, b); }
Var mul(Var a, Var b) { return binary("mul", Binary::mul, a, b); }

Var scale(Var x, double factor) {
  return unary(
      "scale", x, [factor](double v) { return v * factor; }, [factor](double) { return factor; });
}

Var relu(Var x) {
  return unary(
      "relu", x, [](double v) { return v > 0.0 ? v : 0.0; },
      [](double v) { return v > 0.0 ? 1.0 : 0.0; });
}

Var gelu(Var x) {
  constexpr double inv_sqrt2 = 1.0 / std::numbers::sqrt2;
  const double inv_sqrt_2pi = 1.0 / std::sqrt(2.0 * std::numbers::pi);
  return unary(
      "gelu", x, [=](double v) { return 0.5 * v * (1.0 + std::erf(v * inv_sqrt2)); },
      [=](double v) {
        return 0.5 * (1.0 + std::erf(v * inv_sqrt2)) + v * inv_sqrt_2pi * std::exp(-0.5 * v * v);
      });
}

Var weighted_frame_sum(Var x, Var w) {
  require_same_tape("weighted_frame_sum", x, w);
  const Shape& s = x.shape();
  if (s.size() < 2 || w.shape() != Shape{s[s.size() - 2]}) {
    throw ShapeError(fmt::format("weighted_frame_sum: frame weights {} do not match frames of {}",
                                 to_string(w.shape()), to_string(s)));
  }
  const std::size_t frames = s[s.size() - 2];
  const std::size_t width = s.back();
  const std::size_t batches = numel(s) / (frames * width);
  const Tensor& xv = x.value();
  const Tensor& wv = w.value();
  Tensor out({batches, width});
  for (std::size_t bi = 0; bi < batches; ++bi) {
    double* orow = out.data() + bi * width;
    for (std::size_t t = 0; t < frames; ++t) {
      const double* xrow = xv.data() + (bi * frames + t) * width;
      for (std::size_t j = 0; j < width; ++j) orow[j] += wv[t] * xrow[j];
    }
  }
  return x.tape().record(
      "weighted_frame_sum", std::move(out), {x, w},
      [x, w, batches, frames, width](Tape& tape, const Tensor&, const Tensor& g) {
        const Tensor& xv = x.value();
        const Tensor& wv = w.value();
        Tensor* gx = tape.grad_buffer(x);
        Tensor* gw = tape.grad_buffer(w);
        for (std::size_t bi = 0; bi < batches; ++bi) {
          const double* grow = g.data() + bi * width;
          for (std::size_t t = 0; t < frames; ++t) {
            const std::size_t base = (bi * frames + t) * width;
            if (gx) {
              for (std::size_t j = 0; j < width; ++j) (*gx)[base + j] += wv[t] * grow[j];
            }
            if (gw) {
              double dot = 0.0;
              for (std::size_t j = 0; j < width; ++j) dot += xv[base + j] * grow[j];
              (*gw)[t] += dot;
            }
          }
        }
      });
}

Var mse_loss(Var pred, Var target) {
  require_same_tape("mse_loss", pred, target);
  if (pred.shape() != target.shape()) {
    throw ShapeError(fmt::format("mse_loss: prediction {} vs target {}", to_string(pred.shape()),
                                 to_string(target.shape())));
  }
  const Tensor& pv = pred.value();
  const Tensor& tv = target.value();
  const double count = static_cast<double>(pv.size());
  double total = 0.0;
  for (std::size_t i = 0; i < pv.size(); ++i) total += (pv[i] - tv[i]) * (pv[i] - tv[i]);
  return pred.tape().record("mse_loss", Tensor::scalar(total / count), {pred, target},
                            [pred, target, count](Tape& tape, const Tensor&, const Tensor& g) {
                              const Tensor& pv = pred.value();
                              const Tensor& tv = target.value();
                              const double factor = 2.0 * g[0] / count;
                              Tensor* gp = tape.grad_buffer(pred);
                              Tensor* gt = tape.grad_buffer(target);
                              for (std::size_t i = 0; i < pv.size(); ++i) {
                                const double d = factor * (pv[i] - tv[i]);
                                if (gp) (*gp)[i] += d;
                                if (gt) (*gt)[i] -= d;
                              }
                            });
}

Var linear(Var x, Var weight, Var bias) { return add(matmul(x, weight), bias); }

}  // namespace gaitformer
