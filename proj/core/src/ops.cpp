// Copyright (c) 2026 The dylo Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "dylo/ops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "dylo/errors.hpp"

namespace dylo {

namespace {

template <typename T>
using StoragePtr = std::shared_ptr<TensorStorage<T>>;

// Returns the active tape when at least one input participates in autodiff.
template <typename T>
Tape<T>* recording_tape(std::initializer_list<const Tensor<T>*> inputs) {
  Tape<T>* tape = active_tape<T>();
  if (!tape) return nullptr;
  for (const auto* t : inputs) {
    if (t->requires_grad()) return tape;
  }
  return nullptr;
}

// Gradient buffer of an input, or empty when it does not need one.
template <typename T>
std::span<T> grad_sink(const StoragePtr<T>& s) {
  if (!s->requires_grad) return {};
  if (s->grad.empty()) s->grad.assign(s->data.size(), T(0));
  return s->grad;
}

template <typename T>
void require_rank4(const Tensor<T>& t, const char* what) {
  if (!t.defined() || t.rank() != 4) {
    throw DimensionError(std::string(what) + " must be a rank-4 NCHW tensor, got " +
                         (t.defined() ? shape_str(t.shape()) : std::string("undefined")));
  }
}

template <typename T>
void require_same_shape(const Tensor<T>& a, const Tensor<T>& b, const char* op) {
  if (a.shape() != b.shape()) {
    throw DimensionError(std::string(op) + ": shape mismatch " + shape_str(a.shape()) + " vs " +
                         shape_str(b.shape()));
  }
}

// Generic unary op: forward f(x), derivative df(x, y) evaluated per element.
template <typename T, typename F, typename DF>
Tensor<T> unary(const Tensor<T>& a, F f, DF df) {
  Tensor<T> out(a.shape());
  auto x = a.data();
  auto y = out.data();
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = f(x[i]);
  if (auto* tape = recording_tape<T>({&a})) {
    out.set_requires_grad();
    StoragePtr<T> as = a.storage_ptr();
    StoragePtr<T> os = out.storage_ptr();
    tape->record({as}, os, [as, os, df]() {
      auto ga = grad_sink(as);
      if (ga.empty()) return;
      const auto& x = as->data;
      const auto& y = os->data;
      const auto& g = os->grad;
      for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * df(x[i], y[i]);
    });
  }
  return out;
}

// Generic same-shape binary op with partials da(x, y, z), db(x, y, z).
template <typename T, typename F, typename DA, typename DB>
Tensor<T> binary(const Tensor<T>& a, const Tensor<T>& b, const char* name, F f, DA da, DB db) {
  require_same_shape(a, b, name);
  Tensor<T> out(a.shape());
  auto x = a.data();
  auto y = b.data();
  auto z = out.data();
  for (std::size_t i = 0; i < x.size(); ++i) z[i] = f(x[i], y[i]);
  if (auto* tape = recording_tape<T>({&a, &b})) {
    out.set_requires_grad();
    StoragePtr<T> as = a.storage_ptr();
    StoragePtr<T> bs = b.storage_ptr();
    StoragePtr<T> os = out.storage_ptr();
    tape->record({as, bs}, os, [as, bs, os, da, db]() {
      const auto& x = as->data;
      const auto& y = bs->data;
      const auto& z = os->data;
      const auto& g = os->grad;
      if (auto ga = grad_sink(as); !ga.empty()) {
        for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * da(x[i], y[i], z[i]);
      }
      if (auto gb = grad_sink(bs); !gb.empty()) {
        for (std::size_t i = 0; i < g.size(); ++i) gb[i] += g[i] * db(x[i], y[i], z[i]);
      }
    });
  }
  return out;
}

}  // namespace

std::size_t conv_out_size(std::size_t in, std::size_t k, std::size_t stride, std::size_t pad) {
  return (in + 2 * pad - k) / stride + 1;
}

template <typename T>
Tensor<T> conv2d(const Tensor<T>& input, const Tensor<T>& kernel, const Tensor<T>& bias,
                 std::size_t stride, std::size_t padding) {
  require_rank4(input, "conv2d input");
  require_rank4(kernel, "conv2d kernel");
  if (stride < 1) throw ArgumentError("conv2d stride must be >= 1");
  const std::size_t N = input.dim(0), Cin = input.dim(1), H = input.dim(2), W = input.dim(3);
  const std::size_t Cout = kernel.dim(0), KH = kernel.dim(2), KW = kernel.dim(3);
  if (kernel.dim(1) != Cin) {
    throw DimensionError("conv2d: input has " + std::to_string(Cin) + " channels, kernel expects " +
                         std::to_string(kernel.dim(1)));
  }
  if (!bias.defined() || bias.numel() != Cout) {
    throw DimensionError("conv2d: bias must hold one value per output channel");
  }
  if (KH > H + 2 * padding || KW > W + 2 * padding) {
    throw DimensionError("conv2d: kernel " + shape_str(kernel.shape()) +
                         " larger than padded input " + shape_str(input.shape()));
  }
  const std::size_t OH = conv_out_size(H, KH, stride, padding);
  const std::size_t OW = conv_out_size(W, KW, stride, padding);
  Tensor<T> out(Shape{N, Cout, OH, OW});

  // Valid output column range for kernel column kx: 0 <= ox*s + kx - p < W.
  auto col_range = [=](std::size_t kx) {
    const long p = static_cast<long>(padding), s = static_cast<long>(stride);
    long lo = p - static_cast<long>(kx);
    lo = lo <= 0 ? 0 : (lo + s - 1) / s;
    long hi_num = static_cast<long>(W) - 1 + p - static_cast<long>(kx);
    long hi = hi_num < 0 ? -1 : std::min<long>(hi_num / s, static_cast<long>(OW) - 1);
    return std::pair<long, long>{lo, hi};
  };

  {
    const T* in = input.data().data();
    const T* w = kernel.data().data();
    const T* b = bias.data().data();
    T* o = out.data().data();
    for (std::size_t n = 0; n < N; ++n) {
      for (std::size_t co = 0; co < Cout; ++co) {
        T* oplane = o + (n * Cout + co) * OH * OW;
        std::fill(oplane, oplane + OH * OW, b[co]);
        for (std::size_t ci = 0; ci < Cin; ++ci) {
          const T* iplane = in + (n * Cin + ci) * H * W;
          for (std::size_t ky = 0; ky < KH; ++ky) {
            for (std::size_t kx = 0; kx < KW; ++kx) {
              const T wv = w[((co * Cin + ci) * KH + ky) * KW + kx];
              const auto [x0, x1] = col_range(kx);
              if (x0 > x1) continue;
              for (std::size_t oy = 0; oy < OH; ++oy) {
                const long iy = static_cast<long>(oy * stride + ky) - static_cast<long>(padding);
                if (iy < 0 || iy >= static_cast<long>(H)) continue;
                const T* irow = iplane + iy * W;
                T* orow = oplane + oy * OW;
                const long off = static_cast<long>(kx) - static_cast<long>(padding);
                for (long ox = x0; ox <= x1; ++ox) orow[ox] += wv * irow[ox * stride + off];
              }
            }
          }
        }
      }
    }
  }

  if (auto* tape = recording_tape<T>({&input, &kernel, &bias})) {
    out.set_requires_grad();
    StoragePtr<T> is = input.storage_ptr(), ks = kernel.storage_ptr(), bs = bias.storage_ptr();
    StoragePtr<T> os = out.storage_ptr();
    tape->record({is, ks, bs}, os, [=]() {
      auto gin = grad_sink(is);
      auto gw = grad_sink(ks);
      auto gb = grad_sink(bs);
      const T* in = is->data.data();
      const T* w = ks->data.data();
      const T* g = os->grad.data();
      for (std::size_t n = 0; n < N; ++n) {
        for (std::size_t co = 0; co < Cout; ++co) {
          const T* gplane = g + (n * Cout + co) * OH * OW;
          if (!gb.empty()) {
            T acc = 0;
            for (std::size_t i = 0; i < OH * OW; ++i) acc += gplane[i];
            gb[co] += acc;
          }
          for (std::size_t ci = 0; ci < Cin; ++ci) {
            const std::size_t plane = (n * Cin + ci) * H * W;
            for (std::size_t ky = 0; ky < KH; ++ky) {
              for (std::size_t kx = 0; kx < KW; ++kx) {
                const std::size_t widx = ((co * Cin + ci) * KH + ky) * KW + kx;
                const T wv = w[widx];
                const auto [x0, x1] = col_range(kx);
                if (x0 > x1) continue;
                const long off = static_cast<long>(kx) - static_cast<long>(padding);
                T wacc = 0;
                for (std::size_t oy = 0; oy < OH; ++oy) {
                  const long iy = static_cast<long>(oy * stride + ky) - static_cast<long>(padding);
                  if (iy < 0 || iy >= static_cast<long>(H)) continue;
                  const T* grow = gplane + oy * OW;
                  const std::size_t rowbase = plane + iy * W;
                  if (!gin.empty()) {
                    T* girow = gin.data() + rowbase;
                    for (long ox = x0; ox <= x1; ++ox) girow[ox * stride + off] += wv * grow[ox];
                  }
                  if (!gw.empty()) {
                    const T* irow = in + rowbase;
                    for (long ox = x0; ox <= x1; ++ox) wacc += grow[ox] * irow[ox * stride + off];
                  }
                }
                if (!gw.empty()) gw[widx] += wacc;
              }
            }
          }
        }
      }
    });
  }
  return out;
}

template <typename T>
Tensor<T> maxpool2d(const Tensor<T>& input, std::size_t k, std::size_t stride,
                    std::size_t padding) {
  require_rank4(input, "maxpool2d input");
  if (k < 1) throw ArgumentError("maxpool2d kernel must be >= 1");
  if (stride < 1) throw ArgumentError("maxpool2d stride must be >= 1");
  const std::size_t N = input.dim(0), C = input.dim(1), H = input.dim(2), W = input.dim(3);
  if (k > H + 2 * padding || k > W + 2 * padding) {
    throw DimensionError("maxpool2d: window " + std::to_string(k) + " larger than padded input " +
                         shape_str(input.shape()));
  }
  const std::size_t OH = conv_out_size(H, k, stride, padding);
  const std::size_t OW = conv_out_size(W, k, stride, padding);
  Tensor<T> out(Shape{N, C, OH, OW});
  // Flat input index of each output's winner.
  auto argmax = std::make_shared<std::vector<std::size_t>>(out.numel());
  const T* in = input.data().data();
  T* o = out.data().data();
  std::size_t oi = 0;
  for (std::size_t nc = 0; nc < N * C; ++nc) {
    const std::size_t base = nc * H * W;
    for (std::size_t oy = 0; oy < OH; ++oy) {
      const long y0 = static_cast<long>(oy * stride) - static_cast<long>(padding);
      const long ylo = std::max<long>(y0, 0);
      const long yhi = std::min<long>(y0 + static_cast<long>(k), static_cast<long>(H));
      for (std::size_t ox = 0; ox < OW; ++ox, ++oi) {
        const long x0 = static_cast<long>(ox * stride) - static_cast<long>(padding);
        const long xlo = std::max<long>(x0, 0);
        const long xhi = std::min<long>(x0 + static_cast<long>(k), static_cast<long>(W));
        T best = -std::numeric_limits<T>::infinity();
        std::size_t best_idx = base + ylo * W + xlo;
        for (long y = ylo; y < yhi; ++y) {
          for (long x = xlo; x < xhi; ++x) {
            const std::size_t idx = base + y * W + x;
            if (in[idx] > best) {
              best = in[idx];
              best_idx = idx;
            }
          }
        }
        o[oi] = best;
        (*argmax)[oi] = best_idx;
      }
    }
  }
  if (auto* tape = recording_tape<T>({&input})) {
    out.set_requires_grad();
    StoragePtr<T> is = input.storage_ptr(), os = out.storage_ptr();
    tape->record({is}, os, [is, os, argmax]() {
      auto gin = grad_sink(is);
      if (gin.empty()) return;
      const auto& g = os->grad;
      for (std::size_t i = 0; i < g.size(); ++i) gin[(*argmax)[i]] += g[i];
    });
  }
  return out;
}

template <typename T>
Tensor<T> upsample_nearest(const Tensor<T>& input, std::size_t factor) {
  if (factor < 1) throw ArgumentError("upsample factor must be >= 1");
  require_rank4(input, "upsample input");
  const std::size_t N = input.dim(0), C = input.dim(1), H = input.dim(2), W = input.dim(3);
  const std::size_t OH = H * factor, OW = W * factor;
  Tensor<T> out(Shape{N, C, OH, OW});
  const T* in = input.data().data();
  T* o = out.data().data();
  for (std::size_t nc = 0; nc < N * C; ++nc) {
    for (std::size_t y = 0; y < OH; ++y) {
      const T* irow = in + (nc * H + y / factor) * W;
      T* orow = o + (nc * OH + y) * OW;
      for (std::size_t x = 0; x < OW; ++x) orow[x] = irow[x / factor];
    }
  }
  if (auto* tape = recording_tape<T>({&input})) {
    out.set_requires_grad();
    StoragePtr<T> is = input.storage_ptr(), os = out.storage_ptr();
    tape->record({is}, os, [=]() {
      auto gin = grad_sink(is);
      if (gin.empty()) return;
      const T* g = os->grad.data();
      for (std::size_t nc = 0; nc < N * C; ++nc) {
        for (std::size_t y = 0; y < OH; ++y) {
          T* girow = gin.data() + (nc * H + y / factor) * W;
          const T* grow = g + (nc * OH + y) * OW;
          for (std::size_t x = 0; x < OW; ++x) girow[x / factor] += grow[x];
        }
      }
    });
  }
  return out;
}

template <typename T>
Tensor<T> concat(const std::vector<Tensor<T>>& parts, std::size_t axis) {
  if (parts.empty()) throw ArgumentError("concat of an empty list");
  const Shape& first = parts.front().shape();
  if (axis >= first.size()) throw ArgumentError("concat axis out of range");
  Shape out_shape = first;
  out_shape[axis] = 0;
  for (const auto& p : parts) {
    const Shape& s = p.shape();
    bool ok = s.size() == first.size();
    for (std::size_t d = 0; ok && d < s.size(); ++d) {
      if (d != axis && s[d] != first[d]) ok = false;
    }
    if (!ok) {
      throw DimensionError("concat: part " + shape_str(s) + " incompatible with " +
                           shape_str(first) + " on axis " + std::to_string(axis));
    }
    out_shape[axis] += s[axis];
  }
  std::size_t outer = 1, inner = 1;
  for (std::size_t d = 0; d < axis; ++d) outer *= first[d];
  for (std::size_t d = axis + 1; d < first.size(); ++d) inner *= first[d];
  const std::size_t out_row = out_shape[axis] * inner;

  Tensor<T> out(out_shape);
  std::vector<std::size_t> offsets;  // start of each part within an output row
  std::size_t off = 0;
  for (const auto& p : parts) {
    offsets.push_back(off);
    const std::size_t row = p.dim(axis) * inner;
    const T* src = p.data().data();
    T* dst = out.data().data();
    for (std::size_t o = 0; o < outer; ++o) {
      std::copy(src + o * row, src + (o + 1) * row, dst + o * out_row + off);
    }
    off += row;
  }

  Tape<T>* tape = active_tape<T>();
  bool any = false;
  for (const auto& p : parts) any = any || p.requires_grad();
  if (tape && any) {
    out.set_requires_grad();
    std::vector<StoragePtr<T>> ins;
    for (const auto& p : parts) ins.push_back(p.storage_ptr());
    StoragePtr<T> os = out.storage_ptr();
    tape->record(ins, os, [ins, os, offsets, outer, out_row, inner, axis]() {
      for (std::size_t k = 0; k < ins.size(); ++k) {
        auto gp = grad_sink(ins[k]);
        if (gp.empty()) continue;
        const std::size_t row = ins[k]->shape[axis] * inner;
        const T* g = os->grad.data();
        for (std::size_t o = 0; o < outer; ++o) {
          const T* src = g + o * out_row + offsets[k];
          T* dst = gp.data() + o * row;
          for (std::size_t i = 0; i < row; ++i) dst[i] += src[i];
        }
      }
    });
  }
  return out;
}

template <typename T>
Tensor<T> slice_channels(const Tensor<T>& input, std::size_t begin, std::size_t end) {
  require_rank4(input, "slice_channels input");
  const std::size_t N = input.dim(0), C = input.dim(1), HW = input.dim(2) * input.dim(3);
  if (begin >= end || end > C) {
    throw DimensionError("slice_channels: range [" + std::to_string(begin) + "," +
                         std::to_string(end) + ") invalid for " + std::to_string(C) + " channels");
  }
  const std::size_t Cs = end - begin;
  Tensor<T> out(Shape{N, Cs, input.dim(2), input.dim(3)});
  const T* in = input.data().data();
  T* o = out.data().data();
  for (std::size_t n = 0; n < N; ++n) {
    std::copy(in + (n * C + begin) * HW, in + (n * C + end) * HW, o + n * Cs * HW);
  }
  if (auto* tape = recording_tape<T>({&input})) {
    out.set_requires_grad();
    StoragePtr<T> is = input.storage_ptr(), os = out.storage_ptr();
    tape->record({is}, os, [=]() {
      auto gin = grad_sink(is);
      if (gin.empty()) return;
      const T* g = os->grad.data();
      for (std::size_t n = 0; n < N; ++n) {
        T* dst = gin.data() + (n * C + begin) * HW;
        const T* src = g + n * Cs * HW;
        for (std::size_t i = 0; i < Cs * HW; ++i) dst[i] += src[i];
      }
    });
  }
  return out;
}

template <typename T>
std::vector<Tensor<T>> split_channels(const Tensor<T>& input, std::size_t n) {
  require_rank4(input, "split_channels input");
  if (n < 1) throw ArgumentError("split_channels: n must be >= 1");
  const std::size_t C = input.dim(1);
  if (C % n != 0) {
    throw DimensionError("split_channels: " + std::to_string(C) + " channels not divisible by " +
                         std::to_string(n));
  }
  const std::size_t step = C / n;
  std::vector<Tensor<T>> parts;
  parts.reserve(n);
  for (std::size_t i = 0; i < n; ++i) parts.push_back(slice_channels(input, i * step, (i + 1) * step));
  return parts;
}

template <typename T>
Tensor<T> add(const Tensor<T>& a, const Tensor<T>& b) {
  return binary(
      a, b, "add", [](T x, T y) { return x + y; }, [](T, T, T) { return T(1); },
      [](T, T, T) { return T(1); });
}

template <typename T>
Tensor<T> sub(const Tensor<T>& a, const Tensor<T>& b) {
  return binary(
      a, b, "sub", [](T x, T y) { return x - y; }, [](T, T, T) { return T(1); },
      [](T, T, T) { return T(-1); });
}

template <typename T>
Tensor<T> mul(const Tensor<T>& a, const Tensor<T>& b) {
  return binary(
      a, b, "mul", [](T x, T y) { return x * y; }, [](T, T y, T) { return y; },
      [](T x, T, T) { return x; });
}

template <typename T>
Tensor<T> div(const Tensor<T>& a, const Tensor<T>& b) {
  return binary(
      a, b, "div", [](T x, T y) { return x / y; }, [](T, T y, T) { return T(1) / y; },
      [](T, T y, T z) { return -z / y; });
}

template <typename T>
Tensor<T> minimum(const Tensor<T>& a, const Tensor<T>& b) {
  return binary(
      a, b, "minimum", [](T x, T y) { return x <= y ? x : y; },
      [](T x, T y, T) { return x <= y ? T(1) : T(0); },
      [](T x, T y, T) { return x <= y ? T(0) : T(1); });
}

template <typename T>
Tensor<T> maximum(const Tensor<T>& a, const Tensor<T>& b) {
  return binary(
      a, b, "maximum", [](T x, T y) { return x >= y ? x : y; },
      [](T x, T y, T) { return x >= y ? T(1) : T(0); },
      [](T x, T y, T) { return x >= y ? T(0) : T(1); });
}

template <typename T>
Tensor<T> add_scalar(const Tensor<T>& a, T s) {
  return unary(a, [s](T x) { return x + s; }, [](T, T) { return T(1); });
}

template <typename T>
Tensor<T> scale(const Tensor<T>& a, T s) {
  return unary(a, [s](T x) { return x * s; }, [s](T, T) { return s; });
}

template <typename T>
Tensor<T> leaky_relu(const Tensor<T>& a, T slope) {
  return unary(
      a, [slope](T x) { return x > 0 ? x : slope * x; },
      [slope](T x, T) { return x > 0 ? T(1) : slope; });
}

template <typename T>
Tensor<T> relu(const Tensor<T>& a) {
  return unary(a, [](T x) { return x > 0 ? x : T(0); }, [](T x, T) { return x > 0 ? T(1) : T(0); });
}

template <typename T>
Tensor<T> sigmoid(const Tensor<T>& a) {
  return unary(
      a,
      [](T x) {
        // Split by sign so exp never overflows.
        if (x >= 0) return T(1) / (T(1) + std::exp(-x));
        const T e = std::exp(x);
        return e / (T(1) + e);
      },
      [](T, T y) { return y * (T(1) - y); });
}

template <typename T>
Tensor<T> exp(const Tensor<T>& a) {
  return unary(a, [](T x) { return std::exp(x); }, [](T, T y) { return y; });
}

template <typename T>
Tensor<T> clamp(const Tensor<T>& a, T lo, T hi) {
  if (!(lo <= hi)) throw ArgumentError("clamp: lo > hi");
  return unary(
      a, [lo, hi](T x) { return std::clamp(x, lo, hi); },
      [lo, hi](T x, T) { return (x >= lo && x <= hi) ? T(1) : T(0); });
}

template <typename T>
Tensor<T> bce(const Tensor<T>& p, const Tensor<T>& target) {
  const T lo = T(kBceClamp), hi = T(1) - T(kBceClamp);
  return binary(
      p, target, "bce",
      [lo, hi](T x, T t) {
        const T q = std::clamp(x, lo, hi);
        return -(t * std::log(q) + (T(1) - t) * std::log(T(1) - q));
      },
      [lo, hi](T x, T t, T) {
        if (x < lo || x > hi) return T(0);
        return -t / x + (T(1) - t) / (T(1) - x);
      },
      [lo, hi](T x, T, T) {
        const T q = std::clamp(x, lo, hi);
        return -std::log(q) + std::log(T(1) - q);
      });
}

template <typename T>
Tensor<T> bce_logits(const Tensor<T>& logits, const Tensor<T>& target) {
  auto sig = [](T x) {
    if (x >= 0) return T(1) / (T(1) + std::exp(-x));
    const T e = std::exp(x);
    return e / (T(1) + e);
  };
  return binary(
      logits, target, "bce_logits",
      [](T x, T t) { return std::max(x, T(0)) - x * t + std::log1p(std::exp(-std::abs(x))); },
      [sig](T x, T t, T) { return sig(x) - t; }, [](T x, T, T) { return -x; });
}

template <typename T>
Tensor<T> sum(const Tensor<T>& a) {
  auto x = a.data();
  T acc = std::accumulate(x.begin(), x.end(), T(0));
  Tensor<T> out = Tensor<T>::scalar(acc);
  if (auto* tape = recording_tape<T>({&a})) {
    out.set_requires_grad();
    StoragePtr<T> as = a.storage_ptr(), os = out.storage_ptr();
    tape->record({as}, os, [as, os]() {
      auto ga = grad_sink(as);
      if (ga.empty()) return;
      const T g = os->grad[0];
      for (auto& v : ga) v += g;
    });
  }
  return out;
}

template <typename T>
Tensor<T> mean(const Tensor<T>& a) {
  return scale(sum(a), T(1) / static_cast<T>(a.numel()));
}

template <typename T>
Tensor<T> gather(const Tensor<T>& a, const std::vector<std::size_t>& flat_indices) {
  if (flat_indices.empty()) throw ArgumentError("gather with no indices");
  const std::size_t n = a.numel();
  for (auto i : flat_indices) {
    if (i >= n) throw DimensionError("gather index " + std::to_string(i) + " out of range");
  }
  Tensor<T> out(Shape{flat_indices.size()});
  auto x = a.data();
  auto y = out.data();
  for (std::size_t k = 0; k < flat_indices.size(); ++k) y[k] = x[flat_indices[k]];
  if (auto* tape = recording_tape<T>({&a})) {
    out.set_requires_grad();
    StoragePtr<T> as = a.storage_ptr(), os = out.storage_ptr();
    tape->record({as}, os, [as, os, idx = flat_indices]() {
      auto ga = grad_sink(as);
      if (ga.empty()) return;
      for (std::size_t k = 0; k < idx.size(); ++k) ga[idx[k]] += os->grad[k];
    });
  }
  return out;
}

template <typename T>
Tensor<T> elementwise(Elementwise kind, const Tensor<T>& a, const std::optional<Tensor<T>>& b) {
  auto rhs = [&]() -> const Tensor<T>& {
    if (!b || !b->defined()) throw ArgumentError("binary elementwise op needs a second operand");
    return *b;
  };
  switch (kind) {
    case Elementwise::add:
      return add(a, rhs());
    case Elementwise::mul:
      return mul(a, rhs());
    case Elementwise::sub:
      return sub(a, rhs());
    case Elementwise::leaky_relu:
      return leaky_relu(a);
    case Elementwise::sigmoid:
      return sigmoid(a);
    case Elementwise::bce:
      return bce(a, rhs());
  }
  throw ArgumentError("unknown elementwise kind");
}

#define DYLO_INSTANTIATE_OPS(T)                                                                 \
  template Tensor<T> conv2d(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&, std::size_t, \
                            std::size_t);                                                      \
  template Tensor<T> maxpool2d(const Tensor<T>&, std::size_t, std::size_t, std::size_t);       \
  template Tensor<T> upsample_nearest(const Tensor<T>&, std::size_t);                          \
  template Tensor<T> concat(const std::vector<Tensor<T>>&, std::size_t);                        \
  template std::vector<Tensor<T>> split_channels(const Tensor<T>&, std::size_t);               \
  template Tensor<T> slice_channels(const Tensor<T>&, std::size_t, std::size_t);               \
  template Tensor<T> add(const Tensor<T>&, const Tensor<T>&);                                   \
  template Tensor<T> sub(const Tensor<T>&, const Tensor<T>&);                                   \
  template Tensor<T> mul(const Tensor<T>&, const Tensor<T>&);                                   \
  template Tensor<T> div(const Tensor<T>&, const Tensor<T>&);                                   \
  template Tensor<T> minimum(const Tensor<T>&, const Tensor<T>&);                               \
  template Tensor<T> maximum(const Tensor<T>&, const Tensor<T>&);                               \
  template Tensor<T> add_scalar(const Tensor<T>&, T);                                           \
  template Tensor<T> scale(const Tensor<T>&, T);                                                \
  template Tensor<T> leaky_relu(const Tensor<T>&, T);                                           \
  template Tensor<T> relu(const Tensor<T>&);                                                    \
  template Tensor<T> sigmoid(const Tensor<T>&);                                                 \
  template Tensor<T> exp(const Tensor<T>&);                                                     \
  template Tensor<T> clamp(const Tensor<T>&, T, T);                                             \
  template Tensor<T> bce(const Tensor<T>&, const Tensor<T>&);                                   \
  template Tensor<T> bce_logits(const Tensor<T>&, const Tensor<T>&);                            \
  template Tensor<T> sum(const Tensor<T>&);                                                     \
  template Tensor<T> mean(const Tensor<T>&);                                                    \
  template Tensor<T> gather(const Tensor<T>&, const std::vector<std::size_t>&);                 \
  template Tensor<T> elementwise(Elementwise, const Tensor<T>&, const std::optional<Tensor<T>>&);

DYLO_INSTANTIATE_OPS(float)
DYLO_INSTANTIATE_OPS(double)

#undef DYLO_INSTANTIATE_OPS

}  // namespace dylo
