#include "rfcvnn/ops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "core/autograd.hpp"
#include "rfcvnn/simd/kernels.hpp"

namespace rfcvnn {

using detail::make_result;
using detail::Node;

namespace {

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (a.shape() != b.shape())
    throw ShapeError(std::string(op) + ": shape mismatch " + to_string(a.shape()) + " vs " +
                     to_string(b.shape()));
}

struct ConvGeometry {
  std::size_t n, ci, h, w;
  std::size_t co, kh, kw;
  std::size_t sh, sw;
  std::size_t ho, wo;

  std::size_t positions() const { return ho * wo; }
  std::size_t patch() const { return ci * kh * kw; }
  std::size_t rows() const { return n * positions(); }
};

ConvGeometry conv_geometry(const Tensor& input, const Tensor& filters, Extent2 stride) {
  const Shape& is = input.shape();
  const Shape& fs = filters.shape();
  if (is.size() != 3 && is.size() != 4)
    throw ShapeError("conv2d: input must be [C,H,W] or [N,C,H,W], got " + to_string(is));
  if (fs.size() != 4) throw ShapeError("conv2d: filters must be [C_out,C_in,kH,kW], got " + to_string(fs));
  if (stride.h == 0 || stride.w == 0) throw ShapeError("conv2d: strides must be >= 1");
  const std::size_t off = is.size() - 3;
  ConvGeometry g{};
  g.n = off ? is[0] : 1;
  g.ci = is[off];
  g.h = is[off + 1];
  g.w = is[off + 2];
  g.co = fs[0];
  g.kh = fs[2];
  g.kw = fs[3];
  g.sh = stride.h;
  g.sw = stride.w;
  if (fs[1] != g.ci)
    throw ShapeError("conv2d: input has " + std::to_string(g.ci) + " channels, filters expect " +
                     std::to_string(fs[1]));
  if (g.kh > g.h || g.kw > g.w)
    throw ShapeError("conv2d: kernel " + to_string({g.kh, g.kw}) + " larger than input " +
                     to_string({g.h, g.w}));
  g.ho = (g.h - g.kh) / g.sh + 1;
  g.wo = (g.w - g.kw) / g.sw + 1;
  return g;
}

// Row r = sample * positions + (oh * wo + ow); column (c * kh + i) * kw + j.
std::vector<double> im2col(std::span<const double> x, const ConvGeometry& g) {
  std::vector<double> cols(g.rows() * g.patch());
  double* out = cols.data();
  for (std::size_t s = 0; s < g.n; ++s)
    for (std::size_t oh = 0; oh < g.ho; ++oh)
      for (std::size_t ow = 0; ow < g.wo; ++ow)
        for (std::size_t c = 0; c < g.ci; ++c)
          for (std::size_t i = 0; i < g.kh; ++i) {
            const double* src = x.data() + ((s * g.ci + c) * g.h + oh * g.sh + i) * g.w + ow * g.sw;
            std::copy(src, src + g.kw, out);
            out += g.kw;
          }
  return cols;
}

void col2im_add(std::span<const double> cols, const ConvGeometry& g, std::span<double> dx) {
  const double* in = cols.data();
  for (std::size_t s = 0; s < g.n; ++s)
    for (std::size_t oh = 0; oh < g.ho; ++oh)
      for (std::size_t ow = 0; ow < g.wo; ++ow)
        for (std::size_t c = 0; c < g.ci; ++c)
          for (std::size_t i = 0; i < g.kh; ++i) {
            double* dst = dx.data() + ((s * g.ci + c) * g.h + oh * g.sh + i) * g.w + ow * g.sw;
            for (std::size_t j = 0; j < g.kw; ++j) dst[j] += in[j];
            in += g.kw;
          }
}

template <typename Fwd, typename Bwd>
Tensor unary(const char* op, const Tensor& a, Fwd fwd, Bwd dfdx) {
  auto av = a.values();
  std::vector<double> out(av.size());
  for (std::size_t i = 0; i < av.size(); ++i) out[i] = fwd(av[i]);
  return make_result(op, a.shape(), std::move(out), {a}, [dfdx](Node& self) {
    Node& p = self.parent(0);
    for (std::size_t i = 0; i < self.grad.size(); ++i)
      p.grad[i] += self.grad[i] * dfdx(p.value[i], self.value[i]);
  });
}

}  // namespace

Tensor conv2d(const Tensor& input, const Tensor& filters, Extent2 stride) {
  const ConvGeometry g = conv_geometry(input, filters, stride);
  const auto& k = simd::kernels();
  std::vector<double> cols = im2col(input.values(), g);

  const std::size_t rows = g.rows();
  const std::size_t pos = g.positions();
  std::vector<double> mat(g.co * rows);
  k.gemm_abt(g.co, rows, g.patch(), filters.values().data(), g.patch(), cols.data(), g.patch(), mat.data(),
             rows);

  std::vector<double> out(g.n * g.co * pos);
  for (std::size_t s = 0; s < g.n; ++s)
    for (std::size_t c = 0; c < g.co; ++c)
      std::copy_n(mat.data() + c * rows + s * pos, pos, out.data() + (s * g.co + c) * pos);

  Shape shape = input.rank() == 4 ? Shape{g.n, g.co, g.ho, g.wo} : Shape{g.co, g.ho, g.wo};
  const bool need_input_grad = input.requires_grad();
  return make_result(
      "conv2d", std::move(shape), std::move(out), {input, filters},
      [g, need_input_grad, cols = need_input_grad || filters.requires_grad() ? std::move(cols)
                                                                              : std::vector<double>{}](
          Node& self) {
        const auto& kt = simd::kernels();
        const std::size_t rows = g.rows();
        const std::size_t pos = g.positions();
        std::vector<double> gmat(g.co * rows);
        for (std::size_t s = 0; s < g.n; ++s)
          for (std::size_t c = 0; c < g.co; ++c)
            std::copy_n(self.grad.data() + (s * g.co + c) * pos, pos, gmat.data() + c * rows + s * pos);

        Node& x = self.parent(0);
        Node& f = self.parent(1);
        if (f.requires_grad)
          kt.gemm_acc(g.co, g.patch(), rows, gmat.data(), rows, 1, cols.data(), g.patch(), f.grad.data(),
                      g.patch());
        if (need_input_grad) {
          std::vector<double> dcols(rows * g.patch(), 0.0);
          kt.gemm_acc(rows, g.patch(), g.co, gmat.data(), 1, rows, f.value.data(), g.patch(), dcols.data(),
                      g.patch());
          col2im_add(dcols, g, x.grad);
        }
      });
}

Tensor relu(const Tensor& input) {
  return unary(
      "relu", input, [](double v) { return v > 0.0 ? v : 0.0; },
      [](double x, double) { return x > 0.0 ? 1.0 : 0.0; });
}

Tensor avgpool2d(const Tensor& input, Extent2 window, Extent2 stride) {
  const Shape& is = input.shape();
  if (is.size() != 3 && is.size() != 4)
    throw ShapeError("avgpool2d: input must be [C,H,W] or [N,C,H,W], got " + to_string(is));
  if (stride.h == 0 || stride.w == 0 || window.h == 0 || window.w == 0)
    throw ShapeError("avgpool2d: window and stride must be >= 1");
  const std::size_t off = is.size() - 3;
  const std::size_t planes = (off ? is[0] : 1) * is[off];
  const std::size_t h = is[off + 1], w = is[off + 2];
  if (window.h > h || window.w > w)
    throw ShapeError("avgpool2d: window " + to_string({window.h, window.w}) + " larger than input " +
                     to_string({h, w}));
  const std::size_t ho = (h - window.h) / stride.h + 1;
  const std::size_t wo = (w - window.w) / stride.w + 1;
  const double inv = 1.0 / static_cast<double>(window.h * window.w);

  auto x = input.values();
  std::vector<double> out(planes * ho * wo);
  for (std::size_t p = 0; p < planes; ++p)
    for (std::size_t oh = 0; oh < ho; ++oh)
      for (std::size_t ow = 0; ow < wo; ++ow) {
        double s = 0.0;
        for (std::size_t i = 0; i < window.h; ++i)
          for (std::size_t j = 0; j < window.w; ++j)
            s += x[(p * h + oh * stride.h + i) * w + ow * stride.w + j];
        out[(p * ho + oh) * wo + ow] = s * inv;
      }

  Shape shape = is;
  shape[off + 1] = ho;
  shape[off + 2] = wo;
  return make_result("avgpool2d", std::move(shape), std::move(out), {input},
                     [=](Node& self) {
                       Node& px = self.parent(0);
                       for (std::size_t p = 0; p < planes; ++p)
                         for (std::size_t oh = 0; oh < ho; ++oh)
                           for (std::size_t ow = 0; ow < wo; ++ow) {
                             const double gv = self.grad[(p * ho + oh) * wo + ow] * inv;
                             for (std::size_t i = 0; i < window.h; ++i)
                               for (std::size_t j = 0; j < window.w; ++j)
                                 px.grad[(p * h + oh * stride.h + i) * w + ow * stride.w + j] += gv;
                           }
                     });
}

Tensor softmax_cross_entropy(const Tensor& logits, std::span<const std::size_t> labels) {
  if (logits.rank() != 2) throw ShapeError("softmax_cross_entropy: logits must be [N,K], got " + to_string(logits.shape()));
  const std::size_t n = logits.dim(0), k = logits.dim(1);
  if (labels.size() != n)
    throw ShapeError("softmax_cross_entropy: " + std::to_string(labels.size()) + " labels for " +
                     std::to_string(n) + " rows");
  for (std::size_t label : labels)
    if (label >= k)
      throw std::out_of_range("softmax_cross_entropy: label " + std::to_string(label) + " outside [0," +
                              std::to_string(k) + ")");

  auto z = logits.values();
  std::vector<double> prob(n * k);
  double total = 0.0;
  for (std::size_t r = 0; r < n; ++r) {
    const double* row = z.data() + r * k;
    const double m = *std::max_element(row, row + k);
    double se = 0.0;
    for (std::size_t c = 0; c < k; ++c) se += std::exp(row[c] - m);
    const double lse = m + std::log(se);
    for (std::size_t c = 0; c < k; ++c) prob[r * k + c] = std::exp(row[c] - lse);
    total += lse - row[labels[r]];
  }
  std::vector<std::size_t> lab(labels.begin(), labels.end());
  return make_result("softmax_cross_entropy", {1}, {total / static_cast<double>(n)}, {logits},
                     [n, k, prob = std::move(prob), lab = std::move(lab)](Node& self) {
                       Node& p = self.parent(0);
                       const double g = self.grad[0] / static_cast<double>(n);
                       for (std::size_t r = 0; r < n; ++r)
                         for (std::size_t c = 0; c < k; ++c)
                           p.grad[r * k + c] += g * (prob[r * k + c] - (c == lab[r] ? 1.0 : 0.0));
                     });
}

Tensor add(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "add");
  auto av = a.values(), bv = b.values();
  std::vector<double> out(av.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = av[i] + bv[i];
  return make_result("add", a.shape(), std::move(out), {a, b}, [](Node& self) {
    for (std::size_t p = 0; p < 2; ++p)
      if (self.parent_needs_grad(p)) {
        auto& g = self.parent(p).grad;
        for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i];
      }
  });
}

Tensor sub(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "sub");
  auto av = a.values(), bv = b.values();
  std::vector<double> out(av.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = av[i] - bv[i];
  return make_result("sub", a.shape(), std::move(out), {a, b}, [](Node& self) {
    if (self.parent_needs_grad(0)) {
      auto& g = self.parent(0).grad;
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i];
    }
    if (self.parent_needs_grad(1)) {
      auto& g = self.parent(1).grad;
      for (std::size_t i = 0; i < g.size(); ++i) g[i] -= self.grad[i];
    }
  });
}

Tensor mul(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "mul");
  auto av = a.values(), bv = b.values();
  std::vector<double> out(av.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = av[i] * bv[i];
  return make_result("mul", a.shape(), std::move(out), {a, b}, [](Node& self) {
    Node& pa = self.parent(0);
    Node& pb = self.parent(1);
    if (pa.requires_grad)
      for (std::size_t i = 0; i < pa.grad.size(); ++i) pa.grad[i] += self.grad[i] * pb.value[i];
    if (pb.requires_grad)
      for (std::size_t i = 0; i < pb.grad.size(); ++i) pb.grad[i] += self.grad[i] * pa.value[i];
  });
}

Tensor scale(const Tensor& a, double factor) {
  return unary(
      "scale", a, [factor](double v) { return v * factor; }, [factor](double, double) { return factor; });
}

Tensor add_scalar(const Tensor& a, double offset) {
  return unary(
      "add_scalar", a, [offset](double v) { return v + offset; }, [](double, double) { return 1.0; });
}

Tensor sqrt(const Tensor& a) {
  return unary(
      "sqrt", a, [](double v) { return std::sqrt(v); }, [](double, double y) { return 0.5 / y; });
}

Tensor reciprocal(const Tensor& a) {
  return unary(
      "reciprocal", a, [](double v) { return 1.0 / v; }, [](double, double y) { return -y * y; });
}

Tensor sum(const Tensor& a) {
  double s = 0.0;
  for (double v : a.values()) s += v;
  return make_result("sum", {1}, {s}, {a}, [](Node& self) {
    auto& g = self.parent(0).grad;
    for (double& v : g) v += self.grad[0];
  });
}

Tensor reshape(const Tensor& a, Shape shape) {
  if (shape_size(shape) != a.size())
    throw ShapeError("reshape: cannot view " + to_string(a.shape()) + " as " + to_string(shape));
  std::vector<double> v(a.values().begin(), a.values().end());
  return make_result("reshape", std::move(shape), std::move(v), {a}, [](Node& self) {
    auto& g = self.parent(0).grad;
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i];
  });
}

namespace {

struct ChannelLayout {
  std::size_t outer, channels, inner;
};

ChannelLayout channel_layout(const Shape& s, const char* op) {
  if (s.size() < 2) throw ShapeError(std::string(op) + ": need [N,C,...], got " + to_string(s));
  std::size_t inner = 1;
  for (std::size_t i = 2; i < s.size(); ++i) inner *= s[i];
  return {s[0], s[1], inner};
}

}  // namespace

Tensor channel_mean(const Tensor& x) {
  const ChannelLayout l = channel_layout(x.shape(), "channel_mean");
  auto v = x.values();
  std::vector<double> out(l.channels, 0.0);
  for (std::size_t o = 0; o < l.outer; ++o)
    for (std::size_t c = 0; c < l.channels; ++c) {
      const double* p = v.data() + (o * l.channels + c) * l.inner;
      double s = 0.0;
      for (std::size_t i = 0; i < l.inner; ++i) s += p[i];
      out[c] += s;
    }
  const double inv = 1.0 / static_cast<double>(l.outer * l.inner);
  for (double& m : out) m *= inv;
  return make_result("channel_mean", {l.channels}, std::move(out), {x}, [l, inv](Node& self) {
    auto& g = self.parent(0).grad;
    for (std::size_t o = 0; o < l.outer; ++o)
      for (std::size_t c = 0; c < l.channels; ++c) {
        const double gv = self.grad[c] * inv;
        double* p = g.data() + (o * l.channels + c) * l.inner;
        for (std::size_t i = 0; i < l.inner; ++i) p[i] += gv;
      }
  });
}

Tensor broadcast_channels(const Tensor& v, const Shape& like) {
  const ChannelLayout l = channel_layout(like, "broadcast_channels");
  if (v.rank() != 1 || v.dim(0) != l.channels)
    throw ShapeError("broadcast_channels: vector " + to_string(v.shape()) + " does not match channels of " +
                     to_string(like));
  auto vv = v.values();
  std::vector<double> out(shape_size(like));
  for (std::size_t o = 0; o < l.outer; ++o)
    for (std::size_t c = 0; c < l.channels; ++c)
      std::fill_n(out.data() + (o * l.channels + c) * l.inner, l.inner, vv[c]);
  return make_result("broadcast_channels", like, std::move(out), {v}, [l](Node& self) {
    auto& g = self.parent(0).grad;
    for (std::size_t o = 0; o < l.outer; ++o)
      for (std::size_t c = 0; c < l.channels; ++c) {
        const double* p = self.grad.data() + (o * l.channels + c) * l.inner;
        double s = 0.0;
        for (std::size_t i = 0; i < l.inner; ++i) s += p[i];
        g[c] += s;
      }
  });
}

}  // namespace rfcvnn
