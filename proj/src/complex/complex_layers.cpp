#include "rfcvnn/complex.hpp"

#include <array>
#include <cmath>
#include <memory>
#include <string>

#include "core/autograd.hpp"

namespace rfcvnn {

ComplexTensor::ComplexTensor(Tensor re, Tensor im) : re_(std::move(re)), im_(std::move(im)) {
  if (re_.shape() != im_.shape())
    throw ShapeError("complex tensor parts differ in shape: " + to_string(re_.shape()) + " vs " +
                     to_string(im_.shape()));
}

ComplexBNState::ComplexBNState(std::size_t channels, ComplexBNVariant v)
    : gamma_rr(Tensor::full({channels}, 1.0 / std::sqrt(2.0), true)),
      gamma_ii(Tensor::full({channels}, 1.0 / std::sqrt(2.0), true)),
      gamma_ri(Tensor::zeros({channels}, true)),
      beta_re(Tensor::zeros({channels}, true)),
      beta_im(Tensor::zeros({channels}, true)),
      running_mean_re(channels, 0.0),
      running_mean_im(channels, 0.0),
      running_vrr(channels, 1.0),
      running_vii(channels, 1.0),
      running_vri(channels, 0.0),
      variant(v) {}

Sym2 inverse_sqrt_2x2(double a, double b, double c) {
  const double det = a * c - b * b;
  if (!(a > 0.0 && c > 0.0 && det > 0.0))
    throw NumericError("inverse_sqrt_2x2: matrix is not positive definite");
  const double s = std::sqrt(det);
  const double t = std::sqrt(a + c + 2.0 * s);
  const double k = 1.0 / (s * t);
  return {(c + s) * k, -b * k, (a + s) * k};
}

ComplexTensor cconv2d(const ComplexTensor& h, const ComplexConvFilter& w, Extent2 stride) {
  if (w.a.shape() != w.b.shape())
    throw ShapeError("cconv2d: filter parts differ in shape: " + to_string(w.a.shape()) + " vs " +
                     to_string(w.b.shape()));
  const Tensor& x = h.re();
  const Tensor& y = h.im();
  Tensor re = conv2d(x, w.a, stride) - conv2d(y, w.b, stride);
  Tensor im = conv2d(x, w.b, stride) + conv2d(y, w.a, stride);
  return {std::move(re), std::move(im)};
}

ComplexTensor crelu(const ComplexTensor& h) { return {relu(h.re()), relu(h.im())}; }

namespace {

void check_channels(const ComplexTensor& h, const ComplexBNState& state, const char* op) {
  const Shape& s = h.shape();
  if (s.size() < 2 || s[1] != state.channels())
    throw ShapeError(std::string(op) + ": input " + to_string(s) + " does not have " +
                     std::to_string(state.channels()) + " channels");
}


}  // namespace

namespace {

// Pullback of (a, b, d) -> W = (V + eps I)^(-1/2) entries (rr, ri, ii).
std::array<double, 3> whitening_vjp(double a, double b, double d, double g_rr, double g_ri, double g_ii,
                                    ComplexBNVariant variant) {
  if (variant == ComplexBNVariant::kNaive)
    return {-0.5 * g_rr / (a * std::sqrt(a)), 0.0, -0.5 * g_ii / (d * std::sqrt(d))};
  const double s = std::sqrt(a * d - b * b);
  const double t = std::sqrt(a + d + 2.0 * s);
  const double q = s * t;
  const double w_rr = (d + s) / q, w_ri = -b / q, w_ii = (a + s) / q;
  const std::array<double, 3> ds{d / (2.0 * s), -b / s, a / (2.0 * s)};
  const std::array<double, 3> trace{1.0, 0.0, 1.0};
  std::array<double, 3> out{};
  for (int x = 0; x < 3; ++x) {
    const double dt = (trace[x] + 2.0 * ds[x]) / (2.0 * t);
    const double dq = ds[x] * t + s * dt;
    const double d_rr = (ds[x] + (x == 2 ? 1.0 : 0.0) - w_rr * dq) / q;
    const double d_ii = (ds[x] + (x == 0 ? 1.0 : 0.0) - w_ii * dq) / q;
    const double d_ri = ((x == 1 ? -1.0 : 0.0) - w_ri * dq) / q;
    out[x] = g_rr * d_rr + g_ri * d_ri + g_ii * d_ii;
  }
  return out;
}

// Splits a packed [2, ...] result into its halves.
ComplexTensor unpack(const Tensor& packed, const Shape& shape) {
  const std::size_t n = shape_size(shape);
  auto v = packed.values();
  auto half = [&](std::size_t k) {
    return detail::make_result("unpack", shape, std::vector<double>(v.begin() + k * n, v.begin() + (k + 1) * n),
                               {packed}, [n, k](detail::Node& self) {
                                 auto& g = self.parent(0).grad;
                                 for (std::size_t i = 0; i < n; ++i) g[k * n + i] += self.grad[i];
                               });
  };
  return {half(0), half(1)};
}

ComplexTensor complex_bn(const ComplexTensor& h, ComplexBNState& st, Mode mode, bool affine, const char* op) {
  check_channels(h, st, op);
  const Shape& s = h.shape();
  if (mode == Mode::kTrain && s[0] < 2)
    throw ShapeError(std::string(op) + ": training mode needs a batch of at least 2");
  const std::size_t channels = st.channels();
  const std::size_t outer = s[0];
  const std::size_t inner = shape_size(s) / (outer * channels);
  const std::size_t n = shape_size(s);
  const double count = static_cast<double>(outer * inner);
  auto xr = h.re().values();
  auto xi = h.im().values();

  auto each = [&](auto&& f) {
    for (std::size_t o = 0; o < outer; ++o)
      for (std::size_t c = 0; c < channels; ++c) {
        const std::size_t at = (o * channels + c) * inner;
        for (std::size_t i = 0; i < inner; ++i) f(c, at + i);
      }
  };

  std::vector<double> mr(channels, 0.0), mi(channels, 0.0);
  std::vector<double> va(channels), vb(channels), vd(channels);
  if (mode == Mode::kTrain) {
    each([&](std::size_t c, std::size_t j) {
      mr[c] += xr[j];
      mi[c] += xi[j];
    });
    for (std::size_t c = 0; c < channels; ++c) {
      mr[c] /= count;
      mi[c] /= count;
    }
    std::vector<double> srr(channels, 0.0), sri(channels, 0.0), sii(channels, 0.0);
    each([&](std::size_t c, std::size_t j) {
      const double ur = xr[j] - mr[c], ui = xi[j] - mi[c];
      srr[c] += ur * ur;
      sri[c] += ur * ui;
      sii[c] += ui * ui;
    });
    const double unbias = count / (count - 1.0);
    const double keep = 1.0 - st.momentum;
    for (std::size_t c = 0; c < channels; ++c) {
      va[c] = srr[c] / count + st.eps;
      vb[c] = sri[c] / count;
      vd[c] = sii[c] / count + st.eps;
      st.running_mean_re[c] = keep * st.running_mean_re[c] + st.momentum * mr[c];
      st.running_mean_im[c] = keep * st.running_mean_im[c] + st.momentum * mi[c];
      st.running_vrr[c] = keep * st.running_vrr[c] + st.momentum * (srr[c] / count) * unbias;
      st.running_vii[c] = keep * st.running_vii[c] + st.momentum * (sii[c] / count) * unbias;
      st.running_vri[c] = keep * st.running_vri[c] + st.momentum * vb[c] * unbias;
    }
  } else {
    for (std::size_t c = 0; c < channels; ++c) {
      mr[c] = st.running_mean_re[c];
      mi[c] = st.running_mean_im[c];
      va[c] = st.running_vrr[c] + st.eps;
      vb[c] = st.running_vri[c];
      vd[c] = st.running_vii[c] + st.eps;
    }
  }

  std::vector<Sym2> w(channels);
  for (std::size_t c = 0; c < channels; ++c) {
    if (st.variant == ComplexBNVariant::kWhitening) {
      if (!(va[c] * vd[c] - vb[c] * vb[c] > 0.0))
        throw NumericError(std::string(op) + ": covariance + eps*I is not positive definite");
      w[c] = inverse_sqrt_2x2(va[c], vb[c], vd[c]);
    } else {
      w[c] = {1.0 / std::sqrt(va[c]), 0.0, 1.0 / std::sqrt(vd[c])};
    }
  }

  // u: centred input, z: whitened, both packed re then im.
  auto u = std::make_shared<std::vector<double>>(2 * n);
  auto z = std::make_shared<std::vector<double>>(2 * n);
  each([&](std::size_t c, std::size_t j) {
    const double ur = xr[j] - mr[c], ui = xi[j] - mi[c];
    (*u)[j] = ur;
    (*u)[n + j] = ui;
    (*z)[j] = w[c].rr * ur + w[c].ri * ui;
    (*z)[n + j] = w[c].ri * ur + w[c].ii * ui;
  });

  std::vector<Tensor> inputs{h.re(), h.im()};
  std::vector<double> y;
  if (affine) {
    inputs.insert(inputs.end(), {st.gamma_rr, st.gamma_ri, st.gamma_ii, st.beta_re, st.beta_im});
    auto grr = st.gamma_rr.values(), gri = st.gamma_ri.values(), gii = st.gamma_ii.values();
    auto br = st.beta_re.values(), bi = st.beta_im.values();
    y.resize(2 * n);
    each([&](std::size_t c, std::size_t j) {
      const double zr = (*z)[j], zi = (*z)[n + j];
      y[j] = grr[c] * zr + gri[c] * zi + br[c];
      y[n + j] = gri[c] * zr + gii[c] * zi + bi[c];
    });
  } else {
    y = *z;
  }

  Shape packed_shape{2};
  packed_shape.insert(packed_shape.end(), s.begin(), s.end());
  const bool train = mode == Mode::kTrain;
  const ComplexBNVariant variant = st.variant;
  Tensor packed = detail::make_result(op, packed_shape, std::move(y), std::move(inputs), [=](detail::Node& self) {
    auto each_b = [&](auto&& f) {
      for (std::size_t o = 0; o < outer; ++o)
        for (std::size_t c = 0; c < channels; ++c) {
          const std::size_t at = (o * channels + c) * inner;
          for (std::size_t i = 0; i < inner; ++i) f(c, at + i);
        }
    };
    const auto& gy = self.grad;
    const auto& zz = *z;
    const auto& uu = *u;
    std::vector<double> gz;
    if (affine) {
      const auto& grr = self.parent(2).value;
      const auto& gri = self.parent(3).value;
      const auto& gii = self.parent(4).value;
      std::vector<double> s_rr(channels, 0.0), s_ri(channels, 0.0), s_ii(channels, 0.0), s_br(channels, 0.0),
          s_bi(channels, 0.0);
      gz.resize(2 * n);
      each_b([&](std::size_t c, std::size_t j) {
        const double a = gy[j], b = gy[n + j], zr = zz[j], zi = zz[n + j];
        s_rr[c] += a * zr;
        s_ri[c] += a * zi + b * zr;
        s_ii[c] += b * zi;
        s_br[c] += a;
        s_bi[c] += b;
        gz[j] = grr[c] * a + gri[c] * b;
        gz[n + j] = gri[c] * a + gii[c] * b;
      });
      const std::vector<double>* sums[] = {&s_rr, &s_ri, &s_ii, &s_br, &s_bi};
      for (std::size_t p = 0; p < 5; ++p)
        if (self.parent_needs_grad(2 + p))
          for (std::size_t c = 0; c < channels; ++c) self.parent(2 + p).grad[c] += (*sums[p])[c];
    } else {
      gz = gy;
    }
    if (!self.parent_needs_grad(0) && !self.parent_needs_grad(1)) return;

    std::vector<double> ga(channels, 0.0), gb(channels, 0.0), gd(channels, 0.0);
    if (train) {
      std::vector<double> G_rr(channels, 0.0), G_ri(channels, 0.0), G_ii(channels, 0.0);
      each_b([&](std::size_t c, std::size_t j) {
        const double a = gz[j], b = gz[n + j], ur = uu[j], ui = uu[n + j];
        G_rr[c] += a * ur;
        G_ri[c] += a * ui + b * ur;
        G_ii[c] += b * ui;
      });
      for (std::size_t c = 0; c < channels; ++c) {
        const auto g = whitening_vjp(va[c], vb[c], vd[c], G_rr[c], G_ri[c], G_ii[c], variant);
        ga[c] = g[0];
        gb[c] = g[1];
        gd[c] = g[2];
      }
    }
    std::vector<double> gu(2 * n);
    std::vector<double> mean_r(channels, 0.0), mean_i(channels, 0.0);
    each_b([&](std::size_t c, std::size_t j) {
      const double a = gz[j], b = gz[n + j], ur = uu[j], ui = uu[n + j];
      double r = w[c].rr * a + w[c].ri * b;
      double i = w[c].ri * a + w[c].ii * b;
      if (train) {
        r += (2.0 * ga[c] * ur + gb[c] * ui) / count;
        i += (2.0 * gd[c] * ui + gb[c] * ur) / count;
        mean_r[c] += r;
        mean_i[c] += i;
      }
      gu[j] = r;
      gu[n + j] = i;
    });
    if (train)
      for (std::size_t c = 0; c < channels; ++c) {
        mean_r[c] /= count;
        mean_i[c] /= count;
      }
    for (std::size_t k = 0; k < 2; ++k) {
      if (!self.parent_needs_grad(k)) continue;
      auto& gx = self.parent(k).grad;
      const auto& m = k == 0 ? mean_r : mean_i;
      each_b([&](std::size_t c, std::size_t j) { gx[j] += gu[k * n + j] - m[c]; });
    }
  });
  return unpack(packed, s);
}

}  // namespace

ComplexTensor complex_whiten(const ComplexTensor& h, ComplexBNState& state, Mode mode) {
  return complex_bn(h, state, mode, false, "complex_whiten");
}

ComplexTensor cbatchnorm(const ComplexTensor& h, ComplexBNState& state, Mode mode) {
  return complex_bn(h, state, mode, true, "cbatchnorm");
}

ComplexTensor cavgpool(const ComplexTensor& h, Extent2 window, Extent2 stride) {
  return {avgpool2d(h.re(), window, stride), avgpool2d(h.im(), window, stride)};
}

Tensor magnitude(const ComplexTensor& h) {
  return sqrt(add_scalar(h.re() * h.re() + h.im() * h.im(), kMagnitudeEps));
}

}  // namespace rfcvnn
