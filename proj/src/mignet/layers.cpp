#include "impact/mignet/layers.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>

#include "impact/core/error.hpp"

namespace impact::mignet {

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatrixView = Eigen::Map<RowMatrix>;
using ConstMatrixView = Eigen::Map<const RowMatrix>;
using ConstVectorView = Eigen::Map<const Eigen::RowVectorXd>;

void check_conv(const ConvGeometry& g, const Tensor& weight, const Tensor& bias) {
  const std::vector<std::size_t> w_shape{g.kernel_h, g.kernel_w, g.in_channels, g.out_channels};
  if (weight.shape() != w_shape || bias.shape() != std::vector<std::size_t>{g.out_channels}) {
    throw StructuralError("conv parameters " + weight.shape_string() + " / " + bias.shape_string() +
                          " do not match the layer geometry");
  }
}

// Row p of the column matrix holds the zero-padded receptive field of output
// position p, ordered (ky, kx, channel).
void im2col(const ConvGeometry& g, std::span<const double> input, std::vector<double>& columns) {
  const std::size_t pad_h = (g.kernel_h - 1) / 2;
  const std::size_t pad_w = (g.kernel_w - 1) / 2;
  const std::size_t c_in = g.in_channels;
  columns.assign(g.positions() * g.patch_size(), 0.0);
  double* out = columns.data();
  for (std::size_t y = 0; y < g.height; ++y) {
    for (std::size_t x = 0; x < g.width; ++x) {
      for (std::size_t ky = 0; ky < g.kernel_h; ++ky) {
        const auto sy = static_cast<std::ptrdiff_t>(y + ky) - static_cast<std::ptrdiff_t>(pad_h);
        if (sy < 0 || sy >= static_cast<std::ptrdiff_t>(g.height)) {
          out += g.kernel_w * c_in;
          continue;
        }
        for (std::size_t kx = 0; kx < g.kernel_w; ++kx) {
          const auto sx = static_cast<std::ptrdiff_t>(x + kx) - static_cast<std::ptrdiff_t>(pad_w);
          if (sx >= 0 && sx < static_cast<std::ptrdiff_t>(g.width)) {
            const double* src = input.data() + (static_cast<std::size_t>(sy) * g.width + static_cast<std::size_t>(sx)) * c_in;
            std::copy(src, src + c_in, out);
          }
          out += c_in;
        }
      }
    }
  }
}

void col2im_add(const ConvGeometry& g, const std::vector<double>& d_columns, std::vector<double>& d_input) {
  const std::size_t pad_h = (g.kernel_h - 1) / 2;
  const std::size_t pad_w = (g.kernel_w - 1) / 2;
  const std::size_t c_in = g.in_channels;
  d_input.assign(g.positions() * c_in, 0.0);
  const double* src = d_columns.data();
  for (std::size_t y = 0; y < g.height; ++y) {
    for (std::size_t x = 0; x < g.width; ++x) {
      for (std::size_t ky = 0; ky < g.kernel_h; ++ky) {
        const auto sy = static_cast<std::ptrdiff_t>(y + ky) - static_cast<std::ptrdiff_t>(pad_h);
        if (sy < 0 || sy >= static_cast<std::ptrdiff_t>(g.height)) {
          src += g.kernel_w * c_in;
          continue;
        }
        for (std::size_t kx = 0; kx < g.kernel_w; ++kx) {
          const auto sx = static_cast<std::ptrdiff_t>(x + kx) - static_cast<std::ptrdiff_t>(pad_w);
          if (sx >= 0 && sx < static_cast<std::ptrdiff_t>(g.width)) {
            double* dst = d_input.data() + (static_cast<std::size_t>(sy) * g.width + static_cast<std::size_t>(sx)) * c_in;
            for (std::size_t c = 0; c < c_in; ++c) dst[c] += src[c];
          }
          src += c_in;
        }
      }
    }
  }
}

}  // namespace

void conv_relu_forward(const ConvGeometry& g, std::span<const double> input, const Tensor& weight,
                       const Tensor& bias, ConvCache& cache, std::vector<double>& output) {
  check_conv(g, weight, bias);
  if (input.size() != g.positions() * g.in_channels) throw StructuralError("conv input size mismatch");
  const auto P = static_cast<Eigen::Index>(g.positions());
  const auto K = static_cast<Eigen::Index>(g.patch_size());
  const auto C = static_cast<Eigen::Index>(g.out_channels);

  im2col(g, input, cache.columns);
  cache.pre_activation.resize(g.positions() * g.out_channels);
  ConstMatrixView cols(cache.columns.data(), P, K);
  ConstMatrixView w(weight.data().data(), K, C);
  MatrixView z(cache.pre_activation.data(), P, C);
  z.noalias() = cols * w;
  z.rowwise() += ConstVectorView(bias.data().data(), C);

  output.resize(cache.pre_activation.size());
  std::transform(cache.pre_activation.begin(), cache.pre_activation.end(), output.begin(),
                 [](double v) { return v > 0.0 ? v : 0.0; });
}

void conv_relu_backward(const ConvGeometry& g, const ConvCache& cache, std::span<const double> d_output,
                        const Tensor& weight, Tensor& d_weight, Tensor& d_bias, std::vector<double>* d_input) {
  check_conv(g, weight, d_bias);
  if (!d_weight.same_shape(weight)) throw StructuralError("conv gradient shape mismatch");
  const auto P = static_cast<Eigen::Index>(g.positions());
  const auto K = static_cast<Eigen::Index>(g.patch_size());
  const auto C = static_cast<Eigen::Index>(g.out_channels);
  if (d_output.size() != cache.pre_activation.size()) throw StructuralError("conv output gradient size mismatch");

  thread_local RowMatrix dz;
  dz.resize(P, C);
  for (Eigen::Index i = 0; i < P * C; ++i) {
    dz.data()[i] = cache.pre_activation[static_cast<std::size_t>(i)] > 0.0 ? d_output[static_cast<std::size_t>(i)] : 0.0;
  }
  ConstMatrixView cols(cache.columns.data(), P, K);
  MatrixView dw(d_weight.data().data(), K, C);
  dw.noalias() += cols.transpose() * dz;
  Eigen::Map<Eigen::RowVectorXd> db(d_bias.data().data(), C);
  // Plain loop: Eigen's vectorized column sum rounds differently depending on
  // where d_bias happens to be aligned, which made training heap dependent.
  for (Eigen::Index p = 0; p < P; ++p) {
    for (Eigen::Index c = 0; c < C; ++c) db[c] += dz(p, c);
  }

  if (d_input) {
    thread_local std::vector<double> d_columns;
    d_columns.resize(g.positions() * g.patch_size());
    MatrixView dcols(d_columns.data(), P, K);
    ConstMatrixView w(weight.data().data(), K, C);
    dcols.noalias() = dz * w.transpose();
    col2im_add(g, d_columns, *d_input);
  }
}

std::vector<double> global_average_pool(std::span<const double> maps, std::size_t positions,
                                        std::size_t channels) {
  if (maps.size() != positions * channels || positions == 0) throw StructuralError("pooling input size mismatch");
  std::vector<double> pooled(channels, 0.0);
  for (std::size_t p = 0; p < positions; ++p) {
    const double* row = maps.data() + p * channels;
    for (std::size_t c = 0; c < channels; ++c) pooled[c] += row[c];
  }
  const double inv = 1.0 / static_cast<double>(positions);
  for (double& v : pooled) v *= inv;
  return pooled;
}

std::vector<double> global_average_pool_backward(std::span<const double> d_pooled, std::size_t positions) {
  const std::size_t channels = d_pooled.size();
  std::vector<double> d_maps(positions * channels);
  const double inv = 1.0 / static_cast<double>(positions);
  for (std::size_t p = 0; p < positions; ++p) {
    for (std::size_t c = 0; c < channels; ++c) d_maps[p * channels + c] = d_pooled[c] * inv;
  }
  return d_maps;
}

std::vector<double> dense_forward(std::span<const double> input, const Tensor& weight, const Tensor& bias) {
  if (weight.shape().size() != 2 || weight.shape()[0] != input.size() ||
      bias.shape() != std::vector<std::size_t>{weight.shape()[1]}) {
    throw StructuralError("dense parameters do not match input of size " + std::to_string(input.size()));
  }
  const std::size_t n_out = weight.shape()[1];
  std::vector<double> out(bias.data().begin(), bias.data().end());
  for (std::size_t i = 0; i < input.size(); ++i) {
    const double x = input[i];
    const double* w = weight.data().data() + i * n_out;
    for (std::size_t o = 0; o < n_out; ++o) out[o] += x * w[o];
  }
  return out;
}

void dense_backward(std::span<const double> input, std::span<const double> d_logits, const Tensor& weight,
                    Tensor& d_weight, Tensor& d_bias, std::vector<double>* d_input) {
  const std::size_t n_out = d_logits.size();
  if (!d_weight.same_shape(weight) || weight.shape()[0] != input.size() || weight.shape()[1] != n_out) {
    throw StructuralError("dense gradient shape mismatch");
  }
  for (std::size_t o = 0; o < n_out; ++o) d_bias[o] += d_logits[o];
  for (std::size_t i = 0; i < input.size(); ++i) {
    double* dw = d_weight.data().data() + i * n_out;
    for (std::size_t o = 0; o < n_out; ++o) dw[o] += input[i] * d_logits[o];
  }
  if (d_input) {
    d_input->assign(input.size(), 0.0);
    for (std::size_t i = 0; i < input.size(); ++i) {
      const double* w = weight.data().data() + i * n_out;
      double acc = 0.0;
      for (std::size_t o = 0; o < n_out; ++o) acc += w[o] * d_logits[o];
      (*d_input)[i] = acc;
    }
  }
}

std::vector<double> softmax(std::span<const double> logits) {
  const double top = *std::max_element(logits.begin(), logits.end());
  std::vector<double> p(logits.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    p[i] = std::exp(logits[i] - top);
    sum += p[i];
  }
  for (double& v : p) v /= sum;
  return p;
}

}  // namespace impact::mignet
