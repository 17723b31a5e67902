#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "impact/mignet/tensor.hpp"

namespace impact::mignet {

/// Activation maps are stored height x width x channels, channel fastest.
/// A 1D convolution over each sensor row is the kernel_h = 1 case.
struct ConvGeometry {
  std::size_t height = 0;
  std::size_t width = 0;
  std::size_t in_channels = 0;
  std::size_t out_channels = 0;
  std::size_t kernel_h = 1;
  std::size_t kernel_w = 1;

  std::size_t positions() const { return height * width; }
  std::size_t patch_size() const { return kernel_h * kernel_w * in_channels; }
};

/// Intermediates kept for the backward pass of one conv + ReLU block.
struct ConvCache {
  std::vector<double> columns;         // positions x patch_size
  std::vector<double> pre_activation;  // positions x out_channels
};

/// Same-padded convolution followed by ReLU. weight has shape
/// [kernel_h, kernel_w, in_channels, out_channels]; bias [out_channels].
void conv_relu_forward(const ConvGeometry& g, std::span<const double> input, const Tensor& weight,
                       const Tensor& bias, ConvCache& cache, std::vector<double>& output);

/// Accumulates into d_weight / d_bias; writes d_input when non-null.
void conv_relu_backward(const ConvGeometry& g, const ConvCache& cache, std::span<const double> d_output,
                        const Tensor& weight, Tensor& d_weight, Tensor& d_bias, std::vector<double>* d_input);

/// Mean over all positions for each channel.
std::vector<double> global_average_pool(std::span<const double> maps, std::size_t positions,
                                        std::size_t channels);
std::vector<double> global_average_pool_backward(std::span<const double> d_pooled, std::size_t positions);

/// logits = input . weight + bias with weight shaped [inputs, outputs].
std::vector<double> dense_forward(std::span<const double> input, const Tensor& weight, const Tensor& bias);
/// Accumulates parameter gradients; writes d_input when non-null.
void dense_backward(std::span<const double> input, std::span<const double> d_logits, const Tensor& weight,
                    Tensor& d_weight, Tensor& d_bias, std::vector<double>* d_input);

std::vector<double> softmax(std::span<const double> logits);

}  // namespace impact::mignet
