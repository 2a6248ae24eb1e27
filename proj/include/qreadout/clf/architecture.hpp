#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "qreadout/nn/network.hpp"

namespace qreadout::clf {

/// Exact positive rational, so sizes like d * (1/1.3) round predictably.
struct Fraction {
  std::uint64_t num = 1;
  std::uint64_t den = 4;

  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
  std::string to_string() const;
  bool operator==(const Fraction& o) const { return num * o.den == o.num * den; }
};

/// Accepts "0.25", "1/4", "1/1.3" (read as 10/13). Throws UsageError.
Fraction parse_fraction(const std::string& text);

/// ceil(d * num / den) in integer arithmetic.
std::size_t ceil_scaled(std::size_t d, std::uint64_t num, std::uint64_t den);

/// Autoencoder d -> L1 -> L2 -> L_H -> L2 -> L1 -> d. The inner sizes sit at
/// one and two thirds of the way from d to the latent size; fraction 1/4
/// gives the classic 3d/4, d/2, d/4. All sizes round up.
struct AutoencoderSpec {
  std::size_t input_dim = 0;
  Fraction latent_fraction{1, 4};

  std::size_t l1() const;
  std::size_t l2() const;
  std::size_t latent_dim() const;

  /// Encoder: sigmoid on its first layer, tanh after. Decoder mirrors it
  /// with a sigmoid output layer.
  std::vector<nn::LayerSpec> encoder_layers() const;
  std::vector<nn::LayerSpec> decoder_layers() const;
  /// d, L1, L2, L_H.
  std::vector<std::size_t> encoder_widths() const;

  /// Throws UsageError unless d >= 2 and 0 < fraction <= 1.
  void validate() const;
};

/// Classifier head d' -> 2d' (tanh) -> d' (tanh) -> C (softmax).
struct ClassifierHeadSpec {
  std::size_t input_dim = 0;
  std::size_t classes = 2;

  std::vector<nn::LayerSpec> layers() const;
  std::vector<std::size_t> widths() const;
  void validate() const;
};

}  // namespace qreadout::clf
