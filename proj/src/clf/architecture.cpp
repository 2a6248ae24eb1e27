#include "qreadout/clf/architecture.hpp"

#include <numeric>

#include "qreadout/errors.hpp"

namespace qreadout::clf {

namespace {

// Decimal text to an exact fraction: "1.3" -> 13/10.
Fraction parse_decimal(const std::string& text) {
  if (text.empty()) throw UsageError("empty number in fraction");
  std::uint64_t num = 0;
  std::uint64_t den = 1;
  bool seen_point = false;
  for (char c : text) {
    if (c == '.' && !seen_point) {
      seen_point = true;
    } else if (c >= '0' && c <= '9') {
      if (num > 100000000000ULL || (seen_point && den > 100000000000ULL)) {
        throw UsageError("too many digits in '" + text + "'");
      }
      num = num * 10 + static_cast<std::uint64_t>(c - '0');
      if (seen_point) den *= 10;
    } else {
      throw UsageError("invalid number '" + text + "'");
    }
  }
  return {num, den};
}

Fraction reduce(std::uint64_t num, std::uint64_t den) {
  const std::uint64_t g = std::gcd(num, den);
  return g ? Fraction{num / g, den / g} : Fraction{num, den};
}

}  // namespace

std::string Fraction::to_string() const { return std::to_string(num) + "/" + std::to_string(den); }

Fraction parse_fraction(const std::string& text) {
  const auto slash = text.find('/');
  Fraction f;
  if (slash == std::string::npos) {
    f = parse_decimal(text);
  } else {
    const Fraction a = parse_decimal(text.substr(0, slash));
    const Fraction b = parse_decimal(text.substr(slash + 1));
    f = {a.num * b.den, a.den * b.num};
  }
  if (f.num == 0 || f.den == 0) throw UsageError("fraction must be positive: '" + text + "'");
  return reduce(f.num, f.den);
}

std::size_t ceil_scaled(std::size_t d, std::uint64_t num, std::uint64_t den) {
  const unsigned __int128 p = static_cast<unsigned __int128>(d) * num;
  return static_cast<std::size_t>((p + den - 1) / den);
}

void AutoencoderSpec::validate() const {
  if (input_dim < 2) throw UsageError("autoencoder input dimension must be at least 2");
  if (latent_fraction.den == 0 || latent_fraction.num == 0 || latent_fraction.num > latent_fraction.den) {
    throw UsageError("latent fraction must lie in (0, 1], got " + latent_fraction.to_string());
  }
}

std::size_t AutoencoderSpec::l1() const {
  const auto& f = latent_fraction;
  return ceil_scaled(input_dim, 2 * f.den + f.num, 3 * f.den);
}

std::size_t AutoencoderSpec::l2() const {
  const auto& f = latent_fraction;
  return ceil_scaled(input_dim, f.den + 2 * f.num, 3 * f.den);
}

std::size_t AutoencoderSpec::latent_dim() const {
  return ceil_scaled(input_dim, latent_fraction.num, latent_fraction.den);
}

std::vector<std::size_t> AutoencoderSpec::encoder_widths() const {
  return {input_dim, l1(), l2(), latent_dim()};
}

std::vector<nn::LayerSpec> AutoencoderSpec::encoder_layers() const {
  validate();
  const auto w = encoder_widths();
  return {{w[0], w[1], nn::Activation::sigmoid},
          {w[1], w[2], nn::Activation::tanh},
          {w[2], w[3], nn::Activation::tanh}};
}

std::vector<nn::LayerSpec> AutoencoderSpec::decoder_layers() const {
  validate();
  const auto w = encoder_widths();
  return {{w[3], w[2], nn::Activation::tanh},
          {w[2], w[1], nn::Activation::tanh},
          {w[1], w[0], nn::Activation::sigmoid}};
}

void ClassifierHeadSpec::validate() const {
  if (input_dim < 1) throw UsageError("classifier input dimension must be at least 1");
  if (classes < 2) throw UsageError("a classifier needs at least 2 classes");
}

std::vector<std::size_t> ClassifierHeadSpec::widths() const {
  return {input_dim, 2 * input_dim, input_dim, classes};
}

std::vector<nn::LayerSpec> ClassifierHeadSpec::layers() const {
  validate();
  return {{input_dim, 2 * input_dim, nn::Activation::tanh},
          {2 * input_dim, input_dim, nn::Activation::tanh},
          {input_dim, classes, nn::Activation::softmax}};
}

}  // namespace qreadout::clf
