#pragma once

#include <filesystem>
#include <string>
#include <variant>

#include "qreadout/clf/gmm.hpp"
#include "qreadout/clf/pretrann.hpp"
#include "qreadout/io/container.hpp"

namespace qreadout::clf {

/// QRD-MODEL files: scaler, GMM parameters and the label map live in the text
/// header; network parameters follow as the binary payload.
inline constexpr int kModelFileVersion = 1;

struct LoadedModel {
  std::variant<PreTraNNModel, FfnnModel, GmmModel> model;
  /// Free-form entries passed at save time (stored under "meta.").
  io::Header metadata;

  std::string method() const;
};

void save_model(const std::filesystem::path& path, const PreTraNNModel& model, const io::Header& metadata = {});
void save_model(const std::filesystem::path& path, const FfnnModel& model, const io::Header& metadata = {});
void save_model(const std::filesystem::path& path, const GmmModel& model, const io::Header& metadata = {});

LoadedModel load_model(const std::filesystem::path& path);

}  // namespace qreadout::clf
