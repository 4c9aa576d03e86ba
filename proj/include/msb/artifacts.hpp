#pragma once

#include <memory>

#include "msb/classical.hpp"
#include "msb/features.hpp"
#include "msb/model_io.hpp"
#include "msb/nn/network.hpp"

namespace msb::art {

// Classical model + its input scaler.
io::ModelContainer pack_classical(const ml::TrainedModel& model, const feat::MinMaxScaler& scaler,
                                  const std::vector<std::string>& feature_names,
                                  std::uint64_t config_hash);

struct ClassicalArtifact {
    std::unique_ptr<ml::TrainedModel> model;
    feat::MinMaxScaler scaler;
};
ClassicalArtifact unpack_classical(const io::ModelContainer& c);

// Short network weights (exported as f64) + the subwindow scaler.
io::ModelContainer pack_short(const std::vector<double>& weights,
                              const feat::MinMaxScaler& scaler, std::uint64_t config_hash);

struct ShortArtifact {
    std::vector<double> weights;
    feat::MinMaxScaler scaler;
};
ShortArtifact unpack_short(const io::ModelContainer& c);

// Frozen backbone + head weights + both scalers (subwindow and long-vector).
io::ModelContainer pack_short_long(const std::vector<double>& backbone_weights,
                                   const std::vector<double>& head_weights,
                                   const feat::MinMaxScaler& short_scaler,
                                   const feat::MinMaxScaler& long_scaler,
                                   std::uint64_t config_hash);

struct ShortLongArtifact {
    std::vector<double> backbone_weights;
    std::vector<double> head_weights;
    feat::MinMaxScaler short_scaler;
    feat::MinMaxScaler long_scaler;
};
ShortLongArtifact unpack_short_long(const io::ModelContainer& c);

}  // namespace msb::art
