#include "msb/artifacts.hpp"

namespace msb::art {

namespace {

void fill_scaler_slot(io::ModelContainer& c, const feat::MinMaxScaler& scaler,
                      const std::vector<std::string>& names) {
    c.scaler_names = names;
    c.scaler_min = scaler.mins();
    c.scaler_max = scaler.maxs();
}

feat::MinMaxScaler scaler_from_slot(const io::ModelContainer& c) {
    feat::MinMaxScaler s;
    s.set_bounds(c.scaler_min, c.scaler_max);
    return s;
}

}  // namespace

io::ModelContainer pack_classical(const ml::TrainedModel& model, const feat::MinMaxScaler& scaler,
                                  const std::vector<std::string>& feature_names,
                                  std::uint64_t config_hash) {
    io::ModelContainer c;
    c.kind = io::PayloadKind::Classical;
    c.config_hash = config_hash;
    fill_scaler_slot(c, scaler, feature_names);
    io::BinaryWriter w;
    ml::serialize_model(model, w);
    c.payload = w.buffer();
    return c;
}

ClassicalArtifact unpack_classical(const io::ModelContainer& c) {
    if (c.kind != io::PayloadKind::Classical)
        throw FormatError("container does not hold a classical model");
    ClassicalArtifact a;
    io::BinaryReader r(c.payload);
    a.model = ml::deserialize_model(r);
    a.scaler = scaler_from_slot(c);
    return a;
}

io::ModelContainer pack_short(const std::vector<double>& weights,
                              const feat::MinMaxScaler& scaler, std::uint64_t config_hash) {
    io::ModelContainer c;
    c.kind = io::PayloadKind::ShortNetwork;
    c.config_hash = config_hash;
    fill_scaler_slot(c, scaler, feat::short_matrix_feature_names());
    io::BinaryWriter w;
    w.vec(weights);
    c.payload = w.buffer();
    return c;
}

ShortArtifact unpack_short(const io::ModelContainer& c) {
    if (c.kind != io::PayloadKind::ShortNetwork)
        throw FormatError("container does not hold a short network");
    ShortArtifact a;
    io::BinaryReader r(c.payload);
    a.weights = r.vec();
    a.scaler = scaler_from_slot(c);
    return a;
}

io::ModelContainer pack_short_long(const std::vector<double>& backbone_weights,
                                   const std::vector<double>& head_weights,
                                   const feat::MinMaxScaler& short_scaler,
                                   const feat::MinMaxScaler& long_scaler,
                                   std::uint64_t config_hash) {
    io::ModelContainer c;
    c.kind = io::PayloadKind::ShortLongNetwork;
    c.config_hash = config_hash;
    fill_scaler_slot(c, short_scaler, feat::short_matrix_feature_names());
    io::BinaryWriter w;
    w.vec(backbone_weights);
    w.vec(head_weights);
    w.vec(long_scaler.mins());
    w.vec(long_scaler.maxs());
    c.payload = w.buffer();
    return c;
}

ShortLongArtifact unpack_short_long(const io::ModelContainer& c) {
    if (c.kind != io::PayloadKind::ShortLongNetwork)
        throw FormatError("container does not hold a short-long network");
    ShortLongArtifact a;
    io::BinaryReader r(c.payload);
    a.backbone_weights = r.vec();
    a.head_weights = r.vec();
    const auto mins = r.vec();
    const auto maxs = r.vec();
    a.short_scaler = scaler_from_slot(c);
    a.long_scaler.set_bounds(mins, maxs);
    return a;
}

}  // namespace msb::art
