#include "msb/model_io.hpp"

#include <cstring>

#include "msb/csvio.hpp"

namespace msb::io {

void BinaryWriter::u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) buf_.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void BinaryWriter::u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) buf_.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void BinaryWriter::f64(double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, 8);
    u64(bits);
}

void BinaryWriter::str(const std::string& s) {
    u64(s.size());
    buf_ += s;
}

void BinaryWriter::vec(const std::vector<double>& v) {
    u64(v.size());
    for (double d : v) f64(d);
}

void BinaryReader::need(std::size_t n) {
    if (pos_ + n > buf_.size()) throw FormatError("truncated binary payload");
}

std::uint8_t BinaryReader::u8() {
    need(1);
    return static_cast<std::uint8_t>(buf_[pos_++]);
}

std::uint32_t BinaryReader::u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i)
        v |= static_cast<std::uint32_t>(static_cast<unsigned char>(buf_[pos_++])) << (8 * i);
    return v;
}

std::uint64_t BinaryReader::u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i)
        v |= static_cast<std::uint64_t>(static_cast<unsigned char>(buf_[pos_++])) << (8 * i);
    return v;
}

double BinaryReader::f64() {
    const std::uint64_t bits = u64();
    double v;
    std::memcpy(&v, &bits, 8);
    return v;
}

std::string BinaryReader::str() {
    const std::uint64_t n = u64();
    need(n);
    std::string s = buf_.substr(pos_, n);
    pos_ += n;
    return s;
}

std::vector<double> BinaryReader::vec() {
    const std::uint64_t n = u64();
    std::vector<double> v(n);
    for (auto& d : v) d = f64();
    return v;
}

void save_container(const std::string& path, const ModelContainer& c) {
    BinaryWriter w;
    for (int i = 0; i < 5; ++i) w.u8(static_cast<std::uint8_t>(ModelContainer::kMagic[i]));
    w.u32(ModelContainer::kVersion);
    w.u8(static_cast<std::uint8_t>(c.kind));
    w.u64(c.config_hash);
    w.u64(c.scaler_names.size());
    for (const auto& n : c.scaler_names) w.str(n);
    w.vec(c.scaler_min);
    w.vec(c.scaler_max);
    w.str(c.payload);
    csvio::write_file(path, w.buffer());
}

ModelContainer load_container(const std::string& path) {
    BinaryReader r(csvio::read_file(path));
    char magic[6] = {0};
    for (int i = 0; i < 5; ++i) magic[i] = static_cast<char>(r.u8());
    if (std::strcmp(magic, ModelContainer::kMagic) != 0)
        throw FormatError("'" + path + "' is not a model container (bad magic)");
    const std::uint32_t version = r.u32();
    if (version != ModelContainer::kVersion)
        throw FormatError("'" + path + "': unsupported container version " +
                          std::to_string(version));
    ModelContainer c;
    c.kind = static_cast<PayloadKind>(r.u8());
    c.config_hash = r.u64();
    const std::uint64_t n_names = r.u64();
    for (std::uint64_t i = 0; i < n_names; ++i) c.scaler_names.push_back(r.str());
    c.scaler_min = r.vec();
    c.scaler_max = r.vec();
    c.payload = r.str();
    return c;
}

}  // namespace msb::io
