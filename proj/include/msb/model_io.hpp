#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "msb/common.hpp"

namespace msb::io {

// Little-endian binary buffer; the container format below is versioned and
// refuses foreign magics.
class BinaryWriter {
public:
    void u8(std::uint8_t v) { buf_.push_back(static_cast<char>(v)); }
    void u32(std::uint32_t v);
    void u64(std::uint64_t v);
    void i64(std::int64_t v) { u64(static_cast<std::uint64_t>(v)); }
    void f64(double v);
    void str(const std::string& s);
    void vec(const std::vector<double>& v);
    const std::string& buffer() const { return buf_; }

private:
    std::string buf_;
};

class BinaryReader {
public:
    explicit BinaryReader(std::string data) : buf_(std::move(data)) {}
    std::uint8_t u8();
    std::uint32_t u32();
    std::uint64_t u64();
    std::int64_t i64() { return static_cast<std::int64_t>(u64()); }
    double f64();
    std::string str();
    std::vector<double> vec();
    bool done() const { return pos_ == buf_.size(); }

private:
    void need(std::size_t n);
    std::string buf_;
    std::size_t pos_ = 0;
};

enum class PayloadKind : std::uint8_t {
    Classical = 1,
    ShortNetwork = 2,
    ShortLongNetwork = 3,
    ShortEnsemble = 4,
    ShortLongEnsemble = 5,
};

struct ModelContainer {
    static constexpr char kMagic[6] = "MSBP1";
    static constexpr std::uint32_t kVersion = 1;

    PayloadKind kind = PayloadKind::Classical;
    std::uint64_t config_hash = 0;
    std::string payload;                  // kind-specific serialized body
    std::vector<std::string> scaler_names;
    std::vector<double> scaler_min;
    std::vector<double> scaler_max;
};

void save_container(const std::string& path, const ModelContainer& c);

// Throws FormatError on wrong magic or version; a config-hash mismatch is the
// caller's concern (load returns the stored hash).
ModelContainer load_container(const std::string& path);

}  // namespace msb::io
