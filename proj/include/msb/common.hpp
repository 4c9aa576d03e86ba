#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace msb {

// ---------------------------------------------------------------------------
// Error taxonomy. Every failure mode surfaced by the library maps onto one of
// these so the CLI can emit a single machine-parsable line.
// ---------------------------------------------------------------------------

class Error : public std::runtime_error {
public:
    Error(std::string kind, const std::string& msg)
        : std::runtime_error(kind + ": " + msg), kind_(std::move(kind)) {}
    const std::string& kind() const { return kind_; }

private:
    std::string kind_;
};

#define MSB_DEFINE_ERROR(Name)                                        \
    class Name : public Error {                                       \
    public:                                                           \
        explicit Name(const std::string& msg) : Error(#Name, msg) {}  \
    }

MSB_DEFINE_ERROR(FormatError);
MSB_DEFINE_ERROR(EmptyChannelError);
MSB_DEFINE_ERROR(MissingChannelError);
MSB_DEFINE_ERROR(DesignError);
MSB_DEFINE_ERROR(SignalTooShortError);
MSB_DEFINE_ERROR(InsufficientBeatsError);
MSB_DEFINE_ERROR(ShapeError);
MSB_DEFINE_ERROR(DegenerateWindowError);
MSB_DEFINE_ERROR(DegenerateLabelsError);
MSB_DEFINE_ERROR(ValidationError);
MSB_DEFINE_ERROR(SplitError);
MSB_DEFINE_ERROR(RangeError);
MSB_DEFINE_ERROR(NotFittedError);
MSB_DEFINE_ERROR(PlanError);
MSB_DEFINE_ERROR(EvalError);
MSB_DEFINE_ERROR(EffectSizeError);
MSB_DEFINE_ERROR(OptimStepError);
MSB_DEFINE_ERROR(GraphError);
MSB_DEFINE_ERROR(EnsembleError);
MSB_DEFINE_ERROR(IoError);
MSB_DEFINE_ERROR(ConfigError);
MSB_DEFINE_ERROR(ArgumentError);

#undef MSB_DEFINE_ERROR

// ---------------------------------------------------------------------------
// Core domain enums and small value types shared across modules.
// ---------------------------------------------------------------------------

enum class MoodState : std::uint8_t { Euthymic = 0, Manic = 1 };

inline const char* to_string(MoodState s) {
    return s == MoodState::Manic ? "manic" : "euthymic";
}

inline MoodState mood_state_from_string(const std::string& s) {
    if (s == "manic" || s == "MANIC") return MoodState::Manic;
    if (s == "euthymic" || s == "EUTHYMIC") return MoodState::Euthymic;
    throw FormatError("unknown mood state '" + s + "'");
}

// Half-open-ish worn interval in session-relative seconds; end > start.
struct Interval {
    double start_s = 0.0;
    double end_s = 0.0;
    double length() const { return end_s - start_s; }
    bool operator==(const Interval&) const = default;
};

// ---------------------------------------------------------------------------
// Deterministic seeding helpers. splitmix64 is used to derive independent
// stream seeds from (master seed, fold, run, member) tuples.
// ---------------------------------------------------------------------------

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0,
                              std::uint64_t c = 0) {
    std::uint64_t h = splitmix64(seed);
    h = splitmix64(h ^ (a * 0x9e3779b97f4a7c15ULL));
    h = splitmix64(h ^ (b * 0xc2b2ae3d27d4eb4fULL));
    h = splitmix64(h ^ (c * 0x165667b19e3779f9ULL));
    return h;
}

// FNV-1a over raw bytes; used for config hashes and model fingerprints.
inline std::uint64_t fnv1a64(const void* data, std::size_t n,
                             std::uint64_t h = 0xcbf29ce484222325ULL) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::uint64_t fnv1a64(const std::string& s, std::uint64_t h = 0xcbf29ce484222325ULL) {
    return fnv1a64(s.data(), s.size(), h);
}

inline std::uint64_t fnv1a64(const std::vector<double>& v,
                             std::uint64_t h = 0xcbf29ce484222325ULL) {
    return fnv1a64(v.data(), v.size() * sizeof(double), h);
}

}  // namespace msb
