#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "msb/common.hpp"

namespace msb::feat {

struct SampEnCounts {
    std::uint64_t a = 0;          // unordered template pairs matching at length m+1
    std::uint64_t b = 0;          // unordered template pairs matching at length m
    std::uint64_t templates = 0;  // number of templates (n - m)
};

// Match counting under Chebyshev distance <= r, self-matches excluded.
// Counts are exact: the accelerated paths (template dedup + weighted k-d
// tree) reproduce the naive double loop bit for bit.
SampEnCounts sampen_counts(const std::vector<double>& x, int m, double r);

// -ln(A/B). When A or B is zero the value is capped at
// ln(templates * (templates - 1)), the log of the ordered-pair bound.
double sample_entropy(const std::vector<double>& x, int m, double r);

double sampen_cap(std::uint64_t templates);

}  // namespace msb::feat
