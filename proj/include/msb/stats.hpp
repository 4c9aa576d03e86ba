#pragma once

#include <cstddef>
#include <vector>

#include "msb/common.hpp"

namespace msb::stats {

// Upper-tail probability of the chi-square distribution (regularized upper
// incomplete gamma Q(k/2, x/2)).
double chi2_sf(double x, double dof);

// Standard normal CDF and two-sided tail.
double normal_cdf(double z);
double normal_two_sided_p(double z);

// Row ranks with ties averaged; rank 1 goes to the LARGEST value so that the
// best-performing method gets the lowest rank.
std::vector<double> rank_row_desc(const std::vector<double>& row);

struct FriedmanResult {
    double statistic = 0.0;
    double p_value = 1.0;
    std::vector<double> mean_ranks;  // one per method (column)
};

// matrix[i][j] = measurement of method j on subject i. Ties are averaged and
// the statistic carries the standard tie correction.
FriedmanResult friedman_test(const std::vector<std::vector<double>>& matrix);

struct FinnerResult {
    std::size_t control = 0;              // index of the best-ranked method
    std::vector<double> z;                // 0 for the control itself
    std::vector<double> p_raw;            // two-sided; 1 for the control
    std::vector<double> p_adjusted;       // Finner step-down; 1 for the control
    std::vector<bool> reject;             // adjusted p < alpha
};

// mean_ranks from Friedman; n = number of subjects. The control must be the
// best-ranked (smallest mean rank) method.
FinnerResult finner_posthoc(const std::vector<double>& mean_ranks, std::size_t n,
                            std::size_t control, double alpha = 0.05);

// Paired effect size: mean of differences over their sample SD.
double cohens_dz(const std::vector<double>& control, const std::vector<double>& other);

// Exact two-sided binomial test of k successes in n trials against p0.
double binomial_two_sided_p(std::size_t k, std::size_t n, double p0);

}  // namespace msb::stats
