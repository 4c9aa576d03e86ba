#include "msb/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace msb::stats {

namespace {

// Regularized lower incomplete gamma P(a, x) by series expansion (x < a + 1).
double gamma_p_series(double a, double x) {
    double term = 1.0 / a;
    double sum = term;
    for (int n = 1; n < 1000; ++n) {
        term *= x / (a + n);
        sum += term;
        if (std::abs(term) < std::abs(sum) * 1e-16) break;
    }
    return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Regularized upper incomplete gamma Q(a, x) by Lentz continued fraction.
double gamma_q_cf(double a, double x) {
    const double tiny = 1e-300;
    double b = x + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i < 1000; ++i) {
        const double an = -i * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double delta = d * c;
        h *= delta;
        if (std::abs(delta - 1.0) < 1e-16) break;
    }
    return h * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

}  // namespace

double chi2_sf(double x, double dof) {
    if (x <= 0.0) return 1.0;
    const double a = dof / 2.0;
    const double half = x / 2.0;
    if (half < a + 1.0) return 1.0 - gamma_p_series(a, half);
    return gamma_q_cf(a, half);
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

double normal_two_sided_p(double z) { return std::erfc(std::abs(z) / std::sqrt(2.0)); }

std::vector<double> rank_row_desc(const std::vector<double>& row) {
    const std::size_t k = row.size();
    std::vector<std::size_t> order(k);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return row[a] > row[b]; });
    std::vector<double> ranks(k, 0.0);
    std::size_t i = 0;
    while (i < k) {
        std::size_t j = i;
        while (j + 1 < k && row[order[j + 1]] == row[order[i]]) ++j;
        const double avg = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
        for (std::size_t t = i; t <= j; ++t) ranks[order[t]] = avg;
        i = j + 1;
    }
    return ranks;
}

FriedmanResult friedman_test(const std::vector<std::vector<double>>& matrix) {
    const std::size_t n = matrix.size();
    if (n < 2) throw ArgumentError("friedman test needs at least 2 subjects");
    const std::size_t k = matrix[0].size();
    if (k < 2) throw ArgumentError("friedman test needs at least 2 methods");
    for (const auto& row : matrix)
        if (row.size() != k) throw ShapeError("ragged accuracy matrix");

    FriedmanResult res;
    res.mean_ranks.assign(k, 0.0);
    double tie_sum = 0.0;  // sum over rows of sum(t^3 - t)
    for (const auto& row : matrix) {
        const auto ranks = rank_row_desc(row);
        for (std::size_t j = 0; j < k; ++j) res.mean_ranks[j] += ranks[j];
        // Tie groups of this row.
        std::vector<double> sorted(row);
        std::sort(sorted.begin(), sorted.end());
        std::size_t i = 0;
        while (i < k) {
            std::size_t j = i;
            while (j + 1 < k && sorted[j + 1] == sorted[i]) ++j;
            const auto t = static_cast<double>(j - i + 1);
            tie_sum += t * t * t - t;
            i = j + 1;
        }
    }
    for (double& r : res.mean_ranks) r /= static_cast<double>(n);

    const double nn = static_cast<double>(n);
    const double kk = static_cast<double>(k);
    double ssbn = 0.0;  // sum over methods of (rank sum)^2
    for (double mean_rank : res.mean_ranks) {
        const double rank_sum = mean_rank * nn;
        ssbn += rank_sum * rank_sum;
    }
    const double correction = 1.0 - tie_sum / (nn * (kk * kk * kk - kk));
    if (correction <= 0.0) {
        // Every row fully tied: no evidence of any difference.
        res.statistic = 0.0;
        res.p_value = 1.0;
        return res;
    }
    const double uncorrected =
        12.0 * ssbn / (nn * kk * (kk + 1.0)) - 3.0 * nn * (kk + 1.0);
    res.statistic = uncorrected / correction;
    if (res.statistic < 0.0) res.statistic = 0.0;
    res.p_value = chi2_sf(res.statistic, kk - 1.0);
    return res;
}

FinnerResult finner_posthoc(const std::vector<double>& mean_ranks, std::size_t n,
                            std::size_t control, double alpha) {
    const std::size_t k = mean_ranks.size();
    if (k < 2) throw ArgumentError("need at least two methods");
    if (control >= k) throw ArgumentError("control index out of range");
    for (std::size_t j = 0; j < k; ++j)
        if (mean_ranks[j] < mean_ranks[control])
            throw ArgumentError("control must be the best-ranked method");

    FinnerResult res;
    res.control = control;
    res.z.assign(k, 0.0);
    res.p_raw.assign(k, 1.0);
    res.p_adjusted.assign(k, 1.0);
    res.reject.assign(k, false);

    const double se = std::sqrt(static_cast<double>(k) * (static_cast<double>(k) + 1.0) /
                                (6.0 * static_cast<double>(n)));
    std::vector<std::size_t> others;
    for (std::size_t j = 0; j < k; ++j) {
        if (j == control) continue;
        res.z[j] = (mean_ranks[j] - mean_ranks[control]) / se;
        res.p_raw[j] = normal_two_sided_p(res.z[j]);
        others.push_back(j);
    }
    // Step-down adjustment: sort raw p ascending, adj_i = max_{j<=i} of
    // 1 - (1 - p_(j))^(m/j), clipped to [raw, 1].
    const double m = static_cast<double>(others.size());
    std::sort(others.begin(), others.end(),
              [&](std::size_t a, std::size_t b) { return res.p_raw[a] < res.p_raw[b]; });
    double running_max = 0.0;
    for (std::size_t i = 0; i < others.size(); ++i) {
        const double p = res.p_raw[others[i]];
        const double exponent = m / static_cast<double>(i + 1);
        // 1 - (1-p)^e computed stably.
        const double adj = p >= 1.0 ? 1.0 : -std::expm1(exponent * std::log1p(-p));
        running_max = std::max(running_max, adj);
        res.p_adjusted[others[i]] = std::min(1.0, std::max(running_max, p));
        res.reject[others[i]] = res.p_adjusted[others[i]] < alpha;
    }
    return res;
}

double cohens_dz(const std::vector<double>& control, const std::vector<double>& other) {
    if (control.size() != other.size() || control.size() < 2)
        throw ArgumentError("paired vectors must share a length of at least 2");
    std::vector<double> d(control.size());
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = control[i] - other[i];
    double mean = 0.0;
    for (double v : d) mean += v;
    mean /= static_cast<double>(d.size());
    double ss = 0.0;
    for (double v : d) ss += (v - mean) * (v - mean);
    const double sd = std::sqrt(ss / static_cast<double>(d.size() - 1));
    if (!(sd > 0.0)) throw EffectSizeError("zero-variance paired differences");
    return mean / sd;
}

double binomial_two_sided_p(std::size_t k, std::size_t n, double p0) {
    if (n == 0 || p0 <= 0.0 || p0 >= 1.0) throw ArgumentError("bad binomial test inputs");
    auto log_pmf = [&](std::size_t i) {
        const double di = static_cast<double>(i);
        const double dn = static_cast<double>(n);
        return std::lgamma(dn + 1.0) - std::lgamma(di + 1.0) - std::lgamma(dn - di + 1.0) +
               di * std::log(p0) + (dn - di) * std::log1p(-p0);
    };
    const double ref = log_pmf(k);
    double p = 0.0;
    for (std::size_t i = 0; i <= n; ++i) {
        const double lp = log_pmf(i);
        if (lp <= ref + 1e-9) p += std::exp(lp);
    }
    return std::min(1.0, p);
}

}  // namespace msb::stats
