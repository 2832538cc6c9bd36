#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace fxa {

// Upper regularized incomplete gamma Q(a, x) and the chi-square machinery
// built on it (series + continued fraction, standard numerics).
double gamma_q(double a, double x);

// P[X > x] for X ~ chi-square with df degrees of freedom.
double chi2_sf(double x, int df);

// Smallest x with P[X > x] <= alpha (upper quantile), by bisection on the
// survival function.
double chi2_critical(int df, double alpha);

struct Chi2Result {
    double statistic = 0;
    int df = 0;
    double critical = 0;
    bool pass = false;
};

// Goodness of fit of `samples` (values in [0, bins)) against the uniform
// distribution over `bins` cells at significance alpha. Throws on fewer than
// 5*bins samples.
Chi2Result uniformity_test(std::span<const std::uint32_t> samples, int bins, double alpha);

struct JointResult {
    Chi2Result chi2;
    double mutual_information = 0; // plug-in estimate, bits
};

// Joint chi-square of the (x, y) pairs against the product-uniform
// distribution over bins x bins cells, plus a plug-in mutual-information
// estimate of the observed joint table.
JointResult independence_test(std::span<const std::uint32_t> xs,
                              std::span<const std::uint32_t> ys, int bins, double alpha);

// Plug-in (maximum likelihood) joint entropy of the row tuples with
// Miller-Madow bias correction, in bits. `columns` supplies one value vector
// per trace point; all must share the sample count. Values must fit in
// `bits_per_value` bits.
double empirical_entropy(const std::vector<std::span<const std::uint32_t>>& columns,
                         int bits_per_value);

} // namespace fxa
