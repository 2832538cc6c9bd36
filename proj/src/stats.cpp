#include "fxa/stats.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <unordered_map>

namespace fxa {

namespace {

// Lanczos ln-gamma
double ln_gamma(double x) { return std::lgamma(x); }

// Lower regularized incomplete gamma by series (x < a+1).
double gamma_p_series(double a, double x) {
    double sum = 1.0 / a, term = sum, ap = a;
    for (int i = 0; i < 500; ++i) {
        ap += 1.0;
        term *= x / ap;
        sum += term;
        if (std::fabs(term) < std::fabs(sum) * 1e-15) break;
    }
    return sum * std::exp(-x + a * std::log(x) - ln_gamma(a));
}

// Upper regularized incomplete gamma by continued fraction (x >= a+1).
double gamma_q_cf(double a, double x) {
    const double tiny = 1e-300;
    double b = x + 1.0 - a, c = 1.0 / tiny, d = 1.0 / b, h = d;
    for (int i = 1; i <= 500; ++i) {
        double an = -static_cast<double>(i) * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::fabs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        double delta = d * c;
        h *= delta;
        if (std::fabs(delta - 1.0) < 1e-15) break;
    }
    return std::exp(-x + a * std::log(x) - ln_gamma(a)) * h;
}

} // namespace

double gamma_q(double a, double x) {
    if (x < 0 || a <= 0) throw std::invalid_argument("gamma_q domain");
    if (x == 0) return 1.0;
    if (x < a + 1.0) return 1.0 - gamma_p_series(a, x);
    return gamma_q_cf(a, x);
}

double chi2_sf(double x, int df) { return gamma_q(df / 2.0, x / 2.0); }

double chi2_critical(int df, double alpha) {
    double lo = 0.0, hi = df + 10.0;
    while (chi2_sf(hi, df) > alpha) hi *= 2.0;
    for (int i = 0; i < 200; ++i) {
        double mid = 0.5 * (lo + hi);
        if (chi2_sf(mid, df) > alpha) lo = mid; else hi = mid;
        if (hi - lo < 1e-9 * hi) break;
    }
    return 0.5 * (lo + hi);
}

Chi2Result uniformity_test(std::span<const std::uint32_t> samples, int bins, double alpha) {
    if (static_cast<int>(samples.size()) < 5 * bins)
        throw std::invalid_argument("uniformity_test: insufficient samples");
    std::vector<std::uint64_t> counts(bins, 0);
    for (std::uint32_t v : samples) {
        if (v >= static_cast<std::uint32_t>(bins))
            throw std::invalid_argument("uniformity_test: sample out of range");
        ++counts[v];
    }
    const double expected = static_cast<double>(samples.size()) / bins;
    double stat = 0;
    for (std::uint64_t c : counts) {
        double d = c - expected;
        stat += d * d / expected;
    }
    Chi2Result res;
    res.statistic = stat;
    res.df = bins - 1;
    res.critical = chi2_critical(bins - 1, alpha);
    res.pass = stat < res.critical;
    return res;
}

JointResult independence_test(std::span<const std::uint32_t> xs,
                              std::span<const std::uint32_t> ys, int bins, double alpha) {
    if (xs.size() != ys.size()) throw std::invalid_argument("independence_test: size mismatch");
    const std::size_t n = xs.size();
    const int cells = bins * bins;
    if (static_cast<int>(n) < 5 * cells)
        throw std::invalid_argument("independence_test: insufficient samples");
    std::vector<std::uint64_t> joint(cells, 0);
    std::vector<std::uint64_t> mx(bins, 0), my(bins, 0);
    for (std::size_t i = 0; i < n; ++i) {
        ++joint[xs[i] * bins + ys[i]];
        ++mx[xs[i]];
        ++my[ys[i]];
    }
    const double expected = static_cast<double>(n) / cells;
    double stat = 0;
    for (std::uint64_t c : joint) {
        double d = c - expected;
        stat += d * d / expected;
    }
    JointResult res;
    res.chi2.statistic = stat;
    res.chi2.df = cells - 1;
    res.chi2.critical = chi2_critical(cells - 1, alpha);
    res.chi2.pass = stat < res.chi2.critical;

    double mi = 0;
    for (int a = 0; a < bins; ++a) {
        for (int b = 0; b < bins; ++b) {
            std::uint64_t c = joint[a * bins + b];
            if (c == 0 || mx[a] == 0 || my[b] == 0) continue;
            double pxy = static_cast<double>(c) / n;
            double px = static_cast<double>(mx[a]) / n;
            double py = static_cast<double>(my[b]) / n;
            mi += pxy * std::log2(pxy / (px * py));
        }
    }
    res.mutual_information = mi;
    return res;
}

double empirical_entropy(const std::vector<std::span<const std::uint32_t>>& columns,
                         int bits_per_value) {
    if (columns.empty()) return 0;
    const std::size_t n = columns.front().size();
    for (const auto& c : columns)
        if (c.size() != n) throw std::invalid_argument("empirical_entropy: size mismatch");
    if (static_cast<std::size_t>(bits_per_value) * columns.size() > 63)
        throw std::invalid_argument("empirical_entropy: joint space too wide");

    std::unordered_map<std::uint64_t, std::uint64_t> counts;
    counts.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        std::uint64_t key = 0;
        for (const auto& c : columns) key = (key << bits_per_value) | c[i];
        ++counts[key];
    }
    double h = 0;
    for (const auto& [key, c] : counts) {
        (void)key;
        double p = static_cast<double>(c) / n;
        h -= p * std::log2(p);
    }
    // Miller-Madow correction with the observed support size
    h += (static_cast<double>(counts.size()) - 1.0) / (2.0 * n * std::numbers::ln2);
    return h;
}

} // namespace fxa
