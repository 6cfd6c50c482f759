#include "lobsig/stats.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <numeric>
#include <thread>

#include "lobsig/errors.hpp"

namespace lobsig {

namespace {

// Series expansion of P(a, x), valid for x < a + 1.
double gamma_p_series(double a, double x) {
    double ap = a;
    double sum = 1.0 / a;
    double del = sum;
    for (int i = 0; i < 500; ++i) {
        ap += 1.0;
        del *= x / ap;
        sum += del;
        if (std::abs(del) < std::abs(sum) * 1e-16) break;
    }
    return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Continued fraction for Q(a, x) (modified Lentz), valid for x >= a + 1.
double gamma_q_cf(double a, double x) {
    const double tiny = 1e-300;
    double b = x + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i <= 500; ++i) {
        const double an = -i * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < 1e-16) break;
    }
    return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

}  // namespace

double gamma_p(double a, double x) {
    if (x < 0.0 || a <= 0.0) throw ConfigError("gamma_p: bad arguments");
    if (x == 0.0) return 0.0;
    if (x < a + 1.0) return gamma_p_series(a, x);
    return 1.0 - gamma_q_cf(a, x);
}

double chi2_cdf(double x, int k) {
    if (x <= 0.0) return 0.0;
    return gamma_p(0.5 * k, 0.5 * x);
}

double chi2_quantile(double prob, int k) {
    if (prob < 0.0 || k < 1) throw ConfigError("chi2_quantile: bad arguments");
    if (prob >= 1.0) return std::numeric_limits<double>::infinity();
    if (prob == 0.0) return 0.0;

    // Wilson-Hilferty start, then bracketed Newton on the CDF.
    const double z = [&] {
        // Acklam-style inverse normal, adequate as a starting point.
        static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                   -2.759285104469687e+02, 1.383577518672690e+02,
                                   -3.066479806614716e+01, 2.506628277459239e+00};
        static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                   -1.556989798598866e+02, 6.680131188771972e+01,
                                   -1.328068155288572e+01};
        static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                   -2.400758277161838e+00, -2.549732539343734e+00,
                                   4.374664141464968e+00,  2.938163982698783e+00};
        static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                   2.445134137142996e+00, 3.754408661907416e+00};
        const double p = prob;
        if (p < 0.02425) {
            const double q = std::sqrt(-2.0 * std::log(p));
            return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
                   ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
        }
        if (p > 1.0 - 0.02425) {
            const double q = std::sqrt(-2.0 * std::log(1.0 - p));
            return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
                   ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
        }
        const double q = p - 0.5, r = q * q;
        return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
               (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
    }();
    const double kk = static_cast<double>(k);
    double x = kk * std::pow(1.0 - 2.0 / (9.0 * kk) + z * std::sqrt(2.0 / (9.0 * kk)), 3);
    if (x <= 0.0) x = 1e-10;

    double lo = 0.0, hi = std::numeric_limits<double>::infinity();
    for (int it = 0; it < 200; ++it) {
        const double f = chi2_cdf(x, k) - prob;
        if (f > 0.0)
            hi = x;
        else
            lo = x;
        // Chi-squared pdf at x.
        const double logpdf = (0.5 * kk - 1.0) * std::log(x) - 0.5 * x -
                              std::lgamma(0.5 * kk) - 0.5 * kk * std::numbers::ln2;
        const double pdf = std::exp(logpdf);
        double next = pdf > 0.0 ? x - f / pdf : x;
        if (!(next > lo && next < hi)) next = std::isinf(hi) ? 2.0 * x : 0.5 * (lo + hi);
        if (std::abs(next - x) <= 1e-12 * std::max(1.0, x)) return next;
        x = next;
    }
    return x;
}

double percentile_linear(std::span<const double> values, double q) {
    if (values.empty()) throw ConfigError("percentile of empty vector");
    if (q < 0.0 || q > 1.0) throw ConfigError("percentile q out of [0,1]");
    std::vector<double> s(values.begin(), values.end());
    std::sort(s.begin(), s.end());
    const double rank = q * static_cast<double>(s.size() - 1);
    const auto lo = static_cast<std::size_t>(rank);
    if (lo + 1 >= s.size()) return s.back();
    const double frac = rank - static_cast<double>(lo);
    return s[lo] + frac * (s[lo + 1] - s[lo]);
}

double percentile_nearest_rank(std::span<const double> values, double q) {
    if (values.empty()) throw ConfigError("percentile of empty vector");
    std::vector<double> s(values.begin(), values.end());
    std::sort(s.begin(), s.end());
    const auto n = s.size();
    std::size_t r = static_cast<std::size_t>(std::ceil(q * static_cast<double>(n)));
    if (r == 0) r = 1;
    if (r > n) r = n;
    return s[r - 1];
}

double mcd_consistency_factor(double delta, int p) {
    if (delta >= 1.0) return 1.0;
    const double q = chi2_quantile(delta, p);
    const double denom = chi2_cdf(q, p + 2);
    if (denom <= 0.0) return 1.0;
    return delta / denom;
}

std::vector<int> canonical_order(const Eigen::MatrixXd& X) {
    std::vector<int> idx(static_cast<std::size_t>(X.rows()));
    std::iota(idx.begin(), idx.end(), 0);
    const int p = static_cast<int>(X.cols());
    std::sort(idx.begin(), idx.end(), [&](int a, int b) {
        for (int j = 0; j < p; ++j) {
            if (X(a, j) < X(b, j)) return true;
            if (X(a, j) > X(b, j)) return false;
        }
        return a < b;
    });
    return idx;
}

std::vector<int> canonical_rank(const Eigen::MatrixXd& X) {
    const auto order = canonical_order(X);
    std::vector<int> rank(order.size());
    for (std::size_t i = 0; i < order.size(); ++i) rank[static_cast<std::size_t>(order[i])] = static_cast<int>(i);
    return rank;
}

void mean_cov_rows(const Eigen::MatrixXd& X, std::span<const int> rows,
                   Eigen::VectorXd& mean, Eigen::MatrixXd& cov) {
    const int p = static_cast<int>(X.cols());
    const auto m = static_cast<double>(rows.size());
    if (rows.empty()) throw ConfigError("mean_cov_rows: empty row set");
    mean = Eigen::VectorXd::Zero(p);
    for (int i : rows) mean += X.row(i).transpose();
    mean /= m;
    cov = Eigen::MatrixXd::Zero(p, p);
    for (int i : rows) {
        const Eigen::VectorXd d = X.row(i).transpose() - mean;
        cov.noalias() += d * d.transpose();
    }
    cov /= m;
}

void parallel_for(int n, const std::function<void(int, int)>& fn) {
    unsigned hw = std::thread::hardware_concurrency();
    if (hw == 0) hw = 1;
    const int chunks = static_cast<int>(std::min<unsigned>(hw, 8));
    if (n < 512 || chunks <= 1) {
        fn(0, n);
        return;
    }
    std::vector<std::thread> workers;
    const int step = (n + chunks - 1) / chunks;
    for (int c = 0; c < chunks; ++c) {
        const int b = c * step;
        const int e = std::min(n, b + step);
        if (b >= e) break;
        workers.emplace_back(fn, b, e);
    }
    for (auto& w : workers) w.join();
}

}  // namespace lobsig
