#include "labelsim/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "labelsim/errors.hpp"

namespace labelsim {

ConfusionMatrix confusion(std::span<const Label> predictions, std::span<const Label> truth) {
    if (predictions.size() != truth.size()) {
        throw DataError("confusion: " + std::to_string(predictions.size()) + " predictions vs " +
                        std::to_string(truth.size()) + " labels");
    }
    if (truth.empty()) throw DataError("confusion: empty evaluation set");
    ConfusionMatrix cm;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        const bool pred = predictions[i] == Label::malicious;
        const bool real = truth[i] == Label::malicious;
        if (pred && real) ++cm.tp;
        else if (pred) ++cm.fp;
        else if (real) ++cm.fn;
        else ++cm.tn;
    }
    return cm;
}

MetricsRecord compute_metrics(const ConfusionMatrix& cm) {
    if (cm.total() == 0) throw DataError("compute_metrics: empty confusion matrix");
    MetricsRecord m;
    m.accuracy = static_cast<double>(cm.tp + cm.tn) / static_cast<double>(cm.total());
    if (cm.tp + cm.fp == 0) m.precision_undefined = true;
    else m.precision = static_cast<double>(cm.tp) / static_cast<double>(cm.tp + cm.fp);
    if (cm.tp + cm.fn == 0) m.recall_undefined = true;
    else m.recall = static_cast<double>(cm.tp) / static_cast<double>(cm.tp + cm.fn);
    if (m.precision + m.recall == 0.0) m.f1_undefined = true;
    else m.f1 = 2.0 * m.precision * m.recall / (m.precision + m.recall);
    m.fp_count = cm.fp;
    m.fn_count = cm.fn;
    return m;
}

MetricSummary summarize(std::span<const double> values) {
    if (values.empty()) throw DataError("cannot summarize an empty sample");
    MetricSummary s;
    const double n = static_cast<double>(values.size());
    s.mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
    auto [lo, hi] = std::minmax_element(values.begin(), values.end());
    s.min = *lo;
    s.max = *hi;
    if (values.size() > 1) {
        double ss = 0.0;
        for (double v : values) ss += (v - s.mean) * (v - s.mean);
        s.std = std::sqrt(ss / (n - 1.0));
    }
    return s;
}

AggregateStats aggregate(std::span<const MetricsRecord> records) {
    if (records.empty()) throw DataError("aggregate: no records");
    auto column = [&](auto getter) {
        std::vector<double> v;
        v.reserve(records.size());
        for (const auto& r : records) v.push_back(static_cast<double>(getter(r)));
        return summarize(v);
    };
    AggregateStats a;
    a.trials = records.size();
    a.accuracy = column([](const MetricsRecord& r) { return r.accuracy; });
    a.precision = column([](const MetricsRecord& r) { return r.precision; });
    a.recall = column([](const MetricsRecord& r) { return r.recall; });
    a.f1 = column([](const MetricsRecord& r) { return r.f1; });
    a.fp_count = column([](const MetricsRecord& r) { return r.fp_count; });
    a.fn_count = column([](const MetricsRecord& r) { return r.fn_count; });
    return a;
}

namespace {

// Continued fraction for I_x(a,b), modified Lentz.
double beta_continued_fraction(double a, double b, double x) {
    constexpr int kMaxIter = 10000;
    constexpr double kEps = 1e-15;
    constexpr double kTiny = 1e-300;
    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::fabs(d) < kTiny) d = kTiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= kMaxIter; ++m) {
        const double m2 = 2.0 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < kEps) break;
    }
    return h;
}

}  // namespace

double regularized_incomplete_beta(double a, double b, double x) {
    if (!(a > 0.0) || !(b > 0.0)) throw ConfigError("incomplete beta needs a, b > 0");
    if (std::isnan(x) || x < 0.0 || x > 1.0) throw ConfigError("incomplete beta needs x in [0, 1]");
    if (x == 0.0) return 0.0;
    if (x == 1.0) return 1.0;
    const double log_front =
        std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log1p(-x);
    const double front = std::exp(log_front);
    if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_continued_fraction(a, b, x) / a;
    return 1.0 - front * beta_continued_fraction(b, a, 1.0 - x) / b;
}

double student_t_two_sided_p(double t, double df) {
    if (std::isnan(t)) return 1.0;
    if (std::isinf(t)) return 0.0;
    const double x = df / (df + t * t);
    return std::clamp(regularized_incomplete_beta(df / 2.0, 0.5, x), 0.0, 1.0);
}

TTestResult welch_t_test(std::span<const double> a, std::span<const double> b) {
    if (a.size() < 2 || b.size() < 2) {
        throw DataError("welch_t_test needs at least 2 samples per group, got " + std::to_string(a.size()) + " and " +
                        std::to_string(b.size()));
    }
    const auto sa = summarize(a);
    const auto sb = summarize(b);
    const double na = static_cast<double>(a.size());
    const double nb = static_cast<double>(b.size());
    const double va = *sa.std * *sa.std / na;
    const double vb = *sb.std * *sb.std / nb;
    const double diff = sa.mean - sb.mean;

    TTestResult r;
    if (va + vb == 0.0) {
        r.degrees_of_freedom = na + nb - 2.0;
        if (diff == 0.0) {
            r.t_statistic = 0.0;
            r.p_value = 1.0;
        } else {
            r.t_statistic = diff > 0 ? std::numeric_limits<double>::infinity()
                                     : -std::numeric_limits<double>::infinity();
            r.p_value = 0.0;
        }
    } else {
        r.t_statistic = diff / std::sqrt(va + vb);
        r.degrees_of_freedom = (va + vb) * (va + vb) / (va * va / (na - 1.0) + vb * vb / (nb - 1.0));
        r.p_value = student_t_two_sided_p(r.t_statistic, r.degrees_of_freedom);
    }
    r.significant_at_0_05 = r.p_value < 0.05;
    return r;
}

}  // namespace labelsim
