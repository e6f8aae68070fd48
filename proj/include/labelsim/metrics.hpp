#pragma once

#include <cstddef>
#include <optional>
#include <span>

#include "labelsim/dataset.hpp"

namespace labelsim {

/// Binary confusion counts with malicious as the positive class.
struct ConfusionMatrix {
    std::size_t tp = 0;
    std::size_t fp = 0;
    std::size_t tn = 0;
    std::size_t fn = 0;

    std::size_t total() const noexcept { return tp + fp + tn + fn; }
    friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;
};

ConfusionMatrix confusion(std::span<const Label> predictions, std::span<const Label> truth);

/// Performance of one model on one evaluation set. Ratios with a zero
/// denominator are reported as 0 and flagged.
struct MetricsRecord {
    double accuracy = 0.0;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    std::size_t fp_count = 0;
    std::size_t fn_count = 0;
    bool precision_undefined = false;
    bool recall_undefined = false;
    bool f1_undefined = false;

    bool degenerate() const noexcept { return precision_undefined || recall_undefined || f1_undefined; }
    friend bool operator==(const MetricsRecord&, const MetricsRecord&) = default;
};

MetricsRecord compute_metrics(const ConfusionMatrix& cm);

struct MetricSummary {
    double mean = 0.0;
    std::optional<double> std;  // sample (n-1) deviation, absent for n = 1
    double min = 0.0;
    double max = 0.0;
};

/// Mean / sample std / range of a set of values. Throws on empty input.
MetricSummary summarize(std::span<const double> values);

struct AggregateStats {
    std::size_t trials = 0;
    MetricSummary accuracy;
    MetricSummary precision;
    MetricSummary recall;
    MetricSummary f1;
    MetricSummary fp_count;
    MetricSummary fn_count;
};

AggregateStats aggregate(std::span<const MetricsRecord> records);

struct TTestResult {
    double t_statistic = 0.0;
    double degrees_of_freedom = 0.0;
    double p_value = 1.0;
    bool significant_at_0_05 = false;
};

/// Two-sided Welch (unequal variance) two-sample t-test.
///
/// Degenerate cases: when both groups have zero variance the statistic is 0
/// with p = 1 for equal means, and +/-infinity with p = 0 otherwise; the
/// degrees of freedom then fall back to n_a + n_b - 2.
TTestResult welch_t_test(std::span<const double> a, std::span<const double> b);

/// Regularized incomplete beta I_x(a, b), evaluated with the modified Lentz
/// continued fraction (switching to the symmetric form for x beyond the
/// mean), good to ~1e-12 relative.
double regularized_incomplete_beta(double a, double b, double x);

/// Two-sided tail P(|T| >= |t|) of Student's t with df degrees of freedom.
double student_t_two_sided_p(double t, double df);

}  // namespace labelsim
