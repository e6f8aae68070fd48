#include <boost/math/distributions/students_t.hpp>
#include <boost/math/special_functions/beta.hpp>
#include <cmath>
#include <random>

#include "doctest.h"
#include "labelsim/errors.hpp"
#include "labelsim/metrics.hpp"

using namespace labelsim;

namespace {

std::vector<Label> labels(std::initializer_list<int> v) {
    std::vector<Label> out;
    for (int x : v) out.push_back(x ? Label::malicious : Label::benign);
    return out;
}

}  // namespace

TEST_CASE("confusion counts") {
    CHECK(confusion(labels({1, 0, 1, 0}), labels({1, 1, 0, 0})) == ConfusionMatrix{1, 1, 1, 1});

    std::vector<Label> truth(2000);
    for (std::size_t i = 0; i < truth.size(); ++i) truth[i] = i % 2 ? Label::malicious : Label::benign;
    const auto perfect = confusion(truth, truth);
    CHECK(perfect.fp == 0);
    CHECK(perfect.fn == 0);
    const std::vector<Label> all_mal(2000, Label::malicious);
    const auto constant = confusion(all_mal, truth);
    CHECK(constant.tp == 1000);
    CHECK(constant.fp == 1000);

    CHECK_THROWS_AS(confusion(labels({1}), labels({1, 0})), DataError);
    CHECK_THROWS_AS(confusion({}, {}), DataError);
}

TEST_CASE("metric formulas") {
    const auto all = compute_metrics({1000, 0, 1000, 0});
    CHECK(all.accuracy == 1.0);
    CHECK(all.precision == 1.0);
    CHECK(all.recall == 1.0);
    CHECK(all.f1 == 1.0);
    CHECK_FALSE(all.degenerate());

    const auto half = compute_metrics({1, 1, 1, 1});
    CHECK(half.accuracy == 0.5);
    CHECK(half.precision == 0.5);
    CHECK(half.recall == 0.5);
    CHECK(half.f1 == 0.5);
    CHECK(half.fp_count == 1);
    CHECK(half.fn_count == 1);

    const auto never = compute_metrics({0, 0, 5, 5});
    CHECK(never.precision == 0.0);
    CHECK(never.precision_undefined);
    CHECK(never.recall == 0.0);
    CHECK_FALSE(never.recall_undefined);
    CHECK(never.degenerate());

    CHECK_THROWS_AS(compute_metrics({}), DataError);
}

TEST_CASE("metric bounds over all small confusion matrices") {
    for (std::size_t tp = 0; tp <= 6; ++tp)
        for (std::size_t fp = 0; fp <= 6; ++fp)
            for (std::size_t tn = 0; tn <= 6; ++tn)
                for (std::size_t fn = 0; fn <= 6; ++fn) {
                    const ConfusionMatrix cm{tp, fp, tn, fn};
                    if (cm.total() == 0) continue;
                    const auto m = compute_metrics(cm);
                    for (double v : {m.accuracy, m.precision, m.recall, m.f1}) {
                        REQUIRE(v >= 0.0);
                        REQUIRE(v <= 1.0);
                    }
                    if (!m.precision_undefined && !m.recall_undefined && !m.f1_undefined) {
                        REQUIRE(m.f1 <= std::max(m.precision, m.recall) + 1e-15);
                        REQUIRE(m.f1 >= std::min(m.precision, m.recall) - 1e-15);
                        REQUIRE(m.f1 == doctest::Approx(2 * m.precision * m.recall / (m.precision + m.recall)));
                    }
                }
}

TEST_CASE("aggregate") {
    MetricsRecord a;
    a.accuracy = 0.9;
    MetricsRecord b;
    b.accuracy = 1.0;
    const std::vector<MetricsRecord> two{a, b};
    const auto s = aggregate(two);
    CHECK(s.trials == 2);
    CHECK(s.accuracy.mean == doctest::Approx(0.95));
    REQUIRE(s.accuracy.std);
    CHECK(*s.accuracy.std == doctest::Approx(std::sqrt(0.005)).epsilon(1e-12));
    CHECK(*s.accuracy.std == doctest::Approx(0.0707).epsilon(1e-3));
    CHECK(s.accuracy.min == 0.9);
    CHECK(s.accuracy.max == 1.0);

    const std::vector<MetricsRecord> one{a};
    const auto s1 = aggregate(one);
    CHECK(s1.accuracy.mean == 0.9);
    CHECK_FALSE(s1.accuracy.std);

    MetricsRecord c = compute_metrics({7, 2, 9, 3});
    const std::vector<MetricsRecord> same(30, c);
    const auto s30 = aggregate(same);
    for (const auto* m : {&s30.accuracy, &s30.precision, &s30.recall, &s30.f1, &s30.fp_count, &s30.fn_count}) {
        REQUIRE(m->std);
        CHECK(*m->std == doctest::Approx(0.0).epsilon(1e-15));
    }
    CHECK_THROWS_AS(aggregate({}), DataError);
}

TEST_CASE("summary scales linearly") {
    std::mt19937_64 gen(4);
    std::uniform_real_distribution<double> u(0, 1);
    for (int round = 0; round < 50; ++round) {
        std::vector<double> v(2 + round % 9);
        for (auto& x : v) x = u(gen);
        const double k = 0.25 + 4 * u(gen);
        std::vector<double> w = v;
        for (auto& x : w) x *= k;
        const auto a = summarize(v), b = summarize(w);
        CHECK(b.mean == doctest::Approx(k * a.mean).epsilon(1e-12));
        CHECK(*b.std == doctest::Approx(k * *a.std).epsilon(1e-12));
    }
}

TEST_CASE("Welch t-test textbook example") {
    const std::vector<double> a{1, 2, 3}, b{4, 5, 6};
    const auto r = welch_t_test(a, b);
    CHECK(r.t_statistic == doctest::Approx(-3.674).epsilon(1e-3));
    CHECK(r.degrees_of_freedom == doctest::Approx(4.0).epsilon(1e-3));
    CHECK(r.p_value == doctest::Approx(0.0213).epsilon(1e-3));
    // Reference values from an established statistics package.
    CHECK(std::abs(r.t_statistic - -3.6742346141747673) < 1e-12);
    CHECK(std::abs(r.p_value - 0.021311641128756727) < 1e-10);
    CHECK(r.significant_at_0_05);
}

TEST_CASE("Welch t-test conventions") {
    const std::vector<double> a{0.3, 0.5, 0.9};
    const auto same = welch_t_test(a, a);
    CHECK(same.t_statistic == 0.0);
    CHECK(same.p_value == doctest::Approx(1.0));

    const std::vector<double> c1{2, 2, 2}, c2{2, 2};
    const auto flat = welch_t_test(c1, c2);
    CHECK(flat.t_statistic == 0.0);
    CHECK(flat.p_value == 1.0);
    CHECK(flat.degrees_of_freedom == 3.0);

    const std::vector<double> c3{3, 3};
    const auto apart = welch_t_test(c1, c3);
    CHECK(std::isinf(apart.t_statistic));
    CHECK(apart.t_statistic < 0);
    CHECK(apart.p_value == 0.0);

    const std::vector<double> tiny{1.0};
    CHECK_THROWS_AS(welch_t_test(tiny, a), DataError);
}

TEST_CASE("Welch t-test symmetry and shift invariance") {
    std::mt19937_64 gen(8);
    std::uniform_real_distribution<double> u(0, 1);
    for (int round = 0; round < 200; ++round) {
        std::vector<double> a(2 + round % 7), b(2 + round % 5);
        for (auto& x : a) x = u(gen);
        for (auto& x : b) x = u(gen) + 0.3 * (round % 3);
        const auto ab = welch_t_test(a, b), ba = welch_t_test(b, a);
        CHECK(ab.t_statistic == -ba.t_statistic);
        CHECK(ab.p_value == ba.p_value);
        CHECK(ab.p_value >= 0.0);
        CHECK(ab.p_value <= 1.0);

        const double c = std::ldexp(std::floor(u(gen) * 64), -4);  // exact shifts in [0, 4)
        auto as = a, bs = b;
        for (auto& x : as) x += c;
        for (auto& x : bs) x += c;
        const auto sh = welch_t_test(as, bs);
        CHECK(std::abs(sh.t_statistic - ab.t_statistic) <= 1e-12 * std::max(1.0, std::abs(ab.t_statistic)));
        CHECK(std::abs(sh.p_value - ab.p_value) <= 1e-12);
    }
}

TEST_CASE("incomplete beta against an independent implementation") {
    for (double a : {0.5, 1.0, 2.0, 3.5, 7.0, 15.0, 60.0}) {
        for (double b : {0.5, 1.0, 2.5, 10.0, 40.0}) {
            for (double x : {0.0, 1e-6, 0.01, 0.1, 0.3, 0.5, 0.7, 0.9, 0.999, 1.0}) {
                const double got = regularized_incomplete_beta(a, b, x);
                const double want = boost::math::ibeta(a, b, x);
                CHECK(std::abs(got - want) <= 1e-10);
            }
        }
    }
    CHECK_THROWS_AS(regularized_incomplete_beta(0.0, 1.0, 0.5), ConfigError);
    CHECK_THROWS_AS(regularized_incomplete_beta(1.0, 1.0, 1.5), ConfigError);
}

TEST_CASE("Student t tail against an independent implementation") {
    for (double df : {1.0, 2.0, 3.7, 10.0, 58.0, 300.0}) {
        const boost::math::students_t dist(df);
        for (double t : {0.0, 0.1, 0.5, 1.0, 2.0, 3.5, 8.0, 25.0}) {
            const double want = 2.0 * boost::math::cdf(boost::math::complement(dist, t));
            CHECK(std::abs(student_t_two_sided_p(t, df) - want) <= 1e-10);
            CHECK(student_t_two_sided_p(-t, df) == student_t_two_sided_p(t, df));
        }
    }
}
