#pragma once

#include <cstddef>

#include "labelsim/dataset.hpp"
#include "labelsim/seed.hpp"

namespace labelsim {

/// Balanced two-class tabular data for tests and demos.
///
/// Each class draws its features from a Gaussian whose mean differs from the
/// other class by `separation` standard deviations on the first
/// `informative` features; remaining features are pure noise. Every fourth
/// informative feature is thresholded to {0, 1} to mimic the binary flags
/// common in web-page feature sets.
struct SyntheticSpec {
    std::size_t per_class = 500;
    std::size_t n_features = 10;
    std::size_t informative = 5;
    double separation = 1.0;
};

Dataset make_synthetic(const SyntheticSpec& spec, const Seed& seed);

}  // namespace labelsim
