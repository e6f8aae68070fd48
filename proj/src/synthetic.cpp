#include "labelsim/synthetic.hpp"

#include <algorithm>
#include <string>

#include "labelsim/errors.hpp"

namespace labelsim {

Dataset make_synthetic(const SyntheticSpec& spec, const Seed& seed) {
    if (spec.n_features == 0) throw ConfigError("synthetic data needs at least one feature");
    std::vector<std::string> names;
    for (std::size_t f = 0; f < spec.n_features; ++f) names.push_back("f" + std::to_string(f));
    Dataset ds(std::move(names));

    Rng rng(seed);
    const std::size_t informative = std::min(spec.informative, spec.n_features);
    // Interleave the classes so file order carries no label information.
    for (std::size_t i = 0; i < 2 * spec.per_class; ++i) {
        Sample s;
        s.id = i;
        s.label = i % 2 == 0 ? Label::benign : Label::malicious;
        const double shift = s.label == Label::malicious ? spec.separation / 2.0 : -spec.separation / 2.0;
        s.features.reserve(spec.n_features);
        for (std::size_t f = 0; f < spec.n_features; ++f) {
            double v = rng.normal();
            if (f < informative) {
                v += shift;
                if (f % 4 == 3) v = v > 0.0 ? 1.0 : 0.0;
            }
            s.features.push_back(v);
        }
        ds.add(std::move(s));
    }
    return ds;
}

}  // namespace labelsim
