#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <vector>

namespace labelsim {

/// Reproducible randomness handle: a master seed plus a stream path such as
/// (experiment, trial, stage). Equal (master, stream) pairs always produce
/// the same derived value on every platform.
class Seed {
public:
    Seed() = default;
    Seed(std::uint64_t master, std::vector<std::uint64_t> stream);

    std::uint64_t master() const noexcept { return master_; }
    const std::vector<std::uint64_t>& stream() const noexcept { return stream_; }

    /// 64-bit value mixed from master and every stream component.
    std::uint64_t value() const noexcept { return value_; }

    /// Same master, stream extended by one component.
    Seed child(std::uint64_t component) const;

    friend bool operator==(const Seed& a, const Seed& b) noexcept {
        return a.master_ == b.master_ && a.stream_ == b.stream_;
    }

private:
    std::uint64_t master_ = 0;
    std::vector<std::uint64_t> stream_;
    std::uint64_t value_ = 0;
};

Seed derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> stream);
Seed derive_seed(std::uint64_t master, std::span<const std::uint64_t> stream);

/// splitmix64 finalizer.
std::uint64_t mix64(std::uint64_t x) noexcept;

/// Platform-stable generator. The standard distributions are
/// implementation-defined, so bounded draws are done here instead.
class Rng {
public:
    explicit Rng(const Seed& seed) noexcept : Rng(seed.value()) {}
    explicit Rng(std::uint64_t state) noexcept;

    std::uint64_t next() noexcept;

    /// Uniform integer in [0, bound). bound must be > 0.
    std::uint64_t below(std::uint64_t bound) noexcept;

    /// Uniform double in [0, 1).
    double uniform() noexcept;

    /// Standard normal via Box-Muller.
    double normal() noexcept;

private:
    std::uint64_t s_[4];
};

/// k distinct indices from [0, n), in draw order (partial Fisher-Yates).
std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t k, Rng& rng);

template <typename T>
void shuffle(std::vector<T>& v, Rng& rng) {
    for (std::size_t i = v.size(); i > 1; --i) {
        const auto j = static_cast<std::size_t>(rng.below(i));
        std::swap(v[i - 1], v[j]);
    }
}

}  // namespace labelsim
