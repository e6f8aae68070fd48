#include "labelsim/seed.hpp"

#include <cmath>
#include <numbers>
#include <numeric>

namespace labelsim {

namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

__extension__ using u128 = unsigned __int128;

std::uint64_t rotl(std::uint64_t x, int k) noexcept { return (x << k) | (x >> (64 - k)); }

std::uint64_t fold(std::uint64_t master, std::span<const std::uint64_t> stream) noexcept {
    std::uint64_t h = mix64(master ^ 0x6C62272E07BB0142ULL);
    for (std::size_t i = 0; i < stream.size(); ++i) {
        // Position-dependent so (1,0) and (0,1) land in different streams.
        h = mix64(h ^ mix64(stream[i] + kGolden * (i + 1)));
    }
    return h;
}

}  // namespace

std::uint64_t mix64(std::uint64_t x) noexcept {
    x += kGolden;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

Seed::Seed(std::uint64_t master, std::vector<std::uint64_t> stream)
    : master_(master), stream_(std::move(stream)), value_(fold(master_, stream_)) {}

Seed Seed::child(std::uint64_t component) const {
    auto s = stream_;
    s.push_back(component);
    return Seed(master_, std::move(s));
}

Seed derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> stream) {
    return Seed(master, std::vector<std::uint64_t>(stream));
}

Seed derive_seed(std::uint64_t master, std::span<const std::uint64_t> stream) {
    return Seed(master, std::vector<std::uint64_t>(stream.begin(), stream.end()));
}

// xoshiro256** seeded through splitmix64.
Rng::Rng(std::uint64_t state) noexcept {
    for (auto& s : s_) {
        state += kGolden;
        s = mix64(state);
    }
}

std::uint64_t Rng::next() noexcept {
    const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
}

std::uint64_t Rng::below(std::uint64_t bound) noexcept {
    // Lemire's nearly-divisionless rejection method.
    u128 m = static_cast<u128>(next()) * bound;
    auto low = static_cast<std::uint64_t>(m);
    if (low < bound) {
        const std::uint64_t threshold = (0 - bound) % bound;
        while (low < threshold) {
            m = static_cast<u128>(next()) * bound;
            low = static_cast<std::uint64_t>(m);
        }
    }
    return static_cast<std::uint64_t>(m >> 64);
}

double Rng::uniform() noexcept { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

double Rng::normal() noexcept {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t k, Rng& rng) {
    std::vector<std::size_t> pool(n);
    std::iota(pool.begin(), pool.end(), std::size_t{0});
    for (std::size_t i = 0; i < k; ++i) {
        const auto j = i + static_cast<std::size_t>(rng.below(n - i));
        std::swap(pool[i], pool[j]);
    }
    pool.resize(k);
    return pool;
}

}  // namespace labelsim
