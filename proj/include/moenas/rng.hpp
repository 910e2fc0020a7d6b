#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <string_view>

namespace moenas {

// Mixes a master seed with a label so each consumer owns an independent stream.
// Adding new consumers never shifts the draws of existing ones.
std::uint64_t derive_seed(std::uint64_t master, std::string_view label, std::uint64_t salt = 0) noexcept;

std::uint64_t splitmix64(std::uint64_t x) noexcept;

// Thin wrapper over mt19937_64 with distribution code kept in-house so draws
// do not depend on the standard library's distribution implementations.
class Rng {
public:
    explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }

    // Uniform integer in [0, n). n must be > 0.
    std::size_t uniform_index(std::size_t n);

    // Uniform real in [0, 1) with 53 random bits.
    double uniform01();

    double normal();

    // Draws an index with probability proportional to weights[i].
    std::size_t categorical(std::span<const double> weights);

    template <typename It>
    void shuffle(It first, It last) {
        const auto n = static_cast<std::size_t>(last - first);
        for (std::size_t i = n; i > 1; --i) {
            std::size_t j = uniform_index(i);
            std::swap(first[i - 1], first[j]);
        }
    }

    [[nodiscard]] std::string state() const;
    void set_state(const std::string& s);

    bool operator==(const Rng& other) const { return engine_ == other.engine_; }

private:
    std::mt19937_64 engine_;
};

} // namespace moenas
