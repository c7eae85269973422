#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <utility>
#include <vector>

namespace overlaymend {

// splitmix64 step; used to derive independent stream seeds from one run seed.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Seeded random stream. All draws go through the helpers below instead of
// std::*_distribution, whose outputs are not pinned by the standard; results
// must be bit-identical across compilers for replay tests to hold.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    std::uint64_t next() { return gen_(); }

    // Uniform index in [0, n). Rejection keeps the draw unbiased.
    std::uint64_t index(std::uint64_t n) {
        if (n == 0) throw std::invalid_argument("Rng::index: n must be positive");
        const std::uint64_t reject_below = (0 - n) % n;  // 2^64 mod n
        std::uint64_t r = next();
        while (r < reject_below) r = next();
        return r % n;
    }

    // Uniform in [0, 1) with 53 significant bits.
    double real01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    // Uniform in [lo, hi).
    double uniform(double lo, double hi) {
        if (!(lo <= hi)) throw std::invalid_argument("Rng::uniform: lo > hi");
        return lo + (hi - lo) * real01();
    }

    bool chance(double p) { return real01() < p; }

    // Fisher-Yates; last position first so draws mirror index() order.
    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::swap(v[i - 1], v[static_cast<std::size_t>(index(i))]);
        }
    }

private:
    std::mt19937_64 gen_;
};

// Stream tags feed splitmix64 so sibling streams never overlap even when
// run seeds are consecutive integers.
enum class StreamTag : std::uint64_t {
    Topology = 0x746f706f,
    Churn = 0x63687572,
    Protocol = 0x70726f74,
};

inline Rng make_stream(std::uint64_t run_seed, StreamTag tag) {
    return Rng(splitmix64(run_seed ^ (static_cast<std::uint64_t>(tag) << 32)));
}

}  // namespace overlaymend
