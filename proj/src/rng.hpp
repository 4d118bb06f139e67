#ifndef SOFTPOU_RNG_HPP
#define SOFTPOU_RNG_HPP

#include <cmath>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace softpou {

// splitmix64, used to seed and to derive independent per-task streams.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// xoshiro256** — deterministic across platforms, unlike std:: distributions.
class Rng {
public:
    explicit Rng(std::uint64_t seed) {
        std::uint64_t sm = seed;
        for (auto& s : state_) s = splitmix64(sm);
    }
    // Stream derived from (seed, index); used by parallel sweeps.
    Rng(std::uint64_t seed, std::uint64_t index)
        : Rng(seed ^ (0xd1342543de82ef95ULL * (index + 1))) {}

    std::uint64_t next_u64() {
        const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    // Uniform in [0, 1).
    double uniform01() { return double(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    std::size_t index(std::size_t n) { return std::size_t(next_u64() % n); }

    // Box-Muller.
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = uniform01();
        while (u1 <= 0.0) u1 = uniform01();
        const double u2 = uniform01();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * std::numbers::pi * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
    std::uint64_t state_[4] = {};
    double spare_ = 0.0;
    bool have_spare_ = false;
};

// Sobol sequence (gray-code construction) for up to 8 dimensions; direction
// numbers from the classic Joe-Kuo table. The optional seed applies a digital
// shift so different seeds give different (still low-discrepancy) point sets.
class Sobol {
public:
    Sobol(std::size_t dim, std::uint64_t seed = 0);
    std::vector<double> next();
    static constexpr std::size_t max_dim = 8;

private:
    std::size_t dim_;
    std::uint64_t index_ = 0;
    std::vector<std::uint32_t> x_;
    std::vector<std::uint32_t> shift_;
    std::vector<std::vector<std::uint32_t>> v_; // per-dim direction numbers
};

inline Sobol::Sobol(std::size_t dim, std::uint64_t seed) : dim_(dim) {
    if (dim == 0 || dim > max_dim)
        throw std::invalid_argument("Sobol: dimension must be in [1, 8]");
    struct Def { std::uint32_t s, a; std::uint32_t m[5]; };
    // dims 2..8 (dim 1 is van der Corput)
    static const Def defs[7] = {
        {1, 0, {1, 0, 0, 0, 0}},  {2, 1, {1, 3, 0, 0, 0}},  {3, 1, {1, 3, 1, 0, 0}},
        {3, 2, {1, 1, 1, 0, 0}},  {4, 1, {1, 1, 3, 3, 0}},  {4, 4, {1, 3, 5, 13, 0}},
        {5, 2, {1, 1, 5, 5, 17}},
    };
    constexpr int bits = 32;
    v_.assign(dim_, std::vector<std::uint32_t>(bits));
    for (int k = 0; k < bits; ++k) v_[0][k] = 1u << (31 - k);
    for (std::size_t d = 1; d < dim_; ++d) {
        const Def& def = defs[d - 1];
        const std::uint32_t s = def.s;
        std::vector<std::uint32_t> m(bits);
        for (std::uint32_t k = 0; k < s; ++k) m[k] = def.m[k];
        for (int k = int(s); k < bits; ++k) {
            std::uint32_t val = m[k - s] ^ (m[k - s] << s);
            for (std::uint32_t j = 1; j < s; ++j)
                if ((def.a >> (s - 1 - j)) & 1u) val ^= m[k - j] << j;
            m[k] = val;
        }
        for (int k = 0; k < bits; ++k) v_[d][k] = m[k] << (31 - k);
    }
    x_.assign(dim_, 0);
    shift_.assign(dim_, 0);
    if (seed != 0) {
        std::uint64_t sm = seed;
        for (auto& s : shift_) s = std::uint32_t(splitmix64(sm) >> 32);
    }
}

inline std::vector<double> Sobol::next() {
    std::vector<double> out(dim_);
    if (index_ > 0) {
        std::uint64_t c = index_ - 1; // gray-code step: lowest zero bit of previous index
        int k = 0;
        while (c & 1) { c >>= 1; ++k; }
        for (std::size_t d = 0; d < dim_; ++d) x_[d] ^= v_[d][k];
    }
    for (std::size_t d = 0; d < dim_; ++d)
        out[d] = double(x_[d] ^ shift_[d]) * 0x1.0p-32;
    ++index_;
    return out;
}

} // namespace softpou

#endif
