#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace rdslab {

// splitmix64, used to derive independent seed streams from (seed, stream id)
// without shared state between Monte Carlo replicas.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t derive_stream(std::uint64_t seed, std::uint64_t stream) {
    return splitmix64(seed ^ splitmix64(stream + 0x632be59bd9b4e019ULL));
}

// mt19937_64 plus a hand-rolled Box-Muller. std::normal_distribution is not
// pinned by the standard, so outputs would differ across standard libraries;
// this generator is reproducible everywhere.
class GaussianRng {
public:
    explicit GaussianRng(std::uint64_t seed) : engine_(seed) {}

    GaussianRng(std::uint64_t seed, std::uint64_t stream)
        : engine_(derive_stream(seed, stream)) {}

    double uniform() {
        // 53-bit uniform in (0,1)
        const std::uint64_t u = engine_() >> 11;
        return (static_cast<double>(u) + 0.5) * (1.0 / 9007199254740992.0);
    }

    double gaussian() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        const double u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

    std::uint64_t raw() { return engine_(); }

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

} // namespace rdslab
