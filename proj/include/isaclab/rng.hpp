#pragma once

#include <complex>
#include <cstdint>
#include <initializer_list>
#include <random>
#include <vector>

namespace isac {

// Seeded random stream. Identical (seed, ids) always reproduce the same
// sequence; fork() derives an independent child stream from an extra id, so
// experiments can hand every (point, draw, purpose) its own stream.
class RngStream {
public:
    explicit RngStream(std::uint64_t seed, std::initializer_list<std::uint64_t> ids = {});
    RngStream(std::uint64_t seed, std::vector<std::uint64_t> ids);

    RngStream fork(std::uint64_t id) const;

    std::uint64_t seed() const { return seed_; }
    const std::vector<std::uint64_t>& ids() const { return ids_; }

    double uniform(double lo, double hi);
    double normal();
    // Circularly-symmetric complex Gaussian with E|z|^2 = variance.
    std::complex<double> complex_normal(double variance = 1.0);

    std::mt19937_64& engine() { return engine_; }

private:
    std::uint64_t seed_;
    std::vector<std::uint64_t> ids_;
    std::mt19937_64 engine_;
    std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace isac
