#include "isaclab/rng.hpp"

#include <cmath>

namespace isac {

namespace {
std::mt19937_64 make_engine(std::uint64_t seed, const std::vector<std::uint64_t>& ids) {
    std::vector<std::uint32_t> words;
    auto push = [&](std::uint64_t v) {
        words.push_back(static_cast<std::uint32_t>(v & 0xffffffffu));
        words.push_back(static_cast<std::uint32_t>(v >> 32));
    };
    push(seed);
    push(ids.size());
    for (auto id : ids) push(id);
    std::seed_seq seq(words.begin(), words.end());
    return std::mt19937_64(seq);
}
}  // namespace

RngStream::RngStream(std::uint64_t seed, std::initializer_list<std::uint64_t> ids)
    : RngStream(seed, std::vector<std::uint64_t>(ids)) {}

RngStream::RngStream(std::uint64_t seed, std::vector<std::uint64_t> ids)
    : seed_(seed), ids_(std::move(ids)), engine_(make_engine(seed_, ids_)) {}

RngStream RngStream::fork(std::uint64_t id) const {
    auto child = ids_;
    child.push_back(id);
    return RngStream(seed_, std::move(child));
}

double RngStream::uniform(double lo, double hi) {
    std::uniform_real_distribution<double> dist(lo, hi);
    return dist(engine_);
}

double RngStream::normal() { return normal_(engine_); }

std::complex<double> RngStream::complex_normal(double variance) {
    const double s = std::sqrt(variance / 2.0);
    const double re = normal();
    const double im = normal();
    return {s * re, s * im};
}

}  // namespace isac
