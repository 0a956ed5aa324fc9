#include "gmf/rng.hpp"

#include <cmath>

namespace gmf {

namespace {

constexpr std::uint32_t kPhiloxW32A = 0x9E3779B9u;
constexpr std::uint32_t kPhiloxW32B = 0xBB67AE85u;
constexpr std::uint32_t kPhiloxM4x32A = 0xD2511F53u;
constexpr std::uint32_t kPhiloxM4x32B = 0xCD9E8D57u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi,
                    std::uint32_t& lo) {
    std::uint64_t p = static_cast<std::uint64_t>(a) * b;
    hi = static_cast<std::uint32_t>(p >> 32);
    lo = static_cast<std::uint32_t>(p);
}

std::array<std::uint32_t, 4> philox10(std::array<std::uint32_t, 4> ctr,
                                      std::array<std::uint32_t, 2> key) {
    for (int round = 0; round < 10; ++round) {
        std::uint32_t hi0, lo0, hi1, lo1;
        mulhilo(kPhiloxM4x32A, ctr[0], hi0, lo0);
        mulhilo(kPhiloxM4x32B, ctr[2], hi1, lo1);
        ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
        key[0] += kPhiloxW32A;
        key[1] += kPhiloxW32B;
    }
    return ctr;
}

}  // namespace

std::uint64_t mix64(std::uint64_t h, std::uint64_t v) {
    // splitmix64 finalizer over the running hash
    std::uint64_t z = h + 0x9E3779B97F4A7C15ull + v;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream_id)
    : key_{static_cast<std::uint32_t>(seed),
           static_cast<std::uint32_t>(seed >> 32)},
      stream_(stream_id) {}

RngStream::RngStream(std::uint64_t seed,
                     std::initializer_list<std::uint64_t> ids)
    : RngStream(seed, [&] {
          std::uint64_t h = 0x6A09E667F3BCC909ull;
          for (std::uint64_t id : ids) h = mix64(h, id);
          return h;
      }()) {}

std::uint64_t RngStream::derive_seed(std::uint64_t seed,
                                     std::initializer_list<std::uint64_t> ids) {
    std::uint64_t h = mix64(0xA54FF53A5F1D36F1ull, seed);
    for (std::uint64_t id : ids) h = mix64(h, id);
    return h;
}

void RngStream::refill() {
    std::array<std::uint32_t, 4> ctr = {
        static_cast<std::uint32_t>(block_),
        static_cast<std::uint32_t>(block_ >> 32),
        static_cast<std::uint32_t>(stream_),
        static_cast<std::uint32_t>(stream_ >> 32)};
    buf_ = philox10(ctr, key_);
    ++block_;
    buf_pos_ = 0;
}

std::uint64_t RngStream::bits() {
    if (buf_pos_ > 2) refill();
    std::uint64_t lo = buf_[buf_pos_];
    std::uint64_t hi = buf_[buf_pos_ + 1];
    buf_pos_ += 2;
    return (hi << 32) | lo;
}

double RngStream::uniform() {
    // (0, 1]: never returns 0, so log() below is safe
    return (static_cast<double>(bits() >> 11) + 1.0) * 0x1.0p-53;
}

double RngStream::normal() {
    if (have_spare_) {
        have_spare_ = false;
        return spare_normal_;
    }
    double u1 = uniform();
    double u2 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    double theta = 2.0 * M_PI * u2;
    spare_normal_ = r * std::sin(theta);
    have_spare_ = true;
    return r * std::cos(theta);
}

}  // namespace gmf
