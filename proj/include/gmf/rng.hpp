#ifndef GMF_RNG_HPP
#define GMF_RNG_HPP

#include <array>
#include <cstdint>
#include <initializer_list>

namespace gmf {

// Counter-based random streams (Philox4x32-10, Salmon et al. 2011).
// A stream is identified by (seed, id path); draws with the same
// identifiers are bit-identical regardless of call order or thread count.

std::uint64_t mix64(std::uint64_t h, std::uint64_t v);

class RngStream {
public:
    RngStream(std::uint64_t seed, std::initializer_list<std::uint64_t> ids);
    RngStream(std::uint64_t seed, std::uint64_t stream_id);

    std::uint64_t bits();
    double uniform();  // (0, 1]
    double normal();   // standard normal, Box-Muller

    // Derives a 64-bit child seed; independent of this stream's draw state.
    static std::uint64_t derive_seed(std::uint64_t seed,
                                     std::initializer_list<std::uint64_t> ids);

private:
    void refill();

    std::array<std::uint32_t, 2> key_;
    std::uint64_t stream_;
    std::uint64_t block_ = 0;
    std::array<std::uint32_t, 4> buf_{};
    int buf_pos_ = 4;
    double spare_normal_ = 0.0;
    bool have_spare_ = false;
};

// Stream id tags; combined with indices via mix64.
namespace stream_tag {
inline constexpr std::uint64_t signal_noise = 0x01;
inline constexpr std::uint64_t observation_noise = 0x02;
inline constexpr std::uint64_t initial_draw = 0x03;
inline constexpr std::uint64_t particle_step = 0x04;
inline constexpr std::uint64_t branch_decision = 0x05;
inline constexpr std::uint64_t offspring_mean = 0x06;
inline constexpr std::uint64_t replicate = 0x07;
inline constexpr std::uint64_t generic = 0x08;
}  // namespace stream_tag

}  // namespace gmf

#endif
