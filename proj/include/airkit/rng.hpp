// Counter-based random number generation (Philox4x32-10).
//
// Every draw is addressed by (seed, stream, index, slot), so sample blocks
// can be generated in any order or in parallel and still produce identical
// output. Streams separate purposes (tx symbols, noise, phase, splits) and
// batches; the layout is documented at each call site.
#pragma once

#include <array>
#include <cstdint>
#include <utility>

namespace airkit {

// Philox4x32-10 block cipher core. Reference: Salmon et al., "Parallel
// random numbers: as easy as 1, 2, 3" (SC'11). Known-answer vectors are
// frozen in the unit tests.
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key);

// Random access into one Philox stream. A block is selected by
// (index, slot); each block yields four 32-bit words.
class CounterRng {
  public:
    CounterRng(std::uint64_t seed, std::uint32_t stream)
        : key_{static_cast<std::uint32_t>(seed),
               static_cast<std::uint32_t>(seed >> 32)},
          stream_(stream) {}

    std::array<std::uint32_t, 4> block(std::uint64_t index, std::uint32_t slot) const {
        return philox4x32({static_cast<std::uint32_t>(index),
                           static_cast<std::uint32_t>(index >> 32), slot, stream_},
                          key_);
    }

    // Two independent 64-bit values from one block.
    std::pair<std::uint64_t, std::uint64_t> bits64x2(std::uint64_t index,
                                                     std::uint32_t slot) const {
        const auto b = block(index, slot);
        return {(static_cast<std::uint64_t>(b[1]) << 32) | b[0],
                (static_cast<std::uint64_t>(b[3]) << 32) | b[2]};
    }

    // Uniform in [0,1), 53-bit resolution.
    double uniform01(std::uint64_t index, std::uint32_t slot) const {
        return to_unit(bits64x2(index, slot).first);
    }

    // Uniform integer in [0, m) for power-of-two m.
    std::uint32_t uniform_pow2(std::uint64_t index, std::uint32_t slot,
                               std::uint32_t m) const {
        return block(index, slot)[0] & (m - 1u);
    }

    // Two independent standard normal values (Box-Muller) from one block.
    std::pair<double, double> gaussian_pair(std::uint64_t index,
                                            std::uint32_t slot) const;

    static double to_unit(std::uint64_t bits) {
        return static_cast<double>(bits >> 11) * 0x1.0p-53;
    }

  private:
    std::array<std::uint32_t, 2> key_;
    std::uint32_t stream_;
};

// Sequential convenience wrapper (shuffles, one-off draws). Consumes blocks
// of its own CounterRng in index order.
class SequentialRng {
  public:
    SequentialRng(std::uint64_t seed, std::uint32_t stream) : rng_(seed, stream) {}

    std::uint64_t next_u64() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        auto [a, b] = rng_.bits64x2(index_++, 0);
        spare_ = b;
        have_spare_ = true;
        return a;
    }

    // Unbiased uniform integer in [0, n) via rejection.
    std::uint64_t next_below(std::uint64_t n);

  private:
    CounterRng rng_;
    std::uint64_t index_ = 0;
    std::uint64_t spare_ = 0;
    bool have_spare_ = false;
};

// Fisher-Yates shuffle with a dedicated stream; deterministic given the seed.
template <typename T>
void seeded_shuffle(T* data, std::size_t n, std::uint64_t seed, std::uint32_t stream) {
    SequentialRng rng(seed, stream);
    for (std::size_t i = n; i > 1; --i) {
        const std::size_t j = static_cast<std::size_t>(rng.next_below(i));
        std::swap(data[i - 1], data[j]);
    }
}

}  // namespace airkit
