#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace fockcat
{
//---------------------------------------------------------------------------//
/*!
 * Philox4x32-10 counter-based generator.
 *
 * A stream is identified by a 64-bit key (the master seed) and a 64-bit
 * stream id (trajectory, trace point, bootstrap resample...). Every stream
 * is a pure function of (seed, stream id), so parallel work produces the same
 * draws no matter how it is scheduled.
 *
 * Satisfies UniformRandomBitGenerator.
 */
class Philox4x32
{
  public:
    using result_type = std::uint32_t;

    Philox4x32(std::uint64_t seed, std::uint64_t stream)
        : key_{static_cast<std::uint32_t>(seed),
               static_cast<std::uint32_t>(seed >> 32)}
        , counter_{0u,
                   0u,
                   static_cast<std::uint32_t>(stream),
                   static_cast<std::uint32_t>(stream >> 32)}
    {
    }

    static constexpr result_type min() { return 0; }
    static constexpr result_type max()
    {
        return std::numeric_limits<result_type>::max();
    }

    result_type operator()()
    {
        if (index_ == 4)
        {
            block_ = generate(counter_, key_);
            increment();
            index_ = 0;
        }
        return block_[index_++];
    }

    //! Uniform double on the open interval (0, 1), 53-bit resolution.
    double uniform_open()
    {
        std::uint64_t hi = (*this)() >> 5;
        std::uint64_t lo = (*this)() >> 6;
        double u = (static_cast<double>(hi) * 67108864.0
                    + static_cast<double>(lo))
                   * (1.0 / 9007199254740992.0);
        return u > 0 ? u : 0.5 / 9007199254740992.0;
    }

  private:
    using Block = std::array<std::uint32_t, 4>;
    using Key = std::array<std::uint32_t, 2>;

    static constexpr std::uint32_t kMul0 = 0xD2511F53u;
    static constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
    static constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
    static constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

    static Block round(Block const& ctr, Key const& key)
    {
        std::uint64_t p0 = static_cast<std::uint64_t>(kMul0) * ctr[0];
        std::uint64_t p1 = static_cast<std::uint64_t>(kMul1) * ctr[2];
        return {static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ key[0],
                static_cast<std::uint32_t>(p1),
                static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ key[1],
                static_cast<std::uint32_t>(p0)};
    }

    static Block generate(Block ctr, Key key)
    {
        for (int i = 0; i < 10; ++i)
        {
            ctr = round(ctr, key);
            key[0] += kWeyl0;
            key[1] += kWeyl1;
        }
        return ctr;
    }

    void increment()
    {
        if (++counter_[0] == 0)
            ++counter_[1];
    }

    Key key_;
    Block counter_;
    Block block_{};
    int index_ = 4;
};

//! Derive an independent stream id for a nested index (e.g. point i of
//! trace j) so that different call sites do not share streams.
constexpr std::uint64_t substream(std::uint64_t domain, std::uint64_t index)
{
    // splitmix64 finalizer over the domain tag, then offset by index
    std::uint64_t z = domain + 0x9E3779B97F4A7C15ull;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    z ^= z >> 31;
    return (z << 20) ^ index;
}

}  // namespace fockcat
