#pragma once

#include <array>
#include <cstdint>
#include <string>

namespace gaugekit {

/// Philox4x32-10 counter-based generator (Salmon et al., Random123). Output is
/// a pure function of (key, counter), which is what makes simulation results
/// independent of how paths are split across threads.
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter, std::array<std::uint32_t, 2> key);

/// Zero-mean, unit-variance noise laws for the price increments.
enum class NoiseKind { normal, uniform, two_point };

NoiseKind parse_noise_kind(const std::string& name);
std::string to_string(NoiseKind kind);

/// Stateless noise stream keyed by a 64-bit seed. draw() is deterministic in
/// (path, asset, step, stream).
class NoiseSource {
public:
    NoiseSource(std::uint64_t seed, NoiseKind kind) : seed_(seed), kind_(kind) {}

    double draw(std::uint64_t path, std::uint32_t asset, std::uint32_t step, std::uint32_t stream = 0) const;
    /// Uniform on the open interval (0, 1).
    double uniform(std::uint64_t path, std::uint32_t asset, std::uint32_t step, std::uint32_t stream = 0) const;

    std::uint64_t seed() const noexcept { return seed_; }
    NoiseKind kind() const noexcept { return kind_; }

private:
    std::array<std::uint32_t, 4> block(std::uint64_t path, std::uint32_t asset, std::uint32_t step,
                                       std::uint32_t stream) const;

    std::uint64_t seed_;
    NoiseKind kind_;
};

}  // namespace gaugekit
