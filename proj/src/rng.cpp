#include "gaugekit/rng.hpp"

#include <cmath>
#include <numbers>

#include "gaugekit/error.hpp"

namespace gaugekit {

namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
    const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
    hi = static_cast<std::uint32_t>(p >> 32);
    lo = static_cast<std::uint32_t>(p);
}

inline double to_open_unit(std::uint32_t a, std::uint32_t b) {
    const std::uint64_t bits = (static_cast<std::uint64_t>(a) << 32) | b;
    return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

}  // namespace

std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> c, std::array<std::uint32_t, 2> k) {
    for (int round = 0; round < 10; ++round) {
        if (round > 0) {
            k[0] += kWeyl0;
            k[1] += kWeyl1;
        }
        std::uint32_t hi0, lo0, hi1, lo1;
        mulhilo(kMul0, c[0], hi0, lo0);
        mulhilo(kMul1, c[2], hi1, lo1);
        c = {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
    }
    return c;
}

NoiseKind parse_noise_kind(const std::string& name) {
    if (name == "normal") return NoiseKind::normal;
    if (name == "uniform") return NoiseKind::uniform;
    if (name == "two_point") return NoiseKind::two_point;
    throw ValidationError("unknown noise kind '" + name + "' (expected normal, uniform or two_point)");
}

std::string to_string(NoiseKind kind) {
    switch (kind) {
        case NoiseKind::normal: return "normal";
        case NoiseKind::uniform: return "uniform";
        case NoiseKind::two_point: return "two_point";
    }
    return "normal";
}

std::array<std::uint32_t, 4> NoiseSource::block(std::uint64_t path, std::uint32_t asset, std::uint32_t step,
                                                std::uint32_t stream) const {
    // Path occupies 48 bits; the top 16 bits of the last word tag the stream.
    const std::array<std::uint32_t, 4> counter = {
        step, asset, static_cast<std::uint32_t>(path),
        static_cast<std::uint32_t>((path >> 32) & 0xFFFFu) | (stream << 16)};
    const std::array<std::uint32_t, 2> key = {static_cast<std::uint32_t>(seed_),
                                              static_cast<std::uint32_t>(seed_ >> 32)};
    return philox4x32(counter, key);
}

double NoiseSource::uniform(std::uint64_t path, std::uint32_t asset, std::uint32_t step, std::uint32_t stream) const {
    const auto r = block(path, asset, step, stream);
    return to_open_unit(r[0], r[1]);
}

double NoiseSource::draw(std::uint64_t path, std::uint32_t asset, std::uint32_t step, std::uint32_t stream) const {
    const auto r = block(path, asset, step, stream);
    const double u1 = to_open_unit(r[0], r[1]);
    switch (kind_) {
        case NoiseKind::normal: {
            const double u2 = to_open_unit(r[2], r[3]);
            return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
        }
        case NoiseKind::uniform:
            return std::numbers::sqrt3 * (2.0 * u1 - 1.0);
        case NoiseKind::two_point:
            return u1 < 0.5 ? -1.0 : 1.0;
    }
    return 0.0;
}

}  // namespace gaugekit
