#pragma once

#include <cmath>
#include <cstdint>
#include <span>

namespace w2lab {

// Counter-based generator: every draw is a pure function of
// (seed, domain, stream, step, lane), so chains can run in any order or in
// parallel and still produce bitwise-identical output.
//
// Domains keep independent consumers (sampler noise, target sampling,
// perturbation directions, sliced-W2 projections) off each other's streams.
enum class RngDomain : std::uint32_t {
    sampler_noise = 0,
    target_sampling = 1,
    perturbation_direction = 2,
    sliced_projections = 3,
};

struct Philox4x32 {
    std::uint32_t key0, key1;

    explicit Philox4x32(std::uint64_t seed)
        : key0(static_cast<std::uint32_t>(seed)), key1(static_cast<std::uint32_t>(seed >> 32)) {}

    // 10-round Philox4x32 block function.
    void block(std::uint32_t c0, std::uint32_t c1, std::uint32_t c2, std::uint32_t c3,
               std::uint32_t out[4]) const {
        std::uint32_t k0 = key0, k1 = key1;
        for (int r = 0; r < 10; ++r) {
            if (r > 0) {
                k0 += 0x9E3779B9u;
                k1 += 0xBB67AE85u;
            }
            const std::uint64_t p0 = std::uint64_t{0xD2511F53u} * c0;
            const std::uint64_t p1 = std::uint64_t{0xCD9E8D57u} * c2;
            const std::uint32_t hi0 = static_cast<std::uint32_t>(p0 >> 32);
            const std::uint32_t lo0 = static_cast<std::uint32_t>(p0);
            const std::uint32_t hi1 = static_cast<std::uint32_t>(p1 >> 32);
            const std::uint32_t lo1 = static_cast<std::uint32_t>(p1);
            c0 = hi1 ^ c1 ^ k0;
            c1 = lo1;
            c2 = hi0 ^ c3 ^ k1;
            c3 = lo0;
        }
        out[0] = c0;
        out[1] = c1;
        out[2] = c2;
        out[3] = c3;
    }
};

inline double uint64_to_unit_open(std::uint64_t v) {
    // (0,1), 53 significant bits, never exactly 0 or 1
    return (static_cast<double>(v >> 11) + 0.5) * 0x1.0p-53;
}

/// One logical stream of i.i.d. N(0,1) draws, indexed by (step, lane).
class NormalStream {
public:
    NormalStream(std::uint64_t seed, RngDomain domain, std::uint32_t stream)
        : philox_(seed), domain_(static_cast<std::uint32_t>(domain)), stream_(stream) {}

    /// Fills `out` with the normals of the given step index.
    void fill(std::uint32_t step, std::span<double> out) const {
        std::uint32_t blk = 0;
        std::size_t i = 0;
        while (i < out.size()) {
            double z0, z1;
            normal_pair(step, blk++, z0, z1);
            out[i++] = z0;
            if (i < out.size()) out[i++] = z1;
        }
    }

    void normal_pair(std::uint32_t step, std::uint32_t blk, double& z0, double& z1) const {
        std::uint32_t w[4];
        philox_.block(domain_, stream_, step, blk, w);
        const double u1 = uint64_to_unit_open((std::uint64_t{w[0]} << 32) | w[1]);
        const double u2 = uint64_to_unit_open((std::uint64_t{w[2]} << 32) | w[3]);
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * 3.14159265358979323846 * u2;
        z0 = r * std::cos(a);
        z1 = r * std::sin(a);
    }

    /// Uniform in (0,1) at (step, lane); independent of the normal draws
    /// only across distinct (step, lane) pairs.
    double uniform(std::uint32_t step, std::uint32_t lane) const {
        std::uint32_t w[4];
        philox_.block(domain_, stream_, step, 0x80000000u | lane, w);
        return uint64_to_unit_open((std::uint64_t{w[0]} << 32) | w[1]);
    }

private:
    Philox4x32 philox_;
    std::uint32_t domain_;
    std::uint32_t stream_;
};

}  // namespace w2lab
