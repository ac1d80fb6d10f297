#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "entrogd/bitmatrix.hpp"

namespace entrogd::cli {

/// Non-negative integer table of `value_bits`-bit values whose rows belong to
/// `clusters` latent groups: the high bits of every column are fixed by the
/// group, the low `noise_bits` are uniform noise. Used for scaling runs.
Table latent_cluster_table(std::size_t n, std::size_t d, std::uint64_t seed, std::size_t clusters = 8,
                           unsigned noise_bits = 8, unsigned value_bits = 63);

struct Mixture {
  Table table;
  std::vector<std::uint32_t> component;  // generating component per row
};

/// Isotropic Gaussian mixture (unit variance, means uniform in [-spread, spread]^d,
/// equal component weights), values rounded to `decimals` decimal places.
Mixture gaussian_mixture(std::size_t n, std::size_t d, std::size_t components, std::uint64_t seed,
                         int decimals = 3, double spread = 10.0);

/// Random table for round-trip testing: a mix of integer and float columns
/// with varied ranges, signs, decimal scales and occasional raw-bit floats.
Table random_table(std::size_t n, std::size_t d, std::uint64_t seed);

}  // namespace entrogd::cli
