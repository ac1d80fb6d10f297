#include "entrogd/cli/synthetic.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "entrogd/error.hpp"

namespace entrogd::cli {

namespace {

// Portable across standard libraries, unlike the <random> distributions.
double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t bound) {
  return static_cast<std::uint64_t>(uniform01(rng) * static_cast<double>(bound)) % bound;
}

double standard_normal(std::mt19937_64& rng) {
  double u1 = 0.0;
  while (u1 == 0.0) u1 = uniform01(rng);
  double u2 = uniform01(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace

Table latent_cluster_table(std::size_t n, std::size_t d, std::uint64_t seed, std::size_t clusters,
                           unsigned noise_bits, unsigned value_bits) {
  if (noise_bits == 0 || noise_bits >= value_bits || value_bits > 63)
    throw InvalidArgument("latent_cluster_table: need 0 < noise_bits < value_bits <= 63");
  const unsigned cluster_bits = value_bits - noise_bits;
  std::mt19937_64 rng(seed);
  std::vector<std::int64_t> centers(clusters * d);
  for (auto& c : centers) c = static_cast<std::int64_t>(rng() >> (64 - cluster_bits));
  std::vector<std::vector<std::int64_t>> cols(d, std::vector<std::int64_t>(n));
  for (std::size_t r = 0; r < n; ++r) {
    auto z = uniform_below(rng, clusters);
    for (std::size_t c = 0; c < d; ++c) {
      auto noise = static_cast<std::int64_t>(rng() >> (64 - noise_bits));
      cols[c][r] = (centers[z * d + c] << noise_bits) | noise;
    }
  }
  std::vector<Column> out;
  for (std::size_t c = 0; c < d; ++c) {
    auto prec = value_bits <= 31 ? Precision::Bits32 : Precision::Bits64;
    out.push_back(Column::integers("x" + std::to_string(c), std::move(cols[c]), prec));
  }
  return Table(std::move(out));
}

Mixture gaussian_mixture(std::size_t n, std::size_t d, std::size_t components, std::uint64_t seed, int decimals,
                         double spread) {
  std::mt19937_64 rng(seed);
  std::vector<double> means(components * d);
  for (auto& m : means) m = (2.0 * uniform01(rng) - 1.0) * spread;
  const double scale = std::pow(10.0, decimals);
  Mixture mix;
  mix.component.resize(n);
  std::vector<std::vector<double>> cols(d, std::vector<double>(n));
  for (std::size_t r = 0; r < n; ++r) {
    auto z = uniform_below(rng, components);
    mix.component[r] = static_cast<std::uint32_t>(z);
    for (std::size_t c = 0; c < d; ++c) {
      double v = means[z * d + c] + standard_normal(rng);
      cols[c][r] = std::nearbyint(v * scale) / scale + 0.0;  // no -0.0
    }
  }
  std::vector<Column> out;
  for (std::size_t c = 0; c < d; ++c) out.push_back(Column::floats("x" + std::to_string(c), std::move(cols[c])));
  mix.table = Table(std::move(out));
  return mix;
}

Table random_table(std::size_t n, std::size_t d, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<Column> out;
  for (std::size_t c = 0; c < d; ++c) {
    std::string name = "c" + std::to_string(c);
    switch (rng() % 5) {
      case 0: {  // small signed integers
        std::vector<std::int64_t> v(n);
        auto range = 1 + uniform_below(rng, 1000);
        for (auto& x : v) x = static_cast<std::int64_t>(uniform_below(rng, range)) - static_cast<std::int64_t>(range / 2);
        out.push_back(Column::integers(name, std::move(v), Precision::Bits32));
        break;
      }
      case 1: {  // full-range 64-bit integers
        std::vector<std::int64_t> v(n);
        for (auto& x : v) x = static_cast<std::int64_t>(rng());
        out.push_back(Column::integers(name, std::move(v)));
        break;
      }
      case 2: {  // decimals at a random scale
        int k = static_cast<int>(rng() % 5);
        double s = std::pow(10.0, k);
        std::vector<double> v(n);
        for (auto& x : v) x = std::nearbyint((uniform01(rng) - 0.5) * 2000.0 * s) / s;
        out.push_back(Column::floats(name, std::move(v)));
        break;
      }
      case 3: {  // arbitrary doubles, forcing raw-bit encoding
        std::vector<double> v(n);
        for (auto& x : v) x = standard_normal(rng) * 1e3;
        out.push_back(Column::floats(name, std::move(v)));
        break;
      }
      default: {  // single-precision values
        std::vector<double> v(n);
        for (auto& x : v) x = static_cast<float>(standard_normal(rng));
        out.push_back(Column::floats(name, std::move(v), Precision::Bits32));
        break;
      }
    }
  }
  return Table(std::move(out));
}

}  // namespace entrogd::cli
