#pragma once

// Seeded Brownian increments and matrix-valued martingale samples.
//
// Every stream is a pure function of (master_seed, path_index): the pair is
// mixed through splitmix64 into the seed of a std::mt19937_64 engine, so the
// order in which workers generate paths cannot change any value.
//
// Increments are rounded to the dyadic grid 2^-40. Sums of grid values are
// exact in double precision while partial sums stay below 2^12 in magnitude,
// so block sums (coarsening) are associative bit for bit and W(T) is the same
// number at every resolution.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <ostream>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "srb/linalg3.hpp"

namespace srb {

/// splitmix64 finalizer.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Seed of the stream for (master_seed, index).
constexpr std::uint64_t mix_seed(std::uint64_t master_seed, std::uint64_t index) {
  return splitmix64(splitmix64(master_seed) ^ (index * 0xD1B54A32D192ED03ULL + 0x8CB92BA72F3D8DD7ULL));
}

inline constexpr double kIncrementQuantum = 0x1p-40;

inline double quantize_increment(double x) { return std::nearbyint(x / kIncrementQuantum) * kIncrementQuantum; }

class NormalStream {
 public:
  explicit NormalStream(std::uint64_t seed) : engine_(seed) {}
  double operator()() { return dist_(engine_); }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> dist_{0.0, 1.0};
};

struct BrownianPath {
  std::uint64_t seed{0};
  std::uint64_t path_index{0};
  double dt{0.0};
  std::vector<double> increments;

  std::size_t size() const { return increments.size(); }
  double horizon() const { return dt * static_cast<double>(increments.size()); }
  /// W(T), summed left to right.
  double terminal() const {
    double w = 0.0;
    for (double d : increments) w += d;
    return w;
  }
};

inline BrownianPath generate_path(std::uint64_t master_seed, std::uint64_t path_index, std::size_t n_fine, double dt_fine) {
  if (n_fine < 1) throw std::invalid_argument("generate_path: n_fine must be >= 1");
  if (!(dt_fine > 0.0)) throw std::invalid_argument("generate_path: dt_fine must be > 0");
  BrownianPath p;
  p.seed = master_seed;
  p.path_index = path_index;
  p.dt = dt_fine;
  p.increments.resize(n_fine);
  NormalStream normal(mix_seed(master_seed, path_index));
  const double scale = std::sqrt(dt_fine);
  for (auto& d : p.increments) d = quantize_increment(scale * normal());
  return p;
}

/// Sums consecutive blocks of `factor` increments, left to right.
inline BrownianPath coarsen(const BrownianPath& path, std::size_t factor) {
  if (factor < 1 || path.size() % factor != 0)
    throw std::invalid_argument("coarsen: factor " + std::to_string(factor) + " does not divide path length " +
                                std::to_string(path.size()));
  if (factor == 1) return path;
  BrownianPath out;
  out.seed = path.seed;
  out.path_index = path.path_index;
  out.dt = path.dt * static_cast<double>(factor);
  out.increments.resize(path.size() / factor);
  for (std::size_t b = 0; b < out.increments.size(); ++b) {
    double s = 0.0;
    for (std::size_t i = 0; i < factor; ++i) s += path.increments[b * factor + i];
    out.increments[b] = s;
  }
  return out;
}

/// Raw increments as CSV rows `path_index,step_index,dW`.
inline void write_increments_csv(std::ostream& os, const std::vector<BrownianPath>& paths, bool header = true) {
  if (header) os << "path_index,step_index,dW\n";
  char buf[64];
  for (const auto& p : paths) {
    for (std::size_t i = 0; i < p.size(); ++i) {
      std::snprintf(buf, sizeof buf, "%.17g", p.increments[i]);
      os << p.path_index << ',' << i << ',' << buf << '\n';
    }
  }
}

enum class MartingaleMode { Full, Symmetric };

/// Random inertia perturbation T_s = epsilon * W with W an entrywise
/// Brownian matrix (optionally symmetrised).
struct MartingaleMatrixSpec {
  double epsilon{0.0};
  MartingaleMode mode{MartingaleMode::Symmetric};
  std::uint64_t seed{0};

  /// Copy whose stream belongs to the given Monte-Carlo path.
  MartingaleMatrixSpec for_path(std::uint64_t path_index) const {
    return {epsilon, mode, mix_seed(seed ^ 0x5A5A5A5A5A5A5A5AULL, path_index)};
  }
};

/// W(t_{index}) = prev + dW with dW drawn from the stream keyed by
/// (spec.seed, t_index): iid N(0, dt) entries, or their symmetric part.
inline Mat3 sample_inertia_perturbation(const MartingaleMatrixSpec& spec, std::uint64_t t_index, double dt, const Mat3& prev) {
  if (!(dt > 0.0)) throw std::invalid_argument("sample_inertia_perturbation: dt must be > 0");
  NormalStream normal(mix_seed(spec.seed, t_index));
  const double scale = std::sqrt(dt);
  Mat3 d;
  for (auto& x : d.a) x = quantize_increment(scale * normal());
  if (spec.mode == MartingaleMode::Symmetric) {
    for (std::size_t i = 0; i < 3; ++i)
      for (std::size_t j = i + 1; j < 3; ++j) {
        const double s = 0.5 * (d(i, j) + d(j, i));
        d(i, j) = s;
        d(j, i) = s;
      }
  }
  return prev + d;
}

/// Matrix martingale sampled at t_n = n dt, n = 0..size()-1, with W(0) = 0.
struct InertiaPath {
  double dt{0.0};
  std::vector<Mat3> values;

  std::size_t steps() const { return values.empty() ? 0 : values.size() - 1; }
};

inline InertiaPath generate_inertia_path(const MartingaleMatrixSpec& spec, std::size_t n_fine, double dt_fine) {
  InertiaPath p;
  p.dt = dt_fine;
  p.values.reserve(n_fine + 1);
  p.values.push_back(Mat3::zero());
  for (std::size_t n = 1; n <= n_fine; ++n) p.values.push_back(sample_inertia_perturbation(spec, n, dt_fine, p.values.back()));
  return p;
}

/// Subsamples every `factor`-th value; W at coarse times is bit-identical.
inline InertiaPath coarsen(const InertiaPath& path, std::size_t factor) {
  if (factor < 1 || path.steps() % factor != 0)
    throw std::invalid_argument("coarsen: factor " + std::to_string(factor) + " does not divide path length " +
                                std::to_string(path.steps()));
  InertiaPath out;
  out.dt = path.dt * static_cast<double>(factor);
  for (std::size_t i = 0; i < path.values.size(); i += factor) out.values.push_back(path.values[i]);
  return out;
}

}  // namespace srb
