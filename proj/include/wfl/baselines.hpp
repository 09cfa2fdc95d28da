#pragma once
// Weighted k-NN fingerprinting over a stored channel dictionary.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <random>
#include <vector>

#include "wfl/dataset.hpp"
#include "wfl/errors.hpp"
#include "wfl/parallel.hpp"

namespace wfl {

/// 2|G| + 2 N_a N_s |G| real scalars: locations plus complex channels.
inline std::uint64_t fingerprint_scalar_count(std::uint64_t n, std::uint64_t antennas,
                                              std::uint64_t freqs) {
  return 2 * n + 2 * antennas * freqs * n;
}

class FingerprintDB {
 public:
  FingerprintDB() = default;
  explicit FingerprintDB(Dataset data) : data_(std::move(data)) {
    if (data_.locations.size() != data_.channels.size())
      throw DimensionMismatch("FingerprintDB: locations and channels differ in count");
  }

  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }
  const Dataset& data() const { return data_; }
  std::size_t antennas() const { return data_.antennas; }
  std::size_t freqs() const { return data_.freqs; }

  std::uint64_t scalar_count() const {
    return fingerprint_scalar_count(size(), data_.antennas, data_.freqs);
  }

  /// Uniform random subset of n records (without replacement).
  FingerprintDB subsample(std::size_t n, std::uint64_t seed) const {
    if (n > size()) throw InvalidArgument("FingerprintDB::subsample: n exceeds database size");
    std::vector<std::size_t> idx(size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::mt19937_64 rng(seed);
    for (std::size_t i = 0; i < n; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, idx.size() - 1);
      std::swap(idx[i], idx[pick(rng)]);
    }
    idx.resize(n);
    return FingerprintDB(data_.subset(idx));
  }

 private:
  Dataset data_;
};

inline std::uint64_t fingerprint_memory_bits(std::uint64_t n, std::uint64_t antennas,
                                             std::uint64_t freqs, int float_bits) {
  if (float_bits != 32 && float_bits != 64)
    throw InvalidArgument("fingerprint_memory_bits: float_bits must be 32 or 64");
  return fingerprint_scalar_count(n, antennas, freqs) * static_cast<std::uint64_t>(float_bits);
}

inline std::uint64_t fingerprint_memory_bits(const FingerprintDB& db, int float_bits) {
  return fingerprint_memory_bits(db.size(), db.antennas(), db.freqs(), float_bits);
}

struct KnnResult {
  Vec2 estimate;
  std::vector<std::size_t> neighbors;  // ascending distance
  std::vector<double> weights;         // sum to 1
  bool exact_match{false};
};

/// k nearest fingerprints under e_i = |H - H_i|_F^2 / |H|_F^2, weighted by
/// 1/e_i normalized to sum 1. A fingerprint with e_i < 1e-12 is returned as is.
inline KnnResult knn_query(const ChannelMatrix& h, const FingerprintDB& db, std::size_t k) {
  if (db.empty()) throw InvalidArgument("knn_localize: empty database");
  if (k < 1 || k > db.size()) throw InvalidArgument("knn_localize: k must be in [1, |db|]");
  const double ref = h.frobenius_sq();
  if (!(ref > 0.0)) throw DegenerateChannel("knn_localize: zero-norm query channel");
  const auto& ds = db.data();
  std::vector<double> e(db.size());
  for (std::size_t i = 0; i < db.size(); ++i) {
    const double d = frobenius_distance(h, ds.channels[i]);
    e[i] = d * d / ref;
  }
  std::vector<std::size_t> idx(db.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  auto cmp = [&](std::size_t a, std::size_t b) { return e[a] < e[b] || (e[a] == e[b] && a < b); };
  std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(k), idx.end(), cmp);
  idx.resize(k);

  KnnResult r;
  r.neighbors = idx;
  if (e[idx.front()] < 1e-12) {
    r.exact_match = true;
    r.estimate = ds.locations[idx.front()];
    r.weights.assign(k, 0.0);
    r.weights.front() = 1.0;
    return r;
  }
  double wsum = 0.0;
  r.weights.resize(k);
  for (std::size_t i = 0; i < k; ++i) {
    r.weights[i] = 1.0 / e[idx[i]];
    wsum += r.weights[i];
  }
  for (std::size_t i = 0; i < k; ++i) {
    r.weights[i] /= wsum;
    r.estimate += ds.locations[idx[i]] * r.weights[i];
  }
  return r;
}

inline Vec2 knn_localize(const ChannelMatrix& h, const FingerprintDB& db, std::size_t k) {
  return knn_query(h, db, k).estimate;
}

struct ScalingPoint {
  std::size_t db_size{0};
  double median_error{0.0};
};

inline double median_of(std::vector<double> v) {
  if (v.empty()) throw InvalidArgument("median_of: empty sequence");
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

/// Median k-NN error at each database size; each size is a seeded uniform
/// subsample of `full`.
inline std::vector<ScalingPoint> knn_error_scaling(const std::vector<std::size_t>& db_sizes,
                                                   const FingerprintDB& full, const Dataset& eval,
                                                   std::size_t k = 1, std::uint64_t seed = 0) {
  for (std::size_t i = 1; i < db_sizes.size(); ++i)
    if (db_sizes[i] <= db_sizes[i - 1])
      throw InvalidArgument("knn_error_scaling: sizes must be strictly increasing");
  if (eval.empty()) throw InvalidArgument("knn_error_scaling: empty evaluation set");
  std::vector<ScalingPoint> out;
  for (std::size_t s = 0; s < db_sizes.size(); ++s) {
    const FingerprintDB db =
        db_sizes[s] == full.size() ? full : full.subsample(db_sizes[s], seed + s);
    std::vector<double> err(eval.size());
    parallel_for(eval.size(), [&](std::size_t i) {
      err[i] = distance(knn_localize(eval.channels[i], db, std::min(k, db.size())), eval.locations[i]);
    });
    out.push_back({db_sizes[s], median_of(err)});
  }
  return out;
}

/// Least-squares slope of log(median error) against log(db size).
inline double loglog_slope(const std::vector<ScalingPoint>& pts) {
  if (pts.size() < 2) throw InvalidArgument("loglog_slope: need at least two points");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (const auto& p : pts) {
    if (!(p.median_error > 0.0)) throw InvalidArgument("loglog_slope: nonpositive median error");
    const double x = std::log(static_cast<double>(p.db_size));
    const double y = std::log(p.median_error);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double n = static_cast<double>(pts.size());
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace wfl
