#pragma once

#include <cmath>
#include <memory>
#include <string>
#include <vector>

#include "geofuse/errors.hpp"
#include "geofuse/splitmix.hpp"

namespace geofuse {

constexpr int kLocationEmbeddingDim = 256;

/// Frozen coordinate-to-embedding module. A frozen encoder is referentially
/// transparent: identical (lat, lon) must give bitwise-identical output.
class LocationEncoder {
public:
  virtual ~LocationEncoder() = default;
  virtual std::vector<double> encode(double lat_deg, double lon_deg) const = 0;
  virtual bool frozen() const = 0;
  virtual std::string descriptor() const = 0;
};

/// Deterministic stand-in for a pretrained location encoder. Each output
/// entry is a low-frequency harmonic of the unit-sphere position, so nearby
/// coordinates embed near each other while far-apart ones decorrelate.
/// Entry pair (2m, 2m+1) = (cos u_m, sin u_m) with u_m a seeded integer
/// combination of (x, y, z); the vector is unit-normalized.
inline std::vector<double> encode_location_stub(double lat_deg, double lon_deg, uint64_t seed) {
  if (!(lat_deg >= -90.0 && lat_deg <= 90.0))
    throw parameter_error("encode_location_stub: latitude out of [-90, 90]");
  if (!(lon_deg > -180.0 && lon_deg <= 180.0))
    throw parameter_error("encode_location_stub: longitude out of (-180, 180]");

  constexpr double deg = 3.14159265358979323846 / 180.0;
  double lat = lat_deg * deg;
  double lon = lon_deg * deg;
  double x = std::cos(lat) * std::cos(lon);
  double y = std::cos(lat) * std::sin(lon);
  double z = std::sin(lat);

  SplitMix64 rng(seed);
  std::vector<double> e(kLocationEmbeddingDim);
  double norm2 = 0.0;
  for (int m = 0; m < kLocationEmbeddingDim / 2; ++m) {
    double a = static_cast<double>(1 + rng.bounded(6)) * (rng.bounded(2) ? 1.0 : -1.0);
    double b = static_cast<double>(1 + rng.bounded(6)) * (rng.bounded(2) ? 1.0 : -1.0);
    double c = static_cast<double>(1 + rng.bounded(6)) * (rng.bounded(2) ? 1.0 : -1.0);
    double u = a * x + b * y + c * z;
    e[2 * m] = std::cos(u);
    e[2 * m + 1] = std::sin(u);
    norm2 += e[2 * m] * e[2 * m] + e[2 * m + 1] * e[2 * m + 1];
  }
  double inv = 1.0 / std::sqrt(norm2);
  for (double& v : e) v *= inv;
  return e;
}

class StubLocationEncoder : public LocationEncoder {
public:
  explicit StubLocationEncoder(uint64_t seed) : seed_(seed) {}

  std::vector<double> encode(double lat_deg, double lon_deg) const override {
    return encode_location_stub(lat_deg, lon_deg, seed_);
  }
  bool frozen() const override { return true; }
  std::string descriptor() const override {
    return "harmonic-stub-v1 seed=" + std::to_string(seed_);
  }

private:
  uint64_t seed_;
};

}  // namespace geofuse
