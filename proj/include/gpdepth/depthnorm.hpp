#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "gpdepth/core.hpp"

namespace gpdepth {

inline constexpr double kSigmaFloor = 1e-6;

struct SsiStats {
  double mu = 0.0;     // median
  double sigma = 0.0;  // mean absolute deviation from the median, floored
};

/// Depth-space affine map a * D + b.
struct AffineCoeffs {
  double a = 1.0;
  double b = 0.0;
};

namespace detail {

inline std::vector<double> gather(const DepthMap& d, const Mask& m) {
  std::vector<double> out;
  out.reserve(d.values.size());
  for (std::size_t i = 0; i < d.values.size(); ++i)
    if (m[i]) out.push_back(d.values[i]);
  return out;
}

// Median of a copy; even counts average the central pair.
inline double median(std::vector<double> v) {
  if (v.empty()) throw DataError("median of an empty set");
  const std::size_t n = v.size();
  const auto mid = v.begin() + static_cast<std::ptrdiff_t>(n / 2);
  std::nth_element(v.begin(), mid, v.end());
  const double hi = *mid;
  if (n % 2 == 1) return hi;
  const double lo = *std::max_element(v.begin(), mid);
  return 0.5 * (lo + hi);
}

inline SsiStats stats_of(const std::vector<double>& v) {
  SsiStats s;
  s.mu = median(v);
  double acc = 0.0;
  for (double x : v) acc += std::abs(x - s.mu);
  s.sigma = std::max(acc / static_cast<double>(v.size()), kSigmaFloor);
  return s;
}

inline Mask intersection(const DepthMap& a, const DepthMap& b) {
  if (a.width != b.width || a.height != b.height) throw DataError("depth maps differ in size");
  return mask_and(a.mask, b.mask);
}

}  // namespace detail

inline double median_of(const DepthMap& d) { return detail::median(detail::gather(d, d.mask)); }

inline SsiStats ssi_stats(const DepthMap& d) {
  if (d.count_valid() == 0) throw DataError("ssi_stats: empty mask");
  return detail::stats_of(detail::gather(d, d.mask));
}

/// (D - mu) / sigma on valid pixels; invalid pixels are left at 0.
inline DepthMap ssi_normalize(const DepthMap& d, const SsiStats& s) {
  if (!(s.sigma > 0.0)) throw DomainError("ssi_normalize: sigma must be positive");
  DepthMap out = d;
  for (std::size_t i = 0; i < out.values.size(); ++i)
    out.values[i] = out.mask[i] ? (d.values[i] - s.mu) / s.sigma : 0.0;
  return out;
}

/// Mean absolute difference of the normalized maps over the intersection
/// of both masks. Statistics are taken over that intersection only.
inline double ssi_loss(const DepthMap& d, const DepthMap& d_star) {
  const Mask m = detail::intersection(d, d_star);
  const auto x = detail::gather(d, m);
  const auto y = detail::gather(d_star, m);
  if (x.empty()) throw DataError("ssi_loss: masks do not intersect");
  const SsiStats sx = detail::stats_of(x);
  const SsiStats sy = detail::stats_of(y);
  double acc = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i)
    acc += std::abs((x[i] - sx.mu) / sx.sigma - (y[i] - sy.mu) / sy.sigma);
  return acc / static_cast<double>(x.size());
}

/// Ordinary least squares (a, b) = argmin sum (a * pred + b - ref)^2 over the
/// mask intersection.
inline AffineCoeffs lstsq_align(const DepthMap& pred, const DepthMap& ref) {
  const Mask m = detail::intersection(pred, ref);
  const auto x = detail::gather(pred, m);
  const auto y = detail::gather(ref, m);
  if (x.size() < 2) throw DataError("lstsq_align: fewer than two overlapping pixels");
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (!(sxx > 1e-24 * n * std::max(mx * mx, 1e-300)))
    throw DomainError("lstsq_align: prediction is constant, system is singular");
  AffineCoeffs c;
  c.a = sxy / sxx;
  c.b = my - c.a * mx;
  return c;
}

/// a * D + b on valid pixels; results that are not positive leave the mask.
inline DepthMap apply_affine(const DepthMap& d, const AffineCoeffs& c) {
  DepthMap out = d;
  for (std::size_t i = 0; i < out.values.size(); ++i) {
    if (!out.mask[i]) continue;
    out.values[i] = c.a * d.values[i] + c.b;
    if (!(out.values[i] > 0.0) || !std::isfinite(out.values[i])) out.mask[i] = 0;
  }
  return out;
}

/// s = median(D* / D) over the mask intersection.
inline double median_scale(const DepthMap& d, const DepthMap& d_star) {
  const Mask m = detail::intersection(d, d_star);
  std::vector<double> ratios;
  for (std::size_t i = 0; i < m.size(); ++i) {
    if (!m[i]) continue;
    if (!(d.values[i] > 0.0)) throw DataError("median_scale: non-positive prediction");
    ratios.push_back(d_star.values[i] / d.values[i]);
  }
  if (ratios.empty()) throw DataError("median_scale: masks do not intersect");
  return detail::median(std::move(ratios));
}

}  // namespace gpdepth
