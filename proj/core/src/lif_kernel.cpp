#include "stereosnn/lif_kernel.hpp"

#include <algorithm>
#include <cmath>

namespace stereosnn::lif {

namespace {

// Relative time-constant difference below which the equal-tau limit is used
// for the extremum location.
constexpr double kDegenerate = 1e-9;

}  // namespace

double current_at(double i0, double s, double tau_s) {
  return i0 * std::exp(-s / tau_s);
}

double membrane_at(double v0, double i0, double s, double tau_m, double tau_s) {
  // V(s) = e^{-s/tau_m} (v0 + i0 tau_s g(s)),
  // g(s) = (1 - e^{-s delta/(tau_s tau_m)}) / delta, delta = tau_m - tau_s.
  const double delta = tau_m - tau_s;
  double g;
  if (delta == 0.0) {
    g = s / (tau_s * tau_m);
  } else {
    g = -std::expm1(-s * delta / (tau_s * tau_m)) / delta;
  }
  return std::exp(-s / tau_m) * (v0 + i0 * tau_s * g);
}

double unit_psp_peak_time(double tau_m, double tau_s) {
  if (std::abs(tau_m - tau_s) <= kDegenerate * tau_m) return tau_m;
  return std::log(tau_m / tau_s) * tau_m * tau_s / (tau_m - tau_s);
}

double unit_psp_peak(double tau_m, double tau_s) {
  return membrane_at(0.0, 1.0, unit_psp_peak_time(tau_m, tau_s), tau_m, tau_s);
}

namespace {

// Offset of the interior maximum of V, if V rises first.
std::optional<double> peak_offset(double v0, double i0, double tau_m,
                                  double tau_s) {
  // V'(0) = (i0 - v0) / tau_m. Without an initial rise V never exceeds v0.
  if (!(i0 > v0)) return std::nullopt;
  double s;
  if (std::abs(tau_m - tau_s) <= kDegenerate * tau_m) {
    s = tau_m * (1.0 - v0 / i0);
  } else {
    const double a = i0 * tau_s / (tau_s - tau_m);
    const double b = v0 - a;
    if (b == 0.0) return std::nullopt;
    const double ratio = -a * tau_m / (b * tau_s);
    if (!(ratio > 0.0)) return std::nullopt;
    s = std::log(ratio) / (1.0 / tau_s - 1.0 / tau_m);
  }
  if (!(s > 0.0) || !std::isfinite(s)) return std::nullopt;
  return s;
}

}  // namespace

std::optional<Timestamp> first_crossing(double v0, double i0, double threshold,
                                        double tau_m, double tau_s) {
  if (v0 >= threshold) return Timestamp{0};
  const auto peak = peak_offset(v0, i0, tau_m, tau_s);
  if (!peak) return std::nullopt;
  const auto lo_peak = static_cast<Timestamp>(std::floor(*peak));
  const Timestamp hi_peak = lo_peak + 1;
  if (membrane_at(v0, i0, static_cast<double>(lo_peak), tau_m, tau_s) < threshold) {
    if (membrane_at(v0, i0, static_cast<double>(hi_peak), tau_m, tau_s) >= threshold) {
      return hi_peak;
    }
    return std::nullopt;
  }
  // V rises monotonically on [0, lo_peak]; V(0) < threshold <= V(lo_peak).
  Timestamp lo = 0, hi = lo_peak;
  while (hi - lo > 1) {
    const Timestamp mid = lo + (hi - lo) / 2;
    if (membrane_at(v0, i0, static_cast<double>(mid), tau_m, tau_s) >= threshold) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return hi;
}

namespace {

bool pair_crosses(double weight, double threshold, Timestamp gap, double tau_m,
                  double tau_s) {
  const double scale = weight / unit_psp_peak(tau_m, tau_s);
  // First PSP alone until the second arrives, then both currents.
  const double g = static_cast<double>(gap);
  const double v = membrane_at(0.0, scale, g, tau_m, tau_s);
  if (v >= threshold) return true;
  const double i = current_at(scale, g, tau_s) + scale;
  return first_crossing(v, i, threshold, tau_m, tau_s).has_value();
}

}  // namespace

std::optional<Timestamp> max_coincidence_interval(double weight, double threshold,
                                                  double tau_m, double tau_s) {
  if (!pair_crosses(weight, threshold, 0, tau_m, tau_s)) return std::nullopt;
  Timestamp lo = 0;
  Timestamp hi = 1;
  const auto limit = static_cast<Timestamp>(100.0 * std::max(tau_m, tau_s)) + 1;
  while (pair_crosses(weight, threshold, hi, tau_m, tau_s)) {
    lo = hi;
    hi *= 2;
    if (hi > limit) return lo;
  }
  while (hi - lo > 1) {
    const Timestamp mid = lo + (hi - lo) / 2;
    if (pair_crosses(weight, threshold, mid, tau_m, tau_s)) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return lo;
}

double periodic_train_peak(double weight, Timestamp spacing, double tau_m,
                           double tau_s) {
  // Latest arrival at lag s0, the j-th earlier one at lag >= s0 + j*spacing.
  // Each earlier term is bounded by the non-increasing envelope of the kernel,
  // k(max(u, t_peak)), which makes the result an upper bound for every train.
  const double scale = weight / unit_psp_peak(tau_m, tau_s);
  const double peak_t = unit_psp_peak_time(tau_m, tau_s);
  const double period = std::max(1.0, static_cast<double>(spacing));
  const double horizon = 60.0 * std::max(tau_m, tau_s);
  auto envelope = [&](double u) {
    return membrane_at(0.0, 1.0, std::max(u, peak_t), tau_m, tau_s);
  };
  double best = 0.0;
  const int steps = 4000;
  const double span = peak_t + period;
  for (int k = 0; k <= steps + 1; ++k) {
    const double s0 = k <= steps ? span * k / steps : peak_t;
    double v = membrane_at(0.0, 1.0, s0, tau_m, tau_s);
    for (double u = s0 + period; u <= s0 + horizon; u += period) {
      v += envelope(u);
    }
    best = std::max(best, scale * v);
  }
  return best;
}

}  // namespace stereosnn::lif
