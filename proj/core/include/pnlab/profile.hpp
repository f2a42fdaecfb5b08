#pragma once

#include <string>
#include <vector>

namespace pnlab {

enum class ProfileKind { Sine, SawtoothSmooth, Tabulated };

// 1-periodic boundary flux profile f(u) with cached range statistics and an
// exact-to-the-representation antiderivative. Closed-form kinds evaluate
// exactly; tabulated kinds interpolate linearly between uniform samples over
// one period, so the interpolant itself is the profile.
class PeriodicProfile {
 public:
  // offset + amplitude * sin(2*pi*(u - phase))
  static PeriodicProfile sine(double amplitude, double offset = 0.0, double phase = 0.0);
  // offset + amplitude * (sin(2*pi*u) - 0.5*sin(4*pi*u)): a smoothed ramp
  // with steep release, extrema at offset -/+ amplitude*3*sqrt(3)/4.
  static PeriodicProfile sawtooth_smooth(double amplitude, double offset = 0.0);
  // Values on the uniform mesh u_i = i/N, i = 0..N-1, one period, wrapped.
  static PeriodicProfile tabulated(std::vector<double> samples);
  static PeriodicProfile constant(double value) { return sine(0.0, value, 0.0); }

  double operator()(double u) const;
  // F(u) = integral of f from 0 to u; F(0) = 0, F(u+1) = F(u) + mean().
  double antiderivative(double u) const;

  double min() const { return min_; }
  double max() const { return max_; }
  double mean() const { return mean_; }
  // sup |f| over one period.
  double sup_abs() const;

  ProfileKind kind() const { return kind_; }
  int samples_per_period() const { return static_cast<int>(samples_.size()); }

  // f - <f>: returns a profile with zero mean; idempotent.
  PeriodicProfile normalized() const;

 private:
  PeriodicProfile() = default;
  void finalize_tabulated();

  ProfileKind kind_ = ProfileKind::Sine;
  double amplitude_ = 0.0, offset_ = 0.0, phase_ = 0.0;
  std::vector<double> samples_;   // tabulated values
  std::vector<double> cumint_;    // cumulative integral at sample points, cumint_[0] = 0
  double min_ = 0.0, max_ = 0.0, mean_ = 0.0;
};

struct ProfileStats {
  double min = 0.0, max = 0.0, mean = 0.0;
};

ProfileStats profile_stats(const PeriodicProfile& f);

// Effective boundary coefficients as a function of the tangential slope
// magnitude: at slope exactly zero the admissible flux pins to the full range
// of f; at any nonzero slope it collapses to the mean. The zero test is exact
// by design; tolerance-based facet detection belongs to the solvers.
struct PinnedCoefficients {
  double lower = 0.0;  // admissible flux lower end at this slope
  double upper = 0.0;  // admissible flux upper end at this slope
  double slope_p = 0.0;
};

PinnedCoefficients pinned_coefficients(const PeriodicProfile& f, double p);

}  // namespace pnlab
