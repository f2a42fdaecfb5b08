#include "pnlab/profile.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "pnlab/errors.hpp"

namespace pnlab {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;

double wrap_unit(double u) {
  double w = u - std::floor(u);
  if (w >= 1.0) w = 0.0;  // guard against floor rounding at exact integers
  return w;
}
}  // namespace

PeriodicProfile PeriodicProfile::sine(double amplitude, double offset, double phase) {
  PeriodicProfile p;
  p.kind_ = ProfileKind::Sine;
  p.amplitude_ = amplitude;
  p.offset_ = offset;
  p.phase_ = phase;
  p.min_ = offset - std::abs(amplitude);
  p.max_ = offset + std::abs(amplitude);
  p.mean_ = offset;
  return p;
}

PeriodicProfile PeriodicProfile::sawtooth_smooth(double amplitude, double offset) {
  PeriodicProfile p;
  p.kind_ = ProfileKind::SawtoothSmooth;
  p.amplitude_ = amplitude;
  p.offset_ = offset;
  // Extrema of sin(2*pi*u) - 0.5*sin(4*pi*u) sit at cos(2*pi*u) = -1/2 with
  // value +/- 3*sqrt(3)/4; the critical point at u = 0 is a saddle value 0.
  const double extremum = 0.75 * std::sqrt(3.0) * std::abs(amplitude);
  p.min_ = offset - extremum;
  p.max_ = offset + extremum;
  p.mean_ = offset;
  return p;
}

PeriodicProfile PeriodicProfile::tabulated(std::vector<double> samples) {
  if (samples.size() < 2)
    throw Error(ErrorCode::ConfigInvalid, "tabulated profile needs at least 2 samples");
  PeriodicProfile p;
  p.kind_ = ProfileKind::Tabulated;
  p.samples_ = std::move(samples);
  p.finalize_tabulated();
  return p;
}

void PeriodicProfile::finalize_tabulated() {
  const int n = static_cast<int>(samples_.size());
  const double h = 1.0 / n;

  // Mean of the periodic linear interpolant = plain average of the samples.
  double sum = 0.0;
  for (double v : samples_) sum += v;
  mean_ = sum / n;

  // Range of the interpolant is attained at samples; refine with a parabola
  // through the discrete extremum and its neighbors to estimate the extremum
  // of the underlying smooth function. The refinement only ever widens the
  // range, so min <= f(u) <= max still holds at every evaluated u.
  auto refine = [&](int i, bool want_max) {
    const double ym = samples_[(i - 1 + n) % n];
    const double y0 = samples_[i];
    const double yp = samples_[(i + 1) % n];
    const double denom = yp - 2.0 * y0 + ym;
    if (std::abs(denom) < 1e-300) return y0;
    const double vertex = y0 - (yp - ym) * (yp - ym) / (8.0 * denom);
    if (want_max && denom < 0.0 && vertex > y0) return vertex;
    if (!want_max && denom > 0.0 && vertex < y0) return vertex;
    return y0;
  };
  int imin = 0, imax = 0;
  for (int i = 1; i < n; ++i) {
    if (samples_[i] < samples_[imin]) imin = i;
    if (samples_[i] > samples_[imax]) imax = i;
  }
  min_ = refine(imin, false);
  max_ = refine(imax, true);

  // Cumulative integral of the interpolant at sample points (trapezoid is
  // exact for a piecewise-linear integrand). cumint_[n] = mean.
  cumint_.assign(n + 1, 0.0);
  for (int i = 0; i < n; ++i) {
    const double a = samples_[i];
    const double b = samples_[(i + 1) % n];
    cumint_[i + 1] = cumint_[i] + 0.5 * (a + b) * h;
  }
}

double PeriodicProfile::operator()(double u) const {
  switch (kind_) {
    case ProfileKind::Sine:
      return offset_ + amplitude_ * std::sin(kTwoPi * (u - phase_));
    case ProfileKind::SawtoothSmooth:
      return offset_ + amplitude_ * (std::sin(kTwoPi * u) - 0.5 * std::sin(2.0 * kTwoPi * u));
    case ProfileKind::Tabulated: {
      const int n = static_cast<int>(samples_.size());
      const double w = wrap_unit(u) * n;
      int i = static_cast<int>(w);
      if (i >= n) i = n - 1;
      const double frac = w - i;
      const double a = samples_[i];
      const double b = samples_[(i + 1) % n];
      return a + (b - a) * frac;
    }
  }
  return 0.0;
}

double PeriodicProfile::antiderivative(double u) const {
  switch (kind_) {
    case ProfileKind::Sine: {
      // int_0^u offset + A sin(2pi(r - phase)) dr
      const double c0 = std::cos(kTwoPi * (0.0 - phase_));
      const double cu = std::cos(kTwoPi * (u - phase_));
      return offset_ * u + amplitude_ * (c0 - cu) / kTwoPi;
    }
    case ProfileKind::SawtoothSmooth: {
      const double t1 = (1.0 - std::cos(kTwoPi * u)) / kTwoPi;
      const double t2 = (1.0 - std::cos(2.0 * kTwoPi * u)) / (2.0 * kTwoPi);
      return offset_ * u + amplitude_ * (t1 - 0.5 * t2);
    }
    case ProfileKind::Tabulated: {
      const int n = static_cast<int>(samples_.size());
      const double fl = std::floor(u);
      const double w = wrap_unit(u) * n;
      int i = static_cast<int>(w);
      if (i >= n) i = n - 1;
      const double frac = w - i;
      const double h = 1.0 / n;
      const double a = samples_[i];
      const double b = samples_[(i + 1) % n];
      // Exact integral of the linear piece over [u_i, u_i + frac*h].
      const double partial = h * frac * (a + 0.5 * (b - a) * frac);
      return fl * mean_ + cumint_[i] + partial;
    }
  }
  return 0.0;
}

double PeriodicProfile::sup_abs() const { return std::max(std::abs(min_), std::abs(max_)); }

PeriodicProfile PeriodicProfile::normalized() const {
  PeriodicProfile p = *this;
  switch (kind_) {
    case ProfileKind::Sine:
    case ProfileKind::SawtoothSmooth:
      p.offset_ -= mean_;
      p.min_ -= mean_;
      p.max_ -= mean_;
      p.mean_ = 0.0;
      return p;
    case ProfileKind::Tabulated: {
      for (double& v : p.samples_) v -= mean_;
      p.finalize_tabulated();
      return p;
    }
  }
  return p;
}

ProfileStats profile_stats(const PeriodicProfile& f) { return {f.min(), f.max(), f.mean()}; }

PinnedCoefficients pinned_coefficients(const PeriodicProfile& f, double p) {
  PinnedCoefficients c;
  c.slope_p = p;
  if (p == 0.0) {
    c.lower = f.min();
    c.upper = f.max();
  } else {
    c.lower = c.upper = f.mean();
  }
  return c;
}

}  // namespace pnlab
