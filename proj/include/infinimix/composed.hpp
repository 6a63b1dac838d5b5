#pragma once

#include "infinimix/maps.hpp"
#include "infinimix/observables.hpp"

namespace infinimix {

struct ComposedOptions {
  double absTol = 1e-10;
  long budget = 20'000'000;  // integrand evaluations
  double tailTol = 1e-13;    // x-length of unbounded image tails that may be dropped
};

struct ComposedIntegral {
  double value = 0.0;
  double errorBound = 0.0;
  long evaluations = 0;
  std::size_t pieces = 0;
};

/// Integral of F(T^n x) w(x) over the support of w. The support is cut into
/// the monotone pieces of T^n and each piece further at the pulled-back
/// discontinuities of F, so every integrand seen by the quadrature is smooth.
ComposedIntegral integrateComposed(const PiecewiseMap& map, const GlobalObservable& f, long n,
                                   const LocalObservable& weight, const ComposedOptions& opts = {});

/// Integral of F(T^n x) G(x) over the window [lo, hi). For translation-invariant
/// maps with periodic F and G the window is folded onto whole common periods.
ComposedIntegral integrateComposedWindow(const PiecewiseMap& map, const GlobalObservable& f, long n,
                                         const GlobalObservable& g, double lo, double hi,
                                         const ComposedOptions& opts = {});

/// G restricted to [lo, hi) as a local observable.
LocalObservable restrictTo(const GlobalObservable& g, double lo, double hi);

}  // namespace infinimix
