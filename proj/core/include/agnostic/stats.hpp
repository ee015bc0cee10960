#pragma once

#include <cstddef>
#include <span>

namespace agnostic::stats {

/// Standard normal CDF.
double normal_cdf(double x);

/// Inverse standard normal CDF for p in (0, 1). Acklam's rational
/// approximation followed by one Halley step against erfc; absolute error
/// well below 1e-9 over the whole range.
double normal_quantile(double p);

/// Upper critical value z_{alpha/2} of a two-sided level 1-alpha interval.
double two_sided_z(double alpha);

double mean(std::span<const double> values);

/// Sample standard deviation with divisor (n-1); 0 when n < 2.
double sample_sd(std::span<const double> values);

/// Sample median (average of the two middle order statistics for even n).
double median(std::span<const double> values);

/// P(Bin(n, 1/2) <= k), computed in log space so large n does not underflow.
double binomial_half_cdf(std::size_t n, std::ptrdiff_t k);

}  // namespace agnostic::stats
