#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace rotodrum {

/// Mean/variance accumulator (Welford). merge() is exact up to rounding and
/// order-independent in exact arithmetic.
class RunningStats {
 public:
  void add(double value);
  void merge(const RunningStats& other);

  std::size_t count() const { return count_; }
  double mean() const { return mean_; }
  double variance() const;
  double stddev() const;
  /// Standard error of the mean.
  double standard_error() const;

 private:
  std::size_t count_{0};
  double mean_{0.0};
  double m2_{0.0};
};

/// sup |F_n - F| for samples against an analytic CDF. Sorts a copy.
double ks_one_sample(std::vector<double> samples, const std::function<double(double)>& cdf);

/// Two-sample Kolmogorov-Smirnov distance.
double ks_two_sample(std::vector<double> a, std::vector<double> b);

struct LinearFit {
  double slope{0.0};
  double intercept{0.0};
  double r2{0.0};
};

/// Ordinary least squares y = intercept + slope * x.
LinearFit linear_fit(std::span<const double> x, std::span<const double> y);

/// Histogram of radii into `bins` bins of equal width in r^2 over [r_lo^2, r_hi^2],
/// normalised to unit total mass. Values outside the range are clamped into the
/// edge bins.
std::vector<double> r2_histogram(std::span<const double> radii, double r_lo, double r_hi, int bins);

double l1_distance(std::span<const double> a, std::span<const double> b);

/// Pearson correlation coefficient.
double correlation(std::span<const double> a, std::span<const double> b);

}  // namespace rotodrum
