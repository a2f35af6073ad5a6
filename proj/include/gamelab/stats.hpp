#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gamelab/errors.hpp"
#include "gamelab/linalg.hpp"

namespace gamelab {

struct MeanSE {
  double mean = 0.0;
  double se = 0.0;
  std::size_t n = 0;
};

// Sample mean and standard error (n-1 denominator). Throws DomainError for n < 2.
MeanSE mean_se(std::span<const double> samples);

// Standard error of the mean with observations grouped into clusters
// (CR1 small-sample factor). `cluster` has one id per sample.
MeanSE mean_se_clustered(std::span<const double> samples, std::span<const std::size_t> cluster);

struct Design {
  std::vector<std::string> names;
  Matrix x;  // n x k
};

// Rows are observations; every row must have names.size() entries.
Design make_design(std::vector<std::string> names, const std::vector<std::vector<double>>& rows);

enum class SEKind { Classical, Clustered };

struct RegressionResult {
  std::string method;  // "ols" | "logit"
  std::vector<std::string> names;
  std::vector<double> coefficients;
  std::vector<double> standard_errors;
  std::vector<double> p_values;
  std::size_t n_obs = 0;
  bool converged = true;
  int iterations = 0;
  bool separation = false;
  SEKind se_kind = SEKind::Classical;
  std::size_t n_clusters = 0;
  double r_squared = 0.0;       // ols
  double sigma2 = 0.0;          // ols residual variance
  double log_likelihood = 0.0;  // logit
  std::vector<std::string> warnings;

  // Throws UsageError for an unknown name.
  std::size_t index(const std::string& name) const;
  double coef(const std::string& name) const { return coefficients[index(name)]; }
  double se(const std::string& name) const { return standard_errors[index(name)]; }
  double p(const std::string& name) const { return p_values[index(name)]; }
};

class SingularDesign : public DomainError {
 public:
  SingularDesign(const std::string& what, std::vector<std::string> columns)
      : DomainError(what), columns_(std::move(columns)) {}
  const std::vector<std::string>& columns() const { return columns_; }

 private:
  std::vector<std::string> columns_;
};

// Least squares via Householder QR. Classical SEs with t(n-k) p-values, or
// cluster-robust SEs with t(G-1) p-values when `cluster` is non-empty.
RegressionResult ols(std::span<const double> y, const Design& x, std::span<const std::size_t> cluster = {});

struct LogitOptions {
  double tolerance = 1e-8;  // max absolute coefficient change
  int max_iterations = 100;
  double ridge = 1e-8;      // only loaded once separation is detected
};

// Maximum likelihood by Newton / IRLS with step halving. SEs from the
// inverse observed information, normal p-values.
RegressionResult logit(std::span<const double> y, const Design& x, const LogitOptions& options = {},
                       std::span<const std::size_t> cluster = {});

double logit_log_likelihood(std::span<const double> y, const Matrix& x, std::span<const double> beta);

enum class RankTestMode { RankSum, SignedRank };

struct RankTestResult {
  RankTestMode mode = RankTestMode::RankSum;
  double statistic = 0.0;  // rank sum of x, or W+ for signed-rank
  double p_value = 1.0;
  bool exact = false;
  double z = 0.0;          // normal approximation only
  std::size_t n_x = 0;
  std::size_t n_y = 0;     // for signed-rank: pairs with non-zero difference
};

// Rank-sum: independent samples. Signed-rank: x[i] paired with y[i].
// Exact enumeration when the sample count is at most 12 (combined for
// rank-sum, non-zero pairs for signed-rank); otherwise a normal approximation
// with tie and continuity corrections. Two-sided.
RankTestResult wilcoxon_rank(std::span<const double> x, std::span<const double> y,
                             RankTestMode mode = RankTestMode::RankSum);

std::string_view to_string(RankTestMode m);

struct ZTest {
  double z = 0.0;
  double p_value = 1.0;
};

// Pooled two-proportion z test, two-sided. A degenerate pooled proportion gives z = 0, p = 1.
ZTest two_prop_z(std::size_t k1, std::size_t n1, std::size_t k2, std::size_t n2);

// "***" below 0.01, "**" below 0.05, "*" below 0.1, otherwise empty.
std::string star_annotate(double p);

// Two-sided tail probabilities.
double normal_two_sided_p(double z);
double t_two_sided_p(double t, double df);

}  // namespace gamelab
