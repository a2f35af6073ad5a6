#include "gamelab/stats.hpp"

#include <algorithm>
#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>
#include <cmath>
#include <map>
#include <numeric>

namespace gamelab {
namespace {

double softplus(double x) { return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }
double logistic(double x) { return x >= 0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x)); }

void check_lengths(std::size_t ny, const Design& x) {
  if (ny != x.x.rows()) throw UsageError("outcome and design have different lengths");
  if (x.names.size() != x.x.cols()) throw UsageError("design names do not match its columns");
}

// Which earlier columns column j is a combination of.
std::vector<std::string> collinear_with(const Design& x, std::size_t j, const std::vector<std::size_t>& deficient) {
  std::vector<std::size_t> basis;
  for (std::size_t c = 0; c < j; ++c)
    if (std::find(deficient.begin(), deficient.end(), c) == deficient.end()) basis.push_back(c);
  std::vector<std::string> names{x.names[j]};
  if (basis.empty()) return names;
  Matrix b(x.x.rows(), basis.size());
  std::vector<double> target(x.x.rows());
  for (std::size_t i = 0; i < x.x.rows(); ++i) {
    for (std::size_t c = 0; c < basis.size(); ++c) b(i, c) = x.x(i, basis[c]);
    target[i] = x.x(i, j);
  }
  const auto qr = householder_qr(b);
  const auto qty = qr.apply_qt(target);
  const auto coef = back_substitute(qr.r, std::vector<double>(qty.begin(), qty.begin() + basis.size()));
  for (std::size_t c = 0; c < basis.size(); ++c)
    if (std::abs(coef[c]) > 1e-8) names.push_back(x.names[basis[c]]);
  return names;
}

void check_rank(const Design& x, const QRDecomposition& qr) {
  if (qr.deficient_columns.empty()) return;
  const auto cols = collinear_with(x, qr.deficient_columns.front(), qr.deficient_columns);
  std::string list;
  for (const auto& c : cols) list += (list.empty() ? "" : ", ") + c;
  throw SingularDesign("design matrix is rank deficient; collinear columns: " + list, cols);
}

// Sandwich meat: sum over clusters of (X_g' s_g)(X_g' s_g)'.
Matrix cluster_meat(const Matrix& x, std::span<const double> score, std::span<const std::size_t> cluster,
                    std::size_t& n_groups) {
  const std::size_t k = x.cols();
  std::map<std::size_t, std::vector<double>> sums;
  for (std::size_t i = 0; i < x.rows(); ++i) {
    auto& s = sums[cluster[i]];
    s.resize(k, 0.0);
    for (std::size_t j = 0; j < k; ++j) s[j] += x(i, j) * score[i];
  }
  Matrix meat(k, k);
  for (const auto& [id, s] : sums)
    for (std::size_t a = 0; a < k; ++a)
      for (std::size_t b = 0; b < k; ++b) meat(a, b) += s[a] * s[b];
  n_groups = sums.size();
  return meat;
}

std::vector<double> midranks(std::span<const double> v) {
  std::vector<std::size_t> order(v.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> ranks(v.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
    const double r = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t t = i; t <= j; ++t) ranks[order[t]] = r;
    i = j + 1;
  }
  return ranks;
}

double tie_term(std::span<const double> v) {
  std::map<double, std::size_t> counts;
  for (double x : v) ++counts[x];
  double s = 0.0;
  for (const auto& [val, t] : counts) s += std::pow(static_cast<double>(t), 3) - static_cast<double>(t);
  return s;
}

constexpr std::size_t kExactLimit = 12;
constexpr double kEps = 1e-9;

}  // namespace

MeanSE mean_se(std::span<const double> samples) {
  const std::size_t n = samples.size();
  if (n < 2) throw DomainError("standard error undefined for fewer than 2 samples");
  const double mean = std::accumulate(samples.begin(), samples.end(), 0.0) / static_cast<double>(n);
  double ss = 0.0;
  for (double x : samples) ss += (x - mean) * (x - mean);
  const double sd = std::sqrt(ss / static_cast<double>(n - 1));
  return {mean, sd / std::sqrt(static_cast<double>(n)), n};
}

MeanSE mean_se_clustered(std::span<const double> samples, std::span<const std::size_t> cluster) {
  if (cluster.size() != samples.size()) throw UsageError("one cluster id per sample required");
  const std::size_t n = samples.size();
  if (n < 2) throw DomainError("standard error undefined for fewer than 2 samples");
  const double mean = std::accumulate(samples.begin(), samples.end(), 0.0) / static_cast<double>(n);
  std::map<std::size_t, double> sums;
  for (std::size_t i = 0; i < n; ++i) sums[cluster[i]] += samples[i] - mean;
  const double g = static_cast<double>(sums.size());
  if (g < 2) throw DomainError("clustered standard error needs at least 2 clusters");
  double meat = 0.0;
  for (const auto& [id, s] : sums) meat += s * s;
  const double var = meat / (static_cast<double>(n) * static_cast<double>(n)) * g / (g - 1.0);
  return {mean, std::sqrt(var), n};
}

Design make_design(std::vector<std::string> names, const std::vector<std::vector<double>>& rows) {
  Design d;
  d.x = Matrix(rows.size(), names.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != names.size()) throw UsageError("design row " + std::to_string(i) + " has the wrong width");
    for (std::size_t j = 0; j < names.size(); ++j) d.x(i, j) = rows[i][j];
  }
  d.names = std::move(names);
  return d;
}

std::size_t RegressionResult::index(const std::string& name) const {
  const auto it = std::find(names.begin(), names.end(), name);
  if (it == names.end()) throw UsageError("no regressor named '" + name + "'");
  return static_cast<std::size_t>(it - names.begin());
}

double normal_two_sided_p(double z) {
  if (!std::isfinite(z)) return 0.0;
  static const boost::math::normal_distribution<double> norm;
  return 2.0 * boost::math::cdf(boost::math::complement(norm, std::abs(z)));
}

double t_two_sided_p(double t, double df) {
  if (!std::isfinite(t)) return 0.0;
  const boost::math::students_t_distribution<double> dist(df);
  return 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t)));
}

RegressionResult ols(std::span<const double> y, const Design& x, std::span<const std::size_t> cluster) {
  check_lengths(y.size(), x);
  const std::size_t n = x.x.rows(), k = x.x.cols();
  if (n <= k) throw DomainError("ols needs more observations than regressors");
  const auto qr = householder_qr(x.x);
  check_rank(x, qr);
  const auto qty = qr.apply_qt(std::vector<double>(y.begin(), y.end()));
  const auto beta = back_substitute(qr.r, std::vector<double>(qty.begin(), qty.begin() + k));

  const auto fitted = multiply(x.x, beta);
  std::vector<double> resid(n);
  double ssr = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    resid[i] = y[i] - fitted[i];
    ssr += resid[i] * resid[i];
  }
  const double ybar = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(n);
  double sst = 0.0;
  for (double v : y) sst += (v - ybar) * (v - ybar);

  RegressionResult res;
  res.method = "ols";
  res.names = x.names;
  res.coefficients = beta;
  res.n_obs = n;
  res.iterations = 1;
  res.sigma2 = ssr / static_cast<double>(n - k);
  res.r_squared = sst > 0 ? 1.0 - ssr / sst : 1.0;

  const Matrix xtx_inv = inverse_gram_from_r(qr.r);
  Matrix cov = xtx_inv;
  double df = static_cast<double>(n - k);
  if (!cluster.empty()) {
    if (cluster.size() != n) throw UsageError("one cluster id per observation required");
    std::size_t g = 0;
    const Matrix meat = cluster_meat(x.x, resid, cluster, g);
    if (g < 2) throw DomainError("clustered standard errors need at least 2 clusters");
    cov = multiply(multiply(xtx_inv, meat), xtx_inv);
    const double scale = (static_cast<double>(g) / (g - 1.0)) * (static_cast<double>(n - 1) / static_cast<double>(n - k));
    for (std::size_t a = 0; a < k; ++a)
      for (std::size_t b = 0; b < k; ++b) cov(a, b) *= scale;
    res.se_kind = SEKind::Clustered;
    res.n_clusters = g;
    df = static_cast<double>(g - 1);
  } else {
    for (std::size_t a = 0; a < k; ++a)
      for (std::size_t b = 0; b < k; ++b) cov(a, b) *= res.sigma2;
  }
  for (std::size_t j = 0; j < k; ++j) {
    const double se = std::sqrt(std::max(0.0, cov(j, j)));
    res.standard_errors.push_back(se);
    if (se > 0) {
      res.p_values.push_back(t_two_sided_p(beta[j] / se, df));
    } else {
      res.p_values.push_back(beta[j] == 0.0 ? 1.0 : 0.0);
    }
  }
  double yy = 0.0;
  for (double v : y) yy += v * v;
  if (ssr <= 1e-24 * std::max(1.0, yy)) res.warnings.push_back("exact fit: residual variance is zero");
  return res;
}

double logit_log_likelihood(std::span<const double> y, const Matrix& x, std::span<const double> beta) {
  double ll = 0.0;
  for (std::size_t i = 0; i < x.rows(); ++i) {
    double eta = 0.0;
    for (std::size_t j = 0; j < x.cols(); ++j) eta += x(i, j) * beta[j];
    ll += y[i] * eta - softplus(eta);
  }
  return ll;
}

RegressionResult logit(std::span<const double> y, const Design& x, const LogitOptions& opt,
                       std::span<const std::size_t> cluster) {
  check_lengths(y.size(), x);
  const std::size_t n = x.x.rows(), k = x.x.cols();
  bool has0 = false, has1 = false;
  for (double v : y) {
    if (v == 0.0) has0 = true;
    else if (v == 1.0) has1 = true;
    else throw DomainError("logit outcome must be 0 or 1");
  }
  if (!has0 || !has1) throw DomainError("logit needs both outcome classes");
  if (n < k) throw DomainError("logit needs at least as many observations as regressors");
  check_rank(x, householder_qr(x.x));

  std::vector<double> beta(k, 0.0);
  bool ridge = false, converged = false;
  int it = 0;

  auto hessian = [&](const std::vector<double>& b, std::vector<double>* grad) {
    Matrix h(k, k);
    if (grad) grad->assign(k, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      double eta = 0.0;
      for (std::size_t j = 0; j < k; ++j) eta += x.x(i, j) * b[j];
      const double p = logistic(eta);
      const double w = p * (1.0 - p);
      for (std::size_t a = 0; a < k; ++a) {
        if (grad) (*grad)[a] += x.x(i, a) * (y[i] - p);
        for (std::size_t c = 0; c < k; ++c) h(a, c) += w * x.x(i, a) * x.x(i, c);
      }
    }
    if (ridge)
      for (std::size_t a = 0; a < k; ++a) h(a, a) += opt.ridge;
    return h;
  };

  double ll = logit_log_likelihood(y, x.x, beta);
  while (it < opt.max_iterations) {
    ++it;
    std::vector<double> grad;
    Matrix h = hessian(beta, &grad);
    auto l = cholesky(h);
    if (!l) {
      ridge = true;
      h = hessian(beta, &grad);
      l = cholesky(h);
      if (!l) break;
    }
    auto step = cholesky_solve(*l, grad);
    std::vector<double> next(k);
    double next_ll = ll;
    for (int halving = 0; halving < 40; ++halving) {
      for (std::size_t j = 0; j < k; ++j) next[j] = beta[j] + step[j];
      next_ll = logit_log_likelihood(y, x.x, next);
      if (next_ll >= ll - 1e-12) break;
      for (double& s : step) s /= 2.0;
    }
    double change = 0.0;
    for (std::size_t j = 0; j < k; ++j) change = std::max(change, std::abs(next[j] - beta[j]));
    beta = next;
    ll = next_ll;
    if (change < opt.tolerance) {
      converged = true;
      break;
    }
  }

  double max_eta = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double eta = 0.0;
    for (std::size_t j = 0; j < k; ++j) eta += x.x(i, j) * beta[j];
    max_eta = std::max(max_eta, std::abs(eta));
  }
  const bool separated = ridge || !converged || max_eta > 30.0;

  RegressionResult res;
  res.method = "logit";
  res.names = x.names;
  res.coefficients = beta;
  res.n_obs = n;
  res.iterations = it;
  res.log_likelihood = ll;
  res.separation = separated;
  res.converged = converged && !separated;
  if (separated) {
    ridge = true;
    res.warnings.push_back("perfect or quasi-complete separation detected; estimates are not finite maxima");
  }

  Matrix h = hessian(beta, nullptr);
  auto l = cholesky(h);
  if (!l) {
    ridge = true;
    h = hessian(beta, nullptr);
    l = cholesky(h);
  }
  Matrix cov = l ? cholesky_inverse(*l) : Matrix(k, k, std::nan(""));
  if (!cluster.empty() && l) {
    if (cluster.size() != n) throw UsageError("one cluster id per observation required");
    std::vector<double> score(n);
    for (std::size_t i = 0; i < n; ++i) {
      double eta = 0.0;
      for (std::size_t j = 0; j < k; ++j) eta += x.x(i, j) * beta[j];
      score[i] = y[i] - logistic(eta);
    }
    std::size_t g = 0;
    const Matrix meat = cluster_meat(x.x, score, cluster, g);
    if (g < 2) throw DomainError("clustered standard errors need at least 2 clusters");
    cov = multiply(multiply(cov, meat), cov);
    for (std::size_t a = 0; a < k; ++a)
      for (std::size_t b = 0; b < k; ++b) cov(a, b) *= static_cast<double>(g) / (g - 1.0);
    res.se_kind = SEKind::Clustered;
    res.n_clusters = g;
  }
  for (std::size_t j = 0; j < k; ++j) {
    const double se = std::sqrt(std::max(0.0, cov(j, j)));
    res.standard_errors.push_back(se);
    res.p_values.push_back(se > 0 ? normal_two_sided_p(beta[j] / se) : 1.0);
  }
  return res;
}

std::string_view to_string(RankTestMode m) { return m == RankTestMode::RankSum ? "rank-sum" : "signed-rank"; }

RankTestResult wilcoxon_rank(std::span<const double> x, std::span<const double> y, RankTestMode mode) {
  if (x.empty() || y.empty()) throw UsageError("wilcoxon_rank needs two non-empty samples");
  RankTestResult res;
  res.mode = mode;

  if (mode == RankTestMode::RankSum) {
    const std::size_t n1 = x.size(), n2 = y.size(), n = n1 + n2;
    std::vector<double> all(x.begin(), x.end());
    all.insert(all.end(), y.begin(), y.end());
    const auto ranks = midranks(all);
    const double w = std::accumulate(ranks.begin(), ranks.begin() + static_cast<long>(n1), 0.0);
    const double mean = static_cast<double>(n1) * (static_cast<double>(n) + 1.0) / 2.0;
    res.statistic = w;
    res.n_x = n1;
    res.n_y = n2;
    if (n <= kExactLimit) {
      // Every assignment of n1 of the (mid)ranks to x is equally likely.
      std::size_t hits = 0, total = 0;
      const double dev = std::abs(w - mean);
      std::vector<bool> pick(n, false);
      std::fill(pick.begin(), pick.begin() + static_cast<long>(n1), true);
      do {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i)
          if (pick[i]) s += ranks[i];
        ++total;
        if (std::abs(s - mean) >= dev - kEps) ++hits;
      } while (std::prev_permutation(pick.begin(), pick.end()));
      res.exact = true;
      res.p_value = std::min(1.0, static_cast<double>(hits) / static_cast<double>(total));
      return res;
    }
    const double nn = static_cast<double>(n);
    const double var = static_cast<double>(n1) * static_cast<double>(n2) / 12.0 *
                       ((nn + 1.0) - tie_term(all) / (nn * (nn - 1.0)));
    if (var <= 0) {
      res.p_value = 1.0;
      return res;
    }
    const double d = w - mean;
    const double cc = std::max(0.0, std::abs(d) - 0.5);
    res.z = std::copysign(cc / std::sqrt(var), d);
    res.p_value = std::min(1.0, normal_two_sided_p(res.z));
    return res;
  }

  if (x.size() != y.size()) throw UsageError("signed-rank mode needs paired samples of equal length");
  std::vector<double> diffs;
  for (std::size_t i = 0; i < x.size(); ++i)
    if (x[i] != y[i]) diffs.push_back(x[i] - y[i]);
  res.n_x = x.size();
  res.n_y = diffs.size();
  if (diffs.empty()) {
    res.p_value = 1.0;
    return res;
  }
  std::vector<double> absd(diffs.size());
  for (std::size_t i = 0; i < diffs.size(); ++i) absd[i] = std::abs(diffs[i]);
  const auto ranks = midranks(absd);
  double wplus = 0.0;
  for (std::size_t i = 0; i < diffs.size(); ++i)
    if (diffs[i] > 0) wplus += ranks[i];
  const std::size_t m = diffs.size();
  const double md = static_cast<double>(m);
  const double mean = md * (md + 1.0) / 4.0;
  res.statistic = wplus;
  if (m <= kExactLimit) {
    std::size_t hits = 0;
    const std::size_t total = std::size_t{1} << m;
    const double dev = std::abs(wplus - mean);
    for (std::size_t mask = 0; mask < total; ++mask) {
      double s = 0.0;
      for (std::size_t i = 0; i < m; ++i)
        if (mask & (std::size_t{1} << i)) s += ranks[i];
      if (std::abs(s - mean) >= dev - kEps) ++hits;
    }
    res.exact = true;
    res.p_value = std::min(1.0, static_cast<double>(hits) / static_cast<double>(total));
    return res;
  }
  const double var = md * (md + 1.0) * (2.0 * md + 1.0) / 24.0 - tie_term(absd) / 48.0;
  if (var <= 0) {
    res.p_value = 1.0;
    return res;
  }
  const double d = wplus - mean;
  const double cc = std::max(0.0, std::abs(d) - 0.5);
  res.z = std::copysign(cc / std::sqrt(var), d);
  res.p_value = std::min(1.0, normal_two_sided_p(res.z));
  return res;
}

ZTest two_prop_z(std::size_t k1, std::size_t n1, std::size_t k2, std::size_t n2) {
  if (n1 == 0 || n2 == 0) throw DomainError("two_prop_z needs non-empty groups");
  if (k1 > n1 || k2 > n2) throw DomainError("successes exceed trials");
  const double p1 = static_cast<double>(k1) / static_cast<double>(n1);
  const double p2 = static_cast<double>(k2) / static_cast<double>(n2);
  const double pooled = static_cast<double>(k1 + k2) / static_cast<double>(n1 + n2);
  const double var = pooled * (1.0 - pooled) * (1.0 / static_cast<double>(n1) + 1.0 / static_cast<double>(n2));
  if (var <= 0) return {0.0, 1.0};
  const double z = (p1 - p2) / std::sqrt(var);
  return {z, normal_two_sided_p(z)};
}

std::string star_annotate(double p) {
  if (p < 0.01) return "***";
  if (p < 0.05) return "**";
  if (p < 0.1) return "*";
  return "";
}

}  // namespace gamelab
