#include "revisit/dirichlet.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include <boost/math/special_functions/digamma.hpp>

#include "revisit/errors.hpp"

namespace revisit {
namespace {

void check_alpha_value(double value) {
  if (!(value > 0.0) || !std::isfinite(value)) {
    throw DomainError("Dirichlet parameter must be positive and finite, got " +
                      std::to_string(value));
  }
}

void check_column_shapes(std::span<const double> alpha_col,
                         std::span<const CountColumn> data_cols) {
  for (double a : alpha_col) {
    check_alpha_value(a);
  }
  for (const auto& col : data_cols) {
    if (col.size() != alpha_col.size()) {
      throw DomainError("count column length " + std::to_string(col.size()) +
                        " does not match alpha length " + std::to_string(alpha_col.size()));
    }
  }
}

// lgamma(a + n) - lgamma(a); zero exactly when n == 0.
double log_rising(double a, double n) {
  if (n == 0.0) {
    return 0.0;
  }
  return std::lgamma(a + n) - std::lgamma(a);
}

double digamma(double x) { return boost::math::digamma(x); }

}  // namespace

HyperMatrix::HyperMatrix(std::size_t nu, double fill) : alpha_(nu, fill), column_sums_(nu) {
  check_alpha_value(fill);
  for (std::size_t j = 0; j < nu; ++j) {
    refresh_column_sum(j);
  }
}

HyperMatrix HyperMatrix::from_row_major(std::size_t nu, std::vector<double> values) {
  if (values.size() != nu * nu) {
    throw DomainError("hyperparameter matrix needs " + std::to_string(nu * nu) + " entries, got " +
                      std::to_string(values.size()));
  }
  for (double v : values) {
    check_alpha_value(v);
  }
  HyperMatrix m;
  m.alpha_ = SquareMatrix<double>(nu, std::move(values));
  m.column_sums_.assign(nu, 0.0);
  for (std::size_t j = 0; j < nu; ++j) {
    m.refresh_column_sum(j);
  }
  return m;
}

void HyperMatrix::set(std::size_t i, std::size_t j, double value) {
  check_alpha_value(value);
  alpha_(i, j) = value;
  refresh_column_sum(j);
}

std::vector<double> HyperMatrix::column(std::size_t j) const {
  std::vector<double> col(size());
  for (std::size_t i = 0; i < size(); ++i) {
    col[i] = alpha_(i, j);
  }
  return col;
}

void HyperMatrix::set_column(std::size_t j, std::span<const double> values) {
  if (values.size() != size()) {
    throw DomainError("column length mismatch");
  }
  for (double v : values) {
    check_alpha_value(v);
  }
  for (std::size_t i = 0; i < size(); ++i) {
    alpha_(i, j) = values[i];
  }
  refresh_column_sum(j);
}

void HyperMatrix::refresh_column_sum(std::size_t j) {
  double sum = 0.0;
  for (std::size_t i = 0; i < size(); ++i) {
    sum += alpha_(i, j);
  }
  column_sums_[j] = sum;
}

CountMatrix::CountMatrix(std::size_t nu) : counts_(nu, 0), column_sums_(nu, 0) {}

CountMatrix CountMatrix::from_row_major(std::size_t nu, std::vector<std::uint64_t> values) {
  if (values.size() != nu * nu) {
    throw DomainError("count matrix needs " + std::to_string(nu * nu) + " entries, got " +
                      std::to_string(values.size()));
  }
  CountMatrix m;
  m.counts_ = SquareMatrix<std::uint64_t>(nu, std::move(values));
  m.column_sums_.assign(nu, 0);
  for (std::size_t i = 0; i < nu; ++i) {
    for (std::size_t j = 0; j < nu; ++j) {
      m.column_sums_[j] += m.counts_(i, j);
    }
  }
  return m;
}

void CountMatrix::increment(ViewId from, ViewId to) {
  if (from.index >= size() || to.index >= size()) {
    throw DomainError("view index out of range in count increment");
  }
  ++counts_(to.index, from.index);
  ++column_sums_[from.index];
}

CountColumn CountMatrix::column(std::size_t j) const {
  CountColumn col(size());
  for (std::size_t i = 0; i < size(); ++i) {
    col[i] = counts_(i, j);
  }
  return col;
}

std::uint64_t CountMatrix::total() const {
  return std::accumulate(column_sums_.begin(), column_sums_.end(), std::uint64_t{0});
}

CountMatrix& CountMatrix::operator+=(const CountMatrix& other) {
  if (other.size() != size()) {
    throw DomainError("cannot add count matrices of different size");
  }
  for (std::size_t i = 0; i < size(); ++i) {
    for (std::size_t j = 0; j < size(); ++j) {
      counts_(i, j) += other(i, j);
    }
  }
  for (std::size_t j = 0; j < size(); ++j) {
    column_sums_[j] += other.column_sums_[j];
  }
  return *this;
}

CountMatrix increment(CountMatrix counts, ViewId j, ViewId i) {
  counts.increment(j, i);
  return counts;
}

std::size_t TrainingDataset::view_count() const {
  return environments.empty() ? 0 : environments.front().size();
}

std::vector<CountColumn> TrainingDataset::column(std::size_t j) const {
  std::vector<CountColumn> cols;
  cols.reserve(environments.size());
  for (const auto& env : environments) {
    cols.push_back(env.column(j));
  }
  return cols;
}

void TrainingDataset::validate() const {
  if (environments.empty()) {
    throw DomainError("training dataset has no environments");
  }
  const std::size_t nu = environments.front().size();
  for (const auto& env : environments) {
    if (env.size() != nu) {
      throw DomainError("training environments disagree on the number of views");
    }
  }
}

double predictive(const HyperMatrix& alpha, const CountMatrix& counts, ViewId i, ViewId j,
                  double count_weight) {
  if (alpha.size() != counts.size()) {
    throw DomainError("alpha and counts differ in size");
  }
  if (i.index >= alpha.size() || j.index >= alpha.size()) {
    throw DomainError("view index out of range in predictive");
  }
  const double numerator =
      alpha(i.index, j.index) + count_weight * static_cast<double>(counts(i.index, j.index));
  const double denominator =
      alpha.column_sum(j.index) + count_weight * static_cast<double>(counts.column_sum(j.index));
  return numerator / denominator;
}

std::vector<double> predictive_column(const HyperMatrix& alpha, const CountMatrix& counts,
                                      ViewId j, double count_weight) {
  if (alpha.size() != counts.size()) {
    throw DomainError("alpha and counts differ in size");
  }
  if (j.index >= alpha.size()) {
    throw DomainError("view index out of range in predictive");
  }
  const double denominator =
      alpha.column_sum(j.index) + count_weight * static_cast<double>(counts.column_sum(j.index));
  std::vector<double> col(alpha.size());
  for (std::size_t i = 0; i < alpha.size(); ++i) {
    col[i] = (alpha(i, j.index) + count_weight * static_cast<double>(counts(i, j.index))) /
             denominator;
  }
  return col;
}

double log_evidence(std::span<const double> alpha_col, std::span<const CountColumn> data_cols) {
  check_column_shapes(alpha_col, data_cols);
  const double alpha_sum = std::accumulate(alpha_col.begin(), alpha_col.end(), 0.0);
  double total = 0.0;
  for (const auto& col : data_cols) {
    double numerator = 0.0;
    double count_sum = 0.0;
    for (std::size_t i = 0; i < alpha_col.size(); ++i) {
      const auto f = static_cast<double>(col[i]);
      numerator += log_rising(alpha_col[i], f);
      count_sum += f;
    }
    total += numerator - log_rising(alpha_sum, count_sum);
  }
  return total;
}

std::vector<double> log_evidence_grad(std::span<const double> alpha_col,
                                      std::span<const CountColumn> data_cols) {
  check_column_shapes(alpha_col, data_cols);
  const std::size_t nu = alpha_col.size();
  const double alpha_sum = std::accumulate(alpha_col.begin(), alpha_col.end(), 0.0);
  const double psi_sum = digamma(alpha_sum);
  std::vector<double> psi_alpha(nu);
  for (std::size_t i = 0; i < nu; ++i) {
    psi_alpha[i] = digamma(alpha_col[i]);
  }

  std::vector<double> grad(nu, 0.0);
  for (const auto& col : data_cols) {
    double count_sum = 0.0;
    for (std::size_t i = 0; i < nu; ++i) {
      count_sum += static_cast<double>(col[i]);
    }
    if (count_sum == 0.0) {
      continue;
    }
    const double shared = psi_sum - digamma(count_sum + alpha_sum);
    for (std::size_t i = 0; i < nu; ++i) {
      const auto f = static_cast<double>(col[i]);
      const double own = f == 0.0 ? 0.0 : digamma(f + alpha_col[i]) - psi_alpha[i];
      grad[i] += own + shared;
    }
  }
  return grad;
}

std::vector<double> map_estimate_column(std::span<const double> init,
                                        std::span<const CountColumn> data_cols,
                                        const MapEstimateOptions& options,
                                        std::size_t column_index, ColumnFitReport* report) {
  const std::size_t nu = init.size();
  const double lo = std::log(options.alpha_floor);
  const double hi = std::log(options.alpha_ceiling);

  std::vector<double> beta(nu);
  for (std::size_t i = 0; i < nu; ++i) {
    check_alpha_value(init[i]);
    beta[i] = std::clamp(std::log(init[i]), lo, hi);
  }

  auto to_alpha = [](const std::vector<double>& b) {
    std::vector<double> a(b.size());
    std::transform(b.begin(), b.end(), a.begin(), [](double v) { return std::exp(v); });
    return a;
  };
  auto objective = [&](const std::vector<double>& b) {
    const double value = log_evidence(to_alpha(b), data_cols);
    if (!std::isfinite(value)) {
      throw OptimizationError("non-finite log evidence during MAP estimation", column_index);
    }
    return value;
  };
  // Gradient with respect to log(alpha): alpha_i * d/d alpha_i.
  auto gradient = [&](const std::vector<double>& b) {
    auto a = to_alpha(b);
    auto g = log_evidence_grad(a, data_cols);
    for (std::size_t i = 0; i < nu; ++i) {
      g[i] *= a[i];
      // Components pinned at a bound with the gradient pushing outward do not count.
      if ((b[i] <= lo && g[i] < 0.0) || (b[i] >= hi && g[i] > 0.0)) {
        g[i] = 0.0;
      }
      if (!std::isfinite(g[i])) {
        throw OptimizationError("non-finite gradient during MAP estimation", column_index);
      }
    }
    return g;
  };
  auto dot = [](const std::vector<double>& u, const std::vector<double>& v) {
    return std::inner_product(u.begin(), u.end(), v.begin(), 0.0);
  };
  auto inf_norm = [](const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) {
      m = std::max(m, std::abs(x));
    }
    return m;
  };

  double value = objective(beta);
  ColumnFitReport local;
  local.initial_log_evidence = value;

  std::vector<double> grad = gradient(beta);
  std::vector<double> prev_grad;
  std::vector<double> direction;
  double step = 0.0;

  std::size_t iter = 0;
  for (; iter < options.max_iterations; ++iter) {
    if (inf_norm(grad) < options.tolerance) {
      local.converged = true;
      break;
    }

    // Polak-Ribiere+ with a restart every nu iterations.
    bool steepest = direction.empty() || iter % std::max<std::size_t>(nu, 1) == 0;
    if (!steepest) {
      const double denom = dot(prev_grad, prev_grad);
      std::vector<double> diff(nu);
      for (std::size_t i = 0; i < nu; ++i) {
        diff[i] = grad[i] - prev_grad[i];
      }
      const double beta_pr = denom > 0.0 ? std::max(0.0, dot(grad, diff) / denom) : 0.0;
      for (std::size_t i = 0; i < nu; ++i) {
        direction[i] = grad[i] + beta_pr * direction[i];
      }
      if (dot(direction, grad) <= 0.0) {
        steepest = true;
      }
    }
    if (steepest) {
      direction = grad;
    }

    const double dir_norm = inf_norm(direction);
    if (step <= 0.0) {
      step = 1.0 / std::max(1.0, dir_norm);
    } else {
      step = std::min(step * 2.0, 10.0 / std::max(dir_norm, 1e-300));
    }

    bool accepted = false;
    std::vector<double> candidate(nu);
    for (int attempt = 0; attempt < 80; ++attempt) {
      for (std::size_t i = 0; i < nu; ++i) {
        candidate[i] = std::clamp(beta[i] + step * direction[i], lo, hi);
      }
      double ascent = 0.0;
      for (std::size_t i = 0; i < nu; ++i) {
        ascent += grad[i] * (candidate[i] - beta[i]);
      }
      const double candidate_value = objective(candidate);
      if (candidate_value >= value + 1e-4 * ascent && candidate_value >= value) {
        accepted = true;
        value = candidate_value;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      if (!steepest) {
        // Retry from steepest ascent before giving up.
        direction.clear();
        step = 0.0;
        continue;
      }
      // No ascent possible at floating-point resolution.
      local.converged = true;
      break;
    }
    beta = candidate;
    prev_grad = std::move(grad);
    grad = gradient(beta);
  }

  local.iterations = iter;
  local.final_log_evidence = value;
  if (report != nullptr) {
    *report = local;
  }
  return to_alpha(beta);
}

HyperMatrix map_estimate(const TrainingDataset& data, const HyperMatrix& init,
                         const MapEstimateOptions& options,
                         std::vector<ColumnFitReport>* reports) {
  data.validate();
  const std::size_t nu = data.view_count();
  if (init.size() != nu) {
    throw DomainError("initial hyperparameters do not match the dataset size");
  }
  HyperMatrix result = init;
  if (reports != nullptr) {
    reports->assign(nu, ColumnFitReport{});
  }
  for (std::size_t j = 0; j < nu; ++j) {
    const auto cols = data.column(j);
    const auto start = init.column(j);
    ColumnFitReport report;
    auto fitted = map_estimate_column(start, cols, options, j, &report);
    // The objective is flat when column j never occurs; keep init exactly.
    if (report.final_log_evidence > report.initial_log_evidence) {
      for (auto& a : fitted) {
        a = std::max(a, options.alpha_floor);
      }
      result.set_column(j, fitted);
    } else {
      report.final_log_evidence = report.initial_log_evidence;
    }
    if (reports != nullptr) {
      (*reports)[j] = report;
    }
  }
  return result;
}

HyperMatrix map_estimate(const TrainingDataset& data, const HyperMatrix& init, double tolerance,
                         std::size_t max_iterations) {
  MapEstimateOptions options;
  options.tolerance = tolerance;
  options.max_iterations = max_iterations;
  return map_estimate(data, init, options);
}

}  // namespace revisit
