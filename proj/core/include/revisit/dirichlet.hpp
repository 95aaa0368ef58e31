#pragma once

// Dirichlet-multinomial machinery for view-transition structure: sufficient
// statistics, posterior predictive probabilities, the evidence of count data
// under a Dirichlet prior and MAP fitting of that prior across environments.
//
// Matrices are indexed (i, j) = "view i follows view j". Column j of the
// hyperparameter matrix is the Dirichlet prior over the multinomial of views
// following view j.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "revisit/square_matrix.hpp"
#include "revisit/view_id.hpp"

namespace revisit {

using CountColumn = std::vector<std::uint64_t>;

class HyperMatrix {
 public:
  HyperMatrix() = default;
  explicit HyperMatrix(std::size_t nu, double fill = 1.0);

  static HyperMatrix from_row_major(std::size_t nu, std::vector<double> values);

  std::size_t size() const noexcept { return alpha_.size(); }

  double operator()(std::size_t i, std::size_t j) const { return alpha_(i, j); }
  void set(std::size_t i, std::size_t j, double value);

  std::vector<double> column(std::size_t j) const;
  void set_column(std::size_t j, std::span<const double> values);

  double column_sum(std::size_t j) const { return column_sums_[j]; }

  const std::vector<double>& row_major() const noexcept { return alpha_.row_major(); }

  bool operator==(const HyperMatrix& other) const { return alpha_ == other.alpha_; }

 private:
  void refresh_column_sum(std::size_t j);

  SquareMatrix<double> alpha_;
  std::vector<double> column_sums_;
};

class CountMatrix {
 public:
  CountMatrix() = default;
  explicit CountMatrix(std::size_t nu);

  static CountMatrix from_row_major(std::size_t nu, std::vector<std::uint64_t> values);

  std::size_t size() const noexcept { return counts_.size(); }

  std::uint64_t operator()(std::size_t i, std::size_t j) const { return counts_(i, j); }

  // Records one observed transition from view `from` to view `to`.
  void increment(ViewId from, ViewId to);

  CountColumn column(std::size_t j) const;
  std::uint64_t column_sum(std::size_t j) const { return column_sums_[j]; }
  std::uint64_t total() const;

  CountMatrix& operator+=(const CountMatrix& other);

  const std::vector<std::uint64_t>& row_major() const noexcept { return counts_.row_major(); }

  bool operator==(const CountMatrix& other) const { return counts_ == other.counts_; }

 private:
  SquareMatrix<std::uint64_t> counts_;
  std::vector<std::uint64_t> column_sums_;
};

// Value-returning form of CountMatrix::increment: f[i][j] += 1.
CountMatrix increment(CountMatrix counts, ViewId j, ViewId i);

/// Transition counts from k previously explored environments.
struct TrainingDataset {
  std::vector<CountMatrix> environments;

  std::size_t view_count() const;
  // Column j of every environment, in environment order.
  std::vector<CountColumn> column(std::size_t j) const;
  // Throws DomainError when empty or when the matrices disagree on size.
  void validate() const;
};

// p(v_t = i | v_{t-1} = j) = (alpha_ij + w f_ij) / sum_i' (alpha_i'j + w f_i'j).
// `count_weight` scales the observed counts (1 for the plain posterior,
// 0 for the prior alone).
double predictive(const HyperMatrix& alpha, const CountMatrix& counts, ViewId i, ViewId j,
                  double count_weight = 1.0);

std::vector<double> predictive_column(const HyperMatrix& alpha, const CountMatrix& counts,
                                      ViewId j, double count_weight = 1.0);

// Log of the product over environments of Dirichlet-multinomial evidences
// for one column. Throws DomainError on a non-positive or non-finite alpha
// entry or on a size mismatch.
double log_evidence(std::span<const double> alpha_col, std::span<const CountColumn> data_cols);

// Gradient of log_evidence with respect to alpha_col.
std::vector<double> log_evidence_grad(std::span<const double> alpha_col,
                                      std::span<const CountColumn> data_cols);

struct MapEstimateOptions {
  double tolerance = 1e-6;     // on the inf-norm of the gradient w.r.t. log(alpha)
  std::size_t max_iterations = 5000;
  double alpha_floor = 1e-6;
  double alpha_ceiling = 1e8;
};

struct ColumnFitReport {
  double initial_log_evidence = 0.0;
  double final_log_evidence = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
};

// Maximizes the column evidence over alpha (uniform hyper-prior) by
// conjugate-gradient ascent in log(alpha) with a backtracking line search.
// `column_index` only labels errors.
std::vector<double> map_estimate_column(std::span<const double> init,
                                        std::span<const CountColumn> data_cols,
                                        const MapEstimateOptions& options = {},
                                        std::size_t column_index = 0,
                                        ColumnFitReport* report = nullptr);

// Column-wise MAP estimate of the hyperparameter matrix.
HyperMatrix map_estimate(const TrainingDataset& data, const HyperMatrix& init,
                         const MapEstimateOptions& options = {},
                         std::vector<ColumnFitReport>* reports = nullptr);

HyperMatrix map_estimate(const TrainingDataset& data, const HyperMatrix& init, double tolerance,
                         std::size_t max_iterations);

}  // namespace revisit
