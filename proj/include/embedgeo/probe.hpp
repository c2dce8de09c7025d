#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "embedgeo/matrix.hpp"
#include "embedgeo/unicode_catalog.hpp"
#include "embedgeo/vocab.hpp"

namespace embedgeo {

/// Balanced one-vs-rest dataset for a single category.
struct ProbeTask {
  TokenCategory category;
  std::vector<RowId> positives;
  std::vector<RowId> negatives;
  std::uint64_t seed = 0;
};

inline constexpr std::size_t kMinProbeTokens = 20;

/// Positives are the category's rows, negatives an equal-size seeded sample
/// of the rest. When the category is the majority, positives are
/// subsampled to the complement size instead.
/// Errors: ArgumentError (category absent), SkippedCategory (< min_tokens).
ProbeTask build_task(const Vocabulary& vocab, TokenCategory category, std::uint64_t seed,
                     std::size_t min_tokens = kMinProbeTokens);

struct LogRegParams {
  double l2 = 1e-4;
  std::size_t max_iter = 1000;
  double tol = 1e-6;
};

struct LogRegModel {
  std::vector<double> weights;
  double bias = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
  double initial_loss = 0.0;
  double final_loss = 0.0;
};

/// Mean logistic loss plus l2·‖w‖²/2 (bias unpenalized). X is n×d, labels
/// are 0/1. Gradients are written when the spans are non-empty.
double logistic_objective(const MatrixD& x, std::span<const std::uint8_t> labels, std::span<const double> w, double b,
                          double l2, std::span<double> grad_w = {}, double* grad_b = nullptr);

/// Full-batch gradient descent with Armijo backtracking. Stops when the
/// gradient ∞-norm drops below tol or after max_iter steps.
/// Errors: DegenerateLabels (one class only), ShapeError.
LogRegModel train_logreg(const MatrixD& x, std::span<const std::uint8_t> labels, const LogRegParams& params = {});

double accuracy(const LogRegModel& model, const MatrixD& x, std::span<const std::uint8_t> labels);

struct ProbeResult {
  TokenCategory category;
  std::vector<double> fold_accuracy;
  /// Held-out rows per fold, for sample-weighted averaging.
  std::vector<std::size_t> fold_sizes;
  double mean_accuracy = 0.0;
  std::size_t samples = 0;
  LogRegParams params;
};

/// Stratified k-fold CV. Each fold standardizes features with statistics
/// from its training rows only. Deterministic in (task.seed, data).
ProbeResult cross_validate(const ProbeTask& task, const EmbeddingMatrix& m, std::size_t folds = 10,
                           const LogRegParams& params = {}, unsigned threads = 1);

/// Fold assignment used by cross_validate: fold index per positive and
/// per negative row.
struct FoldAssignment {
  std::vector<std::size_t> positive_fold;
  std::vector<std::size_t> negative_fold;
};
FoldAssignment assign_folds(const ProbeTask& task, std::size_t folds);

/// One train/evaluate round of cross_validate.
struct FoldFit {
  std::vector<double> feature_mean;
  std::vector<double> feature_scale;
  LogRegModel model;
  double accuracy = 0.0;
  std::size_t test_size = 0;
};
FoldFit fit_fold(const ProbeTask& task, const EmbeddingMatrix& m, const FoldAssignment& assignment,
                 std::size_t fold, const LogRegParams& params = {});

struct ProbeSummary {
  std::vector<ProbeResult> results;
  std::vector<TokenCategory> skipped;
  /// Mean of per-category accuracies.
  double macro_accuracy = 0.0;
  /// Accuracy over all held-out predictions pooled.
  double pooled_accuracy = 0.0;
};

/// Runs every (category, fold) job in parallel. Categories with too few
/// tokens are listed in `skipped`.
ProbeSummary run_probes(const Vocabulary& vocab, const EmbeddingMatrix& m, std::span<const TokenCategory> categories,
                        std::uint64_t seed, std::size_t folds = 10, const LogRegParams& params = {},
                        unsigned threads = 1);

}  // namespace embedgeo
