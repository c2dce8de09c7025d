#include "embedgeo/probe.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "embedgeo/error.hpp"
#include "embedgeo/parallel.hpp"
#include "embedgeo/rng.hpp"

namespace embedgeo {
namespace {

inline double softplus(double t) { return std::max(t, 0.0) + std::log1p(std::exp(-std::abs(t))); }

inline double sigmoid(double t) {
  if (t >= 0) return 1.0 / (1.0 + std::exp(-t));
  const double e = std::exp(t);
  return e / (1.0 + e);
}

void check_shapes(const MatrixD& x, std::span<const std::uint8_t> labels) {
  if (x.rows != labels.size()) throw Error(ErrorCode::ShapeError, "logreg: label count does not match rows");
  if (x.rows < 2) throw Error(ErrorCode::ShapeError, "logreg: need at least two samples");
}

std::vector<double> scores(const MatrixD& x, std::span<const double> w, double b) {
  std::vector<double> z(x.rows, b);
  for (std::size_t j = 0; j < x.cols; ++j) {
    const double wj = w[j];
    if (wj == 0.0) continue;
    auto col = x.col(j);
    for (std::size_t i = 0; i < x.rows; ++i) z[i] += wj * col[i];
  }
  return z;
}

std::string stream_name(std::string_view what, TokenCategory c) {
  return std::string(what) + "/" + default_catalog().name(c);
}

}  // namespace

ProbeTask build_task(const Vocabulary& vocab, TokenCategory category, std::uint64_t seed, std::size_t min_tokens) {
  std::vector<RowId> positives = vocab.rows_of(category);
  const std::string name = default_catalog().name(category);
  if (positives.empty()) {
    throw Error(ErrorCode::ArgumentError, "probe: category " + name + " does not occur in '" + vocab.model_name() + "'");
  }
  if (positives.size() < min_tokens) {
    throw Error(ErrorCode::SkippedCategory, "probe: category " + name + " has " + std::to_string(positives.size()) +
                                                " tokens, need at least " + std::to_string(min_tokens));
  }
  std::vector<RowId> complement;
  complement.reserve(vocab.size() - positives.size());
  for (std::size_t i = 0; i < vocab.size(); ++i) {
    if (vocab[static_cast<RowId>(i)].category != category) complement.push_back(static_cast<RowId>(i));
  }
  if (complement.size() < min_tokens) {
    throw Error(ErrorCode::SkippedCategory, "probe: only " + std::to_string(complement.size()) +
                                                " tokens outside category " + name);
  }

  ProbeTask task;
  task.category = category;
  task.seed = seed;
  Rng rng = Rng::stream(seed, stream_name("probe/task", category));
  auto pick = [&](const std::vector<RowId>& from, std::size_t n) {
    std::vector<RowId> out;
    out.reserve(n);
    for (std::size_t i : rng.sample(from.size(), n)) out.push_back(from[i]);
    std::sort(out.begin(), out.end());
    return out;
  };
  if (positives.size() > complement.size()) {
    task.positives = pick(positives, complement.size());
    task.negatives = std::move(complement);
  } else {
    task.negatives = pick(complement, positives.size());
    task.positives = std::move(positives);
  }
  return task;
}

double logistic_objective(const MatrixD& x, std::span<const std::uint8_t> labels, std::span<const double> w, double b,
                          double l2, std::span<double> grad_w, double* grad_b) {
  check_shapes(x, labels);
  if (w.size() != x.cols) throw Error(ErrorCode::ShapeError, "logreg: weight length does not match columns");
  const auto n = static_cast<double>(x.rows);
  const std::vector<double> z = scores(x, w, b);
  double loss = 0.0;
  std::vector<double> residual(grad_w.empty() && !grad_b ? 0 : x.rows);
  for (std::size_t i = 0; i < x.rows; ++i) {
    const double s = labels[i] ? 1.0 : -1.0;
    loss += softplus(-s * z[i]);
    if (!residual.empty()) residual[i] = sigmoid(z[i]) - static_cast<double>(labels[i]);
  }
  double penalty = 0.0;
  for (double v : w) penalty += v * v;
  const double value = loss / n + 0.5 * l2 * penalty;

  if (!grad_w.empty()) {
    for (std::size_t j = 0; j < x.cols; ++j) {
      auto col = x.col(j);
      double g = 0.0;
      for (std::size_t i = 0; i < x.rows; ++i) g += col[i] * residual[i];
      grad_w[j] = g / n + l2 * w[j];
    }
  }
  if (grad_b) {
    double g = 0.0;
    for (double r : residual) g += r;
    *grad_b = g / n;
  }
  return value;
}

LogRegModel train_logreg(const MatrixD& x, std::span<const std::uint8_t> labels, const LogRegParams& params) {
  check_shapes(x, labels);
  const auto positives = std::count_if(labels.begin(), labels.end(), [](std::uint8_t y) { return y != 0; });
  if (positives == 0 || static_cast<std::size_t>(positives) == labels.size()) {
    throw Error(ErrorCode::DegenerateLabels, "logreg: labels contain a single class");
  }
  constexpr double kArmijo = 1e-4;
  constexpr double kMinStep = 1e-20;

  LogRegModel model;
  model.weights.assign(x.cols, 0.0);
  std::vector<double> gw(x.cols), trial_w(x.cols);
  double gb = 0.0;
  double f = logistic_objective(x, labels, model.weights, model.bias, params.l2, gw, &gb);
  model.initial_loss = f;
  double step = 1.0;

  for (model.iterations = 0; model.iterations < params.max_iter; ++model.iterations) {
    double gmax = std::abs(gb), gnorm2 = gb * gb;
    for (double g : gw) {
      gmax = std::max(gmax, std::abs(g));
      gnorm2 += g * g;
    }
    if (gmax < params.tol) {
      model.converged = true;
      break;
    }
    double f_new = f;
    double trial_b = model.bias;
    bool accepted = false;
    for (; step >= kMinStep; step *= 0.5) {
      for (std::size_t j = 0; j < x.cols; ++j) trial_w[j] = model.weights[j] - step * gw[j];
      trial_b = model.bias - step * gb;
      f_new = logistic_objective(x, labels, trial_w, trial_b, params.l2);
      if (f_new <= f - kArmijo * step * gnorm2) {
        accepted = true;
        break;
      }
    }
    if (!accepted) break;
    model.weights.swap(trial_w);
    model.bias = trial_b;
    f = logistic_objective(x, labels, model.weights, model.bias, params.l2, gw, &gb);
    step *= 2.0;
  }
  if (!model.converged) {
    double gmax = std::abs(gb);
    for (double g : gw) gmax = std::max(gmax, std::abs(g));
    model.converged = gmax < params.tol;
  }
  model.final_loss = f;
  return model;
}

double accuracy(const LogRegModel& model, const MatrixD& x, std::span<const std::uint8_t> labels) {
  const std::vector<double> z = scores(x, model.weights, model.bias);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < x.rows; ++i) correct += ((z[i] > 0.0) == (labels[i] != 0));
  return x.rows == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(x.rows);
}

FoldAssignment assign_folds(const ProbeTask& task, std::size_t folds) {
  if (folds < 2) throw Error(ErrorCode::ArgumentError, "cross-validation needs at least 2 folds");
  if (task.positives.size() < folds || task.negatives.size() < folds) {
    throw Error(ErrorCode::ArgumentError, "cross-validation: fewer samples per class than folds");
  }
  auto assign = [&](std::size_t n, std::string_view what) {
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    Rng rng = Rng::stream(task.seed, stream_name(what, task.category));
    rng.shuffle(order);
    std::vector<std::size_t> fold(n);
    for (std::size_t rank = 0; rank < n; ++rank) fold[order[rank]] = rank % folds;
    return fold;
  };
  return {assign(task.positives.size(), "probe/folds/positive"), assign(task.negatives.size(), "probe/folds/negative")};
}

FoldFit fit_fold(const ProbeTask& task, const EmbeddingMatrix& m, const FoldAssignment& assignment, std::size_t fold,
                 const LogRegParams& params) {
  std::vector<RowId> train_rows, test_rows;
  std::vector<std::uint8_t> train_y, test_y;
  auto route = [&](const std::vector<RowId>& rows, const std::vector<std::size_t>& folds, std::uint8_t label) {
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (rows[i] >= m.rows()) throw Error(ErrorCode::IndexError, "probe: task row outside the matrix");
      if (folds[i] == fold) {
        test_rows.push_back(rows[i]);
        test_y.push_back(label);
      } else {
        train_rows.push_back(rows[i]);
        train_y.push_back(label);
      }
    }
  };
  route(task.positives, assignment.positive_fold, 1);
  route(task.negatives, assignment.negative_fold, 0);

  const std::size_t d = m.cols();
  FoldFit fit;
  fit.feature_mean.assign(d, 0.0);
  fit.feature_scale.assign(d, 0.0);
  for (RowId r : train_rows) {
    auto v = m.row(r);
    for (std::size_t j = 0; j < d; ++j) fit.feature_mean[j] += v[j];
  }
  const auto n_train = static_cast<double>(train_rows.size());
  for (double& mu : fit.feature_mean) mu /= n_train;
  for (RowId r : train_rows) {
    auto v = m.row(r);
    for (std::size_t j = 0; j < d; ++j) {
      const double c = v[j] - fit.feature_mean[j];
      fit.feature_scale[j] += c * c;
    }
  }
  for (double& s : fit.feature_scale) {
    s = std::sqrt(s / n_train);
    if (s == 0.0) s = 1.0;
  }

  auto build = [&](const std::vector<RowId>& rows) {
    MatrixD x(rows.size(), d);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      auto v = m.row(rows[i]);
      for (std::size_t j = 0; j < d; ++j) x(i, j) = (v[j] - fit.feature_mean[j]) / fit.feature_scale[j];
    }
    return x;
  };
  fit.model = train_logreg(build(train_rows), train_y, params);
  fit.accuracy = accuracy(fit.model, build(test_rows), test_y);
  fit.test_size = test_rows.size();
  return fit;
}

ProbeResult cross_validate(const ProbeTask& task, const EmbeddingMatrix& m, std::size_t folds,
                           const LogRegParams& params, unsigned threads) {
  const FoldAssignment assignment = assign_folds(task, folds);
  ProbeResult result;
  result.category = task.category;
  result.params = params;
  result.fold_accuracy.assign(folds, 0.0);
  result.fold_sizes.assign(folds, 0);
  parallel_for(folds, threads, [&](std::size_t f) {
    FoldFit fit = fit_fold(task, m, assignment, f, params);
    result.fold_accuracy[f] = fit.accuracy;
    result.fold_sizes[f] = fit.test_size;
  });
  double sum = 0.0;
  for (double a : result.fold_accuracy) sum += a;
  result.mean_accuracy = sum / static_cast<double>(folds);
  result.samples = task.positives.size() + task.negatives.size();
  return result;
}

ProbeSummary run_probes(const Vocabulary& vocab, const EmbeddingMatrix& m, std::span<const TokenCategory> categories,
                        std::uint64_t seed, std::size_t folds, const LogRegParams& params, unsigned threads) {
  if (vocab.size() != m.rows()) throw Error(ErrorCode::ShapeError, "probe: vocabulary and matrix row counts differ");
  ProbeSummary summary;
  std::vector<ProbeTask> tasks;
  std::vector<FoldAssignment> assignments;
  for (TokenCategory c : categories) {
    try {
      tasks.push_back(build_task(vocab, c, seed));
      assignments.push_back(assign_folds(tasks.back(), folds));
    } catch (const Error& e) {
      if (e.code() != ErrorCode::SkippedCategory) throw;
      if (tasks.size() > assignments.size()) tasks.pop_back();
      summary.skipped.push_back(c);
    }
  }

  std::vector<FoldFit> fits(tasks.size() * folds);
  parallel_for(fits.size(), threads, [&](std::size_t job) {
    const std::size_t t = job / folds, f = job % folds;
    fits[job] = fit_fold(tasks[t], m, assignments[t], f, params);
  });

  double macro = 0.0, correct = 0.0, total = 0.0;
  for (std::size_t t = 0; t < tasks.size(); ++t) {
    ProbeResult r;
    r.category = tasks[t].category;
    r.params = params;
    r.samples = tasks[t].positives.size() + tasks[t].negatives.size();
    double sum = 0.0;
    for (std::size_t f = 0; f < folds; ++f) {
      const FoldFit& fit = fits[t * folds + f];
      r.fold_accuracy.push_back(fit.accuracy);
      r.fold_sizes.push_back(fit.test_size);
      sum += fit.accuracy;
      correct += fit.accuracy * static_cast<double>(fit.test_size);
      total += static_cast<double>(fit.test_size);
    }
    r.mean_accuracy = sum / static_cast<double>(folds);
    macro += r.mean_accuracy;
    summary.results.push_back(std::move(r));
  }
  if (!tasks.empty()) {
    summary.macro_accuracy = macro / static_cast<double>(tasks.size());
    summary.pooled_accuracy = correct / total;
  }
  return summary;
}

}  // namespace embedgeo
