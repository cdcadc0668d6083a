/*
 * Copyright 2026 The TabAdv Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */


#include "tabadv/attacks/query_attacks.h"

#include <algorithm>
#include <cmath>
#include <random>

#include "absl/strings/str_cat.h"
#include "tabadv/common/status_macros.h"

namespace tabadv {
namespace {

Vec RandomUnit(size_t d, Rng& rng) {
  std::normal_distribution<double> n01(0.0, 1.0);
  Vec u(d);
  double norm = 0.0;
  while (norm == 0.0) {
    for (double& v : u) v = n01(rng);
    norm = Norm2(u);
  }
  for (double& v : u) v /= norm;
  return u;
}

// Bisection with known endpoint classes: x is class y, x_adv is not.
Vec Bisect(BlackBoxHandle& m, std::span<const double> x,
           std::span<const double> x_adv, int y, double tol) {
  const double length = Distance(x, x_adv);
  double lo = 0.0, hi = 1.0;
  while ((hi - lo) * length > tol) {
    const double mid = 0.5 * (lo + hi);
    if (m.Label(Lerp(x, x_adv, mid)) != y) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return Lerp(x, x_adv, hi);
}

bool OverBudget(const BlackBoxHandle& m, int64_t start, int64_t budget) {
  return budget > 0 && m.queries() - start >= budget;
}

}  // namespace

absl::Status ValidateBoundaryConfig(const BoundaryConfig& cfg) {
  if (!(cfg.epsilon > 0) || !(cfg.delta > 0) || !(cfg.step_adaptation > 0)) {
    return absl::InvalidArgumentError("boundary step sizes must be positive");
  }
  if (!(cfg.adaptation_factor >= 1.0)) {
    return absl::InvalidArgumentError("adaptation_factor must be >= 1");
  }
  if (cfg.max_iter < 1 || cfg.num_trials < 1 || cfg.max_init_steps < 1) {
    return absl::InvalidArgumentError(
        "max_iter, num_trials and max_init_steps must be >= 1");
  }
  if (cfg.max_queries < 0) {
    return absl::InvalidArgumentError("max_queries must be >= 0");
  }
  return absl::OkStatus();
}

absl::Status ValidateHsjConfig(const HsjConfig& cfg) {
  if (cfg.max_iter < 1 || cfg.init_size < 1 || cfg.max_step_halvings < 1) {
    return absl::InvalidArgumentError(
        "max_iter, init_size and max_step_halvings must be >= 1");
  }
  if (cfg.init_eval < 2 || cfg.init_eval > cfg.max_eval) {
    return absl::InvalidArgumentError("need 2 <= init_eval <= max_eval");
  }
  if (!(cfg.search_tolerance > 0 && cfg.search_tolerance < 1)) {
    return absl::InvalidArgumentError("search_tolerance must be in (0, 1)");
  }
  if (cfg.max_queries < 0) {
    return absl::InvalidArgumentError("max_queries must be >= 0");
  }
  return absl::OkStatus();
}

absl::StatusOr<OrthogonalStep> OrthogonalPerturbation(
    std::span<const double> x, std::span<const double> x_adv, double delta,
    double epsilon, Rng& rng) {
  const size_t d = x.size();
  if (x_adv.size() != d) return absl::InvalidArgumentError("length mismatch");
  const double dist = Distance(x, x_adv);
  if (!(dist > 0.0)) return absl::InvalidArgumentError("zero-distance pair");
  Vec toward(d);
  for (size_t j = 0; j < d; ++j) toward[j] = (x[j] - x_adv[j]) / dist;

  Vec r = RandomUnit(d, rng);
  for (double& v : r) v *= delta * dist;
  const double along = Dot(r, toward);
  for (size_t j = 0; j < d; ++j) r[j] -= along * toward[j];

  OrthogonalStep out;
  out.sphere.resize(d);
  Vec diff(d);
  for (size_t j = 0; j < d; ++j) diff[j] = x_adv[j] + r[j] - x[j];
  const double norm = Norm2(diff);
  for (size_t j = 0; j < d; ++j) out.sphere[j] = x[j] + diff[j] * dist / norm;
  out.candidate = Lerp(out.sphere, x, epsilon);
  if (!AllFinite(out.candidate)) {
    return absl::InternalError("non-finite perturbation");
  }
  return out;
}

absl::StatusOr<Vec> BinarySearchBoundary(BlackBoxHandle& m,
                                         std::span<const double> x,
                                         std::span<const double> x_adv, int y,
                                         double tol) {
  if (x.size() != x_adv.size()) {
    return absl::InvalidArgumentError("length mismatch");
  }
  const bool x_ok = m.Label(x) == y;
  const bool adv_ok = m.Label(x_adv) != y;
  if (!x_ok || !adv_ok) {
    return absl::InvalidArgumentError("endpoints on same side");
  }
  return Bisect(m, x, x_adv, y, tol);
}

absl::StatusOr<Vec> EstimateUpdate(BlackBoxHandle& m,
                                   std::span<const double> x_boundary, int y,
                                   int n_eval, double radius, Rng& rng) {
  if (n_eval < 2) return absl::InvalidArgumentError("n_eval must be >= 2");
  const size_t d = x_boundary.size();
  std::vector<Vec> probes;
  std::vector<double> sign;
  probes.reserve(n_eval);
  Vec p(d);
  for (int i = 0; i < n_eval; ++i) {
    Vec u = RandomUnit(d, rng);
    for (size_t j = 0; j < d; ++j) p[j] = x_boundary[j] + radius * u[j];
    sign.push_back(m.Label(p) != y ? 1.0 : -1.0);
    probes.push_back(std::move(u));
  }
  const int hits = static_cast<int>(std::count(sign.begin(), sign.end(), 1.0));
  if (hits == 0 || hits == n_eval) {
    return absl::FailedPreconditionError("degenerate probes");
  }
  const double baseline = (2.0 * hits - n_eval) / n_eval;
  Vec g(d, 0.0);
  for (int i = 0; i < n_eval; ++i) {
    for (size_t j = 0; j < d; ++j) {
      g[j] += (sign[i] - baseline) * probes[i][j] / n_eval;
    }
  }
  const double norm = Norm2(g);
  if (!(norm > 0.0)) return absl::FailedPreconditionError("degenerate probes");
  for (double& v : g) v /= norm;
  return g;
}

absl::StatusOr<AttackOutcome> BoundaryAttack(BlackBoxHandle& m,
                                             std::span<const double> x, int y,
                                             const BoundaryConfig& cfg,
                                             const NormalInit& init,
                                             const ConstraintSet& c,
                                             const DependencyRegistry& reg,
                                             Rng& rng) {
  RETURN_IF_ERROR(ValidateBoundaryConfig(cfg));
  const int64_t start = m.queries();
  if (m.Label(x) != y) {
    return InvalidStartError("model already misclassifies x");
  }
  ASSIGN_OR_RETURN(Vec x_adv, RandomAdversarialSeed(m, x, y, init,
                                                    cfg.max_init_steps, c,
                                                    reg, rng));
  AttackOutcome out;
  double dist = Distance(x, x_adv);
  out.l2_trace.push_back(dist);

  double delta = cfg.delta * cfg.step_adaptation;
  double epsilon = std::min(cfg.epsilon * cfg.step_adaptation, 1.0);
  const double f = cfg.adaptation_factor;
  for (int it = 0; it < cfg.max_iter; ++it) {
    if (dist == 0.0 || OverBudget(m, start, cfg.max_queries) ||
        Similarity(x, x_adv) >= cfg.similarity_threshold) {
      break;
    }
    Vec best;
    double best_dist = dist;
    int orth_ok = 0, contract_ok = 0;
    for (int trial = 0; trial < cfg.num_trials; ++trial) {
      ASSIGN_OR_RETURN(OrthogonalStep step,
                       OrthogonalPerturbation(x, x_adv, delta, epsilon, rng));
      if (m.Label(step.sphere) == y) continue;
      ++orth_ok;
      if (m.Label(step.candidate) == y) continue;
      ++contract_ok;
      const double cd = Distance(x, step.candidate);
      if (cd < best_dist) {
        best_dist = cd;
        best = std::move(step.candidate);
      }
    }
    delta = 2.0 * orth_ok > cfg.num_trials ? delta * f : delta / f;
    if (orth_ok > 0) {
      epsilon = 2 * contract_ok > orth_ok ? std::min(epsilon * f, 1.0)
                                          : epsilon / f;
    }
    ++out.iterations;
    if (best.empty()) continue;
    Vec projected = TabularModify(x, best, c, reg);
    const double pd = Distance(x, projected);
    if (pd < dist && m.Label(projected) != y) {
      x_adv = std::move(projected);
      dist = pd;
      out.l2_trace.push_back(dist);
    }
  }
  out.success = true;
  out.x_adv = std::move(x_adv);
  out.queries = m.queries() - start;
  return out;
}

absl::StatusOr<AttackOutcome> HopSkipJumpAttack(BlackBoxHandle& m,
                                                std::span<const double> x,
                                                int y, const HsjConfig& cfg,
                                                const NormalInit& init,
                                                const ConstraintSet& c,
                                                const DependencyRegistry& reg,
                                                Rng& rng) {
  RETURN_IF_ERROR(ValidateHsjConfig(cfg));
  const int64_t start = m.queries();
  if (m.Label(x) != y) {
    return InvalidStartError("model already misclassifies x");
  }
  ASSIGN_OR_RETURN(Vec seed, RandomAdversarialSeed(m, x, y, init,
                                                   cfg.init_size, c, reg, rng));
  const double d = static_cast<double>(x.size());
  AttackOutcome out;
  Vec best = seed;
  double best_dist = Distance(x, seed);
  // Valid adversarial points only replace the incumbent when strictly closer.
  auto offer = [&](std::span<const double> relaxed) {
    Vec projected = TabularModify(x, relaxed, c, reg);
    const double pd = Distance(x, projected);
    if (pd < best_dist && m.Label(projected) != y) {
      best = std::move(projected);
      best_dist = pd;
      return true;
    }
    return false;
  };

  Vec working = Bisect(m, x, seed, y, cfg.search_tolerance * best_dist);
  offer(working);
  out.l2_trace.push_back(best_dist);

  for (int t = 0; t < cfg.max_iter; ++t) {
    if (OverBudget(m, start, cfg.max_queries) ||
        Similarity(x, best) >= cfg.similarity_threshold) {
      break;
    }
    const Vec boundary =
        Bisect(m, x, working, y, cfg.search_tolerance * Distance(x, working));
    const double dist = Distance(x, boundary);
    if (!(dist > 0.0)) break;

    int n_eval = static_cast<int>(
        std::min<double>(cfg.init_eval * std::sqrt(t + 1.0), cfg.max_eval));
    if (cfg.max_queries > 0) {
      const int64_t left = cfg.max_queries - (m.queries() - start);
      n_eval = static_cast<int>(std::min<int64_t>(n_eval, left));
    }
    if (n_eval < 2) break;
    double radius = dist / d;
    absl::StatusOr<Vec> update = EstimateUpdate(m, boundary, y, n_eval,
                                                radius, rng);
    for (int retry = 0; !update.ok() && retry < 8; ++retry) {
      if (OverBudget(m, start, cfg.max_queries)) break;
      radius *= 2.0;
      update = EstimateUpdate(m, boundary, y, n_eval, radius, rng);
    }
    if (!update.ok()) break;

    double step = 2.0 * dist / std::sqrt(t + 1.0);
    Vec next = boundary;
    for (int h = 0; h < cfg.max_step_halvings; ++h) {
      Vec cand(x.size());
      for (size_t j = 0; j < x.size(); ++j) {
        cand[j] = boundary[j] + step * (*update)[j];
      }
      if (m.Label(cand) != y) {
        next = std::move(cand);
        break;
      }
      step /= 2.0;
    }
    Vec projected = TabularModify(x, next, c, reg);
    const double pd = Distance(x, projected);
    if (m.Label(projected) != y) {
      if (pd < best_dist) {
        best = projected;
        best_dist = pd;
      }
      working = std::move(projected);
    } else {
      working = std::move(next);
    }
    offer(boundary);
    ++out.iterations;
    out.l2_trace.push_back(best_dist);
  }
  out.success = true;
  out.x_adv = std::move(best);
  out.queries = m.queries() - start;
  return out;
}

}  // namespace tabadv
