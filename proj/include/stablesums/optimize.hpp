#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <vector>

#include <gsl/gsl_errno.h>
#include <gsl/gsl_multimin.h>

namespace stablesums {

struct MinimizeResult {
  std::vector<double> x;
  double value = std::numeric_limits<double>::infinity();
  int iterations = 0;
  bool converged = false;
};

struct SimplexOptions {
  int max_iterations = 2000;
  double size_tolerance = 1e-5;  ///< stop when the simplex characteristic size falls below
  int restarts = 1;              ///< extra runs started from the previous optimum
  /// A run that stops making progress counts as converged below this size.
  double stall_tolerance = 1e-4;
};

namespace detail {

inline void disable_gsl_abort() {
  static const bool once = [] {
    gsl_set_error_handler_off();
    return true;
  }();
  (void)once;
}

struct GslObjective {
  const std::function<double(const std::vector<double>&)>* fn;
  std::vector<double> scratch;
};

inline double gsl_trampoline(const gsl_vector* v, void* params) {
  auto* obj = static_cast<GslObjective*>(params);
  for (std::size_t i = 0; i < obj->scratch.size(); ++i) obj->scratch[i] = gsl_vector_get(v, i);
  double f = (*obj->fn)(obj->scratch);
  // The simplex method cannot digest non-finite values.
  if (!std::isfinite(f)) f = 1e300;
  return f;
}

}  // namespace detail

/// Derivative-free Nelder-Mead minimization (GSL nmsimplex2) on an
/// unconstrained parameter vector. Box constraints are the caller's job,
/// expressed as coordinate transforms inside `fn`.
inline MinimizeResult minimize_simplex(const std::function<double(const std::vector<double>&)>& fn,
                                       std::vector<double> start, std::vector<double> step,
                                       const SimplexOptions& opts = {}) {
  detail::disable_gsl_abort();
  const std::size_t dim = start.size();
  MinimizeResult best;
  best.x = start;

  using MinimizerPtr = std::unique_ptr<gsl_multimin_fminimizer, decltype(&gsl_multimin_fminimizer_free)>;
  using VectorPtr = std::unique_ptr<gsl_vector, decltype(&gsl_vector_free)>;

  detail::GslObjective obj{&fn, std::vector<double>(dim)};
  gsl_multimin_function gf{&detail::gsl_trampoline, dim, &obj};

  int total_iterations = 0;
  for (int run = 0; run <= opts.restarts; ++run) {
    MinimizerPtr s(gsl_multimin_fminimizer_alloc(gsl_multimin_fminimizer_nmsimplex2, dim),
                   &gsl_multimin_fminimizer_free);
    VectorPtr x(gsl_vector_alloc(dim), &gsl_vector_free);
    VectorPtr ss(gsl_vector_alloc(dim), &gsl_vector_free);
    for (std::size_t i = 0; i < dim; ++i) {
      gsl_vector_set(x.get(), i, best.x[i]);
      gsl_vector_set(ss.get(), i, step[i]);
    }
    if (gsl_multimin_fminimizer_set(s.get(), &gf, x.get(), ss.get()) != GSL_SUCCESS) break;

    bool converged = false;
    int iter = 0;
    while (iter < opts.max_iterations) {
      ++iter;
      const int status = gsl_multimin_fminimizer_iterate(s.get());
      const double size = gsl_multimin_fminimizer_size(s.get());
      if (status != GSL_SUCCESS) {
        converged = size < opts.stall_tolerance;
        break;
      }
      if (gsl_multimin_test_size(size, opts.size_tolerance) == GSL_SUCCESS) {
        converged = true;
        break;
      }
    }
    total_iterations += iter;
    double fval = s->fval;
    if (fval <= best.value) {
      best.value = fval;
      for (std::size_t i = 0; i < dim; ++i) best.x[i] = gsl_vector_get(s->x, i);
    }
    best.converged = converged;
    // Shrink the restart step so the polish stays near the optimum.
    for (auto& st : step) st *= 0.25;
  }
  best.iterations = total_iterations;
  return best;
}

}  // namespace stablesums
