#pragma once

#include <cmath>
#include <cstddef>
#include <exception>
#include <limits>
#include <vector>

#include <omp.h>

namespace stein::par {

enum class Exec { Serial, Parallel };

// f over xs. The serial path is the reference the OpenMP path is tested against.
template <class F>
std::vector<double> map(const std::vector<double>& xs, F&& f, Exec exec = Exec::Parallel) {
  std::vector<double> out(xs.size());
  const auto n = static_cast<std::ptrdiff_t>(xs.size());
  if (exec == Exec::Serial || n < 2) {
    for (std::ptrdiff_t i = 0; i < n; ++i) out[i] = f(xs[i]);
    return out;
  }
  std::exception_ptr err;
#pragma omp parallel for schedule(dynamic, 4)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    try {
      out[i] = f(xs[i]);
    } catch (...) {
#pragma omp critical(stein_par_err)
      if (!err) err = std::current_exception();
    }
  }
  if (err) std::rethrow_exception(err);
  return out;
}

struct ArgMax {
  std::size_t index = 0;
  double x = std::numeric_limits<double>::quiet_NaN();
  double value = -std::numeric_limits<double>::infinity();
};

// first maximiser; a NaN anywhere poisons the result instead of being skipped
inline ArgMax argmax(const std::vector<double>& xs, const std::vector<double>& v) {
  ArgMax best;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (std::isnan(v[i])) return {i, xs[i], v[i]};
    if (v[i] > best.value) best = {i, xs[i], v[i]};
  }
  return best;
}

inline int threads() { return omp_get_max_threads(); }

}  // namespace stein::par
