#pragma once

#include <cstdint>
#include <string>

#include "stein/distribution.hpp"
#include "stein/quadrature.hpp"

namespace stein {

enum class OracleScheme { Quadrature, Summation, GridSup };

std::string to_string(OracleScheme s);

// Brute-force distance. `lo`/`hi` is the window actually integrated or scanned.
struct OracleResult {
  double value = 0.0;
  OracleScheme scheme = OracleScheme::Quadrature;
  double error_estimate = 0.0;
  double lo = 0.0, hi = 0.0;
  bool flagged = false;  // error estimate above the requested tolerance
};

//! sup_z |P(z) - Q(z)|; left and right limits at atoms, golden refinement between grid points
OracleResult exact_kolmogorov(const Distribution& p, const Distribution& q);
//! ½∫|p - q| dμ; needs the same dominating measure
OracleResult exact_tv(const Distribution& p, const Distribution& q);
//! ∫|P(z) - Q(z)| dz
OracleResult exact_wasserstein(const Distribution& p, const Distribution& q, double tol = 1e-10);

struct McEstimate {
  double mean = 0.0;
  double stderr_ = 0.0;
  std::size_t n = 0;
};

McEstimate mc_expectation(const Distribution& d, const quad::Fn& f, std::uint64_t seed, std::size_t n);

//! same lattice (step and aligned origin) or both continuous
bool same_measure(const Distribution& p, const Distribution& q);

}  // namespace stein
