#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>

namespace stein::cli {

// process exit codes
inline constexpr int kOk = 0, kParseError = 1, kKappaFailure = 2, kVerifyFailed = 3;

struct BoundArgs {
  std::string approx, target;
  std::string metric = "tv", method = "score";
  std::optional<int> ell;
  bool both_directions = false;
  bool oracle = true;
  int z_grid = 513;
};
int cmd_bound(const BoundArgs& a, std::ostream& out);

struct FactorArgs {
  std::string target;
  std::string c = "one";  // one | kernel
  std::string h = "halfline:0";
  std::optional<int> ell;
  int grid = 200;
};
int cmd_factors(const FactorArgs& a, std::ostream& out);

struct SweepArgs {
  std::string approx, target;  // templates with {p}, {k/p}, {p+k} placeholders
  std::string range = "30:50";  // lo:hi[:step]
  std::string metric = "tv", method = "score";
  std::optional<int> ell;
  bool oracle = true;
};
int cmd_sweep(const SweepArgs& a, std::ostream& out);

struct VerifyArgs {
  std::string suite = "all";
  std::uint64_t seed = 1;
};
int cmd_verify(const VerifyArgs& a, std::ostream& out);

//! substitutes every placeholder of a sweep template; exposed for tests
std::string instantiate(const std::string& tmpl, double p);

}  // namespace stein::cli
