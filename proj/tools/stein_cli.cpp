#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "commands.hpp"
#include "stein/distances.hpp"

using namespace stein;

namespace {

const char* kGrammar =
    "Distributions are written name(arg,...), e.g. normal(0,1), gamma(2,5), student(40), poisson(1),\n"
    "binomial(40,0.025), paretomax(10,2.5), stdbinomial(100,0.3), rayleighn(100), rayleigh().\n"
    "Exit codes: 0 ok, 1 bad arguments, 2 an endpoint limit (kappa) failed, 3 verify found failures.";

void trace_to_stderr(const KappaError& e) {
  const auto& t = e.trace();
  std::cerr << "error: " << e.what() << "\n  endpoint " << t.endpoint << (t.upper ? " (upper)" : " (lower)")
            << ", verdict: " << t.verdict << "\n  x, log|F(x)|:\n";
  for (auto [x, lv] : t.points) std::cerr << "    " << x << ", " << lv << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stein-discrepancy bounds between pairs of laws"};
  app.footer(kGrammar);
  app.require_subcommand(1);
  std::string out_path;
  app.add_option("-o,--output", out_path, "write to a file instead of stdout");

  cli::BoundArgs ba;
  auto* bound = app.add_subcommand("bound", "JSON bound report for approx -> target");
  bound->add_option("approx", ba.approx, "approximating law")->required();
  bound->add_option("target", ba.target, "target law")->required();
  bound->add_option("--metric", ba.metric, "kol | tv | wass")->capture_default_str();
  bound->add_option("--method", ba.method, "score | kernel | cross")->capture_default_str();
  bound->add_option("--ell", ba.ell, "lattice direction -1, 0 or 1 (lattice default 1)");
  bound->add_flag("--both-directions", ba.both_directions, "also swap the roles of the two laws");
  bound->add_flag("!--no-oracle", ba.oracle, "skip the exact distance");
  bound->add_option("--z-grid", ba.z_grid, "quantile points for the kappa sup")->capture_default_str();

  cli::FactorArgs fa;
  auto* factors = app.add_subcommand("factors", "CSV of the solution and every applicable factor curve");
  factors->set_help_flag("--help", "print this help and exit");  // -h would clash with --h
  factors->add_option("target", fa.target)->required();
  factors->add_option("--c", fa.c, "one | kernel")->capture_default_str();
  factors->add_option("--h", fa.h, "halfline:xi | pointmass:xi")->capture_default_str();
  factors->add_option("--ell", fa.ell);
  factors->add_option("--grid", fa.grid, "points per grid part")->capture_default_str();

  cli::SweepArgs sa;
  auto* sweep = app.add_subcommand("sweep", "CSV of bound, oracle and printed competitors over one parameter");
  sweep->add_option("approx", sa.approx, "template, placeholders {p}, {k/p}, {p+k}")->required();
  sweep->add_option("target", sa.target, "template")->required();
  sweep->add_option("--range", sa.range, "lo:hi[:step]")->capture_default_str();
  sweep->add_option("--metric", sa.metric)->capture_default_str();
  sweep->add_option("--method", sa.method)->capture_default_str();
  sweep->add_option("--ell", sa.ell);
  sweep->add_flag("!--no-oracle", sa.oracle);

  cli::VerifyArgs va;
  auto* verify = app.add_subcommand("verify", "run invariant suites, JSON summary");
  verify->add_option("--suite", va.suite, "identities | factors | distances | all")->capture_default_str();
  verify->add_option("--seed", va.seed)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? cli::kOk : cli::kParseError;
  }

  std::ofstream file;
  if (!out_path.empty()) {
    file.open(out_path);
    if (!file) {
      std::cerr << "error: cannot write " << out_path << '\n';
      return cli::kParseError;
    }
  }
  std::ostream& out = out_path.empty() ? std::cout : file;
  try {
    if (*bound) return cli::cmd_bound(ba, out);
    if (*factors) return cli::cmd_factors(fa, out);
    if (*sweep) return cli::cmd_sweep(sa, out);
    return cli::cmd_verify(va, out);
  } catch (const KappaError& e) {
    trace_to_stderr(e);
    return cli::kKappaFailure;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return cli::kParseError;
  }
}
