// qwot: command-line front end for the quantum transport toolkit.
//
// Exit codes: 0 success, 1 assertion failures in a verify campaign,
// 2 solver non-convergence, 3 parse error, 4 validation error.

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "qwot/qwot.hpp"

namespace {

constexpr int kExitPass = 0;
constexpr int kExitAssertFail = 1;
constexpr int kExitNoConverge = 2;
constexpr int kExitParse = 3;
constexpr int kExitValidation = 4;

struct GenArgs {
  std::string kind;
  int dim = 2;
  std::uint64_t seed = 42;
};

int cmd_gen(const GenArgs& args) {
  qwot::SplitMix64 rng(args.seed);
  qwot::ComplexMatrix m;
  if (args.kind == "pure") {
    m = qwot::random_pure(args.dim, rng).matrix();
  } else if (args.kind == "mixed") {
    m = qwot::random_mixed(args.dim, rng).matrix();
  } else if (args.kind == "hermitian") {
    m = qwot::random_hermitian(args.dim, rng).matrix();
  } else {
    throw qwot::ValidationError("gen: kind must be pure, mixed or hermitian");
  }
  std::cout << qwot::matrix_to_json_string(m) << "\n";
  return kExitPass;
}

struct DistanceArgs {
  std::string state_a, state_b, ops;
  std::string definition = "both";
  qwot::SolverOptions solver;
};

void print_distance(const char* label, const qwot::DistanceResult& r) {
  std::printf("%s.d2 = %s\n", label, qwot::format_real(r.d_squared).c_str());
  std::printf("%s.dual_bound = %s\n", label, qwot::format_real(0.5 * r.dual_bound).c_str());
  std::printf("%s.rel_gap = %s\n", label, qwot::format_real(r.rel_gap).c_str());
  std::printf("%s.iterations = %ld\n", label, r.iterations);
  std::printf("%s.converged = %s\n", label, r.converged ? "true" : "false");
}

int cmd_distance(const DistanceArgs& args) {
  const qwot::DensityMatrix rho = qwot::DensityMatrix::validated(qwot::load_matrix(args.state_a));
  const qwot::DensityMatrix sig = qwot::DensityMatrix::validated(qwot::load_matrix(args.state_b));
  std::vector<qwot::Observable> hs;
  for (auto& m : qwot::load_matrix_list(args.ops))
    hs.push_back(qwot::Observable::validated(std::move(m)));

  bool all_converged = true;
  if (args.definition == "gmpc" || args.definition == "both") {
    const qwot::DistanceResult r = qwot::d2_gmpc(rho, sig, hs, args.solver);
    print_distance("gmpc", r);
    all_converged = all_converged && r.converged;
  }
  if (args.definition == "dpt" || args.definition == "both") {
    const qwot::DistanceResult r = qwot::d2_dpt(rho, sig, hs, args.solver);
    print_distance("dpt", r);
    all_converged = all_converged && r.converged;
  }
  return all_converged ? kExitPass : kExitNoConverge;
}

struct VerifyArgs {
  std::string campaign;
  std::uint64_t seed = 42;
  long trials = -1;        // -1 = campaign default
  int dim = 2;
  int n_ops = 1;
  double tol = -1;         // -1 = campaign default
  double assert_tol = -1;  // -1 = campaign default
  long max_iters = 200000;
  std::string out_dir;
  std::string format = "json";
  std::string ensemble = "both";
};

int cmd_verify(const VerifyArgs& args) {
  qwot::ExperimentConfig cfg = qwot::default_config(args.campaign);
  cfg.seed = args.seed;
  if (args.trials > 0) cfg.trials = args.trials;
  cfg.dim = args.dim;
  cfg.n_ops = args.n_ops;
  if (args.tol > 0) cfg.tol_solver = args.tol;
  if (args.assert_tol > 0) cfg.tol_assert = args.assert_tol;
  cfg.max_iters = args.max_iters;
  cfg.ensemble = qwot::ensemble_from_string(args.ensemble);

  const qwot::CampaignResult res = qwot::run_campaign(args.campaign, cfg);

  if (!args.out_dir.empty()) {
    std::filesystem::create_directories(args.out_dir);
    const std::filesystem::path base = std::filesystem::path(args.out_dir) / res.name;
    std::ofstream csv(base.string() + ".csv", std::ios::binary);
    qwot::write_csv(res, csv);
    std::ofstream js(base.string() + ".json", std::ios::binary);
    qwot::write_json_summary(res, js);
  }
  if (args.format == "csv") {
    qwot::write_csv(res, std::cout);
  } else {
    qwot::write_json_summary(res, std::cout);
  }
  return res.pass() ? kExitPass : kExitAssertFail;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"quantum Wasserstein-2 transport distances: compute, bound and verify"};
  app.require_subcommand(1);

  GenArgs gen;
  CLI::App* gen_cmd = app.add_subcommand("gen", "emit a random matrix in the shared JSON format");
  gen_cmd->add_option("kind", gen.kind, "pure | mixed | hermitian")->required();
  gen_cmd->add_option("--dim", gen.dim, "matrix dimension")->check(CLI::Range(2, 16));
  gen_cmd->add_option("--seed", gen.seed, "RNG seed")->envname("QWOT_SEED");

  DistanceArgs dist;
  CLI::App* dist_cmd = app.add_subcommand("distance", "squared transport distance between two states");
  dist_cmd->add_option("--state-a", dist.state_a, "JSON file with the first state")->required();
  dist_cmd->add_option("--state-b", dist.state_b, "JSON file with the second state")->required();
  dist_cmd->add_option("--ops", dist.ops, "JSON file with the cost operator(s)")->required();
  dist_cmd->add_option("--definition", dist.definition, "gmpc | dpt | both")
      ->check(CLI::IsMember({"gmpc", "dpt", "both"}));
  dist_cmd->add_option("--tol", dist.solver.tol, "solver tolerance");
  dist_cmd->add_option("--max-iters", dist.solver.max_iters, "solver iteration cap");
  dist_cmd->add_option("--over-relax", dist.solver.over_relax, "over-relaxation factor");

  VerifyArgs ver;
  CLI::App* ver_cmd = app.add_subcommand("verify", "run a randomized verification campaign");
  ver_cmd->add_option("campaign", ver.campaign,
                      "theorem1 | selfdist | lemma1 | bounds | transpose | ground-energy")
      ->required()
      ->check(CLI::IsMember(
          {"theorem1", "selfdist", "lemma1", "bounds", "transpose", "ground-energy"}));
  ver_cmd->add_option("--seed", ver.seed, "base seed; per-trial streams are seed XOR trial")
      ->envname("QWOT_SEED");
  ver_cmd->add_option("--trials", ver.trials, "number of trials (campaign default if omitted)");
  ver_cmd->add_option("--dim", ver.dim, "local dimension")->check(CLI::Range(2, 16));
  ver_cmd->add_option("--n-ops", ver.n_ops, "number of cost operators")->check(CLI::Range(1, 8));
  ver_cmd->add_option("--tol", ver.tol, "solver tolerance");
  ver_cmd->add_option("--assert-tol", ver.assert_tol, "per-trial gap threshold");
  ver_cmd->add_option("--max-iters", ver.max_iters, "solver iteration cap");
  ver_cmd->add_option("--out", ver.out_dir, "directory for the CSV and JSON reports");
  ver_cmd->add_option("--format", ver.format, "stdout payload: json | csv")
      ->check(CLI::IsMember({"json", "csv"}));
  ver_cmd->add_option("--ensemble", ver.ensemble, "haar-pure | ginibre-mixed | both")
      ->check(CLI::IsMember({"haar-pure", "ginibre-mixed", "both"}));

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen_cmd->parsed()) return cmd_gen(gen);
    if (dist_cmd->parsed()) return cmd_distance(dist);
    if (ver_cmd->parsed()) return cmd_verify(ver);
  } catch (const qwot::ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return kExitParse;
  } catch (const qwot::ValidationError& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitAssertFail;
  }
  return kExitPass;
}
