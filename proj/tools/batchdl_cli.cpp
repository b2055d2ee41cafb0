// Command-line front end: patch extraction, learning, encoding, evaluation
// and equal-budget comparisons. Run `batchdl --help` for the verbs.

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "batchdl/bench.hpp"
#include "batchdl/io.hpp"
#include "batchdl/sparse_coding.hpp"

namespace {

using namespace batchdl;

struct LearnFlags {
  std::string input;
  std::string held_out;
  Index atoms = 0;
  Index budget = 0;
  int iters = 20;
  int init_iters = 80;
  int n1 = 3;
  int n2 = 10;
  double epsilon = 1e-6;
  double trigger = 0.05;
  std::optional<double> pair_fraction;
  std::uint64_t seed = 0;
  bool normalize = false;
  std::string report_out;
};

void add_learn_flags(CLI::App* cmd, LearnFlags& f) {
  cmd->add_option("--in", f.input, "Sample matrix file (m x p)")->required()->check(CLI::ExistingFile);
  cmd->add_option("--atoms", f.atoms, "Number of dictionary atoms n")->required();
  cmd->add_option("--budget", f.budget, "Total nonzero budget K")->required();
  cmd->add_option("--iters", f.iters, "Outer iterations (BatchSVD) / K-SVD iterations")->capture_default_str();
  cmd->add_option("--init-iters", f.init_iters, "Block-OMP initialisation iterations T")->capture_default_str();
  cmd->add_option("--n1", f.n1, "Inner-row iterations per row visit")->capture_default_str();
  cmd->add_option("--n2", f.n2, "Amplitude adjustment iterations")->capture_default_str();
  cmd->add_option("--epsilon", f.epsilon, "Outer stopping decrement")->capture_default_str();
  cmd->add_option("--trigger", f.trigger, "Inter-row activation threshold")->capture_default_str();
  cmd->add_option("--pair-fraction", f.pair_fraction, "Fraction of row pairs visited per inter-row phase");
  cmd->add_option("--seed", f.seed, "Random seed")->capture_default_str();
  cmd->add_flag("--normalize", f.normalize, "Scale every sample to unit norm first");
  cmd->add_option("--heldout", f.held_out, "Held-out sample matrix for open-set evaluation")
      ->check(CLI::ExistingFile);
  cmd->add_option("--report-out", f.report_out, "JSON report path (stdout when omitted)");
}

BenchmarkSetup make_setup(const LearnFlags& f, const DenseMatrix& y) {
  BenchmarkSetup setup;
  setup.atoms = f.atoms;
  setup.learn.budget = f.budget;
  setup.learn.max_outer = f.iters;
  setup.learn.init_iterations = f.init_iters;
  setup.learn.inner_sweeps = f.n1;
  setup.learn.amplitude_iterations = f.n2;
  setup.learn.epsilon = f.epsilon;
  setup.learn.trigger = f.trigger;
  setup.learn.pair_fraction = f.pair_fraction;
  setup.learn.seed = f.seed;
  if (!f.held_out.empty()) {
    DenseMatrix held = load_matrix(f.held_out);
    if (f.normalize) normalize_columns(held);
    setup.held_out = std::move(held);
  }
  setup.learn.validate(f.atoms, y.cols());
  return setup;
}

DenseMatrix load_samples(const LearnFlags& f) {
  DenseMatrix y = load_matrix(f.input);
  if (f.normalize) normalize_columns(y);
  return y;
}

template <typename Json>
void emit(const Json& j, const std::string& path) {
  const std::string text = j.dump(2) + "\n";
  if (path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw InvalidArgument("cannot open '" + path + "' for writing");
  out << text;
}

void print_error(const char* kind, const std::string& message) {
  nlohmann::ordered_json j;
  j["error"] = kind;
  j["message"] = message;
  std::cerr << j.dump() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Batchwise monotone dictionary learning"};
  app.require_subcommand(1);

  // patches
  std::string image_path, patches_out;
  PatchSpec patch_spec;
  auto* patches = app.add_subcommand("patches", "Sample square patches from a PGM image");
  patches->add_option("--in", image_path, "PGM image (P2 or P5)")->required()->check(CLI::ExistingFile);
  patches->add_option("--patch-size", patch_spec.patch_size, "Patch side in pixels")->capture_default_str();
  patches->add_option("--count", patch_spec.patch_count, "Number of patches")->capture_default_str();
  patches->add_option("--seed", patch_spec.seed, "Random seed")->capture_default_str();
  patches->add_option("--out", patches_out, "Output matrix file")->required();

  // learn
  LearnFlags learn_flags;
  std::string learn_algo = "batch", dict_out, coef_out;
  auto* learn_cmd = app.add_subcommand("learn", "Learn a dictionary and sparse codes");
  learn_cmd->add_option("--algo", learn_algo, "batch | ksvd | rnd-omp")->capture_default_str();
  add_learn_flags(learn_cmd, learn_flags);
  learn_cmd->add_option("--dict-out", dict_out, "Dictionary output (matrix format)");
  learn_cmd->add_option("--coef-out", coef_out, "Coefficient output (sparse format)");

  // encode
  std::string enc_in, enc_dict, enc_coef_out, enc_algo = "batch", enc_report;
  Index enc_budget = 0;
  bool enc_normalize = false;
  auto* encode = app.add_subcommand("encode", "Sparse-code samples with a fixed dictionary");
  encode->add_option("--in", enc_in, "Sample matrix file")->required()->check(CLI::ExistingFile);
  encode->add_option("--dict", enc_dict, "Dictionary matrix file")->required()->check(CLI::ExistingFile);
  encode->add_option("--budget", enc_budget, "Total nonzero budget K")->required();
  encode->add_option("--algo", enc_algo,
                     "batch: block OMP on the whole batch; ksvd / rnd-omp: OMP with floor(K/p) per sample")
      ->capture_default_str();
  encode->add_flag("--normalize", enc_normalize, "Scale every sample to unit norm first");
  encode->add_option("--coef-out", enc_coef_out, "Coefficient output (sparse format)")->required();
  encode->add_option("--report-out", enc_report, "Optional JSON error report");

  // eval
  std::string ev_in, ev_dict, ev_coef, ev_report, ev_label = "eval";
  std::uint64_t ev_seed = 0;
  auto* eval = app.add_subcommand("eval", "Report reconstruction errors of a stored factorisation");
  eval->add_option("--in", ev_in, "Sample matrix file")->required()->check(CLI::ExistingFile);
  eval->add_option("--dict", ev_dict, "Dictionary matrix file")->required()->check(CLI::ExistingFile);
  eval->add_option("--coef", ev_coef, "Coefficient file")->required()->check(CLI::ExistingFile);
  eval->add_option("--label", ev_label, "Algorithm label written to the report")->capture_default_str();
  eval->add_option("--seed", ev_seed, "Seed echoed into the report")->capture_default_str();
  eval->add_option("--report-out", ev_report, "JSON report path (stdout when omitted)");

  // compare
  LearnFlags cmp_flags;
  std::vector<std::string> cmp_algos{"batch", "ksvd", "rnd-omp"};
  auto* compare = app.add_subcommand("compare", "Run several algorithms at the same total budget");
  add_learn_flags(compare, cmp_flags);
  compare->add_option("--algos", cmp_algos, "Algorithms to run")->delimiter(',')->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    print_error("usage", e.what());
    return 2;
  }

  try {
    if (*patches) {
      save_matrix(patches_out, extract_patches(load_pgm(image_path), patch_spec));
    } else if (*learn_cmd) {
      const DenseMatrix y = load_samples(learn_flags);
      const BenchmarkSetup setup = make_setup(learn_flags, y);
      const LearnOutcome outcome = learn(y, setup, parse_algo(learn_algo));
      if (!dict_out.empty()) save_matrix(dict_out, outcome.a);
      if (!coef_out.empty()) save_sparse(coef_out, outcome.x);
      emit(to_json(outcome.report), learn_flags.report_out);
    } else if (*encode) {
      DenseMatrix y = load_matrix(enc_in);
      if (enc_normalize) normalize_columns(y);
      DenseMatrix a = load_matrix(enc_dict);
      for (Index i = 0; i < a.cols(); ++i) {
        if (a.col(i).norm() > 0.0) a.col(i).normalize();
      }
      const Algo algo = parse_algo(enc_algo);
      SparseCoeff x;
      if (algo == Algo::Batch) {
        x = block_omp(y, a, enc_budget).x;
      } else {
        const Index k = per_sample_sparsity(enc_budget, a.rows(), a.cols(), y.cols());
        x = SparseCoeff(a.cols(), y.cols());
        for (Index j = 0; j < y.cols(); ++j) {
          const OmpResult code = omp(y.col(j), a, k);
          for (std::size_t t = 0; t < code.support.size(); ++t) {
            x.set(code.support[t], j, code.coeffs(static_cast<Index>(t)));
          }
        }
      }
      save_sparse(enc_coef_out, x);
      if (!enc_report.empty()) emit(to_json(make_report(enc_algo, y, a, x, enc_budget, 0)), enc_report);
    } else if (*eval) {
      const DenseMatrix y = load_matrix(ev_in);
      const DenseMatrix a = load_matrix(ev_dict);
      const SparseCoeff x = load_sparse(ev_coef);
      emit(to_json(make_report(ev_label, y, a, x, static_cast<Index>(x.nnz()), ev_seed)), ev_report);
    } else if (*compare) {
      const DenseMatrix y = load_samples(cmp_flags);
      BenchmarkSetup setup = make_setup(cmp_flags, y);
      setup.algos.clear();
      for (const auto& name : cmp_algos) setup.algos.push_back(parse_algo(name));
      nlohmann::ordered_json reports = nlohmann::ordered_json::array();
      for (const auto& report : run_benchmark(y, setup)) reports.push_back(to_json(report));
      emit(reports, cmp_flags.report_out);
    }
  } catch (const ParseError& e) {
    print_error("parse_error", e.what());
    return 1;
  } catch (const InvalidArgument& e) {
    print_error("invalid_argument", e.what());
    return 1;
  } catch (const NumericalError& e) {
    print_error("numerical_error", e.what());
    return 1;
  } catch (const std::exception& e) {
    print_error("internal_error", e.what());
    return 1;
  }
  return 0;
}
