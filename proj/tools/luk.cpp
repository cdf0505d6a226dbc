#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "luk/data.hpp"
#include "luk/train.hpp"

using namespace luk;

namespace {

std::vector<double> parse_point(const std::string& text) {
  std::vector<double> v;
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ',')) v.push_back(std::stod(tok));
  return v;
}

/// --mode grid:N | data:FILE | mc:K[:SEED]
EvalMode parse_mode(const std::string& text) {
  size_t colon = text.find(':');
  std::string kind = text.substr(0, colon);
  std::string rest = colon == std::string::npos ? "" : text.substr(colon + 1);
  if (kind == "grid") return EvalMode::full_grid(std::stoi(rest));
  if (kind == "data") {
    Dataset d = load_dataset_csv(rest);
    return EvalMode::dataset(d.rows);
  }
  if (kind == "mc") {
    size_t c2 = rest.find(':');
    int samples = std::stoi(rest.substr(0, c2));
    uint64_t seed = c2 == std::string::npos ? 0 : std::stoull(rest.substr(c2 + 1));
    return EvalMode::monte_carlo(samples, seed);
  }
  throw std::runtime_error("unknown eval mode: " + text +
                           " (expected grid:N, data:FILE, or mc:K[:SEED])");
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write: " + path);
  out << content;
}

int default_jobs() {
  if (const char* env = std::getenv("LUK_JOBS")) return std::max(1, std::atoi(env));
  return 1;
}

TrainConfig load_train_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return train_config_from_json(ss.str());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Lukasiewicz-logic neural network toolkit"};
  app.require_subcommand(1);

  // eval
  std::string eval_formula_text, eval_at;
  auto* eval_cmd = app.add_subcommand("eval", "Evaluate a formula at a point");
  eval_cmd->add_option("formula", eval_formula_text, "Formula")->required();
  eval_cmd->add_option("--at", eval_at, "Comma-separated truth values")->required();

  // table
  std::string table_formula_text, table_out;
  int table_n = 1;
  auto* table_cmd = app.add_subcommand("table", "Write the truth subtable of a formula");
  table_cmd->add_option("formula", table_formula_text, "Formula")->required();
  table_cmd->add_option("-n,--resolution", table_n, "Grid resolution n")->required();
  table_cmd->add_option("-o,--output", table_out, "Output CSV (stdout when absent)");

  // compile
  std::string compile_formula_text, compile_out;
  auto* compile_cmd = app.add_subcommand("compile", "Compile a formula to a network");
  compile_cmd->add_option("formula", compile_formula_text, "Formula")->required();
  compile_cmd->add_option("-o,--output", compile_out, "Output network file (stdout when absent)");

  // interpret
  std::string interp_net, interp_mode = "grid:2", interp_report;
  int interp_beam = kDefaultBeamWidth;
  auto* interp_cmd = app.add_subcommand("interpret", "Extract a formula from a network");
  interp_cmd->add_option("network", interp_net, "Network file, psi(...) literal, or compile:FORMULA")
      ->required();
  interp_cmd->add_option("--mode", interp_mode, "grid:N | data:FILE | mc:K[:SEED]");
  interp_cmd->add_option("--beam", interp_beam, "Approximation beam width");
  interp_cmd->add_option("--report", interp_report, "Write the full JSON report here");

  // similar
  std::string sim_a, sim_b, sim_mode = "grid:2";
  auto* sim_cmd = app.add_subcommand("similar", "Lambda similarity of two evaluables");
  sim_cmd->add_option("a", sim_a, "Network/psi literal/formula")->required();
  sim_cmd->add_option("b", sim_b, "Network/psi literal/formula")->required();
  sim_cmd->add_option("--mode", sim_mode, "grid:N | data:FILE | mc:K[:SEED]");

  // reveng
  std::string rev_csv, rev_out, rev_report, rev_config;
  TrainConfig rev_cfg;
  rev_cfg.jobs = default_jobs();
  bool rev_verbose = false;
  auto* rev_cmd = app.add_subcommand("reveng", "Reverse-engineer a formula from data");
  rev_cmd->add_option("data", rev_csv, "Training CSV (features..., y)")->required();
  auto* cfg_opt = rev_cmd->add_option("--config", rev_config, "Train config JSON file");
  rev_cmd->add_option("--target-mse", rev_cfg.target_mse, "Target mean squared error");
  rev_cmd->add_option("--seed", rev_cfg.rng_seed, "RNG seed");
  rev_cmd->add_option("--max-iterations", rev_cfg.max_iterations, "LM iteration budget");
  rev_cmd->add_option("--restarts", rev_cfg.restarts_per_topology,
                      "Restarts per topology (0 = auto)");
  rev_cmd->add_option("--topologies", rev_cfg.max_topologies, "Topology attempts");
  rev_cmd->add_option("--beam", rev_cfg.beam_width, "Approximation beam width");
  rev_cmd->add_option("--jobs", rev_cfg.jobs, "Parallel restarts");
  rev_cmd->add_flag("--verbose", rev_verbose, "Log accepted LM iterations to stderr");
  rev_cmd->add_option("-o,--output", rev_out, "Output network file");
  rev_cmd->add_option("--report", rev_report, "Extraction report JSON file");

  // binarize
  std::string bin_csv, bin_class, bin_positive, bin_out;
  auto* bin_cmd = app.add_subcommand("binarize", "One-hot encode a nominal CSV");
  bin_cmd->add_option("data", bin_csv, "Nominal CSV with header")->required();
  bin_cmd->add_option("--class", bin_class, "Class column name")->required();
  bin_cmd->add_option("--positive", bin_positive, "Positive class value")->required();
  bin_cmd->add_option("-o,--output", bin_out, "Output CSV (stdout when absent)");

  // enrich
  std::string enr_csv, enr_out;
  double enr_factor = 0.5;
  auto* enr_cmd = app.add_subcommand("enrich", "Append scaled negative cases");
  enr_cmd->add_option("data", enr_csv, "Dataset CSV")->required();
  enr_cmd->add_option("--factor", enr_factor, "Feature scale for the negative copies");
  enr_cmd->add_option("-o,--output", enr_out, "Output CSV (stdout when absent)");

  // select
  std::string sel_csv, sel_config;
  TrainConfig sel_cfg;
  sel_cfg.jobs = default_jobs();
  auto* sel_cmd = app.add_subcommand("select", "Model-driven attribute selection");
  sel_cmd->add_option("data", sel_csv, "Dataset CSV")->required();
  auto* sel_cfg_opt = sel_cmd->add_option("--config", sel_config, "Train config JSON file");
  sel_cmd->add_option("--target-mse", sel_cfg.target_mse, "Target mean squared error");
  sel_cmd->add_option("--seed", sel_cfg.rng_seed, "RNG seed");
  sel_cmd->add_option("--max-iterations", sel_cfg.max_iterations, "LM iteration budget");
  sel_cmd->add_option("--restarts", sel_cfg.restarts_per_topology,
                      "Restarts per topology (0 = auto)");
  sel_cmd->add_option("--topologies", sel_cfg.max_topologies, "Topology attempts");
  sel_cmd->add_option("--jobs", sel_cfg.jobs, "Parallel restarts");

  // accuracy
  std::string acc_model, acc_csv;
  double acc_threshold = 0.5;
  auto* acc_cmd = app.add_subcommand("accuracy", "Classification accuracy of a model");
  acc_cmd->add_option("model", acc_model, "Network file, psi literal, or formula")->required();
  acc_cmd->add_option("data", acc_csv, "Dataset CSV")->required();
  acc_cmd->add_option("--threshold", acc_threshold, "Decision threshold");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*eval_cmd) {
      auto f = parse_formula(eval_formula_text);
      double v = eval_formula(*f, parse_point(eval_at));
      std::ostringstream ss;
      ss.precision(12);
      ss << v;
      std::cout << ss.str() << "\n";
    } else if (*table_cmd) {
      auto f = parse_formula(table_formula_text);
      auto t = truth_subtable(*f, table_n);
      std::ostringstream ss;
      write_truth_table_csv(t, ss);
      if (table_out.empty())
        std::cout << ss.str();
      else
        write_file(table_out, ss.str());
    } else if (*compile_cmd) {
      auto net = compile_formula(*parse_formula(compile_formula_text));
      std::string text = network_to_json(net);
      if (compile_out.empty())
        std::cout << text;
      else
        write_file(compile_out, text);
    } else if (*interp_cmd) {
      Network net = resolve_network_argument(interp_net);
      EvalMode mode = parse_mode(interp_mode);
      auto rep = extract_with_approximation(net, mode, interp_beam);
      std::cout << format_formula(*rep.formula) << "\n";
      std::cout << "lambda = " << rep.lambda << " (" << rep.eval_mode << ")\n";
      if (!interp_report.empty()) write_file(interp_report, rep.to_json());
    } else if (*sim_cmd) {
      EvalMode mode = parse_mode(sim_mode);
      auto a = as_evaluable(resolve_network_argument(sim_a));
      auto b = as_evaluable(resolve_network_argument(sim_b));
      std::ostringstream ss;
      ss.precision(12);
      ss << lambda_similarity(a, b, mode).lambda;
      std::cout << ss.str() << "\n";
    } else if (*rev_cmd) {
      if (!cfg_opt->empty()) {
        // --config replaces the defaults; explicit flags still override.
        TrainConfig base = load_train_config(rev_config);
        if (rev_cmd->count("--target-mse")) base.target_mse = rev_cfg.target_mse;
        if (rev_cmd->count("--seed")) base.rng_seed = rev_cfg.rng_seed;
        if (rev_cmd->count("--max-iterations")) base.max_iterations = rev_cfg.max_iterations;
        if (rev_cmd->count("--restarts")) base.restarts_per_topology = rev_cfg.restarts_per_topology;
        if (rev_cmd->count("--topologies")) base.max_topologies = rev_cfg.max_topologies;
        if (rev_cmd->count("--beam")) base.beam_width = rev_cfg.beam_width;
        if (rev_cmd->count("--jobs")) base.jobs = rev_cfg.jobs;
        rev_cfg = base;
      }
      rev_cfg.verbose = rev_verbose;
      Dataset d = load_dataset_csv(rev_csv);
      auto out = reverse_engineer(d, rev_cfg);
      std::cout << format_formula(*out.report.formula) << "\n";
      std::cout << "mse = " << out.mse << (out.converged ? "" : " (unconverged)") << "\n";
      if (!rev_out.empty()) write_file(rev_out, network_to_json(out.best));
      if (!rev_report.empty()) write_file(rev_report, out.report.to_json());
      if (!out.converged) return 2;
    } else if (*bin_cmd) {
      auto t = load_nominal_csv(bin_csv, bin_class, bin_positive);
      auto d = binarize(t);
      std::ostringstream ss;
      write_dataset_csv(d, ss);
      if (bin_out.empty())
        std::cout << ss.str();
      else
        write_file(bin_out, ss.str());
    } else if (*enr_cmd) {
      auto d = enrich_negative(load_dataset_csv(enr_csv), enr_factor);
      std::ostringstream ss;
      write_dataset_csv(d, ss);
      if (enr_out.empty())
        std::cout << ss.str();
      else
        write_file(enr_out, ss.str());
    } else if (*sel_cmd) {
      if (!sel_cfg_opt->empty()) {
        TrainConfig base = load_train_config(sel_config);
        if (sel_cmd->count("--target-mse")) base.target_mse = sel_cfg.target_mse;
        if (sel_cmd->count("--seed")) base.rng_seed = sel_cfg.rng_seed;
        if (sel_cmd->count("--max-iterations")) base.max_iterations = sel_cfg.max_iterations;
        if (sel_cmd->count("--restarts")) base.restarts_per_topology = sel_cfg.restarts_per_topology;
        if (sel_cmd->count("--topologies")) base.max_topologies = sel_cfg.max_topologies;
        if (sel_cmd->count("--jobs")) base.jobs = sel_cfg.jobs;
        sel_cfg = base;
      }
      Dataset d = load_dataset_csv(sel_csv);
      auto rep = select_attributes(d, sel_cfg);
      std::cout << rep.to_json();
      if (!rep.converged) return 2;
    } else if (*acc_cmd) {
      Dataset d = load_dataset_csv(acc_csv);
      auto model = as_evaluable(resolve_network_argument(acc_model));
      auto r = classify_accuracy(model, d, acc_threshold);
      std::cout << "accuracy = " << r.accuracy << "\n";
      std::cout << "misses = " << r.misses << " of " << r.total << "\n";
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
