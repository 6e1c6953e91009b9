// heavytail: fit lognormal, GEV and GPD models to monthly premium series.
//
//   heavytail fit --input premiums.csv --out-dir results [--emit-plots]
//   heavytail diagnose --input premiums.csv --out-dir plots
//   heavytail synth --seed 42 --output premiums.csv
//
// Exit codes: 0 success, 1 usage error, 2 data error.

#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "heavytail/heavytail.hpp"

namespace {

constexpr int kUsageError = 1;
constexpr int kDataError = 2;

struct Options {
  std::string input;
  std::string out_dir = ".";
  double alpha = 0.05;
  std::size_t reps = 1000;
  std::uint64_t seed = 42;
  std::string threshold = "auto";
  std::size_t blocks = 10;
  std::string method = "pot";
  std::string block_assignment = "contiguous";
  std::string p_method = "bootstrap";
  std::string company;
  std::string format = "csv";
  bool emit_plots = false;
  std::string output = "-";
};

std::vector<heavytail::Sample> select_companies(const heavytail::Dataset& dataset, const std::string& company) {
  if (company.empty()) return dataset.companies;
  const auto* found = dataset.find(company);
  if (!found) throw heavytail::DataError("company '" + company + "' not found in " + dataset.source_path);
  return {*found};
}

heavytail::RunConfig make_config(const Options& o) {
  heavytail::RunConfig config;
  config.alpha = o.alpha;
  config.bootstrap_reps = o.reps;
  config.seed = o.seed;
  if (o.threshold != "auto") {
    std::size_t used = 0;
    double value = 0.0;
    try {
      value = std::stod(o.threshold, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != o.threshold.size() || !(value > 0.0))
      throw CLI::ValidationError("--threshold", "expected 'auto' or a positive number");
    config.threshold = value;
  }
  config.block_count = o.blocks;
  config.method = o.method == "block-maxima" ? heavytail::GevMethod::block_maxima : heavytail::GevMethod::pot;
  config.block_assignment =
      o.block_assignment == "random" ? heavytail::BlockAssignment::random : heavytail::BlockAssignment::contiguous;
  config.p_method = o.p_method == "asymptotic" ? heavytail::PMethod::asymptotic : heavytail::PMethod::bootstrap;
  config.out_dir = o.out_dir;
  config.emit_plots = o.emit_plots;
  return config;
}

int run_fit(const Options& o) {
  const heavytail::RunConfig config = make_config(o);
  const heavytail::Dataset dataset = heavytail::load_csv(o.input);
  for (const auto& w : dataset.warnings) std::cerr << "warning: " << w << "\n";
  const heavytail::Dataset selected{select_companies(dataset, o.company), dataset.source_path, {}};

  const auto reports = heavytail::analyze_dataset(selected, config);
  for (const auto& r : reports)
    for (const auto& w : r.warnings) std::cerr << "warning: " << r.company << ": " << w << "\n";

  const auto format = o.format == "json" ? heavytail::TableFormat::json : heavytail::TableFormat::csv;
  for (const auto& path : heavytail::render_tables(reports, format, config.out_dir))
    std::cout << path.string() << "\n";
  if (config.emit_plots) {
    for (std::size_t i = 0; i < reports.size(); ++i) {
      const auto series = heavytail::fit_diagnostics(selected.companies[i], reports[i], config);
      for (const auto& path : heavytail::emit_plot_files(reports[i].company, series, config.out_dir))
        std::cout << path.string() << "\n";
    }
  }
  return 0;
}

int run_diagnose(const Options& o) {
  const heavytail::Dataset dataset = heavytail::load_csv(o.input);
  for (const auto& w : dataset.warnings) std::cerr << "warning: " << w << "\n";
  for (const auto& sample : select_companies(dataset, o.company)) {
    for (const auto& path :
         heavytail::emit_plot_files(sample.label, heavytail::sample_diagnostics(sample), o.out_dir))
      std::cout << path.string() << "\n";
  }
  return 0;
}

int run_synth(const Options& o) {
  const std::string csv = heavytail::synthetic_premiums_csv(o.seed);
  if (o.output == "-") {
    std::cout << csv;
    return 0;
  }
  std::ofstream out(o.output, std::ios::binary);
  if (!out || !(out << csv)) throw std::runtime_error("cannot write " + o.output);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Heavy-tail distribution fitting for monthly premium series"};
  app.require_subcommand(1);
  Options o;

  auto* fit = app.add_subcommand("fit", "Fit lognormal, GEV and GPD models and write result tables");
  fit->add_option("--input", o.input, "CSV with header company,period,premium")->required();
  fit->add_option("--out-dir", o.out_dir, "Output directory");
  fit->add_option("--alpha", o.alpha, "Significance level")->check(CLI::Range(1e-9, 1.0 - 1e-9));
  fit->add_option("--bootstrap-reps", o.reps, "Parametric bootstrap replicates")->check(CLI::Range(99, 100000000));
  fit->add_option("--seed", o.seed, "Master seed");
  fit->add_option("--threshold", o.threshold, "POT threshold: auto or a value");
  fit->add_option("--blocks", o.blocks, "Block count for block maxima")->check(CLI::Range(2, 1000000));
  fit->add_option("--method", o.method, "GEV pipeline")->check(CLI::IsMember({"pot", "block-maxima"}));
  fit->add_option("--block-assignment", o.block_assignment, "Block assignment")
      ->check(CLI::IsMember({"contiguous", "random"}));
  fit->add_option("--p-method", o.p_method, "KS and chi-square p-values")
      ->check(CLI::IsMember({"bootstrap", "asymptotic"}));
  fit->add_option("--company", o.company, "Analyze a single company");
  fit->add_option("--format", o.format, "Table format")->check(CLI::IsMember({"csv", "json"}));
  fit->add_flag("--emit-plots", o.emit_plots, "Also write plot-series CSV files");

  auto* diagnose = app.add_subcommand("diagnose", "Write diagnostic plot series only");
  diagnose->add_option("--input", o.input, "CSV with header company,period,premium")->required();
  diagnose->add_option("--out-dir", o.out_dir, "Output directory");
  diagnose->add_option("--company", o.company, "Analyze a single company");

  auto* synth = app.add_subcommand("synth", "Regenerate the synthetic premium dataset");
  synth->add_option("--seed", o.seed, "Master seed");
  synth->add_option("--output", o.output, "Output path, - for stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kUsageError;
  }

  try {
    if (*fit) return run_fit(o);
    if (*diagnose) return run_diagnose(o);
    if (*synth) return run_synth(o);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n" << app.help();
    return kUsageError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kDataError;
  }
  return kUsageError;
}
