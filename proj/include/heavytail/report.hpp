#ifndef HEAVYTAIL_REPORT_HPP
#define HEAVYTAIL_REPORT_HPP

// Premium CSV ingestion, the per-company analysis pipeline and table /
// plot-file output.

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "heavytail/diagnostics.hpp"
#include "heavytail/distributions.hpp"
#include "heavytail/estimation.hpp"
#include "heavytail/extremes.hpp"
#include "heavytail/gof.hpp"
#include "heavytail/sample.hpp"

namespace heavytail {

/// Malformed or invalid input data.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Input
// ---------------------------------------------------------------------------

struct Dataset {
  std::vector<Sample> companies;  // order of first appearance in the file
  std::string source_path;
  std::vector<std::string> warnings;

  const Sample* find(std::string_view company) const {
    for (const auto& s : companies)
      if (s.label == company) return &s;
    return nullptr;
  }
};

namespace detail {

inline std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) fields.push_back(trim(field));
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

// Months since year 0 for a YYYY-MM period, or nullopt if malformed.
inline std::optional<int> parse_period(std::string_view text) {
  if (text.size() != 7 || text[4] != '-') return std::nullopt;
  int year = 0, month = 0;
  if (std::from_chars(text.data(), text.data() + 4, year).ptr != text.data() + 4) return std::nullopt;
  if (std::from_chars(text.data() + 5, text.data() + 7, month).ptr != text.data() + 7) return std::nullopt;
  if (month < 1 || month > 12) return std::nullopt;
  return year * 12 + (month - 1);
}

inline std::string format_period(int index) {
  char buffer[16];
  std::snprintf(buffer, sizeof buffer, "%04d-%02d", index / 12, index % 12 + 1);
  return buffer;
}

}  // namespace detail

/// Parses `company,period,premium` rows (period YYYY-MM, premium > 0).
///
/// Rows are grouped by company and sorted by period. Duplicate periods are
/// errors; gaps in the monthly sequence are reported as warnings.
inline Dataset parse_csv(std::istream& in, std::string source = "<stream>") {
  Dataset dataset;
  dataset.source_path = std::move(source);
  std::string line;
  std::size_t line_no = 0;
  auto fail = [&](const std::string& what) {
    throw DataError(dataset.source_path + ":" + std::to_string(line_no) + ": " + what);
  };

  if (!std::getline(in, line)) {
    line_no = 1;
    fail("missing header");
  }
  ++line_no;
  if (line.size() >= 3 && static_cast<unsigned char>(line[0]) == 0xEF) line.erase(0, 3);  // UTF-8 BOM
  const auto header = detail::split_csv_line(line);
  if (header != std::vector<std::string>{"company", "period", "premium"})
    fail("expected header 'company,period,premium'");

  std::vector<std::string> order;
  std::map<std::string, std::map<int, double>> rows;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    const auto fields = detail::split_csv_line(line);
    if (fields.size() != 3) fail("expected 3 fields");
    if (fields[0].empty()) fail("empty company name");
    const auto period = detail::parse_period(fields[1]);
    if (!period) fail("period '" + fields[1] + "' is not YYYY-MM");
    double premium = 0.0;
    const auto& text = fields[2];
    const auto res = std::from_chars(text.data(), text.data() + text.size(), premium);
    if (res.ec != std::errc() || res.ptr != text.data() + text.size() || !std::isfinite(premium))
      fail("premium '" + text + "' is not a number");
    if (!(premium > 0.0)) fail("premium must be positive");
    auto [it, fresh] = rows.try_emplace(fields[0]);
    if (fresh) order.push_back(fields[0]);
    if (!it->second.emplace(*period, premium).second)
      fail("duplicate period " + fields[1] + " for " + fields[0]);
  }

  for (const auto& company : order) {
    const auto& by_period = rows.at(company);
    Sample s;
    s.label = company;
    s.period_start = detail::format_period(by_period.begin()->first);
    s.period_end = detail::format_period(by_period.rbegin()->first);
    int previous = by_period.begin()->first - 1;
    for (const auto& [period, premium] : by_period) {
      if (period != previous + 1)
        dataset.warnings.push_back(company + ": missing months before " + detail::format_period(period));
      previous = period;
      s.values.push_back(premium);
    }
    dataset.companies.push_back(std::move(s));
  }
  return dataset;
}

inline Dataset load_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  return parse_csv(in, path.string());
}

// ---------------------------------------------------------------------------
// Analysis
// ---------------------------------------------------------------------------

enum class GevMethod { pot, block_maxima };

struct RunConfig {
  double alpha = 0.05;
  std::size_t bootstrap_reps = 1000;
  std::uint64_t seed = 42;
  std::optional<double> threshold;  // nullopt: automatic Hill-plot selection
  std::size_t block_count = 10;
  BlockAssignment block_assignment = BlockAssignment::contiguous;
  GevMethod method = GevMethod::pot;
  PMethod p_method = PMethod::bootstrap;
  std::string out_dir = ".";
  bool emit_plots = false;
};

struct FamilyRow {
  DistributionModel model;
  std::array<GofResult, 3> tests;  // KS, chi-square, AD
  std::optional<double> threshold;
  std::size_t n_used = 0;
  bool converged = false;

  bool operator==(const FamilyRow&) const = default;
};

struct CompanyReport {
  std::string company;
  std::optional<FamilyRow> lognormal;
  std::optional<FamilyRow> gev;
  std::optional<FamilyRow> gpd;
  std::vector<std::string> warnings;

  bool operator==(const CompanyReport&) const = default;
};

inline constexpr std::size_t kMinAnalysisSize = 30;
inline constexpr std::size_t kRecommendedAnalysisSize = 60;

/// Fits the three families to one company and tests each fit.
///
/// Lognormal and (in pot mode) GEV are fitted to the full series, GEV in
/// block-maxima mode to the block maxima, and the GPD to the exceedances of
/// the configured or automatic threshold. Family f draws its bootstrap
/// replicates from rng.stream(f). A failing family is recorded as a warning.
inline CompanyReport analyze_company(const Sample& sample, const RunConfig& config, const SeededRng& rng) {
  if (sample.size() < kMinAnalysisSize)
    throw DataError(sample.label + ": need at least " + std::to_string(kMinAnalysisSize) + " observations");
  CompanyReport report;
  report.company = sample.label;
  if (sample.size() < kRecommendedAnalysisSize)
    report.warnings.push_back("fewer than " + std::to_string(kRecommendedAnalysisSize) +
                              " observations; p-values are unreliable");

  const GofConfig gof{config.alpha, config.p_method, config.bootstrap_reps, std::nullopt};
  auto run_family = [&](std::string_view family, std::uint64_t stream, auto&& fit_and_data) {
    std::optional<FamilyRow> row;
    try {
      auto [fit, data] = fit_and_data();
      if (!fit.converged) report.warnings.push_back(std::string(family) + ": optimizer did not converge");
      row = FamilyRow{fit.model, run_gof_suite(data, fit.model, gof, rng.stream(stream)), fit.threshold,
                      fit.n_used, fit.converged};
      for (const auto& t : row->tests)
        if (t.redraws > 0)
          report.warnings.push_back(std::string(family) + " " + std::string(to_string(t.test)) + ": " +
                                    std::to_string(t.redraws) + " bootstrap redraws");
    } catch (const std::exception& e) {
      report.warnings.push_back(std::string(family) + ": " + e.what());
    }
    return row;
  };
  using FitAndData = std::pair<FitResult, std::vector<double>>;
  const auto values = sample.view();

  report.lognormal = run_family("lognormal", 0, [&] {
    return FitAndData{fit_lognormal(values), sample.values};
  });
  report.gev = run_family("gev", 1, [&] {
    if (config.method == GevMethod::block_maxima) {
      const BlockSpec spec{config.block_count, config.block_assignment, config.seed};
      auto maxima = block_maxima(values, spec);
      FitResult fit = fit_block_maxima(values, spec);
      return FitAndData{std::move(fit), std::move(maxima)};
    }
    return FitAndData{fit_gev(values), sample.values};
  });
  report.gpd = run_family("gpd", 2, [&] {
    FitResult fit = fit_pot(values, config.threshold);
    auto excess = exceedances(values, *fit.threshold).exceedances;
    return FitAndData{std::move(fit), std::move(excess)};
  });
  return report;
}

/// Runs every company with per-company streams rng.stream(index).
inline std::vector<CompanyReport> analyze_dataset(const Dataset& dataset, const RunConfig& config) {
  const SeededRng root(config.seed);
  std::vector<CompanyReport> reports;
  for (std::size_t i = 0; i < dataset.companies.size(); ++i)
    reports.push_back(analyze_company(dataset.companies[i], config, root.stream(i)));
  return reports;
}

// ---------------------------------------------------------------------------
// Tables
// ---------------------------------------------------------------------------

enum class TableFormat { csv, json };

inline const std::vector<std::string>& table_header(Family family) {
  static const std::vector<std::string> tail{"KS", "KS P", "Chi-Square", "Chi-Square P", "AD", "AD P"};
  auto with_tail = [](std::vector<std::string> head) {
    head.insert(head.end(), tail.begin(), tail.end());
    return head;
  };
  static const std::vector<std::string> lognormal = with_tail({"Company", "Scale", "Shape"});
  static const std::vector<std::string> gev = with_tail({"Company", "Shape", "Scale", "Location"});
  static const std::vector<std::string> gpd = with_tail({"Company", "Shape", "Scale"});
  switch (family) {
    case Family::lognormal: return lognormal;
    case Family::gev: return gev;
    case Family::gpd: return gpd;
  }
  return lognormal;
}

inline std::string table_basename(Family family) {
  return "table_" + std::string(to_string(family));
}

namespace detail {

inline std::string fixed3(double v) {
  if (!std::isfinite(v)) return "NA";
  char buffer[64];
  std::snprintf(buffer, sizeof buffer, "%.3f", v);
  std::string s(buffer);
  if (s == "-0.000") s = "0.000";
  return s;
}

inline std::string csv_cell(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

inline const std::optional<FamilyRow>& row_of(const CompanyReport& r, Family family) {
  switch (family) {
    case Family::lognormal: return r.lognormal;
    case Family::gev: return r.gev;
    case Family::gpd: return r.gpd;
  }
  return r.lognormal;
}

inline std::optional<FamilyRow>& row_of(CompanyReport& r, Family family) {
  return const_cast<std::optional<FamilyRow>&>(row_of(std::as_const(r), family));
}

inline std::vector<double> parameter_cells(const DistributionModel& m) {
  switch (m.family()) {
    case Family::lognormal: return {m.as<LognormalParams>().mu, m.as<LognormalParams>().sigma};
    case Family::gev: return {m.as<GevParams>().shape, m.as<GevParams>().scale, m.as<GevParams>().location};
    case Family::gpd: return {m.as<GpdParams>().shape, m.as<GpdParams>().scale};
  }
  return {};
}

}  // namespace detail

/// One table in the column layout of the published result tables: parameter
/// columns, then (h, p) pairs for KS, chi-square and AD with h printed as
/// 0.000 / 1.000. Companies without a fit for this family get NA cells.
inline std::string render_table_csv(const std::vector<CompanyReport>& reports, Family family) {
  std::ostringstream out;
  const auto& header = table_header(family);
  for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
  out << '\n';
  for (const auto& r : reports) {
    out << detail::csv_cell(r.company);
    const auto& row = detail::row_of(r, family);
    if (!row) {
      for (std::size_t i = 1; i < header.size(); ++i) out << ",NA";
      out << '\n';
      continue;
    }
    for (double v : detail::parameter_cells(row->model)) out << ',' << detail::fixed3(v);
    for (const auto& t : row->tests)
      out << ',' << (t.reject ? "1.000" : "0.000") << ',' << detail::fixed3(t.p_value);
    out << '\n';
  }
  return out.str();
}

// JSON carries full-precision values so reports can be reconstructed.

inline nlohmann::json to_json(const GofResult& g) {
  return {{"test", to_string(g.test)},         {"statistic", g.statistic},
          {"p_value", g.p_value},              {"reject", g.reject},
          {"alpha", g.alpha},                  {"p_method", to_string(g.p_method)},
          {"bootstrap_reps", g.bootstrap_reps}, {"redraws", g.redraws}};
}

inline GofResult gof_from_json(const nlohmann::json& j) {
  GofResult g;
  const auto test = j.at("test").get<std::string>();
  g.test = test == "KS" ? GofTest::ks : test == "ChiSquare" ? GofTest::chi_square : GofTest::ad;
  g.statistic = j.at("statistic").get<double>();
  g.p_value = j.at("p_value").get<double>();
  g.reject = j.at("reject").get<bool>();
  g.alpha = j.at("alpha").get<double>();
  g.p_method = j.at("p_method").get<std::string>() == "asymptotic" ? PMethod::asymptotic : PMethod::bootstrap;
  g.bootstrap_reps = j.at("bootstrap_reps").get<std::size_t>();
  g.redraws = j.at("redraws").get<std::size_t>();
  return g;
}

inline nlohmann::json render_table_json(const std::vector<CompanyReport>& reports, Family family) {
  nlohmann::json rows = nlohmann::json::array();
  const auto& header = table_header(family);
  for (const auto& r : reports) {
    nlohmann::json row{{"Company", r.company}, {"warnings", r.warnings}};
    const auto& fr = detail::row_of(r, family);
    if (fr) {
      const auto params = detail::parameter_cells(fr->model);
      for (std::size_t i = 0; i < params.size(); ++i) row[header[i + 1]] = params[i];
      row["tests"] = nlohmann::json::array();
      for (const auto& t : fr->tests) row["tests"].push_back(to_json(t));
      row["threshold"] = fr->threshold ? nlohmann::json(*fr->threshold) : nlohmann::json(nullptr);
      row["n_used"] = fr->n_used;
      row["converged"] = fr->converged;
    } else {
      row["tests"] = nullptr;
    }
    rows.push_back(std::move(row));
  }
  return {{"family", to_string(family)}, {"columns", header}, {"rows", std::move(rows)}};
}

/// Inverse of render_table_json over the three family tables.
inline std::vector<CompanyReport> reports_from_json(const nlohmann::json& lognormal, const nlohmann::json& gev,
                                                    const nlohmann::json& gpd) {
  std::vector<CompanyReport> reports;
  const std::array<std::pair<Family, const nlohmann::json*>, 3> tables{
      {{Family::lognormal, &lognormal}, {Family::gev, &gev}, {Family::gpd, &gpd}}};
  for (const auto& [family, table] : tables) {
    const auto& rows = table->at("rows");
    if (reports.empty()) {
      for (const auto& row : rows) {
        CompanyReport r;
        r.company = row.at("Company").get<std::string>();
        r.warnings = row.at("warnings").get<std::vector<std::string>>();
        reports.push_back(std::move(r));
      }
    }
    if (rows.size() != reports.size()) throw DataError("report tables disagree on the company list");
    const auto& header = table_header(family);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const auto& row = rows[i];
      if (row.at("tests").is_null()) continue;
      auto param = [&](std::size_t col) { return row.at(header[col]).get<double>(); };
      std::optional<DistributionModel> model;
      switch (family) {
        case Family::lognormal: model.emplace(LognormalParams{param(1), param(2)}); break;
        case Family::gev: model.emplace(GevParams{param(1), param(3), param(2)}); break;
        case Family::gpd: model.emplace(GpdParams{param(1), param(2)}); break;
      }
      std::array<GofResult, 3> tests;
      for (std::size_t t = 0; t < 3; ++t) tests[t] = gof_from_json(row.at("tests").at(t));
      std::optional<double> threshold;
      if (!row.at("threshold").is_null()) threshold = row.at("threshold").get<double>();
      detail::row_of(reports[i], family) = FamilyRow{*model, tests, threshold, row.at("n_used").get<std::size_t>(),
                                                     row.at("converged").get<bool>()};
    }
  }
  return reports;
}

namespace detail {

inline void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << content;
  if (!out) throw std::runtime_error("error writing " + path.string());
}

}  // namespace detail

/// Writes table_lognormal, table_gev and table_gpd in the chosen format and
/// returns the paths written.
inline std::vector<std::filesystem::path> render_tables(const std::vector<CompanyReport>& reports,
                                                        TableFormat format, const std::filesystem::path& out_dir) {
  if (reports.empty()) throw std::invalid_argument("render_tables: no reports");
  std::filesystem::create_directories(out_dir);
  std::vector<std::filesystem::path> written;
  for (Family family : {Family::lognormal, Family::gev, Family::gpd}) {
    const bool csv = format == TableFormat::csv;
    auto path = out_dir / (table_basename(family) + (csv ? ".csv" : ".json"));
    detail::write_file(path, csv ? render_table_csv(reports, family) : render_table_json(reports, family).dump(2) + "\n");
    written.push_back(std::move(path));
  }
  return written;
}

// ---------------------------------------------------------------------------
// Plot files
// ---------------------------------------------------------------------------

/// File-name-safe form of a company name.
inline std::string file_stem(std::string_view company) {
  std::string out;
  for (char c : company) out += std::isalnum(static_cast<unsigned char>(c)) || c == '-' ? c : '_';
  return out;
}

inline std::string render_plot_csv(const PlotSeries& series) {
  std::string out;
  for (const auto& [k, v] : series.meta) out += "# " + k + "=" + v + "\n";
  const bool overlay = !series.fitted.empty();
  out += overlay ? "x,y,fitted\n" : "x,y\n";
  for (std::size_t i = 0; i < series.points.size(); ++i) {
    out += format_number(series.points[i].x) + "," + format_number(series.points[i].y);
    if (overlay) out += "," + format_number(series.fitted[i]);
    out += "\n";
  }
  return out;
}

/// One `<company>_<series>.csv` per series: `# key=value` meta lines, then a
/// header `x,y` (plus `fitted` for overlaid model curves) and the points.
inline std::vector<std::filesystem::path> emit_plot_files(std::string_view company,
                                                          const std::vector<PlotSeries>& series,
                                                          const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  std::vector<std::filesystem::path> written;
  for (const auto& s : series) {
    auto path = out_dir / (file_stem(company) + "_" + s.name + ".csv");
    detail::write_file(path, render_plot_csv(s));
    written.push_back(std::move(path));
  }
  return written;
}

/// Sample-only diagnostics: histogram, exponential QQ, Zipf, mean excess and
/// Hill plot (with the automatic threshold in meta when it can be chosen).
inline std::vector<PlotSeries> sample_diagnostics(const Sample& sample) {
  const auto v = sample.view();
  std::vector<PlotSeries> out{histogram_series(v), exp_qq_series(v), zipf_series(v), mean_excess_series(v)};
  const HillSeries hill = hill_series(v);
  std::optional<double> threshold;
  try {
    threshold = auto_threshold(v).threshold;
  } catch (const std::invalid_argument&) {
  }
  out.push_back(hill_plot_series(hill, threshold));
  return out;
}

/// Sample diagnostics plus the fit-dependent series: GEV residual QQ and
/// density comparison, POT excess CDF, tail and GPD residual QQ.
inline std::vector<PlotSeries> fit_diagnostics(const Sample& sample, const CompanyReport& report,
                                               const RunConfig& config) {
  auto out = sample_diagnostics(sample);
  const auto v = sample.view();
  if (report.gev) {
    FitResult fit{.model = report.gev->model};
    fit.method = config.method == GevMethod::block_maxima ? FitMethod::block_maxima : FitMethod::direct;
    const BlockSpec spec{config.block_count, config.block_assignment, config.seed};
    const auto data = fitted_data(fit, v, spec);
    out.push_back(residual_qq_series(fit, data));
    if (data.size() >= 10) out.push_back(density_compare_series(data, fit));
  }
  if (report.gpd && report.gpd->threshold) {
    const ExceedanceSet excess = exceedances(v, *report.gpd->threshold);
    FitResult fit{.model = report.gpd->model};
    fit.method = FitMethod::pot;
    fit.threshold = excess.threshold;
    fit.n_used = excess.n_exceed();
    fit.n_total = excess.n_total;
    out.push_back(excess_cdf_series(excess, fit));
    out.push_back(tail_series(v, fit));
    PlotSeries resid = residual_qq_series(fit, excess.exceedances);
    resid.name = "gpd_residual_qq";
    out.push_back(std::move(resid));
    for (auto& s : out)
      if (s.name == "mean_excess" && report.gpd->model.as<GpdParams>().shape < 1.0)
        s.set_meta("gpd_reference_slope",
                   report.gpd->model.as<GpdParams>().shape / (1.0 - report.gpd->model.as<GpdParams>().shape));
  }
  return out;
}

}  // namespace heavytail

#endif  // HEAVYTAIL_REPORT_HPP
