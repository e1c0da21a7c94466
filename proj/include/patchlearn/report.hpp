#pragma once

#include <cinttypes>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "patchlearn/baselines.hpp"
#include "patchlearn/metrics.hpp"
#include "patchlearn/patch_learning.hpp"

namespace patchlearn {

struct PlRow {
  std::string method;
  int requestedPatches = 0;
  int recordedPatches = 0;
  double trainRmse = 0;
  std::optional<double> testRmse;
  double ape = 0;  // on the test split when one exists, else on training data
  double loss = 0;
  bool globalUpdateSkipped = false;
  std::string patchBoxes;
  double wallMs = 0;
};

struct BaselineRow {
  std::string method;
  int members = 0;
  double trainRmse = 0;
  std::optional<double> testRmse;
  double ape = 0;
  double wallMs = 0;
};

struct Report {
  int experiment = 0;  // 0 for ad-hoc runs
  std::uint64_t seed = 0;
  double alpha = 0.25;
  int bestL = 0;
  std::map<std::string, std::string> config;
  std::vector<PlRow> rows;
  std::vector<BaselineRow> baselines;
};

struct ReportParseError : std::runtime_error {
  explicit ReportParseError(const std::string& what)
      : std::runtime_error("report parse error: " + what) {}
};

namespace detail {

inline std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline double parse_double(const std::string& s, const std::string& context) {
  const char* begin = s.c_str();
  char* end = nullptr;
  double v = std::strtod(begin, &end);
  if (end == begin || *end != '\0')
    throw ReportParseError("bad number '" + s + "' in " + context);
  return v;
}

inline std::string interval_text(const Interval& iv) {
  return "[" + fmt_double(iv.lo) + "," + fmt_double(iv.hi) + (iv.closedAbove ? "]" : ")");
}

}  // namespace detail

// Compact one-line text form of the recorded patch boxes, e.g.
// "k=3 part=1,2 [0,2.5)x[4,6]; k=0 [1.5,3]".
inline std::string patch_boxes_text(const PlModel& model) {
  std::string out;
  for (std::size_t i = 0; i < model.patches.size(); ++i) {
    if (i) out += "; ";
    const PatchBox& box = model.patches[i].box;
    out += "k=" + std::to_string(box.flatIndex);
    if (!box.sourcePartition.empty()) {
      out += " part=";
      for (std::size_t m = 0; m < box.sourcePartition.size(); ++m) {
        if (m) out += ",";
        out += std::to_string(box.sourcePartition[m]);
      }
    }
    out += " ";
    for (std::size_t m = 0; m < box.bounds.size(); ++m) {
      if (m) out += "x";
      out += detail::interval_text(box.bounds[m]);
    }
  }
  return out;
}

// Builds the report row for one trained PL model. The APE column reports the
// test split when one is given, otherwise the training data.
inline PlRow make_pl_row(std::string method, int requestedPatches, const PlModel& model,
                         const Dataset& train, const Dataset* test, double wallMs) {
  PlRow row;
  row.method = std::move(method);
  row.requestedPatches = requestedPatches;
  row.recordedPatches = static_cast<int>(model.patches.size());
  row.trainRmse = model.trainingRmse;
  row.loss = model.loss;
  row.globalUpdateSkipped = model.globalUpdateSkipped;
  row.patchBoxes = patch_boxes_text(model);
  row.wallMs = wallMs;

  auto metrics_on = [&](const Dataset& d) {
    std::vector<double> pred;
    pred.reserve(d.size());
    for (std::size_t n = 0; n < d.size(); ++n) pred.push_back(model.predict(d.row(n)));
    return compute_metrics(pred, d.targets);
  };
  if (test) {
    Metrics m = metrics_on(*test);
    row.testRmse = m.rmse;
    row.ape = m.ape;
  } else {
    row.ape = metrics_on(train).ape;
  }
  return row;
}

inline BaselineRow make_baseline_row(std::string method, int members,
                                     const EnsembleModel& model, const Dataset& train,
                                     const Dataset* test, double wallMs) {
  BaselineRow row;
  row.method = std::move(method);
  row.members = members;
  row.wallMs = wallMs;
  auto metrics_on = [&](const Dataset& d) {
    std::vector<double> pred;
    pred.reserve(d.size());
    for (std::size_t n = 0; n < d.size(); ++n) pred.push_back(model.predict(d.row(n)));
    return compute_metrics(pred, d.targets);
  };
  Metrics tr = metrics_on(train);
  row.trainRmse = tr.rmse;
  row.ape = tr.ape;
  if (test) {
    Metrics te = metrics_on(*test);
    row.testRmse = te.rmse;
    row.ape = te.ape;
  }
  return row;
}

// Every PL row's loss column must reproduce loss(trainRmse, recordedPatches,
// alpha) exactly; a mismatch means the report was edited or mis-built.
inline void validate_report(const Report& report) {
  for (const auto& row : report.rows) {
    double expected = loss(row.trainRmse, row.recordedPatches, report.alpha);
    if (expected != row.loss)
      throw std::invalid_argument("report: loss column does not reproduce the loss of row '" +
                                  row.method + "' L=" + std::to_string(row.requestedPatches));
  }
}

inline bool equivalent_ignoring_timing(const Report& a, const Report& b) {
  if (a.experiment != b.experiment || a.seed != b.seed || a.alpha != b.alpha ||
      a.bestL != b.bestL || a.config != b.config || a.rows.size() != b.rows.size() ||
      a.baselines.size() != b.baselines.size())
    return false;
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    const PlRow &x = a.rows[i], &y = b.rows[i];
    if (x.method != y.method || x.requestedPatches != y.requestedPatches ||
        x.recordedPatches != y.recordedPatches || x.trainRmse != y.trainRmse ||
        x.testRmse != y.testRmse || x.ape != y.ape || x.loss != y.loss ||
        x.globalUpdateSkipped != y.globalUpdateSkipped || x.patchBoxes != y.patchBoxes)
      return false;
  }
  for (std::size_t i = 0; i < a.baselines.size(); ++i) {
    const BaselineRow &x = a.baselines[i], &y = b.baselines[i];
    if (x.method != y.method || x.members != y.members || x.trainRmse != y.trainRmse ||
        x.testRmse != y.testRmse || x.ape != y.ape)
      return false;
  }
  return true;
}

inline constexpr const char* kReportFormat = "patchlearn-report";
inline constexpr int kReportVersion = 1;

inline nlohmann::json report_to_json(const Report& report) {
  nlohmann::json j;
  j["format"] = kReportFormat;
  j["version"] = kReportVersion;
  j["experiment"] = report.experiment;
  j["seed"] = report.seed;
  j["alpha"] = report.alpha;
  j["bestL"] = report.bestL;
  j["config"] = report.config;
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : report.rows) {
    nlohmann::json row = {{"method", r.method},
                          {"requestedPatches", r.requestedPatches},
                          {"recordedPatches", r.recordedPatches},
                          {"trainRmse", r.trainRmse},
                          {"ape", r.ape},
                          {"loss", r.loss},
                          {"globalUpdateSkipped", r.globalUpdateSkipped},
                          {"patchBoxes", r.patchBoxes},
                          {"wallMs", r.wallMs}};
    row["testRmse"] = r.testRmse ? nlohmann::json(*r.testRmse) : nlohmann::json(nullptr);
    rows.push_back(std::move(row));
  }
  j["patchRows"] = std::move(rows);
  nlohmann::json base = nlohmann::json::array();
  for (const auto& r : report.baselines) {
    nlohmann::json row = {{"method", r.method},
                          {"members", r.members},
                          {"trainRmse", r.trainRmse},
                          {"ape", r.ape},
                          {"wallMs", r.wallMs}};
    row["testRmse"] = r.testRmse ? nlohmann::json(*r.testRmse) : nlohmann::json(nullptr);
    base.push_back(std::move(row));
  }
  j["baselineRows"] = std::move(base);
  return j;
}

inline Report report_from_json(const nlohmann::json& j) {
  auto need = [&](const nlohmann::json& obj, const char* key) -> const nlohmann::json& {
    auto it = obj.find(key);
    if (it == obj.end()) throw ReportParseError(std::string("missing field '") + key + "'");
    return *it;
  };
  if (need(j, "format").get<std::string>() != kReportFormat)
    throw ReportParseError("not a report file");
  if (need(j, "version").get<int>() != kReportVersion)
    throw ReportParseError("unsupported version");
  Report report;
  report.experiment = need(j, "experiment").get<int>();
  report.seed = need(j, "seed").get<std::uint64_t>();
  report.alpha = need(j, "alpha").get<double>();
  report.bestL = need(j, "bestL").get<int>();
  report.config = need(j, "config").get<std::map<std::string, std::string>>();
  for (const auto& row : need(j, "patchRows")) {
    PlRow r;
    r.method = need(row, "method").get<std::string>();
    r.requestedPatches = need(row, "requestedPatches").get<int>();
    r.recordedPatches = need(row, "recordedPatches").get<int>();
    r.trainRmse = need(row, "trainRmse").get<double>();
    if (!need(row, "testRmse").is_null()) r.testRmse = row["testRmse"].get<double>();
    r.ape = need(row, "ape").get<double>();
    r.loss = need(row, "loss").get<double>();
    r.globalUpdateSkipped = need(row, "globalUpdateSkipped").get<bool>();
    r.patchBoxes = need(row, "patchBoxes").get<std::string>();
    r.wallMs = need(row, "wallMs").get<double>();
    report.rows.push_back(std::move(r));
  }
  for (const auto& row : need(j, "baselineRows")) {
    BaselineRow r;
    r.method = need(row, "method").get<std::string>();
    r.members = need(row, "members").get<int>();
    r.trainRmse = need(row, "trainRmse").get<double>();
    if (!need(row, "testRmse").is_null()) r.testRmse = row["testRmse"].get<double>();
    r.ape = need(row, "ape").get<double>();
    r.wallMs = need(row, "wallMs").get<double>();
    report.baselines.push_back(std::move(r));
  }
  return report;
}

namespace detail {

inline std::string csv_cell(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      cells.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  cells.push_back(std::move(cur));
  return cells;
}

inline constexpr const char* kCsvHeader =
    "kind,method,L,members,recordedPatches,trainRmse,testRmse,ape,loss,"
    "globalUpdateSkipped,patchBoxes,wallMs";

}  // namespace detail

inline std::string report_to_csv(const Report& report) {
  using detail::csv_cell;
  using detail::fmt_double;
  std::string out;
  out += std::string("# format=") + kReportFormat + "\n";
  out += "# version=" + std::to_string(kReportVersion) + "\n";
  out += "# experiment=" + std::to_string(report.experiment) + "\n";
  char seedBuf[32];
  std::snprintf(seedBuf, sizeof seedBuf, "%" PRIu64, report.seed);
  out += std::string("# seed=") + seedBuf + "\n";
  out += "# alpha=" + fmt_double(report.alpha) + "\n";
  out += "# bestL=" + std::to_string(report.bestL) + "\n";
  for (const auto& [key, value] : report.config) out += "# cfg." + key + "=" + value + "\n";
  out += std::string(detail::kCsvHeader) + "\n";
  for (const auto& r : report.rows) {
    out += "pl," + csv_cell(r.method) + "," + std::to_string(r.requestedPatches) + ",," +
           std::to_string(r.recordedPatches) + "," + fmt_double(r.trainRmse) + "," +
           (r.testRmse ? fmt_double(*r.testRmse) : "") + "," + fmt_double(r.ape) + "," +
           fmt_double(r.loss) + "," + (r.globalUpdateSkipped ? "true" : "false") + "," +
           csv_cell(r.patchBoxes) + "," + fmt_double(r.wallMs) + "\n";
  }
  for (const auto& r : report.baselines) {
    out += "baseline," + csv_cell(r.method) + ",," + std::to_string(r.members) + ",," +
           fmt_double(r.trainRmse) + "," + (r.testRmse ? fmt_double(*r.testRmse) : "") + "," +
           fmt_double(r.ape) + ",,,," + fmt_double(r.wallMs) + "\n";
  }
  return out;
}

inline Report report_from_csv(const std::string& text) {
  using detail::parse_double;
  Report report;
  std::istringstream in(text);
  std::string line;
  bool sawHeader = false, sawFormat = false;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::string entry = line.substr(1);
      if (!entry.empty() && entry[0] == ' ') entry.erase(0, 1);
      auto eq = entry.find('=');
      if (eq == std::string::npos) throw ReportParseError("bad metadata line '" + line + "'");
      std::string key = entry.substr(0, eq), value = entry.substr(eq + 1);
      if (key == "format") {
        if (value != kReportFormat) throw ReportParseError("not a report file");
        sawFormat = true;
      } else if (key == "version") {
        if (value != std::to_string(kReportVersion))
          throw ReportParseError("unsupported version " + value);
      } else if (key == "experiment") {
        report.experiment = std::stoi(value);
      } else if (key == "seed") {
        report.seed = std::stoull(value);
      } else if (key == "alpha") {
        report.alpha = parse_double(value, "alpha");
      } else if (key == "bestL") {
        report.bestL = std::stoi(value);
      } else if (key.rfind("cfg.", 0) == 0) {
        report.config[key.substr(4)] = value;
      } else {
        throw ReportParseError("unknown metadata key '" + key + "'");
      }
      continue;
    }
    if (!sawHeader) {
      if (line != detail::kCsvHeader) throw ReportParseError("unexpected table header");
      sawHeader = true;
      continue;
    }
    auto cells = detail::split_csv_line(line);
    if (cells.size() != 12) throw ReportParseError("expected 12 columns, got row '" + line + "'");
    if (cells[0] == "pl") {
      PlRow r;
      r.method = cells[1];
      r.requestedPatches = std::stoi(cells[2]);
      r.recordedPatches = std::stoi(cells[4]);
      r.trainRmse = parse_double(cells[5], "trainRmse");
      if (!cells[6].empty()) r.testRmse = parse_double(cells[6], "testRmse");
      r.ape = parse_double(cells[7], "ape");
      r.loss = parse_double(cells[8], "loss");
      if (cells[9] != "true" && cells[9] != "false")
        throw ReportParseError("bad boolean '" + cells[9] + "'");
      r.globalUpdateSkipped = cells[9] == "true";
      r.patchBoxes = cells[10];
      r.wallMs = parse_double(cells[11], "wallMs");
      report.rows.push_back(std::move(r));
    } else if (cells[0] == "baseline") {
      BaselineRow r;
      r.method = cells[1];
      r.members = std::stoi(cells[3]);
      r.trainRmse = parse_double(cells[5], "trainRmse");
      if (!cells[6].empty()) r.testRmse = parse_double(cells[6], "testRmse");
      r.ape = parse_double(cells[7], "ape");
      r.wallMs = parse_double(cells[11], "wallMs");
      report.baselines.push_back(std::move(r));
    } else {
      throw ReportParseError("unknown row kind '" + cells[0] + "'");
    }
  }
  if (!sawFormat) throw ReportParseError("missing format line");
  if (!sawHeader) throw ReportParseError("missing table header");
  return report;
}

enum class ReportFormat { csv, json };

inline std::string render_report(const Report& report, ReportFormat format) {
  if (format == ReportFormat::csv) return report_to_csv(report);
  return report_to_json(report).dump(2) + "\n";
}

inline Report parse_report(const std::string& text, ReportFormat format) {
  if (format == ReportFormat::csv) return report_from_csv(text);
  try {
    return report_from_json(nlohmann::json::parse(text));
  } catch (const nlohmann::json::exception& e) {
    throw ReportParseError(e.what());
  }
}

inline void save_report(const std::string& filePath, const Report& report, ReportFormat format) {
  std::ofstream out(filePath);
  if (!out) throw std::runtime_error("cannot open for writing: " + filePath);
  out << render_report(report, format);
}

}  // namespace patchlearn
