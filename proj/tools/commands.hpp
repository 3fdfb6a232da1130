// Subcommand implementations for the depmark command-line tool.
//
// Exit codes: 0 success, 1 domain/validation/audit finding,
// 2 usage/parse/I-O error, 3 numeric failure.
#ifndef DEPMARK_TOOLS_COMMANDS_HPP
#define DEPMARK_TOOLS_COMMANDS_HPP

#include <openssl/evp.h>

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <utility>
#include <vector>

#include <json.hpp>

#include "depmark/depmark.hpp"

namespace depmark::cli {

enum ExitCode : int { kOk = 0, kFinding = 1, kUsage = 2, kNumeric = 3 };

/// Raised for malformed flags and unreadable inputs.
class UsageError : public Error {
 public:
  using Error::Error;
};

enum class OutputFormat { kCsv, kJson };

struct Options {
  std::string file;
  std::optional<double> at;
  std::string grid;  // start:stop:step
  std::string method = "uniformization";
  std::vector<std::string> sets;  // NAME=VALUE
  std::string output = "csv";
  double eps = 1e-12;
  double dt = 1.0;
  // sweep
  std::string param;
  std::string values;
  // simulate
  std::uint64_t trials = 100000;
  std::uint64_t seed = 1;
  unsigned threads = 0;
  // audit
  std::string table;
};

/// Provenance embedded in every output.
struct RunManifest {
  std::string command;
  std::string input;
  std::string input_sha256;
  std::map<std::string, double> overrides;
  std::vector<std::pair<std::string, std::string>> settings;
  std::string version = kVersion;
};

// ---------------------------------------------------------------------------
// Formatting helpers

inline std::string fmt9(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

inline std::string sha256_hex(std::string_view bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr);
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 15];
  }
  return out;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot read '" + path + "'");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline double parse_double(std::string_view s, const std::string& what) {
  while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\r')) s.remove_suffix(1);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw UsageError("invalid number '" + std::string(s) + "' for " + what);
  return v;
}

inline std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    auto pos = s.find(sep, start);
    out.emplace_back(s.substr(start, pos == std::string_view::npos ? pos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

/// start, start + step, ... up to stop; stop itself is appended when the
/// step does not land on it.
inline std::vector<double> parse_grid(const std::string& spec) {
  auto parts = split(spec, ':');
  if (parts.size() != 3) throw UsageError("--grid expects start:stop:step");
  double start = parse_double(parts[0], "--grid start");
  double stop = parse_double(parts[1], "--grid stop");
  double step = parse_double(parts[2], "--grid step");
  if (!(step > 0.0) || !(stop >= start) || !(start >= 0.0))
    throw UsageError("--grid needs 0 <= start <= stop and step > 0");
  auto count = static_cast<std::size_t>((stop - start) / step + 1e-9) + 1;
  if (count > 10'000'000) throw UsageError("--grid has too many points");
  std::vector<double> grid;
  for (std::size_t k = 0; k < count; ++k) grid.push_back(start + static_cast<double>(k) * step);
  if (stop - grid.back() > 1e-9 * std::max(1.0, stop)) grid.push_back(stop);
  else grid.back() = std::min(grid.back(), stop);
  return grid;
}

inline Method parse_method(const std::string& name) {
  if (name == "uniformization") return Method::kUniformization;
  if (name == "expm") return Method::kMatrixExp;
  if (name == "euler") return Method::kEuler;
  if (name == "paper-literal") return Method::kPaperLiteral;
  throw UsageError("unknown method '" + name + "'");
}

inline OutputFormat parse_output(const std::string& name) {
  if (name == "csv") return OutputFormat::kCsv;
  if (name == "json") return OutputFormat::kJson;
  throw UsageError("unknown output format '" + name + "'");
}

inline std::map<std::string, double> parse_sets(const std::vector<std::string>& sets) {
  std::map<std::string, double> out;
  for (const auto& s : sets) {
    auto eq = s.find('=');
    if (eq == std::string::npos || eq == 0) throw UsageError("--set expects NAME=VALUE, got '" + s + "'");
    out[s.substr(0, eq)] = parse_double(std::string_view(s).substr(eq + 1), "--set " + s.substr(0, eq));
  }
  return out;
}

inline void write_manifest_csv(std::ostream& out, const RunManifest& m) {
  out << "# command: " << m.command << "\n";
  out << "# input: " << m.input << "\n";
  out << "# input_sha256: " << m.input_sha256 << "\n";
  out << "# overrides:";
  for (const auto& [k, v] : m.overrides) out << " " << k << "=" << fmt9(v);
  out << "\n";
  for (const auto& [k, v] : m.settings) out << "# " << k << ": " << v << "\n";
  out << "# version: " << m.version << "\n";
}

inline nlohmann::ordered_json manifest_json(const RunManifest& m) {
  nlohmann::ordered_json j;
  j["command"] = m.command;
  j["input"] = m.input;
  j["input_sha256"] = m.input_sha256;
  nlohmann::ordered_json ov = nlohmann::ordered_json::object();
  for (const auto& [k, v] : m.overrides) ov[k] = v;
  j["overrides"] = ov;
  for (const auto& [k, v] : m.settings) j[k] = v;
  j["version"] = m.version;
  return j;
}

/// Writes a table as CSV (manifest as leading `#` lines) or as JSON with
/// one object per row under "rows".
inline void write_table(std::ostream& out, OutputFormat fmt, const RunManifest& manifest,
                        const std::vector<std::string>& columns,
                        const std::vector<std::vector<std::string>>& rows,
                        const nlohmann::ordered_json& extra = {}) {
  if (fmt == OutputFormat::kCsv) {
    write_manifest_csv(out, manifest);
    if (extra.is_object())
      for (const auto& [k, v] : extra.items()) out << "# " << k << ": " << v.dump() << "\n";
    for (std::size_t c = 0; c < columns.size(); ++c)
      out << (c ? "," : "") << csv_field(columns[c]);
    out << "\n";
    for (const auto& row : rows) {
      for (std::size_t c = 0; c < row.size(); ++c) out << (c ? "," : "") << csv_field(row[c]);
      out << "\n";
    }
    return;
  }
  nlohmann::ordered_json j;
  j["manifest"] = manifest_json(manifest);
  if (extra.is_object())
    for (const auto& [k, v] : extra.items()) j[k] = v;
  j["columns"] = columns;
  j["rows"] = nlohmann::ordered_json::array();
  for (const auto& row : rows) {
    nlohmann::ordered_json r;
    for (std::size_t c = 0; c < row.size(); ++c) {
      // numeric cells go out as numbers
      double v = 0.0;
      auto res = std::from_chars(row[c].data(), row[c].data() + row[c].size(), v);
      if (res.ec == std::errc() && res.ptr == row[c].data() + row[c].size())
        r[columns[c]] = v;
      else
        r[columns[c]] = row[c];
    }
    j["rows"].push_back(std::move(r));
  }
  out << j.dump(2) << "\n";
}

// ---------------------------------------------------------------------------
// Model loading shared by the model-based commands

struct LoadedModel {
  MarkovModel model;
  RunManifest manifest;
};

/// Reads and parses the file, applies --set overrides, then validates.
/// Prints findings to `err`; returns nullopt with `code` set on failure.
inline std::optional<LoadedModel> load_model(const std::string& command, const Options& opt,
                                             std::ostream& err, int& code) {
  std::string text;
  try {
    text = read_file(opt.file);
  } catch (const UsageError& e) {
    err << "depmark: error: " << e.what() << "\n";
    code = kUsage;
    return std::nullopt;
  }
  LoadedModel lm;
  lm.manifest.command = command;
  lm.manifest.input = opt.file;
  lm.manifest.input_sha256 = sha256_hex(text);
  try {
    lm.model = parse_document(text).model;
  } catch (const ParseFailure& e) {
    for (const auto& pe : e.errors()) err << opt.file << ":" << format_parse_error(pe) << "\n";
    code = kUsage;
    return std::nullopt;
  }
  lm.manifest.overrides = parse_sets(opt.sets);
  lm.model = lm.model.with_params(lm.manifest.overrides);
  auto report = validate(lm.model);
  if (report.has_fatal()) {
    for (const auto& f : report.findings)
      if (f.severity == Severity::kFatal) err << opt.file << ": fatal: " << f.message << "\n";
    code = kFinding;
    return std::nullopt;
  }
  return lm;
}

/// Runs `body`, mapping library exceptions onto exit codes.
template <typename Body>
int guarded(std::ostream& err, Body&& body) {
  try {
    return body();
  } catch (const UsageError& e) {
    err << "depmark: error: " << e.what() << "\n";
    return kUsage;
  } catch (const NumericFailure& e) {
    err << "depmark: numeric failure: " << e.what() << "\n";
    return kNumeric;
  } catch (const Error& e) {
    err << "depmark: error: " << e.what() << "\n";
    return kFinding;
  }
}

// ---------------------------------------------------------------------------
// Commands

inline int run_validate(const Options& opt, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    std::string text;
    try {
      text = read_file(opt.file);
    } catch (const UsageError& e) {
      err << "depmark: error: " << e.what() << "\n";
      return int{kUsage};
    }
    RunManifest manifest{"validate", opt.file, sha256_hex(text), parse_sets(opt.sets), {}};
    MarkovModel model;
    try {
      model = parse_document(text).model;
    } catch (const ParseFailure& e) {
      for (const auto& pe : e.errors()) err << opt.file << ":" << format_parse_error(pe) << "\n";
      return int{kUsage};
    }
    model = model.with_params(manifest.overrides);
    ValidationReport report = validate(model);
    std::vector<std::vector<std::string>> rows;
    for (const auto& f : report.findings)
      rows.push_back({f.severity == Severity::kFatal ? "fatal" : "warning", f.subject, f.message});
    nlohmann::ordered_json extra;
    extra["states"] = model.size();
    extra["transitions"] = model.transitions.size();
    extra["absorbing"] = absorbing_states(model);
    write_table(out, parse_output(opt.output), manifest, {"severity", "subject", "message"}, rows,
                extra);
    return report.has_fatal() ? int{kFinding} : int{kOk};
  });
}

inline SolverConfig make_config(const Options& opt, const MarkovModel& model) {
  SolverConfig c;
  c.method = parse_method(opt.method);
  c.eps = opt.eps;
  c.dt = opt.dt;
  c.horizon = model.horizon.value_or(kSixMonthsHours);
  return c;
}

inline void add_solver_settings(RunManifest& m, const Options& opt) {
  m.settings.emplace_back("method", opt.method);
  m.settings.emplace_back("eps", fmt9(opt.eps));
  m.settings.emplace_back("dt", fmt9(opt.dt));
}

inline int run_solve(const Options& opt, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const OutputFormat fmt = parse_output(opt.output);
    if (opt.at && !opt.grid.empty()) throw UsageError("--at and --grid are exclusive");
    int code = kOk;
    auto lm = load_model("solve", opt, err, code);
    if (!lm) return code;
    SolverConfig config = make_config(opt, lm->model);
    std::vector<double> grid;
    if (!opt.grid.empty())
      grid = parse_grid(opt.grid);
    else
      grid = {opt.at.value_or(config.horizon)};
    add_solver_settings(lm->manifest, opt);
    lm->manifest.settings.emplace_back(
        "times", opt.grid.empty() ? fmt9(grid.front()) : opt.grid);

    Trajectory traj;
    std::optional<MassDefectReport> defects;
    if (config.method == Method::kPaperLiteral) {
      auto res = paper_literal_grid(lm->model, config, grid);
      traj = std::move(res.trajectory);
      defects = std::move(res.defects);
    } else {
      traj = solve_grid(lm->model, config, grid);
    }
    Table table = export_timeseries(traj, lm->model);
    if (defects) table.columns.push_back("mass_defect");
    std::vector<std::vector<std::string>> rows;
    for (std::size_t k = 0; k < table.rows.size(); ++k) {
      std::vector<std::string> row;
      for (double v : table.rows[k]) row.push_back(fmt9(v));
      if (defects) row.push_back(fmt9(defects->per_step[k]));
      rows.push_back(std::move(row));
    }
    nlohmann::ordered_json extra;
    if (defects) extra["max_mass_defect"] = defects->max_abs;
    write_table(out, fmt, lm->manifest, table.columns, rows, extra);
    return int{kOk};
  });
}

inline int run_sweep(const Options& opt, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const OutputFormat fmt = parse_output(opt.output);
    if (opt.param.empty()) throw UsageError("sweep needs --param");
    if (opt.values.empty()) throw UsageError("sweep needs --values");
    std::vector<double> values;
    for (const auto& v : split(opt.values, ',')) values.push_back(parse_double(v, "--values"));
    int code = kOk;
    auto lm = load_model("sweep", opt, err, code);
    if (!lm) return code;
    SolverConfig config = make_config(opt, lm->model);
    double t = opt.at.value_or(config.horizon);
    add_solver_settings(lm->manifest, opt);
    lm->manifest.settings.emplace_back("param", opt.param);
    lm->manifest.settings.emplace_back("at", fmt9(t));
    auto result = sweep(lm->model, opt.param, values, t, config);
    std::vector<std::vector<std::string>> rows;
    for (const auto& r : result)
      rows.push_back({fmt9(r.value), fmt9(r.metrics.R), fmt9(r.metrics.S), fmt9(r.metrics.Pfs),
                      fmt9(r.metrics.Pfu)});
    write_table(out, fmt, lm->manifest, {"param", "R", "S", "Pfs", "Pfu"}, rows);
    return int{kOk};
  });
}

inline int run_simulate(const Options& opt, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const OutputFormat fmt = parse_output(opt.output);
    int code = kOk;
    auto lm = load_model("simulate", opt, err, code);
    if (!lm) return code;
    double t = opt.at.value_or(lm->model.horizon.value_or(kSixMonthsHours));
    lm->manifest.settings.emplace_back("at", fmt9(t));
    lm->manifest.settings.emplace_back("trials", std::to_string(opt.trials));
    lm->manifest.settings.emplace_back("seed", std::to_string(opt.seed));
    lm->manifest.settings.emplace_back("confidence", "0.99 wilson");
    auto res = simulate(lm->model, t, opt.trials, opt.seed, opt.threads);
    std::vector<std::vector<std::string>> rows;
    for (std::size_t i = 0; i < lm->model.size(); ++i) {
      const auto& s = lm->model.states[i];
      rows.push_back({std::to_string(s.id), s.label, std::to_string(res.counts[i]),
                      fmt9(res.estimates[i]), fmt9(res.half_widths[i]), fmt9(res.lower[i]),
                      fmt9(res.upper[i])});
    }
    write_table(out, fmt, lm->manifest,
                {"state", "label", "count", "estimate", "half_width", "lower", "upper"}, rows);
    return int{kOk};
  });
}

/// Parses an RFC-4180 table with `#` comment lines. Needs columns
/// param, R, S, Pfs, Pfu (any order).
inline std::vector<AuditRow> read_audit_csv(const std::string& text) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> rec;
  std::string field;
  bool quoted = false, at_line_start = true, any = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    char c = text[i];
    if (at_line_start && !quoted && c == '#') {
      while (i < text.size() && text[i] != '\n') ++i;
      continue;
    }
    at_line_start = false;
    if (quoted) {
      if (c == '"' && i + 1 < text.size() && text[i + 1] == '"') {
        field += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        field += c;
      }
      continue;
    }
    if (c == '"') {
      quoted = true;
      any = true;
    } else if (c == ',') {
      rec.push_back(std::move(field));
      field.clear();
      any = true;
    } else if (c == '\n') {
      if (any || !field.empty()) {
        rec.push_back(std::move(field));
        records.push_back(std::move(rec));
      }
      rec.clear();
      field.clear();
      any = false;
      at_line_start = true;
    } else if (c != '\r') {
      field += c;
      any = true;
    }
  }
  if (quoted) throw UsageError("unterminated quoted field in table");
  if (any || !field.empty()) {
    rec.push_back(std::move(field));
    records.push_back(std::move(rec));
  }
  if (records.empty()) throw UsageError("table has no header row");

  const auto& header = records.front();
  std::map<std::string, std::size_t> col;
  for (std::size_t c = 0; c < header.size(); ++c) col[header[c]] = c;
  std::vector<std::size_t> idx;
  for (const char* name : {"param", "R", "S", "Pfs", "Pfu"}) {
    auto it = col.find(name);
    if (it == col.end()) throw UsageError(std::string("table is missing column '") + name + "'");
    idx.push_back(it->second);
  }
  std::vector<AuditRow> rows;
  for (std::size_t r = 1; r < records.size(); ++r) {
    const auto& f = records[r];
    if (f.size() != header.size())
      throw UsageError("table row " + std::to_string(r) + " has " + std::to_string(f.size()) +
                       " fields, header has " + std::to_string(header.size()));
    std::string where = "table row " + std::to_string(r);
    rows.push_back({parse_double(f[idx[0]], where), parse_double(f[idx[1]], where),
                    parse_double(f[idx[2]], where), parse_double(f[idx[3]], where),
                    parse_double(f[idx[4]], where)});
  }
  return rows;
}

inline int run_audit(const Options& opt, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const OutputFormat fmt = parse_output(opt.output);
    if (opt.table.empty()) throw UsageError("audit needs --table");
    std::string text = read_file(opt.table);
    RunManifest manifest{"audit", opt.table, sha256_hex(text), {}, {}};
    manifest.settings.emplace_back("safety_band", fmt9(kSafetyIdentityBand));
    manifest.settings.emplace_back("total_band", fmt9(kTotalMassBand));
    auto report = audit_table(read_audit_csv(text));
    std::vector<std::vector<std::string>> rows;
    for (const auto& f : report.rows) {
      std::string flags;
      if (f.safety_flagged) flags += "S!=R+Pfs";
      if (f.total_flagged) flags += std::string(flags.empty() ? "" : ";") + "S+Pfu!=1";
      rows.push_back({fmt9(f.row.param), fmt9(f.safety_defect), fmt9(f.total_defect),
                      f.flagged() ? "flagged" : "ok", flags});
    }
    nlohmann::ordered_json extra;
    extra["flagged_rows"] = report.flagged_count();
    write_table(out, fmt, manifest, {"param", "safety_defect", "total_defect", "status", "checks"},
                rows, extra);
    return report.flagged_count() ? int{kFinding} : int{kOk};
  });
}

}  // namespace depmark::cli

#endif  // DEPMARK_TOOLS_COMMANDS_HPP
