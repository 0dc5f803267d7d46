#pragma once

// Tabular output for the CLI: versioned CSV, JSON with an embedded manifest,
// and a sidecar manifest carrying the timestamps.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

namespace bargmann::cli {

inline constexpr const char* kToolVersion = "0.1.0";
inline constexpr int kSchemaVersion = 1;

/// Thrown when an output file cannot be written; maps to exit status 3.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Full-precision decimal: 17 significant digits.
inline std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline std::string json_number(double v) { return std::isfinite(v) ? fmt(v) : "null"; }

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

/// Parameters in insertion order, already rendered as text.
struct RunManifest {
  std::string command;
  std::vector<std::pair<std::string, std::string>> params;
  std::uint64_t seed = 42;
  std::string run_id;
  std::vector<std::string> outputs;
  std::string started_at;
  std::string finished_at;

  void param(const std::string& k, const std::string& v) { params.emplace_back(k, v); }
  void param(const std::string& k, double v) { params.emplace_back(k, fmt(v)); }
  void param(const std::string& k, long long v) { params.emplace_back(k, std::to_string(v)); }
  void param(const std::string& k, int v) { params.emplace_back(k, std::to_string(v)); }
};

/// FNV-1a over the command and its parameters, so identical invocations
/// share a run id.
inline std::string compute_run_id(const RunManifest& m) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  auto mix = [&](const std::string& s) {
    for (unsigned char c : s) {
      h ^= c;
      h *= 0x100000001b3ull;
    }
    h ^= 0xff;
    h *= 0x100000001b3ull;
  };
  mix(m.command);
  for (const auto& [k, v] : m.params) {
    mix(k);
    mix(v);
  }
  mix(std::to_string(m.seed));
  mix(kToolVersion);
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

inline std::string utc_now() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

/// Manifest fields that are stable across identical runs.
inline std::string manifest_json(const RunManifest& m, bool with_timestamps) {
  using nlohmann::json;
  std::ostringstream os;
  os << "{\"command\": " << json(m.command).dump() << ", \"run_id\": " << json(m.run_id).dump()
     << ", \"schema\": " << kSchemaVersion << ", \"tool_version\": " << json(kToolVersion).dump()
     << ", \"seed\": " << m.seed << ", \"params\": {";
  for (std::size_t i = 0; i < m.params.size(); ++i)
    os << (i ? ", " : "") << json(m.params[i].first).dump() << ": " << json(m.params[i].second).dump();
  os << "}, \"outputs\": [";
  for (std::size_t i = 0; i < m.outputs.size(); ++i) os << (i ? ", " : "") << json(m.outputs[i]).dump();
  os << "]";
  if (with_timestamps)
    os << ", \"started_at\": " << json(m.started_at).dump() << ", \"finished_at\": " << json(m.finished_at).dump();
  os << "}";
  return os.str();
}

inline void write_csv(std::ostream& os, const Table& t, const RunManifest& m) {
  os << "# schema=" << kSchemaVersion << "\n";
  os << "# run_id=" << m.run_id << "\n";
  for (std::size_t i = 0; i < t.columns.size(); ++i) os << (i ? "," : "") << t.columns[i];
  os << "\n";
  for (const auto& r : t.rows) {
    for (std::size_t i = 0; i < r.size(); ++i) os << (i ? "," : "") << fmt(r[i]);
    os << "\n";
  }
}

inline void write_json(std::ostream& os, const Table& t, const RunManifest& m) {
  using nlohmann::json;
  os << "{\"manifest\": " << manifest_json(m, false) << ",\n \"rows\": [";
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    os << (r ? ",\n  " : "\n  ") << "{";
    for (std::size_t i = 0; i < t.columns.size(); ++i)
      os << (i ? ", " : "") << json(t.columns[i]).dump() << ": " << json_number(t.rows[r][i]);
    os << "}";
  }
  os << "\n]}\n";
}

enum class Format { Csv, Json };

/// Writes the table to `path` (or `fallback` when path is empty) and, for a
/// file target, the sidecar `<path>.manifest.json`.
inline void emit_table(const Table& t, RunManifest& m, Format fmt_kind, const std::string& path,
                       std::ostream& fallback) {
  if (!path.empty()) {
    m.outputs = {path, path + ".manifest.json"};
    m.run_id = compute_run_id(m);
  }
  auto write = [&](std::ostream& os) {
    if (fmt_kind == Format::Csv)
      write_csv(os, t, m);
    else
      write_json(os, t, m);
  };
  if (path.empty()) {
    write(fallback);
    return;
  }
  std::ofstream f(path);
  if (!f) throw IoError("cannot open output file: " + path);
  write(f);
  f.close();
  if (!f) throw IoError("failed writing output file: " + path);
  m.finished_at = utc_now();
  std::ofstream side(path + ".manifest.json");
  if (!side) throw IoError("cannot open manifest file: " + path + ".manifest.json");
  side << manifest_json(m, true) << "\n";
  side.close();
  if (!side) throw IoError("failed writing manifest file: " + path + ".manifest.json");
}

}  // namespace bargmann::cli
