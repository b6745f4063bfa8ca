#pragma once

// CSV text with a commented parameter header, and an all-or-nothing output
// directory writer: files are staged in memory and only land on disk, via
// temp-file-and-rename, once the whole command has succeeded.

#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "afmgate/errors.hpp"

namespace afmgate {

/// Shortest round-trip decimal form, locale independent.
inline std::string fmt_num(double x) {
  char buf[40];
  for (int prec = 15; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, x);
    if (std::strtod(buf, nullptr) == x) break;
  }
  return buf;
}

class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> columns) : columns_(std::move(columns)) {}

  void comment(const std::string& key, const std::string& value) { header_.push_back({key, value}); }
  void comment(const std::string& key, double value) { comment(key, fmt_num(value)); }

  class Row {
   public:
    Row& operator<<(double x) { return add(fmt_num(x)); }
    Row& operator<<(int x) { return add(std::to_string(x)); }
    Row& operator<<(long x) { return add(std::to_string(x)); }
    Row& operator<<(std::size_t x) { return add(std::to_string(x)); }
    Row& operator<<(const std::string& s) { return add(s); }
    Row& operator<<(const char* s) { return add(s); }

   private:
    friend class CsvTable;
    Row& add(std::string s) {
      cells.push_back(std::move(s));
      return *this;
    }
    std::vector<std::string> cells;
  };

  Row& row() {
    rows_.emplace_back();
    return rows_.back();
  }

  std::string str() const {
    std::ostringstream out;
    for (const auto& [k, v] : header_) out << "# " << k << ": " << v << "\n";
    for (std::size_t i = 0; i < columns_.size(); ++i) out << (i ? "," : "") << columns_[i];
    out << "\n";
    for (const auto& r : rows_) {
      if (r.cells.size() != columns_.size()) throw MisuseError("CSV row width does not match the header");
      for (std::size_t i = 0; i < r.cells.size(); ++i) out << (i ? "," : "") << r.cells[i];
      out << "\n";
    }
    return out.str();
  }

 private:
  std::vector<std::string> columns_;
  std::vector<std::pair<std::string, std::string>> header_;
  std::vector<Row> rows_;
};

struct RunManifest {
  std::string command;
  std::string config_path;
  std::string output_dir;
  std::string git_describe;
  std::uint64_t seed = 0;
  std::string timestamp;

  nlohmann::ordered_json to_json() const {
    nlohmann::ordered_json j;
    j["command"] = command;
    j["config_path"] = config_path;
    j["output_dir"] = output_dir;
    j["git_describe"] = git_describe;
    j["seed"] = seed;
    j["timestamp"] = timestamp;
    return j;
  }
};

inline std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

class OutputSet {
 public:
  explicit OutputSet(std::filesystem::path dir) : dir_(std::move(dir)) {}

  void add(const std::string& name, std::string content) { files_.push_back({name, std::move(content)}); }
  const std::filesystem::path& dir() const { return dir_; }

  /// Writes every staged file plus manifest.json. Each file is written to a
  /// temporary name first and renamed into place.
  void commit(const RunManifest& manifest) {
    add("manifest.json", manifest.to_json().dump(2) + "\n");
    std::error_code ec;
    std::filesystem::create_directories(dir_, ec);
    if (ec) throw std::runtime_error("cannot create output directory " + dir_.string() + ": " + ec.message());
    std::vector<std::pair<std::filesystem::path, std::filesystem::path>> staged;
    try {
      for (const auto& [name, content] : files_) {
        const auto final_path = dir_ / name;
        const auto tmp = dir_ / ("." + name + ".tmp");
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        out << content;
        out.close();
        if (!out) throw std::runtime_error("failed writing " + tmp.string());
        staged.push_back({tmp, final_path});
      }
    } catch (...) {
      for (const auto& [tmp, fin] : staged) std::filesystem::remove(tmp, ec);
      throw;
    }
    for (const auto& [tmp, fin] : staged) std::filesystem::rename(tmp, fin);
  }

 private:
  std::filesystem::path dir_;
  std::vector<std::pair<std::string, std::string>> files_;
};

}  // namespace afmgate
