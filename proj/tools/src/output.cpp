#include "brlab/tools/output.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace brlab::tools {

std::string report_schema_version() {
  return std::to_string(kReportSchemaMajor) + "." + std::to_string(kReportSchemaMinor);
}

std::string format_number(double v) {
  if (!std::isfinite(v)) throw std::domain_error("non-finite value in output");
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

Json finite_or_null(double v) {
  if (std::isfinite(v)) return v;
  return nullptr;
}

namespace {

void emit(std::ostringstream& os, const Json& j, int depth) {
  const std::string pad(2 * (depth + 1), ' ');
  const std::string close(2 * depth, ' ');
  switch (j.type()) {
    case Json::value_t::object: {
      if (j.empty()) {
        os << "{}";
        return;
      }
      os << "{\n";
      bool first = true;
      for (const auto& [key, value] : j.items()) {
        if (!first) os << ",\n";
        first = false;
        os << pad << Json(key).dump() << ": ";
        emit(os, value, depth + 1);
      }
      os << "\n" << close << "}";
      return;
    }
    case Json::value_t::array: {
      if (j.empty()) {
        os << "[]";
        return;
      }
      bool scalars = true;
      for (const auto& v : j) scalars = scalars && !v.is_structured();
      if (scalars) {
        os << "[";
        for (std::size_t i = 0; i < j.size(); ++i) {
          if (i) os << ", ";
          emit(os, j[i], depth + 1);
        }
        os << "]";
        return;
      }
      os << "[\n";
      for (std::size_t i = 0; i < j.size(); ++i) {
        if (i) os << ",\n";
        os << pad;
        emit(os, j[i], depth + 1);
      }
      os << "\n" << close << "]";
      return;
    }
    case Json::value_t::number_float:
      os << format_number(j.get<double>());
      return;
    default:
      os << j.dump();
  }
}

}  // namespace

std::string dump_json(const Json& j) {
  std::ostringstream os;
  emit(os, j, 0);
  os << "\n";
  return os.str();
}

void write_atomic(const std::filesystem::path& path, const std::string& text) {
  namespace fs = std::filesystem;
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
    out << text;
    out.flush();
    if (!out) throw std::runtime_error("write failed for " + tmp.string());
  }
  fs::rename(tmp, path);
}

void write_table(const std::filesystem::path& dir, const std::string& stem, const Table& table) {
  std::ostringstream csv;
  std::ostringstream dat;
  dat << "#";
  for (std::size_t c = 0; c < table.columns.size(); ++c) {
    csv << (c ? "," : "") << table.columns[c];
    dat << " " << table.columns[c];
  }
  csv << "\n";
  dat << "\n";
  for (const auto& row : table.rows) {
    if (row.size() != table.columns.size()) {
      throw std::logic_error("table " + stem + ": row width does not match header");
    }
    for (std::size_t c = 0; c < row.size(); ++c) {
      const std::string v = std::isfinite(row[c]) ? format_number(row[c]) : std::string("nan");
      csv << (c ? "," : "") << v;
      dat << (c ? " " : "") << v;
    }
    csv << "\n";
    dat << "\n";
  }
  write_atomic(dir / (stem + ".csv"), csv.str());
  write_atomic(dir / (stem + ".dat"), dat.str());
}

std::filesystem::path resolve_out_dir(const std::optional<std::string>& flag,
                                      const std::optional<std::string>& config_value) {
  if (flag && !flag->empty()) return *flag;
  if (const char* env = std::getenv("BRLAB_OUT"); env && *env) return env;
  if (config_value && !config_value->empty()) return *config_value;
  return "brlab_out";
}

Json read_report(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ReportError("cannot open report " + path.string());
  Json j;
  try {
    j = Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw ReportError("report " + path.string() + " is not valid JSON: " + e.what());
  }
  if (!j.is_object() || !j.contains("schema_version") || !j["schema_version"].is_string()) {
    throw ReportError("report " + path.string() + " has no schema_version");
  }
  const std::string version = j["schema_version"].get<std::string>();
  int major = -1;
  try {
    major = std::stoi(version.substr(0, version.find('.')));
  } catch (const std::exception&) {
    throw ReportError("report schema_version '" + version + "' is malformed");
  }
  if (major != kReportSchemaMajor) {
    throw ReportError("report schema major " + std::to_string(major) + " is not supported (expected " +
                      std::to_string(kReportSchemaMajor) + ")");
  }
  return j;
}

}  // namespace brlab::tools
