#include "devroll/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <system_error>

#include <unistd.h>

namespace devroll::io {

namespace {

void emit(const nlohmann::json& j, std::string& out, int indent) {
  const std::string pad(static_cast<std::size_t>(indent + 2), ' ');
  const std::string close(static_cast<std::size_t>(indent), ' ');
  switch (j.type()) {
    case nlohmann::json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += "{\n";
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {  // std::map: sorted keys
        if (!first) out += ",\n";
        first = false;
        out += pad + nlohmann::json(it.key()).dump() + ": ";
        emit(it.value(), out, indent + 2);
      }
      out += "\n" + close + "}";
      return;
    }
    case nlohmann::json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      bool scalars = true;
      for (const auto& e : j) scalars = scalars && !e.is_structured();
      if (scalars) {
        out += "[";
        for (std::size_t i = 0; i < j.size(); ++i) {
          if (i) out += ", ";
          emit(j[i], out, indent);
        }
        out += "]";
        return;
      }
      out += "[\n";
      for (std::size_t i = 0; i < j.size(); ++i) {
        if (i) out += ",\n";
        out += pad;
        emit(j[i], out, indent + 2);
      }
      out += "\n" + close + "]";
      return;
    }
    case nlohmann::json::value_t::number_float: {
      const double v = j.get<double>();
      out += std::isfinite(v) ? format_double(v) : "null";
      return;
    }
    default:
      out += j.dump();
  }
}

}  // namespace

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_atomic(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::filesystem::path tmp = path;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw Error("cannot open " + tmp.string() + " for writing");
    f << content;
    f.flush();
    if (!f) throw Error("failed writing " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp);
    throw Error("cannot rename " + tmp.string() + " to " + path.string() + ": " + ec.message());
  }
}

std::string trajectory_csv(const DevelopmentResult& r, bool frames) {
  if (r.samples.empty()) return "t\n";
  const int n = static_cast<int>(r.front().x.size());
  std::string out = "t";
  for (int i = 0; i < n; ++i) out += ",x" + std::to_string(i);
  if (frames)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) out += ",f" + std::to_string(i) + std::to_string(j);
  out += '\n';
  for (const auto& s : r.samples) {
    out += format_double(s.t);
    for (int i = 0; i < n; ++i) out += "," + format_double(s.x[i]);
    if (frames)
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) out += "," + format_double(s.frame(i, j));
    out += '\n';
  }
  return out;
}

std::string variation_csv(const VariationField& v, bool x_columns) {
  if (v.samples.empty()) return "t\n";
  const int n = static_cast<int>(v.samples.front().U.size());
  std::string out = "t";
  for (int i = 0; i < n; ++i) out += ",U" + std::to_string(i);
  if (x_columns)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) out += ",X" + std::to_string(i) + std::to_string(j);
  out += '\n';
  for (const auto& s : v.samples) {
    out += format_double(s.t);
    for (int i = 0; i < n; ++i) out += "," + format_double(s.U[i]);
    if (x_columns)
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) out += "," + format_double(s.X(i, j));
    out += '\n';
  }
  return out;
}

std::string to_json_text(const nlohmann::json& j) {
  std::string out;
  emit(j, out, 0);
  out += '\n';
  return out;
}

nlohmann::json to_json(const Vec& v) {
  nlohmann::json a = nlohmann::json::array();
  for (int i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

nlohmann::json to_json(const Mat& m) {
  nlohmann::json a = nlohmann::json::array();
  for (int i = 0; i < m.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (int j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    a.push_back(std::move(row));
  }
  return a;
}

}  // namespace devroll::io
