#include "hyploop/loop_io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "hyploop/errors.hpp"

namespace hyploop {
namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double parse_number(std::string_view s, std::size_t line) {
  while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\r')) s.remove_suffix(1);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw ConfigError("loop file line " + std::to_string(line) + ": bad number '" + std::string(s) + "'");
  return v;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void spit(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path);
  out << text;
  if (!out) throw ConfigError("write failed for " + path);
}

}  // namespace

std::string loop_to_csv(const Loop& u) {
  std::string s = "j,x1,x2,u1,u2\n";
  for (std::size_t j = 0; j < u.size(); ++j) {
    const double t = sample_angle(j, u.size());
    s += std::to_string(j) + ',' + fmt(std::cos(t)) + ',' + fmt(std::sin(t)) + ',' + fmt(u.x()[j]) + ',' +
         fmt(u.y()[j]) + '\n';
  }
  return s;
}

Loop loop_from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("loop file is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "j,x1,x2,u1,u2") throw ConfigError("loop file header must be j,x1,x2,u1,u2");
  std::vector<double> x, y;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    std::vector<std::string_view> cols;
    std::string_view rest = line;
    for (;;) {
      const auto p = rest.find(',');
      cols.push_back(rest.substr(0, p));
      if (p == std::string_view::npos) break;
      rest.remove_prefix(p + 1);
    }
    if (cols.size() != 5) throw ConfigError("loop file line " + std::to_string(lineno) + ": expected 5 columns");
    const double j = parse_number(cols[0], lineno);
    if (j != static_cast<double>(x.size()))
      throw ConfigError("loop file line " + std::to_string(lineno) + ": rows must be numbered 0..N-1 in order");
    x.push_back(parse_number(cols[3], lineno));
    y.push_back(parse_number(cols[4], lineno));
  }
  return Loop(std::move(x), std::move(y));
}

std::string meta_to_json(const LoopMeta& m) {
  // Hand-formatted so that every number carries 17 significant digits.
  return "{\"k\":" + fmt(m.k) + ",\"eps\":" + fmt(m.eps) + ",\"field\":" + nlohmann::json(m.field).dump() +
         ",\"N\":" + std::to_string(m.n) + "}\n";
}

LoopMeta meta_from_json(const std::string& text) {
  try {
    const auto j = nlohmann::json::parse(text);
    LoopMeta m;
    m.k = j.at("k").get<double>();
    m.eps = j.at("eps").get<double>();
    m.field = j.at("field").get<std::string>();
    m.n = j.at("N").get<std::size_t>();
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad loop metadata: ") + e.what());
  }
}

std::string sidecar_path(const std::string& loop_path) { return loop_path + ".json"; }

void write_loop(const std::string& path, const Loop& u, const LoopMeta& meta) {
  spit(path, loop_to_csv(u));
  spit(sidecar_path(path), meta_to_json(meta));
}

Loop read_loop(const std::string& path, std::optional<LoopMeta>* meta) {
  Loop u = loop_from_csv(slurp(path));
  if (meta != nullptr) {
    std::ifstream probe(sidecar_path(path));
    *meta = probe ? std::optional<LoopMeta>(meta_from_json(slurp(sidecar_path(path)))) : std::nullopt;
  }
  return u;
}

}  // namespace hyploop
