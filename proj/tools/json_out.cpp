#include "json_out.hpp"

#include <cmath>
#include <cstdio>

namespace hyploop::cli {
namespace {

void write(const Json& j, std::string& s) {
  switch (j.type()) {
    case Json::value_t::object: {
      s += '{';
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) s += ',';
        first = false;
        s += Json(it.key()).dump();
        s += ':';
        write(it.value(), s);
      }
      s += '}';
      return;
    }
    case Json::value_t::array: {
      s += '[';
      for (std::size_t i = 0; i < j.size(); ++i) {
        if (i) s += ',';
        write(j[i], s);
      }
      s += ']';
      return;
    }
    case Json::value_t::number_float: {
      const double v = j.get<double>();
      if (!std::isfinite(v)) {
        s += "null";
        return;
      }
      char buf[40];
      std::snprintf(buf, sizeof buf, "%.17g", v);
      s += buf;
      return;
    }
    default: s += j.dump();
  }
}

}  // namespace

std::string dump(const Json& j) {
  std::string s;
  write(j, s);
  return s;
}

}  // namespace hyploop::cli
