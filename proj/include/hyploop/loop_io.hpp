#pragma once

#include <optional>
#include <string>

#include "hyploop/loop.hpp"

namespace hyploop {

struct LoopMeta {
  double k = 0.0;
  double eps = 0.0;
  std::string field;
  std::size_t n = 0;
};

/// CSV with header "j,x1,x2,u1,u2"; (x1, x2) is the parameter point on the
/// unit circle. All numbers are written with 17 significant digits.
std::string loop_to_csv(const Loop& u);
Loop loop_from_csv(const std::string& text);

std::string meta_to_json(const LoopMeta& m);
LoopMeta meta_from_json(const std::string& text);

/// Sidecar path for a loop file: path + ".json".
std::string sidecar_path(const std::string& loop_path);

/// Writes the CSV and its sidecar. Throws ConfigError on I/O failure.
void write_loop(const std::string& path, const Loop& u, const LoopMeta& meta);
/// Reads the CSV; the sidecar is optional.
Loop read_loop(const std::string& path, std::optional<LoopMeta>* meta = nullptr);

}  // namespace hyploop
