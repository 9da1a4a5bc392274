#pragma once

#include <string>

#include <json.hpp>

namespace hyploop::cli {

using Json = nlohmann::ordered_json;

/// Compact JSON with every floating-point number at 17 significant digits;
/// non-finite numbers become null.
std::string dump(const Json& j);

}  // namespace hyploop::cli
