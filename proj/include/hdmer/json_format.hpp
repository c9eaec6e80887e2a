#pragma once

// JSON output with floating-point numbers written to a fixed number of
// decimals, for reports that are diffed byte-for-byte.

#include <cstdio>
#include <string>

#include "json.hpp"

namespace hdmer {

inline void dump_fixed(const nlohmann::ordered_json& j, std::string& out, int decimals,
                       int indent, int depth) {
  const auto newline = [&](int d) {
    if (indent < 0) return;
    out.push_back('\n');
    out.append(static_cast<std::size_t>(indent * d), ' ');
  };
  switch (j.type()) {
    case nlohmann::json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out.push_back('{');
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) out.push_back(',');
        first = false;
        newline(depth + 1);
        out += nlohmann::json(it.key()).dump();
        out += indent < 0 ? ":" : ": ";
        dump_fixed(it.value(), out, decimals, indent, depth + 1);
      }
      newline(depth);
      out.push_back('}');
      return;
    }
    case nlohmann::json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      out.push_back('[');
      bool first = true;
      for (const auto& v : j) {
        if (!first) out.push_back(',');
        first = false;
        newline(depth + 1);
        dump_fixed(v, out, decimals, indent, depth + 1);
      }
      newline(depth);
      out.push_back(']');
      return;
    }
    case nlohmann::json::value_t::number_float: {
      char buf[64];
      std::snprintf(buf, sizeof buf, "%.*f", decimals, j.get<double>());
      out += buf;
      return;
    }
    default:
      out += j.dump();
  }
}

/// Like ordered_json::dump(indent), but floats use "%.<decimals>f".
inline std::string dump_fixed(const nlohmann::ordered_json& j, int decimals = 6,
                              int indent = -1) {
  std::string out;
  dump_fixed(j, out, decimals, indent, 0);
  return out;
}

}  // namespace hdmer
