#include "redreg/jsonio.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace redreg {

std::string format_double(double v) {
  if (!std::isfinite(v)) {
    throw std::invalid_argument("format_double: non-finite value");
  }
  if (v == 0.0) return "0";  // fold -0.0 so parse/serialize round-trips exactly
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

namespace {

void append_escaped(std::string& out, const std::string& s) {
  out += '"';
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      case '\t': out += "\\t"; break;
      default:
        if (static_cast<unsigned char>(c) < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof(buf), "\\u%04x", c);
          out += buf;
        } else {
          out += c;
        }
    }
  }
  out += '"';
}

void dump(std::string& out, const nlohmann::ordered_json& j) {
  using value_t = nlohmann::ordered_json::value_t;
  switch (j.type()) {
    case value_t::null: out += "null"; break;
    case value_t::boolean: out += j.get<bool>() ? "true" : "false"; break;
    case value_t::number_integer: out += std::to_string(j.get<long long>()); break;
    case value_t::number_unsigned: out += std::to_string(j.get<unsigned long long>()); break;
    case value_t::number_float: out += format_double(j.get<double>()); break;
    case value_t::string: append_escaped(out, j.get<std::string>()); break;
    case value_t::array: {
      out += '[';
      bool first = true;
      for (const auto& item : j) {
        if (!first) out += ',';
        first = false;
        dump(out, item);
      }
      out += ']';
      break;
    }
    case value_t::object: {
      out += '{';
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) out += ',';
        first = false;
        append_escaped(out, it.key());
        out += ':';
        dump(out, it.value());
      }
      out += '}';
      break;
    }
    default:
      throw std::invalid_argument("dump_canonical: unsupported JSON value type");
  }
}

}  // namespace

std::string dump_canonical(const nlohmann::ordered_json& j) {
  std::string out;
  dump(out, j);
  return out;
}

}  // namespace redreg
