#include "ccge/uncertainty/formulas.hpp"

#include <string>

namespace ccge::uncertainty {

Mode parse_mode(std::string_view name) {
  if (name == "implicit" || name == "Im") return Mode::kImplicit;
  if (name == "explicit" || name == "Ex") return Mode::kExplicit;
  throw ConfigError("unknown uncertainty mode '" + std::string(name) + "' (expected implicit or explicit)");
}

std::string_view to_string(Mode mode) { return mode == Mode::kImplicit ? "implicit" : "explicit"; }

}  // namespace ccge::uncertainty
