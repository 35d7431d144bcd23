#include "fusedsp/runtime_params.hpp"

#include <charconv>
#include <cmath>
#include <system_error>

namespace fusedsp {

void ParamRecord::set_assignment(std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos || eq == 0) {
    throw std::invalid_argument("expected name=value, got '" + std::string(assignment) + "'");
  }
  const std::string name(assignment.substr(0, eq));
  const std::string_view text = assignment.substr(eq + 1);
  double value = 0.0;
  const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || end != text.data() + text.size() || text.empty() || !std::isfinite(value)) {
    throw std::invalid_argument("parameter '" + name + "': '" + std::string(text) +
                                "' is not a finite decimal number");
  }
  values_[name] = value;
}

std::optional<double> ParamRecord::get(const std::string& name) const {
  const auto it = values_.find(name);
  if (it == values_.end()) return std::nullopt;
  return it->second;
}

ParamRecord ParamRecord::merged(const ParamRecord& overrides) const {
  ParamRecord out = *this;
  for (const auto& [name, value] : overrides.values_) out.values_[name] = value;
  return out;
}

ParamRef<double> ParamSet::param(const std::string& name) {
  if (name.empty()) throw SchemaError("parameter name must not be empty");
  for (const auto& existing : names_)
    if (existing == name) throw SchemaError("duplicate parameter '" + name + "'");
  const std::size_t slot = names_.size();
  names_.push_back(name);
  return ParamRef<double>::open([slot](const ParamValues& v) { return v[slot]; });
}

}  // namespace fusedsp
