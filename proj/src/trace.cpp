#include "batchdl/trace.hpp"

#include <algorithm>
#include <array>
#include <utility>

namespace batchdl {

namespace {

constexpr std::array<std::pair<Phase, std::string_view>, 8> kPhaseNames{{
    {Phase::Inner, "inner"},
    {Phase::Inter, "inter"},
    {Phase::Amplitude, "amplitude"},
    {Phase::Outer, "outer"},
    {Phase::InitCode, "init_code"},
    {Phase::InitDict, "init_dict"},
    {Phase::Code, "ksvd_code"},
    {Phase::Dict, "ksvd_dict"},
}};

}  // namespace

std::string_view phase_name(Phase phase) {
  for (const auto& [p, name] : kPhaseNames) {
    if (p == phase) return name;
  }
  return "unknown";
}

std::optional<Phase> parse_phase(std::string_view name) {
  for (const auto& [p, n] : kPhaseNames) {
    if (n == name) return p;
  }
  return std::nullopt;
}

bool is_monotone_phase(Phase phase) {
  return phase == Phase::Inner || phase == Phase::Inter || phase == Phase::Amplitude ||
         phase == Phase::Outer;
}

void ObjectiveTrace::append(const ObjectiveTrace& other) {
  entries_.insert(entries_.end(), other.entries_.begin(), other.entries_.end());
  scale_ = std::max(scale_, other.scale_);
}

std::optional<std::size_t> ObjectiveTrace::find_increase(double rel_tol) const {
  const double floor = 1e-12 * scale_;
  for (std::size_t t = 1; t < entries_.size(); ++t) {
    if (!is_monotone_phase(entries_[t].phase)) continue;
    const double prev = entries_[t - 1].value;
    const double allowed = prev + rel_tol * std::max(prev, floor);
    if (entries_[t].value > allowed) return t;
  }
  return std::nullopt;
}

}  // namespace batchdl
