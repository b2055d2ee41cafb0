#pragma once

#include <optional>
#include <string_view>
#include <vector>

namespace batchdl {

enum class Phase {
  Inner,      // after each row visit of inner-row switching
  Inter,      // after each pair visit of inter-row switching
  Amplitude,  // after each half-step of amplitude adjustment
  Outer,      // start of the run and end of every outer iteration
  InitCode,   // block-OMP coding step of the initialiser
  InitDict,   // least-squares dictionary step of the initialiser
  Code,       // K-SVD sparse coding step
  Dict,       // K-SVD atom update pass
};

std::string_view phase_name(Phase phase);
std::optional<Phase> parse_phase(std::string_view name);

/// True for phases whose objective sequence is guaranteed non-increasing.
bool is_monotone_phase(Phase phase);

struct TraceEntry {
  Phase phase;
  double value;
};

/// Ordered record of ||Y - AX||_F^2 values tagged with the step that produced them.
class ObjectiveTrace {
 public:
  ObjectiveTrace() = default;
  /// `scale` sets the absolute floor used when checking monotonicity
  /// (normally ||Y||_F^2, the objective of the empty factorisation).
  explicit ObjectiveTrace(double scale) : scale_(scale) {}

  void push(Phase phase, double value) { entries_.push_back({phase, value}); }
  void append(const ObjectiveTrace& other);

  const std::vector<TraceEntry>& entries() const noexcept { return entries_; }
  bool empty() const noexcept { return entries_.empty(); }
  std::size_t size() const noexcept { return entries_.size(); }
  double front() const { return entries_.front().value; }
  double back() const { return entries_.back().value; }
  double scale() const noexcept { return scale_; }
  void set_scale(double scale) noexcept { scale_ = scale; }

  /// Index of the first entry that rises above its predecessor by more than
  /// rel_tol * max(previous, 1e-12 * scale), considering only pairs whose later
  /// entry belongs to a monotone phase. Empty when the trace is monotone.
  std::optional<std::size_t> find_increase(double rel_tol = 1e-9) const;

 private:
  std::vector<TraceEntry> entries_;
  double scale_ = 0.0;
};

}  // namespace batchdl
