#pragma once

// Trace CSV: one row per round, 17 significant digits.
//
//   round,consensus_err,tracking_err,opt_err,momentum_norm,f_value,grad_norm

#include "hbdn/state.hpp"

#include <filesystem>
#include <iosfwd>
#include <string_view>
#include <vector>

namespace hbdn {

inline constexpr std::string_view kTraceHeader =
    "round,consensus_err,tracking_err,opt_err,momentum_norm,f_value,grad_norm";

void write_trace_csv(std::ostream& out, const RunTrace& trace);
void write_trace_csv(const std::filesystem::path& path, const RunTrace& trace);

/// Inverse of write_trace_csv. Wall time is not stored and reads back as 0;
/// the status is MaxRounds. Throws ParseError naming the line.
[[nodiscard]] RunTrace read_trace_csv(std::istream& in);
[[nodiscard]] RunTrace read_trace_csv(const std::filesystem::path& path);

/// Euclidean norm of the error vector of each record.
[[nodiscard]] std::vector<double> error_norms(const RunTrace& trace);

}  // namespace hbdn
