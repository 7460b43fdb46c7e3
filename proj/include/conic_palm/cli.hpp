#pragma once

#include "conic_palm/analysis.hpp"

#include <nlohmann/json.hpp>

#include <ostream>
#include <string>
#include <vector>

namespace conic_palm {

/// Shortest decimal that round-trips the double (at most 17 significant
/// digits). Non-finite values print as nan/inf/-inf.
std::string format_number(double value);

/// Column order: k,c,eps,r,step_norm,accepted,inner_iters,dist_primal,
/// dist_dual,dist_pd. Distance fields are empty without a reference.
void write_trace_csv(const Trace& trace, std::ostream& out);
inline constexpr const char* kTraceCsvHeader =
    "k,c,eps,r,step_norm,accepted,inner_iters,dist_primal,dist_dual,dist_pd";

nlohmann::json trace_summary(const ProblemInstance& problem, const Trace& trace);

/// Entry point of the conic-palm executable; args exclude the program name.
/// Returns the process exit code: 0 success, 1 error, 2 iteration cap.
int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err);

}  // namespace conic_palm
