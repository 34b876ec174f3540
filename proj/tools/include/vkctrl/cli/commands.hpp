#pragma once

#include "vkctrl/cli/config.hpp"
#include "vkctrl/control.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace vkctrl::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitConfig = 2;

/// Convergence study over the configured levels; writes the table files.
int cmd_study(const RunConfig& cfg, std::ostream& out, std::ostream& err);
/// Single-level solve; writes solution_<case>_level<N>.txt.
int cmd_solve(const RunConfig& cfg, std::ostream& out, std::ostream& err);
/// Runs the named properties (all when empty).
int cmd_verify(const std::vector<std::string>& names, bool adjoint_fault, std::ostream& out, std::ostream& err);

/// Header "n_control n_free", then the control values, psi1 and psi2
/// coefficients, one per line at 17 significant digits.
void write_solution(std::ostream& out, const OcpSolution& sol);

/// Full command-line front end.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace vkctrl::cli
