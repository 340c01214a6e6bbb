#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "chq/decoherence.hpp"
#include "chq/kinematics.hpp"
#include "chq/scenario.hpp"

namespace chq {

namespace exit_status {
inline constexpr int ok = 0;
inline constexpr int inconsistent = 1;  // also: incompatible families
inline constexpr int invalid = 2;       // validation or domain failure
inline constexpr int io = 3;            // unreadable or unparsable input
}  // namespace exit_status

enum class OutputFormat { table, structured };

struct CommandOptions {
  Condition condition = Condition::weak;
  double epsilon = kDefaultConsistencyEpsilon;
  OutputFormat format = OutputFormat::table;
  bool final_state = false;  // use the time-symmetric functional
};

struct CommandResult {
  int exit_code = exit_status::ok;
  std::string out;
  std::string err;
};

// Fixed print precision.
inline constexpr int kMatrixDigits = 12;
inline constexpr int kProbabilityDigits = 10;

/// %.{digits}g, with magnitudes below 1e-14 printed as 0.
std::string format_real(double x, int digits);
/// "re+imi" / "re-imi".
std::string format_complex(Complex z, int digits);

CommandResult cmd_validate(const std::filesystem::path& scenario, const CommandOptions& opts);
CommandResult cmd_decoherence_matrix(const std::filesystem::path& scenario, const CommandOptions& opts);
CommandResult cmd_consistency(const std::filesystem::path& scenario, const CommandOptions& opts);
CommandResult cmd_probabilities(const std::filesystem::path& scenario, const CommandOptions& opts);
CommandResult cmd_compat(const std::filesystem::path& first, const std::filesystem::path& second,
                         const CommandOptions& opts);
CommandResult cmd_hpo(const std::filesystem::path& scenario, const CommandOptions& opts);
CommandResult cmd_psg_validate(const std::filesystem::path& table, const CommandOptions& opts);
CommandResult cmd_example_spin_half(const BlochAxis& n0, const BlochAxis& n, const BlochAxis& nprime,
                                    const CommandOptions& opts);

/// Qubit with H = 0 prepared along n0 at t = 0, the n' decomposition at
/// t = 1 and the n decomposition at t = 2. Throws DomainError for non-unit
/// axes.
Scenario spin_half_scenario(const BlochAxis& n0, const BlochAxis& n, const BlochAxis& nprime);

/// (n x n') . (n0 x n').
double spin_half_lhs(const BlochAxis& n0, const BlochAxis& n, const BlochAxis& nprime);

struct SpinHalfAnalysis {
  double lhs;               // analytic left-hand side
  double re_d;              // Re d(alpha, beta), alpha = (n'+, n+), beta = (n'-, n+)
  bool analytic_consistent; // |lhs| / 4 <= epsilon (the largest |Re d| in the family is |lhs| / 4)
  ConsistencyReport report;
  DecoherenceMatrix matrix;
};

SpinHalfAnalysis analyze_spin_half(const BlochAxis& n0, const BlochAxis& n, const BlochAxis& nprime,
                                   Condition condition = Condition::weak,
                                   double epsilon = kDefaultConsistencyEpsilon);

/// Full command-line entry point; args excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace chq
