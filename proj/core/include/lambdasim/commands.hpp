#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "lambdasim/config.hpp"
#include "lambdasim/trajectory.hpp"

namespace lambdasim {

/// One validation check with its measured value and bound.
struct CheckResult {
    std::string name;
    bool passed = false;
    double measured = 0.0;
    double bound = 0.0;
    std::string detail;
};

/// Individual checks behind `validate`, reusable in tests.
CheckResult check_detailed_balance(const DressedSystem& dressed, double temperature_k);
CheckResult check_dark_state_decoupling(const DressedSystem& dressed);
CheckResult check_run_invariants(const LambdaParams& params, const OdeControl& control);
CheckResult check_ideal_limit(const LambdaParams& params, const OdeControl& control);
CheckResult check_two_level_analytic();
CheckResult check_oracle_agreement(const LambdaParams& params, const OdeControl& control,
                                   const OracleConfig& oracle);

/// Format a double with 12 significant digits (the CSV contract).
std::string csv_number(double v);

/// Exit codes: 0 success, 1 config error (thrown before these run),
/// 2 runtime/validation failure. When plot_script is set, `run` also writes a
/// gnuplot script next to the CSVs.
int cmd_run(const ExperimentConfig& config, std::ostream& log, bool plot_script = false);
int cmd_rates(const ExperimentConfig& config, std::ostream& log);
int cmd_validate(const ExperimentConfig& config, std::ostream& log);

}  // namespace lambdasim
