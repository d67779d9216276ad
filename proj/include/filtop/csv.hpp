#pragma once

#include "filtop/eval.hpp"

#include <filesystem>
#include <string>

namespace filtop {

/// Full round-trip formatting: 17 significant digits, '.' decimal separator,
/// integral values keep a trailing ".0", infinities print as "inf"/"-inf".
std::string format_double(double value);

/// Header "time,error"; one row per stamp.
void write_error_curve_csv(const std::filesystem::path& path, const ErrorCurve& curve);

/// Header "lambda_prior,lambda_stab,valid_error". The intrusive route reports
/// its single ridge lambda in the lambda_prior column.
void write_grid_table_csv(const std::filesystem::path& path, const std::vector<GridPoint>& table);

/// Header "filter,route,M,lambda_prior,lambda_stab,avg_error".
void write_sweep_csv(const std::filesystem::path& path, const SweepResult& sweep);

}  // namespace filtop
