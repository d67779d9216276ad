#include "filtop/csv.hpp"

#include "filtop/errors.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

namespace filtop {

std::string format_double(double value) {
    if (std::isnan(value)) return "nan";
    if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", value);
    std::string s(buf);
    if (s.find_first_of(".e") == std::string::npos) s += ".0";
    return s;
}

void write_error_curve_csv(const std::filesystem::path& path, const ErrorCurve& curve) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot open for writing: " + path.string());
    out << "time,error\n";
    for (size_t i = 0; i < curve.times.size(); ++i)
        out << format_double(curve.times[i]) << "," << format_double(curve.errors[i]) << "\n";
    if (!out) throw IoError("write failed: " + path.string());
}

void write_grid_table_csv(const std::filesystem::path& path, const std::vector<GridPoint>& table) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot open for writing: " + path.string());
    out << "lambda_prior,lambda_stab,valid_error\n";
    for (const GridPoint& p : table)
        out << format_double(p.lambda_prior) << "," << format_double(p.lambda_stab) << ","
            << format_double(p.valid_error) << "\n";
    if (!out) throw IoError("write failed: " + path.string());
}

void write_sweep_csv(const std::filesystem::path& path, const SweepResult& sweep) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot open for writing: " + path.string());
    out << "filter,route,M,lambda_prior,lambda_stab,avg_error\n";
    for (const SweepCell& c : sweep.cells)
        out << c.filter << "," << c.route << "," << c.m << "," << format_double(c.lambda_prior)
            << "," << format_double(c.lambda_stab) << "," << format_double(c.avg_error) << "\n";
    if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace filtop
