#pragma once

// CSV export/import of trajectories and SVG plots of output and control.

#include <filesystem>
#include <string>
#include <vector>

#include "fpqc/simulate.hpp"

namespace fpqc {

// step,time,o_t,u_t,R_t,trace_defect,herm_defect followed by re/im of every
// vectorized slot in canonical order. Values use shortest round-trip decimal.
std::vector<std::string> csv_header(int levels);
std::string trajectory_csv(const Trajectory& traj);
void export_csv(const Trajectory& traj, const std::filesystem::path& path);

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;

    // Index of a named column; throws if absent.
    std::size_t column(const std::string& name) const;
    std::vector<double> values(const std::string& name) const;
};

CsvTable parse_csv(const std::string& text);
CsvTable import_csv(const std::filesystem::path& path);

// Writes <stem>_output.svg (with a dashed reference line at o_d) and
// <stem>_control.svg; returns both paths.
std::vector<std::filesystem::path> emit_plots(const Trajectory& traj, double o_d, const std::filesystem::path& stem,
                                              const std::string& title = "");

}  // namespace fpqc
