#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "adrl/harness.hpp"

namespace adrl {

struct LoadedRun {
    std::filesystem::path dir;
    RunRecord run;
};

/// Every directory under `root` (including `root`) that holds a summary.json,
/// sorted by path.
std::vector<LoadedRun> find_runs(const std::filesystem::path& root);

/// One mean(std) block per (variant, fmr, lmr) group.
std::string group_table(const std::vector<LoadedRun>& runs);

struct ReportFiles {
    std::string table;
    std::vector<std::filesystem::path> files;
};

/// Writes table.txt, loss_curves.svg, mi_trends.svg, sweep_fmr.svg,
/// sweep_lmr.svg and ap_heatmap.svg into `out`.
ReportFiles write_report(const std::vector<LoadedRun>& runs, const std::filesystem::path& out);

}  // namespace adrl
