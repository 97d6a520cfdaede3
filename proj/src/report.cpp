#include "adrl/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <tuple>

#include "adrl/error.hpp"
#include "adrl/plot.hpp"

namespace adrl {

namespace {

using GroupKey = std::tuple<std::string, double, double>;  // variant, fmr, lmr

GroupKey key_of(const RunRecord& r) {
    return {std::string(variant_name(r.config.variant())), r.config.fmr, r.config.lmr};
}

std::string pct(double v) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

std::string run_label(const LoadedRun& r, const std::filesystem::path& root) {
    const auto rel = r.dir.lexically_relative(root).string();
    return rel.empty() || rel == "." ? r.dir.filename().string() : rel;
}

void save(const std::filesystem::path& path, const std::string& text,
          std::vector<std::filesystem::path>& files) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw ConfigError("cannot write " + path.string());
    os << text;
    files.push_back(path);
}

double mean_ap(const std::vector<const RunRecord*>& runs) {
    double s = 0.0;
    for (const RunRecord* r : runs) s += r->test.ap;
    return s / static_cast<double>(runs.size());
}

}  // namespace

std::vector<LoadedRun> find_runs(const std::filesystem::path& root) {
    if (!std::filesystem::is_directory(root)) throw ConfigError("not a directory: " + root.string());
    std::vector<std::filesystem::path> dirs;
    if (std::filesystem::exists(root / "summary.json")) dirs.push_back(root);
    for (const auto& e : std::filesystem::recursive_directory_iterator(root)) {
        if (e.is_directory() && std::filesystem::exists(e.path() / "summary.json"))
            dirs.push_back(e.path());
    }
    std::sort(dirs.begin(), dirs.end());
    std::vector<LoadedRun> out;
    for (const auto& d : dirs) out.push_back({d, read_run(d)});
    return out;
}

std::string group_table(const std::vector<LoadedRun>& runs) {
    std::map<GroupKey, std::vector<MetricsReport>> groups;
    for (const LoadedRun& r : runs) groups[key_of(r.run)].push_back(r.run.test);
    std::string out;
    for (const auto& [key, reports] : groups) {
        const auto& [variant, fmr, lmr] = key;
        out += "variant=" + variant + " fmr=" + pct(fmr) + " lmr=" + pct(lmr) +
               " runs=" + std::to_string(reports.size()) + "\n";
        out += format_table(summarize(reports)) + "\n";
    }
    return out;
}

ReportFiles write_report(const std::vector<LoadedRun>& runs, const std::filesystem::path& out) {
    if (runs.empty()) throw ConfigError("no runs found");
    std::filesystem::create_directories(out);
    ReportFiles rep;
    rep.table = group_table(runs);
    save(out / "table.txt", rep.table, rep.files);

    const std::filesystem::path root = runs.front().dir.parent_path();
    LineChart loss{"Training loss", "epoch", "total loss", {}};
    LineChart mi{"Mutual-information diagnostics", "epoch", "estimate", {}};
    for (const LoadedRun& r : runs) {
        Series total{run_label(r, root), {}, {}};
        Series jsd{run_label(r, root) + " JSD", {}, {}};
        Series ovl{run_label(r, root) + " bound", {}, {}};
        for (const EpochRecord& e : r.run.epochs) {
            const double x = static_cast<double>(e.epoch);
            total.x.push_back(x);
            total.y.push_back(e.total);
            jsd.x.push_back(x);
            jsd.y.push_back(e.jsd);
            ovl.x.push_back(x);
            ovl.y.push_back(e.overlap);
        }
        loss.series.push_back(std::move(total));
        mi.series.push_back(std::move(jsd));
        mi.series.push_back(std::move(ovl));
    }
    save(out / "loss_curves.svg", render_line_chart(loss), rep.files);
    save(out / "mi_trends.svg", render_line_chart(mi), rep.files);

    // Sweeps and heatmap over the full variant only (or whatever is present
    // when no full runs exist).
    std::map<GroupKey, std::vector<const RunRecord*>> groups;
    for (const LoadedRun& r : runs) groups[key_of(r.run)].push_back(&r.run);
    const bool has_full = std::any_of(groups.begin(), groups.end(),
                                      [](const auto& g) { return std::get<0>(g.first) == "full"; });
    std::set<double> fmrs, lmrs;
    std::map<std::pair<double, double>, double> ap;
    for (const auto& [key, members] : groups) {
        if (has_full && std::get<0>(key) != "full") continue;
        fmrs.insert(std::get<1>(key));
        lmrs.insert(std::get<2>(key));
        ap[{std::get<1>(key), std::get<2>(key)}] = mean_ap(members);
    }

    LineChart by_fmr{"AP versus feature missing ratio", "FMR", "test AP", {}};
    for (double l : lmrs) {
        Series s{"LMR " + pct(l), {}, {}};
        for (double f : fmrs) {
            const auto it = ap.find({f, l});
            if (it == ap.end()) continue;
            s.x.push_back(f);
            s.y.push_back(it->second);
        }
        by_fmr.series.push_back(std::move(s));
    }
    LineChart by_lmr{"AP versus label missing ratio", "LMR", "test AP", {}};
    for (double f : fmrs) {
        Series s{"FMR " + pct(f), {}, {}};
        for (double l : lmrs) {
            const auto it = ap.find({f, l});
            if (it == ap.end()) continue;
            s.x.push_back(l);
            s.y.push_back(it->second);
        }
        by_lmr.series.push_back(std::move(s));
    }
    save(out / "sweep_fmr.svg", render_line_chart(by_fmr), rep.files);
    save(out / "sweep_lmr.svg", render_line_chart(by_lmr), rep.files);

    Heatmap heat;
    heat.title = "Mean test AP";
    heat.x_label = "FMR";
    heat.y_label = "LMR";
    for (double f : fmrs) heat.x_ticks.push_back(pct(f));
    for (double l : lmrs) {
        heat.y_ticks.push_back(pct(l));
        std::vector<double> row;
        for (double f : fmrs) {
            const auto it = ap.find({f, l});
            row.push_back(it == ap.end() ? std::numeric_limits<double>::quiet_NaN() : it->second);
        }
        heat.cells.push_back(std::move(row));
    }
    save(out / "ap_heatmap.svg", render_heatmap(heat), rep.files);
    return rep;
}

}  // namespace adrl
