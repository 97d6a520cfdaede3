#include "adrl/cli.hpp"

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "adrl/config.hpp"
#include "adrl/data.hpp"
#include "adrl/dataset_io.hpp"
#include "adrl/error.hpp"
#include "adrl/harness.hpp"
#include "adrl/metrics.hpp"
#include "adrl/report.hpp"

namespace adrl::cli {

namespace {

namespace fs = std::filesystem;

void need(bool ok, const std::string& msg) {
    if (!ok) throw ConfigError(msg);
}

void write_file(const fs::path& path, const std::string& text) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream os(path, std::ios::binary);
    if (!os) throw ConfigError("cannot write " + path.string());
    os << text;
}

nlohmann::json metrics_json(const MetricsReport& r) {
    nlohmann::json j;
    const auto v = r.values();
    for (std::size_t k = 0; k < MetricsReport::kCount; ++k)
        j[std::string(MetricsReport::kKeys[k])] = v[k];
    return j;
}

struct TrainArgs {
    std::string config;
    std::string dataset;
    std::string out;
    std::vector<std::string> sets;
    std::optional<std::size_t> epochs;
    std::optional<std::uint64_t> seed;
};

void add_train_flags(CLI::App* cmd, TrainArgs& a) {
    cmd->add_option("--config", a.config, "key = value config file");
    cmd->add_option("--dataset", a.dataset, "dataset directory or manifest");
    cmd->add_option("--out", a.out, "output directory");
    cmd->add_option("--set", a.sets, "override, key=value (repeatable)");
    cmd->add_option("--epochs", a.epochs, "override epochs");
    cmd->add_option("--seed", a.seed, "override seed");
}

TrainConfig resolve_config(const TrainArgs& a) {
    TrainConfig cfg = a.config.empty() ? TrainConfig{} : TrainConfig::load(a.config);
    for (const std::string& s : a.sets) {
        const auto eq = s.find('=');
        need(eq != std::string::npos, "--set expects key=value, got '" + s + "'");
        cfg.set(s.substr(0, eq), s.substr(eq + 1));
    }
    if (a.epochs) cfg.epochs = *a.epochs;
    if (a.seed) cfg.seed = *a.seed;
    cfg.validate();
    return cfg;
}

void persist_run(const RunRecord& run, std::optional<TrainedModel>& model, const fs::path& dir) {
    write_run(run, dir);
    write_file(dir / "config.txt", run.config.to_text());
    if (model) model->save(dir / "model.json");
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Incomplete multi-view multi-label learning toolkit", "adrl"};
    app.require_subcommand(1, 1);

    // synth
    SyntheticSpec synth;
    std::string synth_out;
    auto* c_synth = app.add_subcommand("synth", "write a synthetic dataset");
    c_synth->add_option("--n", synth.n);
    c_synth->add_option("--v", synth.v);
    c_synth->add_option("--c", synth.c);
    c_synth->add_option("--shared-dim", synth.shared_dim);
    c_synth->add_option("--private-dim", synth.private_dim);
    c_synth->add_option("--noise", synth.noise);
    c_synth->add_option("--seed", synth.seed);
    c_synth->add_option("--out", synth_out, "output directory");

    // mask
    MissingnessSpec miss;
    std::string mask_in, mask_out;
    auto* c_mask = app.add_subcommand("mask", "apply feature/label missingness");
    c_mask->add_option("--dataset", mask_in);
    c_mask->add_option("--fmr", miss.fmr);
    c_mask->add_option("--lmr", miss.lmr);
    c_mask->add_option("--seed", miss.seed);
    c_mask->add_option("--out", mask_out);

    // split
    std::string split_in, split_out, ratios = "7:1:2";
    std::uint64_t split_seed = 0;
    auto* c_split = app.add_subcommand("split", "assign train/val/test");
    c_split->add_option("--dataset", split_in);
    c_split->add_option("--ratios", ratios);
    c_split->add_option("--seed", split_seed);
    c_split->add_option("--out", split_out);

    // train
    TrainArgs train_args;
    bool protocol = false;
    auto* c_train = app.add_subcommand("train", "train and write a run record");
    add_train_flags(c_train, train_args);
    c_train->add_flag("--protocol", protocol,
                      "repeat split/mask/train on a fully observed dataset");

    // eval
    std::string eval_model, eval_data, eval_out;
    auto* c_eval = app.add_subcommand("eval", "score a saved model on a dataset");
    c_eval->add_option("--model", eval_model);
    c_eval->add_option("--dataset", eval_data);
    c_eval->add_option("--out", eval_out, "metrics json (default: stdout only)");

    // ablate
    TrainArgs ablate_args;
    std::string variant_text = "all";
    auto* c_ablate = app.add_subcommand("ablate", "train ablated variants");
    add_train_flags(c_ablate, ablate_args);
    c_ablate->add_option("--variant", variant_text, "full, no_S1, no_S2, no_S3 or all");

    // gradcheck
    std::string scale = "tiny", gc_out;
    double step = 1e-5, tol = 1e-4;
    std::uint64_t gc_seed = 0;
    auto* c_gc = app.add_subcommand("gradcheck", "finite-difference check of the full model");
    c_gc->add_option("--scale", scale);
    c_gc->add_option("--step", step);
    c_gc->add_option("--tol", tol);
    c_gc->add_option("--seed", gc_seed);
    c_gc->add_option("--out", gc_out, "report json");

    // report
    std::string runs_dir, report_out;
    auto* c_report = app.add_subcommand("report", "tables and plots from run records");
    c_report->add_option("--runs", runs_dir);
    c_report->add_option("--out", report_out, "default: <runs>/report");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }

    try {
        if (c_synth->parsed()) {
            need(synth.n >= 2 && synth.v >= 1 && synth.c >= 1, "synth needs n >= 2, v >= 1, c >= 1");
            need(synth.noise >= 0.0, "noise must be >= 0");
            need(!synth_out.empty(), "--out is required");
            write_dataset(generate_synthetic(synth), synth_out);
            out << "wrote " << synth_out << "\n";
        } else if (c_mask->parsed()) {
            need(miss.fmr < 1.0, "fmr must be < 1");
            need(miss.fmr >= 0.0, "fmr must be >= 0");
            need(miss.lmr >= 0.0 && miss.lmr < 1.0, "lmr must be in [0, 1)");
            need(!mask_in.empty() && !mask_out.empty(), "--dataset and --out are required");
            write_dataset(apply_missingness(load_dataset(mask_in), miss), mask_out);
            out << "wrote " << mask_out << "\n";
        } else if (c_split->parsed()) {
            const auto r = parse_ratios(ratios);
            need(!split_in.empty() && !split_out.empty(), "--dataset and --out are required");
            write_dataset(split_dataset(load_dataset(split_in), r, split_seed), split_out);
            out << "wrote " << split_out << "\n";
        } else if (c_train->parsed()) {
            const TrainConfig cfg = resolve_config(train_args);
            need(!train_args.dataset.empty() && !train_args.out.empty(),
                 "--dataset and --out are required");
            const MultiViewDataset ds = load_dataset(train_args.dataset);
            const fs::path dir = train_args.out;
            if (protocol) {
                const RepeatResult rr = repeat_protocol(ds, cfg);
                for (std::size_t r = 0; r < rr.runs.size(); ++r) {
                    std::optional<TrainedModel> none;
                    persist_run(rr.runs[r], none, dir / ("rep" + std::to_string(r)));
                }
                write_file(dir / "table.txt", rr.table);
                out << rr.table;
            } else {
                std::optional<TrainedModel> model;
                const RunRecord run = train(ds, cfg, &model);
                persist_run(run, model, dir);
                out << "epochs " << run.epochs.size() << ", best " << run.best_epoch << "\n"
                    << format_table(run.test);
            }
        } else if (c_eval->parsed()) {
            need(!eval_model.empty() && !eval_data.empty(), "--model and --dataset are required");
            TrainedModel tm = TrainedModel::load(eval_model);
            const MetricsReport r = evaluate_model(tm, load_dataset(eval_data));
            if (!eval_out.empty()) write_file(eval_out, metrics_json(r).dump(2) + "\n");
            out << format_table(r);
        } else if (c_ablate->parsed()) {
            std::vector<Variant> variants;
            if (variant_text == "all") {
                variants = {Variant::full, Variant::no_s1, Variant::no_s2, Variant::no_s3};
            } else {
                variants = {parse_variant(variant_text)};
            }
            const TrainConfig cfg = resolve_config(ablate_args);
            need(!ablate_args.dataset.empty() && !ablate_args.out.empty(),
                 "--dataset and --out are required");
            const MultiViewDataset ds = load_dataset(ablate_args.dataset);
            std::vector<MetricsReport> reports;
            std::string table;
            for (Variant v : variants) {
                std::optional<TrainedModel> model;
                const RunRecord run = train(ds, cfg.with_variant(v), &model);
                persist_run(run, model, fs::path(ablate_args.out) / std::string(variant_name(v)));
                reports.push_back(run.test);
                char line[64];
                std::snprintf(line, sizeof line, "%-6s AP %.4f\n",
                              std::string(variant_name(v)).c_str(), run.test.ap);
                table += line;
            }
            if (reports.size() >= 2) {
                const auto ranks = average_rank(reports);
                table += "average rank:";
                for (std::size_t k = 0; k < ranks.size(); ++k) {
                    char cell[48];
                    std::snprintf(cell, sizeof cell, " %s=%.2f",
                                  std::string(variant_name(variants[k])).c_str(), ranks[k]);
                    table += cell;
                }
                table += "\n";
            }
            write_file(fs::path(ablate_args.out) / "ablation.txt", table);
            out << table;
        } else if (c_gc->parsed()) {
            need(scale == "tiny", "unknown --scale '" + scale + "' (only tiny is defined)");
            need(step > 0.0, "step must be > 0");
            GradCheckSetup setup;
            setup.seed = gc_seed;
            const GradCheckReport rep = model_gradcheck(setup, step, tol);
            nlohmann::json j;
            j["step"] = step;
            j["tolerance"] = tol;
            j["max_rel_error"] = rep.max_rel_error;
            j["passed"] = rep.passed;
            for (const ParameterCheck& p : rep.parameters) {
                char line[160];
                std::snprintf(line, sizeof line, "%-28s n=%-4zu max_rel=%.3e%s\n", p.name.c_str(),
                              p.entries, p.worst.rel_error, p.failures ? "  FAIL" : "");
                out << line;
                j["parameters"].push_back({{"name", p.name},
                                           {"entries", p.entries},
                                           {"max_rel_error", p.worst.rel_error},
                                           {"failures", p.failures}});
            }
            char line[96];
            std::snprintf(line, sizeof line, "max relative error %.3e (tolerance %.1e): %s\n",
                          rep.max_rel_error, tol, rep.passed ? "pass" : "FAIL");
            out << line;
            if (!gc_out.empty()) write_file(gc_out, j.dump(2) + "\n");
            if (!rep.passed) {
                err << "error: gradient check failed\n";
                return 1;
            }
        } else if (c_report->parsed()) {
            need(!runs_dir.empty(), "--runs is required");
            const fs::path dest = report_out.empty() ? fs::path(runs_dir) / "report" : fs::path(report_out);
            const ReportFiles files = write_report(find_runs(runs_dir), dest);
            out << files.table;
            for (const auto& f : files.files) out << "wrote " << f.string() << "\n";
        }
    } catch (const DivergenceError& e) {
        err << "error: divergence in " << e.where() << ": " << e.what() << "\n";
        return 2;
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

}  // namespace adrl::cli
