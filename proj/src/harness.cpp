#include "adrl/harness.hpp"

#include <chrono>
#include <fstream>
#include <sstream>

#include "adrl/error.hpp"
#include "adrl/imputation.hpp"
#include "adrl/labelgraph.hpp"

namespace adrl {

namespace {

constexpr std::uint64_t kTrainStream = 0x7a11;
constexpr std::uint64_t kMaskSalt = 0x100;
constexpr std::uint64_t kNoiseSalt = 0x200;

std::vector<Matrix> rows_of(std::span<const Matrix> views, std::span<const std::size_t> idx) {
    std::vector<Matrix> out;
    for (const Matrix& x : views) out.push_back(x.select_rows(idx));
    return out;
}

nlohmann::json metrics_json(const MetricsReport& r) {
    nlohmann::json j;
    const auto v = r.values();
    for (std::size_t k = 0; k < MetricsReport::kCount; ++k) j[std::string(MetricsReport::kKeys[k])] = v[k];
    return j;
}

MetricsReport metrics_from_json(const nlohmann::json& j) {
    std::array<double, MetricsReport::kCount> v{};
    for (std::size_t k = 0; k < MetricsReport::kCount; ++k)
        v[k] = j.at(std::string(MetricsReport::kKeys[k])).get<double>();
    return MetricsReport::from_values(v);
}

nlohmann::json read_json(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot open " + path.string());
    try {
        return nlohmann::json::parse(is);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw ConfigError("cannot write " + path.string());
    os << text;
}

}  // namespace

nlohmann::json EpochRecord::to_json() const {
    return {{"epoch", epoch}, {"total", total}, {"mce", mce},         {"re", re},
            {"pmce", pmce},   {"gc", gc},       {"dis", dis},         {"val_ap", val_ap},
            {"jsd", jsd},     {"overlap", overlap}};
}

EpochRecord EpochRecord::from_json(const nlohmann::json& j) {
    EpochRecord e;
    e.epoch = j.at("epoch");
    e.total = j.at("total");
    e.mce = j.at("mce");
    e.re = j.at("re");
    e.pmce = j.at("pmce");
    e.gc = j.at("gc");
    e.dis = j.at("dis");
    e.val_ap = j.at("val_ap");
    e.jsd = j.at("jsd");
    e.overlap = j.at("overlap");
    return e;
}

nlohmann::json RunRecord::summary_json() const {
    return {{"config", config.to_json()},
            {"variant", std::string(variant_name(config.variant()))},
            {"epochs_run", epochs.size()},
            {"best_epoch", best_epoch},
            {"test", metrics_json(test)}};
}

nlohmann::json TrainedModel::to_json() {
    nlohmann::json j = model.to_json();
    j["cooccurrence"] = {{"rows", cooccurrence.rows()},
                         {"cols", cooccurrence.cols()},
                         {"data", cooccurrence.data()}};
    return j;
}

TrainedModel TrainedModel::from_json(const nlohmann::json& j) {
    try {
        const auto& q = j.at("cooccurrence");
        return TrainedModel{AdrlModel::from_json(j),
                            Matrix(q.at("rows").get<std::size_t>(), q.at("cols").get<std::size_t>(),
                                   q.at("data").get<std::vector<double>>())};
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("model json: ") + e.what());
    }
}

void TrainedModel::save(const std::filesystem::path& path) {
    write_text(path, to_json().dump() + "\n");
}

TrainedModel TrainedModel::load(const std::filesystem::path& path) {
    return from_json(read_json(path));
}

std::vector<Matrix> prepare_views(const MultiViewDataset& ds, const TrainConfig& cfg) {
    if (!cfg.use_s1) return mean_fill_views(ds);
    return complete_views(ds, {cfg.tau, cfg.percentile, cfg.k});
}

RunRecord train(const MultiViewDataset& ds, const TrainConfig& cfg,
                std::optional<TrainedModel>* out) {
    cfg.validate();
    ds.validate();
    const auto start = std::chrono::steady_clock::now();

    const auto train_rows = ds.rows_in(Split::train);
    const auto val_rows = ds.rows_in(Split::val);
    auto test_rows = ds.rows_in(Split::test);
    if (train_rows.size() < 2) throw ConfigError("training needs at least two train rows");
    if (test_rows.empty()) test_rows = train_rows;

    const std::vector<Matrix> views = prepare_views(ds, cfg);
    const Matrix q = cooccurrence(ds.labels, ds.label_mask, train_rows);
    const std::vector<Matrix> x_train = rows_of(views, train_rows);
    const std::vector<Matrix> x_val = rows_of(views, val_rows);
    const Matrix y_train = ds.labels.select_rows(train_rows);
    const Matrix g_train = ds.label_mask.select_rows(train_rows);
    const Matrix y_val = ds.labels.select_rows(val_rows);

    AdrlModel model(ds.view_dims(), ds.num_labels(), cfg);
    const auto params = model.parameters();
    const RngStream base(cfg.seed, kTrainStream);

    RunRecord run;
    run.config = cfg;
    double best_ap = -1.0;
    std::size_t since_best = 0;
    AdrlModel::Snapshot best;

    for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
        EpochRecord rec;
        rec.epoch = epoch;
        try {
            std::vector<Matrix> masked;
            for (std::size_t v = 0; v < x_train.size(); ++v) {
                RngStream mrng = base.fork(kMaskSalt + epoch).fork(v);
                const std::size_t len =
                    default_fragment_length(x_train[v].cols(), cfg.fragment_fraction);
                masked.push_back(fragment_mask(x_train[v], len, mrng).masked);
            }
            RngStream noise = base.fork(kNoiseSalt + epoch);
            ForwardOptions opts;
            opts.noise = &noise;
            Tape tape;
            const ForwardResult res =
                model.forward(tape, masked, q, {&y_train, &g_train}, opts);
            rec.total = res.total.scalar();
            rec.mce = res.mce;
            rec.re = res.re;
            rec.pmce = res.pmce;
            rec.gc = res.gc;
            rec.dis = res.dis;
            rec.jsd = res.jsd;
            rec.overlap = res.overlap;
            tape.backward(res.total);
            sgd_step(params, cfg.lr);
            model.fusion = res.fusion;
            if (!val_rows.empty()) rec.val_ap = evaluate(model.predict(x_val, q), y_val).ap;
        } catch (const DivergenceError& e) {
            throw DivergenceError(e.where(),
                                  "epoch " + std::to_string(epoch) + ": " + e.what());
        }
        run.epochs.push_back(rec);

        // Without a validation split the last epoch is kept.
        if (val_rows.empty() || rec.val_ap > best_ap) {
            best_ap = rec.val_ap;
            best = model.snapshot();
            run.best_epoch = epoch;
            since_best = 0;
        } else if (cfg.patience > 0 && ++since_best >= cfg.patience) {
            break;
        }
    }
    model.restore(best);

    const std::vector<Matrix> x_test = rows_of(views, test_rows);
    run.test = evaluate(model.predict(x_test, q), ds.labels.select_rows(test_rows));
    run.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (out != nullptr) out->emplace(TrainedModel{std::move(model), q});
    return run;
}

RunRecord ablate(const MultiViewDataset& ds, const TrainConfig& cfg, Variant variant) {
    return train(ds, cfg.with_variant(variant));
}

MetricsReport evaluate_model(TrainedModel& tm, const MultiViewDataset& ds) {
    ds.validate();
    if (ds.view_dims() != tm.model.view_dims() || ds.num_labels() != tm.model.num_labels()) {
        throw ConfigError("dataset shape does not match the model");
    }
    auto rows = ds.rows_in(Split::test);
    if (rows.empty()) {
        rows.resize(ds.num_samples());
        for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i;
    }
    const std::vector<Matrix> views = prepare_views(ds, tm.model.config());
    return evaluate(tm.model.predict(rows_of(views, rows), tm.cooccurrence),
                    ds.labels.select_rows(rows));
}

std::uint64_t repetition_seed(std::uint64_t seed, std::size_t r, bool derive_seeds) {
    return derive_seeds ? mix64(seed + r) : seed;
}

std::string protocol_table(const MetricsSummary& s) { return format_table(s); }

RepeatResult repeat_protocol(const MultiViewDataset& source, const TrainConfig& cfg,
                             bool derive_seeds) {
    cfg.validate();
    if (cfg.repetitions < 2) throw ConfigError("repetitions must be >= 2");
    RepeatResult out;
    std::vector<MetricsReport> reports;
    for (std::size_t r = 0; r < cfg.repetitions; ++r) {
        const std::uint64_t seed = repetition_seed(cfg.seed, r, derive_seeds);
        const MultiViewDataset split = split_dataset(source, cfg.ratios, seed);
        const MultiViewDataset masked = apply_missingness(split, {cfg.fmr, cfg.lmr, seed});
        TrainConfig rc = cfg;
        rc.seed = seed;
        out.runs.push_back(train(masked, rc));
        out.seeds.push_back(seed);
        reports.push_back(out.runs.back().test);
    }
    out.summary = summarize(reports);
    out.table = protocol_table(out.summary);
    return out;
}

void write_run(const RunRecord& run, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    std::string lines;
    for (const EpochRecord& e : run.epochs) lines += e.to_json().dump() + "\n";
    write_text(dir / "epochs.jsonl", lines);
    write_text(dir / "summary.json", run.summary_json().dump(2) + "\n");
    write_text(dir / "timing.json",
               nlohmann::json{{"wall_seconds", run.wall_seconds}}.dump() + "\n");
}

RunRecord read_run(const std::filesystem::path& dir) {
    const nlohmann::json summary = read_json(dir / "summary.json");
    RunRecord run;
    try {
        run.config = TrainConfig::from_json(summary.at("config"));
        run.best_epoch = summary.at("best_epoch");
        run.test = metrics_from_json(summary.at("test"));
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError((dir / "summary.json").string() + ": " + e.what());
    }
    std::ifstream is(dir / "epochs.jsonl");
    if (!is) throw ConfigError("cannot open " + (dir / "epochs.jsonl").string());
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        try {
            run.epochs.push_back(EpochRecord::from_json(nlohmann::json::parse(line)));
        } catch (const nlohmann::json::exception& e) {
            throw ConfigError((dir / "epochs.jsonl").string() + ": " + e.what());
        }
    }
    if (std::filesystem::exists(dir / "timing.json"))
        run.wall_seconds = read_json(dir / "timing.json").value("wall_seconds", 0.0);
    return run;
}

GradCheckReport model_gradcheck(const GradCheckSetup& s, double step, double tolerance) {
    if (s.n < 2 || s.views < 1 || s.labels < 1) throw ConfigError("gradcheck: toy problem too small");
    RngStream rng(s.seed, 0x9c);
    std::vector<Matrix> views;
    for (std::size_t v = 0; v < s.views; ++v) {
        Matrix x(s.n, 3 + v);
        for (double& e : x.data()) e = rng.uniform(-1.0, 1.0);
        views.push_back(std::move(x));
    }
    Matrix y(s.n, s.labels), g(s.n, s.labels, 1.0);
    for (double& e : y.data()) e = rng.uniform() < 0.5 ? 1.0 : 0.0;
    for (std::size_t c = 0; c < s.labels; ++c) y(c % s.n, c) = 1.0;
    for (std::size_t i = 0; i < s.n; i += 3) g(i, i % s.labels) = 0.0;

    std::vector<std::size_t> all(s.n);
    for (std::size_t i = 0; i < s.n; ++i) all[i] = i;
    const Matrix q = cooccurrence(y, g, all);

    TrainConfig cfg;
    cfg.d = s.d;
    cfg.hidden = s.hidden;
    cfg.heads = s.heads;
    cfg.seed = s.seed;
    cfg = cfg.with_variant(s.variant);
    std::vector<std::size_t> dims;
    for (const Matrix& x : views) dims.push_back(x.cols());
    AdrlModel model(dims, s.labels, cfg);

    FusionState frozen;
    {
        Tape tape;
        RngStream noise(s.seed, 0x9d);
        ForwardOptions opts;
        opts.noise = &noise;
        frozen = model.forward(tape, views, q, {&y, &g}, opts).fusion;
    }
    const LossFn loss = [&](Tape& tape) {
        RngStream noise(s.seed, 0x9d);
        ForwardOptions opts;
        opts.noise = &noise;
        opts.frozen = &frozen;
        return model.forward(tape, views, q, {&y, &g}, opts).total;
    };
    const auto params = model.parameters();
    return grad_check(loss, params, step, tolerance);
}

}  // namespace adrl
