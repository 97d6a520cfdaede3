#include "adrl/dataset_io.hpp"

#include <array>
#include <bit>
#include <charconv>
#include <cstdint>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "adrl/error.hpp"

namespace adrl {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr std::array<char, 4> kMagic{'M', 'V', 'M', 'L'};

void put_u32(std::ostream& os, std::uint32_t v) {
    std::array<char, 4> b{};
    for (int k = 0; k < 4; ++k) b[k] = static_cast<char>((v >> (8 * k)) & 0xff);
    os.write(b.data(), 4);
}

std::uint32_t get_u32(const unsigned char* p) {
    std::uint32_t v = 0;
    for (int k = 0; k < 4; ++k) v |= static_cast<std::uint32_t>(p[k]) << (8 * k);
    return v;
}

}  // namespace

void write_matrix(const fs::path& path, const Matrix& m) {
    if (m.rows() > UINT32_MAX || m.cols() > UINT32_MAX) {
        throw ConfigError("write_matrix: matrix too large for the MVML header");
    }
    std::ofstream os(path, std::ios::binary);
    if (!os) throw ConfigError("cannot open " + path.string() + " for writing");
    os.write(kMagic.data(), 4);
    put_u32(os, static_cast<std::uint32_t>(m.rows()));
    put_u32(os, static_cast<std::uint32_t>(m.cols()));
    put_u32(os, 0);
    std::vector<char> buf(m.size() * 8);
    for (std::size_t k = 0; k < m.size(); ++k) {
        const auto bits = std::bit_cast<std::uint64_t>(m[k]);
        for (int b = 0; b < 8; ++b) buf[k * 8 + b] = static_cast<char>((bits >> (8 * b)) & 0xff);
    }
    os.write(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (!os) throw ConfigError("write failed: " + path.string());
}

Matrix read_matrix(const fs::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw ConfigError("cannot open matrix file " + path.string());
    std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(is)),
                                     std::istreambuf_iterator<char>());
    if (bytes.size() < 16 || !std::equal(kMagic.begin(), kMagic.end(), bytes.begin())) {
        throw ConfigError(path.string() + ": not an MVML matrix file");
    }
    const std::size_t rows = get_u32(bytes.data() + 4);
    const std::size_t cols = get_u32(bytes.data() + 8);
    if (bytes.size() != 16 + rows * cols * 8) {
        throw ConfigError(path.string() + ": payload size does not match header (" +
                          std::to_string(rows) + "x" + std::to_string(cols) + ")");
    }
    std::vector<double> data(rows * cols);
    const unsigned char* p = bytes.data() + 16;
    for (std::size_t k = 0; k < data.size(); ++k) {
        std::uint64_t bits = 0;
        for (int b = 0; b < 8; ++b) bits |= static_cast<std::uint64_t>(p[k * 8 + b]) << (8 * b);
        data[k] = std::bit_cast<double>(bits);
    }
    return Matrix(rows, cols, std::move(data));
}

void write_dataset(const MultiViewDataset& ds, const fs::path& dir) {
    ds.validate();
    fs::create_directories(dir);
    json manifest;
    manifest["n"] = ds.num_samples();
    manifest["v"] = ds.num_views();
    manifest["c"] = ds.num_labels();
    manifest["d_v"] = ds.view_dims();
    json files = json::array();
    for (std::size_t v = 0; v < ds.num_views(); ++v) {
        const std::string name = "view" + std::to_string(v) + ".mvml";
        write_matrix(dir / name, ds.views[v]);
        files.push_back(name);
    }
    manifest["views"] = files;
    write_matrix(dir / "labels.mvml", ds.labels);
    write_matrix(dir / "view_mask.mvml", ds.view_mask);
    write_matrix(dir / "label_mask.mvml", ds.label_mask);
    manifest["labels"] = "labels.mvml";
    manifest["view_mask"] = "view_mask.mvml";
    manifest["label_mask"] = "label_mask.mvml";
    Matrix split(ds.num_samples(), 1);
    for (std::size_t i = 0; i < ds.num_samples(); ++i) split[i] = static_cast<double>(ds.split[i]);
    write_matrix(dir / "split.mvml", split);
    manifest["split"] = "split.mvml";

    std::ofstream os(dir / "manifest.json");
    if (!os) throw ConfigError("cannot write manifest in " + dir.string());
    os << manifest.dump(2) << '\n';
}

MultiViewDataset load_dataset(const fs::path& manifest_or_dir) {
    const fs::path manifest_path =
        fs::is_directory(manifest_or_dir) ? manifest_or_dir / "manifest.json" : manifest_or_dir;
    std::ifstream is(manifest_path);
    if (!is) throw ConfigError("cannot open manifest " + manifest_path.string());
    json m;
    try {
        is >> m;
    } catch (const json::exception& e) {
        throw ConfigError("manifest " + manifest_path.string() + " does not parse: " + e.what());
    }
    const fs::path base = manifest_path.parent_path();
    try {
        MultiViewDataset ds;
        const auto n = m.at("n").get<std::size_t>();
        const auto nv = m.at("v").get<std::size_t>();
        const auto nc = m.at("c").get<std::size_t>();
        const auto dims = m.at("d_v").get<std::vector<std::size_t>>();
        const auto files = m.at("views").get<std::vector<std::string>>();
        if (dims.size() != nv || files.size() != nv) {
            throw ConfigError("manifest: v=" + std::to_string(nv) +
                              " does not match d_v / views lists");
        }
        for (std::size_t v = 0; v < nv; ++v) {
            Matrix x = read_matrix(base / files[v]);
            if (x.cols() == 0 || dims[v] == 0) {
                throw ConfigError("view " + std::to_string(v) + " is empty");
            }
            if (x.rows() != n || x.cols() != dims[v]) {
                throw ConfigError("view " + std::to_string(v) + " has shape " + x.shape_string() +
                                  ", manifest says (" + std::to_string(n) + "x" +
                                  std::to_string(dims[v]) + ")");
            }
            ds.views.push_back(std::move(x));
        }
        ds.labels = read_matrix(base / m.at("labels").get<std::string>());
        if (ds.labels.rows() != n || ds.labels.cols() != nc) {
            throw ConfigError("labels have shape " + ds.labels.shape_string() +
                              ", manifest says (" + std::to_string(n) + "x" +
                              std::to_string(nc) + ")");
        }
        ds.view_mask = m.contains("view_mask")
                           ? read_matrix(base / m["view_mask"].get<std::string>())
                           : Matrix::ones(n, nv);
        ds.label_mask = m.contains("label_mask")
                            ? read_matrix(base / m["label_mask"].get<std::string>())
                            : Matrix::ones(n, nc);
        ds.split.assign(n, Split::train);
        if (m.contains("split")) {
            const Matrix s = read_matrix(base / m["split"].get<std::string>());
            if (s.rows() != n || s.cols() != 1) throw ConfigError("split file must be N x 1");
            for (std::size_t i = 0; i < n; ++i) {
                if (s[i] != 0.0 && s[i] != 1.0 && s[i] != 2.0) {
                    throw ConfigError("split codes must be 0 (train), 1 (val) or 2 (test)");
                }
                ds.split[i] = static_cast<Split>(static_cast<int>(s[i]));
            }
        }
        ds.validate();
        return ds;
    } catch (const json::exception& e) {
        throw ConfigError("manifest " + manifest_path.string() + ": " + e.what());
    }
}

Matrix import_csv(const fs::path& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot open " + path.string());
    std::vector<double> data;
    std::size_t rows = 0, cols = 0;
    std::string line;
    bool first = true;
    std::size_t line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos) continue;
        std::vector<double> row;
        bool ok = true;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            const auto b = cell.find_first_not_of(" \t");
            const auto e = cell.find_last_not_of(" \t");
            if (b == std::string::npos) {
                ok = false;
                break;
            }
            const std::string tok = cell.substr(b, e - b + 1);
            double v = 0.0;
            const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
            if (res.ec != std::errc() || res.ptr != tok.data() + tok.size()) {
                ok = false;
                break;
            }
            row.push_back(v);
        }
        if (!ok) {
            if (first) {
                first = false;
                continue;
            }
            throw ConfigError(path.string() + ":" + std::to_string(line_no) + ": non-numeric cell");
        }
        first = false;
        if (rows == 0) cols = row.size();
        if (row.size() != cols) {
            throw ConfigError(path.string() + ":" + std::to_string(line_no) + ": expected " +
                              std::to_string(cols) + " columns");
        }
        data.insert(data.end(), row.begin(), row.end());
        ++rows;
    }
    return Matrix(rows, cols, std::move(data));
}

}  // namespace adrl
