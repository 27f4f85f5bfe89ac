#pragma once

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "synthbench/matrix.hpp"
#include "synthbench/rng.hpp"
#include "synthbench/scores.hpp"

namespace synthbench {

struct Provenance {
    std::string source;
    std::vector<std::string> transforms;
};

// Numeric instance matrix with per-row regular/outlier labels. After
// preprocess() all values lie in [0,1], rows are unique and every attribute
// has at least 10 distinct values.
struct LabeledDataset {
    Matrix instances;
    std::vector<Label> labels;
    std::vector<std::string> attribute_names;
    Provenance provenance;
    std::vector<std::string> warnings;

    std::size_t n() const { return instances.rows(); }
    std::size_t dim() const { return instances.cols(); }

    std::size_t count(Label l) const {
        std::size_t c = 0;
        for (Label x : labels) c += (x == l);
        return c;
    }

    std::vector<std::size_t> indices_of(Label l) const {
        std::vector<std::size_t> idx;
        for (std::size_t i = 0; i < labels.size(); ++i) {
            if (labels[i] == l) idx.push_back(i);
        }
        return idx;
    }

    LabeledDataset select(std::span<const std::size_t> idx) const {
        LabeledDataset out;
        out.instances = instances.select_rows(idx);
        out.labels.reserve(idx.size());
        for (std::size_t i : idx) out.labels.push_back(labels[i]);
        out.attribute_names = attribute_names;
        out.provenance = provenance;
        return out;
    }
};

struct SplitPair {
    LabeledDataset train;
    LabeledDataset test;
};

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            fields.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur.push_back(c);
        }
    }
    fields.push_back(cur);
    return fields;
}

inline bool parse_double(const std::string& s, double& out) {
    const char* begin = s.c_str();
    char* end = nullptr;
    errno = 0;
    out = std::strtod(begin, &end);
    if (end == begin) return false;
    while (*end == ' ' || *end == '\t') ++end;
    return *end == '\0';
}

// Exact bitwise row identity, used for duplicate detection.
struct RowBitsLess {
    bool operator()(const std::vector<double>& a, const std::vector<double>& b) const {
        if (a.size() != b.size()) return a.size() < b.size();
        const int c = std::memcmp(a.data(), b.data(), a.size() * sizeof(double));
        return c < 0;
    }
};

}  // namespace detail

// Reads a comma-separated file with a header row. Rows whose label equals
// outlier_value become outliers. Columns where no cell parses as a number are
// dropped with a warning; a column with a mix of numeric and non-numeric
// cells is an error naming the offending row.
inline LabeledDataset load_csv(const std::string& path, const std::string& label_column,
                               const std::string& outlier_value) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("load_csv: cannot open file: " + path);

    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("load_csv: empty file: " + path);
    const std::vector<std::string> header = detail::split_csv_line(line);

    std::size_t label_idx = header.size();
    for (std::size_t j = 0; j < header.size(); ++j) {
        if (header[j] == label_column) label_idx = j;
    }
    if (label_idx == header.size()) {
        throw std::runtime_error("load_csv: label column not found: " + label_column);
    }

    std::vector<std::vector<std::string>> raw_rows;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::vector<std::string> fields = detail::split_csv_line(line);
        if (fields.size() != header.size()) {
            throw std::runtime_error("load_csv: row " + std::to_string(line_no) +
                                     " has " + std::to_string(fields.size()) +
                                     " fields, expected " + std::to_string(header.size()));
        }
        raw_rows.push_back(std::move(fields));
    }
    if (raw_rows.empty()) throw std::runtime_error("load_csv: no data rows: " + path);

    LabeledDataset ds;
    ds.provenance.source = path;

    // Classify each non-label column: numeric if every cell parses, text if
    // none does, otherwise a hard error.
    std::vector<std::size_t> numeric_cols;
    for (std::size_t j = 0; j < header.size(); ++j) {
        if (j == label_idx) continue;
        std::size_t parsed = 0;
        std::size_t first_bad = 0;
        for (std::size_t i = 0; i < raw_rows.size(); ++i) {
            double v;
            if (detail::parse_double(raw_rows[i][j], v)) {
                ++parsed;
            } else if (parsed > 0 && first_bad == 0) {
                first_bad = i + 2;  // 1-based file line, after header
            } else if (first_bad == 0) {
                first_bad = i + 2;
            }
        }
        if (parsed == raw_rows.size()) {
            numeric_cols.push_back(j);
        } else if (parsed == 0) {
            ds.warnings.push_back("dropped non-numeric column '" + header[j] + "'");
        } else {
            throw std::runtime_error("load_csv: unparsable numeric cell in column '" +
                                     header[j] + "' at row " + std::to_string(first_bad));
        }
    }
    if (numeric_cols.empty()) throw std::runtime_error("load_csv: zero numeric columns");

    ds.instances = Matrix(raw_rows.size(), numeric_cols.size());
    ds.labels.resize(raw_rows.size());
    for (std::size_t j : numeric_cols) ds.attribute_names.push_back(header[j]);
    for (std::size_t i = 0; i < raw_rows.size(); ++i) {
        for (std::size_t jj = 0; jj < numeric_cols.size(); ++jj) {
            double v;
            detail::parse_double(raw_rows[i][numeric_cols[jj]], v);
            if (!std::isfinite(v)) {
                throw std::runtime_error("load_csv: non-finite value in column '" +
                                         header[numeric_cols[jj]] + "' at row " +
                                         std::to_string(i + 2));
            }
            ds.instances(i, jj) = v;
        }
        ds.labels[i] = (raw_rows[i][label_idx] == outlier_value) ? Label::outlier : Label::regular;
    }
    ds.provenance.transforms.push_back("load_csv(label=" + label_column +
                                       ",outlier=" + outlier_value + ")");
    return ds;
}

// Drops attributes with fewer than 10 distinct values, removes duplicate rows
// (first occurrence kept, compared on the retained attributes) and min-max
// normalizes each remaining attribute to [0,1]. Attribute filtering runs
// before deduplication so a second application is a no-op.
inline LabeledDataset preprocess(const LabeledDataset& data) {
    if (data.dim() == 0) throw std::invalid_argument("preprocess: dataset has no attributes");

    LabeledDataset out;
    out.provenance = data.provenance;
    out.warnings = data.warnings;

    std::vector<std::size_t> keep;
    for (std::size_t j = 0; j < data.dim(); ++j) {
        std::vector<double> col = data.instances.column(j);
        std::sort(col.begin(), col.end());
        std::size_t distinct = col.empty() ? 0 : 1;
        for (std::size_t i = 1; i < col.size(); ++i) distinct += (col[i] != col[i - 1]);
        if (distinct >= 10) {
            keep.push_back(j);
        } else if (distinct == 1) {
            out.warnings.push_back("dropped constant attribute '" + data.attribute_names[j] + "'");
        } else {
            out.warnings.push_back("dropped attribute '" + data.attribute_names[j] +
                                   "' with " + std::to_string(distinct) + " distinct values");
        }
    }
    if (keep.empty()) throw std::runtime_error("preprocess: no usable attributes");

    const Matrix projected = data.instances.select_columns(keep);
    for (std::size_t j : keep) out.attribute_names.push_back(data.attribute_names[j]);

    std::set<std::vector<double>, detail::RowBitsLess> seen;
    std::vector<std::size_t> rows;
    for (std::size_t i = 0; i < projected.rows(); ++i) {
        std::vector<double> row(projected.row(i).begin(), projected.row(i).end());
        if (seen.insert(std::move(row)).second) rows.push_back(i);
    }

    out.instances = projected.select_rows(rows);
    for (std::size_t i : rows) out.labels.push_back(data.labels[i]);

    for (std::size_t j = 0; j < out.dim(); ++j) {
        double lo = out.instances(0, j), hi = lo;
        for (std::size_t i = 1; i < out.n(); ++i) {
            lo = std::min(lo, out.instances(i, j));
            hi = std::max(hi, out.instances(i, j));
        }
        const double range = hi - lo;
        for (std::size_t i = 0; i < out.n(); ++i) {
            out.instances(i, j) = (out.instances(i, j) - lo) / range;
        }
    }
    out.provenance.transforms.push_back("preprocess(kept=" + std::to_string(keep.size()) +
                                        ",rows=" + std::to_string(rows.size()) + ")");
    return out;
}

// Adds independent Gaussian noise (sd 1e-3 on the normalized scale) to every
// value. Used only to condition model fitting; never fed to evaluation.
inline LabeledDataset jitter(const LabeledDataset& data, std::uint64_t seed,
                             double noise_sd = 1e-3) {
    LabeledDataset out = data;
    Rng rng(seed);
    for (std::size_t i = 0; i < out.n(); ++i) {
        for (std::size_t j = 0; j < out.dim(); ++j) {
            out.instances(i, j) += noise_sd * rng.normal();
        }
    }
    out.provenance.transforms.push_back("jitter(sd=" + std::to_string(noise_sd) +
                                        ",seed=" + std::to_string(seed) + ")");
    return out;
}

// Per-class sampling without replacement. Train size per class is
// floor(fraction * class_size), forced to leave at least one row on each side.
inline SplitPair stratified_split(const LabeledDataset& data, double train_fraction,
                                  std::uint64_t seed) {
    if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
        throw std::invalid_argument("stratified_split: fraction must be in (0,1)");
    }
    Rng rng(seed);
    std::vector<std::size_t> train_idx, test_idx;
    for (Label cls : {Label::regular, Label::outlier}) {
        std::vector<std::size_t> idx = data.indices_of(cls);
        if (idx.size() < 2) {
            throw std::invalid_argument("stratified_split: a class has fewer than 2 members");
        }
        for (std::size_t i = idx.size() - 1; i > 0; --i) {
            std::swap(idx[i], idx[rng.uniform_index(i + 1)]);
        }
        std::size_t k = static_cast<std::size_t>(
            std::floor(train_fraction * static_cast<double>(idx.size())));
        k = std::clamp<std::size_t>(k, 1, idx.size() - 1);
        train_idx.insert(train_idx.end(), idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(k));
        test_idx.insert(test_idx.end(), idx.begin() + static_cast<std::ptrdiff_t>(k), idx.end());
    }
    std::sort(train_idx.begin(), train_idx.end());
    std::sort(test_idx.begin(), test_idx.end());
    SplitPair pair{data.select(train_idx), data.select(test_idx)};
    pair.train.provenance.transforms.push_back("split(train)");
    pair.test.provenance.transforms.push_back("split(test)");
    return pair;
}

// Caps the outlier share at xi by sampling outliers without replacement. The
// retained count k solves k = round(xi * (n_reg + k)) by fixed-point
// iteration. Regular rows are never touched.
inline LabeledDataset downsample_outliers(const LabeledDataset& data, double xi,
                                          std::uint64_t seed) {
    if (!(xi > 0.0 && xi <= 1.0)) {
        throw std::invalid_argument("downsample_outliers: xi must be in (0,1]");
    }
    const std::vector<std::size_t> out_idx = data.indices_of(Label::outlier);
    if (out_idx.empty()) {
        LabeledDataset copy = data;
        copy.warnings.push_back("downsample_outliers: no outliers present");
        return copy;
    }
    const std::size_t n_reg = data.n() - out_idx.size();
    const double frac = static_cast<double>(out_idx.size()) / static_cast<double>(data.n());
    if (frac <= xi) return data;

    double k = std::round(xi * static_cast<double>(n_reg) / (1.0 - xi));
    for (int it = 0; it < 100; ++it) {
        const double next = std::round(xi * (static_cast<double>(n_reg) + k));
        if (next == k) break;
        k = next;
    }
    const std::size_t keep_out = std::min<std::size_t>(static_cast<std::size_t>(k), out_idx.size());

    Rng rng(seed);
    std::vector<std::size_t> shuffled = out_idx;
    for (std::size_t i = shuffled.size() - 1; i > 0; --i) {
        std::swap(shuffled[i], shuffled[rng.uniform_index(i + 1)]);
    }
    std::vector<std::size_t> keep(shuffled.begin(),
                                  shuffled.begin() + static_cast<std::ptrdiff_t>(keep_out));
    for (std::size_t i = 0; i < data.n(); ++i) {
        if (data.labels[i] == Label::regular) keep.push_back(i);
    }
    std::sort(keep.begin(), keep.end());
    LabeledDataset out = data.select(keep);
    out.provenance.transforms.push_back("downsample_outliers(xi=" + std::to_string(xi) + ")");
    return out;
}

}  // namespace synthbench
