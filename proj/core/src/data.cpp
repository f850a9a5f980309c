// Copyright 2026 The eqvfl Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "eqvfl/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iterator>
#include <map>
#include <sstream>

#include "eqvfl/errors.hpp"

namespace eqvfl::data {

namespace {

constexpr std::uint32_t kImageMagic = 0x00000803;
constexpr std::uint32_t kLabelMagic = 0x00000801;

std::vector<unsigned char> read_file(const std::filesystem::path &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::uint32_t read_be32(const std::vector<unsigned char> &buf, std::size_t offset, const std::string &what) {
    if (offset + 4 > buf.size()) throw FormatError(what + ": truncated header", buf.size());
    return (std::uint32_t{buf[offset]} << 24) | (std::uint32_t{buf[offset + 1]} << 16) |
           (std::uint32_t{buf[offset + 2]} << 8) | std::uint32_t{buf[offset + 3]};
}

void write_be32(std::ostream &out, std::uint32_t v) {
    const char bytes[4] = {static_cast<char>(v >> 24), static_cast<char>(v >> 16), static_cast<char>(v >> 8),
                           static_cast<char>(v)};
    out.write(bytes, 4);
}

std::string trim(std::string s) {
    const auto not_space = [](unsigned char c) { return !std::isspace(c); };
    s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
    s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
    if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = s.substr(1, s.size() - 2);
    return s;
}

std::vector<std::string> split_csv_line(const std::string &line) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, ',')) cells.push_back(trim(cell));
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
}

}  // namespace

Matrix Matrix::select_rows(std::span<const std::size_t> indices) const {
    Matrix out(indices.size(), cols);
    for (std::size_t i = 0; i < indices.size(); ++i) {
        const auto src = row(indices[i]);
        std::copy(src.begin(), src.end(), out.row(i).begin());
    }
    return out;
}

ImageSet load_idx_images(const std::filesystem::path &image_path, const std::filesystem::path &label_path) {
    const auto img = read_file(image_path);
    const auto lbl = read_file(label_path);

    if (read_be32(img, 0, image_path.string()) != kImageMagic) {
        throw FormatError(image_path.string() + ": bad IDX image magic", 0);
    }
    const std::size_t count = read_be32(img, 4, image_path.string());
    const std::size_t rows = read_be32(img, 8, image_path.string());
    const std::size_t cols = read_be32(img, 12, image_path.string());
    const std::size_t need = 16 + count * rows * cols;
    if (img.size() < need) {
        throw FormatError(image_path.string() + ": truncated payload, expected " + std::to_string(need) + " bytes",
                          img.size());
    }

    if (read_be32(lbl, 0, label_path.string()) != kLabelMagic) {
        throw FormatError(label_path.string() + ": bad IDX label magic", 0);
    }
    const std::size_t label_count = read_be32(lbl, 4, label_path.string());
    if (label_count != count) {
        throw FormatError(label_path.string() + ": label count " + std::to_string(label_count) +
                              " does not match image count " + std::to_string(count),
                          4);
    }
    if (lbl.size() < 8 + count) {
        throw FormatError(label_path.string() + ": truncated payload, expected " + std::to_string(8 + count) +
                              " bytes",
                          lbl.size());
    }

    ImageSet set;
    set.rows = rows;
    set.cols = cols;
    set.pixels = Matrix(count, rows * cols);
    for (std::size_t i = 0; i < count * rows * cols; ++i) set.pixels.values[i] = img[16 + i] / 255.0;
    set.labels.resize(count);
    for (std::size_t i = 0; i < count; ++i) set.labels[i] = lbl[8 + i];
    return set;
}

void write_idx_images(const std::filesystem::path &image_path, const std::filesystem::path &label_path,
                      const ImageSet &images) {
    std::ofstream img(image_path, std::ios::binary);
    std::ofstream lbl(label_path, std::ios::binary);
    if (!img || !lbl) throw Error("cannot write IDX files");
    write_be32(img, kImageMagic);
    write_be32(img, static_cast<std::uint32_t>(images.size()));
    write_be32(img, static_cast<std::uint32_t>(images.rows));
    write_be32(img, static_cast<std::uint32_t>(images.cols));
    for (double v : images.pixels.values) {
        img.put(static_cast<char>(static_cast<unsigned char>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0))));
    }
    write_be32(lbl, kLabelMagic);
    write_be32(lbl, static_cast<std::uint32_t>(images.size()));
    for (int l : images.labels) lbl.put(static_cast<char>(l));
}

ImageSet filter_classes(const ImageSet &images, std::span<const int> classes, std::size_t max_samples) {
    std::vector<std::size_t> keep;
    std::vector<int> labels;
    for (std::size_t i = 0; i < images.size(); ++i) {
        const auto it = std::find(classes.begin(), classes.end(), images.labels[i]);
        if (it == classes.end()) continue;
        keep.push_back(i);
        labels.push_back(static_cast<int>(it - classes.begin()));
        if (max_samples && keep.size() == max_samples) break;
    }
    ImageSet out;
    out.rows = images.rows;
    out.cols = images.cols;
    out.pixels = images.pixels.select_rows(keep);
    out.labels = std::move(labels);
    return out;
}

std::vector<Matrix> quadrant_partition(const ImageSet &images) {
    if (images.rows % 2 || images.cols % 2 || images.pixels.cols != images.rows * images.cols) {
        throw PreconditionError("quadrant partition needs even image dimensions");
    }
    const std::size_t hr = images.rows / 2, hc = images.cols / 2;
    std::vector<Matrix> blocks(4, Matrix(images.size(), hr * hc));
    for (std::size_t i = 0; i < images.size(); ++i) {
        const auto img = images.pixels.row(i);
        for (int b = 0; b < 4; ++b) {
            const std::size_t r0 = (b / 2) * hr, c0 = (b % 2) * hc;
            auto dst = blocks[b].row(i);
            for (std::size_t r = 0; r < hr; ++r) {
                for (std::size_t c = 0; c < hc; ++c) dst[r * hc + c] = img[(r0 + r) * images.cols + c0 + c];
            }
        }
    }
    return blocks;
}

Matrix reassemble_quadrants(std::span<const Matrix> blocks, std::size_t rows, std::size_t cols) {
    if (blocks.size() != 4) throw PreconditionError("expected four quadrant blocks");
    const std::size_t hr = rows / 2, hc = cols / 2;
    Matrix out(blocks[0].rows, rows * cols);
    for (std::size_t i = 0; i < out.rows; ++i) {
        for (int b = 0; b < 4; ++b) {
            const std::size_t r0 = (b / 2) * hr, c0 = (b % 2) * hc;
            const auto src = blocks[b].row(i);
            for (std::size_t r = 0; r < hr; ++r) {
                for (std::size_t c = 0; c < hc; ++c) out(i, (r0 + r) * cols + c0 + c) = src[r * hc + c];
            }
        }
    }
    return out;
}

TabularData load_tabular_csv(const std::filesystem::path &path, std::span<const std::string> feature_columns,
                             const std::string &label_column, std::span<const std::string> label_values) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + path.string());
    std::string line;
    if (!std::getline(in, line)) throw ParseError("missing header row", 1, 0);
    const auto header = split_csv_line(line);

    auto column_of = [&](const std::string &name) -> std::size_t {
        const auto it = std::find(header.begin(), header.end(), name);
        if (it == header.end()) throw ParseError("no column named '" + name + "'", 1, 0);
        return static_cast<std::size_t>(it - header.begin());
    };
    const std::size_t label_col = column_of(label_column);
    std::vector<std::size_t> cols;
    TabularData out;
    if (feature_columns.empty()) {
        for (std::size_t c = 0; c < header.size(); ++c) {
            if (c != label_col) {
                cols.push_back(c);
                out.feature_names.push_back(header[c]);
            }
        }
    } else {
        for (const auto &name : feature_columns) {
            cols.push_back(column_of(name));
            out.feature_names.push_back(name);
        }
    }

    std::vector<double> values;
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (trim(line).empty()) continue;
        const auto cells = split_csv_line(line);
        if (cells.size() != header.size()) {
            throw ParseError("expected " + std::to_string(header.size()) + " cells, found " +
                                 std::to_string(cells.size()),
                             row, 0);
        }
        for (std::size_t c : cols) {
            const auto &cell = cells[c];
            double v = 0.0;
            const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
            if (cell.empty() || ec != std::errc{} || ptr != cell.data() + cell.size()) {
                throw ParseError("non-numeric cell '" + cell + "'", row, c + 1);
            }
            values.push_back(v);
        }
        const auto it = std::find(label_values.begin(), label_values.end(), cells[label_col]);
        if (it == label_values.end()) {
            throw ParseError("unknown label value '" + cells[label_col] + "'", row, label_col + 1);
        }
        out.labels.push_back(static_cast<int>(it - label_values.begin()));
    }
    out.features.rows = out.labels.size();
    out.features.cols = cols.size();
    out.features.values = std::move(values);
    return out;
}

Standardizer Standardizer::fit(const Matrix &features, std::span<const std::size_t> rows) {
    if (rows.empty()) throw PreconditionError("cannot fit standardization on zero rows");
    Standardizer s;
    s.mean.assign(features.cols, 0.0);
    s.scale.assign(features.cols, 0.0);
    for (std::size_t r : rows) {
        for (std::size_t c = 0; c < features.cols; ++c) s.mean[c] += features(r, c);
    }
    for (auto &m : s.mean) m /= static_cast<double>(rows.size());
    for (std::size_t r : rows) {
        for (std::size_t c = 0; c < features.cols; ++c) {
            const double d = features(r, c) - s.mean[c];
            s.scale[c] += d * d;
        }
    }
    for (auto &v : s.scale) v = std::sqrt(std::max(v / static_cast<double>(rows.size()), 1e-12));
    return s;
}

void Standardizer::apply(Matrix &features) const {
    if (features.cols != mean.size()) throw PreconditionError("standardizer width mismatch");
    for (std::size_t r = 0; r < features.rows; ++r) {
        for (std::size_t c = 0; c < features.cols; ++c) features(r, c) = (features(r, c) - mean[c]) / scale[c];
    }
}

std::vector<Matrix> vertical_split(const Matrix &features, std::span<const int> widths) {
    std::size_t total = 0;
    for (int w : widths) {
        if (w < 1) throw PreconditionError("party widths must be positive");
        total += static_cast<std::size_t>(w);
    }
    if (total != features.cols) {
        throw PreconditionError("party widths sum to " + std::to_string(total) + " but there are " +
                                std::to_string(features.cols) + " features");
    }
    std::vector<Matrix> blocks;
    std::size_t start = 0;
    for (int w : widths) {
        Matrix b(features.rows, w);
        for (std::size_t r = 0; r < features.rows; ++r) {
            const auto src = features.row(r).subspan(start, w);
            std::copy(src.begin(), src.end(), b.row(r).begin());
        }
        blocks.push_back(std::move(b));
        start += w;
    }
    return blocks;
}

std::vector<std::size_t> balanced_subsample(std::span<const int> labels, RandomStream &rng) {
    std::vector<std::size_t> by_class[2];
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] != 0 && labels[i] != 1) throw PreconditionError("balanced_subsample needs binary labels");
        by_class[labels[i]].push_back(i);
    }
    if (by_class[0].empty() || by_class[1].empty()) throw PreconditionError("a class is empty");
    const int minority = by_class[0].size() <= by_class[1].size() ? 0 : 1;
    auto &major = by_class[1 - minority];
    // Partial Fisher-Yates: the first k entries become a uniform sample.
    const std::size_t k = by_class[minority].size();
    for (std::size_t i = 0; i < k; ++i) std::swap(major[i], major[i + rng.below(major.size() - i)]);
    std::vector<std::size_t> out = by_class[minority];
    out.insert(out.end(), major.begin(), major.begin() + static_cast<std::ptrdiff_t>(k));
    std::sort(out.begin(), out.end());
    rng.shuffle(out);
    return out;
}

std::vector<double> VerticalDataset::one_hot(std::size_t sample) const {
    std::vector<double> v(num_classes, 0.0);
    v.at(labels.at(sample)) = 1.0;
    return v;
}

VerticalDataset VerticalDataset::subset(std::span<const std::size_t> indices, SplitTag tag) const {
    VerticalDataset out;
    out.num_classes = num_classes;
    out.split = tag;
    for (const auto &b : party_blocks) out.party_blocks.push_back(b.select_rows(indices));
    for (std::size_t i : indices) out.labels.push_back(labels.at(i));
    return out;
}

void VerticalDataset::validate() const {
    if (party_blocks.empty()) throw PreconditionError("dataset has no parties");
    for (std::size_t k = 0; k < party_blocks.size(); ++k) {
        if (party_blocks[k].rows != labels.size()) {
            throw PreconditionError("party " + std::to_string(k) + " block has " +
                                    std::to_string(party_blocks[k].rows) + " rows, expected " +
                                    std::to_string(labels.size()));
        }
    }
    for (int l : labels) {
        if (l < 0 || l >= num_classes) throw PreconditionError("label out of range");
    }
}

BatchSchedule::BatchSchedule(std::size_t num_samples, std::size_t batch_size, std::uint64_t seed)
    : num_samples_(num_samples), batch_size_(batch_size), seed_(seed) {
    if (batch_size == 0) throw PreconditionError("batch size must be >= 1");
}

std::vector<std::vector<std::size_t>> BatchSchedule::epoch(std::uint64_t epoch) const {
    std::vector<std::size_t> order(num_samples_);
    for (std::size_t i = 0; i < num_samples_; ++i) order[i] = i;
    RandomStream rng(seed_, 0xBA7C4ULL, epoch);
    rng.shuffle(order);
    std::vector<std::vector<std::size_t>> batches;
    for (std::size_t start = 0; start < num_samples_; start += batch_size_) {
        const std::size_t end = std::min(num_samples_, start + batch_size_);
        batches.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(start),
                             order.begin() + static_cast<std::ptrdiff_t>(end));
    }
    return batches;
}

SplitIndices split_indices(std::size_t n, double test_fraction, std::uint64_t seed) {
    if (!(test_fraction > 0.0 && test_fraction < 1.0)) throw PreconditionError("test fraction must be in (0, 1)");
    const auto n_test = static_cast<std::size_t>(std::llround(static_cast<double>(n) * test_fraction));
    if (n_test == 0 || n_test >= n) throw PreconditionError("split leaves an empty train or test set");
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    RandomStream rng(seed, 0x5B117ULL);
    rng.shuffle(order);
    SplitIndices out;
    out.test.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_test));
    out.train.assign(order.begin() + static_cast<std::ptrdiff_t>(n_test), order.end());
    return out;
}

SplitBatches split_and_batch(const VerticalDataset &dataset, double test_fraction, std::size_t batch_size,
                             std::uint64_t seed) {
    dataset.validate();
    const auto idx = split_indices(dataset.num_samples(), test_fraction, seed);
    return {dataset.subset(idx.train, SplitTag::Train), dataset.subset(idx.test, SplitTag::Test),
            BatchSchedule(idx.train.size(), batch_size, seed)};
}

}  // namespace eqvfl::data
