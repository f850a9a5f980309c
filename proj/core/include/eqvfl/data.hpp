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

/**
 * @file
 * Dataset ingestion and vertical partitioning.
 *
 * IDX files follow the published big-endian layout (magic 0x00000803 for
 * images, 0x00000801 for labels). CSV files are comma-delimited with a header
 * row. All shuffles are keyed by a seed so every split and batch order is
 * reproducible.
 */
#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "eqvfl/random.hpp"

namespace eqvfl::data {

/// Row-major matrix of doubles.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> values;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), values(r * c, 0.0) {}

    std::span<const double> row(std::size_t i) const { return {values.data() + i * cols, cols}; }
    std::span<double> row(std::size_t i) { return {values.data() + i * cols, cols}; }
    double &operator()(std::size_t r, std::size_t c) { return values[r * cols + c]; }
    double operator()(std::size_t r, std::size_t c) const { return values[r * cols + c]; }

    Matrix select_rows(std::span<const std::size_t> indices) const;
};

struct ImageSet {
    std::size_t rows = 0;  ///< pixel rows per image
    std::size_t cols = 0;
    Matrix pixels;         ///< one image per row, values in [0, 1]
    std::vector<int> labels;

    std::size_t size() const noexcept { return labels.size(); }
};

/// Reads an IDX image file and its label file; pixels are divided by 255.
/// Throws FormatError (with byte offset) on bad magic, count mismatch or
/// truncation.
ImageSet load_idx_images(const std::filesystem::path &image_path, const std::filesystem::path &label_path);

/// Writes IDX files; pixels are rounded back to bytes.
void write_idx_images(const std::filesystem::path &image_path, const std::filesystem::path &label_path,
                      const ImageSet &images);

/// Keeps images whose label is in `classes` (in file order, at most
/// `max_samples`, 0 = unlimited) and relabels them to their position in
/// `classes`.
ImageSet filter_classes(const ImageSet &images, std::span<const int> classes, std::size_t max_samples = 0);

/// Top-left, top-right, bottom-left, bottom-right half-size blocks, each
/// flattened row-major.
std::vector<Matrix> quadrant_partition(const ImageSet &images);

/// Inverse of quadrant_partition.
Matrix reassemble_quadrants(std::span<const Matrix> blocks, std::size_t rows, std::size_t cols);

struct TabularData {
    std::vector<std::string> feature_names;
    Matrix features;
    std::vector<int> labels;
};

/// Loads selected numeric columns and maps the label column through
/// `label_values` (value i becomes class i). Empty `feature_columns` selects
/// every column except the label. Throws ParseError with row/column.
TabularData load_tabular_csv(const std::filesystem::path &path, std::span<const std::string> feature_columns,
                             const std::string &label_column, std::span<const std::string> label_values);

/// Per-column z-scoring with statistics from a chosen set of rows.
struct Standardizer {
    std::vector<double> mean;
    std::vector<double> scale;

    /// Population mean / standard deviation over `rows`; variance is floored at 1e-12.
    static Standardizer fit(const Matrix &features, std::span<const std::size_t> rows);
    void apply(Matrix &features) const;
};

/// Contiguous column blocks of the given widths, in order.
std::vector<Matrix> vertical_split(const Matrix &features, std::span<const int> widths);

/// Indices of every minority sample plus an equal number of majority samples
/// drawn without replacement, shuffled. Binary labels only.
std::vector<std::size_t> balanced_subsample(std::span<const int> labels, RandomStream &rng);

enum class SplitTag { Train, Test };

/// Aligned per-party feature blocks plus server-held labels.
struct VerticalDataset {
    int num_classes = 2;
    SplitTag split = SplitTag::Train;
    std::vector<Matrix> party_blocks;
    std::vector<int> labels;

    std::size_t num_samples() const noexcept { return labels.size(); }
    int num_parties() const noexcept { return static_cast<int>(party_blocks.size()); }
    std::span<const double> party_row(int party, std::size_t sample) const { return party_blocks[party].row(sample); }
    std::vector<double> one_hot(std::size_t sample) const;

    VerticalDataset subset(std::span<const std::size_t> indices, SplitTag tag) const;
    /// Throws PreconditionError if a block's row count differs from the label count.
    void validate() const;
};

/// Deterministic per-epoch mini-batch order over n samples; the last partial
/// batch is kept.
class BatchSchedule {
   public:
    BatchSchedule(std::size_t num_samples, std::size_t batch_size, std::uint64_t seed);
    std::vector<std::vector<std::size_t>> epoch(std::uint64_t epoch) const;
    std::size_t num_samples() const noexcept { return num_samples_; }
    std::size_t batch_size() const noexcept { return batch_size_; }

   private:
    std::size_t num_samples_;
    std::size_t batch_size_;
    std::uint64_t seed_;
};

/// Seeded shuffle of 0..n-1 split into (train, test) index lists.
struct SplitIndices {
    std::vector<std::size_t> train;
    std::vector<std::size_t> test;
};
SplitIndices split_indices(std::size_t n, double test_fraction, std::uint64_t seed);

struct SplitBatches {
    VerticalDataset train;
    VerticalDataset test;
    BatchSchedule schedule;
};

SplitBatches split_and_batch(const VerticalDataset &dataset, double test_fraction, std::size_t batch_size,
                             std::uint64_t seed);

}  // namespace eqvfl::data
