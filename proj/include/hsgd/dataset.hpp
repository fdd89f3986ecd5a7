#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "hsgd/idx.hpp"

namespace hsgd {

// Feature/label matrix with digit labels 0..9, plus the versioned binary
// cache ("HSGD" magic, u16 version, u64 n, u32 d, row-major f64 features,
// one u8 label per row, little-endian).
struct FeatureDataset {
  Eigen::MatrixXd features;  // n x d
  std::vector<int> labels;   // digit per row
};

FeatureDataset dataset_from_idx(const IdxImages& images, const IdxLabels& labels);

std::vector<std::uint8_t> serialize_cache(const FeatureDataset& ds);
FeatureDataset deserialize_cache(std::span<const std::uint8_t> bytes);
void save_cache(const std::string& path, const FeatureDataset& ds);
FeatureDataset load_cache(const std::string& path);

// Gaussian-blobs surrogate corpus: ten class means on a sphere, heavy class
// overlap so the logistic problems are non-separable at desk scale.
FeatureDataset synth_digit_corpus(std::uint64_t seed, int per_digit = 200, int dimension = 50);

// Centers columns, projects onto the top-k principal directions.
// Returns (n x k projection, d x k orthonormal basis).
std::pair<Eigen::MatrixXd, Eigen::MatrixXd> pca_reduce(const Eigen::MatrixXd& data, int k);

FeatureDataset pca_reduce_dataset(const FeatureDataset& ds, int k);

// 25 even-vs-odd binary tasks on 25 machines. Machine m draws
// round(p*2n) samples from task m's pool (without replacement) and the rest
// i.i.d. from the global mixture; digits are truncated to the smallest class
// count first.
struct TaskAssignment {
  double mixing = 0.0;  // p
  int per_digit = 0;    // n after truncation
  std::vector<std::pair<int, int>> task_digits;   // (even, odd) per machine
  std::vector<std::vector<int>> machine_rows;     // dataset row ids per machine
};

TaskAssignment build_tasks_and_assign(const FeatureDataset& ds, double mixing,
                                      std::uint64_t seed);

}  // namespace hsgd
