#include "hsgd/dataset.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include "hsgd/rng.hpp"

namespace hsgd {

namespace {

constexpr char kCacheMagic[4] = {'H', 'S', 'G', 'D'};
constexpr std::uint16_t kCacheVersion = 1;

template <typename T>
void append_le(std::vector<std::uint8_t>& out, T v) {
  std::uint8_t buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  out.insert(out.end(), buf, buf + sizeof(T));
}

template <typename T>
T read_le(std::span<const std::uint8_t> bytes, std::size_t& at) {
  if (at + sizeof(T) > bytes.size()) throw std::invalid_argument("short read: truncated cache");
  T v;
  std::memcpy(&v, bytes.data() + at, sizeof(T));
  at += sizeof(T);
  return v;
}

}  // namespace

FeatureDataset dataset_from_idx(const IdxImages& images, const IdxLabels& labels) {
  if (images.count != labels.labels.size())
    throw std::invalid_argument("image count does not match label count");
  const int n = static_cast<int>(images.count);
  const int d = static_cast<int>(images.rows * images.cols);
  FeatureDataset ds;
  ds.features.resize(n, d);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < d; ++j)
      ds.features(i, j) = images.pixels[static_cast<std::size_t>(i) * d + j] / 255.0;
  ds.labels.assign(labels.labels.begin(), labels.labels.end());
  return ds;
}

std::vector<std::uint8_t> serialize_cache(const FeatureDataset& ds) {
  const std::uint64_t n = static_cast<std::uint64_t>(ds.features.rows());
  const std::uint32_t d = static_cast<std::uint32_t>(ds.features.cols());
  if (ds.labels.size() != n) throw std::invalid_argument("label count mismatch");
  std::vector<std::uint8_t> out;
  out.reserve(4 + 2 + 8 + 4 + n * d * 8 + n);
  out.insert(out.end(), kCacheMagic, kCacheMagic + 4);
  append_le(out, kCacheVersion);
  append_le(out, n);
  append_le(out, d);
  for (std::uint64_t i = 0; i < n; ++i)
    for (std::uint32_t j = 0; j < d; ++j) append_le(out, ds.features(i, j));
  for (std::uint64_t i = 0; i < n; ++i)
    out.push_back(static_cast<std::uint8_t>(ds.labels[i]));
  return out;
}

FeatureDataset deserialize_cache(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kCacheMagic, 4) != 0)
    throw std::invalid_argument("unrecognized cache magic (want \"HSGD\")");
  std::size_t at = 4;
  const auto version = read_le<std::uint16_t>(bytes, at);
  if (version != kCacheVersion)
    throw std::invalid_argument("unsupported cache version " + std::to_string(version));
  const auto n = read_le<std::uint64_t>(bytes, at);
  const auto d = read_le<std::uint32_t>(bytes, at);
  FeatureDataset ds;
  ds.features.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  for (std::uint64_t i = 0; i < n; ++i)
    for (std::uint32_t j = 0; j < d; ++j) ds.features(i, j) = read_le<double>(bytes, at);
  ds.labels.resize(n);
  for (std::uint64_t i = 0; i < n; ++i) ds.labels[i] = read_le<std::uint8_t>(bytes, at);
  return ds;
}

void save_cache(const std::string& path, const FeatureDataset& ds) {
  const auto bytes = serialize_cache(ds);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
}

FeatureDataset load_cache(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open: " + path);
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return deserialize_cache(bytes);
}

FeatureDataset synth_digit_corpus(std::uint64_t seed, int per_digit, int dimension) {
  if (per_digit < 1 || dimension < 2) throw std::invalid_argument("bad surrogate size");
  RngStream mean_rng(seed, StreamTag::instance_gen, 0, 0, 0, 0);
  Eigen::MatrixXd means(10, dimension);
  for (int c = 0; c < 10; ++c) {
    for (int j = 0; j < dimension; ++j) means(c, j) = mean_rng.next_normal();
    means.row(c) *= 3.0 / means.row(c).norm();
  }
  const double blob_std = 2.2;  // heavy overlap keeps the tasks non-separable
  FeatureDataset ds;
  ds.features.resize(10 * per_digit, dimension);
  ds.labels.resize(10 * per_digit);
  int row = 0;
  for (int c = 0; c < 10; ++c) {
    RngStream rng(seed, StreamTag::instance_gen, 1, static_cast<std::uint64_t>(c), 0, 0);
    for (int i = 0; i < per_digit; ++i, ++row) {
      for (int j = 0; j < dimension; ++j)
        ds.features(row, j) = means(c, j) + rng.next_normal(blob_std);
      ds.labels[row] = c;
    }
  }
  return ds;
}

std::pair<Eigen::MatrixXd, Eigen::MatrixXd> pca_reduce(const Eigen::MatrixXd& data, int k) {
  const int n = static_cast<int>(data.rows());
  const int d = static_cast<int>(data.cols());
  if (k < 1 || k > std::min(n, d))
    throw std::invalid_argument("pca component count must satisfy 1 <= k <= min(n, d)");
  const Eigen::RowVectorXd mean = data.colwise().mean();
  const Eigen::MatrixXd centered = data.rowwise() - mean;
  const Eigen::MatrixXd cov = centered.transpose() * centered / static_cast<double>(n);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
  Eigen::MatrixXd basis(d, k);
  for (int j = 0; j < k; ++j) {
    Eigen::VectorXd v = eig.eigenvectors().col(d - 1 - j);  // descending variance
    int imax = 0;
    v.cwiseAbs().maxCoeff(&imax);
    if (v[imax] < 0) v = -v;  // fix sign for reproducibility
    basis.col(j) = v;
  }
  return {centered * basis, basis};
}

FeatureDataset pca_reduce_dataset(const FeatureDataset& ds, int k) {
  FeatureDataset out;
  out.features = pca_reduce(ds.features, k).first;
  out.labels = ds.labels;
  return out;
}

TaskAssignment build_tasks_and_assign(const FeatureDataset& ds, double mixing,
                                      std::uint64_t seed) {
  if (mixing < 0.0 || mixing > 1.0) throw std::invalid_argument("p must lie in [0, 1]");
  std::vector<std::vector<int>> by_digit(10);
  for (int i = 0; i < static_cast<int>(ds.labels.size()); ++i) {
    const int lbl = ds.labels[i];
    if (lbl < 0 || lbl > 9) throw std::invalid_argument("labels must be digits 0..9");
    by_digit[lbl].push_back(i);
  }
  std::size_t n = SIZE_MAX;
  for (const auto& rows : by_digit) n = std::min(n, rows.size());
  if (n == 0) throw std::invalid_argument("insufficient per-digit data: a digit is missing");
  for (auto& rows : by_digit) rows.resize(n);  // equal-size truncation

  TaskAssignment out;
  out.mixing = mixing;
  out.per_digit = static_cast<int>(n);
  const int two_n = 2 * static_cast<int>(n);
  const int n_task = static_cast<int>(std::lround(mixing * two_n));
  const int n_mix = two_n - n_task;
  const std::size_t total = 10 * n;

  int machine = 0;
  for (int even = 0; even <= 8; even += 2) {
    for (int odd = 1; odd <= 9; odd += 2, ++machine) {
      out.task_digits.emplace_back(even, odd);
      std::vector<int> pool = by_digit[even];
      pool.insert(pool.end(), by_digit[odd].begin(), by_digit[odd].end());
      RngStream rng(seed, StreamTag::data_sample, 0, static_cast<std::uint64_t>(machine), 0, 0);
      // task part: seeded partial shuffle, first n_task entries
      for (int i = 0; i < n_task; ++i) {
        const int j = i + static_cast<int>(rng.next_below(pool.size() - i));
        std::swap(pool[i], pool[j]);
      }
      std::vector<int> rows(pool.begin(), pool.begin() + n_task);
      // mixture part: i.i.d. uniform over all truncated examples
      for (int i = 0; i < n_mix; ++i) {
        const std::size_t pick = rng.next_below(total);
        rows.push_back(by_digit[pick / n][pick % n]);
      }
      out.machine_rows.push_back(std::move(rows));
    }
  }
  return out;
}

}  // namespace hsgd
