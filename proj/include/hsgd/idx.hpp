#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace hsgd {

// Big-endian IDX containers: magic 0x00000803 = 3-D image tensor,
// 0x00000801 = 1-D label vector.
struct IdxImages {
  std::uint32_t count = 0, rows = 0, cols = 0;
  std::vector<std::uint8_t> pixels;  // row-major, count*rows*cols bytes
};

struct IdxLabels {
  std::vector<std::uint8_t> labels;
};

enum class IdxKind { images, labels };

struct IdxFile {
  IdxKind kind;
  IdxImages images;  // valid when kind == images
  IdxLabels labels;  // valid when kind == labels
};

// Throws std::invalid_argument("unrecognized magic ...") on a bad magic and
// std::invalid_argument("short read ...") on a truncated payload.
IdxFile parse_idx(std::span<const std::uint8_t> bytes);
IdxImages parse_idx_images(std::span<const std::uint8_t> bytes);
IdxLabels parse_idx_labels(std::span<const std::uint8_t> bytes);

std::vector<std::uint8_t> encode_idx_images(const IdxImages& images);
std::vector<std::uint8_t> encode_idx_labels(const IdxLabels& labels);

}  // namespace hsgd
