#include "hsgd/idx.hpp"

#include <cstdio>
#include <stdexcept>

namespace hsgd {

namespace {

constexpr std::uint32_t kImagesMagic = 0x00000803u;
constexpr std::uint32_t kLabelsMagic = 0x00000801u;

std::uint32_t read_u32_be(std::span<const std::uint8_t> bytes, std::size_t at) {
  if (at + 4 > bytes.size()) throw std::invalid_argument("short read: truncated IDX header");
  return (static_cast<std::uint32_t>(bytes[at]) << 24) |
         (static_cast<std::uint32_t>(bytes[at + 1]) << 16) |
         (static_cast<std::uint32_t>(bytes[at + 2]) << 8) |
         static_cast<std::uint32_t>(bytes[at + 3]);
}

void write_u32_be(std::vector<std::uint8_t>& out, std::uint32_t v) {
  out.push_back(static_cast<std::uint8_t>(v >> 24));
  out.push_back(static_cast<std::uint8_t>(v >> 16));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v));
}

}  // namespace

IdxImages parse_idx_images(std::span<const std::uint8_t> bytes) {
  const std::uint32_t magic = read_u32_be(bytes, 0);
  if (magic != kImagesMagic) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "unrecognized magic 0x%08x (want 0x%08x)", magic, kImagesMagic);
    throw std::invalid_argument(buf);
  }
  IdxImages out;
  out.count = read_u32_be(bytes, 4);
  out.rows = read_u32_be(bytes, 8);
  out.cols = read_u32_be(bytes, 12);
  const std::size_t payload = static_cast<std::size_t>(out.count) * out.rows * out.cols;
  if (bytes.size() < 16 + payload)
    throw std::invalid_argument("short read: image payload shorter than header dims");
  out.pixels.assign(bytes.begin() + 16, bytes.begin() + 16 + payload);
  return out;
}

IdxLabels parse_idx_labels(std::span<const std::uint8_t> bytes) {
  const std::uint32_t magic = read_u32_be(bytes, 0);
  if (magic != kLabelsMagic) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "unrecognized magic 0x%08x (want 0x%08x)", magic, kLabelsMagic);
    throw std::invalid_argument(buf);
  }
  const std::uint32_t count = read_u32_be(bytes, 4);
  if (bytes.size() < 8 + count)
    throw std::invalid_argument("short read: label payload shorter than header count");
  IdxLabels out;
  out.labels.assign(bytes.begin() + 8, bytes.begin() + 8 + count);
  return out;
}

IdxFile parse_idx(std::span<const std::uint8_t> bytes) {
  const std::uint32_t magic = read_u32_be(bytes, 0);
  IdxFile out{};
  if (magic == kImagesMagic) {
    out.kind = IdxKind::images;
    out.images = parse_idx_images(bytes);
  } else if (magic == kLabelsMagic) {
    out.kind = IdxKind::labels;
    out.labels = parse_idx_labels(bytes);
  } else {
    char buf[48];
    std::snprintf(buf, sizeof buf, "unrecognized magic 0x%08x", magic);
    throw std::invalid_argument(buf);
  }
  return out;
}

std::vector<std::uint8_t> encode_idx_images(const IdxImages& images) {
  std::vector<std::uint8_t> out;
  out.reserve(16 + images.pixels.size());
  write_u32_be(out, kImagesMagic);
  write_u32_be(out, images.count);
  write_u32_be(out, images.rows);
  write_u32_be(out, images.cols);
  out.insert(out.end(), images.pixels.begin(), images.pixels.end());
  return out;
}

std::vector<std::uint8_t> encode_idx_labels(const IdxLabels& labels) {
  std::vector<std::uint8_t> out;
  out.reserve(8 + labels.labels.size());
  write_u32_be(out, kLabelsMagic);
  write_u32_be(out, static_cast<std::uint32_t>(labels.labels.size()));
  out.insert(out.end(), labels.labels.begin(), labels.labels.end());
  return out;
}

}  // namespace hsgd
